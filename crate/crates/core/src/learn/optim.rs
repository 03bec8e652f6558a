//! Weighted exponential loss `Σ_c w_c exp(−f_c·θ)` over ±1 feature rows and
//! its minimizers: damped Newton for the smooth problem and proximal Newton
//! (coordinate-descent inner solver) for the ℓ1-penalized one.

use nalgebra::{DMatrix, DVector};

/// Weighted rows of features for the exponential loss.
#[derive(Debug, Clone)]
pub struct ExpLoss {
    dim: usize,
    features: Vec<f64>,
    weights: Vec<f64>,
}

impl ExpLoss {
    pub fn new(dim: usize) -> Self {
        ExpLoss {
            dim,
            features: Vec::new(),
            weights: Vec::new(),
        }
    }

    pub fn push_row(&mut self, features: &[f64], weight: f64) {
        debug_assert_eq!(features.len(), self.dim);
        self.features.extend_from_slice(features);
        self.weights.push(weight);
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> usize {
        self.weights.len()
    }

    fn row(&self, c: usize) -> &[f64] {
        &self.features[c * self.dim..(c + 1) * self.dim]
    }

    /// Per-row terms w_c exp(−f_c·θ).
    fn terms(&self, theta: &[f64]) -> Vec<f64> {
        (0..self.rows())
            .map(|c| {
                let z: f64 = self.row(c).iter().zip(theta).map(|(f, t)| f * t).sum();
                self.weights[c] * (-z).exp()
            })
            .collect()
    }

    pub fn value(&self, theta: &[f64]) -> f64 {
        self.terms(theta).iter().sum()
    }

    pub fn gradient(&self, theta: &[f64]) -> Vec<f64> {
        let terms = self.terms(theta);
        self.gradient_from_terms(&terms)
    }

    fn gradient_from_terms(&self, terms: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.dim];
        for (c, &e) in terms.iter().enumerate() {
            for (gk, f) in g.iter_mut().zip(self.row(c)) {
                *gk -= e * f;
            }
        }
        g
    }

    /// Σ_c e_c f_c f_cᵀ, computed as GᵀG with rows of G scaled by √e_c.
    fn hessian_from_terms(&self, terms: &[f64]) -> DMatrix<f64> {
        let mut g = DMatrix::<f64>::from_row_slice(self.rows(), self.dim, &self.features);
        for (c, &e) in terms.iter().enumerate() {
            g.row_mut(c).scale_mut(e.sqrt());
        }
        g.tr_mul(&g)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    /// Stop once the sup-norm of the gradient (or KKT residual) is at most this.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-8,
            max_iter: 10_000,
        }
    }
}

/// Outcome of a solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitReport {
    pub iterations: usize,
    /// Sup-norm of the gradient (smooth case) or KKT residual (ℓ1 case).
    pub grad_norm: f64,
    pub objective: f64,
    pub converged: bool,
}

fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

const ARMIJO: f64 = 1e-4;
const MAX_HALVINGS: usize = 60;

/// Sufficient-decrease test. Once the predicted decrease is below the
/// rounding error of the objective (a sum over many weighted rows), Armijo
/// cannot be decided, so a full step that does not increase the objective
/// beyond rounding is accepted.
fn accept(trial: f64, current: f64, alpha: f64, predicted: f64) -> bool {
    if !trial.is_finite() {
        return false;
    }
    let noise = 1e-12 * current.abs();
    trial <= current + ARMIJO * alpha * predicted || (alpha == 1.0 && -predicted <= noise && trial <= current + noise)
}

/// True once `alpha * dir` no longer changes `theta` in floating point.
fn stalled(theta: &[f64], dir: &[f64], alpha: f64) -> bool {
    theta.iter().zip(dir).all(|(t, p)| t + alpha * p == *t)
}

/// Newton direction −(H + μI)⁻¹g, raising μ until the Cholesky factorization succeeds.
fn newton_direction(h: DMatrix<f64>, g: &[f64]) -> Vec<f64> {
    let d = g.len();
    let scale = (0..d).fold(0.0f64, |m, k| m.max(h[(k, k)])).max(f64::MIN_POSITIVE);
    let mut mu = 1e-12 * scale;
    let rhs = DVector::from_iterator(d, g.iter().map(|v| -v));
    loop {
        let mut damped = h.clone();
        for k in 0..d {
            damped[(k, k)] += mu;
        }
        if let Some(chol) = damped.cholesky() {
            return chol.solve(&rhs).iter().copied().collect();
        }
        mu *= 100.0;
        if !mu.is_finite() {
            return rhs.iter().copied().collect();
        }
    }
}

/// Damped Newton with Armijo backtracking. Falls back to steepest descent
/// when the Newton step fails to decrease the objective.
pub fn minimize_newton(loss: &ExpLoss, init: Vec<f64>, opts: SolverOptions) -> (Vec<f64>, FitReport) {
    let mut theta = init;
    let mut terms = loss.terms(&theta);
    let mut value: f64 = terms.iter().sum();
    let mut iterations = 0;
    loop {
        let g = loss.gradient_from_terms(&terms);
        let grad_norm = sup_norm(&g);
        let report = |converged, iterations| FitReport {
            iterations,
            grad_norm,
            objective: value,
            converged,
        };
        if grad_norm <= opts.tol {
            return (theta, report(true, iterations));
        }
        if iterations >= opts.max_iter {
            return (theta, report(false, iterations));
        }
        iterations += 1;

        let newton = newton_direction(loss.hessian_from_terms(&terms), &g);
        let steepest: Vec<f64> = g.iter().map(|v| -v).collect();
        let mut accepted = None;
        for dir in [newton, steepest] {
            let slope: f64 = dir.iter().zip(&g).map(|(p, q)| p * q).sum();
            if !(slope < 0.0) {
                continue;
            }
            let mut alpha = 1.0;
            for _ in 0..MAX_HALVINGS {
                if stalled(&theta, &dir, alpha) {
                    break;
                }
                let trial: Vec<f64> = theta.iter().zip(&dir).map(|(t, p)| t + alpha * p).collect();
                let trial_terms = loss.terms(&trial);
                let trial_value: f64 = trial_terms.iter().sum();
                if accept(trial_value, value, alpha, slope) {
                    accepted = Some((trial, trial_terms, trial_value));
                    break;
                }
                alpha *= 0.5;
            }
            if accepted.is_some() {
                break;
            }
        }
        match accepted {
            Some((t, tt, v)) => {
                theta = t;
                terms = tt;
                value = v;
            }
            // No descent possible at machine precision.
            None => return (theta, report(false, iterations)),
        }
    }
}

/// KKT residual of `loss + Σ_k penalty_k |θ_k|`.
fn kkt_residual(g: &[f64], theta: &[f64], penalty: &[f64]) -> f64 {
    g.iter()
        .zip(theta)
        .zip(penalty)
        .map(|((&gk, &tk), &lk)| {
            if lk == 0.0 {
                gk.abs()
            } else if tk != 0.0 {
                (gk + lk * tk.signum()).abs()
            } else {
                (gk.abs() - lk).max(0.0)
            }
        })
        .fold(0.0, f64::max)
}

fn soft_threshold(z: f64, t: f64) -> f64 {
    if z > t {
        z - t
    } else if z < -t {
        z + t
    } else {
        0.0
    }
}

/// Replaces the coordinate-descent step by the exact minimizer of the
/// quadratic model on the support it found, when that minimizer keeps every
/// sign. Coordinate descent alone converges slowly on ill-conditioned models.
fn refine_on_support(h: &DMatrix<f64>, ridge: f64, g: &[f64], theta: &[f64], penalty: &[f64], delta: &mut [f64]) {
    let support: Vec<usize> = (0..g.len())
        .filter(|&k| penalty[k] == 0.0 || theta[k] + delta[k] != 0.0)
        .collect();
    if support.is_empty() {
        return;
    }
    let m = support.len();
    let sign = |k: usize| (theta[k] + delta[k]).signum();
    let reduced = DMatrix::from_fn(m, m, |a, b| h[(support[a], support[b])] + if a == b { ridge } else { 0.0 });
    let rhs = DVector::from_iterator(
        m,
        support.iter().map(|&k| {
            let pen = if penalty[k] == 0.0 { 0.0 } else { penalty[k] * sign(k) };
            -(g[k] + pen)
        }),
    );
    let Some(chol) = reduced.cholesky() else {
        return;
    };
    let step = chol.solve(&rhs);
    let consistent = support
        .iter()
        .zip(step.iter())
        .all(|(&k, &dk)| penalty[k] == 0.0 || (theta[k] + dk).signum() == sign(k));
    if !consistent {
        return;
    }
    let mut refined = vec![0.0; g.len()];
    for (&k, &dk) in support.iter().zip(step.iter()) {
        refined[k] = dk;
    }
    let bounded = sup_norm(&refined) <= 10.0 * sup_norm(delta).max(1.0);
    if bounded && model_value(h, g, theta, penalty, &refined) <= model_value(h, g, theta, penalty, delta) {
        delta.copy_from_slice(&refined);
    }
}

/// gᵀδ + ½δᵀHδ + Σ λ_k |θ_k + δ_k|.
fn model_value(h: &DMatrix<f64>, g: &[f64], theta: &[f64], penalty: &[f64], delta: &[f64]) -> f64 {
    let d = g.len();
    let mut quad = 0.0;
    for a in 0..d {
        if delta[a] == 0.0 {
            continue;
        }
        let row: f64 = (0..d).map(|b| h[(a, b)] * delta[b]).sum();
        quad += delta[a] * row;
    }
    let lin: f64 = g.iter().zip(delta).map(|(x, y)| x * y).sum();
    let target: Vec<f64> = theta.iter().zip(delta).map(|(t, p)| t + p).collect();
    lin + 0.5 * quad + l1(&target, penalty)
}

fn l1(theta: &[f64], penalty: &[f64]) -> f64 {
    theta.iter().zip(penalty).map(|(t, l)| l * t.abs()).sum()
}

/// Proximal Newton for `loss + Σ_k penalty_k |θ_k|` (penalty 0 leaves a
/// coordinate unpenalized). The quadratic model is minimized by cyclic
/// coordinate descent; the step is accepted with a composite Armijo test.
pub fn minimize_l1_prox_newton(
    loss: &ExpLoss,
    init: Vec<f64>,
    penalty: &[f64],
    opts: SolverOptions,
) -> (Vec<f64>, FitReport) {
    let d = loss.dim();
    let mut theta = init;
    let mut terms = loss.terms(&theta);
    let mut smooth: f64 = terms.iter().sum();
    let mut iterations = 0;
    loop {
        let g = loss.gradient_from_terms(&terms);
        let residual = kkt_residual(&g, &theta, penalty);
        let objective = smooth + l1(&theta, penalty);
        let report = |converged, iterations| FitReport {
            iterations,
            grad_norm: residual,
            objective,
            converged,
        };
        if residual <= opts.tol {
            return (theta, report(true, iterations));
        }
        if iterations >= opts.max_iter {
            return (theta, report(false, iterations));
        }
        iterations += 1;

        let h = loss.hessian_from_terms(&terms);
        let scale = (0..d).fold(0.0f64, |m, k| m.max(h[(k, k)])).max(f64::MIN_POSITIVE);
        let ridge = 1e-12 * scale;
        // Coordinate descent on gᵀδ + ½δᵀHδ + Σ λ_k |θ_k + δ_k|.
        let mut delta = vec![0.0; d];
        let mut h_delta = vec![0.0; d];
        for _sweep in 0..500 {
            let mut biggest: f64 = 0.0;
            for k in 0..d {
                let a = h[(k, k)] + ridge;
                let b = g[k] + h_delta[k] - h[(k, k)] * delta[k];
                let target = theta[k] - b / a;
                let new_value = soft_threshold(target, penalty[k] / a);
                let new_delta = new_value - theta[k];
                let change = new_delta - delta[k];
                if change != 0.0 {
                    for j in 0..d {
                        h_delta[j] += h[(j, k)] * change;
                    }
                    delta[k] = new_delta;
                    biggest = biggest.max(change.abs());
                }
            }
            let size = sup_norm(&delta).max(1.0);
            if biggest <= 1e-13 * size {
                break;
            }
        }

        refine_on_support(&h, ridge, &g, &theta, penalty, &mut delta);

        let base = l1(&theta, penalty);
        let mut accepted = None;
        // Proximal-gradient step as a fallback direction.
        let lipschitz = scale.max(1e-12);
        let prox_grad: Vec<f64> = (0..d)
            .map(|k| soft_threshold(theta[k] - g[k] / lipschitz, penalty[k] / lipschitz) - theta[k])
            .collect();
        for dir in [delta, prox_grad] {
            let target: Vec<f64> = theta.iter().zip(&dir).map(|(t, p)| t + p).collect();
            let decrease: f64 =
                dir.iter().zip(&g).map(|(p, q)| p * q).sum::<f64>() + l1(&target, penalty) - base;
            if !(decrease < 0.0) {
                continue;
            }
            let mut alpha = 1.0;
            for _ in 0..MAX_HALVINGS {
                if stalled(&theta, &dir, alpha) {
                    break;
                }
                let trial: Vec<f64> = theta.iter().zip(&dir).map(|(t, p)| t + alpha * p).collect();
                let trial_terms = loss.terms(&trial);
                let trial_smooth: f64 = trial_terms.iter().sum();
                let total = trial_smooth + l1(&trial, penalty);
                if accept(total, smooth + base, alpha, decrease) {
                    accepted = Some((trial, trial_terms, trial_smooth));
                    break;
                }
                alpha *= 0.5;
            }
            if accepted.is_some() {
                break;
            }
        }
        match accepted {
            Some((t, tt, v)) => {
                theta = t;
                terms = tt;
                smooth = v;
            }
            None => return (theta, report(false, iterations)),
        }
    }
}
