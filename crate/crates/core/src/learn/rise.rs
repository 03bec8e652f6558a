use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::metrics::SampleSet;

use super::optim::{minimize_l1_prox_newton, ExpLoss, FitReport, SolverOptions};

pub const DEFAULT_EDGE_THRESHOLD: f64 = 0.1;

/// `sqrt(ln(20 n²) / m)`.
pub fn default_lambda(n: usize, m: f64) -> f64 {
    ((20.0 * (n * n) as f64).ln() / m).sqrt()
}

/// Per-node pairwise estimates.
#[derive(Debug, Clone)]
pub struct RiseEstimate {
    n: usize,
    fields: Vec<f64>,
    /// Row `i` holds θ_{i←j}; the diagonal is zero.
    couplings: Vec<f64>,
    reports: Vec<FitReport>,
}

impl RiseEstimate {
    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn fields(&self) -> &[f64] {
        &self.fields
    }

    /// θ_{i←j} estimated from node `i`'s regression.
    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        self.couplings[i * self.n + j]
    }

    pub fn reports(&self) -> &[FitReport] {
        &self.reports
    }

    pub fn converged(&self) -> bool {
        self.reports.iter().all(|r| r.converged)
    }

    /// Edges with `max(|θ_{i←j}|, |θ_{j←i}|) > threshold`.
    pub fn graph(&self, threshold: f64) -> Graph {
        let mut edges = Vec::new();
        for i in 0..self.n {
            for j in i + 1..self.n {
                if self.coupling(i, j).abs().max(self.coupling(j, i).abs()) > threshold {
                    edges.push((i, j));
                }
            }
        }
        Graph::new(self.n, edges).expect("pairs are in range and distinct")
    }
}

/// Solves the ℓ1-penalized screening problem for every node. The field is
/// left unpenalized.
pub fn rise_estimate(samples: &SampleSet, lambda: f64, opts: SolverOptions) -> Result<RiseEstimate> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidArgument(format!("lambda must be nonnegative, got {lambda}")));
    }
    let n = samples.node_count();
    let data = samples.compress();
    let total = data.total_weight();
    if !(total > 0.0) {
        return Err(Error::ZeroWeight);
    }
    let fits: Vec<(Vec<f64>, FitReport)> = (0..n)
        .into_par_iter()
        .map(|i| {
            // Coordinate 0 is the field; coordinate k > 0 is the coupling to
            // the k-th other node in ascending order.
            let mut loss = ExpLoss::new(n);
            let mut row = vec![0.0; n];
            for (x, w) in data.rows() {
                let xi = f64::from(x[i]);
                row[0] = xi;
                let mut k = 1;
                for (j, &xj) in x.iter().enumerate() {
                    if j != i {
                        row[k] = xi * f64::from(xj);
                        k += 1;
                    }
                }
                loss.push_row(&row, w / total);
            }
            let mut pen = vec![lambda; n];
            pen[0] = 0.0;
            minimize_l1_prox_newton(&loss, vec![0.0; n], &pen, opts)
        })
        .collect();
    let mut fields = vec![0.0; n];
    let mut couplings = vec![0.0; n * n];
    let mut reports = Vec::with_capacity(n);
    for (i, (theta, report)) in fits.into_iter().enumerate() {
        fields[i] = theta[0];
        let mut k = 1;
        for j in 0..n {
            if j != i {
                couplings[i * n + j] = theta[k];
                k += 1;
            }
        }
        reports.push(report);
    }
    Ok(RiseEstimate {
        n,
        fields,
        couplings,
        reports,
    })
}

/// Learns the interaction graph; non-convergence of any node is an error.
pub fn rise_learn_structure(
    samples: &SampleSet,
    lambda: f64,
    edge_threshold: f64,
    opts: SolverOptions,
) -> Result<Graph> {
    if !(edge_threshold > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "edge threshold must be positive, got {edge_threshold}"
        )));
    }
    let est = rise_estimate(samples, lambda, opts)?;
    if let Some((node, r)) = est.reports.iter().enumerate().find(|(_, r)| !r.converged) {
        return Err(Error::NotConverged {
            node,
            iterations: r.iterations,
            grad_norm: r.grad_norm,
        });
    }
    Ok(est.graph(edge_threshold))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_lattice;
    use crate::ising::{enumerate_distribution, make_ferromagnet, sample_exact};

    #[test]
    fn free_spins_have_no_edges() {
        let m = make_ferromagnet(&Graph::empty(6));
        let d = enumerate_distribution(&m).unwrap();
        let s = sample_exact(&d, 100_000, 1);
        let g = rise_learn_structure(&s, default_lambda(6, 1e5), DEFAULT_EDGE_THRESHOLD, SolverOptions::default()).unwrap();
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn small_ferro_lattice_recovered() {
        let truth = build_lattice(3);
        let d = enumerate_distribution(&make_ferromagnet(&truth)).unwrap();
        let s = sample_exact(&d, 100_000, 8);
        let g = rise_learn_structure(&s, default_lambda(9, 1e5), 0.3, SolverOptions::default()).unwrap();
        assert_eq!(g.edges(), truth.edges());
    }

    #[test]
    fn single_sample_is_finite() {
        let s = SampleSet::from_rows(4, [[1i8, -1, 1, 1]]).unwrap();
        let est = rise_estimate(&s, default_lambda(4, 1.0), SolverOptions::default()).unwrap();
        assert!(est.fields().iter().all(|f| f.is_finite()));
        for i in 0..4 {
            for j in 0..4 {
                assert!(est.coupling(i, j).is_finite());
            }
        }
        assert_eq!(est.graph(DEFAULT_EDGE_THRESHOLD).node_count(), 4);
    }

    #[test]
    fn negative_lambda_rejected() {
        let s = SampleSet::from_rows(2, [[1i8, 1]]).unwrap();
        assert!(rise_estimate(&s, -1.0, SolverOptions::default()).is_err());
        assert!(rise_learn_structure(&s, 0.1, 0.0, SolverOptions::default()).is_err());
    }
}
