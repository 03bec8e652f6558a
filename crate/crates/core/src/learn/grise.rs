use crate::armodel::{monomial, ConditionalModel, InteractionBasis};
use crate::error::{Error, Result};

use super::optim::{minimize_newton, ExpLoss, FitReport, SolverOptions};
use super::stats::SufficientStats;

/// The interaction-screening objective `Σ_c w_c exp(−x_node^c Σ_S θ_S Π_{j∈S} x_j^c)`
/// as an exponential loss over the stored patterns.
pub fn grise_objective(stats: &SufficientStats, basis: &InteractionBasis) -> Result<ExpLoss> {
    if basis.node() != stats.node() || basis.parents() != stats.parents() {
        return Err(Error::InvalidArgument(format!(
            "basis for node {} does not match statistics for node {}",
            basis.node(),
            stats.node()
        )));
    }
    let mut loss = ExpLoss::new(basis.len());
    let mut row = vec![0.0; basis.len()];
    for &(pattern, w) in stats.entries() {
        let spin = if pattern & 1 == 1 { 1.0 } else { -1.0 };
        let bits = pattern >> 1;
        for (f, &s) in row.iter_mut().zip(basis.subsets()) {
            *f = spin * monomial(s, bits);
        }
        loss.push_row(&row, w);
    }
    Ok(loss)
}

/// Minimizes the objective from `init`, reporting rather than failing on
/// non-convergence.
pub fn grise_solve(
    stats: &SufficientStats,
    basis: &InteractionBasis,
    init: Vec<f64>,
    opts: SolverOptions,
) -> Result<(ConditionalModel, FitReport)> {
    let loss = grise_objective(stats, basis)?;
    if init.len() != basis.len() {
        return Err(Error::LengthMismatch {
            expected: basis.len(),
            got: init.len(),
        });
    }
    let (theta, report) = minimize_newton(&loss, init, opts);
    Ok((ConditionalModel::new(basis.clone(), theta)?, report))
}

/// Fits the conditional of `stats.node()` from zero; non-convergence is an error.
pub fn grise_fit(
    stats: &SufficientStats,
    basis: &InteractionBasis,
    opts: SolverOptions,
) -> Result<(ConditionalModel, FitReport)> {
    let (model, report) = grise_solve(stats, basis, vec![0.0; basis.len()], opts)?;
    if !report.converged {
        return Err(Error::NotConverged {
            node: stats.node(),
            iterations: report.iterations,
            grad_norm: report.grad_norm,
        });
    }
    Ok((model, report))
}
