//! Conditional estimation by interaction screening (GRISE) and pairwise
//! structure learning (RISE).

mod grise;
mod optim;
mod rise;
mod stats;

pub use grise::{grise_fit, grise_objective, grise_solve};
pub use optim::{minimize_l1_prox_newton, minimize_newton, ExpLoss, FitReport, SolverOptions};
pub use rise::{default_lambda, rise_estimate, rise_learn_structure, RiseEstimate, DEFAULT_EDGE_THRESHOLD};
pub use stats::{collect_stats, DataSource, SufficientStats, MAX_STATS_PARENTS};

use rayon::prelude::*;

use crate::armodel::{build_basis, ARModel};
use crate::error::{Error, Result};
use crate::graph::{parent_sets, Graph};
use crate::ordering::Ordering;

/// Fits every conditional of the decomposition along `sigma` and returns the
/// model together with one report per node. Non-convergence is reported, not
/// raised.
pub fn fit_ar_model_with_reports(
    g: &Graph,
    sigma: &Ordering,
    max_order: usize,
    source: DataSource<'_>,
    opts: SolverOptions,
) -> Result<(ARModel, Vec<FitReport>)> {
    if max_order == 0 {
        return Err(Error::InvalidArgument("conditional order must be at least 1".into()));
    }
    if source.node_count() != g.node_count() {
        return Err(Error::LengthMismatch {
            expected: g.node_count(),
            got: source.node_count(),
        });
    }
    let ps = parent_sets(g, sigma)?;
    let fits: Vec<_> = (0..g.node_count())
        .into_par_iter()
        .map(|v| {
            let basis = build_basis(v, ps.of(v), max_order)?;
            let stats = collect_stats(source, v, ps.of(v))?;
            grise_solve(&stats, &basis, vec![0.0; basis.len()], opts)
        })
        .collect::<Result<_>>()?;
    let (conditionals, reports) = fits.into_iter().unzip();
    Ok((ARModel::new(ps, conditionals)?, reports))
}

/// As [`fit_ar_model_with_reports`], failing with the id of the first node
/// whose fit did not converge.
pub fn fit_ar_model(
    g: &Graph,
    sigma: &Ordering,
    max_order: usize,
    source: DataSource<'_>,
    opts: SolverOptions,
) -> Result<ARModel> {
    let (model, reports) = fit_ar_model_with_reports(g, sigma, max_order, source, opts)?;
    if let Some((node, r)) = reports.iter().enumerate().find(|(_, r)| !r.converged) {
        return Err(Error::NotConverged {
            node,
            iterations: r.iterations,
            grad_norm: r.grad_norm,
        });
    }
    Ok(model)
}
