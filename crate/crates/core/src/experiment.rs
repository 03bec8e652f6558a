//! Config-driven experiments comparing orderings by sampling error.
//!
//! Every random draw is seeded from the base seed and a label, so a config
//! and seed determine the output exactly, independent of thread count:
//!
//! * training data for trial `t` at size `M_l`: `base ^ hash(kind, "data", M_l, t)`;
//!   the same data is shared by all orderings and orders so that curves are
//!   compared on common samples;
//! * model instance for trial `t` (fresh spin glasses): `base ^ hash(kind, "model", t)`;
//! * ancestral samples: `base ^ hash(kind, ordering, O, M_l, M_s, t)`;
//! * baseline samples: `base ^ hash(kind, "baseline", M_s, t)`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::armodel::ancestral_sample;
use crate::error::{Error, Result};
use crate::gibbs::two_chain_ferro_thinned;
use crate::graph::{build_lattice, Graph};
use crate::io::{read_graph, read_model, read_ordering, read_samples, SampleFormat};
use crate::ising::{
    enumerate_distribution, exact_moments, make_ferromagnet, make_spin_glass, sample_exact, ExactDistribution,
    IsingModel, SpinGlassMode,
};
use crate::learn::{default_lambda, fit_ar_model_with_reports, rise_estimate, DataSource, SolverOptions};
use crate::metrics::{empirical_moments, mean_std, sampling_error, symmetrized_moments, MomentSummary};
use crate::ordering::{checkerboard, diagonal, sequential, Ordering};
use crate::rng::stable_hash;

pub const CSV_HEADER: &str = "experiment,ordering,order_O,m_l,m_s,trial,epsilon,converged";
pub const BASELINE: &str = "baseline";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    SampleLearning,
    ExactLearning,
    GibbsLearning,
    Dataset,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::SampleLearning => "sample_learning",
            ExperimentKind::ExactLearning => "exact_learning",
            ExperimentKind::GibbsLearning => "gibbs_learning",
            ExperimentKind::Dataset => "dataset",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    Ferromagnet,
    SpinGlass {
        mode: SpinGlassMode,
        /// Fixed instance seed; ignored when `fresh_per_trial` is set.
        #[serde(default)]
        seed: u64,
        #[serde(default = "yes")]
        fresh_per_trial: bool,
    },
    File {
        path: PathBuf,
    },
}

fn yes() -> bool {
    true
}

impl Default for ModelSpec {
    fn default() -> Self {
        ModelSpec::Ferromagnet
    }
}

/// A named generator (`sequential`, `checkerboard`, `diagonal`, `random:<seed>`)
/// or an ordering file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OrderingSpec {
    Named(String),
    File { name: String, file: PathBuf },
}

impl OrderingSpec {
    pub fn name(&self) -> &str {
        match self {
            OrderingSpec::Named(s) => s,
            OrderingSpec::File { name, .. } => name,
        }
    }

    fn resolve(&self, n: usize, lattice: Option<usize>, base_dir: &Path) -> Result<Ordering> {
        let need_lattice = || {
            lattice.ok_or_else(|| {
                Error::InvalidArgument(format!("ordering `{}` needs a lattice", self.name()))
            })
        };
        match self {
            OrderingSpec::File { file, .. } => read_ordering(&base_dir.join(file), n),
            OrderingSpec::Named(s) => match s.as_str() {
                "sequential" => Ok(sequential(need_lattice()?)),
                "checkerboard" => Ok(checkerboard(need_lattice()?)),
                "diagonal" => diagonal(need_lattice()?),
                other => match other.strip_prefix("random:") {
                    Some(seed) => {
                        let seed = seed.parse().map_err(|_| {
                            Error::InvalidArgument(format!("bad random ordering seed in `{other}`"))
                        })?;
                        Ok(Ordering::random(n, seed))
                    }
                    None => Err(Error::InvalidArgument(format!("unknown ordering `{other}`"))),
                },
            },
        }
    }
}

fn default_trials() -> usize {
    20
}
fn default_tol() -> f64 {
    1e-8
}
fn default_max_iter() -> usize {
    10_000
}
fn default_threshold() -> f64 {
    crate::learn::DEFAULT_EDGE_THRESHOLD
}
fn default_burn_in() -> usize {
    10_000
}
fn default_thin() -> usize {
    1
}
fn default_format() -> SampleFormat {
    SampleFormat::Counted
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    /// Value of the `experiment` column; defaults to the kind.
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub lattice: Option<usize>,
    #[serde(default)]
    pub graph: Option<PathBuf>,
    #[serde(default)]
    pub model: ModelSpec,
    pub orderings: Vec<OrderingSpec>,
    pub orders: Vec<usize>,
    #[serde(default)]
    pub m_l: Vec<usize>,
    pub m_s: Vec<usize>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    /// Structure-learning penalty; defaults to `sqrt(ln(20 n²) / m)`.
    #[serde(default)]
    pub lambda: Option<f64>,
    #[serde(default = "default_threshold")]
    pub edge_threshold: f64,
    /// Skip structure learning and use the generating graph.
    #[serde(default)]
    pub true_graph: bool,
    #[serde(default = "yes")]
    pub baseline: bool,
    #[serde(default = "default_burn_in")]
    pub burn_in: usize,
    #[serde(default = "default_thin")]
    pub thin: usize,
    /// Gibbs reference from a two-chain run of this many samples instead of
    /// enumeration.
    #[serde(default)]
    pub reference_samples: Option<usize>,
    #[serde(default)]
    pub dataset: Option<PathBuf>,
    #[serde(default = "default_format")]
    pub dataset_format: SampleFormat,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn experiment_name(&self) -> &str {
        self.name.as_deref().unwrap_or(self.kind.as_str())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.to_string()));
        if self.trials == 0 {
            return bad("trials must be at least 1");
        }
        if self.orderings.is_empty() {
            return bad("at least one ordering is required");
        }
        let mut names: Vec<&str> = self.orderings.iter().map(|o| o.name()).collect();
        names.sort_unstable();
        if names.windows(2).any(|w| w[0] == w[1]) || names.contains(&BASELINE) {
            return bad("ordering names must be distinct and not `baseline`");
        }
        if names.iter().chain([&self.experiment_name()]).any(|n| n.is_empty() || n.contains([',', '\n', '\'']))
        {
            return bad("names must be non-empty and free of commas, quotes and newlines");
        }
        if self.orders.is_empty() || self.orders.contains(&0) {
            return bad("orders must be a non-empty list of positive integers");
        }
        if self.m_s.is_empty() || self.m_s.contains(&0) {
            return bad("m_s must be a non-empty list of positive integers");
        }
        if self.m_l.contains(&0) {
            return bad("m_l entries must be positive");
        }
        let needs_m_l = matches!(self.kind, ExperimentKind::SampleLearning | ExperimentKind::GibbsLearning);
        if needs_m_l && self.m_l.is_empty() {
            return bad("m_l must be a non-empty list for this experiment kind");
        }
        if !(self.tol > 0.0) || self.max_iter == 0 {
            return bad("tol and max_iter must be positive");
        }
        if !(self.edge_threshold > 0.0) {
            return bad("edge_threshold must be positive");
        }
        if matches!(self.lambda, Some(l) if !(l >= 0.0)) {
            return bad("lambda must be nonnegative");
        }
        if self.thin == 0 || self.reference_samples == Some(0) {
            return bad("thin and reference_samples must be positive");
        }
        if self.kind == ExperimentKind::Dataset {
            if self.dataset.is_none() {
                return bad("dataset experiments need a `dataset` file");
            }
        } else if self.lattice.is_none() && self.graph.is_none() && !matches!(self.model, ModelSpec::File { .. }) {
            return bad("one of `lattice`, `graph` or a model file is required");
        }
        Ok(())
    }

    fn solver(&self) -> SolverOptions {
        SolverOptions {
            tol: self.tol,
            max_iter: self.max_iter,
        }
    }
}

/// One row of the results table.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub experiment: String,
    pub ordering: String,
    pub order: usize,
    pub m_l: usize,
    pub m_s: usize,
    pub trial: usize,
    pub epsilon: f64,
    pub converged: bool,
}

impl ResultRow {
    pub fn to_csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.experiment, self.ordering, self.order, self.m_l, self.m_s, self.trial, self.epsilon, self.converged
        )
    }
}

pub fn to_csv(rows: &[ResultRow]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&r.to_csv_line());
        s.push('\n');
    }
    s
}

pub fn parse_csv(text: &str) -> Result<Vec<ResultRow>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == CSV_HEADER => {}
        _ => {
            return Err(Error::Parse {
                line: 1,
                msg: "missing results header".into(),
            })
        }
    }
    let mut rows = Vec::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let err = |msg: &str| Error::Parse {
            line: idx + 1,
            msg: msg.to_string(),
        };
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 8 {
            return Err(err("expected 8 fields"));
        }
        let int = |s: &str| s.parse::<usize>().map_err(|_| err("bad integer"));
        rows.push(ResultRow {
            experiment: f[0].to_string(),
            ordering: f[1].to_string(),
            order: int(f[2])?,
            m_l: int(f[3])?,
            m_s: int(f[4])?,
            trial: int(f[5])?,
            epsilon: f[6].parse().map_err(|_| err("bad epsilon"))?,
            converged: f[7].parse().map_err(|_| err("bad converged flag"))?,
        });
    }
    Ok(rows)
}

/// Mean and standard deviation of ε over trials.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub experiment: String,
    pub ordering: String,
    pub order: usize,
    pub m_l: usize,
    pub m_s: usize,
    pub trials: usize,
    pub mean: f64,
    pub std: f64,
    pub converged: usize,
}

/// Groups rows by (experiment, ordering, O, M_l, M_s), keeping first-seen order.
pub fn summarize(rows: &[ResultRow]) -> Vec<SummaryRow> {
    let mut keys: Vec<(&str, &str, usize, usize, usize)> = Vec::new();
    let mut groups: Vec<Vec<&ResultRow>> = Vec::new();
    for r in rows {
        let key = (r.experiment.as_str(), r.ordering.as_str(), r.order, r.m_l, r.m_s);
        match keys.iter().position(|k| *k == key) {
            Some(i) => groups[i].push(r),
            None => {
                keys.push(key);
                groups.push(vec![r]);
            }
        }
    }
    keys.into_iter()
        .zip(groups)
        .map(|((e, o, order, m_l, m_s), g)| {
            let eps: Vec<f64> = g.iter().map(|r| r.epsilon).collect();
            let (mean, std) = mean_std(&eps);
            SummaryRow {
                experiment: e.to_string(),
                ordering: o.to_string(),
                order,
                m_l,
                m_s,
                trials: g.len(),
                mean,
                std,
                converged: g.iter().filter(|r| r.converged).count(),
            }
        })
        .collect()
}

pub const SUMMARY_HEADER: &str = "experiment,ordering,order_O,m_l,m_s,trials,mean_epsilon,std_epsilon,converged";

pub fn summary_csv(summary: &[SummaryRow]) -> String {
    let mut s = String::from(SUMMARY_HEADER);
    s.push('\n');
    for r in summary {
        writeln!(
            s,
            "{},{},{},{},{},{},{},{},{}",
            r.experiment, r.ordering, r.order, r.m_l, r.m_s, r.trials, r.mean, r.std, r.converged
        )
        .unwrap();
    }
    s
}

/// Gnuplot script drawing mean ε with standard-deviation bars on log-log
/// axes, one curve per (ordering, O). The x axis is M_l for learning curves
/// and M_s otherwise. Curves read from `summary_file`.
pub fn gnuplot_script(summary: &[SummaryRow], summary_file: &str, output_png: &str) -> String {
    let by_m_l = summary.iter().any(|r| r.m_l > 0 && r.ordering != BASELINE)
        && summary.iter().map(|r| r.m_l).filter(|&m| m > 0).collect::<std::collections::BTreeSet<_>>().len() > 1;
    let (xcol, xlabel) = if by_m_l { (4, "M_l") } else { (5, "M_s") };
    let mut curves: Vec<(String, usize)> = Vec::new();
    for r in summary {
        let key = (r.ordering.clone(), r.order);
        if !curves.contains(&key) {
            curves.push(key);
        }
    }
    let mut s = String::new();
    writeln!(s, "set datafile separator ','").unwrap();
    writeln!(s, "set terminal pngcairo size 900,600").unwrap();
    writeln!(s, "set output '{output_png}'").unwrap();
    writeln!(s, "set logscale xy").unwrap();
    writeln!(s, "set xlabel '{xlabel}'").unwrap();
    writeln!(s, "set ylabel 'epsilon'").unwrap();
    writeln!(s, "set key outside right").unwrap();
    let plots: Vec<String> = curves
        .iter()
        .map(|(o, order)| {
            let filter = if o == BASELINE {
                format!("strcol(2) eq '{o}'")
            } else {
                format!("strcol(2) eq '{o}' && $3 == {order}")
            };
            let title = if o == BASELINE { o.clone() } else { format!("{o} O={order}") };
            format!(
                "'{summary_file}' skip 1 using (({filter}) ? ${xcol} : 1/0):7:8 with yerrorlines title '{title}'"
            )
        })
        .collect();
    writeln!(s, "plot {}", plots.join(", \\\n     ")).unwrap();
    s
}

fn seed_for(base: u64, parts: &[&str]) -> u64 {
    let bytes: Vec<&[u8]> = parts.iter().map(|p| p.as_bytes()).collect();
    base ^ stable_hash(&bytes)
}

/// Shared inputs of a run after resolving files and generators.
struct Setup {
    kind: &'static str,
    name: String,
    graph: Graph,
    orderings: Vec<(String, Ordering)>,
    /// `Some` when every trial shares the model.
    fixed_model: Option<Arc<Instance>>,
}

struct Instance {
    model: IsingModel,
    dist: Option<ExactDistribution>,
}

fn base_graph(cfg: &ExperimentConfig, base_dir: &Path) -> Result<Graph> {
    match (&cfg.model, cfg.lattice, &cfg.graph) {
        (ModelSpec::File { path }, _, _) => Ok(read_model(&base_dir.join(path))?.graph().clone()),
        (_, Some(side), None) => {
            if side == 0 {
                return Err(Error::InvalidArgument("lattice side must be positive".into()));
            }
            Ok(build_lattice(side))
        }
        (_, _, Some(path)) => read_graph(&base_dir.join(path)),
        (_, None, None) => Err(Error::InvalidArgument("no graph given".into())),
    }
}

fn make_model(cfg: &ExperimentConfig, g: &Graph, base_dir: &Path, trial: Option<usize>) -> Result<IsingModel> {
    match &cfg.model {
        ModelSpec::Ferromagnet => Ok(make_ferromagnet(g)),
        ModelSpec::SpinGlass {
            mode,
            seed,
            fresh_per_trial,
        } => {
            let s = match trial {
                Some(t) if *fresh_per_trial => seed_for(cfg.seed, &[cfg.kind.as_str(), "model", &t.to_string()]),
                _ => *seed,
            };
            Ok(make_spin_glass(g, s, *mode))
        }
        ModelSpec::File { path } => read_model(&base_dir.join(path)),
    }
}

fn fresh_models(cfg: &ExperimentConfig) -> bool {
    matches!(
        cfg.model,
        ModelSpec::SpinGlass {
            fresh_per_trial: true,
            ..
        }
    )
}

fn prepare(cfg: &ExperimentConfig, base_dir: &Path, need_dist: bool) -> Result<Setup> {
    cfg.validate()?;
    let graph = base_graph(cfg, base_dir)?;
    let n = graph.node_count();
    let orderings = cfg
        .orderings
        .iter()
        .map(|o| Ok((o.name().to_string(), o.resolve(n, cfg.lattice, base_dir)?)))
        .collect::<Result<Vec<_>>>()?;
    let instance = |model: IsingModel| -> Result<Instance> {
        let dist = if need_dist { Some(enumerate_distribution(&model)?) } else { None };
        Ok(Instance { model, dist })
    };
    let fixed_model = if fresh_models(cfg) {
        None
    } else {
        Some(Arc::new(instance(make_model(cfg, &graph, base_dir, None)?)?))
    };
    Ok(Setup {
        kind: cfg.kind.as_str(),
        name: cfg.experiment_name().to_string(),
        graph,
        orderings,
        fixed_model,
    })
}

impl Setup {
    fn instance(&self, cfg: &ExperimentConfig, base_dir: &Path, t: usize, need_dist: bool) -> Result<Arc<Instance>> {
        if let Some(m) = &self.fixed_model {
            return Ok(Arc::clone(m));
        }
        let model = make_model(cfg, &self.graph, base_dir, Some(t))?;
        let dist = if need_dist { Some(enumerate_distribution(&model)?) } else { None };
        Ok(Arc::new(Instance { model, dist }))
    }

    fn row(&self, ordering: &str, order: usize, m_l: usize, m_s: usize, trial: usize, epsilon: f64, converged: bool) -> ResultRow {
        ResultRow {
            experiment: self.name.clone(),
            ordering: ordering.to_string(),
            order,
            m_l,
            m_s,
            trial,
            epsilon,
            converged,
        }
    }

    /// Learns the graph (or takes the generating one), then fits and samples
    /// every (ordering, O, M_s) combination against `reference`.
    #[allow(clippy::too_many_arguments)]
    fn evaluate(
        &self,
        cfg: &ExperimentConfig,
        truth: &Graph,
        data: DataSource<'_>,
        reference: &MomentSummary,
        m_l: usize,
        trial: usize,
        learn_structure: bool,
        out: &mut Vec<ResultRow>,
    ) -> Result<()> {
        let (graph, structure_ok) = match data {
            DataSource::Samples(s) if learn_structure => {
                let lambda = cfg.lambda.unwrap_or_else(|| default_lambda(s.node_count(), s.total_weight()));
                let est = rise_estimate(s, lambda, cfg.solver())?;
                (est.graph(cfg.edge_threshold), est.converged())
            }
            _ => (truth.clone(), true),
        };
        let mut fits = Vec::new();
        for (name, sigma) in &self.orderings {
            for &order in &cfg.orders {
                let (ar, reports) = fit_ar_model_with_reports(&graph, sigma, order, data, cfg.solver())?;
                fits.push((name.clone(), order, ar, structure_ok && reports.iter().all(|r| r.converged)));
            }
        }
        self.sample_fits_at(cfg, &fits, m_l, trial, reference, out)?;
        Ok(())
    }

    fn baseline(&self, cfg: &ExperimentConfig, d: &ExactDistribution, reference: &MomentSummary, trial: usize, out: &mut Vec<ResultRow>) -> Result<()> {
        for &m_s in &cfg.m_s {
            let seed = seed_for(cfg.seed, &[self.kind, BASELINE, &m_s.to_string(), &trial.to_string()]);
            let s = sample_exact(d, m_s, seed);
            let eps = sampling_error(&empirical_moments(&s)?, reference)?;
            out.push(self.row(BASELINE, 0, 0, m_s, trial, eps, true));
        }
        Ok(())
    }

    /// Orders rows by ordering (config order, baseline last), O, M_l, M_s, trial.
    fn sort(&self, rows: &mut [ResultRow]) {
        let rank = |name: &str| self.orderings.iter().position(|(n, _)| n == name).unwrap_or(self.orderings.len());
        rows.sort_by(|a, b| {
            (rank(&a.ordering), a.order, a.m_l, a.m_s, a.trial).cmp(&(rank(&b.ordering), b.order, b.m_l, b.m_s, b.trial))
        });
    }
}

fn data_seed(cfg: &ExperimentConfig, m_l: usize, t: usize) -> u64 {
    seed_for(cfg.seed, &[cfg.kind.as_str(), "data", &m_l.to_string(), &t.to_string()])
}

fn collect_trials(
    trials: usize,
    job: impl Fn(usize) -> Result<Vec<ResultRow>> + Sync + Send,
) -> Result<Vec<ResultRow>> {
    let per_trial: Vec<Vec<ResultRow>> = (0..trials).into_par_iter().map(job).collect::<Result<_>>()?;
    Ok(per_trial.into_iter().flatten().collect())
}

fn check_kind(cfg: &ExperimentConfig, kind: ExperimentKind) -> Result<()> {
    if cfg.kind != kind {
        return Err(Error::InvalidArgument(format!(
            "config is for `{}`, not `{}`",
            cfg.kind.as_str(),
            kind.as_str()
        )));
    }
    Ok(())
}

/// Learning from exact samples of an enumerable model.
pub fn run_sample_learning(cfg: &ExperimentConfig, base_dir: &Path) -> Result<Vec<ResultRow>> {
    check_kind(cfg, ExperimentKind::SampleLearning)?;
    let setup = prepare(cfg, base_dir, true)?;
    let mut rows = collect_trials(cfg.trials, |t| {
        let inst = setup.instance(cfg, base_dir, t, true)?;
        let d = inst.dist.as_ref().expect("distribution enumerated");
        let reference = exact_moments(d);
        let mut out = Vec::new();
        for &m_l in &cfg.m_l {
            let data = sample_exact(d, m_l, data_seed(cfg, m_l, t));
            setup.evaluate(cfg, inst.model.graph(), DataSource::Samples(&data), &reference, m_l, t, !cfg.true_graph, &mut out)?;
        }
        if cfg.baseline {
            setup.baseline(cfg, d, &reference, t, &mut out)?;
        }
        Ok(out)
    })?;
    setup.sort(&mut rows);
    Ok(rows)
}

/// Conditionals fit to the exact distribution on the generating graph; only
/// sampling varies between trials (unless model instances are fresh).
pub fn run_exact_learning(cfg: &ExperimentConfig, base_dir: &Path) -> Result<Vec<ResultRow>> {
    check_kind(cfg, ExperimentKind::ExactLearning)?;
    let setup = prepare(cfg, base_dir, true)?;
    let shared = match &setup.fixed_model {
        Some(inst) => Some(setup.exact_fits_for(cfg, inst.model.graph(), inst.dist.as_ref().expect("enumerated"))?),
        None => None,
    };
    let mut rows = collect_trials(cfg.trials, |t| {
        let inst = setup.instance(cfg, base_dir, t, true)?;
        let d = inst.dist.as_ref().expect("distribution enumerated");
        let reference = exact_moments(d);
        let owned;
        let fits = match &shared {
            Some(f) => f,
            None => {
                owned = setup.exact_fits_for(cfg, inst.model.graph(), d)?;
                &owned
            }
        };
        let mut out = Vec::new();
        setup.sample_fits_at(cfg, fits, 0, t, &reference, &mut out)?;
        if cfg.baseline {
            setup.baseline(cfg, d, &reference, t, &mut out)?;
        }
        Ok(out)
    })?;
    setup.sort(&mut rows);
    Ok(rows)
}

/// Gibbs-sampled training data from a ferromagnet.
pub fn run_gibbs_learning(cfg: &ExperimentConfig, base_dir: &Path) -> Result<Vec<ResultRow>> {
    check_kind(cfg, ExperimentKind::GibbsLearning)?;
    let exact_reference = cfg.reference_samples.is_none();
    let setup = prepare(cfg, base_dir, exact_reference)?;
    let inst = setup.instance(cfg, base_dir, 0, exact_reference)?;
    if fresh_models(cfg) || !inst.model.is_ferromagnet() {
        return Err(Error::InvalidArgument(
            "the two-chain protocol needs a zero-field ferromagnet".into(),
        ));
    }
    let reference = match (&inst.dist, cfg.reference_samples) {
        (Some(d), _) => exact_moments(d),
        (None, Some(m)) => {
            let seed = seed_for(cfg.seed, &[setup.kind, "reference"]);
            let m = m + m % 2;
            symmetrized_moments(&two_chain_ferro_thinned(&inst.model, m, cfg.burn_in, cfg.thin, seed)?)?
        }
        (None, None) => unreachable!("reference chosen above"),
    };
    let mut rows = collect_trials(cfg.trials, |t| {
        let mut out = Vec::new();
        for &m_l in &cfg.m_l {
            let data = two_chain_ferro_thinned(&inst.model, m_l + m_l % 2, cfg.burn_in, cfg.thin, data_seed(cfg, m_l, t))?;
            setup.evaluate(cfg, inst.model.graph(), DataSource::Samples(&data), &reference, m_l, t, !cfg.true_graph, &mut out)?;
        }
        if cfg.baseline {
            if let Some(d) = &inst.dist {
                setup.baseline(cfg, d, &reference, t, &mut out)?;
            }
        }
        Ok(out)
    })?;
    setup.sort(&mut rows);
    Ok(rows)
}

/// Learning from a recorded counted sample file; ε is measured against the
/// file's own empirical moments.
pub fn run_dataset(cfg: &ExperimentConfig, base_dir: &Path) -> Result<Vec<ResultRow>> {
    check_kind(cfg, ExperimentKind::Dataset)?;
    cfg.validate()?;
    let path = base_dir.join(cfg.dataset.as_ref().expect("validated"));
    let data = read_samples(&path, cfg.dataset_format, None)?;
    let n = data.node_count();
    let truth = match (&cfg.graph, cfg.lattice) {
        (Some(p), _) => read_graph(&base_dir.join(p))?,
        (None, Some(side)) => build_lattice(side),
        (None, None) if cfg.true_graph => {
            return Err(Error::InvalidArgument("true_graph needs a `graph` or `lattice`".into()))
        }
        (None, None) => Graph::empty(n),
    };
    if truth.node_count() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: truth.node_count(),
        });
    }
    let orderings = cfg
        .orderings
        .iter()
        .map(|o| Ok((o.name().to_string(), o.resolve(n, cfg.lattice, base_dir)?)))
        .collect::<Result<Vec<_>>>()?;
    let setup = Setup {
        kind: cfg.kind.as_str(),
        name: cfg.experiment_name().to_string(),
        graph: truth.clone(),
        orderings,
        fixed_model: None,
    };
    let reference = empirical_moments(&data)?;
    let m_l = data.total_weight().round() as usize;
    // Fit once; trials only resample.
    let (graph, structure_ok) = if cfg.true_graph {
        (truth, true)
    } else {
        let lambda = cfg.lambda.unwrap_or_else(|| default_lambda(n, data.total_weight()));
        let est = rise_estimate(&data, lambda, cfg.solver())?;
        (est.graph(cfg.edge_threshold), est.converged())
    };
    let mut fits = Vec::new();
    for (name, sigma) in &setup.orderings {
        for &order in &cfg.orders {
            let (ar, reports) = fit_ar_model_with_reports(&graph, sigma, order, DataSource::Samples(&data), cfg.solver())?;
            fits.push((name.clone(), order, ar, structure_ok && reports.iter().all(|r| r.converged)));
        }
    }
    let mut rows = collect_trials(cfg.trials, |t| {
        let mut out = Vec::new();
        setup.sample_fits_at(cfg, &fits, m_l, t, &reference, &mut out)?;
        Ok(out)
    })?;
    setup.sort(&mut rows);
    Ok(rows)
}

type Fit = (String, usize, crate::armodel::ARModel, bool);

impl Setup {
    fn exact_fits_for(&self, cfg: &ExperimentConfig, graph: &Graph, d: &ExactDistribution) -> Result<Vec<Fit>> {
        let mut fits = Vec::new();
        for (name, sigma) in &self.orderings {
            for &order in &cfg.orders {
                let (ar, reports) = fit_ar_model_with_reports(graph, sigma, order, DataSource::Exact(d), cfg.solver())?;
                fits.push((name.clone(), order, ar, reports.iter().all(|r| r.converged)));
            }
        }
        Ok(fits)
    }

    fn sample_fits_at(
        &self,
        cfg: &ExperimentConfig,
        fits: &[Fit],
        m_l: usize,
        trial: usize,
        reference: &MomentSummary,
        out: &mut Vec<ResultRow>,
    ) -> Result<()> {
        for (name, order, ar, converged) in fits {
            for &m_s in &cfg.m_s {
                let seed = seed_for(
                    cfg.seed,
                    &[self.kind, name, &order.to_string(), &m_l.to_string(), &m_s.to_string(), &trial.to_string()],
                );
                let samples = ancestral_sample(ar, m_s, seed);
                let eps = sampling_error(&empirical_moments(&samples)?, reference)?;
                out.push(self.row(name, *order, m_l, m_s, trial, eps, *converged));
            }
        }
        Ok(())
    }
}

/// Dispatches on the config kind.
pub fn run_experiment(cfg: &ExperimentConfig, base_dir: &Path) -> Result<Vec<ResultRow>> {
    match cfg.kind {
        ExperimentKind::SampleLearning => run_sample_learning(cfg, base_dir),
        ExperimentKind::ExactLearning => run_exact_learning(cfg, base_dir),
        ExperimentKind::GibbsLearning => run_gibbs_learning(cfg, base_dir),
        ExperimentKind::Dataset => run_dataset(cfg, base_dir),
    }
}
