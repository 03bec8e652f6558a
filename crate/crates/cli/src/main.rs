use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use arising::armodel::ancestral_sample;
use arising::experiment::{gnuplot_script, parse_csv, run_experiment, summarize, summary_csv, to_csv, ExperimentConfig};
use arising::gibbs::{gibbs_chain_thinned, two_chain_ferro_thinned};
use arising::graph::{build_lattice, parent_sets, Graph};
use arising::io::{self, SampleFormat};
use arising::ising::{
    enumerate_distribution, exact_moments, make_ferromagnet, make_spin_glass, sample_exact, Configuration,
    SpinGlassMode,
};
use arising::learn::{default_lambda, fit_ar_model, rise_learn_structure, DataSource, SolverOptions, DEFAULT_EDGE_THRESHOLD};
use arising::metrics::{empirical_moments, sampling_error, MomentSummary};
use arising::ordering::{checkerboard, compare_profiles, complexity_profile, diagonal, sequential, Ordering, Preference};

#[derive(Parser)]
#[command(name = "arising", version, about = "Autoregressive decompositions of Ising models")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Base random seed (default 0; `run` keeps the config's seed unless given).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Optimizer stopping tolerance on the gradient sup-norm.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true)]
    max_iter: Option<usize>,
    /// Structure-learning penalty (default sqrt(ln(20 n^2) / m)).
    #[arg(long, global = true)]
    lambda: Option<f64>,
    /// Coupling magnitude above which an edge is declared.
    #[arg(long, global = true)]
    edge_threshold: Option<f64>,
}

impl Global {
    fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    fn solver(&self) -> SolverOptions {
        let d = SolverOptions::default();
        SolverOptions {
            tol: self.tol.unwrap_or(d.tol),
            max_iter: self.max_iter.unwrap_or(d.max_iter),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Raw,
    Counted,
}

impl From<Format> for SampleFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Raw => SampleFormat::Raw,
            Format::Counted => SampleFormat::Counted,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelKind {
    Ferro,
    PmOne,
    UniformUnit,
    DwaveRange,
}

#[derive(Clone, Copy, ValueEnum)]
enum OrderingKind {
    Sequential,
    Checkerboard,
    Diagonal,
    Random,
}

#[derive(Args)]
struct GraphSource {
    /// Graph file (`n N` / `e i j` lines).
    #[arg(long, conflicts_with = "lattice")]
    graph: Option<PathBuf>,
    /// Side of an L×L lattice.
    #[arg(long)]
    lattice: Option<usize>,
}

impl GraphSource {
    fn load(&self) -> Result<Graph> {
        match (&self.graph, self.lattice) {
            (Some(p), _) => Ok(io::read_graph(p).with_context(|| format!("reading {}", p.display()))?),
            (None, Some(l)) if l > 0 => Ok(build_lattice(l)),
            _ => bail!("give --graph FILE or --lattice L (L >= 1)"),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Write the L×L lattice graph.
    Lattice {
        #[arg(long)]
        side: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate an Ising model on a graph.
    GenModel {
        #[command(flatten)]
        source: GraphSource,
        #[arg(long, value_enum, default_value = "ferro")]
        kind: ModelKind,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Enumerate a model: log partition function and exact moments.
    Enumerate {
        #[arg(long)]
        model: PathBuf,
        /// Write moments as JSON here.
        #[arg(long)]
        moments_out: Option<PathBuf>,
    },
    /// Draw i.i.d. samples from the enumerated distribution.
    SampleExact {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        count: usize,
        #[arg(long, value_enum, default_value = "raw")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Heat-bath Gibbs sampling.
    Gibbs {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        count: usize,
        #[arg(long, default_value_t = 10_000)]
        burn_in: usize,
        #[arg(long, default_value_t = 1)]
        thin: usize,
        /// Two chains from all +1 and all −1 (ferromagnets only).
        #[arg(long)]
        two_chain: bool,
        #[arg(long, value_enum, default_value = "raw")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Learn the interaction graph from samples.
    LearnStructure {
        #[arg(long)]
        samples: PathBuf,
        #[arg(long, value_enum, default_value = "raw")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a variable ordering.
    Ordering {
        #[arg(long, value_enum)]
        kind: OrderingKind,
        /// Lattice side (named generators).
        #[arg(long)]
        side: Option<usize>,
        /// Node count (random orderings).
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the parent set of every node.
    Parents {
        #[command(flatten)]
        source: GraphSource,
        #[arg(long)]
        ordering: PathBuf,
    },
    /// Print the complexity profile (d, K) of an ordering, optionally compared to another.
    Profile {
        #[command(flatten)]
        source: GraphSource,
        #[arg(long)]
        ordering: PathBuf,
        #[arg(long)]
        compare: Option<PathBuf>,
    },
    /// Fit the conditionals of an autoregressive model.
    Fit {
        /// Graph to decompose; learned from the samples when absent.
        #[command(flatten)]
        source: GraphSource,
        #[arg(long)]
        ordering: PathBuf,
        /// Conditional order O.
        #[arg(long)]
        order: usize,
        /// Training samples.
        #[arg(long, required_unless_present = "model")]
        samples: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "raw")]
        format: Format,
        /// Fit to this model's exact distribution instead of samples.
        #[arg(long, conflicts_with = "samples")]
        model: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Ancestral sampling from a fitted model.
    SampleAr {
        #[arg(long)]
        armodel: PathBuf,
        #[arg(long)]
        count: usize,
        #[arg(long, value_enum, default_value = "raw")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sampling error of a sample file against a model's exact moments or another sample file.
    Eval {
        #[arg(long)]
        samples: PathBuf,
        #[arg(long, value_enum, default_value = "raw")]
        format: Format,
        #[arg(long, required_unless_present = "reference")]
        model: Option<PathBuf>,
        #[arg(long, conflicts_with = "model")]
        reference: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "raw")]
        reference_format: Format,
    },
    /// Run a JSON experiment config and write the results CSV.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output CSV (default: the config's `output`, else stdout).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Use the generating graph instead of learning it.
        #[arg(long)]
        true_graph: bool,
    },
    /// Summarize a results CSV and write a gnuplot script.
    Plot {
        #[arg(long)]
        results: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
    },
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn read_samples(path: &Path, format: Format) -> Result<arising::SampleSet> {
    Ok(io::read_samples(path, format.into(), None).with_context(|| format!("reading {}", path.display()))?)
}

fn moments_json(m: &MomentSummary) -> String {
    let n = m.dim();
    let rows: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| m.cov(i, j)).collect()).collect();
    serde_json::json!({ "mean": m.mean(), "covariance": rows }).to_string()
}

fn run(cli: Cli) -> Result<()> {
    let g = &cli.global;
    if let Some(t) = g.threads {
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global()?;
    }
    match cli.command {
        Command::Lattice { side, out } => {
            if side == 0 {
                bail!("lattice side must be at least 1");
            }
            emit(&out, &build_lattice(side).to_text())
        }
        Command::GenModel { source, kind, out } => {
            let graph = source.load()?;
            let m = match kind {
                ModelKind::Ferro => make_ferromagnet(&graph),
                ModelKind::PmOne => make_spin_glass(&graph, g.seed(), SpinGlassMode::PmOne),
                ModelKind::UniformUnit => make_spin_glass(&graph, g.seed(), SpinGlassMode::UniformUnit),
                ModelKind::DwaveRange => make_spin_glass(&graph, g.seed(), SpinGlassMode::DwaveRange),
            };
            emit(&out, &io::model_to_json(&m))
        }
        Command::Enumerate { model, moments_out } => {
            let d = enumerate_distribution(&io::read_model(&model)?)?;
            let mo = exact_moments(&d);
            println!("nodes {}", d.node_count());
            println!("log_z {}", d.log_z());
            if let Some(p) = moments_out {
                fs::write(&p, moments_json(&mo))?;
            } else {
                println!("{}", moments_json(&mo));
            }
            Ok(())
        }
        Command::SampleExact { model, count, format, out } => {
            let d = enumerate_distribution(&io::read_model(&model)?)?;
            let mut s = sample_exact(&d, count, g.seed());
            if matches!(format, Format::Counted) {
                s = s.compress();
            }
            emit(&out, &io::format_samples(&s, format.into())?)
        }
        Command::Gibbs {
            model,
            count,
            burn_in,
            thin,
            two_chain,
            format,
            out,
        } => {
            let m = io::read_model(&model)?;
            let mut s = if two_chain {
                if !m.is_ferromagnet() {
                    bail!(arising::Error::InvalidArgument(
                        "two-chain sampling needs a zero-field ferromagnet".into()
                    ));
                }
                two_chain_ferro_thinned(&m, count, burn_in, thin, g.seed())?
            } else {
                let init = Configuration::uniform(m.node_count(), 1);
                gibbs_chain_thinned(&m, &init, count, burn_in, thin, g.seed())?
            };
            if matches!(format, Format::Counted) {
                s = s.compress();
            }
            emit(&out, &io::format_samples(&s, format.into())?)
        }
        Command::LearnStructure { samples, format, out } => {
            let s = read_samples(&samples, format)?;
            let lambda = g.lambda.unwrap_or_else(|| default_lambda(s.node_count(), s.total_weight()));
            let threshold = g.edge_threshold.unwrap_or(DEFAULT_EDGE_THRESHOLD);
            let graph = rise_learn_structure(&s, lambda, threshold, g.solver())?;
            eprintln!("learned {} edges (lambda {lambda}, threshold {threshold})", graph.edge_count());
            emit(&out, &graph.to_text())
        }
        Command::Ordering { kind, side, n, out } => {
            let need_side = || side.filter(|&l| l > 0).context("--side L is required");
            let sigma = match kind {
                OrderingKind::Sequential => sequential(need_side()?),
                OrderingKind::Checkerboard => checkerboard(need_side()?),
                OrderingKind::Diagonal => diagonal(need_side()?)?,
                OrderingKind::Random => {
                    let n = n.or(side.map(|l| l * l)).context("--n or --side is required")?;
                    Ordering::random(n, g.seed())
                }
            };
            emit(&out, &sigma.to_text())
        }
        Command::Parents { source, ordering } => {
            let graph = source.load()?;
            let sigma = io::read_ordering(&ordering, graph.node_count())?;
            let ps = parent_sets(&graph, &sigma)?;
            for &v in sigma.as_slice() {
                let ids: Vec<String> = ps.of(v).iter().map(|p| p.to_string()).collect();
                println!("{v}: {}", ids.join(" "));
            }
            Ok(())
        }
        Command::Profile {
            source,
            ordering,
            compare,
        } => {
            let graph = source.load()?;
            let n = graph.node_count();
            let a = complexity_profile(&graph, &io::read_ordering(&ordering, n)?)?;
            println!("d {}", a.max_cardinality);
            println!("K {}", a.max_count);
            for (size, count) in &a.histogram {
                println!("size {size}: {count}");
            }
            if let Some(other) = compare {
                let b = complexity_profile(&graph, &io::read_ordering(&other, n)?)?;
                let verdict = match compare_profiles(&a, &b) {
                    Preference::PreferA => "prefer_a",
                    Preference::PreferB => "prefer_b",
                    Preference::Tie => "tie",
                };
                println!("compare (d {}, K {}) -> {verdict}", b.max_cardinality, b.max_count);
            }
            Ok(())
        }
        Command::Fit {
            source,
            ordering,
            order,
            samples,
            format,
            model,
            out,
        } => {
            let ar = if let Some(mp) = model {
                let m = io::read_model(&mp)?;
                let d = enumerate_distribution(&m)?;
                let graph = if source.graph.is_some() || source.lattice.is_some() {
                    source.load()?
                } else {
                    m.graph().clone()
                };
                let sigma = io::read_ordering(&ordering, graph.node_count())?;
                fit_ar_model(&graph, &sigma, order, DataSource::Exact(&d), g.solver())?
            } else {
                let s = read_samples(samples.as_deref().expect("required by clap"), format)?;
                let graph = if source.graph.is_some() || source.lattice.is_some() {
                    source.load()?
                } else {
                    let lambda = g.lambda.unwrap_or_else(|| default_lambda(s.node_count(), s.total_weight()));
                    let threshold = g.edge_threshold.unwrap_or(DEFAULT_EDGE_THRESHOLD);
                    rise_learn_structure(&s, lambda, threshold, g.solver())?
                };
                let sigma = io::read_ordering(&ordering, graph.node_count())?;
                fit_ar_model(&graph, &sigma, order, DataSource::Samples(&s), g.solver())?
            };
            emit(&out, &io::armodel_to_json(&ar)?)
        }
        Command::SampleAr {
            armodel,
            count,
            format,
            out,
        } => {
            let ar = io::read_armodel(&armodel)?;
            let mut s = ancestral_sample(&ar, count, g.seed());
            if matches!(format, Format::Counted) {
                s = s.compress();
            }
            emit(&out, &io::format_samples(&s, format.into())?)
        }
        Command::Eval {
            samples,
            format,
            model,
            reference,
            reference_format,
        } => {
            let s = empirical_moments(&read_samples(&samples, format)?)?;
            let reference = match (model, reference) {
                (Some(m), _) => exact_moments(&enumerate_distribution(&io::read_model(&m)?)?),
                (None, Some(r)) => empirical_moments(&read_samples(&r, reference_format)?)?,
                (None, None) => bail!("give --model or --reference"),
            };
            println!("{}", sampling_error(&s, &reference)?);
            Ok(())
        }
        Command::Run { config, out, true_graph } => {
            let text = fs::read_to_string(&config).with_context(|| format!("reading {}", config.display()))?;
            let mut cfg: ExperimentConfig = serde_json::from_str(&text).map_err(arising::Error::from)?;
            if let Some(s) = g.seed {
                cfg.seed = s;
            }
            if let Some(t) = g.tol {
                cfg.tol = t;
            }
            if let Some(m) = g.max_iter {
                cfg.max_iter = m;
            }
            if g.lambda.is_some() {
                cfg.lambda = g.lambda;
            }
            if let Some(t) = g.edge_threshold {
                cfg.edge_threshold = t;
            }
            cfg.true_graph |= true_graph;
            cfg.validate()?;
            let base_dir = config.parent().unwrap_or(Path::new("."));
            let rows = run_experiment(&cfg, base_dir)?;
            let dest = out.or_else(|| cfg.output.as_ref().map(|p| base_dir.join(p)));
            emit(&dest, &to_csv(&rows))
        }
        Command::Plot { results, out_dir } => {
            let rows = parse_csv(&fs::read_to_string(&results)?)?;
            let summary = summarize(&rows);
            fs::create_dir_all(&out_dir)?;
            fs::write(out_dir.join("summary.csv"), summary_csv(&summary))?;
            fs::write(out_dir.join("plot.gp"), gnuplot_script(&summary, "summary.csv", "epsilon.png"))?;
            eprintln!("wrote {} and {}", out_dir.join("summary.csv").display(), out_dir.join("plot.gp").display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let kind = e
                .chain()
                .find_map(|c| c.downcast_ref::<arising::Error>())
                .map_or("error", |a| a.kind());
            eprintln!("error: {kind}: {e:#}");
            ExitCode::FAILURE
        }
    }
}
