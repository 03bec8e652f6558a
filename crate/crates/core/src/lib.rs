//! Autoregressive decompositions of Ising models.
//!
//! A positive Ising distribution factorizes along any ordering of its
//! variables, and with the graph's Markov structure each conditional only
//! depends on a small screening set of earlier variables. This crate builds
//! those parent sets, fits the conditionals by interaction screening, samples
//! from the resulting model, and compares orderings by how well the samples
//! reproduce the first two moments.

pub mod armodel;
pub mod error;
pub mod experiment;
pub mod gibbs;
pub mod graph;
pub mod io;
pub mod ising;
pub mod learn;
pub mod metrics;
pub mod ordering;
pub mod rng;

pub use armodel::{ancestral_sample, build_basis, ARModel, ConditionalModel, InteractionBasis};
pub use error::{Error, Result};
pub use gibbs::{gibbs_chain, two_chain_ferro};
pub use graph::{build_lattice, parent_sets, parent_sets_naive, Graph, ParentSets};
pub use ising::{
    enumerate_distribution, exact_conditional, exact_moments, make_ferromagnet, make_spin_glass,
    sample_exact, Configuration, ExactDistribution, IsingModel, SpinGlassMode,
};
pub use learn::{
    collect_stats, fit_ar_model, grise_fit, rise_learn_structure, DataSource, FitReport, SolverOptions,
    SufficientStats,
};
pub use metrics::{baseline_error, empirical_moments, sampling_error, symmetrized_moments, MomentSummary, SampleSet};
pub use ordering::{
    checkerboard, compare_profiles, complexity_profile, diagonal, sequential, ComplexityProfile, Ordering,
    Preference,
};
