use std::path::Path;

use arising::experiment::{
    parse_csv, run_experiment, summarize, to_csv, ExperimentConfig, ExperimentKind, BASELINE, CSV_HEADER,
};
use arising::io::{self, SampleFormat};
use arising::ising::{enumerate_distribution, make_spin_glass, SpinGlassMode};
use arising::{build_lattice, sample_exact, Error};

fn config(text: &str) -> ExperimentConfig {
    ExperimentConfig::from_json(text).unwrap()
}

#[test]
fn sample_learning_row_counts() {
    let cfg = config(
        r#"{"kind": "sample_learning", "name": "rows", "lattice": 3,
            "model": {"type": "spin_glass", "mode": "pm_one", "seed": 1},
            "orderings": ["sequential", "checkerboard", "diagonal"], "orders": [4],
            "m_l": [500, 2000], "m_s": [1000], "trials": 3, "seed": 5}"#,
    );
    let rows = run_experiment(&cfg, Path::new(".")).unwrap();
    let learned = rows.iter().filter(|r| r.ordering != BASELINE).count();
    let baseline = rows.iter().filter(|r| r.ordering == BASELINE).count();
    assert_eq!(learned, 3 * 2 * 3);
    assert_eq!(baseline, 3);
    assert!(rows.iter().all(|r| r.epsilon.is_finite() && r.epsilon >= 0.0));

    let csv = to_csv(&rows);
    assert!(csv.starts_with(CSV_HEADER));
    assert_eq!(parse_csv(&csv).unwrap(), rows);

    let summary = summarize(&rows);
    assert_eq!(summary.len(), 3 * 2 + 1);
    assert!(summary.iter().all(|s| s.trials == 3));
}

#[test]
fn fresh_instances_differ_per_trial() {
    let cfg = config(
        r#"{"kind": "exact_learning", "lattice": 2,
            "model": {"type": "spin_glass", "mode": "uniform_unit", "seed": 9},
            "orderings": ["sequential"], "orders": [1], "m_s": [2000], "trials": 4, "baseline": false}"#,
    );
    let rows = run_experiment(&cfg, Path::new(".")).unwrap();
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r.m_l == 0));
    let mut eps: Vec<f64> = rows.iter().map(|r| r.epsilon).collect();
    eps.dedup();
    assert_eq!(eps.len(), 4);
}

#[test]
fn gibbs_requires_ferromagnet() {
    let cfg = config(
        r#"{"kind": "gibbs_learning", "lattice": 3,
            "model": {"type": "spin_glass", "mode": "pm_one", "seed": 1, "fresh_per_trial": false},
            "orderings": ["sequential"], "orders": [2], "m_l": [100], "m_s": [100], "trials": 1}"#,
    );
    let err = run_experiment(&cfg, Path::new(".")).unwrap_err();
    assert_eq!(err.kind(), "invalid_argument");
}

#[test]
fn unknown_fields_and_bad_names_rejected() {
    assert!(ExperimentConfig::from_json(r#"{"kind": "exact_learning", "lattice": 2, "colour": 1}"#).is_err());
    let err = ExperimentConfig::from_json(
        r#"{"kind": "exact_learning", "name": "a,b", "lattice": 2, "orderings": ["sequential"], "orders": [1], "m_s": [10]}"#,
    )
    .unwrap_err();
    assert!(matches!(err, Error::InvalidArgument(_)));
}

#[test]
fn dataset_run_reads_files() {
    let dir = tempfile::tempdir().unwrap();
    let g = build_lattice(3);
    let m = make_spin_glass(&g, 2, SpinGlassMode::PmOne);
    let d = enumerate_distribution(&m).unwrap();
    let data = sample_exact(&d, 5000, 3).compress();
    io::write_samples(&dir.path().join("data.txt"), &data, SampleFormat::Counted).unwrap();
    io::write_graph(&dir.path().join("g.txt"), &g).unwrap();
    io::write_ordering(&dir.path().join("o.txt"), &arising::sequential(3)).unwrap();

    let cfg = config(
        r#"{"kind": "dataset", "graph": "g.txt", "dataset": "data.txt", "true_graph": true,
            "orderings": [{"name": "rows", "file": "o.txt"}, "random:4"], "orders": [3], "m_s": [3000], "trials": 2}"#,
    );
    assert_eq!(cfg.kind, ExperimentKind::Dataset);
    let mut named = cfg.clone();
    named.orderings = ExperimentConfig::from_json(r#"{"kind": "dataset", "dataset": "x", "orderings": ["sequential"], "orders": [1], "m_s": [1]}"#)
        .unwrap()
        .orderings;
    // named lattice orderings need a lattice side
    assert_eq!(run_experiment(&named, dir.path()).unwrap_err().kind(), "invalid_argument");
    let rows = run_experiment(&cfg, dir.path()).unwrap();
    assert_eq!(rows.iter().filter(|r| r.ordering != BASELINE).count(), 4);
    assert!(rows.iter().all(|r| r.m_l == 5000 || r.ordering == BASELINE));
    let again = run_experiment(&cfg, dir.path()).unwrap();
    assert_eq!(to_csv(&rows), to_csv(&again));
}
