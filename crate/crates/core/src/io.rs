//! File formats: graph and ordering text, model JSON, sample files and
//! autoregressive model JSON.
//!
//! Sample files hold one configuration per line. In the `raw` layout a line
//! is `N` spin tokens from `+1`, `1`, `-1`; in the `counted` layout the line
//! starts with a positive integer multiplicity. `#` starts a comment.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::armodel::{build_basis, ARModel, ConditionalModel};
use crate::error::{Error, Result};
use crate::graph::{Graph, ParentSets};
use crate::ising::IsingModel;
use crate::metrics::SampleSet;
use crate::ordering::Ordering;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleFormat {
    Raw,
    Counted,
}

impl FromStr for SampleFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "raw" => Ok(SampleFormat::Raw),
            "counted" => Ok(SampleFormat::Counted),
            _ => Err(Error::InvalidArgument(format!("unknown sample format `{s}`"))),
        }
    }
}

fn parse_spin(tok: &str, line: usize) -> Result<i8> {
    match tok {
        "+1" | "1" => Ok(1),
        "-1" => Ok(-1),
        _ => Err(Error::Parse {
            line,
            msg: format!("bad spin `{tok}`"),
        }),
    }
}

/// Parses a sample file. With `n = None` the width is taken from the first row.
pub fn parse_samples(text: &str, format: SampleFormat, n: Option<usize>) -> Result<SampleSet> {
    let mut out: Option<SampleSet> = n.map(SampleSet::new);
    let mut spins = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut tok = line.split_whitespace();
        let weight = match format {
            SampleFormat::Raw => 1.0,
            SampleFormat::Counted => {
                let t = tok.next().unwrap();
                let c: u64 = t.parse().map_err(|_| Error::Parse {
                    line: line_no,
                    msg: format!("bad count `{t}`"),
                })?;
                if c == 0 {
                    return Err(Error::Parse {
                        line: line_no,
                        msg: "count must be positive".into(),
                    });
                }
                c as f64
            }
        };
        spins.clear();
        for t in tok {
            spins.push(parse_spin(t, line_no)?);
        }
        let set = out.get_or_insert_with(|| SampleSet::new(spins.len()));
        if spins.len() != set.node_count() || spins.is_empty() {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("expected {} spins, found {}", set.node_count(), spins.len()),
            });
        }
        set.push(&spins, weight)?;
    }
    out.ok_or(Error::Parse {
        line: 0,
        msg: "no samples and no width given".into(),
    })
}

/// Serializes samples. `raw` requires unit weights; `counted` requires
/// positive integer weights and writes rows as stored.
pub fn format_samples(s: &SampleSet, format: SampleFormat) -> Result<String> {
    let mut out = String::with_capacity(s.len() * (3 * s.node_count() + 8));
    for (x, w) in s.rows() {
        match format {
            SampleFormat::Raw => {
                if w != 1.0 {
                    return Err(Error::InvalidArgument(format!("raw format needs unit weights, found {w}")));
                }
            }
            SampleFormat::Counted => {
                if !(w >= 1.0 && w.fract() == 0.0 && w < 9.007e15) {
                    return Err(Error::InvalidArgument(format!(
                        "counted format needs positive integer weights, found {w}"
                    )));
                }
                write!(out, "{} ", w as u64).unwrap();
            }
        }
        for (k, &v) in x.iter().enumerate() {
            if k > 0 {
                out.push(' ');
            }
            out.push_str(if v > 0 { "+1" } else { "-1" });
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn read_samples(path: &Path, format: SampleFormat, n: Option<usize>) -> Result<SampleSet> {
    parse_samples(&fs::read_to_string(path)?, format, n)
}

pub fn write_samples(path: &Path, s: &SampleSet, format: SampleFormat) -> Result<()> {
    fs::write(path, format_samples(s, format)?)?;
    Ok(())
}

pub fn read_graph(path: &Path) -> Result<Graph> {
    fs::read_to_string(path)?.parse()
}

pub fn write_graph(path: &Path, g: &Graph) -> Result<()> {
    fs::write(path, g.to_text())?;
    Ok(())
}

pub fn read_ordering(path: &Path, n: usize) -> Result<Ordering> {
    Ordering::parse_text(&fs::read_to_string(path)?, n)
}

pub fn write_ordering(path: &Path, sigma: &Ordering) -> Result<()> {
    fs::write(path, sigma.to_text())?;
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    n: usize,
    fields: Vec<f64>,
    edges: Vec<(usize, usize, f64)>,
}

pub fn model_to_json(m: &IsingModel) -> String {
    let file = ModelFile {
        n: m.node_count(),
        fields: m.fields().to_vec(),
        edges: m
            .graph()
            .edges()
            .iter()
            .zip(m.couplings())
            .map(|(&(i, j), &t)| (i, j, t))
            .collect(),
    };
    serde_json::to_string_pretty(&file).expect("model serializes")
}

/// Parses `{"n", "fields", "edges": [[i, j, theta], ...]}`; edges may come in any order.
pub fn model_from_json(text: &str) -> Result<IsingModel> {
    let file: ModelFile = serde_json::from_str(text)?;
    let g = Graph::new(file.n, file.edges.iter().map(|&(i, j, _)| (i, j)))?;
    if g.edge_count() != file.edges.len() {
        return Err(Error::InvalidArgument("duplicate edge in model file".into()));
    }
    let mut couplings = vec![0.0; g.edge_count()];
    for &(i, j, t) in &file.edges {
        couplings[g.edge_index(i, j).expect("edge was inserted")] = t;
    }
    IsingModel::new(g, file.fields, couplings)
}

pub fn read_model(path: &Path) -> Result<IsingModel> {
    model_from_json(&fs::read_to_string(path)?)
}

pub fn write_model(path: &Path, m: &IsingModel) -> Result<()> {
    fs::write(path, model_to_json(m))?;
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct NodeEntry {
    node: usize,
    parents: Vec<usize>,
    coefficients: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct ARModelFile {
    n: usize,
    ordering: Vec<usize>,
    max_order: usize,
    nodes: Vec<NodeEntry>,
}

/// Conditionals must share one order for the file format.
pub fn armodel_to_json(ar: &ARModel) -> Result<String> {
    let max_order = ar.conditionals().first().map_or(1, |c| c.basis().max_order());
    if ar.conditionals().iter().any(|c| c.basis().max_order() != max_order) {
        return Err(Error::InvalidArgument("conditionals have different orders".into()));
    }
    let file = ARModelFile {
        n: ar.node_count(),
        ordering: ar.ordering().as_slice().to_vec(),
        max_order,
        nodes: ar
            .conditionals()
            .iter()
            .enumerate()
            .map(|(v, c)| NodeEntry {
                node: v,
                parents: c.basis().parents().to_vec(),
                coefficients: c.coefficients().to_vec(),
            })
            .collect(),
    };
    Ok(serde_json::to_string_pretty(&file)?)
}

pub fn armodel_from_json(text: &str) -> Result<ARModel> {
    let mut file: ARModelFile = serde_json::from_str(text)?;
    if file.ordering.len() != file.n || file.nodes.len() != file.n {
        return Err(Error::LengthMismatch {
            expected: file.n,
            got: file.nodes.len().min(file.ordering.len()),
        });
    }
    file.nodes.sort_by_key(|e| e.node);
    if file.nodes.iter().enumerate().any(|(v, e)| e.node != v) {
        return Err(Error::InvalidArgument("node entries must cover 0..n once each".into()));
    }
    let ordering = Ordering::from_list(file.ordering)?;
    let parents: Vec<Vec<usize>> = file.nodes.iter().map(|e| e.parents.clone()).collect();
    let ps = ParentSets::from_lists(ordering, parents)?;
    let conditionals = file
        .nodes
        .into_iter()
        .map(|e| ConditionalModel::new(build_basis(e.node, &e.parents, file.max_order)?, e.coefficients))
        .collect::<Result<Vec<_>>>()?;
    ARModel::new(ps, conditionals)
}

pub fn read_armodel(path: &Path) -> Result<ARModel> {
    armodel_from_json(&fs::read_to_string(path)?)
}

pub fn write_armodel(path: &Path, ar: &ARModel) -> Result<()> {
    fs::write(path, armodel_to_json(ar)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_lattice, parent_sets};
    use crate::ising::{make_spin_glass, SpinGlassMode};

    #[test]
    fn samples_raw_and_counted() {
        let text = "# two nodes\n+1 -1\n1 1\n-1 -1 # trailing\n";
        let s = parse_samples(text, SampleFormat::Raw, None).unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s.row(1), &[1, 1]);
        let c = parse_samples("3 +1 -1\n1 -1 -1\n", SampleFormat::Counted, Some(2)).unwrap();
        assert_eq!(c.weights(), &[3.0, 1.0]);
        assert_eq!(parse_samples(&format_samples(&c, SampleFormat::Counted).unwrap(), SampleFormat::Counted, None).unwrap(), c);
        assert_eq!(parse_samples(&format_samples(&s, SampleFormat::Raw).unwrap(), SampleFormat::Raw, None).unwrap(), s);
    }

    #[test]
    fn malformed_samples() {
        assert!(matches!(parse_samples("+1 0\n", SampleFormat::Raw, None), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_samples("+1 1\n+1\n", SampleFormat::Raw, None), Err(Error::Parse { line: 2, .. })));
        assert!(parse_samples("0 +1\n", SampleFormat::Counted, None).is_err());
        assert!(parse_samples("x +1\n", SampleFormat::Counted, None).is_err());
        assert!(parse_samples("", SampleFormat::Raw, None).is_err());
        assert_eq!(parse_samples("", SampleFormat::Raw, Some(3)).unwrap().len(), 0);
        let mut w = SampleSet::new(1);
        w.push(&[1], 0.5).unwrap();
        assert!(format_samples(&w, SampleFormat::Raw).is_err());
        assert!(format_samples(&w, SampleFormat::Counted).is_err());
    }

    #[test]
    fn model_round_trip() {
        let m = make_spin_glass(&build_lattice(3), 7, SpinGlassMode::DwaveRange);
        assert_eq!(model_from_json(&model_to_json(&m)).unwrap(), m);
        let shuffled = r#"{"n":3,"fields":[0,0,0.5],"edges":[[2,1,-1.0],[0,1,0.25]]}"#;
        let m2 = model_from_json(shuffled).unwrap();
        assert_eq!(m2.coupling(1, 2), Some(-1.0));
        assert_eq!(m2.coupling(0, 1), Some(0.25));
        assert!(model_from_json(r#"{"n":2,"fields":[0,0],"edges":[[0,1,1],[1,0,1]]}"#).is_err());
    }

    #[test]
    fn armodel_round_trip() {
        let g = build_lattice(3);
        let sigma = Ordering::random(9, 2);
        let ps = parent_sets(&g, &sigma).unwrap();
        let conditionals = (0..9)
            .map(|v| {
                let b = build_basis(v, ps.of(v), 3).unwrap();
                let coef = (0..b.len()).map(|k| 0.1 * k as f64 - 0.3 + v as f64 / 7.0).collect();
                ConditionalModel::new(b, coef).unwrap()
            })
            .collect();
        let ar = ARModel::new(ps, conditionals).unwrap();
        let text = armodel_to_json(&ar).unwrap();
        assert_eq!(armodel_from_json(&text).unwrap(), ar);
        let broken = text.replacen("\"max_order\": 3", "\"max_order\": 2", 1);
        assert!(armodel_from_json(&broken).is_err());
    }
}
