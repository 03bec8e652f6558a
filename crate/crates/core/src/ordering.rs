//! Variable orderings for autoregressive decompositions and the
//! (d, K) complexity criterion used to compare them.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::graph::{parent_sets, Graph};
use crate::rng::rng_from_seed;

/// A permutation of `0..n`; `as_slice()[k]` is the node visited at step `k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Ordering(Vec<usize>);

impl Ordering {
    /// Validates that `ids` is a permutation of `0..ids.len()`.
    pub fn from_list(ids: Vec<usize>) -> Result<Self> {
        let n = ids.len();
        let mut seen = vec![false; n];
        for &v in &ids {
            if v >= n {
                return Err(Error::NotAPermutation {
                    n,
                    reason: format!("id {v} out of range"),
                });
            }
            if std::mem::replace(&mut seen[v], true) {
                return Err(Error::NotAPermutation {
                    n,
                    reason: format!("id {v} repeated"),
                });
            }
        }
        Ok(Ordering(ids))
    }

    /// Uniformly random permutation of `0..n`.
    pub fn random(n: usize, seed: u64) -> Self {
        let mut ids: Vec<usize> = (0..n).collect();
        ids.shuffle(&mut rng_from_seed(seed));
        Ordering(ids)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    /// Inverse permutation: `positions()[v]` is the step at which `v` is visited.
    pub fn positions(&self) -> Vec<usize> {
        let mut pos = vec![0; self.0.len()];
        for (k, &v) in self.0.iter().enumerate() {
            pos[v] = k;
        }
        pos
    }

    /// Parses whitespace-separated 0-based ids; `#` starts a comment.
    pub fn parse_text(text: &str, n: usize) -> Result<Self> {
        let mut ids = Vec::with_capacity(n);
        for (idx, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("");
            for tok in line.split_whitespace() {
                ids.push(tok.parse::<usize>().map_err(|_| Error::Parse {
                    line: idx + 1,
                    msg: format!("bad node id `{tok}`"),
                })?);
            }
        }
        if ids.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: ids.len(),
            });
        }
        Ordering::from_list(ids)
    }

    pub fn to_text(&self) -> String {
        let mut s = self
            .0
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(" ");
        s.push('\n');
        s
    }
}

/// Row-major traversal of the L×L lattice.
pub fn sequential(side: usize) -> Ordering {
    Ordering((0..side * side).collect())
}

/// Even-parity cells (row + col even) row-major, then odd-parity cells row-major.
pub fn checkerboard(side: usize) -> Ordering {
    let cells = (0..side * side).map(|v| (v, (v / side + v % side) % 2));
    let even = cells.clone().filter(|&(_, p)| p == 0).map(|(v, _)| v);
    let odd = cells.filter(|&(_, p)| p == 1).map(|(v, _)| v);
    Ordering(even.chain(odd).collect())
}

/// Diagonal traversal for odd L.
///
/// The main diagonal goes first, centre-out by decreasing distance from the
/// centre (so the centre cell, then the two corners, ...), upper-left before
/// lower-right. Then the even-offset diagonals (offset = col − row) ±2, ±4, …,
/// positive before negative, each top-left to bottom-right. The odd-offset
/// cells come last in row-major order; each of them has only visited
/// neighbours, so their relative order does not change any parent set.
pub fn diagonal(side: usize) -> Result<Ordering> {
    if side == 0 || side % 2 == 0 {
        return Err(Error::InvalidArgument(format!(
            "diagonal ordering needs an odd lattice side, got {side}"
        )));
    }
    let id = |r: usize, c: usize| r * side + c;
    let centre = side / 2;
    let mut out = vec![id(centre, centre)];
    for dist in (1..=centre).rev() {
        out.push(id(centre - dist, centre - dist));
        out.push(id(centre + dist, centre + dist));
    }
    for offset in (2..side).step_by(2) {
        out.extend((0..side - offset).map(|r| id(r, r + offset)));
        out.extend((0..side - offset).map(|c| id(c + offset, c)));
    }
    out.extend((0..side * side).filter(|v| (v / side).abs_diff(v % side) % 2 == 1));
    Ordering::from_list(out)
}

/// Parent-set cardinality statistics of a decomposition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComplexityProfile {
    /// d: the largest parent-set size.
    pub max_cardinality: usize,
    /// K: how many conditionals attain d.
    pub max_count: usize,
    /// Parent-set size → number of nodes with that size.
    pub histogram: BTreeMap<usize, usize>,
}

pub fn complexity_profile(g: &Graph, sigma: &Ordering) -> Result<ComplexityProfile> {
    let ps = parent_sets(g, sigma)?;
    let mut histogram = BTreeMap::new();
    for list in ps.as_slice() {
        *histogram.entry(list.len()).or_insert(0) += 1;
    }
    let (&d, &k) = histogram.iter().next_back().unwrap_or((&0, &0));
    Ok(ComplexityProfile {
        max_cardinality: d,
        max_count: k,
        histogram,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preference {
    PreferA,
    PreferB,
    Tie,
}

/// Smaller d wins; on equal d, smaller K wins.
pub fn compare_profiles(a: &ComplexityProfile, b: &ComplexityProfile) -> Preference {
    match (a.max_cardinality, a.max_count).cmp(&(b.max_cardinality, b.max_count)) {
        std::cmp::Ordering::Less => Preference::PreferA,
        std::cmp::Ordering::Greater => Preference::PreferB,
        std::cmp::Ordering::Equal => Preference::Tie,
    }
}
