use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::ising::ExactDistribution;
use crate::metrics::SampleSet;

/// Largest parent set for which statistics are collected.
pub const MAX_STATS_PARENTS: usize = 24;

/// Where conditional statistics come from.
#[derive(Debug, Clone, Copy)]
pub enum DataSource<'a> {
    Samples(&'a SampleSet),
    Exact(&'a ExactDistribution),
}

impl DataSource<'_> {
    pub fn node_count(&self) -> usize {
        match self {
            DataSource::Samples(s) => s.node_count(),
            DataSource::Exact(d) => d.node_count(),
        }
    }
}

/// Normalized weights of the observed joint patterns of `(x_node, x_parents)`.
///
/// Pattern bit 0 is set when `x_node = +1`; bit `k + 1` when `parents[k] = +1`.
/// Patterns with zero weight are not stored.
#[derive(Debug, Clone, PartialEq)]
pub struct SufficientStats {
    node: usize,
    parents: Vec<usize>,
    entries: Vec<(u64, f64)>,
    sample_weight: f64,
}

impl SufficientStats {
    pub fn node(&self) -> usize {
        self.node
    }

    pub fn parents(&self) -> &[usize] {
        &self.parents
    }

    /// Nonzero patterns sorted by pattern index.
    pub fn entries(&self) -> &[(u64, f64)] {
        &self.entries
    }

    /// Weight of one pattern (0 when unobserved).
    pub fn weight(&self, pattern: u64) -> f64 {
        self.entries
            .binary_search_by_key(&pattern, |e| e.0)
            .map_or(0.0, |i| self.entries[i].1)
    }

    /// Sum of the normalized weights (1 up to rounding).
    pub fn total_weight(&self) -> f64 {
        self.entries.iter().map(|e| e.1).sum()
    }

    /// Raw weight of the data before normalization: the sample count for
    /// unit-weight samples, 1 for an exact distribution.
    pub fn sample_weight(&self) -> f64 {
        self.sample_weight
    }

    /// Builds statistics from explicit pattern weights, normalizing them.
    pub fn from_weights(node: usize, parents: Vec<usize>, weights: &[(u64, f64)]) -> Result<Self> {
        check_parents(node, &parents)?;
        let limit = 1u64 << (parents.len() + 1);
        let mut map: HashMap<u64, f64> = HashMap::new();
        for &(p, w) in weights {
            if p >= limit {
                return Err(Error::InvalidArgument(format!("pattern {p} out of range")));
            }
            if !(w >= 0.0 && w.is_finite()) {
                return Err(Error::InvalidArgument(format!("invalid weight {w}")));
            }
            *map.entry(p).or_insert(0.0) += w;
        }
        finish(node, parents, map)
    }
}

fn check_parents(node: usize, parents: &[usize]) -> Result<()> {
    if parents.contains(&node) {
        return Err(Error::SelfParent(node));
    }
    if parents.len() > MAX_STATS_PARENTS {
        return Err(Error::TooManyParents {
            node,
            size: parents.len(),
            max: MAX_STATS_PARENTS,
        });
    }
    Ok(())
}

fn finish(node: usize, parents: Vec<usize>, map: HashMap<u64, f64>) -> Result<SufficientStats> {
    let mut entries: Vec<(u64, f64)> = map.into_iter().filter(|e| e.1 > 0.0).collect();
    entries.sort_unstable_by_key(|e| e.0);
    let total: f64 = entries.iter().map(|e| e.1).sum();
    if !(total > 0.0) {
        return Err(Error::ZeroWeight);
    }
    for e in &mut entries {
        e.1 /= total;
    }
    Ok(SufficientStats {
        node,
        parents,
        entries,
        sample_weight: total,
    })
}

/// Joint pattern weights of `(x_node, x_parents)`.
pub fn collect_stats(source: DataSource<'_>, node: usize, parents: &[usize]) -> Result<SufficientStats> {
    let n = source.node_count();
    for &v in std::iter::once(&node).chain(parents) {
        if v >= n {
            return Err(Error::NodeOutOfRange { node: v, n });
        }
    }
    check_parents(node, parents)?;
    let mut map: HashMap<u64, f64> = HashMap::new();
    match source {
        DataSource::Samples(s) => {
            for (x, w) in s.rows() {
                if w == 0.0 {
                    continue;
                }
                let mut pattern = u64::from(x[node] > 0);
                for (k, &p) in parents.iter().enumerate() {
                    if x[p] > 0 {
                        pattern |= 1 << (k + 1);
                    }
                }
                *map.entry(pattern).or_insert(0.0) += w;
            }
        }
        DataSource::Exact(d) => {
            let vars: Vec<usize> = std::iter::once(node).chain(parents.iter().copied()).collect();
            for (p, w) in d.marginal(&vars).into_iter().enumerate() {
                if w > 0.0 {
                    map.insert(p as u64, w);
                }
            }
        }
    }
    finish(node, parents.to_vec(), map)
}
