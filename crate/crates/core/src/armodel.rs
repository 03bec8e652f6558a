//! Autoregressive Ising models: per-node conditionals over parent monomials
//! and ancestral sampling along the ordering.
//!
//! The conditional of node `v` given its parents is
//! `p(x_v | x_Par) = exp(x_v h) / (2 cosh h)` with
//! `h = Σ_{S ∈ basis} θ_S Π_{j∈S} x_j`, where the basis holds every parent
//! subset of size at most `O − 1` (the empty subset is the bias term).

use rand::Rng as _;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::ParentSets;
use crate::metrics::SampleSet;
use crate::ordering::Ordering;
use crate::rng::rng_from_seed;

/// Largest parent set representable by the bitmask subset encoding.
pub const MAX_PARENTS: usize = 64;

/// Canonical list of parent subsets for one node.
///
/// Subsets are bitmasks over positions in `parents`, ordered by size, then
/// lexicographically by member positions (equivalently by node id, since
/// `parents` is sorted). The first entry is always the empty set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InteractionBasis {
    node: usize,
    parents: Vec<usize>,
    max_order: usize,
    subsets: Vec<u64>,
}

impl InteractionBasis {
    pub fn node(&self) -> usize {
        self.node
    }

    pub fn parents(&self) -> &[usize] {
        &self.parents
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    pub fn subsets(&self) -> &[u64] {
        &self.subsets
    }

    /// Number of basis terms T.
    pub fn len(&self) -> usize {
        self.subsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subsets.is_empty()
    }

    /// Node ids of the members of subset `k`.
    pub fn members(&self, k: usize) -> Vec<usize> {
        let s = self.subsets[k];
        (0..self.parents.len())
            .filter(|&b| (s >> b) & 1 == 1)
            .map(|b| self.parents[b])
            .collect()
    }
}

/// All parent subsets of size ≤ `max_order − 1`, in canonical order.
pub fn build_basis(node: usize, parents: &[usize], max_order: usize) -> Result<InteractionBasis> {
    if max_order == 0 {
        return Err(Error::InvalidArgument("interaction order must be at least 1".into()));
    }
    let d = parents.len();
    if d > MAX_PARENTS {
        return Err(Error::TooManyParents {
            node,
            size: d,
            max: MAX_PARENTS,
        });
    }
    if parents.contains(&node) {
        return Err(Error::SelfParent(node));
    }
    if parents.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(format!(
            "parents of node {node} must be sorted and distinct"
        )));
    }
    let mut subsets = Vec::new();
    for size in 0..=(max_order - 1).min(d) {
        push_combinations(d, size, &mut subsets);
    }
    Ok(InteractionBasis {
        node,
        parents: parents.to_vec(),
        max_order,
        subsets,
    })
}

/// Appends the `size`-subsets of `0..d` as bitmasks in lexicographic order.
fn push_combinations(d: usize, size: usize, out: &mut Vec<u64>) {
    let mut idx: Vec<usize> = (0..size).collect();
    loop {
        out.push(idx.iter().fold(0u64, |m, &b| m | (1 << b)));
        // Advance the rightmost index that still has room.
        let Some(pos) = (0..size).rev().find(|&p| idx[p] < d - size + p) else {
            return;
        };
        idx[pos] += 1;
        for q in pos + 1..size {
            idx[q] = idx[q - 1] + 1;
        }
    }
}

/// Monomial Π_{j∈S} x_j for a subset mask over parent positions and a
/// parent pattern (bit k set ⇔ parent k is +1).
#[inline]
pub(crate) fn monomial(subset: u64, parent_bits: u64) -> f64 {
    if (subset & !parent_bits).count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Numerically safe log(1 + e^z).
#[inline]
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// One conditional p(x_node | x_parents).
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalModel {
    basis: InteractionBasis,
    coefficients: Vec<f64>,
}

impl ConditionalModel {
    pub fn new(basis: InteractionBasis, coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.len() != basis.len() {
            return Err(Error::LengthMismatch {
                expected: basis.len(),
                got: coefficients.len(),
            });
        }
        if coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument("coefficients must be finite".into()));
        }
        Ok(ConditionalModel {
            basis,
            coefficients,
        })
    }

    /// All-zero coefficients: the uniform conditional.
    pub fn zeros(basis: InteractionBasis) -> Self {
        let coefficients = vec![0.0; basis.len()];
        ConditionalModel {
            basis,
            coefficients,
        }
    }

    pub fn basis(&self) -> &InteractionBasis {
        &self.basis
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// h for a parent pattern (bit k set ⇔ parent k is +1).
    pub fn local_field_bits(&self, parent_bits: u64) -> f64 {
        self.basis
            .subsets
            .iter()
            .zip(&self.coefficients)
            .map(|(&s, &c)| c * monomial(s, parent_bits))
            .sum()
    }

    /// h for parent spins aligned with `basis().parents()`.
    pub fn local_field(&self, parent_assignment: &[i8]) -> Result<f64> {
        Ok(self.local_field_bits(self.pattern(parent_assignment)?))
    }

    fn pattern(&self, parent_assignment: &[i8]) -> Result<u64> {
        let d = self.basis.parents.len();
        if parent_assignment.len() != d {
            return Err(Error::LengthMismatch {
                expected: d,
                got: parent_assignment.len(),
            });
        }
        let mut bits = 0u64;
        for (k, &s) in parent_assignment.iter().enumerate() {
            match s {
                1 => bits |= 1 << k,
                -1 => {}
                other => return Err(Error::InvalidSpin(i64::from(other))),
            }
        }
        Ok(bits)
    }

    /// p(x_node = spin | parents).
    pub fn conditional_prob(&self, spin: i8, parent_assignment: &[i8]) -> Result<f64> {
        if spin != 1 && spin != -1 {
            return Err(Error::InvalidSpin(i64::from(spin)));
        }
        let h = self.local_field(parent_assignment)?;
        Ok(spin_probability(spin, h))
    }
}

/// exp(spin·h) / (2 cosh h), in logistic form. The likelier spin's
/// probability is computed first so the two values sum to exactly 1.
#[inline]
pub fn spin_probability(spin: i8, h: f64) -> f64 {
    let major = 1.0 / (1.0 + (-2.0 * h.abs()).exp());
    let agrees = (h >= 0.0) == (spin > 0);
    if agrees {
        major
    } else {
        1.0 - major
    }
}

/// p(x_node = +1 | parents).
#[inline]
fn prob_plus(h: f64) -> f64 {
    spin_probability(1, h)
}

/// Autoregressive model: ordering, parent sets and one conditional per node.
#[derive(Debug, Clone, PartialEq)]
pub struct ARModel {
    parent_sets: ParentSets,
    /// Indexed by node id.
    conditionals: Vec<ConditionalModel>,
}

/// Parent sets up to this size get a precomputed probability table when sampling.
const TABLE_MAX_PARENTS: usize = 16;

/// Samples per independently seeded block in [`ancestral_sample`].
pub const SAMPLE_BLOCK: usize = 4096;

impl ARModel {
    pub fn new(parent_sets: ParentSets, conditionals: Vec<ConditionalModel>) -> Result<Self> {
        if conditionals.len() != parent_sets.len() {
            return Err(Error::LengthMismatch {
                expected: parent_sets.len(),
                got: conditionals.len(),
            });
        }
        for (v, c) in conditionals.iter().enumerate() {
            if c.basis.node != v || c.basis.parents != parent_sets.of(v) {
                return Err(Error::InvalidArgument(format!(
                    "conditional {v} does not match the parent set of node {v}"
                )));
            }
        }
        Ok(ARModel {
            parent_sets,
            conditionals,
        })
    }

    pub fn ordering(&self) -> &Ordering {
        self.parent_sets.ordering()
    }

    pub fn parent_sets(&self) -> &ParentSets {
        &self.parent_sets
    }

    pub fn conditional(&self, v: usize) -> &ConditionalModel {
        &self.conditionals[v]
    }

    pub fn conditionals(&self) -> &[ConditionalModel] {
        &self.conditionals
    }

    pub fn node_count(&self) -> usize {
        self.conditionals.len()
    }

    fn parent_bits(&self, v: usize, x: &[i8]) -> u64 {
        self.parent_sets
            .of(v)
            .iter()
            .enumerate()
            .filter(|(_, &p)| x[p] > 0)
            .fold(0u64, |acc, (k, _)| acc | (1 << k))
    }

    /// Σ_v log p(x_v | x_Par(v)).
    pub fn log_prob(&self, x: &[i8]) -> Result<f64> {
        let n = self.node_count();
        if x.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: x.len(),
            });
        }
        if let Some(&bad) = x.iter().find(|&&s| s != 1 && s != -1) {
            return Err(Error::InvalidSpin(i64::from(bad)));
        }
        Ok((0..n)
            .map(|v| {
                let h = self.conditionals[v].local_field_bits(self.parent_bits(v, x));
                -softplus(-2.0 * f64::from(x[v]) * h)
            })
            .sum())
    }
}

enum NodeSampler<'a> {
    Table(Vec<f64>),
    Direct(&'a ConditionalModel),
}

/// Draws `count` configurations by visiting nodes in ordering and sampling
/// each spin from its conditional given the already drawn parents.
///
/// Samples are generated in blocks of [`SAMPLE_BLOCK`]; block `b` uses seed
/// `seed ^ (b + 1)`, so the output does not depend on the thread count.
pub fn ancestral_sample(ar: &ARModel, count: usize, seed: u64) -> SampleSet {
    let n = ar.node_count();
    let samplers: Vec<NodeSampler> = ar
        .conditionals
        .iter()
        .map(|c| {
            let d = c.basis.parents.len();
            if d <= TABLE_MAX_PARENTS {
                NodeSampler::Table((0..1u64 << d).map(|b| prob_plus(c.local_field_bits(b))).collect())
            } else {
                NodeSampler::Direct(c)
            }
        })
        .collect();
    let order = ar.ordering().as_slice();
    let blocks: Vec<Vec<i8>> = (0..count.div_ceil(SAMPLE_BLOCK))
        .into_par_iter()
        .map(|b| {
            let rows = SAMPLE_BLOCK.min(count - b * SAMPLE_BLOCK);
            let mut rng = rng_from_seed(seed ^ (b as u64 + 1));
            let mut out = vec![0i8; rows * n];
            for x in out.chunks_exact_mut(n.max(1)).take(rows) {
                for &v in order {
                    let bits = ar.parent_bits(v, x);
                    let p = match &samplers[v] {
                        NodeSampler::Table(t) => t[bits as usize],
                        NodeSampler::Direct(c) => prob_plus(c.local_field_bits(bits)),
                    };
                    x[v] = if rng.random::<f64>() < p { 1 } else { -1 };
                }
            }
            out
        })
        .collect();
    let mut s = SampleSet::with_capacity(n, count);
    for block in &blocks {
        for x in block.chunks_exact(n.max(1)) {
            s.push_unchecked(&x[..n], 1.0);
        }
    }
    s
}
