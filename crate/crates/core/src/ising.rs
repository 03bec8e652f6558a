//! Pairwise Ising models over ±1 spins and exact computations by enumeration.
//!
//! `p(x) ∝ exp(Σ_i θ_i x_i + Σ_(i,j)∈E θ_ij x_i x_j)`.
//!
//! Configurations are indexed by bitmask: bit `k` of the index is set iff
//! `x_k = +1`. This convention is shared by every module.

use std::sync::OnceLock;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::metrics::{MomentSummary, SampleSet};
use crate::rng::rng_from_seed;

/// Largest node count accepted by [`enumerate_distribution`].
pub const DEFAULT_ENUMERATION_CAP: usize = 28;

/// A spin configuration; every entry is −1 or +1.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Configuration(Vec<i8>);

impl Configuration {
    pub fn new(spins: Vec<i8>) -> Result<Self> {
        if let Some(&bad) = spins.iter().find(|&&s| s != 1 && s != -1) {
            return Err(Error::InvalidSpin(i64::from(bad)));
        }
        Ok(Configuration(spins))
    }

    /// Decodes a bitmask index (bit k set ⇔ x_k = +1).
    pub fn from_index(n: usize, index: u64) -> Self {
        Configuration(spins_from_index(n, index))
    }

    pub fn uniform(n: usize, spin: i8) -> Self {
        assert!(spin == 1 || spin == -1);
        Configuration(vec![spin; n])
    }

    pub fn index(&self) -> u64 {
        assert!(self.0.len() <= 64, "bitmask index needs n <= 64");
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &s)| s > 0)
            .fold(0u64, |acc, (k, _)| acc | (1 << k))
    }

    pub fn spins(&self) -> &[i8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

pub(crate) fn spins_from_index(n: usize, index: u64) -> Vec<i8> {
    (0..n)
        .map(|k| if (index >> k) & 1 == 1 { 1 } else { -1 })
        .collect()
}

/// Ising model: a graph with one field per node and one coupling per edge.
#[derive(Debug, Clone, PartialEq)]
pub struct IsingModel {
    graph: Graph,
    fields: Vec<f64>,
    /// Aligned with `graph.edges()`.
    couplings: Vec<f64>,
    /// Per node: (neighbour, coupling).
    local: Vec<Vec<(usize, f64)>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpinGlassMode {
    /// Couplings uniform on {−1, +1}.
    PmOne,
    /// Couplings uniform on [−1, 1].
    UniformUnit,
    /// Fields and couplings uniform on [−2, −0.25] ∪ [0.25, 2].
    DwaveRange,
}

impl std::str::FromStr for SpinGlassMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "pm_one" => Ok(SpinGlassMode::PmOne),
            "uniform_unit" => Ok(SpinGlassMode::UniformUnit),
            "dwave_range" => Ok(SpinGlassMode::DwaveRange),
            _ => Err(Error::InvalidArgument(format!("unknown spin-glass mode `{s}`"))),
        }
    }
}

impl IsingModel {
    pub fn new(graph: Graph, fields: Vec<f64>, couplings: Vec<f64>) -> Result<Self> {
        if fields.len() != graph.node_count() {
            return Err(Error::LengthMismatch {
                expected: graph.node_count(),
                got: fields.len(),
            });
        }
        if couplings.len() != graph.edge_count() {
            return Err(Error::LengthMismatch {
                expected: graph.edge_count(),
                got: couplings.len(),
            });
        }
        if fields.iter().chain(&couplings).any(|t| !t.is_finite()) {
            return Err(Error::InvalidArgument("model parameters must be finite".into()));
        }
        let mut local = vec![Vec::new(); graph.node_count()];
        for (&(i, j), &t) in graph.edges().iter().zip(&couplings) {
            local[i].push((j, t));
            local[j].push((i, t));
        }
        for l in &mut local {
            l.sort_by_key(|&(j, _)| j);
        }
        Ok(IsingModel {
            graph,
            fields,
            couplings,
            local,
        })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn node_count(&self) -> usize {
        self.graph.node_count()
    }

    pub fn fields(&self) -> &[f64] {
        &self.fields
    }

    pub fn couplings(&self) -> &[f64] {
        &self.couplings
    }

    pub fn coupling(&self, i: usize, j: usize) -> Option<f64> {
        self.graph.edge_index(i, j).map(|e| self.couplings[e])
    }

    /// (neighbour, coupling) pairs of node `v`, sorted by neighbour.
    pub fn local_couplings(&self, v: usize) -> &[(usize, f64)] {
        &self.local[v]
    }

    /// Zero fields and all couplings exactly +1.
    pub fn is_ferromagnet(&self) -> bool {
        self.fields.iter().all(|&f| f == 0.0) && self.couplings.iter().all(|&c| c == 1.0)
    }

    /// Effective field on `v` given the other spins: θ_v + Σ_j θ_vj x_j.
    pub fn local_field(&self, v: usize, spins: &[i8]) -> f64 {
        self.local[v]
            .iter()
            .fold(self.fields[v], |h, &(j, t)| h + t * f64::from(spins[j]))
    }

    /// Exponent Σ θ_i x_i + Σ θ_ij x_i x_j.
    pub fn energy(&self, x: &Configuration) -> Result<f64> {
        self.energy_spins(x.spins())
    }

    pub fn energy_spins(&self, x: &[i8]) -> Result<f64> {
        if x.len() != self.node_count() {
            return Err(Error::LengthMismatch {
                expected: self.node_count(),
                got: x.len(),
            });
        }
        let field: f64 = self.fields.iter().zip(x).map(|(t, &s)| t * f64::from(s)).sum();
        let pair: f64 = self
            .graph
            .edges()
            .iter()
            .zip(&self.couplings)
            .map(|(&(i, j), t)| t * f64::from(x[i] * x[j]))
            .sum();
        Ok(field + pair)
    }

    fn energy_of_index(&self, index: u64) -> f64 {
        self.energy_spins(&spins_from_index(self.node_count(), index))
            .expect("length matches")
    }
}

/// θ_i = 0 and θ_ij = +1 on every edge.
pub fn make_ferromagnet(g: &Graph) -> IsingModel {
    IsingModel::new(g.clone(), vec![0.0; g.node_count()], vec![1.0; g.edge_count()])
        .expect("sizes match")
}

/// Random couplings drawn i.i.d. in edge order; for `DwaveRange` the fields
/// are drawn afterwards, in node order, from the same law.
pub fn make_spin_glass(g: &Graph, seed: u64, mode: SpinGlassMode) -> IsingModel {
    let mut rng = rng_from_seed(seed);
    let draw = |rng: &mut crate::rng::Rng| -> f64 {
        match mode {
            SpinGlassMode::PmOne => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            SpinGlassMode::UniformUnit => rng.random_range(-1.0..=1.0),
            SpinGlassMode::DwaveRange => {
                let magnitude = rng.random_range(0.25..=2.0);
                if rng.random::<bool>() {
                    magnitude
                } else {
                    -magnitude
                }
            }
        }
    };
    let couplings: Vec<f64> = (0..g.edge_count()).map(|_| draw(&mut rng)).collect();
    let fields = match mode {
        SpinGlassMode::DwaveRange => (0..g.node_count()).map(|_| draw(&mut rng)).collect(),
        _ => vec![0.0; g.node_count()],
    };
    IsingModel::new(g.clone(), fields, couplings).expect("sizes match")
}

/// Exact distribution of a model, stored densely over all 2^n configurations.
#[derive(Debug)]
pub struct ExactDistribution {
    model: IsingModel,
    log_z: f64,
    probabilities: Vec<f64>,
    cumulative: OnceLock<Vec<f64>>,
}

/// Gray-code steps between exact energy recomputations, bounding round-off drift.
const RESYNC_INTERVAL: u64 = 1 << 12;

pub fn enumerate_distribution(m: &IsingModel) -> Result<ExactDistribution> {
    enumerate_distribution_with_cap(m, DEFAULT_ENUMERATION_CAP)
}

/// Enumerates all configurations in Gray-code order, updating the energy in
/// O(degree) per step, then normalizes with a log-sum-exp.
pub fn enumerate_distribution_with_cap(m: &IsingModel, cap: usize) -> Result<ExactDistribution> {
    let n = m.node_count();
    if n > cap || n >= 63 {
        return Err(Error::EnumerationTooLarge { n, cap });
    }
    let size = 1u64 << n;
    let mut values = gray_code_energies(m);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = values.iter().map(|&e| (e - max).exp()).sum();
    let log_z = max + sum.ln();
    for v in values.iter_mut() {
        *v = (*v - log_z).exp();
    }
    debug_assert_eq!(values.len() as u64, size);
    Ok(ExactDistribution {
        model: m.clone(),
        log_z,
        probabilities: values,
        cumulative: OnceLock::new(),
    })
}

/// Energies indexed by configuration bitmask, visited in reflected Gray-code order.
pub(crate) fn gray_code_energies(m: &IsingModel) -> Vec<f64> {
    let n = m.node_count();
    let size = 1u64 << n;
    let mut energies = vec![0.0; size as usize];
    let mut spins = vec![-1i8; n];
    let mut energy = m.energy_spins(&spins).expect("length matches");
    let mut code = 0u64;
    energies[0] = energy;
    for step in 1..size {
        let k = step.trailing_zeros() as usize;
        let s = f64::from(spins[k]);
        energy -= 2.0 * s * m.local_field(k, &spins);
        spins[k] = -spins[k];
        code ^= 1 << k;
        if step % RESYNC_INTERVAL == 0 {
            energy = m.energy_spins(&spins).expect("length matches");
        }
        energies[code as usize] = energy;
    }
    energies
}

impl ExactDistribution {
    pub fn model(&self) -> &IsingModel {
        &self.model
    }

    pub fn node_count(&self) -> usize {
        self.model.node_count()
    }

    pub fn log_z(&self) -> f64 {
        self.log_z
    }

    /// Probabilities indexed by configuration bitmask.
    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn prob(&self, x: &Configuration) -> f64 {
        self.probabilities[x.index() as usize]
    }

    /// Marginal table over `vars`: entry `p` is the probability that
    /// `x_vars[k] = +1` exactly for the bits `k` set in `p`.
    pub fn marginal(&self, vars: &[usize]) -> Vec<f64> {
        let mut table = vec![0.0; 1 << vars.len()];
        for (b, &p) in self.probabilities.iter().enumerate() {
            let idx = vars
                .iter()
                .enumerate()
                .fold(0usize, |acc, (k, &v)| acc | (((b >> v) & 1) << k));
            table[idx] += p;
        }
        table
    }

    fn cumulative(&self) -> &[f64] {
        self.cumulative.get_or_init(|| {
            let mut acc = 0.0;
            self.probabilities
                .iter()
                .map(|p| {
                    acc += p;
                    acc
                })
                .collect()
        })
    }
}

/// Mean vector and covariance of the exact distribution.
///
/// Splits each index into high and low halves so the cost is O(2^n · n/2)
/// instead of O(2^n · n²): pairs within the low half use the low-half
/// marginal, pairs within the high half the high-half marginal, and cross
/// pairs a per-high-block first moment of the low spins.
pub fn exact_moments(d: &ExactDistribution) -> MomentSummary {
    let n = d.node_count();
    let lo_bits = n / 2;
    let hi_bits = n - lo_bits;
    let lo_size = 1usize << lo_bits;
    let hi_size = 1usize << hi_bits;
    let sign = |b: usize, k: usize| if (b >> k) & 1 == 1 { 1.0 } else { -1.0 };

    let mut m_lo = vec![0.0; lo_size];
    let mut m_hi = vec![0.0; hi_size];
    // first_lo[hi * lo_bits + i] = Σ_lo p(hi, lo) x_i(lo)
    let mut first_lo = vec![0.0; hi_size * lo_bits];
    for hi in 0..hi_size {
        let row = &d.probabilities[hi * lo_size..(hi + 1) * lo_size];
        let acc = &mut first_lo[hi * lo_bits..(hi + 1) * lo_bits];
        let mut total = 0.0;
        for (lo, &p) in row.iter().enumerate() {
            total += p;
            m_lo[lo] += p;
            for (i, a) in acc.iter_mut().enumerate() {
                *a += p * sign(lo, i);
            }
        }
        m_hi[hi] = total;
    }

    let mut mean = vec![0.0; n];
    let mut second = vec![0.0; n * n];
    for (lo, &p) in m_lo.iter().enumerate() {
        for i in 0..lo_bits {
            let si = sign(lo, i);
            mean[i] += p * si;
            for j in i + 1..lo_bits {
                second[i * n + j] += p * si * sign(lo, j);
            }
        }
    }
    for (hi, &p) in m_hi.iter().enumerate() {
        for a in 0..hi_bits {
            let sa = sign(hi, a);
            mean[lo_bits + a] += p * sa;
            for b in a + 1..hi_bits {
                second[(lo_bits + a) * n + lo_bits + b] += p * sa * sign(hi, b);
            }
        }
    }
    for hi in 0..hi_size {
        for a in 0..hi_bits {
            let sa = sign(hi, a);
            for i in 0..lo_bits {
                second[i * n + lo_bits + a] += sa * first_lo[hi * lo_bits + i];
            }
        }
    }
    MomentSummary::from_raw(mean, second)
}

/// p(x_node = +1 | x_parents = assignment), by summing over all configurations.
pub fn exact_conditional(
    d: &ExactDistribution,
    node: usize,
    parents: &[usize],
    assignment: &[i8],
) -> Result<f64> {
    let n = d.node_count();
    if assignment.len() != parents.len() {
        return Err(Error::LengthMismatch {
            expected: parents.len(),
            got: assignment.len(),
        });
    }
    if node >= n {
        return Err(Error::NodeOutOfRange { node, n });
    }
    if let Some(&p) = parents.iter().find(|&&p| p >= n) {
        return Err(Error::NodeOutOfRange { node: p, n });
    }
    if parents.contains(&node) {
        return Err(Error::SelfParent(node));
    }
    let mut mask = 0u64;
    let mut want = 0u64;
    for (&p, &s) in parents.iter().zip(assignment) {
        if s != 1 && s != -1 {
            return Err(Error::InvalidSpin(i64::from(s)));
        }
        mask |= 1 << p;
        if s > 0 {
            want |= 1 << p;
        }
    }
    let (mut plus, mut total) = (0.0, 0.0);
    for (b, &p) in d.probabilities.iter().enumerate() {
        let b = b as u64;
        if b & mask == want {
            total += p;
            if (b >> node) & 1 == 1 {
                plus += p;
            }
        }
    }
    Ok(plus / total)
}

/// Draws i.i.d. configurations by inverse CDF over the cumulative probabilities.
pub fn sample_exact(d: &ExactDistribution, count: usize, seed: u64) -> SampleSet {
    let n = d.node_count();
    let mut out = SampleSet::with_capacity(n, count);
    if count == 0 {
        return out;
    }
    let cdf = d.cumulative();
    let total = *cdf.last().unwrap();
    let mut rng = rng_from_seed(seed);
    let mut spins = vec![0i8; n];
    for _ in 0..count {
        let u = rng.random::<f64>() * total;
        let idx = cdf.partition_point(|&c| c <= u).min(cdf.len() - 1);
        for (k, s) in spins.iter_mut().enumerate() {
            *s = if (idx >> k) & 1 == 1 { 1 } else { -1 };
        }
        out.push_unchecked(&spins, 1.0);
    }
    out
}

/// Naive per-configuration energies, for cross-checking the Gray-code pass.
#[doc(hidden)]
pub fn naive_energies(m: &IsingModel) -> Vec<f64> {
    (0..1u64 << m.node_count()).map(|b| m.energy_of_index(b)).collect()
}
