//! Weighted sample sets, first/second moments and the moment-based
//! sampling error.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::ising::{exact_moments, sample_exact, ExactDistribution};

/// Weighted spin configurations over `n` nodes, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    n: usize,
    spins: Vec<i8>,
    weights: Vec<f64>,
}

impl SampleSet {
    pub fn new(n: usize) -> Self {
        SampleSet {
            n,
            spins: Vec::new(),
            weights: Vec::new(),
        }
    }

    pub fn with_capacity(n: usize, rows: usize) -> Self {
        SampleSet {
            n,
            spins: Vec::with_capacity(n * rows),
            weights: Vec::with_capacity(rows),
        }
    }

    /// Unit-weight samples from explicit rows.
    pub fn from_rows<R: AsRef<[i8]>>(n: usize, rows: impl IntoIterator<Item = R>) -> Result<Self> {
        let mut s = SampleSet::new(n);
        for r in rows {
            s.push(r.as_ref(), 1.0)?;
        }
        Ok(s)
    }

    pub fn push(&mut self, spins: &[i8], weight: f64) -> Result<()> {
        if spins.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                got: spins.len(),
            });
        }
        if let Some(&bad) = spins.iter().find(|&&s| s != 1 && s != -1) {
            return Err(Error::InvalidSpin(i64::from(bad)));
        }
        if !(weight >= 0.0 && weight.is_finite()) {
            return Err(Error::InvalidArgument(format!("invalid sample weight {weight}")));
        }
        self.push_unchecked(spins, weight);
        Ok(())
    }

    pub(crate) fn push_unchecked(&mut self, spins: &[i8], weight: f64) {
        debug_assert_eq!(spins.len(), self.n);
        self.spins.extend_from_slice(spins);
        self.weights.push(weight);
    }

    /// Appends all rows of `other`.
    pub fn extend_from(&mut self, other: &SampleSet) -> Result<()> {
        if other.n != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                got: other.n,
            });
        }
        self.spins.extend_from_slice(&other.spins);
        self.weights.extend_from_slice(&other.weights);
        Ok(())
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    /// Number of rows (not the total weight).
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn row(&self, i: usize) -> &[i8] {
        &self.spins[i * self.n..(i + 1) * self.n]
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn rows(&self) -> impl Iterator<Item = (&[i8], f64)> + '_ {
        // chunks_exact would yield nothing for n == 0; rows still exist then.
        (0..self.len()).map(move |i| (self.row(i), self.weights[i]))
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Merges identical configurations, summing their weights. Rows appear
    /// in order of first occurrence.
    pub fn compress(&self) -> SampleSet {
        let mut index: HashMap<&[i8], usize> = HashMap::new();
        let mut out = SampleSet::new(self.n);
        for (row, w) in self.rows() {
            match index.get(row) {
                Some(&k) => out.weights[k] += w,
                None => {
                    index.insert(row, out.len());
                    out.push_unchecked(row, w);
                }
            }
        }
        out
    }
}

/// Mean vector and covariance matrix (row-major, n×n).
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSummary {
    mean: Vec<f64>,
    covariance: Vec<f64>,
}

impl MomentSummary {
    pub fn new(mean: Vec<f64>, covariance: Vec<f64>) -> Result<Self> {
        let n = mean.len();
        if covariance.len() != n * n {
            return Err(Error::LengthMismatch {
                expected: n * n,
                got: covariance.len(),
            });
        }
        Ok(MomentSummary { mean, covariance })
    }

    /// From E[x] and an upper-triangular E[x_i x_j] (i < j) accumulation.
    /// Diagonal second moments are 1 for spins.
    pub(crate) fn from_raw(mean: Vec<f64>, upper_second: Vec<f64>) -> Self {
        let n = mean.len();
        let mut cov = vec![0.0; n * n];
        for i in 0..n {
            cov[i * n + i] = 1.0 - mean[i] * mean[i];
            for j in i + 1..n {
                let c = upper_second[i * n + j] - mean[i] * mean[j];
                cov[i * n + j] = c;
                cov[j * n + i] = c;
            }
        }
        MomentSummary {
            mean,
            covariance: cov,
        }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn covariance(&self) -> &[f64] {
        &self.covariance
    }

    pub fn cov(&self, i: usize, j: usize) -> f64 {
        self.covariance[i * self.mean.len() + j]
    }
}

/// Weighted mean and population covariance (normalized by total weight).
pub fn empirical_moments(s: &SampleSet) -> Result<MomentSummary> {
    let total = s.total_weight();
    if total <= 0.0 {
        return Err(Error::ZeroWeight);
    }
    let n = s.node_count();
    let mut mean = vec![0.0; n];
    let mut second = vec![0.0; n * n];
    let mut x = vec![0.0; n];
    for (row, w) in s.rows() {
        if w == 0.0 {
            continue;
        }
        for (xi, &r) in x.iter_mut().zip(row) {
            *xi = f64::from(r);
        }
        for i in 0..n {
            let wi = w * x[i];
            mean[i] += wi;
            let upper = &mut second[i * n + i + 1..(i + 1) * n];
            for (acc, &xj) in upper.iter_mut().zip(&x[i + 1..]) {
                *acc += wi * xj;
            }
        }
    }
    for m in &mut mean {
        *m /= total;
    }
    for v in &mut second {
        *v /= total;
    }
    Ok(MomentSummary::from_raw(mean, second))
}

/// Moments of the samples pooled with their global spin flips: zero mean and
/// covariance E[x xᵀ]. Unbiased for any distribution with p(x) = p(−x), and
/// immune to how a slowly mixing chain splits its time between the modes.
pub fn symmetrized_moments(s: &SampleSet) -> Result<MomentSummary> {
    let m = empirical_moments(s)?;
    let n = m.dim();
    let mut cov = m.covariance;
    for i in 0..n {
        for j in 0..n {
            cov[i * n + j] += m.mean[i] * m.mean[j];
        }
    }
    MomentSummary::new(vec![0.0; n], cov)
}

/// ε = sqrt(‖mean_a − mean_b‖₂ + ‖cov_a − cov_b‖_F).
pub fn sampling_error(a: &MomentSummary, b: &MomentSummary) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::LengthMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    let sq = |u: &[f64], v: &[f64]| {
        u.iter()
            .zip(v)
            .map(|(p, q)| (p - q) * (p - q))
            .sum::<f64>()
            .sqrt()
    };
    Ok((sq(&a.mean, &b.mean) + sq(&a.covariance, &b.covariance)).sqrt())
}

/// Mean and sample standard deviation of a slice; std is 0 for one value.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (k - 1.0);
    (mean, var.sqrt())
}

/// Finite-sampling floor: ε of `sample_size` exact draws against the exact
/// moments, repeated over `trials` (trial `t` uses seed `seed ^ (t + 1)`).
pub fn baseline_error(
    d: &ExactDistribution,
    sample_size: usize,
    trials: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    let reference = exact_moments(d);
    let errors = (0..trials)
        .map(|t| {
            let s = sample_exact(d, sample_size, seed ^ (t as u64 + 1));
            sampling_error(&empirical_moments(&s)?, &reference)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(mean_std(&errors))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_lattice, Graph};
    use crate::ising::{enumerate_distribution, make_ferromagnet, IsingModel};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn single_sample_moments() {
        let s = SampleSet::from_rows(2, [[1i8, -1]]).unwrap();
        let m = empirical_moments(&s).unwrap();
        assert_eq!(m.mean(), &[1.0, -1.0]);
        assert!(m.covariance().iter().all(|&c| c == 0.0));
    }

    #[test]
    fn aligned_pair_moments() {
        let s = SampleSet::from_rows(2, [[1i8, 1], [-1, -1]]).unwrap();
        let m = empirical_moments(&s).unwrap();
        assert_eq!(m.mean(), &[0.0, 0.0]);
        assert_eq!(m.cov(0, 1), 1.0);
        assert_eq!(m.cov(1, 0), 1.0);
    }

    #[test]
    fn weighted_moments() {
        let mut s = SampleSet::new(1);
        s.push(&[1], 3.0).unwrap();
        s.push(&[-1], 1.0).unwrap();
        let m = empirical_moments(&s).unwrap();
        assert_abs_diff_eq!(m.mean()[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(m.cov(0, 0), 0.75, epsilon = 1e-15);
    }

    #[test]
    fn symmetrized_matches_flipped_pool() {
        let mut s = SampleSet::new(3);
        s.push(&[1, 1, -1], 2.0).unwrap();
        s.push(&[1, -1, -1], 1.0).unwrap();
        let mut pooled = s.clone();
        pooled.push(&[-1, -1, 1], 2.0).unwrap();
        pooled.push(&[-1, 1, 1], 1.0).unwrap();
        let a = symmetrized_moments(&s).unwrap();
        let b = empirical_moments(&pooled).unwrap();
        assert_eq!(a.mean(), &[0.0; 3]);
        for i in 0..3 {
            for j in 0..3 {
                assert_abs_diff_eq!(a.cov(i, j), b.cov(i, j), epsilon = 1e-15);
            }
        }
        assert_abs_diff_eq!(a.cov(0, 1), 1.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn zero_weight_rejected() {
        let mut s = SampleSet::new(1);
        assert!(matches!(empirical_moments(&s), Err(Error::ZeroWeight)));
        s.push(&[1], 0.0).unwrap();
        assert!(matches!(empirical_moments(&s), Err(Error::ZeroWeight)));
    }

    #[test]
    fn push_validation() {
        let mut s = SampleSet::new(2);
        assert!(s.push(&[1], 1.0).is_err());
        assert!(s.push(&[1, 2], 1.0).is_err());
        assert!(s.push(&[1, 1], -1.0).is_err());
        assert!(s.push(&[1, 1], f64::NAN).is_err());
    }

    #[test]
    fn compress_sums_weights() {
        let s = SampleSet::from_rows(2, [[1i8, 1], [-1, 1], [1, 1]]).unwrap();
        let c = s.compress();
        assert_eq!(c.len(), 2);
        assert_eq!(c.row(0), &[1, 1]);
        assert_eq!(c.weight(0), 2.0);
        assert_eq!(empirical_moments(&c).unwrap(), empirical_moments(&s).unwrap());
    }

    #[test]
    fn sampling_error_examples() {
        let a = MomentSummary::new(vec![0.6], vec![0.64]).unwrap();
        let b = MomentSummary::new(vec![0.5], vec![0.75]).unwrap();
        assert_abs_diff_eq!(sampling_error(&a, &b).unwrap(), 0.458258, epsilon = 1e-6);
        assert_eq!(sampling_error(&a, &a).unwrap(), 0.0);
        let c = MomentSummary::new(vec![0.0, 0.0], vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        assert!(sampling_error(&a, &c).is_err());
    }

    fn summary(n: usize) -> impl Strategy<Value = MomentSummary> {
        (
            prop::collection::vec(-1.0f64..1.0, n),
            prop::collection::vec(-1.0f64..1.0, n * n),
        )
            .prop_map(|(m, c)| MomentSummary::new(m, c).unwrap())
    }

    proptest! {
        #[test]
        fn sampling_error_symmetric_and_nonnegative((a, b) in (1usize..6).prop_flat_map(|n| (summary(n), summary(n)))) {
            let ab = sampling_error(&a, &b).unwrap();
            let ba = sampling_error(&b, &a).unwrap();
            prop_assert!(ab >= 0.0);
            prop_assert_eq!(ab, ba);
            prop_assert_eq!(sampling_error(&a, &a).unwrap(), 0.0);
        }
    }

    #[test]
    fn baseline_shrinks_with_more_samples() {
        let m = IsingModel::new(Graph::empty(1), vec![0.0], vec![]).unwrap();
        let d = enumerate_distribution(&m).unwrap();
        let (small, _) = baseline_error(&d, 1_000, 20, 3).unwrap();
        let (large, _) = baseline_error(&d, 100_000, 20, 3).unwrap();
        assert!(large < small);
        let (_, std) = baseline_error(&d, 100, 1, 3).unwrap();
        assert_eq!(std, 0.0);
        assert!(baseline_error(&d, 100, 0, 3).is_err());
    }

    #[test]
    fn exact_samples_converge_in_moments() {
        let d = enumerate_distribution(&make_ferromagnet(&build_lattice(3))).unwrap();
        let (a, _) = baseline_error(&d, 2_000, 20, 11).unwrap();
        let (b, _) = baseline_error(&d, 20_000, 20, 11).unwrap();
        assert!(b < a);
    }

    #[test]
    fn mean_std_basic() {
        assert_eq!(mean_std(&[2.0]), (2.0, 0.0));
        let (m, s) = mean_std(&[1.0, 3.0]);
        assert_eq!(m, 2.0);
        assert_abs_diff_eq!(s, 2f64.sqrt(), epsilon = 1e-15);
    }
}
