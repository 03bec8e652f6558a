#![allow(dead_code)]

use arising::armodel::{build_basis, ARModel, ConditionalModel};
use arising::graph::{parent_sets, Graph};
use arising::ising::{exact_conditional, ExactDistribution};
use arising::ordering::Ordering;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random spanning tree on a shuffled labelling plus each remaining pair
/// with probability `density`.
pub fn random_connected_graph(n: usize, density: f64, rng: &mut ChaCha8Rng) -> Graph {
    let mut labels: Vec<usize> = (0..n).collect();
    labels.shuffle(rng);
    let mut edges = Vec::new();
    for k in 1..n {
        let parent = rng.random_range(0..k);
        edges.push((labels[k].min(labels[parent]), labels[k].max(labels[parent])));
    }
    for i in 0..n {
        for j in i + 1..n {
            if !edges.contains(&(i, j)) && rng.random::<f64>() < density {
                edges.push((i, j));
            }
        }
    }
    Graph::new(n, edges).unwrap()
}

pub fn random_ordering(n: usize, rng: &mut ChaCha8Rng) -> Ordering {
    let mut ids: Vec<usize> = (0..n).collect();
    ids.shuffle(rng);
    Ordering::from_list(ids).unwrap()
}

pub fn spins(n: usize, index: u64) -> Vec<i8> {
    (0..n).map(|k| if (index >> k) & 1 == 1 { 1 } else { -1 }).collect()
}

/// AR model whose conditionals are the exact conditionals of `d` on the
/// parent sets along `sigma`, converted to saturated-basis coefficients by a
/// Walsh transform of the local field `h = atanh(2p − 1) / 2`.
pub fn exact_armodel(g: &Graph, sigma: &Ordering, d: &ExactDistribution) -> ARModel {
    let ps = parent_sets(g, sigma).unwrap();
    let conditionals = (0..g.node_count())
        .map(|v| {
            let parents = ps.of(v);
            let k = parents.len();
            let basis = build_basis(v, parents, k + 1).unwrap();
            let fields: Vec<f64> = (0..1u64 << k)
                .map(|bits| {
                    let p = exact_conditional(d, v, parents, &spins(k, bits)).unwrap();
                    0.5 * (p / (1.0 - p)).ln()
                })
                .collect();
            let coef = basis
                .subsets()
                .iter()
                .map(|&s| {
                    let total: f64 = fields
                        .iter()
                        .enumerate()
                        .map(|(bits, h)| {
                            let sign = if (s & !(bits as u64)).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                            sign * h
                        })
                        .sum();
                    total / (1u64 << k) as f64
                })
                .collect();
            ConditionalModel::new(basis, coef).unwrap()
        })
        .collect();
    ARModel::new(ps, conditionals).unwrap()
}

/// sqrt(a² / n + b² / n) for two independent sample means.
pub fn pooled_se(std_a: f64, std_b: f64, n: usize) -> f64 {
    ((std_a * std_a + std_b * std_b) / n as f64).sqrt()
}
