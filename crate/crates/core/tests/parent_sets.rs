mod common;

use arising::graph::{parent_sets, parent_sets_naive, Graph};
use arising::ordering::{checkerboard, complexity_profile, diagonal, sequential, Ordering};
use arising::build_lattice;
use proptest::prelude::*;

fn graph_and_ordering() -> impl Strategy<Value = (Graph, Ordering)> {
    (2usize..=12, 0.0f64..0.6, any::<u64>()).prop_map(|(n, density, seed)| {
        let mut rng = common::rng(seed);
        let g = common::random_connected_graph(n, density, &mut rng);
        let sigma = common::random_ordering(n, &mut rng);
        (g, sigma)
    })
}

/// True when removing `parents` separates `v` from every other earlier node.
fn screens(g: &Graph, v: usize, parents: &[usize], earlier: &[usize]) -> bool {
    let comp = g.connected_component(v, parents).unwrap();
    earlier
        .iter()
        .filter(|u| !parents.contains(u))
        .all(|u| comp.binary_search(u).is_err())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn fast_and_naive_agree((g, sigma) in graph_and_ordering()) {
        let fast = parent_sets(&g, &sigma).unwrap();
        let naive = parent_sets_naive(&g, &sigma).unwrap();
        prop_assert_eq!(fast.as_slice(), naive.as_slice());
    }

    #[test]
    fn parents_screen_minimally((g, sigma) in graph_and_ordering()) {
        let ps = parent_sets(&g, &sigma).unwrap();
        let order = sigma.as_slice();
        for (i, &v) in order.iter().enumerate() {
            let earlier = &order[..i];
            let par = ps.of(v);
            prop_assert!(par.iter().all(|p| earlier.contains(p)));
            prop_assert!(screens(&g, v, par, earlier));
            for drop in 0..par.len() {
                let mut fewer = par.to_vec();
                fewer.remove(drop);
                prop_assert!(!screens(&g, v, &fewer, earlier), "parent {} of {} is redundant", par[drop], v);
            }
            for &u in g.neighbors(v) {
                if earlier.contains(&u) {
                    prop_assert!(par.contains(&u));
                }
            }
        }
    }
}

#[test]
fn lattice_generators_are_permutations() {
    for l in 1..=50 {
        for sigma in [sequential(l), checkerboard(l)] {
            let mut ids = sigma.as_slice().to_vec();
            ids.sort_unstable();
            assert_eq!(ids, (0..l * l).collect::<Vec<_>>());
        }
        if l % 2 == 1 {
            let mut ids = diagonal(l).unwrap().as_slice().to_vec();
            ids.sort_unstable();
            assert_eq!(ids, (0..l * l).collect::<Vec<_>>());
        }
    }
}

#[test]
fn sequential_cardinality_grows_with_side() {
    for l in [3, 5, 7, 9] {
        let g = build_lattice(l);
        let p = complexity_profile(&g, &sequential(l)).unwrap();
        assert_eq!(p.max_cardinality, l);
    }
}
