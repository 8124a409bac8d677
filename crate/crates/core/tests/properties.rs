use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use walkforge::field::{FieldElem, PrimeField};
use walkforge::graph_algos::{bfs_reachability, cycle_sets, diameter_mu_report};
use walkforge::hankel::{hankel_matvec, hankel_matvec_dense, HankelSpec};
use walkforge::oracle::{bfs_shortest_cycle, dp_walk_counts, invariant_factors_bruteforce};
use walkforge::walk_oracle::{distance, preprocess, Distance, PreprocessConfig};
use walkforge::Graph;

fn arb_graph(max_n: usize) -> impl Strategy<Value = Graph> {
    (1..=max_n, 0.0..0.6f64, any::<bool>(), any::<u64>())
        .prop_map(|(n, d, loops, seed)| Graph::random(n, d, loops, &mut ChaCha8Rng::seed_from_u64(seed)))
}

fn strongly_connected(max_n: usize) -> impl Strategy<Value = Graph> {
    (2..=max_n, 0.0..0.4f64, any::<u64>()).prop_map(|(n, d, seed)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let extra = Graph::random(n, d, false, &mut rng);
        let mut g = Graph::cycle(n);
        for (a, b) in extra.edges() {
            if !g.has_edge(a, b) {
                g.add_edge(a, b).unwrap();
            }
        }
        g
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn prefix_differences_are_walk_counts(g in arb_graph(14), seed in any::<u64>()) {
        let (_, idx) = preprocess(&g, &PreprocessConfig { seed, ..Default::default() }).unwrap();
        let f = *idx.field();
        prop_assert!(idx.stored_columns() <= 2 * g.n());
        for u in 0..g.n() {
            for v in 0..g.n() {
                let all = idx.query_all_lengths(u, v).unwrap().counts;
                for k in 1..=idx.mu() {
                    let single = idx.query_walk_count(u, v, k).unwrap();
                    prop_assert_eq!(all[k - 1], single);
                    let diff = if k == 1 {
                        idx.query_prefix_count(u, v, 1).unwrap()
                    } else {
                        f.sub(idx.query_prefix_count(u, v, k).unwrap(), idx.query_prefix_count(u, v, k - 1).unwrap())
                    };
                    prop_assert_eq!(diff, single);
                }
            }
        }
    }

    #[test]
    fn counts_match_exact_dp(g in arb_graph(12)) {
        let (_, idx) = preprocess(&g, &PreprocessConfig::default()).unwrap();
        let p = idx.field().modulus();
        let dp = dp_walk_counts(&g, idx.mu()).unwrap();
        for u in 0..g.n() {
            for v in 0..g.n() {
                for k in 1..=idx.mu() {
                    prop_assert_eq!(idx.query_walk_count(u, v, k).unwrap().value(), dp.residue(u, v, k, p));
                }
            }
        }
    }

    #[test]
    fn distance_agrees_with_bfs(g in arb_graph(16)) {
        let (_, idx) = preprocess(&g, &PreprocessConfig::default()).unwrap();
        for u in 0..g.n() {
            let bfs = bfs_reachability(&g, u).unwrap();
            for v in 0..g.n() {
                let d = distance(&idx, &g, u, v).unwrap();
                match bfs.dist[v] {
                    None => prop_assert_eq!(d, Distance::Unreachable),
                    Some(k) if k <= idx.mu() => prop_assert_eq!(d, Distance::Dist(k)),
                    Some(_) => prop_assert_eq!(d, Distance::BeyondHorizon),
                }
                prop_assert_eq!(idx.first_walk_binary_search(u, v).unwrap(), idx.first_walk_linear_scan(u, v).unwrap());
            }
        }
    }

    #[test]
    fn cycle_sets_are_a_chain(g in arb_graph(16)) {
        let (_, idx) = preprocess(&g, &PreprocessConfig::default()).unwrap();
        let sets = cycle_sets(&g, &idx).unwrap();
        for c in 2..=sets.len() {
            prop_assert!(sets.set(c - 1).iter().all(|x| sets.set(c).contains(x)));
        }
        for u in 0..g.n() {
            let member = (1..=sets.len()).find(|&c| sets.set(c).contains(&u));
            let want = bfs_shortest_cycle(&g, u).filter(|&s| s <= sets.len());
            prop_assert_eq!(member, want);
        }
    }

    #[test]
    fn diameter_within_minimal_polynomial_degree(g in strongly_connected(18)) {
        let (_, idx) = preprocess(&g, &PreprocessConfig::default()).unwrap();
        let r = diameter_mu_report(&g, &idx).unwrap();
        prop_assert!(r.strongly_connected);
        prop_assert!(r.d_le_minpoly, "diameter {} > minpoly degree {}", r.diameter, r.minpoly_deg);
    }

    #[test]
    fn invariant_factor_degrees_sum_to_n(g in arb_graph(12)) {
        let f = PrimeField::default();
        let a = g.adjacency(&f);
        let factors = invariant_factors_bruteforce(&a).unwrap();
        prop_assert_eq!(factors.iter().map(|x| x.len() - 1).sum::<usize>(), g.n());
        let (form, _) = preprocess(&g, &PreprocessConfig::default()).unwrap();
        prop_assert_eq!(form.block_degrees(), factors.iter().map(|x| x.len() - 1).collect::<Vec<_>>());
    }

    #[test]
    fn hankel_is_linear_and_exact(rows in 1usize..120, cols in 1usize..120, seed in any::<u64>()) {
        use rand::Rng;
        let f = PrimeField::default();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let seq: Vec<FieldElem> = (0..rows + cols - 1).map(|_| f.random_elem(&mut rng)).collect();
        let h = HankelSpec::new(seq, rows, cols).unwrap();
        let x: Vec<_> = (0..cols).map(|_| f.random_elem(&mut rng)).collect();
        let c = f.elem(rng.gen_range(0..f.modulus()));
        let cx: Vec<_> = x.iter().map(|&a| f.mul(a, c)).collect();
        let hx = hankel_matvec(&f, &h, &x).unwrap();
        prop_assert_eq!(&hx, &hankel_matvec_dense(&f, &h, &x));
        let scaled: Vec<_> = hx.iter().map(|&a| f.mul(a, c)).collect();
        prop_assert_eq!(hankel_matvec(&f, &h, &cx).unwrap(), scaled);
    }
}
