use hyperlap::combin::{binom, colex_subsets, sset_rank, sset_unrank, VertexSet};
use hyperlap::hypergraph::{all_degrees, Hypergraph};
use hyperlap::laplacian::build_aux;
use hyperlap::walks::{
    code_from_walk, edge_moment, max_vertices, partition_from_walk, walk_from_code, WalkCode,
    WalkPartition,
};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;

fn hypergraph() -> impl Strategy<Value = (Hypergraph, usize)> {
    (4usize..=9, 2usize..=4)
        .prop_filter("r <= n", |(n, r)| r <= n)
        .prop_flat_map(|(n, r)| {
            let total = colex_subsets(n, r).count();
            (
                Just(n),
                Just(r),
                proptest::collection::vec(any::<bool>(), total),
                1..=r / 2,
            )
        })
        .prop_map(|(n, r, keep, s)| {
            let edges = colex_subsets(n, r)
                .zip(keep)
                .filter(|(_, k)| *k)
                .map(|(e, _)| e);
            (Hypergraph::from_edges(n, r, edges).unwrap(), s)
        })
}

fn dyck(k: usize) -> impl Strategy<Value = String> {
    proptest::collection::vec(any::<bool>(), 2 * k).prop_map(move |coin| {
        let (mut open, mut depth) = (0, 0);
        coin.into_iter()
            .map(|c| {
                if open < k && (depth == 0 || c) {
                    open += 1;
                    depth += 1;
                    '('
                } else {
                    depth -= 1;
                    ')'
                }
            })
            .collect()
    })
}

fn partition(n: usize, r: usize, s: usize, k: usize) -> impl Strategy<Value = WalkPartition> {
    Just((0..n as u32).collect::<Vec<_>>())
        .prop_shuffle()
        .prop_map(move |v| {
            let set = |xs: &[u32]| {
                if xs.is_empty() {
                    VertexSet::empty()
                } else {
                    VertexSet::from_unsorted(xs.to_vec(), n).unwrap()
                }
            };
            let stops = (0..=k).map(|i| set(&v[i * s..(i + 1) * s])).collect();
            let base = (k + 1) * s;
            let x = r - 2 * s;
            let extras = (0..k)
                .map(|i| set(&v[base + i * x..base + (i + 1) * x]))
                .collect();
            WalkPartition { stops, extras }
        })
}

fn walk_case() -> impl Strategy<Value = (WalkPartition, String)> {
    (1usize..=2, 0usize..=2, 1usize..=4).prop_flat_map(|(s, extra, k)| {
        let r = 2 * s + extra;
        let m = max_vertices(r, s, k);
        (m..=m + 3).prop_flat_map(move |n| (partition(n, r, s, k), dyck(k)))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn degree_double_counting((h, s) in hypergraph()) {
        let total: u64 = all_degrees(&h, s).unwrap().iter().sum();
        prop_assert_eq!(total as u128, h.edge_count() as u128 * binom(h.r(), s).unwrap());
    }

    #[test]
    fn aux_graph_invariants((h, s) in hypergraph()) {
        let g = build_aux(&h, s).unwrap();
        let factor = binom(h.r() - s, s).unwrap() as u64;
        let mut vol = 0;
        for i in 0..g.dim() {
            prop_assert_eq!(g.weight(i, i), 0);
            let mut row = 0;
            for j in 0..g.dim() {
                prop_assert_eq!(g.weight(i, j), g.weight(j, i));
                row += g.weight(i, j);
            }
            prop_assert_eq!(row, g.aux_degrees[i]);
            prop_assert_eq!(row, factor * g.hyper_degrees[i]);
            vol += row;
        }
        prop_assert_eq!(vol, g.vol);
    }

    #[test]
    fn rank_unrank_round_trip(n in 1usize..40, s in 1usize..6, seed in any::<u64>()) {
        prop_assume!(s <= n);
        let total = binom(n, s).unwrap();
        let idx = seed as u128 % total;
        let set = sset_unrank(idx, n, s).unwrap();
        prop_assert_eq!(set.len(), s);
        prop_assert_eq!(sset_rank(&set, n).unwrap(), idx);
    }

    #[test]
    fn code_bijection_round_trip((part, code) in walk_case()) {
        let code = WalkCode::parse(&code).unwrap();
        let walk = walk_from_code(&part, &code).unwrap();
        prop_assert!(walk.is_good());
        prop_assert_eq!(walk.distinct_edges().len(), part.k());
        prop_assert_eq!(walk.vertex_count(), max_vertices(walk.r(), walk.s(), part.k()));
        prop_assert_eq!(code_from_walk(&walk).unwrap(), code);
        prop_assert_eq!(partition_from_walk(&walk).unwrap(), part);
    }

    #[test]
    fn edge_moments(a in 0i64..=20, q in 1u32..8) {
        let p = BigRational::new(BigInt::from(a), BigInt::from(20));
        let one = BigRational::one();
        let m = edge_moment(q, &p);
        // E (X - p)^q with X ~ Bernoulli(p)
        let direct = p.clone() * num_traits::pow(one.clone() - &p, q as usize)
            + (one - &p) * num_traits::pow(-p.clone(), q as usize);
        prop_assert_eq!(&m, &direct);
        if q == 1 {
            prop_assert!(m.is_zero());
        }
    }
}
