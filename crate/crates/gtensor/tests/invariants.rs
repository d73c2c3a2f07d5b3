//! Property tests for the algebraic invariants that hold on all inputs, not
//! just the named fixtures.

use std::collections::BTreeSet;

use proptest::prelude::*;

use gtensor::graphs::{self, FractionalGraph};
use gtensor::tensors;
use gtensor::util::{rat, Rat};

fn arb_graph(max_vertices: usize, max_edges: usize) -> impl Strategy<Value = FractionalGraph> {
    (2..=max_vertices).prop_flat_map(move |v| {
        proptest::collection::vec((1..=v, 1..=v), 0..=max_edges).prop_map(move |pairs| {
            let edges: Vec<(usize, usize)> =
                pairs.into_iter().filter(|(a, b)| a != b).collect();
            FractionalGraph::unweighted((1..=v).collect(), edges).unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn sum_commutes_up_to_isomorphism(g in arb_graph(5, 4), h in arb_graph(5, 4)) {
        let a = g.sum(&h);
        let b = h.sum(&g);
        // same vertex multiset and pair weights; witness found by search
        prop_assert!(graphs::find_isomorphism(&a, &b).unwrap().is_some());
    }

    #[test]
    fn sum_associates_up_to_isomorphism(
        g in arb_graph(4, 3),
        h in arb_graph(4, 3),
        k in arb_graph(4, 3),
    ) {
        let left = g.sum(&h).sum(&k);
        let right = g.sum(&h.sum(&k));
        prop_assert!(graphs::find_isomorphism(&left, &right).unwrap().is_some());
    }

    #[test]
    fn scaling_round_trips(g in arb_graph(5, 5), num in 1i64..6, den in 1i64..6) {
        let a = rat(num, den);
        let inverse = rat(den, num);
        let back = g.scale(&a).unwrap().scale(&inverse).unwrap();
        prop_assert_eq!(back, g);
    }

    #[test]
    fn contraction_cost_is_the_incident_edge_count(g in arb_graph(5, 6), pick in any::<u64>()) {
        if g.num_vertices() < 2 {
            return Ok(());
        }
        // choose a nonempty vertex subset deterministically from `pick`
        let u_set: BTreeSet<usize> = g
            .vertices()
            .iter()
            .enumerate()
            .filter(|(i, _)| pick >> i & 1 == 1)
            .map(|(_, &v)| v)
            .collect();
        if u_set.is_empty() {
            return Ok(());
        }
        let (contracted, a) = g.contract(&u_set).unwrap();
        let brute = g
            .edges()
            .iter()
            .filter(|e| u_set.contains(&e.u) || u_set.contains(&e.v))
            .count();
        prop_assert_eq!(a, brute);
        // contraction never increases the number of leaving edges
        prop_assert!(contracted.num_edges() <= g.num_edges());
    }

    #[test]
    fn line_graph_vertex_count(g in arb_graph(5, 6)) {
        prop_assert_eq!(g.line_graph().unwrap().num_vertices(), g.num_edges());
    }

    #[test]
    fn matchings_partition_exactly(g in arb_graph(6, 8)) {
        let parts = graphs::edge_partition_into_matchings(&g).unwrap();
        let mut all: Vec<(usize, usize)> = Vec::new();
        for m in &parts {
            for &v in m.vertices() {
                prop_assert!(m.degree(v) <= 1);
            }
            all.extend(m.edges().iter().map(|e| (e.u.min(e.v), e.u.max(e.v))));
        }
        let mut expect: Vec<(usize, usize)> =
            g.edges().iter().map(|e| (e.u.min(e.v), e.u.max(e.v))).collect();
        all.sort_unstable();
        expect.sort_unstable();
        prop_assert_eq!(all, expect);
    }

    #[test]
    fn product_rule_holds_on_random_pairs(
        g in arb_graph(4, 3),
        h in arb_graph(4, 3),
        n in 2usize..=3,
    ) {
        // align the vertex sets
        let vmax = g.num_vertices().max(h.num_vertices());
        let pad = |x: &FractionalGraph| {
            FractionalGraph::unweighted(
                (1..=vmax).collect(),
                x.edges().iter().map(|e| (e.u, e.v)).collect(),
            )
            .unwrap()
        };
        let (g, h) = (pad(&g), pad(&h));
        let tg = tensors::graph_tensor(&g, n).unwrap();
        let th = tensors::graph_tensor(&h, n).unwrap();
        let kron = tensors::kronecker(&tg, &th).unwrap();
        let tables = tensors::canonical_reindex_product(&g, &h, n).unwrap();
        let target = tensors::graph_tensor(&g.sum(&h), n).unwrap();
        let re = tensors::apply_reindexing(&kron, &tables, target.mode_dims().to_vec());
        prop_assert_eq!(re, target);
    }

    #[test]
    fn evaluation_is_multilinear_in_each_mode(g in arb_graph(4, 4), n in 2usize..=3) {
        let t = tensors::graph_tensor(&g, n).unwrap();
        // scaling one mode's input scales the value
        let dims = t.mode_dims().to_vec();
        let base: Vec<Vec<Rat>> = dims.iter().map(|&d| (0..d).map(|i| rat(i as i64 + 1, 2)).collect()).collect();
        let v0 = t.evaluate(&base).unwrap();
        let mut scaled = base.clone();
        for x in scaled[0].iter_mut() {
            *x *= rat(3, 1);
        }
        let v1 = t.evaluate(&scaled).unwrap();
        prop_assert_eq!(v1, v0 * rat(3, 1));
    }
}
