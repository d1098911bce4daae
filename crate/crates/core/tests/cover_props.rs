mod common;

use proptest::prelude::*;

use lbx_core::algo_zoo::{greedy_by_color, po_greedy};
use lbx_core::covers::{factor_graph, loopiness, random_simple_lift, unfold_loop, verify_covering};
use lbx_core::gen::RandomGraph;
use lbx_core::locality::{canonical_code, evaluate_raw};
use lbx_core::{ColoredMultigraph, CoverView, CoveringMap, Model};

use common::{find_covering, isomorphic};

fn graph(model: Model, n: usize, k: u32, seed: u64) -> ColoredMultigraph {
    let shape = match model {
        Model::EC => RandomGraph::ec(n, k),
        _ => RandomGraph::po(n, k),
    };
    shape.extra_edges(n).loop_chance(0.5).generate(seed)
}

fn connected_lift(g: &ColoredMultigraph, seed: u64) -> Option<(ColoredMultigraph, CoveringMap)> {
    (0..6u64).find_map(|a| {
        [2, 3, 4, 6].iter().find_map(|&c| {
            random_simple_lift(g, c, seed.wrapping_mul(6).wrapping_add(a))
                .ok()
                .filter(|(h, _)| h.is_connected())
        })
    })
}

fn model() -> impl Strategy<Value = Model> {
    prop_oneof![Just(Model::EC), Just(Model::PO)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn lifts_are_simple_covers(m in model(), n in 1usize..5, k in 2u32..5, seed: u64) {
        let g = graph(m, n, k, seed);
        if let Some((h, map)) = connected_lift(&g, seed) {
            prop_assert!(h.is_simple());
            prop_assert!(verify_covering(&h, &g, &map).is_empty());
            prop_assert_eq!(h.max_degree(), g.max_degree());
            prop_assert!(find_covering(&h, &g).is_some());
        }
    }

    #[test]
    fn lifts_keep_factor_graph_and_loopiness(m in model(), n in 1usize..5, k in 2u32..5, seed: u64) {
        let g = graph(m, n, k, seed);
        if let Some((h, _)) = connected_lift(&g, seed) {
            let (fg, _) = factor_graph(&g).unwrap();
            let (fh, _) = factor_graph(&h).unwrap();
            prop_assert!(isomorphic(&fg, &fh));
            prop_assert_eq!(loopiness(&g).unwrap(), loopiness(&h).unwrap());
        }
    }

    #[test]
    fn factor_graph_covers_and_is_idempotent(m in model(), n in 1usize..7, k in 2u32..5, seed: u64) {
        let g = graph(m, n, k, seed);
        let (f, map) = factor_graph(&g).unwrap();
        prop_assert!(verify_covering(&g, &f, &map).is_empty());
        let (ff, _) = factor_graph(&f).unwrap();
        prop_assert!(isomorphic(&f, &ff));
    }

    #[test]
    fn views_lift(m in model(), n in 1usize..5, k in 2u32..5, seed: u64, r in 0usize..4) {
        let g = graph(m, n, k, seed);
        if let Some((h, map)) = connected_lift(&g, seed) {
            for (&v, &image) in &map.node_map {
                let up = canonical_code(&CoverView::new(&h, v, r).unwrap());
                let down = canonical_code(&CoverView::new(&g, image, r).unwrap());
                prop_assert_eq!(up, down);
            }
        }
    }

    #[test]
    fn outputs_lift(m in model(), n in 1usize..5, k in 2u32..5, seed: u64) {
        let g = graph(m, n, k, seed);
        let a = match m {
            Model::EC => greedy_by_color(k),
            _ => po_greedy(k),
        };
        if let Some((h, map)) = connected_lift(&g, seed) {
            for (&v, &image) in &map.node_map {
                prop_assert_eq!(evaluate_raw(&a, &h, v).unwrap(), evaluate_raw(&a, &g, image).unwrap());
            }
        }
    }

    #[test]
    fn unfolding_a_loop_gives_a_two_lift(n in 1usize..5, k in 2u32..5, seed: u64) {
        let g = RandomGraph::ec(n, k).min_loops(0).loop_chance(1.0).generate(seed);
        let e = g.edges().find(|e| e.is_loop()).map(|e| e.eid);
        if let Some(e) = e {
            let (gg, map) = unfold_loop(&g, e).unwrap();
            prop_assert_eq!(gg.node_count(), 2 * g.node_count());
            prop_assert!(verify_covering(&gg, &g, &map).is_empty());
            prop_assert!(gg.is_connected());
        }
    }
}
