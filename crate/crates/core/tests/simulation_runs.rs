use lbx_core::algo_zoo::{constant, id_greedy, parity};
use lbx_core::covers::random_simple_lift;
use lbx_core::gen::RandomGraph;
use lbx_core::simulations::{
    check_order_invariance, ramsey_search, saturation_indicator, sparse_subset,
    verify_order_invariant, CheckReport, IdentifierSubset,
};
use lbx_core::{GraphBuilder, Model};

#[test]
fn order_ignoring_greedy_is_invariant_on_loopy_graphs() {
    let ids = IdentifierSubset::range(1, 400);
    for seed in 0..4 {
        let f = RandomGraph::po(2, 2)
            .min_loops(0)
            .loop_chance(1.0)
            .generate(seed);
        let g = random_simple_lift(&f, 3, seed)
            .ok()
            .map(|(h, _)| h)
            .filter(|h| h.is_connected())
            .unwrap_or(f);
        let r = check_order_invariance(&id_greedy(2), &g, &ids, 2, seed).unwrap();
        assert!(r.iter().all(CheckReport::passed), "{r:?}");
    }
}

#[test]
fn isolated_nodes_are_never_saturated() {
    let isolated = GraphBuilder::new(Model::ID, 2)
        .labeled(0, 5)
        .labeled(1, 9)
        .labeled(2, 14)
        .build()
        .unwrap();
    let ind = saturation_indicator(&id_greedy(2)).unwrap();
    for v in isolated.node_ids() {
        assert!(!ind.evaluate(&isolated, v).unwrap());
    }
}

#[test]
fn ramsey_subsets_are_order_invariant() {
    let pattern = GraphBuilder::new(Model::ID, 1)
        .labeled(0, 1)
        .build()
        .unwrap();
    for universe in [6, 9, 12] {
        let u = IdentifierSubset::range(1, universe);
        for algo in [parity(), constant(false)] {
            if let Some(s) = ramsey_search(&algo, &pattern, &u, 3).unwrap() {
                assert_eq!(s.len(), 3);
                assert_eq!(
                    verify_order_invariant(&algo, &pattern, &s)
                        .unwrap()
                        .inconsistent,
                    0
                );
            }
        }
    }
}

#[test]
fn sparse_subsets_keep_gaps() {
    let s = sparse_subset(&IdentifierSubset::range(1, 30), 4);
    assert!(s.as_slice().windows(2).all(|w| w[1] - w[0] >= 4));
}
