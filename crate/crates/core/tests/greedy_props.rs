mod common;

use proptest::prelude::*;

use lbx_core::algo_zoo::{chain_ec_po, chain_ec_po_oi, greedy_by_color, po_greedy};
use lbx_core::fracmatch::check_maximal_fm;
use lbx_core::gen::{random_loopy_ec, RandomGraph};
use lbx_core::locality::assemble_fm;
use lbx_core::simulations::{double_graph, doubling_identity_violation};

use common::sequential_greedy;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn greedy_matches_sequential_oracle(n in 1usize..10, k in 2u32..6, extra in 0usize..12, seed: u64) {
        let g = RandomGraph::ec(n, k).extra_edges(extra).loop_chance(0.3).generate(seed);
        let y = assemble_fm(&greedy_by_color(k), &g).unwrap();
        prop_assert_eq!(&y, &sequential_greedy(&g));
        prop_assert!(check_maximal_fm(&g, &y).unwrap().is_maximal());
    }

    #[test]
    fn larger_palettes_change_nothing(n in 1usize..8, k in 2u32..5, seed: u64) {
        let g = RandomGraph::ec(n, k).extra_edges(n).loop_chance(0.3).generate(seed);
        let y = assemble_fm(&greedy_by_color(k), &g).unwrap();
        prop_assert_eq!(y, assemble_fm(&greedy_by_color(k + 2), &g).unwrap());
    }

    #[test]
    fn chains_agree_with_greedy(n in 1usize..6, k in 3u32..5, seed: u64) {
        let g = random_loopy_ec(n, k, seed);
        let y = assemble_fm(&greedy_by_color(k), &g).unwrap();
        prop_assert_eq!(&y, &assemble_fm(&chain_ec_po(k), &g).unwrap());
        prop_assert_eq!(&y, &assemble_fm(&chain_ec_po_oi(k), &g).unwrap());
    }

    #[test]
    fn doubled_graphs_satisfy_the_identity(n in 1usize..8, k in 2u32..5, seed: u64) {
        let g = RandomGraph::ec(n, k).extra_edges(n).loop_chance(0.4).generate(seed);
        let d = double_graph(&g).unwrap();
        let y_po = assemble_fm(&po_greedy(k), &d.graph).unwrap();
        prop_assert!(check_maximal_fm(&d.graph, &y_po).unwrap().is_maximal());
        let y_ec = assemble_fm(&chain_ec_po(k), &g).unwrap();
        prop_assert_eq!(doubling_identity_violation(&g, &d, &y_ec, &y_po), None);
    }
}
