use std::collections::BTreeMap;

use proptest::prelude::*;

use lbx_core::fracmatch::{check_maximal_fm, node_weight, validate_fm, ViolationKind};
use lbx_core::gen::RandomGraph;
use lbx_core::weight::{one, ratio};
use lbx_core::{decode_graph, encode_graph, FractionalMatching, Model, Weight};

fn weights(g: &lbx_core::ColoredMultigraph, picks: &[u8]) -> FractionalMatching {
    FractionalMatching::new(
        g.edge_ids()
            .zip(picks.iter().cycle())
            .map(|(e, &p)| (e, ratio((p % 5) as i64, 4)))
            .filter(|(_, w)| *w <= one())
            .collect::<BTreeMap<_, _>>(),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn maximality_matches_definition(
        po: bool, n in 1usize..7, k in 2u32..4, seed: u64,
        picks in proptest::collection::vec(0u8..5, 1..8),
    ) {
        let shape = if po { RandomGraph::po(n, k) } else { RandomGraph::ec(n, k) };
        let g = shape.extra_edges(n).loop_chance(0.4).generate(seed);
        let y = weights(&g, &picks);
        if validate_fm(&g, &y).is_err() {
            return Ok(());
        }
        let load: BTreeMap<_, Weight> = g.node_ids().map(|v| (v, node_weight(&g, &y, v).unwrap())).collect();
        let feasible = load.values().all(|w| *w <= one());
        let report = check_maximal_fm(&g, &y).unwrap();
        prop_assert_eq!(report.feasible, feasible);
        let saturated: Vec<_> = load.iter().filter(|(_, w)| **w == one()).map(|(v, _)| *v).collect();
        prop_assert_eq!(report.saturated.iter().copied().collect::<Vec<_>>(), saturated);
        let unsaturated_edges = g
            .edges()
            .filter(|e| load[&e.u] != one() && load[&e.v] != one())
            .count();
        let reported = report
            .violations
            .iter()
            .filter(|v| v.kind == ViolationKind::UnsaturatedEdge)
            .count();
        prop_assert_eq!(reported, unsaturated_edges);
        prop_assert_eq!(report.is_maximal(), feasible && unsaturated_edges == 0);
    }

    #[test]
    fn graph_documents_round_trip(po: bool, n in 1usize..9, k in 1u32..4, seed: u64) {
        let k = if n > 1 { k.max(2) } else { k };
        let shape = if po { RandomGraph::po(n, k) } else { RandomGraph::ec(n, k) };
        let g = shape.extra_edges(n).loop_chance(0.4).generate(seed);
        let text = encode_graph(&g);
        let back = decode_graph(&text).unwrap();
        prop_assert_eq!(&back, &g);
        prop_assert_eq!(encode_graph(&back), text);
        prop_assert_eq!(back.model(), if po { Model::PO } else { Model::EC });
    }
}
