use proptest::prelude::*;

use lbx_core::canon_order::{canonical_compare, order_of, order_view, path_value};
use lbx_core::gen::random_po_tree;
use lbx_core::locality::explicit::neighborhood;
use lbx_core::locality::{ExplicitView, NodeRef, View};
use lbx_core::CoverView;
use std::cmp::Ordering;

fn tree(n: usize, k: u32, seed: u64) -> ExplicitView {
    neighborhood(&random_po_tree(n, k, seed), 0, n).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn path_values_are_odd_and_antisymmetric(n in 2usize..80, k in 2u32..5, seed: u64, a: u32, b: u32) {
        let t = tree(n, k, seed);
        let (x, y) = (NodeRef(a % n as u32), NodeRef(b % n as u32));
        let xy = path_value(&t, x, y).unwrap();
        prop_assert_eq!(xy, -path_value(&t, y, x).unwrap());
        if x != y {
            prop_assert!(xy % 2 != 0);
        } else {
            prop_assert_eq!(xy, 0);
        }
    }

    #[test]
    fn order_is_transitive(n in 3usize..60, k in 2u32..4, seed: u64, a: u32, b: u32, c: u32) {
        let t = tree(n, k, seed);
        let m = n as u32;
        let (x, y, z) = (NodeRef(a % m), NodeRef(b % m), NodeRef(c % m));
        let less = |p, q| canonical_compare(&t, p, q).unwrap() == Ordering::Less;
        if less(x, y) && less(y, z) {
            prop_assert!(less(x, z));
        }
    }

    #[test]
    fn sorted_order_agrees_with_compare(n in 1usize..50, k in 2u32..4, seed: u64) {
        let t = order_view(&tree(n, k, seed)).unwrap();
        let order = order_of(&t);
        prop_assert_eq!(order.len(), n);
        for w in order.windows(2) {
            prop_assert_eq!(canonical_compare(&t, w[0], w[1]).unwrap(), Ordering::Less);
        }
    }

    #[test]
    fn order_ignores_the_root(n in 2usize..50, k in 2u32..4, seed: u64, r: u32) {
        let g = random_po_tree(n, k, seed);
        let listed = |root: u32| -> Vec<u64> {
            let t = order_view(&CoverView::new(&g, root, n).unwrap()).unwrap();
            order_of(&t).into_iter().map(|x| t.cover_key(x).unwrap()).collect()
        };
        prop_assert_eq!(listed(0), listed(r % n as u32));
    }
}
