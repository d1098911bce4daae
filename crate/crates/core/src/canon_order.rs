//! The canonical linear order on directed, edge-colored trees.
//!
//! Along the path from x to y, every edge contributes +1 if it is traversed
//! from tail to head and −1 otherwise, and every interior node contributes +1
//! if the edge the path arrives on precedes the edge it leaves on in the
//! node's local order (outgoing edges by color, then incoming edges by color)
//! and −1 otherwise. x precedes y iff the sum is positive.

use std::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::covers::CoverView;
use crate::graph::{GraphBuilder, Model, Slot, SlotDir};
use crate::locality::{canonical_code, materialize, ExplicitView, NodeRef, View};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OrderError {
    #[error("view is not tree-shaped")]
    NotATree,
    #[error("view has no node {0}")]
    UnknownNode(u32),
    #[error("ordering needs a PO view, got {0}")]
    WrongModel(Model),
}

/// Position of a slot in a node's local order of incident edges.
fn local_key(s: Slot) -> (u8, u32) {
    let dir = match s.dir {
        SlotDir::Out => 0,
        SlotDir::In => 1,
        SlotDir::Undirected => 2,
        SlotDir::Loop => 3,
    };
    (dir, s.color)
}

fn check_node(tree: &ExplicitView, x: NodeRef) -> Result<(), OrderError> {
    if (x.0 as usize) < tree.node_count() {
        Ok(())
    } else {
        Err(OrderError::UnknownNode(x.0))
    }
}

/// Nodes of the path from x to y, endpoints included.
fn tree_path(tree: &ExplicitView, x: NodeRef, y: NodeRef) -> Vec<NodeRef> {
    let (mut a, mut b) = (x, y);
    let mut head = vec![a];
    let mut tail = vec![b];
    while tree.depth(a) > tree.depth(b) {
        a = tree.parent(a).expect("non-root has a parent").1;
        head.push(a);
    }
    while tree.depth(b) > tree.depth(a) {
        b = tree.parent(b).expect("non-root has a parent").1;
        tail.push(b);
    }
    while a != b {
        a = tree.parent(a).expect("non-root has a parent").1;
        b = tree.parent(b).expect("non-root has a parent").1;
        head.push(a);
        tail.push(b);
    }
    tail.pop();
    head.extend(tail.into_iter().rev());
    head
}

fn slot_towards(tree: &ExplicitView, from: NodeRef, to: NodeRef) -> Slot {
    tree.adjacency(from)
        .iter()
        .find(|&&(_, n)| n == to.0)
        .map(|&(s, _)| s)
        .expect("consecutive path nodes are adjacent")
}

/// ⟦x⇝y⟧ in a tree-shaped view. Odd whenever x ≠ y; zero when x = y.
pub fn path_value(tree: &ExplicitView, x: NodeRef, y: NodeRef) -> Result<i64, OrderError> {
    if !tree.is_tree() {
        return Err(OrderError::NotATree);
    }
    check_node(tree, x)?;
    check_node(tree, y)?;
    let path = tree_path(tree, x, y);
    let mut value = 0i64;
    for i in 0..path.len().saturating_sub(1) {
        let forward = slot_towards(tree, path[i], path[i + 1]);
        value += if forward.dir == SlotDir::In { -1 } else { 1 };
        if i > 0 {
            let back = slot_towards(tree, path[i], path[i - 1]);
            value += if local_key(back) < local_key(forward) {
                1
            } else {
                -1
            };
        }
    }
    Ok(value)
}

/// `Less` iff x precedes y.
pub fn canonical_compare(
    tree: &ExplicitView,
    x: NodeRef,
    y: NodeRef,
) -> Result<Ordering, OrderError> {
    let v = path_value(tree, x, y)?;
    Ok(0.cmp(&v))
}

/// Copies a tree-shaped PO view and decorates it with the canonical order as
/// ranks. The result is an OI view.
pub fn order_view(view: &dyn View) -> Result<ExplicitView, OrderError> {
    if view.model() != Model::PO {
        return Err(OrderError::WrongModel(view.model()));
    }
    let tree = materialize(view);
    if !tree.is_tree() {
        return Err(OrderError::NotATree);
    }
    Ok(rank_tree(tree).with_model(Model::OI))
}

fn rank_tree(tree: ExplicitView) -> ExplicitView {
    let mut nodes: Vec<NodeRef> = tree.nodes().collect();
    nodes.sort_by(|&a, &b| canonical_compare(&tree, a, b).expect("tree view"));
    let mut ranks = vec![0u32; nodes.len()];
    for (pos, n) in nodes.iter().enumerate() {
        ranks[n.0 as usize] = pos as u32;
    }
    tree.with_ranks(ranks)
}

/// Nodes of a ranked view listed in increasing rank.
pub fn order_of(view: &ExplicitView) -> Vec<NodeRef> {
    let mut nodes: Vec<NodeRef> = view.nodes().collect();
    if let Some(r) = view.ranks() {
        nodes.sort_by_key(|n| r[n.0 as usize]);
    }
    nodes
}

/// The ball of the given radius around a node of the regular d-colored
/// directed tree, in which every node has one outgoing and one incoming edge
/// of each color.
pub fn regular_tree_ball(d: u32, radius: usize) -> ExplicitView {
    let mut b = GraphBuilder::new(Model::PO, d).node(0);
    for c in 1..=d {
        b = b.arc(0, 0, c);
    }
    let g = b.build().expect("bouquet of directed loops is valid");
    let view = CoverView::new(&g, 0, radius).expect("node 0 exists");
    materialize(&view)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HomogeneityReport {
    pub d: u32,
    pub radius: usize,
    pub trials: usize,
    pub checked: usize,
    /// Two roots whose ordered balls differ, as local node numbers.
    pub violation: Option<(u32, u32)>,
}

impl HomogeneityReport {
    pub fn passed(&self) -> bool {
        self.violation.is_none()
    }
}

/// Compares the order-decorated radius-r balls around sampled pairs of nodes
/// of the regular tree. Roots are drawn within distance 2 of the center of a
/// radius-(r+2) ball; the first pair always involves the center. With
/// `tamper`, the ranks of the center's two color-1 neighbors are swapped
/// first, which should be detected.
pub fn check_homogeneity(
    d: u32,
    r: usize,
    trials: usize,
    seed: u64,
    tamper: bool,
) -> HomogeneityReport {
    assert!(d >= 1, "need at least one color");
    let mut tree = rank_tree(regular_tree_ball(d, r + 2));
    if tamper {
        let center = tree.root();
        let a = tree.follow(center, Slot::out(1)).expect("full ball");
        let b = tree.follow(center, Slot::inc(1)).expect("full ball");
        let mut ranks = tree.ranks().expect("ranked").to_vec();
        ranks.swap(a.0 as usize, b.0 as usize);
        tree = tree.with_ranks(ranks);
    }
    let inner: Vec<NodeRef> = tree.nodes().filter(|&n| tree.depth(n) <= 2).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = HomogeneityReport {
        d,
        radius: r,
        trials,
        checked: 0,
        violation: None,
    };
    for trial in 0..trials {
        let a = if trial == 0 {
            tree.root()
        } else {
            inner[rng.random_range(0..inner.len())]
        };
        let b = inner[rng.random_range(0..inner.len())];
        let ca = canonical_code(&tree.subview(a, r));
        let cb = canonical_code(&tree.subview(b, r));
        report.checked += 1;
        if ca != cb {
            report.violation = Some((a.0, b.0));
            break;
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::ColoredMultigraph;
    use crate::locality::neighborhood;

    fn tree_of(g: &ColoredMultigraph) -> ExplicitView {
        neighborhood(g, 0, g.node_count()).unwrap()
    }

    /// Local number of graph node `v` in a view rooted at node 0 of a tree.
    fn local(view: &ExplicitView, g: &ColoredMultigraph, v: u32) -> NodeRef {
        let dist = g.distances(0).unwrap();
        // BFS numbering explores slots in order; recover it by walking paths.
        let mut at = view.root();
        let mut path = vec![v];
        let mut x = v;
        while x != 0 {
            let inc = g
                .incidences(x)
                .unwrap()
                .iter()
                .find(|i| dist[&i.neighbor] + 1 == dist[&x])
                .unwrap();
            x = inc.neighbor;
            path.push(x);
        }
        path.reverse();
        for w in path.windows(2) {
            let slot = g
                .incidences(w[0])
                .unwrap()
                .iter()
                .find(|i| i.neighbor == w[1])
                .unwrap()
                .slot;
            at = view.follow(at, slot).unwrap();
        }
        at
    }

    #[test]
    fn single_edge() {
        let g = GraphBuilder::new(Model::PO, 1)
            .nodes([0, 1])
            .arc(0, 1, 1)
            .build()
            .unwrap();
        let t = tree_of(&g);
        let (x, y) = (local(&t, &g, 0), local(&t, &g, 1));
        assert_eq!(path_value(&t, x, y), Ok(1));
        assert_eq!(path_value(&t, y, x), Ok(-1));
        assert_eq!(path_value(&t, x, x), Ok(0));
        assert_eq!(canonical_compare(&t, x, x), Ok(Ordering::Equal));
        let o = order_view(&t).unwrap();
        assert_eq!(o.model(), Model::OI);
        assert_eq!(order_of(&o), vec![x, y]);
    }

    #[test]
    fn two_heads_meeting() {
        // u -1-> w <-2- v
        let g = GraphBuilder::new(Model::PO, 2)
            .nodes(0..3)
            .arc(0, 1, 1)
            .arc(2, 1, 2)
            .build()
            .unwrap();
        let t = tree_of(&g);
        let (u, v) = (local(&t, &g, 0), local(&t, &g, 2));
        assert_eq!(path_value(&t, u, v), Ok(1));
        assert_eq!(path_value(&t, v, u), Ok(-1));
        assert_eq!(canonical_compare(&t, u, v), Ok(Ordering::Less));
    }

    #[test]
    fn out_star_orders_by_color() {
        let g = GraphBuilder::new(Model::PO, 2)
            .nodes(0..3)
            .arc(0, 1, 1)
            .arc(0, 2, 2)
            .build()
            .unwrap();
        let t = tree_of(&g);
        let (a, b) = (local(&t, &g, 1), local(&t, &g, 2));
        assert_eq!(path_value(&t, a, b), Ok(1));
        // Re-rooting at a leaf gives the same relative order.
        let t2 = neighborhood(&g, 1, 3).unwrap();
        let a2 = t2.root();
        let r2 = t2.follow(a2, Slot::inc(1)).unwrap();
        let b2 = t2.follow(r2, Slot::out(2)).unwrap();
        assert_eq!(path_value(&t2, a2, b2), Ok(1));
    }

    #[test]
    fn single_node_view() {
        let g = GraphBuilder::new(Model::PO, 1).node(0).build().unwrap();
        let o = order_view(&tree_of(&g)).unwrap();
        assert_eq!(o.ranks(), Some(&[0u32][..]));
    }

    #[test]
    fn non_trees_are_rejected() {
        let g = GraphBuilder::new(Model::PO, 2)
            .nodes(0..3)
            .arc(0, 1, 1)
            .arc(1, 2, 1)
            .arc(2, 0, 2)
            .build()
            .unwrap();
        let t = tree_of(&g);
        assert_eq!(order_view(&t), Err(OrderError::NotATree));
        assert_eq!(
            path_value(&t, NodeRef(0), NodeRef(1)),
            Err(OrderError::NotATree)
        );
    }

    #[test]
    fn homogeneity() {
        assert!(check_homogeneity(1, 1, 5, 0, false).passed());
        assert!(check_homogeneity(2, 2, 20, 0, false).passed());
        assert!(!check_homogeneity(2, 2, 20, 0, true).passed());
        assert_eq!(
            check_homogeneity(2, 1, 10, 3, false),
            check_homogeneity(2, 1, 10, 3, false)
        );
    }
}
