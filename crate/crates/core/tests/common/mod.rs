//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, VecDeque};

use lbx_core::covers::verify_covering;
use lbx_core::weight::{one, zero};
use lbx_core::{
    Color, ColoredMultigraph, CoveringMap, FractionalMatching, GraphBuilder, Model, NodeId, Weight,
};

/// Global sequential greedy on an EC graph: color classes in increasing
/// order, each edge taking the smaller residual of its ends, a loop taking the
/// residual of its node.
pub fn sequential_greedy(g: &ColoredMultigraph) -> FractionalMatching {
    assert_eq!(g.model(), Model::EC);
    let mut load: BTreeMap<NodeId, Weight> = g.node_ids().map(|v| (v, zero())).collect();
    let mut y = BTreeMap::new();
    for c in 1..=g.k() {
        let class: Vec<_> = g.edges().filter(|e| e.color == c).cloned().collect();
        let mut updates = Vec::new();
        for e in &class {
            let ru = one() - &load[&e.u];
            let rv = one() - &load[&e.v];
            let w = if ru < rv { ru } else { rv };
            updates.push((e.clone(), w));
        }
        for (e, w) in updates {
            *load.get_mut(&e.u).unwrap() += &w;
            if !e.is_loop() {
                *load.get_mut(&e.v).unwrap() += &w;
            }
            y.insert(e.eid, w);
        }
    }
    FractionalMatching::new(y)
}

/// Searches for a covering map from `h` onto `m` by fixing the image of one
/// node and propagating along slots. Both graphs must be connected.
pub fn find_covering(h: &ColoredMultigraph, m: &ColoredMultigraph) -> Option<CoveringMap> {
    if h.model() != m.model() || h.node_count() < m.node_count() {
        return None;
    }
    let start = h.node_ids().next()?;
    for x in m.node_ids() {
        if let Some(map) = propagate(h, m, start, x) {
            debug_assert!(verify_covering(h, m, &map).is_empty());
            return Some(map);
        }
    }
    None
}

fn propagate(
    h: &ColoredMultigraph,
    m: &ColoredMultigraph,
    start: NodeId,
    image: NodeId,
) -> Option<CoveringMap> {
    let mut map = CoveringMap::default();
    map.node_map.insert(start, image);
    let mut queue = VecDeque::from([start]);
    while let Some(v) = queue.pop_front() {
        let x = map.node_map[&v];
        let here = h.incidences(v).ok()?;
        if here.len() != m.incidences(x).ok()?.len() {
            return None;
        }
        for inc in here {
            let target = m.incidence_at(x, inc.slot)?;
            match map.edge_map.insert(inc.eid, target.eid) {
                Some(prev) if prev != target.eid => return None,
                _ => {}
            }
            match map.node_map.get(&inc.neighbor) {
                Some(&w) if w != target.neighbor => return None,
                Some(_) => {}
                None => {
                    map.node_map.insert(inc.neighbor, target.neighbor);
                    queue.push_back(inc.neighbor);
                }
            }
        }
    }
    let covered: std::collections::BTreeSet<_> = map.node_map.values().collect();
    (map.node_map.len() == h.node_count() && covered.len() == m.node_count()).then_some(map)
}

/// Connected graphs with the same number of nodes, one covering the other.
pub fn isomorphic(a: &ColoredMultigraph, b: &ColoredMultigraph) -> bool {
    a.node_count() == b.node_count()
        && a.edge_count() == b.edge_count()
        && find_covering(a, b).is_some()
}

/// Every way to pick, for one color, a set of loops and disjoint pairs.
fn color_classes(n: usize) -> Vec<Vec<(NodeId, NodeId)>> {
    fn go(
        n: usize,
        i: usize,
        used: &mut Vec<bool>,
        cur: &mut Vec<(NodeId, NodeId)>,
        out: &mut Vec<Vec<(NodeId, NodeId)>>,
    ) {
        if i == n {
            out.push(cur.clone());
            return;
        }
        if used[i] {
            go(n, i + 1, used, cur, out);
            return;
        }
        go(n, i + 1, used, cur, out);
        cur.push((i as NodeId, i as NodeId));
        go(n, i + 1, used, cur, out);
        cur.pop();
        for j in i + 1..n {
            if !used[j] {
                used[j] = true;
                cur.push((i as NodeId, j as NodeId));
                go(n, i + 1, used, cur, out);
                cur.pop();
                used[j] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(n, 0, &mut vec![false; n], &mut Vec::new(), &mut out);
    out
}

/// All connected EC multigraphs on 1..=max_nodes nodes with palette exactly
/// `k`, including isomorphic copies.
pub fn small_ec_multigraphs(max_nodes: usize, k: Color) -> Vec<ColoredMultigraph> {
    let mut out = Vec::new();
    for n in 1..=max_nodes {
        let classes = color_classes(n);
        let mut pick = vec![0usize; k as usize];
        loop {
            let mut b = GraphBuilder::new(Model::EC, k).nodes(0..n as NodeId);
            for (ci, &p) in pick.iter().enumerate() {
                for &(u, v) in &classes[p] {
                    b = b.edge(u, v, ci as Color + 1);
                }
            }
            let g = b.build().expect("color classes are proper");
            if g.is_connected() {
                out.push(g);
            }
            let mut i = 0;
            while i < pick.len() {
                pick[i] += 1;
                if pick[i] < classes.len() {
                    break;
                }
                pick[i] = 0;
                i += 1;
            }
            if i == pick.len() {
                break;
            }
        }
    }
    out
}
