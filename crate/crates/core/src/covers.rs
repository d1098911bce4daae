//! Covering maps, universal-cover balls, factor graphs, loop unfolding and
//! random simple lifts.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{
    build_graph, ColoredMultigraph, EdgeId, EdgeRec, GraphError, GraphSpec, Model, NodeId,
    NodeSpec, ParseError, Slot, SlotDir,
};
use crate::locality::{NodeRef, View};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CoverError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("graph is not connected")]
    Disconnected,
    #[error("operation needs an EC or PO graph, got {0}")]
    NotAnonymous(Model),
    #[error("operation needs an EC graph, got {0}")]
    NotEc(Model),
    #[error("edge {0} is not a loop")]
    NotALoop(EdgeId),
    #[error("no simple lift with {copies} copies: {reason}")]
    InfeasibleLift { copies: usize, reason: String },
}

/// Witness that `source` is a lift of `target`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoveringMap {
    #[serde(rename = "nodes")]
    pub node_map: BTreeMap<NodeId, NodeId>,
    #[serde(rename = "edges")]
    pub edge_map: BTreeMap<EdgeId, EdgeId>,
}

impl CoveringMap {
    pub fn encode(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("maps serialize");
        s.push('\n');
        s
    }

    pub fn decode(text: &str) -> Result<CoveringMap, ParseError> {
        serde_json::from_str(text).map_err(ParseError::from)
    }

    /// Composition: first `self` (H → G), then `next` (G → F).
    pub fn then(&self, next: &CoveringMap) -> CoveringMap {
        CoveringMap {
            node_map: self
                .node_map
                .iter()
                .filter_map(|(&h, g)| next.node_map.get(g).map(|&f| (h, f)))
                .collect(),
            edge_map: self
                .edge_map
                .iter()
                .filter_map(|(&h, g)| next.edge_map.get(g).map(|&f| (h, f)))
                .collect(),
        }
    }

    pub fn preimages(&self, target: NodeId) -> Vec<NodeId> {
        self.node_map
            .iter()
            .filter(|(_, &t)| t == target)
            .map(|(&s, _)| s)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum CoverViolation {
    ModelMismatch {
        source: Model,
        target: Model,
    },
    UnmappedNode {
        node: NodeId,
    },
    UnmappedEdge {
        edge: EdgeId,
    },
    UnknownTargetNode {
        node: NodeId,
        image: NodeId,
    },
    UnknownTargetEdge {
        edge: EdgeId,
        image: EdgeId,
    },
    ColorMismatch {
        edge: EdgeId,
    },
    EndpointMismatch {
        edge: EdgeId,
    },
    NodeNotCovered {
        node: NodeId,
    },
    EdgeNotCovered {
        edge: EdgeId,
    },
    DegreeMismatch {
        node: NodeId,
        source_degree: usize,
        target_degree: usize,
    },
    NotLocallyBijective {
        node: NodeId,
    },
}

/// Lists every way in which `m` fails to be a covering map from `h` onto `g`.
pub fn verify_covering(
    h: &ColoredMultigraph,
    g: &ColoredMultigraph,
    m: &CoveringMap,
) -> Vec<CoverViolation> {
    let mut out = Vec::new();
    if h.model() != g.model() {
        out.push(CoverViolation::ModelMismatch {
            source: h.model(),
            target: g.model(),
        });
        return out;
    }
    let mut nodes_ok = true;
    for v in h.node_ids() {
        match m.node_map.get(&v) {
            None => {
                out.push(CoverViolation::UnmappedNode { node: v });
                nodes_ok = false;
            }
            Some(&img) if !g.contains_node(img) => {
                out.push(CoverViolation::UnknownTargetNode {
                    node: v,
                    image: img,
                });
                nodes_ok = false;
            }
            Some(_) => {}
        }
    }
    let mut edges_ok = true;
    for e in h.edges() {
        let Some(&img) = m.edge_map.get(&e.eid) else {
            out.push(CoverViolation::UnmappedEdge { edge: e.eid });
            edges_ok = false;
            continue;
        };
        let Some(t) = g.edge(img) else {
            out.push(CoverViolation::UnknownTargetEdge {
                edge: e.eid,
                image: img,
            });
            edges_ok = false;
            continue;
        };
        if t.color != e.color {
            out.push(CoverViolation::ColorMismatch { edge: e.eid });
        }
        if nodes_ok {
            let (a, b) = (m.node_map[&e.u], m.node_map[&e.v]);
            let fits = if e.directed {
                (a, b) == (t.u, t.v)
            } else {
                (a, b) == (t.u, t.v) || (a, b) == (t.v, t.u)
            };
            if !fits {
                out.push(CoverViolation::EndpointMismatch { edge: e.eid });
            }
        }
    }
    if !nodes_ok || !edges_ok {
        return out;
    }
    let hit_nodes: BTreeSet<NodeId> = m.node_map.values().copied().collect();
    for v in g.node_ids() {
        if !hit_nodes.contains(&v) {
            out.push(CoverViolation::NodeNotCovered { node: v });
        }
    }
    let hit_edges: BTreeSet<EdgeId> = m.edge_map.values().copied().collect();
    for e in g.edge_ids() {
        if !hit_edges.contains(&e) {
            out.push(CoverViolation::EdgeNotCovered { edge: e });
        }
    }
    for v in h.node_ids() {
        let img = m.node_map[&v];
        let (dh, dg) = (h.degree(v).unwrap(), g.degree(img).unwrap());
        if dh != dg {
            out.push(CoverViolation::DegreeMismatch {
                node: v,
                source_degree: dh,
                target_degree: dg,
            });
            continue;
        }
        let mut mapped: Vec<(EdgeId, Slot)> = h
            .incidences(v)
            .unwrap()
            .iter()
            .map(|i| (m.edge_map[&i.eid], i.slot))
            .collect();
        let mut target: Vec<(EdgeId, Slot)> = g
            .incidences(img)
            .unwrap()
            .iter()
            .map(|i| (i.eid, i.slot))
            .collect();
        mapped.sort();
        target.sort();
        if mapped != target {
            out.push(CoverViolation::NotLocallyBijective { node: v });
        }
    }
    out
}

#[derive(Debug, Clone)]
struct CoverNode {
    base: NodeId,
    parent: Option<u32>,
    arrival: Option<Slot>,
    depth: usize,
    children: Vec<(Slot, u32)>,
}

/// A lazily expanded ball of the universal cover. Nodes are non-backtracking
/// walks from the root, named by the slots they take.
#[derive(Debug)]
pub struct CoverView<'g> {
    graph: &'g ColoredMultigraph,
    radius: usize,
    arena: RefCell<Vec<CoverNode>>,
}

impl<'g> CoverView<'g> {
    /// No connectivity check; only the component of `v` matters.
    pub fn new(
        graph: &'g ColoredMultigraph,
        v: NodeId,
        radius: usize,
    ) -> Result<CoverView<'g>, GraphError> {
        graph.incidences(v)?;
        Ok(CoverView {
            graph,
            radius,
            arena: RefCell::new(vec![CoverNode {
                base: v,
                parent: None,
                arrival: None,
                depth: 0,
                children: Vec::new(),
            }]),
        })
    }

    /// The graph node a view node projects to.
    pub fn base(&self, n: NodeRef) -> NodeId {
        self.arena.borrow()[n.0 as usize].base
    }

    pub fn graph(&self) -> &'g ColoredMultigraph {
        self.graph
    }
}

impl View for CoverView<'_> {
    fn model(&self) -> Model {
        self.graph.model()
    }

    fn radius(&self) -> usize {
        self.radius
    }

    fn depth(&self, n: NodeRef) -> usize {
        self.arena.borrow()[n.0 as usize].depth
    }

    fn slots(&self, n: NodeRef) -> Vec<Slot> {
        let arena = self.arena.borrow();
        let node = &arena[n.0 as usize];
        if node.depth < self.radius {
            self.graph
                .incidences(node.base)
                .expect("base node exists")
                .iter()
                .map(|i| i.slot)
                .collect()
        } else {
            node.arrival.into_iter().collect()
        }
    }

    fn follow(&self, n: NodeRef, s: Slot) -> Option<NodeRef> {
        let mut arena = self.arena.borrow_mut();
        let node = &arena[n.0 as usize];
        if node.arrival == Some(s) {
            return node.parent.map(NodeRef);
        }
        if node.depth >= self.radius {
            return None;
        }
        if let Some(&(_, c)) = node.children.iter().find(|(t, _)| *t == s) {
            return Some(NodeRef(c));
        }
        let inc = self.graph.incidence_at(node.base, s)?;
        let child = CoverNode {
            base: inc.neighbor,
            parent: Some(n.0),
            arrival: Some(s.reverse()),
            depth: node.depth + 1,
            children: Vec::new(),
        };
        let id = arena.len() as u32;
        arena.push(child);
        arena[n.0 as usize].children.push((s, id));
        Some(NodeRef(id))
    }

    fn is_tree(&self) -> bool {
        true
    }

    fn cover_key(&self, n: NodeRef) -> Option<u64> {
        Some(self.base(n) as u64)
    }
}

/// The radius-`r` ball of the universal cover of a connected EC or PO graph.
pub fn universal_cover_ball(
    g: &ColoredMultigraph,
    v: NodeId,
    r: usize,
) -> Result<CoverView<'_>, CoverError> {
    if !g.model().is_anonymous() {
        return Err(CoverError::NotAnonymous(g.model()));
    }
    g.incidences(v)?;
    if !g.is_connected() {
        return Err(CoverError::Disconnected);
    }
    Ok(CoverView::new(g, v, r)?)
}

/// The radius-`r` cover ball as a tree graph on nodes 0.., in the view's BFS
/// order, together with the base node of each tree node.
pub fn cover_ball_graph(
    g: &ColoredMultigraph,
    v: NodeId,
    r: usize,
) -> Result<(ColoredMultigraph, BTreeMap<NodeId, NodeId>), CoverError> {
    let ball = universal_cover_ball(g, v, r)?;
    let tree = crate::locality::materialize(&ball);
    let mut edges = Vec::new();
    for n in tree.nodes().skip(1) {
        let (s, p) = tree.parent(n).expect("non-root node has a parent");
        let (u, w) = match s.dir {
            SlotDir::In => (p.0, n.0),
            _ => (n.0, p.0),
        };
        edges.push(EdgeRec {
            eid: edges.len() as EdgeId,
            u,
            v: w,
            color: s.color,
            directed: s.dir.is_directed(),
        });
    }
    let graph = build_graph(GraphSpec {
        model: g.model(),
        k: g.k(),
        nodes: tree
            .nodes()
            .map(|n| NodeSpec {
                id: n.0,
                label: None,
            })
            .collect(),
        order: None,
        edges,
    })
    .map_err(GraphError::Invalid)?;
    let base = tree
        .nodes()
        .map(|n| {
            (
                n.0,
                tree.cover_key(n).expect("cover views carry keys") as NodeId,
            )
        })
        .collect();
    Ok((graph, base))
}

type Signature = (u32, Vec<(Slot, u32)>);

/// Coarsest partition that is stable under (slot, neighbor class) signatures.
/// Classes are numbered by their least member.
pub fn refine_partition(g: &ColoredMultigraph) -> BTreeMap<NodeId, u32> {
    let mut class: BTreeMap<NodeId, u32> = g.node_ids().map(|v| (v, 0)).collect();
    let mut count = 1;
    loop {
        let mut sigs: BTreeMap<NodeId, Signature> = BTreeMap::new();
        for v in g.node_ids() {
            let sig = g
                .incidences(v)
                .unwrap()
                .iter()
                .map(|i| (i.slot, class[&i.neighbor]))
                .collect();
            sigs.insert(v, (class[&v], sig));
        }
        let mut ids: BTreeMap<&Signature, u32> = BTreeMap::new();
        let mut next: BTreeMap<NodeId, u32> = BTreeMap::new();
        for (v, sig) in &sigs {
            let n = ids.len() as u32;
            let id = *ids.entry(sig).or_insert(n);
            next.insert(*v, id);
        }
        let new_count = ids.len();
        class = next;
        if new_count == count {
            return class;
        }
        count = new_count;
    }
}

/// The smallest graph `g` lifts to, with the quotient map.
pub fn factor_graph(g: &ColoredMultigraph) -> Result<(ColoredMultigraph, CoveringMap), CoverError> {
    if !g.model().is_anonymous() {
        return Err(CoverError::NotAnonymous(g.model()));
    }
    if !g.is_connected() {
        return Err(CoverError::Disconnected);
    }
    let class = refine_partition(g);
    let mut reps: BTreeMap<u32, NodeId> = BTreeMap::new();
    for (&v, &c) in &class {
        reps.entry(c).or_insert(v);
    }
    let directed = g.model() == Model::PO;
    let mut edges = Vec::new();
    // (class, slot at that class) -> quotient edge
    let mut by_slot: BTreeMap<(u32, Slot), EdgeId> = BTreeMap::new();
    for (&x, &rep) in &reps {
        for inc in g.incidences(rep).unwrap() {
            let y = class[&inc.neighbor];
            let emit = match inc.slot.dir {
                SlotDir::Out => true,
                SlotDir::In => false,
                _ => x <= y,
            };
            if !emit {
                continue;
            }
            let eid = edges.len() as EdgeId;
            edges.push(EdgeRec {
                eid,
                u: x,
                v: y,
                color: inc.slot.color,
                directed,
            });
            by_slot.insert((x, inc.slot), eid);
            by_slot.insert((y, inc.slot.reverse()), eid);
        }
    }
    let f = build_graph(GraphSpec {
        model: g.model(),
        k: g.k(),
        nodes: reps
            .keys()
            .map(|&c| NodeSpec { id: c, label: None })
            .collect(),
        order: None,
        edges,
    })
    .map_err(GraphError::Invalid)?;
    let mut edge_map = BTreeMap::new();
    for e in g.edges() {
        let slot = if e.directed {
            Slot::out(e.color)
        } else {
            Slot::undirected(e.color)
        };
        edge_map.insert(e.eid, by_slot[&(class[&e.u], slot)]);
    }
    Ok((
        f,
        CoveringMap {
            node_map: class,
            edge_map,
        },
    ))
}

/// Least number of loops over the nodes of the factor graph.
pub fn loopiness(g: &ColoredMultigraph) -> Result<usize, CoverError> {
    let (f, _) = factor_graph(g)?;
    Ok(f.node_ids()
        .map(|v| f.loops_at(v).unwrap().len())
        .min()
        .unwrap_or(0))
}

/// Two disjoint copies of G − e joined by a new edge of e's color between the
/// two copies of e's node. The first copy keeps G's ids; the new edge keeps
/// e's eid.
pub fn unfold_loop(
    g: &ColoredMultigraph,
    e: EdgeId,
) -> Result<(ColoredMultigraph, CoveringMap), CoverError> {
    if g.model() != Model::EC {
        return Err(CoverError::NotEc(g.model()));
    }
    let rec = g.edge(e).ok_or(GraphError::UnknownEdge(e))?.clone();
    if !rec.is_loop() {
        return Err(CoverError::NotALoop(e));
    }
    let off = g.max_node_id().map_or(0, |m| m + 1);
    let eoff = g.max_eid().map_or(0, |m| m + 1);
    let mut nodes = Vec::new();
    let mut node_map = BTreeMap::new();
    for v in g.node_ids() {
        nodes.push(NodeSpec { id: v, label: None });
        node_map.insert(v, v);
    }
    for v in g.node_ids() {
        nodes.push(NodeSpec {
            id: v + off,
            label: None,
        });
        node_map.insert(v + off, v);
    }
    let mut edges = Vec::new();
    let mut edge_map = BTreeMap::new();
    for x in g.edges().filter(|x| x.eid != e) {
        edges.push(x.clone());
        edge_map.insert(x.eid, x.eid);
        edges.push(EdgeRec {
            eid: x.eid + eoff,
            u: x.u + off,
            v: x.v + off,
            ..x.clone()
        });
        edge_map.insert(x.eid + eoff, x.eid);
    }
    edges.push(EdgeRec {
        eid: e,
        u: rec.u,
        v: rec.u + off,
        color: rec.color,
        directed: false,
    });
    edge_map.insert(e, e);
    let gg = build_graph(GraphSpec {
        model: Model::EC,
        k: g.k(),
        nodes,
        order: None,
        edges,
    })
    .map_err(GraphError::Invalid)?;
    Ok((gg, CoveringMap { node_map, edge_map }))
}

/// Perfect matchings of the round-robin 1-factorization of K_n, n even.
fn round_robin(n: usize) -> Vec<Vec<(usize, usize)>> {
    let m = n - 1;
    (0..m)
        .map(|r| {
            let mut pairs = vec![(r, m)];
            for k in 1..n / 2 {
                pairs.push(((r + k) % m, (r + m - k) % m));
            }
            pairs
        })
        .collect()
}

/// A simple lift with `copies` preimages per node, built from per-edge cyclic
/// shifts, per-loop perfect matchings (EC) or shifts (PO), and a random
/// relabeling of each fiber. Deterministic in `seed`.
pub fn random_simple_lift(
    g: &ColoredMultigraph,
    copies: usize,
    seed: u64,
) -> Result<(ColoredMultigraph, CoveringMap), CoverError> {
    if !g.model().is_anonymous() {
        return Err(CoverError::NotAnonymous(g.model()));
    }
    let n = copies;
    let infeasible = |reason: String| CoverError::InfeasibleLift { copies, reason };
    if n == 0 {
        return Err(infeasible("zero copies".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let index: BTreeMap<NodeId, usize> = g.node_ids().enumerate().map(|(i, v)| (v, i)).collect();

    let mut pair_edges: BTreeMap<(NodeId, NodeId), Vec<&EdgeRec>> = BTreeMap::new();
    let mut loops: BTreeMap<NodeId, Vec<&EdgeRec>> = BTreeMap::new();
    for e in g.edges() {
        if e.is_loop() {
            loops.entry(e.u).or_default().push(e);
        } else {
            pair_edges
                .entry((e.u.min(e.v), e.u.max(e.v)))
                .or_default()
                .push(e);
        }
    }

    // Copy i of node a is joined to copy i + shift of node b.
    let mut shift: BTreeMap<EdgeId, usize> = BTreeMap::new();
    for ((a, b), list) in &pair_edges {
        if list.len() > n {
            return Err(infeasible(format!(
                "{} parallel edges between {a} and {b}",
                list.len()
            )));
        }
        let mut pool: Vec<usize> = (0..n).collect();
        pool.shuffle(&mut rng);
        for (e, s) in list.iter().zip(pool) {
            shift.insert(e.eid, s);
        }
    }
    let directed = g.model() == Model::PO;
    let mut loop_pairs: BTreeMap<EdgeId, Vec<(usize, usize)>> = BTreeMap::new();
    for (v, list) in &loops {
        let l = list.len();
        if directed {
            let avail = (n - 1) / 2;
            if l > avail {
                return Err(infeasible(format!("{l} directed loops at node {v}")));
            }
            let mut pool: Vec<usize> = (1..=avail).collect();
            pool.shuffle(&mut rng);
            for (e, s) in list.iter().zip(pool) {
                loop_pairs.insert(e.eid, (0..n).map(|i| (i, (i + s) % n)).collect());
            }
        } else {
            if n % 2 == 1 || l > n - 1 {
                return Err(infeasible(format!("{l} loops at node {v}")));
            }
            let mut rounds = round_robin(n);
            rounds.shuffle(&mut rng);
            for (e, r) in list.iter().zip(rounds) {
                loop_pairs.insert(e.eid, r);
            }
        }
    }

    let mut relabel: BTreeMap<NodeId, Vec<usize>> = BTreeMap::new();
    for v in g.node_ids() {
        let mut p: Vec<usize> = (0..n).collect();
        p.shuffle(&mut rng);
        relabel.insert(v, p);
    }
    let id = |v: NodeId, i: usize| (index[&v] * n + relabel[&v][i]) as NodeId;

    let mut nodes = Vec::new();
    let mut node_map = BTreeMap::new();
    for v in g.node_ids() {
        for i in 0..n {
            let h = (index[&v] * n + i) as NodeId;
            nodes.push(NodeSpec { id: h, label: None });
            node_map.insert(h, v);
        }
    }
    let mut edges = Vec::new();
    let mut edge_map = BTreeMap::new();
    let mut push = |u: NodeId, v: NodeId, e: &EdgeRec| {
        let eid = edges.len() as EdgeId;
        edges.push(EdgeRec {
            eid,
            u,
            v,
            color: e.color,
            directed: e.directed,
        });
        edge_map.insert(eid, e.eid);
    };
    for e in g.edges() {
        if e.is_loop() {
            for &(i, j) in &loop_pairs[&e.eid] {
                push(id(e.u, i), id(e.u, j), e);
            }
        } else {
            let s = shift[&e.eid];
            let (a, b) = (e.u.min(e.v), e.u.max(e.v));
            for i in 0..n {
                let (x, y) = (id(a, i), id(b, (i + s) % n));
                if e.u == a {
                    push(x, y, e);
                } else {
                    push(y, x, e);
                }
            }
        }
    }
    let h = build_graph(GraphSpec {
        model: g.model(),
        k: g.k(),
        nodes,
        order: None,
        edges,
    })
    .map_err(GraphError::Invalid)?;
    debug_assert!(h.is_simple());
    Ok((h, CoveringMap { node_map, edge_map }))
}

/// The simple lift with the fewest copies (at least two) that exists.
pub fn minimal_simple_lift(
    g: &ColoredMultigraph,
    seed: u64,
) -> Result<(ColoredMultigraph, CoveringMap), CoverError> {
    let cap = 2 * g.max_degree() + g.edge_count() + 4;
    let mut last = None;
    for copies in 2..=cap {
        match random_simple_lift(g, copies, seed) {
            Ok(r) => return Ok(r),
            Err(e @ CoverError::InfeasibleLift { .. }) => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last.expect("at least one attempt"))
}
