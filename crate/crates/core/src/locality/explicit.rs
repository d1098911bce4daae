//! Finite, fully materialized views.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, HashMap, VecDeque};

use crate::graph::{ColoredMultigraph, GraphError, Model, NodeId, Slot};

use super::{NodeRef, View};

/// A finite ball stored as an adjacency list over local node numbers, root 0.
/// Only visible edge ends are stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExplicitView {
    model: Model,
    radius: usize,
    depth: Vec<usize>,
    adj: Vec<Vec<(Slot, u32)>>,
    labels: Option<Vec<u64>>,
    ranks: Option<Vec<u32>>,
    keys: Option<Vec<u64>>,
    tree: bool,
}

impl ExplicitView {
    fn assemble(
        model: Model,
        radius: usize,
        depth: Vec<usize>,
        mut adj: Vec<Vec<(Slot, u32)>>,
    ) -> ExplicitView {
        for list in adj.iter_mut() {
            list.sort();
        }
        let ends: usize = adj.iter().map(|l| l.len()).sum();
        let has_self = adj
            .iter()
            .enumerate()
            .any(|(i, l)| l.iter().any(|&(_, n)| n as usize == i));
        let tree = !has_self && ends + 2 == 2 * depth.len();
        ExplicitView {
            model,
            radius,
            depth,
            adj,
            labels: None,
            ranks: None,
            keys: None,
            tree,
        }
    }

    pub fn node_count(&self) -> usize {
        self.depth.len()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeRef> {
        (0..self.depth.len() as u32).map(NodeRef)
    }

    pub fn adjacency(&self, n: NodeRef) -> &[(Slot, u32)] {
        &self.adj[n.0 as usize]
    }

    /// The neighbor one step closer to the root, with the slot leading to it.
    pub fn parent(&self, n: NodeRef) -> Option<(Slot, NodeRef)> {
        let d = self.depth[n.0 as usize];
        if d == 0 {
            return None;
        }
        self.adj[n.0 as usize]
            .iter()
            .find(|&&(_, m)| self.depth[m as usize] + 1 == d)
            .map(|&(s, m)| (s, NodeRef(m)))
    }

    pub fn with_model(mut self, model: Model) -> ExplicitView {
        self.model = model;
        self
    }

    pub fn with_labels(mut self, labels: Vec<u64>) -> ExplicitView {
        assert_eq!(labels.len(), self.node_count());
        self.labels = Some(labels);
        self
    }

    pub fn with_ranks(mut self, ranks: Vec<u32>) -> ExplicitView {
        assert_eq!(ranks.len(), self.node_count());
        self.ranks = Some(ranks);
        self
    }

    pub fn without_decorations(mut self) -> ExplicitView {
        self.labels = None;
        self.ranks = None;
        self
    }

    pub fn labels(&self) -> Option<&[u64]> {
        self.labels.as_deref()
    }

    pub fn ranks(&self) -> Option<&[u32]> {
        self.ranks.as_deref()
    }

    /// Restricts to the ball of the given radius around `center`, which
    /// becomes the new root. Decorations and keys are carried over; ranks are
    /// re-compacted to 0..n.
    pub fn subview(&self, center: NodeRef, radius: usize) -> ExplicitView {
        let mut dist: HashMap<u32, usize> = HashMap::from([(center.0, 0)]);
        let mut order = vec![center.0];
        let mut queue = VecDeque::from([center.0]);
        while let Some(x) = queue.pop_front() {
            let dx = dist[&x];
            if dx == radius {
                continue;
            }
            for &(_, m) in &self.adj[x as usize] {
                if let std::collections::hash_map::Entry::Vacant(e) = dist.entry(m) {
                    e.insert(dx + 1);
                    order.push(m);
                    queue.push_back(m);
                }
            }
        }
        let local: HashMap<u32, u32> = order
            .iter()
            .enumerate()
            .map(|(i, &x)| (x, i as u32))
            .collect();
        let depth: Vec<usize> = order.iter().map(|x| dist[x]).collect();
        let adj = order
            .iter()
            .map(|&x| {
                self.adj[x as usize]
                    .iter()
                    .filter(|(_, m)| local.contains_key(m))
                    .filter(|(_, m)| dist[&x].min(dist[m]) < radius)
                    .map(|&(s, m)| (s, local[&m]))
                    .collect()
            })
            .collect();
        let mut v = ExplicitView::assemble(self.model, radius, depth, adj);
        v.labels = self
            .labels
            .as_ref()
            .map(|l| order.iter().map(|&x| l[x as usize]).collect());
        v.ranks = self.ranks.as_ref().map(|r| {
            let mut idx: Vec<usize> = (0..order.len()).collect();
            idx.sort_by_key(|&i| r[order[i] as usize]);
            let mut out = vec![0u32; order.len()];
            for (pos, i) in idx.into_iter().enumerate() {
                out[i] = pos as u32;
            }
            out
        });
        v.keys = self
            .keys
            .as_ref()
            .map(|k| order.iter().map(|&x| k[x as usize]).collect());
        v
    }
}

impl View for ExplicitView {
    fn model(&self) -> Model {
        self.model
    }

    fn radius(&self) -> usize {
        self.radius
    }

    fn depth(&self, n: NodeRef) -> usize {
        self.depth[n.0 as usize]
    }

    fn slots(&self, n: NodeRef) -> Vec<Slot> {
        self.adj[n.0 as usize].iter().map(|&(s, _)| s).collect()
    }

    fn follow(&self, n: NodeRef, s: Slot) -> Option<NodeRef> {
        let list = &self.adj[n.0 as usize];
        list.binary_search_by_key(&s, |&(t, _)| t)
            .ok()
            .map(|ix| NodeRef(list[ix].1))
    }

    fn label(&self, n: NodeRef) -> Option<u64> {
        self.labels.as_ref().map(|l| l[n.0 as usize])
    }

    fn rank(&self, n: NodeRef) -> Option<u32> {
        self.ranks.as_ref().map(|r| r[n.0 as usize])
    }

    fn is_tree(&self) -> bool {
        self.tree
    }

    fn cover_key(&self, n: NodeRef) -> Option<u64> {
        self.keys.as_ref().map(|k| k[n.0 as usize])
    }
}

/// The radius-`t` ball τ_t(G, v) of a concrete graph. An edge {u, w} is
/// included iff min(dist(v, u), dist(v, w)) + 1 ≤ t.
pub fn neighborhood(
    g: &ColoredMultigraph,
    v: NodeId,
    t: usize,
) -> Result<ExplicitView, GraphError> {
    g.incidences(v)?;
    let mut dist: BTreeMap<NodeId, usize> = BTreeMap::from([(v, 0)]);
    let mut order = vec![v];
    let mut queue = VecDeque::from([v]);
    while let Some(x) = queue.pop_front() {
        let dx = dist[&x];
        if dx == t {
            continue;
        }
        for inc in g.incidences(x)? {
            if let Entry::Vacant(e) = dist.entry(inc.neighbor) {
                e.insert(dx + 1);
                order.push(inc.neighbor);
                queue.push_back(inc.neighbor);
            }
        }
    }
    let local: BTreeMap<NodeId, u32> = order
        .iter()
        .enumerate()
        .map(|(i, &x)| (x, i as u32))
        .collect();
    let depth: Vec<usize> = order.iter().map(|x| dist[x]).collect();
    let mut adj = Vec::with_capacity(order.len());
    for &x in &order {
        let dx = dist[&x];
        let list = g
            .incidences(x)?
            .iter()
            .filter(|inc| local.contains_key(&inc.neighbor) && dx.min(dist[&inc.neighbor]) < t)
            .map(|inc| (inc.slot, local[&inc.neighbor]))
            .collect();
        adj.push(list);
    }
    let mut view = ExplicitView::assemble(g.model(), t, depth, adj);
    if g.model() == Model::ID {
        view.labels = Some(
            order
                .iter()
                .map(|&x| g.label(x).expect("ID graphs are labeled"))
                .collect(),
        );
    }
    if let Some(ranks) = g.ranks() {
        let mut members = order.clone();
        members.sort_by_key(|x| ranks[x]);
        let pos: BTreeMap<NodeId, u32> = members
            .iter()
            .enumerate()
            .map(|(i, &x)| (x, i as u32))
            .collect();
        view.ranks = Some(order.iter().map(|x| pos[x]).collect());
    }
    Ok(view)
}

/// Copies any view into an [`ExplicitView`], numbering nodes in BFS order with
/// slots explored in ascending order.
pub fn materialize(view: &dyn View) -> ExplicitView {
    let root = view.root();
    let mut local: HashMap<NodeRef, u32> = HashMap::from([(root, 0)]);
    let mut order = vec![root];
    let mut adj: Vec<Vec<(Slot, u32)>> = Vec::new();
    let mut next = 0;
    while next < order.len() {
        let x = order[next];
        next += 1;
        let mut list = Vec::new();
        for s in view.slots(x) {
            let Some(y) = view.follow(x, s) else { continue };
            let id = *local.entry(y).or_insert_with(|| {
                order.push(y);
                (order.len() - 1) as u32
            });
            list.push((s, id));
        }
        adj.push(list);
    }
    let depth = order.iter().map(|&x| view.depth(x)).collect();
    let mut out = ExplicitView::assemble(view.model(), view.radius(), depth, adj);
    if order.iter().all(|&x| view.label(x).is_some()) {
        out.labels = Some(order.iter().map(|&x| view.label(x).unwrap()).collect());
    }
    if order.iter().all(|&x| view.rank(x).is_some()) {
        out.ranks = Some(order.iter().map(|&x| view.rank(x).unwrap()).collect());
    }
    if order.iter().all(|&x| view.cover_key(x).is_some()) {
        out.keys = Some(order.iter().map(|&x| view.cover_key(x).unwrap()).collect());
    }
    out
}
