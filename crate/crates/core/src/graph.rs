//! Colored multigraphs with loops in the EC, PO, OI and ID flavors.
//!
//! A graph is immutable once built. Every constructor funnels through
//! [`build_graph`], so a value of [`ColoredMultigraph`] always satisfies the
//! rules of its model.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type NodeId = u32;
pub type EdgeId = u32;
pub type Color = u32;

/// Upper bound on the palette size of any graph.
pub const MAX_COLORS: Color = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Model {
    EC,
    PO,
    OI,
    ID,
}

impl Model {
    pub fn name(self) -> &'static str {
        match self {
            Model::EC => "EC",
            Model::PO => "PO",
            Model::OI => "OI",
            Model::ID => "ID",
        }
    }

    pub fn tag(self) -> u8 {
        match self {
            Model::EC => 0,
            Model::PO => 1,
            Model::OI => 2,
            Model::ID => 3,
        }
    }

    /// EC and PO graphs carry no node identities.
    pub fn is_anonymous(self) -> bool {
        matches!(self, Model::EC | Model::PO)
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EdgeRec {
    pub eid: EdgeId,
    pub u: NodeId,
    pub v: NodeId,
    pub color: Color,
    pub directed: bool,
}

impl EdgeRec {
    pub fn is_loop(&self) -> bool {
        self.u == self.v
    }

    pub fn other(&self, x: NodeId) -> NodeId {
        if x == self.u {
            self.v
        } else {
            self.u
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SlotDir {
    Undirected,
    Out,
    In,
    Loop,
}

impl SlotDir {
    /// The direction seen from the other endpoint of the same edge.
    pub fn reverse(self) -> SlotDir {
        match self {
            SlotDir::Out => SlotDir::In,
            SlotDir::In => SlotDir::Out,
            d => d,
        }
    }

    pub fn tag(self) -> u8 {
        match self {
            SlotDir::Undirected => 0,
            SlotDir::Out => 1,
            SlotDir::In => 2,
            SlotDir::Loop => 3,
        }
    }

    pub fn is_directed(self) -> bool {
        matches!(self, SlotDir::Out | SlotDir::In)
    }
}

impl fmt::Display for SlotDir {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SlotDir::Undirected => "undirected",
            SlotDir::Out => "out",
            SlotDir::In => "in",
            SlotDir::Loop => "loop",
        })
    }
}

/// An edge end at a node, identified by color and direction. In a properly
/// colored graph the slots at a node are pairwise distinct.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Slot {
    pub color: Color,
    pub dir: SlotDir,
}

impl Slot {
    pub fn new(color: Color, dir: SlotDir) -> Slot {
        Slot { color, dir }
    }

    pub fn undirected(color: Color) -> Slot {
        Slot::new(color, SlotDir::Undirected)
    }

    pub fn out(color: Color) -> Slot {
        Slot::new(color, SlotDir::Out)
    }

    pub fn inc(color: Color) -> Slot {
        Slot::new(color, SlotDir::In)
    }

    pub fn looped(color: Color) -> Slot {
        Slot::new(color, SlotDir::Loop)
    }

    pub fn reverse(self) -> Slot {
        Slot::new(self.color, self.dir.reverse())
    }
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.color, self.dir)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Incidence {
    pub eid: EdgeId,
    pub slot: Slot,
    pub neighbor: NodeId,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("improper coloring at node {node}: slot {slot} used twice")]
    ImproperColoring { node: NodeId, slot: Slot },
    #[error("identifier {label} assigned to more than one node")]
    DuplicateIdentifier { label: u64 },
    #[error("OI graph without a node order")]
    MissingOrder,
    #[error("ID graph node {node} has no identifier")]
    MissingLabel { node: NodeId },
    #[error("node {node} carries an identifier outside the ID model")]
    UnexpectedLabel { node: NodeId },
    #[error("node order given outside the OI model")]
    UnexpectedOrder,
    #[error("node order is not a permutation of the nodes: {reason}")]
    BadOrder { reason: String },
    #[error("edge {eid} references unknown node {node}")]
    UnknownNode { eid: EdgeId, node: NodeId },
    #[error("edge {eid} has color {color} outside 1..={k}")]
    ColorOutOfRange { eid: EdgeId, color: Color, k: Color },
    #[error("palette size {k} exceeds the limit of {MAX_COLORS}")]
    PaletteTooLarge { k: Color },
    #[error("edge {eid} has the wrong orientation flag for this graph")]
    DirectedMismatch { eid: EdgeId },
    #[error("node {node} listed twice")]
    DuplicateNode { node: NodeId },
    #[error("edge id {eid} used twice")]
    DuplicateEdge { eid: EdgeId },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("unknown edge {0}")]
    UnknownEdge(EdgeId),
    #[error("edge {0} is not a loop")]
    NotALoop(EdgeId),
    #[error("graph is not connected")]
    Disconnected,
    #[error("invalid graph: {}", render_violations(.0))]
    Invalid(Vec<Violation>),
}

pub fn render_violations(vs: &[Violation]) -> String {
    vs.iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeSpec {
    pub id: NodeId,
    pub label: Option<u64>,
}

/// Raw description of a graph, validated by [`build_graph`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphSpec {
    pub model: Model,
    pub k: Color,
    pub nodes: Vec<NodeSpec>,
    pub order: Option<Vec<NodeId>>,
    pub edges: Vec<EdgeRec>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColoredMultigraph {
    model: Model,
    k: Color,
    nodes: BTreeMap<NodeId, Option<u64>>,
    order: Option<Vec<NodeId>>,
    edges: BTreeMap<EdgeId, EdgeRec>,
    incidences: BTreeMap<NodeId, Vec<Incidence>>,
}

pub fn build_graph(spec: GraphSpec) -> Result<ColoredMultigraph, Vec<Violation>> {
    let mut violations = Vec::new();
    let GraphSpec {
        model,
        k,
        nodes: node_specs,
        order,
        edges: edge_list,
    } = spec;

    if k > MAX_COLORS {
        violations.push(Violation::PaletteTooLarge { k });
    }

    let mut nodes = BTreeMap::new();
    for ns in node_specs {
        if nodes.insert(ns.id, ns.label).is_some() {
            violations.push(Violation::DuplicateNode { node: ns.id });
        }
    }

    match model {
        Model::ID => {
            let mut seen = BTreeSet::new();
            for (&id, label) in &nodes {
                match label {
                    None => violations.push(Violation::MissingLabel { node: id }),
                    Some(l) => {
                        if !seen.insert(*l) {
                            violations.push(Violation::DuplicateIdentifier { label: *l });
                        }
                    }
                }
            }
        }
        _ => {
            for (&id, label) in &nodes {
                if label.is_some() {
                    violations.push(Violation::UnexpectedLabel { node: id });
                }
            }
        }
    }

    match (model, &order) {
        (Model::OI, None) => violations.push(Violation::MissingOrder),
        (Model::OI, Some(ord)) => {
            let set: BTreeSet<NodeId> = ord.iter().copied().collect();
            if set.len() != ord.len() {
                violations.push(Violation::BadOrder {
                    reason: "repeated node".into(),
                });
            } else if set.len() != nodes.len() || !set.iter().all(|n| nodes.contains_key(n)) {
                violations.push(Violation::BadOrder {
                    reason: "order and node set differ".into(),
                });
            }
        }
        (_, Some(_)) => violations.push(Violation::UnexpectedOrder),
        (_, None) => {}
    }

    let mut edges = BTreeMap::new();
    let mut incidences: BTreeMap<NodeId, Vec<Incidence>> =
        nodes.keys().map(|&n| (n, Vec::new())).collect();
    let want_directed = match model {
        Model::EC => Some(false),
        Model::PO => Some(true),
        _ => edge_list.first().map(|e| e.directed),
    };
    for e in edge_list {
        if edges.contains_key(&e.eid) {
            violations.push(Violation::DuplicateEdge { eid: e.eid });
            continue;
        }
        let mut ok = true;
        for node in [e.u, e.v] {
            if !nodes.contains_key(&node) {
                violations.push(Violation::UnknownNode { eid: e.eid, node });
                ok = false;
            }
        }
        if e.color == 0 || e.color > k {
            violations.push(Violation::ColorOutOfRange {
                eid: e.eid,
                color: e.color,
                k,
            });
        }
        if Some(e.directed) != want_directed {
            violations.push(Violation::DirectedMismatch { eid: e.eid });
        }
        if ok {
            for (at, inc) in edge_incidences(&e) {
                incidences.get_mut(&at).expect("checked").push(inc);
            }
        }
        edges.insert(e.eid, e);
    }

    for (&node, list) in incidences.iter_mut() {
        list.sort_by_key(|i| (i.slot, i.eid));
        for w in list.windows(2) {
            if w[0].slot == w[1].slot {
                violations.push(Violation::ImproperColoring {
                    node,
                    slot: w[0].slot,
                });
            }
        }
    }

    if violations.is_empty() {
        Ok(ColoredMultigraph {
            model,
            k,
            nodes,
            order,
            edges,
            incidences,
        })
    } else {
        Err(violations)
    }
}

/// The incidences an edge contributes, keyed by the node they sit at. An
/// undirected loop yields one incidence; a directed loop yields an outgoing and
/// an incoming one.
fn edge_incidences(e: &EdgeRec) -> Vec<(NodeId, Incidence)> {
    let inc = |slot: Slot, neighbor: NodeId| Incidence {
        eid: e.eid,
        slot,
        neighbor,
    };
    if e.directed {
        vec![
            (e.u, inc(Slot::out(e.color), e.v)),
            (e.v, inc(Slot::inc(e.color), e.u)),
        ]
    } else if e.is_loop() {
        vec![(e.u, inc(Slot::undirected(e.color), e.u))]
    } else {
        vec![
            (e.u, inc(Slot::undirected(e.color), e.v)),
            (e.v, inc(Slot::undirected(e.color), e.u)),
        ]
    }
}

impl ColoredMultigraph {
    pub fn model(&self) -> Model {
        self.model
    }

    pub fn k(&self) -> Color {
        self.k
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes.keys().copied()
    }

    pub fn contains_node(&self, v: NodeId) -> bool {
        self.nodes.contains_key(&v)
    }

    pub fn label(&self, v: NodeId) -> Option<u64> {
        self.nodes.get(&v).copied().flatten()
    }

    pub fn order(&self) -> Option<&[NodeId]> {
        self.order.as_deref()
    }

    pub fn edges(&self) -> impl Iterator<Item = &EdgeRec> + '_ {
        self.edges.values()
    }

    pub fn edge(&self, eid: EdgeId) -> Option<&EdgeRec> {
        self.edges.get(&eid)
    }

    pub fn edge_ids(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.edges.keys().copied()
    }

    pub fn max_node_id(&self) -> Option<NodeId> {
        self.nodes.keys().next_back().copied()
    }

    pub fn max_eid(&self) -> Option<EdgeId> {
        self.edges.keys().next_back().copied()
    }

    /// Incidences at `v`, sorted by slot.
    pub fn incidences(&self, v: NodeId) -> Result<&[Incidence], GraphError> {
        self.incidences
            .get(&v)
            .map(|l| l.as_slice())
            .ok_or(GraphError::UnknownNode(v))
    }

    pub fn incidence_at(&self, v: NodeId, slot: Slot) -> Option<&Incidence> {
        let list = self.incidences.get(&v)?;
        list.binary_search_by_key(&slot, |i| i.slot)
            .ok()
            .map(|ix| &list[ix])
    }

    /// Non-loop edges count 1, an undirected loop counts 1, a directed loop 2.
    pub fn degree(&self, v: NodeId) -> Result<usize, GraphError> {
        Ok(self.incidences(v)?.len())
    }

    pub fn loops_at(&self, v: NodeId) -> Result<Vec<Color>, GraphError> {
        let list = self.incidences(v)?;
        let mut colors: Vec<Color> = list
            .iter()
            .filter(|i| i.neighbor == v && i.slot.dir != SlotDir::In)
            .filter(|i| self.edges[&i.eid].is_loop())
            .map(|i| i.slot.color)
            .collect();
        colors.sort_unstable();
        Ok(colors)
    }

    pub fn loop_eids_at(&self, v: NodeId) -> Result<Vec<EdgeId>, GraphError> {
        let list = self.incidences(v)?;
        let mut eids: Vec<EdgeId> = list
            .iter()
            .filter(|i| self.edges[&i.eid].is_loop())
            .map(|i| i.eid)
            .collect();
        eids.sort_unstable();
        eids.dedup();
        Ok(eids)
    }

    /// The loop of the given color at `v`, if any.
    pub fn loop_with_color(&self, v: NodeId, color: Color) -> Option<EdgeId> {
        let list = self.incidences.get(&v)?;
        list.iter()
            .find(|i| i.slot.color == color && self.edges[&i.eid].is_loop())
            .map(|i| i.eid)
    }

    pub fn max_degree(&self) -> usize {
        self.incidences.values().map(|l| l.len()).max().unwrap_or(0)
    }

    fn components(&self) -> usize {
        let mut seen = BTreeSet::new();
        let mut count = 0;
        for start in self.node_ids() {
            if !seen.insert(start) {
                continue;
            }
            count += 1;
            let mut queue = VecDeque::from([start]);
            while let Some(x) = queue.pop_front() {
                for inc in &self.incidences[&x] {
                    if seen.insert(inc.neighbor) {
                        queue.push_back(inc.neighbor);
                    }
                }
            }
        }
        count
    }

    pub fn is_connected(&self) -> bool {
        self.components() <= 1
    }

    pub fn is_tree_ignoring_loops(&self) -> bool {
        let non_loops = self.edges.values().filter(|e| !e.is_loop()).count();
        !self.nodes.is_empty() && self.is_connected() && non_loops + 1 == self.nodes.len()
    }

    /// No loops and no two edges joining the same pair of nodes.
    pub fn is_simple(&self) -> bool {
        let mut pairs = BTreeSet::new();
        for e in self.edges.values() {
            if e.is_loop() || !pairs.insert((e.u.min(e.v), e.u.max(e.v))) {
                return false;
            }
        }
        true
    }

    /// BFS distances from `v`, ignoring loops.
    pub fn distances(&self, v: NodeId) -> Result<BTreeMap<NodeId, usize>, GraphError> {
        self.incidences(v)?;
        let mut dist = BTreeMap::from([(v, 0)]);
        let mut queue = VecDeque::from([v]);
        while let Some(x) = queue.pop_front() {
            let dx = dist[&x];
            for inc in &self.incidences[&x] {
                if let Entry::Vacant(e) = dist.entry(inc.neighbor) {
                    e.insert(dx + 1);
                    queue.push_back(inc.neighbor);
                }
            }
        }
        Ok(dist)
    }

    pub fn spec(&self) -> GraphSpec {
        GraphSpec {
            model: self.model,
            k: self.k,
            nodes: self
                .nodes
                .iter()
                .map(|(&id, &label)| NodeSpec { id, label })
                .collect(),
            order: self.order.clone(),
            edges: self.edges.values().cloned().collect(),
        }
    }

    pub fn without_edge(&self, eid: EdgeId) -> Result<ColoredMultigraph, GraphError> {
        if !self.edges.contains_key(&eid) {
            return Err(GraphError::UnknownEdge(eid));
        }
        let mut spec = self.spec();
        spec.edges.retain(|e| e.eid != eid);
        build_graph(spec).map_err(GraphError::Invalid)
    }

    /// Renumbers edges to 0..m in eid order; returns the old→new map.
    pub fn renumber_edges(&self) -> (ColoredMultigraph, BTreeMap<EdgeId, EdgeId>) {
        let mut spec = self.spec();
        let mut map = BTreeMap::new();
        for (ix, e) in spec.edges.iter_mut().enumerate() {
            map.insert(e.eid, ix as EdgeId);
            e.eid = ix as EdgeId;
        }
        (build_graph(spec).expect("renumbering keeps validity"), map)
    }

    /// Position of each node in the OI order.
    pub fn ranks(&self) -> Option<BTreeMap<NodeId, usize>> {
        self.order
            .as_ref()
            .map(|o| o.iter().enumerate().map(|(i, &n)| (n, i)).collect())
    }
}

/// Incremental construction with sequential edge ids.
#[derive(Debug, Clone)]
pub struct GraphBuilder {
    spec: GraphSpec,
}

impl GraphBuilder {
    pub fn new(model: Model, k: Color) -> GraphBuilder {
        GraphBuilder {
            spec: GraphSpec {
                model,
                k,
                nodes: Vec::new(),
                order: None,
                edges: Vec::new(),
            },
        }
    }

    pub fn node(mut self, id: NodeId) -> Self {
        self.spec.nodes.push(NodeSpec { id, label: None });
        self
    }

    pub fn nodes(mut self, ids: impl IntoIterator<Item = NodeId>) -> Self {
        for id in ids {
            self.spec.nodes.push(NodeSpec { id, label: None });
        }
        self
    }

    pub fn labeled(mut self, id: NodeId, label: u64) -> Self {
        self.spec.nodes.push(NodeSpec {
            id,
            label: Some(label),
        });
        self
    }

    fn push(mut self, u: NodeId, v: NodeId, color: Color, directed: bool) -> Self {
        let eid = self.spec.edges.len() as EdgeId;
        self.spec.edges.push(EdgeRec {
            eid,
            u,
            v,
            color,
            directed,
        });
        self
    }

    pub fn edge(self, u: NodeId, v: NodeId, color: Color) -> Self {
        self.push(u, v, color, false)
    }

    pub fn arc(self, u: NodeId, v: NodeId, color: Color) -> Self {
        self.push(u, v, color, true)
    }

    pub fn order(mut self, order: Vec<NodeId>) -> Self {
        self.spec.order = Some(order);
        self
    }

    pub fn build(self) -> Result<ColoredMultigraph, Vec<Violation>> {
        build_graph(self.spec)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeDoc {
    pub id: NodeId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeDoc {
    pub u: NodeId,
    pub v: NodeId,
    pub color: Color,
    #[serde(default)]
    pub directed: bool,
}

/// On-disk form of a graph. Edge ids are positional.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphDoc {
    pub model: Model,
    pub k: Color,
    pub nodes: Vec<NodeDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<Vec<NodeId>>,
    pub edges: Vec<EdgeDoc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl From<serde_json::Error> for ParseError {
    fn from(e: serde_json::Error) -> Self {
        ParseError {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecodeError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("invalid graph: {}", render_violations(.0))]
    Invalid(Vec<Violation>),
}

impl ColoredMultigraph {
    pub fn to_doc(&self) -> GraphDoc {
        GraphDoc {
            model: self.model,
            k: self.k,
            nodes: self
                .nodes
                .iter()
                .map(|(&id, &label)| NodeDoc { id, label })
                .collect(),
            order: self.order.clone(),
            edges: self
                .edges
                .values()
                .map(|e| EdgeDoc {
                    u: e.u,
                    v: e.v,
                    color: e.color,
                    directed: e.directed,
                })
                .collect(),
        }
    }

    pub fn from_doc(doc: &GraphDoc) -> Result<ColoredMultigraph, Vec<Violation>> {
        build_graph(GraphSpec {
            model: doc.model,
            k: doc.k,
            nodes: doc
                .nodes
                .iter()
                .map(|n| NodeSpec {
                    id: n.id,
                    label: n.label,
                })
                .collect(),
            order: doc.order.clone(),
            edges: doc
                .edges
                .iter()
                .enumerate()
                .map(|(ix, e)| EdgeRec {
                    eid: ix as EdgeId,
                    u: e.u,
                    v: e.v,
                    color: e.color,
                    directed: e.directed,
                })
                .collect(),
        })
    }
}

pub fn encode_graph(g: &ColoredMultigraph) -> String {
    let mut s = serde_json::to_string_pretty(&g.to_doc()).expect("graph docs serialize");
    s.push('\n');
    s
}

pub fn decode_graph(text: &str) -> Result<ColoredMultigraph, DecodeError> {
    let doc: GraphDoc = serde_json::from_str(text).map_err(ParseError::from)?;
    ColoredMultigraph::from_doc(&doc).map_err(DecodeError::Invalid)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base(delta: Color) -> ColoredMultigraph {
        let mut b = GraphBuilder::new(Model::EC, delta).node(0);
        for c in 1..=delta {
            b = b.edge(0, 0, c);
        }
        b.build().unwrap()
    }

    #[test]
    fn smallest_proper_coloring() {
        let g = GraphBuilder::new(Model::EC, 1)
            .nodes([0, 1])
            .edge(0, 1, 1)
            .build()
            .unwrap();
        assert_eq!(g.max_degree(), 1);
    }

    #[test]
    fn repeated_loop_color_is_improper() {
        let err = GraphBuilder::new(Model::EC, 2)
            .node(0)
            .edge(0, 0, 1)
            .edge(0, 0, 1)
            .build()
            .unwrap_err();
        assert!(matches!(
            err[0],
            Violation::ImproperColoring { node: 0, .. }
        ));
    }

    #[test]
    fn repeated_out_color_is_improper() {
        let err = GraphBuilder::new(Model::PO, 2)
            .nodes([0, 1, 2])
            .arc(0, 1, 2)
            .arc(0, 2, 2)
            .build()
            .unwrap_err();
        assert_eq!(
            err,
            vec![Violation::ImproperColoring {
                node: 0,
                slot: Slot::out(2)
            }]
        );
    }

    #[test]
    fn po_in_and_out_may_share_a_color() {
        GraphBuilder::new(Model::PO, 1)
            .nodes([0, 1, 2])
            .arc(0, 1, 1)
            .arc(1, 2, 1)
            .build()
            .unwrap();
    }

    #[test]
    fn loop_degree_conventions() {
        let ec = GraphBuilder::new(Model::EC, 2)
            .node(0)
            .edge(0, 0, 1)
            .edge(0, 0, 2)
            .build()
            .unwrap();
        assert_eq!(ec.degree(0).unwrap(), 2);
        let po = GraphBuilder::new(Model::PO, 2)
            .nodes([0, 1])
            .arc(0, 0, 1)
            .arc(1, 0, 2)
            .build()
            .unwrap();
        assert_eq!(po.degree(0).unwrap(), 3);
        assert_eq!(po.loops_at(0).unwrap(), vec![1]);
        let lone = GraphBuilder::new(Model::EC, 1).node(5).build().unwrap();
        assert_eq!(lone.degree(5).unwrap(), 0);
        assert_eq!(lone.degree(6), Err(GraphError::UnknownNode(6)));
    }

    #[test]
    fn loops_are_listed_by_color() {
        let g = base(3);
        assert_eq!(g.loops_at(0).unwrap(), vec![1, 2, 3]);
        assert_eq!(g.degree(0).unwrap(), 3);
        assert!(g.is_tree_ignoring_loops());
        assert!(!g.is_simple());
    }

    #[test]
    fn four_cycle_is_not_a_tree() {
        let g = GraphBuilder::new(Model::EC, 2)
            .nodes(0..4)
            .edge(0, 1, 1)
            .edge(1, 2, 2)
            .edge(2, 3, 1)
            .edge(3, 0, 2)
            .build()
            .unwrap();
        assert!(!g.is_tree_ignoring_loops());
        assert!(g.is_simple());
    }

    #[test]
    fn id_and_oi_rules() {
        let dup = GraphBuilder::new(Model::ID, 1)
            .labeled(0, 7)
            .labeled(1, 7)
            .build()
            .unwrap_err();
        assert_eq!(dup, vec![Violation::DuplicateIdentifier { label: 7 }]);
        let missing = GraphBuilder::new(Model::OI, 1)
            .nodes([0, 1])
            .build()
            .unwrap_err();
        assert_eq!(missing, vec![Violation::MissingOrder]);
        GraphBuilder::new(Model::OI, 1)
            .nodes([0, 1])
            .order(vec![1, 0])
            .edge(0, 1, 1)
            .build()
            .unwrap();
    }

    #[test]
    fn unknown_endpoint_is_reported() {
        let text = r#"{"model":"EC","k":1,"nodes":[{"id":0}],"edges":[{"u":0,"v":7,"color":1,"directed":false}]}"#;
        match decode_graph(text) {
            Err(DecodeError::Invalid(v)) => {
                assert_eq!(v, vec![Violation::UnknownNode { eid: 0, node: 7 }])
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_json_has_location() {
        let err = decode_graph("{\n  \"model\": 3\n}").unwrap_err();
        match err {
            DecodeError::Parse(p) => assert_eq!(p.line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn round_trip_base_graph() {
        let g = base(3);
        let text = encode_graph(&g);
        let back = decode_graph(&text).unwrap();
        assert_eq!(back, g);
        assert_eq!(back.degree(0).unwrap(), 3);
        assert_eq!(encode_graph(&back), text);
    }

    #[test]
    fn without_edge_and_renumber() {
        let g = base(3).without_edge(1).unwrap();
        assert_eq!(g.loops_at(0).unwrap(), vec![1, 3]);
        let (r, map) = g.renumber_edges();
        assert_eq!(map, BTreeMap::from([(0, 0), (2, 1)]));
        assert_eq!(r.loops_at(0).unwrap(), vec![1, 3]);
    }
}
