//! Fractional matchings with exact weights, the maximality verifier,
//! disagreement sets and the propagation walk.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Color, ColoredMultigraph, EdgeId, GraphError, NodeId, ParseError};
use crate::weight::{format_weight, in_unit_interval, one, zero, Weight, WeightText};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FractionalMatching {
    weights: BTreeMap<EdgeId, Weight>,
}

impl FractionalMatching {
    pub fn new(weights: BTreeMap<EdgeId, Weight>) -> FractionalMatching {
        FractionalMatching { weights }
    }

    pub fn uniform(g: &ColoredMultigraph, w: Weight) -> FractionalMatching {
        FractionalMatching {
            weights: g.edge_ids().map(|e| (e, w.clone())).collect(),
        }
    }

    pub fn weight(&self, eid: EdgeId) -> Option<&Weight> {
        self.weights.get(&eid)
    }

    pub fn weights(&self) -> &BTreeMap<EdgeId, Weight> {
        &self.weights
    }

    pub fn set(&mut self, eid: EdgeId, w: Weight) {
        self.weights.insert(eid, w);
    }

    /// The weights of the given edges only.
    pub fn restrict(&self, eids: impl IntoIterator<Item = EdgeId>) -> FractionalMatching {
        FractionalMatching {
            weights: eids
                .into_iter()
                .filter_map(|e| self.weights.get(&e).map(|w| (e, w.clone())))
                .collect(),
        }
    }

    /// Re-keys weights through an edge-id map; unmapped edges are dropped.
    pub fn rekey(&self, map: &BTreeMap<EdgeId, EdgeId>) -> FractionalMatching {
        FractionalMatching {
            weights: self
                .weights
                .iter()
                .filter_map(|(e, w)| map.get(e).map(|&n| (n, w.clone())))
                .collect(),
        }
    }

    pub fn to_doc(&self) -> FmDoc {
        FmDoc {
            weights: self
                .weights
                .iter()
                .map(|(&e, w)| (e, WeightText(w.clone())))
                .collect(),
        }
    }

    pub fn from_doc(doc: &FmDoc) -> FractionalMatching {
        FractionalMatching {
            weights: doc.weights.iter().map(|(&e, w)| (e, w.0.clone())).collect(),
        }
    }
}

/// On-disk form: `{"weights": {eid: "p/q"}}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FmDoc {
    pub weights: BTreeMap<EdgeId, WeightText>,
}

pub fn encode_fm(y: &FractionalMatching) -> String {
    let mut s = serde_json::to_string_pretty(&y.to_doc()).expect("fm docs serialize");
    s.push('\n');
    s
}

pub fn decode_fm(text: &str) -> Result<FractionalMatching, ParseError> {
    let doc: FmDoc = serde_json::from_str(text).map_err(ParseError::from)?;
    Ok(FractionalMatching::from_doc(&doc))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FmError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("no weight for edge {0}")]
    MissingWeight(EdgeId),
    #[error("weight {weight} of edge {eid} lies outside [0, 1]")]
    OutOfRange { eid: EdgeId, weight: String },
    #[error("weight given for edge {0}, which is not in the graph")]
    StrayWeight(EdgeId),
}

fn weight_of(y: &FractionalMatching, eid: EdgeId) -> Result<&Weight, FmError> {
    y.weight(eid).ok_or(FmError::MissingWeight(eid))
}

/// y[v]: an undirected loop counts once, a directed loop twice.
pub fn node_weight(
    g: &ColoredMultigraph,
    y: &FractionalMatching,
    v: NodeId,
) -> Result<Weight, FmError> {
    let mut sum = zero();
    for inc in g.incidences(v)? {
        sum += weight_of(y, inc.eid)?;
    }
    Ok(sum)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ViolationKind {
    Infeasible,
    UnsaturatedEdge,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FmViolation {
    pub kind: ViolationKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub node: Option<NodeId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge: Option<EdgeId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub endpoints: Option<(NodeId, NodeId)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub load: Option<WeightText>,
}

impl FmViolation {
    pub fn describe(&self) -> String {
        match self.kind {
            ViolationKind::Infeasible => format!(
                "infeasible at node {}: y = {}",
                self.node.unwrap_or_default(),
                self.load
                    .as_ref()
                    .map(|w| format_weight(&w.0))
                    .unwrap_or_default()
            ),
            ViolationKind::UnsaturatedEdge => {
                let (u, v) = self.endpoints.unwrap_or_default();
                format!(
                    "unsaturated edge {} between nodes {} and {}",
                    self.edge.unwrap_or_default(),
                    u,
                    v
                )
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaximalityReport {
    pub feasible: bool,
    pub saturated: BTreeSet<NodeId>,
    pub violations: Vec<FmViolation>,
}

impl MaximalityReport {
    pub fn is_maximal(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks that `y` is defined on exactly the edges of `g` with weights in [0, 1].
pub fn validate_fm(g: &ColoredMultigraph, y: &FractionalMatching) -> Result<(), FmError> {
    for eid in g.edge_ids() {
        let w = weight_of(y, eid)?;
        if !in_unit_interval(w) {
            return Err(FmError::OutOfRange {
                eid,
                weight: format_weight(w),
            });
        }
    }
    if let Some(&stray) = y.weights().keys().find(|&&e| g.edge(e).is_none()) {
        return Err(FmError::StrayWeight(stray));
    }
    Ok(())
}

pub fn check_maximal_fm(
    g: &ColoredMultigraph,
    y: &FractionalMatching,
) -> Result<MaximalityReport, FmError> {
    validate_fm(g, y)?;
    let mut loads = BTreeMap::new();
    let mut violations = Vec::new();
    let mut saturated = BTreeSet::new();
    for v in g.node_ids() {
        let load = node_weight(g, y, v)?;
        if load > one() {
            violations.push(FmViolation {
                kind: ViolationKind::Infeasible,
                node: Some(v),
                edge: None,
                endpoints: None,
                load: Some(WeightText(load.clone())),
            });
        }
        if load == one() {
            saturated.insert(v);
        }
        loads.insert(v, load);
    }
    let feasible = violations.is_empty();
    for e in g.edges() {
        if !saturated.contains(&e.u) && !saturated.contains(&e.v) {
            violations.push(FmViolation {
                kind: ViolationKind::UnsaturatedEdge,
                node: None,
                edge: Some(e.eid),
                endpoints: Some((e.u, e.v)),
                load: None,
            });
        }
    }
    Ok(MaximalityReport {
        feasible,
        saturated,
        violations,
    })
}

pub fn disagreement_edges(
    g: &ColoredMultigraph,
    y: &FractionalMatching,
    y2: &FractionalMatching,
) -> Result<BTreeSet<EdgeId>, FmError> {
    let mut out = BTreeSet::new();
    for eid in g.edge_ids() {
        if weight_of(y, eid)? != weight_of(y2, eid)? {
            out.insert(eid);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Disagreement {
    pub edges: BTreeSet<EdgeId>,
    pub nodes: BTreeSet<NodeId>,
}

/// The subgraph induced by the disagreeing edges.
pub fn disagreement_subgraph(
    g: &ColoredMultigraph,
    y: &FractionalMatching,
    y2: &FractionalMatching,
) -> Result<Disagreement, FmError> {
    let edges = disagreement_edges(g, y, y2)?;
    let nodes = edges
        .iter()
        .flat_map(|e| {
            let rec = g.edge(*e).expect("edge of g");
            [rec.u, rec.v]
        })
        .collect();
    Ok(Disagreement { edges, nodes })
}

/// An edge incident to the walk's start that lies outside the graph, with its
/// weight under each of the two matchings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VirtualEdge {
    pub color: Color,
    pub w: Weight,
    pub w2: Weight,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WalkError {
    #[error(transparent)]
    Fm(#[from] FmError),
    #[error("graph is not a tree once loops are removed")]
    NotATree,
    #[error("the walk cannot continue at node {node}")]
    NoContinuation { node: NodeId },
}

/// Follows disagreements from `start` until they end at a loop.
///
/// At each node the walk takes the disagreeing incident edge other than the
/// arrival edge with the lowest color, then lowest eid. Returns the final node
/// and the loop found there.
pub fn propagation_walk(
    g: &ColoredMultigraph,
    y: &FractionalMatching,
    y2: &FractionalMatching,
    start: NodeId,
    virtual_edge: &VirtualEdge,
) -> Result<(NodeId, EdgeId), WalkError> {
    if !g.is_tree_ignoring_loops() {
        return Err(WalkError::NotATree);
    }
    g.incidences(start).map_err(FmError::from)?;
    let mut visited = BTreeSet::new();
    let mut at = start;
    let mut arrival: Option<EdgeId> = None;
    loop {
        if !visited.insert(at) {
            return Err(WalkError::NoContinuation { node: at });
        }
        let mut load = node_weight(g, y, at)?;
        let mut load2 = node_weight(g, y2, at)?;
        if arrival.is_none() {
            load += &virtual_edge.w;
            load2 += &virtual_edge.w2;
        }
        if load != one() || load2 != one() {
            return Err(WalkError::NoContinuation { node: at });
        }
        let mut next = None;
        for inc in g.incidences(at).map_err(FmError::from)? {
            if Some(inc.eid) == arrival {
                continue;
            }
            if weight_of(y, inc.eid)? == weight_of(y2, inc.eid)? {
                continue;
            }
            let key = (inc.slot.color, inc.eid);
            if next.is_none_or(|(k, _)| key < k) {
                next = Some((key, *inc));
            }
        }
        let Some((_, inc)) = next else {
            return Err(WalkError::NoContinuation { node: at });
        };
        if inc.neighbor == at {
            return Ok((at, inc.eid));
        }
        arrival = Some(inc.eid);
        at = inc.neighbor;
    }
}
