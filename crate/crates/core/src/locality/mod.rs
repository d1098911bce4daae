//! Views, local algorithms, and evaluation.
//!
//! A local algorithm never sees a graph, only a [`View`] of radius equal to its
//! runtime. On EC and PO graphs the view is a ball of the universal cover, so
//! outputs are invariant under lifts by construction.

pub mod code;
pub mod explicit;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::covers::CoverView;
use crate::fracmatch::FractionalMatching;
use crate::graph::{Color, ColoredMultigraph, EdgeId, GraphError, Model, NodeId, Slot, SlotDir};
use crate::weight::{format_weight, in_unit_interval, zero, Weight, WeightText};

pub use code::{bfs_code, canonical_code, graph_canonical_form, CanonicalCode};
pub use explicit::{materialize, neighborhood, ExplicitView};

/// Opaque handle to a node of a view.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeRef(pub u32);

/// A rooted ball. Nodes at depth equal to the radius expose only the edge ends
/// leading back towards the root; every other node exposes all its slots.
pub trait View {
    fn model(&self) -> Model;
    fn radius(&self) -> usize;
    fn root(&self) -> NodeRef {
        NodeRef(0)
    }
    fn depth(&self, n: NodeRef) -> usize;
    /// Visible slots at `n`, ascending.
    fn slots(&self, n: NodeRef) -> Vec<Slot>;
    fn follow(&self, n: NodeRef, s: Slot) -> Option<NodeRef>;
    fn label(&self, _n: NodeRef) -> Option<u64> {
        None
    }
    fn rank(&self, _n: NodeRef) -> Option<u32> {
        None
    }
    fn is_tree(&self) -> bool;
    /// Nodes of a cover ball with equal keys have isomorphic undecorated
    /// infinite neighborhoods. Used only as a memoization hint.
    fn cover_key(&self, _n: NodeRef) -> Option<u64> {
        None
    }
}

/// Weights an algorithm assigns to the edge ends at its root.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct LocalOutput(BTreeMap<Slot, Weight>);

impl LocalOutput {
    pub fn new() -> LocalOutput {
        LocalOutput::default()
    }

    pub fn insert(&mut self, slot: Slot, w: Weight) {
        self.0.insert(slot, w);
    }

    pub fn get(&self, slot: Slot) -> Option<&Weight> {
        self.0.get(&slot)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Slot, &Weight)> {
        self.0.iter()
    }

    pub fn slots(&self) -> impl Iterator<Item = Slot> + '_ {
        self.0.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Sum of all entries; a loop entry counts once.
    pub fn total(&self) -> Weight {
        self.0.values().fold(zero(), |acc, w| acc + w)
    }

    pub fn to_doc(&self) -> OutputDoc {
        OutputDoc {
            slots: self
                .0
                .iter()
                .map(|(s, w)| SlotWeight {
                    color: s.color,
                    dir: s.dir,
                    w: WeightText(w.clone()),
                })
                .collect(),
        }
    }

    pub fn from_doc(doc: &OutputDoc) -> LocalOutput {
        LocalOutput(
            doc.slots
                .iter()
                .map(|e| (Slot::new(e.color, e.dir), e.w.0.clone()))
                .collect(),
        )
    }
}

impl FromIterator<(Slot, Weight)> for LocalOutput {
    fn from_iter<I: IntoIterator<Item = (Slot, Weight)>>(iter: I) -> Self {
        LocalOutput(iter.into_iter().collect())
    }
}

impl fmt::Display for LocalOutput {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|(s, w)| format!("{s}={}", format_weight(w)))
            .collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlotWeight {
    pub color: Color,
    pub dir: SlotDir,
    pub w: WeightText,
}

/// Serialized form: `{"slots": [{"color", "dir", "w"}]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputDoc {
    pub slots: Vec<SlotWeight>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgoError {
    #[error("view of radius {radius} is too shallow: needed the slots of a node at depth {depth}")]
    ViewTooShallow { depth: usize, radius: usize },
    #[error("color {color} exceeds the palette size {palette}")]
    PaletteTooSmall { color: Color, palette: Color },
    #[error("view is not tree-shaped")]
    NotATree,
    #[error("expected a {expected} view, got {found}")]
    ModelMismatch { expected: Model, found: Model },
    #[error("{0}")]
    Other(String),
}

pub type OutputFn = dyn Fn(&dyn View) -> Result<LocalOutput, AlgoError> + Send + Sync;
pub type RuntimeFn = dyn Fn(usize, Color) -> usize + Send + Sync;

/// A local algorithm: a runtime declared as a function of (Δ, k) and an output
/// function of the radius-t view.
#[derive(Clone)]
pub struct LocalAlgorithm {
    name: String,
    model: Model,
    palette: Color,
    runtime: Arc<RuntimeFn>,
    output: Arc<OutputFn>,
}

impl fmt::Debug for LocalAlgorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LocalAlgorithm")
            .field("name", &self.name)
            .field("model", &self.model)
            .field("palette", &self.palette)
            .finish()
    }
}

impl LocalAlgorithm {
    pub fn new(
        name: impl Into<String>,
        model: Model,
        palette: Color,
        runtime: impl Fn(usize, Color) -> usize + Send + Sync + 'static,
        output: impl Fn(&dyn View) -> Result<LocalOutput, AlgoError> + Send + Sync + 'static,
    ) -> LocalAlgorithm {
        LocalAlgorithm {
            name: name.into(),
            model,
            palette,
            runtime: Arc::new(runtime),
            output: Arc::new(output),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn model(&self) -> Model {
        self.model
    }

    pub fn palette(&self) -> Color {
        self.palette
    }

    pub fn runtime(&self, delta: usize, k: Color) -> usize {
        (self.runtime)(delta, k)
    }

    pub fn runtime_fn(&self) -> Arc<RuntimeFn> {
        self.runtime.clone()
    }

    pub fn output_fn(&self) -> Arc<OutputFn> {
        self.output.clone()
    }

    pub fn run(&self, view: &dyn View) -> Result<LocalOutput, AlgoError> {
        (self.output)(view)
    }

    pub fn renamed(mut self, name: impl Into<String>) -> LocalAlgorithm {
        self.name = name.into();
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("algorithm expects {algorithm} graphs, got {graph}")]
    ModelMismatch { algorithm: Model, graph: Model },
    #[error("{0} algorithms run on simple graphs only")]
    NotSimple(Model),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("algorithm failed at node {node}: {source}")]
    Algo { node: NodeId, source: AlgoError },
    #[error("output at node {node} has no entry for slot {slot}")]
    MissingSlot { node: NodeId, slot: Slot },
    #[error("output at node {node} has an entry for absent slot {slot}")]
    ExtraSlot { node: NodeId, slot: Slot },
    #[error("output at node {node} puts weight {weight} on slot {slot}")]
    OutOfRange {
        node: NodeId,
        slot: Slot,
        weight: String,
    },
    #[error(
        "directed loop of color {color} at node {node} gets different weights as head and tail"
    )]
    LoopMismatch { node: NodeId, color: Color },
    #[error("endpoints {u} and {v} disagree on edge {eid}: {wu} vs {wv}")]
    InconsistentOutputs {
        eid: EdgeId,
        u: NodeId,
        v: NodeId,
        wu: String,
        wv: String,
    },
}

/// The view an algorithm of runtime `t` gets at `v`.
pub fn view_at<'g>(
    g: &'g ColoredMultigraph,
    v: NodeId,
    t: usize,
) -> Result<Box<dyn View + 'g>, GraphError> {
    if g.model().is_anonymous() {
        Ok(Box::new(CoverView::new(g, v, t)?))
    } else {
        Ok(Box::new(neighborhood(g, v, t)?))
    }
}

/// Output at `v` keyed by the slots of the view's root. On multigraphs a loop
/// shows up as the cover edge(s) it lifts to.
pub fn evaluate_raw(
    a: &LocalAlgorithm,
    g: &ColoredMultigraph,
    v: NodeId,
) -> Result<LocalOutput, EvalError> {
    if a.model() != g.model() {
        return Err(EvalError::ModelMismatch {
            algorithm: a.model(),
            graph: g.model(),
        });
    }
    if !g.model().is_anonymous() && !g.is_simple() {
        return Err(EvalError::NotSimple(g.model()));
    }
    let t = a.runtime(g.max_degree(), g.k());
    let view = view_at(g, v, t)?;
    let out = a
        .run(view.as_ref())
        .map_err(|source| EvalError::Algo { node: v, source })?;
    let root_slots = view.slots(view.root());
    for &s in &root_slots {
        match out.get(s) {
            None => return Err(EvalError::MissingSlot { node: v, slot: s }),
            Some(w) if !in_unit_interval(w) => {
                return Err(EvalError::OutOfRange {
                    node: v,
                    slot: s,
                    weight: format_weight(w),
                })
            }
            Some(_) => {}
        }
    }
    if let Some(extra) = out.slots().find(|s| !root_slots.contains(s)) {
        return Err(EvalError::ExtraSlot {
            node: v,
            slot: extra,
        });
    }
    Ok(out)
}

/// Output at `v` keyed by the slots of `g`: loops appear as `(color, loop)`.
pub fn evaluate(
    a: &LocalAlgorithm,
    g: &ColoredMultigraph,
    v: NodeId,
) -> Result<LocalOutput, EvalError> {
    let raw = evaluate_raw(a, g, v)?;
    if raw.is_empty() {
        return Ok(raw);
    }
    let mut out = LocalOutput::new();
    for inc in g.incidences(v)? {
        let w = raw
            .get(inc.slot)
            .expect("raw output covers every slot")
            .clone();
        if g.edge(inc.eid).expect("incident edge").is_loop() {
            let key = Slot::looped(inc.slot.color);
            if let Some(prev) = out.get(key) {
                if *prev != w {
                    return Err(EvalError::LoopMismatch {
                        node: v,
                        color: inc.slot.color,
                    });
                }
            }
            out.insert(key, w);
        } else {
            out.insert(inc.slot, w);
        }
    }
    Ok(out)
}

/// Evaluates at every node, in parallel.
pub fn evaluate_all(
    a: &LocalAlgorithm,
    g: &ColoredMultigraph,
) -> Result<BTreeMap<NodeId, LocalOutput>, EvalError> {
    let nodes: Vec<NodeId> = g.node_ids().collect();
    nodes
        .par_iter()
        .map(|&v| evaluate(a, g, v).map(|o| (v, o)))
        .collect()
}

/// Reads an FM off per-node outputs, checking that the two ends of every
/// non-loop edge agree.
pub fn fm_from_outputs(
    g: &ColoredMultigraph,
    outputs: &BTreeMap<NodeId, LocalOutput>,
) -> Result<FractionalMatching, EvalError> {
    let lookup = |node: NodeId, slot: Slot| -> Result<Weight, EvalError> {
        outputs
            .get(&node)
            .and_then(|o| o.get(slot))
            .cloned()
            .ok_or(EvalError::MissingSlot { node, slot })
    };
    let mut weights = BTreeMap::new();
    for e in g.edges() {
        if e.is_loop() {
            weights.insert(e.eid, lookup(e.u, Slot::looped(e.color))?);
            continue;
        }
        let (su, sv) = if e.directed {
            (Slot::out(e.color), Slot::inc(e.color))
        } else {
            (Slot::undirected(e.color), Slot::undirected(e.color))
        };
        let wu = lookup(e.u, su)?;
        let wv = lookup(e.v, sv)?;
        if wu != wv {
            return Err(EvalError::InconsistentOutputs {
                eid: e.eid,
                u: e.u,
                v: e.v,
                wu: format_weight(&wu),
                wv: format_weight(&wv),
            });
        }
        weights.insert(e.eid, wu);
    }
    Ok(FractionalMatching::new(weights))
}

pub fn assemble_fm(
    a: &LocalAlgorithm,
    g: &ColoredMultigraph,
) -> Result<FractionalMatching, EvalError> {
    fm_from_outputs(g, &evaluate_all(a, g)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphBuilder;

    fn path3() -> ColoredMultigraph {
        GraphBuilder::new(Model::EC, 2)
            .nodes(0..3)
            .edge(0, 1, 1)
            .edge(1, 2, 2)
            .build()
            .unwrap()
    }

    #[test]
    fn radius_zero_is_bare_root() {
        let g = GraphBuilder::new(Model::EC, 2)
            .node(0)
            .edge(0, 0, 1)
            .edge(0, 0, 2)
            .build()
            .unwrap();
        let v = neighborhood(&g, 0, 0).unwrap();
        assert_eq!(v.node_count(), 1);
        assert!(v.slots(v.root()).is_empty());
        assert!(v.is_tree());
    }

    #[test]
    fn center_of_path_sees_whole_path() {
        let g = path3();
        let v = neighborhood(&g, 1, 1).unwrap();
        assert_eq!(v.node_count(), 3);
        assert_eq!(
            v.slots(v.root()),
            vec![Slot::undirected(1), Slot::undirected(2)]
        );
        assert!(v.is_tree());
    }

    #[test]
    fn edges_between_boundary_nodes_are_invisible() {
        let tri = GraphBuilder::new(Model::EC, 3)
            .nodes(0..3)
            .edge(0, 1, 1)
            .edge(1, 2, 2)
            .edge(2, 0, 3)
            .build()
            .unwrap();
        let v1 = neighborhood(&tri, 0, 1).unwrap();
        assert!(v1.is_tree());
        let v2 = neighborhood(&tri, 0, 2).unwrap();
        assert!(!v2.is_tree());
    }

    #[test]
    fn loops_make_views_non_trees() {
        let g = GraphBuilder::new(Model::EC, 1)
            .node(0)
            .edge(0, 0, 1)
            .build()
            .unwrap();
        let v = neighborhood(&g, 0, 1).unwrap();
        assert!(!v.is_tree());
        assert_eq!(v.follow(v.root(), Slot::undirected(1)), Some(v.root()));
    }

    #[test]
    fn codes_ignore_node_ids() {
        let a = path3();
        let b = GraphBuilder::new(Model::EC, 2)
            .nodes([10, 20, 30])
            .edge(30, 20, 2)
            .edge(20, 10, 1)
            .build()
            .unwrap();
        for t in 0..3 {
            assert_eq!(
                canonical_code(&neighborhood(&a, 1, t).unwrap()),
                canonical_code(&neighborhood(&b, 20, t).unwrap())
            );
        }
        assert_ne!(
            canonical_code(&neighborhood(&a, 0, 1).unwrap()),
            canonical_code(&neighborhood(&a, 2, 1).unwrap())
        );
        assert_eq!(graph_canonical_form(&a), graph_canonical_form(&b));
    }

    #[test]
    fn loop_multisets_distinguish_codes() {
        let one = GraphBuilder::new(Model::EC, 2)
            .node(0)
            .edge(0, 0, 1)
            .build()
            .unwrap();
        let two = GraphBuilder::new(Model::EC, 2)
            .node(0)
            .edge(0, 0, 2)
            .build()
            .unwrap();
        assert_eq!(
            canonical_code(&neighborhood(&one, 0, 0).unwrap()),
            canonical_code(&neighborhood(&two, 0, 0).unwrap())
        );
        assert_ne!(
            canonical_code(&neighborhood(&one, 0, 1).unwrap()),
            canonical_code(&neighborhood(&two, 0, 1).unwrap())
        );
    }

    #[test]
    fn output_doc_round_trip() {
        let out: LocalOutput = [
            (Slot::looped(1), crate::weight::ratio(1, 2)),
            (Slot::out(2), zero()),
        ]
        .into_iter()
        .collect();
        let json = serde_json::to_string(&out.to_doc()).unwrap();
        assert_eq!(
            json,
            r#"{"slots":[{"color":1,"dir":"loop","w":"1/2"},{"color":2,"dir":"out","w":"0"}]}"#
        );
        let back: OutputDoc = serde_json::from_str(&json).unwrap();
        assert_eq!(LocalOutput::from_doc(&back), out);
    }
}
