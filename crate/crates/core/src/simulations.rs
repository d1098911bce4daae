//! Simulations between models: EC by PO (edge doubling), PO by OI (canonical
//! order on cover balls), and desk-scale checks for the OI-to-ID step.

use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::canon_order::{order_view, OrderError};
use crate::covers::{loopiness, CoverError, CoverView};
use crate::fracmatch::FractionalMatching;
use crate::graph::{
    build_graph, Color, ColoredMultigraph, EdgeId, EdgeRec, GraphError, GraphSpec, Model, NodeId,
    NodeSpec, Slot,
};
use crate::locality::{
    view_at, AlgoError, EvalError, ExplicitView, LocalAlgorithm, LocalOutput, NodeRef, View,
};
use crate::weight::{format_weight, int, one, Weight};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("expected a {expected} algorithm, got {found}")]
    ModelMismatch { expected: Model, found: Model },
    #[error("graph is not loopy")]
    NotLoopy,
    #[error("need {needed} identifiers, only {available} available")]
    InsufficientIdentifiers { needed: usize, available: usize },
    #[error("guardrail exceeded: {0}")]
    GuardrailExceeded(String),
    #[error("identifiers must be strictly increasing")]
    NotIncreasing,
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Cover(#[from] CoverError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Algo(#[from] AlgoError),
    #[error(transparent)]
    Order(#[from] OrderError),
}

fn expect_algo(a: &LocalAlgorithm, model: Model) -> Result<(), SimError> {
    if a.model() != model {
        return Err(SimError::ModelMismatch {
            expected: model,
            found: a.model(),
        });
    }
    Ok(())
}

#[derive(Debug)]
struct DoubledNode {
    inner: NodeRef,
    parent: Option<u32>,
    arrival: Option<Slot>,
    depth: usize,
    children: Vec<(Slot, u32)>,
}

/// The universal cover of the doubled graph, unrolled lazily from an EC view.
/// Every EC edge end of color c becomes an outgoing and an incoming end of
/// color c leading to the same EC neighbor.
pub struct DoubledView<'v> {
    inner: &'v dyn View,
    arena: RefCell<Vec<DoubledNode>>,
}

impl<'v> DoubledView<'v> {
    pub fn new(inner: &'v dyn View) -> DoubledView<'v> {
        DoubledView {
            inner,
            arena: RefCell::new(vec![DoubledNode {
                inner: inner.root(),
                parent: None,
                arrival: None,
                depth: 0,
                children: Vec::new(),
            }]),
        }
    }
}

impl View for DoubledView<'_> {
    fn model(&self) -> Model {
        Model::PO
    }

    fn radius(&self) -> usize {
        self.inner.radius()
    }

    fn depth(&self, n: NodeRef) -> usize {
        self.arena.borrow()[n.0 as usize].depth
    }

    fn slots(&self, n: NodeRef) -> Vec<Slot> {
        let arena = self.arena.borrow();
        let node = &arena[n.0 as usize];
        if node.depth < self.radius() {
            self.inner
                .slots(node.inner)
                .into_iter()
                .flat_map(|s| [Slot::out(s.color), Slot::inc(s.color)])
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
        if node.depth >= self.inner.radius() || !s.dir.is_directed() {
            return None;
        }
        if let Some(&(_, c)) = node.children.iter().find(|(t, _)| *t == s) {
            return Some(NodeRef(c));
        }
        let target = self.inner.follow(node.inner, Slot::undirected(s.color))?;
        let child = DoubledNode {
            inner: target,
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
        let inner = self.arena.borrow()[n.0 as usize].inner;
        self.inner.cover_key(inner)
    }
}

/// EC algorithm that runs a PO algorithm on the doubled graph and gives each
/// edge the sum of its two directed copies. Runtime is unchanged.
pub fn ec_to_po(a_po: &LocalAlgorithm) -> Result<LocalAlgorithm, SimError> {
    expect_algo(a_po, Model::PO)?;
    let inner = a_po.clone();
    let runtime = a_po.runtime_fn();
    Ok(LocalAlgorithm::new(
        format!("ec-po({})", a_po.name()),
        Model::EC,
        a_po.palette(),
        move |delta, k| runtime(delta, k),
        move |view| {
            if view.model() != Model::EC {
                return Err(AlgoError::ModelMismatch {
                    expected: Model::EC,
                    found: view.model(),
                });
            }
            let doubled = DoubledView::new(view);
            let out = inner.run(&doubled)?;
            let mut merged = LocalOutput::new();
            for s in view.slots(view.root()) {
                let get = |slot: Slot| {
                    out.get(slot)
                        .cloned()
                        .ok_or_else(|| AlgoError::Other(format!("no output for slot {slot}")))
                };
                merged.insert(s, get(Slot::out(s.color))? + get(Slot::inc(s.color))?);
            }
            Ok(merged)
        },
    ))
}

/// PO algorithm that orders its (tree-shaped) view canonically and hands it to
/// an OI algorithm. Runtime is unchanged.
pub fn po_to_oi(a_oi: &LocalAlgorithm) -> Result<LocalAlgorithm, SimError> {
    expect_algo(a_oi, Model::OI)?;
    let inner = a_oi.clone();
    let runtime = a_oi.runtime_fn();
    Ok(LocalAlgorithm::new(
        format!("po-oi({})", a_oi.name()),
        Model::PO,
        a_oi.palette(),
        move |delta, k| runtime(delta, k),
        move |view| {
            let ordered = order_view(view).map_err(|e| match e {
                OrderError::NotATree => AlgoError::NotATree,
                OrderError::WrongModel(found) => AlgoError::ModelMismatch {
                    expected: Model::PO,
                    found,
                },
                other => AlgoError::Other(other.to_string()),
            })?;
            inner.run(&ordered)
        },
    ))
}

/// The doubled graph with, for each EC edge, the eids of its directed copies.
/// A loop becomes a single directed loop.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Doubled {
    pub graph: ColoredMultigraph,
    pub copies: BTreeMap<EdgeId, Vec<EdgeId>>,
}

pub fn double_graph(g: &ColoredMultigraph) -> Result<Doubled, SimError> {
    if g.model() != Model::EC {
        return Err(SimError::ModelMismatch {
            expected: Model::EC,
            found: g.model(),
        });
    }
    let mut edges = Vec::new();
    let mut copies = BTreeMap::new();
    for e in g.edges() {
        let ends: &[(NodeId, NodeId)] = if e.is_loop() {
            &[(e.u, e.u)]
        } else {
            &[(e.u, e.v), (e.v, e.u)]
        };
        let mut ids = Vec::new();
        for &(u, v) in ends {
            let eid = edges.len() as EdgeId;
            edges.push(EdgeRec {
                eid,
                u,
                v,
                color: e.color,
                directed: true,
            });
            ids.push(eid);
        }
        copies.insert(e.eid, ids);
    }
    let graph = build_graph(GraphSpec {
        model: Model::PO,
        k: g.k(),
        nodes: g
            .node_ids()
            .map(|id| NodeSpec { id, label: None })
            .collect(),
        order: None,
        edges,
    })
    .map_err(GraphError::Invalid)?;
    Ok(Doubled { graph, copies })
}

/// First EC edge whose weight is not the sum of its directed copies' weights.
/// A loop's single directed copy counts twice.
pub fn doubling_identity_violation(
    g: &ColoredMultigraph,
    doubled: &Doubled,
    y_ec: &FractionalMatching,
    y_po: &FractionalMatching,
) -> Option<EdgeId> {
    for e in g.edges() {
        let copies = &doubled.copies[&e.eid];
        let mut sum: Weight = copies
            .iter()
            .map(|c| y_po.weight(*c).cloned().unwrap_or_else(|| int(-1)))
            .sum();
        if e.is_loop() {
            sum *= int(2);
        }
        if y_ec.weight(e.eid) != Some(&sum) {
            return Some(e.eid);
        }
    }
    None
}

/// Which chain of simulations to run an algorithm through.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Chain {
    /// EC by PO: the algorithm is a PO algorithm.
    EcPo,
    /// EC by PO by OI: the algorithm is an OI algorithm.
    EcPoOi,
}

impl std::str::FromStr for Chain {
    type Err = String;

    fn from_str(s: &str) -> Result<Chain, String> {
        match s {
            "ec-po" => Ok(Chain::EcPo),
            "ec-po-oi" => Ok(Chain::EcPoOi),
            _ => Err(format!("unknown chain {s:?} (expected ec-po or ec-po-oi)")),
        }
    }
}

/// Runs `inner` through the chain on an EC graph and checks that the result
/// is a maximal FM of `g`, that the PO algorithm's output on the doubled graph
/// is maximal, and that every EC edge weighs the sum of its directed copies.
pub fn simulate_chain(
    chain: Chain,
    inner: &LocalAlgorithm,
    g: &ColoredMultigraph,
) -> Result<Vec<CheckReport>, SimError> {
    let po = match chain {
        Chain::EcPo => {
            expect_algo(inner, Model::PO)?;
            inner.clone()
        }
        Chain::EcPoOi => po_to_oi(inner)?,
    };
    let ec = ec_to_po(&po)?;
    let y_ec = crate::locality::assemble_fm(&ec, g)?;
    let doubled = double_graph(g)?;
    let y_po = crate::locality::assemble_fm(&po, &doubled.graph)?;
    let maximal = |graph: &ColoredMultigraph, y: &FractionalMatching, name: &str| {
        let report =
            crate::fracmatch::check_maximal_fm(graph, y).expect("assembled FMs cover every edge");
        CheckReport {
            check: name.into(),
            status: if report.is_maximal() {
                Status::Pass
            } else {
                Status::Fail
            },
            counterexample: report.violations.first().map(|v| json!(v.describe())),
        }
    };
    let identity = doubling_identity_violation(g, &doubled, &y_ec, &y_po);
    Ok(vec![
        maximal(g, &y_ec, "ec_maximal"),
        maximal(&doubled.graph, &y_po, "po_maximal"),
        CheckReport {
            check: "doubling_identity".into(),
            status: if identity.is_none() {
                Status::Pass
            } else {
                Status::Fail
            },
            counterexample: identity.map(|e| json!({ "edge": e })),
        },
    ])
}

pub type BinaryFn = dyn Fn(&dyn View) -> Result<bool, AlgoError> + Send + Sync;

/// A local algorithm whose output at a node is a single bit.
#[derive(Clone)]
pub struct BinaryAlgorithm {
    name: String,
    model: Model,
    runtime: Arc<crate::locality::RuntimeFn>,
    output: Arc<BinaryFn>,
}

impl fmt::Debug for BinaryAlgorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BinaryAlgorithm")
            .field("name", &self.name)
            .field("model", &self.model)
            .finish()
    }
}

impl BinaryAlgorithm {
    pub fn new(
        name: impl Into<String>,
        model: Model,
        runtime: impl Fn(usize, Color) -> usize + Send + Sync + 'static,
        output: impl Fn(&dyn View) -> Result<bool, AlgoError> + Send + Sync + 'static,
    ) -> BinaryAlgorithm {
        BinaryAlgorithm {
            name: name.into(),
            model,
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

    pub fn runtime(&self, delta: usize, k: Color) -> usize {
        (self.runtime)(delta, k)
    }

    pub fn run(&self, view: &dyn View) -> Result<bool, AlgoError> {
        (self.output)(view)
    }

    pub fn evaluate(&self, g: &ColoredMultigraph, v: NodeId) -> Result<bool, EvalError> {
        if self.model != g.model() {
            return Err(EvalError::ModelMismatch {
                algorithm: self.model,
                graph: g.model(),
            });
        }
        if !g.model().is_anonymous() && !g.is_simple() {
            return Err(EvalError::NotSimple(g.model()));
        }
        let t = self.runtime(g.max_degree(), g.k());
        let view = view_at(g, v, t)?;
        self.run(view.as_ref())
            .map_err(|source| EvalError::Algo { node: v, source })
    }
}

/// 1 at a node iff `a` saturates it.
pub fn saturation_indicator(a: &LocalAlgorithm) -> Result<BinaryAlgorithm, SimError> {
    expect_algo(a, Model::ID)?;
    let inner = a.clone();
    let runtime = a.runtime_fn();
    Ok(BinaryAlgorithm::new(
        format!("sat:{}", a.name()),
        Model::ID,
        move |delta, k| runtime(delta, k),
        move |view| Ok(inner.run(view)?.total() == one()),
    ))
}

/// A strictly increasing list of identifiers.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u64>", into = "Vec<u64>")]
pub struct IdentifierSubset(Vec<u64>);

impl IdentifierSubset {
    pub fn new(ids: Vec<u64>) -> Result<IdentifierSubset, SimError> {
        if ids.windows(2).any(|w| w[0] >= w[1]) {
            return Err(SimError::NotIncreasing);
        }
        Ok(IdentifierSubset(ids))
    }

    /// The identifiers lo, lo+1, ..., hi.
    pub fn range(lo: u64, hi: u64) -> IdentifierSubset {
        IdentifierSubset((lo..=hi).collect())
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl TryFrom<Vec<u64>> for IdentifierSubset {
    type Error = SimError;

    fn try_from(v: Vec<u64>) -> Result<Self, SimError> {
        IdentifierSubset::new(v)
    }
}

impl From<IdentifierSubset> for Vec<u64> {
    fn from(s: IdentifierSubset) -> Vec<u64> {
        s.0
    }
}

impl fmt::Display for IdentifierSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(u64::to_string).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

/// Every (m+1)-th element of `ids`, starting with the first.
pub fn sparse_subset(ids: &IdentifierSubset, m: usize) -> IdentifierSubset {
    IdentifierSubset(ids.0.iter().copied().step_by(m + 1).collect())
}

/// Largest number of nodes within distance 2t+1 of a node in a simple graph
/// of maximum degree Δ. Saturates at `u64::MAX`.
pub fn neighborhood_bound(delta: u64, t: u64) -> u64 {
    let radius = 2 * t + 1;
    let mut total: u64 = 1;
    let mut layer: u64 = delta;
    for _ in 0..radius {
        total = total.saturating_add(layer);
        layer = layer.saturating_mul(delta.saturating_sub(1));
        if layer == 0 {
            break;
        }
    }
    total
}

pub const RAMSEY_MAX_PATTERN: usize = 3;
pub const RAMSEY_MAX_UNIVERSE: usize = 24;

/// Relabels a pattern graph with the given identifiers, in node order.
fn relabel(pattern: &ColoredMultigraph, ids: &[u64]) -> Result<ColoredMultigraph, SimError> {
    let mut spec = pattern.spec();
    for (node, &id) in spec.nodes.iter_mut().zip(ids) {
        node.label = Some(id);
    }
    Ok(build_graph(spec).map_err(GraphError::Invalid)?)
}

/// Ranks of a tuple of distinct identifiers.
fn order_type(ids: &[u64]) -> Vec<usize> {
    ids.iter()
        .map(|x| ids.iter().filter(|y| *y < x).count())
        .collect()
}

struct PatternProbe<'a> {
    algo: &'a BinaryAlgorithm,
    pattern: &'a ColoredMultigraph,
    cache: HashMap<Vec<u64>, Vec<bool>>,
}

impl PatternProbe<'_> {
    fn outputs(&mut self, ids: &[u64]) -> Result<Vec<bool>, SimError> {
        if let Some(o) = self.cache.get(ids) {
            return Ok(o.clone());
        }
        let g = relabel(self.pattern, ids)?;
        let out = g
            .node_ids()
            .map(|v| self.algo.evaluate(&g, v))
            .collect::<Result<Vec<bool>, EvalError>>()?;
        self.cache.insert(ids.to_vec(), out.clone());
        Ok(out)
    }
}

/// Injective tuples of length p over `pool` that use `must` (if given).
fn tuples(pool: &[u64], p: usize, must: Option<u64>) -> Vec<Vec<u64>> {
    fn rec(pool: &[u64], p: usize, cur: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if cur.len() == p {
            out.push(cur.clone());
            return;
        }
        for &x in pool {
            if !cur.contains(&x) {
                cur.push(x);
                rec(pool, p, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(pool, p, &mut Vec::new(), &mut out);
    if let Some(m) = must {
        out.retain(|t| t.contains(&m));
    }
    out
}

fn check_pattern(
    algo: &BinaryAlgorithm,
    pattern: &ColoredMultigraph,
    universe: usize,
) -> Result<(), SimError> {
    if algo.model() != Model::ID || pattern.model() != Model::ID {
        return Err(SimError::ModelMismatch {
            expected: Model::ID,
            found: if algo.model() != Model::ID {
                algo.model()
            } else {
                pattern.model()
            },
        });
    }
    if pattern.node_count() > RAMSEY_MAX_PATTERN {
        return Err(SimError::GuardrailExceeded(format!(
            "pattern has {} nodes (at most {RAMSEY_MAX_PATTERN})",
            pattern.node_count()
        )));
    }
    if universe > RAMSEY_MAX_UNIVERSE {
        return Err(SimError::GuardrailExceeded(format!(
            "universe has {universe} identifiers (at most {RAMSEY_MAX_UNIVERSE})"
        )));
    }
    Ok(())
}

/// Searches for `q` identifiers from `universe` on which the outputs of
/// `algo` at every node of `pattern` depend only on the relative order of
/// the identifiers. Candidates are explored depth-first, trying to leave
/// each identifier out before taking it in.
pub fn ramsey_search(
    algo: &BinaryAlgorithm,
    pattern: &ColoredMultigraph,
    universe: &IdentifierSubset,
    q: usize,
) -> Result<Option<IdentifierSubset>, SimError> {
    check_pattern(algo, pattern, universe.len())?;
    if q > universe.len() {
        return Err(SimError::GuardrailExceeded(format!(
            "q = {q} exceeds the universe size {}",
            universe.len()
        )));
    }
    let mut probe = PatternProbe {
        algo,
        pattern,
        cache: HashMap::new(),
    };
    let p = pattern.node_count();
    let ids = universe.as_slice();

    type Seen = BTreeMap<Vec<usize>, Vec<bool>>;
    fn dfs(
        probe: &mut PatternProbe<'_>,
        ids: &[u64],
        p: usize,
        q: usize,
        i: usize,
        chosen: &mut Vec<u64>,
        seen: &Seen,
    ) -> Result<bool, SimError> {
        if chosen.len() == q {
            return Ok(true);
        }
        if ids.len() - i < q - chosen.len() {
            return Ok(false);
        }
        if dfs(probe, ids, p, q, i + 1, chosen, seen)? {
            return Ok(true);
        }
        chosen.push(ids[i]);
        let mut next = seen.clone();
        let mut consistent = true;
        for t in tuples(chosen, p, Some(ids[i])) {
            let out = probe.outputs(&t)?;
            let ty = order_type(&t);
            match next.get(&ty) {
                Some(prev) if *prev != out => {
                    consistent = false;
                    break;
                }
                Some(_) => {}
                None => {
                    next.insert(ty, out);
                }
            }
        }
        if consistent && dfs(probe, ids, p, q, i + 1, chosen, &next)? {
            return Ok(true);
        }
        chosen.pop();
        Ok(false)
    }

    let mut chosen = Vec::new();
    if dfs(&mut probe, ids, p, q, 0, &mut chosen, &BTreeMap::new())? {
        Ok(Some(IdentifierSubset(chosen)))
    } else {
        Ok(None)
    }
}

/// Outcome of exhaustively re-checking a subset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvarianceTally {
    pub assignments: usize,
    pub inconsistent: usize,
}

/// Runs `algo` under every assignment of identifiers from `subset` to the
/// pattern and counts assignments whose outputs differ from the first
/// assignment of the same order type.
pub fn verify_order_invariant(
    algo: &BinaryAlgorithm,
    pattern: &ColoredMultigraph,
    subset: &IdentifierSubset,
) -> Result<InvarianceTally, SimError> {
    check_pattern(algo, pattern, subset.len())?;
    let mut probe = PatternProbe {
        algo,
        pattern,
        cache: HashMap::new(),
    };
    let mut seen: BTreeMap<Vec<usize>, Vec<bool>> = BTreeMap::new();
    let mut tally = InvarianceTally {
        assignments: 0,
        inconsistent: 0,
    };
    for t in tuples(subset.as_slice(), pattern.node_count(), None) {
        let out = probe.outputs(&t)?;
        tally.assignments += 1;
        let prev = seen.entry(order_type(&t)).or_insert_with(|| out.clone());
        if *prev != out {
            tally.inconsistent += 1;
        }
    }
    Ok(tally)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check: String,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<serde_json::Value>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

fn describe_output(out: &LocalOutput) -> serde_json::Value {
    serde_json::to_value(out.to_doc()).expect("outputs serialize")
}

fn labeled_view(ordered: &ExplicitView, by_rank: &[u64]) -> ExplicitView {
    let ranks = ordered.ranks().expect("ordered view").to_vec();
    let labels = ranks.iter().map(|&r| by_rank[r as usize]).collect();
    ordered
        .clone()
        .without_decorations()
        .with_model(Model::ID)
        .with_labels(labels)
}

enum Finding {
    Unsaturated(serde_json::Value),
    Changed(serde_json::Value),
}

/// Single-identifier moves from `from` to `to`, both increasing: first raise
/// towards the pointwise maximum from the top rank down, then lower from the
/// bottom rank up. Every intermediate assignment is increasing.
fn identifier_chain(from: &[u64], to: &[u64]) -> Vec<Vec<u64>> {
    let mut steps = Vec::new();
    let mut cur = from.to_vec();
    for i in (0..cur.len()).rev() {
        if to[i] > cur[i] {
            cur[i] = to[i];
            steps.push(cur.clone());
        }
    }
    for i in 0..cur.len() {
        if to[i] < cur[i] {
            cur[i] = to[i];
            steps.push(cur.clone());
        }
    }
    steps
}

fn probe_node(
    a: &LocalAlgorithm,
    g: &ColoredMultigraph,
    v: NodeId,
    ids: &[u64],
    trials: usize,
    seed: u64,
) -> Result<Vec<Finding>, SimError> {
    let t = a.runtime(g.max_degree(), g.k());
    let cover = CoverView::new(g, v, t)?;
    let ordered = order_view(&cover)?;
    let n = ordered.node_count();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (v as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    let draw = |rng: &mut ChaCha8Rng| -> Vec<u64> {
        let mut pick = sample(rng, ids.len(), n).into_vec();
        pick.sort_unstable();
        pick.into_iter().map(|i| ids[i]).collect()
    };
    let run = |by_rank: &[u64]| -> Result<LocalOutput, SimError> {
        Ok(a.run(&labeled_view(&ordered, by_rank))?)
    };
    let mut findings = Vec::new();
    let mut unsaturated_seen = false;
    for _ in 0..trials {
        let first = draw(&mut rng);
        let second = draw(&mut rng);
        let mut prev_ids = first.clone();
        let mut prev = run(&first)?;
        let mut chain = vec![first.clone()];
        chain.extend(identifier_chain(&first, &second));
        for (step, cur_ids) in chain.into_iter().enumerate() {
            let cur = if step == 0 {
                prev.clone()
            } else {
                run(&cur_ids)?
            };
            if !unsaturated_seen && cur.total() != one() {
                unsaturated_seen = true;
                findings.push(Finding::Unsaturated(json!({
                    "node": v,
                    "assignment": cur_ids,
                    "output": describe_output(&cur),
                    "load": format_weight(&cur.total()),
                })));
            }
            if cur != prev {
                findings.push(Finding::Changed(json!({
                    "node": v,
                    "first": { "assignment": prev_ids, "output": describe_output(&prev) },
                    "second": { "assignment": cur_ids, "output": describe_output(&cur) },
                })));
                return Ok(findings);
            }
            prev = cur;
            prev_ids = cur_ids;
        }
    }
    Ok(findings)
}

/// Runs an ID algorithm on canonically ordered cover balls of a loopy PO
/// graph under sampled order-respecting identifier assignments from `ids`.
/// Reports whether the root is always saturated and whether outputs stay the
/// same when identifiers change one node at a time. Every node is a root.
/// Assignments are listed by rank: the i-th identifier goes to the node of
/// rank i.
pub fn check_order_invariance(
    a: &LocalAlgorithm,
    g: &ColoredMultigraph,
    ids: &IdentifierSubset,
    trials: usize,
    seed: u64,
) -> Result<Vec<CheckReport>, SimError> {
    expect_algo(a, Model::ID)?;
    if g.model() != Model::PO {
        return Err(SimError::ModelMismatch {
            expected: Model::PO,
            found: g.model(),
        });
    }
    if loopiness(g)? == 0 {
        return Err(SimError::NotLoopy);
    }
    let t = a.runtime(g.max_degree(), g.k());
    for v in g.node_ids() {
        let needed = crate::locality::materialize(&CoverView::new(g, v, t)?).node_count();
        if needed > ids.len() {
            return Err(SimError::InsufficientIdentifiers {
                needed,
                available: ids.len(),
            });
        }
    }
    let nodes: Vec<NodeId> = g.node_ids().collect();
    let per_node = nodes
        .par_iter()
        .map(|&v| probe_node(a, g, v, ids.as_slice(), trials, seed))
        .collect::<Result<Vec<_>, SimError>>()?;
    let mut saturation = None;
    let mut invariance = None;
    for finding in per_node.into_iter().flatten() {
        match finding {
            Finding::Unsaturated(c) => {
                saturation.get_or_insert(c);
            }
            Finding::Changed(c) => {
                invariance.get_or_insert(c);
            }
        }
    }
    let report = |check: &str, c: Option<serde_json::Value>| CheckReport {
        check: check.into(),
        status: if c.is_some() {
            Status::Fail
        } else {
            Status::Pass
        },
        counterexample: c,
    };
    Ok(vec![
        report("saturation", saturation),
        report("order_invariance", invariance),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algo_zoo::{constant, greedy_by_color, id_greedy, oi_greedy, parity, po_greedy};
    use crate::fracmatch::check_maximal_fm;
    use crate::graph::GraphBuilder;
    use crate::locality::{assemble_fm, evaluate, neighborhood};
    use crate::weight::ratio;

    fn k2() -> ColoredMultigraph {
        GraphBuilder::new(Model::EC, 1)
            .nodes([0, 1])
            .edge(0, 1, 1)
            .build()
            .unwrap()
    }

    #[test]
    fn doubled_k2() {
        let g = k2();
        let d = double_graph(&g).unwrap();
        assert_eq!(d.graph.edge_count(), 2);
        assert_eq!(d.graph.degree(0).unwrap(), 2);
        let y_po = assemble_fm(&po_greedy(1), &d.graph).unwrap();
        assert_eq!(y_po.weight(0), Some(&ratio(1, 2)));
        let a = ec_to_po(&po_greedy(1)).unwrap();
        assert_eq!(a.runtime(1, 1), 1);
        let y = assemble_fm(&a, &g).unwrap();
        assert_eq!(y.weight(0), Some(&one()));
        assert_eq!(doubling_identity_violation(&g, &d, &y, &y_po), None);
    }

    #[test]
    fn doubled_loops() {
        let g = GraphBuilder::new(Model::EC, 2)
            .node(0)
            .edge(0, 0, 1)
            .edge(0, 0, 2)
            .build()
            .unwrap();
        let a = ec_to_po(&po_greedy(2)).unwrap();
        let y = assemble_fm(&a, &g).unwrap();
        assert!(check_maximal_fm(&g, &y).unwrap().is_maximal());
        assert_eq!(y, assemble_fm(&greedy_by_color(2), &g).unwrap());
        let d = double_graph(&g).unwrap();
        let y_po = assemble_fm(&po_greedy(2), &d.graph).unwrap();
        assert_eq!(doubling_identity_violation(&g, &d, &y, &y_po), None);
    }

    #[test]
    fn ordering_chain_matches_greedy() {
        let g = GraphBuilder::new(Model::EC, 3)
            .nodes(0..3)
            .edge(0, 1, 1)
            .edge(1, 2, 2)
            .edge(0, 0, 3)
            .edge(2, 2, 1)
            .build()
            .unwrap();
        let chain = ec_to_po(&po_to_oi(&oi_greedy(3)).unwrap()).unwrap();
        for v in g.node_ids() {
            assert_eq!(
                evaluate(&chain, &g, v).unwrap(),
                evaluate(&greedy_by_color(3), &g, v).unwrap()
            );
        }
    }

    #[test]
    fn model_checks() {
        assert!(ec_to_po(&greedy_by_color(2)).is_err());
        assert!(po_to_oi(&po_greedy(2)).is_err());
        assert!(saturation_indicator(&greedy_by_color(2)).is_err());
    }

    #[test]
    fn saturation_indicator_examples() {
        let g = GraphBuilder::new(Model::ID, 1)
            .labeled(0, 5)
            .labeled(1, 9)
            .labeled(2, 4)
            .edge(0, 1, 1)
            .build()
            .unwrap();
        let s = saturation_indicator(&id_greedy(1)).unwrap();
        assert!(s.evaluate(&g, 0).unwrap());
        assert!(s.evaluate(&g, 1).unwrap());
        assert!(!s.evaluate(&g, 2).unwrap());
    }

    #[test]
    fn sparse_subsets() {
        let i = IdentifierSubset::range(1, 20);
        assert_eq!(sparse_subset(&i, 3).as_slice(), &[1, 5, 9, 13, 17]);
        let i = IdentifierSubset::new(vec![2, 4, 6]).unwrap();
        assert_eq!(sparse_subset(&i, 5).as_slice(), &[2]);
        assert!(IdentifierSubset::new(vec![3, 3]).is_err());
    }

    #[test]
    fn neighborhood_bounds() {
        assert_eq!(neighborhood_bound(2, 0), 3);
        assert_eq!(neighborhood_bound(3, 0), 4);
        assert_eq!(neighborhood_bound(3, 1), 1 + 3 + 6 + 12);
        assert_eq!(neighborhood_bound(1, 5), 2);
    }

    fn single() -> ColoredMultigraph {
        GraphBuilder::new(Model::ID, 1)
            .labeled(0, 1)
            .build()
            .unwrap()
    }

    #[test]
    fn ramsey_examples() {
        let u = IdentifierSubset::range(1, 6);
        let found = ramsey_search(&parity(), &single(), &u, 3).unwrap().unwrap();
        assert_eq!(found.as_slice(), &[2, 4, 6]);
        let tally = verify_order_invariant(&parity(), &single(), &found).unwrap();
        assert_eq!(tally.inconsistent, 0);
        assert_eq!(ramsey_search(&parity(), &single(), &u, 4).unwrap(), None);
        let c = ramsey_search(&constant(true), &single(), &u, 3)
            .unwrap()
            .unwrap();
        assert_eq!(c.as_slice(), &[4, 5, 6]);
        assert!(matches!(
            ramsey_search(&parity(), &single(), &IdentifierSubset::range(1, 25), 2),
            Err(SimError::GuardrailExceeded(_))
        ));
    }

    #[test]
    fn identifier_chains_stay_increasing() {
        let from = [1, 4, 9, 10];
        let to = [3, 5, 6, 12];
        let steps = identifier_chain(&from, &to);
        assert_eq!(steps.last().unwrap(), &to.to_vec());
        for s in &steps {
            assert!(s.windows(2).all(|w| w[0] < w[1]));
        }
        let mut prev = from.to_vec();
        for s in steps {
            assert_eq!(s.iter().zip(&prev).filter(|(a, b)| a != b).count(), 1);
            prev = s;
        }
    }

    fn loopy_po() -> ColoredMultigraph {
        GraphBuilder::new(Model::PO, 2)
            .node(0)
            .arc(0, 0, 1)
            .arc(0, 0, 2)
            .build()
            .unwrap()
    }

    #[test]
    fn label_blind_algorithms_pass() {
        let ids = IdentifierSubset::range(1, 200);
        let r = check_order_invariance(&id_greedy(2), &loopy_po(), &ids, 3, 1).unwrap();
        assert!(r.iter().all(CheckReport::passed), "{r:?}");
        assert_eq!(
            r,
            check_order_invariance(&id_greedy(2), &loopy_po(), &ids, 3, 1).unwrap()
        );
    }

    #[test]
    fn label_reading_algorithms_fail() {
        let base = id_greedy(2);
        let peek = LocalAlgorithm::new(
            "peek",
            Model::ID,
            2,
            |_, _| 2,
            move |view| {
                let mut out = base.run(view)?;
                let first = view.slots(view.root())[0];
                let label = view.label(view.root()).unwrap_or(0) as i64;
                let w = out.get(first).unwrap().clone() + ratio(label, 1000);
                out.insert(first, w);
                Ok(out)
            },
        );
        let ids = IdentifierSubset::range(1, 200);
        let r = check_order_invariance(&peek, &loopy_po(), &ids, 2, 5).unwrap();
        assert_eq!(r[1].check, "order_invariance");
        assert_eq!(r[1].status, Status::Fail);
        let c = r[1].counterexample.as_ref().unwrap();
        assert_ne!(c["first"]["assignment"], c["second"]["assignment"]);
    }

    #[test]
    fn too_few_identifiers() {
        let ids = IdentifierSubset::range(1, 5);
        assert!(matches!(
            check_order_invariance(&id_greedy(2), &loopy_po(), &ids, 1, 0),
            Err(SimError::InsufficientIdentifiers { .. })
        ));
    }

    #[test]
    fn doubled_view_degree() {
        let g = k2();
        let ball = CoverView::new(&g, 0, 1).unwrap();
        let d = DoubledView::new(&ball);
        assert_eq!(d.slots(d.root()), vec![Slot::out(1), Slot::inc(1)]);
        let n = neighborhood(&g, 0, 1).unwrap();
        let dn = DoubledView::new(&n);
        assert_eq!(dn.slots(dn.root()).len(), 2);
    }
}
