//! The unfold-and-mix adversary against EC algorithms for maximal fractional
//! matching. It either builds a chain of graph pairs that certifies a runtime
//! lower bound for a concrete algorithm, or finds a simple graph on which the
//! algorithm's output is not a maximal fractional matching.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algo_zoo::{resolve, ZooError};
use crate::covers::{
    minimal_simple_lift, unfold_loop, verify_covering, CoverError, CoverView, CoveringMap,
};
use crate::fracmatch::{
    check_maximal_fm, node_weight, propagation_walk, FmDoc, FmError, FmViolation,
    FractionalMatching, ViolationKind, VirtualEdge, WalkError,
};
use crate::graph::{
    build_graph, Color, ColoredMultigraph, EdgeId, EdgeRec, GraphDoc, GraphError, GraphSpec, Model,
    NodeId, NodeSpec, Slot,
};
use crate::locality::{
    canonical_code, evaluate, evaluate_all, fm_from_outputs, EvalError, LocalAlgorithm,
    LocalOutput, OutputDoc,
};
use crate::weight::{format_weight, one, zero, Weight};

pub const DEFAULT_MAX_DELTA: usize = 14;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AdversaryError {
    #[error("Δ must be at least 2, got {0}")]
    DeltaTooSmall(usize),
    #[error("Δ = {delta} exceeds the guardrail {max}")]
    GuardrailExceeded { delta: usize, max: usize },
    #[error("algorithm palette {palette} is smaller than Δ = {delta}")]
    PaletteTooSmall { palette: Color, delta: usize },
    #[error("adversary needs an EC algorithm, got {0}")]
    ModelMismatch(Model),
    #[error("loops {0} and {1} have different colors")]
    ColorMismatch(EdgeId, EdgeId),
    #[error("edge {0} is not a loop")]
    NotALoop(EdgeId),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Cover(#[from] CoverError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Fm(#[from] FmError),
    #[error(transparent)]
    Zoo(#[from] ZooError),
    #[error("internal invariant broken: {0}")]
    InternalInvariantBroken(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AdversaryConfig {
    pub max_delta: usize,
    pub lift_seed: u64,
}

impl Default for AdversaryConfig {
    fn default() -> Self {
        AdversaryConfig {
            max_delta: DEFAULT_MAX_DELTA,
            lift_seed: 0,
        }
    }
}

/// Which graph the pair was derived from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    Base,
    GSide,
    HSide,
}

/// Graphs G_i, H_i with nodes g, h whose radius-i views agree while the
/// algorithm weighs their color-c loops differently.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WitnessPair {
    pub i: usize,
    pub g_graph: ColoredMultigraph,
    pub h_graph: ColoredMultigraph,
    pub g: NodeId,
    pub h: NodeId,
    pub c: Color,
    pub out_g: LocalOutput,
    pub out_h: LocalOutput,
    pub branch: Branch,
}

/// A simple lift of a multigraph on which the algorithm's output is not a
/// maximal fractional matching.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FailureWitness {
    pub graph: ColoredMultigraph,
    pub multigraph: ColoredMultigraph,
    pub map: CoveringMap,
    /// The multigraph node the algorithm leaves unsaturated (or overloads).
    pub node: NodeId,
    pub fm: FractionalMatching,
    pub violation: FmViolation,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome<T> {
    Done(T),
    Failure(Box<FailureWitness>),
}

fn base_graph(delta: usize) -> ColoredMultigraph {
    build_graph(GraphSpec {
        model: Model::EC,
        k: delta as Color,
        nodes: vec![NodeSpec { id: 0, label: None }],
        order: None,
        edges: (1..=delta as Color)
            .map(|c| EdgeRec {
                eid: c - 1,
                u: 0,
                v: 0,
                color: c,
                directed: false,
            })
            .collect(),
    })
    .expect("bouquet of distinct loops is valid")
}

fn check_setup(
    a: &LocalAlgorithm,
    delta: usize,
    cfg: &AdversaryConfig,
) -> Result<(), AdversaryError> {
    if a.model() != Model::EC {
        return Err(AdversaryError::ModelMismatch(a.model()));
    }
    if delta < 2 {
        return Err(AdversaryError::DeltaTooSmall(delta));
    }
    if delta > cfg.max_delta {
        return Err(AdversaryError::GuardrailExceeded {
            delta,
            max: cfg.max_delta,
        });
    }
    if (a.palette() as usize) < delta {
        return Err(AdversaryError::PaletteTooSmall {
            palette: a.palette(),
            delta,
        });
    }
    Ok(())
}

/// Outputs and FM of `a` on a multigraph every node of which should be
/// saturated. Returns the first node that is not.
struct Evaluated {
    outputs: BTreeMap<NodeId, LocalOutput>,
    fm: FractionalMatching,
}

fn evaluate_graph(
    a: &LocalAlgorithm,
    g: &ColoredMultigraph,
) -> Result<(Evaluated, Option<NodeId>), AdversaryError> {
    let outputs = evaluate_all(a, g)?;
    let fm = fm_from_outputs(g, &outputs)?;
    let mut bad = None;
    for v in g.node_ids() {
        if node_weight(g, &fm, v)? != one() {
            bad = Some(v);
            break;
        }
    }
    Ok((Evaluated { outputs, fm }, bad))
}

/// Lifts `m` to a simple graph and evaluates `a` there. The lift contains an
/// edge between two preimages of `node` whenever `node` carries a loop.
pub fn failure_witness(
    a: &LocalAlgorithm,
    m: &ColoredMultigraph,
    node: NodeId,
    seed: u64,
) -> Result<FailureWitness, AdversaryError> {
    let (m, _) = m.renumber_edges();
    let (lift, map) = minimal_simple_lift(&m, seed)?;
    let fm = crate::locality::assemble_fm(a, &lift)?;
    let report = check_maximal_fm(&lift, &fm)?;
    let preimage = |x: NodeId| map.node_map.get(&x) == Some(&node);
    let pick = report
        .violations
        .iter()
        .find(|v| {
            v.kind == ViolationKind::UnsaturatedEdge
                && v.endpoints.is_some_and(|(x, y)| preimage(x) && preimage(y))
        })
        .or_else(|| {
            report
                .violations
                .iter()
                .find(|v| v.node.is_some_and(preimage))
        })
        .or_else(|| report.violations.first())
        .cloned()
        .ok_or_else(|| {
            AdversaryError::InternalInvariantBroken(
                "the lift of a graph with an unsaturated node got a maximal FM".into(),
            )
        })?;
    Ok(FailureWitness {
        graph: lift,
        multigraph: m,
        map,
        node,
        fm,
        violation: pick,
    })
}

fn loop_weight(out: &LocalOutput, c: Color) -> Option<&Weight> {
    out.get(Slot::looped(c))
}

/// G₀ is one node with loops of colors 1..=Δ; H₀ drops the lightest-colored
/// loop of nonzero weight.
pub fn base_case(
    a: &LocalAlgorithm,
    delta: usize,
    cfg: &AdversaryConfig,
) -> Result<Outcome<WitnessPair>, AdversaryError> {
    check_setup(a, delta, cfg)?;
    let g0 = base_graph(delta);
    let (ev, bad) = evaluate_graph(a, &g0)?;
    if let Some(v) = bad {
        return Ok(Outcome::Failure(Box::new(failure_witness(
            a,
            &g0,
            v,
            cfg.lift_seed,
        )?)));
    }
    let out_g = ev.outputs[&0].clone();
    let (e, _) = (1..=delta as Color)
        .filter_map(|c| loop_weight(&out_g, c).map(|w| (c, w)))
        .find(|(_, w)| **w != zero())
        .ok_or_else(|| {
            AdversaryError::InternalInvariantBroken("saturated node with all loops at 0".into())
        })?;
    let (h0, _) = g0.without_edge(e - 1)?.renumber_edges();
    let (ev_h, bad) = evaluate_graph(a, &h0)?;
    if let Some(v) = bad {
        return Ok(Outcome::Failure(Box::new(failure_witness(
            a,
            &h0,
            v,
            cfg.lift_seed,
        )?)));
    }
    let out_h = ev_h.outputs[&0].clone();
    let c = (1..=delta as Color)
        .filter(|&c| c != e)
        .find(|&c| loop_weight(&out_g, c) != loop_weight(&out_h, c))
        .ok_or_else(|| {
            AdversaryError::InternalInvariantBroken(
                "removing a weighted loop changed no other loop".into(),
            )
        })?;
    Ok(Outcome::Done(WitnessPair {
        i: 0,
        g_graph: g0,
        h_graph: h0,
        g: 0,
        h: 0,
        c,
        out_g,
        out_h,
        branch: Branch::Base,
    }))
}

/// Result of [`mix`]: G's ids and eids are kept, the new edge reuses e's eid,
/// and H's nodes and edges are moved by the recorded maps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mixed {
    pub graph: ColoredMultigraph,
    pub node_map: BTreeMap<NodeId, NodeId>,
    pub edge_map: BTreeMap<EdgeId, EdgeId>,
    pub bridge: EdgeId,
}

/// (G − e) ⊎ (H − f) plus an edge of the loops' color between their nodes.
/// H's node ids are shifted past G's only if the two sets overlap.
pub fn mix(
    g: &ColoredMultigraph,
    e: EdgeId,
    h: &ColoredMultigraph,
    f: EdgeId,
) -> Result<Mixed, AdversaryError> {
    for graph in [g, h] {
        if graph.model() != Model::EC {
            return Err(AdversaryError::ModelMismatch(graph.model()));
        }
    }
    let er = g.edge(e).ok_or(GraphError::UnknownEdge(e))?.clone();
    let fr = h.edge(f).ok_or(GraphError::UnknownEdge(f))?.clone();
    if !er.is_loop() {
        return Err(AdversaryError::NotALoop(e));
    }
    if !fr.is_loop() {
        return Err(AdversaryError::NotALoop(f));
    }
    if er.color != fr.color {
        return Err(AdversaryError::ColorMismatch(e, f));
    }
    let overlap = h.node_ids().any(|v| g.contains_node(v));
    let off = if overlap {
        g.max_node_id().map_or(0, |m| m + 1)
    } else {
        0
    };
    let eoff = g.max_eid().map_or(0, |m| m + 1);
    let node_map: BTreeMap<NodeId, NodeId> = h.node_ids().map(|v| (v, v + off)).collect();
    let edge_map: BTreeMap<EdgeId, EdgeId> = h
        .edge_ids()
        .filter(|&x| x != f)
        .map(|x| (x, x + eoff))
        .collect();
    let mut nodes: Vec<NodeSpec> = g
        .node_ids()
        .map(|id| NodeSpec { id, label: None })
        .collect();
    nodes.extend(node_map.values().map(|&id| NodeSpec { id, label: None }));
    let mut edges: Vec<EdgeRec> = g.edges().filter(|x| x.eid != e).cloned().collect();
    edges.extend(h.edges().filter(|x| x.eid != f).map(|x| EdgeRec {
        eid: edge_map[&x.eid],
        u: node_map[&x.u],
        v: node_map[&x.v],
        ..x.clone()
    }));
    edges.push(EdgeRec {
        eid: e,
        u: er.u,
        v: node_map[&fr.u],
        color: er.color,
        directed: false,
    });
    let graph = build_graph(GraphSpec {
        model: Model::EC,
        k: g.k().max(h.k()),
        nodes,
        order: None,
        edges,
    })
    .map_err(GraphError::Invalid)?;
    Ok(Mixed {
        graph,
        node_map,
        edge_map,
        bridge: e,
    })
}

fn find_loop(g: &ColoredMultigraph, v: NodeId, c: Color) -> Result<EdgeId, AdversaryError> {
    g.loop_with_color(v, c).ok_or_else(|| {
        AdversaryError::InternalInvariantBroken(format!("no loop of color {c} at node {v}"))
    })
}

fn fail_on(
    a: &LocalAlgorithm,
    g: &ColoredMultigraph,
    bad: Option<NodeId>,
    seed: u64,
) -> Result<Option<Box<FailureWitness>>, AdversaryError> {
    match bad {
        Some(v) => Ok(Some(Box::new(failure_witness(a, g, v, seed)?))),
        None => Ok(None),
    }
}

/// Unfolds the pair's loops, mixes the two graphs, and follows the
/// disagreement from the mixed edge to a loop on whichever side the mixed
/// edge's weight differs from (G preferred).
pub fn adversary_step(
    a: &LocalAlgorithm,
    pair: &WitnessPair,
    cfg: &AdversaryConfig,
) -> Result<Outcome<WitnessPair>, AdversaryError> {
    let (gr, hr) = (&pair.g_graph, &pair.h_graph);
    let c = pair.c;
    let e = find_loop(gr, pair.g, c)?;
    let f = find_loop(hr, pair.h, c)?;
    let (gg, _) = unfold_loop(gr, e)?;
    let (hh, _) = unfold_loop(hr, f)?;
    let mixed = mix(gr, e, hr, f)?;
    let gh = &mixed.graph;

    let (r_gg, (r_hh, r_gh)) = rayon::join(
        || evaluate_graph(a, &gg),
        || rayon::join(|| evaluate_graph(a, &hh), || evaluate_graph(a, gh)),
    );
    let (ev_gg, bad_gg) = r_gg?;
    let (ev_hh, bad_hh) = r_hh?;
    let (ev_gh, bad_gh) = r_gh?;
    for (graph, bad) in [(&gg, bad_gg), (&hh, bad_hh), (gh, bad_gh)] {
        if let Some(w) = fail_on(a, graph, bad, cfg.lift_seed)? {
            return Ok(Outcome::Failure(w));
        }
    }

    let w_g = ev_gg.fm.weight(e).expect("unfolded edge").clone();
    let w_h = ev_hh.fm.weight(f).expect("unfolded edge").clone();
    let w = ev_gh.fm.weight(mixed.bridge).expect("bridge edge").clone();
    if w_g == w_h {
        return Err(AdversaryError::InternalInvariantBroken(format!(
            "pair {} has equal loop weights {}",
            pair.i,
            format_weight(&w_g)
        )));
    }

    let (side, start, y, y2, w_side, branch) = if w != w_g {
        let side = gr.without_edge(e)?;
        let ids: Vec<EdgeId> = side.edge_ids().collect();
        let y = ev_gg.fm.restrict(ids.iter().copied());
        let y2 = ev_gh.fm.restrict(ids.iter().copied());
        (side, pair.g, y, y2, w_g, Branch::GSide)
    } else {
        let side = hr.without_edge(f)?;
        let y = ev_hh.fm.restrict(side.edge_ids());
        let back: BTreeMap<EdgeId, EdgeId> = mixed.edge_map.iter().map(|(&h, &m)| (m, h)).collect();
        let y2 = ev_gh
            .fm
            .restrict(mixed.edge_map.values().copied())
            .rekey(&back);
        (side, pair.h, y, y2, w_h, Branch::HSide)
    };
    let virtual_edge = VirtualEdge {
        color: c,
        w: w_side,
        w2: w,
    };
    let (star, star_loop) = match propagation_walk(&side, &y, &y2, start, &virtual_edge) {
        Ok(r) => r,
        Err(WalkError::NoContinuation { node }) => {
            return Err(AdversaryError::InternalInvariantBroken(format!(
                "disagreement stops at saturated node {node}"
            )))
        }
        Err(other) => return Err(AdversaryError::InternalInvariantBroken(other.to_string())),
    };
    let c_next = side.edge(star_loop).expect("walk ends at a loop").color;
    let (first, first_ev, g_next, h_next) = match branch {
        Branch::GSide => (gg, ev_gg, star, star),
        _ => (hh, ev_hh, star, mixed.node_map[&star]),
    };
    let out_g = first_ev.outputs[&g_next].clone();
    let out_h = ev_gh.outputs[&h_next].clone();
    Ok(Outcome::Done(WitnessPair {
        i: pair.i + 1,
        g_graph: first.renumber_edges().0,
        h_graph: gh.renumber_edges().0,
        g: g_next,
        h: h_next,
        c: c_next,
        out_g,
        out_h,
        branch,
    }))
}

/// One line of a verification report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckLine {
    pub name: String,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairReport {
    pub i: usize,
    pub checks: Vec<CheckLine>,
}

impl PairReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&CheckLine> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn as_map(&self) -> BTreeMap<String, bool> {
        self.checks
            .iter()
            .map(|c| (c.name.clone(), c.passed))
            .collect()
    }
}

fn line(name: &str, result: Result<(), String>) -> CheckLine {
    CheckLine {
        name: name.into(),
        passed: result.is_ok(),
        detail: result.err(),
    }
}

/// Recomputes every property of a pair from the graphs alone.
pub fn verify_pair(a: &LocalAlgorithm, pair: &WitnessPair, delta: usize) -> PairReport {
    let (gr, hr) = (&pair.g_graph, &pair.h_graph);
    let both = [("G", gr, pair.g), ("H", hr, pair.h)];
    let mut checks = Vec::new();

    checks.push(line(
        "valid_graphs",
        both.iter().try_for_each(|(name, g, v)| {
            if g.model() != Model::EC {
                return Err(format!("{name} is a {} graph", g.model()));
            }
            if !g.contains_node(*v) {
                return Err(format!("{name} has no node {v}"));
            }
            if !g.is_connected() {
                return Err(format!("{name} is disconnected"));
            }
            Ok(())
        }),
    ));
    let valid = checks[0].passed;

    checks.push(line(
        "max_degree",
        both.iter().try_for_each(|(name, g, _)| {
            let d = g.max_degree();
            if d > delta {
                Err(format!("{name} has degree {d} > {delta}"))
            } else {
                Ok(())
            }
        }),
    ));

    checks.push(line(
        "p1_neighborhood",
        if !valid {
            Err("graphs invalid".into())
        } else {
            let cg = canonical_code(&CoverView::new(gr, pair.g, pair.i).expect("node exists"));
            let ch = canonical_code(&CoverView::new(hr, pair.h, pair.i).expect("node exists"));
            if cg == ch {
                Ok(())
            } else {
                Err(format!("radius-{} views differ", pair.i))
            }
        },
    ));

    checks.push(line(
        "p1_loop",
        both.iter().try_for_each(|(name, g, v)| {
            match g.contains_node(*v) && g.loop_with_color(*v, pair.c).is_some() {
                true => Ok(()),
                false => Err(format!("{name} has no loop of color {} at {v}", pair.c)),
            }
        }),
    ));

    let outs = if valid {
        (evaluate(a, gr, pair.g), evaluate(a, hr, pair.h))
    } else {
        let e = EvalError::Graph(GraphError::Disconnected);
        (Err(e.clone()), Err(e))
    };
    checks.push(line(
        "p1_output",
        match &outs {
            (Ok(og), Ok(oh)) => {
                let (wg, wh) = (loop_weight(og, pair.c), loop_weight(oh, pair.c));
                match (wg, wh) {
                    (Some(x), Some(y)) if x != y => Ok(()),
                    (Some(x), Some(_)) => Err(format!(
                        "both outputs weigh the color-{} loop {}",
                        pair.c,
                        format_weight(x)
                    )),
                    _ => Err(format!("no output for the color-{} loop", pair.c)),
                }
            }
            (Err(e), _) | (_, Err(e)) => Err(e.to_string()),
        },
    ));
    checks.push(line(
        "p1_recorded",
        match &outs {
            (Ok(og), Ok(oh)) if *og == pair.out_g && *oh == pair.out_h => Ok(()),
            (Ok(_), Ok(_)) => Err("recorded outputs differ from recomputed ones".into()),
            (Err(e), _) | (_, Err(e)) => Err(e.to_string()),
        },
    ));

    let need = (delta as i64) - 1 - pair.i as i64;
    checks.push(line(
        "p2_loops",
        both.iter().try_for_each(|(name, g, _)| {
            for v in g.node_ids() {
                let n = g.loops_at(v).expect("node of g").len() as i64;
                if n < need {
                    return Err(format!("{name} node {v} has {n} loops, needs {need}"));
                }
            }
            Ok(())
        }),
    ));

    checks.push(line(
        "p3_tree",
        both.iter().try_for_each(|(name, g, _)| {
            if g.is_tree_ignoring_loops() {
                Ok(())
            } else {
                Err(format!("{name} is not a tree once loops are removed"))
            }
        }),
    ));

    PairReport { i: pair.i, checks }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LowerBoundCertificate {
    pub algorithm: String,
    pub delta: usize,
    pub pairs: Vec<WitnessPair>,
    pub min_runtime: usize,
}

/// Base case, then Δ−2 steps, verifying each pair before moving on.
pub fn run_adversary(
    a: &LocalAlgorithm,
    delta: usize,
    cfg: &AdversaryConfig,
) -> Result<Outcome<LowerBoundCertificate>, AdversaryError> {
    let mut pair = match base_case(a, delta, cfg)? {
        Outcome::Done(p) => p,
        Outcome::Failure(w) => return Ok(Outcome::Failure(w)),
    };
    let mut pairs = Vec::new();
    loop {
        let report = verify_pair(a, &pair, delta);
        if !report.passed() {
            let failed: Vec<String> = report
                .checks
                .iter()
                .filter(|c| !c.passed)
                .map(|c| format!("{}: {}", c.name, c.detail.clone().unwrap_or_default()))
                .collect();
            return Err(AdversaryError::InternalInvariantBroken(format!(
                "pair {} fails verification ({})",
                pair.i,
                failed.join("; ")
            )));
        }
        pairs.push(pair.clone());
        if pair.i + 2 >= delta {
            break;
        }
        pair = match adversary_step(a, &pair, cfg)? {
            Outcome::Done(p) => p,
            Outcome::Failure(w) => return Ok(Outcome::Failure(w)),
        };
    }
    Ok(Outcome::Done(LowerBoundCertificate {
        algorithm: a.name().to_string(),
        delta,
        pairs,
        min_runtime: delta - 1,
    }))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairDoc {
    pub i: usize,
    pub branch: Branch,
    #[serde(rename = "G")]
    pub g_graph: GraphDoc,
    #[serde(rename = "H")]
    pub h_graph: GraphDoc,
    pub g: NodeId,
    pub h: NodeId,
    pub c: Color,
    pub out_g: OutputDoc,
    pub out_h: OutputDoc,
    pub checks: BTreeMap<String, bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConclusionDoc {
    pub min_runtime: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateDoc {
    pub algorithm: String,
    pub delta: usize,
    pub pairs: Vec<PairDoc>,
    pub conclusion: ConclusionDoc,
}

impl LowerBoundCertificate {
    /// Serializable form; each pair's checks are recomputed.
    pub fn to_doc(&self, a: &LocalAlgorithm) -> CertificateDoc {
        CertificateDoc {
            algorithm: self.algorithm.clone(),
            delta: self.delta,
            pairs: self
                .pairs
                .iter()
                .map(|p| PairDoc {
                    i: p.i,
                    branch: p.branch,
                    g_graph: p.g_graph.to_doc(),
                    h_graph: p.h_graph.to_doc(),
                    g: p.g,
                    h: p.h,
                    c: p.c,
                    out_g: p.out_g.to_doc(),
                    out_h: p.out_h.to_doc(),
                    checks: verify_pair(a, p, self.delta).as_map(),
                })
                .collect(),
            conclusion: ConclusionDoc {
                min_runtime: self.min_runtime,
            },
        }
    }

    pub fn from_doc(doc: &CertificateDoc) -> Result<LowerBoundCertificate, AdversaryError> {
        let pairs = doc
            .pairs
            .iter()
            .map(|p| {
                let decode = |d: &GraphDoc| {
                    ColoredMultigraph::from_doc(d)
                        .map_err(|v| AdversaryError::from(GraphError::Invalid(v)))
                };
                Ok(WitnessPair {
                    i: p.i,
                    g_graph: decode(&p.g_graph)?,
                    h_graph: decode(&p.h_graph)?,
                    g: p.g,
                    h: p.h,
                    c: p.c,
                    out_g: LocalOutput::from_doc(&p.out_g),
                    out_h: LocalOutput::from_doc(&p.out_h),
                    branch: p.branch,
                })
            })
            .collect::<Result<Vec<_>, AdversaryError>>()?;
        Ok(LowerBoundCertificate {
            algorithm: doc.algorithm.clone(),
            delta: doc.delta,
            pairs,
            min_runtime: doc.conclusion.min_runtime,
        })
    }
}

pub fn encode_certificate(cert: &LowerBoundCertificate, a: &LocalAlgorithm) -> String {
    let mut s = serde_json::to_string_pretty(&cert.to_doc(a)).expect("certificates serialize");
    s.push('\n');
    s
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub algorithm: String,
    pub delta: usize,
    pub min_runtime: usize,
    /// Problems with the certificate as a whole.
    pub structure: Vec<String>,
    pub pairs: Vec<PairReport>,
}

impl CertificateReport {
    pub fn verified_pairs(&self) -> usize {
        self.pairs.iter().filter(|p| p.passed()).count()
    }

    pub fn passed(&self) -> bool {
        self.structure.is_empty() && self.pairs.iter().all(PairReport::passed)
    }
}

/// Re-verifies every pair against the named algorithm, and checks that the
/// pairs are numbered 0..=Δ−2 and that the conclusion is Δ−1.
pub fn verify_certificate(doc: &CertificateDoc) -> Result<CertificateReport, AdversaryError> {
    let a = resolve(&doc.algorithm)?;
    let cert = LowerBoundCertificate::from_doc(doc)?;
    let mut structure = Vec::new();
    if cert.delta < 2 {
        structure.push(format!("Δ = {} is below 2", cert.delta));
    }
    let expected: Vec<usize> = (0..cert.delta.saturating_sub(1)).collect();
    let found: Vec<usize> = cert.pairs.iter().map(|p| p.i).collect();
    if found != expected {
        structure.push(format!(
            "pairs are numbered {found:?}, expected {expected:?}"
        ));
    }
    if cert.min_runtime + 1 != cert.delta {
        structure.push(format!(
            "conclusion claims runtime ≥ {} for Δ = {}",
            cert.min_runtime, cert.delta
        ));
    }
    let pairs = cert
        .pairs
        .iter()
        .map(|p| verify_pair(&a, p, cert.delta))
        .collect();
    Ok(CertificateReport {
        algorithm: cert.algorithm,
        delta: cert.delta,
        min_runtime: cert.min_runtime,
        structure,
        pairs,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WitnessDoc {
    pub graph: GraphDoc,
    pub fm: FmDoc,
    pub violation: FmViolation,
    pub multigraph: GraphDoc,
    pub map: CoveringMap,
    pub node: NodeId,
}

impl FailureWitness {
    pub fn to_doc(&self) -> WitnessDoc {
        WitnessDoc {
            graph: self.graph.to_doc(),
            fm: self.fm.to_doc(),
            violation: self.violation.clone(),
            multigraph: self.multigraph.to_doc(),
            map: self.map.clone(),
            node: self.node,
        }
    }

    pub fn from_doc(doc: &WitnessDoc) -> Result<FailureWitness, AdversaryError> {
        let decode = |d: &GraphDoc| ColoredMultigraph::from_doc(d).map_err(GraphError::Invalid);
        Ok(FailureWitness {
            graph: decode(&doc.graph)?,
            multigraph: decode(&doc.multigraph)?,
            map: doc.map.clone(),
            node: doc.node,
            fm: FractionalMatching::from_doc(&doc.fm),
            violation: doc.violation.clone(),
        })
    }

    /// Whether the violation is an unsaturated edge between two preimages of
    /// the recorded multigraph node.
    pub fn is_fiber_edge(&self) -> bool {
        let pre = |x: NodeId| self.map.node_map.get(&x) == Some(&self.node);
        self.violation.kind == ViolationKind::UnsaturatedEdge
            && self
                .violation
                .endpoints
                .is_some_and(|(x, y)| pre(x) && pre(y))
    }
}

pub fn encode_witness(w: &FailureWitness) -> String {
    let mut s = serde_json::to_string_pretty(&w.to_doc()).expect("witnesses serialize");
    s.push('\n');
    s
}

/// Checks a witness from scratch: the graph is simple and covers the
/// multigraph, the algorithm reproduces the recorded FM, and the recorded
/// violation is among those of that FM.
pub fn verify_witness(a: &LocalAlgorithm, w: &FailureWitness) -> Vec<CheckLine> {
    let mut out = vec![line(
        "simple",
        if w.graph.is_simple() {
            Ok(())
        } else {
            Err("graph has loops or parallel edges".into())
        },
    )];
    let cover = verify_covering(&w.graph, &w.multigraph, &w.map);
    out.push(line(
        "covering",
        if cover.is_empty() {
            Ok(())
        } else {
            Err(format!("{} covering violations", cover.len()))
        },
    ));
    let fm = crate::locality::assemble_fm(a, &w.graph);
    out.push(line(
        "reproduced",
        match &fm {
            Ok(y) if *y == w.fm => Ok(()),
            Ok(_) => Err("algorithm output differs from the recorded FM".into()),
            Err(e) => Err(e.to_string()),
        },
    ));
    out.push(line(
        "violation",
        match check_maximal_fm(&w.graph, &w.fm) {
            Ok(r) if r.violations.contains(&w.violation) => Ok(()),
            Ok(_) => Err("recorded violation does not occur".into()),
            Err(e) => Err(e.to_string()),
        },
    ));
    out
}

/// Nodes of a pair's graphs with fewer loops than `need`.
pub fn loop_deficits(g: &ColoredMultigraph, need: usize) -> BTreeSet<NodeId> {
    g.node_ids()
        .filter(|&v| g.loops_at(v).expect("node of g").len() < need)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algo_zoo::{greedy_by_color, truncate, zeros};

    fn cfg() -> AdversaryConfig {
        AdversaryConfig::default()
    }

    fn done<T: std::fmt::Debug>(o: Outcome<T>) -> T {
        match o {
            Outcome::Done(t) => t,
            Outcome::Failure(w) => panic!("unexpected failure witness: {w:?}"),
        }
    }

    #[test]
    fn base_case_for_greedy() {
        let p = done(base_case(&greedy_by_color(3), 3, &cfg()).unwrap());
        assert_eq!(p.g_graph.loops_at(0).unwrap(), vec![1, 2, 3]);
        assert_eq!(p.h_graph.loops_at(0).unwrap(), vec![2, 3]);
        assert_eq!(p.c, 2);
        assert_eq!(p.out_g.to_string(), "[1/loop=1, 2/loop=0, 3/loop=0]");
        assert_eq!(p.out_h.to_string(), "[2/loop=1, 3/loop=0]");

        let p = done(base_case(&greedy_by_color(2), 2, &cfg()).unwrap());
        assert_eq!(p.h_graph.loops_at(0).unwrap(), vec![2]);
        assert_eq!(p.c, 2);
    }

    #[test]
    fn zeros_fail_in_the_base_case() {
        let a = zeros();
        match base_case(&a, 3, &cfg()).unwrap() {
            Outcome::Failure(w) => {
                assert!(w.graph.is_simple());
                assert!(w.is_fiber_edge());
                assert!(verify_witness(&a, &w).iter().all(|c| c.passed));
            }
            Outcome::Done(_) => panic!("zeros cannot saturate"),
        }
    }

    #[test]
    fn mixing() {
        let g = base_graph(3);
        let h = g.without_edge(0).unwrap();
        let m = mix(&g, 1, &h, 1).unwrap();
        assert_eq!(m.graph.loops_at(0).unwrap(), vec![1, 3]);
        assert_eq!(m.graph.loops_at(1).unwrap(), vec![3]);
        let bridge = m.graph.edge(m.bridge).unwrap();
        assert_eq!((bridge.u, bridge.v, bridge.color), (0, 1, 2));
        assert_eq!(m.graph.degree(0).unwrap(), g.degree(0).unwrap());
        assert_eq!(mix(&g, 0, &h, 1), Err(AdversaryError::ColorMismatch(0, 1)));
    }

    #[test]
    fn first_step_for_greedy() {
        let a = greedy_by_color(3);
        let p0 = done(base_case(&a, 3, &cfg()).unwrap());
        let p1 = done(adversary_step(&a, &p0, &cfg()).unwrap());
        assert_eq!(p1.branch, Branch::HSide);
        assert_eq!(p1.c, 3);
        assert_eq!(p1.g_graph.node_count(), 2);
        assert_eq!(p1.h_graph.node_count(), 2);
        assert!(verify_pair(&a, &p1, 3).passed());
    }

    #[test]
    fn certificates() {
        for delta in 2..=5 {
            let a = greedy_by_color(delta as Color);
            let cert = done(run_adversary(&a, delta, &cfg()).unwrap());
            assert_eq!(cert.pairs.len(), delta - 1);
            assert_eq!(cert.min_runtime, delta - 1);
            let text = encode_certificate(&cert, &a);
            let doc: CertificateDoc = serde_json::from_str(&text).unwrap();
            let report = verify_certificate(&doc).unwrap();
            assert!(report.passed(), "{report:?}");
            assert_eq!(text, encode_certificate(&cert, &a));
        }
    }

    #[test]
    fn truncated_greedy_fails() {
        let a = truncate(3, 1).unwrap();
        match run_adversary(&a, 3, &cfg()).unwrap() {
            Outcome::Failure(w) => {
                assert!(w.is_fiber_edge());
                assert_eq!(w.multigraph.loops_at(0).unwrap(), vec![2, 3]);
            }
            Outcome::Done(_) => panic!("truncated greedy is not correct"),
        }
    }

    #[test]
    fn tampering_is_detected() {
        let a = greedy_by_color(3);
        let mut p = done(base_case(&a, 3, &cfg()).unwrap());
        p.c = 3;
        let r = verify_pair(&a, &p, 3);
        assert!(!r.check("p1_output").unwrap().passed);
        let r = verify_pair(&a, &p, 4);
        assert!(!r.check("p2_loops").unwrap().passed);
    }

    #[test]
    fn setup_errors() {
        let a = greedy_by_color(3);
        assert_eq!(
            run_adversary(&a, 1, &cfg()),
            Err(AdversaryError::DeltaTooSmall(1))
        );
        assert!(matches!(
            run_adversary(&a, 4, &cfg()),
            Err(AdversaryError::PaletteTooSmall { .. })
        ));
        let small = AdversaryConfig {
            max_delta: 2,
            ..cfg()
        };
        assert!(matches!(
            run_adversary(&a, 3, &small),
            Err(AdversaryError::GuardrailExceeded { .. })
        ));
    }
}
