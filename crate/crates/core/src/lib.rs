//! Core library: colored multigraphs, covers and lifts, exact fractional
//! matchings, local algorithms and their evaluation, the canonical tree order,
//! model simulations, and the unfold-and-mix adversary.

pub mod adversary;
pub mod algo_zoo;
pub mod canon_order;
pub mod covers;
pub mod fracmatch;
pub mod gen;
pub mod graph;
pub mod locality;
pub mod report;
pub mod simulations;
pub mod weight;

pub use adversary::{
    run_adversary, verify_certificate, AdversaryConfig, FailureWitness, LowerBoundCertificate,
    Outcome, WitnessPair,
};
pub use covers::{CoverView, CoveringMap};
pub use fracmatch::FractionalMatching;
pub use graph::{
    build_graph, decode_graph, encode_graph, Color, ColoredMultigraph, EdgeId, EdgeRec,
    GraphBuilder, GraphError, GraphSpec, Model, NodeId, Slot, SlotDir, Violation,
};
pub use locality::{LocalAlgorithm, LocalOutput, View};
pub use report::{render_report, Report};
pub use weight::Weight;
