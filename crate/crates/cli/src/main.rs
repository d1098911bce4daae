//! `lbx`: command-line front end for the core library.
//!
//! Exit status is 0 when everything checked passes, 1 when a check fails or a
//! failure witness is produced, and 2 on usage, input or internal errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use lbx_core::adversary::{
    encode_certificate, encode_witness, run_adversary, verify_certificate, AdversaryConfig,
    CertificateDoc, Outcome, DEFAULT_MAX_DELTA,
};
use lbx_core::algo_zoo::{resolve, resolve_binary};
use lbx_core::canon_order::check_homogeneity;
use lbx_core::covers::{cover_ball_graph, factor_graph, loopiness, random_simple_lift};
use lbx_core::fracmatch::{check_maximal_fm, decode_fm, encode_fm};
use lbx_core::locality::assemble_fm;
use lbx_core::simulations::{
    ramsey_search, simulate_chain, verify_order_invariant, Chain, IdentifierSubset,
};
use lbx_core::{
    decode_graph, encode_graph, render_report, ColoredMultigraph, GraphBuilder, Model, Report,
};

#[derive(Parser)]
#[command(
    name = "lbx",
    version,
    about = "Lower-bound laboratory for maximal fractional matchings"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the unfold-and-mix adversary against an EC algorithm.
    Adversary {
        #[arg(long)]
        delta: usize,
        #[arg(long)]
        algo: String,
        /// Certificate path; a failure witness goes next to it as
        /// failure-witness.json.
        #[arg(long, default_value = "cert.json")]
        out: PathBuf,
        /// Seed for the simple lift used in failure witnesses.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Largest Δ accepted (also settable through LBX_MAX_DELTA).
        #[arg(long)]
        max_delta: Option<usize>,
    },
    /// Re-verify every pair of a certificate.
    VerifyCert { cert: PathBuf },
    /// Check that a fractional matching is maximal.
    VerifyFm { graph: PathBuf, fm: PathBuf },
    /// Run an algorithm on a graph and check its output.
    Run {
        #[arg(long)]
        algo: String,
        graph: PathBuf,
        /// Where to write the fractional matching.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compute the factor graph.
    Factor {
        graph: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Where to write the covering map onto the factor graph.
        #[arg(long)]
        map: Option<PathBuf>,
    },
    /// Build a ball of the universal cover.
    Cover {
        graph: PathBuf,
        #[arg(long)]
        node: u32,
        #[arg(long)]
        radius: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Where to write the base node of each ball node.
        #[arg(long)]
        map: Option<PathBuf>,
    },
    /// Build a random simple lift.
    Lift {
        graph: PathBuf,
        #[arg(long)]
        copies: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Where to write the covering map onto the input graph.
        #[arg(long)]
        map: Option<PathBuf>,
    },
    /// Check homogeneity of the canonical order on a regular tree.
    OrderCheck {
        #[arg(long)]
        d: u32,
        #[arg(long)]
        radius: usize,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Swap two ranks first; the check should then fail.
        #[arg(long)]
        tamper: bool,
    },
    /// Run an algorithm through a chain of model simulations.
    Simulate {
        #[arg(long)]
        chain: Chain,
        #[arg(long)]
        algo: String,
        graph: PathBuf,
    },
    /// Search for identifiers on which a binary algorithm is order-invariant.
    Ramsey {
        #[arg(long)]
        algo: String,
        #[arg(long)]
        universe: u64,
        #[arg(long)]
        q: usize,
    },
}

type Verdict = Result<bool, String>;

fn read(path: &Path) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<(), String> {
    fs::write(path, text).map_err(|e| format!("{}: {e}", path.display()))
}

fn load_graph(path: &Path) -> Result<ColoredMultigraph, String> {
    decode_graph(&read(path)?).map_err(|e| format!("{}: {e}", path.display()))
}

fn pretty(value: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("documents serialize");
    s.push('\n');
    s
}

/// Writes to `out` if given, otherwise prints.
fn emit(out: Option<&Path>, text: &str) -> Result<(), String> {
    match out {
        Some(p) => write(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// The graph goes to `out` (or standard output), the map to `map` if given.
fn write_mapped(
    g: &ColoredMultigraph,
    m: &impl Serialize,
    out: Option<&Path>,
    map: Option<&Path>,
) -> Result<(), String> {
    emit(out, &encode_graph(g))?;
    match map {
        Some(p) => write(p, &pretty(m)),
        None => Ok(()),
    }
}

fn max_delta(flag: Option<usize>) -> Result<usize, String> {
    if let Some(m) = flag {
        return Ok(m);
    }
    match std::env::var("LBX_MAX_DELTA") {
        Ok(v) => v
            .parse()
            .map_err(|_| format!("LBX_MAX_DELTA={v:?} is not a natural number")),
        Err(_) => Ok(DEFAULT_MAX_DELTA),
    }
}

fn show(report: &Report) -> bool {
    print!("{}", render_report(report));
    report.passed()
}

fn execute(command: Command) -> Verdict {
    match command {
        Command::Adversary {
            delta,
            algo,
            out,
            seed,
            max_delta: flag,
        } => {
            let a = resolve(&algo).map_err(|e| e.to_string())?;
            let cfg = AdversaryConfig {
                max_delta: max_delta(flag)?,
                lift_seed: seed,
            };
            match run_adversary(&a, delta, &cfg).map_err(|e| e.to_string())? {
                Outcome::Done(cert) => {
                    let text = encode_certificate(&cert, &a);
                    write(&out, &text)?;
                    let doc: CertificateDoc =
                        serde_json::from_str(&text).expect("fresh certificate parses");
                    let report = verify_certificate(&doc).map_err(|e| e.to_string())?;
                    println!("certificate: {}", out.display());
                    Ok(show(&Report::Certificate(report)))
                }
                Outcome::Failure(w) => {
                    let path = out
                        .parent()
                        .unwrap_or(Path::new(""))
                        .join("failure-witness.json");
                    write(&path, &encode_witness(&w))?;
                    println!("failure witness: {}", path.display());
                    show(&Report::Failure(w));
                    Ok(false)
                }
            }
        }
        Command::VerifyCert { cert } => {
            let text = read(&cert)?;
            let doc: CertificateDoc =
                serde_json::from_str(&text).map_err(|e| format!("{}: {e}", cert.display()))?;
            let report = verify_certificate(&doc).map_err(|e| e.to_string())?;
            Ok(show(&Report::Certificate(report)))
        }
        Command::VerifyFm { graph, fm } => {
            let g = load_graph(&graph)?;
            let y = decode_fm(&read(&fm)?).map_err(|e| format!("{}: {e}", fm.display()))?;
            let report = check_maximal_fm(&g, &y).map_err(|e| e.to_string())?;
            Ok(show(&Report::Maximality(report)))
        }
        Command::Run { algo, graph, out } => {
            let a = resolve(&algo).map_err(|e| e.to_string())?;
            let g = load_graph(&graph)?;
            let y = assemble_fm(&a, &g).map_err(|e| e.to_string())?;
            let report = check_maximal_fm(&g, &y).map_err(|e| e.to_string())?;
            emit(out.as_deref(), &encode_fm(&y))?;
            Ok(show(&Report::Maximality(report)))
        }
        Command::Factor { graph, out, map } => {
            let g = load_graph(&graph)?;
            let (f, m) = factor_graph(&g).map_err(|e| e.to_string())?;
            let l = loopiness(&g).map_err(|e| e.to_string())?;
            write_mapped(&f, &m, out.as_deref(), map.as_deref())?;
            if out.is_some() {
                println!(
                    "factor graph: {} nodes, {} edges; loopiness {l}",
                    f.node_count(),
                    f.edge_count()
                );
            }
            Ok(true)
        }
        Command::Cover {
            graph,
            node,
            radius,
            out,
            map,
        } => {
            let g = load_graph(&graph)?;
            let (ball, base) = cover_ball_graph(&g, node, radius).map_err(|e| e.to_string())?;
            write_mapped(&ball, &base, out.as_deref(), map.as_deref())?;
            if out.is_some() {
                println!(
                    "cover ball: {} nodes, {} edges, radius {radius}",
                    ball.node_count(),
                    ball.edge_count()
                );
            }
            Ok(true)
        }
        Command::Lift {
            graph,
            copies,
            seed,
            out,
            map,
        } => {
            let g = load_graph(&graph)?;
            let (h, m) = random_simple_lift(&g, copies, seed).map_err(|e| e.to_string())?;
            write_mapped(&h, &m, out.as_deref(), map.as_deref())?;
            if out.is_some() {
                println!("lift: {} nodes, {} edges", h.node_count(), h.edge_count());
            }
            Ok(true)
        }
        Command::OrderCheck {
            d,
            radius,
            trials,
            seed,
            tamper,
        } => {
            if d == 0 {
                return Err("--d must be positive".into());
            }
            let r = check_homogeneity(d, radius, trials, seed, tamper);
            Ok(show(&Report::Homogeneity(vec![r])))
        }
        Command::Simulate { chain, algo, graph } => {
            let a = resolve(&algo).map_err(|e| e.to_string())?;
            let g = load_graph(&graph)?;
            let checks = simulate_chain(chain, &a, &g).map_err(|e| e.to_string())?;
            Ok(show(&Report::Checks(checks)))
        }
        Command::Ramsey { algo, universe, q } => {
            let a = resolve_binary(&algo).map_err(|e| e.to_string())?;
            let pattern = GraphBuilder::new(Model::ID, 1)
                .labeled(0, 1)
                .build()
                .expect("single labeled node");
            let ids = IdentifierSubset::range(1, universe);
            match ramsey_search(&a, &pattern, &ids, q).map_err(|e| e.to_string())? {
                Some(subset) => {
                    let tally =
                        verify_order_invariant(&a, &pattern, &subset).map_err(|e| e.to_string())?;
                    println!("subset: {subset}");
                    println!(
                        "re-verified: {} assignments, {} inconsistent",
                        tally.assignments, tally.inconsistent
                    );
                    Ok(tally.inconsistent == 0)
                }
                None => {
                    println!("subset: none of size {q} in 1..={universe}");
                    Ok(false)
                }
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
