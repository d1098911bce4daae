//! Plain-text rendering of verification results.

use std::fmt::Write;

use crate::adversary::{CertificateReport, CheckLine, FailureWitness};
use crate::canon_order::HomogeneityReport;
use crate::fracmatch::MaximalityReport;
use crate::simulations::CheckReport;

/// Anything the command-line tool reports on.
#[derive(Debug, Clone)]
pub enum Report {
    Certificate(CertificateReport),
    Failure(Box<FailureWitness>),
    Maximality(MaximalityReport),
    Checks(Vec<CheckReport>),
    Lines(Vec<CheckLine>),
    Homogeneity(Vec<HomogeneityReport>),
}

impl Report {
    pub fn passed(&self) -> bool {
        match self {
            Report::Certificate(r) => r.passed(),
            Report::Failure(_) => false,
            Report::Maximality(r) => r.is_maximal(),
            Report::Checks(r) => r.iter().all(CheckReport::passed),
            Report::Lines(r) => r.iter().all(|c| c.passed),
            Report::Homogeneity(r) => r.iter().all(HomogeneityReport::passed),
        }
    }

    pub fn is_empty(&self) -> bool {
        match self {
            Report::Certificate(r) => r.pairs.is_empty() && r.structure.is_empty(),
            Report::Failure(_) | Report::Maximality(_) => false,
            Report::Checks(r) => r.is_empty(),
            Report::Lines(r) => r.is_empty(),
            Report::Homogeneity(r) => r.is_empty(),
        }
    }
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "fail"
    }
}

fn yes_no(ok: bool) -> &'static str {
    if ok {
        "yes"
    } else {
        "no"
    }
}

fn check_line(out: &mut String, prefix: &str, c: &CheckLine) {
    let _ = write!(out, "{prefix}{}: {}", c.name, verdict(c.passed));
    if let Some(d) = &c.detail {
        let _ = write!(out, " ({d})");
    }
    out.push('\n');
}

/// One line per check, in a fixed order, followed by a summary line where the
/// report has one. An empty report renders as the empty string.
pub fn render_report(report: &Report) -> String {
    let mut out = String::new();
    if report.is_empty() {
        return out;
    }
    match report {
        Report::Certificate(r) => {
            let _ = writeln!(out, "algorithm: {}", r.algorithm);
            let _ = writeln!(out, "delta: {}", r.delta);
            for p in &r.pairs {
                for c in &p.checks {
                    check_line(&mut out, &format!("pair {} ", p.i), c);
                }
            }
            for s in &r.structure {
                let _ = writeln!(out, "structure: fail ({s})");
            }
            let _ = write!(
                out,
                "pairs: {}/{} verified; ",
                r.verified_pairs(),
                r.pairs.len()
            );
            if r.passed() {
                let _ = writeln!(out, "min runtime ≥ {}", r.min_runtime);
            } else {
                let _ = writeln!(out, "certificate rejected");
            }
        }
        Report::Failure(w) => {
            let _ = writeln!(
                out,
                "failure: {} on a simple lift with {} nodes and {} edges",
                w.violation.describe(),
                w.graph.node_count(),
                w.graph.edge_count()
            );
            let _ = writeln!(
                out,
                "multigraph: {} nodes; node {} is not saturated",
                w.multigraph.node_count(),
                w.node
            );
            let _ = writeln!(out, "maximal: no");
        }
        Report::Maximality(r) => {
            let _ = writeln!(out, "feasible: {}", yes_no(r.feasible));
            let _ = writeln!(out, "saturated nodes: {}", r.saturated.len());
            for v in &r.violations {
                let _ = writeln!(out, "violation: {}", v.describe());
            }
            let _ = writeln!(out, "maximal: {}", yes_no(r.is_maximal()));
        }
        Report::Checks(r) => {
            for c in r {
                let _ = write!(out, "{}: {}", c.check, verdict(c.passed()));
                if let Some(x) = &c.counterexample {
                    let _ = write!(out, " ({x})");
                }
                out.push('\n');
            }
        }
        Report::Lines(r) => {
            for c in r {
                check_line(&mut out, "", c);
            }
        }
        Report::Homogeneity(r) => {
            for h in r {
                let _ = write!(
                    out,
                    "homogeneity d={} r={}: {} ({} pairs compared)",
                    h.d,
                    h.radius,
                    verdict(h.passed()),
                    h.checked
                );
                if let Some((a, b)) = h.violation {
                    let _ = write!(out, " (ordered balls at {a} and {b} differ)");
                }
                out.push('\n');
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversary::{run_adversary, verify_certificate, AdversaryConfig, Outcome};
    use crate::algo_zoo::{greedy_by_color, truncate};
    use crate::fracmatch::check_maximal_fm;
    use crate::graph::{GraphBuilder, Model};
    use crate::weight::{one, zero};
    use crate::FractionalMatching;

    #[test]
    fn certificate_summary() {
        let a = greedy_by_color(6);
        let Outcome::Done(cert) = run_adversary(&a, 6, &AdversaryConfig::default()).unwrap() else {
            panic!("greedy should certify")
        };
        let report = verify_certificate(&cert.to_doc(&a)).unwrap();
        let text = render_report(&Report::Certificate(report));
        assert!(
            text.ends_with("pairs: 5/5 verified; min runtime ≥ 5\n"),
            "{text}"
        );
        assert!(text.contains("pair 4 p3_tree: pass\n"));
    }

    #[test]
    fn failure_names_the_edge() {
        let a = truncate(3, 1).unwrap();
        let Outcome::Failure(w) = run_adversary(&a, 3, &AdversaryConfig::default()).unwrap() else {
            panic!("truncation should fail")
        };
        let text = render_report(&Report::Failure(w));
        assert!(text.starts_with("failure: unsaturated edge "), "{text}");
        assert!(text.ends_with("maximal: no\n"));
    }

    #[test]
    fn triangle_is_maximal() {
        let g = GraphBuilder::new(Model::EC, 3)
            .nodes(0..3)
            .edge(0, 1, 1)
            .edge(1, 2, 2)
            .edge(2, 0, 3)
            .build()
            .unwrap();
        let y = FractionalMatching::new([(0, one()), (1, zero()), (2, zero())].into());
        let r = check_maximal_fm(&g, &y).unwrap();
        let text = render_report(&Report::Maximality(r));
        assert!(text.ends_with("maximal: yes\n"), "{text}");
    }

    #[test]
    fn empty_reports_render_nothing() {
        assert_eq!(render_report(&Report::Checks(Vec::new())), "");
        assert!(Report::Checks(Vec::new()).passed());
    }
}
