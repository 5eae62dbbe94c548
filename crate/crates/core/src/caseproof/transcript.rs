//! Human-readable rendering of certificates, one line per step.

use std::fmt::Write;

use super::cases::subject_text;
use super::{Certificate, ContradictionKind, Fact, Outcome, ProofNode, Reason};

fn fact_text(f: &Fact) -> String {
    match f {
        Fact::InS(p) => format!("{} ∈ S", p.basis_notation()),
        Fact::OutS(p) => format!("{} ∉ S", p.basis_notation()),
        Fact::Edge(e) => format!("edge {e} in S"),
        Fact::Component(q) => {
            let cells: Vec<String> = q.cells().iter().map(|c| c.basis_notation()).collect();
            format!("4-cycle ({}) in S", cells.join(", "))
        }
    }
}

fn reason_text(r: &Reason) -> String {
    match r {
        Reason::Dominator { vertex } => {
            format!("{} ∉ S must be dominated and every remaining 4-cycle doing so agrees", vertex.basis_notation())
        }
        Reason::UniqueDominator { vertex, dominator } => {
            format!("{} is already dominated by {}", vertex.basis_notation(), dominator.basis_notation())
        }
        Reason::Completion { vertex } => {
            format!("every 4-cycle still able to contain {} agrees", vertex.basis_notation())
        }
        Reason::Unplaceable { vertex } => format!("no 4-cycle through {} fits", vertex.basis_notation()),
        Reason::PairDomination { edge } => {
            format!("{edge} must be dominated by a parallel edge of S")
        }
    }
}

fn contradiction_text(kind: ContradictionKind, witness: &str) -> String {
    match kind {
        ContradictionKind::UndominatedVertex => format!("{witness} cannot be dominated by S"),
        ContradictionKind::DoublyDominatedVertex => format!("{witness} is dominated twice"),
        ContradictionKind::NoOneFactor => format!("the {witness} has no 1-factor"),
        ContradictionKind::NoValidComponentExtension => format!("{witness} lies in no admissible 4-cycle"),
    }
}

fn node(out: &mut String, n: &ProofNode, depth: usize) {
    let pad = "  ".repeat(depth);
    for d in &n.deductions {
        let _ = writeln!(out, "{pad}{}, forced, since {}.", fact_text(&d.fact), reason_text(&d.reason));
    }
    match &n.outcome {
        Outcome::Contradiction { kind, witness } => {
            let _ = writeln!(out, "{pad}But then {}, a contradiction.", contradiction_text(*kind, &subject_text(witness)));
        }
        Outcome::Split { subject, branches } => {
            let _ = writeln!(out, "{pad}Cases on {}:", subject_text(subject));
            for (i, b) in branches.iter().enumerate() {
                let _ = writeln!(out, "{pad}({}) Assume {}.", i + 1, fact_text(&b.assume));
                node(out, &b.node, depth + 1);
            }
        }
        Outcome::Completion { components } => {
            let _ = writeln!(out, "{pad}The patch is completed by {} 4-cycles.", components.len());
        }
        Outcome::Unexplored => {
            let _ = writeln!(out, "{pad}(not explored)");
        }
    }
}

/// Renders the whole proof tree.
pub fn transcript(cert: &Certificate) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "Case {}.", cert.case_id);
    for f in &cert.seed.facts {
        let _ = writeln!(out, "Given {}.", fact_text(f));
    }
    for e in &cert.seed.pairs {
        let _ = writeln!(out, "Given {e} is dominated by a parallel edge of S.");
    }
    node(&mut out, &cert.root, 0);
    out
}
