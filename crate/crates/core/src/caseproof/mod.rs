//! Forced-domination propagation over finite patches, with proof trees that
//! an independent checker can replay.
//!
//! A configuration assigns lattice cells to S or its complement; unassigned
//! cells are unknown. Rules fire only at cells of the patch, but may assign
//! cells a few steps outside it. When propagation stalls the prover splits on
//! the most constrained open subject, so every seed ends in a tree whose
//! leaves are contradictions, completions of the patch, or budget cut-offs.

mod cases;
mod config;
mod engine;
mod matching;
mod replay;
mod rigidity;
mod transcript;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice::{BoxPatch, Point, Shape};
use crate::tiling::Placement;

pub use cases::{case_ids, paper_case, run_paper_case, CaseSpec, ExpectedOutcome, WITNESS_SALTS};
pub use config::PartialConfig;
pub use engine::{propagate, propagate_in_order, prove, Focus, Propagation, ProverOptions};
pub use matching::{enumerate_one_factors, OneFactor};
pub use replay::{replay_certificate, ReplayError, ReplaySummary};
pub use rigidity::{
    canonical_restrictions, local_rigidity_search, rigidity_from_seed, rigidity_search_with_inner, RigidityOutcome,
};
pub use transcript::transcript;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CaseError {
    #[error("shape is not a 4-cycle")]
    NotAQ2,
    #[error("inconsistent seed: {0}")]
    InconsistentSeed(String),
    #[error("unknown case id {0:?}")]
    UnknownCase(String),
    #[error("seed reaches outside the working grid at {0}")]
    OutOfGrid(Point),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellState {
    InS,
    OutS,
    Unknown,
}

/// An unordered pair of adjacent cells, stored with the smaller end first.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "[Point; 2]", into = "[Point; 2]")]
pub struct Edge(Point, Point);

impl Edge {
    pub fn new(a: Point, b: Point) -> Option<Edge> {
        if !a.is_adjacent(&b) {
            return None;
        }
        Some(if a <= b { Edge(a, b) } else { Edge(b, a) })
    }

    pub fn ends(&self) -> (&Point, &Point) {
        (&self.0, &self.1)
    }

    pub fn axis(&self) -> usize {
        (0..self.0.dim()).find(|&i| self.0 .0[i] != self.1 .0[i]).unwrap()
    }

    pub fn translate(&self, z: &Point) -> Edge {
        Edge(&self.0 + z, &self.1 + z)
    }
}

impl TryFrom<[Point; 2]> for Edge {
    type Error = String;
    fn try_from([a, b]: [Point; 2]) -> Result<Self, String> {
        Edge::new(a, b).ok_or_else(|| "edge ends are not adjacent".into())
    }
}

impl From<Edge> for [Point; 2] {
    fn from(e: Edge) -> Self {
        [e.0, e.1]
    }
}

impl fmt::Debug for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.0, self.1)
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.0.basis_notation(), self.1.basis_notation())
    }
}

/// Something a rule or a contradiction is about.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Subject {
    Vertex(Point),
    Edge(Edge),
    Region(Vec<Point>),
}

/// A single piece of knowledge about S.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fact {
    InS(Point),
    OutS(Point),
    /// Both ends in S.
    Edge(Edge),
    /// A whole component: its cells in S and its outer neighbours not.
    Component(Placement),
}

/// Why a deduction holds.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "rule")]
pub enum Reason {
    /// R1: `vertex` is outside S and needs a dominator; the fact holds for
    /// every component that could still dominate it.
    Dominator { vertex: Point },
    /// R2: `vertex` is already dominated by `dominator`, so its other
    /// neighbours are outside S.
    UniqueDominator { vertex: Point, dominator: Point },
    /// R3: `vertex` is in S; the fact holds for every component that could
    /// still contain it.
    Completion { vertex: Point },
    /// No consistent component contains `vertex`.
    Unplaceable { vertex: Point },
    /// `edge` must be dominated by a parallel edge of S; the fact holds for
    /// every component that could still contain such an edge.
    PairDomination { edge: Edge },
}

impl Reason {
    pub fn subject(&self) -> Subject {
        match self {
            Reason::Dominator { vertex }
            | Reason::UniqueDominator { vertex, .. }
            | Reason::Completion { vertex }
            | Reason::Unplaceable { vertex } => Subject::Vertex(vertex.clone()),
            Reason::PairDomination { edge } => Subject::Edge(edge.clone()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Deduction {
    pub fact: Fact,
    pub reason: Reason,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ContradictionKind {
    UndominatedVertex,
    DoublyDominatedVertex,
    NoOneFactor,
    NoValidComponentExtension,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Branch {
    pub assume: Fact,
    pub node: ProofNode,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "outcome")]
pub enum Outcome {
    Contradiction { kind: ContradictionKind, witness: Subject },
    /// Exhaustive case distinction on `subject`.
    Split { subject: Subject, branches: Vec<Branch> },
    /// Every patch cell decided, dominated and in a committed component.
    Completion { components: Vec<Placement> },
    /// Not explored (budget exhausted or search stopped early).
    Unexplored,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ProofNode {
    pub deductions: Vec<Deduction>,
    #[serde(flatten)]
    pub outcome: Outcome,
}

/// States that the corners of the box around `base` lying in S are exactly
/// `corners_in`, so that the cells of that box outside the closed
/// neighbourhoods of `base` and of those corners must admit a perfect
/// matching.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OneFactorPremise {
    pub base: Placement,
    pub corners_in: Vec<Point>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Seed {
    pub patch: BoxPatch,
    pub facts: Vec<Fact>,
    /// Edges each of which must be dominated by a parallel edge of S.
    #[serde(default)]
    pub pairs: Vec<Edge>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub one_factor: Option<OneFactorPremise>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Certificate {
    pub schema_version: u32,
    pub case_id: String,
    pub seed: Seed,
    pub root: ProofNode,
}

impl Certificate {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// True iff every leaf is a contradiction.
    pub fn is_refutation(&self) -> bool {
        self.root.is_refutation()
    }

    /// Leaves in depth-first order.
    pub fn leaves(&self) -> Vec<&Outcome> {
        let mut out = Vec::new();
        self.root.collect_leaves(&mut out);
        out
    }

    pub fn contradictions(&self) -> Vec<(ContradictionKind, &Subject)> {
        self.leaves()
            .into_iter()
            .filter_map(|o| match o {
                Outcome::Contradiction { kind, witness } => Some((*kind, witness)),
                _ => None,
            })
            .collect()
    }

    pub fn completions(&self) -> Vec<&[Placement]> {
        self.leaves()
            .into_iter()
            .filter_map(|o| match o {
                Outcome::Completion { components } => Some(components.as_slice()),
                _ => None,
            })
            .collect()
    }

    pub fn node_count(&self) -> usize {
        self.root.node_count()
    }

    pub fn deduction_count(&self) -> usize {
        self.root.deduction_count()
    }
}

impl ProofNode {
    pub fn is_refutation(&self) -> bool {
        match &self.outcome {
            Outcome::Contradiction { .. } => true,
            Outcome::Split { branches, .. } => branches.iter().all(|b| b.node.is_refutation()),
            Outcome::Completion { .. } | Outcome::Unexplored => false,
        }
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a Outcome>) {
        match &self.outcome {
            Outcome::Split { branches, .. } => branches.iter().for_each(|b| b.node.collect_leaves(out)),
            o => out.push(o),
        }
    }

    fn node_count(&self) -> usize {
        1 + match &self.outcome {
            Outcome::Split { branches, .. } => branches.iter().map(|b| b.node.node_count()).sum(),
            _ => 0,
        }
    }

    fn deduction_count(&self) -> usize {
        self.deductions.len()
            + match &self.outcome {
                Outcome::Split { branches, .. } => branches.iter().map(|b| b.node.deduction_count()).sum(),
                _ => 0,
            }
    }
}

/// The smallest box holding the closed neighbourhood of a 4-cycle, grown to
/// width 3 along the normal axis: `P₄ □ P₄ □ P₃` in three dimensions.
pub fn theta_prime(theta: &Shape) -> Result<BoxPatch, CaseError> {
    let q = Placement::from_shape(theta).ok_or(CaseError::NotAQ2)?;
    Ok(theta_prime_of(&q))
}

pub(crate) fn theta_prime_of(q: &Placement) -> BoxPatch {
    let n = q.anchor.dim();
    let lo = Point((0..n).map(|i| q.anchor.0[i] - 1).collect());
    let hi = Point(
        (0..n)
            .map(|i| q.anchor.0[i] + if i == q.plane.0 || i == q.plane.1 { 2 } else { 1 })
            .collect(),
    );
    BoxPatch { lo, hi }
}

/// The cells of `theta_prime` outside the closed neighbourhood of `q`.
pub fn outer_region(q: &Placement) -> Vec<Point> {
    let star = crate::lattice::closed_neighborhood_shape(&q.shape()).expect("nonempty");
    theta_prime_of(q).cells().into_iter().filter(|c| !star.contains(c)).collect()
}

/// Region left for the matching once `corners_in` and their neighbours are removed.
pub fn one_factor_region(premise: &OneFactorPremise) -> Vec<Point> {
    outer_region(&premise.base)
        .into_iter()
        .filter(|c| premise.corners_in.iter().all(|k| k.distance(c) > 1))
        .collect()
}
