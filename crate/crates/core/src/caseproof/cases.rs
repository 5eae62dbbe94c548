//! The fixed catalog of seeds for the corner case analysis around a base
//! 4-cycle `Θ₀ = {O, e₁, e₂, e₁+e₂}`.
//!
//! Each seed fixes which corners of the 4×4×3 box around Θ₀ lie in S and
//! records the box's matching premise. Subcases add committed edges or
//! components and the edges that must be dominated by parallel edges of S.

use super::engine::{prove, Focus, ProverOptions};
use super::matching::enumerate_one_factors;
use super::{
    one_factor_region, theta_prime_of, CaseError, Certificate, ContradictionKind, Edge, Fact, OneFactorPremise, Outcome,
    Seed, Subject,
};
use crate::lattice::{Point, Shape};
use crate::tiling::Placement;

/// What a case is expected to end in, as stated for it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExpectedOutcome {
    pub kind: Option<ContradictionKind>,
    /// The named obstruction. An edge witness is also matched by either of
    /// its ends.
    pub witness: Option<Subject>,
}

#[derive(Clone, Debug)]
pub struct CaseSpec {
    pub id: &'static str,
    pub title: &'static str,
    pub seed: Seed,
    pub expected: ExpectedOutcome,
}

impl CaseSpec {
    /// Checks a certificate for this case against the expectation: every
    /// leaf a contradiction, and the named obstruction among the leaves.
    pub fn check(&self, cert: &Certificate) -> Result<(), String> {
        let leaves = cert.leaves();
        if let Some(o) = leaves.iter().find(|o| !matches!(o, Outcome::Contradiction { .. })) {
            return Err(match o {
                Outcome::Completion { components } => {
                    format!("a branch completes the patch with {} components", components.len())
                }
                _ => "a branch is unexplored".into(),
            });
        }
        let found = cert.contradictions();
        if let Some(kind) = self.expected.kind {
            if !found.iter().any(|(k, _)| *k == kind) {
                return Err(format!("no {kind:?} leaf"));
            }
        }
        if let Some(w) = &self.expected.witness {
            if !found.iter().any(|(_, got)| witness_matches(w, got)) {
                let got: Vec<String> = found.iter().map(|(_, s)| subject_text(s)).collect();
                return Err(format!("witness {} not among leaves [{}]", subject_text(w), got.join(", ")));
            }
        }
        Ok(())
    }
}

fn witness_matches(expected: &Subject, got: &Subject) -> bool {
    match (expected, got) {
        (Subject::Edge(e), Subject::Vertex(v)) => e.ends().0 == v || e.ends().1 == v,
        (a, b) => a == b,
    }
}

pub(crate) fn subject_text(s: &Subject) -> String {
    match s {
        Subject::Vertex(v) => v.basis_notation(),
        Subject::Edge(e) => e.to_string(),
        Subject::Region(r) => format!("region of {} cells", r.len()),
    }
}

const IDS: [&str; 20] = [
    "zero-a1",
    "zero-a2",
    "zero-b",
    "one-corner",
    "two-corners-d3",
    "two-corners-d5",
    "two-corners-d6",
    "two-corners-d8",
    "three-corners-336",
    "three-corners-358",
    "four-mixed",
    "A.pre",
    "A.a",
    "A.b11",
    "A.b12",
    "A.b2",
    "A.c",
    "B.a",
    "B.b",
    "B.c",
];

pub fn case_ids() -> &'static [&'static str] {
    &IDS
}

fn p(c: [i64; 3]) -> Point {
    Point::from(c)
}

fn e(a: [i64; 3], b: [i64; 3]) -> Edge {
    Edge::new(p(a), p(b)).expect("catalog edges are unit edges")
}

fn unit(axis: usize, sign: i64) -> Point {
    Point::unit(3, axis).scale(sign)
}

/// `f` translated by `sign·e_{axis+1}`, as a committed edge.
fn shifted(f: &Edge, axis: usize, sign: i64) -> Fact {
    Fact::Edge(f.translate(&unit(axis, sign)))
}

/// The 4-cycle `θ + {0, u, u+v, v}`.
fn cycle(theta: [i64; 3], u: Point, v: Point) -> Fact {
    let t = p(theta);
    let cells = [t.clone(), &t + &u, &(&t + &u) + &v, &t + &v];
    let shape = Shape::new(cells).expect("four cells");
    Fact::Component(Placement::from_shape(&shape).expect("catalog cycles are squares"))
}

fn base() -> Placement {
    Placement { anchor: Point::origin(3), plane: (0, 1) }
}

const CORNERS: [[i64; 3]; 8] = [
    [-1, -1, -1],
    [-1, -1, 1],
    [-1, 2, -1],
    [-1, 2, 1],
    [2, -1, -1],
    [2, -1, 1],
    [2, 2, -1],
    [2, 2, 1],
];

/// The seed shared by every case with the corners `corners_in` in S.
fn corner_seed(corners_in: &[[i64; 3]]) -> Seed {
    let q = base();
    let inside: Vec<Point> = corners_in.iter().map(|&c| p(c)).collect();
    let mut facts = vec![Fact::Component(q.clone())];
    for c in CORNERS.map(p) {
        facts.push(if inside.contains(&c) { Fact::InS(c) } else { Fact::OutS(c) });
    }
    Seed {
        patch: theta_prime_of(&q).expand(2),
        facts,
        pairs: Vec::new(),
        one_factor: Some(OneFactorPremise { base: q, corners_in: inside }),
    }
}

/// The matching of the corner region, which must be unique.
fn unique_factor(seed: &Seed) -> Vec<Edge> {
    let premise = seed.one_factor.as_ref().unwrap();
    let mut all = enumerate_one_factors(&one_factor_region(premise));
    assert_eq!(all.len(), 1, "expected a unique matching");
    all.pop().unwrap().edges
}

fn zero_a() -> Vec<Edge> {
    vec![
        e([-1, -1, 0], [-1, -1, -1]),
        e([-1, 0, 1], [-1, 1, 1]),
        e([-1, 0, -1], [-1, 1, -1]),
        e([0, -1, -1], [1, -1, -1]),
        e([2, -1, 0], [2, -1, -1]),
        e([2, 0, 1], [2, 1, 1]),
        e([2, 0, -1], [2, 1, -1]),
        e([0, 2, 1], [-1, 2, 1]),
        e([1, 2, 1], [2, 2, 1]),
        e([1, -1, 1], [2, -1, 1]),
        e([0, -1, 1], [-1, -1, 1]),
        e([-1, 2, 0], [-1, 2, -1]),
        e([2, 2, 0], [2, 2, -1]),
        e([0, 2, -1], [1, 2, -1]),
    ]
}

fn zero_b() -> Vec<Edge> {
    vec![
        e([-1, -1, 0], [-1, -1, -1]),
        e([-1, 0, 1], [-1, -1, 1]),
        e([-1, 1, 1], [-1, 2, 1]),
        e([-1, 2, 0], [-1, 2, -1]),
        e([0, 2, -1], [1, 2, -1]),
        e([0, 2, 1], [1, 2, 1]),
        e([2, 2, -1], [2, 1, -1]),
        e([2, 2, 0], [2, 2, 1]),
        e([2, 0, -1], [2, -1, -1]),
        e([0, -1, -1], [1, -1, -1]),
        e([0, -1, 1], [1, -1, 1]),
        e([2, -1, 0], [2, -1, 1]),
        e([-1, 0, -1], [-1, 1, -1]),
        e([2, 0, 1], [2, 1, 1]),
    ]
}

const A_CORNERS: [[i64; 3]; 4] = [[-1, -1, -1], [2, -1, -1], [-1, 2, 1], [2, 2, 1]];

fn factor_a() -> Vec<Edge> {
    vec![
        e([-1, -1, 1], [-1, 0, 1]),
        e([-1, 1, -1], [-1, 2, -1]),
        e([0, -1, 1], [1, -1, 1]),
        e([2, -1, 1], [2, 0, 1]),
        e([2, 1, -1], [2, 2, -1]),
        e([0, 2, -1], [1, 2, -1]),
    ]
}

const B_CORNERS: [[i64; 3]; 4] = [[-1, -1, 1], [2, -1, 1], [-1, 2, 1], [2, 2, 1]];

fn factor_b() -> Vec<Edge> {
    vec![
        e([0, -1, -1], [1, -1, -1]),
        e([0, 2, -1], [1, 2, -1]),
        e([-1, -1, -1], [-1, 0, -1]),
        e([-1, 1, -1], [-1, 2, -1]),
        e([2, -1, -1], [2, 0, -1]),
        e([2, 1, -1], [2, 2, -1]),
    ]
}

fn instance_a() -> Seed {
    let mut s = corner_seed(&A_CORNERS);
    s.pairs = factor_a();
    s
}

/// `Θ₁…Θ₄` for instance (A); `vertical[i]` puts the cycle through corner
/// `i` in the `e₂e₃` plane, pointing away from Θ₀.
fn a_cycles(vertical: [bool; 4]) -> Vec<Fact> {
    let (x, y, z) = (|s| unit(0, s), |s| unit(1, s), |s| unit(2, s));
    let horizontal = [(x(-1), y(-1)), (x(1), y(-1)), (x(-1), y(1)), (x(1), y(1))];
    let upright = [(y(-1), z(-1)), (y(-1), z(-1)), (y(1), z(1)), (y(1), z(1))];
    (0..4)
        .map(|i| {
            let (u, v) = if vertical[i] { upright[i].clone() } else { horizontal[i].clone() };
            cycle(A_CORNERS[i], u, v)
        })
        .collect()
}

fn instance_b(differ: [(usize, usize, i64); 3]) -> Seed {
    let mut s = corner_seed(&B_CORNERS);
    let f = factor_b();
    s.facts.push(shifted(&f[0], 1, -1));
    s.facts.push(shifted(&f[2], 2, -1));
    s.facts.push(shifted(&f[3], 0, -1));
    for (k, axis, sign) in differ {
        s.facts.push(shifted(&f[k], axis, sign));
    }
    s.pairs = f;
    s
}

fn refuted(witness: Option<Subject>) -> ExpectedOutcome {
    ExpectedOutcome { kind: None, witness }
}

fn no_factor() -> ExpectedOutcome {
    ExpectedOutcome { kind: Some(ContradictionKind::NoOneFactor), witness: None }
}

pub fn paper_case(id: &str) -> Result<CaseSpec, CaseError> {
    let (title, seed, expected): (&'static str, Seed, ExpectedOutcome) = match id {
        "zero-a1" => {
            let mut s = corner_seed(&[]);
            let f = zero_a();
            s.facts.push(shifted(&f[0], 0, -1));
            let w = Subject::Edge(f[8].clone());
            s.pairs = f;
            ("no corners, disposition (a), f1 dominated by f1-e1", s, refuted(Some(w)))
        }
        "zero-a2" => {
            let mut s = corner_seed(&[]);
            let f = zero_a();
            s.facts.push(shifted(&f[0], 1, -1));
            s.facts.push(shifted(&f[4], 1, -1));
            s.pairs = f;
            ("no corners, disposition (a), f1 and f5 dominated from -e2", s, refuted(None))
        }
        "zero-b" => {
            let mut s = corner_seed(&[]);
            let f = zero_b();
            s.facts.push(shifted(&f[0], 0, -1));
            let w = Subject::Edge(f[10].clone());
            s.pairs = f;
            ("no corners, disposition (b), f1 dominated by f1-e1", s, refuted(Some(w)))
        }
        "one-corner" => ("one corner", corner_seed(&[[-1, -1, -1]]), no_factor()),
        "two-corners-d3" => {
            let mut s = corner_seed(&[[-1, -1, -1], [2, -1, -1]]);
            s.pairs = unique_factor(&s);
            s.facts.push(shifted(&e([-1, -1, 1], [0, -1, 1]), 1, -1));
            let w = Subject::Edge(e([-1, 2, -1], [-1, 1, -1]));
            ("two corners at distance 3", s, refuted(Some(w)))
        }
        "two-corners-d5" => {
            let mut s = corner_seed(&[[-1, -1, -1], [2, -1, 1]]);
            s.pairs = unique_factor(&s);
            let w = Subject::Edge(e([2, 0, -1], [2, 1, -1]));
            ("two corners at distance 5", s, refuted(Some(w)))
        }
        "two-corners-d6" => ("two corners at distance 6", corner_seed(&[[-1, -1, -1], [2, 2, -1]]), no_factor()),
        "two-corners-d8" => ("two corners at distance 8", corner_seed(&[[-1, -1, -1], [2, 2, 1]]), no_factor()),
        "three-corners-336" => (
            "three corners, distances (3,3,6)",
            corner_seed(&[[-1, -1, -1], [2, -1, -1], [2, 2, -1]]),
            no_factor(),
        ),
        "three-corners-358" => (
            "three corners, distances (3,5,8)",
            corner_seed(&[[-1, -1, -1], [2, -1, -1], [2, 2, 1]]),
            no_factor(),
        ),
        "four-mixed" => (
            "four corners, three on one face plane",
            corner_seed(&[[-1, -1, -1], [2, -1, -1], [-1, 2, -1], [2, 2, 1]]),
            no_factor(),
        ),
        "A.pre" => {
            let mut s = instance_a();
            let (t1, t3) = (p(A_CORNERS[0]), p(A_CORNERS[2]));
            s.facts.push(Fact::Edge(Edge::new(t1.clone(), &t1 - &unit(0, 1)).unwrap()));
            s.facts.push(Fact::Edge(Edge::new(t3.clone(), &t3 + &unit(2, 1)).unwrap()));
            let w = Subject::Edge(factor_a()[0].clone());
            ("instance (A), corner edges along -e1 and +e3", s, refuted(Some(w)))
        }
        "A.a" => {
            let mut s = instance_a();
            s.facts.extend(a_cycles([false; 4]));
            ("instance (A), all corner cycles horizontal", s, refuted(Some(Subject::Vertex(p([0, 0, -2])))))
        }
        "A.b11" | "A.b12" | "A.b2" => {
            let mut s = instance_a();
            s.facts.extend(a_cycles([true; 4]));
            let f6 = factor_a()[5].clone();
            let g = Subject::Edge(e([0, 1, -2], [1, 1, -2]));
            match id {
                "A.b11" => {
                    s.facts.push(shifted(&f6, 1, 1));
                    s.facts.push(Fact::Component(base().translate(&unit(2, -3))));
                    ("instance (A), upright cycles, f6+e2, Θ0-3e3", s, refuted(Some(Subject::Vertex(p([-1, 1, -2])))))
                }
                "A.b12" => {
                    s.facts.push(shifted(&f6, 1, 1));
                    s.facts.push(Fact::Component(Placement { anchor: p([0, 0, -4]), plane: (0, 2) }));
                    ("instance (A), upright cycles, f6+e2, cycle below -3e3", s, refuted(Some(g)))
                }
                _ => {
                    s.facts.push(shifted(&f6, 2, -1));
                    ("instance (A), upright cycles, f6-e3", s, refuted(Some(g)))
                }
            }
        }
        "A.c" => {
            let mut s = instance_a();
            s.facts.extend(a_cycles([false, true, false, true]));
            ("instance (A), mixed corner cycles", s, refuted(Some(Subject::Vertex(p([0, 0, -2])))))
        }
        "B.a" => ("instance (B), case (a)", instance_b([(1, 1, 1), (4, 0, 1), (5, 2, -1)]), refuted(None)),
        "B.b" => ("instance (B), case (b)", instance_b([(1, 2, -1), (4, 2, -1), (5, 0, 1)]), refuted(None)),
        "B.c" => ("instance (B), case (c)", instance_b([(1, 1, 1), (4, 2, -1), (5, 0, 1)]), refuted(None)),
        _ => return Err(CaseError::UnknownCase(id.to_string())),
    };
    let id = IDS.iter().find(|&&k| k == id).copied().expect("catalog ids");
    Ok(CaseSpec { id, title, seed, expected })
}

/// Salted orders tried after the fixed ones when looking for a proof that
/// ends at the named obstruction.
pub const WITNESS_SALTS: u64 = 256;

/// Proves a catalog case. Every order yields a valid certificate; when the
/// case names an obstruction, orders are tried until a proof ends there.
pub fn run_paper_case(id: &str) -> Result<Certificate, CaseError> {
    let spec = paper_case(id)?;
    let preferred: Vec<Subject> = spec.expected.witness.iter().cloned().collect();
    let fixed = [Focus::None, Focus::Near, Focus::Far].map(|focus| (focus, None));
    let salted = (0..WITNESS_SALTS).map(|s| (Focus::None, Some(s)));
    let mut first = None;
    for (focus, order_salt) in fixed.into_iter().chain(salted) {
        let options = ProverOptions { preferred_witnesses: preferred.clone(), focus, order_salt, ..ProverOptions::default() };
        let cert = prove(spec.id, &spec.seed, &options)?;
        // completions do not depend on the order
        if preferred.is_empty() || !cert.is_refutation() || spec.check(&cert).is_ok() {
            return Ok(cert);
        }
        first.get_or_insert(cert);
    }
    Ok(first.expect("at least one order was tried"))
}
