//! Certificate checker.
//!
//! Deliberately shares no rule code with the engine: the configuration is a
//! plain hash map over points, candidate components are recomputed from the
//! definitions, and matchings are counted with the exact-cover solver.

use std::collections::{HashMap, HashSet};

use thiserror::Error;

use super::{
    one_factor_region, theta_prime_of, Certificate, CellState, ContradictionKind, Deduction, Edge, Fact, Outcome,
    ProofNode, Reason, Seed, Subject, SCHEMA_VERSION,
};
use crate::lattice::{BoxPatch, Point};
use crate::tiling::{planes, ExactCover, Placement};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReplayError {
    #[error("unsupported schema_version {0}")]
    Schema(u32),
    #[error("seed: {0}")]
    Seed(String),
    #[error("at {path}, deduction {step}: {message}")]
    Deduction { path: String, step: usize, message: String },
    #[error("at {path}: {message}")]
    Outcome { path: String, message: String },
}

/// Counts from a successful replay.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ReplaySummary {
    pub nodes: usize,
    pub deductions: usize,
    pub contradictions: usize,
    pub completions: usize,
    pub unexplored: usize,
}

impl ReplaySummary {
    /// Replay succeeded and the tree refutes its seed.
    pub fn refutes(&self) -> bool {
        self.completions == 0 && self.unexplored == 0
    }
}

#[derive(Clone)]
struct State {
    patch: BoxPatch,
    cells: HashMap<Point, CellState>,
    comp_of: HashMap<Point, usize>,
    comps: Vec<Placement>,
    pairs: Vec<Edge>,
}

fn square(q: &Placement) -> Vec<Point> {
    let n = q.anchor.dim();
    let (a, b) = q.plane;
    let ea = Point::unit(n, a);
    let eb = Point::unit(n, b);
    vec![q.anchor.clone(), &q.anchor + &ea, &q.anchor + &eb, &(&q.anchor + &ea) + &eb]
}

fn shell(q: &Placement) -> Vec<Point> {
    let cells = square(q);
    let mut out: Vec<Point> = cells.iter().flat_map(|c| c.neighbors()).filter(|p| !cells.contains(p)).collect();
    out.sort();
    out.dedup();
    out
}

fn squares_containing(p: &Point) -> Vec<Placement> {
    let n = p.dim();
    let mut out = Vec::new();
    for (a, b) in planes(n) {
        for (da, db) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
            let mut anchor = p.clone();
            anchor.0[a] -= da;
            anchor.0[b] -= db;
            out.push(Placement { anchor, plane: (a, b) });
        }
    }
    out
}

impl State {
    fn get(&self, p: &Point) -> CellState {
        self.cells.get(p).copied().unwrap_or(CellState::Unknown)
    }

    fn put(&mut self, p: &Point, s: CellState) -> Result<(), String> {
        match self.get(p) {
            CellState::Unknown => {
                self.cells.insert(p.clone(), s);
                Ok(())
            }
            old if old == s => Ok(()),
            old => Err(format!("{p} is {old:?}, fact needs {s:?}")),
        }
    }

    fn apply(&mut self, f: &Fact) -> Result<(), String> {
        match f {
            Fact::InS(p) => self.put(p, CellState::InS),
            Fact::OutS(p) => self.put(p, CellState::OutS),
            Fact::Edge(e) => {
                self.put(e.ends().0, CellState::InS)?;
                self.put(e.ends().1, CellState::InS)
            }
            Fact::Component(q) => {
                if q.plane.0 >= q.plane.1 || q.plane.1 >= q.anchor.dim() {
                    return Err("bad plane".into());
                }
                for c in square(q) {
                    self.put(&c, CellState::InS)?;
                    if self.comp_of.insert(c.clone(), self.comps.len()).is_some() {
                        return Err(format!("{c} already in a component"));
                    }
                }
                for s in shell(q) {
                    self.put(&s, CellState::OutS)?;
                }
                self.comps.push(q.clone());
                Ok(())
            }
        }
    }

    fn in_neighbors(&self, v: &Point) -> Vec<Point> {
        v.neighbors().filter(|u| self.get(u) == CellState::InS).collect()
    }

    fn consistent(&self, q: &Placement) -> bool {
        let cells = square(q);
        if cells.iter().any(|c| self.get(c) == CellState::OutS) {
            return false;
        }
        shell(q).iter().all(|s| match self.get(s) {
            CellState::InS => false,
            CellState::OutS => s.neighbors().all(|t| cells.contains(&t) || self.get(&t) != CellState::InS),
            CellState::Unknown => true,
        })
    }

    fn filter_consistent(&self, mut v: Vec<Placement>) -> Vec<Placement> {
        v.sort();
        v.dedup();
        v.retain(|q| self.consistent(q));
        v
    }

    fn containing(&self, u: &Point) -> Vec<Placement> {
        self.filter_consistent(squares_containing(u))
    }

    fn dominating(&self, v: &Point) -> Vec<Placement> {
        self.filter_consistent(v.neighbors().flat_map(|u| squares_containing(&u)).collect())
    }

    fn pair_dominating(&self, e: &Edge) -> Vec<Placement> {
        let (p, q) = e.ends();
        let axis = e.axis();
        let n = p.dim();
        let mut out = Vec::new();
        for d in (0..n).filter(|&d| d != axis) {
            for s in [1, -1] {
                let z = Point::unit(n, d).scale(s);
                let (pp, qq) = (p + &z, q + &z);
                out.extend(squares_containing(&pp).into_iter().filter(|sq| square(sq).contains(&qq)));
            }
        }
        self.filter_consistent(out)
    }

    fn pair_resolved(&self, e: &Edge) -> bool {
        let (p, q) = e.ends();
        let n = p.dim();
        (0..n).filter(|&d| d != e.axis()).any(|d| {
            [1, -1].iter().any(|&s| {
                let z = Point::unit(n, d).scale(s);
                match (self.comp_of.get(&(p + &z)), self.comp_of.get(&(q + &z))) {
                    (Some(a), Some(b)) => a == b,
                    _ => false,
                }
            })
        })
    }

    fn require_patch(&self, v: &Point) -> Result<(), String> {
        if self.patch.contains(v) {
            Ok(())
        } else {
            Err(format!("{v} is outside the patch"))
        }
    }
}

/// Whether `fact` holds in every candidate of the non-empty list `cands`.
fn implied(cands: &[Placement], fact: &Fact, st: &State) -> Result<(), String> {
    if cands.is_empty() {
        return Err("no candidates: a contradiction was due, not a deduction".into());
    }
    let every_cell = |p: &Point| cands.iter().all(|q| square(q).contains(p));
    match fact {
        Fact::Component(q) => {
            if cands.len() == 1 && &cands[0] == q {
                Ok(())
            } else {
                Err(format!("{q:?} is not the only candidate ({} remain)", cands.len()))
            }
        }
        Fact::InS(p) if every_cell(p) => Ok(()),
        Fact::Edge(e) if every_cell(e.ends().0) && every_cell(e.ends().1) => Ok(()),
        Fact::OutS(p) if cands.iter().all(|q| shell(q).contains(p)) => Ok(()),
        _ => Err(format!("{fact:?} is not common to the {} candidates", cands.len())),
    }
    .and_then(|()| match fact {
        Fact::Component(q) if st.comps.contains(q) => Err("component already committed".into()),
        _ => Ok(()),
    })
}

fn check_deduction(st: &State, d: &Deduction) -> Result<(), String> {
    match &d.reason {
        Reason::Dominator { vertex } => {
            st.require_patch(vertex)?;
            if st.get(vertex) != CellState::OutS {
                return Err(format!("{vertex} is not outside S"));
            }
            implied(&st.dominating(vertex), &d.fact, st)
        }
        Reason::UniqueDominator { vertex, dominator } => {
            st.require_patch(vertex)?;
            if st.get(vertex) != CellState::OutS {
                return Err(format!("{vertex} is not outside S"));
            }
            if st.in_neighbors(vertex) != vec![dominator.clone()] {
                return Err(format!("{dominator} is not the unique dominator of {vertex}"));
            }
            match &d.fact {
                Fact::OutS(w) if w.is_adjacent(vertex) && w != dominator => Ok(()),
                f => Err(format!("{f:?} does not follow from a unique dominator")),
            }
        }
        Reason::Completion { vertex } => {
            st.require_patch(vertex)?;
            if st.get(vertex) != CellState::InS {
                return Err(format!("{vertex} is not in S"));
            }
            implied(&st.containing(vertex), &d.fact, st)
        }
        Reason::Unplaceable { vertex } => {
            st.require_patch(vertex)?;
            if d.fact != Fact::OutS(vertex.clone()) {
                return Err("exclusion must conclude OutS of its vertex".into());
            }
            if st.containing(vertex).is_empty() {
                Ok(())
            } else {
                Err(format!("{vertex} still lies in a consistent component"))
            }
        }
        Reason::PairDomination { edge } => {
            if !st.pairs.contains(edge) {
                return Err(format!("{edge:?} is not a premise pair"));
            }
            implied(&st.pair_dominating(edge), &d.fact, st)
        }
    }
}

fn matching_count(region: &[Point]) -> u64 {
    let index: HashMap<&Point, usize> = region.iter().enumerate().map(|(i, p)| (p, i)).collect();
    let mut ec = ExactCover::new(region.len());
    for (i, p) in region.iter().enumerate() {
        for q in p.neighbors() {
            if let Some(&j) = index.get(&q) {
                if i < j {
                    ec.add_option(&[i, j]);
                }
            }
        }
    }
    ec.solve(&[], None, |_| true).map_or(0, |s| s.solutions)
}

fn check_one_factor(seed: &Seed, region: &[Point]) -> Result<(), String> {
    let premise = seed.one_factor.as_ref().ok_or("no one-factor premise in the seed")?;
    if !seed.facts.contains(&Fact::Component(premise.base.clone())) {
        return Err("premise base is not a seed component".into());
    }
    for corner in theta_prime_of(&premise.base).corners() {
        let wanted = if premise.corners_in.contains(&corner) { Fact::InS(corner.clone()) } else { Fact::OutS(corner.clone()) };
        if !seed.facts.contains(&wanted) {
            return Err(format!("seed does not state {wanted:?}"));
        }
    }
    let mut expected = one_factor_region(premise);
    expected.sort();
    let mut got = region.to_vec();
    got.sort();
    if expected != got {
        return Err("region differs from the premise".into());
    }
    match matching_count(region) {
        0 => Ok(()),
        k => Err(format!("region has {k} perfect matchings")),
    }
}

fn check_outcome(st: &State, seed: &Seed, node: &ProofNode, is_root: bool, path: &str, sum: &mut ReplaySummary) -> Result<(), ReplayError> {
    let fail = |message: String| ReplayError::Outcome { path: path.to_string(), message };
    match &node.outcome {
        Outcome::Contradiction { kind, witness } => {
            sum.contradictions += 1;
            let ok: Result<(), String> = match (kind, witness) {
                (ContradictionKind::UndominatedVertex, Subject::Vertex(v)) => st.require_patch(v).and_then(|()| {
                    let excluded = match st.get(v) {
                        CellState::OutS => true,
                        CellState::Unknown => st.containing(v).is_empty() && st.in_neighbors(v).is_empty(),
                        CellState::InS => false,
                    };
                    if excluded && st.dominating(v).is_empty() {
                        Ok(())
                    } else {
                        Err(format!("{v} can still be dominated"))
                    }
                }),
                (ContradictionKind::UndominatedVertex, Subject::Edge(e)) => {
                    if st.pairs.contains(e) && st.pair_dominating(e).is_empty() {
                        Ok(())
                    } else {
                        Err(format!("{e:?} can still be dominated"))
                    }
                }
                (ContradictionKind::DoublyDominatedVertex, Subject::Vertex(v)) => st.require_patch(v).and_then(|()| {
                    if st.get(v) == CellState::OutS && st.in_neighbors(v).len() >= 2 {
                        Ok(())
                    } else {
                        Err(format!("{v} is not doubly dominated"))
                    }
                }),
                (ContradictionKind::NoValidComponentExtension, Subject::Vertex(u)) => st.require_patch(u).and_then(|()| {
                    if st.get(u) == CellState::InS && st.containing(u).is_empty() {
                        Ok(())
                    } else {
                        Err(format!("{u} still extends to a component"))
                    }
                }),
                (ContradictionKind::NoOneFactor, Subject::Region(r)) => {
                    if !is_root || !node.deductions.is_empty() {
                        Err("a matching obstruction must close the root directly".into())
                    } else {
                        check_one_factor(seed, r)
                    }
                }
                (k, w) => Err(format!("{k:?} cannot have witness {w:?}")),
            };
            ok.map_err(fail)
        }
        Outcome::Split { subject, branches } => {
            let required: Vec<Fact> = match subject {
                Subject::Vertex(v) => {
                    st.require_patch(v).map_err(fail)?;
                    match st.get(v) {
                        CellState::Unknown => vec![Fact::InS(v.clone()), Fact::OutS(v.clone())],
                        CellState::InS if !st.comp_of.contains_key(v) => {
                            st.containing(v).into_iter().map(Fact::Component).collect()
                        }
                        CellState::OutS if st.in_neighbors(v).is_empty() => {
                            st.dominating(v).into_iter().map(Fact::Component).collect()
                        }
                        _ => return Err(fail(format!("{v} is not an open subject"))),
                    }
                }
                Subject::Edge(e) if st.pairs.contains(e) && !st.pair_resolved(e) => {
                    st.pair_dominating(e).into_iter().map(Fact::Component).collect()
                }
                s => return Err(fail(format!("{s:?} is not an open subject"))),
            };
            let offered: HashSet<&Fact> = branches.iter().map(|b| &b.assume).collect();
            if let Some(missing) = required.iter().find(|f| !offered.contains(f)) {
                return Err(fail(format!("split omits the alternative {missing:?}")));
            }
            for (i, b) in branches.iter().enumerate() {
                let mut child = st.clone();
                let sub = format!("{path}/{i}");
                child
                    .apply(&b.assume)
                    .map_err(|m| ReplayError::Outcome { path: sub.clone(), message: format!("assumption: {m}") })?;
                replay_node(child, seed, &b.node, false, &sub, sum)?;
            }
            Ok(())
        }
        Outcome::Completion { components } => {
            sum.completions += 1;
            let mut mine = st.comps.clone();
            mine.sort();
            if &mine != components {
                return Err(fail("listed components differ from the committed ones".into()));
            }
            for p in st.patch.cells() {
                let ok = match st.get(&p) {
                    CellState::InS => st.comp_of.contains_key(&p),
                    CellState::OutS => st.in_neighbors(&p).len() == 1,
                    CellState::Unknown => false,
                };
                if !ok {
                    return Err(fail(format!("{p} is not settled")));
                }
            }
            if let Some(e) = st.pairs.iter().find(|e| !st.pair_resolved(e)) {
                return Err(fail(format!("pair {e:?} is unresolved")));
            }
            Ok(())
        }
        Outcome::Unexplored => {
            sum.unexplored += 1;
            Ok(())
        }
    }
}

fn replay_node(mut st: State, seed: &Seed, node: &ProofNode, is_root: bool, path: &str, sum: &mut ReplaySummary) -> Result<(), ReplayError> {
    sum.nodes += 1;
    for (step, d) in node.deductions.iter().enumerate() {
        let err = |message: String| ReplayError::Deduction { path: path.to_string(), step, message };
        check_deduction(&st, d).map_err(err)?;
        st.apply(&d.fact).map_err(err)?;
        sum.deductions += 1;
    }
    check_outcome(&st, seed, node, is_root, path, sum)
}

/// Checks every step of a certificate from its seed.
pub fn replay_certificate(cert: &Certificate) -> Result<ReplaySummary, ReplayError> {
    if cert.schema_version != SCHEMA_VERSION {
        return Err(ReplayError::Schema(cert.schema_version));
    }
    let seed = &cert.seed;
    let mut st = State {
        patch: seed.patch.clone(),
        cells: HashMap::new(),
        comp_of: HashMap::new(),
        comps: Vec::new(),
        pairs: seed.pairs.clone(),
    };
    for f in &seed.facts {
        st.apply(f).map_err(ReplayError::Seed)?;
    }
    let mut sum = ReplaySummary::default();
    replay_node(st, seed, &cert.root, true, "root", &mut sum)?;
    Ok(sum)
}
