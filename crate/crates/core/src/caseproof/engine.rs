use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use super::config::PartialConfig;
use super::matching::enumerate_one_factors;
use super::{
    one_factor_region, Branch, CaseError, Certificate, CellState, ContradictionKind, Deduction, Edge, Fact, Outcome,
    ProofNode, Reason, Seed, Subject, SCHEMA_VERSION,
};
use crate::lattice::{BoxPatch, Point};
use crate::tiling::{planes, Placement};

const UNKNOWN: u8 = 0;
const IN: u8 = 1;
const OUT: u8 = 2;
const NONE: u32 = u32::MAX;

// Rules read cells up to ℓ¹ distance 5 from their subject: a candidate
// component touches a neighbour (1), spans two more steps (3), its shell is
// one further (4) and shell cells are checked for other dominators (5).
const READ_RADIUS: i64 = 5;
const MARGIN: i64 = READ_RADIUS + 2;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProverOptions {
    /// Bound on proof-tree nodes.
    pub max_nodes: Option<u64>,
    /// Leave the remaining branches unexplored once a completion is found.
    pub stop_at_completion: bool,
    /// Process subjects in a hashed order instead of the canonical one.
    pub order_salt: Option<u64>,
    /// Obstructions to report whenever one of them holds at a
    /// contradiction found elsewhere.
    pub preferred_witnesses: Vec<Subject>,
    /// Where processing starts relative to the preferred witnesses.
    pub focus: Focus,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Focus {
    #[default]
    None,
    /// Subjects nearest the preferred witnesses first.
    Near,
    /// Subjects farthest from them first, so they are reached last.
    Far,
}

impl Default for ProverOptions {
    fn default() -> Self {
        ProverOptions { max_nodes: Some(200_000), stop_at_completion: false, order_salt: None, preferred_witnesses: Vec::new(), focus: Focus::None }
    }
}

/// Result of [`propagate`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Propagation {
    pub config: PartialConfig,
    pub deductions: Vec<Deduction>,
    pub contradiction: Option<(ContradictionKind, Subject)>,
}

struct Geometry {
    dim: usize,
    lo: Vec<i64>,
    size: Vec<i64>,
    strides: Vec<isize>,
    len: usize,
    patch: BoxPatch,
    in_patch: Vec<bool>,
    patch_cells: Vec<usize>,
    center2: Vec<i64>,
    planes: Vec<(usize, usize)>,
    plane_cells: Vec<[isize; 4]>,
    plane_shell: Vec<Vec<isize>>,
    units: Vec<isize>,
    ball: Vec<isize>,
    pairs: Vec<(usize, usize, usize)>,
    pairs_near: HashMap<usize, Vec<usize>>,
}

impl Geometry {
    fn new(patch: &BoxPatch, pair_edges: &[Edge]) -> Result<Self, CaseError> {
        let dim = patch.dim();
        let lo: Vec<i64> = patch.lo.coords().iter().map(|c| c - MARGIN).collect();
        let size: Vec<i64> = patch.side_lengths().iter().map(|s| s + 2 * MARGIN).collect();
        let mut strides = vec![1isize; dim];
        for i in (0..dim.saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * size[i + 1] as isize;
        }
        let len = size.iter().product::<i64>() as usize;
        let mut g = Geometry {
            dim,
            lo,
            size,
            strides,
            len,
            patch: patch.clone(),
            in_patch: vec![false; len],
            patch_cells: Vec::new(),
            center2: patch.lo.coords().iter().zip(patch.hi.coords()).map(|(a, b)| a + b).collect(),
            planes: planes(dim),
            plane_cells: Vec::new(),
            plane_shell: Vec::new(),
            units: Vec::new(),
            ball: Vec::new(),
            pairs: Vec::new(),
            pairs_near: HashMap::new(),
        };
        for p in patch.cells() {
            let i = g.index(&p).unwrap();
            g.in_patch[i] = true;
            g.patch_cells.push(i);
        }
        for axis in 0..dim {
            g.units.push(g.strides[axis]);
            g.units.push(-g.strides[axis]);
        }
        for &plane in &g.planes.clone() {
            let q = Placement { anchor: Point::origin(dim), plane };
            let cells = q.cells();
            let offs = cells.clone().map(|c| g.offset(&c));
            let star = crate::lattice::closed_neighborhood_shape(&q.shape()).unwrap();
            let shell: Vec<isize> = star.difference(&q.shape()).vertices().map(|c| g.offset(c)).collect();
            g.plane_cells.push(offs);
            g.plane_shell.push(shell);
        }
        let r = READ_RADIUS;
        let span = BoxPatch { lo: Point(vec![-r; dim]), hi: Point(vec![r; dim]) };
        g.ball = span
            .cells()
            .iter()
            .filter(|p| p.coords().iter().map(|c| c.abs()).sum::<i64>() <= r)
            .map(|p| g.offset(p))
            .collect();
        for (k, e) in pair_edges.iter().enumerate() {
            let (a, b) = e.ends();
            if !patch.contains(a) || !patch.contains(b) {
                return Err(CaseError::InconsistentSeed(format!("pair {e:?} leaves the patch")));
            }
            let (ia, ib) = (g.index(a).unwrap(), g.index(b).unwrap());
            g.pairs.push((ia, ib, e.axis()));
            let mut near = BTreeSet::new();
            for &end in &[ia, ib] {
                for &o in &g.ball {
                    near.insert((end as isize + o) as usize);
                }
            }
            for c in near {
                g.pairs_near.entry(c).or_default().push(k);
            }
        }
        Ok(g)
    }

    fn offset(&self, p: &Point) -> isize {
        p.coords().iter().zip(&self.strides).map(|(&c, &s)| c as isize * s).sum()
    }

    fn index(&self, p: &Point) -> Option<usize> {
        let mut idx = 0isize;
        for i in 0..self.dim {
            let c = p.0[i] - self.lo[i];
            if c < 0 || c >= self.size[i] {
                return None;
            }
            idx += c as isize * self.strides[i];
        }
        Some(idx as usize)
    }

    fn point(&self, mut idx: usize) -> Point {
        let mut coords = vec![0; self.dim];
        for i in (0..self.dim).rev() {
            let m = self.size[i] as usize;
            coords[i] = (idx % m) as i64 + self.lo[i];
            idx /= m;
        }
        Point(coords)
    }

    /// Whether the whole closed neighbourhood of a placement has room
    /// inside the grid with one further cell to spare.
    fn fits(&self, anchor: usize, plane: usize) -> bool {
        let p = self.point(anchor);
        let (a, b) = self.planes[plane];
        (0..self.dim).all(|i| {
            let hi = if i == a || i == b { 1 } else { 0 };
            p.0[i] - 2 >= self.lo[i] && p.0[i] + hi + 2 < self.lo[i] + self.size[i]
        })
    }

    fn dist2(&self, idx: usize) -> i64 {
        let p = self.point(idx);
        p.coords().iter().zip(&self.center2).map(|(&c, &m)| (2 * c - m).abs()).sum()
    }

    fn placement(&self, anchor: usize, plane: usize) -> Placement {
        Placement { anchor: self.point(anchor), plane: self.planes[plane] }
    }

    fn edge(&self, a: usize, b: usize) -> Edge {
        Edge::new(self.point(a), self.point(b)).expect("adjacent")
    }
}

#[derive(Clone)]
struct Grid {
    geo: Arc<Geometry>,
    state: Vec<u8>,
    comp_of: Vec<u32>,
    components: Vec<(usize, usize)>,
    committed: BTreeSet<(usize, usize)>,
    edges: BTreeSet<(usize, usize)>,
}

type Cand = (usize, usize);

enum Eval {
    Nothing,
    Contradiction(ContradictionKind, Subject),
    Facts(Reason, Vec<GFact>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum GFact {
    In(usize),
    Out(usize),
    Edge(usize, usize),
    Component(usize, usize),
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
enum Item {
    Pair(usize),
    Cell(usize),
}

struct Worklist {
    queue: BTreeSet<(u64, u8, u64, Item)>,
    salt: Option<u64>,
    /// Cells whose surroundings are processed first.
    focus: Arc<(Focus, Vec<Point>)>,
}

impl Worklist {
    fn new(salt: Option<u64>, focus: Arc<(Focus, Vec<Point>)>) -> Self {
        Worklist { queue: BTreeSet::new(), salt, focus }
    }

    fn push(&mut self, grid: &Grid, item: Item) {
        let geo = &grid.geo;
        let (class, id, at) = match item {
            Item::Pair(k) => (0u8, k as u64, geo.pairs[k].0),
            Item::Cell(c) => (
                match grid.state[c] {
                    IN => 1,
                    OUT => 2,
                    _ => 3,
                },
                c as u64,
                c,
            ),
        };
        let key = match self.salt {
            None => {
                let p = geo.point(at);
                let near = self.focus.1.iter().map(|f| f.distance(&p) as u64).min().unwrap_or(0);
                match self.focus.0 {
                    Focus::None => (0, class, id),
                    Focus::Near => (near, class, id),
                    Focus::Far => (u64::MAX - near, class, id),
                }
            }
            Some(salt) => {
                let mut h = DefaultHasher::new();
                (salt, item).hash(&mut h);
                (0, 0, h.finish())
            }
        };
        self.queue.insert((key.0, key.1, key.2, item));
    }

    fn pop(&mut self) -> Option<Item> {
        self.queue.pop_first().map(|(_, _, _, i)| i)
    }

    fn mark_dirty(&mut self, grid: &Grid, changed: usize) {
        let geo = grid.geo.clone();
        for &o in &geo.ball {
            let c = (changed as isize + o) as usize;
            if c < geo.len && geo.in_patch[c] {
                self.push(grid, Item::Cell(c));
            }
        }
        if let Some(ps) = geo.pairs_near.get(&changed) {
            for &k in ps {
                self.push(grid, Item::Pair(k));
            }
        }
    }
}

impl std::hash::Hash for Item {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match self {
            Item::Pair(k) => (0u8, *k).hash(state),
            Item::Cell(c) => (1u8, *c).hash(state),
        }
    }
}

impl Grid {
    fn new(geo: Arc<Geometry>) -> Self {
        let len = geo.len;
        Grid {
            geo,
            state: vec![UNKNOWN; len],
            comp_of: vec![NONE; len],
            components: Vec::new(),
            committed: BTreeSet::new(),
            edges: BTreeSet::new(),
        }
    }

    fn neighbors(&self, c: usize) -> impl Iterator<Item = usize> + '_ {
        self.geo.units.iter().map(move |&u| (c as isize + u) as usize)
    }

    fn cells_of(&self, (anchor, plane): Cand) -> [usize; 4] {
        self.geo.plane_cells[plane].map(|o| (anchor as isize + o) as usize)
    }

    fn shell_of(&self, (anchor, plane): Cand) -> impl Iterator<Item = usize> + '_ {
        self.geo.plane_shell[plane].iter().map(move |&o| (anchor as isize + o) as usize)
    }

    fn consistent(&self, q: Cand) -> bool {
        // subjects lie in the patch, so their candidates are MARGIN-safe
        debug_assert!(self.geo.fits(q.0, q.1));
        let cells = self.cells_of(q);
        if cells.iter().any(|&c| self.state[c] == OUT) {
            return false;
        }
        for s in self.shell_of(q) {
            match self.state[s] {
                IN => return false,
                OUT if self.neighbors(s).any(|t| self.state[t] == IN && !cells.contains(&t)) => return false,
                _ => {}
            }
        }
        true
    }

    fn placements_containing(&self, c: usize, out: &mut Vec<Cand>) {
        for plane in 0..self.geo.planes.len() {
            for &o in &self.geo.plane_cells[plane] {
                let anchor = c as isize - o;
                if anchor >= 0 && (anchor as usize) < self.geo.len {
                    out.push((anchor as usize, plane));
                }
            }
        }
    }

    fn consistent_containing(&self, c: usize) -> Vec<Cand> {
        let mut all = Vec::new();
        self.placements_containing(c, &mut all);
        all.sort_unstable();
        all.dedup();
        all.retain(|&q| self.consistent(q));
        all
    }

    fn dominating_candidates(&self, v: usize) -> Vec<Cand> {
        let mut all = Vec::new();
        for u in self.neighbors(v) {
            self.placements_containing(u, &mut all);
        }
        all.sort_unstable();
        all.dedup();
        all.retain(|&q| self.consistent(q));
        all
    }

    fn pair_candidates(&self, k: usize) -> Vec<Cand> {
        let (p, q, axis) = self.geo.pairs[k];
        let geo = self.geo.clone();
        let mut all = Vec::new();
        for d_axis in (0..geo.dim).filter(|&d| d != axis) {
            for sign in [1isize, -1] {
                let d = sign * geo.strides[d_axis];
                let (pp, qq) = ((p as isize + d) as usize, (q as isize + d) as usize);
                let mut cand = Vec::new();
                self.placements_containing(pp, &mut cand);
                for c in cand {
                    let cells = self.cells_of(c);
                    if cells.contains(&qq) {
                        all.push(c);
                    }
                }
            }
        }
        all.sort_unstable();
        all.dedup();
        all.retain(|&c| self.consistent(c));
        all
    }

    fn pair_resolved(&self, k: usize) -> bool {
        let (p, q, axis) = self.geo.pairs[k];
        (0..self.geo.dim).filter(|&d| d != axis).any(|d_axis| {
            [1isize, -1].iter().any(|&s| {
                let d = s * self.geo.strides[d_axis];
                let (pp, qq) = ((p as isize + d) as usize, (q as isize + d) as usize);
                self.comp_of[pp] != NONE && self.comp_of[pp] == self.comp_of[qq]
            })
        })
    }

    /// Facts common to every candidate; a lone candidate is committed whole.
    fn conclusions(&self, cands: &[Cand]) -> Vec<GFact> {
        if cands.len() == 1 {
            return if self.committed.contains(&cands[0]) {
                Vec::new()
            } else {
                vec![GFact::Component(cands[0].0, cands[0].1)]
            };
        }
        let mut in_count: BTreeMap<usize, usize> = BTreeMap::new();
        let mut out_count: BTreeMap<usize, usize> = BTreeMap::new();
        for &q in cands {
            for c in self.cells_of(q) {
                *in_count.entry(c).or_default() += 1;
            }
            for s in self.shell_of(q) {
                *out_count.entry(s).or_default() += 1;
            }
        }
        let n = cands.len();
        let mut facts: Vec<GFact> = in_count
            .into_iter()
            .filter(|&(c, k)| k == n && self.state[c] == UNKNOWN)
            .map(|(c, _)| GFact::In(c))
            .collect();
        facts.extend(
            out_count
                .into_iter()
                .filter(|&(c, k)| k == n && self.state[c] == UNKNOWN)
                .map(|(c, _)| GFact::Out(c)),
        );
        facts
    }

    fn evaluate(&self, item: Item) -> Eval {
        let geo = &self.geo;
        match item {
            Item::Pair(k) => {
                if self.pair_resolved(k) {
                    return Eval::Nothing;
                }
                let (p, q, _) = geo.pairs[k];
                let edge = geo.edge(p, q);
                let cands = self.pair_candidates(k);
                if cands.is_empty() {
                    return Eval::Contradiction(ContradictionKind::UndominatedVertex, Subject::Edge(edge));
                }
                let mut facts = self.conclusions(&cands);
                // report a shared parallel edge as one fact
                let ins: Vec<usize> = facts
                    .iter()
                    .filter_map(|f| if let GFact::In(c) = f { Some(*c) } else { None })
                    .collect();
                for &a in &ins {
                    for &b in &ins {
                        if a < b && self.translate_pair(k, a, b) {
                            facts.retain(|f| *f != GFact::In(a) && *f != GFact::In(b));
                            facts.insert(0, GFact::Edge(a, b));
                        }
                    }
                }
                self.facts_or_nothing(Reason::PairDomination { edge }, facts)
            }
            Item::Cell(c) => match self.state[c] {
                IN => {
                    if self.comp_of[c] != NONE {
                        return Eval::Nothing;
                    }
                    let cands = self.consistent_containing(c);
                    if cands.is_empty() {
                        return Eval::Contradiction(
                            ContradictionKind::NoValidComponentExtension,
                            Subject::Vertex(geo.point(c)),
                        );
                    }
                    self.facts_or_nothing(Reason::Completion { vertex: geo.point(c) }, self.conclusions(&cands))
                }
                OUT => {
                    let dominators: Vec<usize> = self.neighbors(c).filter(|&u| self.state[u] == IN).collect();
                    if dominators.len() >= 2 {
                        return Eval::Contradiction(ContradictionKind::DoublyDominatedVertex, Subject::Vertex(geo.point(c)));
                    }
                    if let [u] = dominators[..] {
                        let facts: Vec<GFact> =
                            self.neighbors(c).filter(|&w| self.state[w] == UNKNOWN).map(GFact::Out).collect();
                        if !facts.is_empty() {
                            let reason = Reason::UniqueDominator { vertex: geo.point(c), dominator: geo.point(u) };
                            return Eval::Facts(reason, facts);
                        }
                        if self.comp_of[u] != NONE {
                            return Eval::Nothing;
                        }
                    }
                    let cands = self.dominating_candidates(c);
                    if cands.is_empty() {
                        return Eval::Contradiction(ContradictionKind::UndominatedVertex, Subject::Vertex(geo.point(c)));
                    }
                    self.facts_or_nothing(Reason::Dominator { vertex: geo.point(c) }, self.conclusions(&cands))
                }
                _ => {
                    let mut all = Vec::new();
                    self.placements_containing(c, &mut all);
                    if all.iter().any(|&q| self.consistent(q)) {
                        Eval::Nothing
                    } else {
                        Eval::Facts(Reason::Unplaceable { vertex: geo.point(c) }, vec![GFact::Out(c)])
                    }
                }
            },
        }
    }

    /// The contradiction at `subject`, if there is one; an edge that is not
    /// a premise pair stands for its two ends.
    fn contradiction_at(&self, subject: &Subject) -> Option<(ContradictionKind, Subject)> {
        let geo = &self.geo;
        let at_cell = |p: &Point| {
            let c = geo.index(p).filter(|&c| geo.in_patch[c])?;
            if self.state[c] == UNKNOWN {
                // excluded from S and not dominated either
                let stuck = self.consistent_containing(c).is_empty()
                    && self.neighbors(c).all(|u| self.state[u] != IN)
                    && self.dominating_candidates(c).is_empty();
                return stuck.then(|| (ContradictionKind::UndominatedVertex, Subject::Vertex(p.clone())));
            }
            match self.evaluate(Item::Cell(c)) {
                Eval::Contradiction(k, w) => Some((k, w)),
                _ => None,
            }
        };
        match subject {
            Subject::Vertex(v) => at_cell(v),
            Subject::Edge(e) => {
                let (a, b) = e.ends();
                let pair = (0..geo.pairs.len()).find(|&k| geo.edge(geo.pairs[k].0, geo.pairs[k].1) == *e);
                let as_pair = pair.and_then(|k| match self.evaluate(Item::Pair(k)) {
                    Eval::Contradiction(k, w) => Some((k, w)),
                    _ => None,
                });
                as_pair.or_else(|| at_cell(a)).or_else(|| at_cell(b))
            }
            Subject::Region(_) => None,
        }
    }

    fn translate_pair(&self, k: usize, a: usize, b: usize) -> bool {
        let (p, q, _) = self.geo.pairs[k];
        let (da, db) = (a as isize - p as isize, b as isize - q as isize);
        let (da2, db2) = (a as isize - q as isize, b as isize - p as isize);
        (da == db && self.geo.units.contains(&da)) || (da2 == db2 && self.geo.units.contains(&da2))
    }

    fn facts_or_nothing(&self, reason: Reason, facts: Vec<GFact>) -> Eval {
        if facts.is_empty() {
            Eval::Nothing
        } else {
            Eval::Facts(reason, facts)
        }
    }

    fn set(&mut self, c: usize, s: u8, changed: &mut Vec<usize>) -> Result<(), String> {
        match self.state[c] {
            UNKNOWN => {
                self.state[c] = s;
                changed.push(c);
                Ok(())
            }
            old if old == s => Ok(()),
            _ => Err(format!("{} assigned both ways", self.geo.point(c))),
        }
    }

    fn apply(&mut self, f: GFact, changed: &mut Vec<usize>) -> Result<(), String> {
        match f {
            GFact::In(c) => self.set(c, IN, changed),
            GFact::Out(c) => self.set(c, OUT, changed),
            GFact::Edge(a, b) => {
                self.set(a, IN, changed)?;
                self.set(b, IN, changed)?;
                self.edges.insert((a.min(b), a.max(b)));
                Ok(())
            }
            GFact::Component(anchor, plane) => {
                let q = (anchor, plane);
                if !self.geo.fits(anchor, plane) {
                    return Err(format!("component at {} leaves the grid", self.geo.point(anchor)));
                }
                let cells = self.cells_of(q);
                for c in cells {
                    self.set(c, IN, changed)?;
                }
                let shell: Vec<usize> = self.shell_of(q).collect();
                for s in shell {
                    self.set(s, OUT, changed)?;
                }
                let id = self.components.len() as u32;
                for c in cells {
                    if self.comp_of[c] != NONE {
                        return Err(format!("{} lies in two components", self.geo.point(c)));
                    }
                    self.comp_of[c] = id;
                    changed.push(c);
                }
                self.components.push(q);
                self.committed.insert(q);
                self.edges.retain(|&(a, b)| !(cells.contains(&a) && cells.contains(&b)));
                Ok(())
            }
        }
    }

    fn to_fact(&self, f: GFact) -> Fact {
        let geo = &self.geo;
        match f {
            GFact::In(c) => Fact::InS(geo.point(c)),
            GFact::Out(c) => Fact::OutS(geo.point(c)),
            GFact::Edge(a, b) => Fact::Edge(geo.edge(a, b)),
            GFact::Component(a, p) => Fact::Component(geo.placement(a, p)),
        }
    }

    fn lower_fact(&self, f: &Fact) -> Result<GFact, CaseError> {
        let idx = |p: &Point| self.geo.index(p).ok_or_else(|| CaseError::OutOfGrid(p.clone()));
        Ok(match f {
            Fact::InS(p) => GFact::In(idx(p)?),
            Fact::OutS(p) => GFact::Out(idx(p)?),
            Fact::Edge(e) => GFact::Edge(idx(e.ends().0)?, idx(e.ends().1)?),
            Fact::Component(q) => {
                let plane = self.geo.planes.iter().position(|&p| p == q.plane).ok_or(CaseError::NotAQ2)?;
                let a = idx(&q.anchor)?;
                if !self.geo.fits(a, plane) {
                    return Err(CaseError::OutOfGrid(q.anchor.clone()));
                }
                GFact::Component(a, plane)
            }
        })
    }

    /// Runs the worklist to a fixpoint or a contradiction.
    fn run(&mut self, work: &mut Worklist, log: &mut Vec<Deduction>) -> Option<(ContradictionKind, Subject)> {
        let mut changed = Vec::new();
        while let Some(item) = work.pop() {
            match self.evaluate(item) {
                Eval::Nothing => {}
                Eval::Contradiction(kind, witness) => return Some((kind, witness)),
                Eval::Facts(reason, facts) => {
                    // one fact at a time: the rest are re-derived against the
                    // new state, which may instead expose a contradiction
                    let f = facts[0];
                    let fact = self.to_fact(f);
                    changed.clear();
                    if let Err(msg) = self.apply(f, &mut changed) {
                        panic!("rule {reason:?} produced conflicting fact {fact:?}: {msg}");
                    }
                    log.push(Deduction { fact, reason });
                    for &c in &changed {
                        work.mark_dirty(self, c);
                    }
                    work.push(self, item);
                }
            }
        }
        None
    }

    fn full_worklist(&self, salt: Option<u64>, focus: Arc<(Focus, Vec<Point>)>) -> Worklist {
        let mut w = Worklist::new(salt, focus);
        for &c in &self.geo.patch_cells {
            w.push(self, Item::Cell(c));
        }
        for k in 0..self.geo.pairs.len() {
            w.push(self, Item::Pair(k));
        }
        w
    }

    fn complete(&self) -> bool {
        let geo = &self.geo;
        let cells_ok = geo.patch_cells.iter().all(|&c| match self.state[c] {
            IN => self.comp_of[c] != NONE,
            OUT => self.neighbors(c).filter(|&u| self.state[u] == IN).count() == 1,
            _ => false,
        });
        cells_ok && (0..geo.pairs.len()).all(|k| self.pair_resolved(k))
    }

    /// The open subject with the fewest alternatives.
    fn choose_split(&self) -> Option<(Subject, Vec<GFact>)> {
        type Key = (usize, u8, i64, usize);
        let geo = &self.geo;
        let mut best: Option<(Key, Subject, Vec<GFact>)> = None;
        let mut consider = |key: Key, subject: &dyn Fn() -> Subject, branches: &dyn Fn() -> Vec<GFact>| {
            if best.as_ref().is_none_or(|(k, _, _)| key < *k) {
                best = Some((key, subject(), branches()));
            }
        };
        for k in 0..geo.pairs.len() {
            if self.pair_resolved(k) {
                continue;
            }
            let cands = self.pair_candidates(k);
            let (p, q, _) = geo.pairs[k];
            consider(
                (cands.len(), 0, geo.dist2(p).min(geo.dist2(q)), k),
                &|| Subject::Edge(geo.edge(p, q)),
                &|| cands.iter().map(|&(a, pl)| GFact::Component(a, pl)).collect(),
            );
        }
        for &c in &geo.patch_cells {
            let (cands, class) = match self.state[c] {
                IN if self.comp_of[c] == NONE => (self.consistent_containing(c), 1),
                OUT if self.neighbors(c).all(|u| self.state[u] != IN) => (self.dominating_candidates(c), 2),
                UNKNOWN => {
                    consider((2, 3, geo.dist2(c), c), &|| Subject::Vertex(geo.point(c)), &|| {
                        vec![GFact::In(c), GFact::Out(c)]
                    });
                    continue;
                }
                _ => continue,
            };
            consider(
                (cands.len(), class, geo.dist2(c), c),
                &|| Subject::Vertex(geo.point(c)),
                &|| cands.iter().map(|&(a, pl)| GFact::Component(a, pl)).collect(),
            );
        }
        best.map(|(_, s, b)| (s, b))
    }

    fn component_list(&self) -> Vec<Placement> {
        let mut v: Vec<Placement> = self.components.iter().map(|&(a, p)| self.geo.placement(a, p)).collect();
        v.sort();
        v
    }

    fn to_config(&self, pairs: &[Edge]) -> PartialConfig {
        let geo = &self.geo;
        let mut c = PartialConfig::new(geo.patch.clone());
        for i in 0..geo.len {
            match self.state[i] {
                IN => {
                    c.assign.insert(geo.point(i), CellState::InS);
                }
                OUT => {
                    c.assign.insert(geo.point(i), CellState::OutS);
                }
                _ => {}
            }
        }
        c.components = self.component_list().into_iter().collect();
        c.edges = self.edges.iter().map(|&(a, b)| geo.edge(a, b)).collect();
        c.pairs = pairs.to_vec();
        c
    }
}

fn grid_from_config(config: &PartialConfig) -> Result<Grid, CaseError> {
    let geo = Arc::new(Geometry::new(&config.patch, &config.pairs)?);
    let mut grid = Grid::new(geo);
    let mut facts: Vec<Fact> = config.components.iter().cloned().map(Fact::Component).collect();
    facts.extend(config.edges.iter().cloned().map(Fact::Edge));
    facts.extend(config.assign.iter().filter_map(|(p, s)| match s {
        CellState::InS => Some(Fact::InS(p.clone())),
        CellState::OutS => Some(Fact::OutS(p.clone())),
        CellState::Unknown => None,
    }));
    let mut changed = Vec::new();
    for f in &facts {
        let g = grid.lower_fact(f)?;
        grid.apply(g, &mut changed).map_err(CaseError::InconsistentSeed)?;
    }
    Ok(grid)
}

/// Applies the rules to a fixpoint.
pub fn propagate(config: &PartialConfig) -> Result<Propagation, CaseError> {
    propagate_in_order(config, None)
}

/// As [`propagate`], processing subjects in an order scrambled by `salt`.
pub fn propagate_in_order(config: &PartialConfig, salt: Option<u64>) -> Result<Propagation, CaseError> {
    let mut grid = grid_from_config(config)?;
    let mut work = grid.full_worklist(salt, Arc::new((Focus::None, Vec::new())));
    let mut deductions = Vec::new();
    let contradiction = grid.run(&mut work, &mut deductions);
    Ok(Propagation { config: grid.to_config(&config.pairs), deductions, contradiction })
}

struct Prover<'a> {
    options: &'a ProverOptions,
    focus: Arc<(Focus, Vec<Point>)>,
    nodes: u64,
    found_completion: bool,
}

impl Prover<'_> {
    fn node(&mut self, mut grid: Grid, mut work: Worklist) -> ProofNode {
        self.nodes += 1;
        let mut deductions = Vec::new();
        if let Some(found) = grid.run(&mut work, &mut deductions) {
            let (kind, witness) = self
                .options
                .preferred_witnesses
                .iter()
                .find_map(|s| grid.contradiction_at(s))
                .unwrap_or(found);
            return ProofNode { deductions, outcome: Outcome::Contradiction { kind, witness } };
        }
        if grid.complete() {
            self.found_completion = true;
            return ProofNode { deductions, outcome: Outcome::Completion { components: grid.component_list() } };
        }
        let Some((subject, alternatives)) = grid.choose_split() else {
            // no open subject yet not complete cannot happen: every patch
            // cell that fails completeness is itself an open subject
            unreachable!("stalled without an open subject");
        };
        let mut branches = Vec::new();
        for alt in alternatives {
            let assume = grid.to_fact(alt);
            let exhausted = self.options.max_nodes.is_some_and(|m| self.nodes >= m);
            if exhausted || (self.options.stop_at_completion && self.found_completion) {
                branches.push(Branch { assume, node: ProofNode { deductions: Vec::new(), outcome: Outcome::Unexplored } });
                continue;
            }
            let mut child = grid.clone();
            let mut changed = Vec::new();
            child.apply(alt, &mut changed).expect("split alternatives are consistent");
            let mut w = Worklist::new(self.options.order_salt, self.focus.clone());
            for &c in &changed {
                w.mark_dirty(&child, c);
            }
            branches.push(Branch { assume, node: self.node(child, w) });
        }
        ProofNode { deductions, outcome: Outcome::Split { subject, branches } }
    }
}

/// Builds a proof tree for `seed`.
pub fn prove(case_id: &str, seed: &Seed, options: &ProverOptions) -> Result<Certificate, CaseError> {
    let mut config = PartialConfig::new(seed.patch.clone());
    config.pairs = seed.pairs.clone();
    let geo = Arc::new(Geometry::new(&seed.patch, &seed.pairs)?);
    let mut grid = Grid::new(geo);
    let mut changed = Vec::new();
    for f in &seed.facts {
        let g = grid.lower_fact(f)?;
        grid.apply(g, &mut changed).map_err(CaseError::InconsistentSeed)?;
    }
    let root = match &seed.one_factor {
        Some(premise) if enumerate_one_factors(&one_factor_region(premise)).is_empty() => ProofNode {
            deductions: Vec::new(),
            outcome: Outcome::Contradiction {
                kind: ContradictionKind::NoOneFactor,
                witness: Subject::Region(one_factor_region(premise)),
            },
        },
        _ => {
            let focus: Vec<Point> = options
                .preferred_witnesses
                .iter()
                .flat_map(|s| match s {
                    Subject::Vertex(v) => vec![v.clone()],
                    Subject::Edge(e) => vec![e.ends().0.clone(), e.ends().1.clone()],
                    Subject::Region(r) => r.clone(),
                })
                .collect();
            let focus = Arc::new((options.focus, focus));
            let work = grid.full_worklist(options.order_salt, focus.clone());
            let mut prover = Prover { options, focus, nodes: 0, found_completion: false };
            prover.node(grid, work)
        }
    };
    Ok(Certificate { schema_version: SCHEMA_VERSION, case_id: case_id.to_string(), seed: seed.clone(), root })
}
