//! Lattice-like tilings by closed neighborhoods, their verification on torus
//! quotients of ℤⁿ, and exhaustive exact-cover search on a torus.

mod dlx;
mod export;
mod search;

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::abelian::{hom_from_generator_matrix, kernel_matrix, restriction_bijective, AbelianError, GeneratorMatrix, Homomorphism};
use crate::lattice::{closed_neighborhood_shape, signed_permutations, Isometry, LatticeError, Point, Shape};

pub use dlx::{ExactCover, SearchStats};
pub use export::{to_obj, to_off, SolutionFile, SCHEMA_VERSION};
pub use search::{exact_cover_search, search_torus, SearchConfig, TorusSearch};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TilingError {
    #[error(transparent)]
    Abelian(#[from] AbelianError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("closed neighborhood has {neighborhood} cells but the lattice has index {index}")]
    IndexMismatch { neighborhood: usize, index: u64 },
    #[error("the quotient map is not bijective on the closed neighborhood of the base")]
    TheoremCViolation,
    #[error("the base meets one of its own lattice translates")]
    OverlapError,
    #[error("torus period {modulus} along axis {axis} is not in the kernel")]
    IncompatibleTorus { axis: usize, modulus: i64 },
    #[error("base shape is not a 4-cycle")]
    UnsupportedBase,
    #[error("solutions live on different tori")]
    DifferentTorus,
    #[error("invalid torus: {0}")]
    InvalidTorus(String),
    #[error("invalid placement: {0}")]
    InvalidPlacement(String),
    #[error("malformed solution file: {0}")]
    Format(String),
}

/// A torus quotient ℤⁿ / (m₁ℤ × … × mₙℤ).
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<i64>", into = "Vec<i64>")]
pub struct Torus {
    moduli: Vec<i64>,
}

impl TryFrom<Vec<i64>> for Torus {
    type Error = TilingError;
    fn try_from(moduli: Vec<i64>) -> Result<Self, TilingError> {
        Torus::new(moduli)
    }
}

impl From<Torus> for Vec<i64> {
    fn from(t: Torus) -> Self {
        t.moduli
    }
}

impl fmt::Debug for Torus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Torus{:?}", self.moduli)
    }
}

impl fmt::Display for Torus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.moduli.iter().map(|m| format!("Z{m}")).collect();
        write!(f, "{}", parts.join("x"))
    }
}

impl Torus {
    pub fn new(moduli: Vec<i64>) -> Result<Self, TilingError> {
        if moduli.is_empty() {
            return Err(TilingError::InvalidTorus("no axes".into()));
        }
        if let Some(m) = moduli.iter().find(|&&m| m < 3) {
            return Err(TilingError::InvalidTorus(format!("modulus {m} is below 3")));
        }
        Ok(Torus { moduli })
    }

    pub fn cubic(dim: usize, m: i64) -> Result<Self, TilingError> {
        Torus::new(vec![m; dim])
    }

    pub fn moduli(&self) -> &[i64] {
        &self.moduli
    }

    pub fn dim(&self) -> usize {
        self.moduli.len()
    }

    pub fn vertex_count(&self) -> usize {
        self.moduli.iter().product::<i64>() as usize
    }

    pub fn reduce(&self, p: &Point) -> Point {
        Point(p.coords().iter().zip(&self.moduli).map(|(&x, &m)| x.rem_euclid(m)).collect())
    }

    /// Row-major index of the reduced point; index order is lexicographic.
    pub fn index(&self, p: &Point) -> usize {
        let mut idx = 0i64;
        for (&x, &m) in p.coords().iter().zip(&self.moduli) {
            idx = idx * m + x.rem_euclid(m);
        }
        idx as usize
    }

    pub fn point(&self, mut idx: usize) -> Point {
        let mut coords = vec![0; self.dim()];
        for i in (0..self.dim()).rev() {
            let m = self.moduli[i] as usize;
            coords[i] = (idx % m) as i64;
            idx /= m;
        }
        Point(coords)
    }

    pub fn points(&self) -> impl Iterator<Item = Point> + '_ {
        (0..self.vertex_count()).map(|i| self.point(i))
    }

    /// Neighbor indices of a vertex (distinct because every modulus is ≥ 3).
    pub fn neighbors(&self, idx: usize) -> Vec<usize> {
        let p = self.point(idx);
        p.neighbors().map(|q| self.index(&q)).collect()
    }

    /// Signed permutations that map the torus onto itself.
    pub fn isometries(&self) -> Vec<Isometry> {
        signed_permutations(self.dim())
            .into_iter()
            .filter(|g| (0..self.dim()).all(|i| self.moduli[i] == self.moduli[g.perm[i]]))
            .collect()
    }
}

/// One 4-cycle component: `anchor + {0, e_a, e_b, e_a + e_b}` with `a < b`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Placement {
    pub anchor: Point,
    pub plane: (usize, usize),
}

impl Placement {
    pub fn new(anchor: Point, plane: (usize, usize)) -> Result<Self, TilingError> {
        let (a, b) = plane;
        if a >= b || b >= anchor.dim() {
            return Err(TilingError::InvalidPlacement(format!("plane ({a},{b}) in dimension {}", anchor.dim())));
        }
        Ok(Placement { anchor, plane })
    }

    /// The four vertices in cycle order.
    pub fn cells(&self) -> [Point; 4] {
        let n = self.anchor.dim();
        let ea = Point::unit(n, self.plane.0);
        let eb = Point::unit(n, self.plane.1);
        let p0 = self.anchor.clone();
        let p1 = &p0 + &ea;
        let p2 = &p1 + &eb;
        let p3 = &p0 + &eb;
        [p0, p1, p2, p3]
    }

    pub fn shape(&self) -> Shape {
        self.cells().into_iter().collect()
    }

    pub fn translate(&self, z: &Point) -> Placement {
        Placement { anchor: &self.anchor + z, plane: self.plane }
    }

    /// Image under an isometry of ℤⁿ; the new anchor is the least corner.
    pub fn transform(&self, g: &Isometry) -> Placement {
        let cells = self.cells().map(|c| g.apply(&c));
        let anchor = Point(
            (0..self.anchor.dim())
                .map(|i| cells.iter().map(|c| c.0[i]).min().unwrap())
                .collect(),
        );
        let axis_image = |axis: usize| g.perm.iter().position(|&p| p == axis).unwrap();
        let (x, y) = (axis_image(self.plane.0), axis_image(self.plane.1));
        Placement { anchor, plane: (x.min(y), x.max(y)) }
    }

    /// The placement whose vertex set is `s`, if `s` is an axis-aligned unit square.
    pub fn from_shape(s: &Shape) -> Option<Placement> {
        if s.len() != 4 {
            return None;
        }
        let bb = s.bounding_box()?;
        let sides = bb.side_lengths();
        let axes: Vec<usize> = (0..sides.len()).filter(|&i| sides[i] == 2).collect();
        if axes.len() != 2 || sides.iter().filter(|&&l| l == 1).count() != sides.len() - 2 {
            return None;
        }
        Some(Placement { anchor: bb.lo, plane: (axes[0], axes[1]) })
    }

    fn reduced(&self, torus: &Torus) -> Placement {
        Placement { anchor: torus.reduce(&self.anchor), plane: self.plane }
    }
}

/// All axis-plane orientations of a 4-cycle in ℤⁿ.
pub fn planes(dim: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for a in 0..dim {
        for b in a + 1..dim {
            out.push((a, b));
        }
    }
    out
}

/// A PDS with one component per coset `base + rowspan(M)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticeLikePds {
    pub base: Shape,
    pub lattice: GeneratorMatrix,
    pub phi: Homomorphism,
    base_images: BTreeSet<Vec<u64>>,
}

impl LatticeLikePds {
    /// Membership of `p` in S.
    pub fn contains(&self, p: &Point) -> bool {
        self.base_images.contains(&self.phi.apply(p))
    }

    /// The lattice vector `z` with `p ∈ base + z`, found via the unique base
    /// point sharing `p`'s image.
    pub fn component_offset(&self, p: &Point) -> Option<Point> {
        let img = self.phi.apply(p);
        self.base.vertices().find(|b| self.phi.apply(b) == img).map(|b| p - b)
    }
}

pub fn build_lattice_like(base: &Shape, m: &GeneratorMatrix) -> Result<LatticeLikePds, TilingError> {
    let vstar = closed_neighborhood_shape(base)?;
    let det = m.determinant()?.unsigned_abs();
    if det == 0 {
        return Err(AbelianError::InfiniteQuotient.into());
    }
    if vstar.len() as u64 != det {
        return Err(TilingError::IndexMismatch { neighborhood: vstar.len(), index: det });
    }
    let phi = hom_from_generator_matrix(m)?;
    let base_images: BTreeSet<Vec<u64>> = base.vertices().map(|p| phi.apply(p)).collect();
    if base_images.len() != base.len() {
        return Err(TilingError::OverlapError);
    }
    if !restriction_bijective(&phi, &vstar) {
        return Err(TilingError::TheoremCViolation);
    }
    Ok(LatticeLikePds { base: base.clone(), lattice: m.clone(), phi, base_images })
}

/// The lattice-like PDS whose lattice is `ker Φ`.
pub fn lattice_like_from_epimorphism(base: &Shape, phi: &Homomorphism) -> Result<LatticeLikePds, TilingError> {
    build_lattice_like(base, &kernel_matrix(phi))
}

/// A set of 4-cycle components on a torus, anchors reduced and sorted.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PdsSolution {
    pub torus: Torus,
    placements: Vec<Placement>,
}

impl PdsSolution {
    pub fn new(torus: Torus, placements: impl IntoIterator<Item = Placement>) -> Result<Self, TilingError> {
        let mut ps = Vec::new();
        for p in placements {
            if p.anchor.dim() != torus.dim() || p.plane.0 >= p.plane.1 || p.plane.1 >= torus.dim() {
                return Err(TilingError::InvalidPlacement(format!("{:?} on {}", p, torus)));
            }
            ps.push(p.reduced(&torus));
        }
        ps.sort();
        Ok(PdsSolution { torus, placements: ps })
    }

    pub fn placements(&self) -> &[Placement] {
        &self.placements
    }

    pub fn component_count(&self) -> usize {
        self.placements.len()
    }

    /// S as reduced torus points (with multiplicity removed).
    pub fn s_vertices(&self) -> BTreeSet<Point> {
        self.placements
            .iter()
            .flat_map(|p| p.cells().map(|c| self.torus.reduce(&c)))
            .collect()
    }

    pub fn translate(&self, z: &Point) -> PdsSolution {
        PdsSolution::new(self.torus.clone(), self.placements.iter().map(|p| p.translate(z))).unwrap()
    }

    /// Image under a torus-preserving isometry.
    pub fn transform(&self, g: &Isometry) -> PdsSolution {
        PdsSolution::new(self.torus.clone(), self.placements.iter().map(|p| p.transform(g))).unwrap()
    }
}

pub fn materialize_on_torus(pds: &LatticeLikePds, torus: &Torus) -> Result<PdsSolution, TilingError> {
    let base = Placement::from_shape(&pds.base).ok_or(TilingError::UnsupportedBase)?;
    if torus.dim() != pds.phi.domain_dim() {
        return Err(LatticeError::DimensionMismatch { expected: pds.phi.domain_dim(), found: torus.dim() }.into());
    }
    for (axis, &m) in torus.moduli().iter().enumerate() {
        if !pds.phi.annihilates(&Point::unit(torus.dim(), axis).scale(m)) {
            return Err(TilingError::IncompatibleTorus { axis, modulus: m });
        }
    }
    let target = pds.phi.apply(&base.anchor);
    let placements = torus
        .points()
        .filter(|x| pds.phi.apply(x) == target)
        .map(|x| Placement { anchor: x, plane: base.plane });
    PdsSolution::new(torus.clone(), placements)
}

/// Violations found by [`verify_pds`]. Empty means a valid PDS whose
/// components are exactly the given 4-cycles.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PdsReport {
    /// Vertices outside S with their number of S-neighbors, when that is not 1.
    pub domination: Vec<(Point, usize)>,
    /// Pairs of adjacent S-vertices from different components.
    pub merged: Vec<(Point, Point)>,
    /// Vertices claimed by more than one placement.
    pub overlaps: Vec<Point>,
    /// Placements whose four vertices are not distinct on the torus.
    pub degenerate: Vec<Placement>,
}

impl PdsReport {
    pub fn is_valid(&self) -> bool {
        self.domination.is_empty() && self.merged.is_empty() && self.overlaps.is_empty() && self.degenerate.is_empty()
    }

    pub fn violation_count(&self) -> usize {
        self.domination.len() + self.merged.len() + self.overlaps.len() + self.degenerate.len()
    }
}

/// Checks the perfect-domination conditions vertex by vertex.
pub fn verify_pds(sol: &PdsSolution) -> PdsReport {
    let t = &sol.torus;
    let mut report = PdsReport::default();
    let mut owner: Vec<Option<usize>> = vec![None; t.vertex_count()];
    let mut overlaps = BTreeSet::new();
    for (k, p) in sol.placements.iter().enumerate() {
        let idx: BTreeSet<usize> = p.cells().iter().map(|c| t.index(c)).collect();
        if idx.len() != 4 {
            report.degenerate.push(p.clone());
        }
        for i in idx {
            if owner[i].replace(k).is_some() {
                overlaps.insert(i);
            }
        }
    }
    report.overlaps = overlaps.into_iter().map(|i| t.point(i)).collect();
    for v in 0..t.vertex_count() {
        let nbrs = t.neighbors(v);
        match owner[v] {
            None => {
                let count = nbrs.iter().filter(|&&u| owner[u].is_some()).count();
                if count != 1 {
                    report.domination.push((t.point(v), count));
                }
            }
            Some(k) => {
                for &u in &nbrs {
                    if u > v && owner[u].is_some_and(|j| j != k) {
                        report.merged.push((t.point(v), t.point(u)));
                    }
                }
            }
        }
    }
    report
}

/// Which isometries count for [`solution_equivalent_under`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Symmetry {
    /// All torus-preserving signed permutations.
    Full,
    /// Determinant +1 only.
    Rotations,
}

fn is_rotation(g: &Isometry) -> bool {
    let n = g.dim();
    let mut inversions = 0;
    for i in 0..n {
        for j in i + 1..n {
            if g.perm[i] > g.perm[j] {
                inversions += 1;
            }
        }
    }
    let sign: i64 = g.signs.iter().product();
    sign * if inversions % 2 == 0 { 1 } else { -1 } == 1
}

/// True iff a torus translation composed with a signed axis permutation
/// maps `a` onto `b`.
pub fn solution_equivalent(a: &PdsSolution, b: &PdsSolution) -> Result<bool, TilingError> {
    solution_equivalent_under(a, b, Symmetry::Full)
}

pub fn solution_equivalent_under(a: &PdsSolution, b: &PdsSolution, sym: Symmetry) -> Result<bool, TilingError> {
    if a.torus != b.torus {
        return Err(TilingError::DifferentTorus);
    }
    Ok(equivalence_witness(a, b, sym).is_some())
}

/// An isometry `g` (translation included) with `g(a) = b`, if one exists.
pub fn equivalence_witness(a: &PdsSolution, b: &PdsSolution, sym: Symmetry) -> Option<Isometry> {
    if a.torus != b.torus || a.placements.len() != b.placements.len() {
        return None;
    }
    if a.placements.is_empty() {
        return Some(Isometry::identity(a.torus.dim()));
    }
    let t = &a.torus;
    for g in t.isometries() {
        if sym == Symmetry::Rotations && !is_rotation(&g) {
            continue;
        }
        let image = a.transform(&g);
        let p0 = image.placements[0].clone();
        for q in b.placements.iter().filter(|q| q.plane == p0.plane) {
            let z = &q.anchor - &p0.anchor;
            if maps_onto(&image, b, &z) {
                return Some(g.with_shift(z));
            }
        }
    }
    None
}

/// Partitions solutions into equivalence classes; each class lists indices
/// in increasing order and classes are ordered by their first member.
pub fn equivalence_classes(solutions: &[PdsSolution], sym: Symmetry) -> Vec<Vec<usize>> {
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for (i, s) in solutions.iter().enumerate() {
        match classes
            .iter_mut()
            .find(|c| equivalence_witness(&solutions[c[0]], s, sym).is_some())
        {
            Some(c) => c.push(i),
            None => classes.push(vec![i]),
        }
    }
    classes
}

/// Number of distinct images of `sol` under torus translations and the
/// chosen isometries.
pub fn orbit_size(sol: &PdsSolution, sym: Symmetry) -> usize {
    let mut reps: Vec<PdsSolution> = Vec::new();
    for g in sol.torus.isometries() {
        if sym == Symmetry::Rotations && !is_rotation(&g) {
            continue;
        }
        let img = sol.transform(&g);
        if !reps.iter().any(|r| translation_equivalent(r, &img)) {
            reps.push(img);
        }
    }
    reps.len() * (sol.torus.vertex_count() / translation_stabilizer(sol))
}

/// Number of torus translations fixing `sol`.
fn translation_stabilizer(sol: &PdsSolution) -> usize {
    let Some(p0) = sol.placements.first() else {
        return sol.torus.vertex_count();
    };
    sol.placements
        .iter()
        .filter(|q| q.plane == p0.plane)
        .filter(|q| maps_onto(sol, sol, &(&q.anchor - &p0.anchor)))
        .count()
}

fn maps_onto(a: &PdsSolution, b: &PdsSolution, z: &Point) -> bool {
    let set: HashSet<&Placement> = b.placements.iter().collect();
    a.placements.iter().all(|p| set.contains(&p.translate(z).reduced(&a.torus)))
}

fn translation_equivalent(a: &PdsSolution, b: &PdsSolution) -> bool {
    let Some(p0) = a.placements.first() else {
        return b.placements.is_empty();
    };
    a.placements.len() == b.placements.len()
        && b.placements
            .iter()
            .filter(|q| q.plane == p0.plane)
            .any(|q| maps_onto(a, b, &(&q.anchor - &p0.anchor)))
}
