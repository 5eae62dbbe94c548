//! Geometry of the unit-distance graph on ℤⁿ.
//!
//! Points, finite induced shapes, closed neighborhoods, axis-aligned box
//! patches and the hyperoctahedral group of signed coordinate permutations.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::ops::{Add, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LatticeError {
    #[error("shape is empty")]
    EmptyShape,
    #[error("shape is not connected")]
    NotConnected,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid box patch: lo must be componentwise <= hi")]
    InvalidPatch,
    #[error("invalid isometry: {0}")]
    InvalidIsometry(String),
}

/// A vertex of the lattice graph.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(pub Vec<i64>);

impl Point {
    pub fn new(coords: impl Into<Vec<i64>>) -> Self {
        Point(coords.into())
    }

    pub fn origin(dim: usize) -> Self {
        Point(vec![0; dim])
    }

    /// The unit vector along `axis` (0-based).
    pub fn unit(dim: usize, axis: usize) -> Self {
        let mut c = vec![0; dim];
        c[axis] = 1;
        Point(c)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn scale(&self, k: i64) -> Point {
        Point(self.0.iter().map(|&x| k * x).collect())
    }

    /// Graph distance in the lattice graph (ℓ¹ norm of the difference).
    pub fn distance(&self, other: &Point) -> i64 {
        self.0.iter().zip(&other.0).map(|(a, b)| (a - b).abs()).sum()
    }

    pub fn is_adjacent(&self, other: &Point) -> bool {
        self.distance(other) == 1
    }

    /// The `2n` lattice neighbors, ordered `+e1, -e1, +e2, -e2, ...`.
    pub fn neighbors(&self) -> impl Iterator<Item = Point> + '_ {
        (0..self.dim()).flat_map(move |axis| {
            [1i64, -1].into_iter().map(move |s| {
                let mut c = self.0.clone();
                c[axis] += s;
                Point(c)
            })
        })
    }

    /// The point written over the standard basis, e.g. `-e1+2e2`, or `O`.
    pub fn basis_notation(&self) -> String {
        let mut out = String::new();
        for (i, &c) in self.0.iter().enumerate() {
            if c == 0 {
                continue;
            }
            if c < 0 {
                out.push('-');
            } else if !out.is_empty() {
                out.push('+');
            }
            if c.abs() != 1 {
                out.push_str(&c.abs().to_string());
            }
            out.push_str(&format!("e{}", i + 1));
        }
        if out.is_empty() {
            out.push('O');
        }
        out
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl Add for &Point {
    type Output = Point;
    fn add(self, rhs: &Point) -> Point {
        Point(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &Point {
    type Output = Point;
    fn sub(self, rhs: &Point) -> Point {
        Point(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, rhs: Point) -> Point {
        &self + &rhs
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, rhs: Point) -> Point {
        &self - &rhs
    }
}

impl Neg for &Point {
    type Output = Point;
    fn neg(self) -> Point {
        Point(self.0.iter().map(|a| -a).collect())
    }
}

impl From<[i64; 3]> for Point {
    fn from(c: [i64; 3]) -> Self {
        Point(c.to_vec())
    }
}

/// A finite vertex set of the lattice graph together with its induced edges.
///
/// Edges are never stored: two shapes with the same vertices are the same
/// shape. Serializes as a lexicographically sorted array of coordinate
/// arrays.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Shape {
    vertices: BTreeSet<Point>,
}

impl fmt::Debug for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(&self.vertices).finish()
    }
}

impl FromIterator<Point> for Shape {
    fn from_iter<I: IntoIterator<Item = Point>>(iter: I) -> Self {
        Shape { vertices: iter.into_iter().collect() }
    }
}

impl Shape {
    pub fn new(vertices: impl IntoIterator<Item = Point>) -> Result<Self, LatticeError> {
        let vertices: BTreeSet<Point> = vertices.into_iter().collect();
        if let Some(first) = vertices.iter().next() {
            let dim = first.dim();
            if let Some(bad) = vertices.iter().find(|p| p.dim() != dim) {
                return Err(LatticeError::DimensionMismatch { expected: dim, found: bad.dim() });
            }
        }
        Ok(Shape { vertices })
    }

    /// The 4-cycle `{O, e_a, e_b, e_a+e_b}` in the plane of axes `a` and `b`.
    pub fn square(dim: usize, a: usize, b: usize) -> Self {
        let ea = Point::unit(dim, a);
        let eb = Point::unit(dim, b);
        let o = Point::origin(dim);
        [o.clone(), ea.clone(), eb.clone(), &ea + &eb].into_iter().collect()
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn dim(&self) -> Option<usize> {
        self.vertices.iter().next().map(Point::dim)
    }

    pub fn contains(&self, p: &Point) -> bool {
        self.vertices.contains(p)
    }

    pub fn vertices(&self) -> impl Iterator<Item = &Point> {
        self.vertices.iter()
    }

    pub fn vertex_set(&self) -> &BTreeSet<Point> {
        &self.vertices
    }

    /// Unit-distance pairs `(u, v)` with `u < v`.
    pub fn edges(&self) -> Vec<(Point, Point)> {
        let mut out = Vec::new();
        for u in &self.vertices {
            for v in u.neighbors() {
                if &v > u && self.vertices.contains(&v) {
                    out.push((u.clone(), v));
                }
            }
        }
        out
    }

    pub fn translate(&self, z: &Point) -> Shape {
        self.vertices.iter().map(|p| p + z).collect()
    }

    pub fn union(&self, other: &Shape) -> Shape {
        self.vertices.union(&other.vertices).cloned().collect()
    }

    pub fn difference(&self, other: &Shape) -> Shape {
        self.vertices.difference(&other.vertices).cloned().collect()
    }

    pub fn is_connected(&self) -> bool {
        let Some(start) = self.vertices.iter().next() else {
            return true;
        };
        let mut seen = BTreeSet::new();
        let mut queue = VecDeque::from([start.clone()]);
        seen.insert(start.clone());
        while let Some(p) = queue.pop_front() {
            for q in p.neighbors() {
                if self.vertices.contains(&q) && seen.insert(q.clone()) {
                    queue.push_back(q);
                }
            }
        }
        seen.len() == self.vertices.len()
    }

    /// Componentwise minimum and maximum of the vertices.
    pub fn bounding_box(&self) -> Option<BoxPatch> {
        let first = self.vertices.iter().next()?;
        let mut lo = first.0.clone();
        let mut hi = first.0.clone();
        for p in &self.vertices {
            for (i, &c) in p.0.iter().enumerate() {
                lo[i] = lo[i].min(c);
                hi[i] = hi[i].max(c);
            }
        }
        Some(BoxPatch { lo: Point(lo), hi: Point(hi) })
    }
}

/// All vertices at graph distance at most one from `theta`, with induced edges.
pub fn closed_neighborhood_shape(theta: &Shape) -> Result<Shape, LatticeError> {
    if theta.is_empty() {
        return Err(LatticeError::EmptyShape);
    }
    let mut out = theta.vertices.clone();
    for p in &theta.vertices {
        out.extend(p.neighbors());
    }
    Ok(Shape { vertices: out })
}

/// Result of [`classify_component`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ComponentClass {
    /// Vertex count of each path factor, per axis.
    Box(Vec<usize>),
    NotABox,
}

/// Recognizes a connected shape that is a cartesian product of paths.
pub fn classify_component(shape: &Shape) -> Result<ComponentClass, LatticeError> {
    let bbox = shape.bounding_box().ok_or(LatticeError::EmptyShape)?;
    if !shape.is_connected() {
        return Err(LatticeError::NotConnected);
    }
    if bbox.cell_count() == shape.len() as u64 {
        Ok(ComponentClass::Box(bbox.side_lengths().into_iter().map(|s| s as usize).collect()))
    } else {
        Ok(ComponentClass::NotABox)
    }
}

/// A signed axis permutation followed by a translation.
///
/// Coordinate `i` of the image of `p` is `signs[i] * p[perm[i]] + shift[i]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Isometry {
    pub perm: Vec<usize>,
    pub signs: Vec<i64>,
    pub shift: Point,
}

impl Isometry {
    pub fn new(perm: Vec<usize>, signs: Vec<i64>, shift: Point) -> Result<Self, LatticeError> {
        let n = perm.len();
        let mut seen = vec![false; n];
        for &p in &perm {
            if p >= n || std::mem::replace(&mut seen[p], true) {
                return Err(LatticeError::InvalidIsometry("perm is not a permutation".into()));
            }
        }
        if signs.len() != n || shift.dim() != n {
            return Err(LatticeError::InvalidIsometry("length mismatch".into()));
        }
        if signs.iter().any(|s| s.abs() != 1) {
            return Err(LatticeError::InvalidIsometry("signs must be +1 or -1".into()));
        }
        Ok(Isometry { perm, signs, shift })
    }

    pub fn identity(dim: usize) -> Self {
        Isometry { perm: (0..dim).collect(), signs: vec![1; dim], shift: Point::origin(dim) }
    }

    pub fn translation(shift: Point) -> Self {
        let dim = shift.dim();
        Isometry { perm: (0..dim).collect(), signs: vec![1; dim], shift }
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    /// The linear (signed permutation) part only.
    pub fn linear_part(&self) -> Isometry {
        Isometry { shift: Point::origin(self.dim()), ..self.clone() }
    }

    pub fn with_shift(&self, shift: Point) -> Isometry {
        Isometry { shift, ..self.clone() }
    }

    pub fn apply(&self, p: &Point) -> Point {
        Point(
            (0..self.dim())
                .map(|i| self.signs[i] * p.0[self.perm[i]] + self.shift.0[i])
                .collect(),
        )
    }

    /// Applies only the linear part (for direction vectors).
    pub fn apply_linear(&self, v: &Point) -> Point {
        Point((0..self.dim()).map(|i| self.signs[i] * v.0[self.perm[i]]).collect())
    }

    pub fn apply_shape(&self, s: &Shape) -> Shape {
        s.vertices.iter().map(|p| self.apply(p)).collect()
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Isometry) -> Isometry {
        let n = self.dim();
        let perm = (0..n).map(|i| other.perm[self.perm[i]]).collect();
        let signs = (0..n).map(|i| self.signs[i] * other.signs[self.perm[i]]).collect();
        let shift = self.apply(&other.shift);
        Isometry { perm, signs, shift }
    }

    pub fn inverse(&self) -> Isometry {
        let n = self.dim();
        let mut perm = vec![0; n];
        let mut signs = vec![1; n];
        for i in 0..n {
            perm[self.perm[i]] = i;
            signs[self.perm[i]] = self.signs[i];
        }
        let lin = Isometry { perm, signs, shift: Point::origin(n) };
        let shift = -&lin.apply(&self.shift);
        Isometry { shift, ..lin }
    }
}

/// All `2ⁿ·n!` signed permutations of ℤⁿ (no translation), in a fixed order.
pub fn signed_permutations(dim: usize) -> Vec<Isometry> {
    let mut perms = Vec::new();
    permutations(&mut (0..dim).collect(), 0, &mut perms);
    perms.sort();
    let mut out = Vec::with_capacity(perms.len() << dim);
    for perm in perms {
        for mask in 0..(1u32 << dim) {
            let signs = (0..dim).map(|i| if mask >> i & 1 == 1 { -1 } else { 1 }).collect();
            out.push(Isometry { perm: perm.clone(), signs, shift: Point::origin(dim) });
        }
    }
    out
}

fn permutations(items: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
    if k == items.len() {
        out.push(items.clone());
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permutations(items, k + 1, out);
        items.swap(k, i);
    }
}

/// Translates a shape so its componentwise minimum corner is the origin.
pub fn normalize_translation(shape: &Shape) -> Shape {
    match shape.bounding_box() {
        Some(b) => shape.translate(&-&b.lo),
        None => shape.clone(),
    }
}

/// Lexicographically least image under all signed permutations, each
/// followed by the translation that moves the minimum corner to the origin.
pub fn canonical_form(shape: &Shape) -> Shape {
    let Some(dim) = shape.dim() else {
        return shape.clone();
    };
    let mut best: Option<Vec<Point>> = None;
    for g in signed_permutations(dim) {
        let image = normalize_translation(&g.apply_shape(shape));
        let seq: Vec<Point> = image.vertices.into_iter().collect();
        if best.as_ref().is_none_or(|b| seq < *b) {
            best = Some(seq);
        }
    }
    best.unwrap_or_default().into_iter().collect()
}

/// An axis-aligned box of lattice points with inclusive bounds.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BoxPatch {
    pub lo: Point,
    pub hi: Point,
}

impl BoxPatch {
    pub fn new(lo: Point, hi: Point) -> Result<Self, LatticeError> {
        if lo.dim() != hi.dim() {
            return Err(LatticeError::DimensionMismatch { expected: lo.dim(), found: hi.dim() });
        }
        if lo.0.iter().zip(&hi.0).any(|(a, b)| a > b) {
            return Err(LatticeError::InvalidPatch);
        }
        Ok(BoxPatch { lo, hi })
    }

    pub fn dim(&self) -> usize {
        self.lo.dim()
    }

    pub fn side_lengths(&self) -> Vec<i64> {
        self.lo.0.iter().zip(&self.hi.0).map(|(a, b)| b - a + 1).collect()
    }

    pub fn cell_count(&self) -> u64 {
        self.side_lengths().iter().map(|&s| s as u64).product()
    }

    pub fn contains(&self, p: &Point) -> bool {
        p.dim() == self.dim()
            && p.0.iter().zip(self.lo.0.iter().zip(&self.hi.0)).all(|(c, (l, h))| l <= c && c <= h)
    }

    /// Grows the box by `margin` on every side.
    pub fn expand(&self, margin: i64) -> BoxPatch {
        BoxPatch {
            lo: Point(self.lo.0.iter().map(|c| c - margin).collect()),
            hi: Point(self.hi.0.iter().map(|c| c + margin).collect()),
        }
    }

    /// All cells in lexicographic order.
    pub fn cells(&self) -> Vec<Point> {
        let mut out = vec![self.lo.clone()];
        for axis in (0..self.dim()).rev() {
            let mut next = Vec::with_capacity(out.len() * self.side_lengths()[axis] as usize);
            for p in &out {
                for c in self.lo.0[axis]..=self.hi.0[axis] {
                    let mut q = p.clone();
                    q.0[axis] = c;
                    next.push(q);
                }
            }
            out = next;
        }
        out.sort();
        out
    }

    /// The `2ⁿ` extreme points, in lexicographic order.
    pub fn corners(&self) -> Vec<Point> {
        let n = self.dim();
        let mut out: Vec<Point> = (0..1u32 << n)
            .map(|mask| {
                Point(
                    (0..n)
                        .map(|i| if mask >> i & 1 == 1 { self.hi.0[i] } else { self.lo.0[i] })
                        .collect(),
                )
            })
            .collect();
        out.sort();
        out.dedup();
        out
    }

    pub fn as_shape(&self) -> Shape {
        self.cells().into_iter().collect()
    }
}
