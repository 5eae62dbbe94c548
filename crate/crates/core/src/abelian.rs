//! Integer matrices, Smith normal form and finite abelian groups.
//!
//! A full-rank sublattice `L ⊆ ℤⁿ` is given by the rows of a square
//! generator matrix. Its quotient `ℤⁿ/L` is read off the Smith normal form,
//! and the same decomposition yields a canonical epimorphism `ℤⁿ → ℤⁿ/L`.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice::{Point, Shape};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AbelianError {
    #[error("matrix is singular, so the quotient group is infinite")]
    InfiniteQuotient,
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("ragged matrix: row {row} has {found} entries, expected {expected}")]
    Ragged { row: usize, expected: usize, found: usize },
    #[error("invalid invariant factors {0:?}: need d_i >= 2 and d_i | d_(i+1)")]
    InvalidFactors(Vec<u64>),
    #[error("cannot parse group '{0}': expected e.g. Z20 or Z2xZ2xZ5")]
    GroupSyntax(String),
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("element {0:?} does not belong to the group")]
    NotAnElement(Vec<u64>),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
}

/// A dense integer matrix, serialized as an array of rows.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<i64>>", into = "Vec<Vec<i64>>")]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<i64>,
}

/// Rows generate the sublattice; full rank is checked where it matters.
pub type GeneratorMatrix = IntMatrix;

impl TryFrom<Vec<Vec<i64>>> for IntMatrix {
    type Error = AbelianError;
    fn try_from(rows: Vec<Vec<i64>>) -> Result<Self, Self::Error> {
        IntMatrix::from_rows(rows)
    }
}

impl From<IntMatrix> for Vec<Vec<i64>> {
    fn from(m: IntMatrix) -> Self {
        m.to_rows()
    }
}

impl IntMatrix {
    pub fn from_rows(rows: Vec<Vec<i64>>) -> Result<Self, AbelianError> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != c {
                return Err(AbelianError::Ragged { row: i, expected: c, found: row.len() });
            }
            data.extend(row);
        }
        Ok(IntMatrix { rows: r, cols: c, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix { rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1;
        }
        m
    }

    pub fn diagonal(entries: &[i64]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, &d) in entries.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[i64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<i64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.rows, "matrix product shape mismatch");
        let mut out = IntMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    /// Exact determinant by fraction-free (Bareiss) elimination.
    pub fn determinant(&self) -> Result<i64, AbelianError> {
        if self.rows != self.cols {
            return Err(AbelianError::NotSquare { rows: self.rows, cols: self.cols });
        }
        let n = self.rows;
        let mut a: Vec<Vec<i128>> =
            (0..n).map(|i| self.row(i).iter().map(|&x| x as i128).collect()).collect();
        let mut sign = 1i128;
        let mut prev = 1i128;
        for k in 0..n {
            if a[k][k] == 0 {
                match (k + 1..n).find(|&i| a[i][k] != 0) {
                    Some(i) => {
                        a.swap(i, k);
                        sign = -sign;
                    }
                    None => return Ok(0),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
                }
            }
            prev = a[k][k];
        }
        Ok(if n == 0 { 1 } else { (sign * a[n - 1][n - 1]) as i64 })
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a != b {
            for i in 0..self.rows {
                self.data.swap(i * self.cols + a, i * self.cols + b);
            }
        }
    }

    /// row[dst] += k * row[src]
    fn add_row(&mut self, dst: usize, src: usize, k: i64) {
        for j in 0..self.cols {
            let v = self[(src, j)];
            self[(dst, j)] += k * v;
        }
    }

    /// col[dst] += k * col[src]
    fn add_col(&mut self, dst: usize, src: usize, k: i64) {
        for i in 0..self.rows {
            let v = self[(i, src)];
            self[(i, dst)] += k * v;
        }
    }

    fn negate_row(&mut self, i: usize) {
        for j in 0..self.cols {
            self[(i, j)] = -self[(i, j)];
        }
    }
}

impl std::ops::Index<(usize, usize)> for IntMatrix {
    type Output = i64;
    fn index(&self, (i, j): (usize, usize)) -> &i64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for IntMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut i64 {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self.data.iter().map(|x| x.to_string().len()).max().unwrap_or(1);
        for i in 0..self.rows {
            let cells: Vec<String> =
                self.row(i).iter().map(|x| format!("{x:>width$}")).collect();
            writeln!(f, "[{}]", cells.join(" "))?;
        }
        Ok(())
    }
}

/// Parses `n` on the first line followed by `n*n` whitespace-separated
/// integers in row-major order.
pub fn parse_matrix(text: &str) -> Result<IntMatrix, AbelianError> {
    let mut tokens = Vec::new();
    for (li, line) in text.lines().enumerate() {
        let mut col = 0;
        for tok in line.split_whitespace() {
            let start = line[col..].find(tok).map_or(col, |o| col + o);
            col = start + tok.len();
            tokens.push((li + 1, start + 1, tok));
        }
    }
    let mut it = tokens.into_iter();
    let (l, c, first) = it.next().ok_or(AbelianError::Parse {
        line: 1,
        column: 1,
        message: "empty input, expected the dimension n".into(),
    })?;
    let n: usize = first.parse().map_err(|_| AbelianError::Parse {
        line: l,
        column: c,
        message: format!("expected a positive dimension, found '{first}'"),
    })?;
    if n == 0 {
        return Err(AbelianError::Parse { line: l, column: c, message: "dimension must be >= 1".into() });
    }
    let mut data = Vec::with_capacity(n * n);
    let mut last = (l, c);
    for (l, c, tok) in it.by_ref().take(n * n) {
        last = (l, c);
        data.push(tok.parse::<i64>().map_err(|_| AbelianError::Parse {
            line: l,
            column: c,
            message: format!("expected an integer, found '{tok}'"),
        })?);
    }
    if data.len() < n * n {
        return Err(AbelianError::Parse {
            line: last.0,
            column: last.1,
            message: format!("expected {} matrix entries, found {}", n * n, data.len()),
        });
    }
    if let Some((l, c, tok)) = it.next() {
        return Err(AbelianError::Parse {
            line: l,
            column: c,
            message: format!("unexpected trailing token '{tok}'"),
        });
    }
    Ok(IntMatrix { rows: n, cols: n, data })
}

/// `U · M · V = D` with `U`, `V` unimodular and `D` diagonal in divisor-chain form.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SmithDecomposition {
    pub u: IntMatrix,
    pub d: IntMatrix,
    pub v: IntMatrix,
}

impl SmithDecomposition {
    pub fn diagonal(&self) -> Vec<i64> {
        (0..self.d.rows.min(self.d.cols)).map(|i| self.d[(i, i)]).collect()
    }
}

/// Smith normal form by repeated least-magnitude pivoting.
///
/// The pivot is the nonzero entry of least absolute value in the remaining
/// block, ties broken by row-major position. Singular input is accepted;
/// its trailing diagonal entries are zero.
pub fn smith_normal_form(m: &IntMatrix) -> SmithDecomposition {
    let (r, c) = (m.rows, m.cols);
    let mut d = m.clone();
    let mut u = IntMatrix::identity(r);
    let mut v = IntMatrix::identity(c);
    for t in 0..r.min(c) {
        loop {
            let mut pivot: Option<(usize, usize)> = None;
            for i in t..r {
                for j in t..c {
                    let x = d[(i, j)].abs();
                    if x != 0 && pivot.is_none_or(|(pi, pj)| x < d[(pi, pj)].abs()) {
                        pivot = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = pivot else {
                return SmithDecomposition { u, d, v };
            };
            d.swap_rows(t, pi);
            u.swap_rows(t, pi);
            d.swap_cols(t, pj);
            v.swap_cols(t, pj);

            let p = d[(t, t)];
            let mut clean = true;
            for i in t + 1..r {
                let q = d[(i, t)] / p;
                if q != 0 {
                    d.add_row(i, t, -q);
                    u.add_row(i, t, -q);
                }
                clean &= d[(i, t)] == 0;
            }
            for j in t + 1..c {
                let q = d[(t, j)] / p;
                if q != 0 {
                    d.add_col(j, t, -q);
                    v.add_col(j, t, -q);
                }
                clean &= d[(t, j)] == 0;
            }
            if !clean {
                continue;
            }
            let offender = (t + 1..r)
                .flat_map(|i| (t + 1..c).map(move |j| (i, j)))
                .find(|&(i, j)| d[(i, j)] % p != 0);
            match offender {
                Some((i, _)) => {
                    d.add_row(t, i, 1);
                    u.add_row(t, i, 1);
                }
                None => break,
            }
        }
        if d[(t, t)] < 0 {
            d.negate_row(t);
            u.negate_row(t);
        }
    }
    SmithDecomposition { u, d, v }
}

pub type Element = Vec<u64>;

/// A finite abelian group `ℤ_{d1} × ... × ℤ_{dk}` with `d_i | d_{i+1}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u64>", into = "Vec<u64>")]
pub struct FiniteAbelianGroup {
    factors: Vec<u64>,
}

impl TryFrom<Vec<u64>> for FiniteAbelianGroup {
    type Error = AbelianError;
    fn try_from(v: Vec<u64>) -> Result<Self, Self::Error> {
        FiniteAbelianGroup::from_invariant_factors(v)
    }
}

impl From<FiniteAbelianGroup> for Vec<u64> {
    fn from(g: FiniteAbelianGroup) -> Self {
        g.factors
    }
}

impl FiniteAbelianGroup {
    pub fn trivial() -> Self {
        FiniteAbelianGroup { factors: Vec::new() }
    }

    pub fn cyclic(n: u64) -> Self {
        if n <= 1 {
            Self::trivial()
        } else {
            FiniteAbelianGroup { factors: vec![n] }
        }
    }

    pub fn from_invariant_factors(factors: Vec<u64>) -> Result<Self, AbelianError> {
        let ok = factors.iter().all(|&d| d >= 2) && factors.windows(2).all(|w| w[1] % w[0] == 0);
        if ok {
            Ok(FiniteAbelianGroup { factors })
        } else {
            Err(AbelianError::InvalidFactors(factors))
        }
    }

    /// Any product of cyclic groups, normalized to invariant factors.
    pub fn from_cyclic_factors(orders: &[u64]) -> Result<Self, AbelianError> {
        if orders.contains(&0) {
            return Err(AbelianError::InfiniteQuotient);
        }
        if orders.is_empty() {
            return Ok(Self::trivial());
        }
        let diag: Vec<i64> = orders.iter().map(|&d| d as i64).collect();
        quotient_group(&IntMatrix::diagonal(&diag))
    }

    pub fn invariant_factors(&self) -> &[u64] {
        &self.factors
    }

    pub fn rank(&self) -> usize {
        self.factors.len()
    }

    pub fn order(&self) -> u64 {
        self.factors.iter().product()
    }

    pub fn zero(&self) -> Element {
        vec![0; self.factors.len()]
    }

    pub fn contains(&self, g: &[u64]) -> bool {
        g.len() == self.factors.len() && g.iter().zip(&self.factors).all(|(x, d)| x < d)
    }

    pub fn add(&self, a: &[u64], b: &[u64]) -> Element {
        a.iter().zip(b).zip(&self.factors).map(|((x, y), d)| (x + y) % d).collect()
    }

    /// `k · g` for any integer `k`.
    pub fn scale(&self, g: &[u64], k: i64) -> Element {
        g.iter()
            .zip(&self.factors)
            .map(|(&x, &d)| {
                let d = d as i128;
                ((x as i128 * k as i128).rem_euclid(d)) as u64
            })
            .collect()
    }

    /// Mixed-radix position of an element, first coordinate most significant.
    pub fn index_of(&self, g: &[u64]) -> usize {
        g.iter().zip(&self.factors).fold(0usize, |acc, (&x, &d)| acc * d as usize + x as usize)
    }

    pub fn element_at(&self, mut idx: usize) -> Element {
        let mut out = vec![0; self.factors.len()];
        for (slot, &d) in out.iter_mut().zip(&self.factors).rev() {
            *slot = (idx % d as usize) as u64;
            idx /= d as usize;
        }
        out
    }

    /// All elements in lexicographic order.
    pub fn elements(&self) -> impl Iterator<Item = Element> + '_ {
        (0..self.order() as usize).map(|i| self.element_at(i))
    }
}

impl fmt::Display for FiniteAbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "Z1");
        }
        let parts: Vec<String> = self.factors.iter().map(|d| format!("Z{d}")).collect();
        write!(f, "{}", parts.join("x"))
    }
}

impl FromStr for FiniteAbelianGroup {
    type Err = AbelianError;
    /// Accepts `Z20`, `Z2xZ2xZ5`, `Z_2 x Z_10` and similar spellings.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || AbelianError::GroupSyntax(s.to_string());
        let mut orders = Vec::new();
        for part in s.split(['x', 'X', '*', '×']) {
            let part = part.trim();
            let digits = part
                .strip_prefix('Z')
                .or_else(|| part.strip_prefix('z'))
                .or_else(|| part.strip_prefix("ℤ"))
                .ok_or_else(bad)?
                .trim_start_matches('_');
            let d: u64 = digits.parse().map_err(|_| bad())?;
            if d == 0 {
                return Err(bad());
            }
            orders.push(d);
        }
        let orders: Vec<u64> = orders.into_iter().filter(|&d| d != 1).collect();
        Self::from_cyclic_factors(&orders)
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 { a } else { gcd(b, a % b) }
}

/// Least `k >= 1` with `k · g = 0`.
pub fn element_order(group: &FiniteAbelianGroup, g: &[u64]) -> Result<u64, AbelianError> {
    if !group.contains(g) {
        return Err(AbelianError::NotAnElement(g.to_vec()));
    }
    Ok(g.iter().zip(&group.factors).fold(1u64, |acc, (&x, &d)| {
        let o = d / gcd(x, d);
        acc / gcd(acc, o) * o
    }))
}

/// `ℤⁿ/rowspan(M)` from the nonunit Smith invariants.
pub fn quotient_group(m: &IntMatrix) -> Result<FiniteAbelianGroup, AbelianError> {
    Ok(quotient_data(m)?.0)
}

fn quotient_data(m: &IntMatrix) -> Result<(FiniteAbelianGroup, SmithDecomposition, Vec<usize>), AbelianError> {
    if m.rows != m.cols {
        return Err(AbelianError::NotSquare { rows: m.rows, cols: m.cols });
    }
    let snf = smith_normal_form(m);
    let diag = snf.diagonal();
    if diag.contains(&0) {
        return Err(AbelianError::InfiniteQuotient);
    }
    let kept: Vec<usize> = (0..diag.len()).filter(|&i| diag[i] != 1).collect();
    let factors = kept.iter().map(|&i| diag[i] as u64).collect();
    Ok((FiniteAbelianGroup { factors }, snf, kept))
}

/// A homomorphism `ℤⁿ → G` fixed by the images of the unit vectors.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Homomorphism {
    #[serde(rename = "invariant_factors")]
    pub target: FiniteAbelianGroup,
    pub images: Vec<Element>,
}

impl Homomorphism {
    pub fn new(target: FiniteAbelianGroup, images: Vec<Element>) -> Result<Self, AbelianError> {
        if let Some(bad) = images.iter().find(|g| !target.contains(g)) {
            return Err(AbelianError::NotAnElement(bad.clone()));
        }
        Ok(Homomorphism { target, images })
    }

    /// Convenience constructor for cyclic targets.
    pub fn cyclic(order: u64, images: &[u64]) -> Result<Self, AbelianError> {
        let target = FiniteAbelianGroup::cyclic(order);
        let images = images
            .iter()
            .map(|&x| if target.rank() == 0 { vec![] } else { vec![x % order] })
            .collect();
        Self::new(target, images)
    }

    pub fn domain_dim(&self) -> usize {
        self.images.len()
    }

    pub fn apply(&self, p: &Point) -> Element {
        let mut acc = self.target.zero();
        for (img, &c) in self.images.iter().zip(p.coords()) {
            if c != 0 {
                acc = self.target.add(&acc, &self.target.scale(img, c));
            }
        }
        acc
    }

    /// Order of the subgroup generated by the images.
    pub fn image_order(&self) -> u64 {
        subgroup_order(&self.target, &self.images)
    }

    pub fn is_surjective(&self) -> bool {
        self.image_order() == self.target.order()
    }

    /// `order(Φ(e_i))` for each axis.
    pub fn image_orders(&self) -> Vec<u64> {
        self.images
            .iter()
            .map(|g| element_order(&self.target, g).expect("images are group elements"))
            .collect()
    }

    /// `Φ(x) = 0`.
    pub fn annihilates(&self, p: &Point) -> bool {
        self.apply(p).iter().all(|&x| x == 0)
    }
}

fn subgroup_order(group: &FiniteAbelianGroup, gens: &[Element]) -> u64 {
    let mut seen = vec![false; group.order() as usize];
    let zero = group.zero();
    seen[group.index_of(&zero)] = true;
    let mut queue = VecDeque::from([zero]);
    let mut count = 1u64;
    while let Some(x) = queue.pop_front() {
        for g in gens {
            let y = group.add(&x, g);
            let idx = group.index_of(&y);
            if !seen[idx] {
                seen[idx] = true;
                count += 1;
                queue.push_back(y);
            }
        }
    }
    count
}

/// True iff both surjective homomorphisms have the same kernel, i.e. they
/// differ by an isomorphism of the targets.
///
/// Uses `|im(Φ × Ψ)| = |im Φ| = |im Ψ|`, which holds exactly when the
/// kernels coincide.
pub fn same_kernel(a: &Homomorphism, b: &Homomorphism) -> bool {
    if a.domain_dim() != b.domain_dim() {
        return false;
    }
    let mut factors = a.target.factors.clone();
    factors.extend(&b.target.factors);
    let prod = FiniteAbelianGroup { factors };
    let gens: Vec<Element> = a
        .images
        .iter()
        .zip(&b.images)
        .map(|(x, y)| x.iter().chain(y).copied().collect())
        .collect();
    let joint = subgroup_order(&prod, &gens);
    joint == a.image_order() && joint == b.image_order()
}

/// The canonical epimorphism `ℤⁿ → ℤⁿ/rowspan(M)` read from `U·M·V = D`:
/// `Φ(x)_i = (x·V)_i mod d_i` over the nonunit invariants.
pub fn hom_from_generator_matrix(m: &IntMatrix) -> Result<Homomorphism, AbelianError> {
    let (target, snf, kept) = quotient_data(m)?;
    let images = (0..m.rows)
        .map(|j| {
            kept.iter()
                .zip(&target.factors)
                .map(|(&i, &d)| snf.v[(j, i)].rem_euclid(d as i64) as u64)
                .collect()
        })
        .collect();
    Ok(Homomorphism { target, images })
}

/// A basis of `ker Φ`, one vector per row.
///
/// The kernel is the projection of the left kernel of `[P; -D]`, where `P`
/// stacks the unit-vector images and `D` is the diagonal of invariant
/// factors; the projection is injective because `D` is nonsingular.
pub fn kernel_matrix(phi: &Homomorphism) -> IntMatrix {
    let n = phi.domain_dim();
    let k = phi.target.rank();
    if k == 0 {
        return IntMatrix::identity(n);
    }
    let mut a = IntMatrix::zeros(n + k, k);
    for (i, img) in phi.images.iter().enumerate() {
        for (j, &x) in img.iter().enumerate() {
            a[(i, j)] = x as i64;
        }
    }
    for (j, &d) in phi.target.factors.iter().enumerate() {
        a[(n + j, j)] = -(d as i64);
    }
    let snf = smith_normal_form(&a);
    let rows = (k..n + k).map(|r| snf.u.row(r)[..n].to_vec()).collect();
    IntMatrix::from_rows(rows).expect("kernel rows have equal length")
}

/// True iff `Φ` maps the vertex set of `vstar` bijectively onto its target.
pub fn restriction_bijective(phi: &Homomorphism, vstar: &Shape) -> bool {
    if vstar.len() as u64 != phi.target.order() {
        return false;
    }
    let mut seen = vec![false; vstar.len()];
    for p in vstar.vertices() {
        let idx = phi.target.index_of(&phi.apply(p));
        if std::mem::replace(&mut seen[idx], true) {
            return false;
        }
    }
    true
}

/// Every assignment of unit-vector images whose homomorphism is onto `G`
/// and bijective on `vstar`, in lexicographic order of the image tuples.
///
/// Scans all `|G|ⁿ` candidates.
pub fn enumerate_bijective_epimorphisms(
    group: &FiniteAbelianGroup,
    vstar: &Shape,
) -> Result<Vec<Homomorphism>, AbelianError> {
    let Some(dim) = vstar.dim() else {
        return Ok(Vec::new());
    };
    if vstar.len() as u64 != group.order() {
        return Ok(Vec::new());
    }
    let order = group.order() as usize;
    let points: Vec<&Point> = vstar.vertices().collect();
    let mut out = Vec::new();
    let mut choice = vec![0usize; dim];
    let mut seen = vec![false; order];
    loop {
        let images: Vec<Element> = choice.iter().map(|&i| group.element_at(i)).collect();
        let phi = Homomorphism { target: group.clone(), images };
        seen.iter_mut().for_each(|s| *s = false);
        let injective = points.iter().all(|p| {
            let idx = group.index_of(&phi.apply(p));
            !std::mem::replace(&mut seen[idx], true)
        });
        if injective && phi.is_surjective() {
            out.push(phi);
        }
        // odometer, last axis fastest
        let mut k = dim;
        loop {
            if k == 0 {
                return Ok(out);
            }
            k -= 1;
            choice[k] += 1;
            if choice[k] < order {
                break;
            }
            choice[k] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::closed_neighborhood_shape;

    fn matrix_one() -> IntMatrix {
        IntMatrix::from_rows(vec![vec![1, 0, 3], vec![0, 2, 5], vec![0, 0, 10]]).unwrap()
    }

    fn check_snf(m: &IntMatrix) -> SmithDecomposition {
        let s = smith_normal_form(m);
        assert_eq!(s.u.mul(m).mul(&s.v), s.d);
        assert_eq!(s.u.determinant().unwrap().abs(), 1);
        assert_eq!(s.v.determinant().unwrap().abs(), 1);
        s
    }

    #[test]
    fn snf_identity_and_index_twenty() {
        assert_eq!(check_snf(&IntMatrix::identity(3)).diagonal(), vec![1, 1, 1]);
        assert_eq!(check_snf(&matrix_one()).diagonal(), vec![1, 1, 20]);
        assert_eq!(check_snf(&IntMatrix::diagonal(&[2, 4])).diagonal(), vec![2, 4]);
        assert_eq!(check_snf(&IntMatrix::diagonal(&[4, 6])).diagonal(), vec![2, 12]);
    }

    #[test]
    fn snf_singular_has_trailing_zero() {
        let m = IntMatrix::from_rows(vec![vec![1, 2], vec![2, 4]]).unwrap();
        assert_eq!(check_snf(&m).diagonal(), vec![1, 0]);
        assert_eq!(quotient_group(&m), Err(AbelianError::InfiniteQuotient));
    }

    #[test]
    fn quotient_groups() {
        assert_eq!(quotient_group(&matrix_one()).unwrap().invariant_factors(), &[20]);
        let two = IntMatrix::diagonal(&[2, 2, 2]);
        assert_eq!(quotient_group(&two).unwrap().invariant_factors(), &[2, 2, 2]);
        let m = IntMatrix::diagonal(&[1, 2, 10]);
        assert_eq!(quotient_group(&m).unwrap().invariant_factors(), &[2, 10]);
    }

    #[test]
    fn derived_hom_kills_rows_and_matches_representative() {
        let m = matrix_one();
        let phi = hom_from_generator_matrix(&m).unwrap();
        for r in m.to_rows() {
            assert!(phi.annihilates(&Point(r)));
        }
        let rep = Homomorphism::cyclic(20, &[2, 5, 6]).unwrap();
        assert!(same_kernel(&phi, &rep));
        let other = Homomorphism::cyclic(20, &[5, 2, 6]).unwrap();
        assert!(!same_kernel(&phi, &other));
    }

    #[test]
    fn small_homs() {
        let phi = hom_from_generator_matrix(&IntMatrix::identity(3)).unwrap();
        assert_eq!(phi.target.order(), 1);
        assert!(phi.images.iter().all(Vec::is_empty));
        let phi = hom_from_generator_matrix(&IntMatrix::diagonal(&[5, 1, 1])).unwrap();
        assert_eq!(phi.target.invariant_factors(), &[5]);
        assert_eq!(element_order(&phi.target, &phi.images[0]).unwrap(), 5);
        assert_eq!(phi.images[1], vec![0]);
        assert_eq!(phi.images[2], vec![0]);
    }

    #[test]
    fn element_orders() {
        let z20 = FiniteAbelianGroup::cyclic(20);
        assert_eq!(element_order(&z20, &[2]).unwrap(), 10);
        assert_eq!(element_order(&z20, &[5]).unwrap(), 4);
        assert_eq!(element_order(&z20, &[0]).unwrap(), 1);
        let g: FiniteAbelianGroup = "Z2xZ2xZ5".parse().unwrap();
        assert_eq!(g.invariant_factors(), &[2, 10]);
        assert_eq!(element_order(&g, &[0, 0]).unwrap(), 1);
        assert!(element_order(&z20, &[20]).is_err());
    }

    #[test]
    fn bijectivity_of_representative() {
        let star = closed_neighborhood_shape(&Shape::square(3, 0, 1)).unwrap();
        let phi = Homomorphism::cyclic(20, &[2, 5, 6]).unwrap();
        assert!(restriction_bijective(&phi, &star));
        assert!(restriction_bijective(&phi, &star.translate(&Point::from([3, -7, 11]))));
        let zero = Homomorphism::cyclic(20, &[0, 0, 0]).unwrap();
        assert!(!restriction_bijective(&zero, &star));
    }

    #[test]
    fn kernel_matrix_spans_kernel() {
        for images in [[2u64, 5, 6], [5, 2, 6], [1, 0, 0], [4, 10, 0]] {
            let phi = Homomorphism::cyclic(20, &images).unwrap();
            let k = kernel_matrix(&phi);
            for r in 0..3 {
                assert!(phi.annihilates(&Point::new(k.row(r).to_vec())));
            }
            assert_eq!(k.determinant().unwrap().unsigned_abs(), phi.image_order());
            assert!(same_kernel(&phi, &hom_from_generator_matrix(&k).unwrap()) || !phi.is_surjective());
        }
        let phi = Homomorphism::new(FiniteAbelianGroup::trivial(), vec![vec![]; 3]).unwrap();
        assert_eq!(kernel_matrix(&phi), IntMatrix::identity(3));
    }

    #[test]
    fn perfect_lee_code_count() {
        let cross = closed_neighborhood_shape(&[Point::origin(3)].into_iter().collect()).unwrap();
        let z7 = FiniteAbelianGroup::cyclic(7);
        assert_eq!(enumerate_bijective_epimorphisms(&z7, &cross).unwrap().len(), 48);
    }

    #[test]
    fn group_parsing() {
        assert_eq!("Z20".parse::<FiniteAbelianGroup>().unwrap().invariant_factors(), &[20]);
        assert_eq!("Z_4 x Z_6".parse::<FiniteAbelianGroup>().unwrap().invariant_factors(), &[2, 12]);
        assert_eq!("Z1".parse::<FiniteAbelianGroup>().unwrap().order(), 1);
        assert!("20".parse::<FiniteAbelianGroup>().is_err());
        assert!("Z0".parse::<FiniteAbelianGroup>().is_err());
    }

    #[test]
    fn matrix_parsing_errors_carry_position() {
        let m = parse_matrix("3\n1 0 3\n0 2 5\n0 0 10\n").unwrap();
        assert_eq!(m, matrix_one());
        match parse_matrix("2\n1 x\n0 1\n") {
            Err(AbelianError::Parse { line: 2, column: 3, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse_matrix("2\n1 0\n0"), Err(AbelianError::Parse { .. })));
        assert!(matches!(parse_matrix(""), Err(AbelianError::Parse { line: 1, .. })));
    }

    #[test]
    fn matrix_json_round_trip() {
        let m = matrix_one();
        let js = serde_json::to_string(&m).unwrap();
        assert_eq!(js, "[[1,0,3],[0,2,5],[0,0,10]]");
        assert_eq!(serde_json::from_str::<IntMatrix>(&js).unwrap(), m);
        let phi = Homomorphism::cyclic(20, &[2, 5, 6]).unwrap();
        let js = serde_json::to_string(&phi).unwrap();
        assert_eq!(js, r#"{"invariant_factors":[20],"images":[[2],[5],[6]]}"#);
    }
}
