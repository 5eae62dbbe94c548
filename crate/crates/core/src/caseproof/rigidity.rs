//! Exhaustive local search around a single 4-cycle, compared against the
//! lattice-like solutions that contain it.

use std::collections::BTreeSet;

use super::engine::{prove, ProverOptions};
use super::{Certificate, Fact, Outcome, Seed};
use crate::abelian::{enumerate_bijective_epimorphisms, same_kernel, FiniteAbelianGroup, Homomorphism};
use crate::lattice::{closed_neighborhood_shape, signed_permutations, BoxPatch, Point};
use crate::tiling::{lattice_like_from_epimorphism, LatticeLikePds, Placement};

#[derive(Clone, Debug)]
pub enum RigidityOutcome {
    /// Every completion agrees with a lattice-like solution on the inner box.
    Rigid(Certificate),
    /// Completions of the patch that restrict to no lattice-like solution.
    Completions { certificate: Certificate, noncanonical: Vec<Vec<Placement>> },
    /// The node budget ran out before every branch was decided.
    BudgetExceeded(Certificate),
}

impl RigidityOutcome {
    pub fn is_rigid(&self) -> bool {
        matches!(self, RigidityOutcome::Rigid(_))
    }

    pub fn certificate(&self) -> &Certificate {
        match self {
            RigidityOutcome::Rigid(c)
            | RigidityOutcome::Completions { certificate: c, .. }
            | RigidityOutcome::BudgetExceeded(c) => c,
        }
    }
}

fn base() -> Placement {
    Placement { anchor: Point::origin(3), plane: (0, 1) }
}

/// The distinct lattice-like solutions having `{O, e₁, e₂, e₁+e₂}` as a
/// component, one per kernel of a bijective epimorphism onto ℤ₂₀.
pub fn canonical_restrictions() -> Vec<LatticeLikePds> {
    let q = base().shape();
    let vstar = closed_neighborhood_shape(&q).expect("nonempty");
    let epis = enumerate_bijective_epimorphisms(&FiniteAbelianGroup::cyclic(vstar.len() as u64), &vstar)
        .expect("cyclic target");
    let mut kernels: Vec<Homomorphism> = Vec::new();
    for phi in epis {
        if !kernels.iter().any(|k| same_kernel(k, &phi)) {
            kernels.push(phi);
        }
    }
    kernels.iter().map(|phi| lattice_like_from_epimorphism(&q, phi).expect("bijective")).collect()
}

/// Restrictions to `inner` of the canonical solutions and their images
/// under the isometries fixing the base cycle.
fn canonical_patterns(inner: &BoxPatch) -> BTreeSet<BTreeSet<Point>> {
    let cells = inner.cells();
    let q = base().shape();
    let stabilizer: Vec<_> = signed_permutations(3)
        .into_iter()
        .flat_map(|g| {
            let lo = g.apply_shape(&q).bounding_box().unwrap().lo;
            let fix = g.with_shift(Point::origin(3) - lo);
            (fix.apply_shape(&q) == q).then_some(fix)
        })
        .collect();
    let mut out = BTreeSet::new();
    for pds in canonical_restrictions() {
        for g in &stabilizer {
            let inv = g.inverse();
            out.insert(cells.iter().filter(|p| pds.contains(&inv.apply(p))).cloned().collect());
        }
    }
    out
}

fn restriction(components: &[Placement], inner: &BoxPatch) -> BTreeSet<Point> {
    components.iter().flat_map(|q| q.cells()).filter(|p| inner.contains(p)).collect()
}

/// Sorts the completions of `seed` into canonical and non-canonical ones by
/// their restriction to `inner`.
pub fn rigidity_from_seed(case_id: &str, seed: &Seed, inner: &BoxPatch, budget: u64) -> RigidityOutcome {
    let options = ProverOptions { max_nodes: Some(budget), ..ProverOptions::default() };
    let certificate = prove(case_id, seed, &options).expect("rigidity seeds fit the grid");
    if certificate.leaves().iter().any(|o| matches!(o, Outcome::Unexplored)) {
        return RigidityOutcome::BudgetExceeded(certificate);
    }
    let patterns = canonical_patterns(inner);
    let mut noncanonical: Vec<Vec<Placement>> = certificate
        .completions()
        .into_iter()
        .filter(|c| !patterns.contains(&restriction(c, inner)))
        .map(|c| c.to_vec())
        .collect();
    noncanonical.dedup();
    if noncanonical.is_empty() {
        RigidityOutcome::Rigid(certificate)
    } else {
        RigidityOutcome::Completions { certificate, noncanonical }
    }
}

/// Places the base cycle, decides every cell within ℓ∞ distance `radius`
/// of it, and compares each completion with the lattice-like solutions on
/// the box of radius `radius - 2`.
pub fn local_rigidity_search(radius: i64, budget: u64) -> RigidityOutcome {
    rigidity_search_with_inner(radius, radius - 2, budget)
}

/// As [`local_rigidity_search`] with the comparison box of radius `inner`.
pub fn rigidity_search_with_inner(radius: i64, inner: i64, budget: u64) -> RigidityOutcome {
    assert!(radius >= 2, "radius must be at least 2");
    assert!((0..=radius).contains(&inner), "inner radius must lie in 0..=radius");
    let q = base();
    let core = q.shape().bounding_box().unwrap();
    let seed = Seed {
        patch: core.expand(radius),
        facts: vec![Fact::Component(q)],
        pairs: Vec::new(),
        one_factor: None,
    };
    rigidity_from_seed(&format!("rigidity-r{radius}-i{inner}"), &seed, &core.expand(inner), budget)
}
