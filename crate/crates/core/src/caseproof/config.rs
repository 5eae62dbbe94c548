use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{CaseError, CellState, Edge, Fact, Seed};
use crate::lattice::{closed_neighborhood_shape, BoxPatch, Point};
use crate::tiling::Placement;

/// A partial assignment of lattice cells plus the committed structure.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartialConfig {
    pub patch: BoxPatch,
    /// Decided cells only; anything absent is unknown.
    pub assign: BTreeMap<Point, CellState>,
    pub components: BTreeSet<Placement>,
    /// Edges known to lie in S whose component is not committed yet.
    pub edges: BTreeSet<Edge>,
    /// Edges that must be dominated by a parallel edge of S.
    pub pairs: Vec<Edge>,
}

impl PartialConfig {
    pub fn new(patch: BoxPatch) -> Self {
        PartialConfig {
            patch,
            assign: BTreeMap::new(),
            components: BTreeSet::new(),
            edges: BTreeSet::new(),
            pairs: Vec::new(),
        }
    }

    pub fn from_seed(seed: &Seed) -> Result<Self, CaseError> {
        let mut c = PartialConfig::new(seed.patch.clone());
        for f in &seed.facts {
            c.apply(f)?;
        }
        c.pairs = seed.pairs.clone();
        Ok(c)
    }

    pub fn state(&self, p: &Point) -> CellState {
        self.assign.get(p).copied().unwrap_or(CellState::Unknown)
    }

    fn set(&mut self, p: &Point, s: CellState) -> Result<(), CaseError> {
        match self.state(p) {
            CellState::Unknown => {
                self.assign.insert(p.clone(), s);
                Ok(())
            }
            old if old == s => Ok(()),
            old => Err(CaseError::InconsistentSeed(format!("{p} is {old:?}, cannot become {s:?}"))),
        }
    }

    /// Applies a fact; conflicting assignments are an error.
    pub fn apply(&mut self, fact: &Fact) -> Result<(), CaseError> {
        match fact {
            Fact::InS(p) => self.set(p, CellState::InS),
            Fact::OutS(p) => self.set(p, CellState::OutS),
            Fact::Edge(e) => {
                let (a, b) = e.ends();
                self.set(a, CellState::InS)?;
                self.set(b, CellState::InS)?;
                self.edges.insert(e.clone());
                Ok(())
            }
            Fact::Component(q) => {
                let cells = q.shape();
                for c in cells.vertices() {
                    self.set(c, CellState::InS)?;
                }
                let star = closed_neighborhood_shape(&cells).expect("nonempty");
                for s in star.difference(&cells).vertices() {
                    self.set(s, CellState::OutS)?;
                }
                self.edges.retain(|e| !(cells.contains(e.ends().0) && cells.contains(e.ends().1)));
                self.components.insert(q.clone());
                Ok(())
            }
        }
    }

    /// Cells of the patch that are still unknown.
    pub fn undecided(&self) -> Vec<Point> {
        self.patch.cells().into_iter().filter(|p| self.state(p) == CellState::Unknown).collect()
    }

    /// The restriction of S to the patch.
    pub fn s_in_patch(&self) -> BTreeSet<Point> {
        self.assign
            .iter()
            .filter(|(p, s)| **s == CellState::InS && self.patch.contains(p))
            .map(|(p, _)| p.clone())
            .collect()
    }
}
