//! Perfect dominating sets of the cubic lattice graph whose induced
//! components are 4-cycles.
//!
//! * [`lattice`]: points, shapes, closed neighborhoods, signed permutations.
//! * [`abelian`]: Smith normal form, quotient groups, epimorphism enumeration.
//! * [`tiling`]: lattice-like constructions, torus verification, exact cover search.
//! * [`caseproof`]: forced-domination propagation with replayable certificates.

pub mod abelian;
pub mod caseproof;
pub mod lattice;
pub mod tiling;
