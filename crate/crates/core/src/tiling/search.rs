use std::collections::BTreeSet;

use super::dlx::{ExactCover, SearchStats};
use super::{equivalence_classes, planes, PdsSolution, Placement, Symmetry, TilingError, Torus};
use crate::lattice::{closed_neighborhood_shape, Point};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchConfig {
    /// Stop after this many solutions.
    pub cap: Option<usize>,
    /// Fix a component with its least corner at the origin, one run per
    /// orbit of orientations under the torus symmetries.
    pub symmetry_reduction: bool,
    /// Bound on search nodes per run.
    pub max_nodes: Option<u64>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig { cap: None, symmetry_reduction: true, max_nodes: None }
    }
}

#[derive(Clone, Debug)]
pub struct TorusSearch {
    pub torus: Torus,
    /// Sorted solutions.
    pub solutions: Vec<PdsSolution>,
    /// Equivalence classes under translations and all signed permutations,
    /// as indices into `solutions`.
    pub classes: Vec<Vec<usize>>,
    pub nodes: u64,
    pub options: usize,
    pub capped: bool,
    pub budget_exhausted: bool,
}

impl TorusSearch {
    /// True when the enumeration ran to completion.
    pub fn exhaustive(&self) -> bool {
        !self.capped && !self.budget_exhausted
    }
}

/// All solutions as exact covers by closed neighborhoods of 4-cycles, with
/// no symmetry reduction.
pub fn exact_cover_search(torus: &Torus, cap: Option<usize>) -> Result<Vec<PdsSolution>, TilingError> {
    let config = SearchConfig { cap, symmetry_reduction: false, max_nodes: None };
    Ok(search_torus(torus, &config)?.solutions)
}

pub fn search_torus(torus: &Torus, config: &SearchConfig) -> Result<TorusSearch, TilingError> {
    let n = torus.dim();
    if n < 2 {
        return Err(TilingError::InvalidTorus("4-cycles need at least two axes".into()));
    }
    let all_planes = planes(n);
    let mut ec = ExactCover::new(torus.vertex_count());
    let mut placements = Vec::new();
    let mut forced_ids = Vec::new();
    let root_planes = if config.symmetry_reduction { plane_orbit_representatives(torus) } else { Vec::new() };
    for &plane in &all_planes {
        let template = closed_neighborhood_shape(&Placement { anchor: Point::origin(n), plane }.shape())?;
        for x in torus.points() {
            let idx: BTreeSet<usize> = template.vertices().map(|c| torus.index(&(c + &x))).collect();
            if idx.len() != template.len() {
                continue;
            }
            let cells: Vec<usize> = idx.into_iter().collect();
            let row = ec.add_option(&cells);
            if x.coords().iter().all(|&c| c == 0) && root_planes.contains(&plane) {
                forced_ids.push(row);
            }
            placements.push(Placement { anchor: x, plane });
        }
    }

    let runs: Vec<Vec<usize>> = if config.symmetry_reduction {
        forced_ids.iter().map(|&r| vec![r]).collect()
    } else {
        vec![Vec::new()]
    };
    let mut found: Vec<PdsSolution> = Vec::new();
    let mut total = SearchStats::default();
    for forced in runs {
        let remaining = config.cap.map(|c| c.saturating_sub(found.len()));
        if remaining == Some(0) {
            total.capped = true;
            break;
        }
        let mut batch = Vec::new();
        let stats = ec.solve(&forced, config.max_nodes, |rows| {
            batch.push(rows.to_vec());
            remaining.is_none_or(|r| batch.len() < r)
        });
        let Some(stats) = stats else { continue };
        total.nodes += stats.nodes;
        total.capped |= stats.capped;
        total.budget_exhausted |= stats.budget_exhausted;
        for rows in batch {
            found.push(PdsSolution::new(torus.clone(), rows.iter().map(|&r| placements[r].clone()))?);
        }
    }
    found.sort_by(|a, b| a.placements().cmp(b.placements()));
    found.dedup();
    let classes = equivalence_classes(&found, Symmetry::Full);
    Ok(TorusSearch {
        torus: torus.clone(),
        solutions: found,
        classes,
        nodes: total.nodes,
        options: ec.n_options(),
        capped: total.capped,
        budget_exhausted: total.budget_exhausted,
    })
}

/// The least orientation of each orbit under the torus-preserving axis
/// permutations.
fn plane_orbit_representatives(torus: &Torus) -> Vec<(usize, usize)> {
    let isos = torus.isometries();
    let mut reps = Vec::new();
    for plane in planes(torus.dim()) {
        let least = isos
            .iter()
            .map(|g| {
                let img = |a: usize| g.perm.iter().position(|&p| p == a).unwrap();
                let (x, y) = (img(plane.0), img(plane.1));
                (x.min(y), x.max(y))
            })
            .min()
            .unwrap();
        if least == plane {
            reps.push(plane);
        }
    }
    reps
}
