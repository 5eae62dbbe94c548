use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::{PdsSolution, Placement, TilingError, Torus};

pub const SCHEMA_VERSION: u32 = 1;

/// On-disk form of a [`PdsSolution`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolutionFile {
    pub schema_version: u32,
    pub torus: Torus,
    pub placements: Vec<Placement>,
}

impl From<&PdsSolution> for SolutionFile {
    fn from(sol: &PdsSolution) -> Self {
        SolutionFile {
            schema_version: SCHEMA_VERSION,
            torus: sol.torus.clone(),
            placements: sol.placements().to_vec(),
        }
    }
}

impl TryFrom<SolutionFile> for PdsSolution {
    type Error = TilingError;
    fn try_from(f: SolutionFile) -> Result<Self, TilingError> {
        if f.schema_version != SCHEMA_VERSION {
            return Err(TilingError::Format(format!("unsupported schema_version {}", f.schema_version)));
        }
        PdsSolution::new(f.torus, f.placements)
    }
}

impl PdsSolution {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&SolutionFile::from(self)).expect("solution serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, TilingError> {
        let f: SolutionFile = serde_json::from_str(text).map_err(|e| TilingError::Format(e.to_string()))?;
        f.try_into()
    }
}

fn padded(p: &[i64]) -> [i64; 3] {
    [p.first().copied().unwrap_or(0), p.get(1).copied().unwrap_or(0), p.get(2).copied().unwrap_or(0)]
}

/// One quadrilateral per component. Anchors are reduced, so a quad may
/// poke one unit past the fundamental domain instead of wrapping.
pub fn to_off(sol: &PdsSolution) -> String {
    let ps = sol.placements();
    let mut out = String::new();
    writeln!(out, "OFF").unwrap();
    writeln!(out, "# torus {:?}", sol.torus.moduli()).unwrap();
    writeln!(out, "{} {} 0", 4 * ps.len(), ps.len()).unwrap();
    for p in ps {
        for c in p.cells() {
            let [x, y, z] = padded(c.coords());
            writeln!(out, "{x} {y} {z}").unwrap();
        }
    }
    for k in 0..ps.len() {
        let b = 4 * k;
        writeln!(out, "4 {} {} {} {}", b, b + 1, b + 2, b + 3).unwrap();
    }
    out
}

/// Wavefront OBJ, one group per orientation.
pub fn to_obj(sol: &PdsSolution) -> String {
    let ps = sol.placements();
    let mut out = String::new();
    writeln!(out, "# torus {:?}", sol.torus.moduli()).unwrap();
    for p in ps {
        for c in p.cells() {
            let [x, y, z] = padded(c.coords());
            writeln!(out, "v {x} {y} {z}").unwrap();
        }
    }
    for plane in super::planes(sol.torus.dim()) {
        let members: Vec<usize> = (0..ps.len()).filter(|&k| ps[k].plane == plane).collect();
        if members.is_empty() {
            continue;
        }
        writeln!(out, "g plane_{}{}", plane.0 + 1, plane.1 + 1).unwrap();
        for k in members {
            let b = 4 * k + 1;
            writeln!(out, "f {} {} {} {}", b, b + 1, b + 2, b + 3).unwrap();
        }
    }
    out
}
