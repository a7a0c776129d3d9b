//! Scenario files: one measurement setup as JSON.
//!
//! ```json
//! {
//!   "dimension": 2,
//!   "observable": [[[1, 0], [0, 0]], [[0, 0], [0, 0]]],
//!   "preselect": [[1, 0], [1, 0]],
//!   "postselect": [[1, 0], [-1, 0]],
//!   "g": 1.0,
//!   "delta": 1.0,
//!   "pointer_grid": { "half_width": 30.0, "num_points": 8192 }
//! }
//! ```
//!
//! Complex numbers are `[re, im]` pairs. `preselect` is a state vector
//! (normalized on load) or a density matrix; `postselect` is a state vector
//! (normalized on load) or a projector. Multi-particle bases put the first
//! particle in the slow index, each particle ordered `(O, NO)`.

use std::path::Path;

use serde::{Deserialize, Serialize};
use weakshift_core::engine::GridSpec;
use weakshift_core::qcore::MAX_DIM;
use weakshift_core::{
    CMatrix, CVector, DensityOperator, GaussianPointer, HermitianObservable, MeasurementSetup, ProjectionOperator,
    StateVector, C64,
};

use crate::CliError;

type Pair = [f64; 2];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Selection {
    Vector(Vec<Pair>),
    Matrix(Vec<Vec<Pair>>),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointerGrid {
    pub half_width: f64,
    pub num_points: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub dimension: usize,
    pub observable: Vec<Vec<Pair>>,
    pub preselect: Selection,
    pub postselect: Selection,
    pub g: f64,
    pub delta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pointer_grid: Option<PointerGrid>,
}

/// A validated scenario.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub setup: MeasurementSetup,
    pub grid: Option<GridSpec>,
}

fn invalid(field: &str, reason: impl std::fmt::Display) -> CliError {
    CliError::Input(format!("{field}: {reason}"))
}

fn complex(p: &Pair) -> C64 {
    C64::new(p[0], p[1])
}

fn square(field: &str, rows: &[Vec<Pair>], dim: usize) -> Result<CMatrix, CliError> {
    if rows.len() != dim {
        return Err(invalid(field, format!("expected {dim} rows, found {}", rows.len())));
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != dim {
            return Err(invalid(
                &format!("{field}[{i}]"),
                format!("expected {dim} entries, found {}", row.len()),
            ));
        }
        for (j, z) in row.iter().enumerate() {
            if !(z[0].is_finite() && z[1].is_finite()) {
                return Err(invalid(&format!("{field}[{i}][{j}]"), "entries must be finite"));
            }
        }
    }
    Ok(CMatrix::from_fn(dim, dim, |i, j| complex(&rows[i][j])))
}

fn vector(field: &str, v: &[Pair], dim: usize) -> Result<StateVector, CliError> {
    if v.len() != dim {
        return Err(invalid(field, format!("expected {dim} amplitudes, found {}", v.len())));
    }
    if v.iter().any(|z| !(z[0].is_finite() && z[1].is_finite())) {
        return Err(invalid(field, "amplitudes must be finite"));
    }
    StateVector::normalized(CVector::from_iterator(dim, v.iter().map(complex))).map_err(|e| invalid(field, e))
}

fn pairs(m: &CMatrix) -> Vec<Vec<Pair>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let path = if path == "." { "scenario".to_string() } else { path };
            invalid(&path, e.into_inner())
        })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| invalid(&path.display().to_string(), e))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<Scenario, CliError> {
        let d = self.dimension;
        if !(2..=MAX_DIM).contains(&d) {
            return Err(invalid("dimension", format!("must be in 2..={MAX_DIM}, got {d}")));
        }
        let observable = HermitianObservable::new(square("observable", &self.observable, d)?)
            .map_err(|e| invalid("observable", e))?;
        let rho_s = match &self.preselect {
            Selection::Vector(v) => vector("preselect", v, d)?.density(),
            Selection::Matrix(m) => {
                DensityOperator::new(square("preselect", m, d)?).map_err(|e| invalid("preselect", e))?
            }
        };
        let pi_f = match &self.postselect {
            Selection::Vector(v) => vector("postselect", v, d)?.projector(),
            Selection::Matrix(m) => {
                ProjectionOperator::new(square("postselect", m, d)?).map_err(|e| invalid("postselect", e))?
            }
        };
        let pointer = GaussianPointer::new(self.delta).map_err(|e| invalid("delta", e))?;
        let setup = MeasurementSetup::new(observable, rho_s, pi_f, self.g, pointer).map_err(|e| invalid("g", e))?;
        let grid = self
            .pointer_grid
            .map(|p| {
                let grid = GridSpec::new(p.half_width, p.num_points).map_err(|e| invalid("pointer_grid", e))?;
                grid.check(&setup).map_err(|e| invalid("pointer_grid", e))?;
                Ok::<_, CliError>(grid)
            })
            .transpose()?;
        Ok(Scenario { setup, grid })
    }

    /// Scenario that reproduces `setup` exactly (matrices written out in
    /// full, floats round-trip through JSON).
    pub fn from_setup(setup: &MeasurementSetup) -> Self {
        Self {
            dimension: setup.dim(),
            observable: pairs(setup.observable().matrix()),
            preselect: Selection::Matrix(pairs(setup.rho_s().matrix())),
            postselect: Selection::Matrix(pairs(setup.pi_f().matrix())),
            g: setup.g(),
            delta: setup.pointer().delta(),
            pointer_grid: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("scenario serializes")
    }
}
