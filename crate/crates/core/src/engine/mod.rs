//! Exact pointer statistics for the impulsive coupling `H = g delta(t - t0) A (x) p`
//! with a zero-centred Gaussian meter.
//!
//! After the interaction each eigenspace `P_a` of `A` drags a copy of the
//! pointer wavefunction to `q = g a`. Post-selection leaves the meter in
//!
//! ```text
//! rho_d = sum_{a,a'} tr(Pi_f P_a rho_s P_a') |Phi_a><Phi_a'|
//! ```
//!
//! so every pointer moment reduces to Gaussian overlap matrix elements
//! between shifted copies, see [`overlap_elements`]. [`grid_shifts`] is an
//! independent brute-force route that samples the meter wavefunction on a
//! grid and integrates by the trapezoidal rule.

mod exact;
mod grid;
mod pointer;

pub use exact::{exact_shifts, overlap_elements, OverlapElements};
pub use grid::{grid_shifts, GridSpec, DEFAULT_GRID_POINTS, MIN_GRID_POINTS};
pub use pointer::GaussianPointer;

pub(crate) use exact::shifts_from_amplitudes;

use crate::error::{Error, Result};
use crate::qcore::{DensityOperator, HermitianObservable, ProjectionOperator};
use crate::weakvalue::check_dims;

/// One complete experiment: observable, pre/post selection, coupling and
/// meter.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementSetup {
    observable: HermitianObservable,
    rho_s: DensityOperator,
    pi_f: ProjectionOperator,
    g: f64,
    pointer: GaussianPointer,
    selection_prob: f64,
}

impl MeasurementSetup {
    pub fn new(
        observable: HermitianObservable,
        rho_s: DensityOperator,
        pi_f: ProjectionOperator,
        g: f64,
        pointer: GaussianPointer,
    ) -> Result<Self> {
        check_dims(&rho_s, &pi_f, &observable)?;
        if !(g.is_finite() && g >= 0.0) {
            return Err(Error::param("g", format!("coupling must be finite and >= 0, got {g}")));
        }
        let selection_prob = (pi_f.matrix() * rho_s.matrix()).trace().re;
        Ok(Self {
            observable,
            rho_s,
            pi_f,
            g,
            pointer,
            selection_prob,
        })
    }

    pub fn observable(&self) -> &HermitianObservable {
        &self.observable
    }

    pub fn rho_s(&self) -> &DensityOperator {
        &self.rho_s
    }

    pub fn pi_f(&self) -> &ProjectionOperator {
        &self.pi_f
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn pointer(&self) -> &GaussianPointer {
        &self.pointer
    }

    /// `tr(Pi_f rho_s)`, the success probability without coupling.
    pub fn selection_prob(&self) -> f64 {
        self.selection_prob
    }

    pub fn dim(&self) -> usize {
        self.observable.dim()
    }

    pub fn with_coupling(&self, g: f64) -> Result<Self> {
        Self::new(
            self.observable.clone(),
            self.rho_s.clone(),
            self.pi_f.clone(),
            g,
            self.pointer,
        )
    }
}

/// Mean meter displacement after post-selection.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeasurementOutcome {
    /// `<q>' - <q>` in length units.
    pub delta_q: f64,
    /// `<p>' - <p>` in inverse length units.
    pub delta_p: f64,
    /// Joint probability of the post-selection with coupling on.
    pub postselect_prob: f64,
}
