//! Weak-measurement pointer statistics with a Gaussian meter.
//!
//! The crate computes mean pointer shifts for finite-dimensional systems
//! coupled impulsively to a Gaussian pointer: first- and second-order
//! weak-value formulas, exact shifts at arbitrary coupling (with an
//! independent quadrature oracle), bounds on the shifts and a search that
//! saturates them, Hardy's-paradox probabilities as a function of coupling,
//! and the meter's which-path information gain.

// `!(x > t)` rejects NaN along with small values throughout
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod engine;
pub mod error;
pub mod hardy;
pub mod infogain;
pub mod optimize;
pub mod qcore;
pub mod sampling;
pub mod sweep;
pub mod verify;
pub mod weakvalue;

pub use bounds::{
    check_weak_bounds, extreme_shifts_projector, k_value, optimize_pps, BoundReport, Envelope, ExtremePair, Extremum,
    Objective, PpsSearch,
};
pub use engine::{
    exact_shifts, grid_shifts, overlap_elements, GaussianPointer, GridSpec, MeasurementOutcome, MeasurementSetup,
};
pub use error::{Error, Result};
pub use hardy::{
    build_hardy, hardy_probabilities, infer_probability, probability_curve, HardyScenario, Occupation, ProbabilityPoint,
};
pub use infogain::{info_curve, information_gain, reduced_device_states, InfoGainResult};
pub use qcore::{
    spectral_decompose, von_neumann_entropy, CMatrix, CVector, DensityOperator, HermitianObservable,
    ProjectionOperator, StateVector, TensorProduct, C64,
};
pub use sweep::Spacing;
pub use weakvalue::{
    jozsa_shifts, schwarz_gap, second_order_shifts, weak_moments, PointerShifts, WeakMoments, WeakValue,
};
