//! Bounds on the mean pointer shifts and a search over pure pre/post
//! selections that tries to reach them.
//!
//! In the weak regime (`g dp <= 0.01`) the mean shifts are expected to stay
//! inside `|dq| <= 1/(2 dp)` and `|dp| <= dp`. For projector observables and
//! arbitrary coupling the exact envelope over pure selections is
//!
//! ```text
//! dq_max/min = (g/2) (1 +- 1/sqrt(1 - exp(-g^2 / 4 D^2)))
//! ```

use crate::engine::{exact_shifts, shifts_from_amplitudes, GaussianPointer, MeasurementSetup};
use crate::error::{Error, Result};
use crate::optimize::{nelder_mead, NelderMeadOptions};
use crate::qcore::{CMatrix, CVector, HermitianObservable, StateVector, C64};
use crate::sampling::{random_vector, substream};
use crate::weakvalue::{weak_moments, WeakMoments};

/// Largest `g dp` treated as weak coupling.
pub const WEAK_REGIME_LIMIT: f64 = 0.01;
/// Relative slack allowed on the weak-regime bounds.
pub const BOUND_RTOL: f64 = 1e-6;
pub const DEFAULT_RESTARTS: usize = 64;

const K_TOL: f64 = 1e-10;

/// `K = 1 + (g dp)^2 (a11 - Re A_w)` for a projector observable.
pub fn k_value(m: &WeakMoments, observable: &HermitianObservable, g: f64, pointer: &GaussianPointer) -> Result<f64> {
    if !observable.is_projector() {
        return Err(Error::NotProjector);
    }
    let k = k_unchecked(m, g, pointer);
    if k < -K_TOL {
        return Err(Error::Inconsistent(format!("K = {k:e} is negative")));
    }
    Ok(k)
}

pub(crate) fn k_unchecked(m: &WeakMoments, g: f64, pointer: &GaussianPointer) -> f64 {
    let gdp = g * pointer.delta_p();
    1.0 + gdp * gdp * (m.a11 - m.weak_value.re)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundReport {
    /// Second-order denominator `1 + g^2 Var_p (a11 - Re<A^2>_w)`; equals `K`
    /// for projectors. `None` when the weak value is undefined.
    pub k_value: Option<f64>,
    pub bound_q: f64,
    pub bound_p: f64,
    pub observed_q: f64,
    pub observed_p: f64,
    pub satisfied: bool,
}

impl BoundReport {
    /// `|dq| / bound_q`.
    pub fn q_ratio(&self) -> f64 {
        self.observed_q.abs() / self.bound_q
    }

    pub fn p_ratio(&self) -> f64 {
        self.observed_p.abs() / self.bound_p
    }
}

pub fn check_weak_bounds(setup: &MeasurementSetup) -> Result<BoundReport> {
    let pointer = setup.pointer();
    let g_dp = setup.g() * pointer.delta_p();
    if g_dp > WEAK_REGIME_LIMIT * (1.0 + 1e-12) {
        return Err(Error::OutsideWeakRegime {
            g: setup.g(),
            g_dp,
            limit: WEAK_REGIME_LIMIT,
        });
    }
    let out = exact_shifts(setup)?;
    let k_value = weak_moments(setup.rho_s(), setup.pi_f(), setup.observable())
        .ok()
        .map(|m| 1.0 + setup.g().powi(2) * pointer.var_p() * (m.a11 - m.re_a2));
    let bound_q = 0.5 / pointer.delta_p();
    let bound_p = pointer.delta_p();
    let satisfied =
        out.delta_q.abs() <= bound_q * (1.0 + BOUND_RTOL) && out.delta_p.abs() <= bound_p * (1.0 + BOUND_RTOL);
    Ok(BoundReport {
        k_value,
        bound_q,
        bound_p,
        observed_q: out.delta_q,
        observed_p: out.delta_p,
        satisfied,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Envelope {
    pub q_max: f64,
    pub q_min: f64,
}

/// Extreme mean shifts for a projector observable over all pure selections.
/// Undefined at `g = 0`.
pub fn extreme_shifts_projector(g: f64, delta: f64) -> Result<Envelope> {
    if !(g > 0.0 && g.is_finite()) {
        return Err(Error::param("g", format!("extreme shifts need g > 0, got {g}")));
    }
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::param("delta", format!("must be > 0, got {delta}")));
    }
    let e = (-g * g / (4.0 * delta * delta)).exp();
    let s = (-(-g * g / (4.0 * delta * delta)).exp_m1()).sqrt();
    let half = 0.5 * g;
    Ok(Envelope {
        q_max: half * (1.0 + 1.0 / s),
        // 1 - 1/s = -e / (s (1 + s)) without cancellation
        q_min: -half * e / (s * (1.0 + s)),
    })
}

/// Known envelope of `dq` over pure selections: rigid for a single
/// eigenvalue, closed form for a projector, otherwise unknown.
pub fn shift_envelope(observable: &HermitianObservable, g: f64, delta: f64) -> Option<Envelope> {
    let spectrum = observable.spectrum();
    if spectrum.len() == 1 {
        let shift = g * spectrum[0].eigenvalue;
        return Some(Envelope {
            q_max: shift,
            q_min: shift,
        });
    }
    if observable.is_projector() && g > 0.0 {
        return extreme_shifts_projector(g, delta).ok();
    }
    None
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Objective {
    Max,
    Min,
    Both,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Extremum {
    pub delta_q: f64,
    pub delta_p: f64,
    pub postselect_prob: f64,
    pub preselection: StateVector,
    pub postselection: StateVector,
}

impl Extremum {
    pub fn setup(
        &self,
        observable: &HermitianObservable,
        g: f64,
        pointer: GaussianPointer,
    ) -> Result<MeasurementSetup> {
        MeasurementSetup::new(
            observable.clone(),
            self.preselection.density(),
            self.postselection.projector(),
            g,
            pointer,
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExtremePair {
    pub envelope: Option<Envelope>,
    pub best_max: Option<Extremum>,
    pub best_min: Option<Extremum>,
    pub evaluations: usize,
    /// Largest amount by which any evaluated selection left the envelope.
    pub max_envelope_excess: Option<f64>,
}

#[derive(Clone, Copy, Debug)]
pub struct PpsSearch {
    pub restarts: usize,
    pub seed: u64,
    pub local: NelderMeadOptions,
}

impl PpsSearch {
    pub fn new(restarts: usize, seed: u64) -> Self {
        Self {
            restarts,
            seed,
            local: NelderMeadOptions::default(),
        }
    }
}

struct PpsProblem<'a> {
    eigenvalues: Vec<f64>,
    projectors: Vec<&'a CMatrix>,
    dim: usize,
    g: f64,
    pointer: GaussianPointer,
    envelope: Option<Envelope>,
}

impl PpsProblem<'_> {
    fn states(&self, x: &[f64]) -> Option<(StateVector, StateVector)> {
        let d = self.dim;
        let v = |offset: usize| CVector::from_fn(d, |i, _| C64::new(x[offset + 2 * i], x[offset + 2 * i + 1]));
        let i = StateVector::normalized(v(0)).ok()?;
        let f = StateVector::normalized(v(2 * d)).ok()?;
        Some((i, f))
    }

    fn evaluate(&self, x: &[f64]) -> Option<(f64, f64, f64)> {
        let (i, f) = self.states(x)?;
        let amps: Vec<C64> = self
            .projectors
            .iter()
            .map(|p| f.amplitudes().dotc(&(*p * i.amplitudes())))
            .collect();
        let out = shifts_from_amplitudes(&self.eigenvalues, &amps, self.g, &self.pointer).ok()?;
        Some((out.delta_q, out.delta_p, out.postselect_prob))
    }
}

/// Multistart search for the largest and/or smallest `dq` over pure
/// pre/post selections. Restart `r` draws its start from stream `r` of
/// `seed`, so results are independent of evaluation order.
pub fn optimize_pps(
    observable: &HermitianObservable,
    g: f64,
    pointer: GaussianPointer,
    objective: Objective,
    search: &PpsSearch,
) -> Result<ExtremePair> {
    if search.restarts == 0 {
        return Err(Error::param("restarts", "need at least one restart"));
    }
    if !(g.is_finite() && g >= 0.0) {
        return Err(Error::param("g", format!("must be finite and >= 0, got {g}")));
    }
    let problem = PpsProblem {
        eigenvalues: observable.eigenvalues().collect(),
        projectors: observable.spectrum().iter().map(|c| c.projector.matrix()).collect(),
        dim: observable.dim(),
        g,
        pointer,
        envelope: shift_envelope(observable, g, pointer.delta()),
    };

    let mut evaluations = 0usize;
    let mut excess = f64::NEG_INFINITY;
    let mut run = |sign: f64, stream_offset: u64| -> Option<Extremum> {
        let mut best: Option<(f64, Vec<f64>)> = None;
        for r in 0..search.restarts {
            let mut rng = substream(search.seed, stream_offset + r as u64);
            let x0: Vec<f64> = random_vector(2 * problem.dim, &mut rng)
                .iter()
                .flat_map(|z| [z.re, z.im])
                .collect();
            let mut objective = |x: &[f64]| match problem.evaluate(x) {
                Some((dq, _, _)) => {
                    if let Some(env) = problem.envelope {
                        excess = excess.max(dq - env.q_max).max(env.q_min - dq);
                    }
                    -sign * dq / pointer.delta()
                }
                None => f64::INFINITY,
            };
            let first = nelder_mead(&mut objective, &x0, &search.local);
            let polish = NelderMeadOptions {
                initial_step: 1e-3,
                ..search.local
            };
            let second = nelder_mead(&mut objective, &first.x, &polish);
            evaluations += first.evals + second.evals;
            let local = if second.value <= first.value { second } else { first };
            if best.as_ref().is_none_or(|(v, _)| local.value < *v) {
                best = Some((local.value, local.x));
            }
        }
        let (_, x) = best?;
        let (i, f) = problem.states(&x)?;
        let (dq, dp, prob) = problem.evaluate(&x)?;
        Some(Extremum {
            delta_q: dq,
            delta_p: dp,
            postselect_prob: prob,
            preselection: i.phase_fixed(),
            postselection: f.phase_fixed(),
        })
    };

    let best_max = matches!(objective, Objective::Max | Objective::Both)
        .then(|| run(1.0, 0))
        .flatten();
    let best_min = matches!(objective, Objective::Min | Objective::Both)
        .then(|| run(-1.0, 1 << 32))
        .flatten();

    Ok(ExtremePair {
        envelope: problem.envelope,
        best_max,
        best_min,
        evaluations,
        max_envelope_excess: problem.envelope.map(|_| excess),
    })
}
