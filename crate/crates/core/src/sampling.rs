//! Seeded random instances: Haar states and unitaries, mixed states,
//! subspace projectors, Hermitian observables and complete setups.
//!
//! Every sweep in the crate draws from these generators so that a seed fully
//! determines the instance stream.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::engine::{GaussianPointer, MeasurementSetup};
use crate::error::Result;
use crate::qcore::{CMatrix, CVector, DensityOperator, HermitianObservable, ProjectionOperator, StateVector, C64};

pub type SeededRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream `stream` of `seed`; used for per-restart and
/// per-instance generators so work can be split without changing results.
pub fn substream(seed: u64, stream: u64) -> SeededRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn random_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CVector {
    CVector::from_fn(dim, |_, _| complex_normal(rng))
}

/// Haar-random pure state. Panics for `dim < 2`.
pub fn random_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> StateVector {
    assert!(dim >= 2, "states need dimension >= 2, got {dim}");
    loop {
        if let Ok(s) = StateVector::normalized(random_vector(dim, rng)) {
            return s;
        }
    }
}

/// Haar-random unitary via Gram-Schmidt on Gaussian columns.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let mut cols: Vec<CVector> = Vec::with_capacity(dim);
    while cols.len() < dim {
        let mut v = random_vector(dim, rng);
        for _ in 0..2 {
            for u in &cols {
                let proj = u.dotc(&v);
                v -= u * proj;
            }
        }
        let n = v.norm();
        if n > 1e-8 {
            cols.push(v.unscale(n));
        }
    }
    CMatrix::from_columns(&cols)
}

/// Random density operator of the given rank (Wishart construction).
pub fn random_density<R: Rng + ?Sized>(dim: usize, rank: usize, rng: &mut R) -> DensityOperator {
    let g = CMatrix::from_fn(dim, rank.max(1), |_, _| complex_normal(rng));
    let mut rho = &g * g.adjoint();
    rho = (&rho + rho.adjoint()).scale(0.5);
    let tr = rho.trace().re;
    DensityOperator::new(rho.unscale(tr)).expect("Wishart matrix is a valid density operator")
}

/// Projector onto a Haar-random subspace of the given rank.
pub fn random_projector<R: Rng + ?Sized>(dim: usize, rank: usize, rng: &mut R) -> ProjectionOperator {
    let u = random_unitary(dim, rng);
    let mut p = CMatrix::zeros(dim, dim);
    for k in 0..rank.min(dim) {
        let v = u.column(k);
        p += v * v.adjoint();
    }
    p = (&p + p.adjoint()).scale(0.5);
    ProjectionOperator::new(p).expect("orthonormal columns span a projector")
}

/// GUE-like Hermitian matrix.
pub fn random_hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(dim, dim, |_, _| complex_normal(rng));
    (&g + g.adjoint()).scale(0.5)
}

pub fn random_observable<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> HermitianObservable {
    HermitianObservable::new(random_hermitian(dim, rng)).expect("random Hermitian matrix")
}

/// Projector observable of random rank in `1..dim`.
pub fn random_projector_observable<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> HermitianObservable {
    let rank = rng.random_range(1..dim);
    HermitianObservable::from_projector(&random_projector(dim, rank, rng)).expect("projector observable")
}

/// Affinely maps the spectrum onto `[-1, 1]`. Observables with a single
/// eigenvalue are returned unchanged.
pub fn rescale_to_unit_interval(a: &HermitianObservable) -> Result<HermitianObservable> {
    let lo = a.spectrum().first().map(|c| c.eigenvalue).unwrap_or(0.0);
    let hi = a.spectrum().last().map(|c| c.eigenvalue).unwrap_or(0.0);
    if hi - lo <= 0.0 {
        return Ok(a.clone());
    }
    let dim = a.dim();
    let centre = CMatrix::identity(dim, dim).scale((hi + lo) / 2.0);
    let m = (a.matrix() - centre).scale(2.0 / (hi - lo));
    HermitianObservable::new((&m + m.adjoint()).scale(0.5))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ObservableKind {
    Projector,
    /// Random Hermitian rescaled onto `[-1, 1]`.
    Hermitian,
    /// Either of the above with equal probability.
    Mixed,
}

/// Distribution of random measurement setups.
#[derive(Clone, Debug)]
pub struct SetupDistribution {
    pub min_dim: usize,
    pub max_dim: usize,
    pub observable: ObservableKind,
    /// Allow mixed preselections and subspace postselections.
    pub mixed_selection: bool,
    /// Coupling range in units of the pointer width `delta`.
    pub g_over_delta: (f64, f64),
    /// Sample `g / delta` uniformly in log space.
    pub log_coupling: bool,
    pub delta: f64,
}

impl Default for SetupDistribution {
    fn default() -> Self {
        Self {
            min_dim: 2,
            max_dim: 4,
            observable: ObservableKind::Mixed,
            mixed_selection: true,
            g_over_delta: (0.01, 10.0),
            log_coupling: true,
            delta: 1.0,
        }
    }
}

impl SetupDistribution {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> MeasurementSetup {
        loop {
            let dim = rng.random_range(self.min_dim..=self.max_dim);
            let observable = match self.observable {
                ObservableKind::Projector => random_projector_observable(dim, rng),
                ObservableKind::Hermitian => {
                    rescale_to_unit_interval(&random_observable(dim, rng)).expect("rescaled observable")
                }
                ObservableKind::Mixed => {
                    if rng.random_bool(0.5) {
                        random_projector_observable(dim, rng)
                    } else {
                        rescale_to_unit_interval(&random_observable(dim, rng)).expect("rescaled observable")
                    }
                }
            };
            let (rho, pi) = if self.mixed_selection && rng.random_bool(0.5) {
                let rank = rng.random_range(1..=dim);
                let prank = rng.random_range(1..dim);
                (random_density(dim, rank, rng), random_projector(dim, prank, rng))
            } else {
                (random_state(dim, rng).density(), random_state(dim, rng).projector())
            };
            let (lo, hi) = self.g_over_delta;
            let u: f64 = rng.random();
            let ratio = if self.log_coupling {
                (lo.ln() + u * (hi.ln() - lo.ln())).exp()
            } else {
                lo + u * (hi - lo)
            };
            let pointer = GaussianPointer::new(self.delta).expect("positive width");
            if let Ok(setup) = MeasurementSetup::new(observable, rho, pi, ratio * self.delta, pointer) {
                return setup;
            }
        }
    }
}
