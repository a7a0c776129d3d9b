use super::{MeasurementOutcome, MeasurementSetup};
use crate::error::{Error, Result};
use crate::qcore::C64;
use crate::weakvalue::ORTHOGONAL_THRESHOLD;

pub const MIN_GRID_POINTS: usize = 1 << 10;
pub const DEFAULT_GRID_POINTS: usize = 1 << 13;

/// Position grid `[-half_width, half_width]`. The momentum grid spans
/// `half_width / (2 delta^2)`, the same number of momentum spreads as the
/// position grid has position spreads.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    pub half_width: f64,
    pub num_points: usize,
}

impl GridSpec {
    pub fn new(half_width: f64, num_points: usize) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::param("half_width", format!("must be > 0, got {half_width}")));
        }
        if num_points < MIN_GRID_POINTS || !num_points.is_power_of_two() {
            return Err(Error::param(
                "num_points",
                format!("must be a power of two >= {MIN_GRID_POINTS}, got {num_points}"),
            ));
        }
        Ok(Self { half_width, num_points })
    }

    /// Narrowest admissible half-width: `10 delta + g max|a|`.
    pub fn min_half_width(setup: &MeasurementSetup) -> f64 {
        10.0 * setup.pointer().delta() + setup.g() * setup.observable().max_abs_eigenvalue()
    }

    pub fn for_setup(setup: &MeasurementSetup, num_points: usize) -> Result<Self> {
        Self::new(Self::min_half_width(setup), num_points)
    }

    pub fn check(&self, setup: &MeasurementSetup) -> Result<()> {
        let need = Self::min_half_width(setup);
        if self.half_width < need {
            return Err(Error::param(
                "half_width",
                format!("{} is below 10*delta + g*max|a| = {need}", self.half_width),
            ));
        }
        Ok(())
    }
}

fn trapezoid_nodes(half_width: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
    let h = 2.0 * half_width / (n - 1) as f64;
    let nodes = (0..n).map(|k| -half_width + k as f64 * h).collect();
    let weights = (0..n).map(|k| if k == 0 || k == n - 1 { 0.5 * h } else { h }).collect();
    (nodes, weights)
}

/// Brute-force oracle for [`super::exact_shifts`].
///
/// Mixed preselections and subspace postselections are expanded into pure
/// branches `(p_k, |psi_k>, |phi_j>)`; unnormalized moments are summed over
/// branches and normalized once.
pub fn grid_shifts(setup: &MeasurementSetup, grid: &GridSpec) -> Result<MeasurementOutcome> {
    grid.check(setup)?;
    let pointer = setup.pointer();
    let g = setup.g();
    let spectrum = setup.observable().spectrum();
    let eig: Vec<f64> = spectrum.iter().map(|c| c.eigenvalue).collect();
    let n = grid.num_points;
    let p_half = grid.half_width / (2.0 * pointer.var_q());

    let (qs, qw) = trapezoid_nodes(grid.half_width, n);
    let (ps, pw) = trapezoid_nodes(p_half, n);

    let shifted: Vec<Vec<f64>> = eig
        .iter()
        .map(|&a| qs.iter().map(|&q| pointer.amplitude(q - g * a)).collect())
        .collect();
    let envelope: Vec<f64> = ps.iter().map(|&p| pointer.momentum_amplitude(p)).collect();
    let phases: Vec<Vec<C64>> = eig
        .iter()
        .map(|&a| ps.iter().map(|&p| C64::from_polar(1.0, -g * a * p)).collect())
        .collect();

    let (mut norm, mut q_mom, mut p_mom) = (0.0, 0.0, 0.0);
    let finals = setup.pi_f().range_basis();
    for (weight, psi) in setup.rho_s().ensemble() {
        for phi in &finals {
            let amps: Vec<C64> = spectrum
                .iter()
                .map(|c| phi.amplitudes().dotc(&(c.projector.matrix() * psi.amplitudes())))
                .collect();
            let (mut nb, mut qb, mut pb) = (0.0, 0.0, 0.0);
            for k in 0..n {
                let chi: C64 = amps.iter().zip(&shifted).map(|(c, s)| c * s[k]).sum();
                let dens = chi.norm_sqr();
                nb += qw[k] * dens;
                qb += qw[k] * qs[k] * dens;
                let chi_p: C64 = amps.iter().zip(&phases).map(|(c, e)| c * e[k]).sum::<C64>() * envelope[k];
                pb += pw[k] * ps[k] * chi_p.norm_sqr();
            }
            norm += weight * nb;
            q_mom += weight * qb;
            p_mom += weight * pb;
        }
    }

    if !(norm > ORTHOGONAL_THRESHOLD) {
        return Err(Error::OrthogonalSelection {
            probability: norm,
            threshold: ORTHOGONAL_THRESHOLD,
        });
    }
    Ok(MeasurementOutcome {
        delta_q: q_mom / norm,
        delta_p: p_mom / norm,
        postselect_prob: norm,
    })
}
