//! Which-path information acquired by the meter when it couples to the
//! projector onto the overlapping electron arm.

use crate::bounds::extreme_shifts_projector;
use crate::error::{Error, Result};
use crate::qcore::{von_neumann_entropy, CMatrix, DensityOperator, C64};
use crate::sweep::{coupling_grid, Spacing};

const ROUTE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InfoGainResult {
    pub g: f64,
    /// `(1 + exp(-g^2 / 8 D^2)) / 2`
    pub lambda: f64,
    /// Mutual information in bits.
    pub i_a: f64,
    /// Smallest mean shift over pure pre/post selections; undefined at `g = 0`.
    pub q_min: Option<f64>,
}

/// Two equally likely which-path hypotheses, `|O><O|` and `|NO><NO|`.
#[derive(Clone, Debug)]
pub struct WhichPathEnsemble {
    pub hypotheses: [DensityOperator; 2],
    pub priors: [f64; 2],
}

impl WhichPathEnsemble {
    pub fn equal_priors() -> Self {
        let diag = |a: f64, b: f64| {
            let mut m = CMatrix::zeros(2, 2);
            m[(0, 0)] = C64::new(a, 0.0);
            m[(1, 1)] = C64::new(b, 0.0);
            DensityOperator::new(m).expect("diagonal density")
        };
        Self {
            hypotheses: [diag(1.0, 0.0), diag(0.0, 1.0)],
            priors: [0.5, 0.5],
        }
    }
}

fn overlap(g: f64, delta: f64) -> f64 {
    (-g * g / (8.0 * delta * delta)).exp()
}

fn check(g: f64, delta: f64) -> Result<()> {
    if !(g.is_finite() && g >= 0.0) {
        return Err(Error::param("g", format!("must be finite and >= 0, got {g}")));
    }
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::param("delta", format!("must be > 0, got {delta}")));
    }
    Ok(())
}

/// Meter states `(rho_R, rho_1R, rho_2R)` in the basis of the two shifted
/// pointer copies.
pub fn reduced_device_states(g: f64, delta: f64) -> Result<(DensityOperator, DensityOperator, DensityOperator)> {
    check(g, delta)?;
    let gg = overlap(g, delta);
    let mut rho_r = CMatrix::identity(2, 2).scale(0.5);
    rho_r[(0, 1)] = C64::new(0.5 * gg, 0.0);
    rho_r[(1, 0)] = C64::new(0.5 * gg, 0.0);
    let [rho_1, rho_2] = WhichPathEnsemble::equal_priors().hypotheses;
    Ok((DensityOperator::new(rho_r)?, rho_1, rho_2))
}

/// `-x log2 x - (1 - x) log2 (1 - x)`.
pub fn binary_entropy(x: f64) -> f64 {
    let term = |p: f64| if p > 0.0 { -p * p.log2() } else { 0.0 };
    term(x) + term(1.0 - x)
}

pub fn information_gain(g: f64, delta: f64) -> Result<InfoGainResult> {
    let (rho_r, rho_1, rho_2) = reduced_device_states(g, delta)?;
    let ensemble = WhichPathEnsemble::equal_priors();
    let conditional =
        ensemble.priors[0] * von_neumann_entropy(&rho_1) + ensemble.priors[1] * von_neumann_entropy(&rho_2);
    let via_entropy = von_neumann_entropy(&rho_r) - conditional;

    let lambda = 0.5 * (1.0 + overlap(g, delta));
    let i_a = binary_entropy(lambda);
    if (via_entropy - i_a).abs() > ROUTE_TOL {
        return Err(Error::Inconsistent(format!(
            "information gain: entropy route {via_entropy:e} vs closed form {i_a:e}"
        )));
    }
    let q_min = if g > 0.0 {
        Some(extreme_shifts_projector(g, delta)?.q_min)
    } else {
        None
    };
    Ok(InfoGainResult { g, lambda, i_a, q_min })
}

/// Entropy-route value of the information gain, exposed for cross-checks.
pub fn information_gain_entropy_route(g: f64, delta: f64) -> Result<f64> {
    let (rho_r, rho_1, rho_2) = reduced_device_states(g, delta)?;
    Ok(von_neumann_entropy(&rho_r) - 0.5 * (von_neumann_entropy(&rho_1) + von_neumann_entropy(&rho_2)))
}

pub fn info_curve(g_min: f64, g_max: f64, points: usize, delta: f64, spacing: Spacing) -> Result<Vec<InfoGainResult>> {
    coupling_grid(g_min, g_max, points, spacing)?
        .into_iter()
        .map(|g| information_gain(g, delta))
        .collect()
}
