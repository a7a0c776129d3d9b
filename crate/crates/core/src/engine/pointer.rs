use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Zero-centred Gaussian meter `Phi(q) = (2 pi D^2)^(-1/4) exp(-q^2 / 4 D^2)`
/// in natural units (hbar = 1). Position spread is `D`, momentum spread
/// `1 / 2D`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianPointer {
    delta: f64,
}

impl GaussianPointer {
    pub fn new(delta: f64) -> Result<Self> {
        if !(delta.is_finite() && delta > 0.0) {
            return Err(Error::param("delta", format!("pointer width must be > 0, got {delta}")));
        }
        Ok(Self { delta })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn delta_q(&self) -> f64 {
        self.delta
    }

    pub fn delta_p(&self) -> f64 {
        0.5 / self.delta
    }

    pub fn var_q(&self) -> f64 {
        self.delta * self.delta
    }

    pub fn var_p(&self) -> f64 {
        0.25 / (self.delta * self.delta)
    }

    /// `<{p, q}>` in the initial state; zero for a real centred Gaussian.
    pub fn anticommutator_mean(&self) -> f64 {
        0.0
    }

    /// Position-space amplitude.
    pub fn amplitude(&self, q: f64) -> f64 {
        let d2 = self.delta * self.delta;
        (2.0 * PI * d2).powf(-0.25) * (-q * q / (4.0 * d2)).exp()
    }

    /// Momentum-space amplitude `(2 D^2 / pi)^(1/4) exp(-D^2 p^2)`.
    pub fn momentum_amplitude(&self, p: f64) -> f64 {
        let d2 = self.delta * self.delta;
        (2.0 * d2 / PI).powf(0.25) * (-d2 * p * p).exp()
    }
}
