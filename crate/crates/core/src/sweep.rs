use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

/// Sample couplings from `g_min` to `g_max` inclusive.
pub fn coupling_grid(g_min: f64, g_max: f64, points: usize, spacing: Spacing) -> Result<Vec<f64>> {
    if points < 2 {
        return Err(Error::param("points", format!("need at least 2, got {points}")));
    }
    if !(g_min.is_finite() && g_max.is_finite() && g_min >= 0.0 && g_min < g_max) {
        return Err(Error::param(
            "g_min/g_max",
            format!("need 0 <= g_min < g_max, got [{g_min}, {g_max}]"),
        ));
    }
    if spacing == Spacing::Log && g_min <= 0.0 {
        return Err(Error::param("g_min", "log spacing needs g_min > 0"));
    }
    let last = (points - 1) as f64;
    let mut gs: Vec<f64> = (0..points)
        .map(|k| {
            let t = k as f64 / last;
            match spacing {
                Spacing::Linear => g_min + t * (g_max - g_min),
                Spacing::Log => (g_min.ln() + t * (g_max.ln() - g_min.ln())).exp(),
            }
        })
        .collect();
    gs[0] = g_min;
    gs[points - 1] = g_max;
    Ok(gs)
}
