//! Hardy's two-interferometer setup measured weakly: the four joint
//! occupation projectors, the probabilities inferred from their pointer
//! shifts, and how those change with coupling strength.
//!
//! Each particle has path basis `(O, NO)`; the electron occupies the left
//! tensor slot, so the joint basis is `OO, ONO, NOO, NONO`.

use crate::engine::{exact_shifts, GaussianPointer, MeasurementSetup};
use crate::error::{Error, Result};
use crate::qcore::{CVector, HermitianObservable, ProjectionOperator, StateVector, TensorProduct, C64};
use crate::sweep::{coupling_grid, Spacing};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Occupation {
    OO,
    ONo,
    NoO,
    NoNo,
}

impl Occupation {
    pub const ALL: [Occupation; 4] = [Occupation::OO, Occupation::ONo, Occupation::NoO, Occupation::NoNo];

    pub fn label(self) -> &'static str {
        match self {
            Occupation::OO => "OO",
            Occupation::ONo => "ONO",
            Occupation::NoO => "NOO",
            Occupation::NoNo => "NONO",
        }
    }

    fn index(self) -> usize {
        self as usize
    }

    /// Path indices `(electron, positron)` with `O = 0`, `NO = 1`.
    fn paths(self) -> (usize, usize) {
        let i = self.index();
        (i / 2, i % 2)
    }
}

#[derive(Clone, Debug)]
pub struct HardyScenario {
    /// No annihilation: `(|O,NO> + |NO,O> + |NO,NO>) / sqrt 3`.
    pub preselection: StateVector,
    /// Both dark-port detectors click.
    pub postselection: ProjectionOperator,
    pub postselected_state: StateVector,
    operators: [ProjectionOperator; 4],
}

impl HardyScenario {
    pub fn operator(&self, which: Occupation) -> &ProjectionOperator {
        &self.operators[which.index()]
    }

    pub fn observable(&self, which: Occupation) -> HermitianObservable {
        HermitianObservable::from_projector(self.operator(which)).expect("occupation projector")
    }

    pub fn setup(&self, which: Occupation, g: f64, pointer: GaussianPointer) -> Result<MeasurementSetup> {
        MeasurementSetup::new(
            self.observable(which),
            self.preselection.density(),
            self.postselection.clone(),
            g,
            pointer,
        )
    }
}

pub fn build_hardy() -> HardyScenario {
    let o = StateVector::basis(2, 0).expect("basis");
    let no = StateVector::basis(2, 1).expect("basis");
    let path = [&o, &no];

    let inv_sqrt3 = 1.0 / 3.0f64.sqrt();
    let pre: CVector =
        (o.tensor(&no).amplitudes() + no.tensor(&o).amplitudes() + no.tensor(&no).amplitudes()).scale(inv_sqrt3);
    let preselection = StateVector::normalized(pre).expect("nonzero");

    let minus = CVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(-1.0, 0.0)]);
    let post = minus.kronecker(&minus).scale(0.5);
    let postselected_state = StateVector::new(post).expect("unit norm");

    let operators = Occupation::ALL.map(|which| {
        let (e, p) = which.paths();
        path[e].projector().tensor(&path[p].projector())
    });

    HardyScenario {
        preselection,
        postselection: postselected_state.projector(),
        postselected_state,
        operators,
    }
}

/// Probability inferred from a position shift, `dq / g`. Not clamped.
pub fn infer_probability(delta_q: f64, g: f64) -> Result<f64> {
    if !(g > 0.0) {
        return Err(Error::param("g", "probability inference needs g > 0"));
    }
    Ok(delta_q / g)
}

/// Closed-form mean position shift for each occupation operator.
pub fn closed_form_shift(which: Occupation, g: f64, delta: f64) -> f64 {
    match which {
        Occupation::OO => 0.0,
        Occupation::ONo | Occupation::NoO => g,
        Occupation::NoNo => {
            let gg = (-g * g / (8.0 * delta * delta)).exp();
            g * (1.0 - 2.0 * gg) / (5.0 - 4.0 * gg)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProbabilityPoint {
    pub g: f64,
    pub prob_oo: f64,
    pub prob_ono: f64,
    pub prob_noo: f64,
    pub prob_nono: f64,
}

impl ProbabilityPoint {
    pub fn get(&self, which: Occupation) -> f64 {
        match which {
            Occupation::OO => self.prob_oo,
            Occupation::ONo => self.prob_ono,
            Occupation::NoO => self.prob_noo,
            Occupation::NoNo => self.prob_nono,
        }
    }

    pub fn sum(&self) -> f64 {
        self.prob_oo + self.prob_ono + self.prob_noo + self.prob_nono
    }
}

const CLOSED_FORM_RTOL: f64 = 1e-12;
const CLOSED_FORM_ATOL: f64 = 1e-14;

/// Relative gap between engine and closed form. When the closed form
/// vanishes the absolute gap is rescaled so that 1e-14 maps onto the same
/// 1e-12 threshold.
pub fn closed_form_gap(engine: f64, closed: f64) -> f64 {
    if closed == 0.0 {
        engine.abs() / CLOSED_FORM_ATOL * CLOSED_FORM_RTOL
    } else {
        (engine - closed).abs() / closed.abs()
    }
}

/// Inferred probabilities at coupling `g`; the engine shifts are checked
/// against the closed forms.
pub fn hardy_probabilities(g: f64, delta: f64) -> Result<ProbabilityPoint> {
    let scenario = build_hardy();
    hardy_probabilities_with(&scenario, g, delta)
}

fn hardy_probabilities_with(scenario: &HardyScenario, g: f64, delta: f64) -> Result<ProbabilityPoint> {
    if !(g > 0.0) {
        return Err(Error::param("g", "probabilities need g > 0"));
    }
    let pointer = GaussianPointer::new(delta)?;
    let mut probs = [0.0; 4];
    for which in Occupation::ALL {
        let engine = exact_shifts(&scenario.setup(which, g, pointer)?)?.delta_q;
        let closed = closed_form_shift(which, g, delta);
        let gap = closed_form_gap(engine, closed);
        if gap > CLOSED_FORM_RTOL {
            return Err(Error::Inconsistent(format!(
                "{} shift: engine {engine:e} vs closed form {closed:e}",
                which.label()
            )));
        }
        probs[which.index()] = infer_probability(engine, g)?;
    }
    Ok(ProbabilityPoint {
        g,
        prob_oo: probs[0],
        prob_ono: probs[1],
        prob_noo: probs[2],
        prob_nono: probs[3],
    })
}

pub fn probability_curve(
    g_min: f64,
    g_max: f64,
    points: usize,
    delta: f64,
    spacing: Spacing,
) -> Result<Vec<ProbabilityPoint>> {
    if !(g_min > 0.0) {
        return Err(Error::param("g_min", "must be > 0"));
    }
    let scenario = build_hardy();
    coupling_grid(g_min, g_max, points, spacing)?
        .into_iter()
        .map(|g| hardy_probabilities_with(&scenario, g, delta))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::CMatrix;

    #[test]
    fn states_and_overlap() {
        let h = build_hardy();
        let overlap = h.postselected_state.inner(&h.preselection);
        assert!((overlap.re + 1.0 / (2.0 * 3.0f64.sqrt())).abs() < 1e-15);
        assert!(overlap.im.abs() < 1e-16);
        assert!((overlap.norm_sqr() - 1.0 / 12.0).abs() < 1e-16);
    }

    #[test]
    fn operators_resolve_identity() {
        let h = build_hardy();
        let mut sum = CMatrix::zeros(4, 4);
        for a in Occupation::ALL {
            sum += h.operator(a).matrix();
            for b in Occupation::ALL {
                if a != b {
                    let prod = h.operator(a).matrix() * h.operator(b).matrix();
                    assert_eq!(prod.norm(), 0.0);
                }
            }
        }
        assert_eq!(sum, CMatrix::identity(4, 4));
    }

    #[test]
    fn preselection_avoids_annihilation() {
        let h = build_hardy();
        let v = h.operator(Occupation::OO).matrix() * h.preselection.amplitudes();
        assert_eq!(h.preselection.amplitudes().dotc(&v).norm(), 0.0);
    }

    #[test]
    fn inference() {
        assert_eq!(infer_probability(0.3, 0.3).unwrap(), 1.0);
        assert_eq!(infer_probability(-0.3, 0.3).unwrap(), -1.0);
        assert_eq!(infer_probability(0.0, 0.3).unwrap(), 0.0);
        assert!(infer_probability(0.1, 0.0).is_err());
    }

    #[test]
    fn probability_limits() {
        let weak = hardy_probabilities(1e-3, 1.0).unwrap();
        assert!((weak.prob_nono + 1.0).abs() < 1e-5);
        assert_eq!(weak.prob_oo, 0.0);
        assert!((weak.prob_ono - 1.0).abs() < 1e-12);
        assert!((weak.prob_noo - 1.0).abs() < 1e-12);
        let strong = hardy_probabilities(10.0, 1.0).unwrap();
        assert!((strong.prob_nono - 0.2).abs() < 1e-5);
        assert!((strong.sum() - 2.2).abs() < 1e-5);
    }

    #[test]
    fn curve_is_monotone() {
        let curve = probability_curve(1e-3, 10.0, 200, 1.0, Spacing::Log).unwrap();
        assert!(curve.windows(2).all(|w| w[1].prob_nono > w[0].prob_nono));
        assert!(curve.iter().all(|p| p.prob_oo == 0.0));
        assert!(curve[0].prob_nono > -1.0 && curve[199].prob_nono < 0.2);
    }
}
