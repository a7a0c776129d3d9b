//! Weak values, the second weak moment and the first- and second-order
//! pointer-shift formulas.

use crate::engine::GaussianPointer;
use crate::error::{Error, Result};
use crate::qcore::{CMatrix, DensityOperator, HermitianObservable, ProjectionOperator, C64};

/// Smallest `tr(Pi_f rho_s)` for which weak values are computed.
pub const ORTHOGONAL_THRESHOLD: f64 = 1e-14;

const DENOMINATOR_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeakValue {
    pub re: f64,
    pub im: f64,
}

impl WeakValue {
    pub fn norm(&self) -> f64 {
        self.re.hypot(self.im)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.re * self.re + self.im * self.im
    }
}

impl From<C64> for WeakValue {
    fn from(z: C64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

/// First and second weak moments of an observable for one pre/post
/// selection.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeakMoments {
    /// `tr(Pi A rho) / tr(Pi rho)`.
    pub weak_value: WeakValue,
    /// `tr(Pi A rho A) / tr(Pi rho)`.
    pub a11: f64,
    /// `Re tr(Pi A^2 rho) / tr(Pi rho)`.
    pub re_a2: f64,
    /// `tr(Pi rho)`.
    pub postselect_prob: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointerShifts {
    pub delta_q: f64,
    pub delta_p: f64,
}

pub(crate) fn check_dims(rho_s: &DensityOperator, pi_f: &ProjectionOperator, a: &HermitianObservable) -> Result<usize> {
    let d = a.dim();
    for found in [rho_s.dim(), pi_f.dim()] {
        if found != d {
            return Err(Error::DimensionMismatch { expected: d, found });
        }
    }
    Ok(d)
}

fn trace_product(x: &CMatrix, y: &CMatrix) -> C64 {
    // tr(XY) without forming the product
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..x.nrows() {
        for j in 0..x.ncols() {
            acc += x[(i, j)] * y[(j, i)];
        }
    }
    acc
}

pub fn weak_moments(
    rho_s: &DensityOperator,
    pi_f: &ProjectionOperator,
    a: &HermitianObservable,
) -> Result<WeakMoments> {
    check_dims(rho_s, pi_f, a)?;
    let pi = pi_f.matrix();
    let rho = rho_s.matrix();
    let am = a.matrix();

    let prob = trace_product(pi, rho).re;
    if !(prob > ORTHOGONAL_THRESHOLD) {
        return Err(Error::OrthogonalSelection {
            probability: prob,
            threshold: ORTHOGONAL_THRESHOLD,
        });
    }
    let pi_a = pi * am;
    let aw = trace_product(&pi_a, rho) / prob;
    let a11 = trace_product(&pi_a, &(rho * am)).re / prob;
    let re_a2 = trace_product(&(&pi_a * am), rho).re / prob;

    Ok(WeakMoments {
        weak_value: aw.into(),
        a11,
        re_a2,
        postselect_prob: prob,
    })
}

/// First-order shifts `dq = g a + g b <{p,q}>`, `dp = 2 g b Var_p`.
pub fn jozsa_shifts(w: WeakValue, g: f64, pointer: &GaussianPointer) -> PointerShifts {
    debug_assert!(g >= 0.0);
    PointerShifts {
        delta_q: g * w.re + g * w.im * pointer.anticommutator_mean(),
        delta_p: 2.0 * g * w.im * pointer.var_p(),
    }
}

/// Shifts keeping terms to second order in the coupling; both share the
/// denominator `1 + g^2 Var_p (a11 - Re<A^2>_w)`.
pub fn second_order_shifts(m: &WeakMoments, g: f64, pointer: &GaussianPointer) -> Result<PointerShifts> {
    let var_p = pointer.var_p();
    let denominator = 1.0 + g * g * var_p * (m.a11 - m.re_a2);
    if denominator.abs() <= DENOMINATOR_TOL {
        return Err(Error::DegenerateDenominator { denominator });
    }
    Ok(PointerShifts {
        delta_q: g * m.weak_value.re / denominator,
        delta_p: 2.0 * g * m.weak_value.im * var_p / denominator,
    })
}

/// `a11 - |A_w|^2`, non-negative by the Cauchy-Schwarz inequality.
///
/// With `rho = sum_k p_k |psi_k><psi_k|` and `Pi = sum_j |phi_j><phi_j|`, set
/// `X_jk = sqrt(p_k) <phi_j|psi_k>` and `Y_jk = sqrt(p_k) <phi_j|A|psi_k>`.
/// Then `tr(Pi rho) = |X|^2`, `A_w = <X, Y> / |X|^2`, `a11 = |Y|^2 / |X|^2`,
/// and the gap is the Lagrange sum `sum_{m<n} |X_m Y_n - X_n Y_m|^2 / |X|^4`.
/// Summing squares avoids the cancellation in `a11 - |A_w|^2` when the
/// selection is nearly orthogonal, and is exactly zero for rank-one pairs.
pub fn schwarz_gap(rho_s: &DensityOperator, pi_f: &ProjectionOperator, a: &HermitianObservable) -> Result<f64> {
    check_dims(rho_s, pi_f, a)?;
    let ensemble = rho_s.ensemble();
    let range = pi_f.range_basis();
    let (mut x, mut y) = (Vec::new(), Vec::new());
    for (p, psi) in &ensemble {
        let a_psi = a.matrix() * psi.amplitudes();
        for phi in &range {
            x.push(phi.amplitudes().dotc(psi.amplitudes()) * p.sqrt());
            y.push(phi.amplitudes().dotc(&a_psi) * p.sqrt());
        }
    }
    let prob: f64 = x.iter().map(|z| z.norm_sqr()).sum();
    if !(prob > ORTHOGONAL_THRESHOLD) {
        return Err(Error::OrthogonalSelection {
            probability: prob,
            threshold: ORTHOGONAL_THRESHOLD,
        });
    }
    let mut sum = 0.0;
    for m in 0..x.len() {
        for n in m + 1..x.len() {
            sum += (x[m] * y[n] - x[n] * y[m]).norm_sqr();
        }
    }
    Ok(sum / (prob * prob))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hardy::{build_hardy, Occupation};
    use crate::qcore::{CVector, StateVector};

    fn pointer(delta: f64) -> GaussianPointer {
        GaussianPointer::new(delta).unwrap()
    }

    fn hardy_moments(which: Occupation) -> WeakMoments {
        let h = build_hardy();
        let obs = HermitianObservable::from_projector(h.operator(which)).unwrap();
        weak_moments(&h.preselection.density(), &h.postselection, &obs).unwrap()
    }

    #[test]
    fn identity_has_unit_weak_value() {
        let h = build_hardy();
        let m = weak_moments(
            &h.preselection.density(),
            &h.postselection,
            &HermitianObservable::identity(4).unwrap(),
        )
        .unwrap();
        assert!((m.weak_value.re - 1.0).abs() < 1e-12 && m.weak_value.im.abs() < 1e-12);
        assert!((m.a11 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hardy_weak_values() {
        let nono = hardy_moments(Occupation::NoNo);
        assert!((nono.weak_value.re + 1.0).abs() < 1e-12);
        assert!(nono.weak_value.im.abs() < 1e-12);
        assert!((nono.a11 - 1.0).abs() < 1e-12);
        assert!((nono.re_a2 + 1.0).abs() < 1e-12);
        assert!((nono.postselect_prob - 1.0 / 12.0).abs() < 1e-15);
        let oo = hardy_moments(Occupation::OO);
        assert!(oo.weak_value.norm() < 1e-12);
    }

    #[test]
    fn orthogonal_selection_is_reported() {
        let i = StateVector::basis(2, 0).unwrap();
        let f = StateVector::basis(2, 1).unwrap();
        let r = weak_moments(&i.density(), &f.projector(), &HermitianObservable::identity(2).unwrap());
        assert!(matches!(r, Err(Error::OrthogonalSelection { .. })));
    }

    #[test]
    fn jozsa_examples() {
        let p = pointer(0.7);
        let s = jozsa_shifts(WeakValue { re: 1.0, im: 0.0 }, 0.3, &p);
        assert_eq!(s.delta_q, 0.3);
        assert_eq!(s.delta_p, 0.0);
        let s = jozsa_shifts(WeakValue { re: 0.0, im: 1.0 }, 0.3, &p);
        assert!((s.delta_p - 0.3 / (2.0 * 0.49)).abs() < 1e-15);
        let s = jozsa_shifts(WeakValue { re: -1.0, im: 0.0 }, 0.05, &p);
        assert_eq!(s.delta_q, -0.05);
    }

    #[test]
    fn second_order_hardy_nono() {
        let m = hardy_moments(Occupation::NoNo);
        let delta = 1.3;
        for g in [0.0, 0.01, 0.2, 1.0] {
            let s = second_order_shifts(&m, g, &pointer(delta)).unwrap();
            let expected = -g / (1.0 + g * g / (2.0 * delta * delta));
            assert!((s.delta_q - expected).abs() < 1e-14, "g={g}");
            assert!(s.delta_p.abs() < 1e-14);
        }
    }

    #[test]
    fn second_order_rank_one_saturation_denominator() {
        let aw = 3.0;
        let m = WeakMoments {
            weak_value: WeakValue { re: aw, im: 0.0 },
            a11: aw * aw,
            re_a2: aw * aw,
            postselect_prob: 0.1,
        };
        let s = second_order_shifts(&m, 0.4, &pointer(1.0)).unwrap();
        assert!((s.delta_q - 0.4 * aw).abs() < 1e-15);
    }

    #[test]
    fn vanishing_denominator_is_an_error() {
        // 1 + g^2 Var_p (a11 - re_a2) = 0 with g = 2, delta = 1: a11 - re_a2 = -1
        let m = WeakMoments {
            weak_value: WeakValue { re: 1.0, im: 0.0 },
            a11: 0.0,
            re_a2: 1.0,
            postselect_prob: 0.5,
        };
        assert!(matches!(
            second_order_shifts(&m, 2.0, &pointer(1.0)),
            Err(Error::DegenerateDenominator { .. })
        ));
    }

    #[test]
    fn second_order_approaches_first_order_cubically() {
        let h = build_hardy();
        let obs = HermitianObservable::from_projector(h.operator(Occupation::NoNo)).unwrap();
        // a generic complex weak value: tilt the postselection
        let f = StateVector::normalized(CVector::from_vec(vec![
            C64::new(0.6, 0.1),
            C64::new(-0.4, 0.3),
            C64::new(-0.5, 0.0),
            C64::new(0.45, -0.2),
        ]))
        .unwrap();
        let m = weak_moments(&h.preselection.density(), &f.projector(), &obs).unwrap();
        let p = pointer(1.0);
        let residual = |g: f64| {
            let first = jozsa_shifts(m.weak_value, g, &p);
            let second = second_order_shifts(&m, g, &p).unwrap();
            (second.delta_q - first.delta_q).abs()
        };
        // g * dp <= 0.05 with dp = 1/2
        let mut g = 0.1;
        while g > 0.01 {
            let ratio = residual(g) / residual(g / 2.0);
            assert!(ratio >= 7.0, "g={g} ratio={ratio}");
            g /= 2.0;
        }
    }

    #[test]
    fn schwarz_gap_vanishes_for_rank_one_pure() {
        let h = build_hardy();
        for which in Occupation::ALL {
            let obs = HermitianObservable::from_projector(h.operator(which)).unwrap();
            let c = schwarz_gap(&h.preselection.density(), &h.postselection, &obs).unwrap();
            assert!(c.abs() < 1e-10, "{which:?}: {c}");
        }
        let c = schwarz_gap(
            &h.preselection.density(),
            &h.postselection,
            &HermitianObservable::identity(4).unwrap(),
        )
        .unwrap();
        assert!(c.abs() < 1e-12);
    }

    #[test]
    fn schwarz_gap_matches_direct_difference() {
        use crate::sampling::{random_density, random_observable, random_projector, seeded_rng};
        let mut rng = seeded_rng(17);
        for _ in 0..200 {
            let rho = random_density(4, 3, &mut rng);
            let pi = random_projector(4, 2, &mut rng);
            let a = random_observable(4, &mut rng);
            let m = weak_moments(&rho, &pi, &a).unwrap();
            let direct = m.a11 - m.weak_value.norm_sqr();
            let c = schwarz_gap(&rho, &pi, &a).unwrap();
            assert!(c >= 0.0);
            assert!((c - direct).abs() <= 1e-9 * (1.0 + m.a11), "{c} vs {direct}");
        }
    }
}
