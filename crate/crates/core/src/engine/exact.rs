use super::{GaussianPointer, MeasurementOutcome, MeasurementSetup};
use crate::error::{Error, Result};
use crate::qcore::{CMatrix, C64};
use crate::weakvalue::ORTHOGONAL_THRESHOLD;

const RESIDUE_RTOL: f64 = 1e-10;

/// Matrix elements between pointer copies shifted to `g a` and `g a'`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OverlapElements {
    /// `<Phi_a|Phi_a'>`
    pub s: f64,
    /// `<Phi_a|q|Phi_a'>`
    pub q: f64,
    /// `<Phi_a|p|Phi_a'>`, purely imaginary.
    pub p: C64,
}

pub fn overlap_elements(a: f64, a_prime: f64, g: f64, delta: f64) -> OverlapElements {
    let d2 = delta * delta;
    let sep = g * (a - a_prime);
    let s = (-sep * sep / (8.0 * d2)).exp();
    OverlapElements {
        s,
        q: 0.5 * g * (a + a_prime) * s,
        p: C64::new(0.0, sep / (4.0 * d2) * s),
    }
}

/// Contracts the weight matrix `w(a, a') = tr(Pi_f P_a' rho_s P_a)` with the
/// overlap elements.
fn contract(eigenvalues: &[f64], weights: &CMatrix, g: f64, pointer: &GaussianPointer) -> Result<MeasurementOutcome> {
    let n = eigenvalues.len();
    let w_scale: f64 = weights.iter().map(|z| z.norm()).sum();
    let asym = (weights - weights.adjoint())
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    if asym > RESIDUE_RTOL * w_scale + f64::MIN_POSITIVE {
        return Err(Error::Inconsistent(format!(
            "weight matrix not Hermitian: max asymmetry {asym:e}"
        )));
    }

    let zero = C64::new(0.0, 0.0);
    let (mut sn, mut sq, mut sp) = (zero, zero, zero);
    let (mut scale_q, mut scale_p) = (0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            let w = weights[(i, j)];
            let e = overlap_elements(eigenvalues[i], eigenvalues[j], g, pointer.delta());
            sn += w * e.s;
            sq += w * e.q;
            sp += w * e.p;
            scale_q += w.norm() * e.q.abs();
            scale_p += w.norm() * e.p.norm();
        }
    }

    let norm = sn.re;
    if !(norm > ORTHOGONAL_THRESHOLD) {
        return Err(Error::OrthogonalSelection {
            probability: norm,
            threshold: ORTHOGONAL_THRESHOLD,
        });
    }
    if n == 1 {
        // rigid displacement, exact in floating point
        return Ok(MeasurementOutcome {
            delta_q: g * eigenvalues[0],
            delta_p: 0.0,
            postselect_prob: norm,
        });
    }
    for (name, value, scale) in [("q", sq, scale_q), ("p", sp, scale_p)] {
        if value.im.abs() > RESIDUE_RTOL * scale + f64::MIN_POSITIVE {
            return Err(Error::Inconsistent(format!(
                "imaginary residue {:e} in <{name}> (scale {scale:e})",
                value.im
            )));
        }
    }
    Ok(MeasurementOutcome {
        delta_q: sq.re / norm,
        delta_p: sp.re / norm,
        postselect_prob: norm,
    })
}

/// Closed-form pointer shifts at arbitrary coupling.
pub fn exact_shifts(setup: &MeasurementSetup) -> Result<MeasurementOutcome> {
    let spectrum = setup.observable().spectrum();
    let eigenvalues: Vec<f64> = spectrum.iter().map(|c| c.eigenvalue).collect();
    let rho = setup.rho_s().matrix();
    let pi = setup.pi_f().matrix();

    let left: Vec<CMatrix> = spectrum.iter().map(|c| pi * c.projector.matrix()).collect();
    let right: Vec<CMatrix> = spectrum.iter().map(|c| rho * c.projector.matrix()).collect();
    let n = spectrum.len();
    // w(a_i, a_j) = tr(Pi P_j rho P_i)
    let weights = CMatrix::from_fn(n, n, |i, j| {
        let (x, y) = (&left[j], &right[i]);
        let mut acc = C64::new(0.0, 0.0);
        for r in 0..x.nrows() {
            for c in 0..x.ncols() {
                acc += x[(r, c)] * y[(c, r)];
            }
        }
        acc
    });
    contract(&eigenvalues, &weights, setup.g(), setup.pointer())
}

/// Pure pre/post selection: `w(a, a') = conj(c_a) c_a'` with
/// `c_a = <psi_f|P_a|psi_i>`.
pub(crate) fn shifts_from_amplitudes(
    eigenvalues: &[f64],
    amplitudes: &[C64],
    g: f64,
    pointer: &GaussianPointer,
) -> Result<MeasurementOutcome> {
    let n = eigenvalues.len();
    let weights = CMatrix::from_fn(n, n, |i, j| amplitudes[i].conj() * amplitudes[j]);
    contract(eigenvalues, &weights, g, pointer)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hardy::{build_hardy, Occupation};
    use crate::qcore::{DensityOperator, HermitianObservable, ProjectionOperator, StateVector};
    use std::f64::consts::PI;

    /// Trapezoid rule for `<Phi_a| O |Phi_a'>` on a wide, dense grid.
    fn quadrature(a: f64, ap: f64, g: f64, delta: f64) -> (f64, f64, f64) {
        let phi = |q: f64| (2.0 * PI * delta * delta).powf(-0.25) * (-q * q / (4.0 * delta * delta)).exp();
        let dphi = |q: f64| -q / (2.0 * delta * delta) * phi(q);
        let half = 12.0 * delta + g * a.abs().max(ap.abs());
        let n = 20_001;
        let h = 2.0 * half / (n - 1) as f64;
        let (mut s, mut qm, mut pm) = (0.0, 0.0, 0.0);
        for k in 0..n {
            let q = -half + k as f64 * h;
            let w = if k == 0 || k == n - 1 { 0.5 * h } else { h };
            let l = phi(q - g * a);
            let r = phi(q - g * ap);
            s += w * l * r;
            qm += w * l * q * r;
            // <Phi_a| -i d/dq |Phi_a'> = -i * integral; return the coefficient of i
            pm -= w * l * dphi(q - g * ap);
        }
        (s, qm, pm)
    }

    #[test]
    fn overlap_trivial_cases() {
        let e = overlap_elements(0.7, 0.7, 1.3, 0.4);
        assert_eq!(e.s, 1.0);
        assert!((e.q - 1.3 * 0.7).abs() < 1e-15);
        assert_eq!(e.p.norm(), 0.0);
        let e = overlap_elements(1.0, -2.0, 0.0, 0.4);
        assert_eq!((e.s, e.q, e.p.norm()), (1.0, 0.0, 0.0));
    }

    #[test]
    fn overlap_matches_quadrature() {
        for &(a, ap, g, delta) in &[(1.0, 0.0, 1.0, 1.0), (1.0, 0.0, 0.3, 0.5), (-0.4, 0.9, 2.5, 1.7)] {
            let e = overlap_elements(a, ap, g, delta);
            let (s, q, p) = quadrature(a, ap, g, delta);
            assert!((e.s - s).abs() < 1e-10, "s {} vs {}", e.s, s);
            assert!((e.q - q).abs() < 1e-10, "q {} vs {}", e.q, q);
            assert!(e.p.re == 0.0 && (e.p.im - p).abs() < 1e-10, "p {} vs {}", e.p.im, p);
        }
        let e = overlap_elements(1.0, 0.0, 1.0, 1.0);
        assert!((e.s - (-0.125f64).exp()).abs() < 1e-16);
    }

    fn hardy_setup(which: Occupation, g: f64, delta: f64) -> MeasurementSetup {
        let h = build_hardy();
        MeasurementSetup::new(
            HermitianObservable::from_projector(h.operator(which)).unwrap(),
            h.preselection.density(),
            h.postselection.clone(),
            g,
            GaussianPointer::new(delta).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn hardy_nono_closed_form() {
        for &(g, delta) in &[(0.01, 1.0), (1.0, 1.0), (3.0, 0.7), (25.0, 2.0)] {
            let out = exact_shifts(&hardy_setup(Occupation::NoNo, g, delta)).unwrap();
            let gg = (-g * g / (8.0 * delta * delta)).exp();
            let expected = g * (1.0 - 2.0 * gg) / (5.0 - 4.0 * gg);
            assert!((out.delta_q - expected).abs() <= 1e-12 * expected.abs(), "g={g}");
            assert!(out.delta_p.abs() < 1e-14);
            assert!((out.postselect_prob - (5.0 - 4.0 * gg) / 12.0).abs() < 1e-14);
        }
    }

    #[test]
    fn hardy_single_branch_is_rigid() {
        for g in [0.05, 1.0, 7.0] {
            let out = exact_shifts(&hardy_setup(Occupation::ONo, g, 1.0)).unwrap();
            assert!((out.delta_q - g).abs() < 1e-12 * g);
        }
    }

    #[test]
    fn zero_coupling_gives_no_shift() {
        let out = exact_shifts(&hardy_setup(Occupation::NoNo, 0.0, 1.0)).unwrap();
        assert_eq!(out.delta_q, 0.0);
        assert_eq!(out.delta_p, 0.0);
        assert!((out.postselect_prob - 1.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn orthogonal_selection_at_zero_coupling() {
        let setup = MeasurementSetup::new(
            HermitianObservable::identity(2).unwrap(),
            StateVector::basis(2, 0).unwrap().density(),
            ProjectionOperator::onto(&StateVector::basis(2, 1).unwrap()),
            1.0,
            GaussianPointer::new(1.0).unwrap(),
        )
        .unwrap();
        assert!(matches!(exact_shifts(&setup), Err(Error::OrthogonalSelection { .. })));
    }

    #[test]
    fn amplitude_path_agrees_with_trace_path() {
        let mut rng = crate::sampling::seeded_rng(5);
        for _ in 0..50 {
            let d = 3;
            let a = crate::sampling::random_observable(d, &mut rng);
            let i = crate::sampling::random_state(d, &mut rng);
            let f = crate::sampling::random_state(d, &mut rng);
            let pointer = GaussianPointer::new(0.8).unwrap();
            let setup = MeasurementSetup::new(a.clone(), i.density(), f.projector(), 0.6, pointer).unwrap();
            let reference = exact_shifts(&setup).unwrap();
            let eig: Vec<f64> = a.eigenvalues().collect();
            let amps: Vec<C64> = a
                .spectrum()
                .iter()
                .map(|c| f.amplitudes().dotc(&(c.projector.matrix() * i.amplitudes())))
                .collect();
            let fast = shifts_from_amplitudes(&eig, &amps, 0.6, &pointer).unwrap();
            assert!((fast.delta_q - reference.delta_q).abs() < 1e-12);
            assert!((fast.delta_p - reference.delta_p).abs() < 1e-12);
        }
    }

    #[test]
    fn mixed_selection_is_ensemble_average() {
        // rho = diag(1/2, 1/2) is the mixture of |0> and |1>
        let setup = MeasurementSetup::new(
            HermitianObservable::from_projector(&StateVector::basis(2, 0).unwrap().projector()).unwrap(),
            DensityOperator::maximally_mixed(2).unwrap(),
            ProjectionOperator::identity(2),
            0.9,
            GaussianPointer::new(1.0).unwrap(),
        )
        .unwrap();
        let out = exact_shifts(&setup).unwrap();
        assert!((out.delta_q - 0.45).abs() < 1e-15);
        assert!((out.postselect_prob - 1.0).abs() < 1e-15);
    }
}
