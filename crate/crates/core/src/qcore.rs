//! Dense complex linear algebra for small systems: states, density
//! operators, projectors, observables with cached spectra, tensor products
//! and von Neumann entropy.
//!
//! Basis ordering for composite systems follows the Kronecker convention:
//! the left factor indexes the slow (outer) index. For two path qubits the
//! order is `(O,O), (O,NO), (NO,O), (NO,NO)` with the first particle in the
//! left slot.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Largest dimension handled by the eigensolver.
pub const MAX_DIM: usize = 8;

/// Relative gap below which neighbouring eigenvalues share one projector.
pub const DEGENERACY_RTOL: f64 = 1e-9;

const HERMITIAN_TOL: f64 = 1e-10;
const DENSITY_HERMITIAN_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-12;
const PSD_TOL: f64 = 1e-10;
const IDEMPOTENT_TOL: f64 = 1e-10;
const NORM_TOL: f64 = 1e-12;
const ENTROPY_CUTOFF: f64 = 1e-15;

pub(crate) fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Largest entry of `|M - M^dagger|`.
pub fn hermitian_defect(m: &CMatrix) -> f64 {
    max_abs(&(m - m.adjoint()))
}

fn check_square(m: &CMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(m.nrows())
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 || dim > MAX_DIM {
        return Err(Error::UnsupportedDimension {
            dim,
            min: 1,
            max: MAX_DIM,
        });
    }
    Ok(())
}

/// Eigen-decomposition of a Hermitian matrix.
///
/// Eigenvalues are returned in ascending order; column `k` of the matrix is
/// the eigenvector for eigenvalue `k`.
pub fn eigh(m: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let dim = check_square(m)?;
    check_dim(dim)?;
    let defect = hermitian_defect(m);
    if defect > HERMITIAN_TOL * max_abs(m).max(1.0) {
        return Err(Error::NotHermitian { max_asymmetry: defect });
    }
    let symmetric = (m + m.adjoint()).scale(0.5);
    let eig = symmetric.symmetric_eigen();
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(dim, dim, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok((values, vectors))
}

fn outer(v: &CVector) -> CMatrix {
    v * v.adjoint()
}

/// A normalized pure state of a system with dimension at least two.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amplitudes: CVector,
}

impl StateVector {
    pub fn new(amplitudes: CVector) -> Result<Self> {
        if amplitudes.len() < 2 {
            return Err(Error::UnsupportedDimension {
                dim: amplitudes.len(),
                min: 2,
                max: usize::MAX,
            });
        }
        let norm_sqr = amplitudes.norm_squared();
        if !norm_sqr.is_finite() || (norm_sqr - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm_sqr });
        }
        Ok(Self { amplitudes })
    }

    /// Rescales `amplitudes` to unit norm.
    pub fn normalized(amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::NotNormalized { norm_sqr: norm * norm });
        }
        Self::new(amplitudes.unscale(norm))
    }

    pub fn from_slice(amplitudes: &[C64]) -> Result<Self> {
        Self::new(CVector::from_column_slice(amplitudes))
    }

    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::param("index", format!("{index} >= dimension {dim}")));
        }
        let mut v = CVector::zeros(dim);
        v[index] = C64::new(1.0, 0.0);
        Self::new(v)
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    pub fn projector(&self) -> ProjectionOperator {
        ProjectionOperator {
            matrix: outer(&self.amplitudes),
        }
    }

    pub fn density(&self) -> DensityOperator {
        DensityOperator {
            matrix: outer(&self.amplitudes),
        }
    }

    /// Same ray with the first non-negligible amplitude made real-positive.
    pub fn phase_fixed(&self) -> StateVector {
        let lead = self
            .amplitudes
            .iter()
            .find(|z| z.norm() > 1e-12)
            .copied()
            .unwrap_or(C64::new(1.0, 0.0));
        let phase = lead.conj() / lead.norm();
        StateVector {
            amplitudes: self.amplitudes.map(|z| z * phase),
        }
    }
}

/// Positive semidefinite, unit-trace Hermitian operator.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    matrix: CMatrix,
}

impl DensityOperator {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let dim = check_square(&matrix)?;
        if dim < 2 {
            return Err(Error::UnsupportedDimension {
                dim,
                min: 2,
                max: MAX_DIM,
            });
        }
        let defect = hermitian_defect(&matrix);
        if defect > DENSITY_HERMITIAN_TOL {
            return Err(Error::InvalidDensity {
                reason: format!("not Hermitian (max asymmetry {defect:e})"),
            });
        }
        let trace = matrix.trace();
        if (trace.re - 1.0).abs() > TRACE_TOL || trace.im.abs() > TRACE_TOL {
            return Err(Error::InvalidDensity {
                reason: format!("trace {} + {}i differs from 1", trace.re, trace.im),
            });
        }
        let (values, _) = eigh(&matrix)?;
        if values[0] < -PSD_TOL {
            return Err(Error::InvalidDensity {
                reason: format!("negative eigenvalue {:e}", values[0]),
            });
        }
        Ok(Self { matrix })
    }

    pub fn pure(state: &StateVector) -> Self {
        state.density()
    }

    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        Self::new(CMatrix::identity(dim, dim).unscale(dim as f64))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// Spectral ensemble `{(p_k, |psi_k>)}` keeping weights above 1e-15.
    pub fn ensemble(&self) -> Vec<(f64, StateVector)> {
        let (values, vectors) = eigh(&self.matrix).expect("validated density operator");
        values
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > ENTROPY_CUTOFF)
            .map(|(k, &p)| {
                let v = vectors.column(k).into_owned();
                (p, StateVector::normalized(v).expect("unit eigenvector"))
            })
            .collect()
    }
}

/// Orthogonal projector `P = P^dagger = P^2`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectionOperator {
    matrix: CMatrix,
}

impl ProjectionOperator {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        check_square(&matrix)?;
        let defect = hermitian_defect(&matrix);
        if defect > HERMITIAN_TOL {
            return Err(Error::NotHermitian { max_asymmetry: defect });
        }
        let idem = max_abs(&(&matrix * &matrix - &matrix));
        if idem > IDEMPOTENT_TOL {
            return Err(Error::NotIdempotent { max_defect: idem });
        }
        Ok(Self { matrix })
    }

    pub fn onto(state: &StateVector) -> Self {
        state.projector()
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: CMatrix::identity(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn rank(&self) -> usize {
        self.matrix.trace().re.round().max(0.0) as usize
    }

    /// Orthonormal basis of the range.
    pub fn range_basis(&self) -> Vec<StateVector> {
        let (values, vectors) = eigh(&self.matrix).expect("validated projector");
        values
            .iter()
            .enumerate()
            .filter(|(_, &v)| v > 0.5)
            .map(|(k, _)| StateVector::normalized(vectors.column(k).into_owned()).expect("unit eigenvector"))
            .collect()
    }
}

/// One eigenvalue of an observable with the projector onto its eigenspace.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralComponent {
    pub eigenvalue: f64,
    pub projector: ProjectionOperator,
}

/// Spectral decomposition with degenerate eigenvalues merged.
///
/// Eigenvalues come out ascending. Neighbours closer than
/// `DEGENERACY_RTOL * ||H||` (spectral norm) are merged and reported at
/// their mean.
pub fn spectral_decompose(h: &CMatrix) -> Result<Vec<SpectralComponent>> {
    let (values, vectors) = eigh(h)?;
    let norm = values.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let tol = DEGENERACY_RTOL * norm;
    let dim = values.len();

    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for k in 0..dim {
        match clusters.last_mut() {
            Some(cluster) if values[k] - values[*cluster.last().unwrap()] <= tol => cluster.push(k),
            _ => clusters.push(vec![k]),
        }
    }

    Ok(clusters
        .into_iter()
        .map(|cluster| {
            let eigenvalue = cluster.iter().map(|&k| values[k]).sum::<f64>() / cluster.len() as f64;
            let mut p = CMatrix::zeros(dim, dim);
            for &k in &cluster {
                let v = vectors.column(k);
                p += v * v.adjoint();
            }
            SpectralComponent {
                eigenvalue,
                projector: ProjectionOperator { matrix: p },
            }
        })
        .collect())
}

/// Hermitian observable with its spectral decomposition cached.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianObservable {
    matrix: CMatrix,
    spectrum: Vec<SpectralComponent>,
}

impl HermitianObservable {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let spectrum = spectral_decompose(&matrix)?;
        let dim = matrix.nrows();
        let mut resolution = CMatrix::zeros(dim, dim);
        let mut rebuilt = CMatrix::zeros(dim, dim);
        for c in &spectrum {
            resolution += c.projector.matrix();
            rebuilt += c.projector.matrix().scale(c.eigenvalue);
        }
        let completeness = max_abs(&(resolution - CMatrix::identity(dim, dim)));
        let reconstruction = max_abs(&(rebuilt - &matrix));
        let scale = max_abs(&matrix).max(1.0);
        if completeness > 1e-10 || reconstruction > 1e-10 * scale {
            return Err(Error::Inconsistent(format!(
                "spectral decomposition residuals: completeness {completeness:e}, reconstruction {reconstruction:e}"
            )));
        }
        Ok(Self { matrix, spectrum })
    }

    pub fn identity(dim: usize) -> Result<Self> {
        Self::new(CMatrix::identity(dim, dim))
    }

    /// Observable whose matrix is the given projector.
    pub fn from_projector(p: &ProjectionOperator) -> Result<Self> {
        Self::new(p.matrix().clone())
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn spectrum(&self) -> &[SpectralComponent] {
        &self.spectrum
    }

    pub fn eigenvalues(&self) -> impl Iterator<Item = f64> + '_ {
        self.spectrum.iter().map(|c| c.eigenvalue)
    }

    pub fn max_abs_eigenvalue(&self) -> f64 {
        self.eigenvalues().map(f64::abs).fold(0.0, f64::max)
    }

    /// `A^2 = A` within 1e-10, i.e. every eigenvalue is 0 or 1.
    pub fn is_projector(&self) -> bool {
        self.eigenvalues().all(|a| a.abs() <= 1e-10 || (a - 1.0).abs() <= 1e-10)
    }
}

/// Von Neumann entropy in bits. Eigenvalues at or below 1e-15 contribute 0.
pub fn von_neumann_entropy(rho: &DensityOperator) -> f64 {
    let (values, _) = eigh(rho.matrix()).expect("validated density operator");
    let s: f64 = values
        .iter()
        .filter(|&&p| p > ENTROPY_CUTOFF)
        .map(|&p| -p * p.log2())
        .sum();
    s.clamp(0.0, (rho.dim() as f64).log2())
}

/// Kronecker product; the left operand indexes the outer (slow) index.
pub trait TensorProduct<Rhs = Self> {
    type Output;
    fn tensor(&self, rhs: &Rhs) -> Self::Output;
}

impl TensorProduct for CMatrix {
    type Output = CMatrix;
    fn tensor(&self, rhs: &CMatrix) -> CMatrix {
        self.kronecker(rhs)
    }
}

impl TensorProduct for StateVector {
    type Output = StateVector;
    fn tensor(&self, rhs: &StateVector) -> StateVector {
        StateVector {
            amplitudes: self.amplitudes.kronecker(&rhs.amplitudes),
        }
    }
}

impl TensorProduct for ProjectionOperator {
    type Output = ProjectionOperator;
    fn tensor(&self, rhs: &ProjectionOperator) -> ProjectionOperator {
        ProjectionOperator {
            matrix: self.matrix.kronecker(&rhs.matrix),
        }
    }
}

impl TensorProduct for DensityOperator {
    type Output = DensityOperator;
    fn tensor(&self, rhs: &DensityOperator) -> DensityOperator {
        DensityOperator {
            matrix: self.matrix.kronecker(&rhs.matrix),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn diag(values: &[f64]) -> CMatrix {
        CMatrix::from_diagonal(&CVector::from_iterator(values.len(), values.iter().map(|&v| c(v))))
    }

    #[test]
    fn identity_merges_to_single_projector() {
        let spec = spectral_decompose(&CMatrix::identity(2, 2)).unwrap();
        assert_eq!(spec.len(), 1);
        assert!((spec[0].eigenvalue - 1.0).abs() < 1e-15);
        assert!(max_abs(&(spec[0].projector.matrix() - CMatrix::identity(2, 2))) < 1e-12);
    }

    #[test]
    fn diagonal_spectrum_is_ascending() {
        let spec = spectral_decompose(&diag(&[1.0, 0.0])).unwrap();
        assert_eq!(spec.len(), 2);
        assert_eq!(spec[0].eigenvalue, 0.0);
        assert_eq!(spec[1].eigenvalue, 1.0);
        assert!((spec[0].projector.matrix()[(1, 1)] - c(1.0)).norm() < 1e-12);
        assert!((spec[1].projector.matrix()[(0, 0)] - c(1.0)).norm() < 1e-12);
    }

    #[test]
    fn nono_projector_has_rank_three_kernel() {
        let no = StateVector::basis(2, 1).unwrap().projector();
        let p = no.tensor(&no);
        let spec = spectral_decompose(p.matrix()).unwrap();
        assert_eq!(spec.len(), 2);
        assert!(spec[0].eigenvalue.abs() < 1e-12);
        assert_eq!(spec[0].projector.rank(), 3);
        assert!((spec[1].eigenvalue - 1.0).abs() < 1e-12);
        assert_eq!(spec[1].projector.rank(), 1);
        assert!((spec[1].projector.matrix()[(3, 3)] - c(1.0)).norm() < 1e-12);
    }

    #[test]
    fn non_hermitian_is_rejected() {
        let mut m = CMatrix::identity(2, 2);
        m[(0, 1)] = c(0.5);
        match spectral_decompose(&m) {
            Err(Error::NotHermitian { max_asymmetry }) => assert!((max_asymmetry - 0.5).abs() < 1e-15),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn too_large_dimension_is_rejected() {
        let m = CMatrix::identity(9, 9);
        assert!(matches!(eigh(&m), Err(Error::UnsupportedDimension { dim: 9, .. })));
    }

    #[test]
    fn entropy_edge_cases() {
        let pure = StateVector::normalized(CVector::from_vec(vec![c(1.0), C64::new(0.0, 1.0)])).unwrap();
        assert!(von_neumann_entropy(&pure.density()).abs() < 1e-12);
        let mixed = DensityOperator::maximally_mixed(2).unwrap();
        assert!((von_neumann_entropy(&mixed) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn entropy_of_half_overlap_device_state() {
        // off-diagonal 1/4 gives eigenvalues 3/4 and 1/4
        let mut m = CMatrix::identity(2, 2).scale(0.5);
        m[(0, 1)] = c(0.25);
        m[(1, 0)] = c(0.25);
        let rho = DensityOperator::new(m).unwrap();
        let expected = -0.75 * 0.75f64.log2() - 0.25 * 0.25f64.log2();
        assert!((von_neumann_entropy(&rho) - expected).abs() < 1e-12);
        assert!((expected - 0.811_278_124_459_132_8).abs() < 1e-15);
    }

    #[test]
    fn density_validation_errors() {
        assert!(matches!(
            DensityOperator::new(diag(&[0.5, 0.6])),
            Err(Error::InvalidDensity { .. })
        ));
        assert!(matches!(
            DensityOperator::new(diag(&[1.5, -0.5])),
            Err(Error::InvalidDensity { .. })
        ));
    }

    #[test]
    fn projector_validation() {
        assert!(matches!(
            ProjectionOperator::new(diag(&[1.0, 0.5])),
            Err(Error::NotIdempotent { .. })
        ));
        assert!(ProjectionOperator::new(diag(&[1.0, 0.0])).is_ok());
    }

    #[test]
    fn state_normalization_check() {
        assert!(matches!(
            StateVector::from_slice(&[c(1.0), c(1.0)]),
            Err(Error::NotNormalized { .. })
        ));
        assert!(StateVector::normalized(CVector::zeros(2)).is_err());
    }

    #[test]
    fn kronecker_basis_bookkeeping() {
        let o = StateVector::basis(2, 0).unwrap();
        let no = StateVector::basis(2, 1).unwrap();
        assert_eq!(o.tensor(&no), StateVector::basis(4, 1).unwrap());
        let i2 = CMatrix::identity(2, 2);
        assert_eq!(i2.tensor(&i2), CMatrix::identity(4, 4));
        let p_oo = o.projector().tensor(&o.projector());
        let mut expected = CMatrix::zeros(4, 4);
        expected[(0, 0)] = c(1.0);
        assert_eq!(p_oo.matrix(), &expected);
    }

    #[test]
    fn phase_fixing_makes_lead_amplitude_positive() {
        let s = StateVector::normalized(CVector::from_vec(vec![C64::new(0.0, -1.0), c(1.0)])).unwrap();
        let f = s.phase_fixed();
        assert!(f.amplitudes()[0].im.abs() < 1e-15 && f.amplitudes()[0].re > 0.0);
        assert!((f.inner(&s).norm() - 1.0).abs() < 1e-12);
    }
}
