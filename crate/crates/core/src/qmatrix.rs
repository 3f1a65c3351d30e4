//! Dense complex 2×2 and 4×4 matrix kernels.
//!
//! Two-qubit operators use the product basis |HH⟩, |HV⟩, |VH⟩, |VV⟩, so the
//! index of a basis ket is `2 * a + b` with `a` the leading (A) factor and
//! `b` the trailing (B) factor.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hermiticity tolerance on the largest entry of `m - m†`.
pub const HERMITIAN_TOL: f64 = 1e-9;
/// Eigenvalues with magnitude below this are treated as exact zeros.
pub const EIGEN_CLAMP: f64 = 1e-9;

pub(crate) const fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Which half of the bipartite system an operation acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Subsystem {
    A,
    B,
}

/// A square complex matrix of dimension 2 or 4.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    inner: DMatrix<C64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{})", self.dim(), self.dim())?;
        for i in 0..self.dim() {
            let row: Vec<String> = (0..self.dim())
                .map(|j| {
                    let z = self[(i, j)];
                    format!("{:+.6}{:+.6}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl ComplexMatrix {
    /// Builds a matrix from row-major entries.
    pub fn new(dim: usize, entries: Vec<C64>) -> Result<Self> {
        if dim != 2 && dim != 4 {
            return Err(Error::Dimension(dim, "2 or 4"));
        }
        if entries.len() != dim * dim {
            return Err(Error::Dimension(entries.len(), "dim^2 entries"));
        }
        Ok(Self {
            inner: DMatrix::from_row_slice(dim, dim, &entries),
        })
    }

    pub fn from_dmatrix(inner: DMatrix<C64>) -> Result<Self> {
        let dim = inner.nrows();
        if inner.ncols() != dim || (dim != 2 && dim != 4) {
            return Err(Error::Dimension(dim, "square 2 or 4"));
        }
        Ok(Self { inner })
    }

    // Internal constructor for dimensions already known to be valid.
    pub(crate) fn wrap(inner: DMatrix<C64>) -> Self {
        debug_assert!(inner.nrows() == inner.ncols());
        Self { inner }
    }

    pub fn zeros(dim: usize) -> Self {
        Self::wrap(DMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        Self::wrap(DMatrix::identity(dim, dim))
    }

    /// Real diagonal matrix.
    pub fn diag(values: &[f64]) -> Self {
        let dim = values.len();
        let mut m = DMatrix::zeros(dim, dim);
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = c(*v, 0.0);
        }
        Self::wrap(m)
    }

    /// Projector |ψ⟩⟨ψ| onto the (not necessarily normalized) column `psi`.
    pub fn outer(psi: &[C64]) -> Self {
        let dim = psi.len();
        let m = DMatrix::from_fn(dim, dim, |i, j| psi[i] * psi[j].conj());
        Self::wrap(m)
    }

    pub fn dim(&self) -> usize {
        self.inner.nrows()
    }

    pub fn as_dmatrix(&self) -> &DMatrix<C64> {
        &self.inner
    }

    pub fn into_dmatrix(self) -> DMatrix<C64> {
        self.inner
    }

    /// Row-major copy of the entries.
    pub fn entries(&self) -> Vec<C64> {
        let d = self.dim();
        (0..d * d).map(|k| self.inner[(k / d, k % d)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::wrap(self.inner.adjoint())
    }

    pub fn transpose(&self) -> Self {
        Self::wrap(self.inner.transpose())
    }

    pub fn conj(&self) -> Self {
        Self::wrap(self.inner.map(|z| z.conj()))
    }

    pub fn trace(&self) -> C64 {
        self.inner.trace()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::wrap(self.inner.map(|z| z * s))
    }

    pub fn scale_c(&self, s: C64) -> Self {
        Self::wrap(self.inner.map(|z| z * s))
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.inner
            .iter()
            .zip(other.inner.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `m - m†`.
    pub fn hermiticity_error(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_error() <= tol
    }

    /// `(m + m†) / 2`.
    pub fn hermitian_part(&self) -> Self {
        Self::wrap((&self.inner + self.inner.adjoint()).map(|z| z * 0.5))
    }

    /// ⟨ψ|m|ψ⟩.
    pub fn expectation(&self, psi: &[C64]) -> C64 {
        let d = self.dim();
        let mut acc = c(0.0, 0.0);
        for (i, pi) in psi.iter().enumerate().take(d) {
            let row: C64 = psi
                .iter()
                .take(d)
                .enumerate()
                .map(|(j, pj)| self.inner[(i, j)] * pj)
                .sum();
            acc += pi.conj() * row;
        }
        acc
    }

    /// Kronecker product of two 2×2 matrices.
    pub fn kron(a: &Self, b: &Self) -> Self {
        Self::wrap(a.inner.kronecker(&b.inner))
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, idx: (usize, usize)) -> &C64 {
        &self.inner[idx]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, idx: (usize, usize)) -> &mut C64 {
        &mut self.inner[idx]
    }
}

impl<'a> Mul<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix::wrap(&self.inner * &rhs.inner)
    }
}

impl<'a> Add<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix::wrap(&self.inner + &rhs.inner)
    }
}

impl<'a> Sub<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix::wrap(&self.inner - &rhs.inner)
    }
}

/// Pauli operator σ_i with σ_0 = I, σ_1 = X, σ_2 = Y, σ_3 = Z.
pub fn pauli(i: usize) -> ComplexMatrix {
    let e = match i {
        0 => [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)],
        1 => [c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)],
        2 => [c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)],
        3 => [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)],
        _ => panic!("Pauli index {i} out of range"),
    };
    ComplexMatrix::wrap(DMatrix::from_row_slice(2, 2, &e))
}

/// The sixteen two-qubit operators Γ_{4i+j} = ½ σ_i ⊗ σ_j.
#[derive(Debug, Clone)]
pub struct GammaBasis {
    pub matrices: Vec<ComplexMatrix>,
}

impl GammaBasis {
    pub fn standard() -> Self {
        let matrices = (0..4)
            .flat_map(|i| (0..4).map(move |j| (i, j)))
            .map(|(i, j)| ComplexMatrix::kron(&pauli(i), &pauli(j)).scale(0.5))
            .collect();
        Self { matrices }
    }

    /// Coefficients `tr(Γ_ν m)` in this basis.
    pub fn coefficients(&self, m: &ComplexMatrix) -> Vec<C64> {
        self.matrices.iter().map(|g| (g * m).trace()).collect()
    }
}

/// Spin-flip operator σ_y ⊗ σ_y.
pub fn spin_flip() -> ComplexMatrix {
    ComplexMatrix::kron(&pauli(2), &pauli(2))
}

/// Spectral decomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct Eigen {
    /// Eigenvalues in descending order.
    pub values: Vec<f64>,
    /// Unitary whose columns are the matching eigenvectors.
    pub vectors: ComplexMatrix,
}

impl Eigen {
    /// `U diag(f(λ)) U†`.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let u = self.vectors.as_dmatrix();
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            self.values.len(),
            self.values.iter().map(|&l| c(f(l), 0.0)),
        ));
        ComplexMatrix::wrap(u * d * u.adjoint())
    }
}

/// Hermitian eigendecomposition with eigenvalues sorted descending.
pub fn herm_eig(m: &ComplexMatrix) -> Result<Eigen> {
    let err = m.hermiticity_error();
    if err > HERMITIAN_TOL {
        return Err(Error::NonHermitian(err));
    }
    let h = m.hermitian_part().into_dmatrix();
    let dim = h.nrows();
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(dim, dim, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok(Eigen {
        values,
        vectors: ComplexMatrix::wrap(vectors),
    })
}

/// Zeroes eigenvalues whose magnitude is below [`EIGEN_CLAMP`].
pub fn clamp_eigenvalue(l: f64) -> f64 {
    if l.abs() < EIGEN_CLAMP {
        0.0
    } else {
        l
    }
}

/// Principal square root of a positive-semidefinite Hermitian matrix.
pub fn psd_sqrt(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = herm_eig(m)?;
    if let Some(&neg) = eig.values.iter().find(|&&l| l < -EIGEN_CLAMP) {
        return Err(Error::NegativeEigenvalue(neg));
    }
    Ok(eig.map_spectrum(|l| l.max(0.0).sqrt()))
}

/// Reduced 2×2 state of a 4×4 operator.
///
/// `keep = A` yields `[[ρ11+ρ33, ρ12+ρ34], [ρ21+ρ43, ρ22+ρ44]]` (1-based),
/// i.e. the leading tensor index is summed; `keep = B` sums the trailing one.
pub fn partial_trace(m: &ComplexMatrix, keep: Subsystem) -> Result<ComplexMatrix> {
    if m.dim() != 4 {
        return Err(Error::Dimension(m.dim(), "4"));
    }
    let mut out = ComplexMatrix::zeros(2);
    for x in 0..2 {
        for y in 0..2 {
            out[(x, y)] = match keep {
                Subsystem::A => m[(x, y)] + m[(2 + x, 2 + y)],
                Subsystem::B => m[(2 * x, 2 * y)] + m[(2 * x + 1, 2 * y + 1)],
            };
        }
    }
    Ok(out)
}

/// Transposes the indices of one tensor factor (A = leading, B = trailing).
pub fn partial_transpose(m: &ComplexMatrix, on: Subsystem) -> Result<ComplexMatrix> {
    if m.dim() != 4 {
        return Err(Error::Dimension(m.dim(), "4"));
    }
    let mut out = ComplexMatrix::zeros(4);
    for a in 0..2 {
        for b in 0..2 {
            for ap in 0..2 {
                for bp in 0..2 {
                    let (ra, rb, ca, cb) = match on {
                        Subsystem::A => (ap, b, a, bp),
                        Subsystem::B => (a, bp, ap, b),
                    };
                    out[(2 * a + b, 2 * ap + bp)] = m[(2 * ra + rb, 2 * ca + cb)];
                }
            }
        }
    }
    Ok(out)
}

/// Singular values, descending.
pub fn singular_values(m: &ComplexMatrix) -> Vec<f64> {
    let mut v: Vec<f64> = m
        .as_dmatrix()
        .clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .collect();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

/// Sum of singular values, `tr √(m† m)`.
pub fn trace_norm(m: &ComplexMatrix) -> f64 {
    singular_values(m).iter().sum()
}

/// Uhlmann fidelity `(tr √(√ρ σ √ρ))²` between two density matrices.
pub fn fidelity(rho: &ComplexMatrix, sigma: &ComplexMatrix) -> Result<f64> {
    let s = psd_sqrt(rho)?;
    let inner = (&(&s * sigma) * &s).hermitian_part();
    let eig = herm_eig(&inner)?;
    let t: f64 = eig.values.iter().map(|l| l.max(0.0).sqrt()).sum();
    Ok(t * t)
}

/// Trace distance `½ ‖ρ − σ‖₁`.
pub fn trace_distance(rho: &ComplexMatrix, sigma: &ComplexMatrix) -> f64 {
    0.5 * trace_norm(&(rho - sigma))
}

/// A 4×4 Hermitian operator on the two-qubit polarization space.
///
/// The matrix need not be positive or normalized; [`DensityMatrix::physicality`]
/// reports which of the physical constraints hold.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(ComplexMatrix);

/// Outcome of the physicality checks on a reconstructed state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Physicality {
    pub hermitian: bool,
    pub unit_trace: bool,
    pub psd: bool,
    pub purity_le_1: bool,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
}

impl Physicality {
    pub fn is_physical(&self) -> bool {
        self.hermitian && self.unit_trace && self.psd && self.purity_le_1
    }
}

impl DensityMatrix {
    /// Wraps a 4×4 Hermitian matrix; the stored value is its Hermitian part.
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        if m.dim() != 4 {
            return Err(Error::Dimension(m.dim(), "4"));
        }
        let err = m.hermiticity_error();
        if err > HERMITIAN_TOL {
            return Err(Error::NonHermitian(err));
        }
        Ok(Self(m.hermitian_part()))
    }

    /// Symmetrizes and trace-normalizes an approximately Hermitian matrix.
    pub fn normalized(m: ComplexMatrix) -> Result<Self> {
        if m.dim() != 4 {
            return Err(Error::Dimension(m.dim(), "4"));
        }
        let h = m.hermitian_part();
        let tr = h.trace().re;
        if tr.abs() < 1e-15 {
            return Err(Error::DegenerateInput("zero trace".into()));
        }
        Ok(Self(h.scale(1.0 / tr)))
    }

    /// Pure state |ψ⟩⟨ψ| (normalized internally).
    pub fn pure(psi: &[C64; 4]) -> Self {
        let n: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let v: Vec<C64> = psi.iter().map(|z| z / n).collect();
        Self(ComplexMatrix::outer(&v))
    }

    /// (|HH⟩ + |VV⟩)/√2.
    pub fn bell_phi_plus() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Self::pure(&[c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(s, 0.0)])
    }

    pub fn maximally_mixed() -> Self {
        Self(ComplexMatrix::identity(4).scale(0.25))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        herm_eig(&self.0)
            .map(|e| e.values)
            .expect("DensityMatrix is Hermitian by construction")
    }

    pub fn purity(&self) -> f64 {
        (&self.0 * &self.0).trace().re
    }

    pub fn physicality(&self) -> Physicality {
        let ev = self.eigenvalues();
        let min = ev.iter().copied().fold(f64::INFINITY, f64::min);
        let max = ev.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let purity = self.purity();
        Physicality {
            hermitian: self.0.is_hermitian(HERMITIAN_TOL),
            unit_trace: (self.0.trace() - c(1.0, 0.0)).norm() <= 1e-9,
            psd: min >= -EIGEN_CLAMP && max <= 1.0 + EIGEN_CLAMP,
            purity_le_1: (-EIGEN_CLAMP..=1.0 + EIGEN_CLAMP).contains(&purity),
            min_eigenvalue: min,
            max_eigenvalue: max,
        }
    }

    /// Errors with [`Error::NonPhysicalState`] unless every check passes.
    pub fn ensure_physical(&self) -> Result<()> {
        let p = self.physicality();
        if p.is_physical() {
            Ok(())
        } else {
            Err(Error::NonPhysicalState(format!(
                "trace ok: {}, eigenvalues in [{:.3e}, {:.3e}], purity ok: {}",
                p.unit_trace, p.min_eigenvalue, p.max_eigenvalue, p.purity_le_1
            )))
        }
    }

    /// Projects onto the closest physical state by zeroing negative
    /// eigenvalues and renormalizing.
    pub fn clip_to_physical(&self) -> Self {
        let eig = herm_eig(&self.0).expect("Hermitian by construction");
        let clipped = eig.map_spectrum(|l| l.max(0.0));
        let tr = clipped.trace().re;
        Self(clipped.hermitian_part().scale(1.0 / tr))
    }
}
