//! Maximum-likelihood refinement over physical density matrices
//! `ρ = F†F / tr(F†F)` with `F` lower-triangular.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optim::NelderMead;
use crate::qmatrix::{c, ComplexMatrix, DensityMatrix};
use crate::tomography::{linear_reconstruct, Tomograph, TomographyInput};

/// Floor on the predicted rate in the likelihood denominator.
pub const DENOMINATOR_FLOOR: f64 = 0.5;
/// Weight of the identity mixed into a seed whose minors vanish.
pub const SEED_REGULARIZATION: f64 = 1e-6;
/// Minors smaller than this make the inversion degenerate.
pub const MINOR_TOL: f64 = 1e-12;

/// Sixteen real parameters of the lower-triangular factor `F`.
///
/// `z1..z4` are the diagonal; `z5+iz6`, `z7+iz8`, `z9+iz10` the first
/// subdiagonal; `z11+iz12`, `z13+iz14` the second; `z15+iz16` the corner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CholeskyParams(pub [f64; 16]);

// (row, col, re index, im index) for the off-diagonal entries of F
const OFF_DIAGONAL: [(usize, usize, usize, usize); 6] = [
    (1, 0, 4, 5),
    (2, 1, 6, 7),
    (3, 2, 8, 9),
    (2, 0, 10, 11),
    (3, 1, 12, 13),
    (3, 0, 14, 15),
];

impl CholeskyParams {
    pub fn from_slice(z: &[f64]) -> Self {
        let mut out = [0.0; 16];
        out.copy_from_slice(&z[..16]);
        Self(out)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum()
    }

    /// The factor `F` as a dense 4×4 array.
    pub fn factor(&self) -> [[C64; 4]; 4] {
        let z = &self.0;
        let mut f = [[c(0.0, 0.0); 4]; 4];
        for i in 0..4 {
            f[i][i] = c(z[i], 0.0);
        }
        for &(r, col, re, im) in &OFF_DIAGONAL {
            f[r][col] = c(z[re], z[im]);
        }
        f
    }

    fn from_factor(t: &[[C64; 4]; 4]) -> Self {
        let mut z = [0.0; 16];
        for (i, zi) in z.iter_mut().take(4).enumerate() {
            *zi = t[i][i].re;
        }
        for &(r, col, re, im) in &OFF_DIAGONAL {
            z[re] = t[r][col].re;
            z[im] = t[r][col].im;
        }
        Self(z)
    }
}

/// `F†F / tr(F†F)`.
pub fn rho_from_params(z: &CholeskyParams) -> Result<DensityMatrix> {
    let norm = z.norm_sqr();
    if !(norm > 0.0) {
        return Err(Error::ZeroParams);
    }
    let f = z.factor();
    let mut m = ComplexMatrix::zeros(4);
    for i in 0..4 {
        for j in 0..4 {
            let mut acc = c(0.0, 0.0);
            for row in f.iter() {
                acc += row[i].conj() * row[j];
            }
            m[(i, j)] = acc / norm;
        }
    }
    DensityMatrix::new(m)
}

fn submatrix_det(m: &ComplexMatrix, rows: &[usize], cols: &[usize]) -> C64 {
    let keep_r: Vec<usize> = (0..4).filter(|i| !rows.contains(i)).collect();
    let keep_c: Vec<usize> = (0..4).filter(|j| !cols.contains(j)).collect();
    DMatrix::from_fn(keep_r.len(), keep_c.len(), |a, b| m[(keep_r[a], keep_c[b])]).determinant()
}

/// Inverts [`rho_from_params`] through the determinant and minors of ρ.
///
/// Complex square roots are used throughout and the real parts of the
/// diagonal are kept, so unphysical input still yields a usable seed.
pub fn params_from_rho(rho: &ComplexMatrix) -> Result<CholeskyParams> {
    invert_minors(rho, MINOR_TOL)
}

fn invert_minors(rho: &ComplexMatrix, min_minor: f64) -> Result<CholeskyParams> {
    if rho.dim() != 4 {
        return Err(Error::Dimension(rho.dim(), "4"));
    }
    let det = rho.as_dmatrix().determinant();
    let m11 = submatrix_det(rho, &[0], &[0]);
    let m12 = submatrix_det(rho, &[0], &[1]);
    let m1122 = submatrix_det(rho, &[0, 1], &[0, 1]);
    let m1223 = submatrix_det(rho, &[0, 1], &[1, 2]);
    let m1123 = submatrix_det(rho, &[0, 1], &[0, 2]);
    let r44 = rho[(3, 3)];
    for (v, name) in [
        (r44, "rho_44"),
        (m11, "first minor M_11"),
        (m1122, "second minor M_11,22"),
    ] {
        if !(v.norm() > min_minor) {
            return Err(Error::DegenerateMinor(name));
        }
    }
    let s44 = r44.sqrt();
    let sq = (r44 * m1122).sqrt();
    let zero = c(0.0, 0.0);
    let t = [
        [(det / m11).sqrt(), zero, zero, zero],
        [m12 / (m11 * m1122).sqrt(), (m11 / m1122).sqrt(), zero, zero],
        [m1223 / sq, m1123 / sq, (m1122 / r44).sqrt(), zero],
        [rho[(3, 0)] / s44, rho[(3, 1)] / s44, rho[(3, 2)] / s44, s44],
    ];
    let z = CholeskyParams::from_factor(&t);
    if z.0.iter().any(|x| !x.is_finite()) {
        return Err(Error::DegenerateMinor("non-finite parameter"));
    }
    Ok(z)
}

/// Parameters for ρ, mixing in `ε I/4` when the minors vanish. If the
/// regularized inversion still fails, the negative part of the spectrum is
/// removed first.
pub fn seed_params(rho: &ComplexMatrix) -> Result<CholeskyParams> {
    if let Ok(z) = params_from_rho(rho) {
        return Ok(z);
    }
    let eps = SEED_REGULARIZATION;
    let mix =
        |m: &ComplexMatrix| &m.scale(1.0 - eps) + &ComplexMatrix::identity(4).scale(eps / 4.0);
    if let Ok(z) = invert_minors(&mix(rho), 0.0) {
        return Ok(z);
    }
    let clipped = DensityMatrix::new(rho.hermitian_part())?.clip_to_physical();
    invert_minors(&mix(clipped.matrix()), 0.0)
}

/// Gaussian negative log-likelihood of the data for a parameter vector.
#[derive(Debug, Clone)]
pub struct Likelihood {
    kets: Vec<[C64; 4]>,
    rates: Vec<f64>,
    n_norm: f64,
}

impl Likelihood {
    pub fn new(input: &TomographyInput) -> Result<Self> {
        let tomo = Tomograph::new(&input.settings())?;
        let rates = input.net_rates();
        let n_norm = tomo.normalization(&rates);
        if !(n_norm > 0.0) {
            return Err(Error::DegenerateInput(format!(
                "normalization constant is not positive ({n_norm:.3e})"
            )));
        }
        Ok(Self {
            kets: tomo.kets().iter().map(|k| k.0).collect(),
            rates,
            n_norm,
        })
    }

    pub fn n_norm(&self) -> f64 {
        self.n_norm
    }

    /// `Σ_ν (𝒩⟨ψ_ν|ρ|ψ_ν⟩ − n_ν)² / (2 max(𝒩⟨ψ_ν|ρ|ψ_ν⟩, 0.5))`.
    pub fn eval(&self, z: &[f64]) -> f64 {
        let norm: f64 = z.iter().map(|x| x * x).sum();
        if !(norm > 0.0) {
            return f64::INFINITY;
        }
        let f = CholeskyParams::from_slice(z).factor();
        let mut total = 0.0;
        for (psi, &n) in self.kets.iter().zip(&self.rates) {
            // ⟨ψ|F†F|ψ⟩ = |Fψ|²
            let mut p = 0.0;
            for row in f.iter() {
                let mut acc = c(0.0, 0.0);
                for (fij, pj) in row.iter().zip(psi) {
                    acc += fij * pj;
                }
                p += acc.norm_sqr();
            }
            let pred = self.n_norm * p / norm;
            total += (pred - n).powi(2) / (2.0 * pred.max(DENOMINATOR_FLOOR));
        }
        total
    }
}

pub fn likelihood(z: &CholeskyParams, input: &TomographyInput) -> Result<f64> {
    Ok(Likelihood::new(input)?.eval(&z.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MleOptions {
    pub max_iter: usize,
    pub tol: f64,
    pub seed_override: Option<CholeskyParams>,
}

impl Default for MleOptions {
    fn default() -> Self {
        Self {
            max_iter: 50_000,
            tol: 1e-10,
            seed_override: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MleResult {
    pub rho: DensityMatrix,
    pub z_opt: CholeskyParams,
    pub likelihood_value: f64,
    pub iterations: usize,
    pub converged: bool,
    pub n_norm: f64,
}

impl MleResult {
    /// Turns a non-converged result into [`Error::NoConvergence`].
    pub fn into_converged(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NoConvergence(self.iterations))
        }
    }
}

/// Minimizes the likelihood starting from the linear reconstruction (or the
/// given seed). A result that hits `max_iter` is returned with
/// `converged = false`.
pub fn mle_fit(input: &TomographyInput, options: &MleOptions) -> Result<MleResult> {
    let lik = Likelihood::new(input)?;
    let seed = match options.seed_override {
        Some(z) => z,
        None => seed_params(linear_reconstruct(input)?.rho.matrix())?,
    };
    let nm = NelderMead {
        max_iter: options.max_iter,
        tol: options.tol,
        f_floor: 1.0,
        ..NelderMead::default()
    };
    let m = nm.minimize(|z| lik.eval(z), &seed.0);
    let z_opt = CholeskyParams::from_slice(&m.x);
    Ok(MleResult {
        rho: rho_from_params(&z_opt)?,
        z_opt,
        likelihood_value: m.value,
        iterations: m.iterations,
        converged: m.converged,
        n_norm: lik.n_norm(),
    })
}
