//! Linear tomographic reconstruction from sixteen projective coincidence
//! measurements, and single-qubit Stokes analysis.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::bell::accidental_rate;
use crate::error::{Error, Result};
use crate::polarization::{two_qubit_projector, Ket4, ProjectiveSetting};
use crate::qmatrix::{pauli, ComplexMatrix, DensityMatrix, GammaBasis, Physicality};

/// Threshold on |det B| below which a settings set is rejected.
pub const SINGULAR_DET: f64 = 1e-12;

/// One tomography measurement row. Rates are in counts per second.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountRecord {
    pub label: String,
    pub setting: ProjectiveSetting,
    pub n_a: f64,
    pub n_b: f64,
    pub n_c: f64,
    pub t_s: f64,
    pub tau_s: f64,
}

impl CountRecord {
    pub fn accidentals(&self) -> f64 {
        accidental_rate(self.n_a, self.n_b, self.t_s, self.tau_s)
    }
}

/// Sixteen count records plus the accidental-subtraction choice.
#[derive(Debug, Clone, PartialEq)]
pub struct TomographyInput {
    records: Vec<CountRecord>,
    pub subtract_accidentals: bool,
}

impl TomographyInput {
    pub fn new(records: Vec<CountRecord>, subtract_accidentals: bool) -> Result<Self> {
        if records.len() != 16 {
            return Err(Error::RecordCount {
                expected: 16,
                got: records.len(),
            });
        }
        for (index, r) in records.iter().enumerate() {
            for rate in [r.n_a, r.n_b, r.n_c] {
                if !(rate >= 0.0) || !rate.is_finite() {
                    return Err(Error::NegativeRate { index, rate });
                }
            }
            if !r.setting.is_finite() {
                return Err(Error::DegenerateInput(format!(
                    "non-finite angle in record {index}"
                )));
            }
            if subtract_accidentals && !(r.t_s > 0.0) {
                return Err(Error::DegenerateInput(format!(
                    "integration time must be positive (record {index})"
                )));
            }
        }
        Ok(Self {
            records,
            subtract_accidentals,
        })
    }

    pub fn records(&self) -> &[CountRecord] {
        &self.records
    }

    pub fn settings(&self) -> Vec<ProjectiveSetting> {
        self.records.iter().map(|r| r.setting).collect()
    }

    /// Coincidence rates entering the reconstruction, with accidentals
    /// removed (and clamped at zero) when requested.
    pub fn net_rates(&self) -> Vec<f64> {
        self.records
            .iter()
            .map(|r| {
                if self.subtract_accidentals {
                    (r.n_c - r.accidentals()).max(0.0)
                } else {
                    r.n_c
                }
            })
            .collect()
    }

    /// Same records with coincidence rates replaced.
    pub fn with_rates(&self, n_c: &[f64]) -> Self {
        let records = self
            .records
            .iter()
            .zip(n_c)
            .map(|(r, &n)| CountRecord {
                n_c: n,
                ..r.clone()
            })
            .collect();
        Self {
            records,
            subtract_accidentals: self.subtract_accidentals,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StokesVector {
    pub s0: f64,
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
}

impl StokesVector {
    pub fn degree_of_polarization(&self) -> f64 {
        (self.s1 * self.s1 + self.s2 * self.s2 + self.s3 * self.s3).sqrt() / self.s0
    }
}

/// Single-qubit state from the total count `n0` and the counts transmitted
/// by H, D and R analyzers.
///
/// Stokes parameters follow S1 = N(P_H − P_V), S2 = N(P_D − P_A),
/// S3 = N(P_R − P_L). On the |H⟩, |V⟩ basis with |R⟩ = (|H⟩ − i|V⟩)/√2 these
/// axes are σ_z, σ_x and −σ_y.
pub fn single_qubit_stokes(
    n0: f64,
    n_h: f64,
    n_d: f64,
    n_r: f64,
) -> Result<(StokesVector, ComplexMatrix)> {
    if !(n0 > 0.0) {
        return Err(Error::DegenerateInput(
            "total count must be positive".into(),
        ));
    }
    let s = StokesVector {
        s0: n0,
        s1: 2.0 * n_h - n0,
        s2: 2.0 * n_d - n0,
        s3: 2.0 * n_r - n0,
    };
    let rho = &(&(&pauli(0) + &pauli(3).scale(s.s1 / s.s0)) + &pauli(1).scale(s.s2 / s.s0))
        - &pauli(2).scale(s.s3 / s.s0);
    Ok((s, rho.scale(0.5)))
}

/// Precomputed inversion data for one complete settings set.
#[derive(Debug, Clone)]
pub struct Tomograph {
    kets: Vec<Ket4>,
    b: DMatrix<f64>,
    m: Vec<ComplexMatrix>,
    m_traces: Vec<f64>,
}

/// `B_νμ = ⟨ψ_ν|Γ_μ|ψ_ν⟩` for the given settings.
pub fn b_matrix(settings: &[ProjectiveSetting]) -> Result<DMatrix<f64>> {
    if settings.len() != 16 {
        return Err(Error::RecordCount {
            expected: 16,
            got: settings.len(),
        });
    }
    let gamma = GammaBasis::standard();
    let kets: Vec<Ket4> = settings.iter().map(two_qubit_projector).collect();
    let b = DMatrix::from_fn(16, 16, |nu, mu| {
        gamma.matrices[mu].expectation(&kets[nu].0).re
    });
    let det = b.determinant();
    if det.abs() < SINGULAR_DET {
        return Err(Error::SingularSet(det.abs()));
    }
    Ok(b)
}

/// `M_ν = Σ_μ (B⁻¹)_μν Γ_μ`.
pub fn m_matrices(settings: &[ProjectiveSetting]) -> Result<Vec<ComplexMatrix>> {
    Ok(Tomograph::new(settings)?.m)
}

impl Tomograph {
    pub fn new(settings: &[ProjectiveSetting]) -> Result<Self> {
        let b = b_matrix(settings)?;
        let binv = b.clone().try_inverse().ok_or(Error::SingularSet(0.0))?;
        let gamma = GammaBasis::standard();
        let m: Vec<ComplexMatrix> = (0..16)
            .map(|nu| {
                let mut acc = ComplexMatrix::zeros(4);
                for (mu, g) in gamma.matrices.iter().enumerate() {
                    acc = &acc + &g.scale(binv[(mu, nu)]);
                }
                acc
            })
            .collect();
        let m_traces = m.iter().map(|x| x.trace().re).collect();
        Ok(Self {
            kets: settings.iter().map(two_qubit_projector).collect(),
            b,
            m,
            m_traces,
        })
    }

    pub fn standard() -> Self {
        Self::new(&crate::polarization::standard_settings()).expect("standard set is complete")
    }

    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn m(&self) -> &[ComplexMatrix] {
        &self.m
    }

    pub fn kets(&self) -> &[Ket4] {
        &self.kets
    }

    /// `𝒩 = Σ_ν tr(M_ν) n_ν`; for the standard set this is n₁+n₂+n₃+n₄.
    pub fn normalization(&self, rates: &[f64]) -> f64 {
        self.m_traces.iter().zip(rates).map(|(t, n)| t * n).sum()
    }

    /// `ρ = Σ_ν M_ν n_ν / 𝒩`.
    pub fn reconstruct(&self, rates: &[f64]) -> Result<LinearReconstruction> {
        if rates.len() != 16 {
            return Err(Error::RecordCount {
                expected: 16,
                got: rates.len(),
            });
        }
        let n_norm = self.normalization(rates);
        if !(n_norm > 0.0) {
            return Err(Error::DegenerateInput(format!(
                "normalization constant is not positive ({n_norm:.3e})"
            )));
        }
        let mut acc = ComplexMatrix::zeros(4);
        for (m, &n) in self.m.iter().zip(rates) {
            acc = &acc + &m.scale(n / n_norm);
        }
        let rho = DensityMatrix::new(acc)?;
        let physicality = rho.physicality();
        Ok(LinearReconstruction {
            eigenvalues: rho.eigenvalues(),
            rho,
            n_norm,
            physicality,
        })
    }

    /// Noiseless rates `𝒩⟨ψ_ν|ρ|ψ_ν⟩` for every setting.
    pub fn expected_rates(&self, rho: &ComplexMatrix, n_norm: f64) -> Vec<f64> {
        self.kets
            .iter()
            .map(|k| n_norm * rho.expectation(&k.0).re)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearReconstruction {
    /// Hermitian, unit trace; not necessarily positive.
    pub rho: DensityMatrix,
    pub n_norm: f64,
    /// Descending.
    pub eigenvalues: Vec<f64>,
    pub physicality: Physicality,
}

pub fn linear_reconstruct(input: &TomographyInput) -> Result<LinearReconstruction> {
    Tomograph::new(&input.settings())?.reconstruct(&input.net_rates())
}

/// Two-qubit Stokes parameters normalized to `r_00 = 1`:
/// `r_ij = tr(ρ σ_i ⊗ σ_j)`.
pub fn stokes_parameters(rho: &ComplexMatrix) -> Result<[[f64; 4]; 4]> {
    if rho.dim() != 4 {
        return Err(Error::Dimension(rho.dim(), "4"));
    }
    let mut out = [[0.0; 4]; 4];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            let s = ComplexMatrix::kron(&pauli(i), &pauli(j));
            *v = (rho * &s).trace().re;
        }
    }
    Ok(out)
}

/// Inverse of [`stokes_parameters`].
pub fn rho_from_stokes(r: &[[f64; 4]; 4]) -> ComplexMatrix {
    let mut acc = ComplexMatrix::zeros(4);
    for (i, row) in r.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            acc = &acc + &ComplexMatrix::kron(&pauli(i), &pauli(j)).scale(v / 4.0);
        }
    }
    acc
}
