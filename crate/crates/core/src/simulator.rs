//! Forward models for down-converted photon pairs and synthetic count data.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::bell::{accidental_rate, BellRecord};
use crate::error::{Error, Result};
use crate::polarization::{two_qubit_projector, Ket2, ProjectiveSetting, STANDARD_LABELS};
use crate::qmatrix::{c, partial_trace, DensityMatrix, Subsystem};
use crate::tomography::CountRecord;

/// Pump polarization and phase, both in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PumpState {
    pub theta_p: f64,
    pub phi: f64,
}

impl PumpState {
    pub fn bell() -> Self {
        Self {
            theta_p: 45.0,
            phi: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorModel {
    /// Expected pair detections per second.
    pub n_flux: f64,
    pub window_tau: f64,
    pub integration_t: f64,
    pub singles_a: f64,
    pub singles_b: f64,
}

impl DetectorModel {
    /// Pair flux only: no accidentals, one-second integration.
    pub fn ideal(n_flux: f64) -> Self {
        Self {
            n_flux,
            window_tau: 0.0,
            integration_t: 1.0,
            singles_a: 0.0,
            singles_b: 0.0,
        }
    }

    pub fn accidentals(&self) -> f64 {
        accidental_rate(
            self.singles_a,
            self.singles_b,
            self.integration_t,
            self.window_tau,
        )
    }

    fn validate(&self) -> Result<()> {
        let ok = [self.n_flux, self.window_tau, self.singles_a, self.singles_b]
            .iter()
            .all(|x| *x >= 0.0 && x.is_finite())
            && self.integration_t > 0.0
            && self.integration_t.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::Domain(
                "detector model needs nonnegative rates and positive integration time".into(),
            ))
        }
    }
}

/// `cos θ_p |HH⟩ + e^{iφ} sin θ_p |VV⟩`.
pub fn spdc_state(p: &PumpState) -> DensityMatrix {
    let t = p.theta_p.to_radians();
    let phase = num_complex::Complex64::from_polar(t.sin(), p.phi.to_radians());
    DensityMatrix::pure(&[c(t.cos(), 0.0), c(0.0, 0.0), c(0.0, 0.0), phase])
}

/// Probability that both photons pass polarizers at α and β (degrees).
pub fn quantum_pvv(alpha: f64, beta: f64, p: &PumpState) -> f64 {
    let (a, b) = (alpha.to_radians(), beta.to_radians());
    let t = p.theta_p.to_radians();
    let amp = c(a.sin() * b.sin() * t.cos(), 0.0)
        + num_complex::Complex64::from_polar(a.cos() * b.cos() * t.sin(), p.phi.to_radians());
    amp.norm_sqr()
}

/// Linear hidden-variable prediction `½ − |β − α|/π`, with the relative angle
/// folded into [0°, 90°].
pub fn hvt_pvv(alpha: f64, beta: f64) -> f64 {
    let d = (beta - alpha).rem_euclid(180.0);
    let d = if d > 90.0 { 180.0 - d } else { d };
    0.5 - d.to_radians() / std::f64::consts::PI
}

/// Coincidence-probability model used to synthesize Bell scans.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BellModel {
    Quantum(PumpState),
    HiddenVariable,
}

impl BellModel {
    pub fn pvv(&self, alpha: f64, beta: f64) -> f64 {
        match self {
            BellModel::Quantum(p) => quantum_pvv(alpha, beta, p),
            BellModel::HiddenVariable => hvt_pvv(alpha, beta),
        }
    }

    /// `E = P(α,β) + P(α⊥,β⊥) − P(α,β⊥) − P(α⊥,β)`.
    pub fn correlation(&self, alpha: f64, beta: f64) -> f64 {
        self.pvv(alpha, beta) + self.pvv(alpha + 90.0, beta + 90.0)
            - self.pvv(alpha, beta + 90.0)
            - self.pvv(alpha + 90.0, beta)
    }

    pub fn chsh(&self, a: f64, a_prime: f64, b: f64, b_prime: f64) -> f64 {
        (self.correlation(a, b) - self.correlation(a, b_prime)).abs()
            + (self.correlation(a_prime, b) + self.correlation(a_prime, b_prime)).abs()
    }
}

/// Expected coincidence rate `𝒩⟨ψ_ν|ρ|ψ_ν⟩ + τN_AN_B/T`.
pub fn predict_counts(
    rho: &DensityMatrix,
    s: &ProjectiveSetting,
    d: &DetectorModel,
) -> Result<f64> {
    rho.ensure_physical()?;
    d.validate()?;
    let k = two_qubit_projector(s);
    let p = rho.matrix().expectation(&k.0).re.max(0.0);
    Ok(d.n_flux * p + d.accidentals())
}

/// Noiseless records for the given settings.
pub fn expected_records(
    rho: &DensityMatrix,
    settings: &[ProjectiveSetting],
    d: &DetectorModel,
) -> Result<Vec<CountRecord>> {
    settings
        .iter()
        .enumerate()
        .map(|(i, s)| {
            Ok(CountRecord {
                label: label_for(i, settings.len()),
                setting: *s,
                n_a: d.singles_a,
                n_b: d.singles_b,
                n_c: predict_counts(rho, s, d)?,
                t_s: d.integration_t,
                tau_s: d.window_tau,
            })
        })
        .collect()
}

fn label_for(i: usize, n: usize) -> String {
    if n == 16 {
        STANDARD_LABELS[i].to_string()
    } else {
        format!("s{}", i + 1)
    }
}

/// Draws a Poisson count with mean `mean`; zero mean yields zero.
pub fn poisson(rng: &mut ChaCha8Rng, mean: f64) -> f64 {
    if mean > 0.0 {
        Poisson::new(mean)
            .expect("positive finite mean")
            .sample(rng)
    } else {
        0.0
    }
}

/// Records whose coincidence rates are Poisson draws of the integrated
/// counts around [`predict_counts`], divided back by T.
pub fn sample_counts(
    rho: &DensityMatrix,
    settings: &[ProjectiveSetting],
    d: &DetectorModel,
    seed: u64,
) -> Result<Vec<CountRecord>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t = d.integration_t;
    expected_records(rho, settings, d).map(|recs| {
        recs.into_iter()
            .map(|r| CountRecord {
                n_c: poisson(&mut rng, r.n_c * t) / t,
                ..r
            })
            .collect()
    })
}

/// Bell scan rows at every (θ_A, θ_B) pair, `n_c = 𝒩 P_VV + accidentals`,
/// with optional Poisson noise.
pub fn bell_records(
    model: &BellModel,
    angles: &[(f64, f64)],
    d: &DetectorModel,
    seed: Option<u64>,
) -> Result<Vec<BellRecord>> {
    d.validate()?;
    let mut rng = seed.map(ChaCha8Rng::seed_from_u64);
    let t = d.integration_t;
    Ok(angles
        .iter()
        .map(|&(theta_a, theta_b)| {
            let mean = d.n_flux * model.pvv(theta_a, theta_b) + d.accidentals();
            let (n_c, dn_c) = match rng.as_mut() {
                Some(rng) => {
                    let n = poisson(rng, mean * t);
                    (n / t, n.sqrt() / t)
                }
                None => (mean, 0.0),
            };
            BellRecord {
                theta_a,
                theta_b,
                n_a: d.singles_a,
                n_b: d.singles_b,
                n_c,
                dn_c,
                t_s: t,
                tau_s: d.window_tau,
            }
        })
        .collect())
}

/// The sixteen analyzer pairs {a, a⊥, a', a'⊥} × {b, b⊥, b', b'⊥}.
pub fn chsh_angle_grid(a: f64, a_prime: f64, b: f64, b_prime: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(16);
    for ta in [a, a_prime, a + 90.0, a_prime + 90.0] {
        for tb in [b, b_prime, b + 90.0, b_prime + 90.0] {
            out.push((ta, tb));
        }
    }
    out
}

/// Normalized multi-pair weights `∝ (n+1) qⁿ` for n = 0…n_max.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairWeights {
    pub q_param: f64,
    pub weights: Vec<f64>,
}

pub fn pair_weights(q: f64, n_max: usize) -> Result<PairWeights> {
    if !(0.0..1.0).contains(&q) {
        return Err(Error::Domain(format!(
            "pair parameter q = {q} must lie in [0, 1)"
        )));
    }
    let raw: Vec<f64> = (0..=n_max)
        .map(|n| (n as f64 + 1.0) * q.powi(n as i32))
        .collect();
    let total: f64 = raw.iter().sum();
    Ok(PairWeights {
        q_param: q,
        weights: raw.into_iter().map(|w| w / total).collect(),
    })
}

/// Probability that the photon in `arm` passes a polarizer at β, ignoring
/// the partner photon.
pub fn marginal_probability(rho: &DensityMatrix, arm: Subsystem, beta: f64) -> Result<f64> {
    rho.ensure_physical()?;
    // partial_trace(keep = B) returns the leading tensor factor, i.e. arm A
    let keep = match arm {
        Subsystem::A => Subsystem::B,
        Subsystem::B => Subsystem::A,
    };
    let reduced = partial_trace(rho.matrix(), keep)?;
    Ok(reduced.expectation(&Ket2::linear(beta).0).re)
}
