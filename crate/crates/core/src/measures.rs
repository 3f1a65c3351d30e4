//! Entropies and entanglement measures of two-qubit states, with Monte-Carlo
//! uncertainties from Poisson-resampled counts.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mle::{mle_fit, MleOptions};
use crate::qmatrix::{
    clamp_eigenvalue, herm_eig, partial_trace, partial_transpose, singular_values, spin_flip,
    trace_norm, ComplexMatrix, DensityMatrix, Subsystem, HERMITIAN_TOL,
};
use crate::simulator::poisson;
use crate::tomography::TomographyInput;

/// Most negative eigenvalue tolerated in a measured state. Published
/// matrices rounded to three decimals can dip slightly below zero; such
/// eigenvalues are treated as zero in entropies and square roots.
pub const PSD_SLACK: f64 = 1e-2;

fn check(rho: &DensityMatrix) -> Result<Vec<f64>> {
    let m = rho.matrix();
    let tr = m.trace();
    if (tr.re - 1.0).abs() > 1e-9 || tr.im.abs() > 1e-9 || !m.is_hermitian(HERMITIAN_TOL) {
        return Err(Error::NonPhysicalState(format!(
            "trace {:.6}{:+.6}i",
            tr.re, tr.im
        )));
    }
    let ev = rho.eigenvalues();
    if ev[3] < -PSD_SLACK || ev[0] > 1.0 + PSD_SLACK {
        return Err(Error::NonPhysicalState(format!(
            "eigenvalues in [{:.3e}, {:.3e}]",
            ev[3], ev[0]
        )));
    }
    Ok(ev)
}

fn sqrt_clamped(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    Ok(herm_eig(m)?.map_spectrum(|l| clamp_eigenvalue(l).max(0.0).sqrt()))
}

/// `−Σ p log₂ p` over the eigenvalues, in bits.
pub fn von_neumann(rho: &DensityMatrix) -> Result<f64> {
    let ev = check(rho)?;
    Ok(ev
        .iter()
        .map(|&l| clamp_eigenvalue(l).max(0.0))
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.log2())
        .sum::<f64>()
        .max(0.0))
}

pub fn purity(rho: &DensityMatrix) -> Result<f64> {
    check(rho)?;
    Ok(rho.purity())
}

/// `(4/3)(1 − tr ρ²)`.
pub fn linear_entropy(rho: &DensityMatrix) -> Result<f64> {
    Ok(4.0 / 3.0 * (1.0 - purity(rho)?))
}

/// Wootters concurrence `max(0, r₁ − r₂ − r₃ − r₄)` from the descending
/// eigenvalues of `√(√ρ ρ̃ √ρ)`, `ρ̃ = (σ_y⊗σ_y) ρ* (σ_y⊗σ_y)`. These are the
/// singular values of `√ρ (σ_y⊗σ_y) √ρ*`.
pub fn concurrence(rho: &DensityMatrix) -> Result<f64> {
    check(rho)?;
    let s = sqrt_clamped(rho.matrix())?;
    let r = singular_values(&(&(&s * &spin_flip()) * &s.conj()));
    Ok((r[0] - r[1] - r[2] - r[3]).clamp(0.0, 1.0))
}

/// Tangle `𝒞²` and entanglement of formation `h((1 + √(1 − 𝒞²))/2)` with
/// `h` the binary entropy in bits.
pub fn tangle_and_eof(concurrence: f64) -> Result<(f64, f64)> {
    if !(-1e-12..=1.0 + 1e-12).contains(&concurrence) {
        return Err(Error::Domain(format!(
            "concurrence {concurrence} outside [0, 1]"
        )));
    }
    let cc = concurrence.clamp(0.0, 1.0);
    let x = (1.0 + (1.0 - cc * cc).sqrt()) / 2.0;
    let h = |p: f64| {
        if p <= 0.0 || p >= 1.0 {
            0.0
        } else {
            -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
        }
    };
    Ok((cc * cc, h(x)))
}

/// `−ln tr ρ_sub²` of the reduced state from [`partial_trace`].
pub fn renyi2(rho: &DensityMatrix, subsystem: Subsystem) -> Result<f64> {
    check(rho)?;
    let r = partial_trace(rho.matrix(), subsystem)?;
    let p = (&r * &r).trace().re;
    Ok(-p.ln())
}

/// `log₂ ‖ρ^{T_A}‖₁`.
pub fn log_negativity(rho: &DensityMatrix) -> Result<f64> {
    check(rho)?;
    let pt = partial_transpose(rho.matrix(), Subsystem::A)?;
    Ok(trace_norm(&pt).log2().max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Measures {
    pub von_neumann: f64,
    pub linear_entropy: f64,
    pub purity: f64,
    pub renyi2_a: f64,
    pub concurrence: f64,
    pub tangle: f64,
    pub eof: f64,
    pub log_negativity: f64,
}

impl Measures {
    pub const NAMES: [&'static str; 8] = [
        "von_neumann",
        "linear_entropy",
        "purity",
        "renyi2_a",
        "concurrence",
        "tangle",
        "eof",
        "log_negativity",
    ];

    pub fn to_array(&self) -> [f64; 8] {
        [
            self.von_neumann,
            self.linear_entropy,
            self.purity,
            self.renyi2_a,
            self.concurrence,
            self.tangle,
            self.eof,
            self.log_negativity,
        ]
    }

    pub fn from_array(a: [f64; 8]) -> Self {
        Self {
            von_neumann: a[0],
            linear_entropy: a[1],
            purity: a[2],
            renyi2_a: a[3],
            concurrence: a[4],
            tangle: a[5],
            eof: a[6],
            log_negativity: a[7],
        }
    }
}

pub fn compute_measures(rho: &DensityMatrix) -> Result<Measures> {
    let c = concurrence(rho)?;
    let (tangle, eof) = tangle_and_eof(c)?;
    Ok(Measures {
        von_neumann: von_neumann(rho)?,
        linear_entropy: linear_entropy(rho)?,
        purity: purity(rho)?,
        renyi2_a: renyi2(rho, Subsystem::A)?,
        concurrence: c,
        tangle,
        eof,
        log_negativity: log_negativity(rho)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasuresReport {
    pub values: Measures,
    /// Sample mean over resampled trials.
    pub mean: Option<Measures>,
    /// Sample standard deviation over resampled trials.
    pub std_dev: Option<Measures>,
    pub trials_used: usize,
    pub trials_dropped: usize,
}

impl MeasuresReport {
    pub fn without_uncertainty(values: Measures) -> Self {
        Self {
            values,
            mean: None,
            std_dev: None,
            trials_used: 0,
            trials_dropped: 0,
        }
    }
}

/// Measures of the maximum-likelihood state, with the spread over `trials`
/// fits to Poisson-resampled coincidence counts. Trial `k` draws from its own
/// stream of a generator seeded with `seed`, so the report does not depend on
/// scheduling.
pub fn report_with_uncertainty(
    input: &TomographyInput,
    trials: usize,
    seed: u64,
    options: &MleOptions,
) -> Result<MeasuresReport> {
    if trials < 2 {
        return Err(Error::Domain(format!(
            "need at least 2 trials, got {trials}"
        )));
    }
    let fit = mle_fit(input, options)?;
    let values = compute_measures(&fit.rho)?;

    let results: Vec<Option<[f64; 8]>> = (0..trials)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let rates: Vec<f64> = input
                .records()
                .iter()
                .map(|r| poisson(&mut rng, r.n_c * r.t_s) / r.t_s)
                .collect();
            let trial = input.with_rates(&rates);
            let fit = mle_fit(&trial, options).ok()?;
            if !fit.converged {
                return None;
            }
            compute_measures(&fit.rho).ok().map(|m| m.to_array())
        })
        .collect();

    let used: Vec<[f64; 8]> = results.iter().flatten().copied().collect();
    let dropped = trials - used.len();
    if used.len() < 2 {
        return Err(Error::NoConvergence(options.max_iter));
    }
    let n = used.len() as f64;
    let mut mean = [0.0; 8];
    let mut std = [0.0; 8];
    for i in 0..8 {
        mean[i] = used.iter().map(|m| m[i]).sum::<f64>() / n;
        let var = used.iter().map(|m| (m[i] - mean[i]).powi(2)).sum::<f64>() / (n - 1.0);
        std[i] = var.sqrt();
    }
    Ok(MeasuresReport {
        values,
        mean: Some(Measures::from_array(mean)),
        std_dev: Some(Measures::from_array(std)),
        trials_used: used.len(),
        trials_dropped: dropped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmatrix::c;
    use approx::assert_abs_diff_eq;

    fn hv() -> DensityMatrix {
        DensityMatrix::pure(&[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)])
    }

    #[test]
    fn bell_state_values() {
        let m = compute_measures(&DensityMatrix::bell_phi_plus()).unwrap();
        assert_abs_diff_eq!(m.von_neumann, 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(m.linear_entropy, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(m.concurrence, 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(m.tangle, 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(m.eof, 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(m.renyi2_a, std::f64::consts::LN_2, epsilon = 1e-12);
        assert_abs_diff_eq!(m.log_negativity, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn mixed_and_product_values() {
        let mm = DensityMatrix::maximally_mixed();
        assert_abs_diff_eq!(von_neumann(&mm).unwrap(), 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(linear_entropy(&mm).unwrap(), 1.0, epsilon = 1e-12);
        let p = hv();
        assert_abs_diff_eq!(concurrence(&p).unwrap(), 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(renyi2(&p, Subsystem::A).unwrap(), 0.0, epsilon = 1e-12);
        let sep = DensityMatrix::new(ComplexMatrix::diag(&[0.5, 0.0, 0.0, 0.5])).unwrap();
        assert_abs_diff_eq!(log_negativity(&sep).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn tangle_and_eof_examples() {
        assert_eq!(tangle_and_eof(1.0).unwrap(), (1.0, 1.0));
        assert_eq!(tangle_and_eof(0.0).unwrap(), (0.0, 0.0));
        let (t, e) = tangle_and_eof(0.602).unwrap();
        assert_abs_diff_eq!(t, 0.362, epsilon = 5e-4);
        assert_abs_diff_eq!(e, 0.471, epsilon = 5e-4);
        assert!(tangle_and_eof(1.2).is_err());
    }

    #[test]
    fn rejects_unphysical() {
        let bad = DensityMatrix::new(ComplexMatrix::diag(&[1.2, -0.2, 0.0, 0.0])).unwrap();
        assert!(matches!(von_neumann(&bad), Err(Error::NonPhysicalState(_))));
        let untraced = DensityMatrix::new(ComplexMatrix::diag(&[0.5, 0.0, 0.0, 0.0])).unwrap();
        assert!(matches!(
            concurrence(&untraced),
            Err(Error::NonPhysicalState(_))
        ));
    }

    #[test]
    fn trial_count_checked() {
        let recs = crate::simulator::expected_records(
            &DensityMatrix::bell_phi_plus(),
            &crate::polarization::standard_settings(),
            &crate::simulator::DetectorModel::ideal(100.0),
        )
        .unwrap();
        let input = TomographyInput::new(recs, false).unwrap();
        assert!(matches!(
            report_with_uncertainty(&input, 1, 0, &MleOptions::default()),
            Err(Error::Domain(_))
        ));
    }
}
