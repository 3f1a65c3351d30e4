//! Source calibration: pump-state parameters, detector efficiency and the
//! pump-power scan.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const EPSILON_0: f64 = 8.854_187_812_8e-12;
const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PumpFitResult {
    pub d_background: f64,
    pub n0: f64,
    /// Degrees.
    pub theta_p: f64,
    /// Degrees in [0, 180]; the sign is not determined by the data.
    pub phi_m: f64,
}

/// Pump angle and phase from coincidence rates at analyzer settings
/// (0,0), (90,90), (45,45), (0,90) and (90,0):
///
/// `D = (N(0,90) + N(90,0))/2`, `N₀ = N(0,0) + N(90,90) − 2D`,
/// `tan²θ_p = (N(90,90) − D)/(N(0,0) − D)`,
/// `cos φ_m = (4N(45,45)/N₀ − 1)/sin 2θ_p`.
pub fn pump_params(
    n00: f64,
    n9090: f64,
    n4545: f64,
    n090: f64,
    n900: f64,
) -> Result<PumpFitResult> {
    for v in [n00, n9090, n4545, n090, n900] {
        if !(v >= 0.0) || !v.is_finite() {
            return Err(Error::Domain(format!(
                "rate {v} must be a nonnegative number"
            )));
        }
    }
    let d = (n090 + n900) / 2.0;
    let n0 = n00 + n9090 - 2.0 * d;
    if !(n0 > 0.0) {
        return Err(Error::Domain(format!(
            "N0 relation: aligned rates must exceed twice the background (N0 = {n0})"
        )));
    }
    let num = n9090 - d;
    let den = n00 - d;
    if !(den > 0.0) || num < 0.0 {
        return Err(Error::Domain(format!(
            "tan^2 theta_p relation: ratio ({num}) / ({den}) is not a nonnegative number"
        )));
    }
    let theta = (num / den).sqrt().atan();
    let s2 = (2.0 * theta).sin();
    let cos_phi = (4.0 * n4545 / n0 - 1.0) / s2;
    if !cos_phi.is_finite() || cos_phi.abs() > 1.0 {
        return Err(Error::Domain(format!(
            "cos phi_m relation: |cos phi_m| = {:.4} exceeds 1",
            cos_phi.abs()
        )));
    }
    Ok(PumpFitResult {
        d_background: d,
        n0,
        theta_p: theta.to_degrees(),
        phi_m: cos_phi.acos().to_degrees(),
    })
}

/// Forward model matching [`pump_params`]: rates at (0,0), (90,90), (45,45),
/// (0,90), (90,0) for the given parameters.
pub fn pump_rates(p: &PumpFitResult) -> [f64; 5] {
    let t = p.theta_p.to_radians();
    let phi = p.phi_m.to_radians();
    [
        p.n0 * t.cos().powi(2) + p.d_background,
        p.n0 * t.sin().powi(2) + p.d_background,
        p.n0 * (1.0 + (2.0 * t).sin() * phi.cos()) / 4.0,
        p.d_background,
        p.d_background,
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Efficiency {
    pub eta: f64,
    /// False when the ratio exceeds one.
    pub plausible: bool,
}

/// `η = N_c / N_other`.
pub fn detector_efficiency(
    coincidence_rate: f64,
    singles_rate_other_arm: f64,
) -> Result<Efficiency> {
    if !(singles_rate_other_arm > 0.0) {
        return Err(Error::ZeroSingles);
    }
    if !(coincidence_rate >= 0.0) {
        return Err(Error::Domain(format!(
            "coincidence rate {coincidence_rate} must be nonnegative"
        )));
    }
    let eta = coincidence_rate / singles_rate_other_arm;
    Ok(Efficiency {
        eta,
        plausible: eta <= 1.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerFit {
    /// cps per mW.
    pub slope_alpha: f64,
    pub intercept: f64,
    pub residual_rms: f64,
    /// Standard error of the slope from the residual scatter; zero for two
    /// points.
    pub slope_stderr: f64,
}

/// Ordinary least-squares line through (power in mW, rate in cps).
pub fn power_fit(points: &[(f64, f64)]) -> Result<PowerFit> {
    let n = points.len();
    if n < 2 {
        return Err(Error::DegenerateInput(format!(
            "need at least 2 points, got {n}"
        )));
    }
    let nf = n as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = points.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if !(sxx > 1e-12 * (1.0 + mx * mx) * nf) {
        return Err(Error::DegenerateInput(
            "need at least 2 distinct power values".into(),
        ));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = points
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    let slope_stderr = if n > 2 {
        (sse / (nf - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Ok(PowerFit {
        slope_alpha: slope,
        intercept,
        residual_rms: (sse / nf).sqrt(),
        slope_stderr,
    })
}

/// Crystal and pump parameters in SI units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Crystal {
    /// Length, m.
    pub length: f64,
    /// Down-converted mode area, m².
    pub area: f64,
    pub n_pump: f64,
    pub n_spdc: f64,
    /// Pump angular frequency, rad/s.
    pub omega_pump: f64,
    /// Pulse duration over period; 1 for continuous pumping.
    pub duty: f64,
}

impl Crystal {
    fn validate(&self) -> Result<()> {
        let fields = [
            ("length", self.length),
            ("area", self.area),
            ("n_pump", self.n_pump),
            ("n_spdc", self.n_spdc),
            ("omega_pump", self.omega_pump),
            ("duty", self.duty),
        ];
        for (name, v) in fields {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Domain(format!(
                    "crystal parameter {name} = {v} must be positive"
                )));
            }
        }
        Ok(())
    }

    /// `P₀ = 8ε₀ n_p² n_s c³ / (ω_s² χ²)` with `ω_s = ω_p/2`, in W.
    pub fn p0(&self, chi: f64) -> Result<f64> {
        self.validate()?;
        if !(chi > 0.0) {
            return Err(Error::Domain(format!(
                "susceptibility {chi} must be positive"
            )));
        }
        let ws = self.omega_pump / 2.0;
        Ok(
            8.0 * EPSILON_0 * self.n_pump.powi(2) * self.n_spdc * SPEED_OF_LIGHT.powi(3)
                / (ws * ws * chi * chi),
        )
    }

    /// Coefficient `(Δt/T)(ω_p/3π)(L²/A)` relating rate to `P_p/P₀`.
    fn rate_prefactor(&self) -> f64 {
        self.duty * self.omega_pump / (3.0 * std::f64::consts::PI) * self.length.powi(2) / self.area
    }

    /// Coincidence rate per mW of pump power for a given χ_eff (m/V).
    pub fn predicted_slope(&self, chi: f64) -> Result<f64> {
        Ok(self.rate_prefactor() / self.p0(chi)? * 1e-3)
    }
}

/// Effective susceptibility (m/V) from a fitted slope in cps per mW.
pub fn chi2_effective(slope_alpha: f64, crystal: &Crystal) -> Result<f64> {
    crystal.validate()?;
    if !(slope_alpha > 0.0) {
        return Err(Error::Domain(format!(
            "slope {slope_alpha} must be positive"
        )));
    }
    let alpha_w = slope_alpha * 1e3;
    let p0 = crystal.rate_prefactor() / alpha_w;
    let ws = crystal.omega_pump / 2.0;
    let chi2 = 8.0 * EPSILON_0 * crystal.n_pump.powi(2) * crystal.n_spdc * SPEED_OF_LIGHT.powi(3)
        / (ws * ws * p0);
    Ok(chi2.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn bbo() -> Crystal {
        Crystal {
            length: 2e-3,
            area: 1e-8,
            n_pump: 1.57,
            n_spdc: 1.66,
            omega_pump: 2.0 * std::f64::consts::PI * SPEED_OF_LIGHT / 405e-9,
            duty: 1.0,
        }
    }

    #[test]
    fn published_pump_parameters() {
        let p = pump_params(36.82, 37.46, 33.03, 0.26, 0.29).unwrap();
        assert_abs_diff_eq!(p.d_background, 0.275, epsilon = 1e-12);
        assert_abs_diff_eq!(p.n0, 73.73, epsilon = 1e-9);
        assert_abs_diff_eq!(p.theta_p, 45.25, epsilon = 5e-3);
        assert_abs_diff_eq!(p.phi_m, 37.6297, epsilon = 1e-4);
    }

    #[test]
    fn symmetric_and_background_free() {
        let p = pump_params(40.0, 40.0, 20.0, 0.0, 0.0).unwrap();
        assert_abs_diff_eq!(p.theta_p, 45.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p.n0, 80.0);
        assert_abs_diff_eq!(p.phi_m, 90.0, epsilon = 1e-12);
    }

    #[test]
    fn domain_errors_name_the_relation() {
        match pump_params(10.0, 10.0, 30.0, 0.0, 0.0) {
            Err(Error::Domain(msg)) => assert!(msg.contains("cos phi_m")),
            other => panic!("{other:?}"),
        }
        match pump_params(0.1, 10.0, 3.0, 0.5, 0.5) {
            Err(Error::Domain(msg)) => assert!(msg.contains("tan^2")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn efficiency() {
        assert_abs_diff_eq!(detector_efficiency(26.7, 100.0).unwrap().eta, 0.267);
        assert_eq!(detector_efficiency(0.0, 10.0).unwrap().eta, 0.0);
        let e = detector_efficiency(10.0, 10.0).unwrap();
        assert_eq!((e.eta, e.plausible), (1.0, true));
        assert!(!detector_efficiency(11.0, 10.0).unwrap().plausible);
        assert_eq!(detector_efficiency(1.0, 0.0), Err(Error::ZeroSingles));
    }

    #[test]
    fn line_fits() {
        let pts: Vec<(f64, f64)> = (1..6).map(|x| (x as f64, 3.0 * x as f64)).collect();
        let f = power_fit(&pts).unwrap();
        assert_abs_diff_eq!(f.slope_alpha, 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(f.residual_rms, 0.0, epsilon = 1e-12);
        let flat: Vec<(f64, f64)> = (1..6).map(|x| (x as f64, 7.0)).collect();
        assert_abs_diff_eq!(power_fit(&flat).unwrap().slope_alpha, 0.0, epsilon = 1e-12);
        assert!(power_fit(&[(1.0, 2.0), (1.0, 3.0)]).is_err());
        assert!(power_fit(&[(1.0, 2.0)]).is_err());
    }

    #[test]
    fn shifted_powers_change_only_intercept() {
        let pts = [(1.0, 2.1), (2.0, 3.9), (3.0, 6.2), (4.0, 7.8)];
        let shifted: Vec<(f64, f64)> = pts.iter().map(|p| (p.0 + 10.0, p.1)).collect();
        let (a, b) = (power_fit(&pts).unwrap(), power_fit(&shifted).unwrap());
        assert_relative_eq!(a.slope_alpha, b.slope_alpha, max_relative = 1e-12);
        assert_relative_eq!(
            b.intercept,
            a.intercept - 10.0 * a.slope_alpha,
            max_relative = 1e-12
        );
    }

    #[test]
    fn chi_scaling_and_round_trip() {
        let c = bbo();
        let chi = chi2_effective(120.0, &c).unwrap();
        let longer = Crystal {
            length: 2.0 * c.length,
            ..c
        };
        assert_relative_eq!(
            chi2_effective(120.0, &longer).unwrap(),
            chi / 2.0,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            chi2_effective(480.0, &c).unwrap(),
            2.0 * chi,
            max_relative = 1e-12
        );
        let slope = c.predicted_slope(chi).unwrap();
        assert_relative_eq!(slope, 120.0, max_relative = 1e-12);
        assert_relative_eq!(
            chi2_effective(slope, &c).unwrap(),
            chi,
            max_relative = 1e-12
        );
        let bad = Crystal { area: 0.0, ..c };
        assert!(matches!(chi2_effective(1.0, &bad), Err(Error::Domain(_))));
    }
}
