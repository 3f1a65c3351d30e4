//! CHSH analysis of polarizer-angle coincidence data.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance when matching angles in degrees.
pub const ANGLE_TOL: f64 = 0.01;

/// One row of a polarizer-angle scan. Rates in counts per second.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BellRecord {
    pub theta_a: f64,
    pub theta_b: f64,
    pub n_a: f64,
    pub n_b: f64,
    pub n_c: f64,
    /// Measured uncertainty of `n_c`; zero when not available.
    pub dn_c: f64,
    pub t_s: f64,
    pub tau_s: f64,
}

impl BellRecord {
    pub fn accidentals(&self) -> f64 {
        accidental_rate(self.n_a, self.n_b, self.t_s, self.tau_s)
    }

    /// Coincidence rate, optionally with accidentals removed and clamped at 0.
    pub fn net_rate(&self, subtract: bool) -> f64 {
        if subtract {
            (self.n_c - self.accidentals()).max(0.0)
        } else {
            self.n_c
        }
    }

    /// Standard deviation of the coincidence rate: the measured `dn_c` when
    /// given, otherwise Poisson statistics of the integrated count.
    pub fn rate_sigma(&self, subtract: bool) -> f64 {
        if self.dn_c > 0.0 {
            self.dn_c
        } else if self.t_s > 0.0 {
            (self.net_rate(subtract) * self.t_s).sqrt() / self.t_s
        } else {
            0.0
        }
    }

    fn validate(&self) -> Result<()> {
        for rate in [self.n_a, self.n_b, self.n_c, self.dn_c] {
            if !(rate >= 0.0) || !rate.is_finite() {
                return Err(Error::NegativeRate { index: 0, rate });
            }
        }
        Ok(())
    }
}

/// Accidental coincidence rate `τ N_A N_B / T`.
pub fn accidental_rate(n_a: f64, n_b: f64, t_s: f64, tau_s: f64) -> f64 {
    if t_s > 0.0 {
        tau_s * n_a * n_b / t_s
    } else {
        0.0
    }
}

/// Equality of analyzer angles modulo 180°.
pub fn angle_eq(x: f64, y: f64) -> bool {
    let d = (x - y).rem_euclid(180.0);
    d.min(180.0 - d) < ANGLE_TOL
}

/// `E = (N₁ + N₂ − N₃ − N₄)/(N₁ + N₂ + N₃ + N₄)` from records at
/// (α,β), (α⊥,β⊥), (α,β⊥), (α⊥,β), where ⊥ adds 90°.
pub fn correlation_e(records: &[BellRecord; 4], subtract_accidentals: bool) -> Result<f64> {
    let (a, b) = (records[0].theta_a, records[0].theta_b);
    let expected = [(a, b), (a + 90.0, b + 90.0), (a, b + 90.0), (a + 90.0, b)];
    for (r, (ea, eb)) in records.iter().zip(expected) {
        if !angle_eq(r.theta_a, ea) || !angle_eq(r.theta_b, eb) {
            return Err(Error::PatternMismatch(format!(
                "expected ({ea}, {eb}), found ({}, {})",
                r.theta_a, r.theta_b
            )));
        }
        r.validate()?;
    }
    let n: Vec<f64> = records
        .iter()
        .map(|r| r.net_rate(subtract_accidentals))
        .collect();
    correlation_from_rates(&n)
}

fn correlation_from_rates(n: &[f64]) -> Result<f64> {
    let total: f64 = n.iter().sum();
    if !(total > 0.0) {
        return Err(Error::ZeroTotal);
    }
    Ok((n[0] + n[1] - n[2] - n[3]) / total)
}

/// Analyzer angles entering `S = |E(a,b) − E(a,b')| + |E(a',b) + E(a',b')|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChshAngles {
    pub a: f64,
    pub a_prime: f64,
    pub b: f64,
    pub b_prime: f64,
}

impl Default for ChshAngles {
    fn default() -> Self {
        Self {
            a: -45.0,
            a_prime: 0.0,
            b: -22.5,
            b_prime: 22.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BellResult {
    /// E(a,b), E(a,b'), E(a',b), E(a',b').
    pub e_values: [f64; 4],
    pub s_value: f64,
    pub s_sigma: f64,
    pub accidentals_subtracted: bool,
    /// Accidental rate of each input record, in input order.
    pub accidentals: Vec<f64>,
}

fn find(records: &[BellRecord], a: f64, b: f64) -> Result<BellRecord> {
    records
        .iter()
        .find(|r| angle_eq(r.theta_a, a) && angle_eq(r.theta_b, b))
        .copied()
        .ok_or(Error::MissingCombination(a, b))
}

/// CHSH parameter and its propagated uncertainty.
pub fn chsh_s(
    records: &[BellRecord],
    angles: &ChshAngles,
    subtract_accidentals: bool,
) -> Result<BellResult> {
    for (index, r) in records.iter().enumerate() {
        r.validate().map_err(|e| match e {
            Error::NegativeRate { rate, .. } => Error::NegativeRate { index, rate },
            other => other,
        })?;
    }
    let pairs = [
        (angles.a, angles.b),
        (angles.a, angles.b_prime),
        (angles.a_prime, angles.b),
        (angles.a_prime, angles.b_prime),
    ];
    let mut e_values = [0.0; 4];
    let mut quads = Vec::with_capacity(4);
    for (k, &(a, b)) in pairs.iter().enumerate() {
        let quad = [
            find(records, a, b)?,
            find(records, a + 90.0, b + 90.0)?,
            find(records, a, b + 90.0)?,
            find(records, a + 90.0, b)?,
        ];
        e_values[k] = correlation_e(&quad, subtract_accidentals)?;
        quads.push(quad);
    }
    let d1 = e_values[0] - e_values[1];
    let d2 = e_values[2] + e_values[3];
    let s_value = d1.abs() + d2.abs();
    // dS/dE for each correlation
    let sign = |x: f64| if x >= 0.0 { 1.0 } else { -1.0 };
    let ds_de = [sign(d1), -sign(d1), sign(d2), sign(d2)];
    let mut var = 0.0;
    for (quad, g) in quads.iter().zip(ds_de) {
        let n: Vec<f64> = quad
            .iter()
            .map(|r| r.net_rate(subtract_accidentals))
            .collect();
        let total: f64 = n.iter().sum();
        let de_plus = 2.0 * (n[2] + n[3]) / (total * total);
        let de_minus = -2.0 * (n[0] + n[1]) / (total * total);
        for (i, r) in quad.iter().enumerate() {
            let de = if i < 2 { de_plus } else { de_minus };
            var += (g * de * r.rate_sigma(subtract_accidentals)).powi(2);
        }
    }
    Ok(BellResult {
        e_values,
        s_value,
        s_sigma: var.sqrt(),
        accidentals_subtracted: subtract_accidentals,
        accidentals: records.iter().map(|r| r.accidentals()).collect(),
    })
}

/// `(N_∥ − N_⊥)/(N_∥ + N_⊥)` over four records in one basis, where aligned
/// settings have equal analyzer angles modulo 180°.
pub fn visibility(records: &[BellRecord]) -> Result<f64> {
    if records.len() != 4 {
        return Err(Error::RecordCount {
            expected: 4,
            got: records.len(),
        });
    }
    let (mut par, mut perp) = (0.0, 0.0);
    let (mut n_par, mut n_perp) = (0, 0);
    for r in records {
        r.validate()?;
        if angle_eq(r.theta_a, r.theta_b) {
            par += r.n_c;
            n_par += 1;
        } else if angle_eq(r.theta_a, r.theta_b + 90.0) {
            perp += r.n_c;
            n_perp += 1;
        } else {
            return Err(Error::PatternMismatch(format!(
                "({}, {}) is neither aligned nor orthogonal",
                r.theta_a, r.theta_b
            )));
        }
    }
    if n_par != 2 || n_perp != 2 {
        return Err(Error::PatternMismatch(
            "expected two aligned and two orthogonal settings".into(),
        ));
    }
    let total = par + perp;
    if !(total > 0.0) {
        return Err(Error::ZeroTotal);
    }
    Ok((par - perp) / total)
}
