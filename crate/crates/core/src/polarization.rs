//! Polarization kets and the waveplate settings that realize the sixteen
//! two-photon tomographic projectors.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::qmatrix::{c, ComplexMatrix};

/// Single-photon polarization state on the |H⟩, |V⟩ basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ket2(pub [C64; 2]);

/// Two-photon polarization state on |HH⟩, |HV⟩, |VH⟩, |VV⟩.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ket4(pub [C64; 4]);

impl Ket2 {
    pub fn h() -> Self {
        Ket2([c(1.0, 0.0), c(0.0, 0.0)])
    }

    pub fn v() -> Self {
        Ket2([c(0.0, 0.0), c(1.0, 0.0)])
    }

    /// (|H⟩ + |V⟩)/√2
    pub fn d() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Ket2([c(s, 0.0), c(s, 0.0)])
    }

    /// (|H⟩ − |V⟩)/√2
    pub fn a() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Ket2([c(s, 0.0), c(-s, 0.0)])
    }

    /// (|H⟩ − i|V⟩)/√2
    pub fn r() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Ket2([c(s, 0.0), c(0.0, -s)])
    }

    /// (|H⟩ + i|V⟩)/√2
    pub fn l() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Ket2([c(s, 0.0), c(0.0, s)])
    }

    /// Linear polarization at `deg` from the vertical: sin θ |H⟩ + cos θ |V⟩.
    pub fn linear(deg: f64) -> Self {
        let t = deg.to_radians();
        Ket2([c(t.sin(), 0.0), c(t.cos(), 0.0)])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0[0].norm_sqr() + self.0[1].norm_sqr()
    }

    /// |⟨self|other⟩|², insensitive to global phase.
    pub fn overlap(&self, other: &Ket2) -> f64 {
        (self.0[0].conj() * other.0[0] + self.0[1].conj() * other.0[1]).norm_sqr()
    }

    pub fn projector(&self) -> ComplexMatrix {
        ComplexMatrix::outer(&self.0)
    }

    pub fn tensor(&self, other: &Ket2) -> Ket4 {
        let [a0, a1] = self.0;
        let [b0, b1] = other.0;
        Ket4([a0 * b0, a0 * b1, a1 * b0, a1 * b1])
    }
}

impl Ket4 {
    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn overlap(&self, other: &Ket4) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| a.conj() * b)
            .sum::<C64>()
            .norm_sqr()
    }

    pub fn projector(&self) -> ComplexMatrix {
        ComplexMatrix::outer(&self.0)
    }
}

/// Waveplate angles (degrees, fast axis from vertical) in front of each
/// analyzer. Angles are stored reduced to [0°, 180°).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectiveSetting {
    pub h_a: f64,
    pub q_a: f64,
    pub h_b: f64,
    pub q_b: f64,
}

fn reduce_deg(x: f64) -> f64 {
    let r = x.rem_euclid(180.0);
    // rem_euclid can return 180.0 for tiny negative inputs
    if r >= 180.0 {
        0.0
    } else {
        r
    }
}

impl ProjectiveSetting {
    pub fn new(h_a: f64, q_a: f64, h_b: f64, q_b: f64) -> Self {
        Self {
            h_a: reduce_deg(h_a),
            q_a: reduce_deg(q_a),
            h_b: reduce_deg(h_b),
            q_b: reduce_deg(q_b),
        }
    }

    pub fn is_finite(&self) -> bool {
        [self.h_a, self.q_a, self.h_b, self.q_b]
            .iter()
            .all(|x| x.is_finite())
    }
}

/// State selected by a half-wave plate at `h` and a quarter-wave plate at `q`
/// followed by a vertical polarizer, as seen by the incoming photon.
///
/// Amplitudes are `a = [sin 2h + i sin 2(h−q)]/√2` on |H⟩ and
/// `b = [cos 2h − i cos 2(h−q)]/√2` on |V⟩, so that (45°,0°) → |H⟩,
/// (0°,0°) → |V⟩, (22.5°,0°) → |R⟩, (22.5°,45°) → |D⟩ and (22.5°,90°) → |L⟩.
pub fn projector_state(h_deg: f64, q_deg: f64) -> Ket2 {
    let h = h_deg.to_radians();
    let q = q_deg.to_radians();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let a = c((2.0 * h).sin(), (2.0 * (h - q)).sin()) * s;
    let b = c((2.0 * h).cos(), -(2.0 * (h - q)).cos()) * s;
    Ket2([a, b])
}

/// Product projector state for one tomographic setting.
pub fn two_qubit_projector(s: &ProjectiveSetting) -> Ket4 {
    projector_state(s.h_a, s.q_a).tensor(&projector_state(s.h_b, s.q_b))
}

/// Labels of the sixteen standard settings, in measurement order.
pub const STANDARD_LABELS: [&str; 16] = [
    "HH", "HV", "VV", "VH", "RH", "RV", "DV", "DH", "DR", "DD", "RD", "HD", "VD", "VL", "HL", "RL",
];

/// Waveplate angles (h, q) that select each single-photon basis state.
pub fn waveplates_for(label: char) -> Option<(f64, f64)> {
    match label {
        'H' => Some((45.0, 0.0)),
        'V' => Some((0.0, 0.0)),
        'R' => Some((22.5, 0.0)),
        'D' => Some((22.5, 45.0)),
        'L' => Some((22.5, 90.0)),
        _ => None,
    }
}

/// The sixteen settings HH, HV, VV, VH, RH, RV, DV, DH, DR, DD, RD, HD, VD,
/// VL, HL, RL. Consecutive settings differ by a single waveplate.
pub fn standard_settings() -> Vec<ProjectiveSetting> {
    STANDARD_LABELS
        .iter()
        .map(|lab| {
            let mut ch = lab.chars();
            let (ha, qa) = waveplates_for(ch.next().unwrap()).unwrap();
            let (hb, qb) = waveplates_for(ch.next().unwrap()).unwrap();
            ProjectiveSetting::new(ha, qa, hb, qb)
        })
        .collect()
}
