#![allow(dead_code)]

use biphoton::qmatrix::{ComplexMatrix, DensityMatrix};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn normal_c(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// `G G† / tr` with `G` a Gaussian 4×rank matrix.
pub fn random_rho(rng: &mut ChaCha8Rng, rank: usize) -> DensityMatrix {
    let g: Vec<Complex64> = (0..4 * rank).map(|_| normal_c(rng)).collect();
    let mut m = ComplexMatrix::zeros(4);
    for i in 0..4 {
        for j in 0..4 {
            m[(i, j)] = (0..rank)
                .map(|k| g[i * rank + k] * g[j * rank + k].conj())
                .sum();
        }
    }
    DensityMatrix::normalized(m).unwrap()
}

pub fn random_pure(rng: &mut ChaCha8Rng) -> DensityMatrix {
    let mut psi = [Complex64::new(0.0, 0.0); 4];
    for z in psi.iter_mut() {
        *z = normal_c(rng);
    }
    let n = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for z in psi.iter_mut() {
        *z /= n;
    }
    DensityMatrix::pure(&psi)
}

/// Haar-distributed single-qubit unitary up to phase.
pub fn random_unitary(rng: &mut ChaCha8Rng) -> ComplexMatrix {
    let a = normal_c(rng);
    let b = normal_c(rng);
    let n = (a.norm_sqr() + b.norm_sqr()).sqrt();
    let (a, b) = (a / n, b / n);
    ComplexMatrix::new(2, vec![a, -b.conj(), b, a.conj()]).unwrap()
}

pub fn random_qubit(rng: &mut ChaCha8Rng) -> ComplexMatrix {
    let g: Vec<Complex64> = (0..4).map(|_| normal_c(rng)).collect();
    let m = ComplexMatrix::new(2, g).unwrap();
    let p = &m * &m.adjoint();
    let tr = p.trace().re;
    p.scale(1.0 / tr)
}
