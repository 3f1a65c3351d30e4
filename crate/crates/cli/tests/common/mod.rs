#![allow(dead_code)]

use std::path::PathBuf;

use biphoton::qmatrix::{ComplexMatrix, DensityMatrix};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name)
}

fn gaussian_ish(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

/// `G G† / tr` with `G` a random 4×rank matrix.
pub fn random_rho(rng: &mut ChaCha8Rng, rank: usize) -> DensityMatrix {
    let g: Vec<Complex64> = (0..4 * rank).map(|_| gaussian_ish(rng)).collect();
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

/// Random SU(2) element.
pub fn random_unitary(rng: &mut ChaCha8Rng) -> ComplexMatrix {
    let a = gaussian_ish(rng);
    let b = gaussian_ish(rng);
    let n = (a.norm_sqr() + b.norm_sqr()).sqrt();
    let (a, b) = (a / n, b / n);
    ComplexMatrix::new(2, vec![a, -b.conj(), b, a.conj()]).unwrap()
}
