//! Random matrices for tests, fixtures and solver restarts.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::{ComplexMatrix, ZERO};

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Ginibre matrix with standard complex Gaussian entries.
pub fn random_rect<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    let entries = (0..rows * cols).map(|_| gaussian(rng)).collect();
    ComplexMatrix::from_row_major(rows, cols, entries).expect("gaussian entries are finite")
}

pub fn random_matrix<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix {
    random_rect(d, d, rng)
}

/// Haar-distributed unitary (QR of a Ginibre matrix with phase correction).
pub fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix {
    let z = random_matrix(d, rng);
    let qr = z.inner().clone().qr();
    let (q, r) = qr.unpack();
    let q = ComplexMatrix::from_inner(q);
    let phases: Vec<Complex64> = (0..d)
        .map(|k| {
            let x = r[(k, k)];
            if x.norm() > 0.0 {
                x / x.norm()
            } else {
                Complex64::new(1.0, 0.0)
            }
        })
        .collect();
    &q * &crate::linalg::diag_embed(&phases)
}

/// `A A^dagger` for Ginibre `A`.
pub fn random_psd<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix {
    let a = random_matrix(d, rng);
    (&a * &a.adjoint()).hermitian_part()
}

/// Density matrix from the induced measure of the given rank.
pub fn random_density<R: Rng + ?Sized>(d: usize, rank: usize, rng: &mut R) -> ComplexMatrix {
    let a = random_rect(d, rank.max(1), rng);
    let m = (&a * &a.adjoint()).hermitian_part();
    let t = m.trace().re;
    m.scale(1.0 / t)
}

pub fn random_unit_vector<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<Complex64> {
    let v: Vec<Complex64> = (0..d).map(|_| gaussian(rng)).collect();
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / n).collect()
}

/// Uniformly random phases in `[0, 2pi)`.
pub fn random_phases<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<f64> {
    (0..d).map(|_| rng.random::<f64>() * std::f64::consts::TAU).collect()
}

/// Diagonal matrix with complex Gaussian entries.
pub fn random_diagonal<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix {
    let v: Vec<Complex64> = (0..d).map(|_| gaussian(rng)).collect();
    crate::linalg::diag_embed(&v)
}

/// Permutation matrix `P` with `P|k> = |perm[k]>`.
pub fn permutation_matrix(perm: &[usize]) -> ComplexMatrix {
    let d = perm.len();
    let mut entries = vec![ZERO; d * d];
    for (k, &p) in perm.iter().enumerate() {
        entries[p * d + k] = Complex64::new(1.0, 0.0);
    }
    ComplexMatrix::from_row_major(d, d, entries).expect("finite")
}

/// Uniformly random permutation (Fisher-Yates).
pub fn random_permutation<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<usize> {
    let mut p: Vec<usize> = (0..d).collect();
    for i in (1..d).rev() {
        let j = rng.random_range(0..=i);
        p.swap(i, j);
    }
    p
}
