//! Dense complex linear algebra used by every other module.
//!
//! [`ComplexMatrix`] is a thin immutable wrapper over a `nalgebra` dense
//! matrix. Entries are addressed in row-major order at the API boundary,
//! which is also the order used by vectorization and by the file formats.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tolerance::{HERMITIAN_REL, PSD_CLIP};

/// Shorthand for the complex unit values used throughout.
pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// Dense complex matrix with finite entries.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    inner: DMatrix<Complex64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows(), self.cols())?;
        for r in 0..self.rows() {
            write!(f, "  ")?;
            for c in 0..self.cols() {
                let z = self[(r, c)];
                write!(f, "{:+.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl ComplexMatrix {
    /// Builds a matrix from row-major entries, rejecting wrong lengths and
    /// non-finite values.
    pub fn from_row_major(rows: usize, cols: usize, entries: Vec<Complex64>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::Shape(format!("{} entries cannot fill a {rows}x{cols} matrix", entries.len())));
        }
        if let Some(k) = entries.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::NonFinite { row: k / cols.max(1), col: k % cols.max(1) });
        }
        Ok(Self { inner: DMatrix::from_row_slice(rows, cols, &entries) })
    }

    /// Builds a matrix from real row-major entries.
    pub fn from_real(rows: usize, cols: usize, entries: &[f64]) -> Result<Self> {
        Self::from_row_major(rows, cols, entries.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> Complex64) -> Self {
        Self { inner: DMatrix::from_fn(rows, cols, f) }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { inner: DMatrix::zeros(rows, cols) }
    }

    pub fn identity(d: usize) -> Self {
        Self { inner: DMatrix::identity(d, d) }
    }

    /// Diagonal matrix with real entries.
    pub fn diag_real(values: &[f64]) -> Self {
        let v: Vec<Complex64> = values.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        diag_embed(&v)
    }

    /// Outer product `|x><y|`.
    pub fn outer(x: &[Complex64], y: &[Complex64]) -> Self {
        Self::from_fn(x.len(), y.len(), |i, j| x[i] * y[j].conj())
    }

    /// Column vector with the given entries.
    pub fn column(v: &[Complex64]) -> Self {
        Self::from_fn(v.len(), 1, |i, _| v[i])
    }

    pub(crate) fn from_inner(inner: DMatrix<Complex64>) -> Self {
        Self { inner }
    }

    pub(crate) fn inner(&self) -> &DMatrix<Complex64> {
        &self.inner
    }

    pub fn rows(&self) -> usize {
        self.inner.nrows()
    }

    pub fn cols(&self) -> usize {
        self.inner.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    /// Side length of a square matrix.
    pub fn dim(&self) -> usize {
        self.rows()
    }

    /// Entries in row-major order.
    pub fn to_row_major(&self) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.rows() * self.cols());
        for r in 0..self.rows() {
            for c in 0..self.cols() {
                out.push(self.inner[(r, c)]);
            }
        }
        out
    }

    pub fn set(&mut self, r: usize, c: usize, value: Complex64) {
        self.inner[(r, c)] = value;
    }

    /// Columns `idx` as a `rows x idx.len()` matrix.
    pub fn select_columns(&self, idx: &[usize]) -> Self {
        Self { inner: self.inner.select_columns(idx.iter()) }
    }

    pub fn column_vec(&self, c: usize) -> Vec<Complex64> {
        self.inner.column(c).iter().copied().collect()
    }

    pub fn adjoint(&self) -> Self {
        Self { inner: self.inner.adjoint() }
    }

    pub fn transpose(&self) -> Self {
        Self { inner: self.inner.transpose() }
    }

    pub fn conj(&self) -> Self {
        Self { inner: self.inner.map(|z| z.conj()) }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { inner: self.inner.map(|z| z * s) }
    }

    pub fn scale_c(&self, s: Complex64) -> Self {
        Self { inner: self.inner.map(|z| z * s) }
    }

    pub fn map(&self, f: impl FnMut(Complex64) -> Complex64) -> Self {
        Self { inner: self.inner.map(f) }
    }

    pub fn trace(&self) -> Complex64 {
        self.inner.trace()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.inner.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entrywise modulus.
    pub fn max_abs(&self) -> f64 {
        self.inner.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    /// Hilbert-Schmidt inner product `Tr(self^dagger other)`.
    pub fn hs_inner(&self, other: &Self) -> Complex64 {
        self.inner.iter().zip(other.inner.iter()).map(|(a, b)| a.conj() * b).sum()
    }

    /// Frobenius-norm distance from Hermiticity.
    pub fn hermiticity_defect(&self) -> f64 {
        (&self.inner - self.inner.adjoint()).norm()
    }

    /// Hermitian within `tol * max(1, ||A||_F)`.
    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.is_square() && self.hermiticity_defect() <= tol * self.frobenius_norm().max(1.0)
    }

    /// `(A + A^dagger) / 2`.
    pub fn hermitian_part(&self) -> Self {
        Self { inner: (&self.inner + self.inner.adjoint()) * Complex64::new(0.5, 0.0) }
    }

    /// `||A^dagger A - I||_F`.
    pub fn unitarity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows();
        (self.inner.adjoint() * &self.inner - DMatrix::<Complex64>::identity(n, n)).norm()
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_defect() <= tol
    }

    /// `||A A^dagger - A^dagger A||_F`.
    pub fn normality_defect(&self) -> f64 {
        let a = &self.inner;
        (a * a.adjoint() - a.adjoint() * a).norm()
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        let x = DVector::from_column_slice(v);
        (&self.inner * x).iter().copied().collect()
    }

    /// `<x| A |y>`.
    pub fn sandwich(&self, x: &[Complex64], y: &[Complex64]) -> Complex64 {
        let ay = self.apply(y);
        x.iter().zip(ay.iter()).map(|(a, b)| a.conj() * b).sum()
    }

    /// Principal submatrix on the given index set.
    pub fn principal_submatrix(&self, idx: &[usize]) -> Self {
        Self::from_fn(idx.len(), idx.len(), |i, j| self.inner[(idx[i], idx[j])])
    }

    /// Rank counting singular values above `tol`.
    pub fn rank(&self, tol: f64) -> usize {
        svd_values(self).into_iter().filter(|&s| s > tol).count()
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, idx: (usize, usize)) -> &Complex64 {
        &self.inner[idx]
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait<&ComplexMatrix> for &ComplexMatrix {
            type Output = ComplexMatrix;
            fn $method(self, rhs: &ComplexMatrix) -> ComplexMatrix {
                ComplexMatrix { inner: &self.inner $op &rhs.inner }
            }
        }
        impl $trait<ComplexMatrix> for ComplexMatrix {
            type Output = ComplexMatrix;
            fn $method(self, rhs: ComplexMatrix) -> ComplexMatrix {
                ComplexMatrix { inner: self.inner $op rhs.inner }
            }
        }
        impl $trait<&ComplexMatrix> for ComplexMatrix {
            type Output = ComplexMatrix;
            fn $method(self, rhs: &ComplexMatrix) -> ComplexMatrix {
                ComplexMatrix { inner: self.inner $op &rhs.inner }
            }
        }
    };
}
binop!(Add, add, +);
binop!(Sub, sub, -);
binop!(Mul, mul, *);

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        ComplexMatrix { inner: -&self.inner }
    }
}

/// Eigen-decomposition of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct HermitianEigenSystem {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Unitary; column `k` pairs with `eigenvalues[k]`.
    pub eigenvectors: ComplexMatrix,
}

impl HermitianEigenSystem {
    pub fn eigenvector(&self, k: usize) -> Vec<Complex64> {
        self.eigenvectors.column_vec(k)
    }

    /// `V f(diag(lambda)) V^dagger`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let v = self.eigenvectors.inner();
        let n = self.eigenvalues.len();
        let mut scaled = v.clone();
        for k in 0..n {
            let s = f(self.eigenvalues[k]);
            scaled.column_mut(k).scale_mut(s);
        }
        ComplexMatrix::from_inner(scaled * v.adjoint())
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }
}

fn require_square(a: &ComplexMatrix) -> Result<()> {
    if a.is_square() {
        Ok(())
    } else {
        Err(Error::NotSquare { rows: a.rows(), cols: a.cols() })
    }
}

/// Eigen-decomposition of a (numerically) Hermitian matrix. The input is
/// symmetrized before decomposition.
pub fn hermitian_eig(a: &ComplexMatrix) -> Result<HermitianEigenSystem> {
    require_square(a)?;
    let defect = a.hermiticity_defect();
    if defect > HERMITIAN_REL * a.frobenius_norm().max(1.0) {
        return Err(Error::NotHermitian(defect));
    }
    Ok(hermitian_eig_unchecked(&a.hermitian_part()))
}

/// Decomposition of a matrix already known to be Hermitian.
pub(crate) fn hermitian_eig_unchecked(a: &ComplexMatrix) -> HermitianEigenSystem {
    let n = a.rows();
    if n == 0 {
        return HermitianEigenSystem { eigenvalues: vec![], eigenvectors: ComplexMatrix::zeros(0, 0) };
    }
    let eig = nalgebra::SymmetricEigen::new(a.inner.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let eigenvectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    HermitianEigenSystem { eigenvalues, eigenvectors: ComplexMatrix::from_inner(eigenvectors) }
}

/// Smallest eigenvalue and its unit eigenvector of a Hermitian matrix.
pub(crate) fn min_eigenpair(a: &ComplexMatrix) -> (f64, Vec<Complex64>) {
    let sys = hermitian_eig_unchecked(a);
    (sys.eigenvalues[0], sys.eigenvector(0))
}

/// Singular values, descending.
pub fn svd_values(a: &ComplexMatrix) -> Vec<f64> {
    if a.rows() == 0 || a.cols() == 0 {
        return vec![];
    }
    let mut s: Vec<f64> = a.inner.clone().singular_values().iter().map(|x| x.max(0.0)).collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// Sum of singular values.
pub fn trace_norm(a: &ComplexMatrix) -> Result<f64> {
    require_square(a)?;
    Ok(svd_values(a).iter().sum())
}

/// Largest singular value.
pub fn operator_norm(a: &ComplexMatrix) -> f64 {
    svd_values(a).first().copied().unwrap_or(0.0)
}

/// `Tr_1` on the tensor order `(system_1 ⊗ system_2)`.
pub fn partial_trace_first(a: &ComplexMatrix, dims: (usize, usize)) -> Result<ComplexMatrix> {
    let (d1, d2) = dims;
    require_square(a)?;
    if d1 * d2 != a.rows() {
        return Err(Error::Shape(format!("size {} does not factor as {d1}x{d2}", a.rows())));
    }
    Ok(ComplexMatrix::from_fn(d2, d2, |b, c| (0..d1).map(|k| a[(k * d2 + b, k * d2 + c)]).sum()))
}

/// `Tr_2` on the tensor order `(system_1 ⊗ system_2)`.
pub fn partial_trace_second(a: &ComplexMatrix, dims: (usize, usize)) -> Result<ComplexMatrix> {
    let (d1, d2) = dims;
    require_square(a)?;
    if d1 * d2 != a.rows() {
        return Err(Error::Shape(format!("size {} does not factor as {d1}x{d2}", a.rows())));
    }
    Ok(ComplexMatrix::from_fn(d1, d1, |b, c| (0..d2).map(|k| a[(b * d2 + k, c * d2 + k)]).sum()))
}

/// Row-major vectorization: `|i><j|` maps to the basis vector `i*cols + j`.
pub fn vectorize(x: &ComplexMatrix) -> Vec<Complex64> {
    x.to_row_major()
}

/// Inverse of [`vectorize`].
pub fn unvectorize(v: &[Complex64], rows: usize, cols: usize) -> Result<ComplexMatrix> {
    ComplexMatrix::from_row_major(rows, cols, v.to_vec())
}

/// Kronecker product `A ⊗ B`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix::from_inner(a.inner.kronecker(&b.inner))
}

/// Diagonal of a square matrix.
pub fn diag_extract(c: &ComplexMatrix) -> Vec<Complex64> {
    (0..c.rows().min(c.cols())).map(|i| c[(i, i)]).collect()
}

/// Diagonal matrix with the given entries; adjoint of [`diag_extract`].
pub fn diag_embed(v: &[Complex64]) -> ComplexMatrix {
    ComplexMatrix::from_fn(v.len(), v.len(), |i, j| if i == j { v[i] } else { ZERO })
}

/// Diagonal unitary `diag(e^{i phi_k})`.
pub fn phase_diag(phases: &[f64]) -> ComplexMatrix {
    let v: Vec<Complex64> = phases.iter().map(|&p| Complex64::from_polar(1.0, p)).collect();
    diag_embed(&v)
}

/// Principal square root of a positive semidefinite matrix; eigenvalues
/// above `-PSD_CLIP` are clipped to zero.
pub fn matrix_sqrt_psd(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let sys = hermitian_eig(a)?;
    if sys.min() < -PSD_CLIP {
        return Err(Error::NotPsd(sys.min()));
    }
    Ok(sys.reconstruct_with(|x| x.max(0.0).sqrt()).hermitian_part())
}

/// Matrix absolute value `|A| = sqrt(A^dagger A)` of a Hermitian matrix.
pub fn hermitian_abs(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    Ok(hermitian_eig(a)?.reconstruct_with(f64::abs).hermitian_part())
}

fn eig_residual(a: &ComplexMatrix, values: &[Complex64], vectors: &DMatrix<Complex64>) -> f64 {
    let mut r = &a.inner * vectors;
    for (k, l) in values.iter().enumerate() {
        r.column_mut(k).axpy(-*l, &vectors.column(k), Complex64::new(1.0, 0.0));
    }
    r.norm()
}

/// Eigenvalues and orthonormal eigenvectors of a normal matrix.
///
/// Uses the complex Schur form with a capped iteration count. nalgebra's
/// Schur iteration can stall on some structured unitaries, so the fallback
/// diagonalizes Hermitian parts of `e^{-it} A`, which share the
/// eigenvectors of a normal `A`, and reads eigenvalues off as Rayleigh
/// quotients. The decomposition with the smallest residual is returned.
pub fn normal_eig(a: &ComplexMatrix) -> Result<(Vec<Complex64>, ComplexMatrix)> {
    require_square(a)?;
    let n = a.rows();
    if n == 0 {
        return Ok((vec![], ComplexMatrix::zeros(0, 0)));
    }
    let tol = 1e-12 * a.frobenius_norm().max(1.0);
    let mut best: Option<(f64, Vec<Complex64>, DMatrix<Complex64>)> = None;
    if let Some(schur) = nalgebra::Schur::try_new(a.inner.clone(), f64::EPSILON, 30 * n) {
        let (q, t) = schur.unpack();
        let values: Vec<Complex64> = (0..n).map(|k| t[(k, k)]).collect();
        let r = eig_residual(a, &values, &q);
        if r <= tol {
            return Ok((values, ComplexMatrix::from_inner(q)));
        }
        best = Some((r, values, q));
    }
    for t in [0.618_033_988_749_894_9, 2.236_067_977_499_79, 1.324_717_957_244_746, 0.3] {
        let h = ComplexMatrix::from_inner(&a.inner * Complex64::from_polar(1.0, -t)).hermitian_part();
        let q = hermitian_eig_unchecked(&h).eigenvectors.inner;
        let values: Vec<Complex64> = (0..n).map(|k| (q.column(k).adjoint() * &a.inner * q.column(k))[(0, 0)]).collect();
        let r = eig_residual(a, &values, &q);
        if best.as_ref().is_none_or(|b| r < b.0) {
            best = Some((r, values, q));
        }
        if r <= tol {
            break;
        }
    }
    let (_, values, q) = best.expect("at least one decomposition");
    Ok((values, ComplexMatrix::from_inner(q)))
}

/// Eigenvalues of a normal matrix.
pub fn normal_eigenvalues(a: &ComplexMatrix) -> Result<Vec<Complex64>> {
    Ok(normal_eig(a)?.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{haar_unitary, random_matrix, random_psd};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn normal_eig_handles_degenerate_reflections() {
        // 1 - 2|x><x| with a uniform axis, times diagonal phases
        for d in 2..=6 {
            let x = vec![c(1.0 / (d as f64).sqrt(), 0.0); d];
            let u = ComplexMatrix::identity(d) - ComplexMatrix::outer(&x, &x).scale(2.0);
            for k in 0..16 {
                let phases: Vec<f64> = (0..d).map(|j| if j == 0 { k as f64 * 0.4 } else { 0.0 }).collect();
                let w = &u * &phase_diag(&phases);
                let (vals, vecs) = normal_eig(&w).unwrap();
                let lam = diag_embed(&vals);
                let back = &(&vecs * &lam) * &vecs.adjoint();
                assert!((&back - &w).max_abs() < 1e-10, "d {d} k {k}");
                assert!(vecs.is_unitary(1e-10));
            }
        }
    }

    #[test]
    fn eig_identity_and_diagonal() {
        let sys = hermitian_eig(&ComplexMatrix::identity(2)).unwrap();
        assert_eq!(sys.eigenvalues, vec![1.0, 1.0]);
        assert!((sys.eigenvectors.clone() - ComplexMatrix::identity(2)).frobenius_norm() < 1e-12);

        let sys = hermitian_eig(&ComplexMatrix::diag_real(&[3.0, -1.0])).unwrap();
        assert!((sys.eigenvalues[0] + 1.0).abs() < 1e-14);
        assert!((sys.eigenvalues[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn eig_pauli_x() {
        let x = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
        let sys = hermitian_eig(&x).unwrap();
        assert!((sys.eigenvalues[0] + 1.0).abs() < 1e-14);
        assert!((sys.eigenvalues[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn eig_rejects_bad_input() {
        let r = ComplexMatrix::zeros(2, 3);
        assert!(matches!(hermitian_eig(&r), Err(Error::NotSquare { .. })));
        let nh = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(hermitian_eig(&nh), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn eig_reconstruction_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for d in 1..=7 {
            let m = random_matrix(d, &mut rng);
            let h = m.hermitian_part();
            let sys = hermitian_eig(&h).unwrap();
            let rec = sys.reconstruct_with(|x| x);
            assert!((rec - &h).frobenius_norm() <= 1e-10 * h.frobenius_norm());
            assert!(sys.eigenvectors.unitarity_defect() < 1e-10);
            assert!(sys.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn svd_examples() {
        assert_eq!(svd_values(&ComplexMatrix::identity(3)), vec![1.0, 1.0, 1.0]);
        assert_eq!(svd_values(&ComplexMatrix::zeros(1, 1)), vec![0.0]);
        let s = 1.0 / 2f64.sqrt();
        let a = ComplexMatrix::from_real(2, 2, &[s, s, s, s]).unwrap();
        let v = svd_values(&a);
        assert!((v[0] - 2f64.sqrt()).abs() < 1e-14);
        assert!(v[1].abs() < 1e-14);
        assert_eq!(svd_values(&ComplexMatrix::zeros(2, 5)).len(), 2);
    }

    #[test]
    fn norm_examples() {
        assert!((trace_norm(&ComplexMatrix::diag_real(&[1.0, -1.0])).unwrap() - 2.0).abs() < 1e-14);
        assert_eq!(trace_norm(&ComplexMatrix::zeros(3, 3)).unwrap(), 0.0);
        assert!(trace_norm(&ComplexMatrix::zeros(2, 3)).is_err());
        assert!((operator_norm(&ComplexMatrix::identity(4)) - 1.0).abs() < 1e-14);
        assert!((operator_norm(&ComplexMatrix::diag_real(&[0.3, -0.8])) - 0.8).abs() < 1e-14);
        let x = [c(0.6, 0.0), c(0.0, 0.8)];
        let y = [c(0.0, 1.0), c(0.0, 0.0)];
        assert!((operator_norm(&ComplexMatrix::outer(&x, &y)) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn unitary_norms() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for d in 1..=6 {
            let u = haar_unitary(d, &mut rng);
            assert!((trace_norm(&u).unwrap() - d as f64).abs() < 1e-10);
            assert!((operator_norm(&u) - 1.0).abs() < 1e-10);
            assert!(svd_values(&u).iter().all(|s| (s - 1.0).abs() < 1e-10));
        }
    }

    #[test]
    fn partial_trace_examples() {
        let r = partial_trace_first(&ComplexMatrix::identity(4), (2, 2)).unwrap();
        assert!((r - ComplexMatrix::identity(2).scale(2.0)).frobenius_norm() < 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_psd(3, &mut rng);
        let a = a.scale(1.0 / a.trace().re);
        let b = random_matrix(2, &mut rng);
        let r = partial_trace_first(&kron(&a, &b), (3, 2)).unwrap();
        assert!((r - &b).frobenius_norm() < 1e-12);

        let s = 0.5;
        let bell =
            ComplexMatrix::from_real(4, 4, &[s, 0., 0., s, 0., 0., 0., 0., 0., 0., 0., 0., s, 0., 0., s]).unwrap();
        let r = partial_trace_first(&bell, (2, 2)).unwrap();
        assert!((r - ComplexMatrix::identity(2).scale(0.5)).frobenius_norm() < 1e-15);
        assert!(partial_trace_first(&ComplexMatrix::identity(5), (2, 2)).is_err());
    }

    #[test]
    fn partial_trace_is_linear_and_trace_preserving() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let a = random_matrix(6, &mut rng);
            let b = random_matrix(6, &mut rng);
            let alpha = c(0.3, -1.2);
            let lhs = partial_trace_first(&(a.scale_c(alpha) + &b), (2, 3)).unwrap();
            let rhs =
                partial_trace_first(&a, (2, 3)).unwrap().scale_c(alpha) + partial_trace_first(&b, (2, 3)).unwrap();
            assert!((lhs - rhs).frobenius_norm() < 1e-12);
            let t = partial_trace_first(&a, (3, 2)).unwrap().trace();
            assert!((t - a.trace()).norm() < 1e-12);
        }
    }

    #[test]
    fn vectorization_examples() {
        let mut e = ComplexMatrix::zeros(2, 3);
        e.inner[(1, 2)] = ONE;
        let v = vectorize(&e);
        assert_eq!(v.iter().position(|z| *z == ONE), Some(5));
        let k = kron(&ComplexMatrix::identity(2), &ComplexMatrix::identity(3));
        assert!((k - ComplexMatrix::identity(6)).frobenius_norm() == 0.0);
        assert_eq!(unvectorize(&v, 2, 3).unwrap(), e);
    }

    #[test]
    fn vectorization_identity_random_triples() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for t in 0..100 {
            let (m, n) = (1 + t % 3, 1 + (t / 3) % 3);
            let (p, q) = (1 + (t / 9) % 3, 2);
            let a = crate::random::random_rect(p, m, &mut rng);
            let b = crate::random::random_rect(q, n, &mut rng);
            let x = crate::random::random_rect(m, n, &mut rng);
            let lhs = kron(&a, &b).apply(&vectorize(&x));
            let rhs = vectorize(&(&(&a * &x) * &b.transpose()));
            let err: f64 = lhs.iter().zip(&rhs).map(|(l, r)| (l - r).norm()).fold(0.0, f64::max);
            assert!(err <= 1e-12, "err {err}");
        }
    }

    #[test]
    fn diag_pair_is_adjoint() {
        assert_eq!(diag_extract(&ComplexMatrix::identity(2)), vec![ONE, ONE]);
        assert_eq!(diag_embed(&[ONE, c(2.0, 0.0)]), ComplexMatrix::diag_real(&[1.0, 2.0]));
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for d in 1..6 {
            let m = random_matrix(d, &mut rng);
            let v: Vec<Complex64> = diag_extract(&random_matrix(d, &mut rng));
            let lhs: Complex64 = diag_extract(&m).iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            let rhs = m.hs_inner(&diag_embed(&v));
            assert!((lhs - rhs).norm() < 1e-12);
        }
    }

    #[test]
    fn sqrt_examples() {
        let r = matrix_sqrt_psd(&ComplexMatrix::identity(3)).unwrap();
        assert!((r - ComplexMatrix::identity(3)).frobenius_norm() < 1e-14);
        let r = matrix_sqrt_psd(&ComplexMatrix::diag_real(&[4.0, 9.0])).unwrap();
        assert!((r - ComplexMatrix::diag_real(&[2.0, 3.0])).frobenius_norm() < 1e-13);
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for d in 1..7 {
            let a = random_psd(d, &mut rng);
            let s = matrix_sqrt_psd(&a).unwrap();
            assert!((&s * &s - &a).frobenius_norm() < 1e-8);
            assert!(hermitian_eig(&s).unwrap().min() > -1e-10);
        }
        assert!(matches!(matrix_sqrt_psd(&ComplexMatrix::diag_real(&[1.0, -0.1])), Err(Error::NotPsd(_))));
        // tiny negative eigenvalues are clipped
        assert!(matrix_sqrt_psd(&ComplexMatrix::diag_real(&[1.0, -1e-12])).is_ok());
    }

    #[test]
    fn schur_eigen_of_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for d in 1..7 {
            let u = haar_unitary(d, &mut rng);
            let (vals, vecs) = normal_eig(&u).unwrap();
            assert!(vecs.unitarity_defect() < 1e-10);
            for (k, lam) in vals.iter().enumerate() {
                assert!((lam.norm() - 1.0).abs() < 1e-10);
                let v = vecs.column_vec(k);
                let uv = u.apply(&v);
                let err: f64 = uv.iter().zip(&v).map(|(a, b)| (a - lam * b).norm()).sum();
                assert!(err < 1e-9);
            }
        }
    }
}
