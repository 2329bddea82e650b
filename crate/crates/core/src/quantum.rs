//! States, measurements and Choi matrices.
//!
//! Tensor factors are ordered `(output/label ⊗ input)`, so the Choi matrix
//! of a measure-and-prepare channel is block diagonal with the transposed
//! effects as blocks and `Tr_1` of a trace-preserving Choi matrix is the
//! identity. Outcome labels are the 0-based column indices of `U`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, hermitian_eig, kron, partial_trace_first, trace_norm, ComplexMatrix, ONE, ZERO};
use crate::tolerance::{RANK, STATE};

/// Unit-trace positive semidefinite matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity, positivity and unit trace (all within 1e-8).
    /// The stored matrix is the Hermitian part of the input.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::NotSquare { rows: matrix.rows(), cols: matrix.cols() });
        }
        let defect = matrix.hermiticity_defect();
        if defect > STATE {
            return Err(Error::NotHermitian(defect));
        }
        let matrix = matrix.hermitian_part();
        let t = matrix.trace().re;
        if (t - 1.0).abs() > STATE {
            return Err(Error::InvalidTrace(t));
        }
        let min = hermitian_eig(&matrix)?.min();
        if min < -STATE {
            return Err(Error::NotPsd(min));
        }
        Ok(Self { matrix })
    }

    /// Rescales a nonzero PSD matrix to unit trace.
    pub fn normalized(matrix: ComplexMatrix) -> Result<Self> {
        let t = matrix.trace().re;
        if t.is_nan() || t <= 0.0 {
            return Err(Error::InvalidTrace(t));
        }
        Self::new(matrix.scale(1.0 / t))
    }

    /// `|psi><psi|` for a (not necessarily normalized) nonzero vector.
    pub fn pure(psi: &[Complex64]) -> Result<Self> {
        Self::normalized(ComplexMatrix::outer(psi, psi))
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self { matrix: ComplexMatrix::identity(d).scale(1.0 / d as f64) }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    /// `rho^T` (equivalently the entrywise conjugate).
    pub fn transpose(&self) -> Self {
        Self { matrix: self.matrix.transpose() }
    }

    /// Number of eigenvalues above 1e-10.
    pub fn rank(&self) -> usize {
        linalg::hermitian_eig_unchecked(&self.matrix).eigenvalues.iter().filter(|&&x| x > RANK).count()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        linalg::hermitian_eig_unchecked(&self.matrix).min()
    }
}

/// Positive operator-valued measure.
#[derive(Clone, Debug)]
pub struct Povm {
    effects: Vec<ComplexMatrix>,
}

impl Povm {
    /// Validates that each effect is PSD and that they sum to the identity.
    pub fn new(effects: Vec<ComplexMatrix>) -> Result<Self> {
        let d = effects
            .first()
            .map(|e| e.rows())
            .ok_or_else(|| Error::InvalidArgument("a POVM needs at least one effect".into()))?;
        let mut total = ComplexMatrix::zeros(d, d);
        for e in &effects {
            if !e.is_square() {
                return Err(Error::NotSquare { rows: e.rows(), cols: e.cols() });
            }
            if e.rows() != d {
                return Err(Error::DimensionMismatch(e.rows(), d));
            }
            let defect = e.hermiticity_defect();
            if defect > STATE {
                return Err(Error::NotHermitian(defect));
            }
            let min = linalg::hermitian_eig_unchecked(&e.hermitian_part()).min();
            if min < -STATE {
                return Err(Error::NotPsd(min));
            }
            total = total + e;
        }
        let defect = (total - ComplexMatrix::identity(d)).frobenius_norm();
        if defect > STATE {
            return Err(Error::IncompletePovm(defect));
        }
        Ok(Self { effects })
    }

    pub fn effects(&self) -> &[ComplexMatrix] {
        &self.effects
    }

    pub fn dim(&self) -> usize {
        self.effects[0].rows()
    }

    pub fn outcomes(&self) -> usize {
        self.effects.len()
    }

    /// Outcome probabilities `Tr(rho T_i)`.
    pub fn probabilities(&self, rho: &DensityMatrix) -> Result<Vec<f64>> {
        if rho.dim() != self.dim() {
            return Err(Error::DimensionMismatch(rho.dim(), self.dim()));
        }
        Ok(self.effects.iter().map(|t| (rho.matrix() * t).trace().re).collect())
    }
}

/// Projective measurement given by the columns of a unitary.
#[derive(Clone, Debug, PartialEq)]
pub struct VonNeumannMeasurement {
    unitary: ComplexMatrix,
}

impl VonNeumannMeasurement {
    pub fn new(unitary: ComplexMatrix) -> Result<Self> {
        if !unitary.is_square() {
            return Err(Error::NotSquare { rows: unitary.rows(), cols: unitary.cols() });
        }
        let defect = unitary.unitarity_defect();
        if defect > STATE {
            return Err(Error::NotUnitary(defect));
        }
        Ok(Self { unitary })
    }

    /// Measurement in the computational basis.
    pub fn computational(d: usize) -> Self {
        Self { unitary: ComplexMatrix::identity(d) }
    }

    pub fn unitary(&self) -> &ComplexMatrix {
        &self.unitary
    }

    pub fn dim(&self) -> usize {
        self.unitary.rows()
    }

    /// The `i`-th measurement vector `|u_i>`.
    pub fn vector(&self, i: usize) -> Vec<Complex64> {
        self.unitary.column_vec(i)
    }

    /// Effects `|u_i><u_i|`.
    pub fn effects(&self) -> Vec<ComplexMatrix> {
        (0..self.dim())
            .map(|i| {
                let u = self.vector(i);
                ComplexMatrix::outer(&u, &u)
            })
            .collect()
    }

    pub fn to_povm(&self) -> Povm {
        Povm { effects: self.effects() }
    }
}

/// Choi matrix `J(Phi) = sum_ij Phi(|i><j|) ⊗ |i><j|` with `dims = (d_out, d_in)`.
#[derive(Clone, Debug)]
pub struct ChoiMatrix {
    pub matrix: ComplexMatrix,
    pub dims: (usize, usize),
}

impl ChoiMatrix {
    pub fn difference(&self, other: &ChoiMatrix) -> Result<ChoiMatrix> {
        if self.dims != other.dims {
            return Err(Error::Shape(format!("Choi dims {:?} vs {:?}", self.dims, other.dims)));
        }
        Ok(ChoiMatrix { matrix: &self.matrix - &other.matrix, dims: self.dims })
    }
}

/// Outcome of [`channel_property_checks`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ChannelFlags {
    pub hermiticity_preserving: bool,
    pub completely_positive: bool,
    pub trace_preserving: bool,
}

/// `rho -> sum_i Tr(rho T_i) |i><i|`.
pub fn apply_measure_and_prepare(m: &Povm, rho: &DensityMatrix) -> Result<DensityMatrix> {
    let p = m.probabilities(rho)?;
    let v: Vec<Complex64> = p.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    DensityMatrix::new(linalg::diag_embed(&v))
}

/// `J(T) = sum_i |i><i| ⊗ T_i^T`.
pub fn choi_of_povm(m: &Povm) -> ChoiMatrix {
    let n = m.outcomes();
    let d = m.dim();
    let mut j = ComplexMatrix::zeros(n * d, n * d);
    for (i, t) in m.effects().iter().enumerate() {
        let mut label = vec![ZERO; n];
        label[i] = ONE;
        j = j + kron(&linalg::diag_embed(&label), &t.transpose());
    }
    ChoiMatrix { matrix: j, dims: (n, d) }
}

pub fn choi_of_measurement(m: &VonNeumannMeasurement) -> ChoiMatrix {
    choi_of_povm(&m.to_povm())
}

/// `J(Phi_U) = |U>><<U|` for `Phi_U(rho) = U rho U^dagger`.
pub fn choi_of_unitary(u: &ComplexMatrix) -> Result<ChoiMatrix> {
    if !u.is_square() {
        return Err(Error::NotSquare { rows: u.rows(), cols: u.cols() });
    }
    let defect = u.unitarity_defect();
    if defect > STATE {
        return Err(Error::NotUnitary(defect));
    }
    let v = linalg::vectorize(u);
    Ok(ChoiMatrix { matrix: ComplexMatrix::outer(&v, &v), dims: (u.rows(), u.rows()) })
}

/// Hermiticity-preserving / completely positive / trace-preserving flags
/// from the Choi matrix, each at tolerance 1e-8.
pub fn channel_property_checks(j: &ChoiMatrix) -> ChannelFlags {
    let m = &j.matrix;
    let hermiticity_preserving = m.is_square() && m.hermiticity_defect() <= STATE;
    let completely_positive =
        hermiticity_preserving && linalg::hermitian_eig_unchecked(&m.hermitian_part()).min() >= -STATE;
    let trace_preserving = partial_trace_first(m, j.dims)
        .map(|t| (t - ComplexMatrix::identity(j.dims.1)).frobenius_norm() <= STATE)
        .unwrap_or(false);
    ChannelFlags { hermiticity_preserving, completely_positive, trace_preserving }
}

fn check_probability_vector(p: &[f64]) -> Result<()> {
    if let Some(k) = p.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite { row: k, col: 0 });
    }
    if let Some(&x) = p.iter().find(|&&x| x < -1e-10) {
        return Err(Error::InvalidArgument(format!("negative probability {x}")));
    }
    let s: f64 = p.iter().sum();
    if (s - 1.0).abs() > STATE {
        return Err(Error::InvalidArgument(format!("probabilities sum to {s}")));
    }
    Ok(())
}

/// `sum_i |p_i - q_i|`.
pub fn total_variation(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch(p.len(), q.len()));
    }
    check_probability_vector(p)?;
    check_probability_vector(q)?;
    Ok(p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum())
}

/// Optimal success probability for discriminating two states,
/// `1/2 + ||rho - sigma||_1 / 4`.
pub fn helstrom_state_bound(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch(rho.dim(), sigma.dim()));
    }
    Ok(0.5 + 0.25 * trace_norm(&(rho.matrix() - sigma.matrix()))?)
}

/// Minimal purification of a state.
#[derive(Clone, Debug)]
pub struct Purification {
    /// Unit vector on `C^d ⊗ C^k`, index `a*k + j`.
    pub vector: Vec<Complex64>,
    pub system_dim: usize,
    /// Equals the Schmidt rank `k`.
    pub ancilla_dim: usize,
}

impl Purification {
    pub fn schmidt_rank(&self) -> usize {
        self.ancilla_dim
    }

    /// Reduced state on the first factor.
    pub fn reduced_system(&self) -> ComplexMatrix {
        let (d, k) = (self.system_dim, self.ancilla_dim);
        ComplexMatrix::from_fn(d, d, |a, b| {
            (0..k).map(|j| self.vector[a * k + j] * self.vector[b * k + j].conj()).sum()
        })
    }
}

/// `sum_j sqrt(lambda_j) |e_j> ⊗ |j>` over eigenvalues above 1e-10.
pub fn purify(rho: &DensityMatrix) -> Purification {
    let sys = linalg::hermitian_eig_unchecked(rho.matrix());
    let d = rho.dim();
    let kept: Vec<usize> = (0..d).rev().filter(|&k| sys.eigenvalues[k] > RANK).collect();
    let k = kept.len().max(1);
    let mut vector = vec![ZERO; d * k];
    for (j, &col) in kept.iter().enumerate() {
        let w = sys.eigenvalues[col].sqrt();
        for a in 0..d {
            vector[a * k + j] = sys.eigenvectors[(a, col)] * w;
        }
    }
    let norm = vector.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm > 0.0 {
        vector.iter_mut().for_each(|z| *z /= norm);
    }
    Purification { vector, system_dim: d, ancilla_dim: k }
}
