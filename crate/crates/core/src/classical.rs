//! Discrimination without entanglement.
//!
//! Feeding a single pure state into one of two measurements and comparing
//! the outcome distributions succeeds with probability at most
//! `1/2 + 1/2 max_Δ ||sum_{i in Δ} (S_i - T_i)||`. For a projective pair
//! `(P_U, P_1)` this equals `1/2 + 1/2 sqrt(1 - min_Δ sigma_min(U_Δ)^2)`
//! over principal submatrices `U_Δ`.
//!
//! Both scans are exhaustive over all subsets (the subset count is capped)
//! and exploit `value(Δ) = value(Δ^c)`, which holds because both effect
//! families sum to the identity. Ties are broken by smallest cardinality,
//! then lexicographic order of the index list.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{self, svd_values, ComplexMatrix};
use crate::quantum::{Povm, VonNeumannMeasurement};
use crate::tolerance::{RANK_DEFICIENT, SUBSET_CAP};

const TIE: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct SubsetScanResult {
    pub best_subset: Vec<usize>,
    /// `||sum_{i in Δ} (S_i - T_i)||` at `best_subset`.
    pub best_value: f64,
    /// Unit vector attaining `sum_i |<psi|(S_i - T_i)|psi>| = 2 best_value`.
    pub optimal_state: Vec<Complex64>,
}

#[derive(Clone, Debug)]
pub struct ClassicalBound {
    pub scan: SubsetScanResult,
    pub probability_bound: f64,
}

#[derive(Clone, Debug)]
pub struct ProjectiveClassicalBound {
    pub scan: SubsetScanResult,
    /// `sigma_min(U_Δ)` at `scan.best_subset`.
    pub min_singular_value: f64,
    pub probability_bound: f64,
}

fn mask_indices(mask: u64, n: usize) -> Vec<usize> {
    (0..n).filter(|&i| mask >> i & 1 == 1).collect()
}

/// Strictly better under the (cardinality, lexicographic) tie-break.
fn precedes(a: u64, b: u64, n: usize) -> bool {
    let (ca, cb) = (a.count_ones(), b.count_ones());
    if ca != cb {
        return ca < cb;
    }
    mask_indices(a, n) < mask_indices(b, n)
}

fn check_cap(n: usize, cap: usize) -> Result<()> {
    if n > cap || n > 62 {
        Err(Error::SubsetCapExceeded { n, cap })
    } else {
        Ok(())
    }
}

/// Evaluates `value` on every nonempty subset (using complement symmetry)
/// and returns the tie-broken optimum.
fn scan_subsets<F>(n: usize, value: F, maximize: bool) -> (u64, f64)
where
    F: Fn(u64) -> f64 + Sync,
{
    let full: u64 = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    if n == 1 {
        return (1, value(1));
    }
    // masks with the top index excluded; their complements carry the same value
    let half = 1u64 << (n - 1);
    let values: Vec<f64> = (1..half).into_par_iter().map(&value).collect();
    let full_value = value(full);
    let extreme = values.iter().copied().chain(std::iter::once(full_value)).fold(
        if maximize { f64::NEG_INFINITY } else { f64::INFINITY },
        |m, v| if maximize { m.max(v) } else { m.min(v) },
    );
    let tol = TIE * extreme.abs().max(1.0);
    let ties = |v: f64| if maximize { v >= extreme - tol } else { v <= extreme + tol };
    let mut best: Option<(u64, f64)> = None;
    let mut offer = |m: u64, v: f64| {
        if ties(v) && best.is_none_or(|(b, _)| precedes(m, b, n)) {
            best = Some((m, v));
        }
    };
    for (k, &v) in values.iter().enumerate() {
        let m = k as u64 + 1;
        offer(m, v);
        offer(full & !m, v);
    }
    offer(full, full_value);
    best.expect("at least one subset")
}

/// Eigenvector of the Hermitian `m` for the eigenvalue of largest modulus.
fn leading_abs_eigenvector(m: &ComplexMatrix) -> Vec<Complex64> {
    let sys = linalg::hermitian_eig_unchecked(&m.hermitian_part());
    let n = sys.eigenvalues.len();
    let k = if sys.eigenvalues[n - 1] > -sys.eigenvalues[0] + TIE { n - 1 } else { 0 };
    sys.eigenvector(k)
}

fn difference_sum(s: &[ComplexMatrix], t: &[ComplexMatrix], subset: &[usize]) -> ComplexMatrix {
    let d = s[0].rows();
    subset.iter().fold(ComplexMatrix::zeros(d, d), |acc, &i| acc + &(&s[i] - &t[i]))
}

/// `sum_i |<psi|(S_i - T_i)|psi>|`.
pub fn classical_objective(s: &Povm, t: &Povm, psi: &[Complex64]) -> f64 {
    s.effects().iter().zip(t.effects()).map(|(a, b)| (a - b).sandwich(psi, psi).norm()).sum()
}

/// Entanglement-free bound for two POVMs with matching outcome counts.
pub fn classical_bound_povm(s: &Povm, t: &Povm) -> Result<ClassicalBound> {
    classical_bound_povm_capped(s, t, SUBSET_CAP)
}

pub fn classical_bound_povm_capped(s: &Povm, t: &Povm, cap: usize) -> Result<ClassicalBound> {
    if s.dim() != t.dim() {
        return Err(Error::DimensionMismatch(s.dim(), t.dim()));
    }
    if s.outcomes() != t.outcomes() {
        return Err(Error::DimensionMismatch(s.outcomes(), t.outcomes()));
    }
    let n = s.outcomes();
    check_cap(n, cap)?;
    let diffs: Vec<ComplexMatrix> = s.effects().iter().zip(t.effects()).map(|(a, b)| a - b).collect();
    let d = s.dim();
    let value = |mask: u64| {
        let m = (0..n).filter(|&i| mask >> i & 1 == 1).fold(ComplexMatrix::zeros(d, d), |acc, i| acc + &diffs[i]);
        let sys = linalg::hermitian_eig_unchecked(&m.hermitian_part());
        sys.max().abs().max(sys.min().abs())
    };
    let (mask, best_value) = scan_subsets(n, value, true);
    let best_subset = mask_indices(mask, n);
    let optimal_state = leading_abs_eigenvector(&difference_sum(s.effects(), t.effects(), &best_subset));
    Ok(ClassicalBound {
        probability_bound: 0.5 + 0.5 * best_value,
        scan: SubsetScanResult { best_subset, best_value, optimal_state },
    })
}

/// Optimal input state without entanglement.
pub fn optimal_classical_state(s: &Povm, t: &Povm) -> Result<Vec<Complex64>> {
    Ok(classical_bound_povm(s, t)?.scan.optimal_state)
}

fn sigma_min_of(u: &ComplexMatrix, mask: u64, n: usize) -> f64 {
    let idx = mask_indices(mask, n);
    svd_values(&u.principal_submatrix(&idx)).last().copied().unwrap_or(0.0)
}

/// Entanglement-free bound for `(P_U, P_1)` from principal submatrices.
pub fn classical_bound_projective(u: &VonNeumannMeasurement) -> Result<ProjectiveClassicalBound> {
    classical_bound_projective_capped(u, SUBSET_CAP)
}

pub fn classical_bound_projective_capped(u: &VonNeumannMeasurement, cap: usize) -> Result<ProjectiveClassicalBound> {
    let n = u.dim();
    check_cap(n, cap)?;
    let m = u.unitary();
    let (mask, sigma) = scan_subsets(n, |mask| sigma_min_of(m, mask, n), false);
    let sigma = sigma.clamp(0.0, 1.0);
    let best_subset = mask_indices(mask, n);
    let effects = u.effects();
    let basis = VonNeumannMeasurement::computational(n).effects();
    let diff = difference_sum(&effects, &basis, &best_subset);
    // sqrt(1 - sigma^2) loses half the digits when sigma is close to 1; the
    // projector difference has the same norm and no cancellation
    let best_value = linalg::operator_norm(&diff).min(1.0);
    let optimal_state = leading_abs_eigenvector(&diff);
    Ok(ProjectiveClassicalBound {
        probability_bound: 0.5 + 0.5 * best_value,
        min_singular_value: sigma,
        scan: SubsetScanResult { best_subset, best_value, optimal_state },
    })
}

/// First index set (by cardinality, then lexicographically) whose principal
/// submatrix has `sigma_min <= 1e-9`. Such a set exists iff `P_U` and `P_1`
/// are perfectly distinguishable without entanglement.
pub fn has_rank_deficient_principal_submatrix(u: &VonNeumannMeasurement) -> Result<Option<Vec<usize>>> {
    let n = u.dim();
    check_cap(n, SUBSET_CAP)?;
    let m = u.unitary();
    let full = (1u64 << n) - 1;
    let mut masks: Vec<u64> = (1..full).collect();
    masks.sort_by(|&a, &b| {
        a.count_ones().cmp(&b.count_ones()).then_with(|| mask_indices(a, n).cmp(&mask_indices(b, n)))
    });
    let hit = masks.par_iter().position_first(|&mask| sigma_min_of(m, mask, n) <= RANK_DEFICIENT);
    Ok(hit.map(|k| mask_indices(masks[k], n)))
}
