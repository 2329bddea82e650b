//! Numerical thresholds shared across modules.

/// Relative Frobenius tolerance for Hermiticity before symmetrization.
pub const HERMITIAN_REL: f64 = 1e-8;

/// Eigenvalues above `-PSD_CLIP` are treated as zero by square roots.
pub const PSD_CLIP: f64 = 1e-10;

/// State and measurement validity checks (Hermiticity, positivity, trace, completeness, unitarity).
pub const STATE: f64 = 1e-8;

/// Eigenvalues above this count towards the rank of a unit-trace state.
pub const RANK: f64 = 1e-10;

/// `sigma_min` at or below this marks a principal submatrix as singular.
pub const RANK_DEFICIENT: f64 = 1e-9;

/// Sign threshold for numerical-range membership.
pub const NUMERICAL_RANGE: f64 = 1e-9;

/// Polished feasibility residual needed to certify perfect distinguishability.
pub const PERFECT_RESIDUAL: f64 = 1e-9;

/// Dual lower bound needed to certify imperfect distinguishability.
pub const IMPERFECT_DUAL: f64 = 1e-7;

/// Default target primal-dual gap.
pub const DEFAULT_GAP: f64 = 1e-6;

/// Default Frank-Wolfe iteration cap.
pub const DEFAULT_MAX_ITER: usize = 20_000;

/// Largest index set scanned exhaustively.
pub const SUBSET_CAP: usize = 20;
