//! # povm-duel
//!
//! Single-shot distinguishability of von Neumann (projective, rank-one)
//! measurements.
//!
//! Two measurements `P_U` and `P_V` are described by unitaries whose columns
//! are the measurement vectors. The crate computes
//!
//! - the optimal success probability without entanglement, through an
//!   exhaustive scan over outcome subsets ([`classical`]);
//! - the diamond-norm distance `||P_U - P_V||`, which fixes the optimal
//!   entanglement-assisted success probability `1/2 + ||.||/4`
//!   ([`entangled`]). The distance equals `2 sqrt(1 - nu^2)` where
//!   `nu = min_rho sum_i |<i|U^dagger rho|i>|` over density matrices. Every
//!   value comes with a primal state and a dual diagonal-phase witness that
//!   bound `nu` from both sides;
//! - certified verdicts on perfect distinguishability;
//! - closed forms for Fourier and reflection unitaries ([`special`]);
//! - a Monte-Carlo run of the optimal discrimination protocol ([`protocol`]).
//!
//! All matrices are dense [`ComplexMatrix`] values. Tensor products use the
//! order `(label ⊗ input)` and vectorization is row-major.

#![forbid(unsafe_code)]

pub mod classical;
pub mod entangled;
pub mod error;
pub mod format;
pub mod geometry;
pub mod linalg;
pub mod protocol;
pub mod quantum;
pub mod random;
pub mod report;
pub mod special;
pub mod tolerance;

pub use error::{Error, Result};
pub use linalg::ComplexMatrix;
pub use num_complex::Complex64;
pub use quantum::{DensityMatrix, Povm, VonNeumannMeasurement};
