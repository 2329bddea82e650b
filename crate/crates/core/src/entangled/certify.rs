//! Verdicts on perfect distinguishability from the computational basis.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::dual::{arc_of, scaled_columns};
use super::{dual_value, polish_feasible, solve_nu, CertificatePair, ConstraintFamily, SolverOptions};
use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix};
use crate::quantum::{DensityMatrix, VonNeumannMeasurement};
use crate::tolerance::{IMPERFECT_DUAL, NUMERICAL_RANGE, PERFECT_RESIDUAL};

#[derive(Clone, Debug)]
pub enum PerfectWitness {
    /// A state with `sum_i |<i|U^dagger rho|i>| = residual`.
    Feasible { state: DensityMatrix, residual: f64 },
    /// Phases whose `UE` has spectrum hull at distance `distance` from 0.
    Separating { phases: Vec<f64>, distance: f64 },
    /// Neither bound is decisive.
    Undecided { primal: f64, dual: f64 },
}

#[derive(Clone, Debug)]
pub struct PerfectVerdict {
    pub status: super::CertificationStatus,
    pub witness: PerfectWitness,
    pub certificate: CertificatePair,
}

pub fn perfect_check(u: &VonNeumannMeasurement) -> Result<PerfectVerdict> {
    perfect_check_with(u, &SolverOptions::default())
}

pub fn perfect_check_with(u: &VonNeumannMeasurement, opts: &SolverOptions) -> Result<PerfectVerdict> {
    use super::CertificationStatus::*;
    let cert = solve_nu(u, opts)?.certificate;
    if cert.dual_value >= IMPERFECT_DUAL {
        return Ok(PerfectVerdict {
            status: CertifiedImperfect,
            witness: PerfectWitness::Separating { phases: cert.dual_phases.clone(), distance: cert.dual_value },
            certificate: cert,
        });
    }
    let (state, residual) = if cert.primal_value <= PERFECT_RESIDUAL {
        (cert.primal_state.clone(), cert.primal_value)
    } else {
        let (s, r) = polish_feasible(u, cert.primal_state.matrix(), opts.polish_sweeps);
        (DensityMatrix::new(s)?, r)
    };
    if residual <= PERFECT_RESIDUAL {
        return Ok(PerfectVerdict {
            status: CertifiedPerfect,
            witness: PerfectWitness::Feasible { state, residual },
            certificate: cert,
        });
    }
    Ok(PerfectVerdict {
        status: Inconclusive,
        witness: PerfectWitness::Undecided { primal: residual.min(cert.primal_value), dual: cert.dual_value },
        certificate: cert,
    })
}

/// Values of the trace criteria at `E_ii = conj(U_ii) / |U_ii|`.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceTests {
    /// `sum_i |U_ii| = Tr(UE)`.
    pub trace_value: f64,
    pub phases: Vec<f64>,
    /// `Tr(UE) > d - 2`, which rules out perfect distinguishability.
    pub necessary_violated: bool,
    /// `Tr(UE) <= 1` with `d` odd, which guarantees it.
    pub sufficient_met: bool,
    /// For `d = 3`: whether the pair is perfectly distinguishable.
    pub d3_verdict: Option<bool>,
}

const TRACE_SLACK: f64 = 1e-12;

pub fn trace_tests(u: &VonNeumannMeasurement) -> TraceTests {
    let d = u.dim();
    let m = u.unitary();
    let phases: Vec<f64> = (0..d).map(|i| if m[(i, i)].norm() <= 1e-12 { 0.0 } else { -m[(i, i)].arg() }).collect();
    let trace_value: f64 = (0..d).map(|i| m[(i, i)].norm()).sum();
    TraceTests {
        trace_value,
        phases,
        necessary_violated: trace_value > (d as f64 - 2.0) + TRACE_SLACK,
        sufficient_met: d >= 3 && d % 2 == 1 && trace_value <= 1.0 + TRACE_SLACK,
        d3_verdict: (d == 3).then_some(trace_value <= 1.0 + TRACE_SLACK),
    }
}

fn separates(u: &ComplexMatrix, dmat: &ComplexMatrix) -> bool {
    let h = (u * dmat).hermitian_part().scale(2.0);
    let sys = linalg::hermitian_eig_unchecked(&h);
    sys.min() > NUMERICAL_RANGE || sys.max() < -NUMERICAL_RANGE
}

/// Searches for a diagonal `D` with `UD + D^dagger U^dagger` definite,
/// which shows `P_U` and `P_1` are not perfectly distinguishable.
/// Candidates: the identity, the `2d` constraint directions, rotations of `hint` phases
/// (e.g. a dual certificate), then `trials` Gaussian diagonals.
pub fn refute_perfect_by_numerical_range(
    u: &VonNeumannMeasurement,
    trials: usize,
    seed: u64,
    hint: Option<&[f64]>,
) -> Option<ComplexMatrix> {
    let d = u.dim();
    let m = u.unitary();
    let family = ConstraintFamily::new(u);
    let mut candidates = vec![ComplexMatrix::identity(d)];
    candidates.extend((0..2 * d).map(|k| {
        let mut x = vec![0.0; 2 * d];
        x[k] = 1.0;
        family.direction(&x)
    }));
    if let Some(phases) = hint.filter(|p| p.len() == d) {
        let e = linalg::phase_diag(phases);
        let arc = arc_of(m, phases);
        let mid = arc.angles[arc.lo] + 0.5 * arc.spread;
        let rotations = std::iter::once(-mid).chain((0..16).map(|k| TAU * k as f64 / 16.0));
        candidates.extend(rotations.map(|a| e.scale_c(Complex64::from_polar(1.0, a))));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        let v: Vec<Complex64> = (0..d)
            .map(|_| {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                Complex64::new(re, im)
            })
            .collect();
        candidates.push(linalg::diag_embed(&v));
    }
    candidates.par_iter().position_first(|dm| separates(m, dm)).map(|k| candidates[k].clone())
}

#[derive(Clone, Debug, PartialEq)]
pub struct SaddleEndpoints {
    pub lambda_first: Complex64,
    pub lambda_last: Complex64,
    /// `Tr(P_1 rho P_1)` and `Tr(P_d rho P_d)`.
    pub trace_first: f64,
    pub trace_last: f64,
    /// `||diag(P_1 rho P_1) - diag(P_d rho P_d)||_1`.
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SaddleDiagnostic {
    /// All eigenvalues of `UE` coincide.
    pub degenerate: bool,
    pub endpoints: Option<SaddleEndpoints>,
}

const DIAGNOSTIC_GAP: f64 = 1e-6;

/// Projects the certificate's state onto the eigenspaces of the two
/// eigenvalues of `UE` bounding the largest empty arc.
pub fn saddle_structure_diagnostic(cert: &CertificatePair, u: &VonNeumannMeasurement) -> Result<SaddleDiagnostic> {
    if cert.gap > DIAGNOSTIC_GAP {
        return Err(Error::GapTooLarge { gap: cert.gap, limit: DIAGNOSTIC_GAP });
    }
    let m = u.unitary();
    let d = u.dim();
    if dual_value(m, &cert.dual_phases)? < IMPERFECT_DUAL {
        return Err(Error::InvalidArgument("diagnostic needs a certified imperfect pair".into()));
    }
    let w = scaled_columns(m, &cert.dual_phases);
    let (values, vectors) = linalg::normal_eig(&w)?;
    let angles: Vec<f64> = values.iter().map(|z| z.arg()).collect();
    let tol = 1e-6;
    let near = |a: f64, b: f64| {
        let x = (a - b).rem_euclid(TAU);
        x.min(TAU - x) <= tol
    };
    if (1..d).all(|k| near(angles[k], angles[0])) {
        return Ok(SaddleDiagnostic { degenerate: true, endpoints: None });
    }
    // distinct angles, sorted, with cyclic gaps
    let mut distinct: Vec<f64> = Vec::new();
    let mut sorted = angles.clone();
    sorted.sort_by(f64::total_cmp);
    for a in sorted {
        if distinct.last().is_none_or(|&l| !near(a, l)) {
            distinct.push(a);
        }
    }
    if distinct.len() > 1 && near(distinct[0], *distinct.last().unwrap()) {
        distinct.pop();
    }
    let n = distinct.len();
    let gaps: Vec<(f64, usize)> = (0..n).map(|k| ((distinct[(k + 1) % n] - distinct[k]).rem_euclid(TAU), k)).collect();
    let max_gap = gaps.iter().map(|g| g.0).fold(f64::NEG_INFINITY, f64::max);
    let (first, last) = gaps
        .iter()
        .filter(|g| g.0 >= max_gap - 1e-9)
        .map(|&(_, k)| (distinct[(k + 1) % n], distinct[k]))
        .min_by(|a, b| {
            let s = |p: &(f64, f64)| (Complex64::from_polar(1.0, p.0) + Complex64::from_polar(1.0, p.1)).norm();
            s(a).total_cmp(&s(b))
        })
        .unwrap();
    let project = |angle: f64| {
        let cols: Vec<usize> = (0..d).filter(|&k| near(angles[k], angle)).collect();
        let v = vectors.select_columns(&cols);
        let p = &v * &v.adjoint();
        &(&p * cert.primal_state.matrix()) * &p
    };
    let r1 = project(first);
    let rd = project(last);
    let residual = (0..d).map(|i| (r1[(i, i)] - rd[(i, i)]).norm()).sum();
    Ok(SaddleDiagnostic {
        degenerate: false,
        endpoints: Some(SaddleEndpoints {
            lambda_first: Complex64::from_polar(1.0, first),
            lambda_last: Complex64::from_polar(1.0, last),
            trace_first: r1.trace().re,
            trace_last: rd.trace().re,
            residual,
        }),
    })
}
