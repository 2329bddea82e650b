//! Entanglement-assisted discrimination of `P_U` and `P_V`.
//!
//! After reducing the pair to `(V^dagger U, 1)`, the diamond distance is
//! `2 sqrt(1 - nu^2)` with
//!
//! ```text
//! nu = min_rho sum_i |<i|U^dagger rho|i>| = max_E dist(0, hull spec(UE))
//! ```
//!
//! where `rho` ranges over density matrices and `E` over diagonal unitaries.
//! [`solve_nu`] returns a state (upper bound on `nu`) and a phase vector
//! (lower bound) whose values are re-checkable from scratch.
//!
//! Conventions: [`CertificatePair::primal_state`] is the state `rho` of the
//! minimization above. The discriminator, i.e. the state `rho_in` in
//! `max ||(1 ⊗ sqrt(rho_in)) J (1 ⊗ sqrt(rho_in))||_1`, is its transpose.

mod certify;
pub(crate) mod dual;
pub mod frank_wolfe;
pub(crate) mod polish;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use certify::{
    perfect_check, perfect_check_with, refute_perfect_by_numerical_range, saddle_structure_diagnostic, trace_tests,
    PerfectVerdict, PerfectWitness, SaddleDiagnostic, SaddleEndpoints, TraceTests,
};
pub use frank_wolfe::{diag_coefficients, program_objective, FwSample};

use crate::error::{Error, Result};
use crate::geometry::dist_zero_to_hull;
use crate::linalg::{self, ComplexMatrix};
use crate::quantum::{choi_of_measurement, purify, DensityMatrix, VonNeumannMeasurement};
use crate::random::random_phases;
use crate::tolerance::{DEFAULT_GAP, DEFAULT_MAX_ITER, IMPERFECT_DUAL, PERFECT_RESIDUAL};

use dual::{aligned_phases, endpoint_state, minimize_spread, ArcEval};
use frank_wolfe::{FrankWolfe, Smoothing};
use polish::Feasibility;

/// `A_0 = 1` and the `2d` Hermitian matrices `A_1..A_{2d}` with
/// `Tr(rho A_i) = 2 Re z_i` and `Tr(rho A_{d+i}) = -2 Im z_i`, where
/// `z_i = <i|U^dagger rho|i>`.
#[derive(Clone, Debug)]
pub struct ConstraintFamily {
    pub identity: ComplexMatrix,
    pub matrices: Vec<ComplexMatrix>,
}

impl ConstraintFamily {
    pub fn new(u: &VonNeumannMeasurement) -> Self {
        let d = u.dim();
        let m = u.unitary();
        let mut matrices = Vec::with_capacity(2 * d);
        let unit = |i: usize| {
            let mut e = vec![linalg::ZERO; d];
            e[i] = linalg::ONE;
            e
        };
        let ket_bra: Vec<ComplexMatrix> = (0..d).map(|i| ComplexMatrix::outer(&m.column_vec(i), &unit(i))).collect();
        for b in &ket_bra {
            matrices.push(b + &b.adjoint());
        }
        for b in &ket_bra {
            matrices.push((&b.adjoint() - b).scale_c(linalg::I));
        }
        Self { identity: ComplexMatrix::identity(d), matrices }
    }

    pub fn dim(&self) -> usize {
        self.identity.rows()
    }

    /// `Tr(rho A_k)` for `k = 1..2d`.
    pub fn evaluate(&self, rho: &ComplexMatrix) -> Vec<f64> {
        self.matrices.iter().map(|a| a.hs_inner(rho).re).collect()
    }

    /// `sum_k x_k A_k`.
    pub fn combination(&self, x: &[f64]) -> ComplexMatrix {
        let d = self.dim();
        self.matrices.iter().zip(x).fold(ComplexMatrix::zeros(d, d), |acc, (a, c)| acc + a.scale(*c))
    }

    /// Diagonal `D` with `UD + D^dagger U^dagger = sum_k x_k A_k`.
    pub fn direction(&self, x: &[f64]) -> ComplexMatrix {
        let d = self.dim();
        let v: Vec<Complex64> = (0..d).map(|j| Complex64::new(x[j], -x[d + j])).collect();
        linalg::diag_embed(&v)
    }
}

/// A primal state and dual phases bounding `nu` from above and below.
#[derive(Clone, Debug)]
pub struct CertificatePair {
    pub primal_state: DensityMatrix,
    /// `sum_i |<i|U^dagger rho|i>|`.
    pub primal_value: f64,
    pub dual_phases: Vec<f64>,
    /// `dist(0, hull spec(U diag(e^{i phi})))`.
    pub dual_value: f64,
    pub gap: f64,
}

impl CertificatePair {
    /// Evaluates both sides from scratch.
    pub fn evaluate(u: &ComplexMatrix, primal_state: DensityMatrix, dual_phases: Vec<f64>) -> Result<Self> {
        let primal_value = primal_value(u, primal_state.matrix())?;
        let dual_value = dual_value(u, &dual_phases)?;
        Ok(Self { primal_state, primal_value, dual_phases, dual_value, gap: primal_value - dual_value })
    }
}

/// `sum_i |<i|U^dagger rho|i>|`.
pub fn primal_value(u: &ComplexMatrix, rho: &ComplexMatrix) -> Result<f64> {
    if u.rows() != rho.rows() {
        return Err(Error::DimensionMismatch(u.rows(), rho.rows()));
    }
    Ok(program_objective(u, rho))
}

/// Distance from the origin to the convex hull of `spec(U diag(e^{i phi}))`.
pub fn dual_value(u: &ComplexMatrix, phases: &[f64]) -> Result<f64> {
    if u.rows() != phases.len() {
        return Err(Error::DimensionMismatch(u.rows(), phases.len()));
    }
    Ok(dist_zero_to_hull(&dual::scaled_columns(u, phases))?.nu.min(1.0))
}

#[derive(Clone, Debug)]
pub struct SolverOptions {
    pub target_gap: f64,
    /// Frank-Wolfe iteration cap.
    pub max_iter: usize,
    pub mu0: f64,
    /// Iterations per smoothing epoch.
    pub anneal_period: usize,
    /// Random dual starting points.
    pub restarts: usize,
    pub seed: u64,
    /// Dykstra sweep cap when polishing a feasible state.
    pub polish_sweeps: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            target_gap: DEFAULT_GAP,
            max_iter: DEFAULT_MAX_ITER,
            mu0: 0.1,
            anneal_period: 50,
            restarts: 5,
            seed: 0,
            polish_sweeps: 5000,
        }
    }
}

/// Best bounds after a solver round.
#[derive(Clone, Copy, Debug)]
pub struct GapRecord {
    pub iteration: usize,
    pub primal: f64,
    pub dual: f64,
}

#[derive(Clone, Debug)]
pub struct SolveOutcome {
    pub certificate: CertificatePair,
    /// `gap <= target_gap`.
    pub converged: bool,
    pub iterations: usize,
    pub history: Vec<GapRecord>,
    /// Smoothed objective per Frank-Wolfe iteration.
    pub smoothing_trace: Vec<FwSample>,
}

struct Primal {
    state: ComplexMatrix,
    value: f64,
}

impl Primal {
    fn new(u: &ComplexMatrix, state: ComplexMatrix) -> Self {
        let state = normalize_state(state);
        let value = program_objective(u, &state);
        Self { state, value }
    }
}

/// Projects onto the spectrahedron.
fn normalize_state(x: ComplexMatrix) -> ComplexMatrix {
    let sys = linalg::hermitian_eig_unchecked(&x.hermitian_part());
    let lam = polish::simplex_projection(&sys.eigenvalues, 1.0);
    let mut scaled = sys.eigenvectors.clone();
    let n = lam.len();
    for k in 0..n {
        for r in 0..n {
            let v = scaled[(r, k)] * lam[k];
            scaled.set(r, k, v);
        }
    }
    (&scaled * &sys.eigenvectors.adjoint()).hermitian_part()
}

const CLUSTER_TOL: f64 = 1e-6;

/// A primal state built from the end points of the arc at (near-)optimal
/// phases: mass 1/2 on each end-point eigenspace with matching diagonals.
fn saddle_state(u: &ComplexMatrix, arc: &ArcEval, sweeps: usize) -> ComplexMatrix {
    let lo = arc.cluster(arc.lo, CLUSTER_TOL);
    let hi = arc.cluster(arc.hi, CLUSTER_TOL);
    if lo.len() == 1 && hi.len() == 1 {
        return endpoint_state(arc);
    }
    let d = u.rows();
    let (k1, k2) = (lo.len(), hi.len());
    let v1 = arc.vectors.select_columns(&lo);
    let v2 = arc.vectors.select_columns(&hi);
    let mut cols = lo.clone();
    cols.extend(&hi);
    let basis = arc.vectors.select_columns(&cols);
    let k = k1 + k2;
    let constraints: Vec<ComplexMatrix> = (0..d)
        .map(|i| {
            let r1: Vec<Complex64> = (0..k1).map(|a| v1[(i, a)]).collect();
            let r2: Vec<Complex64> = (0..k2).map(|a| v2[(i, a)]).collect();
            ComplexMatrix::from_fn(k, k, |a, b| {
                if a < k1 && b < k1 {
                    r1[a].conj() * r1[b]
                } else if a >= k1 && b >= k1 {
                    -(r2[a - k1].conj() * r2[b - k1])
                } else {
                    linalg::ZERO
                }
            })
        })
        .collect();
    let problem = Feasibility::new(vec![(k1, 0.5), (k2, 0.5)], constraints, vec![0.0; d]);
    let start = ComplexMatrix::identity(k).scale(0.5 / k1 as f64);
    let start = {
        let mut s = start;
        for j in k1..k {
            s.set(j, j, Complex64::new(0.5 / k2 as f64, 0.0));
        }
        s
    };
    let (state, _) = problem.dykstra(&start, sweeps, 1e-14, |x| problem.violations(x).iter().map(|v| v.abs()).sum());
    &(&basis * &state) * &basis.adjoint()
}

/// Polishes a near-feasible state towards `diag(U^dagger rho) = 0`.
pub(crate) fn polish_feasible(u: &VonNeumannMeasurement, start: &ComplexMatrix, sweeps: usize) -> (ComplexMatrix, f64) {
    let family = ConstraintFamily::new(u);
    let d = u.dim();
    let mut constraints = vec![family.identity.clone()];
    constraints.extend(family.matrices.iter().cloned());
    let mut rhs = vec![0.0; 2 * d + 1];
    rhs[0] = 1.0;
    let problem = Feasibility::new(vec![(d, 1.0)], constraints, rhs);
    let m = u.unitary();
    let (state, _) = problem.dykstra(start, sweeps, PERFECT_RESIDUAL * 0.1, |x| program_objective(m, x));
    let state = normalize_state(state);
    let value = program_objective(m, &state);
    (state, value)
}

/// Primal-dual solver for `nu`.
pub fn solve_nu(u: &VonNeumannMeasurement, opts: &SolverOptions) -> Result<SolveOutcome> {
    let d = u.dim();
    let m = u.unitary();
    if d == 1 {
        let state = DensityMatrix::maximally_mixed(1);
        let certificate = CertificatePair::evaluate(m, state, vec![0.0])?;
        return Ok(SolveOutcome {
            converged: certificate.gap <= opts.target_gap,
            certificate,
            iterations: 0,
            history: vec![],
            smoothing_trace: vec![],
        });
    }
    let smoothing = Smoothing { mu0: opts.mu0, anneal_period: opts.anneal_period };
    let mut fw = FrankWolfe::new(m, smoothing);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let random_starts: Vec<Vec<f64>> = (0..opts.restarts).map(|_| random_phases(d, &mut rng)).collect();

    let mut dual_phases = vec![0.0; d];
    let mut dual_best = dual_value(m, &dual_phases)?;
    let mut fw_primal = Primal::new(m, fw.best().0.clone());
    let mut saddle: Option<Primal> = None;
    let mut polished: Option<Primal> = None;
    let mut history = Vec::new();
    let mut chunk = 100usize;
    let mut first = true;

    loop {
        let steps = chunk.min(opts.max_iter.saturating_sub(fw.iterations()));
        fw.run(steps);
        if fw.best().1 < fw_primal.value {
            fw_primal = Primal::new(m, fw.best().0.clone());
        }

        let mut starts = vec![aligned_phases(&diag_coefficients(m, fw.state())), dual_phases.clone()];
        if first {
            starts.extend(random_starts.iter().cloned());
        }
        for start in starts {
            let (phases, arc) = minimize_spread(m, &start, 400);
            let value = dual_value(m, &phases)?;
            if value > dual_best {
                dual_best = value;
                dual_phases = phases.clone();
            }
            if arc.distance() > 0.0 {
                let candidate = Primal::new(m, saddle_state(m, &arc, opts.polish_sweeps));
                if saddle.as_ref().is_none_or(|s| candidate.value < s.value) {
                    saddle = Some(candidate);
                }
            }
        }
        if dual_best < IMPERFECT_DUAL {
            let start = polished.as_ref().filter(|p| p.value < fw_primal.value).map_or(&fw_primal.state, |p| &p.state);
            let (state, value) = polish_feasible(u, start, opts.polish_sweeps);
            if polished.as_ref().is_none_or(|p| value < p.value) {
                polished = Some(Primal { state, value });
            }
        }
        first = false;

        let best_primal = [Some(&fw_primal), saddle.as_ref(), polished.as_ref()]
            .into_iter()
            .flatten()
            .map(|p| p.value)
            .fold(f64::INFINITY, f64::min);
        history.push(GapRecord { iteration: fw.iterations(), primal: best_primal, dual: dual_best });
        let perfect_done = polished.as_ref().is_some_and(|p| p.value <= PERFECT_RESIDUAL);
        let saddle_done = saddle.as_ref().is_some_and(|s| s.value - dual_best <= opts.target_gap);
        if perfect_done || saddle_done || fw.iterations() >= opts.max_iter {
            break;
        }
        chunk = (chunk * 2).min(2000);
    }

    // A balanced end-point state attains the distance in the Choi-sandwich
    // formula; other minimizers of the primal need not, so it is preferred.
    let chosen = match (&saddle, &polished) {
        (_, Some(p)) if p.value <= PERFECT_RESIDUAL => p,
        (Some(s), _) if s.value - dual_best <= opts.target_gap => s,
        _ => [Some(&fw_primal), saddle.as_ref(), polished.as_ref()]
            .into_iter()
            .flatten()
            .min_by(|a, b| a.value.total_cmp(&b.value))
            .unwrap(),
    };
    let state = DensityMatrix::new(chosen.state.clone())?;
    let certificate = CertificatePair::evaluate(m, state, dual_phases)?;
    Ok(SolveOutcome {
        converged: certificate.gap <= opts.target_gap,
        certificate,
        iterations: fw.iterations(),
        history,
        smoothing_trace: fw.trace,
    })
}

/// `V^dagger U`; distances between `P_U` and `P_V` equal those between
/// `P_{V^dagger U}` and the computational basis.
pub fn reduce_pair(u: &VonNeumannMeasurement, v: &VonNeumannMeasurement) -> Result<VonNeumannMeasurement> {
    if u.dim() != v.dim() {
        return Err(Error::DimensionMismatch(u.dim(), v.dim()));
    }
    VonNeumannMeasurement::new(&v.unitary().adjoint() * u.unitary())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CertificationStatus {
    /// `sum_i |<i|U^dagger rho|i>| <= 1e-9` at the reported state.
    CertifiedPerfect,
    /// The dual phases separate the spectrum from 0 by at least `1e-7`.
    CertifiedImperfect,
    Inconclusive,
}

impl CertificationStatus {
    pub fn from_certificate(cert: &CertificatePair) -> Self {
        if cert.primal_value <= PERFECT_RESIDUAL {
            CertificationStatus::CertifiedPerfect
        } else if cert.dual_value >= IMPERFECT_DUAL {
            CertificationStatus::CertifiedImperfect
        } else {
            CertificationStatus::Inconclusive
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            CertificationStatus::CertifiedPerfect => "certified-perfect",
            CertificationStatus::CertifiedImperfect => "certified-imperfect",
            CertificationStatus::Inconclusive => "inconclusive",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "certified-perfect" => Some(CertificationStatus::CertifiedPerfect),
            "certified-imperfect" => Some(CertificationStatus::CertifiedImperfect),
            "inconclusive" => Some(CertificationStatus::Inconclusive),
            _ => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct DiscriminationReport {
    /// Upper bound on `nu` from the primal state.
    pub nu: f64,
    /// `2 sqrt(1 - nu^2)`.
    pub diamond: f64,
    /// `1/2 + diamond / 4`.
    pub success_probability: f64,
    /// Input-state marginal for the Choi-sandwich formula: the transpose of
    /// the certificate's primal state.
    pub discriminator: DensityMatrix,
    pub discriminator_rank: usize,
    /// Minimal ancilla dimension, the Schmidt rank of the purification.
    pub ancilla_dimension: usize,
    pub certificate: CertificatePair,
    pub status: CertificationStatus,
    pub perfect: bool,
    pub converged: bool,
    pub iterations: usize,
}

impl DiscriminationReport {
    pub fn from_outcome(outcome: SolveOutcome) -> Self {
        let cert = outcome.certificate;
        let nu = cert.primal_value.clamp(0.0, 1.0);
        let diamond = diamond_from_nu(nu);
        let discriminator = cert.primal_state.transpose();
        let discriminator_rank = discriminator.rank();
        let ancilla_dimension = purify(&discriminator).ancilla_dim;
        let status = CertificationStatus::from_certificate(&cert);
        Self {
            nu,
            diamond,
            success_probability: 0.5 + 0.25 * diamond,
            discriminator,
            discriminator_rank,
            ancilla_dimension,
            perfect: status == CertificationStatus::CertifiedPerfect,
            status,
            certificate: cert,
            converged: outcome.converged,
            iterations: outcome.iterations,
        }
    }
}

pub fn diamond_from_nu(nu: f64) -> f64 {
    let nu = nu.clamp(0.0, 1.0);
    2.0 * (1.0 - nu * nu).max(0.0).sqrt()
}

/// `||P_U - P_V||` with certificates for the reduced pair `(V^dagger U, 1)`.
pub fn diamond_distance(
    u: &VonNeumannMeasurement,
    v: &VonNeumannMeasurement,
    opts: &SolverOptions,
) -> Result<DiscriminationReport> {
    let reduced = reduce_pair(u, v)?;
    Ok(DiscriminationReport::from_outcome(solve_nu(&reduced, opts)?))
}

/// `sum_i sqrt((a_i + b_i)^2 - 4|c_i|^2)` with `a_i = <i|s|i>`,
/// `b_i = <u_i|s|u_i>`, `c_i = <i|s|u_i>` and `s = rho^T`: the trace norm
/// of the measurement-difference output on the purification of `rho`.
pub fn evaluate_distance_at_state(u: &VonNeumannMeasurement, rho: &DensityMatrix) -> Result<f64> {
    let d = u.dim();
    if rho.dim() != d {
        return Err(Error::DimensionMismatch(d, rho.dim()));
    }
    let s = rho.matrix().transpose();
    let mut total = 0.0;
    for i in 0..d {
        let ui = u.vector(i);
        let a = s[(i, i)].re;
        let b = s.sandwich(&ui, &ui).re;
        let c = s.apply(&ui)[i];
        total += ((a + b).powi(2) - 4.0 * c.norm_sqr()).max(0.0).sqrt();
    }
    Ok(total)
}

/// `||(1 ⊗ sqrt(rho)) (J(P_1) - J(P_U)) (1 ⊗ sqrt(rho))||_1`.
pub fn evaluate_distance_via_choi(u: &VonNeumannMeasurement, rho: &DensityMatrix) -> Result<f64> {
    let d = u.dim();
    if rho.dim() != d {
        return Err(Error::DimensionMismatch(d, rho.dim()));
    }
    let j = choi_of_measurement(&VonNeumannMeasurement::computational(d)).difference(&choi_of_measurement(u))?;
    let s = linalg::kron(&ComplexMatrix::identity(d), &linalg::matrix_sqrt_psd(rho.matrix())?);
    linalg::trace_norm(&(&(&s * &j.matrix) * &s))
}

/// `(||J||_1 / d, ||Tr_1 |J| ||)` for `J = J(P_U) - J(P_V)`.
pub fn sandwich_bounds(u: &VonNeumannMeasurement, v: &VonNeumannMeasurement) -> Result<(f64, f64)> {
    if u.dim() != v.dim() {
        return Err(Error::DimensionMismatch(u.dim(), v.dim()));
    }
    let d = u.dim();
    let j = choi_of_measurement(u).difference(&choi_of_measurement(v))?;
    let abs = linalg::hermitian_abs(&j.matrix)?;
    let lower = linalg::trace_norm(&j.matrix)? / d as f64;
    let upper = linalg::operator_norm(&linalg::partial_trace_first(&abs, j.dims)?);
    Ok((lower, upper))
}
