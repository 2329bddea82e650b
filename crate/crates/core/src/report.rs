//! Machine-readable reports and their independent re-check.
//!
//! A [`ReportFile`] embeds its input matrices, so [`verify`] can recompute
//! every certificate value with plain linear algebra: the primal objective,
//! the hull distance behind the dual phases, feasibility residuals, and the
//! closed-form evaluation at the discriminator. No solver runs during
//! verification.

use serde::{Deserialize, Serialize};

use crate::classical::{classical_objective, ProjectiveClassicalBound};
use crate::entangled::{
    diamond_from_nu, evaluate_distance_at_state, reduce_pair, CertificatePair, CertificationStatus,
    DiscriminationReport, PerfectVerdict, PerfectWitness, SolverOptions, TraceTests,
};
use crate::error::Result;
use crate::format::{f17_vec, from_f17_vec, matrix_digest, pair, FormatError, MatrixJson, F17};
use crate::geometry::dist_zero_to_hull;
use crate::linalg::{self, svd_values, ComplexMatrix};
use crate::protocol::{build_protocol, simulate, ProtocolRun};
use crate::quantum::{purify, DensityMatrix, VonNeumannMeasurement};
use crate::tolerance::{IMPERFECT_DUAL, PERFECT_RESIDUAL};
use crate::Complex64;

pub const TOOL: &str = "povm-duel";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Reported and recomputed values must agree to this.
const RECHECK: f64 = 1e-10;
/// Discriminator evaluation vs reported diamond on converged reports.
const CLOSED_FORM: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportInputs {
    pub u: MatrixJson,
    pub u_sha256: String,
    pub v: MatrixJson,
    pub v_sha256: String,
}

impl ReportInputs {
    pub fn new(u: &ComplexMatrix, v: &ComplexMatrix) -> Self {
        Self {
            u: MatrixJson::from_matrix(u),
            u_sha256: matrix_digest(u),
            v: MatrixJson::from_matrix(v),
            v_sha256: matrix_digest(v),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptionsJson {
    pub target_gap: F17,
    pub max_iter: usize,
    pub mu0: F17,
    pub anneal_period: usize,
    pub restarts: usize,
    pub seed: u64,
    pub polish_sweeps: usize,
}

impl From<&SolverOptions> for OptionsJson {
    fn from(o: &SolverOptions) -> Self {
        Self {
            target_gap: F17(o.target_gap),
            max_iter: o.max_iter,
            mu0: F17(o.mu0),
            anneal_period: o.anneal_period,
            restarts: o.restarts,
            seed: o.seed,
            polish_sweeps: o.polish_sweeps,
        }
    }
}

impl OptionsJson {
    pub fn to_options(&self) -> SolverOptions {
        SolverOptions {
            target_gap: self.target_gap.0,
            max_iter: self.max_iter,
            mu0: self.mu0.0,
            anneal_period: self.anneal_period,
            restarts: self.restarts,
            seed: self.seed,
            polish_sweeps: self.polish_sweeps,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateJson {
    pub primal_state: MatrixJson,
    pub primal_value: F17,
    pub dual_phases: Vec<F17>,
    pub dual_value: F17,
    pub gap: F17,
}

impl From<&CertificatePair> for CertificateJson {
    fn from(c: &CertificatePair) -> Self {
        Self {
            primal_state: MatrixJson::from_matrix(c.primal_state.matrix()),
            primal_value: F17(c.primal_value),
            dual_phases: f17_vec(&c.dual_phases),
            dual_value: F17(c.dual_value),
            gap: F17(c.gap),
        }
    }
}

/// Field conventions, written into every distance report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Conventions {
    pub reduced_unitary: String,
    pub primal_state: String,
    pub discriminator: String,
    pub protocol_input: String,
}

impl Default for Conventions {
    fn default() -> Self {
        Self {
            reduced_unitary: "W = V^dagger U; the pair (P_U, P_V) is as distinguishable as (P_W, P_1)".into(),
            primal_state: "rho minimizing sum_i |<i|W^dagger rho|i>|; primal_value bounds nu from above".into(),
            discriminator:
                "transpose of primal_state: the state rho in ||(1 ⊗ sqrt(rho)) (J(P_1) - J(P_W)) (1 ⊗ sqrt(rho))||_1"
                    .into(),
            protocol_input: "purification of V discriminator^T V^dagger on system ⊗ ancilla".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceSection {
    pub nu: F17,
    pub diamond: F17,
    pub success_probability: F17,
    pub discriminator: MatrixJson,
    pub discriminator_rank: usize,
    pub ancilla_dimension: usize,
    pub status: String,
    pub perfect: bool,
    pub converged: bool,
    pub iterations: usize,
    pub certificate: CertificateJson,
    /// Closed-form distance evaluated at the discriminator.
    pub closed_form_at_discriminator: F17,
    pub conventions: Conventions,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessJson {
    /// `feasible`, `separating` or `undecided`.
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<MatrixJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual: Option<F17>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phases: Option<Vec<F17>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distance: Option<F17>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub primal: Option<F17>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dual: Option<F17>,
}

impl From<&PerfectWitness> for WitnessJson {
    fn from(w: &PerfectWitness) -> Self {
        let empty = WitnessJson {
            kind: String::new(),
            state: None,
            residual: None,
            phases: None,
            distance: None,
            primal: None,
            dual: None,
        };
        match w {
            PerfectWitness::Feasible { state, residual } => WitnessJson {
                kind: "feasible".into(),
                state: Some(MatrixJson::from_matrix(state.matrix())),
                residual: Some(F17(*residual)),
                ..empty
            },
            PerfectWitness::Separating { phases, distance } => WitnessJson {
                kind: "separating".into(),
                phases: Some(f17_vec(phases)),
                distance: Some(F17(*distance)),
                ..empty
            },
            PerfectWitness::Undecided { primal, dual } => {
                WitnessJson { kind: "undecided".into(), primal: Some(F17(*primal)), dual: Some(F17(*dual)), ..empty }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerfectSection {
    pub status: String,
    pub witness: WitnessJson,
    pub certificate: CertificateJson,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassicalSection {
    pub probability_bound: F17,
    /// `||sum_{i in best_subset} (P^U_i - P^V_i)||`.
    pub best_value: F17,
    /// `sigma_min` of the principal submatrix of `V^dagger U`.
    pub min_singular_value: F17,
    pub best_subset: Vec<usize>,
    pub optimal_state: Vec<[F17; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceSection {
    pub trace_value: F17,
    pub threshold: F17,
    pub phases: Vec<F17>,
    pub necessary_violated: bool,
    pub sufficient_met: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d3_verdict: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationSection {
    pub trials: usize,
    pub seed: u64,
    pub empirical_success: F17,
    pub theoretical_success: F17,
    pub standard_error: F17,
    pub within_three_sigma: bool,
    pub transcript_sha256: String,
    pub discriminator: MatrixJson,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub tool: String,
    pub version: String,
    /// `distance`, `perfect`, `classical`, `tracecheck` or `simulate`.
    pub command: String,
    pub inputs: ReportInputs,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub options: Option<OptionsJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distance: Option<DistanceSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perfect: Option<PerfectSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classical: Option<ClassicalSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tracecheck: Option<TraceSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulation: Option<SimulationSection>,
    pub wall_time_seconds: F17,
}

impl ReportFile {
    fn base(command: &str, u: &ComplexMatrix, v: &ComplexMatrix, options: Option<&SolverOptions>) -> Self {
        Self {
            tool: TOOL.into(),
            version: VERSION.into(),
            command: command.into(),
            inputs: ReportInputs::new(u, v),
            options: options.map(OptionsJson::from),
            distance: None,
            perfect: None,
            classical: None,
            tracecheck: None,
            simulation: None,
            wall_time_seconds: F17(0.0),
        }
    }

    pub fn from_distance(
        u: &VonNeumannMeasurement,
        v: &VonNeumannMeasurement,
        opts: &SolverOptions,
        r: &DiscriminationReport,
    ) -> Result<Self> {
        let w = reduce_pair(u, v)?;
        let mut out = Self::base("distance", u.unitary(), v.unitary(), Some(opts));
        out.distance = Some(DistanceSection {
            nu: F17(r.nu),
            diamond: F17(r.diamond),
            success_probability: F17(r.success_probability),
            discriminator: MatrixJson::from_matrix(r.discriminator.matrix()),
            discriminator_rank: r.discriminator_rank,
            ancilla_dimension: r.ancilla_dimension,
            status: r.status.as_str().into(),
            perfect: r.perfect,
            converged: r.converged,
            iterations: r.iterations,
            certificate: (&r.certificate).into(),
            closed_form_at_discriminator: F17(evaluate_distance_at_state(&w, &r.discriminator)?),
            conventions: Conventions::default(),
        });
        Ok(out)
    }

    pub fn from_perfect(u: &VonNeumannMeasurement, opts: &SolverOptions, verdict: &PerfectVerdict) -> Self {
        let id = ComplexMatrix::identity(u.dim());
        let mut out = Self::base("perfect", u.unitary(), &id, Some(opts));
        out.perfect = Some(PerfectSection {
            status: verdict.status.as_str().into(),
            witness: (&verdict.witness).into(),
            certificate: (&verdict.certificate).into(),
        });
        out
    }

    /// `bound` is the projective bound of `V^dagger U`; its optimal state is
    /// mapped back by `V`.
    pub fn from_classical(
        u: &VonNeumannMeasurement,
        v: &VonNeumannMeasurement,
        bound: &ProjectiveClassicalBound,
    ) -> Self {
        let psi = v.unitary().apply(&bound.scan.optimal_state);
        let mut out = Self::base("classical", u.unitary(), v.unitary(), None);
        out.classical = Some(ClassicalSection {
            probability_bound: F17(bound.probability_bound),
            best_value: F17(bound.scan.best_value),
            min_singular_value: F17(bound.min_singular_value),
            best_subset: bound.scan.best_subset.clone(),
            optimal_state: psi.into_iter().map(pair).collect(),
        });
        out
    }

    pub fn from_tracecheck(u: &VonNeumannMeasurement, t: &TraceTests) -> Self {
        let id = ComplexMatrix::identity(u.dim());
        let mut out = Self::base("tracecheck", u.unitary(), &id, None);
        out.tracecheck = Some(TraceSection {
            trace_value: F17(t.trace_value),
            threshold: F17(u.dim() as f64 - 2.0),
            phases: f17_vec(&t.phases),
            necessary_violated: t.necessary_violated,
            sufficient_met: t.sufficient_met,
            d3_verdict: t.d3_verdict,
        });
        out
    }

    pub fn from_simulation(
        u: &VonNeumannMeasurement,
        v: &VonNeumannMeasurement,
        opts: &SolverOptions,
        discriminator: &DensityMatrix,
        run: &ProtocolRun,
    ) -> Self {
        let mut out = Self::base("simulate", u.unitary(), v.unitary(), Some(opts));
        out.simulation = Some(SimulationSection {
            trials: run.trials,
            seed: run.seed,
            empirical_success: F17(run.empirical_success),
            theoretical_success: F17(run.theoretical_success),
            standard_error: F17(run.standard_error),
            within_three_sigma: run.within_three_sigma(),
            transcript_sha256: run.transcript_digest(),
            discriminator: MatrixJson::from_matrix(discriminator.matrix()),
        });
        out
    }

    pub fn with_wall_time(mut self, seconds: f64) -> Self {
        self.wall_time_seconds = F17(seconds);
        self
    }

    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn parse_str(text: &str) -> std::result::Result<Self, FormatError> {
        let value = crate::format::parse_json(text)?;
        serde_json::from_value(value).map_err(|e| FormatError::Report(e.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Verification {
    pub checks: Vec<Check>,
}

impl Verification {
    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.passed)
    }

    fn push(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check { name: name.into(), passed, detail: detail.into() });
    }

    /// Records `|reported - recomputed| <= tol`.
    fn close(&mut self, name: &str, reported: f64, recomputed: f64, tol: f64) {
        let diff = (reported - recomputed).abs();
        self.push(name, diff <= tol, format!("reported {reported:.17e}, recomputed {recomputed:.17e}"));
    }

    fn fail(&mut self, name: &str, detail: impl Into<String>) {
        self.push(name, false, detail);
    }
}

/// `sum_i |<i|W^dagger rho|i>|`, computed entrywise.
fn primal_objective(w: &ComplexMatrix, rho: &ComplexMatrix) -> f64 {
    let d = w.rows();
    (0..d).map(|i| (0..d).map(|k| w[(k, i)].conj() * rho[(k, i)]).sum::<Complex64>().norm()).sum()
}

fn hull_distance(w: &ComplexMatrix, phases: &[f64]) -> Option<f64> {
    if phases.len() != w.rows() {
        return None;
    }
    let we = w * &linalg::phase_diag(phases);
    dist_zero_to_hull(&we).ok().map(|h| h.nu.min(1.0))
}

fn max_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    (a - b).max_abs()
}

fn status_of(primal: f64, dual: f64) -> CertificationStatus {
    if primal <= PERFECT_RESIDUAL {
        CertificationStatus::CertifiedPerfect
    } else if dual >= IMPERFECT_DUAL {
        CertificationStatus::CertifiedImperfect
    } else {
        CertificationStatus::Inconclusive
    }
}

struct Recomputed {
    primal: f64,
    dual: f64,
    state: ComplexMatrix,
}

/// Rechecks a certificate against `w` and returns the recomputed values.
fn check_certificate(out: &mut Verification, w: &ComplexMatrix, c: &CertificateJson) -> Option<Recomputed> {
    let state = match c.primal_state.to_matrix() {
        Ok(m) => m,
        Err(e) => {
            out.fail("certificate.primal_state parses", e.to_string());
            return None;
        }
    };
    match DensityMatrix::new(state.clone()) {
        Ok(_) => out.push("certificate.primal_state is a density matrix", true, ""),
        Err(e) => out.fail("certificate.primal_state is a density matrix", e.to_string()),
    }
    if state.rows() != w.rows() {
        out.fail("certificate dimensions", format!("{} vs {}", state.rows(), w.rows()));
        return None;
    }
    let primal = primal_objective(w, &state);
    out.close("certificate.primal_value", c.primal_value.0, primal, RECHECK);
    let phases = from_f17_vec(&c.dual_phases);
    let Some(dual) = hull_distance(w, &phases) else {
        out.fail("certificate.dual_value", "dual phases do not fit the matrix");
        return None;
    };
    out.close("certificate.dual_value", c.dual_value.0, dual, RECHECK);
    out.close("certificate.gap", c.gap.0, c.primal_value.0 - c.dual_value.0, 1e-15);
    out.push("weak duality", dual <= primal + RECHECK, format!("dual {dual:.17e}, primal {primal:.17e}"));
    Some(Recomputed { primal, dual, state })
}

fn check_inputs(out: &mut Verification, r: &ReportFile) -> Option<(VonNeumannMeasurement, VonNeumannMeasurement)> {
    let mut load = |name: &str, m: &MatrixJson, digest: &str| -> Option<VonNeumannMeasurement> {
        let m = match m.to_matrix() {
            Ok(m) => m,
            Err(e) => {
                out.fail(&format!("inputs.{name} parses"), e.to_string());
                return None;
            }
        };
        let actual = matrix_digest(&m);
        out.push(&format!("inputs.{name}_sha256"), actual == digest, format!("recomputed {actual}"));
        match VonNeumannMeasurement::new(m) {
            Ok(x) => {
                out.push(&format!("inputs.{name} is unitary"), true, "");
                Some(x)
            }
            Err(e) => {
                out.fail(&format!("inputs.{name} is unitary"), e.to_string());
                None
            }
        }
    };
    let u = load("u", &r.inputs.u, &r.inputs.u_sha256);
    let v = load("v", &r.inputs.v, &r.inputs.v_sha256);
    let (u, v) = (u?, v?);
    if u.dim() != v.dim() {
        out.fail("inputs dimensions", format!("{} vs {}", u.dim(), v.dim()));
        return None;
    }
    Some((u, v))
}

fn check_distance(out: &mut Verification, s: &DistanceSection, w: &VonNeumannMeasurement, target_gap: Option<f64>) {
    let Some(rc) = check_certificate(out, w.unitary(), &s.certificate) else {
        return;
    };
    let nu = rc.primal.clamp(0.0, 1.0);
    out.close("nu", s.nu.0, nu, RECHECK);
    let diamond = diamond_from_nu(s.nu.0);
    out.close("diamond", s.diamond.0, diamond, 1e-12);
    out.close("success_probability", s.success_probability.0, 0.5 + 0.25 * s.diamond.0, 1e-15);
    let status = status_of(rc.primal, rc.dual);
    out.push("status", s.status == status.as_str(), format!("reported {}, recomputed {}", s.status, status.as_str()));
    out.push("perfect flag", s.perfect == (status == CertificationStatus::CertifiedPerfect), "");
    if let Some(t) = target_gap {
        let gap = s.certificate.gap.0;
        out.push("converged flag", s.converged == (gap <= t), format!("gap {gap:.3e}, target {t:.3e}"));
    }
    let disc = match s.discriminator.to_matrix() {
        Ok(m) => m,
        Err(e) => return out.fail("discriminator parses", e.to_string()),
    };
    out.push("discriminator is the transposed primal state", max_abs_diff(&disc, &rc.state.transpose()) <= 1e-15, "");
    let disc = match DensityMatrix::new(disc) {
        Ok(d) => d,
        Err(e) => return out.fail("discriminator is a density matrix", e.to_string()),
    };
    out.push("discriminator_rank", s.discriminator_rank == disc.rank(), format!("recomputed {}", disc.rank()));
    let k = purify(&disc).ancilla_dim;
    out.push("ancilla_dimension", s.ancilla_dimension == k, format!("recomputed {k}"));
    match evaluate_distance_at_state(w, &disc) {
        Ok(eval) => {
            out.close("closed_form_at_discriminator", s.closed_form_at_discriminator.0, eval, RECHECK);
            let upper = diamond_from_nu(rc.dual);
            out.push(
                "closed form below the dual bound",
                eval <= upper + 1e-9,
                format!("evaluation {eval:.17e}, dual bound {upper:.17e}"),
            );
            if s.converged {
                out.close("closed form matches diamond", s.diamond.0, eval, CLOSED_FORM);
            }
        }
        Err(e) => out.fail("closed_form_at_discriminator", e.to_string()),
    }
}

fn check_perfect(out: &mut Verification, s: &PerfectSection, w: &VonNeumannMeasurement) {
    let Some(rc) = check_certificate(out, w.unitary(), &s.certificate) else {
        return;
    };
    let reported = CertificationStatus::parse(&s.status);
    out.push("status is known", reported.is_some(), s.status.clone());
    let wit = &s.witness;
    let expected = match wit.kind.as_str() {
        "feasible" => {
            let (Some(state), Some(res)) = (&wit.state, wit.residual) else {
                return out.fail("witness", "feasible witness without state or residual");
            };
            let state = match state.to_matrix() {
                Ok(m) => m,
                Err(e) => return out.fail("witness.state parses", e.to_string()),
            };
            match DensityMatrix::new(state.clone()) {
                Ok(_) => out.push("witness.state is a density matrix", true, ""),
                Err(e) => out.fail("witness.state is a density matrix", e.to_string()),
            }
            let r = primal_objective(w.unitary(), &state);
            out.close("witness.residual", res.0, r, RECHECK);
            out.push("feasibility residual", r <= PERFECT_RESIDUAL, format!("{r:.3e}"));
            CertificationStatus::CertifiedPerfect
        }
        "separating" => {
            let (Some(phases), Some(dist)) = (&wit.phases, wit.distance) else {
                return out.fail("witness", "separating witness without phases or distance");
            };
            let Some(h) = hull_distance(w.unitary(), &from_f17_vec(phases)) else {
                return out.fail("witness.phases", "phases do not fit the matrix");
            };
            out.close("witness.distance", dist.0, h, RECHECK);
            out.push("separation", h >= IMPERFECT_DUAL, format!("{h:.3e}"));
            CertificationStatus::CertifiedImperfect
        }
        "undecided" => {
            out.push(
                "certificate is indecisive",
                status_of(rc.primal, rc.dual) == CertificationStatus::Inconclusive,
                format!("primal {:.3e}, dual {:.3e}", rc.primal, rc.dual),
            );
            CertificationStatus::Inconclusive
        }
        other => return out.fail("witness.kind", format!("unknown kind `{other}`")),
    };
    out.push("status matches witness", reported == Some(expected), format!("{} vs {}", s.status, expected.as_str()));
}

fn check_classical(out: &mut Verification, s: &ClassicalSection, u: &VonNeumannMeasurement, v: &VonNeumannMeasurement) {
    let Ok(w) = reduce_pair(u, v) else {
        return out.fail("reduced pair", "");
    };
    let d = u.dim();
    let valid_subset = !s.best_subset.is_empty()
        && s.best_subset.windows(2).all(|p| p[0] < p[1])
        && s.best_subset.iter().all(|&i| i < d);
    if !valid_subset {
        return out.fail("best_subset", format!("{:?}", s.best_subset));
    }
    let sigma = svd_values(&w.unitary().principal_submatrix(&s.best_subset)).last().copied().unwrap_or(0.0);
    out.close("min_singular_value", s.min_singular_value.0, sigma, 1e-12);
    let from_sigma = 0.5 + 0.5 * (1.0 - sigma.min(1.0).powi(2)).max(0.0).sqrt();
    out.close("probability_bound from sigma_min", s.probability_bound.0, from_sigma, 1e-7);
    out.close("probability_bound", s.probability_bound.0, 0.5 + 0.5 * s.best_value.0, 1e-15);
    let psi: Vec<Complex64> = s.optimal_state.iter().map(|p| Complex64::new(p[0].0, p[1].0)).collect();
    let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    out.close("optimal_state norm", 1.0, norm, 1e-10);
    if psi.len() == d {
        let value = 0.5 * classical_objective(&u.to_povm(), &v.to_povm(), &psi);
        out.close("optimal_state attains the bound", s.best_value.0, value, 1e-9);
    } else {
        out.fail("optimal_state", "wrong length");
    }
}

fn check_trace(out: &mut Verification, s: &TraceSection, w: &VonNeumannMeasurement) {
    let m = w.unitary();
    let d = w.dim();
    let t: f64 = (0..d).map(|i| m[(i, i)].norm()).sum();
    out.close("trace_value", s.trace_value.0, t, 1e-12);
    out.close("threshold", s.threshold.0, d as f64 - 2.0, 0.0);
    let phases = from_f17_vec(&s.phases);
    if phases.len() == d {
        let te: Complex64 = (0..d).map(|i| m[(i, i)] * Complex64::from_polar(1.0, phases[i])).sum();
        out.close("Tr(UE) at the reported phases", t, te.re, 1e-12);
    } else {
        out.fail("phases", "wrong length");
    }
    let slack = 1e-12;
    out.push("necessary_violated", s.necessary_violated == (t > d as f64 - 2.0 + slack), "");
    out.push("sufficient_met", s.sufficient_met == (d >= 3 && d % 2 == 1 && t <= 1.0 + slack), "");
    out.push("d3_verdict", s.d3_verdict == (d == 3).then_some(t <= 1.0 + slack), "");
}

fn check_simulation(
    out: &mut Verification,
    s: &SimulationSection,
    u: &VonNeumannMeasurement,
    v: &VonNeumannMeasurement,
) {
    let disc = match s
        .discriminator
        .to_matrix()
        .map_err(|e| e.to_string())
        .and_then(|m| DensityMatrix::new(m).map_err(|e| e.to_string()))
    {
        Ok(d) => d,
        Err(e) => return out.fail("discriminator", e),
    };
    let protocol = match build_protocol(u, v, &disc) {
        Ok(p) => p,
        Err(e) => return out.fail("protocol", e.to_string()),
    };
    out.close("theoretical_success", s.theoretical_success.0, protocol.theoretical_success, RECHECK);
    if let Ok(w) = reduce_pair(u, v) {
        if let Ok(eval) = evaluate_distance_at_state(&w, &disc) {
            out.close("theoretical_success from the closed form", s.theoretical_success.0, 0.5 + 0.25 * eval, 1e-9);
        }
    }
    match simulate(&protocol, s.trials, s.seed) {
        Ok(run) => {
            out.push("transcript_sha256", run.transcript_digest() == s.transcript_sha256, "");
            out.close("empirical_success", s.empirical_success.0, run.empirical_success, 0.0);
            out.close("standard_error", s.standard_error.0, run.standard_error, 1e-15);
            out.push("within_three_sigma", s.within_three_sigma == run.within_three_sigma(), "");
        }
        Err(e) => out.fail("simulation", e.to_string()),
    }
}

/// Recomputes every certificate in `report` from its embedded inputs.
pub fn verify(report: &ReportFile) -> Verification {
    let mut out = Verification::default();
    out.push("tool", report.tool == TOOL, report.tool.clone());
    let Some((u, v)) = check_inputs(&mut out, report) else {
        return out;
    };
    let w = match reduce_pair(&u, &v) {
        Ok(w) => w,
        Err(e) => {
            out.fail("reduced pair", e.to_string());
            return out;
        }
    };
    let sections = [
        report.distance.is_some(),
        report.perfect.is_some(),
        report.classical.is_some(),
        report.tracecheck.is_some(),
        report.simulation.is_some(),
    ];
    out.push("exactly one section", sections.iter().filter(|x| **x).count() == 1, "");
    let target_gap = report.options.as_ref().map(|o| o.target_gap.0);
    match report.command.as_str() {
        "distance" => match &report.distance {
            Some(s) => check_distance(&mut out, s, &w, target_gap),
            None => out.fail("distance section", "missing"),
        },
        "perfect" => match &report.perfect {
            Some(s) => check_perfect(&mut out, s, &w),
            None => out.fail("perfect section", "missing"),
        },
        "classical" => match &report.classical {
            Some(s) => check_classical(&mut out, s, &u, &v),
            None => out.fail("classical section", "missing"),
        },
        "tracecheck" => match &report.tracecheck {
            Some(s) => check_trace(&mut out, s, &w),
            None => out.fail("tracecheck section", "missing"),
        },
        "simulate" => match &report.simulation {
            Some(s) => check_simulation(&mut out, s, &u, &v),
            None => out.fail("simulation section", "missing"),
        },
        other => out.fail("command", format!("unknown command `{other}`")),
    }
    out
}
