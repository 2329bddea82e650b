use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use povm_duel::classical::classical_bound_projective;
use povm_duel::entangled::{
    diamond_distance, perfect_check_with, reduce_pair, trace_tests, CertificationStatus, SolverOptions,
};
use povm_duel::format::{parse_axis_str, read_text, write_text, MatrixFile, MatrixMetadata};
use povm_duel::protocol::{build_protocol, simulate};
use povm_duel::report::{verify, ReportFile};
use povm_duel::special::{fourier_matrix, reflection_matrix, ReflectionSpec};
use povm_duel::tolerance::{DEFAULT_GAP, DEFAULT_MAX_ITER};
use povm_duel::VonNeumannMeasurement;
use serde_json::json;

const EXIT_NEGATIVE: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_INCONCLUSIVE: u8 = 3;

/// Single-shot distinguishability of von Neumann measurements.
#[derive(Parser)]
#[command(name = "povm-duel", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a matrix file for a special family.
    #[command(subcommand)]
    Gen(Gen),
    /// Optimal success probability without entanglement.
    Classical(Pair),
    /// Diamond distance with primal and dual certificates.
    Distance(DistanceArgs),
    /// Certify whether P_U and P_1 are perfectly distinguishable.
    Perfect(PerfectArgs),
    /// Trace criteria at E_ii = conj(U_ii)/|U_ii|.
    Tracecheck { u: PathBuf },
    /// Monte-Carlo run of the optimal protocol.
    Simulate(SimulateArgs),
    /// Recompute every certificate in a report.
    Verify { report: PathBuf },
}

#[derive(Subcommand)]
enum Gen {
    /// Fourier matrix F_d.
    Fourier {
        #[arg(long)]
        dim: usize,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Reflection 1 - 2|x><x|.
    Reflection {
        /// File holding {"axis": [[re, im], ...]}.
        #[arg(long, conflicts_with = "uniform", required_unless_present = "uniform")]
        axis: Option<PathBuf>,
        /// Uniform axis of this dimension.
        #[arg(long)]
        uniform: Option<usize>,
        #[arg(short, long)]
        output: PathBuf,
    },
}

#[derive(Args)]
struct Pair {
    u: PathBuf,
    /// Defaults to the computational basis.
    v: Option<PathBuf>,
}

#[derive(Args)]
struct DistanceArgs {
    #[command(flatten)]
    pair: Pair,
    #[arg(long, env = "POVM_DUEL_GAP", default_value_t = DEFAULT_GAP)]
    gap: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
    max_iter: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct PerfectArgs {
    u: PathBuf,
    /// Witness report path; printed to stdout when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    pair: Pair,
    #[arg(long)]
    trials: usize,
    #[arg(long)]
    seed: u64,
}

fn load(path: &Path) -> Result<VonNeumannMeasurement> {
    let file = MatrixFile::read(path).with_context(|| format!("reading {}", path.display()))?;
    VonNeumannMeasurement::new(file.matrix).with_context(|| format!("{} is not a measurement", path.display()))
}

fn load_pair(p: &Pair) -> Result<(VonNeumannMeasurement, VonNeumannMeasurement)> {
    let u = load(&p.u)?;
    let v = match &p.v {
        Some(path) => load(path)?,
        None => VonNeumannMeasurement::computational(u.dim()),
    };
    if u.dim() != v.dim() {
        bail!("dimension mismatch: {} vs {}", u.dim(), v.dim());
    }
    Ok((u, v))
}

fn emit(report: &ReportFile, output: Option<&Path>, summary: String) -> Result<()> {
    match output {
        Some(path) => {
            write_text(path, &report.to_json_string())?;
            println!("{summary}");
        }
        None => print!("{}", report.to_json_string()),
    }
    Ok(())
}

fn solver_options(seed: u64) -> SolverOptions {
    let gap = std::env::var("POVM_DUEL_GAP").ok().and_then(|s| s.parse().ok()).unwrap_or(DEFAULT_GAP);
    SolverOptions { target_gap: gap, seed, ..SolverOptions::default() }
}

fn run(cli: Cli) -> Result<u8> {
    let start = Instant::now();
    match cli.command {
        Command::Gen(Gen::Fourier { dim, output }) => {
            let f = fourier_matrix(dim)?;
            let meta = MatrixMetadata {
                name: Some(format!("F{dim}")),
                generator: Some("fourier".into()),
                params: Some(json!({ "dim": dim })),
            };
            MatrixFile::with_metadata(f.unitary().clone(), meta).write(&output)?;
            Ok(0)
        }
        Command::Gen(Gen::Reflection { axis, uniform, output }) => {
            let spec = match (axis, uniform) {
                (Some(path), _) => {
                    let x =
                        parse_axis_str(&read_text(&path)?).with_context(|| format!("reading {}", path.display()))?;
                    ReflectionSpec::new(x)?
                }
                (None, Some(d)) => ReflectionSpec::uniform(d)?,
                (None, None) => bail!("one of --axis or --uniform is required"),
            };
            let axis: Vec<[f64; 2]> = spec.axis.iter().map(|z| [z.re, z.im]).collect();
            let meta = MatrixMetadata {
                name: Some(format!("reflection-d{}", spec.dim())),
                generator: Some("reflection".into()),
                params: Some(json!({ "axis": axis, "omega": spec.omega })),
            };
            MatrixFile::with_metadata(reflection_matrix(&spec).unitary().clone(), meta).write(&output)?;
            Ok(0)
        }
        Command::Classical(p) => {
            let (u, v) = load_pair(&p)?;
            let bound = classical_bound_projective(&reduce_pair(&u, &v)?)?;
            let report = ReportFile::from_classical(&u, &v, &bound).with_wall_time(start.elapsed().as_secs_f64());
            emit(&report, None, String::new())?;
            Ok(0)
        }
        Command::Distance(a) => {
            let (u, v) = load_pair(&a.pair)?;
            if a.gap.is_nan() || a.gap <= 0.0 {
                bail!("--gap must be positive");
            }
            let opts =
                SolverOptions { target_gap: a.gap, max_iter: a.max_iter, seed: a.seed, ..SolverOptions::default() };
            let r = diamond_distance(&u, &v, &opts)?;
            let report = ReportFile::from_distance(&u, &v, &opts, &r)?.with_wall_time(start.elapsed().as_secs_f64());
            let summary = format!(
                "diamond {:.9} success {:.9} gap {:.3e} status {}",
                r.diamond,
                r.success_probability,
                r.certificate.gap,
                r.status.as_str()
            );
            emit(&report, a.output.as_deref(), summary)?;
            Ok(if r.converged { 0 } else { EXIT_INCONCLUSIVE })
        }
        Command::Perfect(a) => {
            let u = load(&a.u)?;
            let opts = solver_options(0);
            let verdict = perfect_check_with(&u, &opts)?;
            let report = ReportFile::from_perfect(&u, &opts, &verdict).with_wall_time(start.elapsed().as_secs_f64());
            emit(&report, a.output.as_deref(), verdict.status.as_str().to_string())?;
            Ok(match verdict.status {
                CertificationStatus::CertifiedPerfect => 0,
                CertificationStatus::CertifiedImperfect => EXIT_NEGATIVE,
                CertificationStatus::Inconclusive => EXIT_INCONCLUSIVE,
            })
        }
        Command::Tracecheck { u } => {
            let u = load(&u)?;
            let report =
                ReportFile::from_tracecheck(&u, &trace_tests(&u)).with_wall_time(start.elapsed().as_secs_f64());
            emit(&report, None, String::new())?;
            Ok(0)
        }
        Command::Simulate(a) => {
            let (u, v) = load_pair(&a.pair)?;
            if a.trials == 0 {
                bail!("--trials must be at least 1");
            }
            let opts = solver_options(a.seed);
            let r = diamond_distance(&u, &v, &opts)?;
            let protocol = build_protocol(&u, &v, &r.discriminator)?;
            let run = simulate(&protocol, a.trials, a.seed)?;
            let report = ReportFile::from_simulation(&u, &v, &opts, &r.discriminator, &run)
                .with_wall_time(start.elapsed().as_secs_f64());
            emit(&report, None, String::new())?;
            Ok(0)
        }
        Command::Verify { report } => {
            let file =
                ReportFile::parse_str(&read_text(&report)?).with_context(|| format!("reading {}", report.display()))?;
            let outcome = verify(&file);
            for c in &outcome.checks {
                let mark = if c.passed { "ok  " } else { "FAIL" };
                if c.detail.is_empty() {
                    println!("{mark} {}", c.name);
                } else {
                    println!("{mark} {} ({})", c.name, c.detail);
                }
            }
            if outcome.passed() {
                println!("verified {} report: {} checks", file.command, outcome.checks.len());
                Ok(0)
            } else {
                println!("verification failed");
                Ok(EXIT_NEGATIVE)
            }
        }
    }
}

fn configure_threads() -> Result<()> {
    if let Ok(s) = std::env::var("POVM_DUEL_THREADS") {
        let n: usize = s.trim().parse().with_context(|| format!("POVM_DUEL_THREADS={s}"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match configure_threads().and_then(|_| run(cli)) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}
