//! End-to-end acceptance run against the `povm-duel` binary.
//!
//! Prints one PASS/FAIL line per criterion and exits nonzero if any fails.

use std::f64::consts::{PI, TAU};
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode, Output};
use std::time::{Duration, Instant};

use anyhow::{anyhow, ensure, Context, Result};
use povm_duel::entangled::{
    diamond_distance, evaluate_distance_at_state, sandwich_bounds, solve_nu, DiscriminationReport, SolverOptions,
};
use povm_duel::linalg::{phase_diag, svd_values};
use povm_duel::random::{haar_unitary, permutation_matrix, random_density, random_permutation, random_phases};
use povm_duel::report::ReportFile;
use povm_duel::special::{
    fourier_discriminator, fourier_matrix, fourier_rank1_discriminator, rank1_factorization, reflection_diamond,
    reflection_matrix, ReflectionSpec,
};
use povm_duel::{Complex64, ComplexMatrix, DensityMatrix, VonNeumannMeasurement};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

/// Rounding slack for comparisons of independently evaluated bounds.
const ROUNDING: f64 = 1e-12;

/// 1/2 + sqrt(2)/4 to the precision quoted for the Hadamard benchmark.
const HADAMARD_SUCCESS: f64 = 0.8535534;

struct Haar {
    u: VonNeumannMeasurement,
    report: DiscriminationReport,
}

struct Ctx {
    dir: tempfile::TempDir,
    reports: Vec<PathBuf>,
    haar: Vec<Haar>,
    haar_time: Duration,
}

impl Ctx {
    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn fourier_file(&self, d: usize) -> Result<PathBuf> {
        let path = self.path(&format!("f{d}.json"));
        if !path.exists() {
            let out = cli(&["gen", "fourier", "--dim", &d.to_string(), "-o", s(&path)])?;
            ensure!(out.status.success(), "gen fourier {d}: {}", stderr(&out));
        }
        Ok(path)
    }

    /// `distance U [V] -o`, returning the parsed report.
    fn distance(&mut self, tag: &str, u: &Path, v: Option<&Path>) -> Result<Value> {
        let out_path = self.path(&format!("distance-{tag}.json"));
        let mut args = vec!["distance", s(u)];
        if let Some(v) = v {
            args.push(s(v));
        }
        args.extend(["-o", s(&out_path)]);
        let out = cli(&args)?;
        ensure!(out.status.success(), "distance {tag} exited {:?}: {}", out.status.code(), stderr(&out));
        self.reports.push(out_path.clone());
        read_json(&out_path)
    }

    /// Runs a command that prints its report, keeping a copy for `verify`.
    fn stdout_report(&mut self, tag: &str, args: &[&str]) -> Result<(i32, Value)> {
        let out = cli(args)?;
        let code = out.status.code().unwrap_or(-1);
        let path = self.path(&format!("{tag}.json"));
        std::fs::write(&path, &out.stdout)?;
        let v: Value = serde_json::from_slice(&out.stdout)
            .with_context(|| format!("{tag}: stdout is not a report ({})", stderr(&out)))?;
        self.reports.push(path);
        Ok((code, v))
    }
}

fn s(p: &Path) -> &str {
    p.to_str().expect("utf-8 temp path")
}

fn cli(args: &[&str]) -> Result<Output> {
    Command::new(env!("CARGO_BIN_EXE_povm-duel"))
        .args(args)
        .env_remove("POVM_DUEL_GAP")
        .output()
        .context("spawning povm-duel")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).trim().to_string()
}

fn read_json(path: &Path) -> Result<Value> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

fn num(v: &Value, ptr: &str) -> Result<f64> {
    v.pointer(ptr).and_then(Value::as_f64).ok_or_else(|| anyhow!("missing number at {ptr}"))
}

fn text<'a>(v: &'a Value, ptr: &str) -> Result<&'a str> {
    v.pointer(ptr).and_then(Value::as_str).ok_or_else(|| anyhow!("missing string at {ptr}"))
}

/// `max_i |sum_k conj(U_ki) X_ki|`.
fn diag_defect(u: &ComplexMatrix, x: &ComplexMatrix) -> f64 {
    let d = u.rows();
    (0..d).map(|i| (0..d).map(|k| u[(k, i)].conj() * x[(k, i)]).sum::<Complex64>().norm()).fold(0.0, f64::max)
}

fn fourier_perfection(ctx: &mut Ctx) -> Result<String> {
    let mut worst_diamond = 0.0f64;
    let mut worst_residual = 0.0f64;
    for d in 4..=8 {
        let f = ctx.fourier_file(d)?;
        let r = ctx.distance(&format!("f{d}"), &f, None)?;
        let diamond = num(&r, "/distance/diamond")?;
        ensure!((diamond - 2.0).abs() <= 1e-6, "d = {d}: diamond {diamond}");
        worst_diamond = worst_diamond.max((diamond - 2.0).abs());

        let (code, p) = ctx.stdout_report(&format!("perfect-f{d}"), &["perfect", s(&f)])?;
        ensure!(code == 0, "perfect d = {d} exited {code}");
        ensure!(text(&p, "/perfect/status")? == "certified-perfect", "d = {d}: status");
        let residual = num(&p, "/perfect/witness/residual")?;
        ensure!(residual <= 1e-9, "d = {d}: residual {residual}");
        worst_residual = worst_residual.max(residual);

        let x = fourier_discriminator(d)?;
        let defect = diag_defect(fourier_matrix(d)?.unitary(), x.matrix());
        ensure!(defect <= 1e-10 && x.rank() <= 2, "d = {d}: X defect {defect}, rank {}", x.rank());
    }
    Ok(format!("max |diamond - 2| = {worst_diamond:.1e}, max residual = {worst_residual:.1e}"))
}

fn fourier_small(ctx: &mut Ctx) -> Result<String> {
    for d in [2, 3] {
        let f = ctx.fourier_file(d)?;
        let (code, p) = ctx.stdout_report(&format!("perfect-f{d}"), &["perfect", s(&f)])?;
        ensure!(code == 1, "perfect d = {d} exited {code}");
        ensure!(text(&p, "/perfect/status")? == "certified-imperfect", "d = {d}: status");
    }
    let f3 = ctx.fourier_file(3)?;
    let (code, t) = ctx.stdout_report("tracecheck-f3", &["tracecheck", s(&f3)])?;
    ensure!(code == 0, "tracecheck exited {code}");
    // every diagonal entry of F_3 has modulus 1/sqrt(3)
    let expected = 3.0 * (1.0 / 3f64.sqrt());
    let got = num(&t, "/tracecheck/trace_value")?;
    ensure!((got - expected).abs() <= 1e-12, "trace {got} vs {expected}");
    ensure!(t.pointer("/tracecheck/d3_verdict") == Some(&Value::Bool(false)), "d3 verdict");
    Ok(format!("sum |U_ii| = {got:.15}"))
}

fn prime_entanglement(ctx: &mut Ctx) -> Result<String> {
    let mut smallest = f64::INFINITY;
    for d in [5, 7] {
        let f = ctx.fourier_file(d)?;
        let (code, c) = ctx.stdout_report(&format!("classical-f{d}"), &["classical", s(&f)])?;
        ensure!(code == 0, "classical d = {d} exited {code}");
        let sigma = num(&c, "/classical/min_singular_value")?;
        ensure!(sigma > 1e-9, "d = {d}: sigma_min {sigma}");
        let u = fourier_matrix(d)?;
        for mask in 1u32..(1 << d) - 1 {
            let idx: Vec<usize> = (0..d).filter(|&i| mask >> i & 1 == 1).collect();
            let sv = svd_values(&u.unitary().principal_submatrix(&idx));
            let m = sv.iter().copied().fold(f64::INFINITY, f64::min);
            ensure!(m > 1e-9, "d = {d}: subset {idx:?} has sigma_min {m}");
            smallest = smallest.min(m);
        }
        let (code, p) = ctx.stdout_report(&format!("perfect-prime-f{d}"), &["perfect", s(&f)])?;
        ensure!(code == 0 && text(&p, "/perfect/status")? == "certified-perfect", "perfect d = {d}");
    }
    for d in [4, 8, 9] {
        let (m, n) = rank1_factorization(d).ok_or_else(|| anyhow!("no factorization for {d}"))?;
        let x = fourier_rank1_discriminator(d, m, n)?;
        let defect = diag_defect(fourier_matrix(d)?.unitary(), x.matrix());
        ensure!(x.rank() == 1 && defect <= 1e-10, "d = {d}: X' defect {defect}");
    }
    Ok(format!("smallest sigma_min over proper subsets = {smallest:.3e}"))
}

fn write_reflection(ctx: &Ctx, spec: &ReflectionSpec, tag: &str) -> Result<PathBuf> {
    let axis: Vec<[f64; 2]> = spec.axis.iter().map(|z| [z.re, z.im]).collect();
    let axis_path = ctx.path(&format!("axis-{tag}.json"));
    std::fs::write(&axis_path, serde_json::json!({ "axis": axis }).to_string())?;
    let path = ctx.path(&format!("refl-{tag}.json"));
    let out = cli(&["gen", "reflection", "--axis", s(&axis_path), "-o", s(&path)])?;
    ensure!(out.status.success(), "gen reflection {tag}: {}", stderr(&out));
    Ok(path)
}

fn reflections(ctx: &mut Ctx) -> Result<String> {
    let mut worst = 0.0f64;
    for d in 2..=4 {
        for omega in [0.55, 0.65, 0.75, 0.85, 0.95] {
            let spec = ReflectionSpec::with_omega(d, omega)?;
            let tag = format!("d{d}-w{omega}");
            let path = write_reflection(ctx, &spec, &tag)?;
            let got = num(&ctx.distance(&tag, &path, None)?, "/distance/diamond")?;
            let expected = 2.0 * (1.0 - 4.0 * (omega - 0.5) * (omega - 0.5)).sqrt();
            ensure!((got - expected).abs() <= 1e-6, "d {d} omega {omega}: {got} vs {expected}");
            worst = worst.max((got - expected).abs());
        }
    }
    let light = [(2, 0.5), (3, 1.0 / 3.0), (3, 0.45), (3, 0.5), (4, 0.25), (4, 0.3), (4, 0.5)];
    let mut worst_residual = 0.0f64;
    for (d, omega) in light {
        let spec = ReflectionSpec::with_omega(d, omega)?;
        let cf = reflection_diamond(&spec)?;
        let u = reflection_matrix(&spec);
        let rho = cf.discriminator.matrix();
        let residual = diag_defect(u.unitary(), rho);
        ensure!(residual <= 1e-9, "d {d} omega {omega}: residual {residual}");
        ensure!(cf.discriminator.rank() <= 2 && (rho.trace().re - 1.0).abs() <= 1e-12, "not a rank-2 state");
        worst_residual = worst_residual.max(residual);
        let tag = format!("light-d{d}-w{omega:.3}");
        let path = write_reflection(ctx, &spec, &tag)?;
        let got = num(&ctx.distance(&tag, &path, None)?, "/distance/diamond")?;
        ensure!((got - 2.0).abs() <= 1e-6, "d {d} omega {omega}: diamond {got}");
    }
    Ok(format!("max drift {worst:.1e}, max light-axis residual {worst_residual:.1e}"))
}

fn saddle_duality(ctx: &mut Ctx) -> Result<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_601);
    let opts = SolverOptions::default();
    let start = Instant::now();
    let mut worst_gap = 0.0f64;
    let mut records = 0usize;
    for k in 0..100 {
        let d = 2 + k % 5;
        let u = VonNeumannMeasurement::new(haar_unitary(d, &mut rng))?;
        let outcome = solve_nu(&u, &opts)?;
        // primal and dual are evaluated independently and meet to a few ulps at convergence
        for rec in &outcome.history {
            ensure!(
                rec.dual <= rec.primal + ROUNDING,
                "instance {k} iteration {}: dual {} > primal {}",
                rec.iteration,
                rec.dual,
                rec.primal
            );
        }
        let dual = outcome.certificate.dual_value;
        for sample in &outcome.smoothing_trace {
            ensure!(
                sample.primal + ROUNDING >= dual,
                "instance {k} iterate {}: primal {} < dual {dual}",
                sample.iteration,
                sample.primal
            );
        }
        records += outcome.history.len() + outcome.smoothing_trace.len();
        let gap = outcome.certificate.gap;
        ensure!(gap <= 1e-6, "instance {k} (d = {d}): gap {gap:e}");
        worst_gap = worst_gap.max(gap);
        ctx.haar.push(Haar { u, report: DiscriminationReport::from_outcome(outcome) });
    }
    ctx.haar_time = start.elapsed();
    ensure!(ctx.haar_time <= Duration::from_secs(600), "took {:?}", ctx.haar_time);
    Ok(format!("max gap {worst_gap:.1e}, {records} iterates checked, {:.1} s", ctx.haar_time.as_secs_f64()))
}

/// Eigenvalues of a 2x2 matrix from its trace and determinant.
fn eig2(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> (Complex64, Complex64) {
    let half_tr = (a + d) * 0.5;
    let disc = (half_tr * half_tr - (a * d - b * c)).sqrt();
    (half_tr + disc, half_tr - disc)
}

fn dist_to_segment(p: Complex64, q: Complex64) -> f64 {
    let e = q - p;
    let len2 = e.norm_sqr();
    if len2 == 0.0 {
        return p.norm();
    }
    let t = (-(p.re * e.re + p.im * e.im) / len2).clamp(0.0, 1.0);
    (p + e * t).norm()
}

/// `max_phi dist(0, [lambda_1, lambda_2])` for `F_2 diag(1, e^{i phi})`.
fn hadamard_nu_oracle() -> f64 {
    let h = 1.0 / 2f64.sqrt();
    let f = |phi: f64| {
        let z = Complex64::from_polar(h, phi);
        let (l1, l2) = eig2(Complex64::new(h, 0.0), z, Complex64::new(h, 0.0), -z);
        dist_to_segment(l1, l2)
    };
    let n = 200_000;
    let step = TAU / n as f64;
    let best = (0..n).max_by(|&a, &b| f(a as f64 * step).total_cmp(&f(b as f64 * step))).unwrap();
    let (mut lo, mut hi) = ((best as f64 - 1.0) * step, (best as f64 + 1.0) * step);
    for _ in 0..200 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if f(m1) < f(m2) {
            lo = m1;
        } else {
            hi = m2;
        }
    }
    f(0.5 * (lo + hi))
}

fn hadamard(ctx: &mut Ctx) -> Result<String> {
    let nu = hadamard_nu_oracle();
    let oracle_diamond = 2.0 * (1.0 - nu * nu).sqrt();
    let oracle_success = 0.5 + oracle_diamond / 4.0;
    ensure!((oracle_success - HADAMARD_SUCCESS).abs() <= 1e-6, "oracle success {oracle_success}");
    ensure!((oracle_diamond - 2f64.sqrt()).abs() <= 1e-6, "oracle diamond {oracle_diamond}");

    let f2 = ctx.fourier_file(2)?;
    let r = ctx.distance("f2", &f2, None)?;
    let diamond = num(&r, "/distance/diamond")?;
    let success = num(&r, "/distance/success_probability")?;
    ensure!((diamond - oracle_diamond).abs() <= 1e-6, "diamond {diamond} vs {oracle_diamond}");
    ensure!((success - HADAMARD_SUCCESS).abs() <= 1e-6, "success {success}");

    let (code, c) = ctx.stdout_report("classical-f2", &["classical", s(&f2)])?;
    ensure!(code == 0, "classical exited {code}");
    let classical = num(&c, "/classical/probability_bound")?;
    ensure!((classical - success).abs() <= 1e-6, "classical {classical} vs entangled {success}");
    Ok(format!("diamond {diamond:.9}, success {success:.9}, classical {classical:.9}"))
}

fn sandwich(ctx: &mut Ctx) -> Result<String> {
    let mut min_slack = f64::INFINITY;
    for (k, h) in ctx.haar.iter().enumerate() {
        let id = VonNeumannMeasurement::computational(h.u.dim());
        let (lower, upper) = sandwich_bounds(&h.u, &id)?;
        let diamond = h.report.diamond;
        ensure!(lower <= diamond + 1e-7, "instance {k}: lower {lower} > {diamond}");
        ensure!(diamond <= upper + 1e-7, "instance {k}: {diamond} > upper {upper}");
        min_slack = min_slack.min((diamond - lower).min(upper - diamond));
    }
    Ok(format!("{} instances, tightest side {min_slack:.1e}", ctx.haar.len()))
}

fn evaluation_consistency(ctx: &mut Ctx) -> Result<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst = 0.0f64;
    let mut states = 0;
    for (k, h) in ctx.haar.iter().enumerate() {
        let at = evaluate_distance_at_state(&h.u, &h.report.discriminator)?;
        ensure!((at - h.report.diamond).abs() <= 1e-6, "instance {k}: {at} vs {}", h.report.diamond);
        worst = worst.max((at - h.report.diamond).abs());
        if k < 10 {
            let d = h.u.dim();
            for _ in 0..50 {
                let rank = rng.random_range(1..=d);
                let rho = DensityMatrix::new(random_density(d, rank, &mut rng))?;
                let e = evaluate_distance_at_state(&h.u, &rho)?;
                ensure!(e <= h.report.diamond + 1e-9, "instance {k}: random state gives {e} > {}", h.report.diamond);
                states += 1;
            }
        }
    }
    Ok(format!("max drift {worst:.1e}, {states} random states below the optimum"))
}

fn simulation(ctx: &mut Ctx) -> Result<String> {
    let f2 = ctx.fourier_file(2)?;
    let args = ["simulate", s(&f2), "--trials", "100000", "--seed", "31"];
    let (code, a) = ctx.stdout_report("simulate-f2-a", &args)?;
    ensure!(code == 0, "simulate exited {code}");
    let (_, b) = ctx.stdout_report("simulate-f2-b", &args)?;
    let emp = num(&a, "/simulation/empirical_success")?;
    let sigma = (HADAMARD_SUCCESS * (1.0 - HADAMARD_SUCCESS) / 1e5).sqrt();
    ensure!((emp - HADAMARD_SUCCESS).abs() <= 3.0 * sigma, "F2 empirical {emp}, 3 sigma = {}", 3.0 * sigma);
    let strip = |mut v: Value| {
        v.as_object_mut().map(|o| o.remove("wall_time_seconds"));
        v
    };
    ensure!(
        text(&a, "/simulation/transcript_sha256")? == text(&b, "/simulation/transcript_sha256")?,
        "transcripts differ"
    );
    ensure!(strip(a) == strip(b), "reports differ beyond wall time");

    let f4 = ctx.fourier_file(4)?;
    let (code, c) = ctx.stdout_report("simulate-f4", &["simulate", s(&f4), "--trials", "10000", "--seed", "5"])?;
    ensure!(code == 0, "simulate F4 exited {code}");
    let emp4 = num(&c, "/simulation/empirical_success")?;
    ensure!(emp4 == 1.0, "F4 empirical {emp4}");
    Ok(format!("F2 {emp:.5} (sigma {sigma:.1e}), F4 {emp4}, transcripts identical"))
}

fn invariance(_: &mut Ctx) -> Result<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(1010);
    let opts = SolverOptions::default();
    let vn = |m: ComplexMatrix| VonNeumannMeasurement::new(m);
    let dist = |u: &ComplexMatrix, v: &ComplexMatrix| -> Result<f64> {
        Ok(diamond_distance(&vn(u.clone())?, &vn(v.clone())?, &opts)?.diamond)
    };
    let mut worst = [0.0f64; 5];
    for k in 0..20 {
        let d = 2 + k % 4;
        let u = haar_unitary(d, &mut rng);
        let v = haar_unitary(d, &mut rng);
        let id = ComplexMatrix::identity(d);
        let base = dist(&u, &id)?;
        let pair = dist(&u, &v)?;
        let e = phase_diag(&random_phases(d, &mut rng));
        let g = Complex64::from_polar(1.0, rng.random_range(-PI..PI));
        let p = permutation_matrix(&random_permutation(d, &mut rng));
        let w = haar_unitary(d, &mut rng);
        let drifts = [
            dist(&(&u * &e), &id)? - base,
            dist(&u.scale_c(g), &id)? - base,
            dist(&(&(&p * &u) * &p.transpose()), &id)? - base,
            dist(&(&u * &p), &(&v * &p))? - pair,
            dist(&(&w * &u), &(&w * &v))? - pair,
        ];
        for (slot, drift) in worst.iter_mut().zip(drifts) {
            *slot = slot.max(drift.abs());
        }
    }
    let names = ["UE", "phase", "PUP^T", "(UP, VP)", "(WU, WV)"];
    for (name, w) in names.iter().zip(worst) {
        ensure!(w <= 1e-6, "{name}: drift {w:e}");
    }
    Ok(format!("max drift {:.1e}", worst.iter().copied().fold(0.0, f64::max)))
}

fn verify_all(ctx: &mut Ctx) -> Result<String> {
    let opts = SolverOptions::default();
    for (k, h) in ctx.haar.iter().enumerate() {
        let id = VonNeumannMeasurement::computational(h.u.dim());
        let file = ReportFile::from_distance(&h.u, &id, &opts, &h.report)?.with_wall_time(0.0);
        let path = ctx.path(&format!("haar-{k}.json"));
        std::fs::write(&path, file.to_json_string())?;
        ctx.reports.push(path);
    }
    let start = Instant::now();
    for path in &ctx.reports {
        let out = cli(&["verify", s(path)])?;
        ensure!(
            out.status.success(),
            "{} failed verification:\n{}",
            path.display(),
            String::from_utf8_lossy(&out.stdout)
        );
    }
    Ok(format!("{} reports verified in {:.1} s", ctx.reports.len(), start.elapsed().as_secs_f64()))
}

type Criterion = fn(&mut Ctx) -> Result<String>;

fn main() -> ExitCode {
    let criteria: [(&str, Criterion); 11] = [
        ("fourier perfection d = 4..8", fourier_perfection),
        ("fourier imperfection d = 2, 3", fourier_small),
        ("entanglement needed at primes", prime_entanglement),
        ("reflection closed form", reflections),
        ("saddle duality on 100 haar unitaries", saddle_duality),
        ("hadamard benchmark", hadamard),
        ("sandwich bounds", sandwich),
        ("evaluation at the discriminator", evaluation_consistency),
        ("protocol simulation", simulation),
        ("invariance", invariance),
        ("verify every report", verify_all),
    ];
    let mut ctx = Ctx {
        dir: tempfile::tempdir().expect("temp dir"),
        reports: Vec::new(),
        haar: Vec::new(),
        haar_time: Duration::ZERO,
    };
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = run(&mut ctx);
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} [{secs:.1} s]", k + 1),
            Err(e) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {e:#} [{secs:.1} s]", k + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
