//! Command-line front end: `design`, `evaluate` and `selftest`.
//!
//! Exit codes: 0 on success, 2 when the scenario is infeasible, 1 for I/O,
//! parse and every other failure.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rand::Rng;

use crate::analysis::{self, ReportInput, RunManifest, Summary};
use crate::codesign::{run_mode, DesignContext, Mode, RunOptions};
use crate::error::{Error, Result};
use crate::interference::{off_diagonal_ratio, simulate_interferer_channels, InterfererProcess};
use crate::linalg::{c, quad_form, CMat, CVec};
use crate::receiver::{mvdr_weights, ReceiverModel};
use crate::scenario::{load_scenario, BandCase, ScenarioConfig, SharedBandSpec};
use crate::seeds::{rng_for, Purpose};
use crate::signal_model::WaveformSet;
use crate::spectral::{band_energy, frequency_gram, h_b_matrix, i_tilde_matrix};

pub const THREADS_ENV: &str = "FDA_CODESIGN_THREADS";

#[derive(Debug, Parser)]
#[command(name = "fda-codesign", version, about = "Joint FDA radar waveform and weight design")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Design waveforms and weights for a scenario and write a report.
    Design(DesignArgs),
    /// Recompute a stored design's figures of merit.
    Evaluate(EvaluateArgs),
    /// Run the built-in consistency checks on a small configuration.
    Selftest,
}

#[derive(Debug, Args)]
pub struct DesignArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    #[arg(long, default_value = "joint")]
    pub mode: Mode,
    /// Master seed (defaults to the scenario's).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Alternation rounds (defaults to the scenario's).
    #[arg(long)]
    pub iters: Option<usize>,
    /// Randomization trials per rounding step (defaults to the scenario's).
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Directory written by `design`.
    #[arg(long)]
    pub design: PathBuf,
    #[arg(long)]
    pub scenario: PathBuf,
    /// Where to write the recomputed report (default `<design>/evaluation`).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Infeasible { .. } => 2,
        _ => 1,
    }
}

/// Size the global worker pool from `FDA_CODESIGN_THREADS` (0 or unset = auto).
pub fn init_threads() {
    let n = std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok()).unwrap_or(0);
    if n > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("could not size the thread pool: {e}");
        }
    }
}

/// Parse arguments, run, and return the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let outcome = match cli.command {
        Command::Design(a) => cmd_design(&a).map(|_| 0),
        Command::Evaluate(a) => cmd_evaluate(&a).map(|_| 0),
        Command::Selftest => Ok(if cmd_selftest() { 0 } else { 1 }),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn cmd_design(args: &DesignArgs) -> Result<Summary> {
    let scenario = load_scenario(&args.scenario)?;
    let ctx = DesignContext::new(&scenario)?;
    let mut opts = RunOptions::from_scenario(&scenario);
    opts.seed = args.seed.unwrap_or(opts.seed);
    opts.max_iters = args.iters.unwrap_or(opts.max_iters);
    opts.trials = args.trials.unwrap_or(opts.trials);
    let start = Instant::now();
    let result = run_mode(&ctx, args.mode, opts)?;
    let design_time = start.elapsed();
    let manifest = RunManifest {
        scenario_path: Some(args.scenario.display().to_string()),
        mode: args.mode.to_string(),
        seed: opts.seed,
        iters: opts.max_iters,
        trials: opts.trials,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
    };
    let summary = analysis::report(&result, &ctx, manifest, &args.out)?;
    write_timings(&args.out, design_time.as_secs_f64(), start.elapsed().as_secs_f64())?;
    println!(
        "{} design: SINR {:.4} dB, {}",
        args.mode,
        summary.sinr_db,
        if summary.feasible { "all constraints met" } else { "constraints violated" }
    );
    for b in &summary.bands {
        println!("  {}: E = {:.6e} (limit {:.6e})", b.name, b.energy, b.eta);
    }
    Ok(summary)
}

/// Wall-clock figures live outside `summary.json` so reruns stay byte-identical.
fn write_timings(out: &Path, design_s: f64, total_s: f64) -> Result<()> {
    let path = out.join("timings.log");
    let mut f = std::fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
    writeln!(f, "design_seconds {design_s:.3}\ntotal_seconds {total_s:.3}").map_err(|e| Error::io(&path, e))
}

pub fn cmd_evaluate(args: &EvaluateArgs) -> Result<Summary> {
    let scenario = load_scenario(&args.scenario)?;
    let ctx = DesignContext::new(&scenario)?;
    let stored = Summary::read(args.design.join("summary.json"))?;
    let s = WaveformSet::read_csv(args.design.join("waveforms.csv"))?;
    let w = analysis::read_weights(args.design.join("weights.csv"))?;
    let evaluation = analysis::evaluate(&ctx, &s, &w)?;
    let diff = analysis::compare_to_summary(&stored, &evaluation)?;
    if diff > 1e-9 {
        return Err(Error::Schema(format!(
            "stored summary disagrees with the recomputed design by {diff:.3e}"
        )));
    }
    let out = args.out.clone().unwrap_or_else(|| args.design.join("evaluation"));
    let summary = analysis::write_report(
        ReportInput {
            ctx: &ctx,
            manifest: stored.manifest.clone(),
            evaluation: &evaluation,
            sinr_trace_db: stored.sinr_trace_db.iter().map(|x| x.unwrap_or(f64::NEG_INFINITY)).collect(),
            steps: stored.steps.clone(),
            randomization_exhausted: stored.randomization_exhausted,
            mode_sinr_db: BTreeMap::new(),
        },
        &out,
    )?;
    println!("SINR {:.6} dB (stored {:.6} dB), max disagreement {diff:.2e}", summary.sinr_db, stored.sinr_db);
    for b in &summary.bands {
        println!(
            "  {}: E = {:.6e}, quadrature {:.6e} (limit {:.6e})",
            b.name, b.energy, b.energy_quadrature, b.eta
        );
    }
    Ok(summary)
}

/// One line of the self-test table.
#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn random_cvec(rng: &mut impl Rng, n: usize) -> CVec {
    CVec::from_fn(n, |_, _| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
}

/// Consistency checks on the reduced configuration.
pub fn selftest_checks() -> Vec<Check> {
    let mut checks = Vec::new();
    let mut push = |name, passed, detail: String| checks.push(Check { name, passed, detail });
    let scenario = ScenarioConfig::reduced();
    let cfg = &scenario.array;
    let ctx = match DesignContext::new(&scenario) {
        Ok(ctx) => ctx,
        Err(e) => {
            push("setup", false, e.to_string());
            return checks;
        }
    };
    let model: &ReceiverModel = &ctx.receiver;
    let mut rng = rng_for(0, Purpose::Evaluation, 0, 0);

    let mut worst = 0.0f64;
    for _ in 0..10 {
        let s = random_cvec(&mut rng, cfg.waveform_len());
        let w = random_cvec(&mut rng, cfg.n_tx);
        let a = quad_form(&model.psi_w(&w), &s);
        let b = quad_form(&model.psi_s(&s), &w);
        worst = worst.max((a - b).abs() / a.abs().max(1e-30));
    }
    push("sinr dual forms agree", worst <= 1e-10, format!("max relative difference {worst:.2e}"));

    let mut worst = 0.0f64;
    let mut cases = Vec::new();
    for (lo, hi) in [(0.4, 0.6), (0.2, 0.5), (0.1, 0.9)] {
        let mut sc = scenario.clone();
        sc.shared_bands = vec![SharedBandSpec::new(lo, hi, 1.0)];
        let band = sc.band_indexing()[0];
        cases.push(band.case);
        let mut set = WaveformSet::new(CMat::from_fn(cfg.n_tx, cfg.n_samples(), |_, _| {
            c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        }));
        set.normalize_rows();
        let w = random_cvec(&mut rng, cfg.n_tx);
        let e = band_energy(&set, &w, &band);
        let via_w = quad_form(&i_tilde_matrix(&set, &band), &w);
        let via_s = quad_form(&h_b_matrix(&w, &band, cfg), &set.vec_waveform());
        worst = worst.max((e - via_w).abs()).max((e - via_s).abs());
    }
    let all_cases = [BandCase::SameChannel, BandCase::Adjacent, BandCase::Spanning]
        .iter()
        .all(|k| cases.contains(k));
    let gram = frequency_gram(0.0, 1.0, cfg.n_samples()).map(|k| (k - CMat::identity(cfg.n_samples(), cfg.n_samples())).norm());
    let gram_ok = matches!(gram, Ok(d) if d <= 1e-12);
    push(
        "band energy forms agree",
        worst <= 1e-10 && all_cases && gram_ok,
        format!("max difference {worst:.2e} over all three band cases"),
    );

    let s = ctx.reference_waveforms.vec_snapshot();
    let w = ctx.reference_weights.clone();
    let u = model.signature(&s, &w);
    let gain = mvdr_weights(&u, &model.covariance.inverse).map(|v| (v.dotc(&u) - c(1.0, 0.0)).norm());
    push(
        "mvdr is distortionless",
        matches!(gain, Ok(g) if g <= 1e-10),
        format!("|v^H u - 1| = {:.2e}", gain.unwrap_or(f64::NAN)),
    );

    let sim = simulate_interferer_channels(&scenario.interferers[0], cfg, 1.0, InterfererProcess::Tone, 1000, 7);
    let ratio = off_diagonal_ratio(&sim);
    let powers = crate::interference::channel_powers(&scenario.interferers[0], cfg, 1.0).powers;
    let diag_err = (0..cfg.n_tx)
        .filter(|&m| powers[m] > 0.0)
        .map(|m| (sim[(m, m)].re - powers[m]).abs() / powers[m])
        .fold(0.0, f64::max);
    push(
        "channelized interference is uncorrelated",
        ratio < 0.05 && diag_err < 0.1,
        format!("off-diagonal ratio {ratio:.3e}, diagonal error {:.1}%", 100.0 * diag_err),
    );

    let design = run_mode(&ctx, Mode::Joint, RunOptions::from_scenario(&scenario));
    let (ok, detail) = match &design {
        Ok(r) => (r.feasibility.feasible, format!("SINR {:.4} dB", r.sinr_db)),
        Err(e) => (false, e.to_string()),
    };
    push("reduced joint design is feasible", ok, detail);
    checks
}

pub fn cmd_selftest() -> bool {
    let start = Instant::now();
    let checks = selftest_checks();
    for ch in &checks {
        println!("{:4}  {:42} {}", if ch.passed { "pass" } else { "FAIL" }, ch.name, ch.detail);
    }
    let passed = checks.iter().all(|c| c.passed);
    println!(
        "{} of {} checks passed in {:.1} s",
        checks.iter().filter(|c| c.passed).count(),
        checks.len(),
        start.elapsed().as_secs_f64()
    );
    passed
}
