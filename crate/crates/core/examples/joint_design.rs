//! Joint waveform and weight design for the six-element benchmark scenario.
//!
//! `cargo run --release --example joint_design [scenario.json]`

use fda_codesign::codesign::{run_mode, DesignContext, Mode, RunOptions};
use fda_codesign::scenario::load_scenario;
use fda_codesign::{Result, ScenarioConfig};

pub fn run(path: Option<String>) -> Result<()> {
    let scenario = match path {
        Some(p) => load_scenario(p)?,
        None => ScenarioConfig::benchmark(),
    };
    let ctx = DesignContext::new(&scenario)?;
    let result = run_mode(&ctx, Mode::Joint, RunOptions::from_scenario(&scenario))?;

    println!("SINR {:.4} dB", result.sinr_db);
    for (q, v) in result.sinr_trace_db.iter().enumerate() {
        println!("  after round {q}: {v:.6} dB");
    }
    for step in &result.steps {
        println!(
            "  round {} {:9}: relaxation {:.6}, {} of {} trials feasible{}",
            step.iteration,
            step.step,
            step.sdp_value,
            step.feasible_trials,
            step.trials,
            if step.accepted { ", accepted" } else { "" }
        );
    }
    for band in &result.feasibility.bands {
        println!("{} ({:?}): E = {:.3e}, limit {:.3e}", band.name, band.case, band.energy, band.eta);
    }
    let power: Vec<String> = result.weights.iter().map(|w| format!("{:.3}", w.norm_sqr())).collect();
    println!("|w|^2 = [{}]", power.join(", "));
    Ok(())
}

fn main() {
    if let Err(e) = run(std::env::args().nth(1)) {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
