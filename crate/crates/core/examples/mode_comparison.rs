//! Baseline, weight-only, waveform-only and joint designs side by side.
//!
//! Weight-only and joint use the benchmark tolerances. Waveform-only cannot
//! push band 2 below `1/N_T` with flat weights, so it runs with the looser
//! `eta_2 = 101/300`.

use fda_codesign::codesign::{run_mode, DesignContext, Mode, RunOptions};
use fda_codesign::{Result, ScenarioConfig};

pub fn run(iters: usize, trials: usize) -> Result<Vec<(Mode, f64)>> {
    let strict = ScenarioConfig::benchmark();
    let mut loose = strict.clone();
    loose.shared_bands[1].eta = 101.0 / 300.0;

    let mut rows = Vec::new();
    for (mode, scenario) in [
        (Mode::Baseline, &strict),
        (Mode::WeightOnly, &strict),
        (Mode::WaveformOnly, &loose),
        (Mode::Joint, &strict),
    ] {
        let ctx = DesignContext::new(scenario)?;
        let opts = RunOptions {
            max_iters: iters,
            trials,
            ..RunOptions::from_scenario(scenario)
        };
        let r = run_mode(&ctx, mode, opts)?;
        let bands: Vec<String> = r.feasibility.bands.iter().map(|b| format!("{:.2e}", b.energy)).collect();
        println!(
            "{:9} {:8.4} dB  feasible {:5}  E_b [{}]",
            mode.as_str(),
            r.sinr_db,
            r.feasibility.feasible,
            bands.join(", ")
        );
        rows.push((mode, r.sinr_db));
    }
    Ok(rows)
}

fn main() {
    let iters = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(4);
    if let Err(e) = run(iters, 1000) {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
