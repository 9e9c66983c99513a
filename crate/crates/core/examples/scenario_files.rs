//! Write a scenario to JSON, read it back, and see what validation rejects.

use fda_codesign::scenario::{load_scenario, save_scenario};
use fda_codesign::{Result, ScenarioConfig};

pub fn run(dir: &std::path::Path) -> Result<()> {
    let mut scenario = ScenarioConfig::benchmark();
    scenario.controls.rng_seed = 42;
    let path = dir.join("scenario.json");
    save_scenario(&scenario, &path)?;
    let back = load_scenario(&path)?;
    assert_eq!(back, scenario);
    println!("{} bytes written to {}", std::fs::metadata(&path).map(|m| m.len()).unwrap_or(0), path.display());

    let cfg = &back.array;
    println!(
        "{} x {} array, L = {}, channels {:?} MHz",
        cfg.n_tx,
        cfg.n_rx,
        cfg.n_samples(),
        cfg.channel_freqs_hz().iter().map(|f| f / 1e6).collect::<Vec<_>>()
    );
    for (band, spec) in back.band_indexing().iter().zip(&back.shared_bands) {
        println!("[{}, {}] -> channels {}..={} ({:?})", spec.f_low, spec.f_high, band.low_channel + 1, band.high_channel + 1, band.case);
    }

    let mut bad = scenario.clone();
    bad.array.delta_f_hz = 0.5e6;
    println!("narrow spacing: {}", bad.validate().unwrap_err());
    let mut bad = scenario;
    bad.interferers[1].angle_deg = 95.0;
    println!("bad angle: {}", bad.validate().unwrap_err());
    Ok(())
}

fn main() {
    let dir = std::env::temp_dir().join("fda-codesign-example");
    std::fs::create_dir_all(&dir).expect("temp dir");
    run(&dir).expect("scenario round trip");
}
