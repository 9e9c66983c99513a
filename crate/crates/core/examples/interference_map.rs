//! Interference spectrum over channel and angle, and where each interferer
//! shows up in it.

use fda_codesign::analysis::{angle_grid, interference_spectrum};
use fda_codesign::interference::{channel_powers, scenario_covariance};
use fda_codesign::{Result, ScenarioConfig};

pub fn run() -> Result<Vec<(usize, f64)>> {
    let scenario = ScenarioConfig::benchmark();
    let cfg = &scenario.array;
    let cov = scenario_covariance(&scenario)?;
    println!("Qbar order {}, condition number {:.3e}", cov.dim(), cov.condition_number());

    for (i, intf) in scenario.interferers.iter().enumerate() {
        let p = channel_powers(intf, cfg, scenario.target.noise_power);
        let powers: Vec<String> = p.powers.iter().map(|v| format!("{v:.1}")).collect();
        println!("interferer {} at {}°: channel powers [{}]", i + 1, intf.angle_deg, powers.join(", "));
    }

    let spectrum = interference_spectrum(&cov, &angle_grid(-90.0, 90.0, 0.25), cfg)?;
    let mut dips = Vec::new();
    for (m, row) in spectrum.values.iter().enumerate() {
        let (k, v) = row
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("nonempty grid");
        let theta = spectrum.theta_deg[k];
        println!("channel {}: minimum {v:.4} at {theta:+.2}°", m + 1);
        dips.push((m, theta));
    }
    Ok(dips)
}

fn main() {
    run().expect("interference spectrum");
}
