//! Receive beampattern and autocorrelation of a designed waveform set.

use fda_codesign::analysis::{acf, angle_grid, receive_beampattern};
use fda_codesign::codesign::{run_mode, DesignContext, Mode, RunOptions};
use fda_codesign::{Result, ScenarioConfig};

pub fn run() -> Result<f64> {
    let scenario = ScenarioConfig::reduced();
    let ctx = DesignContext::new(&scenario)?;
    let r = run_mode(&ctx, Mode::Joint, RunOptions::from_scenario(&scenario))?;
    let t = &scenario.target;

    let grid = angle_grid(-90.0, 90.0, 0.5);
    let pattern = receive_beampattern(&r.waveforms, &r.weights, &r.mvdr, t.range_m, &grid, &scenario.array);
    let at_target = receive_beampattern(&r.waveforms, &r.weights, &r.mvdr, t.range_m, &[t.angle_deg], &scenario.array)[0];
    println!("gain toward the target at {}°: {:.10}", t.angle_deg, at_target.power);
    for intf in &scenario.interferers {
        let nearest = pattern
            .iter()
            .min_by(|a, b| (a.theta_deg - intf.angle_deg).abs().total_cmp(&(b.theta_deg - intf.angle_deg).abs()))
            .expect("nonempty grid");
        println!("interferer at {:+}°: {:.2} dB below peak", intf.angle_deg, -nearest.normalized_db);
    }
    for m in 0..r.waveforms.n_tx() {
        println!("waveform {} PSL {:.2} dB", m + 1, acf(&r.waveforms, m).psl_db);
    }
    Ok(at_target.power)
}

fn main() {
    run().expect("beampattern");
}
