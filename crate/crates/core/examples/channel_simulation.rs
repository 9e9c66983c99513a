//! Mix, filter and sample a tone interferer through every receive channel and
//! compare the sample covariance with the analytic channel powers.

use fda_codesign::interference::{
    channel_powers, off_diagonal_ratio, simulate_interferer_channels, InterfererProcess,
};
use fda_codesign::scenario::InterfererSpec;
use fda_codesign::ScenarioConfig;

pub fn run(trials: usize) -> f64 {
    let cfg = ScenarioConfig::benchmark().array;
    let intf = InterfererSpec {
        freq_hz: 10_003.3e6,
        angle_deg: 20.0,
        inr_db: 25.0,
    };
    let expected = channel_powers(&intf, &cfg, 1.0);
    for process in [InterfererProcess::Tone, InterfererProcess::White] {
        let cov = simulate_interferer_channels(&intf, &cfg, 1.0, process, trials, 11);
        let diag: Vec<String> = (0..cfg.n_tx).map(|m| format!("{:.1}", cov[(m, m)].re)).collect();
        println!("{process:?}: diagonal [{}], off-diagonal ratio {:.3e}", diag.join(", "), off_diagonal_ratio(&cov));
    }
    let analytic: Vec<String> = expected.powers.iter().map(|p| format!("{p:.1}")).collect();
    println!("analytic   [{}]", analytic.join(", "));
    let cov = simulate_interferer_channels(&intf, &cfg, 1.0, InterfererProcess::Tone, trials, 11);
    off_diagonal_ratio(&cov)
}

fn main() {
    run(10_000);
}
