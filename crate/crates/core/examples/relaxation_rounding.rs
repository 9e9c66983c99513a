//! One weight step by hand: build the relaxation, solve it, and round the
//! solution back to a weight vector by Gaussian randomization.

use fda_codesign::codesign::{build_weight_sdp, randomize_weights, DesignContext};
use fda_codesign::sdp::{rank_one_ratio, solve};
use fda_codesign::{Result, ScenarioConfig};

pub fn run() -> Result<(f64, f64)> {
    let scenario = ScenarioConfig::benchmark();
    let ctx = DesignContext::new(&scenario)?;
    let s = &ctx.reference_waveforms;

    let problem = build_weight_sdp(s, &ctx);
    for c in &problem.constraints {
        println!("constraint {:18} {:?} {:.6}", c.label, c.kind, c.rhs);
    }
    let sol = solve(&problem, ctx.settings)?;
    println!(
        "{:?} after {} iterations: value {:.8}, gap {:.2e}, residual {:.2e}, lambda2/lambda1 {:.3}",
        sol.status,
        sol.iterations,
        sol.objective_value,
        sol.duality_gap,
        sol.max_residual,
        rank_one_ratio(&sol.x)
    );

    let rounded = randomize_weights(&sol.x, s, &ctx, 1000, scenario.controls.rng_seed, 0);
    println!(
        "{} of {} trials feasible, best {:.8} ({:.2e} below the relaxation)",
        rounded.feasible_trials,
        rounded.trials,
        rounded.objective,
        sol.objective_value - rounded.objective
    );
    Ok((sol.objective_value, rounded.objective))
}

fn main() {
    run().expect("weight step");
}
