//! Energy a waveform set puts into a shared band, computed three ways and by
//! integrating its spectral density.

use fda_codesign::linalg::{quad_form, CVec};
use fda_codesign::scenario::SharedBandSpec;
use fda_codesign::signal_model::reference_lfm;
use fda_codesign::spectral::{band_energy, band_energy_quadrature, esd_curve, h_b_matrix, i_tilde_matrix};
use fda_codesign::{Result, ScenarioConfig};

pub fn run() -> Result<f64> {
    let mut scenario = ScenarioConfig::benchmark();
    scenario.shared_bands = vec![
        SharedBandSpec::new(0.60, 0.64, 1.0),
        SharedBandSpec::new(0.073, 0.2, 1.0),
        SharedBandSpec::new(0.556, 0.884, 1.0),
    ];
    let cfg = &scenario.array;
    let s = reference_lfm(cfg).waveforms;
    let w = CVec::from_fn(cfg.n_tx, |m, _| fda_codesign::linalg::c(1.0 + 0.1 * m as f64, 0.0));

    let mut worst = 0.0f64;
    for (band, spec) in scenario.band_indexing().iter().zip(&scenario.shared_bands) {
        let direct = band_energy(&s, &w, band);
        let by_weights = quad_form(&i_tilde_matrix(&s, band), &w);
        let by_waveforms = quad_form(&h_b_matrix(&w, band, cfg), &s.vec_waveform());
        let integrated = band_energy_quadrature(&s, &w, spec, cfg, 4096);
        println!(
            "[{:.3}, {:.3}] {:?}: {direct:.9} / {by_weights:.9} / {by_waveforms:.9}, integrated {integrated:.9}",
            spec.f_low, spec.f_high, band.case
        );
        worst = worst.max((direct - by_weights).abs()).max((direct - by_waveforms).abs());
    }

    let esd = esd_curve(&s, &w, cfg, 64);
    let peak = esd.iter().max_by(|a, b| a.value.total_cmp(&b.value)).expect("nonempty");
    println!("ESD peak {:.3} at {:.4} (channel {})", peak.value, peak.freq, peak.channel + 1);
    println!("largest disagreement between forms {worst:.2e}");
    Ok(worst)
}

fn main() {
    run().expect("band energies");
}
