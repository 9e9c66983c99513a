use fda_codesign::analysis::acf;
use fda_codesign::codesign::normalize_blocks;
use fda_codesign::interference::scenario_covariance;
use fda_codesign::linalg::{c, cis, hermitian_eigenvalues, quad_form, CMat, CVec};
use fda_codesign::receiver::ReceiverModel;
use fda_codesign::scenario::{normalize_band, SharedBandSpec};
use fda_codesign::sdp::{hermitian_to_real_embedding, real_embedding_to_hermitian};
use fda_codesign::signal_model::{
    rx_steering, snapshot_to_waveform, tx_steering_range_angle, waveform_to_snapshot, WaveformSet,
};
use fda_codesign::spectral::{band_energy, frequency_gram, h_b_matrix, i_tilde_matrix};
use fda_codesign::ScenarioConfig;
use proptest::prelude::*;
use std::sync::OnceLock;

fn reduced_model() -> &'static (ScenarioConfig, ReceiverModel) {
    static MODEL: OnceLock<(ScenarioConfig, ReceiverModel)> = OnceLock::new();
    MODEL.get_or_init(|| {
        let sc = ScenarioConfig::reduced();
        let cov = scenario_covariance(&sc).unwrap();
        let model = ReceiverModel::new(&sc, cov);
        (sc, model)
    })
}

fn cvec(n: usize) -> impl Strategy<Value = CVec> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n)
        .prop_map(|v| CVec::from_iterator(v.len(), v.into_iter().map(|(a, b)| c(a, b))))
}

fn nonzero_cvec(n: usize) -> impl Strategy<Value = CVec> {
    cvec(n).prop_filter("nonzero", |v| v.norm() > 1e-3)
}

fn band() -> impl Strategy<Value = (f64, f64)> {
    (0.0f64..1.0, 0.0f64..1.0)
        .prop_filter("distinct", |(a, b)| (a - b).abs() > 1e-3)
        .prop_map(|(a, b)| (a.min(b), a.max(b)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn sinr_forms_agree(s in cvec(48), w in nonzero_cvec(3)) {
        let (_, model) = reduced_model();
        let a = quad_form(&model.psi_w(&w), &s);
        let b = quad_form(&model.psi_s(&s), &w);
        prop_assert!((a - b).abs() <= 1e-10 * a.abs().max(1e-30));
        prop_assert!(a >= -1e-12);
    }

    #[test]
    fn sinr_ignores_global_phase(s in nonzero_cvec(48), w in nonzero_cvec(3), phi in 0.0f64..6.3) {
        let (_, model) = reduced_model();
        let base = model.sinr(&s, &w);
        prop_assert!((model.sinr(&(&s * cis(phi)), &w) - base).abs() <= 1e-10 * base);
        prop_assert!((model.sinr(&s, &(&w * cis(-phi))) - base).abs() <= 1e-10 * base);
    }

    #[test]
    fn band_energy_forms_agree(rows in cvec(3 * 16), w in cvec(3), (lo, hi) in band()) {
        let (sc, _) = reduced_model();
        let mut set = WaveformSet::new(CMat::from_fn(3, 16, |m, l| rows[m * 16 + l]));
        prop_assume!((0..3).all(|m| set.row_energy(m) > 1e-6));
        set.normalize_rows();
        let idx = normalize_band(&SharedBandSpec::new(lo, hi, 1.0), &sc.array);
        let e = band_energy(&set, &w, &idx);
        prop_assert!(e >= -1e-14);
        prop_assert!((e - quad_form(&i_tilde_matrix(&set, &idx), &w)).abs() <= 1e-10);
        prop_assert!((e - quad_form(&h_b_matrix(&w, &idx, &sc.array), &set.vec_waveform())).abs() <= 1e-10);
    }

    #[test]
    fn band_indexing_stays_in_range((lo, hi) in band(), n_tx in 1usize..9) {
        let mut cfg = ScenarioConfig::benchmark().array;
        cfg.n_tx = n_tx;
        let idx = normalize_band(&SharedBandSpec::new(lo, hi, 1.0), &cfg);
        prop_assert!(idx.low_channel <= idx.high_channel && idx.high_channel < n_tx);
        prop_assert!((0.0..=cfg.channel_width()).contains(&idx.local_low));
        prop_assert!((0.0..=cfg.channel_width()).contains(&idx.local_high));
    }

    #[test]
    fn frequency_gram_is_additive_and_psd(a in 0.0f64..1.0, b in 0.0f64..1.0, t in 0.0f64..1.0, l in 1usize..24) {
        let (a, b) = (a.min(b), a.max(b));
        let mid = a + t * (b - a);
        let whole = frequency_gram(a, b, l).unwrap();
        let split = frequency_gram(a, mid, l).unwrap() + frequency_gram(mid, b, l).unwrap();
        prop_assert!((&whole - split).norm() <= 1e-12);
        let ev = hermitian_eigenvalues(&whole);
        prop_assert!(ev[0] >= -1e-12 && ev[l - 1] <= 1.0 + 1e-12);
        for i in 1..l {
            prop_assert!((whole[(i, i - 1)] - whole[(1, 0)]).norm() <= 1e-14);
        }
    }

    #[test]
    fn steering_vectors_have_unit_modulus(r in 1.0f64..1e5, theta in -90.0f64..90.0) {
        let cfg = ScenarioConfig::benchmark().array;
        for z in tx_steering_range_angle(r, theta, &cfg).iter().chain(rx_steering(theta, &cfg).iter()) {
            prop_assert!((z.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn vectorizations_invert(s in cvec(24)) {
        let t = snapshot_to_waveform(&s, 4, 6);
        prop_assert_eq!(waveform_to_snapshot(&t, 4, 6), s.clone());
        let set = WaveformSet::from_vec_snapshot(&s, 4);
        prop_assert_eq!(set.vec_waveform(), t);
    }

    #[test]
    fn block_rescale_is_exact(s in cvec(40)) {
        prop_assume!((0..4).all(|m| s.rows(m * 10, 10).norm() > 1e-6));
        let out = normalize_blocks(&s, 4).unwrap();
        for m in 0..4 {
            prop_assert!((out.rows(m * 10, 10).norm_squared() - 0.25).abs() <= 1e-14);
        }
    }

    #[test]
    fn real_embedding_round_trips(v in cvec(25)) {
        let a = CMat::from_fn(5, 5, |i, j| v[i * 5 + j]);
        let h = (&a + a.adjoint()) * c(0.5, 0.0);
        let e = hermitian_to_real_embedding(&h).unwrap();
        prop_assert!((real_embedding_to_hermitian(&e) - &h).norm() <= 1e-14);
        let mut real: Vec<f64> = e.symmetric_eigenvalues().iter().copied().collect();
        real.sort_by(f64::total_cmp);
        let complex = hermitian_eigenvalues(&h);
        for (k, lam) in complex.iter().enumerate() {
            prop_assert!((real[2 * k] - lam).abs() <= 1e-10 && (real[2 * k + 1] - lam).abs() <= 1e-10);
        }
    }

    #[test]
    fn acf_is_symmetric_and_peaks_at_zero(v in nonzero_cvec(20)) {
        let set = WaveformSet::new(CMat::from_row_iterator(1, 20, v.iter().copied()));
        let r = acf(&set, 0);
        let n = r.magnitude.len();
        prop_assert!((r.magnitude[n / 2] - 1.0).abs() < 1e-12);
        for k in 0..n {
            prop_assert!((r.magnitude[k] - r.magnitude[n - 1 - k]).abs() <= 1e-12);
            prop_assert!(r.magnitude[k] <= 1.0 + 1e-12);
        }
    }
}
