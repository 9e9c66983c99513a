//! Channelized interference statistics.
//!
//! Each receive channel mixes by its own carrier and low-pass filters, so an
//! external emitter only leaves power in the channel whose band contains it.
//! Stacked vectors are ordered receiver-major inside each snapshot (entry
//! `n * N_T + m`), matching `b_R ⊗ diag(...)` in the receive operator.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::linalg::{c, cis, kron, outer, CMat, CVec};
use crate::scenario::{ArrayConfig, InterfererSpec, ScenarioConfig};
use crate::seeds::{rng_for, Purpose};
use crate::signal_model::rx_steering;

/// Power that one interferer leaves in each channel.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelPowers {
    pub powers: Vec<f64>,
    /// Set when the tone falls outside every channel band.
    pub out_of_band: bool,
}

impl ChannelPowers {
    pub fn total(&self) -> f64 {
        self.powers.iter().sum()
    }
}

/// `P_k = sigma^2 10^(INR / 10)` for the channel whose band
/// `[f_k - f_s/2, f_k + f_s/2)` holds the tone.
pub fn channel_powers(intf: &InterfererSpec, cfg: &ArrayConfig, noise_power: f64) -> ChannelPowers {
    let p = noise_power * 10f64.powf(intf.inr_db / 10.0);
    let half = cfg.sample_rate_hz / 2.0;
    let mut powers = vec![0.0; cfg.n_tx];
    let hit = cfg
        .channel_freqs_hz()
        .iter()
        .position(|&fk| intf.freq_hz >= fk - half && intf.freq_hz < fk + half);
    match hit {
        Some(k) => powers[k] = p,
        None => log::warn!("interferer at {} Hz lies outside every channel band", intf.freq_hz),
    }
    ChannelPowers {
        powers,
        out_of_band: hit.is_none(),
    }
}

/// `Q_i = (b_R(theta_i) b_R^H(theta_i)) ⊗ P_i` in receiver-major order.
pub fn q_block(intf: &InterfererSpec, cfg: &ArrayConfig, noise_power: f64) -> CMat {
    let p = channel_powers(intf, cfg, noise_power);
    let b = rx_steering(intf.angle_deg, cfg);
    kron(&outer(&b, &b), &power_diag(&p))
}

/// The block exactly as printed, `P_i ⊗ b_R(theta_i) b_R^H(theta_t)`, in
/// transmit-major order. Not Hermitian unless `theta_i = theta_t`; kept for
/// comparison only.
pub fn q_block_printed(intf: &InterfererSpec, target_deg: f64, cfg: &ArrayConfig, noise_power: f64) -> CMat {
    let p = channel_powers(intf, cfg, noise_power);
    let bi = rx_steering(intf.angle_deg, cfg);
    let bt = rx_steering(target_deg, cfg);
    kron(&power_diag(&p), &outer(&bi, &bt))
}

fn power_diag(p: &ChannelPowers) -> CMat {
    CMat::from_diagonal(&CVec::from_iterator(p.powers.len(), p.powers.iter().map(|&x| c(x, 0.0))))
}

/// Interference-plus-noise statistics of one scenario.
#[derive(Debug, Clone)]
pub struct CovarianceModel {
    /// `Q_i` of each interferer, unnormalized.
    pub per_interferer: Vec<CMat>,
    /// Single-snapshot covariance `sum_i Q_i / sigma^2 + I` (order `N_T N_R`).
    pub single: CMat,
    /// `Qbar = sum_i (1 1^T) ⊗ Q_i / sigma^2 + I` (order `N_T N_R L`).
    pub full: CMat,
    /// `Qbar^{-1}` from a Cholesky factorization of `full`.
    pub inverse: CMat,
    pub noise_power: f64,
    pub n_samples: usize,
}

impl CovarianceModel {
    pub fn dim(&self) -> usize {
        self.full.nrows()
    }

    /// Ratio of the extreme eigenvalues of `full`, from the single-snapshot
    /// covariance (the other eigenvalues of `full` are all 1).
    pub fn condition_number(&self) -> f64 {
        let l = self.n_samples as f64;
        let n = self.single.nrows();
        let shifted = (&self.single - CMat::identity(n, n)) * c(l, 0.0) + CMat::identity(n, n);
        let ev = crate::linalg::hermitian_eigenvalues(&shifted);
        ev[ev.len() - 1] / ev[0].min(1.0)
    }
}

/// Assemble `Qbar` for a list of interferers. Fails when `N_T N_R L` exceeds
/// `size_cap`.
pub fn assemble_qbar(
    interferers: &[InterfererSpec],
    cfg: &ArrayConfig,
    noise_power: f64,
    size_cap: usize,
) -> Result<CovarianceModel> {
    let size = cfg.stacked_len();
    if size > size_cap {
        return Err(Error::SizeCap { size, cap: size_cap });
    }
    let l = cfg.n_samples();
    let nb = cfg.n_tx * cfg.n_rx;
    let per_interferer: Vec<CMat> = interferers.iter().map(|i| q_block(i, cfg, noise_power)).collect();
    let mut q = CMat::zeros(nb, nb);
    for qi in &per_interferer {
        q += qi;
    }
    q /= c(noise_power, 0.0);
    let ones = CMat::from_element(l, l, c(1.0, 0.0));
    let full = kron(&ones, &q) + CMat::identity(size, size);
    let inverse = full
        .clone()
        .cholesky()
        .ok_or(Error::NotPositiveDefinite("interference-plus-noise covariance"))?
        .inverse();
    Ok(CovarianceModel {
        per_interferer,
        single: q + CMat::identity(nb, nb),
        full,
        inverse,
        noise_power,
        n_samples: l,
    })
}

/// `assemble_qbar` over the scenario's own interferers and limits.
pub fn scenario_covariance(scenario: &ScenarioConfig) -> Result<CovarianceModel> {
    assemble_qbar(
        &scenario.interferers,
        &scenario.array,
        scenario.target.noise_power,
        scenario.controls.size_cap,
    )
}

/// Stochastic input used by the channelization check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InterfererProcess {
    /// A tone with uniformly random phase.
    Tone,
    /// Circular white Gaussian noise over the whole simulated band.
    White,
}

/// Empirical cross-channel covariance of a mixed and low-pass filtered
/// interferer.
///
/// Each trial synthesizes the emitter over the full FDA band at rate
/// `2 N_T delta_f`, mixes it down by every channel carrier, applies a
/// brick-wall low-pass of cutoff `f_{m,lp} f_s` in the FFT domain and keeps
/// the middle output sample of every channel. Trials are independent streams
/// of the master seed.
pub fn simulate_interferer_channels(
    intf: &InterfererSpec,
    cfg: &ArrayConfig,
    noise_power: f64,
    process: InterfererProcess,
    n_trials: usize,
    seed: u64,
) -> CMat {
    let n_tx = cfg.n_tx;
    let rate = 2.0 * n_tx as f64 * cfg.delta_f_hz.max(cfg.sample_rate_hz);
    let n = 64 * n_tx;
    let power = noise_power * 10f64.powf(intf.inr_db / 10.0);
    let offset = intf.freq_hz - cfg.carrier_hz;
    let channel_offsets: Vec<f64> = (0..n_tx).map(|m| m as f64 * cfg.delta_f_hz).collect();
    let cutoffs: Vec<f64> = cfg.lp_cutoffs().iter().map(|f| f * cfg.sample_rate_hz).collect();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let mid = n / 2;

    let outputs: Vec<CVec> = (0..n_trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = rng_for(seed, Purpose::MonteCarlo, 0, t as u64);
            let x: Vec<Complex64> = match process {
                InterfererProcess::Tone => {
                    let phase = rng.random::<f64>() * 2.0 * PI;
                    (0..n)
                        .map(|k| cis(2.0 * PI * offset * k as f64 / rate + phase) * power.sqrt())
                        .collect()
                }
                InterfererProcess::White => {
                    let sd = (power / 2.0).sqrt();
                    (0..n)
                        .map(|_| {
                            let re: f64 = StandardNormal.sample(&mut rng);
                            let im: f64 = StandardNormal.sample(&mut rng);
                            c(re * sd, im * sd)
                        })
                        .collect()
                }
            };
            let mut y = CVec::zeros(n_tx);
            for m in 0..n_tx {
                let mut buf: Vec<Complex64> = x
                    .iter()
                    .enumerate()
                    .map(|(k, v)| v * cis(-2.0 * PI * channel_offsets[m] * k as f64 / rate))
                    .collect();
                fwd.process(&mut buf);
                for (k, v) in buf.iter_mut().enumerate() {
                    let bin = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
                    if (bin * rate / n as f64).abs() > cutoffs[m] {
                        *v = Complex64::default();
                    }
                }
                inv.process(&mut buf);
                y[m] = buf[mid] / n as f64;
            }
            y
        })
        .collect();

    let mut cov = CMat::zeros(n_tx, n_tx);
    for y in &outputs {
        cov += outer(y, y);
    }
    if n_trials > 0 {
        cov /= c(n_trials as f64, 0.0);
    }
    cov
}

/// Expected channel powers of the white process: the fraction of the
/// simulated band each low-pass filter passes.
pub fn white_channel_powers(cfg: &ArrayConfig, inr_db: f64, noise_power: f64) -> Vec<f64> {
    let n_tx = cfg.n_tx;
    let rate = 2.0 * n_tx as f64 * cfg.delta_f_hz.max(cfg.sample_rate_hz);
    let n = 64 * n_tx;
    let power = noise_power * 10f64.powf(inr_db / 10.0);
    cfg.lp_cutoffs()
        .iter()
        .map(|f| {
            let cutoff = f * cfg.sample_rate_hz;
            let kept = (0..n)
                .filter(|&k| {
                    let bin = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
                    (bin * rate / n as f64).abs() <= cutoff
                })
                .count();
            power * kept as f64 / n as f64
        })
        .collect()
}

/// Largest off-diagonal magnitude relative to the largest diagonal entry.
pub fn off_diagonal_ratio(cov: &CMat) -> f64 {
    let n = cov.nrows();
    let diag = (0..n).map(|i| cov[(i, i)].norm()).fold(0.0, f64::max);
    let off = (0..n)
        .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
        .map(|(i, j)| cov[(i, j)].norm())
        .fold(0.0, f64::max);
    if diag == 0.0 {
        0.0
    } else {
        off / diag
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hermitian_eigenvalues, hermitian_residual};

    fn table3() -> ScenarioConfig {
        ScenarioConfig::benchmark()
    }

    #[test]
    fn table_two_channel_mapping() {
        let cfg = table3();
        let p = channel_powers(&cfg.interferers[0], &cfg.array, 1.0);
        assert_eq!(p.powers, vec![100.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let p = channel_powers(&cfg.interferers[2], &cfg.array, 1.0);
        assert!((p.powers[4] - 251.188_643_150_958).abs() < 1e-9);
        assert_eq!(p.powers.iter().filter(|&&x| x > 0.0).count(), 1);
        let far = InterfererSpec { freq_hz: 10e9 - 10e6, angle_deg: 0.0, inr_db: 20.0 };
        let p = channel_powers(&far, &cfg.array, 1.0);
        assert!(p.out_of_band && p.total() == 0.0);
    }

    #[test]
    fn q_block_rank_and_trace() {
        let cfg = table3();
        for intf in &cfg.interferers {
            let q = q_block(intf, &cfg.array, 1.0);
            assert!(hermitian_residual(&q) < 1e-14);
            let ev = hermitian_eigenvalues(&q);
            assert_eq!(ev.iter().filter(|&&e| e > 1e-9).count(), 1);
            let p = channel_powers(intf, &cfg.array, 1.0).total();
            assert!((q.trace().re - 4.0 * p).abs() < 1e-9);
        }
        let far = InterfererSpec { freq_hz: 1e9, angle_deg: 0.0, inr_db: 20.0 };
        assert_eq!(q_block(&far, &cfg.array, 1.0).norm(), 0.0);
    }

    #[test]
    fn printed_block_is_not_hermitian_off_target() {
        let cfg = table3();
        let q = q_block_printed(&cfg.interferers[0], 40.0, &cfg.array, 1.0);
        assert!(hermitian_residual(&q) > 1e-3);
        let q = q_block_printed(&cfg.interferers[1], 40.0, &cfg.array, 1.0);
        assert!(hermitian_residual(&q) < 1e-14);
    }

    #[test]
    fn no_interferers_gives_identity() {
        let mut cfg = ScenarioConfig::reduced();
        cfg.interferers.clear();
        let model = scenario_covariance(&cfg).unwrap();
        let n = model.dim();
        assert_eq!(model.full, CMat::identity(n, n));
        assert!((&model.inverse - CMat::identity(n, n)).norm() < 1e-14);
    }

    #[test]
    fn kronecker_spectrum_of_one_interferer() {
        let mut cfg = ScenarioConfig::reduced();
        cfg.interferers.truncate(1);
        let model = scenario_covariance(&cfg).unwrap();
        let ev = hermitian_eigenvalues(&model.full);
        let n = ev.len();
        let mu = hermitian_eigenvalues(&model.per_interferer[0]);
        let top = 1.0 + 16.0 * mu.last().unwrap();
        assert!((ev[n - 1] - top).abs() < 1e-8 * top);
        assert!(ev[..n - 1].iter().all(|e| (e - 1.0).abs() < 1e-9));
    }

    #[test]
    fn inverse_matches_structured_form() {
        // Qbar^{-1} = I - (J / L) ⊗ (I - (I + L Q)^{-1})
        let cfg = ScenarioConfig::reduced();
        let model = scenario_covariance(&cfg).unwrap();
        let l = 16.0;
        let nb = model.single.nrows();
        let eye = CMat::identity(nb, nb);
        let q = &model.single - &eye;
        let inner = (&eye + &q * c(l, 0.0)).try_inverse().unwrap();
        let jl = CMat::from_element(16, 16, c(1.0 / l, 0.0));
        let expected = CMat::identity(model.dim(), model.dim()) - kron(&jl, &(&eye - inner));
        assert!((&expected - &model.inverse).norm() < 1e-9);
        assert!(hermitian_residual(&model.full) < 1e-12);
        assert!(hermitian_eigenvalues(&model.full)[0] >= 1.0 - 1e-10);
    }

    #[test]
    fn benchmark_condition_number_is_finite() {
        let cfg = table3();
        let model = scenario_covariance(&cfg).unwrap();
        let k = model.condition_number();
        assert!(k.is_finite() && k > 1.0);
        // Largest eigenvalue 1 + L N_R P for the strongest interferer.
        assert!((k - (1.0 + 40.0 * 4.0 * 10f64.powf(2.4))).abs() < 1e-6 * k);
    }

    #[test]
    fn size_cap_is_enforced() {
        let cfg = table3();
        let err = assemble_qbar(&cfg.interferers, &cfg.array, 1.0, 500).unwrap_err();
        assert!(matches!(err, Error::SizeCap { size: 960, cap: 500 }));
    }

    #[test]
    fn tone_stays_in_its_channel() {
        let cfg = table3();
        let cov = simulate_interferer_channels(&cfg.interferers[0], &cfg.array, 1.0, InterfererProcess::Tone, 200, 1);
        assert!(off_diagonal_ratio(&cov) < 0.05);
        assert!((cov[(0, 0)].re - 100.0).abs() < 10.0);
        let zero = InterfererSpec { inr_db: f64::NEG_INFINITY, ..cfg.interferers[0].clone() };
        let cov = simulate_interferer_channels(&zero, &cfg.array, 1.0, InterfererProcess::Tone, 100, 1);
        assert_eq!(cov.norm(), 0.0);
    }

    #[test]
    fn white_input_spreads_evenly_and_converges() {
        let cfg = table3();
        let intf = InterfererSpec { freq_hz: 10e9, angle_deg: 0.0, inr_db: 0.0 };
        let expected = white_channel_powers(&cfg.array, 0.0, 1.0);
        assert!(expected.windows(2).all(|w| w[0] == w[1]));
        let err = |trials: usize| {
            let cov = simulate_interferer_channels(&intf, &cfg.array, 1.0, InterfererProcess::White, trials, 5);
            let target = CMat::from_diagonal(&CVec::from_iterator(6, expected.iter().map(|&p| c(p, 0.0))));
            (cov - target).norm() / expected[0]
        };
        let coarse = err(250);
        let fine = err(4000);
        assert!(fine < coarse, "{fine} vs {coarse}");
        assert!(fine < 0.2);
    }
}
