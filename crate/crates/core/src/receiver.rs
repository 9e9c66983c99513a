//! Stacked receive operators, MVDR filter and output SINR.
//!
//! The receive vector of one pulse is `A(w) s = Ã(s) w`, where `s` is the
//! snapshot-major waveform vector and `w` the transmit weights. Both operators
//! have only `N_R` nonzeros per column of `A(w)`, which the kernels exploit.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::interference::CovarianceModel;
use crate::linalg::{hermitian_part, CMat, CVec};
use crate::scenario::{ArrayConfig, ScenarioConfig};
use crate::signal_model::{rx_steering, tx_steering_range_angle};

/// Row of `(l, n, m)` in a stacked receive vector.
#[inline]
pub fn stacked_index(l: usize, n: usize, m: usize, n_tx: usize, n_rx: usize) -> usize {
    l * n_tx * n_rx + n * n_tx + m
}

/// Column-sparse complex matrix, just enough for `A^H Q^{-1} A`.
#[derive(Debug, Clone)]
struct SparseCols {
    rows: usize,
    cols: Vec<Vec<(usize, Complex64)>>,
}

impl SparseCols {
    fn to_dense(&self) -> CMat {
        let mut out = CMat::zeros(self.rows, self.cols.len());
        for (j, col) in self.cols.iter().enumerate() {
            for &(i, v) in col {
                out[(i, j)] = v;
            }
        }
        out
    }

    /// `A^H M A` for Hermitian `M`.
    fn sandwich(&self, m: &CMat) -> CMat {
        let k = self.cols.len();
        // G = M A, one dense column per sparse column.
        let mut g = CMat::zeros(self.rows, k);
        for (j, col) in self.cols.iter().enumerate() {
            let mut gj = g.column_mut(j);
            for &(i, v) in col {
                gj.axpy(v, &m.column(i), Complex64::new(1.0, 0.0));
            }
        }
        let mut out = CMat::zeros(k, k);
        for (i, col) in self.cols.iter().enumerate() {
            for j in 0..k {
                out[(i, j)] = col.iter().map(|&(r, v)| v.conj() * g[(r, j)]).sum();
            }
        }
        hermitian_part(&out)
    }
}

fn a_of_w_sparse(a_t: &CVec, b_r: &CVec, w: &CVec, n_samples: usize) -> SparseCols {
    let (nt, nr) = (a_t.len(), b_r.len());
    let mut cols = Vec::with_capacity(nt * n_samples);
    for l in 0..n_samples {
        for m in 0..nt {
            let g = w[m] * a_t[m];
            cols.push((0..nr).map(|n| (stacked_index(l, n, m, nt, nr), b_r[n] * g)).collect());
        }
    }
    SparseCols {
        rows: nt * nr * n_samples,
        cols,
    }
}

fn a_of_s_sparse(a_t: &CVec, b_r: &CVec, s: &CVec) -> SparseCols {
    let (nt, nr) = (a_t.len(), b_r.len());
    let n_samples = s.len() / nt;
    let cols = (0..nt)
        .map(|m| {
            let mut col = Vec::with_capacity(nr * n_samples);
            for l in 0..n_samples {
                let g = s[l * nt + m] * a_t[m];
                for n in 0..nr {
                    col.push((stacked_index(l, n, m, nt, nr), b_r[n] * g));
                }
            }
            col
        })
        .collect();
    SparseCols {
        rows: nt * nr * n_samples,
        cols,
    }
}

fn check_len(context: &'static str, expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::Dimension { context, expected, actual });
    }
    Ok(())
}

/// `A(w) s` for given steering vectors, without forming `A(w)`.
pub fn signature(a_t: &CVec, b_r: &CVec, s: &CVec, w: &CVec) -> CVec {
    let (nt, nr) = (a_t.len(), b_r.len());
    let n_samples = s.len() / nt;
    let mut u = CVec::zeros(nt * nr * n_samples);
    for l in 0..n_samples {
        for m in 0..nt {
            let g = s[l * nt + m] * w[m] * a_t[m];
            for n in 0..nr {
                u[stacked_index(l, n, m, nt, nr)] = b_r[n] * g;
            }
        }
    }
    u
}

/// `A(r, theta; w) = I_L ⊗ [b_R(theta) ⊗ diag(w ⊙ a_T(r, theta))]`.
pub fn build_a_of_w(range_m: f64, theta_deg: f64, w: &CVec, cfg: &ArrayConfig) -> Result<CMat> {
    check_len("transmit weights", cfg.n_tx, w.len())?;
    let a = tx_steering_range_angle(range_m, theta_deg, cfg);
    let b = rx_steering(theta_deg, cfg);
    Ok(a_of_w_sparse(&a, &b, w, cfg.n_samples()).to_dense())
}

/// `Ã(r, theta; s)`: snapshot blocks `b_R ⊗ diag(s(l) ⊙ a_T)` stacked by rows.
pub fn build_a_of_s(range_m: f64, theta_deg: f64, s: &CVec, cfg: &ArrayConfig) -> Result<CMat> {
    check_len("snapshot-major waveform", cfg.waveform_len(), s.len())?;
    let a = tx_steering_range_angle(range_m, theta_deg, cfg);
    let b = rx_steering(theta_deg, cfg);
    Ok(a_of_s_sparse(&a, &b, s).to_dense())
}

/// MVDR filter `v = Q^{-1} u / (u^H Q^{-1} u)` given `Q^{-1}`.
pub fn mvdr_weights(u: &CVec, qbar_inverse: &CMat) -> Result<CVec> {
    check_len("target signature", qbar_inverse.nrows(), u.len())?;
    let qu = qbar_inverse * u;
    let denom = u.dotc(&qu);
    if denom.norm() == 0.0 {
        return Err(Error::MalformedProblem("target signature is zero".into()));
    }
    Ok(qu / denom)
}

/// Output SINR of an arbitrary receive filter: `SNR |v^H u|^2 / v^H Qbar v`.
pub fn sinr_of_filter(v: &CVec, u: &CVec, qbar: &CMat, snr: f64) -> f64 {
    let gain = v.dotc(u).norm_sqr();
    let power = v.dotc(&(qbar * v)).re;
    snr * gain / power
}

/// Kernels of the two quadratic forms of the MVDR output SINR.
#[derive(Debug, Clone)]
pub struct SinrKernels {
    /// `Psi(w) = A^H(w) Q^{-1} A(w)`, snapshot-major order `N_T L`.
    pub psi_w: CMat,
    /// `Psi~(s) = Ã^H(s) Q^{-1} Ã(s)`, order `N_T`.
    pub psi_s: CMat,
    pub mvdr: CVec,
    /// `SNR s^H Psi(w) s`.
    pub sinr_linear: f64,
}

/// Target geometry and interference statistics of one scenario, shared by
/// every kernel evaluation.
#[derive(Debug, Clone)]
pub struct ReceiverModel {
    pub a_t: CVec,
    pub b_r: CVec,
    pub n_samples: usize,
    pub snr: f64,
    pub covariance: CovarianceModel,
}

impl ReceiverModel {
    pub fn new(scenario: &ScenarioConfig, covariance: CovarianceModel) -> Self {
        let cfg = &scenario.array;
        let t = &scenario.target;
        Self {
            a_t: tx_steering_range_angle(t.range_m, t.angle_deg, cfg),
            b_r: rx_steering(t.angle_deg, cfg),
            n_samples: cfg.n_samples(),
            snr: t.snr_linear(),
            covariance,
        }
    }

    pub fn n_tx(&self) -> usize {
        self.a_t.len()
    }

    /// Target signature `u = A(w) s` for snapshot-major `s`.
    pub fn signature(&self, s: &CVec, w: &CVec) -> CVec {
        signature(&self.a_t, &self.b_r, s, w)
    }

    /// `Psi(w)` in snapshot-major order.
    pub fn psi_w(&self, w: &CVec) -> CMat {
        a_of_w_sparse(&self.a_t, &self.b_r, w, self.n_samples).sandwich(&self.covariance.inverse)
    }

    /// `Psi~(s)` for snapshot-major `s`.
    pub fn psi_s(&self, s: &CVec) -> CMat {
        a_of_s_sparse(&self.a_t, &self.b_r, s).sandwich(&self.covariance.inverse)
    }

    /// Output SINR `SNR u^H Q^{-1} u` of the MVDR receiver (linear).
    pub fn sinr(&self, s: &CVec, w: &CVec) -> f64 {
        let u = self.signature(s, w);
        self.snr * u.dotc(&(&self.covariance.inverse * &u)).re
    }

    pub fn mvdr(&self, s: &CVec, w: &CVec) -> Result<CVec> {
        mvdr_weights(&self.signature(s, w), &self.covariance.inverse)
    }

    pub fn kernels(&self, s: &CVec, w: &CVec) -> Result<SinrKernels> {
        check_len("snapshot-major waveform", self.n_tx() * self.n_samples, s.len())?;
        check_len("transmit weights", self.n_tx(), w.len())?;
        Ok(SinrKernels {
            psi_w: self.psi_w(w),
            psi_s: self.psi_s(s),
            mvdr: self.mvdr(s, w)?,
            sinr_linear: self.sinr(s, w),
        })
    }
}

/// `SNR s^H Psi(w) s` for a scenario and covariance.
pub fn sinr(s: &CVec, w: &CVec, scenario: &ScenarioConfig, covariance: &CovarianceModel) -> f64 {
    ReceiverModel::new(scenario, covariance.clone()).sinr(s, w)
}

pub fn to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interference::scenario_covariance;
    use crate::linalg::{c, hermitian_residual, quad_form};
    use crate::signal_model::{reference_lfm, WaveformSet};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rand_vec(rng: &mut ChaCha8Rng, n: usize) -> CVec {
        CVec::from_fn(n, |_, _| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
    }

    #[test]
    fn scalar_case_is_one() {
        let mut cfg = ScenarioConfig::benchmark().array;
        cfg.n_tx = 1;
        cfg.n_rx = 1;
        cfg.duration_s = None;
        cfg.n_samples = Some(1);
        let a = build_a_of_w(1.0, 0.0, &CVec::from_element(1, c(1.0, 0.0)), &cfg).unwrap();
        assert_eq!(a.shape(), (1, 1));
        assert!((a[(0, 0)] - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn a_of_w_matches_element_loop() {
        let scenario = ScenarioConfig::reduced();
        let cfg = &scenario.array;
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = rand_vec(&mut rng, cfg.waveform_len());
        let w = rand_vec(&mut rng, cfg.n_tx);
        let a = build_a_of_w(9e3, 25.0, &w, cfg).unwrap();
        let at = tx_steering_range_angle(9e3, 25.0, cfg);
        let br = rx_steering(25.0, cfg);
        let y = &a * &s;
        for l in 0..16 {
            for n in 0..2 {
                for m in 0..3 {
                    let direct = br[n] * w[m] * at[m] * s[l * 3 + m];
                    assert!((y[stacked_index(l, n, m, 3, 2)] - direct).norm() < 1e-12);
                }
            }
        }
        assert_eq!(build_a_of_w(9e3, 25.0, &CVec::zeros(3), cfg).unwrap().norm(), 0.0);
        assert!(build_a_of_w(9e3, 25.0, &CVec::zeros(4), cfg).is_err());
    }

    #[test]
    fn both_operators_give_the_same_signal() {
        let scenario = ScenarioConfig::reduced();
        let cfg = &scenario.array;
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let s = rand_vec(&mut rng, cfg.waveform_len());
            let w = rand_vec(&mut rng, cfg.n_tx);
            let lhs = build_a_of_w(15e3, 40.0, &w, cfg).unwrap() * &s;
            let rhs = build_a_of_s(15e3, 40.0, &s, cfg).unwrap() * &w;
            assert!((lhs - rhs).norm() < 1e-12);
        }
        assert_eq!(build_a_of_s(15e3, 40.0, &CVec::zeros(48), cfg).unwrap().norm(), 0.0);
    }

    #[test]
    fn single_channel_a_of_s_is_replicated_receive_vector() {
        let mut cfg = ScenarioConfig::reduced().array;
        cfg.n_tx = 1;
        let s = CVec::from_fn(16, |l, _| c(l as f64, 1.0));
        let a = build_a_of_s(15e3, 40.0, &s, &cfg).unwrap();
        let b = rx_steering(40.0, &cfg);
        assert_eq!(a.ncols(), 1);
        for l in 0..16 {
            for n in 0..2 {
                assert!((a[(l * 2 + n, 0)] - b[n] * s[l]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn interference_free_ceiling() {
        let mut scenario = ScenarioConfig::benchmark();
        scenario.interferers.clear();
        let model = ReceiverModel::new(&scenario, scenario_covariance(&scenario).unwrap());
        let s = reference_lfm(&scenario.array).waveforms.vec_snapshot();
        let w = CVec::from_fn(6, |m, _| crate::linalg::cis(m as f64));
        let db = to_db(model.sinr(&s, &w));
        assert!((db - 6.0206).abs() < 1e-4, "{db}");
        assert_eq!(model.sinr(&CVec::zeros(240), &w), 0.0);
    }

    #[test]
    fn kernels_agree_and_are_hermitian() {
        let scenario = ScenarioConfig::reduced();
        let model = ReceiverModel::new(&scenario, scenario_covariance(&scenario).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = rand_vec(&mut rng, 48);
        let w = rand_vec(&mut rng, 3);
        let k = model.kernels(&s, &w).unwrap();
        let a = quad_form(&k.psi_w, &s);
        let b = quad_form(&k.psi_s, &w);
        assert!((a - b).abs() <= 1e-10 * a);
        assert!((model.snr * a - k.sinr_linear).abs() <= 1e-10 * a);
        assert!(hermitian_residual(&k.psi_w) < 1e-12 && hermitian_residual(&k.psi_s) < 1e-12);
    }

    #[test]
    fn identity_covariance_kernel_blocks() {
        let mut scenario = ScenarioConfig::reduced();
        scenario.interferers.clear();
        let model = ReceiverModel::new(&scenario, scenario_covariance(&scenario).unwrap());
        let w = CVec::from_fn(3, |m, _| crate::linalg::cis(0.3 * m as f64));
        let psi = model.psi_w(&w);
        assert!((psi - CMat::identity(48, 48) * c(2.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn mvdr_is_distortionless_and_scale_free() {
        let scenario = ScenarioConfig::benchmark();
        let cov = scenario_covariance(&scenario).unwrap();
        let model = ReceiverModel::new(&scenario, cov.clone());
        let s = reference_lfm(&scenario.array).waveforms.vec_snapshot();
        let w = CVec::from_element(6, c(1.0, 0.0));
        let u = model.signature(&s, &w);
        let v = mvdr_weights(&u, &cov.inverse).unwrap();
        assert!((v.dotc(&u) - c(1.0, 0.0)).norm() < 1e-10);
        let scaled = mvdr_weights(&u, &(&cov.inverse * c(1.0 / 7.5, 0.0))).unwrap();
        assert!((&scaled - &v).norm() < 1e-12 * v.norm());
        let eye = CMat::identity(960, 960);
        let plain = mvdr_weights(&u, &eye).unwrap();
        assert!((plain - &u / c(u.norm_squared(), 0.0)).norm() < 1e-14);
        let direct = sinr_of_filter(&v, &u, &cov.full, model.snr);
        assert!((direct - model.sinr(&s, &w)).abs() < 1e-9 * direct);
    }

    #[test]
    fn global_phases_do_not_change_sinr() {
        let scenario = ScenarioConfig::reduced();
        let model = ReceiverModel::new(&scenario, scenario_covariance(&scenario).unwrap());
        let set = WaveformSet::new(CMat::from_fn(3, 16, |m, l| crate::linalg::cis((m * l) as f64 * 0.37)));
        let s = set.vec_snapshot();
        let w = CVec::from_fn(3, |m, _| c(1.0 + m as f64, -0.5));
        let base = model.sinr(&s, &w);
        let rot = crate::linalg::cis(1.234);
        assert!((model.sinr(&(&s * rot), &w) - base).abs() < 1e-12 * base);
        assert!((model.sinr(&s, &(&w * rot)) - base).abs() < 1e-12 * base);
    }
}
