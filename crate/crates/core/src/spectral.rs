//! Energy that the transmitted waveform set radiates into shared bands.
//!
//! Frequencies inside one channel are in cycles/sample and the spectrum of
//! waveform `m` is the DTFT `X_m(f) = sum_l S(m, l) exp(-j 2 pi f l)`, so that
//! `x^H K(a, b) x` is the energy of `x` over `[a, b]`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{cis, quad_form, CMat, CVec};
use crate::scenario::{ArrayConfig, BandCase, BandIndexing, SharedBandSpec};
use crate::signal_model::WaveformSet;

/// `K(a, b) = int_a^b e_f e_f^H df` with `e_f = [exp(j 2 pi f p)]_p`.
pub fn frequency_gram(f_start: f64, f_end: f64, n_samples: usize) -> Result<CMat> {
    if !(f_start <= f_end) || !f_start.is_finite() || !f_end.is_finite() {
        return Err(Error::MalformedProblem(format!(
            "frequency interval reversed or not finite: [{f_start}, {f_end}]"
        )));
    }
    // One value per lag; the matrix is Toeplitz.
    let lag = |d: i64| -> Complex64 {
        if d == 0 {
            Complex64::new(f_end - f_start, 0.0)
        } else {
            let d = d as f64;
            (cis(2.0 * PI * f_end * d) - cis(2.0 * PI * f_start * d)) / Complex64::new(0.0, 2.0 * PI * d)
        }
    };
    let n = n_samples as i64;
    let lags: Vec<Complex64> = (-(n - 1)..n).map(lag).collect();
    Ok(CMat::from_fn(n_samples, n_samples, |p, q| {
        lags[(p as i64 - q as i64 + n - 1) as usize]
    }))
}

/// How one channel participates in a band.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Segment {
    /// The local interval `[a, b]` of the channel lies in the band.
    Partial { a: f64, b: f64 },
    /// The whole channel lies in the band.
    Interior,
}

/// Channels touched by a band and the part of each that is covered.
///
/// Local edges are clamped to `[0, 1]`: when `delta_f > f_s` the stretch of a
/// channel above one cycle/sample is an empty guard gap.
pub fn band_segments(band: &BandIndexing) -> Vec<(usize, Segment)> {
    let lo = band.local_low.min(1.0);
    let hi = band.local_high.min(1.0);
    match band.case {
        BandCase::SameChannel => vec![(band.low_channel, Segment::Partial { a: lo.min(hi), b: hi })],
        _ => {
            let mut out = vec![(band.low_channel, Segment::Partial { a: lo, b: 1.0 })];
            for m in band.low_channel + 1..band.high_channel {
                out.push((m, Segment::Interior));
            }
            out.push((band.high_channel, Segment::Partial { a: 0.0, b: hi }));
            out
        }
    }
}

fn row(s: &WaveformSet, m: usize) -> CVec {
    s.samples.row(m).transpose()
}

/// `E_b`: energy of the weighted waveform set inside a band.
///
/// Interior channels contribute `|w_m|^2` times their actual energy, which is
/// `|w_m|^2 / N_T` for an energy-normalized set.
pub fn band_energy(s: &WaveformSet, w: &CVec, band: &BandIndexing) -> f64 {
    let l = s.n_samples();
    band_segments(band)
        .into_iter()
        .map(|(m, seg)| {
            let x = row(s, m);
            let e = match seg {
                Segment::Interior => x.norm_squared(),
                Segment::Partial { a, b } => quad_form(&frequency_gram(a, b, l).expect("ordered"), &x),
            };
            w[m].norm_sqr() * e
        })
        .sum()
}

/// `I_b(S)`: diagonal `N_T x N_T` matrix with `E_b = w^H I_b(S) w`.
///
/// Interior channels enter as `1 / N_T`, which assumes the per-waveform energy
/// constraint holds for `S`.
pub fn i_tilde_matrix(s: &WaveformSet, band: &BandIndexing) -> CMat {
    let n = s.n_tx();
    let l = s.n_samples();
    let mut out = CMat::zeros(n, n);
    for (m, seg) in band_segments(band) {
        let d = match seg {
            Segment::Interior => 1.0 / n as f64,
            Segment::Partial { a, b } => quad_form(&frequency_gram(a, b, l).expect("ordered"), &row(s, m)),
        };
        out[(m, m)] = Complex64::new(d, 0.0);
    }
    out
}

/// `H_b(w)`: block-diagonal `N_T L` matrix (waveform-major) with
/// `E_b = s_T^H H_b(w) s_T`.
pub fn h_b_matrix(w: &CVec, band: &BandIndexing, cfg: &ArrayConfig) -> CMat {
    let n = cfg.n_tx;
    let l = cfg.n_samples();
    let mut out = CMat::zeros(n * l, n * l);
    for (m, seg) in band_segments(band) {
        let g = w[m].norm_sqr();
        let block = match seg {
            Segment::Interior => CMat::identity(l, l),
            Segment::Partial { a, b } => frequency_gram(a, b, l).expect("ordered"),
        };
        out.view_mut((m * l, m * l), (l, l)).copy_from(&(block * Complex64::new(g, 0.0)));
    }
    out
}

/// One sample of the energy spectral density of the transmitted set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EsdPoint {
    /// Position over the total band, normalized to `[0, 1]`.
    pub freq: f64,
    pub value: f64,
    /// 0-based channel index.
    pub channel: usize,
}

/// `|w_m X_m(f)|^2` at local frequency `f`.
pub fn channel_esd(s: &WaveformSet, w: &CVec, m: usize, f: f64) -> f64 {
    let x: Complex64 = s
        .samples
        .row(m)
        .iter()
        .enumerate()
        .map(|(l, v)| v * cis(-2.0 * PI * f * l as f64))
        .sum();
    (w[m] * x).norm_sqr()
}

/// ESD over the total band with `n_grid` uniform points per channel.
///
/// Each channel covers `delta_f / f_s` cycles/sample of local frequency; the
/// part above one cycle/sample is a guard gap and reads zero.
pub fn esd_curve(s: &WaveformSet, w: &CVec, cfg: &ArrayConfig, n_grid: usize) -> Vec<EsdPoint> {
    let n = cfg.n_tx;
    let width = cfg.channel_width();
    let mut out = Vec::with_capacity(n * n_grid);
    for m in 0..n {
        for k in 0..n_grid {
            let frac = k as f64 / n_grid as f64;
            let f = frac * width;
            let value = if f < 1.0 { channel_esd(s, w, m, f) } else { 0.0 };
            out.push(EsdPoint {
                freq: (m as f64 + frac) / n as f64,
                value,
                channel: m,
            });
        }
    }
    out
}

/// Trapezoidal integral of `|w_m X_m(f)|^2` over local `[a, b]`, with step at
/// most `1 / n_grid` and both edges sampled exactly.
pub fn integrate_channel(s: &WaveformSet, w: &CVec, m: usize, a: f64, b: f64, n_grid: usize) -> f64 {
    if b <= a {
        return 0.0;
    }
    let steps = (((b - a) * n_grid as f64).ceil() as usize).max(1);
    let h = (b - a) / steps as f64;
    let mut acc = 0.5 * (channel_esd(s, w, m, a) + channel_esd(s, w, m, b));
    for k in 1..steps {
        acc += channel_esd(s, w, m, a + k as f64 * h);
    }
    acc * h
}

/// Band energy by direct quadrature of the ESD, independent of the Gram forms.
pub fn band_energy_quadrature(
    s: &WaveformSet,
    w: &CVec,
    band: &SharedBandSpec,
    cfg: &ArrayConfig,
    n_grid: usize,
) -> f64 {
    let n = cfg.n_tx as f64;
    let width = cfg.channel_width();
    (0..cfg.n_tx)
        .map(|m| {
            // Intersect the band with channel m in total-band units, then map
            // to local cycles/sample and drop the guard gap.
            let lo = band.f_low.max(m as f64 / n);
            let hi = band.f_high.min((m + 1) as f64 / n);
            if hi <= lo {
                return 0.0;
            }
            let a = ((lo * n - m as f64) * width).min(1.0);
            let b = ((hi * n - m as f64) * width).min(1.0);
            integrate_channel(s, w, m, a, b, n_grid)
        })
        .sum()
}
