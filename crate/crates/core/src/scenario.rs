//! Experiment configuration: array geometry, channel grid, target, interferers,
//! shared bands and optimizer controls.
//!
//! Scenarios are stored as JSON with the sections `array`, `target`,
//! `interferers`, `shared_bands` and `controls`. Frequencies are in Hz, angles
//! in degrees and powers in dB, except for shared bands, whose edges are
//! normalized over the total FDA band of width `n_tx * delta_f_hz`.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CVec;

pub const SPEED_OF_LIGHT: f64 = 2.99792458e8;

/// Default normalized low-pass cutoff of each receive channel.
pub const DEFAULT_LP_CUTOFF: f64 = 0.5;
/// Default in-band energy tolerance of each waveform.
pub const DEFAULT_INBAND_TOLERANCE: f64 = 0.91;
/// Default cap on `n_tx * n_rx * n_samples` for dense covariance assembly.
pub const DEFAULT_SIZE_CAP: usize = 4096;

/// A per-channel parameter written either as one number for all channels or as
/// an explicit list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PerChannel {
    Uniform(f64),
    Each(Vec<f64>),
}

impl PerChannel {
    pub fn get(&self, m: usize) -> f64 {
        match self {
            PerChannel::Uniform(v) => *v,
            PerChannel::Each(v) => v[m],
        }
    }

    pub fn resolve(&self, n: usize) -> Vec<f64> {
        (0..n).map(|m| self.get(m)).collect()
    }

    fn check(&self, n: usize, field: &str, ok: impl Fn(f64) -> bool, what: &str) -> Result<()> {
        if let PerChannel::Each(v) = self {
            if v.len() != n {
                return Err(Error::config(
                    field,
                    format!("must list {n} values (one per transmit channel), got {}", v.len()),
                ));
            }
        }
        for m in 0..n {
            let value = self.get(m);
            if !ok(value) {
                return Err(Error::config(field, format!("{what}, got {value} for channel {}", m + 1)));
            }
        }
        Ok(())
    }
}

fn default_inband() -> PerChannel {
    PerChannel::Uniform(DEFAULT_INBAND_TOLERANCE)
}

fn default_lp() -> PerChannel {
    PerChannel::Uniform(DEFAULT_LP_CUTOFF)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArrayConfig {
    pub n_tx: usize,
    pub n_rx: usize,
    pub carrier_hz: f64,
    pub delta_f_hz: f64,
    /// Transmit element spacing in meters; half a wavelength when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tx_spacing_m: Option<f64>,
    /// Receive element spacing in meters; half a wavelength when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rx_spacing_m: Option<f64>,
    pub sample_rate_hz: f64,
    /// Samples per pulse. May be replaced by `duration_s`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration_s: Option<f64>,
    #[serde(default = "default_inband")]
    pub inband_tolerance: PerChannel,
    #[serde(default = "default_lp")]
    pub lp_cutoff: PerChannel,
}

impl ArrayConfig {
    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_hz
    }

    pub fn tx_spacing(&self) -> f64 {
        self.tx_spacing_m.unwrap_or(0.5 * self.wavelength())
    }

    pub fn rx_spacing(&self) -> f64 {
        self.rx_spacing_m.unwrap_or(0.5 * self.wavelength())
    }

    /// Pulse length `L` in samples.
    pub fn n_samples(&self) -> usize {
        match (self.n_samples, self.duration_s) {
            (Some(l), _) => l,
            (None, Some(t)) => (t * self.sample_rate_hz).round() as usize,
            (None, None) => 0,
        }
    }

    /// Channel carriers `f_m = f_c + (m - 1) delta_f`.
    pub fn channel_freqs_hz(&self) -> Vec<f64> {
        (0..self.n_tx)
            .map(|m| self.carrier_hz + m as f64 * self.delta_f_hz)
            .collect()
    }

    /// Width of one channel in per-channel normalized frequency (cycles/sample).
    pub fn channel_width(&self) -> f64 {
        self.delta_f_hz / self.sample_rate_hz
    }

    pub fn lp_cutoffs(&self) -> Vec<f64> {
        self.lp_cutoff.resolve(self.n_tx)
    }

    pub fn inband_tolerances(&self) -> Vec<f64> {
        self.inband_tolerance.resolve(self.n_tx)
    }

    /// `n_tx * n_samples`, the length of a stacked waveform vector.
    pub fn waveform_len(&self) -> usize {
        self.n_tx * self.n_samples()
    }

    /// `n_tx * n_rx * n_samples`, the order of the stacked receive covariance.
    pub fn stacked_len(&self) -> usize {
        self.n_tx * self.n_rx * self.n_samples()
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_tx < 1 {
            return Err(Error::config("array.n_tx", "must be at least 1"));
        }
        if self.n_rx < 1 {
            return Err(Error::config("array.n_rx", "must be at least 1"));
        }
        positive(self.carrier_hz, "array.carrier_hz")?;
        positive(self.sample_rate_hz, "array.sample_rate_hz")?;
        if !(self.delta_f_hz.is_finite() && self.delta_f_hz >= 0.0) {
            return Err(Error::config("array.delta_f_hz", "must be finite and nonnegative"));
        }
        if let Some(d) = self.tx_spacing_m {
            positive(d, "array.tx_spacing_m")?;
        }
        if let Some(d) = self.rx_spacing_m {
            positive(d, "array.rx_spacing_m")?;
        }
        match (self.n_samples, self.duration_s) {
            (None, None) => {
                return Err(Error::config("array.n_samples", "is required (or give duration_s)"));
            }
            (Some(l), Some(t)) => {
                positive(t, "array.duration_s")?;
                let from_duration = (t * self.sample_rate_hz).round() as usize;
                if from_duration != l {
                    return Err(Error::config(
                        "array.duration_s",
                        format!("implies {from_duration} samples but n_samples is {l}"),
                    ));
                }
            }
            (None, Some(t)) => positive(t, "array.duration_s")?,
            (Some(_), None) => {}
        }
        if self.n_samples() < 2 {
            return Err(Error::config("array.n_samples", "must be at least 2"));
        }
        if self.delta_f_hz < self.sample_rate_hz {
            return Err(Error::OverlappingChannels {
                delta_f_hz: self.delta_f_hz,
                sample_rate_hz: self.sample_rate_hz,
            });
        }
        self.inband_tolerance.check(
            self.n_tx,
            "array.inband_tolerance",
            |g| g > 0.0 && g <= 1.0,
            "must lie in (0, 1]",
        )?;
        self.lp_cutoff.check(
            self.n_tx,
            "array.lp_cutoff",
            |f| f > 0.0 && f <= 1.0,
            "must lie in (0, 1]",
        )?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetSpec {
    pub range_m: f64,
    pub angle_deg: f64,
    pub snr_db: f64,
    #[serde(default = "unit_noise")]
    pub noise_power: f64,
}

fn unit_noise() -> f64 {
    1.0
}

impl TargetSpec {
    pub fn snr_linear(&self) -> f64 {
        10f64.powf(self.snr_db / 10.0)
    }

    fn validate(&self) -> Result<()> {
        positive(self.range_m, "target.range_m")?;
        angle(self.angle_deg, "target.angle_deg")?;
        if !self.snr_db.is_finite() {
            return Err(Error::config("target.snr_db", "must be finite"));
        }
        positive(self.noise_power, "target.noise_power")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterfererSpec {
    pub freq_hz: f64,
    pub angle_deg: f64,
    pub inr_db: f64,
}

impl InterfererSpec {
    fn validate(&self, i: usize) -> Result<()> {
        angle(self.angle_deg, &format!("interferers[{i}].angle_deg"))?;
        if !self.inr_db.is_finite() {
            return Err(Error::config(format!("interferers[{i}].inr_db"), "must be finite"));
        }
        if !self.freq_hz.is_finite() {
            return Err(Error::config(format!("interferers[{i}].freq_hz"), "must be finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SharedBandSpec {
    /// Lower edge, normalized over the total FDA band.
    pub f_low: f64,
    /// Upper edge, normalized over the total FDA band.
    pub f_high: f64,
    /// Largest radar energy tolerated inside the band.
    pub eta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl SharedBandSpec {
    pub fn new(f_low: f64, f_high: f64, eta: f64) -> Self {
        Self {
            f_low,
            f_high,
            eta,
            label: None,
        }
    }

    pub fn name(&self, index: usize) -> String {
        self.label.clone().unwrap_or_else(|| format!("band {}", index + 1))
    }

    fn validate(&self, b: usize) -> Result<()> {
        let field = |f: &str| format!("shared_bands[{b}].{f}");
        if !(self.f_low >= 0.0 && self.f_low < self.f_high && self.f_high <= 1.0) {
            return Err(Error::config(
                field("f_low"),
                format!(
                    "band edges must satisfy 0 <= f_low < f_high <= 1, got ({}, {})",
                    self.f_low, self.f_high
                ),
            ));
        }
        if !(self.eta.is_finite() && self.eta >= 0.0) {
            return Err(Error::config(field("eta"), "must be finite and nonnegative"));
        }
        Ok(())
    }
}

fn default_trials() -> usize {
    1000
}

fn default_cap() -> usize {
    DEFAULT_SIZE_CAP
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignControls {
    /// Waveform similarity level (squared distance to the reference waveform).
    pub waveform_similarity: f64,
    /// Weight similarity level (squared distance to the reference weights).
    pub weight_similarity: f64,
    pub max_iters: usize,
    #[serde(default = "default_trials")]
    pub n_randomizations: usize,
    #[serde(default)]
    pub rng_seed: u64,
    /// Reference transmit weights as `[re, im]` pairs; all ones when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_weights: Option<Vec<[f64; 2]>>,
    #[serde(default = "default_cap")]
    pub size_cap: usize,
}

impl DesignControls {
    fn validate(&self, n_tx: usize) -> Result<()> {
        if !(self.waveform_similarity >= 0.0) {
            return Err(Error::config("controls.waveform_similarity", "must be nonnegative"));
        }
        if !(self.weight_similarity >= 0.0) {
            return Err(Error::config("controls.weight_similarity", "must be nonnegative"));
        }
        if self.max_iters < 1 {
            return Err(Error::config("controls.max_iters", "must be at least 1"));
        }
        if self.n_randomizations < 1 {
            return Err(Error::config("controls.n_randomizations", "must be at least 1"));
        }
        if let Some(w) = &self.reference_weights {
            if w.len() != n_tx {
                return Err(Error::config(
                    "controls.reference_weights",
                    format!("must have {n_tx} entries, got {}", w.len()),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub array: ArrayConfig,
    pub target: TargetSpec,
    #[serde(default)]
    pub interferers: Vec<InterfererSpec>,
    #[serde(default)]
    pub shared_bands: Vec<SharedBandSpec>,
    pub controls: DesignControls,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        self.array.validate()?;
        self.target.validate()?;
        for (i, intf) in self.interferers.iter().enumerate() {
            intf.validate(i)?;
        }
        for (b, band) in self.shared_bands.iter().enumerate() {
            band.validate(b)?;
        }
        self.controls.validate(self.array.n_tx)
    }

    /// Reference transmit weights `w_Ref`.
    pub fn reference_weights(&self) -> CVec {
        match &self.controls.reference_weights {
            Some(w) => CVec::from_iterator(w.len(), w.iter().map(|p| Complex64::new(p[0], p[1]))),
            None => CVec::from_element(self.array.n_tx, Complex64::new(1.0, 0.0)),
        }
    }

    pub fn band_indexing(&self) -> Vec<BandIndexing> {
        self.shared_bands
            .iter()
            .map(|b| normalize_band(b, &self.array))
            .collect()
    }

    pub fn from_json(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    /// Six transmit / four receive element array at 10 GHz with a 1 MHz
    /// frequency increment and a 40 sample pulse, three tone interferers and
    /// two shared bands.
    pub fn benchmark() -> Self {
        ScenarioConfig {
            array: ArrayConfig {
                n_tx: 6,
                n_rx: 4,
                carrier_hz: 10e9,
                delta_f_hz: 1e6,
                tx_spacing_m: None,
                rx_spacing_m: None,
                sample_rate_hz: 1e6,
                n_samples: None,
                duration_s: Some(40e-6),
                inband_tolerance: default_inband(),
                lp_cutoff: default_lp(),
            },
            target: TargetSpec {
                range_m: 15e3,
                angle_deg: 40.0,
                snr_db: 0.0,
                noise_power: 1.0,
            },
            interferers: vec![
                InterfererSpec { freq_hz: 10_000e6, angle_deg: 10.0, inr_db: 20.0 },
                InterfererSpec { freq_hz: 10_002e6, angle_deg: 40.0, inr_db: 22.0 },
                InterfererSpec { freq_hz: 10_004e6, angle_deg: 60.0, inr_db: 24.0 },
            ],
            shared_bands: vec![
                SharedBandSpec::new(0.073, 0.200, 1.0 / 30.0),
                SharedBandSpec::new(0.556, 0.884, 1.0 / 200.0),
            ],
            controls: DesignControls {
                waveform_similarity: 6.0,
                weight_similarity: 15.0,
                max_iters: 4,
                n_randomizations: 1000,
                rng_seed: 0,
                reference_weights: None,
                size_cap: DEFAULT_SIZE_CAP,
            },
        }
    }

    /// A small three-channel configuration that solves in well under a second.
    pub fn reduced() -> Self {
        let mut cfg = Self::benchmark();
        cfg.array.n_tx = 3;
        cfg.array.n_rx = 2;
        cfg.array.duration_s = None;
        cfg.array.n_samples = Some(16);
        cfg.interferers = vec![
            InterfererSpec { freq_hz: 10_000e6, angle_deg: 10.0, inr_db: 20.0 },
            InterfererSpec { freq_hz: 10_002e6, angle_deg: -30.0, inr_db: 22.0 },
        ];
        cfg.shared_bands = vec![SharedBandSpec::new(0.40, 0.60, 0.05)];
        cfg.controls.n_randomizations = 200;
        cfg.controls.max_iters = 2;
        cfg
    }
}

/// Load and validate a scenario file.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<ScenarioConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let cfg: ScenarioConfig = serde_json::from_str(&text).map_err(|source| Error::Parse {
        path: path.to_path_buf(),
        source,
    })?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn save_scenario(cfg: &ScenarioConfig, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, cfg.to_json()).map_err(|e| Error::io(path, e))
}

/// Which appendix case a band falls into, by how many channels it touches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BandCase {
    /// Both edges inside one channel.
    SameChannel,
    /// Edges in two neighbouring channels.
    Adjacent,
    /// Edges at least two channels apart; interior channels are fully covered.
    Spanning,
}

/// Channel indices (0-based) and channel-local edges of a shared band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandIndexing {
    pub low_channel: usize,
    pub high_channel: usize,
    /// Lower edge inside `low_channel`, cycles/sample.
    pub local_low: f64,
    /// Upper edge inside `high_channel`, cycles/sample.
    pub local_high: f64,
    pub case: BandCase,
}

/// Map a normalized shared band onto the channel grid.
///
/// The lower edge uses floor semantics. An upper edge that lands exactly on a
/// channel boundary stays in the lower channel (with a full-width local edge),
/// which also keeps `f_high = 1` inside the last channel.
pub fn normalize_band(band: &SharedBandSpec, cfg: &ArrayConfig) -> BandIndexing {
    let n = cfg.n_tx;
    let width = cfg.channel_width();
    let lo_scaled = band.f_low.clamp(0.0, 1.0) * n as f64;
    let hi_scaled = band.f_high.clamp(0.0, 1.0) * n as f64;
    let low_channel = (lo_scaled.floor() as usize).min(n - 1);
    let high_channel = ((hi_scaled.ceil() as usize).saturating_sub(1))
        .max(low_channel)
        .min(n - 1);
    let local_low = ((lo_scaled - low_channel as f64) * width).clamp(0.0, width);
    let local_high = ((hi_scaled - high_channel as f64) * width).clamp(0.0, width);
    let case = match high_channel - low_channel {
        0 => BandCase::SameChannel,
        1 => BandCase::Adjacent,
        _ => BandCase::Spanning,
    };
    BandIndexing {
        low_channel,
        high_channel,
        local_low,
        local_high,
        case,
    }
}

fn positive(v: f64, field: &str) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::config(field, format!("must be positive and finite, got {v}")))
    }
}

fn angle(v: f64, field: &str) -> Result<()> {
    if v.is_finite() && (-90.0..=90.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::config(field, format!("must lie in [-90, 90] degrees, got {v}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn benchmark_is_valid_with_forty_samples() {
        let cfg = ScenarioConfig::benchmark();
        cfg.validate().unwrap();
        assert_eq!(cfg.array.n_samples(), 40);
        let f: Vec<f64> = cfg.array.channel_freqs_hz().iter().map(|f| f / 1e6).collect();
        assert_eq!(f, vec![10000.0, 10001.0, 10002.0, 10003.0, 10004.0, 10005.0]);
    }

    #[test]
    fn overlapping_channels_rejected() {
        let mut cfg = ScenarioConfig::benchmark();
        cfg.array.delta_f_hz = 0.5e6;
        let err = cfg.validate().unwrap_err();
        assert!(matches!(err, Error::OverlappingChannels { .. }));
        assert!(err.to_string().contains("overlapping channel spectra"));
    }

    #[test]
    fn minimal_single_element_config() {
        let mut cfg = ScenarioConfig::benchmark();
        cfg.array.n_tx = 1;
        cfg.array.n_rx = 1;
        cfg.array.duration_s = None;
        cfg.array.n_samples = Some(2);
        cfg.shared_bands.clear();
        cfg.validate().unwrap();
        assert_eq!(cfg.array.channel_freqs_hz(), vec![10e9]);
    }

    #[test]
    fn invariant_violations_name_the_field() {
        let mut cfg = ScenarioConfig::benchmark();
        cfg.array.inband_tolerance = PerChannel::Each(vec![0.9; 5]);
        let msg = cfg.validate().unwrap_err().to_string();
        assert!(msg.contains("array.inband_tolerance"), "{msg}");

        let mut cfg = ScenarioConfig::benchmark();
        cfg.interferers[1].angle_deg = 95.0;
        let msg = cfg.validate().unwrap_err().to_string();
        assert!(msg.contains("interferers[1].angle_deg"), "{msg}");

        let mut cfg = ScenarioConfig::benchmark();
        cfg.shared_bands[0].f_high = 1.2;
        assert!(cfg.validate().unwrap_err().to_string().contains("shared_bands[0]"));

        let mut cfg = ScenarioConfig::benchmark();
        cfg.controls.max_iters = 0;
        assert!(cfg.validate().unwrap_err().to_string().contains("controls.max_iters"));
    }

    #[test]
    fn duration_and_sample_count_must_agree() {
        let mut cfg = ScenarioConfig::benchmark();
        cfg.array.n_samples = Some(41);
        assert!(cfg.validate().unwrap_err().to_string().contains("duration_s"));
        cfg.array.n_samples = Some(40);
        cfg.validate().unwrap();
    }

    #[test]
    fn band_indexing_two_channel_case() {
        let cfg = ScenarioConfig::benchmark();
        let b = normalize_band(&SharedBandSpec::new(0.073, 0.200, 1.0), &cfg.array);
        assert_eq!((b.low_channel, b.high_channel), (0, 1));
        assert_eq!(b.case, BandCase::Adjacent);
        assert!((b.local_low - 0.438).abs() < 1e-12);
        assert!((b.local_high - 0.2).abs() < 1e-12);
    }

    #[test]
    fn band_indexing_spanning_case() {
        let cfg = ScenarioConfig::benchmark();
        let b = normalize_band(&SharedBandSpec::new(0.556, 0.884, 1.0), &cfg.array);
        assert_eq!((b.low_channel, b.high_channel), (3, 5));
        assert_eq!(b.case, BandCase::Spanning);
    }

    #[test]
    fn whole_band_single_channel_clamps() {
        let mut cfg = ScenarioConfig::benchmark();
        cfg.array.n_tx = 1;
        let b = normalize_band(&SharedBandSpec::new(0.0, 1.0, 1.0), &cfg.array);
        assert_eq!((b.low_channel, b.high_channel), (0, 0));
        assert_eq!(b.case, BandCase::SameChannel);
        assert_eq!((b.local_low, b.local_high), (0.0, 1.0));

        let cfg = ScenarioConfig::benchmark();
        let b = normalize_band(&SharedBandSpec::new(0.5, 1.0, 1.0), &cfg.array);
        assert_eq!((b.low_channel, b.high_channel), (3, 5));
        assert_eq!(b.local_high, 1.0);
    }

    #[test]
    fn json_round_trip_is_identical() {
        let cfg = ScenarioConfig::benchmark();
        let text = cfg.to_json();
        let back = ScenarioConfig::from_json(&text).unwrap();
        assert_eq!(cfg, back);
        assert_eq!(text, back.to_json());
    }

    #[test]
    fn per_channel_lists_parse() {
        let mut text = ScenarioConfig::reduced().to_json();
        text = text.replace("\"lp_cutoff\": 0.5", "\"lp_cutoff\": [0.5, 0.4, 0.3]");
        let cfg = ScenarioConfig::from_json(&text).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.array.lp_cutoffs(), vec![0.5, 0.4, 0.3]);
    }
}
