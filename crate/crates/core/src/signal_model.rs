//! Steering vectors, waveform vectorizations and the structural matrices used
//! by the constraints.
//!
//! Two stackings of the `N_T x L` sample matrix `S` appear throughout:
//! the snapshot-major `s` (entry `l * N_T + m`) and the waveform-major `s_T`
//! (entry `m * L + l`). The commutation matrix maps the first onto the second.

use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{cis, CMat, CVec, RMat};
use crate::scenario::{ArrayConfig, SPEED_OF_LIGHT};
use crate::spectral::frequency_gram;

/// `a_T(theta)`: transmit steering vector, angle in degrees.
pub fn tx_steering_angle(theta_deg: f64, cfg: &ArrayConfig) -> CVec {
    let step = cfg.tx_spacing() * theta_deg.to_radians().sin() / cfg.wavelength();
    progression(cfg.n_tx, step)
}

/// `a_T(r, theta)`: transmit steering vector including the frequency-offset
/// range term `2 delta_f r / c`.
pub fn tx_steering_range_angle(range_m: f64, theta_deg: f64, cfg: &ArrayConfig) -> CVec {
    let step = cfg.tx_spacing() * theta_deg.to_radians().sin() / cfg.wavelength()
        - 2.0 * cfg.delta_f_hz * range_m / SPEED_OF_LIGHT;
    progression(cfg.n_tx, step)
}

/// `b_R(theta)`: receive steering vector, angle in degrees.
pub fn rx_steering(theta_deg: f64, cfg: &ArrayConfig) -> CVec {
    let step = cfg.rx_spacing() * theta_deg.to_radians().sin() / cfg.wavelength();
    progression(cfg.n_rx, step)
}

fn progression(n: usize, cycles_per_element: f64) -> CVec {
    // Reduce the step modulo one cycle first so large range terms keep full
    // phase precision.
    let step = cycles_per_element - cycles_per_element.round();
    CVec::from_fn(n, |k, _| cis(2.0 * PI * ((k as f64 * step) % 1.0)))
}

/// All three steering vectors of one look direction.
#[derive(Debug, Clone)]
pub struct SteeringVectors {
    pub tx_angle: CVec,
    pub tx_range_angle: CVec,
    pub rx: CVec,
}

impl SteeringVectors {
    pub fn new(range_m: f64, theta_deg: f64, cfg: &ArrayConfig) -> Self {
        Self {
            tx_angle: tx_steering_angle(theta_deg, cfg),
            tx_range_angle: tx_steering_range_angle(range_m, theta_deg, cfg),
            rx: rx_steering(theta_deg, cfg),
        }
    }
}

/// Index of `S(m, l)` in the waveform-major stacking.
#[inline]
pub fn waveform_index(m: usize, l: usize, n_samples: usize) -> usize {
    m * n_samples + l
}

/// Index of `S(m, l)` in the snapshot-major stacking.
#[inline]
pub fn snapshot_index(m: usize, l: usize, n_tx: usize) -> usize {
    l * n_tx + m
}

/// Commutation matrix `T(n_tx, L)` with `T s = s_T`.
pub fn commutation_matrix(n_tx: usize, n_samples: usize) -> RMat {
    let n = n_tx * n_samples;
    let mut t = RMat::zeros(n, n);
    for m in 0..n_tx {
        for l in 0..n_samples {
            t[(waveform_index(m, l, n_samples), snapshot_index(m, l, n_tx))] = 1.0;
        }
    }
    t
}

/// Reorder a snapshot-major vector to waveform-major.
pub fn snapshot_to_waveform(s: &CVec, n_tx: usize, n_samples: usize) -> CVec {
    CVec::from_fn(n_tx * n_samples, |i, _| {
        let (m, l) = (i / n_samples, i % n_samples);
        s[snapshot_index(m, l, n_tx)]
    })
}

/// Reorder a waveform-major vector to snapshot-major.
pub fn waveform_to_snapshot(s_t: &CVec, n_tx: usize, n_samples: usize) -> CVec {
    CVec::from_fn(n_tx * n_samples, |i, _| {
        let (l, m) = (i / n_tx, i % n_tx);
        s_t[waveform_index(m, l, n_samples)]
    })
}

/// Conjugate a snapshot-ordered matrix into waveform order: `T M T^T`.
pub fn permute_to_waveform(m: &CMat, n_tx: usize, n_samples: usize) -> CMat {
    let n = n_tx * n_samples;
    let src = |i: usize| snapshot_index(i / n_samples, i % n_samples, n_tx);
    CMat::from_fn(n, n, |i, j| m[(src(i), src(j))])
}

/// `Sigma_m`: diagonal 0/1 selector of waveform `m` in waveform-major order.
pub fn energy_selector(m: usize, cfg: &ArrayConfig) -> Result<CMat> {
    check_channel(m, cfg.n_tx)?;
    let l = cfg.n_samples();
    let n = cfg.n_tx * l;
    Ok(CMat::from_fn(n, n, |i, j| {
        if i == j && i / l == m {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::default()
        }
    }))
}

/// `B_m`: block-diagonal matrix whose only nonzero block (the `m`-th) is the
/// Gram of the in-band interval `[0, f_{m,lp}]`.
pub fn bandwidth_gram(m: usize, cfg: &ArrayConfig) -> Result<CMat> {
    check_channel(m, cfg.n_tx)?;
    let l = cfg.n_samples();
    let mut out = CMat::zeros(cfg.n_tx * l, cfg.n_tx * l);
    let block = frequency_gram(0.0, cfg.lp_cutoff.get(m), l)?;
    out.view_mut((m * l, m * l), (l, l)).copy_from(&block);
    Ok(out)
}

/// In-band Gram block `K(0, f_{m,lp})` of channel `m` alone (order `L`).
pub fn bandwidth_block(m: usize, cfg: &ArrayConfig) -> Result<CMat> {
    check_channel(m, cfg.n_tx)?;
    frequency_gram(0.0, cfg.lp_cutoff.get(m), cfg.n_samples())
}

fn check_channel(m: usize, n_tx: usize) -> Result<()> {
    if m >= n_tx {
        return Err(Error::IndexOutOfRange {
            what: "transmit channel",
            index: m,
            len: n_tx,
        });
    }
    Ok(())
}

/// A set of `N_T` baseband waveforms of `L` samples each.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveformSet {
    /// `S`: row `m` is waveform `m`.
    pub samples: CMat,
}

impl WaveformSet {
    pub fn new(samples: CMat) -> Self {
        Self { samples }
    }

    pub fn n_tx(&self) -> usize {
        self.samples.nrows()
    }

    pub fn n_samples(&self) -> usize {
        self.samples.ncols()
    }

    /// `s`: column-major stack of the snapshots `s(1), ..., s(L)`.
    pub fn vec_snapshot(&self) -> CVec {
        CVec::from_column_slice(self.samples.as_slice())
    }

    /// `s_T`: the waveforms concatenated one after another.
    pub fn vec_waveform(&self) -> CVec {
        CVec::from_column_slice(self.samples.transpose().as_slice())
    }

    pub fn from_vec_waveform(s_t: &CVec, n_tx: usize) -> Self {
        let l = s_t.len() / n_tx;
        Self::new(CMat::from_fn(n_tx, l, |m, k| s_t[waveform_index(m, k, l)]))
    }

    pub fn from_vec_snapshot(s: &CVec, n_tx: usize) -> Self {
        let l = s.len() / n_tx;
        Self::new(CMat::from_column_slice(n_tx, l, s.as_slice()))
    }

    /// Snapshot `s(l)`, the `l`-th column of `S`.
    pub fn snapshot(&self, l: usize) -> CVec {
        self.samples.column(l).into_owned()
    }

    pub fn row_energy(&self, m: usize) -> f64 {
        self.samples.row(m).iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn row_energies(&self) -> Vec<f64> {
        (0..self.n_tx()).map(|m| self.row_energy(m)).collect()
    }

    /// Rescale every row to energy `1 / N_T`. Rows of zero energy stay zero.
    pub fn normalize_rows(&mut self) {
        let target = (1.0 / self.n_tx() as f64).sqrt();
        for m in 0..self.n_tx() {
            let e = self.row_energy(m).sqrt();
            if e > 0.0 {
                let scale = target / e;
                self.samples.row_mut(m).iter_mut().for_each(|z| *z *= scale);
            }
        }
    }

    /// CSV text: one row per channel, `re,im` pairs per sample.
    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
        for m in 0..self.n_tx() {
            let rec: Vec<String> = self
                .samples
                .row(m)
                .iter()
                .flat_map(|z| [z.re.to_string(), z.im.to_string()])
                .collect();
            w.write_record(&rec).expect("in-memory csv");
        }
        String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf8")
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let rows = read_complex_rows(path)?;
        let l = rows.first().map(Vec::len).unwrap_or(0);
        if rows.is_empty() || l == 0 {
            return Err(Error::Csv {
                path: path.to_path_buf(),
                line: 1,
                reason: "no samples".into(),
            });
        }
        if let Some((i, _)) = rows.iter().enumerate().find(|(_, r)| r.len() != l) {
            return Err(Error::Csv {
                path: path.to_path_buf(),
                line: i + 1,
                reason: format!("expected {l} samples like the first row"),
            });
        }
        let n = rows.len();
        Ok(Self::new(CMat::from_fn(n, l, |m, k| rows[m][k])))
    }
}

/// Parse a headerless CSV of `re,im` pairs into complex rows.
pub(crate) fn read_complex_rows(path: &Path) -> Result<Vec<Vec<Complex64>>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let bad = |reason: String| Error::Csv {
            path: path.to_path_buf(),
            line: i + 1,
            reason,
        };
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        if rec.len() % 2 != 0 {
            return Err(bad(format!("odd number of fields ({})", rec.len())));
        }
        let mut values = Vec::with_capacity(rec.len());
        for field in rec.iter() {
            let v: f64 = field.parse().map_err(|_| bad(format!("not a number: {field:?}")))?;
            if !v.is_finite() {
                return Err(bad(format!("non-finite value {field:?}")));
            }
            values.push(v);
        }
        rows.push(values.chunks(2).map(|p| Complex64::new(p[0], p[1])).collect());
    }
    Ok(rows)
}

/// The reference chirp set and the sweep actually used per channel.
#[derive(Debug, Clone)]
pub struct ReferenceLfm {
    pub waveforms: WaveformSet,
    /// Swept bandwidth of each channel in cycles/sample.
    pub sweeps: Vec<f64>,
    /// In-band energy fraction `N_T s_T^H B_m s_T` of each channel.
    pub inband_fraction: Vec<f64>,
}

/// Unit-modulus linear chirp of `L` samples sweeping `[0, sweep]` cycles/sample.
pub fn chirp(sweep: f64, n_samples: usize) -> CVec {
    let l = n_samples as f64;
    CVec::from_fn(n_samples, |k, _| {
        let k = k as f64;
        cis(PI * sweep * k * k / l)
    })
}

/// Reference waveform set `s_Ref`: in every channel a constant-modulus linear
/// chirp sweeping the low-pass band, with energy `1 / N_T` per waveform.
///
/// When the chirp over the full low-pass band does not meet the in-band
/// tolerance, its sweep is shrunk in 2% steps until it does.
pub fn reference_lfm(cfg: &ArrayConfig) -> ReferenceLfm {
    let n = cfg.n_tx;
    let l = cfg.n_samples();
    let amp = 1.0 / ((n * l) as f64).sqrt();
    let mut samples = CMat::zeros(n, l);
    let mut sweeps = Vec::with_capacity(n);
    let mut fractions = Vec::with_capacity(n);
    for m in 0..n {
        let cutoff = cfg.lp_cutoff.get(m);
        let gamma = cfg.inband_tolerance.get(m);
        let gram = frequency_gram(0.0, cutoff, l).expect("validated cutoff");
        let fraction = |x: &CVec| x.dotc(&(&gram * x)).re / l as f64;
        let mut best = (cutoff, fraction(&chirp(cutoff, l)));
        if best.1 < gamma {
            let mut sweep = cutoff;
            for _ in 0..50 {
                sweep *= 0.98;
                let f = fraction(&chirp(sweep, l));
                if f > best.1 {
                    best = (sweep, f);
                }
                if f >= gamma {
                    best = (sweep, f);
                    break;
                }
            }
            if best.1 < gamma {
                log::warn!(
                    "channel {}: reference chirp reaches only {:.4} in-band (tolerance {gamma})",
                    m + 1,
                    best.1
                );
            }
        }
        let x = chirp(best.0, l);
        for k in 0..l {
            samples[(m, k)] = x[k] * amp;
        }
        sweeps.push(best.0);
        fractions.push(best.1);
    }
    ReferenceLfm {
        waveforms: WaveformSet::new(samples),
        sweeps,
        inband_fraction: fractions,
    }
}
