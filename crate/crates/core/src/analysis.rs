//! Post-design evaluation: autocorrelation, receive beampattern, interference
//! spectrum and the on-disk report.
//!
//! Report layout (all CSVs have a header row):
//!
//! | file | columns |
//! |------|---------|
//! | `esd.csv` | `freq,channel,value,value_db` (freq normalized over the total band) |
//! | `acf.csv` | `lag,acf_db_1,...,acf_db_NT` (peak-normalized) |
//! | `beampattern.csv` | `theta_deg,power,power_db,normalized_db` |
//! | `spectrum.csv` | `channel,freq_hz,theta_deg,value,normalized_db` |
//! | `waveforms.csv` | headerless, one row per channel of `re,im` pairs |
//! | `weights.csv` | headerless, one `re,im` row per element |
//! | `summary.json` | [`Summary`], `"schema": 1` |
//!
//! PSL excludes the mainlobe, taken to end at the first local minimum of
//! `|r(tau)|`.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::Cholesky;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::codesign::{ConstraintCheck, DesignContext, DesignResult, StepRecord};
use crate::error::{Error, Result};
use crate::interference::CovarianceModel;
use crate::linalg::{c, CVec};
use crate::receiver::{signature, to_db};
use crate::scenario::{ArrayConfig, BandCase};
use crate::signal_model::{rx_steering, tx_steering_range_angle, WaveformSet};
use crate::spectral::{band_energy_quadrature, esd_curve};

pub const SUMMARY_SCHEMA: u32 = 1;
/// Grid points per channel for ESD export and quadrature.
pub const ESD_GRID: usize = 4096;

/// `None` for the infinities JSON cannot carry.
fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

/// Autocorrelation of one waveform.
#[derive(Debug, Clone, PartialEq)]
pub struct AcfReport {
    /// `-(L-1) ..= L-1`.
    pub lags: Vec<i64>,
    /// `|r(tau)| / r(0)`.
    pub magnitude: Vec<f64>,
    pub acf_db: Vec<f64>,
    /// Peak sidelobe level in dB, `-inf` when there are no sidelobes.
    pub psl_db: f64,
    /// First lag outside the mainlobe, if any.
    pub mainlobe_edge: Option<usize>,
}

/// `r(tau) = sum_l x(l) conj(x(l - tau))`, normalized by `r(0)`.
pub fn acf(s: &WaveformSet, m: usize) -> AcfReport {
    let x: Vec<_> = s.samples.row(m).iter().copied().collect();
    let l = x.len() as i64;
    let r = |tau: i64| -> f64 {
        let lo = tau.max(0);
        let hi = (l + tau.min(0)).min(l);
        (lo..hi)
            .map(|k| x[k as usize] * x[(k - tau) as usize].conj())
            .sum::<num_complex::Complex64>()
            .norm()
    };
    let lags: Vec<i64> = (-(l - 1)..l).collect();
    let r0 = r(0);
    let magnitude: Vec<f64> = lags
        .iter()
        .map(|&t| if r0 > 0.0 { r(t) / r0 } else { 0.0 })
        .collect();
    let positive = &magnitude[(l - 1) as usize..];
    let edge = (1..positive.len().saturating_sub(1)).find(|&t| positive[t] <= positive[t + 1]);
    let psl = match edge {
        Some(e) if r0 > 0.0 => positive[e..].iter().copied().fold(0.0, f64::max),
        _ => 0.0,
    };
    AcfReport {
        lags,
        acf_db: magnitude.iter().map(|&v| 20.0 * v.log10()).collect(),
        magnitude,
        psl_db: 20.0 * psl.log10(),
        mainlobe_edge: edge,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamPoint {
    pub theta_deg: f64,
    pub power: f64,
    pub power_db: f64,
    /// Relative to the largest value on the grid.
    pub normalized_db: f64,
}

/// `P_R(theta) = |v^H A(r_t, theta; w) s|^2` on a grid of angles.
pub fn receive_beampattern(
    s: &WaveformSet,
    w: &CVec,
    v: &CVec,
    range_m: f64,
    theta_grid: &[f64],
    cfg: &ArrayConfig,
) -> Vec<BeamPoint> {
    let snap = s.vec_snapshot();
    let power: Vec<f64> = theta_grid
        .par_iter()
        .map(|&theta| {
            let a = tx_steering_range_angle(range_m, theta, cfg);
            let b = rx_steering(theta, cfg);
            v.dotc(&signature(&a, &b, &snap, w)).norm_sqr()
        })
        .collect();
    let peak = power.iter().copied().fold(0.0, f64::max);
    theta_grid
        .iter()
        .zip(power)
        .map(|(&theta_deg, p)| BeamPoint {
            theta_deg,
            power: p,
            power_db: to_db(p),
            normalized_db: to_db(p / peak),
        })
        .collect()
}

/// Interference spectrum `[b_R(theta) ⊗ e_m]^H Q^{-1} [b_R(theta) ⊗ e_m]` per
/// channel and angle, on the single-snapshot covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct InterferenceSpectrum {
    pub theta_deg: Vec<f64>,
    pub channel_freq_hz: Vec<f64>,
    /// `values[m][k]` at channel `m`, angle `theta_deg[k]`.
    pub values: Vec<Vec<f64>>,
}

impl InterferenceSpectrum {
    /// Channel and angle of the smallest value.
    pub fn minimum(&self) -> (usize, f64, f64) {
        let mut best = (0, self.theta_deg[0], f64::INFINITY);
        for (m, row) in self.values.iter().enumerate() {
            for (k, &v) in row.iter().enumerate() {
                if v < best.2 {
                    best = (m, self.theta_deg[k], v);
                }
            }
        }
        best
    }

    pub fn maximum(&self) -> f64 {
        self.values.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

pub fn interference_spectrum(
    cov: &CovarianceModel,
    theta_grid: &[f64],
    cfg: &ArrayConfig,
) -> Result<InterferenceSpectrum> {
    let inv = Cholesky::new(cov.single.clone())
        .ok_or(Error::NotPositiveDefinite("single-snapshot covariance"))?
        .inverse();
    let n_tx = cfg.n_tx;
    let rx: Vec<CVec> = theta_grid.iter().map(|&t| rx_steering(t, cfg)).collect();
    let values = (0..n_tx)
        .into_par_iter()
        .map(|m| {
            rx.iter()
                .map(|b| {
                    // Receiver-major order: entry (n, m) sits at n N_T + m.
                    let mut acc = c(0.0, 0.0);
                    for (i, bi) in b.iter().enumerate() {
                        for (j, bj) in b.iter().enumerate() {
                            acc += bi.conj() * inv[(i * n_tx + m, j * n_tx + m)] * bj;
                        }
                    }
                    acc.re
                })
                .collect()
        })
        .collect();
    Ok(InterferenceSpectrum {
        theta_deg: theta_grid.to_vec(),
        channel_freq_hz: cfg.channel_freqs_hz(),
        values,
    })
}

/// Evenly spaced angles from `start` to `end` inclusive.
pub fn angle_grid(start: f64, end: f64, step: f64) -> Vec<f64> {
    let n = ((end - start) / step).round() as usize;
    (0..=n).map(|k| start + k as f64 * step).collect()
}

/// Provenance of one run, stored verbatim in `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub scenario_path: Option<String>,
    pub mode: String,
    pub seed: u64,
    pub iters: usize,
    pub trials: usize,
    pub tool_version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandSummary {
    pub name: String,
    pub f_low: f64,
    pub f_high: f64,
    pub case: BandCase,
    pub energy: f64,
    /// Energy from numerical integration of the ESD.
    pub energy_quadrature: f64,
    pub eta: f64,
    pub satisfied: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    pub name: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub schema: u32,
    pub manifest: RunManifest,
    pub mode: String,
    pub sinr_db: f64,
    pub sinr_linear: f64,
    /// Incumbent SINR per iteration, `null` before any feasible design.
    pub sinr_trace_db: Vec<Option<f64>>,
    /// SINR of other modes of the same scenario, when they were run.
    pub mode_sinr_db: BTreeMap<String, f64>,
    pub feasible: bool,
    pub randomization_exhausted: bool,
    pub bands: Vec<BandSummary>,
    pub constraints: Vec<ConstraintCheck>,
    pub reference_sweeps: Vec<f64>,
    pub psl_db: Vec<Option<f64>>,
    pub steps: Vec<StepRecord>,
    pub files: Vec<FileEntry>,
}

impl Summary {
    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let s: Summary = serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            source: e,
        })?;
        if s.schema != SUMMARY_SCHEMA {
            return Err(Error::Schema(format!(
                "{} has schema {}, expected {SUMMARY_SCHEMA}",
                path.display(),
                s.schema
            )));
        }
        Ok(s)
    }
}

/// The numeric outputs of a design, independent of how it was produced.
pub struct Evaluation {
    pub waveforms: WaveformSet,
    pub weights: CVec,
    pub mvdr: CVec,
    pub sinr_linear: f64,
    pub bands: Vec<BandSummary>,
    pub constraints: Vec<ConstraintCheck>,
    pub feasible: bool,
    pub acf: Vec<AcfReport>,
}

pub fn evaluate(ctx: &DesignContext, s: &WaveformSet, w: &CVec) -> Result<Evaluation> {
    let (sinr_linear, report, mvdr) = crate::codesign::evaluate_design(ctx, s, w)?;
    let cfg = &ctx.scenario.array;
    let bands = report
        .bands
        .iter()
        .zip(&ctx.scenario.shared_bands)
        .map(|(b, spec)| BandSummary {
            name: b.name.clone(),
            f_low: b.f_low,
            f_high: b.f_high,
            case: b.case,
            energy: b.energy,
            energy_quadrature: band_energy_quadrature(s, w, spec, cfg, ESD_GRID),
            eta: b.eta,
            satisfied: b.satisfied,
        })
        .collect();
    Ok(Evaluation {
        waveforms: s.clone(),
        weights: w.clone(),
        mvdr,
        sinr_linear,
        bands,
        constraints: report.constraints,
        feasible: report.feasible,
        acf: (0..s.n_tx()).map(|m| acf(s, m)).collect(),
    })
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new().from_writer(Vec::new())
}

fn finish_csv(w: csv::Writer<Vec<u8>>) -> Vec<u8> {
    w.into_inner().expect("in-memory csv")
}

fn esd_csv(e: &Evaluation, cfg: &ArrayConfig) -> Vec<u8> {
    let mut w = csv_writer();
    w.write_record(["freq", "channel", "value", "value_db"]).expect("csv");
    for p in esd_curve(&e.waveforms, &e.weights, cfg, ESD_GRID / 8) {
        w.write_record([
            p.freq.to_string(),
            (p.channel + 1).to_string(),
            p.value.to_string(),
            to_db(p.value).to_string(),
        ])
        .expect("csv");
    }
    finish_csv(w)
}

fn acf_csv(e: &Evaluation) -> Vec<u8> {
    let mut w = csv_writer();
    let mut header = vec!["lag".to_string()];
    header.extend((1..=e.acf.len()).map(|m| format!("acf_db_{m}")));
    w.write_record(&header).expect("csv");
    let lags = e.acf.first().map(|a| a.lags.clone()).unwrap_or_default();
    for (k, lag) in lags.iter().enumerate() {
        let mut rec = vec![lag.to_string()];
        rec.extend(e.acf.iter().map(|a| a.acf_db[k].to_string()));
        w.write_record(&rec).expect("csv");
    }
    finish_csv(w)
}

fn beampattern_csv(points: &[BeamPoint]) -> Vec<u8> {
    let mut w = csv_writer();
    w.write_record(["theta_deg", "power", "power_db", "normalized_db"]).expect("csv");
    for p in points {
        w.write_record([
            p.theta_deg.to_string(),
            p.power.to_string(),
            p.power_db.to_string(),
            p.normalized_db.to_string(),
        ])
        .expect("csv");
    }
    finish_csv(w)
}

fn spectrum_csv(sp: &InterferenceSpectrum) -> Vec<u8> {
    let mut w = csv_writer();
    w.write_record(["channel", "freq_hz", "theta_deg", "value", "normalized_db"]).expect("csv");
    let peak = sp.maximum();
    for (m, row) in sp.values.iter().enumerate() {
        for (k, &v) in row.iter().enumerate() {
            w.write_record([
                (m + 1).to_string(),
                sp.channel_freq_hz[m].to_string(),
                sp.theta_deg[k].to_string(),
                v.to_string(),
                to_db(v / peak).to_string(),
            ])
            .expect("csv");
        }
    }
    finish_csv(w)
}

fn weights_csv(w: &CVec) -> Vec<u8> {
    let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    for z in w.iter() {
        out.write_record([z.re.to_string(), z.im.to_string()]).expect("csv");
    }
    finish_csv(out)
}

/// Read a headerless `re,im` weight file.
pub fn read_weights(path: impl AsRef<Path>) -> Result<CVec> {
    let path = path.as_ref();
    let rows = crate::signal_model::read_complex_rows(path)?;
    if let Some((i, _)) = rows.iter().enumerate().find(|(_, r)| r.len() != 1) {
        return Err(Error::Csv {
            path: path.to_path_buf(),
            line: i + 1,
            reason: "expected one re,im pair per line".into(),
        });
    }
    if rows.is_empty() {
        return Err(Error::Csv {
            path: path.to_path_buf(),
            line: 1,
            reason: "no weights".into(),
        });
    }
    Ok(CVec::from_iterator(rows.len(), rows.into_iter().map(|r| r[0])))
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Where a report is written and what it carries beyond the evaluation.
pub struct ReportInput<'a> {
    pub ctx: &'a DesignContext,
    pub manifest: RunManifest,
    pub evaluation: &'a Evaluation,
    pub sinr_trace_db: Vec<f64>,
    pub steps: Vec<StepRecord>,
    pub randomization_exhausted: bool,
    pub mode_sinr_db: BTreeMap<String, f64>,
}

/// Write every report file to `out_dir` and return the summary.
pub fn write_report(input: ReportInput<'_>, out_dir: impl AsRef<Path>) -> Result<Summary> {
    let out = out_dir.as_ref();
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let ctx = input.ctx;
    let e = input.evaluation;
    let cfg = &ctx.scenario.array;
    let grid = angle_grid(-90.0, 90.0, 0.5);
    let beam = receive_beampattern(&e.waveforms, &e.weights, &e.mvdr, ctx.scenario.target.range_m, &grid, cfg);
    let spectrum = interference_spectrum(&ctx.receiver.covariance, &grid, cfg)?;

    let files: Vec<(&str, Vec<u8>)> = vec![
        ("waveforms.csv", e.waveforms.to_csv().into_bytes()),
        ("weights.csv", weights_csv(&e.weights)),
        ("esd.csv", esd_csv(e, cfg)),
        ("acf.csv", acf_csv(e)),
        ("beampattern.csv", beampattern_csv(&beam)),
        ("spectrum.csv", spectrum_csv(&spectrum)),
    ];
    let mut entries = Vec::new();
    for (name, bytes) in &files {
        let path: PathBuf = out.join(name);
        fs::write(&path, bytes).map_err(|err| Error::io(&path, err))?;
        entries.push(FileEntry {
            name: name.to_string(),
            sha256: sha256_hex(bytes),
        });
    }
    let mut mode_sinr_db = input.mode_sinr_db;
    mode_sinr_db.insert(input.manifest.mode.clone(), to_db(e.sinr_linear));
    let summary = Summary {
        schema: SUMMARY_SCHEMA,
        mode: input.manifest.mode.clone(),
        manifest: input.manifest,
        sinr_db: to_db(e.sinr_linear),
        sinr_linear: e.sinr_linear,
        sinr_trace_db: input.sinr_trace_db.into_iter().map(finite).collect(),
        mode_sinr_db,
        feasible: e.feasible,
        randomization_exhausted: input.randomization_exhausted,
        bands: e.bands.clone(),
        constraints: e.constraints.clone(),
        reference_sweeps: ctx.reference_sweeps.clone(),
        psl_db: e.acf.iter().map(|a| finite(a.psl_db)).collect(),
        steps: input.steps,
        files: entries,
    };
    let path = out.join("summary.json");
    let text = serde_json::to_string_pretty(&summary).expect("summary serializes") + "\n";
    fs::write(&path, text).map_err(|err| Error::io(&path, err))?;
    Ok(summary)
}

/// Report for a finished design run.
pub fn report(
    result: &DesignResult,
    ctx: &DesignContext,
    manifest: RunManifest,
    out_dir: impl AsRef<Path>,
) -> Result<Summary> {
    let evaluation = evaluate(ctx, &result.waveforms, &result.weights)?;
    write_report(
        ReportInput {
            ctx,
            manifest,
            evaluation: &evaluation,
            sinr_trace_db: result.sinr_trace_db.clone(),
            steps: result.steps.clone(),
            randomization_exhausted: result.randomization_exhausted,
            mode_sinr_db: BTreeMap::new(),
        },
        out_dir,
    )
}

/// Largest relative disagreement between a stored summary and a fresh
/// evaluation of the same design.
pub fn compare_to_summary(stored: &Summary, fresh: &Evaluation) -> Result<f64> {
    let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs()).max(1e-300);
    if stored.bands.len() != fresh.bands.len() || stored.constraints.len() != fresh.constraints.len() {
        return Err(Error::Schema("stored summary describes a different scenario".into()));
    }
    let mut worst = rel(stored.sinr_linear, fresh.sinr_linear);
    for (a, b) in stored.bands.iter().zip(&fresh.bands) {
        worst = worst.max((a.energy - b.energy).abs()).max((a.energy_quadrature - b.energy_quadrature).abs());
    }
    for (a, b) in stored.constraints.iter().zip(&fresh.constraints) {
        if a.name != b.name {
            return Err(Error::Schema(format!("constraint {:?} stored as {:?}", b.name, a.name)));
        }
        worst = worst.max(rel(a.value, b.value).min((a.value - b.value).abs()));
    }
    Ok(worst)
}

/// Re-check a stored design against a scenario.
pub fn check_stored(ctx: &DesignContext, dir: impl AsRef<Path>) -> Result<(WaveformSet, CVec)> {
    let dir = dir.as_ref();
    let s = WaveformSet::read_csv(dir.join("waveforms.csv"))?;
    let w = read_weights(dir.join("weights.csv"))?;
    crate::codesign::evaluate_design(ctx, &s, &w)?;
    Ok((s, w))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interference::scenario_covariance;
    use crate::linalg::{cis, CMat};
    use crate::scenario::ScenarioConfig;
    use crate::signal_model::reference_lfm;

    fn row(values: Vec<num_complex::Complex64>) -> WaveformSet {
        let n = values.len();
        WaveformSet::new(CMat::from_row_iterator(1, n, values))
    }

    #[test]
    fn delta_has_no_sidelobes() {
        let mut v = vec![c(0.0, 0.0); 8];
        v[3] = c(2.0, 0.0);
        let a = acf(&row(v), 0);
        assert_eq!(a.lags.len(), 15);
        assert_eq!(a.acf_db[7], 0.0);
        assert_eq!(a.psl_db, f64::NEG_INFINITY);
    }

    #[test]
    fn constant_sequence_is_triangular() {
        let l = 12;
        let a = acf(&row(vec![cis(0.4); l]), 0);
        for (k, &lag) in a.lags.iter().enumerate() {
            let expect = (l as f64 - lag.abs() as f64) / l as f64;
            assert!((a.magnitude[k] - expect).abs() < 1e-14);
        }
        assert!((a.magnitude[l] - (l as f64 - 1.0) / l as f64).abs() < 1e-14);
        // Monotone to the last lag: no local minimum, no sidelobes.
        assert_eq!(a.mainlobe_edge, None);
        assert_eq!(a.psl_db, f64::NEG_INFINITY);
    }

    #[test]
    fn acf_is_symmetric() {
        let s = reference_lfm(&ScenarioConfig::benchmark().array).waveforms;
        for m in 0..s.n_tx() {
            let a = acf(&s, m);
            let n = a.magnitude.len();
            for k in 0..n {
                assert!((a.magnitude[k] - a.magnitude[n - 1 - k]).abs() < 1e-12);
            }
            assert!(a.psl_db < 0.0 && a.psl_db.is_finite());
        }
    }

    #[test]
    fn reference_lfm_psl_fixture() {
        let s = reference_lfm(&ScenarioConfig::benchmark().array).waveforms;
        let psl = acf(&s, 0).psl_db;
        assert!((psl - LFM_PSL_DB).abs() < 1e-9, "{psl}");
    }

    /// Peak sidelobe of the benchmark reference chirp, frozen on first run.
    const LFM_PSL_DB: f64 = -13.998892871628215;

    #[test]
    fn spectrum_without_interference_is_flat() {
        let mut scenario = ScenarioConfig::reduced();
        scenario.interferers.clear();
        let cov = scenario_covariance(&scenario).unwrap();
        let sp = interference_spectrum(&cov, &angle_grid(-90.0, 90.0, 5.0), &scenario.array).unwrap();
        for v in sp.values.iter().flatten() {
            assert!((v - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn spectrum_dips_at_the_interferer() {
        let mut scenario = ScenarioConfig::benchmark();
        scenario.interferers.truncate(1);
        let cov = scenario_covariance(&scenario).unwrap();
        let sp = interference_spectrum(&cov, &angle_grid(-90.0, 90.0, 0.5), &scenario.array).unwrap();
        let (m, theta, v) = sp.minimum();
        assert_eq!(m, 0);
        assert!((theta - 10.0).abs() <= 0.5, "{theta}");
        assert!(v > 0.0);
        assert!(sp.values.iter().flatten().all(|&x| x > 0.0));
    }

    #[test]
    fn spectrum_is_symmetric_for_mirrored_interferers() {
        let mut scenario = ScenarioConfig::reduced();
        scenario.interferers[1].freq_hz = scenario.interferers[0].freq_hz;
        scenario.interferers[1].inr_db = scenario.interferers[0].inr_db;
        scenario.interferers[0].angle_deg = 25.0;
        scenario.interferers[1].angle_deg = -25.0;
        let cov = scenario_covariance(&scenario).unwrap();
        let grid = angle_grid(-90.0, 90.0, 1.0);
        let sp = interference_spectrum(&cov, &grid, &scenario.array).unwrap();
        for row in &sp.values {
            let n = row.len();
            for k in 0..n {
                assert!((row[k] - row[n - 1 - k]).abs() < 1e-9 * row[k]);
            }
        }
    }

    #[test]
    fn beampattern_is_unity_at_target() {
        let scenario = ScenarioConfig::benchmark();
        let cov = scenario_covariance(&scenario).unwrap();
        let model = crate::receiver::ReceiverModel::new(&scenario, cov);
        let s = reference_lfm(&scenario.array).waveforms;
        let w = CVec::from_element(6, c(1.0, 0.0));
        let v = model.mvdr(&s.vec_snapshot(), &w).unwrap();
        let p = receive_beampattern(&s, &w, &v, 15e3, &[40.0, 10.0], &scenario.array);
        assert!((p[0].power - 1.0).abs() < 1e-8);
    }

    #[test]
    fn beampattern_peaks_at_target_without_interference() {
        let mut scenario = ScenarioConfig::benchmark();
        scenario.interferers.clear();
        let cov = scenario_covariance(&scenario).unwrap();
        let model = crate::receiver::ReceiverModel::new(&scenario, cov);
        let s = reference_lfm(&scenario.array).waveforms;
        let w = CVec::from_element(6, c(1.0, 0.0));
        let v = model.mvdr(&s.vec_snapshot(), &w).unwrap();
        let grid = angle_grid(-90.0, 90.0, 0.5);
        let p = receive_beampattern(&s, &w, &v, 15e3, &grid, &scenario.array);
        let best = p.iter().max_by(|a, b| a.power.total_cmp(&b.power)).unwrap();
        assert!((best.theta_deg - 40.0).abs() <= 0.5, "{}", best.theta_deg);
    }
}
