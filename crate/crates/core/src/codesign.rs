//! Alternating design of transmit weights and waveforms.
//!
//! Each round first optimizes the weights for the current waveforms (a
//! relaxation over `W = w w^H` of order `N_T`), then the waveforms for the new
//! weights (a relaxation over `S = s_T s_T^H` of order `N_T L`). Both
//! relaxations are rounded back to vectors by Gaussian randomization. The best
//! design that satisfies every constraint is kept as the incumbent, so the
//! reported SINR never decreases from one round to the next.

use std::fmt;
use std::str::FromStr;

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interference::scenario_covariance;
use crate::linalg::{align_phase, c, hermitian_eigen_desc, quad_form, CMat, CVec};
use crate::receiver::{to_db, ReceiverModel};
use crate::scenario::{BandCase, BandIndexing, ScenarioConfig};
use crate::sdp::{self, Constraint, ConstraintKind, SdpProblem, SdpSolution, SdpStatus, SolverSettings};
use crate::seeds::{rng_for, Purpose};
use crate::signal_model::{
    bandwidth_block, permute_to_waveform, reference_lfm, snapshot_to_waveform, waveform_to_snapshot,
    WaveformSet,
};
use crate::spectral::{band_energy, band_segments, frequency_gram, h_b_matrix, i_tilde_matrix, Segment};

/// Equality constraints must hold to this absolute tolerance.
pub const EQUALITY_TOL: f64 = 1e-10;
/// Inequality constraints may be exceeded by at most this much.
pub const INEQUALITY_TOL: f64 = 1e-8;
/// A relaxed solution counts as rank one when `lambda_2 / lambda_1` is below this.
pub const RANK_ONE_RATIO: f64 = 1e-8;
/// Relative slack on the relaxation bound before a step is skipped.
pub const BOUND_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Joint,
    WaveformOnly,
    WeightOnly,
    Baseline,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Joint => "joint",
            Mode::WaveformOnly => "waveform",
            Mode::WeightOnly => "weight",
            Mode::Baseline => "baseline",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "joint" => Ok(Mode::Joint),
            "waveform" | "waveform_only" => Ok(Mode::WaveformOnly),
            "weight" | "weight_only" => Ok(Mode::WeightOnly),
            "baseline" => Ok(Mode::Baseline),
            other => Err(format!("unknown mode {other:?} (joint, waveform, weight, baseline)")),
        }
    }
}

/// Everything about a scenario that stays fixed while designing.
#[derive(Debug, Clone)]
pub struct DesignContext {
    pub scenario: ScenarioConfig,
    pub receiver: ReceiverModel,
    pub bands: Vec<BandIndexing>,
    pub reference_waveforms: WaveformSet,
    /// Chirp sweep of each reference waveform, cycles/sample.
    pub reference_sweeps: Vec<f64>,
    pub reference_weights: CVec,
    /// In-band Gram `K(0, f_{m,lp})` of every channel.
    pub bandwidth_blocks: Vec<CMat>,
    pub settings: SolverSettings,
}

impl DesignContext {
    pub fn new(scenario: &ScenarioConfig) -> Result<Self> {
        scenario.validate()?;
        let covariance = scenario_covariance(scenario)?;
        let lfm = reference_lfm(&scenario.array);
        let bandwidth_blocks = (0..scenario.array.n_tx)
            .map(|m| bandwidth_block(m, &scenario.array))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            receiver: ReceiverModel::new(scenario, covariance),
            bands: scenario.band_indexing(),
            reference_waveforms: lfm.waveforms,
            reference_sweeps: lfm.sweeps,
            reference_weights: scenario.reference_weights(),
            bandwidth_blocks,
            settings: SolverSettings::default(),
            scenario: scenario.clone(),
        })
    }

    pub fn n_tx(&self) -> usize {
        self.scenario.array.n_tx
    }

    pub fn n_samples(&self) -> usize {
        self.scenario.array.n_samples()
    }

    fn gamma(&self, m: usize) -> f64 {
        self.scenario.array.inband_tolerance.get(m)
    }

    fn band_label(&self, b: usize) -> String {
        self.scenario.shared_bands[b].name(b)
    }

    /// Output SINR (linear, including the SNR factor).
    pub fn sinr(&self, s: &WaveformSet, w: &CVec) -> f64 {
        self.receiver.sinr(&s.vec_snapshot(), w)
    }
}

/// `P5`: maximize `Tr{Psi~(s) W}` over `W >= 0` with `Tr{W} = N_T`, the weight
/// similarity `Tr{(I - w_Ref w_Ref^H) W} <= mu^2` and one `Tr{I_b(S) W} <= eta_b`
/// per shared band.
pub fn build_weight_sdp(s: &WaveformSet, ctx: &DesignContext) -> SdpProblem {
    let n = ctx.n_tx();
    let psi = ctx.receiver.psi_s(&s.vec_snapshot());
    let w_ref = &ctx.reference_weights;
    let mut constraints = vec![
        Constraint::new("weight_norm", CMat::identity(n, n), ConstraintKind::Eq, n as f64),
        Constraint::new(
            "weight_similarity",
            CMat::identity(n, n) - w_ref * w_ref.adjoint(),
            ConstraintKind::Le,
            ctx.scenario.controls.weight_similarity,
        ),
    ];
    for (b, band) in ctx.bands.iter().enumerate() {
        constraints.push(Constraint::new(
            ctx.band_label(b),
            i_tilde_matrix(s, band),
            ConstraintKind::Le,
            ctx.scenario.shared_bands[b].eta,
        ));
    }
    SdpProblem {
        dim: n,
        objective: psi,
        constraints,
    }
}

/// `P7`: maximize `Tr{T Psi(w) T^T S}` over `S >= 0` with the per-waveform
/// energies, in-band fractions, waveform similarity and the `H_b(w)` bounds.
pub fn build_waveform_sdp(w: &CVec, ctx: &DesignContext) -> SdpProblem {
    let n_tx = ctx.n_tx();
    let l = ctx.n_samples();
    let n = n_tx * l;
    let objective = permute_to_waveform(&ctx.receiver.psi_w(w), n_tx, l);
    let block = |m: usize, b: &CMat| {
        let mut out = CMat::zeros(n, n);
        out.view_mut((m * l, m * l), (l, l)).copy_from(b);
        out
    };
    let mut constraints = Vec::new();
    for m in 0..n_tx {
        constraints.push(Constraint::new(
            format!("energy_{}", m + 1),
            block(m, &CMat::identity(l, l)),
            ConstraintKind::Eq,
            1.0 / n_tx as f64,
        ));
    }
    for m in 0..n_tx {
        constraints.push(Constraint::new(
            format!("inband_{}", m + 1),
            block(m, &ctx.bandwidth_blocks[m]),
            ConstraintKind::Ge,
            ctx.gamma(m) / n_tx as f64,
        ));
    }
    let s_ref = ctx.reference_waveforms.vec_waveform();
    constraints.push(Constraint::new(
        "waveform_similarity",
        CMat::identity(n, n) - &s_ref * s_ref.adjoint(),
        ConstraintKind::Le,
        ctx.scenario.controls.waveform_similarity,
    ));
    for (b, band) in ctx.bands.iter().enumerate() {
        constraints.push(Constraint::new(
            ctx.band_label(b),
            h_b_matrix(w, band, &ctx.scenario.array),
            ConstraintKind::Le,
            ctx.scenario.shared_bands[b].eta,
        ));
    }
    SdpProblem {
        dim: n,
        objective,
        constraints,
    }
}

/// Result of rounding one relaxed solution.
#[derive(Debug, Clone)]
pub struct Rounding {
    /// Best feasible vector, or `None` when every trial failed.
    pub vector: Option<CVec>,
    /// Objective `x^H C x` of the returned vector.
    pub objective: f64,
    pub feasible_trials: usize,
    pub trials: usize,
    /// The relaxed solution was rank one and its eigenvector was feasible.
    pub rank_one: bool,
}

impl Rounding {
    pub fn exhausted(&self) -> bool {
        self.vector.is_none()
    }
}

/// `K` with `K K^H = X`, from the eigen-decomposition (robust to the rank
/// deficiency typical of relaxed solutions).
fn psd_factor(x: &CMat) -> (Vec<f64>, CMat) {
    let (vals, vecs) = hermitian_eigen_desc(x);
    let top = vals.first().copied().unwrap_or(0.0).max(0.0);
    let keep: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] > 1e-12 * top && vals[i] > 0.0).collect();
    let mut k = CMat::zeros(x.nrows(), keep.len().max(1));
    for (j, &i) in keep.iter().enumerate() {
        k.set_column(j, &(vecs.column(i) * c(vals[i].sqrt(), 0.0)));
    }
    (vals, k)
}

fn gaussian(rng: &mut impl rand::Rng, n: usize) -> CVec {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    CVec::from_fn(n, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        c(re * h, im * h)
    })
}

/// Keep the highest-objective feasible candidate; ties go to the lowest trial.
fn best_of(candidates: Vec<Option<(f64, CVec)>>) -> (Option<(f64, CVec)>, usize) {
    let feasible = candidates.iter().filter(|c| c.is_some()).count();
    let best = candidates
        .into_iter()
        .flatten()
        .fold(None::<(f64, CVec)>, |acc, (v, x)| match acc {
            Some((bv, bx)) if bv >= v => Some((bv, bx)),
            _ => Some((v, x)),
        });
    (best, feasible)
}

/// Weight feasibility for fixed waveforms: verbatim and Euclidean similarity
/// and every band bound.
pub fn weights_feasible(w: &CVec, s_bands: &[CMat], ctx: &DesignContext) -> bool {
    let mu2 = ctx.scenario.controls.weight_similarity;
    let w_ref = &ctx.reference_weights;
    let quad = w.norm_squared() - w_ref.dotc(w).norm_sqr();
    if quad > mu2 || (w - w_ref).norm_squared() > mu2 {
        return false;
    }
    s_bands
        .iter()
        .zip(&ctx.scenario.shared_bands)
        .all(|(it, spec)| quad_form(it, w) <= spec.eta)
}

/// Algorithm 1 steps 3-5: turn a relaxed `W` into a feasible weight vector.
pub fn randomize_weights(
    w_relaxed: &CMat,
    s: &WaveformSet,
    ctx: &DesignContext,
    trials: usize,
    seed: u64,
    round: u64,
) -> Rounding {
    let n = ctx.n_tx();
    let psi = ctx.receiver.psi_s(&s.vec_snapshot());
    let bands: Vec<CMat> = ctx.bands.iter().map(|b| i_tilde_matrix(s, b)).collect();
    let scale = (n as f64).sqrt();
    let finish = |p: CVec| -> Option<CVec> {
        let norm = p.norm();
        if norm == 0.0 {
            return None;
        }
        Some(align_phase(&(p * c(scale / norm, 0.0)), &ctx.reference_weights))
    };
    let (vals, k) = psd_factor(w_relaxed);
    if vals.len() == 1 || (vals[0] > 0.0 && vals[1].max(0.0) / vals[0] < RANK_ONE_RATIO) {
        if let Some(w) = finish(k.column(0).into_owned()) {
            if weights_feasible(&w, &bands, ctx) {
                return Rounding {
                    objective: quad_form(&psi, &w),
                    vector: Some(w),
                    feasible_trials: 1,
                    trials: 0,
                    rank_one: true,
                };
            }
        }
    }
    let candidates: Vec<Option<(f64, CVec)>> = (0..trials)
        .into_par_iter()
        .map(|j| {
            let mut rng = rng_for(seed, Purpose::WeightRounding, round, j as u64);
            let xi = gaussian(&mut rng, k.ncols());
            let w = finish(&k * xi)?;
            weights_feasible(&w, &bands, ctx).then(|| (quad_form(&psi, &w), w))
        })
        .collect();
    let (best, feasible) = best_of(candidates);
    Rounding {
        objective: best.as_ref().map_or(f64::NEG_INFINITY, |b| b.0),
        vector: best.map(|b| b.1),
        feasible_trials: feasible,
        trials,
        rank_one: false,
    }
}

/// Waveform feasibility for fixed weights, given the `H_b(w)` matrices.
/// Energies are assumed already equal to `1 / N_T`.
pub fn waveform_feasible(s_t: &CVec, h_bands: &[CMat], ctx: &DesignContext) -> bool {
    let n_tx = ctx.n_tx();
    let l = ctx.n_samples();
    for m in 0..n_tx {
        let x = s_t.rows(m * l, l).into_owned();
        if quad_form(&ctx.bandwidth_blocks[m], &x) < ctx.gamma(m) / n_tx as f64 {
            return false;
        }
    }
    let s_ref = ctx.reference_waveforms.vec_waveform();
    let eps2 = ctx.scenario.controls.waveform_similarity;
    let quad = s_t.norm_squared() - s_ref.dotc(s_t).norm_sqr();
    if quad > eps2 || (s_t - &s_ref).norm_squared() > eps2 {
        return false;
    }
    h_bands
        .iter()
        .zip(&ctx.scenario.shared_bands)
        .all(|(h, spec)| quad_form(h, s_t) <= spec.eta)
}

/// Rescale every waveform block of `s_T` to energy `1 / N_T`.
pub fn normalize_blocks(s_t: &CVec, n_tx: usize) -> Option<CVec> {
    let l = s_t.len() / n_tx;
    let target = (1.0 / n_tx as f64).sqrt();
    let mut out = s_t.clone();
    for m in 0..n_tx {
        let mut block = out.rows_mut(m * l, l);
        let norm = block.norm();
        if norm == 0.0 {
            return None;
        }
        block *= c(target / norm, 0.0);
    }
    Some(out)
}

/// Randomized rounding of a relaxed waveform covariance (waveform-major).
pub fn randomize_waveform(
    s_relaxed: &CMat,
    w: &CVec,
    ctx: &DesignContext,
    trials: usize,
    seed: u64,
    round: u64,
) -> Rounding {
    let n_tx = ctx.n_tx();
    let l = ctx.n_samples();
    let objective = permute_to_waveform(&ctx.receiver.psi_w(w), n_tx, l);
    let h_bands: Vec<CMat> = ctx.bands.iter().map(|b| h_b_matrix(w, b, &ctx.scenario.array)).collect();
    let s_ref = ctx.reference_waveforms.vec_waveform();
    let finish = |p: CVec| normalize_blocks(&p, n_tx).map(|x| align_phase(&x, &s_ref));
    let (vals, k) = psd_factor(s_relaxed);
    if vals.len() == 1 || (vals[0] > 0.0 && vals[1].max(0.0) / vals[0] < RANK_ONE_RATIO) {
        if let Some(s) = finish(k.column(0).into_owned()) {
            if waveform_feasible(&s, &h_bands, ctx) {
                return Rounding {
                    objective: quad_form(&objective, &s),
                    vector: Some(s),
                    feasible_trials: 1,
                    trials: 0,
                    rank_one: true,
                };
            }
        }
    }
    let candidates: Vec<Option<(f64, CVec)>> = (0..trials)
        .into_par_iter()
        .map(|j| {
            let mut rng = rng_for(seed, Purpose::WaveformRounding, round, j as u64);
            let xi = gaussian(&mut rng, k.ncols());
            let s = finish(&k * xi)?;
            waveform_feasible(&s, &h_bands, ctx).then(|| (quad_form(&objective, &s), s))
        })
        .collect();
    let (best, feasible) = best_of(candidates);
    Rounding {
        objective: best.as_ref().map_or(f64::NEG_INFINITY, |b| b.0),
        vector: best.map(|b| b.1),
        feasible_trials: feasible,
        trials,
        rank_one: false,
    }
}

/// Value of one constraint at a design, with its bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintCheck {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    /// `eq`, `le` or `ge`.
    pub kind: String,
    /// Violation beyond the bound (zero when satisfied).
    pub residual: f64,
    pub satisfied: bool,
}

impl ConstraintCheck {
    fn new(name: impl Into<String>, value: f64, bound: f64, kind: ConstraintKind) -> Self {
        let (residual, tol, kind) = match kind {
            ConstraintKind::Eq => ((value - bound).abs(), EQUALITY_TOL, "eq"),
            ConstraintKind::Le => ((value - bound).max(0.0), INEQUALITY_TOL, "le"),
            ConstraintKind::Ge => ((bound - value).max(0.0), INEQUALITY_TOL, "ge"),
        };
        Self {
            name: name.into(),
            value,
            bound,
            kind: kind.into(),
            residual,
            satisfied: residual <= tol,
        }
    }
}

/// Energy of one design inside one shared band.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandReport {
    pub name: String,
    pub f_low: f64,
    pub f_high: f64,
    pub case: BandCase,
    pub energy: f64,
    pub eta: f64,
    pub satisfied: bool,
}

/// Every constraint of the joint problem evaluated at one design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub constraints: Vec<ConstraintCheck>,
    pub bands: Vec<BandReport>,
    pub feasible: bool,
}

impl FeasibilityReport {
    /// The constraint violated by the largest margin relative to its bound.
    pub fn worst(&self) -> Option<&ConstraintCheck> {
        self.constraints
            .iter()
            .filter(|c| !c.satisfied)
            .max_by(|a, b| {
                let ra = a.residual / a.bound.abs().max(1e-12);
                let rb = b.residual / b.bound.abs().max(1e-12);
                ra.total_cmp(&rb)
            })
    }
}

pub fn check_design(s: &WaveformSet, w: &CVec, ctx: &DesignContext) -> FeasibilityReport {
    let n_tx = ctx.n_tx();
    let l = ctx.n_samples();
    let s_t = s.vec_waveform();
    let mut checks = Vec::new();
    for m in 0..n_tx {
        checks.push(ConstraintCheck::new(
            format!("energy_{}", m + 1),
            s.row_energy(m),
            1.0 / n_tx as f64,
            ConstraintKind::Eq,
        ));
    }
    for m in 0..n_tx {
        let x = s_t.rows(m * l, l).into_owned();
        checks.push(ConstraintCheck::new(
            format!("inband_{}", m + 1),
            quad_form(&ctx.bandwidth_blocks[m], &x),
            ctx.gamma(m) / n_tx as f64,
            ConstraintKind::Ge,
        ));
    }
    let s_ref = ctx.reference_waveforms.vec_waveform();
    checks.push(ConstraintCheck::new(
        "waveform_similarity",
        (&s_t - &s_ref).norm_squared(),
        ctx.scenario.controls.waveform_similarity,
        ConstraintKind::Le,
    ));
    checks.push(ConstraintCheck::new(
        "weight_norm",
        w.norm_squared(),
        n_tx as f64,
        ConstraintKind::Eq,
    ));
    checks.push(ConstraintCheck::new(
        "weight_similarity",
        (w - &ctx.reference_weights).norm_squared(),
        ctx.scenario.controls.weight_similarity,
        ConstraintKind::Le,
    ));
    let mut bands = Vec::new();
    for (b, band) in ctx.bands.iter().enumerate() {
        let spec = &ctx.scenario.shared_bands[b];
        let energy = band_energy(s, w, band);
        let check = ConstraintCheck::new(ctx.band_label(b), energy, spec.eta, ConstraintKind::Le);
        bands.push(BandReport {
            name: ctx.band_label(b),
            f_low: spec.f_low,
            f_high: spec.f_high,
            case: band.case,
            energy,
            eta: spec.eta,
            satisfied: check.satisfied,
        });
        checks.push(check);
    }
    let feasible = checks.iter().all(|c| c.satisfied);
    FeasibilityReport {
        constraints: checks,
        bands,
        feasible,
    }
}

/// What happened in one optimization step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub iteration: usize,
    /// `weights` or `waveforms`.
    pub step: String,
    pub sdp_status: String,
    /// Relaxation optimum (prefactor-free kernel value).
    pub sdp_value: f64,
    pub sdp_iterations: usize,
    pub rank_ratio: f64,
    pub feasible_trials: usize,
    pub trials: usize,
    pub rank_one: bool,
    /// Rounded objective, when a feasible vector was found.
    pub rounded_value: Option<f64>,
    /// SINR of the design after this step, dB.
    pub sinr_db: f64,
    pub accepted: bool,
}

#[derive(Debug, Clone)]
pub struct DesignResult {
    pub mode: Mode,
    pub seed: u64,
    pub waveforms: WaveformSet,
    pub weights: CVec,
    pub mvdr: CVec,
    pub sinr_linear: f64,
    pub sinr_db: f64,
    /// Incumbent SINR (dB) at the start and after every iteration.
    pub sinr_trace_db: Vec<f64>,
    pub steps: Vec<StepRecord>,
    pub feasibility: FeasibilityReport,
    pub reference_sweeps: Vec<f64>,
    /// Set when some rounding step found no feasible trial.
    pub randomization_exhausted: bool,
}

/// Options that the command line may override.
#[derive(Debug, Clone, Copy)]
pub struct RunOptions {
    pub seed: u64,
    pub max_iters: usize,
    pub trials: usize,
}

impl RunOptions {
    pub fn from_scenario(s: &ScenarioConfig) -> Self {
        Self {
            seed: s.controls.rng_seed,
            max_iters: s.controls.max_iters,
            trials: s.controls.n_randomizations,
        }
    }
}

/// Sound lower bounds on each band's energy that no design in `mode` can beat;
/// names the first band whose tolerance lies below its bound.
pub fn diagnose_infeasibility(ctx: &DesignContext, mode: Mode) -> Option<Error> {
    let n_tx = ctx.n_tx();
    let l = ctx.n_samples();
    for m in 0..n_tx {
        if mode == Mode::Joint || mode == Mode::WaveformOnly {
            let best = crate::linalg::hermitian_eigenvalues(&ctx.bandwidth_blocks[m]);
            let reach = best.last().copied().unwrap_or(0.0);
            if reach < ctx.gamma(m) {
                return Some(Error::Infeasible {
                    constraint: format!("inband_{}", m + 1),
                    detail: format!(
                        "at most {reach:.6} of a waveform's energy fits in band, tolerance is {}",
                        ctx.gamma(m)
                    ),
                });
            }
        }
    }
    let fixed_w = matches!(mode, Mode::WaveformOnly | Mode::Baseline);
    let fixed_s = matches!(mode, Mode::WeightOnly | Mode::Baseline);
    for (b, band) in ctx.bands.iter().enumerate() {
        // Per-channel lower bound on energy in the band per unit |w_m|^2.
        let mut per_channel = vec![0.0; n_tx];
        for (m, seg) in band_segments(band) {
            per_channel[m] = if fixed_s {
                match seg {
                    Segment::Interior => ctx.reference_waveforms.row_energy(m),
                    Segment::Partial { a, b } => {
                        let x = ctx.reference_waveforms.samples.row(m).transpose();
                        quad_form(&frequency_gram(a, b, l).expect("ordered"), &x)
                    }
                }
            } else {
                match seg {
                    Segment::Interior => 1.0 / n_tx as f64,
                    Segment::Partial { a, b } => {
                        let k = frequency_gram(a, b, l).expect("ordered");
                        crate::linalg::hermitian_eigenvalues(&k)[0].max(0.0) / n_tx as f64
                    }
                }
            };
        }
        let bound = if fixed_w {
            per_channel
                .iter()
                .zip(ctx.reference_weights.iter())
                .map(|(e, w)| e * w.norm_sqr())
                .sum()
        } else {
            n_tx as f64 * per_channel.iter().copied().fold(f64::INFINITY, f64::min)
        };
        let eta = ctx.scenario.shared_bands[b].eta;
        if bound > eta * (1.0 + 1e-9) + INEQUALITY_TOL {
            return Some(Error::Infeasible {
                constraint: ctx.band_label(b),
                detail: format!("energy in the band cannot fall below {bound:.6e}, tolerance is {eta:.6e}"),
            });
        }
    }
    None
}

struct Incumbent {
    s: WaveformSet,
    w: CVec,
    sinr: f64,
}

fn solve_logged(problem: &SdpProblem, ctx: &DesignContext, what: &str) -> Result<SdpSolution> {
    let sol = sdp::solve(problem, ctx.settings)?;
    log::debug!(
        "{what}: status {:?} value {:.6e} gap {:.2e} residual {:.2e} after {} iterations",
        sol.status,
        sol.objective_value,
        sol.duality_gap,
        sol.max_residual,
        sol.iterations
    );
    Ok(sol)
}

/// Run one design mode.
pub fn run_mode(ctx: &DesignContext, mode: Mode, opts: RunOptions) -> Result<DesignResult> {
    let n_tx = ctx.n_tx();
    let s_ref = ctx.reference_waveforms.clone();
    let w_ref = ctx.reference_weights.clone();

    if mode == Mode::Baseline {
        return finish(ctx, mode, opts, s_ref.clone(), w_ref.clone(), vec![], false, None);
    }
    if let Some(err) = diagnose_infeasibility(ctx, mode) {
        return Err(err);
    }

    let steps_per_iter = if mode == Mode::Joint { 2 } else { 1 };
    let mut s = s_ref.clone();
    let mut w = w_ref.clone();
    let start = check_design(&s, &w, ctx);
    let mut incumbent = start.feasible.then(|| Incumbent {
        s: s.clone(),
        w: w.clone(),
        sinr: ctx.sinr(&s, &w),
    });
    let mut trace = vec![incumbent.as_ref().map_or(f64::NEG_INFINITY, |i| to_db(i.sinr))];
    let mut steps = Vec::new();
    let mut exhausted = false;
    let mut last_failure: Option<FeasibilityReport> = None;
    // Relaxations depend only on the fixed half of the design; reuse them when
    // it has not changed.
    let mut weight_cache: Option<(CVec, SdpSolution)> = None;
    let mut wave_cache: Option<(CVec, SdpSolution)> = None;

    for q in 0..opts.max_iters {
        let mut moved = false;
        if mode != Mode::WaveformOnly {
            let key = s.vec_waveform();
            let sol = match &weight_cache {
                Some((k, sol)) if *k == key => sol.clone(),
                _ => {
                    let sol = solve_logged(&build_weight_sdp(&s, ctx), ctx, "weight relaxation")?;
                    weight_cache = Some((key, sol.clone()));
                    sol
                }
            };
            let mut record;
            if bound_reached(ctx, &sol, incumbent.as_ref()) {
                record = step_record(q, "weights", &sol, None);
            } else {
                let rounding = (sol.status != SdpStatus::Infeasible)
                    .then(|| randomize_weights(&sol.x, &s, ctx, opts.trials, opts.seed, q as u64));
                record = step_record(q, "weights", &sol, rounding.as_ref());
                match rounding.and_then(|r| r.vector) {
                    Some(new_w) => {
                        moved |= new_w != w;
                        w = new_w;
                    }
                    None => exhausted = true,
                }
            }
            consider(ctx, &s, &w, &mut incumbent, &mut record, &mut last_failure);
            steps.push(record);
        }
        if mode != Mode::WeightOnly {
            let sol = match &wave_cache {
                Some((k, sol)) if *k == w => sol.clone(),
                _ => {
                    let sol = solve_logged(&build_waveform_sdp(&w, ctx), ctx, "waveform relaxation")?;
                    wave_cache = Some((w.clone(), sol.clone()));
                    sol
                }
            };
            let mut record;
            if bound_reached(ctx, &sol, incumbent.as_ref()) {
                record = step_record(q, "waveforms", &sol, None);
            } else {
                let rounding = (sol.status != SdpStatus::Infeasible)
                    .then(|| randomize_waveform(&sol.x, &w, ctx, opts.trials, opts.seed, q as u64));
                record = step_record(q, "waveforms", &sol, rounding.as_ref());
                match rounding.and_then(|r| r.vector) {
                    Some(new_s) => {
                        let new_s = WaveformSet::from_vec_waveform(&new_s, n_tx);
                        moved |= new_s != s;
                        s = new_s;
                    }
                    None => exhausted = true,
                }
            }
            consider(ctx, &s, &w, &mut incumbent, &mut record, &mut last_failure);
            steps.push(record);
        }
        trace.push(incumbent.as_ref().map_or(f64::NEG_INFINITY, |i| to_db(i.sinr)));
        // Unchanged inputs give cached relaxations and the same bound test, so
        // every later iteration would repeat this one.
        if !moved && steps.iter().rev().take(steps_per_iter).all(|r| r.trials == 0) {
            break;
        }
    }

    match incumbent {
        Some(best) => finish(ctx, mode, opts, best.s, best.w, steps, exhausted, Some(trace)),
        None => {
            let report = last_failure.unwrap_or(start);
            let (constraint, detail) = match report.worst() {
                Some(c) => (
                    c.name.clone(),
                    format!("best candidate reaches {:.6e} against a bound of {:.6e}", c.value, c.bound),
                ),
                None => ("randomization".into(), "no feasible rounding was found".into()),
            };
            Err(Error::Infeasible { constraint, detail })
        }
    }
}

/// The relaxation bounds every rounded candidate of its step, so rounding is
/// pointless once the incumbent already reaches it.
fn bound_reached(ctx: &DesignContext, sol: &SdpSolution, incumbent: Option<&Incumbent>) -> bool {
    sol.status != SdpStatus::Infeasible
        && incumbent.is_some_and(|i| ctx.receiver.snr * sol.objective_value <= i.sinr * (1.0 + BOUND_TOL))
}

fn step_record(q: usize, step: &str, sol: &SdpSolution, rounding: Option<&Rounding>) -> StepRecord {
    StepRecord {
        iteration: q + 1,
        step: step.into(),
        sdp_status: format!("{:?}", sol.status).to_lowercase(),
        sdp_value: sol.objective_value,
        sdp_iterations: sol.iterations,
        rank_ratio: sdp::rank_one_ratio(&sol.x),
        feasible_trials: rounding.map_or(0, |r| r.feasible_trials),
        trials: rounding.map_or(0, |r| r.trials),
        rank_one: rounding.is_some_and(|r| r.rank_one),
        rounded_value: rounding.and_then(|r| r.vector.as_ref().map(|_| r.objective)),
        sinr_db: f64::NEG_INFINITY,
        accepted: false,
    }
}

fn consider(
    ctx: &DesignContext,
    s: &WaveformSet,
    w: &CVec,
    incumbent: &mut Option<Incumbent>,
    record: &mut StepRecord,
    last_failure: &mut Option<FeasibilityReport>,
) {
    let sinr = ctx.sinr(s, w);
    record.sinr_db = to_db(sinr);
    let report = check_design(s, w, ctx);
    if !report.feasible {
        *last_failure = Some(report);
        return;
    }
    if incumbent.as_ref().is_none_or(|i| sinr > i.sinr) {
        *incumbent = Some(Incumbent {
            s: s.clone(),
            w: w.clone(),
            sinr,
        });
        record.accepted = true;
    }
}

#[allow(clippy::too_many_arguments)]
fn finish(
    ctx: &DesignContext,
    mode: Mode,
    opts: RunOptions,
    s: WaveformSet,
    w: CVec,
    steps: Vec<StepRecord>,
    exhausted: bool,
    trace: Option<Vec<f64>>,
) -> Result<DesignResult> {
    let sinr_linear = ctx.sinr(&s, &w);
    let mvdr = ctx.receiver.mvdr(&s.vec_snapshot(), &w)?;
    Ok(DesignResult {
        mode,
        seed: opts.seed,
        feasibility: check_design(&s, &w, ctx),
        sinr_db: to_db(sinr_linear),
        sinr_trace_db: trace.unwrap_or_else(|| vec![to_db(sinr_linear)]),
        waveforms: s,
        weights: w,
        mvdr,
        sinr_linear,
        steps,
        reference_sweeps: ctx.reference_sweeps.clone(),
        randomization_exhausted: exhausted,
    })
}

/// Alternating design of waveforms and weights.
pub fn alternate(ctx: &DesignContext, opts: RunOptions) -> Result<DesignResult> {
    run_mode(ctx, Mode::Joint, opts)
}

/// Recompute a stored design's figures of merit.
pub fn evaluate_design(ctx: &DesignContext, s: &WaveformSet, w: &CVec) -> Result<(f64, FeasibilityReport, CVec)> {
    if s.n_tx() != ctx.n_tx() || s.n_samples() != ctx.n_samples() {
        return Err(Error::Schema(format!(
            "waveforms are {}x{}, scenario expects {}x{}",
            s.n_tx(),
            s.n_samples(),
            ctx.n_tx(),
            ctx.n_samples()
        )));
    }
    if w.len() != ctx.n_tx() {
        return Err(Error::Schema(format!("{} weights, scenario expects {}", w.len(), ctx.n_tx())));
    }
    let sinr = ctx.sinr(s, w);
    Ok((sinr, check_design(s, w, ctx), ctx.receiver.mvdr(&s.vec_snapshot(), w)?))
}

/// Snapshot-major helpers re-exported for callers that hold `s_T`.
pub fn waveform_major_to_snapshot(s_t: &CVec, n_tx: usize) -> CVec {
    waveform_to_snapshot(s_t, n_tx, s_t.len() / n_tx)
}

pub fn snapshot_to_waveform_major(s: &CVec, n_tx: usize) -> CVec {
    snapshot_to_waveform(s, n_tx, s.len() / n_tx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hermitian_eigenvalues, outer};
    use crate::scenario::SharedBandSpec;

    fn no_bands(mut s: ScenarioConfig) -> ScenarioConfig {
        s.shared_bands.clear();
        s
    }

    #[test]
    fn loose_weight_sdp_is_top_eigenvalue() {
        let mut sc = no_bands(ScenarioConfig::reduced());
        sc.controls.weight_similarity = 1e6;
        let ctx = DesignContext::new(&sc).unwrap();
        let s = &ctx.reference_waveforms;
        let p = build_weight_sdp(s, &ctx);
        let sol = sdp::solve(&p, ctx.settings).unwrap();
        let top = *hermitian_eigenvalues(&ctx.receiver.psi_s(&s.vec_snapshot())).last().unwrap();
        assert!((sol.objective_value - 3.0 * top).abs() < 1e-6 * top);
        assert!(sdp::rank_one_ratio(&sol.x) < 1e-6);
    }

    #[test]
    fn weight_constraints_have_small_residuals() {
        let ctx = DesignContext::new(&ScenarioConfig::benchmark()).unwrap();
        let p = build_weight_sdp(&ctx.reference_waveforms, &ctx);
        assert_eq!(p.constraints.len(), 4);
        let sol = sdp::solve(&p, ctx.settings).unwrap();
        assert_eq!(sol.status, SdpStatus::Optimal);
        for con in &p.constraints {
            assert!(con.violation(&sol.x) <= 1e-6, "{}", con.label);
        }
    }

    #[test]
    fn tiny_waveform_sdp_is_top_eigenvalue() {
        let mut sc = no_bands(ScenarioConfig::reduced());
        sc.array.n_tx = 1;
        sc.array.n_rx = 1;
        sc.array.n_samples = Some(2);
        sc.array.inband_tolerance = crate::scenario::PerChannel::Uniform(1e-6);
        sc.controls.waveform_similarity = 1e6;
        sc.interferers.truncate(1);
        let ctx = DesignContext::new(&sc).unwrap();
        let w = CVec::from_element(1, c(1.0, 0.0));
        let p = build_waveform_sdp(&w, &ctx);
        let sol = sdp::solve(&p, ctx.settings).unwrap();
        let top = *hermitian_eigenvalues(&p.objective).last().unwrap();
        assert!((sol.objective_value - top).abs() < 1e-7 * top);
    }

    #[test]
    fn zero_waveform_similarity_pins_the_reference() {
        let mut sc = no_bands(ScenarioConfig::reduced());
        sc.controls.waveform_similarity = 0.0;
        let ctx = DesignContext::new(&sc).unwrap();
        let sol = sdp::solve(&build_waveform_sdp(&ctx.reference_weights, &ctx), ctx.settings).unwrap();
        let s_ref = ctx.reference_waveforms.vec_waveform();
        assert!((&sol.x - outer(&s_ref, &s_ref)).norm() < 1e-4);
    }

    #[test]
    fn rank_one_weight_input_is_returned() {
        let sc = no_bands(ScenarioConfig::reduced());
        let ctx = DesignContext::new(&sc).unwrap();
        let w = CVec::from_fn(3, |m, _| crate::linalg::cis(0.2 * m as f64));
        let x = outer(&w, &w) * c(2.0, 0.0);
        let r = randomize_weights(&x, &ctx.reference_waveforms, &ctx, 10, 1, 0);
        assert!(r.rank_one);
        let got = r.vector.unwrap();
        assert!((got.dotc(&w).norm() - 3.0).abs() < 1e-10);
    }

    #[test]
    fn single_loose_trial_is_accepted() {
        let mut sc = no_bands(ScenarioConfig::reduced());
        sc.controls.weight_similarity = 1e6;
        let ctx = DesignContext::new(&sc).unwrap();
        let r = randomize_weights(&CMat::identity(3, 3), &ctx.reference_waveforms, &ctx, 1, 9, 0);
        assert_eq!(r.feasible_trials, 1);
        assert!((r.vector.unwrap().norm_squared() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn waveform_trials_have_exact_block_energy() {
        let sc = ScenarioConfig::reduced();
        for seed in 0..20u64 {
            let mut rng = rng_for(seed, Purpose::Evaluation, 0, 0);
            let s = normalize_blocks(&gaussian(&mut rng, 48), 3).unwrap();
            for m in 0..3 {
                assert!((s.rows(m * 16, 16).norm_squared() - 1.0 / 3.0).abs() < 1e-14);
            }
        }
        let ctx = DesignContext::new(&sc).unwrap();
        let s_ref = ctx.reference_waveforms.vec_waveform();
        let h: Vec<CMat> = vec![];
        assert!(waveform_feasible(&s_ref, &h, &ctx));
    }

    #[test]
    fn interference_free_design_hits_the_ceiling() {
        let mut sc = no_bands(ScenarioConfig::reduced());
        sc.interferers.clear();
        let ctx = DesignContext::new(&sc).unwrap();
        let r = run_mode(&ctx, Mode::Joint, RunOptions::from_scenario(&sc)).unwrap();
        assert!((r.sinr_db - to_db(2.0)).abs() < 0.1);
    }

    #[test]
    fn zero_weight_similarity_keeps_the_reference() {
        let mut sc = no_bands(ScenarioConfig::reduced());
        sc.controls.weight_similarity = 0.0;
        let ctx = DesignContext::new(&sc).unwrap();
        let r = run_mode(&ctx, Mode::WeightOnly, RunOptions::from_scenario(&sc)).unwrap();
        assert!(r.randomization_exhausted);
        assert!((&r.weights - &ctx.reference_weights).norm() < 1e-12);
    }

    #[test]
    fn unreachable_band_names_the_band() {
        let mut sc = ScenarioConfig::reduced();
        sc.shared_bands = vec![SharedBandSpec::new(0.0, 1.0, 0.0)];
        sc.shared_bands[0].label = Some("everything".into());
        let ctx = DesignContext::new(&sc).unwrap();
        for mode in [Mode::Joint, Mode::WeightOnly, Mode::WaveformOnly] {
            match run_mode(&ctx, mode, RunOptions::from_scenario(&sc)) {
                Err(Error::Infeasible { constraint, .. }) => assert_eq!(constraint, "everything"),
                other => panic!("{mode}: {other:?}"),
            }
        }
    }

    #[test]
    fn joint_design_is_feasible_monotone_and_deterministic() {
        let sc = ScenarioConfig::reduced();
        let ctx = DesignContext::new(&sc).unwrap();
        let opts = RunOptions::from_scenario(&sc);
        let a = run_mode(&ctx, Mode::Joint, opts).unwrap();
        assert!(a.feasibility.feasible);
        let finite: Vec<f64> = a.sinr_trace_db.iter().copied().filter(|x| x.is_finite()).collect();
        assert!(finite.windows(2).all(|p| p[1] >= p[0]));
        let b = run_mode(&ctx, Mode::Joint, opts).unwrap();
        assert_eq!(a.waveforms, b.waveforms);
        assert_eq!(a.weights, b.weights);
        assert_eq!(a.steps, b.steps);
    }

    #[test]
    fn mode_names_round_trip() {
        for m in [Mode::Joint, Mode::WaveformOnly, Mode::WeightOnly, Mode::Baseline] {
            assert_eq!(m.as_str().parse::<Mode>().unwrap(), m);
        }
        assert!("both".parse::<Mode>().is_err());
    }
}
