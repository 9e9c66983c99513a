//! Semidefinite programs over complex Hermitian matrices.
//!
//! ```text
//! maximize    Tr{C X}
//! subject to  Tr{A_i X} (=, <=, >=) b_i,   X Hermitian PSD
//! ```
//!
//! A Hermitian `H = P + jQ` maps to the real symmetric `[[P, -Q], [Q, P]]` of
//! twice the order, and `Tr{A X} = Tr{A_e X_e} / 2`. The embedded problem is
//! solved by an infeasible primal-dual path-following method (HKM direction,
//! Mehrotra predictor-corrector) with inequality slacks kept in a
//! nonnegative-orthant block. The complex solution is read back as
//! `X = [(Y11 + Y22) + j (Y21 - Y12)] / 2`, which is PSD whenever `Y` is and has
//! the same objective and constraint values.

use nalgebra::{DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_residual, trace_product, CMat, RMat};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintKind {
    Eq,
    Le,
    Ge,
}

#[derive(Debug, Clone)]
pub struct Constraint {
    pub matrix: CMat,
    pub kind: ConstraintKind,
    pub rhs: f64,
    pub label: String,
}

impl Constraint {
    pub fn new(label: impl Into<String>, matrix: CMat, kind: ConstraintKind, rhs: f64) -> Self {
        Self {
            matrix,
            kind,
            rhs,
            label: label.into(),
        }
    }

    /// `Tr{A X}` (real part).
    pub fn value(&self, x: &CMat) -> f64 {
        trace_product(&self.matrix, x).re
    }

    /// Amount by which `x` violates the constraint; zero when satisfied.
    pub fn violation(&self, x: &CMat) -> f64 {
        let v = self.value(x);
        match self.kind {
            ConstraintKind::Eq => (v - self.rhs).abs(),
            ConstraintKind::Le => (v - self.rhs).max(0.0),
            ConstraintKind::Ge => (self.rhs - v).max(0.0),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SdpProblem {
    pub dim: usize,
    pub objective: CMat,
    pub constraints: Vec<Constraint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SdpStatus {
    Optimal,
    Infeasible,
    MaxIter,
}

#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub x: CMat,
    /// `Tr{C X}` at the returned point.
    pub objective_value: f64,
    /// Upper bound on the optimum from the dual iterate.
    pub dual_value: f64,
    pub duality_gap: f64,
    /// Largest constraint violation of `x`, in the problem's own units.
    pub max_residual: f64,
    pub status: SdpStatus,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct SolverSettings {
    /// Relative duality gap and relative infeasibility target.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self { tol: 1e-8, max_iter: 100 }
    }
}

/// `[[Re H, -Im H], [Im H, Re H]]`. Fails for non-Hermitian input.
pub fn hermitian_to_real_embedding(h: &CMat) -> Result<RMat> {
    let residual = hermitian_residual(h);
    if residual > 1e-10 {
        return Err(Error::NotHermitian { residual });
    }
    Ok(embed(h))
}

fn embed(h: &CMat) -> RMat {
    let n = h.nrows();
    RMat::from_fn(2 * n, 2 * n, |i, j| {
        let z = h[(i % n, j % n)];
        match (i < n, j < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}

/// Inverse of the embedding for any symmetric `2n` matrix.
pub fn real_embedding_to_hermitian(y: &RMat) -> CMat {
    let n = y.nrows() / 2;
    CMat::from_fn(n, n, |i, j| {
        Complex64::new(
            0.5 * (y[(i, j)] + y[(i + n, j + n)]),
            0.5 * (y[(i + n, j)] - y[(i, j + n)]),
        )
    })
}

/// A symmetric matrix kept as a dense block on the rows/columns it touches.
#[derive(Debug, Clone)]
struct Supported {
    idx: Vec<usize>,
    block: RMat,
}

impl Supported {
    fn from_dense(a: &RMat) -> Self {
        let n = a.nrows();
        let idx: Vec<usize> = (0..n)
            .filter(|&i| a.row(i).iter().any(|v| *v != 0.0) || a.column(i).iter().any(|v| *v != 0.0))
            .collect();
        let block = a.select_rows(&idx).select_columns(&idx);
        Self { idx, block }
    }

    /// `Tr{A Y}` for any square `Y`.
    fn inner(&self, y: &RMat) -> f64 {
        let mut acc = 0.0;
        for (b, &ib) in self.idx.iter().enumerate() {
            for (a, &ia) in self.idx.iter().enumerate() {
                acc += self.block[(a, b)] * y[(ib, ia)];
            }
        }
        acc
    }

    fn add_scaled(&self, out: &mut RMat, coef: f64) {
        for (b, &ib) in self.idx.iter().enumerate() {
            for (a, &ia) in self.idx.iter().enumerate() {
                out[(ia, ib)] += coef * self.block[(a, b)];
            }
        }
    }

    fn frobenius(&self) -> f64 {
        self.block.norm()
    }
}

/// The embedded, scaled problem in minimization form:
/// `min Tr{C X}` s.t. `Tr{A_i X} + sum_k G_ik x_k = b_i`, `X >= 0`, `x >= 0`.
struct RealProblem {
    n: usize,
    c: RMat,
    a: Vec<Supported>,
    b: DVector<f64>,
    /// Slack `k` enters row `slack_row[k]` with sign `slack_sign[k]`.
    slack_row: Vec<usize>,
    slack_sign: Vec<f64>,
    /// Objective scale: original `Tr{C X}` equals `-obj_scale * Tr{c X_e}`.
    obj_scale: f64,
}

impl RealProblem {
    fn build(problem: &SdpProblem) -> Self {
        let ce = embed(&problem.objective);
        let cnorm = ce.norm().max(1e-300);
        // Tr{C X} = Tr{C_e X_e} / 2; minimize the negative, normalized.
        let obj_scale = cnorm / 2.0;
        let c = ce / -cnorm;
        let mut a = Vec::with_capacity(problem.constraints.len());
        let mut b = Vec::with_capacity(problem.constraints.len());
        let mut slack_row = Vec::new();
        let mut slack_sign = Vec::new();
        for (i, con) in problem.constraints.iter().enumerate() {
            let r = 1.0 / con.rhs.abs().max(1.0);
            a.push(Supported::from_dense(&(embed(&con.matrix) * (0.5 * r))));
            b.push(con.rhs * r);
            match con.kind {
                ConstraintKind::Eq => {}
                ConstraintKind::Le => {
                    slack_row.push(i);
                    slack_sign.push(1.0);
                }
                ConstraintKind::Ge => {
                    slack_row.push(i);
                    slack_sign.push(-1.0);
                }
            }
        }
        Self {
            n: 2 * problem.dim,
            c,
            a,
            b: DVector::from_vec(b),
            slack_row,
            slack_sign,
            obj_scale,
        }
    }

    fn m(&self) -> usize {
        self.a.len()
    }

    fn p(&self) -> usize {
        self.slack_row.len()
    }

    fn op(&self, y: &RMat) -> DVector<f64> {
        DVector::from_iterator(self.m(), self.a.iter().map(|a| a.inner(y)))
    }

    fn op_adj(&self, y: &DVector<f64>) -> RMat {
        let mut out = RMat::zeros(self.n, self.n);
        for (a, &yi) in self.a.iter().zip(y.iter()) {
            a.add_scaled(&mut out, yi);
        }
        out
    }

    fn g(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.m());
        for k in 0..self.p() {
            out[self.slack_row[k]] += self.slack_sign[k] * x[k];
        }
        out
    }

    fn g_t(&self, y: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(self.p(), (0..self.p()).map(|k| self.slack_sign[k] * y[self.slack_row[k]]))
    }

    /// `M_ij = Tr{A_i X A_j Z^{-1}} + (G D G^T)_ij`.
    fn schur(&self, x: &RMat, zinv: &RMat, d: &DVector<f64>) -> RMat {
        let m = self.m();
        let mut out = RMat::zeros(m, m);
        for (j, aj) in self.a.iter().enumerate() {
            let w = x.select_columns(&aj.idx) * &aj.block * zinv.select_rows(&aj.idx);
            for (i, ai) in self.a.iter().enumerate() {
                out[(i, j)] = ai.inner(&w);
            }
        }
        for k in 0..self.p() {
            let r = self.slack_row[k];
            out[(r, r)] += d[k];
        }
        (&out + out.transpose()) * 0.5
    }
}

fn sym(a: RMat) -> RMat {
    (&a + a.transpose()) * 0.5
}

fn dot(a: &RMat, b: &RMat) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

/// Dense eigenvalues below this order, Lanczos above.
const LANCZOS_MIN_ORDER: usize = 96;
const LANCZOS_STEPS: usize = 40;

/// Smallest eigenvalue of the symmetric operator `apply`, estimated by Lanczos
/// with full reorthogonalization. The Ritz value is shifted down by its
/// residual so the estimate errs towards shorter steps.
fn lanczos_min(n: usize, apply: impl Fn(&DVector<f64>) -> DVector<f64>) -> f64 {
    let k = LANCZOS_STEPS.min(n);
    let mut q = DVector::from_fn(n, |i, _| 1.0 + 0.5 * (1.7 * i as f64 + 0.3).sin());
    q /= q.norm();
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(k);
    let mut alpha = Vec::with_capacity(k);
    let mut beta: Vec<f64> = Vec::with_capacity(k);
    for _ in 0..k {
        let mut v = apply(&q);
        let a = q.dot(&v);
        v.axpy(-a, &q, 1.0);
        if let (Some(prev), Some(&b)) = (basis.last(), beta.last()) {
            v.axpy(-b, prev, 1.0);
        }
        basis.push(q.clone());
        for u in &basis {
            let proj = u.dot(&v);
            v.axpy(-proj, u, 1.0);
        }
        alpha.push(a);
        let b = v.norm();
        beta.push(b);
        if b <= 1e-12 * a.abs().max(1.0) {
            break;
        }
        q = v / b;
    }
    let m = alpha.len();
    let tri = RMat::from_fn(m, m, |i, j| {
        if i == j {
            alpha[i]
        } else if i + 1 == j || j + 1 == i {
            beta[i.min(j)]
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(tri);
    let (imin, theta) = eig
        .eigenvalues
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, v)| if v < acc.1 { (i, v) } else { acc });
    let residual = beta[m - 1] * eig.eigenvectors[(m - 1, imin)].abs();
    theta - residual
}

/// Largest step `alpha` keeping `X + alpha dX` PSD, given the Cholesky
/// factor `L` of `X`.
fn psd_step(l: &RMat, dx: &RMat) -> f64 {
    let n = dx.nrows();
    let lmin = if n < LANCZOS_MIN_ORDER {
        let linv = lower_inverse(l);
        sym(&linv * dx * linv.transpose())
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    } else {
        // L^{-1} dX L^{-T} v through two triangular solves.
        lanczos_min(n, |v| {
            let u = l.tr_solve_lower_triangular(v).expect("positive diagonal");
            l.solve_lower_triangular(&(dx * u)).expect("positive diagonal")
        })
    };
    if lmin >= 0.0 {
        f64::INFINITY
    } else {
        -1.0 / lmin
    }
}

/// Shrink `alpha` until `X + alpha dX` has a Cholesky factor; returns the
/// step and that factor.
fn backtrack(x: &RMat, dx: &RMat, mut alpha: f64) -> (f64, Option<RMat>) {
    for _ in 0..30 {
        if let Some(c) = (x + dx * alpha).cholesky() {
            return (alpha, Some(c.l()));
        }
        alpha *= 0.8;
    }
    (0.0, None)
}

fn lp_step(x: &DVector<f64>, dx: &DVector<f64>) -> f64 {
    x.iter()
        .zip(dx.iter())
        .filter(|(_, d)| **d < 0.0)
        .map(|(v, d)| -v / d)
        .fold(f64::INFINITY, f64::min)
}

fn lower_inverse(chol_l: &RMat) -> RMat {
    let n = chol_l.nrows();
    chol_l
        .solve_lower_triangular(&RMat::identity(n, n))
        .expect("Cholesky factor has a positive diagonal")
}

struct Direction {
    dx: RMat,
    dz: RMat,
    dy: DVector<f64>,
    dxl: DVector<f64>,
    dzl: DVector<f64>,
}

/// Solve a Hermitian SDP. Problems must bound the trace of `X` through their
/// constraints; otherwise the solver may stop at `MaxIter`.
pub fn solve(problem: &SdpProblem, settings: SolverSettings) -> Result<SdpSolution> {
    validate(problem)?;
    let rp = RealProblem::build(problem);
    let n = rp.n;
    let m = rp.m();
    let p = rp.p();
    let nu = (n + p) as f64;

    // Starting point in the style of SDPT3.
    let max_ratio = rp
        .a
        .iter()
        .zip(rp.b.iter())
        .map(|(a, b)| (1.0 + b.abs()) / (1.0 + a.frobenius()))
        .fold(0.0, f64::max);
    let xi = 10f64.max((n as f64).sqrt()).max(n as f64 * max_ratio);
    let eta = 10f64
        .max((n as f64).sqrt())
        .max(rp.a.iter().map(Supported::frobenius).fold(rp.c.norm(), f64::max));
    let mut x = RMat::identity(n, n) * xi;
    let mut z = RMat::identity(n, n) * eta;
    let mut xl = DVector::from_element(p, xi);
    let mut zl = DVector::from_element(p, eta);
    let mut y = DVector::zeros(m);

    let bnorm = rp.b.norm();
    let cnorm = rp.c.norm();
    let mut status = SdpStatus::MaxIter;
    let mut iterations = 0;
    let mut stalls = 0;
    // Cholesky factors of the next iterate, found while backtracking.
    let mut next_lx: Option<RMat> = None;
    let mut next_lz: Option<RMat> = None;

    for iter in 0..settings.max_iter {
        iterations = iter;
        let r_p = &rp.b - rp.op(&x) - rp.g(&xl);
        let r_d = &rp.c - rp.op_adj(&y) - &z;
        let r_dl = -rp.g_t(&y) - &zl;
        let pobj = dot(&rp.c, &x);
        let dobj = rp.b.dot(&y);
        let mu = (dot(&x, &z) + xl.dot(&zl)) / nu;
        let gap = (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs());
        let pinf = r_p.norm() / (1.0 + bnorm);
        let dinf = (r_d.norm() + r_dl.norm()) / (1.0 + cnorm);
        log::trace!("sdp iter {iter}: pobj {pobj:.9e} dobj {dobj:.9e} gap {gap:.2e} pinf {pinf:.2e} dinf {dinf:.2e}");
        if gap < settings.tol && pinf < settings.tol && dinf < settings.tol {
            status = SdpStatus::Optimal;
            break;
        }
        // Primal infeasibility: a dual ray with b^T y > 0.
        if dobj > 0.0 {
            let ray = ((&rp.c - &r_d).norm() + r_dl.norm()) / dobj;
            if ray < 1e-8 {
                status = SdpStatus::Infeasible;
                break;
            }
        }

        let lx = match next_lx.take().or_else(|| x.clone().cholesky().map(|c| c.l())) {
            Some(l) => l,
            None => break,
        };
        let lz = match next_lz.take().or_else(|| z.clone().cholesky().map(|c| c.l())) {
            Some(l) => l,
            None => break,
        };
        let linv_z = lower_inverse(&lz);
        let zinv = sym(linv_z.transpose() * &linv_z);
        let d = DVector::from_iterator(p, xl.iter().zip(zl.iter()).map(|(a, b)| a / b));
        let schur = rp.schur(&x, &zinv, &d);
        let schur_chol = match schur.clone().cholesky() {
            Some(c) => c,
            None => {
                let shift = 1e-12 * schur.diagonal().amax().max(1e-300);
                match (schur + RMat::identity(m, m) * shift).cholesky() {
                    Some(c) => c,
                    None => break,
                }
            }
        };

        let xrdz = &x * &r_d * &zinv;
        let direction = |rc_zinv: RMat, rc_l: DVector<f64>| -> Direction {
            let rhs_mat = &rc_zinv - &xrdz;
            let rhs_l = &rc_l - d.component_mul(&r_dl);
            let rhs = &r_p - rp.op(&rhs_mat) - rp.g(&rhs_l);
            let dy = schur_chol.solve(&rhs);
            let dz = &r_d - rp.op_adj(&dy);
            let dx = sym(&rc_zinv - &x * &dz * &zinv);
            let dzl = &r_dl - rp.g_t(&dy);
            let dxl = &rc_l - d.component_mul(&dzl);
            Direction { dx, dz, dy, dxl, dzl }
        };
        let steps = |dir: &Direction| -> (f64, f64) {
            let ap = psd_step(&lx, &dir.dx).min(lp_step(&xl, &dir.dxl));
            let ad = psd_step(&lz, &dir.dz).min(lp_step(&zl, &dir.dzl));
            (ap, ad)
        };

        // Predictor (affine scaling).
        let aff = direction(-&x, -&xl);
        let (ap, ad) = steps(&aff);
        let (ap, ad) = (ap.min(1.0), ad.min(1.0));
        let mu_aff = (dot(&(&x + &aff.dx * ap), &(&z + &aff.dz * ad))
            + (&xl + &aff.dxl * ap).dot(&(&zl + &aff.dzl * ad)))
            / nu;
        let sigma = if mu > 0.0 { (mu_aff / mu).clamp(0.0, 1.0).powi(3) } else { 0.0 };

        // Corrector with the second-order term.
        let rc_zinv = &zinv * (sigma * mu) - &x - &aff.dx * &aff.dz * &zinv;
        let rc_l = DVector::from_iterator(
            p,
            (0..p).map(|k| (sigma * mu - aff.dxl[k] * aff.dzl[k]) / zl[k] - xl[k]),
        );
        let dir = direction(rc_zinv, rc_l);
        let (ap, ad) = steps(&dir);
        let tau = 0.9 + 0.09 * (1.0 - sigma).max(0.0);
        let (ap, lx_new) = backtrack(&x, &dir.dx, (tau * ap).min(1.0));
        let (ad, lz_new) = backtrack(&z, &dir.dz, (tau * ad).min(1.0));
        next_lx = lx_new;
        next_lz = lz_new;
        if ap < 1e-10 && ad < 1e-10 {
            stalls += 1;
            if stalls > 3 {
                break;
            }
        } else {
            stalls = 0;
        }
        x = sym(&x + &dir.dx * ap);
        xl += &dir.dxl * ap;
        y += &dir.dy * ad;
        z = sym(&z + &dir.dz * ad);
        zl += &dir.dzl * ad;
    }

    let xc = real_embedding_to_hermitian(&x);
    let objective_value = trace_product(&problem.objective, &xc).re;
    let dual_value = -rp.obj_scale * rp.b.dot(&y);
    let max_residual = problem
        .constraints
        .iter()
        .map(|c| c.violation(&xc))
        .fold(0.0, f64::max);
    Ok(SdpSolution {
        duality_gap: dual_value - objective_value,
        x: xc,
        objective_value,
        dual_value,
        max_residual,
        status,
        iterations,
    })
}

fn validate(problem: &SdpProblem) -> Result<()> {
    let n = problem.dim;
    if n == 0 {
        return Err(Error::MalformedProblem("zero-dimensional variable".into()));
    }
    let check = |what: &str, a: &CMat| -> Result<()> {
        if a.shape() != (n, n) {
            return Err(Error::MalformedProblem(format!(
                "{what} has shape {:?}, expected {n}x{n}",
                a.shape()
            )));
        }
        let r = hermitian_residual(a);
        if r > 1e-10 {
            return Err(Error::MalformedProblem(format!("{what} is not Hermitian (residual {r:e})")));
        }
        Ok(())
    };
    check("objective", &problem.objective)?;
    for c in &problem.constraints {
        check(&c.label, &c.matrix)?;
        if !c.rhs.is_finite() {
            return Err(Error::MalformedProblem(format!("{} has a non-finite bound", c.label)));
        }
    }
    if problem.constraints.is_empty() {
        return Err(Error::MalformedProblem("no constraint bounds the trace".into()));
    }
    Ok(())
}

#[derive(Serialize)]
struct DumpMatrix {
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

impl From<&CMat> for DumpMatrix {
    fn from(a: &CMat) -> Self {
        let rows = |f: fn(&Complex64) -> f64| {
            (0..a.nrows()).map(|i| a.row(i).iter().map(f).collect()).collect()
        };
        Self {
            re: rows(|z| z.re),
            im: rows(|z| z.im),
        }
    }
}

#[derive(Serialize)]
struct DumpConstraint<'a> {
    label: &'a str,
    kind: ConstraintKind,
    rhs: f64,
    matrix: DumpMatrix,
}

#[derive(Serialize)]
struct Dump<'a> {
    sense: &'static str,
    dim: usize,
    objective: DumpMatrix,
    constraints: Vec<DumpConstraint<'a>>,
}

impl SdpProblem {
    /// JSON text with dense `re` / `im` arrays, for cross-checking elsewhere.
    pub fn dump(&self) -> String {
        let d = Dump {
            sense: "maximize",
            dim: self.dim,
            objective: (&self.objective).into(),
            constraints: self
                .constraints
                .iter()
                .map(|c| DumpConstraint {
                    label: &c.label,
                    kind: c.kind,
                    rhs: c.rhs,
                    matrix: (&c.matrix).into(),
                })
                .collect(),
        };
        serde_json::to_string(&d).expect("dump serializes")
    }
}

/// Leading eigenpair and the ratio `lambda_2 / lambda_1` of a solution.
pub fn rank_one_ratio(x: &CMat) -> f64 {
    let (vals, _) = crate::linalg::hermitian_eigen_desc(x);
    if vals.len() < 2 || vals[0] <= 0.0 {
        return 0.0;
    }
    vals[1].max(0.0) / vals[0]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, hermitian_eigen_desc, hermitian_eigenvalues, J};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn trace_eq(n: usize, t: f64) -> Constraint {
        Constraint::new("trace", CMat::identity(n, n), ConstraintKind::Eq, t)
    }

    fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> CMat {
        let a = CMat::from_fn(n, n, |_, _| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        (&a + a.adjoint()) * c(0.5, 0.0)
    }

    #[test]
    fn scalar_problem() {
        let p = SdpProblem {
            dim: 1,
            objective: CMat::identity(1, 1),
            constraints: vec![trace_eq(1, 1.0)],
        };
        let s = solve(&p, SolverSettings::default()).unwrap();
        assert_eq!(s.status, SdpStatus::Optimal);
        assert!((s.objective_value - 1.0).abs() < 1e-7);
        assert!((s.x[(0, 0)] - c(1.0, 0.0)).norm() < 1e-7);
    }

    #[test]
    fn diagonal_objective_picks_dominant_axis() {
        let p = SdpProblem {
            dim: 2,
            objective: CMat::from_diagonal(&crate::linalg::CVec::from_vec(vec![c(1.0, 0.0), c(2.0, 0.0)])),
            constraints: vec![trace_eq(2, 1.0)],
        };
        let s = solve(&p, SolverSettings::default()).unwrap();
        assert!((s.objective_value - 2.0).abs() < 1e-7);
        assert!((s.x[(1, 1)].re - 1.0).abs() < 1e-6 && s.x[(0, 0)].re.abs() < 1e-6);
    }

    #[test]
    fn random_lambda_max() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..5 {
            let cm = random_hermitian(&mut rng, 4);
            let p = SdpProblem { dim: 4, objective: cm.clone(), constraints: vec![trace_eq(4, 1.0)] };
            let s = solve(&p, SolverSettings::default()).unwrap();
            let lmax = *hermitian_eigenvalues(&cm).last().unwrap();
            assert!((s.objective_value - lmax).abs() < 1e-7, "{} vs {lmax}", s.objective_value);
            assert!(rank_one_ratio(&s.x) < 1e-4);
            let (_, v) = hermitian_eigen_desc(&cm);
            let u = v.column(0).into_owned();
            let proj = &u * u.adjoint();
            assert!((&s.x - proj).norm() < 1e-4);
        }
    }

    #[test]
    fn inequality_constraints_bind() {
        // max x11 + x22 s.t. Tr X = 1, x11 <= 0.3, x22 >= 0.1 over 3x3.
        let e = |i: usize| {
            let mut a = CMat::zeros(3, 3);
            a[(i, i)] = c(1.0, 0.0);
            a
        };
        let p = SdpProblem {
            dim: 3,
            objective: e(0) + e(1),
            constraints: vec![
                trace_eq(3, 1.0),
                Constraint::new("x11", e(0), ConstraintKind::Le, 0.3),
                Constraint::new("x33", e(2), ConstraintKind::Ge, 0.1),
            ],
        };
        let s = solve(&p, SolverSettings::default()).unwrap();
        assert_eq!(s.status, SdpStatus::Optimal);
        assert!((s.objective_value - 0.9).abs() < 1e-7);
        assert!(s.max_residual < 1e-7);
        assert!(s.duality_gap.abs() < 1e-6);
    }

    #[test]
    fn detects_infeasibility() {
        let e0 = {
            let mut a = CMat::zeros(2, 2);
            a[(0, 0)] = c(1.0, 0.0);
            a
        };
        let p = SdpProblem {
            dim: 2,
            objective: CMat::identity(2, 2),
            constraints: vec![
                trace_eq(2, 1.0),
                Constraint::new("too much", e0, ConstraintKind::Ge, 2.0),
            ],
        };
        let s = solve(&p, SolverSettings::default()).unwrap();
        assert_eq!(s.status, SdpStatus::Infeasible);
    }

    #[test]
    fn embedding_round_trip() {
        assert_eq!(hermitian_to_real_embedding(&CMat::identity(3, 3)).unwrap(), RMat::identity(6, 6));
        let h = CMat::from_row_slice(2, 2, &[c(0.0, 0.0), -J, J, c(0.0, 0.0)]);
        let e = hermitian_to_real_embedding(&h).unwrap();
        let mut ev: Vec<f64> = e.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        assert!((ev[0] + 1.0).abs() < 1e-12 && (ev[3] - 1.0).abs() < 1e-12);
        assert!((ev[1] + 1.0).abs() < 1e-12 && (ev[2] - 1.0).abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = random_hermitian(&mut rng, 5);
        let x = random_hermitian(&mut rng, 5);
        let ae = hermitian_to_real_embedding(&a).unwrap();
        let xe = hermitian_to_real_embedding(&x).unwrap();
        assert!((trace_product(&a, &x).re - 0.5 * (ae * &xe).trace()).abs() < 1e-12);
        assert!((real_embedding_to_hermitian(&xe) - x).norm() < 1e-15);
        let bad = CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(2.0, 0.0), c(0.0, 0.0)]);
        assert!(hermitian_to_real_embedding(&bad).is_err());
    }
}
