//! Dense complex linear-algebra helpers shared by the model and optimizer.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;
pub type RMat = DMatrix<f64>;

pub const J: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `exp(j * phase)`
#[inline]
pub fn cis(phase: f64) -> Complex64 {
    Complex64::from_polar(1.0, phase)
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    let mut out = CMat::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let aij = a[(i, j)];
            if aij == Complex64::default() {
                continue;
            }
            for p in 0..br {
                for q in 0..bc {
                    out[(i * br + p, j * bc + q)] = aij * b[(p, q)];
                }
            }
        }
    }
    out
}

pub fn outer(u: &CVec, v: &CVec) -> CMat {
    u * v.adjoint()
}

pub fn diag(v: &CVec) -> CMat {
    CMat::from_diagonal(v)
}

/// `(H + H^H) / 2`
pub fn hermitian_part(h: &CMat) -> CMat {
    (h + h.adjoint()).scale(0.5)
}

/// Largest entry of `|H - H^H|`, relative to the largest entry of `|H|`.
pub fn hermitian_residual(h: &CMat) -> f64 {
    let scale = h.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return 0.0;
    }
    let mut worst = 0.0f64;
    for i in 0..h.nrows() {
        for j in 0..h.ncols() {
            worst = worst.max((h[(i, j)] - h[(j, i)].conj()).norm());
        }
    }
    worst / scale
}

/// Real part of `x^H A x`.
pub fn quad_form(a: &CMat, x: &CVec) -> f64 {
    x.dotc(&(a * x)).re
}

/// `Tr{A B}` without forming the product.
pub fn trace_product(a: &CMat, b: &CMat) -> Complex64 {
    let n = a.nrows();
    let mut acc = Complex64::default();
    for i in 0..n {
        for k in 0..a.ncols() {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

/// Ascending eigenvalues of a Hermitian matrix.
pub fn hermitian_eigenvalues(h: &CMat) -> Vec<f64> {
    let mut ev: Vec<f64> = hermitian_part(h).symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Eigen-pairs of a Hermitian matrix sorted by descending eigenvalue.
pub fn hermitian_eigen_desc(h: &CMat) -> (Vec<f64>, CMat) {
    let eig = hermitian_part(h).symmetric_eigen();
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

pub fn frobenius(h: &CMat) -> f64 {
    h.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Rotate `x` by a global phase so that `<reference, x>` is real and nonnegative.
pub fn align_phase(x: &CVec, reference: &CVec) -> CVec {
    let inner = reference.dotc(x);
    if inner.norm() == 0.0 {
        return x.clone();
    }
    x * (inner.conj() / inner.norm())
}
