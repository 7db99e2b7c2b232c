//! Small complex linear-algebra helpers on top of nalgebra.

use nalgebra::{Complex, DMatrix, DVector};

use crate::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub const LOG2_E: f64 = std::f64::consts::LOG2_E;

pub fn c(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

pub fn real(x: f64) -> C64 {
    Complex::new(x, 0.0)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

/// `(m + m^H) / 2`.
pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

/// `m m^H`.
pub fn gram(m: &CMat) -> CMat {
    m * m.adjoint()
}

/// Base-2 log-determinant of a Hermitian positive-definite matrix via Cholesky.
pub fn log2_det_hpd(m: &CMat, what: &'static str) -> Result<f64> {
    if m.nrows() == 0 {
        return Ok(0.0);
    }
    let chol = cholesky(m, what)?;
    let l = chol.l_dirty();
    Ok((0..m.nrows()).map(|i| 2.0 * l[(i, i)].re.log2()).sum())
}

/// Cholesky factor of the Hermitian part of `m`. nalgebra takes complex square
/// roots of the pivots, so a negative pivot has to be caught here.
fn cholesky(m: &CMat, what: &'static str) -> Result<nalgebra::Cholesky<C64, nalgebra::Dyn>> {
    let chol = hermitian_part(m)
        .cholesky()
        .ok_or(Error::NotPositiveDefinite(what))?;
    let l = chol.l_dirty();
    let ok = (0..m.nrows()).all(|i| {
        let d = l[(i, i)];
        d.re > 0.0 && d.re.is_finite() && d.im.abs() <= 1e-12 * d.re
    });
    if ok {
        Ok(chol)
    } else {
        Err(Error::NotPositiveDefinite(what))
    }
}

/// Inverse of a Hermitian positive-definite matrix via Cholesky.
pub fn inverse_hpd(m: &CMat, what: &'static str) -> Result<CMat> {
    Ok(cholesky(m, what)?.inverse())
}

/// General inverse via LU.
pub fn inverse(m: &CMat, what: &'static str) -> Result<CMat> {
    m.clone().try_inverse().ok_or(Error::Singular(what))
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &CMat) -> Vec<f64> {
    let mut ev: Vec<f64> = hermitian_part(m)
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

/// 2-norm condition number of a Hermitian positive semidefinite matrix.
/// Returns infinity when the smallest eigenvalue is not positive.
pub fn hpd_condition(m: &CMat) -> f64 {
    let ev = hermitian_eigenvalues(m);
    match (ev.first(), ev.last()) {
        (Some(&lo), Some(&hi)) if lo > 0.0 => hi / lo,
        (Some(_), Some(_)) => f64::INFINITY,
        _ => 1.0,
    }
}

/// 2-norm condition number of a general square matrix.
pub fn condition(m: &CMat) -> f64 {
    let sv = m.singular_values();
    let hi = sv.max();
    let lo = sv.min();
    if lo > 0.0 {
        hi / lo
    } else {
        f64::INFINITY
    }
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Commutation matrix `K` with `K vec(X) = vec(X^T)` for an `rows x cols` matrix `X`
/// (column-major `vec`).
pub fn commutation(rows: usize, cols: usize) -> CMat {
    let n = rows * cols;
    let mut k = CMat::zeros(n, n);
    for i in 0..rows {
        for j in 0..cols {
            k[(j + i * cols, i + j * rows)] = real(1.0);
        }
    }
    k
}

/// Column-major vectorisation.
pub fn vec_of(m: &CMat) -> CVec {
    CVec::from_column_slice(m.as_slice())
}

/// Inverse of [`vec_of`].
pub fn unvec(v: &CVec, rows: usize, cols: usize) -> CMat {
    CMat::from_column_slice(rows, cols, v.as_slice())
}

/// Full singular value decomposition of a wide or square matrix `m = U diag(s) V^H`
/// (`rows <= cols`). `U` is `rows x rows`, `V` is `cols x cols` unitary and the
/// singular values are sorted in decreasing order.
#[derive(Debug, Clone)]
pub struct FullSvd {
    pub u: CMat,
    pub singular_values: Vec<f64>,
    pub v: CMat,
}

pub fn full_svd(m: &CMat) -> FullSvd {
    let (rows, cols) = m.shape();
    assert!(rows <= cols, "full_svd expects a wide matrix");
    let svd = m.clone().svd(true, true);
    let u_thin = svd.u.expect("U requested");
    let vt_thin = svd.v_t.expect("V^T requested");
    let mut order: Vec<usize> = (0..rows).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));

    let mut u = CMat::zeros(rows, rows);
    let mut v = CMat::zeros(cols, cols);
    let mut singular_values = Vec::with_capacity(rows);
    for (k, &i) in order.iter().enumerate() {
        u.set_column(k, &u_thin.column(i));
        v.set_column(k, &vt_thin.row(i).adjoint());
        singular_values.push(svd.singular_values[i]);
    }
    complete_orthonormal_basis(&mut v, rows);
    FullSvd {
        u,
        singular_values,
        v,
    }
}

/// Fills columns `filled..` of `basis` with an orthonormal completion of the first
/// `filled` (orthonormal) columns.
pub fn complete_orthonormal_basis(basis: &mut CMat, filled: usize) {
    let n = basis.nrows();
    for k in filled..basis.ncols() {
        let mut best: Option<(f64, CVec)> = None;
        for e in 0..n {
            let mut cand = CVec::zeros(n);
            cand[e] = real(1.0);
            // two passes of Gram-Schmidt for numerical safety
            for _ in 0..2 {
                for j in 0..k {
                    let col = basis.column(j);
                    let proj = col.dotc(&cand);
                    cand -= col * proj;
                }
            }
            let norm = cand.norm();
            if best.as_ref().is_none_or(|(b, _)| norm > *b) {
                best = Some((norm, cand));
            }
        }
        let (norm, cand) = best.expect("non-empty basis");
        basis.set_column(k, &(cand / real(norm)));
    }
}

/// Largest entry modulus.
pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}
