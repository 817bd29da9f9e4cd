//! Eigenvalues and singular values, backed by nalgebra.
//!
//! Inputs are converted to `f64` (real when every imaginary part is zero,
//! complex otherwise); real symmetric problems are several times cheaper.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::matrix::Matrix;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

fn check_finite(m: &Matrix<Complex64>) -> Result<()> {
    if m.entries().iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

fn is_real(m: &Matrix<Complex64>) -> bool {
    m.entries().iter().all(|z| z.im == 0.0)
}

fn to_real_dmatrix(m: &Matrix<Complex64>) -> DMatrix<f64> {
    DMatrix::from_row_iterator(m.rows(), m.cols(), m.entries().iter().map(|z| z.re))
}

fn to_complex_dmatrix(m: &Matrix<Complex64>) -> DMatrix<Complex64> {
    DMatrix::from_row_iterator(m.rows(), m.cols(), m.entries().iter().copied())
}

fn hermitian_part(m: &Matrix<Complex64>) -> Matrix<Complex64> {
    let half = Complex64::new(0.5, 0.0);
    Matrix::from_fn(m.rows(), m.cols(), |i, j| (m[(i, j)] + m[(j, i)].conj()) * half)
}

/// Singular values in nonincreasing order.
pub fn singular_values<T: Scalar>(m: &Matrix<T>) -> Result<Vec<f64>> {
    let c = m.to_complex64();
    check_finite(&c)?;
    if c.rows() == 0 || c.cols() == 0 {
        return Ok(Vec::new());
    }
    let mut sv: Vec<f64> = if is_real(&c) {
        to_real_dmatrix(&c).singular_values().iter().copied().collect()
    } else {
        to_complex_dmatrix(&c).singular_values().iter().copied().collect()
    };
    sv.sort_by(|a, b| b.total_cmp(a));
    Ok(sv)
}

/// Eigenvalues of `(H + H^H)/2` in nondecreasing order. No Hermiticity check.
pub fn hermitian_eigenvalues<T: Scalar>(h: &Matrix<T>) -> Result<Vec<f64>> {
    let c = h.to_complex64();
    check_finite(&c)?;
    if !c.is_square() {
        return Err(Error::DimensionMismatch("eigenvalues of a non-square matrix".into()));
    }
    let c = hermitian_part(&c);
    let mut ev: Vec<f64> = if is_real(&c) {
        let m = to_real_dmatrix(&c);
        let ev: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
        if ev.iter().all(|x| x.is_finite()) {
            ev
        } else {
            let (diag, off) = m.symmetric_tridiagonalize().unpack_tridiagonal();
            tridiagonal_eigenvalues(diag.as_slice(), off.as_slice())
        }
    } else {
        let m = to_complex_dmatrix(&c);
        let ev: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
        if ev.iter().all(|x| x.is_finite()) {
            ev
        } else {
            let (diag, off) = m.symmetric_tridiagonalize().unpack_tridiagonal();
            tridiagonal_eigenvalues(diag.as_slice(), off.as_slice())
        }
    };
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

/// Number of eigenvalues below `x` of the symmetric tridiagonal matrix with
/// diagonal `a` and off-diagonal `b` (Sturm sequence).
fn count_below(a: &[f64], b: &[f64], x: f64) -> usize {
    let tiny = f64::MIN_POSITIVE.sqrt();
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..a.len() {
        let coupling = if i == 0 { 0.0 } else { b[i - 1] * b[i - 1] / q };
        q = a[i] - x - coupling;
        if q == 0.0 {
            q = -tiny;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Eigenvalues of a symmetric tridiagonal matrix by bisection, ascending.
///
/// Slower than implicit QR but unconditionally stable; used when the QR
/// iteration fails to produce finite values.
pub fn tridiagonal_eigenvalues(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len();
    // Gershgorin interval
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..n {
        let r = if i > 0 { b[i - 1].abs() } else { 0.0 } + if i + 1 < n { b[i].abs() } else { 0.0 };
        lo = lo.min(a[i] - r);
        hi = hi.max(a[i] + r);
    }
    let scale = lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
    (0..n)
        .map(|k| {
            let (mut l, mut h) = (lo, hi);
            for _ in 0..200 {
                let mid = 0.5 * (l + h);
                if count_below(a, b, mid) > k {
                    h = mid;
                } else {
                    l = mid;
                }
                if h - l <= 2.0 * f64::EPSILON * scale {
                    break;
                }
            }
            0.5 * (l + h)
        })
        .collect()
}

/// Eigendecomposition of a Hermitian matrix: eigenvalues nondecreasing, with
/// eigenvectors as the columns of the returned matrix.
///
/// Each eigenvector is rotated so its first entry of modulus above `1e-12`
/// is real and positive.
pub fn hermitian_eigen<T: Scalar>(h: &Matrix<T>) -> Result<(Vec<f64>, Matrix<Complex64>)> {
    let c = h.to_complex64();
    check_finite(&c)?;
    if !c.is_square() {
        return Err(Error::DimensionMismatch("eigenvectors of a non-square matrix".into()));
    }
    let n = c.rows();
    let c = hermitian_part(&c);
    let (values, vectors): (Vec<f64>, DMatrix<Complex64>) = if is_real(&c) {
        let eig = to_real_dmatrix(&c).symmetric_eigen();
        (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors.map(|x| Complex64::new(x, 0.0)))
    } else {
        let eig = to_complex_dmatrix(&c).symmetric_eigen();
        (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
    };
    if values.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut out = Matrix::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        let lead = (0..n).find(|&i| vectors[(i, src)].norm() > 1e-12);
        let phase = lead.map_or(Complex64::new(1.0, 0.0), |i| {
            let z = vectors[(i, src)];
            z.conj() / z.norm()
        });
        for i in 0..n {
            out[(i, col)] = vectors[(i, src)] * phase;
        }
        if let Some(i) = lead {
            out[(i, col)] = Complex64::new(out[(i, col)].norm(), 0.0);
        }
    }
    Ok((order.iter().map(|&i| values[i]).collect(), out))
}

/// Smallest eigenvalue of a Hermitian matrix (within `1e-12` entrywise).
pub fn min_eigenvalue<T: Scalar>(h: &Matrix<T>) -> Result<f64> {
    let dev = h.hermitian_deviation();
    if dev > 1e-12 {
        return Err(Error::NotHermitian(dev));
    }
    let ev = hermitian_eigenvalues(h)?;
    ev.first().copied().ok_or_else(|| Error::DimensionMismatch("empty matrix".into()))
}
