//! Adjoint duality, diagonal-marginal canonicalization and restriction to the
//! supports of the marginals. All three preserve extremality.

use num_complex::Complex64;
use serde::Serialize;

use crate::channels::KrausFamily;
use crate::error::{Error, Result};
use crate::extremality::is_extremal;
use crate::linalg::{hermitian_eigen, Matrix};
use crate::scalar::Scalar;

/// Eigenvalues at or below this are treated as outside the support.
pub const SUPPORT_TOL: f64 = 1e-12;

/// Off-diagonal norm below which a marginal is taken as already diagonal.
const DIAGONAL_TOL: f64 = 1e-14;

/// Result of [`diagonalize_marginals`]: `Aᵢ = V Kᵢ U†`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CanonicalizationRecord {
    pub family: KrausFamily<Complex64>,
    pub u: Matrix<Complex64>,
    pub v: Matrix<Complex64>,
    pub d1_diag: Vec<f64>,
    pub d2_diag: Vec<f64>,
}

impl CanonicalizationRecord {
    /// Largest deviation of `u`, `v` from unitarity.
    pub fn unitarity_defect(&self) -> f64 {
        let defect = |w: &Matrix<Complex64>| w.matmul(&w.adjoint()).max_abs_diff(&Matrix::identity(w.rows()));
        defect(&self.u).max(defect(&self.v))
    }

    /// Largest deviation of the transformed marginals from `diag(d1_diag)`,
    /// `diag(d2_diag)`.
    pub fn diagonal_defect(&self) -> f64 {
        let m = self.family.marginals();
        let target = |d: &[f64]| Matrix::diagonal(&d.iter().map(|&x| Complex64::new(x, 0.0)).collect::<Vec<_>>());
        m.rho1.max_abs_diff(&target(&self.d1_diag)).max(m.rho2.max_abs_diff(&target(&self.d2_diag)))
    }
}

/// Unitary `W` with `W H W† = diag(values)`, values nondecreasing.
fn diagonalizing_unitary(h: &Matrix<Complex64>) -> Result<(Vec<f64>, Matrix<Complex64>)> {
    let n = h.rows();
    if h.off_diagonal_norm() <= DIAGONAL_TOL {
        // stable sort keeps equal entries in place, so no spurious rotation
        let diag: Vec<f64> = (0..n).map(|i| h[(i, i)].re).collect();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| diag[a].total_cmp(&diag[b]));
        let mut w = Matrix::zeros(n, n);
        for (row, &src) in order.iter().enumerate() {
            w[(row, src)] = Complex64::new(1.0, 0.0);
        }
        return Ok((order.iter().map(|&i| diag[i]).collect(), w));
    }
    let (values, vectors) = hermitian_eigen(h)?;
    Ok((values, vectors.adjoint()))
}

/// Conjugate a family by local unitaries so both marginals become diagonal
/// with nondecreasing entries.
pub fn diagonalize_marginals(f: &KrausFamily<Complex64>) -> Result<CanonicalizationRecord> {
    // U (Σ K†K) U† = D₁ makes the new ρ₁ = D₁ᵀ = D₁.
    let (d1_diag, u) = diagonalizing_unitary(&f.input_weight())?;
    let (d2_diag, v) = diagonalizing_unitary(&f.output_weight())?;
    let u_adj = u.adjoint();
    let ops = f.ops().iter().map(|k| v.matmul(k).matmul(&u_adj)).collect();
    Ok(CanonicalizationRecord {
        family: KrausFamily::new(f.d_in(), f.d_out(), ops)?,
        u,
        v,
        d1_diag,
        d2_diag,
    })
}

/// Extremality of `F` and of its adjoint agree, and the adjoint's marginals
/// are `(ρ₂ᵀ, ρ₁ᵀ)`.
pub fn adjoint_duality_check<T: Scalar>(f: &KrausFamily<T>) -> bool {
    let adj = f.adjoint();
    let swapped = f.marginals().swapped_for_adjoint();
    let marginals_ok = adj.marginals().max_deviation(&swapped) <= 1e-12;
    marginals_ok && is_extremal(f, None).extremal == is_extremal(&adj, None).extremal
}

/// Columns of the eigenvectors of `h` with eigenvalue above [`SUPPORT_TOL`].
fn support_basis(h: &Matrix<Complex64>) -> Result<Matrix<Complex64>> {
    let (values, vectors) = hermitian_eigen(h)?;
    let keep: Vec<usize> = (0..values.len()).filter(|&i| values[i] > SUPPORT_TOL).collect();
    let rows: Vec<usize> = (0..h.rows()).collect();
    Ok(vectors.select(&rows, &keep))
}

/// Compress every operator to `P₂† Kᵢ P₁`, with `P₁`, `P₂` orthonormal bases
/// of the supports of `Σ Kᵢ†Kᵢ` and `ρ₂`. Families whose marginals are
/// already invertible are returned unchanged.
pub fn restrict_to_support(f: &KrausFamily<Complex64>) -> Result<KrausFamily<Complex64>> {
    let p1 = support_basis(&f.input_weight())?;
    let p2 = support_basis(&f.output_weight())?;
    if p1.cols() == 0 || p2.cols() == 0 {
        return Err(Error::ZeroFamily);
    }
    if p1.cols() == f.d_in() && p2.cols() == f.d_out() {
        return Ok(f.clone());
    }
    let p2_adj = p2.adjoint();
    let ops = f.ops().iter().map(|k| p2_adj.matmul(k).matmul(&p1)).collect();
    KrausFamily::new(p1.cols(), p2.cols(), ops)
}
