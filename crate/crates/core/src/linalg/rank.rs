use serde::{Deserialize, Serialize};

use super::exact::bareiss_rank;
use super::matrix::Matrix;
use super::spectral::{hermitian_eigenvalues, singular_values};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RankMode {
    Exact,
    Numerical,
}

impl RankMode {
    /// Exact for rational scalars, numerical otherwise.
    pub fn auto<T: Scalar>() -> Self {
        if T::EXACT {
            RankMode::Exact
        } else {
            RankMode::Numerical
        }
    }
}

/// Gap ratios below this mark a numerical verdict as borderline.
pub const BORDERLINE_GAP: f64 = 10.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankResult {
    pub rank: usize,
    pub rows: usize,
    pub cols: usize,
    pub mode: RankMode,
    /// Smallest singular value counted in the rank (numerical mode).
    pub smallest_kept_singular_value: Option<f64>,
    /// Largest singular value *not* counted (numerical mode, rank-deficient only).
    pub largest_dropped_singular_value: Option<f64>,
    pub largest_singular_value: Option<f64>,
    pub threshold: Option<f64>,
}

impl RankResult {
    fn exact(rank: usize, rows: usize, cols: usize) -> Self {
        Self {
            rank,
            rows,
            cols,
            mode: RankMode::Exact,
            smallest_kept_singular_value: None,
            largest_dropped_singular_value: None,
            largest_singular_value: None,
            threshold: None,
        }
    }

    /// Separation between the kept and dropped parts of the spectrum:
    /// smallest kept value over `max(largest dropped, threshold)`.
    ///
    /// `None` in exact mode; infinite for a zero matrix.
    pub fn gap_ratio(&self) -> Option<f64> {
        if self.mode == RankMode::Exact {
            return None;
        }
        let threshold = self.threshold.unwrap_or(0.0);
        let floor = self.largest_dropped_singular_value.unwrap_or(0.0).max(threshold);
        Some(match self.smallest_kept_singular_value {
            None => f64::INFINITY,
            Some(kept) if floor > 0.0 => kept / floor,
            Some(_) => f64::INFINITY,
        })
    }

    pub fn is_borderline(&self) -> bool {
        self.gap_ratio().is_some_and(|g| g < BORDERLINE_GAP)
    }

    pub fn is_full(&self) -> bool {
        self.rank == self.rows.min(self.cols)
    }
}

/// Rank from a spectrum of singular values (any order).
pub fn rank_from_singular_values(
    values: &[f64],
    rows: usize,
    cols: usize,
    epsilon: f64,
    tol: Option<f64>,
) -> RankResult {
    let mut sv: Vec<f64> = values.iter().map(|v| v.abs()).collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    let sigma_max = sv.first().copied().unwrap_or(0.0);
    let threshold = tol.unwrap_or(rows.max(cols) as f64 * epsilon * sigma_max);
    let rank = sv.iter().take_while(|&&s| s > threshold).count();
    RankResult {
        rank,
        rows,
        cols,
        mode: RankMode::Numerical,
        smallest_kept_singular_value: rank.checked_sub(1).map(|i| sv[i]),
        largest_dropped_singular_value: sv.get(rank).copied(),
        largest_singular_value: Some(sigma_max),
        threshold: Some(threshold),
    }
}

fn to_rational_matrix<T: Scalar>(m: &Matrix<T>) -> Result<Matrix<num_rational::BigRational>> {
    let entries = m
        .entries()
        .iter()
        .map(|x| x.to_rational().ok_or(Error::NotRational))
        .collect::<Result<Vec<_>>>()?;
    Matrix::from_vec(m.rows(), m.cols(), entries)
}

/// Rank of a general matrix.
///
/// Exact mode runs Bareiss elimination and needs rational entries; numerical
/// mode counts singular values above `tol`, defaulting to
/// `max(rows, cols) · ε · σ_max`.
pub fn rank<T: Scalar>(m: &Matrix<T>, mode: RankMode, tol: Option<f64>) -> Result<RankResult> {
    match mode {
        RankMode::Exact => {
            let q = to_rational_matrix(m)?;
            Ok(RankResult::exact(bareiss_rank(&q), m.rows(), m.cols()))
        }
        RankMode::Numerical => {
            let sv = singular_values(m)?;
            Ok(rank_from_singular_values(&sv, m.rows(), m.cols(), T::epsilon(), tol))
        }
    }
}

/// Rank of a Hermitian matrix; numerical mode uses `|eigenvalues|`, which
/// coincide with the singular values and are cheaper to obtain.
pub fn hermitian_rank<T: Scalar>(h: &Matrix<T>, mode: RankMode, tol: Option<f64>) -> Result<RankResult> {
    match mode {
        RankMode::Exact => rank(h, mode, tol),
        RankMode::Numerical => {
            let ev = hermitian_eigenvalues(h)?;
            Ok(rank_from_singular_values(&ev, h.rows(), h.cols(), T::epsilon(), tol))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use num_rational::BigRational;

    #[test]
    fn identity_rank_both_modes() {
        let i9 = Matrix::<BigRational>::identity(9);
        assert_eq!(rank(&i9, RankMode::Exact, None).unwrap().rank, 9);
        let r = rank(&i9, RankMode::Numerical, None).unwrap();
        assert_eq!(r.rank, 9);
        assert!(r.is_full() && !r.is_borderline());
    }

    #[test]
    fn exact_mode_rejects_floats() {
        let m = Matrix::<f64>::identity(2);
        assert!(matches!(rank(&m, RankMode::Exact, None), Err(Error::NotRational)));
    }

    #[test]
    fn duplicated_vector_gram_has_rank_one() {
        let v = [Complex64::new(1.0, 0.5), Complex64::new(-2.0, 0.0)];
        let g = Matrix::from_fn(4, 4, |_, _| v.iter().map(|z| z.norm_sqr()).sum::<f64>());
        let r = hermitian_rank(&g, RankMode::Numerical, None).unwrap();
        assert_eq!(r.rank, 1);
        assert!(r.gap_ratio().unwrap() > 1e3);
    }

    #[test]
    fn explicit_tolerance_is_used() {
        let m = Matrix::diagonal(&[1.0, 1e-3, 1e-9]);
        assert_eq!(rank(&m, RankMode::Numerical, Some(1e-6)).unwrap().rank, 2);
        let r = rank(&m, RankMode::Numerical, None).unwrap();
        assert_eq!(r.rank, 3);
        assert_eq!(r.largest_dropped_singular_value, None);
    }

    #[test]
    fn zero_matrix_has_rank_zero_and_infinite_gap() {
        let r = rank(&Matrix::<f64>::zeros(3, 2), RankMode::Numerical, None).unwrap();
        assert_eq!(r.rank, 0);
        assert_eq!(r.gap_ratio(), Some(f64::INFINITY));
    }

    #[test]
    fn borderline_when_spectrum_has_no_gap() {
        let r = rank_from_singular_values(&[1.0, 1e-1, 1e-17], 3, 3, f64::EPSILON, None);
        assert_eq!(r.rank, 2);
        assert!(r.gap_ratio().unwrap() > 1e10);
        let r = rank_from_singular_values(&[1.0, 1e-12, 3e-13], 3, 3, f64::EPSILON, Some(2e-13));
        assert_eq!(r.rank, 3);
        assert!(r.is_borderline());
    }
}
