//! Extremality of a Kraus family among CP maps with its marginals.
//!
//! A family `{Kᵢ}` is extremal iff the `r²` block operators
//! `Kᵢ†Kⱼ ⊕ KⱼKᵢ†` are linearly independent. Independence is decided by the
//! rank of their Gram matrix under the Hilbert–Schmidt pairing, which equals
//! the span dimension over ℂ.

use num_integer::Roots;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::channels::{KrausFamily, MarginalPair};
use crate::error::Result;
use crate::linalg::{hermitian_rank, Matrix, RankMode, RankResult};
use crate::scalar::Scalar;

/// Marginal residuals above this mark a certificate's marginals as invalid.
pub const MARGINAL_TOL: f64 = 1e-9;

/// Column-stacked block operators `vec(Kᵢ†Kⱼ) ⊕ vec(KⱼKᵢ†)`, indexed by
/// `i·r + j` (0-based).
pub fn block_vectors<T: Scalar>(f: &KrausFamily<T>) -> Vec<Vec<T>> {
    let ops = f.ops();
    let r = ops.len();
    let adjoints: Vec<Matrix<T>> = ops.iter().map(Matrix::adjoint).collect();
    (0..r * r)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx / r, idx % r);
            let mut v = adjoints[i].matmul(&ops[j]).vec_cols();
            v.extend(ops[j].matmul(&adjoints[i]).vec_cols());
            v
        })
        .collect()
}

/// Block Gram matrix `G[(i,j),(k,l)] = ⟨Kᵢ†Kⱼ, Kₖ†Kₗ⟩ + ⟨KⱼKᵢ†, KₗKₖ†⟩`.
///
/// Rows are assembled in parallel; every entry is an independent sequential
/// dot product, so the result does not depend on thread scheduling.
pub fn block_gram<T: Scalar>(f: &KrausFamily<T>) -> Matrix<T> {
    let blocks = block_vectors(f);
    let n = blocks.len();
    // sparse supports keep exact-arithmetic Grams of 0/1 families cheap
    let supports: Vec<Vec<usize>> = blocks
        .iter()
        .map(|v| (0..v.len()).filter(|&t| !v[t].is_zero()).collect())
        .collect();
    let upper: Vec<Vec<T>> = (0..n)
        .into_par_iter()
        .map(|a| {
            (a..n)
                .map(|b| {
                    let (va, vb) = (&blocks[a], &blocks[b]);
                    let (short, dense_a) = if supports[a].len() <= supports[b].len() {
                        (&supports[a], true)
                    } else {
                        (&supports[b], false)
                    };
                    short.iter().fold(T::zero(), |acc, &t| {
                        let (x, y) = (&va[t], &vb[t]);
                        if (dense_a && y.is_zero()) || (!dense_a && x.is_zero()) {
                            acc
                        } else {
                            acc + x.conj() * y.clone()
                        }
                    })
                })
                .collect()
        })
        .collect();
    let mut g = Matrix::zeros(n, n);
    for (a, row) in upper.into_iter().enumerate() {
        for (offset, value) in row.into_iter().enumerate() {
            let b = a + offset;
            g[(b, a)] = value.conj();
            g[(a, b)] = value;
        }
    }
    g
}

/// Verdict record for the extremality test.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtremalityCertificate {
    pub r: usize,
    pub gram_size: usize,
    pub gram_rank: RankResult,
    pub extremal: bool,
    /// Max entrywise deviation of the computed marginals from declared targets.
    pub marginal_residual: Option<f64>,
    pub mode: RankMode,
}

impl ExtremalityCertificate {
    /// Marginals match the declared targets (vacuously true without targets).
    pub fn marginals_valid(&self) -> bool {
        self.marginal_residual.is_none_or(|r| r <= MARGINAL_TOL)
    }

    /// Numerical verdict whose singular-value gap is too small to trust.
    pub fn borderline(&self) -> bool {
        self.gram_rank.is_borderline()
    }

    pub fn gap(&self) -> Option<f64> {
        self.gram_rank.gap_ratio()
    }

    /// Type invariants: `gram_size = r²` and `extremal ⇔ full Gram rank`.
    pub fn is_consistent(&self) -> bool {
        self.gram_size == self.r * self.r
            && self.extremal == (self.gram_rank.rank == self.gram_size)
            && self.mode == self.gram_rank.mode
    }
}

#[derive(Serialize)]
struct CertificateRecord {
    r: usize,
    gram_size: usize,
    gram_rank: usize,
    extremal: bool,
    mode: RankMode,
    gap: Option<f64>,
    marginal_residual: Option<f64>,
    marginals_valid: bool,
    borderline: bool,
    smallest_kept_singular_value: Option<f64>,
    threshold: Option<f64>,
}

impl Serialize for ExtremalityCertificate {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        CertificateRecord {
            r: self.r,
            gram_size: self.gram_size,
            gram_rank: self.gram_rank.rank,
            extremal: self.extremal,
            mode: self.mode,
            gap: self.gap(),
            marginal_residual: self.marginal_residual,
            marginals_valid: self.marginals_valid(),
            borderline: self.borderline(),
            smallest_kept_singular_value: self.gram_rank.smallest_kept_singular_value,
            threshold: self.gram_rank.threshold,
        }
        .serialize(serializer)
    }
}

/// Extremality test with the rank mode chosen from the scalar type: exact
/// for rational families, numerical (with gap reporting) otherwise.
pub fn is_extremal<T: Scalar>(f: &KrausFamily<T>, targets: Option<&MarginalPair<T>>) -> ExtremalityCertificate {
    is_extremal_with(f, targets, RankMode::auto::<T>(), None).expect("finite Kraus entries")
}

/// Extremality test with an explicit rank mode and optional tolerance.
///
/// Exact mode fails on non-rational entries. A marginal mismatch against
/// `targets` does not change the verdict; it is recorded in the certificate.
pub fn is_extremal_with<T: Scalar>(
    f: &KrausFamily<T>,
    targets: Option<&MarginalPair<T>>,
    mode: RankMode,
    tol: Option<f64>,
) -> Result<ExtremalityCertificate> {
    let r = f.len();
    let gram = block_gram(f);
    let gram_rank = hermitian_rank(&gram, mode, tol)?;
    Ok(ExtremalityCertificate {
        r,
        gram_size: r * r,
        extremal: gram_rank.rank == r * r,
        gram_rank,
        marginal_residual: targets.map(|t| f.marginals().max_deviation(t)),
        mode,
    })
}

/// `⌊√(d₁² + d₂² − 1)⌋`, the maximal rank of an extreme point.
pub fn parthasarathy_bound(d1: u64, d2: u64) -> u64 {
    assert!(d1 >= 1 && d2 >= 1, "dimensions must be positive");
    (d1 * d1 + d2 * d2 - 1).sqrt()
}

/// Whether the `(d, d+m)` construction (Choi rank `d+m`) reaches the bound.
pub fn bound_attained(d: u64, m: u64) -> bool {
    let attained = d + m == parthasarathy_bound(d, d + m);
    debug_assert_eq!(attained, bound_inequality_holds(d, m));
    attained
}

/// `2m > d² − 2d − 2`, the inequality form of the attainment condition.
pub fn bound_inequality_holds(d: u64, m: u64) -> bool {
    (2 * m + 2 * d + 2) as i128 > (d * d) as i128
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn single_unitary_gram_is_two_over_d() {
        for d in 1..5usize {
            // Oracle: tr(I/d²) + tr(I/d²) = 2/d.
            let u = Matrix::<Complex64>::identity(d).scale(&c(1.0 / (d as f64).sqrt()));
            let g = block_gram(&KrausFamily::single(u).unwrap());
            assert_eq!((g.rows(), g.cols()), (1, 1));
            assert!((g[(0, 0)] - c(2.0 / d as f64)).norm() < 1e-15);
        }
    }

    #[test]
    fn matrix_unit_family_is_not_extremal() {
        let ops = (0..4)
            .map(|k| Matrix::<Complex64>::unit(2, 2, k / 2, k % 2).scale(&c(0.5f64.sqrt())))
            .collect();
        let f = KrausFamily::new(2, 2, ops).unwrap();
        let cert = is_extremal(&f, None);
        assert_eq!(cert.gram_size, 16);
        assert!(cert.gram_rank.rank <= 8);
        assert!(!cert.extremal && cert.is_consistent());
    }

    #[test]
    fn certificate_json_fields() {
        let f = KrausFamily::single(Matrix::<Complex64>::identity(2).scale(&c(0.5f64.sqrt()))).unwrap();
        let targets = MarginalPair::maximally_mixed(2, 2);
        let cert = is_extremal(&f, Some(&targets));
        assert!(cert.extremal && cert.marginals_valid());
        let v = serde_json::to_value(&cert).unwrap();
        for key in ["r", "gram_rank", "extremal", "mode", "gap", "marginal_residual"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        assert_eq!(v["mode"], "numerical");
    }

    #[test]
    fn wrong_targets_flag_marginals_but_keep_verdict() {
        let f = KrausFamily::single(Matrix::<Complex64>::identity(2).scale(&c(0.5f64.sqrt()))).unwrap();
        let mut skewed = MarginalPair::maximally_mixed(2, 2);
        skewed.rho1[(0, 0)] = c(0.9);
        let cert = is_extremal(&f, Some(&skewed));
        assert!(cert.extremal);
        assert!(!cert.marginals_valid());
    }

    #[test]
    fn parthasarathy_examples() {
        assert_eq!(parthasarathy_bound(2, 2), 2);
        assert_eq!(parthasarathy_bound(6, 6), 8);
        assert_eq!(parthasarathy_bound(3, 4), 4);
        assert_eq!(parthasarathy_bound(4, 6), 7);
        assert_eq!(parthasarathy_bound(2, 3), 3);
    }

    #[test]
    fn attainment_examples() {
        assert!(bound_attained(3, 1));
        assert!(!bound_attained(4, 2));
        assert!(bound_attained(2, 1));
        assert!(!bound_attained(5, 3));
    }

    #[test]
    fn attainment_matches_inequality_on_grid() {
        for d in 2..=12u64 {
            for m in 1..=40u64 {
                assert_eq!(
                    d + m == parthasarathy_bound(d, d + m),
                    bound_inequality_holds(d, m),
                    "d={d} m={m}"
                );
            }
        }
    }
}
