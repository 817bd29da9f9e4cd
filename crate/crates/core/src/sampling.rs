//! Seeded random families, unitaries and rational matrices for property
//! checks.

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::channels::KrausFamily;
use crate::linalg::Matrix;

pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn ginibre(rng: &mut impl Rng, rows: usize, cols: usize) -> Matrix<Complex64> {
    Matrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

/// `r` Gaussian operators `d_out × d_in`, scaled so `tr Σ Kᵢ†Kᵢ = 1`.
pub fn random_family(rng: &mut impl Rng, d_in: usize, d_out: usize, r: usize) -> KrausFamily<Complex64> {
    let ops: Vec<_> = (0..r).map(|_| ginibre(rng, d_out, d_in)).collect();
    let f = KrausFamily::new(d_in, d_out, ops).expect("consistent shapes");
    let w = f.total_weight().re;
    f.scaled(&Complex64::new(1.0 / w.sqrt(), 0.0))
}

/// Haar-random unitary: QR of a Ginibre matrix with the phases of `R`'s
/// diagonal moved into `Q`.
pub fn random_unitary(rng: &mut impl Rng, n: usize) -> Matrix<Complex64> {
    let g = ginibre(rng, n, n);
    let qr = DMatrix::from_row_iterator(n, n, g.entries().iter().copied()).qr();
    let (q, r) = (qr.q(), qr.r());
    Matrix::from_fn(n, n, |i, j| {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        q[(i, j)] * phase
    })
}

/// Entries `p/q` with `|p| ≤ 4`, `1 ≤ q ≤ 3`, about a third of them zero.
pub fn random_rational_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> Matrix<BigRational> {
    Matrix::from_fn(rows, cols, |_, _| {
        if rng.random_range(0..3) == 0 {
            BigRational::from_integer(BigInt::from(0))
        } else {
            BigRational::new(BigInt::from(rng.random_range(-4..=4)), BigInt::from(rng.random_range(1..=3)))
        }
    })
}

/// Product of random `rows × k` and `k × cols` rational factors, so the
/// rank is at most `k`.
pub fn random_low_rank_rational(rng: &mut impl Rng, rows: usize, cols: usize, k: usize) -> Matrix<BigRational> {
    random_rational_matrix(rng, rows, k).matmul(&random_rational_matrix(rng, k, cols))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_family() {
        let a = random_family(&mut seeded(7), 2, 3, 2);
        let b = random_family(&mut seeded(7), 2, 3, 2);
        assert_eq!(a, b);
        assert!(a.is_normalized(1e-12));
    }

    #[test]
    fn random_unitary_is_unitary() {
        let mut rng = seeded(1);
        for n in 1..6 {
            let u = random_unitary(&mut rng, n);
            assert!(u.matmul(&u.adjoint()).max_abs_diff(&Matrix::identity(n)) < 1e-12);
        }
    }

    #[test]
    fn low_rank_product_shape() {
        let m = random_low_rank_rational(&mut seeded(3), 5, 7, 2);
        assert_eq!((m.rows(), m.cols()), (5, 7));
    }
}
