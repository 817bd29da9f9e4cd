//! Independent oracles shared by the integration tests. None of these call
//! the routine they are used to check.
#![allow(dead_code)]

use margext::{CKrausFamily, Complex64, Matrix, Rational};
use num_traits::{One, Zero};

/// Rank by plain Gauss–Jordan elimination over the rationals.
pub fn gauss_rank(m: &Matrix<Rational>) -> usize {
    let mut a: Vec<Vec<Rational>> = (0..m.rows()).map(|i| (0..m.cols()).map(|j| m[(i, j)].clone()).collect()).collect();
    let (rows, cols) = (m.rows(), m.cols());
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..rows).find(|&i| !a[i][c].is_zero()) else { continue };
        a.swap(rank, p);
        let pivot = a[rank][c].clone();
        for x in a[rank].iter_mut() {
            *x = x.clone() / pivot.clone();
        }
        for i in 0..rows {
            if i != rank && !a[i][c].is_zero() {
                let factor = a[i][c].clone();
                let pivot_row = a[rank].clone();
                for (x, p) in a[i].iter_mut().zip(&pivot_row) {
                    *x = x.clone() - factor.clone() * p.clone();
                }
            }
        }
        rank += 1;
    }
    debug_assert!(a.iter().take(rank).all(|row| row.iter().any(|x| x.is_one())));
    rank
}

/// `Σ_{r,s} E_{r,s} ⊗ Φ(E_{r,s})`, applying the channel to each matrix unit.
pub fn choi_by_definition(f: &CKrausFamily) -> Matrix<Complex64> {
    let (d1, d2) = (f.d_in(), f.d_out());
    let mut c = Matrix::zeros(d1 * d2, d1 * d2);
    for r in 0..d1 {
        for s in 0..d1 {
            let e = Matrix::unit(d1, d1, r, s);
            c = &c + &e.kron(&f.apply(&e).unwrap());
        }
    }
    c
}

/// `⌊√n⌋` by counting up.
pub fn floor_sqrt(n: u64) -> u64 {
    let mut k = 0;
    while (k + 1) * (k + 1) <= n {
        k += 1;
    }
    k
}

pub fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}
