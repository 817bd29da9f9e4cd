//! Exact rank over the rationals by fraction-free (Bareiss) elimination.
//!
//! Each row is first cleared of denominators (an integer row scaling, which
//! leaves the rank unchanged); elimination then stays in `BigInt`, where every
//! intermediate entry is a minor of the input and the Bareiss division by the
//! previous pivot is exact.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::matrix::Matrix;

/// Scale each row by the lcm of its denominators to get an integer matrix.
pub fn clear_denominators(m: &Matrix<BigRational>) -> Vec<Vec<BigInt>> {
    (0..m.rows())
        .map(|i| {
            let row = &m.entries()[i * m.cols()..(i + 1) * m.cols()];
            let lcm = row.iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
            row.iter().map(|q| q.numer() * (&lcm / q.denom())).collect()
        })
        .collect()
}

/// Rank of an integer matrix given as rows.
pub fn bareiss_rank_int(mut a: Vec<Vec<BigInt>>) -> usize {
    let rows = a.len();
    if rows == 0 {
        return 0;
    }
    let cols = a[0].len();
    let mut prev = BigInt::one();
    let mut rank = 0;
    for col in 0..cols {
        if rank == rows {
            break;
        }
        let Some(pivot) = (rank..rows).find(|&i| !a[i][col].is_zero()) else {
            continue;
        };
        a.swap(rank, pivot);
        let (top, bottom) = a.split_at_mut(rank + 1);
        let prow = &top[rank];
        for row in bottom.iter_mut() {
            let factor = row[col].clone();
            for j in col + 1..cols {
                let v = &prow[col] * &row[j] - &factor * &prow[j];
                row[j] = v / &prev;
            }
            row[col] = BigInt::zero();
        }
        prev = top[rank][col].clone();
        rank += 1;
    }
    rank
}

pub fn bareiss_rank(m: &Matrix<BigRational>) -> usize {
    bareiss_rank_int(clear_denominators(m))
}
