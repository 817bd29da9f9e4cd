//! Explicit Kraus families and closed-form oracles.
//!
//! All constructors return normalized families (`tr Σ Kᵢ†Kᵢ = 1`) stored
//! output × input. The `(d, d+m)` family also has an unscaled integer form,
//! whose block Gram is integer-valued and can be ranked exactly.
//!
//! Indices in the formulas below are 1-based; the code converts once, using
//! a nonnegative modulus.

use std::fmt;

use crate::channels::{KrausFamily, MarginalPair};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::{FloatScalar, Scalar};

fn check_dm(d: usize, m: usize) -> Result<()> {
    if d < 2 || m < 1 {
        return Err(Error::InvalidParameter(format!(
            "the (d, d+m) family needs d >= 2 and m >= 1, got d={d}, m={m}"
        )));
    }
    Ok(())
}

/// Cyclic shift `S = Σ_{k=1}^{d+1} |e_{(k mod (d+1))+1}⟩⟨e_k|` on the first
/// `d+1` coordinates of a `(d+m)`-dimensional space, zero elsewhere.
#[derive(Clone, Debug, PartialEq)]
pub struct ShiftMatrix<T> {
    pub d: usize,
    pub m: usize,
    pub matrix: Matrix<T>,
}

impl<T: Scalar> ShiftMatrix<T> {
    pub fn new(d: usize, m: usize) -> Result<Self> {
        check_dm(d, m)?;
        let n = d + m;
        let mut s = Matrix::zeros(n, n);
        for k in 1..=d + 1 {
            s[(k % (d + 1), k - 1)] = T::one();
        }
        Ok(Self { d, m, matrix: s })
    }

    /// `S^p`; `p = 0` gives the projector onto the first `d+1` coordinates
    /// (`S^{d+1}`), not the full identity.
    pub fn power(&self, p: usize) -> Matrix<T> {
        let p = p % (self.d + 1);
        let exp = if p == 0 { self.d + 1 } else { p };
        self.matrix.pow(exp as u32)
    }
}

/// Unscaled `(d, d+m)` family with 0/1 entries.
///
/// For `i = 1..=d+1` the operator is `Vᵢ†` with
/// `Vᵢ = Σ_{k=1}^{d} |e_k⟩⟨e_{mod(k+i−2, d+1)+1}|`; for `i = d+2..=d+m` it is
/// `(|J⟩⟨eᵢ|)† = |eᵢ⟩⟨J|` with `|J⟩` the all-ones vector of length `d`.
pub fn paper_family_unscaled<T: Scalar>(d: usize, m: usize) -> Result<KrausFamily<T>> {
    check_dm(d, m)?;
    let n = d + m;
    let mut ops = Vec::with_capacity(n);
    for i in 1..=d + 1 {
        let mut k = Matrix::zeros(n, d);
        for col in 1..=d {
            k[((col + i - 2) % (d + 1), col - 1)] = T::one();
        }
        ops.push(k);
    }
    for i in d + 2..=n {
        let mut k = Matrix::zeros(n, d);
        for col in 0..d {
            k[(i - 1, col)] = T::one();
        }
        ops.push(k);
    }
    KrausFamily::new(d, n, ops)
}

/// `d(d+m)`: the unscaled family times `1/√(d(d+m))` is normalized.
pub fn paper_normalization(d: usize, m: usize) -> usize {
    d * (d + m)
}

/// Normalized `(d, d+m)` family with marginals `(Z, I_{d+m}/(d+m))`.
pub fn paper_family<T: FloatScalar>(d: usize, m: usize) -> Result<KrausFamily<T>> {
    let f = paper_family_unscaled::<T>(d, m)?;
    Ok(f.scaled(&T::sqrt_of(1.0 / paper_normalization(d, m) as f64)))
}

/// Marginals of the unscaled family divided by `d(d+m)`; exact for rationals.
pub fn paper_family_marginals_exact<T: Scalar>(d: usize, m: usize) -> Result<MarginalPair<T>> {
    let f = paper_family_unscaled::<T>(d, m)?;
    let s = T::from_ratio(1, paper_normalization(d, m) as i64);
    let raw = f.marginals();
    Ok(MarginalPair {
        rho1: raw.rho1.scale(&s),
        rho2: raw.rho2.scale(&s),
    })
}

/// Declared targets `(Z, I/(d+m))` with `Z = p·I/d + (1−p)·J/d`,
/// `p = (d+1)/(d+m)`, built from the formula rather than from the operators.
pub fn paper_targets<T: Scalar>(d: usize, m: usize) -> Result<MarginalPair<T>> {
    check_dm(d, m)?;
    let (d_i, n_i) = (d as i64, (d + m) as i64);
    // p/d = (d+1)/(d(d+m)), (1-p)/d = (m-1)/(d(d+m))
    let diag_part = T::from_ratio(d_i + 1, d_i * n_i);
    let ones_part = T::from_ratio(m as i64 - 1, d_i * n_i);
    let z = &Matrix::identity(d).scale(&diag_part) + &Matrix::ones(d).scale(&ones_part);
    Ok(MarginalPair {
        rho1: z,
        rho2: Matrix::identity(d + m).scale(&T::from_ratio(1, n_i)),
    })
}

fn vec_outer<T: Scalar>(x: &Matrix<T>) -> Matrix<T> {
    let v = x.vec_cols();
    Matrix::outer(&v, &v)
}

/// `0_{d+1} ⊕ I_{m−1}` and `J_{d+1} ⊕ I_{m−1}` on side `d+m`.
fn padded_blocks<T: Scalar>(d: usize, m: usize) -> (Matrix<T>, Matrix<T>) {
    let n = d + m;
    let tail = Matrix::from_fn(n, n, |i, j| if i == j && i > d { T::one() } else { T::zero() });
    let ones_head = Matrix::from_fn(n, n, |i, j| if i <= d && j <= d { T::one() } else { T::zero() });
    let j_plus_tail = &ones_head + &tail;
    (tail, j_plus_tail)
}

/// `Σ_{i,j=1}^{d+1} E_{i,j} ⊗ S^{mod(i−j−1, d+1)+1}`.
fn shift_sum<T: Scalar>(d: usize, m: usize) -> Result<Matrix<T>> {
    let n = d + m;
    let s = ShiftMatrix::<T>::new(d, m)?;
    let powers: Vec<Matrix<T>> = (0..=d + 1).map(|p| s.matrix.pow(p as u32)).collect();
    let mut out = Matrix::zeros(n * n, n * n);
    for i in 1..=d + 1 {
        for j in 1..=d + 1 {
            let exp = (i as i64 - j as i64 - 1).rem_euclid(d as i64 + 1) as usize + 1;
            out = &out + &Matrix::unit(n, n, i - 1, j - 1).kron(&powers[exp]);
        }
    }
    Ok(out)
}

/// The closed-form Gram `M` of the unscaled family, term by term as in its
/// simplified statement:
///
/// `I⊗I + |I⟩⟨I| + 2(d−1)|P⟩⟨P| + 2(d−1) P⊗P + (d−1)|Q⟩⟨Q| + (d−1) Q⊗Q
///  + 2(d−1) Σ E_{i,j} ⊗ S^{mod(i−j−1,d+1)+1}`
///
/// with `P = 0 ⊕ I_{m−1}`, `Q = J ⊕ I_{m−1}`. Indexing follows `(i−1)(d+m)+j`
/// for the block `(Vᵢ†Vⱼ, VⱼVᵢ†)` of the *un-adjointed* operators, i.e. it
/// is to be compared with `block_gram(paper_family_unscaled(d, m).adjoint())`.
/// This is an oracle; it is known to disagree with the direct Gram.
pub fn closed_form_gram<T: Scalar>(d: usize, m: usize) -> Result<Matrix<T>> {
    check_dm(d, m)?;
    let n = d + m;
    let c = |k: i64| T::from_int(k);
    let dm1 = d as i64 - 1;
    let id = Matrix::<T>::identity(n);
    let (p, q) = padded_blocks::<T>(d, m);
    let terms = [
        id.kron(&id),
        vec_outer(&id),
        vec_outer(&p).scale(&c(2 * dm1)),
        p.kron(&p).scale(&c(2 * dm1)),
        vec_outer(&q).scale(&c(dm1)),
        q.kron(&q).scale(&c(dm1)),
        shift_sum::<T>(d, m)?.scale(&c(2 * dm1)),
    ];
    Ok(Matrix::sum(n * n, n * n, terms.iter()))
}

/// The same Gram in its unsimplified sum form:
///
/// `Σ_{x,y} (E_{xx}⊗E_{yy} + E_{xy}⊗E_{xy}) + (d²−1) Σ_{r,s>d+1} (E_{rs}⊗E_{rs} + E_{rr}⊗E_{ss})
///  + 2(d−1) Σ_{i,j≤d+1} E_{ij}⊗S^{mod(i−j−1,d+1)+1}
///  + (d−1) Σ_{r>d+1} Σ_{i,j≤d+1} (E_{ir}⊗E_{jr} + E_{ri}⊗E_{rj} + E_{ij}⊗E_{rr} + E_{rr}⊗E_{ij})`.
pub fn closed_form_gram_expanded<T: Scalar>(d: usize, m: usize) -> Result<Matrix<T>> {
    check_dm(d, m)?;
    let n = d + m;
    let side = n * n;
    let e = |a: usize, b: usize| Matrix::<T>::unit(n, n, a - 1, b - 1);
    let dm1 = T::from_int(d as i64 - 1);
    let d2m1 = T::from_int((d * d) as i64 - 1);
    let mut out = Matrix::zeros(side, side);
    for x in 1..=n {
        for y in 1..=n {
            out = &out + &(&e(x, x).kron(&e(y, y)) + &e(x, y).kron(&e(x, y)));
        }
    }
    for r in d + 2..=n {
        for s in d + 2..=n {
            let t = &e(r, s).kron(&e(r, s)) + &e(r, r).kron(&e(s, s));
            out = &out + &t.scale(&d2m1);
        }
    }
    out = &out + &shift_sum::<T>(d, m)?.scale(&T::from_int(2 * (d as i64 - 1)));
    for r in d + 2..=n {
        for i in 1..=d + 1 {
            for j in 1..=d + 1 {
                let t = Matrix::sum(
                    side,
                    side,
                    [
                        &e(i, r).kron(&e(j, r)),
                        &e(r, i).kron(&e(r, j)),
                        &e(i, j).kron(&e(r, r)),
                        &e(r, r).kron(&e(i, j)),
                    ],
                );
                out = &out + &t.scale(&dm1);
            }
        }
    }
    Ok(out)
}

/// Partial transpose (over the input factor) of the normalized family's Choi
/// matrix, assembled from the stacked shift form:
///
/// `(1/(d(d+m))) · ([B†B]_{s,r ≤ d} + J_d ⊗ (0 ⊕ I_{m−1}))`,
/// `B = [S⁰, S¹, …, S^{d−1}]`, where `S⁰` is the projector onto the shift's
/// support. Block `(s, r)` of `B†B` is `S^{r−s}`.
pub fn closed_form_choi_pt<T: Scalar>(d: usize, m: usize) -> Result<Matrix<T>> {
    check_dm(d, m)?;
    let n = d + m;
    let s = ShiftMatrix::<T>::new(d, m)?;
    let blocks: Vec<Matrix<T>> = (0..d).map(|p| s.power(p)).collect();
    let b = Matrix::from_fn(n, d * n, |row, col| blocks[col / n][(row, col % n)].clone());
    let stacked = b.adjoint().matmul(&b);
    let (tail, _) = padded_blocks::<T>(d, m);
    let total = &stacked + &Matrix::ones(d).kron(&tail);
    Ok(total.scale(&T::from_ratio(1, paper_normalization(d, m) as i64)))
}

/// `σ = diag(1/3, 2/3)`.
pub fn sigma<T: Scalar>() -> Matrix<T> {
    Matrix::diagonal(&[T::from_ratio(1, 3), T::from_ratio(2, 3)])
}

/// Two Hermitian operators on ℂ² with marginals `(σ, σ)`:
/// `A₁ = diag(1/√3, 1)/√2`, `A₂ = antidiag(1/√3, 1/√3)/√2`.
pub fn sigma_rank2<T: FloatScalar>() -> KrausFamily<T> {
    let r3 = T::sqrt_of(1.0 / 3.0);
    let z = T::zero;
    let a1 = Matrix::diagonal(&[r3.clone(), T::one()]);
    let a2 = Matrix::from_rows(vec![vec![z(), r3.clone()], vec![r3, z()]]).expect("2x2");
    let half = T::sqrt_of(0.5);
    KrausFamily::new(2, 2, vec![a1.scale(&half), a2.scale(&half)]).expect("valid shapes")
}

/// Four operators on ℂ³ with marginals `(I/3, I/3)`:
/// `B₁ = E₁₁, B₂ = E₁₂ + √2E₂₃, B₃ = √2E₂₁ + √3E₃₂, B₄ = E₃₁ + √2E₁₃`, each
/// scaled by `1/(2√3)`.
pub fn ohno_rank4<T: FloatScalar>() -> KrausFamily<T> {
    let e = |i: usize, j: usize, w: f64| Matrix::<T>::unit(3, 3, i - 1, j - 1).scale(&T::sqrt_of(w));
    let ops = [
        e(1, 1, 1.0),
        &e(1, 2, 1.0) + &e(2, 3, 2.0),
        &e(2, 1, 2.0) + &e(3, 2, 3.0),
        &e(3, 1, 1.0) + &e(1, 3, 2.0),
    ];
    let s = T::sqrt_of(1.0 / 12.0);
    KrausFamily::new(3, 3, ops.iter().map(|b| b.scale(&s)).collect()).expect("valid shapes")
}

/// `d` Hermitian operators on ℂᵈ with marginals `(I/d, I/d)`:
/// `V₁ = √((d−2)/(d−1)) Σ_{j≥2} E_{jj}`, `V_k = (E_{1k} + E_{k1})/√(d−1)`,
/// all scaled by `1/√d`.
pub fn ohno_rank_d<T: FloatScalar>(d: usize) -> Result<KrausFamily<T>> {
    if d < 3 {
        return Err(Error::InvalidParameter(format!("ohno_rank_d needs d >= 3, got {d}")));
    }
    let df = d as f64;
    let norm = T::sqrt_of(1.0 / df);
    let mut ops = Vec::with_capacity(d);
    let w1 = T::sqrt_of((df - 2.0) / (df - 1.0));
    ops.push(Matrix::from_fn(d, d, |i, j| if i == j && i > 0 { w1.clone() } else { T::zero() }));
    let wk = T::sqrt_of(1.0 / (df - 1.0));
    for k in 1..d {
        let v = &Matrix::<T>::unit(d, d, 0, k) + &Matrix::unit(d, d, k, 0);
        ops.push(v.scale(&wk));
    }
    KrausFamily::new(d, d, ops.iter().map(|v| v.scale(&norm)).collect())
}

/// `D = σ ⊗ I₃/3 = (1/9) diag(I₃, 2I₃)`.
pub fn d_matrix<T: Scalar>() -> Matrix<T> {
    let ninth = T::from_ratio(1, 9);
    let one = Matrix::<T>::identity(3).scale(&ninth);
    let two = Matrix::<T>::identity(3).scale(&(ninth.clone() + ninth));
    one.direct_sum(&two)
}

/// `σ-rank-2 ⊗ Ohno rank-4`: eight operators on ℂ⁶ with marginals `(D, D)`.
pub fn rank8_66<T: FloatScalar>() -> KrausFamily<T> {
    sigma_rank2::<T>().tensor(&ohno_rank4())
}

/// Tensor-product hypothesis on the first factor: a minimal Kraus
/// decomposition by Hermitian operators.
pub fn check_hermitian_minimal<T: Scalar>(f: &KrausFamily<T>) -> Result<()> {
    if !f.hermitian_kraus() {
        return Err(Error::InvalidParameter("first tensor factor has non-Hermitian Kraus operators".into()));
    }
    if !f.is_minimal() {
        return Err(Error::InvalidParameter("first tensor factor is not a minimal Kraus decomposition".into()));
    }
    Ok(())
}

/// `ohno_rank_d(k) ⊗ rank8_66`: `8k` operators on ℂ^{6k}, factor order
/// `(k, 2, 3)`.
pub fn rank8k_6k<T: FloatScalar>(k: usize) -> Result<KrausFamily<T>> {
    if k < 3 {
        return Err(Error::InvalidParameter(format!("rank8k_6k needs k >= 3, got {k}")));
    }
    let first = ohno_rank_d::<T>(k)?;
    check_hermitian_minimal(&first)?;
    Ok(first.tensor(&rank8_66()))
}

/// `D₁ = σ ⊗ I₃/3 ⊗ I_k/k`, in the `(2, 3, k)` factor order.
pub fn d1_matrix<T: Scalar>(k: usize) -> Matrix<T> {
    let mixed = Matrix::<T>::identity(k).scale(&T::from_ratio(1, k as i64));
    d_matrix::<T>().kron(&mixed)
}

/// Reorder an operator on `ℂᵏ ⊗ ℂ² ⊗ ℂ³` (the `rank8k_6k` layout) into the
/// `ℂ² ⊗ ℂ³ ⊗ ℂᵏ` layout of [`d1_matrix`].
pub fn k23_to_23k<T: Scalar>(m: &Matrix<T>, k: usize) -> Result<Matrix<T>> {
    m.permute_subsystems(&[k, 2, 3], &[1, 2, 0])
}

/// The named families exposed on the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NamedFamily {
    Paper { d: usize, m: usize },
    Sigma2,
    Ohno4,
    OhnoD { d: usize },
    Rank8x66,
    Rank8k { k: usize },
}

impl NamedFamily {
    pub const NAMES: [&'static str; 6] = ["paper", "sigma2", "ohno4", "ohno-d", "rank8-66", "rank8k"];

    pub fn parse(name: &str, params: &[usize]) -> Result<Self> {
        let arity = |n: usize| {
            if params.len() == n {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!(
                    "family {name:?} takes {n} parameter(s), got {}",
                    params.len()
                )))
            }
        };
        let fam = match name {
            "paper" => {
                arity(2)?;
                check_dm(params[0], params[1])?;
                NamedFamily::Paper { d: params[0], m: params[1] }
            }
            "sigma2" => {
                arity(0)?;
                NamedFamily::Sigma2
            }
            "ohno4" => {
                arity(0)?;
                NamedFamily::Ohno4
            }
            "ohno-d" => {
                arity(1)?;
                if params[0] < 3 {
                    return Err(Error::InvalidParameter("ohno-d needs d >= 3".into()));
                }
                NamedFamily::OhnoD { d: params[0] }
            }
            "rank8-66" => {
                arity(0)?;
                NamedFamily::Rank8x66
            }
            "rank8k" => {
                arity(1)?;
                if params[0] < 3 {
                    return Err(Error::InvalidParameter("rank8k needs k >= 3".into()));
                }
                NamedFamily::Rank8k { k: params[0] }
            }
            other => {
                return Err(Error::InvalidParameter(format!(
                    "unknown family {other:?}; expected one of {:?}",
                    Self::NAMES
                )))
            }
        };
        Ok(fam)
    }

    /// `(d_in, d_out)`.
    pub fn dims(&self) -> (usize, usize) {
        match *self {
            NamedFamily::Paper { d, m } => (d, d + m),
            NamedFamily::Sigma2 => (2, 2),
            NamedFamily::Ohno4 => (3, 3),
            NamedFamily::OhnoD { d } => (d, d),
            NamedFamily::Rank8x66 => (6, 6),
            NamedFamily::Rank8k { k } => (6 * k, 6 * k),
        }
    }

    /// Number of Kraus operators, which is also the claimed Choi rank.
    pub fn kraus_count(&self) -> usize {
        match *self {
            NamedFamily::Paper { d, m } => d + m,
            NamedFamily::Sigma2 => 2,
            NamedFamily::Ohno4 => 4,
            NamedFamily::OhnoD { d } => d,
            NamedFamily::Rank8x66 => 8,
            NamedFamily::Rank8k { k } => 8 * k,
        }
    }

    pub fn gram_side(&self) -> usize {
        self.kraus_count().pow(2)
    }

    /// Only the `(d, d+m)` family is claimed separable.
    pub fn claims_separable(&self) -> bool {
        matches!(self, NamedFamily::Paper { .. })
    }

    pub fn build<T: FloatScalar>(&self) -> Result<KrausFamily<T>> {
        match *self {
            NamedFamily::Paper { d, m } => paper_family(d, m),
            NamedFamily::Sigma2 => Ok(sigma_rank2()),
            NamedFamily::Ohno4 => Ok(ohno_rank4()),
            NamedFamily::OhnoD { d } => ohno_rank_d(d),
            NamedFamily::Rank8x66 => Ok(rank8_66()),
            NamedFamily::Rank8k { k } => rank8k_6k(k),
        }
    }

    /// Rational unscaled form, for families whose entries are rational up to
    /// a global scale.
    pub fn build_exact<T: Scalar>(&self) -> Option<KrausFamily<T>> {
        match *self {
            NamedFamily::Paper { d, m } => paper_family_unscaled(d, m).ok(),
            _ => None,
        }
    }

    /// The marginals the family is declared to reproduce.
    pub fn targets<T: Scalar>(&self) -> Result<MarginalPair<T>> {
        let both = |rho: Matrix<T>| MarginalPair { rho1: rho.clone(), rho2: rho };
        Ok(match *self {
            NamedFamily::Paper { d, m } => paper_targets(d, m)?,
            NamedFamily::Sigma2 => both(sigma()),
            NamedFamily::Ohno4 => MarginalPair::maximally_mixed(3, 3),
            NamedFamily::OhnoD { d } => MarginalPair::maximally_mixed(d, d),
            NamedFamily::Rank8x66 => both(d_matrix()),
            NamedFamily::Rank8k { k } => {
                MarginalPair::<T>::maximally_mixed(k, k).kron(&both(d_matrix()))
            }
        })
    }
}

impl fmt::Display for NamedFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            NamedFamily::Paper { d, m } => write!(f, "paper({d},{m})"),
            NamedFamily::Sigma2 => write!(f, "sigma2"),
            NamedFamily::Ohno4 => write!(f, "ohno4"),
            NamedFamily::OhnoD { d } => write!(f, "ohno-d({d})"),
            NamedFamily::Rank8x66 => write!(f, "rank8-66"),
            NamedFamily::Rank8k { k } => write!(f, "rank8k({k})"),
        }
    }
}
