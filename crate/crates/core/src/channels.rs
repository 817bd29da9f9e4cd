//! Kraus families `Φ(X) = Σᵢ Kᵢ X Kᵢ†` and their marginals and Choi matrices.
//!
//! Operators are stored output × input (`d_out × d_in`). With that shape the
//! marginals are `ρ₁ = (Σ Kᵢ†Kᵢ)ᵀ` on the input space and `ρ₂ = Σ KᵢKᵢ†` on
//! the output space, and the Choi matrix `C = Σ_{r,s} E_{r,s} ⊗ Φ(E_{r,s})`
//! (input factor first) satisfies `tr₂ C = ρ₁`, `tr₁ C = ρ₂`.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_rank, rank, JsonScalar, Matrix, RankMode, RankResult};
use crate::scalar::Scalar;

/// Tolerance for the Hermitian-operator flag and marginal validity checks.
pub const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct KrausFamily<T> {
    d_in: usize,
    d_out: usize,
    ops: Vec<Matrix<T>>,
    hermitian_kraus: bool,
}

/// The two marginals `(ρ₁, ρ₂)` a family reproduces.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound(serialize = "T: JsonScalar"))]
pub struct MarginalPair<T> {
    pub rho1: Matrix<T>,
    pub rho2: Matrix<T>,
}

impl<T: Scalar> MarginalPair<T> {
    /// Largest entrywise deviation of either marginal from `other`'s.
    pub fn max_deviation(&self, other: &Self) -> f64 {
        if self.rho1.rows() != other.rho1.rows() || self.rho2.rows() != other.rho2.rows() {
            return f64::INFINITY;
        }
        self.rho1.max_abs_diff(&other.rho1).max(self.rho2.max_abs_diff(&other.rho2))
    }

    /// Check both marginals are Hermitian, positive semidefinite and of unit trace.
    pub fn validate(&self, tol: f64) -> Result<()> {
        for (name, rho) in [("rho1", &self.rho1), ("rho2", &self.rho2)] {
            let dev = rho.hermitian_deviation();
            if dev > tol {
                return Err(Error::NotHermitian(dev));
            }
            let tr = rho.trace().to_complex64();
            if (tr - 1.0).norm() > tol {
                return Err(Error::InvalidParameter(format!("{name} has trace {tr}")));
            }
            let min = crate::linalg::min_eigenvalue(rho)?;
            if min < -tol {
                return Err(Error::InvalidParameter(format!(
                    "{name} has negative eigenvalue {min:e}"
                )));
            }
        }
        Ok(())
    }
}

impl<T: Scalar> KrausFamily<T> {
    pub fn new(d_in: usize, d_out: usize, ops: Vec<Matrix<T>>) -> Result<Self> {
        if d_in == 0 || d_out == 0 {
            return Err(Error::InvalidParameter("dimensions must be positive".into()));
        }
        if ops.is_empty() {
            return Err(Error::InvalidParameter("a Kraus family needs at least one operator".into()));
        }
        if let Some(k) = ops.iter().find(|k| k.rows() != d_out || k.cols() != d_in) {
            return Err(Error::DimensionMismatch(format!(
                "Kraus operator is {}x{}, expected {d_out}x{d_in} (output x input)",
                k.rows(),
                k.cols()
            )));
        }
        let hermitian_kraus = d_in == d_out && ops.iter().all(|k| k.is_hermitian(HERMITIAN_TOL));
        Ok(Self {
            d_in,
            d_out,
            ops,
            hermitian_kraus,
        })
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    pub fn ops(&self) -> &[Matrix<T>] {
        &self.ops
    }

    /// Number of Kraus operators.
    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn hermitian_kraus(&self) -> bool {
        self.hermitian_kraus
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> KrausFamily<U> {
        let ops = self.ops.iter().map(|k| k.map(&f)).collect();
        KrausFamily::new(self.d_in, self.d_out, ops).expect("shape-preserving map")
    }

    pub fn to_complex64(&self) -> KrausFamily<num_complex::Complex64> {
        self.map(Scalar::to_complex64)
    }

    /// Multiply every operator by `factor`.
    pub fn scaled(&self, factor: &T) -> Self {
        self.map(|x| x.clone() * factor.clone())
    }

    /// `tr(Σ Kᵢ†Kᵢ)`; equal to one for normalized families.
    pub fn total_weight(&self) -> T {
        self.ops
            .iter()
            .fold(T::zero(), |acc, k| acc + k.inner(k))
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.total_weight().to_complex64() - 1.0).norm() <= tol
    }

    /// `Φ(X) = Σᵢ Kᵢ X Kᵢ†`.
    pub fn apply(&self, x: &Matrix<T>) -> Result<Matrix<T>> {
        if x.rows() != self.d_in || x.cols() != self.d_in {
            return Err(Error::DimensionMismatch(format!(
                "input is {}x{}, channel acts on {}x{}",
                x.rows(),
                x.cols(),
                self.d_in,
                self.d_in
            )));
        }
        Ok(self.ops.iter().fold(Matrix::zeros(self.d_out, self.d_out), |acc, k| {
            &acc + &k.matmul(x).matmul(&k.adjoint())
        }))
    }

    /// `Σ Kᵢ†Kᵢ` (equals `ρ₁ᵀ`).
    pub fn input_weight(&self) -> Matrix<T> {
        self.ops.iter().fold(Matrix::zeros(self.d_in, self.d_in), |acc, k| {
            &acc + &k.adjoint().matmul(k)
        })
    }

    /// `Σ KᵢKᵢ†` (equals `ρ₂ = Φ(I)`).
    pub fn output_weight(&self) -> Matrix<T> {
        self.ops.iter().fold(Matrix::zeros(self.d_out, self.d_out), |acc, k| {
            &acc + &k.matmul(&k.adjoint())
        })
    }

    /// `(ρ₁, ρ₂) = ((Σ Kᵢ†Kᵢ)ᵀ, Σ KᵢKᵢ†)`, as computed.
    pub fn marginals(&self) -> MarginalPair<T> {
        MarginalPair {
            rho1: self.input_weight().transpose(),
            rho2: self.output_weight(),
        }
    }

    /// Choi matrix `Σ_{r,s} E_{r,s} ⊗ Φ(E_{r,s})` of side `d_in · d_out`.
    pub fn choi(&self) -> Matrix<T> {
        let (d1, d2) = (self.d_in, self.d_out);
        let n = d1 * d2;
        // C[(r,a),(s,b)] = Σᵢ Kᵢ[a,r] · conj(Kᵢ[b,s])
        let columns: Vec<Vec<T>> = self.ops.iter().map(|k| {
            (0..n).map(|idx| k[(idx % d2, idx / d2)].clone()).collect()
        }).collect();
        Matrix::from_fn(n, n, |row, col| {
            columns.iter().fold(T::zero(), |acc, v| {
                if v[row].is_zero() || v[col].is_zero() {
                    acc
                } else {
                    acc + v[row].clone() * v[col].conj()
                }
            })
        })
    }

    /// Matrix whose columns are the column-stacked Kraus operators.
    pub fn kraus_matrix(&self) -> Matrix<T> {
        let vecs: Vec<Vec<T>> = self.ops.iter().map(Matrix::vec_cols).collect();
        Matrix::from_fn(self.d_in * self.d_out, self.ops.len(), |i, j| vecs[j][i].clone())
    }

    /// Rank of the Choi matrix (mode chosen from the scalar type).
    pub fn choi_rank(&self) -> RankResult {
        hermitian_rank(&self.choi(), RankMode::auto::<T>(), None).expect("finite Kraus entries")
    }

    /// The adjoint map `Φ*(X) = Σ Kᵢ† X Kᵢ`.
    pub fn adjoint(&self) -> Self {
        Self::new(self.d_out, self.d_in, self.ops.iter().map(Matrix::adjoint).collect())
            .expect("adjoint preserves validity")
    }

    /// Kraus family of `Φ ⊗ Ψ`: operators `Fᵢ ⊗ Gⱼ` in lexicographic `(i, j)` order.
    pub fn tensor(&self, other: &Self) -> Self {
        let ops = self
            .ops
            .iter()
            .flat_map(|f| other.ops.iter().map(move |g| f.kron(g)))
            .collect();
        let mut out = Self::new(self.d_in * other.d_in, self.d_out * other.d_out, ops)
            .expect("tensor preserves validity");
        out.hermitian_kraus = self.hermitian_kraus && other.hermitian_kraus;
        out
    }

    /// True iff the operators are linearly independent.
    pub fn is_minimal(&self) -> bool {
        let r = rank(&self.kraus_matrix(), RankMode::auto::<T>(), None).expect("finite Kraus entries");
        r.rank == self.ops.len()
    }
}

impl<T: Scalar> MarginalPair<T> {
    /// Maximally mixed pair `(I/d₁, I/d₂)`.
    pub fn maximally_mixed(d1: usize, d2: usize) -> Self {
        let mixed = |d: usize| Matrix::identity(d).scale(&T::from_ratio(1, d as i64));
        Self {
            rho1: mixed(d1),
            rho2: mixed(d2),
        }
    }

    /// `(ρ₂ᵀ, ρ₁ᵀ)`: the marginals the adjoint family must reproduce.
    pub fn swapped_for_adjoint(&self) -> Self {
        Self {
            rho1: self.rho2.transpose(),
            rho2: self.rho1.transpose(),
        }
    }

    pub fn kron(&self, other: &Self) -> Self {
        Self {
            rho1: self.rho1.kron(&other.rho1),
            rho2: self.rho2.kron(&other.rho2),
        }
    }

    /// True when `ρ₂` is a multiple of the identity.
    pub fn output_is_maximally_mixed(&self, tol: f64) -> bool {
        let d = self.rho2.rows();
        let level = self.rho2.trace().to_complex64() / d as f64;
        self.rho2.off_diagonal_norm() <= tol
            && (0..d).all(|i| (self.rho2[(i, i)].to_complex64() - level).norm() <= tol)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(bound(serialize = "T: JsonScalar", deserialize = "T: JsonScalar"))]
struct FamilyRecord<T> {
    d_in: usize,
    d_out: usize,
    ops: Vec<Matrix<T>>,
    #[serde(default)]
    hermitian_kraus: bool,
}

impl<T: JsonScalar> Serialize for KrausFamily<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        FamilyRecord {
            d_in: self.d_in,
            d_out: self.d_out,
            ops: self.ops.clone(),
            hermitian_kraus: self.hermitian_kraus,
        }
        .serialize(serializer)
    }
}

impl<'de, T: JsonScalar> Deserialize<'de> for KrausFamily<T> {
    /// The `hermitian_kraus` flag is recomputed from the operators.
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let rec = FamilyRecord::<T>::deserialize(deserializer)?;
        KrausFamily::new(rec.d_in, rec.d_out, rec.ops).map_err(D::Error::custom)
    }
}

impl<T: Scalar> KrausFamily<T> {
    /// Single-operator family `{K}`.
    pub fn single(k: Matrix<T>) -> Result<Self> {
        Self::new(k.cols(), k.rows(), vec![k])
    }
}
