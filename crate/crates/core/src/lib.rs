//! Extremal completely positive maps with fixed marginals.
//!
//! The algebra (matrices, Kraus families, Choi matrices, block Grams, family
//! constructors) is generic over [`Scalar`]; eigenvalue and singular-value
//! work runs in `f64`/`Complex64`. Rational families get exact ranks.

pub mod channels;
pub mod commands;
pub mod error;
pub mod extremality;
pub mod families;
pub mod linalg;
pub mod reductions;
pub mod sampling;
pub mod scalar;
pub mod separability;

pub use channels::{KrausFamily, MarginalPair};
pub use error::{Error, Result};
pub use extremality::{is_extremal, is_extremal_with, parthasarathy_bound, ExtremalityCertificate};
pub use families::NamedFamily;
pub use linalg::{Matrix, RankMode, RankResult, Subsystem};
pub use reductions::{adjoint_duality_check, diagonalize_marginals, restrict_to_support, CanonicalizationRecord};
pub use scalar::{FloatScalar, Scalar};
pub use separability::{ppt, separability_verdict, Conclusion, SeparabilityVerdict};

pub use num_complex::Complex64;
pub use num_rational::BigRational as Rational;

pub type CMatrix = Matrix<Complex64>;
pub type RMatrix = Matrix<f64>;
pub type RationalMatrix = Matrix<Rational>;
pub type CKrausFamily = KrausFamily<Complex64>;
pub type RKrausFamily = KrausFamily<f64>;
pub type RationalKrausFamily = KrausFamily<Rational>;
