//! Dense matrices over a generic scalar: tensor structure, partial trace and
//! transpose, spectra, and dual-mode (exact / numerical) rank.

pub mod exact;
pub mod json;
mod matrix;
pub mod rank;
pub mod spectral;

pub use json::{parse_rational, JsonScalar};
pub use matrix::{Matrix, Subsystem};
pub use rank::{hermitian_rank, rank, RankMode, RankResult};
pub use spectral::{hermitian_eigen, hermitian_eigenvalues, min_eigenvalue, singular_values};
