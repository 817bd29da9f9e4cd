//! PPT test and the rank criterion for Choi states.
//!
//! A PPT state on `ℂ^{d₁} ⊗ ℂ^{d₂}` whose rank is at most `d₂` is separable,
//! so for Choi matrices PPT plus low Choi rank settles separability; a
//! negative partial transpose settles entanglement. Everything else is
//! reported as undetermined.

use serde::{Deserialize, Serialize};

use crate::channels::KrausFamily;
use crate::error::{Error, Result};
use crate::linalg::{hermitian_rank, min_eigenvalue, Matrix, RankMode, Subsystem};
use crate::scalar::Scalar;

/// Minimum partial-transpose eigenvalue still counted as PPT.
pub const PPT_TOL: f64 = 1e-10;

/// Below this (and above `-PPT_TOL`) a PPT verdict is flagged as borderline.
pub const PPT_BORDERLINE: f64 = 1e-12;

/// `(is PPT, min eigenvalue of C^{T₁})` for a matrix on `ℂ^{d₁} ⊗ ℂ^{d₂}`.
pub fn ppt<T: Scalar>(c: &Matrix<T>, d1: usize, d2: usize) -> Result<(bool, f64)> {
    if !c.is_square() || c.rows() != d1 * d2 {
        return Err(Error::DimensionMismatch(format!(
            "expected side {} for ({d1}, {d2}), got {}x{}",
            d1 * d2,
            c.rows(),
            c.cols()
        )));
    }
    let pt = c.partial_transpose(d1, d2, Subsystem::First)?;
    let min = min_eigenvalue(&pt)?;
    Ok((min >= -PPT_TOL, min))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Conclusion {
    Separable,
    Entangled,
    Undetermined,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparabilityVerdict {
    pub ppt: bool,
    pub min_pt_eigenvalue: f64,
    pub choi_rank: usize,
    pub d1: usize,
    pub d2: usize,
    /// `choi_rank ≤ d₂`.
    pub criterion_applicable: bool,
    pub conclusion: Conclusion,
    /// Entanglement-breaking rank as stated for separable channels with
    /// Kraus rank `d₂` and maximally mixed output; reported, not computed.
    pub eb_rank_note: Option<usize>,
    /// PPT holds only within the tolerance band `[-PPT_TOL, -PPT_BORDERLINE)`.
    pub borderline: bool,
}

impl SeparabilityVerdict {
    /// Type invariants relating the fields.
    pub fn is_consistent(&self) -> bool {
        let expected = match (self.ppt, self.criterion_applicable) {
            (false, _) => Conclusion::Entangled,
            (true, true) => Conclusion::Separable,
            (true, false) => Conclusion::Undetermined,
        };
        self.ppt == (self.min_pt_eigenvalue >= -PPT_TOL)
            && self.criterion_applicable == (self.choi_rank <= self.d2)
            && self.conclusion == expected
    }
}

/// Verdict from a Choi matrix directly. `rank_mode` picks exact or
/// numerical rank; `output_mixed` enables the EB-rank note.
pub fn verdict_from_choi<T: Scalar>(
    choi: &Matrix<T>,
    d1: usize,
    d2: usize,
    rank_mode: RankMode,
    output_mixed: bool,
) -> Result<SeparabilityVerdict> {
    let (is_ppt, min) = ppt(choi, d1, d2)?;
    let choi_rank = hermitian_rank(choi, rank_mode, None)?.rank;
    let criterion_applicable = choi_rank <= d2;
    let conclusion = if !is_ppt {
        Conclusion::Entangled
    } else if criterion_applicable {
        Conclusion::Separable
    } else {
        Conclusion::Undetermined
    };
    let eb_rank_note =
        (conclusion == Conclusion::Separable && choi_rank == d2 && output_mixed).then_some(choi_rank);
    Ok(SeparabilityVerdict {
        ppt: is_ppt,
        min_pt_eigenvalue: min,
        choi_rank,
        d1,
        d2,
        criterion_applicable,
        conclusion,
        eb_rank_note,
        borderline: is_ppt && min < -PPT_BORDERLINE,
    })
}

/// Separability verdict for the Choi state of a family.
pub fn separability_verdict<T: Scalar>(f: &KrausFamily<T>) -> Result<SeparabilityVerdict> {
    let mixed = f.marginals().output_is_maximally_mixed(crate::channels::HERMITIAN_TOL);
    verdict_from_choi(&f.choi(), f.d_in(), f.d_out(), RankMode::auto::<T>(), mixed)
}
