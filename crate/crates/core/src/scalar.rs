//! Scalar abstraction shared by every matrix and Kraus-family routine.
//!
//! The algebraic layer (products, Kronecker products, partial traces, Choi
//! matrices, block Grams) is written once against [`Scalar`] and instantiated
//! for `f32`, `f64`, their complex counterparts, and exact [`BigRational`].
//! Spectral routines (eigenvalues, singular values) always run in `f64`
//! complex arithmetic and only consult [`Scalar::epsilon`] for thresholds.

use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

/// A field element with complex conjugation.
pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
    + 'static
{
    /// True when arithmetic is exact (rational), so rank can be decided by elimination.
    const EXACT: bool;

    fn conj(&self) -> Self;

    /// The rational number `num / den`, rounded for floating-point types.
    fn from_ratio(num: i64, den: i64) -> Self;

    fn to_complex64(&self) -> Complex64;

    /// Exact rational value, if this scalar is a real rational.
    fn to_rational(&self) -> Option<BigRational>;

    /// Unit roundoff of the underlying representation (f64's for exact types).
    fn epsilon() -> f64;

    fn modulus(&self) -> f64 {
        self.to_complex64().norm()
    }

    fn from_int(n: i64) -> Self {
        Self::from_ratio(n, 1)
    }
}

/// Floating-point scalars: closed under square roots of positive reals.
pub trait FloatScalar: Scalar {
    fn from_f64(x: f64) -> Self;

    fn sqrt_of(x: f64) -> Self {
        Self::from_f64(x.sqrt())
    }
}

macro_rules! impl_real_float {
    ($t:ty) => {
        impl Scalar for $t {
            const EXACT: bool = false;

            fn conj(&self) -> Self {
                *self
            }

            fn from_ratio(num: i64, den: i64) -> Self {
                (num as f64 / den as f64) as $t
            }

            fn to_complex64(&self) -> Complex64 {
                Complex64::new(*self as f64, 0.0)
            }

            fn to_rational(&self) -> Option<BigRational> {
                None
            }

            fn epsilon() -> f64 {
                <$t>::EPSILON as f64
            }
        }

        impl FloatScalar for $t {
            fn from_f64(x: f64) -> Self {
                x as $t
            }
        }
    };
}

impl_real_float!(f32);
impl_real_float!(f64);

macro_rules! impl_complex_float {
    ($t:ty) => {
        impl Scalar for Complex<$t> {
            const EXACT: bool = false;

            fn conj(&self) -> Self {
                Complex::conj(self)
            }

            fn from_ratio(num: i64, den: i64) -> Self {
                Complex::new((num as f64 / den as f64) as $t, 0.0)
            }

            fn to_complex64(&self) -> Complex64 {
                Complex64::new(self.re as f64, self.im as f64)
            }

            fn to_rational(&self) -> Option<BigRational> {
                None
            }

            fn epsilon() -> f64 {
                <$t>::EPSILON as f64
            }
        }

        impl FloatScalar for Complex<$t> {
            fn from_f64(x: f64) -> Self {
                Complex::new(x as $t, 0.0)
            }
        }
    };
}

impl_complex_float!(f32);
impl_complex_float!(f64);

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn conj(&self) -> Self {
        self.clone()
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn to_complex64(&self) -> Complex64 {
        Complex64::new(self.to_f64().unwrap_or(f64::NAN), 0.0)
    }

    fn to_rational(&self) -> Option<BigRational> {
        Some(self.clone())
    }

    fn epsilon() -> f64 {
        f64::EPSILON
    }

    fn modulus(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN).abs()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conjugation_flips_imaginary_part_only() {
        let z = Complex64::new(1.5, -2.0);
        assert_eq!(Scalar::conj(&z), Complex64::new(1.5, 2.0));
        assert_eq!(Scalar::conj(&3.0f64), 3.0);
        let q = BigRational::from_ratio(-2, 7);
        assert_eq!(Scalar::conj(&q), q);
    }

    #[test]
    fn ratios_are_exact_for_rationals() {
        let q = BigRational::from_ratio(1, 15) * BigRational::from_int(15);
        assert!(q.is_one());
        assert!((f64::from_ratio(1, 3) - 1.0 / 3.0).abs() < 1e-16);
        const { assert!(BigRational::EXACT && !f64::EXACT) };
    }

    #[test]
    fn float_epsilons_follow_precision() {
        assert_eq!(<f32 as Scalar>::epsilon(), f32::EPSILON as f64);
        assert_eq!(<Complex64 as Scalar>::epsilon(), f64::EPSILON);
    }
}
