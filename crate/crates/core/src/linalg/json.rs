//! Matrix JSON: `{"rows": n, "cols": m, "entries": [[re, im], ...]}`, row-major.
//! Exact matrices write entries as `"p/q"` strings and accept either form.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::matrix::Matrix;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum EntryRecord {
    Pair([f64; 2]),
    Text(String),
}

#[derive(Serialize, Deserialize)]
struct MatrixRecord {
    rows: usize,
    cols: usize,
    entries: Vec<EntryRecord>,
}

/// Scalars with a JSON entry encoding.
pub trait JsonScalar: Scalar {
    fn encode(&self) -> EntryValue;
    fn decode(entry: EntryValue) -> Result<Self>;
}

/// One decoded JSON entry.
#[derive(Clone, Debug, PartialEq)]
pub enum EntryValue {
    Pair(f64, f64),
    Text(String),
}

/// Parse `"p/q"` or `"p"` into an exact rational.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let bad = || Error::Parse(format!("not a rational: {text:?}"));
    let int = |s: &str| s.trim().parse::<BigInt>().map_err(|_| bad());
    match text.split_once('/') {
        Some((p, q)) => {
            let den = int(q)?;
            if den == BigInt::from(0) {
                return Err(bad());
            }
            Ok(BigRational::new(int(p)?, den))
        }
        None => Ok(BigRational::from_integer(int(text)?)),
    }
}

impl JsonScalar for Complex64 {
    fn encode(&self) -> EntryValue {
        EntryValue::Pair(self.re, self.im)
    }

    fn decode(entry: EntryValue) -> Result<Self> {
        match entry {
            EntryValue::Pair(re, im) => Ok(Complex64::new(re, im)),
            EntryValue::Text(t) => Err(Error::Parse(format!(
                "complex entries must be [re, im] pairs, got {t:?}"
            ))),
        }
    }
}

impl JsonScalar for BigRational {
    fn encode(&self) -> EntryValue {
        EntryValue::Text(format!("{}/{}", self.numer(), self.denom()))
    }

    fn decode(entry: EntryValue) -> Result<Self> {
        match entry {
            EntryValue::Text(t) => parse_rational(&t),
            EntryValue::Pair(re, im) => {
                if im != 0.0 {
                    return Err(Error::NotRational);
                }
                BigRational::from_float(re).ok_or(Error::NonFinite)
            }
        }
    }
}

impl<T: JsonScalar> Serialize for Matrix<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let entries = self
            .entries()
            .iter()
            .map(|x| match x.encode() {
                EntryValue::Pair(re, im) => EntryRecord::Pair([re, im]),
                EntryValue::Text(t) => EntryRecord::Text(t),
            })
            .collect();
        MatrixRecord {
            rows: self.rows(),
            cols: self.cols(),
            entries,
        }
        .serialize(serializer)
    }
}

impl<'de, T: JsonScalar> Deserialize<'de> for Matrix<T> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let rec = MatrixRecord::deserialize(deserializer)?;
        let entries = rec
            .entries
            .into_iter()
            .map(|e| {
                T::decode(match e {
                    EntryRecord::Pair([re, im]) => EntryValue::Pair(re, im),
                    EntryRecord::Text(t) => EntryValue::Text(t),
                })
            })
            .collect::<Result<Vec<T>>>()
            .map_err(D::Error::custom)?;
        Matrix::from_vec(rec.rows, rec.cols, entries).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn complex_matrix_layout() {
        let m = Matrix::from_rows(vec![vec![Complex64::new(1.0, 2.0), Complex64::new(0.0, -1.0)]]).unwrap();
        let json = serde_json::to_value(&m).unwrap();
        assert_eq!(json, serde_json::json!({"rows": 1, "cols": 2, "entries": [[1.0, 2.0], [0.0, -1.0]]}));
    }

    #[test]
    fn exact_matrix_accepts_strings_and_pairs() {
        let m: Matrix<BigRational> =
            serde_json::from_str(r#"{"rows": 1, "cols": 3, "entries": ["1/3", [0.5, 0.0], "-2"]}"#).unwrap();
        assert_eq!(m.entries()[0], BigRational::from_ratio(1, 3));
        assert_eq!(m.entries()[1], BigRational::from_ratio(1, 2));
        assert_eq!(m.entries()[2], BigRational::from_int(-2));
        assert_eq!(serde_json::to_value(&m).unwrap()["entries"][0], "1/3");
    }

    #[test]
    fn malformed_inputs_are_rejected() {
        assert!(serde_json::from_str::<Matrix<Complex64>>(r#"{"rows": 2, "cols": 2, "entries": [[1,0]]}"#).is_err());
        assert!(serde_json::from_str::<Matrix<Complex64>>(r#"{"rows": 1, "cols": 1, "entries": ["1/2"]}"#).is_err());
        assert!(serde_json::from_str::<Matrix<BigRational>>(r#"{"rows": 1, "cols": 1, "entries": [[1, 1]]}"#).is_err());
        assert!(serde_json::from_str::<Matrix<BigRational>>(r#"{"rows": 1, "cols": 1, "entries": ["1/0"]}"#).is_err());
    }

    proptest! {
        #[test]
        fn json_round_trip(rows in 1usize..4, cols in 1usize..4, seed in proptest::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 16)) {
            let m = Matrix::from_fn(rows, cols, |i, j| {
                let (re, im) = seed[i * cols + j];
                Complex64::new(re, im)
            });
            let back: Matrix<Complex64> = serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
            prop_assert_eq!(back, m);
        }

        #[test]
        fn rational_json_round_trip(nums in proptest::collection::vec((-50i64..50, 1i64..30), 6)) {
            let m = Matrix::from_fn(2, 3, |i, j| {
                let (p, q) = nums[i * 3 + j];
                BigRational::from_ratio(p, q)
            });
            let back: Matrix<BigRational> = serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
            prop_assert_eq!(back, m);
        }
    }
}
