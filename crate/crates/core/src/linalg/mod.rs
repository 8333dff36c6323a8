//! Exact rational linear algebra.
//!
//! Everything here is dense and arbitrary precision. Ranks are computed by
//! fraction-free elimination; kernels, solves and quotient coordinates go
//! through a rational reduced row echelon form.

mod form;
mod matrix;
mod subspace;

pub use form::{bilinear, diagonalize, signature, Definiteness, Inertia};
pub use matrix::{RatMatrix, Rref};
pub use subspace::{image, induced_map, kernel, rank, QuotientSpace, Subspace};

use num_bigint::BigInt;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Arbitrary-precision rational with positive, reduced denominator.
pub type Rat = num_rational::BigRational;

pub fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn frac(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `"a/b"` or `"a"`.
pub fn parse_rat(s: &str) -> Result<Rat> {
    let t = s.trim();
    let parsed = match t.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| Error::BadRational(s.into()))?;
            let d: BigInt = d.trim().parse().map_err(|_| Error::BadRational(s.into()))?;
            if d == BigInt::from(0) {
                return Err(Error::BadRational(s.into()));
            }
            Rat::new(n, d)
        }
        None => Rat::from_integer(t.parse().map_err(|_| Error::BadRational(s.into()))?),
    };
    Ok(parsed)
}

pub fn rat_to_string(x: &Rat) -> String {
    x.to_string()
}

pub fn vec_to_strings(v: &[Rat]) -> Vec<String> {
    v.iter().map(rat_to_string).collect()
}

/// Entry of a JSON matrix: a rational string, or a bare integer for convenience.
#[derive(Deserialize)]
#[serde(untagged)]
enum RawEntry {
    Str(String),
    Int(i64),
}

impl RawEntry {
    fn to_rat(&self) -> Result<Rat> {
        match self {
            RawEntry::Str(s) => parse_rat(s),
            RawEntry::Int(i) => Ok(rat(*i)),
        }
    }
}

/// Rows of a matrix as they appear in JSON, before the shape is known.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RawMatrix(pub Vec<Vec<Rat>>);

impl RawMatrix {
    /// Shapes the rows into a `rows x cols` matrix. An empty array is accepted
    /// for any shape with a zero dimension.
    pub fn shaped(&self, rows: usize, cols: usize) -> Result<RatMatrix> {
        if self.0.is_empty() && (rows == 0 || cols == 0) {
            return Ok(RatMatrix::zeros(rows, cols));
        }
        if self.0.len() != rows {
            return Err(Error::DimensionMismatch(format!(
                "expected {} rows, found {}",
                rows,
                self.0.len()
            )));
        }
        RatMatrix::from_rows(self.0.clone(), cols)
    }
}

impl<'de> Deserialize<'de> for RawMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows: Vec<Vec<RawEntry>> = Vec::deserialize(d)?;
        let parsed = rows
            .iter()
            .map(|r| r.iter().map(RawEntry::to_rat).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()
            .map_err(D::Error::custom)?;
        Ok(RawMatrix(parsed))
    }
}

impl Serialize for RawMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<String>> = self.0.iter().map(|r| vec_to_strings(r)).collect();
        rows.serialize(s)
    }
}

impl From<&RatMatrix> for RawMatrix {
    fn from(m: &RatMatrix) -> Self {
        RawMatrix(m.to_rows())
    }
}

impl Serialize for RatMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        RawMatrix::from(self).serialize(s)
    }
}

/// Serde adapter for `Vec<Rat>` as an array of rational strings.
pub mod rat_vec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[Rat], s: S) -> std::result::Result<S::Ok, S::Error> {
        vec_to_strings(v).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Rat>, D::Error> {
        let raw: Vec<String> = Vec::deserialize(d)?;
        raw.iter()
            .map(|s| parse_rat(s).map_err(D::Error::custom))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_print() {
        assert_eq!(parse_rat("3/6").unwrap(), frac(1, 2));
        assert_eq!(parse_rat("-4").unwrap(), rat(-4));
        assert_eq!(parse_rat(" 2 / -4 ").unwrap(), frac(-1, 2));
        assert!(parse_rat("1/0").is_err());
        assert!(parse_rat("x").is_err());
        assert_eq!(rat_to_string(&frac(6, 4)), "3/2");
        assert_eq!(rat_to_string(&rat(7)), "7");
    }

    #[test]
    fn matrix_json_round_trip() {
        let m = RatMatrix::from_rows(vec![vec![frac(1, 2), rat(0)], vec![rat(-3), frac(5, 7)]], 2).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, r#"[["1/2","0"],["-3","5/7"]]"#);
        let raw: RawMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(raw.shaped(2, 2).unwrap(), m);
        let mixed: RawMatrix = serde_json::from_str(r#"[[1, "2/3"]]"#).unwrap();
        assert_eq!(mixed.shaped(1, 2).unwrap().get(0, 1), &frac(2, 3));
        let empty: RawMatrix = serde_json::from_str("[]").unwrap();
        assert_eq!(empty.shaped(0, 4).unwrap().cols(), 4);
        assert!(empty.shaped(2, 2).is_err());
    }
}
