use num_traits::{Signed, Zero};
use serde::Serialize;

use super::{Rat, RatMatrix};
use crate::error::{Error, Result};

/// Sylvester inertia of a symmetric bilinear form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Inertia {
    pub positive: usize,
    pub negative: usize,
    pub zero: usize,
}

/// Sign of a definite form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Definiteness {
    Positive,
    Negative,
}

impl Inertia {
    pub fn definite(&self) -> Option<Definiteness> {
        match (self.positive, self.negative, self.zero) {
            (_, 0, 0) => Some(Definiteness::Positive),
            (0, _, 0) => Some(Definiteness::Negative),
            _ => None,
        }
    }
}

/// Inertia of a symmetric matrix, by symmetric (congruence) pivoting.
pub fn signature(sym: &RatMatrix) -> Result<Inertia> {
    if !sym.is_symmetric() {
        return Err(Error::NotSymmetric);
    }
    let mut a = sym.clone();
    let mut active: Vec<usize> = (0..a.rows()).collect();
    let mut out = Inertia {
        positive: 0,
        negative: 0,
        zero: 0,
    };
    while !active.is_empty() {
        let pivot = active.iter().position(|&i| !a.get(i, i).is_zero());
        let p = match pivot {
            Some(pos) => pos,
            None => {
                // Zero diagonal: add a row/column with an off-diagonal partner.
                let pair = active.iter().enumerate().find_map(|(pi, &i)| {
                    active
                        .iter()
                        .find(|&&j| j != i && !a.get(i, j).is_zero())
                        .map(|&j| (pi, i, j))
                });
                let Some((pi, i, j)) = pair else {
                    out.zero += active.len();
                    break;
                };
                for &k in &active {
                    let v = a.get(i, k) + a.get(j, k);
                    a.set(i, k, v);
                }
                for &k in &active {
                    let v = a.get(k, i) + a.get(k, j);
                    a.set(k, i, v);
                }
                pi
            }
        };
        let i = active.remove(p);
        let piv = a.get(i, i).clone();
        if piv.is_positive() {
            out.positive += 1;
        } else {
            out.negative += 1;
        }
        for &r in &active {
            let f = a.get(r, i) / &piv;
            if f.is_zero() {
                continue;
            }
            for &c in &active {
                let v = a.get(r, c) - &f * a.get(i, c);
                a.set(r, c, v);
            }
        }
    }
    Ok(out)
}

/// Congruence diagonalization: returns `(d, t)` with `t^T sym t = diag(d)`
/// and `t` invertible.
pub fn diagonalize(sym: &RatMatrix) -> Result<(Vec<Rat>, RatMatrix)> {
    if !sym.is_symmetric() {
        return Err(Error::NotSymmetric);
    }
    let n = sym.rows();
    let mut a = sym.clone();
    let mut t = RatMatrix::identity(n);
    let swap = |m: &mut RatMatrix, i: usize, j: usize, rows: bool| {
        let len = if rows { m.cols() } else { m.rows() };
        for k in 0..len {
            let (x, y) = if rows { ((i, k), (j, k)) } else { ((k, i), (k, j)) };
            let tmp = m.get(x.0, x.1).clone();
            let other = m.get(y.0, y.1).clone();
            m.set(x.0, x.1, other);
            m.set(y.0, y.1, tmp);
        }
    };
    for p in 0..n {
        if a.get(p, p).is_zero() {
            if let Some(q) = (p + 1..n).find(|&q| !a.get(q, q).is_zero()) {
                swap(&mut a, p, q, true);
                swap(&mut a, p, q, false);
                swap(&mut t, p, q, false);
            } else if let Some(q) = (p + 1..n).find(|&q| !a.get(p, q).is_zero()) {
                for k in 0..n {
                    let v = a.get(p, k) + a.get(q, k);
                    a.set(p, k, v);
                }
                for k in 0..n {
                    let v = a.get(k, p) + a.get(k, q);
                    a.set(k, p, v);
                    let w = t.get(k, p) + t.get(k, q);
                    t.set(k, p, w);
                }
            } else {
                continue;
            }
        }
        let piv = a.get(p, p).clone();
        for r in p + 1..n {
            let f = a.get(r, p) / &piv;
            if f.is_zero() {
                continue;
            }
            for k in 0..n {
                let v = a.get(r, k) - &f * a.get(p, k);
                a.set(r, k, v);
            }
            for k in 0..n {
                let v = a.get(k, r) - &f * a.get(k, p);
                a.set(k, r, v);
                let w = t.get(k, r) - &f * t.get(k, p);
                t.set(k, r, w);
            }
        }
    }
    Ok(((0..n).map(|i| a.get(i, i).clone()).collect(), t))
}

/// `v^T form w`.
pub fn bilinear(form: &RatMatrix, v: &[Rat], w: &[Rat]) -> Rat {
    let fw = form.mul_vec(w);
    v.iter().zip(&fw).fold(Rat::zero(), |acc, (a, b)| acc + a * b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig(rows: usize, e: &[i64]) -> Inertia {
        signature(&RatMatrix::from_ints(rows, rows, e)).unwrap()
    }

    #[test]
    fn examples() {
        assert_eq!(
            sig(2, &[2, 0, 0, 3]),
            Inertia { positive: 2, negative: 0, zero: 0 }
        );
        // Leading principal minors 1 and -3.
        assert_eq!(
            sig(2, &[1, 2, 2, 1]),
            Inertia { positive: 1, negative: 1, zero: 0 }
        );
        assert_eq!(sig(1, &[0]), Inertia { positive: 0, negative: 0, zero: 1 });
    }

    #[test]
    fn zero_diagonal_hyperbolic_plane() {
        assert_eq!(
            sig(2, &[0, 1, 1, 0]),
            Inertia { positive: 1, negative: 1, zero: 0 }
        );
        assert_eq!(
            sig(3, &[0, 1, 0, 1, 0, 0, 0, 0, 0]),
            Inertia { positive: 1, negative: 1, zero: 1 }
        );
    }

    #[test]
    fn rejects_asymmetric() {
        assert!(matches!(
            signature(&RatMatrix::from_ints(2, 2, &[1, 2, 3, 4])),
            Err(Error::NotSymmetric)
        ));
    }

    #[test]
    fn diagonalization_is_a_congruence() {
        for e in [
            vec![0, 1, 0, 1, 0, 2, 0, 2, 0],
            vec![1, 2, 3, 2, 4, 5, 3, 5, 6],
            vec![0, 0, 0, 0, 0, 1, 0, 1, 0],
        ] {
            let s = RatMatrix::from_ints(3, 3, &e);
            let (d, t) = diagonalize(&s).unwrap();
            assert_eq!(&(&t.transpose() * &s) * &t, RatMatrix::diagonal(&d));
            assert_eq!(t.rank(), 3);
            let inertia = signature(&s).unwrap();
            assert_eq!(d.iter().filter(|x| x.is_positive()).count(), inertia.positive);
            assert_eq!(d.iter().filter(|x| x.is_negative()).count(), inertia.negative);
        }
    }

    #[test]
    fn definiteness() {
        assert_eq!(sig(2, &[2, 0, 0, 3]).definite(), Some(Definiteness::Positive));
        assert_eq!(sig(2, &[-2, 1, 1, -2]).definite(), Some(Definiteness::Negative));
        assert_eq!(sig(2, &[1, 2, 2, 1]).definite(), None);
    }
}
