use num_traits::Zero;

use super::{Rat, RatMatrix};
use crate::error::{Error, Result};

/// A linear subspace of `Q^ambient`, stored as a matrix of independent basis columns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subspace {
    ambient: usize,
    basis: RatMatrix,
}

impl Subspace {
    pub fn zero(ambient: usize) -> Self {
        Subspace {
            ambient,
            basis: RatMatrix::zeros(ambient, 0),
        }
    }

    pub fn full(ambient: usize) -> Self {
        Subspace {
            ambient,
            basis: RatMatrix::identity(ambient),
        }
    }

    /// Column span of `m`. The basis is the leftmost maximal independent set of columns.
    pub fn span(m: &RatMatrix) -> Self {
        let piv = m.pivot_columns();
        Subspace {
            ambient: m.rows(),
            basis: m.select_columns(&piv),
        }
    }

    /// Wraps columns already known to be independent.
    pub fn from_independent(basis: RatMatrix) -> Self {
        debug_assert_eq!(basis.rank(), basis.cols());
        Subspace {
            ambient: basis.rows(),
            basis,
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.cols()
    }

    pub fn basis(&self) -> &RatMatrix {
        &self.basis
    }

    pub fn contains(&self, v: &[Rat]) -> bool {
        if v.iter().all(Zero::is_zero) {
            return true;
        }
        let col = RatMatrix::from_columns(self.ambient, &[v.to_vec()]);
        RatMatrix::hstack(self.ambient, &[&self.basis, &col]).rank() == self.dim()
    }

    pub fn contains_subspace(&self, other: &Subspace) -> bool {
        assert_eq!(self.ambient, other.ambient, "ambient mismatch");
        other.dim() == 0
            || RatMatrix::hstack(self.ambient, &[&self.basis, &other.basis]).rank() == self.dim()
    }

    pub fn same_as(&self, other: &Subspace) -> bool {
        self.dim() == other.dim() && self.contains_subspace(other)
    }

    pub fn sum(&self, other: &Subspace) -> Subspace {
        assert_eq!(self.ambient, other.ambient, "ambient mismatch");
        Subspace::span(&RatMatrix::hstack(self.ambient, &[&self.basis, &other.basis]))
    }

    pub fn intersection(&self, other: &Subspace) -> Subspace {
        assert_eq!(self.ambient, other.ambient, "ambient mismatch");
        if self.dim() == 0 || other.dim() == 0 {
            return Subspace::zero(self.ambient);
        }
        let stacked = RatMatrix::hstack(self.ambient, &[&self.basis, &(-&other.basis)]);
        let k = stacked.kernel_basis();
        let coeffs = k.block(0, 0, self.dim(), k.cols());
        Subspace::span(&(&self.basis * &coeffs))
    }

    /// Image of the subspace under `m`.
    pub fn map(&self, m: &RatMatrix) -> Subspace {
        assert_eq!(m.cols(), self.ambient, "map source dimension");
        Subspace::span(&(m * &self.basis))
    }

    /// Preimage under `m` of `target`, intersected with this subspace.
    pub fn preimage_within(&self, m: &RatMatrix, target: &Subspace) -> Subspace {
        // x = B c with m B c = T t  <=>  [mB | -T] (c,t) = 0
        let mb = m * &self.basis;
        let stacked = RatMatrix::hstack(m.rows(), &[&mb, &(-target.basis())]);
        let k = stacked.kernel_basis();
        let coeffs = k.block(0, 0, self.dim(), k.cols());
        Subspace::span(&(&self.basis * &coeffs))
    }

    /// A vector of `self` that is not in `other`, if any.
    pub fn vector_not_in(&self, other: &Subspace) -> Option<Vec<Rat>> {
        (0..self.dim())
            .map(|j| self.basis.column(j))
            .find(|v| !other.contains(v))
    }
}

/// Kernel of `m` as a subspace of its source.
pub fn kernel(m: &RatMatrix) -> Subspace {
    Subspace::from_independent(m.kernel_basis())
}

/// Column span of `m` as a subspace of its target.
pub fn image(m: &RatMatrix) -> Subspace {
    Subspace::span(m)
}

pub fn rank(m: &RatMatrix) -> usize {
    m.rank()
}

/// `numerator / denominator`, with a fixed complement basis of representatives.
#[derive(Clone, Debug)]
pub struct QuotientSpace {
    numerator: Subspace,
    denominator: Subspace,
    complement: RatMatrix,
}

impl QuotientSpace {
    pub fn new(numerator: Subspace, denominator: Subspace) -> Result<Self> {
        if numerator.ambient_dim() != denominator.ambient_dim() {
            return Err(Error::DimensionMismatch("quotient ambient spaces differ".into()));
        }
        if !numerator.contains_subspace(&denominator) {
            return Err(Error::NotSubspace);
        }
        // Complete the denominator basis to a numerator basis by pivoting over [D | U].
        let amb = numerator.ambient_dim();
        let stacked = RatMatrix::hstack(amb, &[denominator.basis(), numerator.basis()]);
        let dd = denominator.dim();
        let picks: Vec<usize> = stacked
            .pivot_columns()
            .into_iter()
            .filter(|&p| p >= dd)
            .map(|p| p - dd)
            .collect();
        let complement = numerator.basis().select_columns(&picks);
        Ok(QuotientSpace {
            numerator,
            denominator,
            complement,
        })
    }

    /// The whole ambient space modulo nothing.
    pub fn whole(ambient: usize) -> Self {
        QuotientSpace::new(Subspace::full(ambient), Subspace::zero(ambient)).expect("trivial quotient")
    }

    pub fn ambient_dim(&self) -> usize {
        self.numerator.ambient_dim()
    }

    pub fn dim(&self) -> usize {
        self.complement.cols()
    }

    pub fn numerator(&self) -> &Subspace {
        &self.numerator
    }

    pub fn denominator(&self) -> &Subspace {
        &self.denominator
    }

    /// Representatives of the quotient basis, as ambient column vectors.
    pub fn representatives(&self) -> &RatMatrix {
        &self.complement
    }

    /// Quotient coordinates of the columns of `vs`, which must lie in the numerator.
    pub fn coordinates(&self, vs: &RatMatrix) -> Option<RatMatrix> {
        let amb = self.ambient_dim();
        let full = RatMatrix::hstack(amb, &[&self.complement, self.denominator.basis()]);
        let x = full.solve(vs)?;
        Some(x.block(0, 0, self.dim(), vs.cols()))
    }
}

/// Matrix of the map induced by `m` from `src` to `dst`, in their quotient bases.
pub fn induced_map(m: &RatMatrix, src: &QuotientSpace, dst: &QuotientSpace) -> Result<RatMatrix> {
    if m.cols() != src.ambient_dim() || m.rows() != dst.ambient_dim() {
        return Err(Error::DimensionMismatch(format!(
            "map is {}x{}, quotients live in {} and {}",
            m.rows(),
            m.cols(),
            src.ambient_dim(),
            dst.ambient_dim()
        )));
    }
    if !dst.numerator().contains_subspace(&src.numerator().map(m)) {
        return Err(Error::NotWellDefined("numerator is not mapped into numerator".into()));
    }
    if !dst.denominator().contains_subspace(&src.denominator().map(m)) {
        return Err(Error::NotWellDefined("denominator is not mapped into denominator".into()));
    }
    let images = m * src.representatives();
    Ok(dst
        .coordinates(&images)
        .expect("images lie in the target numerator"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(rows: usize, cols: usize, e: &[i64]) -> RatMatrix {
        RatMatrix::from_ints(rows, cols, e)
    }

    #[test]
    fn image_examples() {
        assert_eq!(image(&RatMatrix::identity(3)).dim(), 3);
        assert_eq!(image(&RatMatrix::zeros(3, 2)).dim(), 0);
        let im = image(&ints(2, 2, &[1, 2, 2, 4]));
        assert_eq!(im.dim(), 1);
        assert!(im.contains(&[Rat::from_integer(3.into()), Rat::from_integer(6.into())]));
    }

    #[test]
    fn intersection_and_sum() {
        let a = Subspace::span(&ints(3, 2, &[1, 0, 0, 1, 0, 0]));
        let b = Subspace::span(&ints(3, 2, &[0, 0, 1, 0, 0, 1]));
        assert_eq!(a.intersection(&b).dim(), 1);
        assert_eq!(a.sum(&b).dim(), 3);
    }

    #[test]
    fn induced_identity_is_identity() {
        let q = QuotientSpace::new(
            Subspace::full(3),
            Subspace::span(&ints(3, 1, &[1, 1, 1])),
        )
        .unwrap();
        let m = induced_map(&RatMatrix::identity(3), &q, &q).unwrap();
        assert_eq!(m, RatMatrix::identity(2));
        let z = induced_map(&RatMatrix::zeros(3, 3), &q, &q).unwrap();
        assert!(z.is_zero());
    }

    #[test]
    fn induced_map_rejects_ill_defined() {
        let src = QuotientSpace::new(Subspace::full(2), Subspace::span(&ints(2, 1, &[1, 0]))).unwrap();
        let dst = QuotientSpace::new(Subspace::full(2), Subspace::span(&ints(2, 1, &[0, 1]))).unwrap();
        let err = induced_map(&RatMatrix::identity(2), &src, &dst).unwrap_err();
        assert!(matches!(err, Error::NotWellDefined(_)));
    }

    #[test]
    fn cycle_incidence_descends_to_h1() {
        // Coboundary C^0 -> C^1 of the 3-cycle; H^1 = C^1 / im.
        let delta = ints(3, 3, &[-1, 1, 0, 0, -1, 1, 1, 0, -1]);
        let h1 = QuotientSpace::new(Subspace::full(3), image(&delta)).unwrap();
        assert_eq!(h1.dim(), 1);
        // Multiplication by 2 on the cochains descends to a nonzero 1x1 map.
        let two = RatMatrix::identity(3).scale(&Rat::from_integer(2.into()));
        let m = induced_map(&two, &h1, &h1).unwrap();
        assert_eq!((m.rows(), m.cols()), (1, 1));
        assert!(!m.is_zero());
    }

    #[test]
    fn quotient_requires_containment() {
        let a = Subspace::span(&ints(2, 1, &[1, 0]));
        let b = Subspace::span(&ints(2, 1, &[0, 1]));
        assert!(matches!(QuotientSpace::new(a, b), Err(Error::NotSubspace)));
    }
}
