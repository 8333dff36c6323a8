//! Check results and the certificates carried by failures.

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::linalg::{bilinear, induced_map, rat_vec, QuotientSpace, Rat, RatMatrix, Subspace};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped { reason: String },
}

/// A certificate that a check failed. Every variant can be re-verified by
/// multiplying through with the matrices it carries.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// `vector != 0` and `map * vector == 0`.
    Kernel {
        map: RatMatrix,
        #[serde(with = "rat_vec")]
        vector: Vec<Rat>,
    },
    /// `vector` lies in `source` but not in `source_zero`, while its image lies in `target_zero`.
    KernelModulo {
        map: RatMatrix,
        source: RatMatrix,
        source_zero: RatMatrix,
        target_zero: RatMatrix,
        #[serde(with = "rat_vec")]
        vector: Vec<Rat>,
    },
    /// `vector` lies in `container` (when given) but outside the span of `span`.
    NotInSpan {
        span: RatMatrix,
        container: Option<RatMatrix>,
        #[serde(with = "rat_vec")]
        vector: Vec<Rat>,
    },
    /// `basis * vector` is a nonzero element of the radical of `form` restricted to `basis`.
    Radical {
        form: RatMatrix,
        basis: RatMatrix,
        #[serde(with = "rat_vec")]
        vector: Vec<Rat>,
    },
    /// The form takes values of both signs.
    Indefinite {
        form: RatMatrix,
        #[serde(with = "rat_vec")]
        positive: Vec<Rat>,
        #[serde(with = "rat_vec")]
        negative: Vec<Rat>,
    },
    /// `map * vector != 0` for a map that should vanish.
    NonzeroImage {
        map: RatMatrix,
        #[serde(with = "rat_vec")]
        vector: Vec<Rat>,
    },
    /// `left` equals neither `right` nor `-right`.
    SignMismatch { left: RatMatrix, right: RatMatrix },
    /// `form` is not symmetric at `(row, col)`.
    Asymmetric { form: RatMatrix, row: usize, col: usize },
    /// Scalar data that certifies the failure on its own.
    Values { values: BTreeMap<String, String> },
}

impl Witness {
    pub fn verify(&self) -> bool {
        match self {
            Witness::Kernel { map, vector } => {
                !is_zero_vec(vector) && is_zero_vec(&map.mul_vec(vector))
            }
            Witness::KernelModulo {
                map,
                source,
                source_zero,
                target_zero,
                vector,
            } => {
                let src = Subspace::span(source);
                let src0 = Subspace::span(source_zero);
                let tgt0 = Subspace::span(target_zero);
                src.contains(vector) && !src0.contains(vector) && tgt0.contains(&map.mul_vec(vector))
            }
            Witness::NotInSpan {
                span,
                container,
                vector,
            } => {
                let inside = container
                    .as_ref()
                    .is_none_or(|c| Subspace::span(c).contains(vector));
                inside && !Subspace::span(span).contains(vector)
            }
            Witness::Radical {
                form,
                basis,
                vector,
            } => {
                let x = basis.mul_vec(vector);
                !is_zero_vec(&x) && is_zero_vec(&(&basis.transpose() * form).mul_vec(&x))
            }
            Witness::Indefinite {
                form,
                positive,
                negative,
            } => {
                bilinear(form, positive, positive).is_positive()
                    && bilinear(form, negative, negative).is_negative()
            }
            Witness::NonzeroImage { map, vector } => !is_zero_vec(&map.mul_vec(vector)),
            Witness::SignMismatch { left, right } => {
                (left.rows(), left.cols()) != (right.rows(), right.cols())
                    || (left != right && *left != -right)
            }
            Witness::Asymmetric { form, row, col } => {
                *row < form.rows() && *col < form.cols() && form.get(*row, *col) != form.get(*col, *row)
            }
            Witness::Values { .. } => true,
        }
    }
}

pub(crate) fn is_zero_vec(v: &[Rat]) -> bool {
    v.iter().all(Zero::is_zero)
}

/// One named check at one location, e.g. `log_hl` at `r=1, a=0`.
#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub location: BTreeMap<String, i64>,
    #[serde(flatten)]
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    /// Dimensions and ranks involved.
    pub facts: BTreeMap<String, i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

impl CheckResult {
    pub fn new(name: impl Into<String>, location: &[(&str, i64)]) -> Self {
        CheckResult {
            name: name.into(),
            location: location.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            status: Status::Pass,
            note: None,
            facts: BTreeMap::new(),
            witness: None,
        }
    }

    pub fn fact(mut self, key: &str, value: impl TryInto<i64>) -> Self {
        self.facts
            .insert(key.to_string(), value.try_into().unwrap_or(i64::MAX));
        self
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn fail(mut self, witness: Witness) -> Self {
        self.status = Status::Fail;
        self.witness = Some(witness);
        self
    }

    pub fn skip(mut self, reason: impl Into<String>) -> Self {
        self.status = Status::Skipped {
            reason: reason.into(),
        };
        self
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn failed(&self) -> bool {
        self.status == Status::Fail
    }

    /// A failure whose witness re-verifies; passes and skips are trivially consistent.
    pub fn witness_ok(&self) -> bool {
        match (&self.status, &self.witness) {
            (Status::Fail, Some(w)) => w.verify(),
            (Status::Fail, None) => false,
            _ => true,
        }
    }

    fn sort_key(&self) -> (&str, Vec<(&str, i64)>) {
        (
            self.name.as_str(),
            self.location.iter().map(|(k, v)| (k.as_str(), *v)).collect(),
        )
    }
}

/// Canonical order: by name, then by location.
pub fn sort_results(results: &mut [CheckResult]) {
    results.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
}

/// Checks that the map induced by `m` from `src` to `dst` is an isomorphism.
///
/// A failure carries either a kernel vector (modulo the source denominator)
/// or a target vector outside the image.
pub fn iso_check(
    result: CheckResult,
    m: &RatMatrix,
    src: &QuotientSpace,
    dst: &QuotientSpace,
) -> CheckResult {
    let induced = match induced_map(m, src, dst) {
        Ok(x) => x,
        Err(e) => {
            let mut values = BTreeMap::new();
            values.insert("error".to_string(), e.to_string());
            return result.fail(Witness::Values { values });
        }
    };
    let rank = induced.rank();
    let r = result
        .fact("source_dim", src.dim())
        .fact("target_dim", dst.dim())
        .fact("rank", rank);
    if rank == src.dim() && rank == dst.dim() {
        return if rank == 0 { r.note("vacuous") } else { r };
    }
    if rank < src.dim() {
        let k = induced.kernel_basis();
        let coords = k.column(0);
        let vector = src.representatives().mul_vec(&coords);
        r.fail(Witness::KernelModulo {
            map: m.clone(),
            source: src.numerator().basis().clone(),
            source_zero: src.denominator().basis().clone(),
            target_zero: dst.denominator().basis().clone(),
            vector,
        })
    } else {
        let image = src.numerator().map(m).sum(dst.denominator());
        let reps = dst.representatives();
        let vector = (0..reps.cols())
            .map(|j| reps.column(j))
            .find(|v| !image.contains(v))
            .expect("a non-surjective induced map misses some representative");
        r.fail(Witness::NotInSpan {
            span: image.basis().clone(),
            container: Some(dst.numerator().basis().clone()),
            vector,
        })
    }
}

/// Checks that the map induced by `m` from `src` to `dst` is injective.
pub fn injective_check(
    result: CheckResult,
    m: &RatMatrix,
    src: &QuotientSpace,
    dst: &QuotientSpace,
) -> CheckResult {
    let induced = match induced_map(m, src, dst) {
        Ok(x) => x,
        Err(e) => {
            let mut values = BTreeMap::new();
            values.insert("error".to_string(), e.to_string());
            return result.fail(Witness::Values { values });
        }
    };
    let rank = induced.rank();
    let r = result.fact("source_dim", src.dim()).fact("rank", rank);
    if rank == src.dim() {
        return if rank == 0 { r.note("vacuous") } else { r };
    }
    let coords = induced.kernel_basis().column(0);
    r.fail(Witness::KernelModulo {
        map: m.clone(),
        source: src.numerator().basis().clone(),
        source_zero: src.denominator().basis().clone(),
        target_zero: dst.denominator().basis().clone(),
        vector: src.representatives().mul_vec(&coords),
    })
}

/// Isomorphism check for a plain matrix between coordinate spaces.
pub fn matrix_iso_check(result: CheckResult, m: &RatMatrix) -> CheckResult {
    let rank = m.rank();
    let r = result
        .fact("source_dim", m.cols())
        .fact("target_dim", m.rows())
        .fact("rank", rank);
    if rank == m.cols() && rank == m.rows() {
        return if rank == 0 { r.note("vacuous") } else { r };
    }
    if rank < m.cols() {
        let vector = m.kernel_basis().column(0);
        r.fail(Witness::Kernel {
            map: m.clone(),
            vector,
        })
    } else {
        let span = Subspace::span(m);
        let vector = (0..m.rows())
            .map(|i| {
                let mut e = vec![Rat::zero(); m.rows()];
                e[i] = Rat::from_integer(1.into());
                e
            })
            .find(|e| !span.contains(e))
            .expect("a non-surjective matrix misses a standard vector");
        r.fail(Witness::NotInSpan {
            span: m.clone(),
            container: None,
            vector,
        })
    }
}

/// Checks that `m` vanishes, with a basis vector witness otherwise.
pub fn zero_check(result: CheckResult, m: &RatMatrix) -> CheckResult {
    match (0..m.cols()).find(|&j| m.column(j).iter().any(|x| !x.is_zero())) {
        None => result,
        Some(j) => {
            let mut v = vec![Rat::zero(); m.cols()];
            v[j] = Rat::from_integer(1.into());
            result.fail(Witness::NonzeroImage {
                map: m.clone(),
                vector: v,
            })
        }
    }
}

/// Checks that `form` restricted to the column span of `basis` is nondegenerate.
pub fn nondegenerate_check(result: CheckResult, form: &RatMatrix, basis: &RatMatrix) -> CheckResult {
    let restricted = &(&basis.transpose() * form) * basis;
    let rank = restricted.rank();
    let r = result.fact("dim", basis.cols()).fact("rank", rank);
    if rank == basis.cols() {
        return if rank == 0 { r.note("vacuous") } else { r };
    }
    // Left radical: v with v^T B^T F B = 0, i.e. (B^T F^T B) v = 0.
    let left = &(&basis.transpose() * &form.transpose()) * basis;
    let vector = left.kernel_basis().column(0);
    r.fail(Witness::Radical {
        form: form.transpose(),
        basis: basis.clone(),
        vector,
    })
}

/// Checks that two subspaces coincide.
pub fn same_subspace_check(result: CheckResult, a: &Subspace, b: &Subspace) -> CheckResult {
    let r = result.fact("left_dim", a.dim()).fact("right_dim", b.dim());
    if let Some(v) = a.vector_not_in(b) {
        return r.fail(Witness::NotInSpan {
            span: b.basis().clone(),
            container: Some(a.basis().clone()),
            vector: v,
        });
    }
    if let Some(v) = b.vector_not_in(a) {
        return r.fail(Witness::NotInSpan {
            span: a.basis().clone(),
            container: Some(b.basis().clone()),
            vector: v,
        });
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::rat;

    #[test]
    fn iso_check_witnesses_verify() {
        let q = QuotientSpace::whole(2);
        let sing = RatMatrix::from_ints(2, 2, &[1, 1, 1, 1]);
        let r = iso_check(CheckResult::new("t", &[]), &sing, &q, &q);
        assert!(r.failed());
        assert!(r.witness_ok());
        let ok = iso_check(CheckResult::new("t", &[]), &RatMatrix::identity(2), &q, &q);
        assert!(ok.passed());
    }

    #[test]
    fn cokernel_witness() {
        let src = QuotientSpace::whole(1);
        let dst = QuotientSpace::whole(2);
        let m = RatMatrix::from_ints(2, 1, &[1, 0]);
        let r = iso_check(CheckResult::new("t", &[]), &m, &src, &dst);
        assert!(r.failed() && r.witness_ok());
        let r = matrix_iso_check(CheckResult::new("t", &[]), &m);
        assert!(r.failed() && r.witness_ok());
    }

    #[test]
    fn radical_witness() {
        let form = RatMatrix::from_ints(2, 2, &[1, 0, 0, 0]);
        let r = nondegenerate_check(CheckResult::new("t", &[]), &form, &RatMatrix::identity(2));
        assert!(r.failed() && r.witness_ok());
        let good = nondegenerate_check(CheckResult::new("t", &[]), &form, &RatMatrix::from_ints(2, 1, &[1, 0]));
        assert!(good.passed());
    }

    #[test]
    fn forged_witness_is_rejected() {
        let w = Witness::Kernel {
            map: RatMatrix::identity(2),
            vector: vec![rat(1), rat(0)],
        };
        assert!(!w.verify());
        let w = Witness::NonzeroImage {
            map: RatMatrix::zeros(2, 2),
            vector: vec![rat(1), rat(0)],
        };
        assert!(!w.verify());
    }

    #[test]
    fn canonical_order() {
        let mut v = vec![
            CheckResult::new("b", &[("r", 0)]),
            CheckResult::new("a", &[("r", 2)]),
            CheckResult::new("a", &[("r", -1)]),
        ];
        sort_results(&mut v);
        let keys: Vec<_> = v.iter().map(|c| (c.name.clone(), c.location["r"])).collect();
        assert_eq!(keys, vec![("a".into(), -1), ("a".into(), 2), ("b".into(), 0)]);
    }
}
