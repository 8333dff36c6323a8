//! Bigraded modules with operators `N`, `L`, `d` and a pairing, the axioms
//! they are checked against, the module built from cycle-generated strata,
//! and its cohomology.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::Signed;
use serde::{Deserialize, Serialize};

use crate::check::{matrix_iso_check, nondegenerate_check, zero_check, CheckResult, Witness};
use crate::error::{Error, Result};
use crate::linalg::{
    diagonalize, image, induced_map, kernel, signature, QuotientSpace, RatMatrix, RawMatrix,
};
use crate::strata::StrataComplex;
use crate::weight_ss::{build_e1, E1Page};

pub type Bideg = (i64, i64);

/// `V = ⊕ V^{i,j}` of weight `n` with `N` of bidegree (2,0), `L` of
/// bidegree (0,2), `d` of bidegree (1,1) and a pairing `V^{i,j} x V^{-i,-j} -> Q`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ItoModule {
    pub weight: i64,
    pub dims: BTreeMap<Bideg, usize>,
    pub n_op: BTreeMap<Bideg, RatMatrix>,
    pub l_op: BTreeMap<Bideg, RatMatrix>,
    pub d_op: BTreeMap<Bideg, RatMatrix>,
    /// Blocks keyed by `(left, right)` bidegrees.
    pub pairing: BTreeMap<(Bideg, Bideg), RatMatrix>,
}

fn neg((i, j): Bideg) -> Bideg {
    (-i, -j)
}

impl ItoModule {
    pub fn dim(&self, b: Bideg) -> usize {
        self.dims.get(&b).copied().unwrap_or(0)
    }

    fn get(map: &BTreeMap<Bideg, RatMatrix>, key: Bideg, rows: usize, cols: usize) -> RatMatrix {
        map.get(&key).cloned().unwrap_or_else(|| RatMatrix::zeros(rows, cols))
    }

    pub fn n(&self, (i, j): Bideg) -> RatMatrix {
        Self::get(&self.n_op, (i, j), self.dim((i + 2, j)), self.dim((i, j)))
    }

    pub fn l(&self, (i, j): Bideg) -> RatMatrix {
        Self::get(&self.l_op, (i, j), self.dim((i, j + 2)), self.dim((i, j)))
    }

    pub fn d(&self, (i, j): Bideg) -> RatMatrix {
        Self::get(&self.d_op, (i, j), self.dim((i + 1, j + 1)), self.dim((i, j)))
    }

    /// `N^r` starting at `(i, j)`.
    pub fn n_power(&self, (i, j): Bideg, r: usize) -> RatMatrix {
        let mut acc = RatMatrix::identity(self.dim((i, j)));
        for s in 0..r as i64 {
            acc = &self.n((i + 2 * s, j)) * &acc;
        }
        acc
    }

    /// `L^r` starting at `(i, j)`.
    pub fn l_power(&self, (i, j): Bideg, r: usize) -> RatMatrix {
        let mut acc = RatMatrix::identity(self.dim((i, j)));
        for s in 0..r as i64 {
            acc = &self.l((i, j + 2 * s)) * &acc;
        }
        acc
    }

    /// Pairing block `V^{i,j} x V^{-i,-j}`; a block given only in the
    /// opposite order is transposed.
    pub fn pairing_block(&self, b: Bideg) -> RatMatrix {
        if let Some(p) = self.pairing.get(&(b, neg(b))) {
            return p.clone();
        }
        if let Some(p) = self.pairing.get(&(neg(b), b)) {
            return p.transpose();
        }
        RatMatrix::zeros(self.dim(b), self.dim(neg(b)))
    }

    fn support(&self) -> Vec<Bideg> {
        self.dims.iter().filter(|(_, &d)| d > 0).map(|(&b, _)| b).collect()
    }

    fn extent(&self) -> (i64, i64) {
        self.support()
            .iter()
            .fold((0, 0), |(mi, mj), &(i, j)| (mi.max(i.abs()), mj.max(j.abs())))
    }
}

/// Records whether `lhs == sign * rhs` for some sign.
fn sign_relation(result: CheckResult, lhs: &RatMatrix, rhs: &RatMatrix) -> CheckResult {
    if lhs.is_zero() && rhs.is_zero() {
        return result.note("vacuous");
    }
    if lhs == rhs {
        result.fact("sign", 1)
    } else if *lhs == -rhs {
        result.fact("sign", -1)
    } else {
        result.fail(Witness::SignMismatch {
            left: lhs.clone(),
            right: rhs.clone(),
        })
    }
}

/// Definiteness of a symmetric form restricted to the columns of `basis`.
fn definite_check(result: CheckResult, form: &RatMatrix, basis: &RatMatrix) -> CheckResult {
    let gram = &(&basis.transpose() * form) * basis;
    let r = result.fact("dim", basis.cols());
    if basis.cols() == 0 {
        return r.note("vacuous");
    }
    if let Some((row, col)) = (0..gram.rows())
        .flat_map(|i| (0..gram.cols()).map(move |j| (i, j)))
        .find(|&(i, j)| gram.get(i, j) != gram.get(j, i))
    {
        return r.fail(Witness::Asymmetric {
            form: gram,
            row,
            col,
        });
    }
    let inertia = signature(&gram).expect("symmetric");
    let r = r
        .fact("positive", inertia.positive)
        .fact("negative", inertia.negative)
        .fact("zero", inertia.zero);
    if inertia.zero > 0 {
        return nondegenerate_check(r, form, basis);
    }
    match (inertia.positive, inertia.negative) {
        (_, 0) => r.fact("sign", 1).note("positive definite"),
        (0, _) => r.fact("sign", -1).note("negative definite"),
        _ => {
            let (d, t) = diagonalize(&gram).expect("symmetric");
            let pick = |positive: bool| {
                let idx = d
                    .iter()
                    .position(|x| if positive { x.is_positive() } else { x.is_negative() })
                    .expect("both signs occur");
                basis.mul_vec(&t.column(idx))
            };
            let (positive, negative) = (pick(true), pick(false));
            r.fail(Witness::Indefinite {
                form: form.clone(),
                positive,
                negative,
            })
        }
    }
}

/// One result per axiom per relevant bidegree.
pub fn check_ito_axioms(v: &ItoModule) -> Vec<CheckResult> {
    let mut out = Vec::new();
    let support = v.support();
    let (imax, jmax) = v.extent();
    let n = v.weight;

    for &(i, j) in &support {
        let r = CheckResult::new("ito_parity", &[("i", i), ("j", j)]);
        out.push(if (i + j + n).rem_euclid(2) == 0 {
            r
        } else {
            let values = BTreeMap::from([(format!("dim V^({i},{j})"), v.dim((i, j)).to_string())]);
            r.fail(Witness::Values { values })
        });
    }

    // Isomorphisms N^i : V^{-i,j} -> V^{i,j} and L^j : V^{i,-j} -> V^{i,j}.
    for i in 0..=imax {
        for j in -jmax..=jmax {
            if v.dim((-i, j)) + v.dim((i, j)) > 0 {
                let r = CheckResult::new("ito_n_iso", &[("i", i), ("j", j)]);
                out.push(matrix_iso_check(r, &v.n_power((-i, j), i as usize)));
            }
        }
    }
    for j in 0..=jmax {
        for i in -imax..=imax {
            if v.dim((i, -j)) + v.dim((i, j)) > 0 {
                let r = CheckResult::new("ito_l_iso", &[("i", i), ("j", j)]);
                out.push(matrix_iso_check(r, &v.l_power((i, -j), j as usize)));
            }
        }
    }

    for &b @ (i, j) in &support {
        let loc = [("i", i), ("j", j)];
        out.push(zero_check(
            CheckResult::new("ito_d_squared", &loc),
            &(&v.d((i + 1, j + 1)) * &v.d(b)),
        ));
        let nd = &v.n((i + 1, j + 1)) * &v.d(b);
        let dn = &v.d((i + 2, j)) * &v.n(b);
        out.push(zero_check(CheckResult::new("ito_n_commutes_d", &loc), &(&nd - &dn)));
        let ld = &v.l((i + 1, j + 1)) * &v.d(b);
        let dl = &v.d((i, j + 2)) * &v.l(b);
        out.push(zero_check(CheckResult::new("ito_l_commutes_d", &loc), &(&ld - &dl)));
        let nl = &v.n((i, j + 2)) * &v.l(b);
        let ln = &v.l((i + 2, j)) * &v.n(b);
        out.push(zero_check(CheckResult::new("ito_n_commutes_l", &loc), &(&nl - &ln)));
    }

    let pairs: BTreeSet<(Bideg, Bideg)> = v.pairing.keys().copied().collect();
    for (left, right) in pairs {
        if right != neg(left) {
            let loc = [("i", left.0), ("j", left.1), ("i2", right.0), ("j2", right.1)];
            out.push(zero_check(CheckResult::new("ito_orthogonal", &loc), &v.pairing[&(left, right)]));
        }
    }
    for &b @ (i, j) in &support {
        let loc = [("i", i), ("j", j)];
        let p = v.pairing_block(b);
        out.push(
            matrix_iso_check(CheckResult::new("ito_pairing_perfect", &loc), &p)
                .fact("dual_dim", v.dim(neg(b))),
        );
        out.push(sign_relation(
            CheckResult::new("ito_pairing_symmetry", &loc),
            &v.pairing_block(neg(b)),
            &p.transpose(),
        ));
        // ⟨Op x, y⟩ = ± ⟨x, Op y⟩ for x in V^{i,j}.
        for (name, shift, op) in [
            ("ito_adjoint_n", (2, 0), &ItoModule::n as &dyn Fn(&ItoModule, Bideg) -> RatMatrix),
            ("ito_adjoint_l", (0, 2), &ItoModule::l),
            ("ito_adjoint_d", (1, 1), &ItoModule::d),
        ] {
            let target = (i + shift.0, j + shift.1);
            let partner = neg(target);
            if v.dim(target) == 0 && v.dim(partner) == 0 {
                continue;
            }
            let lhs = &op(v, b).transpose() * &v.pairing_block(target);
            let rhs = &p * &op(v, partner);
            out.push(sign_relation(CheckResult::new(name, &loc), &lhs, &rhs));
        }
    }

    // Positivity on V_0^{-i,-j} = ker N^{i+1} ∩ ker L^{j+1}.
    for i in 0..=imax {
        for j in 0..=jmax {
            let b = (-i, -j);
            if v.dim(b) == 0 {
                continue;
            }
            let kn = kernel(&v.n_power(b, i as usize + 1));
            let kl = kernel(&v.l_power(b, j as usize + 1));
            let prim = kn.intersection(&kl);
            let op = &v.n_power((-i, j), i as usize) * &v.l_power(b, j as usize);
            let form = &v.pairing_block(b) * &op;
            out.push(definite_check(
                CheckResult::new("ito_positivity", &[("i", i), ("j", j)]),
                &form,
                prim.basis(),
            ));
        }
    }
    out
}

/// `V^{i,j} = E1^{i,n-i+j}` with the page operators and Poincaré pairings.
pub fn ito_from_strata(sc: &StrataComplex) -> Result<ItoModule> {
    if !sc.is_cycle_generated() {
        return Err(Error::NotCycleGenerated);
    }
    let e1 = build_e1(sc)?;
    Ok(ito_from_page(sc, &e1))
}

fn ito_from_page(sc: &StrataComplex, e1: &E1Page) -> ItoModule {
    let n = e1.n as i64;
    let to_v = |a: i64, b: i64| (a, b + a - n);
    let mut v = ItoModule {
        weight: n,
        dims: BTreeMap::new(),
        n_op: BTreeMap::new(),
        l_op: BTreeMap::new(),
        d_op: BTreeMap::new(),
        pairing: BTreeMap::new(),
    };
    for c in e1.cells() {
        let key = to_v(c.a, c.b);
        v.dims.insert(key, c.dim());
        v.n_op.insert(key, e1.monodromy(c.a, c.b));
        v.l_op.insert(key, e1.lefschetz(c.a, c.b));
        v.d_op.insert(key, e1.d(c.a, c.b));
        let (da, db) = (-c.a, 2 * n - c.b);
        let Some(dual) = e1.cell(da, db) else {
            continue;
        };
        let mut p = RatMatrix::zeros(c.dim(), dual.dim());
        for s in &c.summands {
            // Summand k pairs with summand level - 1 - k of the same level.
            if let Some(t) = dual.summand(s.level - 1 - s.k) {
                p.set_block(s.offset, t.offset, &sc.level_pairing(s.level, s.degree));
            }
        }
        v.pairing.insert((key, neg(key)), p);
    }
    v
}

/// `H(V) = ker d / im d` with induced `N`, `L`, pairing and `d = 0`.
pub fn ito_cohomology(v: &ItoModule) -> Result<ItoModule> {
    for &(i, j) in v.dims.keys() {
        if !(&v.d((i + 1, j + 1)) * &v.d((i, j))).is_zero() {
            return Err(Error::DifferentialNotSquareZero {
                a: i as i32,
                b: j as i32,
            });
        }
    }
    let spaces: BTreeMap<Bideg, QuotientSpace> = v
        .dims
        .keys()
        .map(|&(i, j)| {
            let z = kernel(&v.d((i, j)));
            let bnd = image(&v.d((i - 1, j - 1)));
            QuotientSpace::new(z, bnd).map(|q| ((i, j), q))
        })
        .collect::<Result<_>>()?;
    let space = |b: Bideg| spaces.get(&b).cloned().unwrap_or_else(|| QuotientSpace::whole(0));
    let mut h = ItoModule {
        weight: v.weight,
        dims: spaces.iter().map(|(&b, q)| (b, q.dim())).collect(),
        n_op: BTreeMap::new(),
        l_op: BTreeMap::new(),
        d_op: BTreeMap::new(),
        pairing: BTreeMap::new(),
    };
    for (&b @ (i, j), q) in &spaces {
        h.n_op.insert(b, induced_map(&v.n(b), q, &space((i + 2, j)))?);
        h.l_op.insert(b, induced_map(&v.l(b), q, &space((i, j + 2)))?);
        h.d_op.insert(b, RatMatrix::zeros(h.dim((i + 1, j + 1)), q.dim()));
        let dual = space(neg(b));
        let p = v.pairing_block(b);
        // Boundaries must pair to zero with cycles on either side.
        let left = &(&q.denominator().basis().transpose() * &p) * dual.numerator().basis();
        let right = &(&q.numerator().basis().transpose() * &p) * dual.denominator().basis();
        if !left.is_zero() || !right.is_zero() {
            return Err(Error::InducedPairingIllDefined {
                i: i as i32,
                j: j as i32,
            });
        }
        let induced = &(&q.representatives().transpose() * &p) * dual.representatives();
        h.pairing.insert((b, neg(b)), induced);
    }
    Ok(h)
}

#[derive(Deserialize, Serialize)]
struct SpaceDoc {
    bidegree: [i64; 2],
    dim: usize,
}

#[derive(Deserialize, Serialize)]
struct OpDoc {
    from: [i64; 2],
    matrix: RawMatrix,
}

#[derive(Deserialize, Serialize)]
struct PairDoc {
    left: [i64; 2],
    right: [i64; 2],
    matrix: RawMatrix,
}

#[derive(Deserialize, Serialize)]
struct ModuleDoc {
    weight: i64,
    spaces: Vec<SpaceDoc>,
    #[serde(default, rename = "N")]
    n: Vec<OpDoc>,
    #[serde(default, rename = "L")]
    l: Vec<OpDoc>,
    #[serde(default)]
    d: Vec<OpDoc>,
    #[serde(default)]
    pairing: Vec<PairDoc>,
}

impl ItoModule {
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ModuleDoc = serde_json::from_str(text)?;
        Self::from_doc(doc)
    }

    pub fn from_value(value: serde_json::Value) -> Result<Self> {
        let doc: ModuleDoc = serde_json::from_value(value)?;
        Self::from_doc(doc)
    }

    fn from_doc(doc: ModuleDoc) -> Result<Self> {
        let mut v = ItoModule {
            weight: doc.weight,
            dims: BTreeMap::new(),
            n_op: BTreeMap::new(),
            l_op: BTreeMap::new(),
            d_op: BTreeMap::new(),
            pairing: BTreeMap::new(),
        };
        for s in doc.spaces {
            let key = (s.bidegree[0], s.bidegree[1]);
            if v.dims.insert(key, s.dim).is_some() {
                return Err(Error::Malformed(format!("bidegree {key:?} listed twice")));
            }
        }
        for (ops, shift, name) in [(doc.n, (2, 0), "N"), (doc.l, (0, 2), "L"), (doc.d, (1, 1), "d")] {
            for op in ops {
                let (i, j) = (op.from[0], op.from[1]);
                let m = op
                    .matrix
                    .shaped(v.dim((i + shift.0, j + shift.1)), v.dim((i, j)))
                    .map_err(|e| Error::Malformed(format!("{name} at ({i},{j}): {e}")))?;
                let target = match name {
                    "N" => &mut v.n_op,
                    "L" => &mut v.l_op,
                    _ => &mut v.d_op,
                };
                target.insert((i, j), m);
            }
        }
        for p in doc.pairing {
            let left = (p.left[0], p.left[1]);
            let right = (p.right[0], p.right[1]);
            let m = p
                .matrix
                .shaped(v.dim(left), v.dim(right))
                .map_err(|e| Error::Malformed(format!("pairing {left:?} x {right:?}: {e}")))?;
            v.pairing.insert((left, right), m);
        }
        Ok(v)
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let ops = |map: &BTreeMap<Bideg, RatMatrix>| -> Vec<OpDoc> {
            map.iter()
                .filter(|(_, m)| m.rows() > 0 && m.cols() > 0)
                .map(|(&(i, j), m)| OpDoc {
                    from: [i, j],
                    matrix: RawMatrix::from(m),
                })
                .collect()
        };
        let doc = ModuleDoc {
            weight: self.weight,
            spaces: self
                .dims
                .iter()
                .filter(|(_, &d)| d > 0)
                .map(|(&(i, j), &dim)| SpaceDoc { bidegree: [i, j], dim })
                .collect(),
            n: ops(&self.n_op),
            l: ops(&self.l_op),
            d: ops(&self.d_op),
            pairing: self
                .pairing
                .iter()
                .filter(|(_, m)| m.rows() > 0 && m.cols() > 0)
                .map(|(&(l, r), m)| PairDoc {
                    left: [l.0, l.1],
                    right: [r.0, r.1],
                    matrix: RawMatrix::from(m),
                })
                .collect(),
        };
        serde_json::to_value(doc).expect("modules serialize")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios::{self, ScenarioSpec};
    use crate::weight_ss::compute_e2;

    fn point_module(value: i64) -> ItoModule {
        ItoModule {
            weight: 0,
            dims: BTreeMap::from([((0, 0), 1)]),
            n_op: BTreeMap::new(),
            l_op: BTreeMap::new(),
            d_op: BTreeMap::new(),
            pairing: BTreeMap::from([(((0, 0), (0, 0)), RatMatrix::from_ints(1, 1, &[value]))]),
        }
    }

    fn all_pass(rs: &[CheckResult]) -> bool {
        rs.iter().all(|c| !c.failed())
    }

    #[test]
    fn one_dimensional_module() {
        assert!(all_pass(&check_ito_axioms(&point_module(1))));
        let bad = check_ito_axioms(&point_module(0));
        let perfect = bad.iter().find(|c| c.name == "ito_pairing_perfect").unwrap();
        assert!(perfect.failed() && perfect.witness_ok());
    }

    #[test]
    fn ngon_module() {
        let v = ito_from_strata(&scenarios::ngon(3).unwrap()).unwrap();
        for b in [(0, -1), (1, 0), (-1, 0), (0, 1)] {
            assert_eq!(v.dim(b), 3, "{b:?}");
        }
        let rs = check_ito_axioms(&v);
        assert!(all_pass(&rs), "{rs:#?}");
        let h = ito_cohomology(&v).unwrap();
        for b in [(0, -1), (1, 0), (-1, 0), (0, 1)] {
            assert_eq!(h.dim(b), 1, "{b:?}");
        }
        assert!(all_pass(&check_ito_axioms(&h)));
    }

    #[test]
    fn pn_module_is_one_column() {
        let v = ito_from_strata(&scenarios::good_reduction_pn(2).unwrap()).unwrap();
        assert_eq!(v.dims, BTreeMap::from([((0, -2), 1), ((0, 0), 1), ((0, 2), 1)]));
    }

    #[test]
    fn elliptic_is_rejected() {
        assert!(matches!(
            ito_from_strata(&scenarios::elliptic_stratum()),
            Err(Error::NotCycleGenerated)
        ));
    }

    #[test]
    fn zero_differential_is_a_fixpoint() {
        let v = point_module(1);
        assert_eq!(ito_cohomology(&v).unwrap(), {
            let mut w = v.clone();
            w.n_op.insert((0, 0), RatMatrix::zeros(0, 1));
            w.l_op.insert((0, 0), RatMatrix::zeros(0, 1));
            w.d_op.insert((0, 0), RatMatrix::zeros(0, 1));
            w
        });
        let h = ito_cohomology(&ito_from_strata(&scenarios::tetrahedron()).unwrap()).unwrap();
        assert_eq!(ito_cohomology(&h).unwrap(), h);
    }

    #[test]
    fn dims_match_pages() {
        for spec in ScenarioSpec::builtins() {
            let sc = spec.build().unwrap();
            if !sc.is_cycle_generated() {
                continue;
            }
            let e1 = build_e1(&sc).unwrap();
            let e2 = compute_e2(&e1).unwrap();
            let v = ito_from_strata(&sc).unwrap();
            let h = ito_cohomology(&v).unwrap();
            let n = sc.n as i64;
            for c in e1.cells() {
                let key = (c.a, c.b + c.a - n);
                assert_eq!(v.dim(key), c.dim(), "{spec}");
                assert_eq!(h.dim(key), e2.dim(c.a, c.b), "{spec}");
            }
        }
    }

    #[test]
    fn tetrahedron_module_and_cohomology_pass() {
        let v = ito_from_strata(&scenarios::tetrahedron()).unwrap();
        let rs = check_ito_axioms(&v);
        assert!(all_pass(&rs), "{:#?}", rs.iter().filter(|c| c.failed()).collect::<Vec<_>>());
        let h = ito_cohomology(&v).unwrap();
        let rs = check_ito_axioms(&h);
        assert!(all_pass(&rs), "{:#?}", rs.iter().filter(|c| c.failed()).collect::<Vec<_>>());
        let prim = rs
            .iter()
            .find(|c| c.name == "ito_positivity" && c.location["i"] == 0 && c.location["j"] == 0)
            .unwrap();
        assert_eq!(prim.facts["sign"], -1);
    }

    #[test]
    fn indefinite_positivity_has_witness() {
        let mut v = point_module(1);
        v.dims.insert((0, 0), 2);
        v.pairing
            .insert(((0, 0), (0, 0)), RatMatrix::from_ints(2, 2, &[1, 0, 0, -1]));
        let rs = check_ito_axioms(&v);
        let pos = rs.iter().find(|c| c.name == "ito_positivity").unwrap();
        assert!(pos.failed() && pos.witness_ok());
    }

    #[test]
    fn json_round_trip() {
        let v = ito_from_strata(&scenarios::ngon(4).unwrap()).unwrap();
        let text = serde_json::to_string(&v.to_json_value()).unwrap();
        let back = ItoModule::from_json(&text).unwrap();
        assert_eq!(check_ito_axioms(&back).len(), check_ito_axioms(&v).len());
        assert_eq!(back.to_json_value(), v.to_json_value());
    }

    #[test]
    fn ill_defined_pairing_is_detected() {
        // d : V^{0,0} -> V^{1,1} is nonzero while the pairing ignores it.
        let text = r#"{"weight":0,
            "spaces":[{"bidegree":[0,0],"dim":1},{"bidegree":[1,1],"dim":1},{"bidegree":[-1,-1],"dim":1}],
            "d":[{"from":[0,0],"matrix":[["1"]]}],
            "pairing":[{"left":[0,0],"right":[0,0],"matrix":[["1"]]},
                       {"left":[1,1],"right":[-1,-1],"matrix":[["1"]]}]}"#;
        let v = ItoModule::from_json(text).unwrap();
        assert!(matches!(ito_cohomology(&v), Err(Error::InducedPairingIllDefined { .. })));
    }
}
