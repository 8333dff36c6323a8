//! Strictly semistable configurations: the nerve of components together with
//! the graded cohomology of every stratum, its pairing, Lefschetz operator and
//! restriction maps. Gysin maps are derived from restrictions by adjunction.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::check::{zero_check, CheckResult, Witness};
use crate::error::{Error, Result};
use crate::linalg::{Rat, RatMatrix, RawMatrix};

/// Sorted, nonempty set of 1-based component indices.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Face(Vec<usize>);

impl Face {
    pub fn new(mut indices: Vec<usize>) -> Result<Self> {
        indices.sort_unstable();
        let before = indices.len();
        indices.dedup();
        if indices.is_empty() || indices.len() != before || indices[0] == 0 {
            return Err(Error::Malformed(format!(
                "face indices must be distinct positive integers, got {indices:?}"
            )));
        }
        Ok(Face(indices))
    }

    pub fn single(i: usize) -> Self {
        Face(vec![i])
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The face with the `a`-th index removed.
    pub fn without(&self, a: usize) -> Option<Face> {
        if self.0.len() < 2 {
            return None;
        }
        let mut v = self.0.clone();
        v.remove(a);
        Some(Face(v))
    }

    fn is_facet_of(&self, other: &Face) -> bool {
        other.len() == self.len() + 1 && self.0.iter().all(|i| other.0.contains(i))
    }
}

impl fmt::Display for Face {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|i| i.to_string()).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

/// Graded rational cohomology of a smooth proper stratum of complex dimension `dim`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StratumCohomology {
    pub dim: usize,
    /// Betti numbers in degrees `0..=2*dim`.
    pub betti: Vec<usize>,
    pub labels: BTreeMap<usize, Vec<String>>,
    /// Given blocks `H^m x H^{2dim-m} -> Q`; a missing block is derived from its complement.
    pub pairing: BTreeMap<usize, RatMatrix>,
    /// Given blocks `H^m -> H^{m+2}`; missing blocks are zero.
    pub lefschetz: BTreeMap<usize, RatMatrix>,
    pub slope_pure: bool,
}

impl StratumCohomology {
    /// Cohomology with the given Betti numbers and no structure yet.
    pub fn new(dim: usize, betti: Vec<usize>) -> Self {
        assert_eq!(betti.len(), 2 * dim + 1, "betti vector length");
        StratumCohomology {
            dim,
            betti,
            labels: BTreeMap::new(),
            pairing: BTreeMap::new(),
            lefschetz: BTreeMap::new(),
            slope_pure: false,
        }
    }

    pub fn point() -> Self {
        Self::projective_space(0)
    }

    /// `P^d` with hyperplane class `h`, basis `h^c` in degree `2c`.
    pub fn projective_space(d: usize) -> Self {
        let mut betti = vec![0; 2 * d + 1];
        for c in 0..=d {
            betti[2 * c] = 1;
        }
        let mut s = Self::new(d, betti);
        for c in 0..=d {
            s.pairing.insert(2 * c, RatMatrix::identity(1));
            if c < d {
                s.lefschetz.insert(2 * c, RatMatrix::identity(1));
            }
        }
        s.slope_pure = true;
        s
    }

    pub fn betti(&self, m: usize) -> usize {
        self.betti.get(m).copied().unwrap_or(0)
    }

    pub fn total_dim(&self) -> usize {
        self.betti.iter().sum()
    }

    pub fn top(&self) -> usize {
        2 * self.dim
    }

    /// Pairing block for degree `m` against `2dim-m`, derived by graded
    /// symmetry `P_{2d-m} = (-1)^m P_m^T` when only the complement is given.
    pub fn pairing_block(&self, m: usize) -> Option<RatMatrix> {
        if m > self.top() {
            return None;
        }
        let c = self.top() - m;
        if self.betti(m) == 0 || self.betti(c) == 0 {
            return Some(RatMatrix::zeros(self.betti(m), self.betti(c)));
        }
        if let Some(p) = self.pairing.get(&m) {
            return Some(p.clone());
        }
        self.pairing.get(&c).map(|p| {
            let t = p.transpose();
            if c % 2 == 1 {
                -&t
            } else {
                t
            }
        })
    }

    /// Pairing block with a missing one read as zero.
    pub fn pairing_or_zero(&self, m: usize) -> RatMatrix {
        self.pairing_block(m).unwrap_or_else(|| {
            RatMatrix::zeros(self.betti(m), self.betti(self.top().saturating_sub(m)))
        })
    }

    pub fn lefschetz_block(&self, m: usize) -> RatMatrix {
        self.lefschetz
            .get(&m)
            .cloned()
            .unwrap_or_else(|| RatMatrix::zeros(self.betti(m + 2), self.betti(m)))
    }

    /// `L^r : H^m -> H^{m+2r}`.
    pub fn lefschetz_power(&self, m: usize, r: usize) -> RatMatrix {
        let mut acc = RatMatrix::identity(self.betti(m));
        for s in 0..r {
            acc = &self.lefschetz_block(m + 2 * s) * &acc;
        }
        acc
    }

    /// The form `(x, y) -> x . L^{dim-m} y` on `H^m`, `m <= dim`.
    pub fn lefschetz_form(&self, m: usize) -> RatMatrix {
        let r = self.dim - m;
        &self.pairing_or_zero(m) * &self.lefschetz_power(m, r)
    }

    /// Graded tensor product, basis ordered by total degree then lexicographically.
    pub fn tensor(&self, other: &StratumCohomology) -> StratumCohomology {
        let dim = self.dim + other.dim;
        let layout = TensorLayout::new(self, other);
        let mut out = StratumCohomology::new(dim, layout.betti.clone());
        out.slope_pure = self.slope_pure && other.slope_pure;
        for p in 0..=2 * dim {
            let q = 2 * dim - p;
            if layout.betti[p] == 0 || layout.betti[q] == 0 {
                continue;
            }
            let mut block = RatMatrix::zeros(layout.betti[p], layout.betti[q]);
            for &(i, j, off) in &layout.blocks[p] {
                let (ic, jc) = (self.top() - i, other.top() - j);
                let Some(&(_, _, off2)) = layout.blocks[q].iter().find(|b| b.0 == ic && b.1 == jc) else {
                    continue;
                };
                let pa = self.pairing_or_zero(i);
                let pb = other.pairing_or_zero(j);
                let sign = if (j * ic) % 2 == 1 { -Rat::one() } else { Rat::one() };
                block.set_block(off, off2, &kron(&pa, &pb).scale(&sign));
            }
            out.pairing.insert(p, block);
        }
        for p in 0..(2 * dim).saturating_sub(1) {
            if layout.betti[p] == 0 || layout.betti[p + 2] == 0 {
                continue;
            }
            let mut block = RatMatrix::zeros(layout.betti[p + 2], layout.betti[p]);
            for &(i, j, off) in &layout.blocks[p] {
                if let Some(&(_, _, t)) = layout.blocks[p + 2].iter().find(|b| b.0 == i + 2 && b.1 == j) {
                    let m = kron(&self.lefschetz_block(i), &RatMatrix::identity(other.betti(j)));
                    block.add_block(t, off, &m);
                }
                if let Some(&(_, _, t)) = layout.blocks[p + 2].iter().find(|b| b.0 == i && b.1 == j + 2) {
                    let m = kron(&RatMatrix::identity(self.betti(i)), &other.lefschetz_block(j));
                    block.add_block(t, off, &m);
                }
            }
            out.lefschetz.insert(p, block);
        }
        out
    }
}

/// Degree layout of `A (x) B`: per total degree, the blocks `(i, j, offset)`.
struct TensorLayout {
    betti: Vec<usize>,
    blocks: Vec<Vec<(usize, usize, usize)>>,
}

impl TensorLayout {
    fn new(a: &StratumCohomology, b: &StratumCohomology) -> Self {
        let top = a.top() + b.top();
        let mut betti = vec![0; top + 1];
        let mut blocks = vec![Vec::new(); top + 1];
        for p in 0..=top {
            for i in 0..=a.top().min(p) {
                let j = p - i;
                if j > b.top() {
                    continue;
                }
                let size = a.betti(i) * b.betti(j);
                if size > 0 {
                    blocks[p].push((i, j, betti[p]));
                    betti[p] += size;
                }
            }
        }
        TensorLayout { betti, blocks }
    }
}

/// Kronecker product.
pub fn kron(a: &RatMatrix, b: &RatMatrix) -> RatMatrix {
    let mut out = RatMatrix::zeros(a.rows() * b.rows(), a.cols() * b.cols());
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            let x = a.get(i, j);
            if x.is_zero() {
                continue;
            }
            out.set_block(i * b.rows(), j * b.cols(), &b.scale(x));
        }
    }
    out
}

/// A level `Y^{(k)}`: the direct sum over faces of size `k`, with summand offsets per degree.
#[derive(Clone, Debug)]
pub struct Level {
    pub k: usize,
    pub faces: Vec<Face>,
    dims: Vec<usize>,
    offsets: Vec<Vec<usize>>,
}

impl Level {
    pub fn dim(&self, m: usize) -> usize {
        self.dims.get(m).copied().unwrap_or(0)
    }

    /// Offset of a face's summand in degree `m`; degrees beyond the level's range are empty.
    pub fn offset(&self, face: usize, m: usize) -> usize {
        self.offsets.get(m).map_or(0, |o| o[face])
    }

    pub fn position(&self, face: &Face) -> Option<usize> {
        self.faces.binary_search(face).ok()
    }

    /// Nonzero degrees with their dimensions.
    pub fn degrees(&self) -> BTreeMap<usize, usize> {
        self.dims
            .iter()
            .enumerate()
            .filter(|(_, &d)| d > 0)
            .map(|(m, &d)| (m, d))
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.dims.iter().all(|&d| d == 0)
    }
}

/// What went wrong in a strata complex, located at a face, an inclusion or a level.
#[derive(Clone, Debug, Serialize)]
pub struct Violation {
    pub kind: String,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub face: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub to: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub level: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub degree: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

impl Violation {
    fn at_face(kind: &str, message: String, face: &Face, degree: Option<usize>) -> Self {
        Violation {
            kind: kind.into(),
            message,
            face: Some(face.indices().to_vec()),
            to: None,
            level: None,
            degree,
            witness: None,
        }
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

type Inclusion = (Face, Face);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StrataComplex {
    pub name: String,
    /// Dimension of the generic fiber.
    pub n: usize,
    pub components: Vec<String>,
    pub faces: BTreeMap<Face, StratumCohomology>,
    /// Restriction `H^m(Y_I) -> H^m(Y_J)` per inclusion `I ⊂ J` and degree.
    pub restrictions: BTreeMap<Inclusion, BTreeMap<usize, RatMatrix>>,
}

impl StrataComplex {
    pub fn face_dim(&self, face: &Face) -> usize {
        self.n + 1 - face.len()
    }

    pub fn max_level(&self) -> usize {
        self.faces.keys().map(Face::len).max().unwrap_or(0)
    }

    /// Every face has slope-pure (cycle-generated) cohomology.
    pub fn is_cycle_generated(&self) -> bool {
        self.faces.values().all(|c| c.slope_pure)
    }

    /// `Y^{(k)}`, for `k >= 1`; zero beyond the largest face.
    pub fn level(&self, k: usize) -> Level {
        let faces: Vec<Face> = self.faces.keys().filter(|f| f.len() == k).cloned().collect();
        let top = if k >= 1 && k <= self.n + 1 { 2 * (self.n + 1 - k) } else { 0 };
        let mut dims = vec![0; top + 1];
        let mut offsets = vec![Vec::with_capacity(faces.len()); top + 1];
        for f in &faces {
            let c = &self.faces[f];
            for m in 0..=top {
                offsets[m].push(dims[m]);
                dims[m] += c.betti(m);
            }
        }
        Level {
            k,
            faces,
            dims,
            offsets,
        }
    }

    fn restriction_block(&self, from: &Face, to: &Face, m: usize) -> Option<RatMatrix> {
        let rows = self.faces[to].betti(m);
        let cols = self.faces[from].betti(m);
        if rows == 0 || cols == 0 {
            return Some(RatMatrix::zeros(rows, cols));
        }
        self.restrictions
            .get(&(from.clone(), to.clone()))
            .and_then(|maps| maps.get(&m))
            .cloned()
    }

    /// `ρ : H^m(Y^{(k)}) -> H^m(Y^{(k+1)})`, the alternating sum of restrictions.
    pub fn rho(&self, k: usize, m: usize) -> Result<RatMatrix> {
        self.assemble_rho(k, m, true)
    }

    /// `τ : H^m(Y^{(k)}) -> H^{m+2}(Y^{(k-1)})`, the Poincaré adjoint of `ρ`.
    pub fn tau(&self, k: usize, m: usize) -> Result<RatMatrix> {
        self.assemble_tau(k, m, true)
    }

    /// `ρ` with absent restrictions read as zero; validation reports them separately.
    pub(crate) fn rho_lenient(&self, k: usize, m: usize) -> RatMatrix {
        self.assemble_rho(k, m, false).expect("lenient assembly")
    }

    /// `τ` with absent restrictions and singular pairings read as zero.
    pub(crate) fn tau_lenient(&self, k: usize, m: usize) -> RatMatrix {
        self.assemble_tau(k, m, false).expect("lenient assembly")
    }

    fn assemble_rho(&self, k: usize, m: usize, strict: bool) -> Result<RatMatrix> {
        let src = self.level(k);
        let dst = self.level(k + 1);
        let mut out = RatMatrix::zeros(dst.dim(m), src.dim(m));
        if k == 0 {
            return Ok(out);
        }
        for (jpos, big) in dst.faces.iter().enumerate() {
            for a in 0..big.len() {
                let small = big.without(a).expect("faces at level >= 2");
                let Some(ipos) = src.position(&small) else {
                    continue;
                };
                let block = match self.restriction_block(&small, big, m) {
                    Some(b) => b,
                    None if strict => {
                        return Err(Error::MissingRestriction {
                            from: small.indices().to_vec(),
                            to: big.indices().to_vec(),
                            degree: m as u32,
                        })
                    }
                    None => continue,
                };
                let signed = if a % 2 == 1 { -&block } else { block };
                out.add_block(dst.offset(jpos, m), src.offset(ipos, m), &signed);
            }
        }
        Ok(out)
    }

    /// Gysin map `H^m(Y_J) -> H^{m+2}(Y_I)` for a facet `I ⊂ J`, defined by
    /// `∫_I G(x) y = ∫_J x R(y)`.
    pub fn gysin(&self, small: &Face, big: &Face, m: usize) -> Result<RatMatrix> {
        let ci = &self.faces[small];
        let cj = &self.faces[big];
        let rows = ci.betti(m + 2);
        let cols = cj.betti(m);
        if rows == 0 || cols == 0 {
            return Ok(RatMatrix::zeros(rows, cols));
        }
        let dual = ci.top() - m - 2;
        let r = self.restriction_block(small, big, dual).ok_or_else(|| Error::MissingRestriction {
            from: small.indices().to_vec(),
            to: big.indices().to_vec(),
            degree: dual as u32,
        })?;
        let pi = ci.pairing_block(m + 2).ok_or(Error::PairingNotPerfect {
            face: small.indices().to_vec(),
            degree: (m + 2) as u32,
        })?;
        let pj = cj.pairing_block(m).ok_or(Error::PairingNotPerfect {
            face: big.indices().to_vec(),
            degree: m as u32,
        })?;
        let pi_inv_t = pi.transpose().inverse().map_err(|_| Error::PairingNotPerfect {
            face: small.indices().to_vec(),
            degree: (m + 2) as u32,
        })?;
        Ok(&(&pi_inv_t * &r.transpose()) * &pj.transpose())
    }

    fn assemble_tau(&self, k: usize, m: usize, strict: bool) -> Result<RatMatrix> {
        let src = self.level(k);
        if k <= 1 {
            return Ok(RatMatrix::zeros(0, src.dim(m)));
        }
        let dst = self.level(k - 1);
        let mut out = RatMatrix::zeros(dst.dim(m + 2), src.dim(m));
        for (jpos, big) in src.faces.iter().enumerate() {
            for a in 0..big.len() {
                let small = big.without(a).expect("faces at level >= 2");
                let Some(ipos) = dst.position(&small) else {
                    continue;
                };
                let block = match self.gysin(&small, big, m) {
                    Ok(b) => b,
                    Err(e) if strict => return Err(e),
                    Err(_) => continue,
                };
                let signed = if a % 2 == 1 { -&block } else { block };
                out.add_block(dst.offset(ipos, m + 2), src.offset(jpos, m), &signed);
            }
        }
        Ok(out)
    }

    /// Block-diagonal Lefschetz operator `H^m(Y^{(k)}) -> H^{m+2}(Y^{(k)})`.
    pub fn level_lefschetz(&self, k: usize, m: usize) -> RatMatrix {
        let lv = self.level(k);
        let mut out = RatMatrix::zeros(lv.dim(m + 2), lv.dim(m));
        for (pos, f) in lv.faces.iter().enumerate() {
            out.set_block(lv.offset(pos, m + 2), lv.offset(pos, m), &self.faces[f].lefschetz_block(m));
        }
        out
    }

    /// Block-diagonal Poincaré pairing `H^m(Y^{(k)}) x H^{top-m}(Y^{(k)})`.
    pub fn level_pairing(&self, k: usize, m: usize) -> RatMatrix {
        let lv = self.level(k);
        let top = 2 * (self.n + 1 - k);
        let c = top - m;
        let mut out = RatMatrix::zeros(lv.dim(m), lv.dim(c));
        for (pos, f) in lv.faces.iter().enumerate() {
            out.set_block(lv.offset(pos, m), lv.offset(pos, c), &self.faces[f].pairing_or_zero(m));
        }
        out
    }

    /// `ρ² = 0`, `τ² = 0` and `ρτ + τρ = 0` on every level where they are defined.
    ///
    /// The anticommutation is checked from level 2 on: at level 1 it would
    /// involve the normal bundle of the whole special fiber, which never enters
    /// the first page.
    pub fn structure_checks(&self) -> Vec<CheckResult> {
        let mut out = Vec::new();
        let top_level = self.max_level();
        for k in 1..=top_level {
            let lv = self.level(k);
            for m in 0..=2 * (self.n + 1 - k) {
                if lv.dim(m) == 0 {
                    continue;
                }
                let loc = [("k", k as i64), ("m", m as i64)];
                if k + 2 <= top_level {
                    let rr = &self.rho_lenient(k + 1, m) * &self.rho_lenient(k, m);
                    out.push(zero_check(CheckResult::new("rho_squared", &loc), &rr));
                }
                if k >= 3 {
                    let tt = &self.tau_lenient(k - 1, m + 2) * &self.tau_lenient(k, m);
                    out.push(zero_check(CheckResult::new("tau_squared", &loc), &tt));
                }
                if k >= 2 {
                    let rt = &self.rho_lenient(k - 1, m + 2) * &self.tau_lenient(k, m);
                    let tr = &self.tau_lenient(k + 1, m) * &self.rho_lenient(k, m);
                    out.push(zero_check(CheckResult::new("rho_tau_anticommute", &loc), &(&rt + &tr)));
                }
            }
        }
        out
    }

    /// Checks every invariant of the configuration and collects violations.
    pub fn validate(&self) -> ValidationReport {
        let mut v = Vec::new();
        for face in self.faces.keys() {
            for a in 0..face.len() {
                if let Some(sub) = face.without(a) {
                    if !self.faces.contains_key(&sub) {
                        v.push(Violation::at_face(
                            "nerve_not_closed",
                            format!("face {face} present but subface {sub} absent"),
                            face,
                            None,
                        ));
                    }
                }
            }
        }
        for (face, c) in &self.faces {
            self.validate_face(face, c, &mut v);
        }
        self.validate_restrictions(&mut v);
        for r in self.structure_checks() {
            if r.failed() {
                let level = r.location["k"] as usize;
                let degree = r.location["m"] as usize;
                let what = match r.name.as_str() {
                    "rho_squared" => "rho∘rho is nonzero",
                    "tau_squared" => "tau∘tau is nonzero",
                    _ => "rho∘tau + tau∘rho is nonzero",
                };
                v.push(Violation {
                    kind: r.name.clone(),
                    message: format!("{what} on H^{degree} of level {level}"),
                    face: None,
                    to: None,
                    level: Some(level),
                    degree: Some(degree),
                    witness: r.witness,
                });
            }
        }
        ValidationReport { violations: v }
    }

    fn validate_face(&self, face: &Face, c: &StratumCohomology, v: &mut Vec<Violation>) {
        let d = c.dim;
        for m in 0..=c.top() {
            let comp = c.top() - m;
            let Some(p) = c.pairing_block(m) else {
                if m <= comp {
                    v.push(Violation::at_face(
                        "pairing_missing",
                        format!("pairing missing at face {face}"),
                        face,
                        Some(m),
                    ));
                }
                continue;
            };
            if m <= comp && (p.rows() != p.cols() || p.rank() != p.rows()) {
                v.push(Violation::at_face(
                    "pairing_not_perfect",
                    format!("pairing not perfect at face {face}"),
                    face,
                    Some(m),
                ));
            }
            if m < comp {
                if let (Some(a), Some(b)) = (c.pairing.get(&m), c.pairing.get(&comp)) {
                    let expected = if m % 2 == 1 { -&a.transpose() } else { a.transpose() };
                    if *b != expected {
                        v.push(Violation::at_face(
                            "pairing_not_graded_symmetric",
                            format!("pairing blocks in degrees {m} and {comp} disagree at face {face}"),
                            face,
                            Some(m),
                        ));
                    }
                }
            } else if m == comp {
                let expected = if m % 2 == 1 { -&p.transpose() } else { p.transpose() };
                if p != expected {
                    v.push(Violation::at_face(
                        "pairing_not_graded_symmetric",
                        format!("middle pairing has the wrong symmetry at face {face}"),
                        face,
                        Some(m),
                    ));
                }
            }
        }
        for (&m, l) in &c.lefschetz {
            if m + 2 > c.top() || l.rows() != c.betti(m + 2) || l.cols() != c.betti(m) {
                v.push(Violation::at_face(
                    "lefschetz_shape",
                    format!("Lefschetz block in degree {m} has the wrong shape at face {face}"),
                    face,
                    Some(m),
                ));
                return;
            }
        }
        for m in 0..c.top().saturating_sub(1) {
            let lhs = &c.lefschetz_block(m).transpose() * &c.pairing_or_zero(m + 2);
            let rhs = &c.pairing_or_zero(m) * &c.lefschetz_block(c.top() - m - 2);
            if lhs != rhs {
                v.push(Violation::at_face(
                    "lefschetz_not_self_adjoint",
                    format!("Lefschetz operator not self-adjoint at face {face}"),
                    face,
                    Some(m),
                ));
            }
        }
        for m in 0..=d {
            let lp = c.lefschetz_power(m, d - m);
            if lp.rows() != lp.cols() || lp.rank() != lp.cols() {
                v.push(Violation::at_face(
                    "hard_lefschetz",
                    format!("hard Lefschetz fails at face {face}"),
                    face,
                    Some(m),
                ));
            }
        }
        if c.slope_pure {
            for m in (1..=c.top()).step_by(2) {
                if c.betti(m) != 0 {
                    v.push(Violation::at_face(
                        "slope_pure_odd",
                        format!("slope-pure face {face} has odd cohomology"),
                        face,
                        Some(m),
                    ));
                }
            }
        }
    }

    fn validate_restrictions(&self, v: &mut Vec<Violation>) {
        for big in self.faces.keys().filter(|f| f.len() >= 2) {
            for a in 0..big.len() {
                let small = big.without(a).expect("size >= 2");
                if !self.faces.contains_key(&small) {
                    continue;
                }
                let ci = &self.faces[&small];
                let cj = &self.faces[big];
                for m in 0..=cj.top() {
                    let Some(r) = self.restriction_block(&small, big, m) else {
                        v.push(Violation {
                            kind: "restriction_missing".into(),
                            message: format!("restriction {small} -> {big} missing in degree {m}"),
                            face: Some(small.indices().to_vec()),
                            to: Some(big.indices().to_vec()),
                            level: None,
                            degree: Some(m),
                            witness: None,
                        });
                        continue;
                    };
                    if r.rows() != cj.betti(m) || r.cols() != ci.betti(m) {
                        v.push(Violation {
                            kind: "restriction_shape".into(),
                            message: format!("restriction {small} -> {big} has the wrong shape in degree {m}"),
                            face: Some(small.indices().to_vec()),
                            to: Some(big.indices().to_vec()),
                            level: None,
                            degree: Some(m),
                            witness: None,
                        });
                        continue;
                    }
                    if m + 2 <= cj.top() {
                        if let Some(r2) = self.restriction_block(&small, big, m + 2) {
                            if r2.rows() == cj.betti(m + 2) && r2.cols() == ci.betti(m + 2) {
                                let lhs = &r2 * &ci.lefschetz_block(m);
                                let rhs = &cj.lefschetz_block(m) * &r;
                                if lhs != rhs {
                                    v.push(Violation {
                                        kind: "restriction_lefschetz".into(),
                                        message: format!(
                                            "restriction {small} -> {big} does not commute with Lefschetz in degree {m}"
                                        ),
                                        face: Some(small.indices().to_vec()),
                                        to: Some(big.indices().to_vec()),
                                        level: None,
                                        degree: Some(m),
                                        witness: None,
                                    });
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    /// Runs [`validate`](Self::validate) and turns violations into an error.
    pub fn ensure_valid(&self) -> Result<()> {
        let r = self.validate();
        if r.is_valid() {
            Ok(())
        } else {
            Err(Error::Invalid(r.violations.len()))
        }
    }

    /// Tensors every face with `factor`; restrictions become `R (x) 1`.
    pub fn product_with_factor(&self, factor: &StratumCohomology) -> StrataComplex {
        let faces: BTreeMap<Face, StratumCohomology> = self
            .faces
            .iter()
            .map(|(f, c)| (f.clone(), c.tensor(factor)))
            .collect();
        let mut restrictions = BTreeMap::new();
        for (small, big) in self.restrictions.keys() {
            let (ci, cj) = (&self.faces[small], &self.faces[big]);
            let li = TensorLayout::new(ci, factor);
            let lj = TensorLayout::new(cj, factor);
            let mut maps = BTreeMap::new();
            for p in 0..lj.betti.len() {
                let cols = li.betti.get(p).copied().unwrap_or(0);
                let mut block = RatMatrix::zeros(lj.betti[p], cols);
                for &(i, j, off) in &lj.blocks[p] {
                    if let Some(&(_, _, src)) = li.blocks[p].iter().find(|b| b.0 == i && b.1 == j) {
                        let r = self
                            .restriction_block(small, big, i)
                            .unwrap_or_else(|| RatMatrix::zeros(cj.betti(i), ci.betti(i)));
                        block.set_block(off, src, &kron(&r, &RatMatrix::identity(factor.betti(j))));
                    }
                }
                if block.rows() > 0 && block.cols() > 0 {
                    maps.insert(p, block);
                }
            }
            restrictions.insert((small.clone(), big.clone()), maps);
        }
        StrataComplex {
            name: self.name.clone(),
            n: self.n + factor.dim,
            components: self.components.clone(),
            faces,
            restrictions,
        }
    }

    /// Replaces the basis of `H^m(Y_face)` by the columns of `g` (old coordinates).
    pub fn change_basis(&mut self, face: &Face, m: usize, g: &RatMatrix) -> Result<()> {
        let ginv = g.inverse()?;
        let c = self.faces.get_mut(face).ok_or_else(|| Error::Malformed(format!("no face {face}")))?;
        if g.rows() != c.betti(m) {
            return Err(Error::DimensionMismatch(format!("basis change of size {} in degree {m}", g.rows())));
        }
        let comp = c.top() - m;
        // Materialize both pairing blocks so the transform is uniform.
        let pm = c.pairing_or_zero(m);
        let pc = c.pairing_or_zero(comp);
        c.pairing.insert(m, &g.transpose() * &pm);
        if comp != m {
            c.pairing.insert(comp, &pc * g);
        }
        let pm = c.pairing[&m].clone();
        if comp == m {
            c.pairing.insert(m, &pm * g);
        }
        if m + 2 <= c.top() {
            let l = c.lefschetz_block(m);
            c.lefschetz.insert(m, &l * g);
        }
        if m >= 2 {
            let l = c.lefschetz_block(m - 2);
            c.lefschetz.insert(m - 2, &ginv * &l);
        }
        c.labels.remove(&m);
        for ((small, big), maps) in self.restrictions.iter_mut() {
            if let Some(r) = maps.get_mut(&m) {
                if small == face {
                    *r = &*r * g;
                }
                if big == face {
                    *r = &ginv * &*r;
                }
            }
        }
        Ok(())
    }
}

#[derive(Deserialize, Serialize)]
struct FaceDoc {
    indices: Vec<usize>,
    cohomology: BTreeMap<String, usize>,
    #[serde(default)]
    pairing: BTreeMap<String, RawMatrix>,
    #[serde(default)]
    lefschetz: BTreeMap<String, RawMatrix>,
    #[serde(default)]
    slope_pure: bool,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    labels: BTreeMap<String, Vec<String>>,
}

#[derive(Deserialize, Serialize)]
struct RestrictionDoc {
    from: Vec<usize>,
    to: Vec<usize>,
    maps: BTreeMap<String, RawMatrix>,
}

#[derive(Deserialize, Serialize)]
struct ComplexDoc {
    name: String,
    dimension: usize,
    components: Vec<String>,
    faces: Vec<FaceDoc>,
    #[serde(default)]
    restrictions: Vec<RestrictionDoc>,
}

fn parse_degree(key: &str, top: usize, what: &str) -> Result<usize> {
    let m: usize = key
        .parse()
        .map_err(|_| Error::Malformed(format!("{what}: degree key {key:?} is not a nonnegative integer")))?;
    if m > top {
        return Err(Error::Malformed(format!("{what}: degree {m} exceeds {top}")));
    }
    Ok(m)
}

impl StrataComplex {
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ComplexDoc = serde_json::from_str(text)?;
        Self::from_doc(doc)
    }

    pub fn from_value(value: serde_json::Value) -> Result<Self> {
        let doc: ComplexDoc = serde_json::from_value(value)?;
        Self::from_doc(doc)
    }

    fn from_doc(doc: ComplexDoc) -> Result<Self> {
        let s = doc.components.len();
        let n = doc.dimension;
        let mut faces = BTreeMap::new();
        for fd in doc.faces {
            let face = Face::new(fd.indices)?;
            if face.indices().iter().any(|&i| i > s) {
                return Err(Error::Malformed(format!("face {face} uses an index beyond {s} components")));
            }
            if face.len() > n + 1 {
                return Err(Error::Malformed(format!("face {face} is too large for dimension {n}")));
            }
            let dim = n + 1 - face.len();
            let what = format!("face {face}");
            let mut betti = vec![0; 2 * dim + 1];
            for (k, d) in &fd.cohomology {
                betti[parse_degree(k, 2 * dim, &what)?] = *d;
            }
            let mut c = StratumCohomology::new(dim, betti);
            c.slope_pure = fd.slope_pure;
            for (k, raw) in &fd.pairing {
                let m = parse_degree(k, 2 * dim, &what)?;
                let p = raw.shaped(c.betti(m), c.betti(2 * dim - m)).map_err(|e| {
                    Error::Malformed(format!("{what}: pairing in degree {m}: {e}"))
                })?;
                c.pairing.insert(m, p);
            }
            for (k, raw) in &fd.lefschetz {
                let m = parse_degree(k, 2 * dim, &what)?;
                let l = raw.shaped(c.betti(m + 2), c.betti(m)).map_err(|e| {
                    Error::Malformed(format!("{what}: Lefschetz in degree {m}: {e}"))
                })?;
                c.lefschetz.insert(m, l);
            }
            for (k, labels) in fd.labels {
                let m = parse_degree(&k, 2 * dim, &what)?;
                c.labels.insert(m, labels);
            }
            if faces.insert(face.clone(), c).is_some() {
                return Err(Error::Malformed(format!("face {face} listed twice")));
            }
        }
        let mut restrictions: BTreeMap<Inclusion, BTreeMap<usize, RatMatrix>> = BTreeMap::new();
        for rd in doc.restrictions {
            let small = Face::new(rd.from)?;
            let big = Face::new(rd.to)?;
            if !small.is_facet_of(&big) {
                return Err(Error::Malformed(format!("restriction {small} -> {big} is not a facet inclusion")));
            }
            let (Some(ci), Some(cj)) = (faces.get(&small), faces.get(&big)) else {
                return Err(Error::Malformed(format!("restriction {small} -> {big} names an absent face")));
            };
            let what = format!("restriction {small} -> {big}");
            let entry = restrictions.entry((small.clone(), big.clone())).or_default();
            for (k, raw) in &rd.maps {
                let m = parse_degree(k, cj.top(), &what)?;
                let r = raw
                    .shaped(cj.betti(m), ci.betti(m))
                    .map_err(|e| Error::Malformed(format!("{what} in degree {m}: {e}")))?;
                entry.insert(m, r);
            }
        }
        Ok(StrataComplex {
            name: doc.name,
            n,
            components: doc.components,
            faces,
            restrictions,
        })
    }

    fn to_doc(&self) -> ComplexDoc {
        let faces = self
            .faces
            .iter()
            .map(|(f, c)| FaceDoc {
                indices: f.indices().to_vec(),
                cohomology: c
                    .betti
                    .iter()
                    .enumerate()
                    .filter(|(_, &d)| d > 0)
                    .map(|(m, &d)| (m.to_string(), d))
                    .collect(),
                pairing: (0..=c.dim)
                    .filter(|&m| c.betti(m) > 0)
                    .filter_map(|m| c.pairing_block(m).map(|p| (m.to_string(), RawMatrix::from(&p))))
                    .collect(),
                lefschetz: c
                    .lefschetz
                    .iter()
                    .filter(|(_, l)| l.rows() > 0 && l.cols() > 0)
                    .map(|(m, l)| (m.to_string(), RawMatrix::from(l)))
                    .collect(),
                slope_pure: c.slope_pure,
                labels: c.labels.iter().map(|(m, l)| (m.to_string(), l.clone())).collect(),
            })
            .collect();
        let restrictions = self
            .restrictions
            .iter()
            .map(|((small, big), maps)| RestrictionDoc {
                from: small.indices().to_vec(),
                to: big.indices().to_vec(),
                maps: maps
                    .iter()
                    .filter(|(_, r)| r.rows() > 0 && r.cols() > 0)
                    .map(|(m, r)| (m.to_string(), RawMatrix::from(r)))
                    .collect(),
            })
            .collect();
        ComplexDoc {
            name: self.name.clone(),
            dimension: self.n,
            components: self.components.clone(),
            faces,
            restrictions,
        }
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(self.to_doc()).expect("strata documents serialize")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_doc()).expect("strata documents serialize")
    }
}

/// Face lookup helper for builders and tests.
pub fn face(indices: &[usize]) -> Face {
    Face::new(indices.to_vec()).expect("valid face")
}

/// All nonempty faces as a set, for nerve computations.
pub fn nerve(sc: &StrataComplex) -> BTreeSet<Face> {
    sc.faces.keys().cloned().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios;

    #[test]
    fn face_display_and_facets() {
        let f = face(&[3, 1, 2]);
        assert_eq!(f.to_string(), "{1,2,3}");
        assert_eq!(f.without(1), Some(face(&[1, 3])));
        assert!(Face::new(vec![]).is_err());
        assert!(Face::new(vec![1, 1]).is_err());
        assert!(Face::new(vec![0]).is_err());
    }

    #[test]
    fn projective_space_tensor_counts() {
        let p1 = StratumCohomology::projective_space(1);
        let t = p1.tensor(&p1);
        assert_eq!(t.betti, vec![1, 0, 2, 0, 1]);
        // P1 x P1: h1.h2 = 1, h1^2 = 0.
        assert_eq!(t.pairing_block(2).unwrap(), RatMatrix::from_ints(2, 2, &[0, 1, 1, 0]));
        assert_eq!(t.lefschetz_block(0), RatMatrix::from_ints(2, 1, &[1, 1]));
    }

    #[test]
    fn ngon_levels() {
        let sc = scenarios::ngon(3).unwrap();
        assert_eq!(sc.level(1).degrees(), BTreeMap::from([(0, 3), (2, 3)]));
        assert_eq!(sc.level(2).degrees(), BTreeMap::from([(0, 3)]));
        assert!(sc.level(5).is_zero());
    }

    #[test]
    fn ngon_rho_and_tau() {
        let sc = scenarios::ngon(3).unwrap();
        let rho = sc.rho(1, 0).unwrap();
        assert_eq!((rho.rows(), rho.cols(), rho.rank()), (3, 3, 2));
        let tau = sc.tau(2, 0).unwrap();
        assert_eq!((tau.rows(), tau.cols(), tau.rank()), (3, 3, 2));
        assert_eq!(sc.tau(1, 0).unwrap().rows(), 0);
        assert!(sc.validate().is_valid());
    }

    #[test]
    fn single_component_rho_is_empty() {
        let sc = scenarios::good_reduction_pn(2).unwrap();
        let rho = sc.rho(1, 0).unwrap();
        assert_eq!(rho.rows(), 0);
        assert!(sc.validate().is_valid());
        assert_eq!(sc.tau(1, 2).unwrap().rows(), 0);
    }

    #[test]
    fn zeroed_pairing_is_located() {
        let mut sc = scenarios::ngon(3).unwrap();
        let c = sc.faces.get_mut(&face(&[1])).unwrap();
        c.pairing.insert(0, RatMatrix::zeros(1, 1));
        c.pairing.remove(&2);
        let report = sc.validate();
        assert!(report
            .violations
            .iter()
            .any(|v| v.message == "pairing not perfect at face {1}"));
    }

    #[test]
    fn missing_restriction_is_an_error_for_rho() {
        let mut sc = scenarios::ngon(3).unwrap();
        sc.restrictions.remove(&(face(&[1]), face(&[1, 2])));
        assert!(matches!(sc.rho(1, 0), Err(Error::MissingRestriction { .. })));
        assert!(!sc.validate().is_valid());
    }

    #[test]
    fn json_round_trip() {
        let sc = scenarios::tetrahedron();
        let back = StrataComplex::from_json(&sc.to_json()).unwrap();
        assert_eq!(back.to_json(), sc.to_json());
        assert!(back.validate().is_valid());
    }

    #[test]
    fn rejects_malformed_documents() {
        let bad = r#"{"name":"x","dimension":1,"components":["a"],
            "faces":[{"indices":[1],"cohomology":{"5":1}}]}"#;
        assert!(matches!(StrataComplex::from_json(bad), Err(Error::Malformed(_))));
        let bad = r#"{"name":"x","dimension":1,"components":["a"],
            "faces":[{"indices":[1],"cohomology":{"0":1},"pairing":{"0":[["1","0"]]}}]}"#;
        assert!(StrataComplex::from_json(bad).is_err());
    }

    #[test]
    fn product_with_point_is_identity() {
        let sc = scenarios::ngon(4).unwrap();
        let p = sc.product_with_factor(&StratumCohomology::point());
        assert_eq!(p.to_json(), sc.to_json());
    }

    #[test]
    fn ngon_times_p1_levels() {
        let sc = scenarios::ngon(3).unwrap().product_with_factor(&StratumCohomology::projective_space(1));
        assert_eq!(sc.n, 2);
        assert_eq!(sc.faces[&face(&[1])].betti, vec![1, 0, 2, 0, 1]);
        assert!(sc.validate().is_valid());
    }

    #[test]
    fn pn_times_p1_is_pascal() {
        let sc = scenarios::good_reduction_pn(2)
            .unwrap()
            .product_with_factor(&StratumCohomology::projective_space(1));
        assert_eq!(sc.faces[&face(&[1])].betti, vec![1, 0, 2, 0, 2, 0, 1]);
        assert!(sc.validate().is_valid());
    }

    #[test]
    fn tau_is_deterministic() {
        let sc = scenarios::tetrahedron();
        assert_eq!(sc.tau(2, 0).unwrap(), sc.tau(2, 0).unwrap());
        assert_eq!(sc.tau(3, 0).unwrap(), sc.tau(3, 0).unwrap());
    }

    #[test]
    fn basis_change_preserves_validity() {
        let mut sc = scenarios::tetrahedron();
        let g = RatMatrix::from_ints(3, 3, &[1, 1, 0, 0, 1, 0, 0, -2, 1]);
        sc.change_basis(&face(&[2]), 2, &g).unwrap();
        assert!(sc.validate().is_valid());
    }
}
