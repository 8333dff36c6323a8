//! The weight spectral sequence: first page from strata cohomology, its
//! operators `d1 = ρ + τ`, `N` and `L`, and the second page.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use serde::Serialize;

use crate::check::{zero_check, CheckResult, Witness};
use crate::error::{Error, Result};
use crate::linalg::{image, induced_map, kernel, Rat, RatMatrix, QuotientSpace};
use crate::strata::{Face, StrataComplex};

pub type Bidegree = (i64, i64);

/// One summand `H^degree(Y^{(level)})` of an E1 cell, indexed by `k`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Summand {
    pub k: usize,
    pub level: usize,
    pub degree: usize,
    /// Tate twist `a - k`.
    pub twist: i64,
    pub offset: usize,
    pub dim: usize,
}

impl Summand {
    /// Slope of the summand after the twist, for cycle-generated strata.
    pub fn slope(&self) -> Rat {
        Rat::new(BigInt::from(self.degree as i64 - 2 * self.twist), BigInt::from(2))
    }
}

#[derive(Clone, Debug)]
pub struct E1Cell {
    pub a: i64,
    pub b: i64,
    pub summands: Vec<Summand>,
}

impl E1Cell {
    pub fn dim(&self) -> usize {
        self.summands.iter().map(|s| s.dim).sum()
    }

    pub fn summand(&self, k: usize) -> Option<&Summand> {
        self.summands.iter().find(|s| s.k == k)
    }
}

/// `E1^{a,b} = ⊕_{k ≥ max(a,0)} H^{2(a-k)+b}(Y^{(2k-a+1)})` with its operators.
#[derive(Clone, Debug)]
pub struct E1Page {
    pub n: usize,
    pub cycle_generated: bool,
    cells: BTreeMap<Bidegree, E1Cell>,
    d: BTreeMap<Bidegree, RatMatrix>,
    nmap: BTreeMap<Bidegree, RatMatrix>,
    lmap: BTreeMap<Bidegree, RatMatrix>,
}

fn bidegree(k: usize, level: usize, m: usize) -> Bidegree {
    let a = 2 * k as i64 + 1 - level as i64;
    let b = m as i64 + 2 * (level as i64 - 1 - k as i64);
    (a, b)
}

impl E1Page {
    pub fn cells(&self) -> impl Iterator<Item = &E1Cell> {
        self.cells.values()
    }

    pub fn cell(&self, a: i64, b: i64) -> Option<&E1Cell> {
        self.cells.get(&(a, b))
    }

    pub fn dim(&self, a: i64, b: i64) -> usize {
        self.cell(a, b).map_or(0, E1Cell::dim)
    }

    fn op(map: &BTreeMap<Bidegree, RatMatrix>, key: Bidegree, rows: usize, cols: usize) -> RatMatrix {
        map.get(&key).cloned().unwrap_or_else(|| RatMatrix::zeros(rows, cols))
    }

    /// `d1 : E1^{a,b} -> E1^{a+1,b}`.
    pub fn d(&self, a: i64, b: i64) -> RatMatrix {
        Self::op(&self.d, (a, b), self.dim(a + 1, b), self.dim(a, b))
    }

    /// `N : E1^{a,b} -> E1^{a+2,b-2}`.
    pub fn monodromy(&self, a: i64, b: i64) -> RatMatrix {
        Self::op(&self.nmap, (a, b), self.dim(a + 2, b - 2), self.dim(a, b))
    }

    /// `L : E1^{a,b} -> E1^{a,b+2}`.
    pub fn lefschetz(&self, a: i64, b: i64) -> RatMatrix {
        Self::op(&self.lmap, (a, b), self.dim(a, b + 2), self.dim(a, b))
    }

    /// `L^r : E1^{a,b} -> E1^{a,b+2r}`.
    pub fn lefschetz_power(&self, a: i64, b: i64, r: usize) -> RatMatrix {
        let mut acc = RatMatrix::identity(self.dim(a, b));
        for s in 0..r as i64 {
            acc = &self.lefschetz(a, b + 2 * s) * &acc;
        }
        acc
    }

    /// `N^r : E1^{a,b} -> E1^{a+2r,b-2r}`.
    pub fn monodromy_power(&self, a: i64, b: i64, r: usize) -> RatMatrix {
        let mut acc = RatMatrix::identity(self.dim(a, b));
        for s in 0..r as i64 {
            acc = &self.monodromy(a + 2 * s, b - 2 * s) * &acc;
        }
        acc
    }

    /// Assembles the page without validating; absent data reads as zero.
    pub fn assemble(sc: &StrataComplex) -> E1Page {
        let mut cells: BTreeMap<Bidegree, E1Cell> = BTreeMap::new();
        for level in 1..=sc.max_level().min(sc.n + 1) {
            let lv = sc.level(level);
            for k in 0..level {
                for (m, dim) in lv.degrees() {
                    let (a, b) = bidegree(k, level, m);
                    let cell = cells.entry((a, b)).or_insert_with(|| E1Cell {
                        a,
                        b,
                        summands: Vec::new(),
                    });
                    cell.summands.push(Summand {
                        k,
                        level,
                        degree: m,
                        twist: a - k as i64,
                        offset: 0,
                        dim,
                    });
                }
            }
        }
        for cell in cells.values_mut() {
            cell.summands.sort_by_key(|s| s.k);
            let mut off = 0;
            for s in &mut cell.summands {
                s.offset = off;
                off += s.dim;
            }
        }
        let mut page = E1Page {
            n: sc.n,
            cycle_generated: sc.is_cycle_generated(),
            cells,
            d: BTreeMap::new(),
            nmap: BTreeMap::new(),
            lmap: BTreeMap::new(),
        };
        let keys: Vec<Bidegree> = page.cells.keys().copied().collect();
        for (a, b) in keys {
            let src = page.cells[&(a, b)].clone();
            let mut d = RatMatrix::zeros(page.dim(a + 1, b), src.dim());
            let mut nm = RatMatrix::zeros(page.dim(a + 2, b - 2), src.dim());
            let mut lm = RatMatrix::zeros(page.dim(a, b + 2), src.dim());
            for s in &src.summands {
                if let Some(t) = page.cell(a + 1, b).and_then(|c| c.summand(s.k + 1)) {
                    d.set_block(t.offset, s.offset, &sc.rho_lenient(s.level, s.degree));
                }
                if s.level >= 2 {
                    if let Some(t) = page.cell(a + 1, b).and_then(|c| c.summand(s.k)) {
                        d.add_block(t.offset, s.offset, &sc.tau_lenient(s.level, s.degree));
                    }
                }
                if let Some(t) = page.cell(a + 2, b - 2).and_then(|c| c.summand(s.k + 1)) {
                    nm.set_block(t.offset, s.offset, &RatMatrix::identity(s.dim));
                }
                if let Some(t) = page.cell(a, b + 2).and_then(|c| c.summand(s.k)) {
                    lm.set_block(t.offset, s.offset, &sc.level_lefschetz(s.level, s.degree));
                }
            }
            page.d.insert((a, b), d);
            page.nmap.insert((a, b), nm);
            page.lmap.insert((a, b), lm);
        }
        page
    }

    /// `d1∘d1 = 0` and the commutation of `d1`, `N`, `L`, cell by cell.
    pub fn structure_checks(&self) -> Vec<CheckResult> {
        let mut out = Vec::new();
        for &(a, b) in self.cells.keys() {
            let loc = [("a", a), ("b", b)];
            out.push(zero_check(
                CheckResult::new("d1_squared", &loc),
                &(&self.d(a + 1, b) * &self.d(a, b)),
            ));
            let nd = &self.monodromy(a + 1, b) * &self.d(a, b);
            let dn = &self.d(a + 2, b - 2) * &self.monodromy(a, b);
            out.push(zero_check(CheckResult::new("n_commutes_d1", &loc), &(&nd - &dn)));
            let ld = &self.lefschetz(a + 1, b) * &self.d(a, b);
            let dl = &self.d(a, b + 2) * &self.lefschetz(a, b);
            out.push(zero_check(CheckResult::new("l_commutes_d1", &loc), &(&ld - &dl)));
            let nl = &self.monodromy(a, b + 2) * &self.lefschetz(a, b);
            let ln = &self.lefschetz(a + 2, b - 2) * &self.monodromy(a, b);
            out.push(zero_check(CheckResult::new("n_commutes_l", &loc), &(&nl - &ln)));
        }
        out
    }
}

/// First page of a validated complex.
pub fn build_e1(sc: &StrataComplex) -> Result<E1Page> {
    sc.ensure_valid()?;
    Ok(E1Page::assemble(sc))
}

#[derive(Clone, Debug)]
pub struct E2Cell {
    pub a: i64,
    pub b: i64,
    pub space: QuotientSpace,
    pub weight: i64,
    /// `b/2`, only for cycle-generated strata.
    pub slope: Option<Rat>,
}

impl E2Cell {
    pub fn dim(&self) -> usize {
        self.space.dim()
    }
}

/// Cellwise homology of the first page with induced `N` and `L`.
#[derive(Clone, Debug)]
pub struct E2Page {
    pub n: usize,
    pub cycle_generated: bool,
    cells: BTreeMap<Bidegree, E2Cell>,
    nmap: BTreeMap<Bidegree, RatMatrix>,
    lmap: BTreeMap<Bidegree, RatMatrix>,
    e1: E1Page,
}

impl E2Page {
    pub fn e1(&self) -> &E1Page {
        &self.e1
    }

    pub fn cells(&self) -> impl Iterator<Item = &E2Cell> {
        self.cells.values()
    }

    pub fn cell(&self, a: i64, b: i64) -> Option<&E2Cell> {
        self.cells.get(&(a, b))
    }

    pub fn dim(&self, a: i64, b: i64) -> usize {
        self.cell(a, b).map_or(0, E2Cell::dim)
    }

    /// The cell as a quotient of its E1 cell; absent cells are zero.
    pub fn space(&self, a: i64, b: i64) -> QuotientSpace {
        self.cell(a, b)
            .map(|c| c.space.clone())
            .unwrap_or_else(|| QuotientSpace::whole(0))
    }

    /// Induced `N : E2^{a,b} -> E2^{a+2,b-2}`.
    pub fn monodromy(&self, a: i64, b: i64) -> RatMatrix {
        E1Page::op(&self.nmap, (a, b), self.dim(a + 2, b - 2), self.dim(a, b))
    }

    /// Induced `L : E2^{a,b} -> E2^{a,b+2}`.
    pub fn lefschetz(&self, a: i64, b: i64) -> RatMatrix {
        E1Page::op(&self.lmap, (a, b), self.dim(a, b + 2), self.dim(a, b))
    }

    /// `L^r : E2^{a,b} -> E2^{a,b+2r}`.
    pub fn lefschetz_power(&self, a: i64, b: i64, r: usize) -> RatMatrix {
        let mut acc = RatMatrix::identity(self.dim(a, b));
        for s in 0..r as i64 {
            acc = &self.lefschetz(a, b + 2 * s) * &acc;
        }
        acc
    }

    /// `N^r : E2^{a,b} -> E2^{a+2r,b-2r}`.
    pub fn monodromy_power(&self, a: i64, b: i64, r: usize) -> RatMatrix {
        let mut acc = RatMatrix::identity(self.dim(a, b));
        for s in 0..r as i64 {
            acc = &self.monodromy(a + 2 * s, b - 2 * s) * &acc;
        }
        acc
    }

    /// `dim H^q = Σ_{a+b=q} dim E2^{a,b}` for `0 <= q <= 2n`.
    pub fn abutment(&self) -> BTreeMap<usize, usize> {
        let mut out: BTreeMap<usize, usize> = (0..=2 * self.n).map(|q| (q, 0)).collect();
        for c in self.cells.values() {
            let q = c.a + c.b;
            if (0..=2 * self.n as i64).contains(&q) {
                *out.entry(q as usize).or_default() += c.dim();
            }
        }
        out
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let cells: Vec<serde_json::Value> = self
            .cells
            .values()
            .map(|c| {
                serde_json::json!({
                    "a": c.a,
                    "b": c.b,
                    "dim": c.dim(),
                    "weight": c.weight,
                    "slope": c.slope.as_ref().map(|s| s.to_string()),
                })
            })
            .collect();
        let abutment: serde_json::Map<String, serde_json::Value> = self
            .abutment()
            .into_iter()
            .map(|(q, d)| (q.to_string(), d.into()))
            .collect();
        serde_json::json!({ "cells": cells, "abutment": abutment })
    }

    /// Aligned table of E2 dimensions, rows `b` descending, columns `a`.
    pub fn to_text(&self) -> String {
        let (amin, amax) = self
            .cells
            .keys()
            .fold((0, 0), |(lo, hi), &(a, _)| (lo.min(a), hi.max(a)));
        let bmax = self.cells.keys().map(|&(_, b)| b).max().unwrap_or(0);
        let mut s = String::from("  b\\a");
        for a in amin..=amax {
            s.push_str(&format!("{a:>5}"));
        }
        s.push('\n');
        for b in (0..=bmax).rev() {
            s.push_str(&format!("{b:>5}"));
            for a in amin..=amax {
                match self.cell(a, b) {
                    Some(c) => s.push_str(&format!("{:>5}", c.dim())),
                    None => s.push_str(&format!("{:>5}", ".")),
                }
            }
            s.push('\n');
        }
        s.push_str("abutment:");
        for (q, d) in self.abutment() {
            s.push_str(&format!(" H^{q}={d}"));
        }
        s.push('\n');
        s
    }
}

/// Cellwise `ker d1 / im d1` with the induced operators.
pub fn compute_e2(e1: &E1Page) -> Result<E2Page> {
    for &(a, b) in e1.cells.keys() {
        if !(&e1.d(a, b) * &e1.d(a - 1, b)).is_zero() {
            return Err(Error::DifferentialNotSquareZero {
                a: a as i32,
                b: b as i32,
            });
        }
    }
    let mut cells = BTreeMap::new();
    for (&(a, b), c) in &e1.cells {
        let z = kernel(&e1.d(a, b));
        let bnd = image(&e1.d(a - 1, b));
        let space = QuotientSpace::new(z, bnd)?;
        let slope = e1
            .cycle_generated
            .then(|| Rat::new(BigInt::from(b), BigInt::from(2)));
        cells.insert(
            (a, b),
            E2Cell {
                a: c.a,
                b: c.b,
                space,
                weight: b,
                slope,
            },
        );
    }
    let mut page = E2Page {
        n: e1.n,
        cycle_generated: e1.cycle_generated,
        cells,
        nmap: BTreeMap::new(),
        lmap: BTreeMap::new(),
        e1: e1.clone(),
    };
    let keys: Vec<Bidegree> = page.cells.keys().copied().collect();
    for (a, b) in keys {
        let src = page.space(a, b);
        let n = induced_map(&e1.monodromy(a, b), &src, &page.space(a + 2, b - 2))?;
        let l = induced_map(&e1.lefschetz(a, b), &src, &page.space(a, b + 2))?;
        page.nmap.insert((a, b), n);
        page.lmap.insert((a, b), l);
    }
    Ok(page)
}

/// `dim E2^{a,b} = dim E2^{-a,2n-b}` for every cell.
pub fn duality_check(e2: &E2Page) -> Vec<CheckResult> {
    let n = e2.n as i64;
    let mut out = Vec::new();
    for c in e2.cells() {
        let (a, b) = (c.a, c.b);
        let dual = e2.dim(-a, 2 * n - b);
        let r = CheckResult::new("duality", &[("a", a), ("b", b)])
            .fact("dim", c.dim())
            .fact("dual_dim", dual);
        out.push(if c.dim() == dual {
            r
        } else {
            let values = BTreeMap::from([
                (format!("dim E2^({a},{b})"), c.dim().to_string()),
                (format!("dim E2^({},{})", -a, 2 * n - b), dual.to_string()),
            ]);
            r.fail(Witness::Values { values })
        });
    }
    out
}

/// Alternating sums of dimensions along each row `b` agree on both pages.
pub fn euler_check(e1: &E1Page, e2: &E2Page) -> Vec<CheckResult> {
    let mut rows: BTreeMap<i64, (i64, i64)> = BTreeMap::new();
    for c in e1.cells() {
        let sign = if c.a.rem_euclid(2) == 0 { 1 } else { -1 };
        let e = rows.entry(c.b).or_default();
        e.0 += sign * c.dim() as i64;
        e.1 += sign * e2.dim(c.a, c.b) as i64;
    }
    rows.into_iter()
        .map(|(b, (x1, x2))| {
            let r = CheckResult::new("euler_row", &[("b", b)])
                .fact("chi_e1", x1)
                .fact("chi_e2", x2);
            if x1 == x2 {
                r
            } else {
                let values = BTreeMap::from([
                    ("chi_e1".to_string(), x1.to_string()),
                    ("chi_e2".to_string(), x2.to_string()),
                ]);
                r.fail(Witness::Values { values })
            }
        })
        .collect()
}

/// `dim H^a` of the nerve as an abstract simplicial complex over Q.
pub fn nerve_cohomology_oracle(sc: &StrataComplex, a: usize) -> usize {
    let simplices = |size: usize| -> Vec<&Face> { sc.faces.keys().filter(|f| f.len() == size).collect() };
    let coboundary = |p: usize| -> RatMatrix {
        let src = simplices(p + 1);
        let dst = simplices(p + 2);
        let mut m = RatMatrix::zeros(dst.len(), src.len());
        for (i, big) in dst.iter().enumerate() {
            for pos in 0..big.len() {
                let small = big.without(pos).expect("size >= 2");
                if let Some(j) = src.iter().position(|f| **f == small) {
                    let sign = if pos % 2 == 0 { 1 } else { -1 };
                    m.set(i, j, crate::linalg::rat(sign));
                }
            }
        }
        m
    };
    let cochains = simplices(a + 1).len();
    let out_rank = coboundary(a).rank();
    let in_rank = if a == 0 { 0 } else { coboundary(a - 1).rank() };
    cochains - out_rank - in_rank
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios;
    use crate::strata::StratumCohomology;

    fn dims(e2: &E2Page) -> BTreeMap<Bidegree, usize> {
        e2.cells().filter(|c| c.dim() > 0).map(|c| ((c.a, c.b), c.dim())).collect()
    }

    #[test]
    fn ngon_e1_cells() {
        let e1 = build_e1(&scenarios::ngon(3).unwrap()).unwrap();
        let got: BTreeMap<Bidegree, usize> = e1.cells().map(|c| ((c.a, c.b), c.dim())).collect();
        assert_eq!(got, BTreeMap::from([((0, 0), 3), ((1, 0), 3), ((-1, 2), 3), ((0, 2), 3)]));
    }

    #[test]
    fn pn_e1_is_one_column() {
        let e1 = build_e1(&scenarios::good_reduction_pn(3).unwrap()).unwrap();
        for c in e1.cells() {
            assert_eq!(c.a, 0);
            assert_eq!(c.dim(), 1);
        }
        assert_eq!(e1.cells().count(), 4);
        let e2 = compute_e2(&e1).unwrap();
        for c in e1.cells() {
            assert_eq!(e2.dim(c.a, c.b), c.dim());
        }
    }

    #[test]
    fn tetrahedron_triple_points() {
        let e1 = build_e1(&scenarios::tetrahedron()).unwrap();
        assert_eq!(e1.dim(2, 0), 4);
    }

    #[test]
    fn ngon_e2() {
        let e2 = compute_e2(&build_e1(&scenarios::ngon(3).unwrap()).unwrap()).unwrap();
        assert_eq!(dims(&e2), BTreeMap::from([((0, 0), 1), ((1, 0), 1), ((-1, 2), 1), ((0, 2), 1)]));
        assert_eq!(e2.abutment(), BTreeMap::from([(0, 1), (1, 2), (2, 1)]));
        assert!(duality_check(&e2).iter().all(CheckResult::passed));
    }

    #[test]
    fn ngon_x_p1_abutment() {
        let e2 = compute_e2(&build_e1(&scenarios::ngon_x_p1(3).unwrap()).unwrap()).unwrap();
        let h: Vec<usize> = e2.abutment().values().copied().collect();
        assert_eq!(h, vec![1, 2, 2, 2, 1]);
    }

    #[test]
    fn tetrahedron_e2() {
        let e2 = compute_e2(&build_e1(&scenarios::tetrahedron()).unwrap()).unwrap();
        assert_eq!(e2.dim(0, 0), 1);
        assert_eq!(e2.dim(1, 0), 0);
        assert_eq!(e2.dim(2, 0), 1);
        assert_eq!(e2.dim(0, 2), 4);
        assert_eq!(e2.dim(-2, 4), 1);
        assert_eq!(e2.abutment()[&2], 6);
        assert!(duality_check(&e2).iter().all(CheckResult::passed));
    }

    #[test]
    fn elliptic_abutment() {
        let e2 = compute_e2(&build_e1(&scenarios::elliptic_stratum()).unwrap()).unwrap();
        assert_eq!(e2.abutment()[&1], 4);
        assert!(e2.cells().all(|c| c.slope.is_none()));
    }

    #[test]
    fn structure_and_euler() {
        for spec in scenarios::ScenarioSpec::builtins() {
            let sc = spec.build().unwrap();
            let e1 = build_e1(&sc).unwrap();
            assert!(e1.structure_checks().iter().all(CheckResult::passed), "{spec}");
            let e2 = compute_e2(&e1).unwrap();
            assert!(euler_check(&e1, &e2).iter().all(CheckResult::passed), "{spec}");
        }
    }

    #[test]
    fn summand_slopes_are_half_weights() {
        let e1 = build_e1(&scenarios::tetrahedron()).unwrap();
        for c in e1.cells() {
            for s in &c.summands {
                assert_eq!(s.slope(), Rat::new(BigInt::from(c.b), BigInt::from(2)));
            }
        }
    }

    #[test]
    fn nerve_oracle_examples() {
        let ngon = scenarios::ngon(5).unwrap();
        assert_eq!((nerve_cohomology_oracle(&ngon, 0), nerve_cohomology_oracle(&ngon, 1)), (1, 1));
        let tet = scenarios::tetrahedron();
        let h: Vec<usize> = (0..3).map(|a| nerve_cohomology_oracle(&tet, a)).collect();
        assert_eq!(h, vec![1, 0, 1]);
        let pt = scenarios::good_reduction_pn(1).unwrap();
        assert_eq!(nerve_cohomology_oracle(&pt, 0), 1);
        assert_eq!(nerve_cohomology_oracle(&pt, 1), 0);
    }

    #[test]
    fn deleted_restriction_fails_upstream() {
        let mut sc = scenarios::ngon(3).unwrap();
        sc.restrictions.remove(&(Face::single(1), crate::strata::face(&[1, 2])));
        assert!(matches!(build_e1(&sc), Err(Error::Invalid(_))));
    }

    #[test]
    fn point_factor_preserves_e2() {
        let sc = scenarios::ngon(4).unwrap();
        let a = compute_e2(&build_e1(&sc).unwrap()).unwrap();
        let b = compute_e2(&build_e1(&sc.product_with_factor(&StratumCohomology::point())).unwrap()).unwrap();
        assert_eq!(dims(&a), dims(&b));
    }
}
