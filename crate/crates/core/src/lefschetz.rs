//! Log hard Lefschetz, weight–monodromy and the chain of statements behind
//! both for `H^1`, as exact rank computations.

use crate::check::{
    injective_check, iso_check, nondegenerate_check, same_subspace_check, CheckResult, Witness,
};
use crate::linalg::{image, kernel, QuotientSpace, RatMatrix, Subspace};
use crate::strata::StrataComplex;
use crate::weight_ss::E2Page;

/// Column range of the page.
fn columns(e2: &E2Page) -> (i64, i64) {
    e2.e1()
        .cells()
        .fold((0, 0), |(lo, hi), c| (lo.min(c.a), hi.max(c.a)))
}

/// `L^r : E2^{a,n-a-r} -> E2^{a,n-a+r}` for every column `a` touching the page.
pub fn check_log_hl(e2: &E2Page, r: usize) -> Vec<CheckResult> {
    let n = e2.n as i64;
    let r_i = r as i64;
    let (amin, amax) = columns(e2);
    let e1 = e2.e1();
    let mut out = Vec::new();
    for a in amin..=amax {
        let b = n - a - r_i;
        if b < 0 || (e1.cell(a, b).is_none() && e1.cell(a, b + 2 * r_i).is_none()) {
            continue;
        }
        let result = CheckResult::new("log_hl", &[("r", r_i), ("a", a), ("b", b)]);
        out.push(iso_check(
            result,
            &e1.lefschetz_power(a, b, r),
            &e2.space(a, b),
            &e2.space(a, b + 2 * r_i),
        ));
    }
    out
}

/// Log hard Lefschetz for every `0 <= r <= n`.
pub fn check_log_hl_all(e2: &E2Page) -> Vec<CheckResult> {
    (0..=e2.n).flat_map(|r| check_log_hl(e2, r)).collect()
}

/// `N^r : E2^{-r,w+r} -> E2^{r,w-r}` for every `(r, w)` with a nonzero end.
pub fn check_wm(e2: &E2Page) -> Vec<CheckResult> {
    let e1 = e2.e1();
    let bmax = e1.cells().map(|c| c.b).max().unwrap_or(0);
    let (amin, amax) = columns(e2);
    let rmax = amin.abs().max(amax.abs());
    let mut out = Vec::new();
    for w in 0..=bmax {
        for r in 0..=rmax {
            let (src, dst) = (e2.dim(-r, w + r), e2.dim(r, w - r));
            if src == 0 && dst == 0 {
                continue;
            }
            let result = CheckResult::new("weight_monodromy", &[("r", r), ("w", w)]);
            out.push(iso_check(
                result,
                &e1.monodromy_power(-r, w + r, r as usize),
                &e2.space(-r, w + r),
                &e2.space(r, w - r),
            ));
        }
    }
    out
}

/// Weight–monodromy restricted to the cells that make up `H^q`.
pub fn check_wm_degree(e2: &E2Page, q: i64) -> Vec<CheckResult> {
    check_wm(e2)
        .into_iter()
        .filter(|c| c.location["w"] == q)
        .collect()
}

fn quotient(num: Subspace, den: Subspace) -> QuotientSpace {
    let den = num.intersection(&den);
    QuotientSpace::new(num, den).expect("intersection lies in the numerator")
}

fn sum_of_images(ambient: usize, maps: &[RatMatrix]) -> Subspace {
    maps.iter()
        .fold(Subspace::zero(ambient), |acc, m| acc.sum(&image(m)))
}

/// The `H^1` chain on a strata complex: nondegeneracy on `H^0`, on
/// `im τ ∩ P^2`, the orthogonal complement and intersection statements, the
/// weight–monodromy isomorphism for `H^1` and the three `L^{n-1}` maps.
///
/// Absent data is read as zero so that corrupted inputs still produce
/// located failures.
pub fn check_h1_suite(sc: &StrataComplex) -> Vec<CheckResult> {
    let mut out = sc.structure_checks();
    let n = sc.n;
    if n == 0 {
        return out;
    }
    let rho = |k: usize, m: usize| sc.rho_lenient(k, m);
    let tau = |k: usize, m: usize| sc.tau_lenient(k, m);
    let lpow = |k: usize, m: usize, r: usize| {
        let mut acc = RatMatrix::identity(sc.level(k).dim(m));
        for s in 0..r {
            acc = &sc.level_lefschetz(k, m + 2 * s) * &acc;
        }
        acc
    };
    // ⟨x, y⟩ = x . L^{dim - q} y on H^q(Y^{(k)}).
    let form = |k: usize, q: usize| {
        let d = n + 1 - k;
        &sc.level_pairing(k, q) * &lpow(k, q, d - q)
    };

    for k in 1..=sc.max_level().min(n + 1) {
        if sc.level(k).dim(0) == 0 {
            continue;
        }
        let g = form(k, 0);
        let im = if k >= 2 { image(&rho(k - 1, 0)) } else { Subspace::zero(g.rows()) };
        let ker = kernel(&rho(k, 0));
        out.push(nondegenerate_check(
            CheckResult::new("h0_form_on_image", &[("k", k as i64)]),
            &g,
            im.basis(),
        ));
        out.push(nondegenerate_check(
            CheckResult::new("h0_form_on_kernel", &[("k", k as i64)]),
            &g,
            ker.basis(),
        ));
    }

    let h2 = sc.level(1).dim(2);
    let tau20 = tau(2, 0);
    let im_tau = image(&tau20);
    let primitive = if n >= 1 && h2 > 0 {
        kernel(&lpow(1, 2, n - 1))
    } else {
        Subspace::zero(h2)
    };
    let tau_prim = im_tau.intersection(&primitive);
    let g2 = if n >= 2 { form(1, 2) } else { RatMatrix::zeros(h2, h2) };
    out.push(
        nondegenerate_check(CheckResult::new("primitive_image_form", &[]), &g2, tau_prim.basis())
            .fact("image_dim", im_tau.dim()),
    );

    // Orthogonal complement of im τ ∩ P^2 inside im τ.
    let cross = &(&tau_prim.basis().transpose() * &g2.transpose()) * im_tau.basis();
    let complement = Subspace::span(&(im_tau.basis() * &cross.kernel_basis()));
    let tau_rho = &tau20 * &rho(1, 0);
    out.push(same_subspace_check(
        CheckResult::new("tau_rho_orthogonal_complement", &[]),
        &image(&tau_rho),
        &complement,
    ));

    let im_rho10 = image(&rho(1, 0));
    let meet = kernel(&tau20).intersection(&im_rho10);
    let r = CheckResult::new("ker_tau_meets_im_rho", &[]).fact("intersection_dim", meet.dim());
    out.push(match meet.vector_not_in(&Subspace::zero(meet.ambient_dim())) {
        None => r,
        Some(v) => r.fail(Witness::KernelModulo {
            map: tau20.clone(),
            source: im_rho10.basis().clone(),
            source_zero: RatMatrix::zeros(v.len(), 0),
            target_zero: RatMatrix::zeros(tau20.rows(), 0),
            vector: v,
        }),
    });
    let ker_rho12 = kernel(&rho(1, 2));
    out.push(same_subspace_check(
        CheckResult::new("ker_rho_meets_im_tau", &[]),
        &ker_rho12.intersection(&im_tau),
        &image(&tau_rho),
    ));

    let y2 = sc.level(2).dim(0);
    let ker_rho20 = kernel(&rho(2, 0));
    let both = kernel(&tau20).intersection(&ker_rho20);
    let wm_src = QuotientSpace::new(both.clone(), Subspace::zero(y2)).expect("zero denominator");
    let wm_dst = quotient(ker_rho20.clone(), im_rho10.clone());
    out.push(iso_check(
        CheckResult::new("weight_monodromy_h1", &[]),
        &RatMatrix::identity(y2),
        &wm_src,
        &wm_dst,
    ));

    let top2 = 2 * n - 2;
    let ell = lpow(2, 0, n - 1);
    let l0_dst = {
        let amb = sc.level(2).dim(top2);
        let mut maps = vec![rho(1, top2)];
        if n >= 2 {
            maps.push(tau(3, 2 * n - 4));
        }
        QuotientSpace::new(Subspace::full(amb), sum_of_images(amb, &maps)).expect("full numerator")
    };
    let l0 = iso_check(CheckResult::new("ell_0", &[]), &ell, &wm_dst, &l0_dst);
    let l0_passed = l0.passed();
    out.push(l0);

    let l1_dst = {
        let amb = sc.level(1).dim(2 * n - 1);
        let den = if n >= 2 { image(&tau(2, 2 * n - 3)) } else { Subspace::zero(amb) };
        quotient(Subspace::full(amb), den)
    };
    let l1_src = QuotientSpace::new(kernel(&rho(1, 1)), Subspace::zero(sc.level(1).dim(1))).expect("zero denominator");
    out.push(iso_check(CheckResult::new("ell_1", &[]), &lpow(1, 1, n - 1), &l1_src, &l1_dst));

    let l2_dst = {
        let num = kernel(&tau(2, top2));
        let den = if n >= 2 { image(&tau(3, 2 * n - 4)) } else { Subspace::zero(num.ambient_dim()) };
        quotient(num, den)
    };
    out.push(injective_check(CheckResult::new("ell_2_injective", &[]), &ell, &wm_src, &l2_dst));
    out.push(iso_check(CheckResult::new("ell_2", &[]), &ell, &wm_src, &l2_dst));

    let dims = CheckResult::new("weight_monodromy_h1_dims", &[])
        .fact("source_dim", wm_src.dim())
        .fact("target_dim", wm_dst.dim());
    out.push(if !l0_passed {
        dims.skip("ell_0 did not pass")
    } else if wm_src.dim() == wm_dst.dim() {
        dims
    } else {
        let values = [
            ("source_dim".to_string(), wm_src.dim().to_string()),
            ("target_dim".to_string(), wm_dst.dim().to_string()),
        ]
        .into_iter()
        .collect();
        dims.fail(Witness::Values { values })
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios::{self, ScenarioSpec};
    use crate::strata::face;
    use crate::weight_ss::{build_e1, compute_e2};

    fn e2(sc: &StrataComplex) -> E2Page {
        compute_e2(&build_e1(sc).unwrap()).unwrap()
    }

    fn find<'a>(rs: &'a [CheckResult], name: &str) -> &'a CheckResult {
        rs.iter().find(|c| c.name == name).unwrap()
    }

    #[test]
    fn pn_log_hl_passes() {
        let page = e2(&scenarios::good_reduction_pn(3).unwrap());
        for r in 0..=3 {
            let rs = check_log_hl(&page, r);
            // Odd cohomology of P^3 vanishes, so only even n - r touches the page.
            assert_eq!(rs.is_empty(), (3 - r) % 2 == 1);
            assert!(rs.iter().all(CheckResult::passed));
        }
        assert!(check_wm(&page).iter().all(CheckResult::passed));
    }

    #[test]
    fn ngon_checks() {
        let page = e2(&scenarios::ngon(3).unwrap());
        assert!(check_log_hl(&page, 0).iter().all(CheckResult::passed));
        let wm = check_wm(&page);
        let r11 = wm.iter().find(|c| c.location["r"] == 1 && c.location["w"] == 1).unwrap();
        assert!(r11.passed());
        assert_eq!((r11.facts["source_dim"], r11.facts["target_dim"]), (1, 1));
        assert!(wm.iter().all(CheckResult::passed));
    }

    #[test]
    fn tetrahedron_log_hl_and_wm() {
        let page = e2(&scenarios::tetrahedron());
        for r in 0..=2 {
            assert!(check_log_hl(&page, r).iter().all(CheckResult::passed), "r={r}");
        }
        assert!(check_wm(&page).iter().all(CheckResult::passed));
    }

    #[test]
    fn ngon_h1_suite() {
        let rs = check_h1_suite(&scenarios::ngon(3).unwrap());
        assert!(rs.iter().all(|c| c.passed()), "{rs:#?}");
        assert_eq!(find(&rs, "ell_0").facts["source_dim"], 1);
        assert_eq!(find(&rs, "ell_2").facts["source_dim"], 1);
        assert_eq!(find(&rs, "ell_1").note.as_deref(), Some("vacuous"));
    }

    #[test]
    fn elliptic_ell_1_is_nonvacuous() {
        let rs = check_h1_suite(&scenarios::elliptic_stratum());
        assert!(rs.iter().all(|c| c.passed()), "{rs:#?}");
        let l1 = find(&rs, "ell_1");
        assert_eq!(l1.facts["source_dim"], 2);
        assert!(l1.note.is_none());
    }

    #[test]
    fn h1_suite_on_builtins() {
        for spec in ScenarioSpec::builtins() {
            let rs = check_h1_suite(&spec.build().unwrap());
            assert!(rs.iter().all(|c| !c.failed()), "{spec}: {rs:#?}");
        }
    }

    #[test]
    fn degenerate_lefschetz_fails_h0_lemma() {
        let sc = scenarios::ngon_with_degrees(&[1, 1, -2]).unwrap();
        assert!(sc.validate().is_valid());
        let rs = check_h1_suite(&sc);
        let bad = rs
            .iter()
            .find(|c| c.name == "h0_form_on_kernel" && c.location["k"] == 1)
            .unwrap();
        assert!(bad.failed());
        assert!(bad.witness_ok());
    }

    #[test]
    fn deleted_restriction_fails_with_witness() {
        let mut sc = scenarios::tetrahedron();
        sc.restrictions.remove(&(face(&[1, 2]), face(&[1, 2, 3])));
        let rs = check_h1_suite(&sc);
        let failures: Vec<_> = rs.iter().filter(|c| c.failed()).collect();
        assert!(!failures.is_empty());
        assert!(failures.iter().all(|c| c.witness_ok()));
        assert!(failures.iter().any(|c| c.name == "rho_squared"));
    }
}
