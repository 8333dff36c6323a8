use ssweight::ito::{check_ito_axioms, ito_cohomology, ito_from_strata};
use ssweight::lefschetz::check_log_hl;
use ssweight::linalg::frac;
use ssweight::scenarios::{self, random_instance, ScenarioSpec};
use ssweight::strata::StrataComplex;
use ssweight::weight_ss::{build_e1, compute_e2, duality_check};

fn corpus() -> Vec<(String, StrataComplex)> {
    let mut v: Vec<_> = ScenarioSpec::builtins()
        .into_iter()
        .map(|s| (s.to_string(), s.build().unwrap()))
        .collect();
    v.extend((100..130).map(|s| (format!("random({s})"), random_instance(s))));
    v
}

#[test]
fn lefschetz_commutes_with_rho_and_tau() {
    for (name, sc) in corpus() {
        for k in 1..=sc.max_level() {
            for m in 0..=2 * sc.n {
                let rho = |m| sc.rho(k, m).unwrap();
                let l_here = sc.level_lefschetz(k, m);
                assert_eq!(
                    &sc.level_lefschetz(k + 1, m) * &rho(m),
                    &rho(m + 2) * &l_here,
                    "{name}: rho at k={k} m={m}"
                );
                if k >= 2 {
                    let tau = |m| sc.tau(k, m).unwrap();
                    assert_eq!(
                        &sc.level_lefschetz(k - 1, m + 2) * &tau(m),
                        &tau(m + 2) * &l_here,
                        "{name}: tau at k={k} m={m}"
                    );
                }
            }
        }
    }
}

#[test]
fn cycle_generated_levels_are_even() {
    for (name, sc) in corpus().into_iter().filter(|(_, sc)| sc.is_cycle_generated()) {
        for k in 1..=sc.max_level() {
            for m in (1..=2 * sc.n).step_by(2) {
                assert_eq!(sc.level(k).dim(m), 0, "{name}: H^{m} of level {k}");
            }
        }
    }
}

#[test]
fn summand_slopes_are_half_the_row() {
    for (name, sc) in corpus().into_iter().filter(|(_, sc)| sc.is_cycle_generated()) {
        let e1 = build_e1(&sc).unwrap();
        for c in e1.cells() {
            for s in &c.summands {
                assert_eq!(s.slope(), frac(c.b, 2), "{name}: E1^({},{})", c.a, c.b);
            }
        }
        let e2 = compute_e2(&e1).unwrap();
        for c in e2.cells() {
            assert_eq!(c.slope, Some(frac(c.b, 2)), "{name}");
        }
    }
}

#[test]
fn log_hl_identity_and_dimension_symmetry() {
    for (name, sc) in corpus() {
        let e2 = compute_e2(&build_e1(&sc).unwrap()).unwrap();
        assert!(check_log_hl(&e2, 0).iter().all(|c| c.passed()), "{name}");
        assert!(duality_check(&e2).iter().all(|c| c.passed()), "{name}");
        let n = sc.n as i64;
        for r in 0..=n {
            for a in -n..=n {
                let b = n - a - r;
                if b >= 0 {
                    assert_eq!(e2.dim(a, b), e2.dim(a, b + 2 * r), "{name}: r={r} a={a}");
                }
            }
        }
    }
}

#[test]
fn ngon_pages_do_not_depend_on_sides() {
    let dims = |sides| {
        let e2 = compute_e2(&build_e1(&scenarios::ngon(sides).unwrap()).unwrap()).unwrap();
        e2.cells().map(|c| (c.a, c.b, c.dim())).collect::<Vec<_>>()
    };
    let first = dims(3);
    for sides in 4..=8 {
        assert_eq!(dims(sides), first, "N={sides}");
    }
}

#[test]
fn positivity_signs_follow_the_parity_pattern() {
    for (name, sc) in corpus().into_iter().filter(|(_, sc)| sc.is_cycle_generated()) {
        let v = ito_from_strata(&sc).unwrap();
        let h = ito_cohomology(&v).unwrap();
        assert_eq!(ito_cohomology(&h).unwrap(), h, "{name}: fixpoint");
        for m in [&v, &h] {
            for c in check_ito_axioms(m).iter().filter(|c| c.name == "ito_positivity") {
                assert!(!c.failed(), "{name}: {c:?}");
                let Some(&sign) = c.facts.get("sign") else {
                    continue;
                };
                let k = (sc.n as i64 - c.location["i"] - c.location["j"]) / 2;
                assert_eq!(sign, if k % 2 == 0 { 1 } else { -1 }, "{name}: {c:?}");
            }
        }
    }
}

#[test]
fn failures_carry_verifying_witnesses() {
    for seed in 0..40u64 {
        let mut sc = random_instance(seed);
        let Some(key) = sc.restrictions.keys().nth(seed as usize % 3).cloned() else {
            continue;
        };
        sc.restrictions.remove(&key);
        let rs = ssweight::lefschetz::check_h1_suite(&sc);
        for c in rs.iter().filter(|c| c.failed()) {
            assert!(c.witness_ok(), "seed {seed}: {c:?}");
        }
    }
}
