//! End-to-end runs over a strata complex: the check suites selected on the
//! command line, and the degree-by-degree Hodge symmetry derivation.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::check::{sort_results, CheckResult, Status};
use crate::error::Result;
use crate::ito::{check_ito_axioms, ito_cohomology, ito_from_strata};
use crate::lefschetz::{check_h1_suite, check_log_hl, check_log_hl_all, check_wm, check_wm_degree};
use crate::linalg::rat_to_string;
use crate::polygons::{
    check_linear_relation, check_slope_symmetry, hodge_from_ordinary, slopes_from_e2, HodgeVector,
};
use crate::strata::StrataComplex;
use crate::weight_ss::{build_e1, compute_e2, duality_check, euler_check, E2Page};

pub const SCHEMA_VERSION: u32 = 1;

/// Whether independent pieces of work may run on worker threads.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Parallel,
    Sequential,
}

impl Mode {
    /// Sequential when `SSWEIGHT_NO_PARALLEL=1`.
    pub fn from_env() -> Mode {
        match std::env::var("SSWEIGHT_NO_PARALLEL") {
            Ok(v) if v == "1" => Mode::Sequential,
            _ => Mode::Parallel,
        }
    }
}

fn fan_out<T, R, F>(items: Vec<T>, mode: Mode, f: F) -> Vec<R>
where
    T: Send,
    R: Send,
    F: Fn(T) -> R + Sync + Send,
{
    match mode {
        Mode::Parallel => items.into_par_iter().map(f).collect(),
        Mode::Sequential => items.into_iter().map(f).collect(),
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Selection {
    pub hl: bool,
    pub wm: bool,
    pub h1: bool,
    pub ito: bool,
}

impl Selection {
    pub fn all() -> Self {
        Selection {
            hl: true,
            wm: true,
            h1: true,
            ito: true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Suite {
    Pages,
    Hl,
    Wm,
    H1,
    Ito,
}

fn ito_suite(sc: &StrataComplex) -> Vec<CheckResult> {
    let v = match ito_from_strata(sc) {
        Ok(v) => v,
        Err(e) => return vec![CheckResult::new("ito_module", &[]).skip(e.to_string())],
    };
    let mut out = check_ito_axioms(&v);
    match ito_cohomology(&v) {
        Ok(h) => out.extend(check_ito_axioms(&h).into_iter().map(|mut c| {
            c.name = format!("cohomology_{}", c.name);
            c
        })),
        Err(e) => out.push(CheckResult::new("cohomology_ito_module", &[]).skip(e.to_string())),
    }
    out
}

/// Page structure, duality and Euler checks, plus the selected suites, in
/// canonical order.
pub fn run_checks(sc: &StrataComplex, sel: Selection, mode: Mode) -> Result<Vec<CheckResult>> {
    let e1 = build_e1(sc)?;
    let e2 = compute_e2(&e1)?;
    let mut suites = vec![Suite::Pages];
    for (on, s) in [(sel.hl, Suite::Hl), (sel.wm, Suite::Wm), (sel.h1, Suite::H1), (sel.ito, Suite::Ito)] {
        if on {
            suites.push(s);
        }
    }
    let parts = fan_out(suites, mode, |s| match s {
        Suite::Pages => {
            let mut v = e1.structure_checks();
            v.extend(duality_check(&e2));
            v.extend(euler_check(&e1, &e2));
            v
        }
        Suite::Hl => check_log_hl_all(&e2),
        Suite::Wm => check_wm(&e2),
        Suite::H1 => check_h1_suite(sc),
        Suite::Ito => ito_suite(sc),
    });
    let mut out: Vec<CheckResult> = parts.into_iter().flatten().collect();
    sort_results(&mut out);
    Ok(out)
}

/// One inference step of the derivation in one degree.
#[derive(Clone, Debug, Serialize)]
pub struct Step {
    pub name: String,
    /// The statement that lets this step follow from the ones before it.
    pub licensed_by: String,
    #[serde(flatten)]
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl Step {
    fn new(name: &str, licensed_by: &str, status: Status, detail: Option<String>) -> Self {
        Step {
            name: name.into(),
            licensed_by: licensed_by.into(),
            status,
            detail,
        }
    }

    fn skipped(name: &str, licensed_by: &str, reason: impl Into<String>) -> Self {
        Self::new(
            name,
            licensed_by,
            Status::Skipped {
                reason: reason.into(),
            },
            None,
        )
    }

    fn from_checks(name: &str, licensed_by: &str, checks: &[CheckResult]) -> Self {
        let failed: Vec<String> = checks
            .iter()
            .filter(|c| c.failed())
            .map(|c| {
                let loc: Vec<String> = c.location.iter().map(|(k, v)| format!("{k}={v}")).collect();
                format!("{}({})", c.name, loc.join(","))
            })
            .collect();
        if failed.is_empty() {
            Self::new(name, licensed_by, Status::Pass, Some(format!("{} checks", checks.len())))
        } else {
            Self::new(name, licensed_by, Status::Fail, Some(failed.join(" ")))
        }
    }

    fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DegreeReport {
    pub q: usize,
    pub dim: usize,
    pub steps: Vec<Step>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slopes: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hodge: Option<HodgeVector>,
    /// `Some(true)` when `h^{i,j} = h^{j,i}` was derived in this degree.
    pub symmetric: Option<bool>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub name: String,
    pub dimension: usize,
    pub cycle_generated: bool,
    pub abutment: BTreeMap<usize, usize>,
    pub degrees: Vec<DegreeReport>,
    pub verdict: String,
}

const BY_PAGES: &str = "E2 of the weight spectral sequence computes H^q";
const BY_HL: &str = "log hard Lefschetz on E2";
const BY_WM: &str = "weight-monodromy on E2";
const BY_CYCLES: &str = "cycle-generated strata are pure: E2^{a,b} has slope b/2";
const BY_SYMMETRY: &str = "log hard Lefschetz implies slope symmetry";
const BY_ORDINARY: &str = "ordinary: Hodge polygon equals Newton polygon";
const BY_RELATION: &str = "slope symmetry implies the linear Hodge-number relation";
const BY_HS: &str = "ordinary with symmetric slopes implies Hodge symmetry";

fn degree_report(e2: &E2Page, q: usize) -> DegreeReport {
    let n = e2.n;
    let dim = e2.abutment().get(&q).copied().unwrap_or(0);
    let mut steps = vec![Step::new("abutment", BY_PAGES, Status::Pass, Some(format!("dim H^{q} = {dim}")))];

    // L^r joins degrees n - r and n + r.
    let hl = check_log_hl(e2, q.abs_diff(n));
    let hl_step = Step::from_checks("log_hard_lefschetz", BY_HL, &hl);
    let wm_step = Step::from_checks("weight_monodromy", BY_WM, &check_wm_degree(e2, q as i64));
    let hl_ok = hl_step.passed();
    steps.push(hl_step);
    steps.push(wm_step);

    let mut report = DegreeReport {
        q,
        dim,
        steps,
        slopes: None,
        hodge: None,
        symmetric: None,
    };
    let slopes = match slopes_from_e2(e2, q) {
        Ok(s) => {
            report.steps.push(Step::new("slopes", BY_CYCLES, Status::Pass, Some(s.to_string())));
            report.slopes = Some(s.values().iter().map(rat_to_string).collect());
            s
        }
        Err(e) => {
            report.steps.push(Step::skipped("slopes", BY_CYCLES, e.to_string()));
            for (name, by) in [
                ("slope_symmetry", BY_SYMMETRY),
                ("ordinary_hodge_numbers", BY_ORDINARY),
                ("linear_relation", BY_RELATION),
                ("hodge_symmetry", BY_HS),
            ] {
                report.steps.push(Step::skipped(name, by, "slopes unavailable"));
            }
            return report;
        }
    };

    let sym_ok = if hl_ok {
        let c = check_slope_symmetry(&slopes);
        let ok = c.passed();
        report.steps.push(Step::from_checks("slope_symmetry", BY_SYMMETRY, &[c]));
        ok
    } else {
        report
            .steps
            .push(Step::skipped("slope_symmetry", BY_SYMMETRY, "log hard Lefschetz failed"));
        false
    };

    let hodge = match hodge_from_ordinary(&slopes) {
        Ok(h) => {
            report.steps.push(Step::new(
                "ordinary_hodge_numbers",
                BY_ORDINARY,
                Status::Pass,
                Some(format!("{:?}", h.values)),
            ));
            h
        }
        Err(e) => {
            report
                .steps
                .push(Step::skipped("ordinary_hodge_numbers", BY_ORDINARY, e.to_string()));
            report
                .steps
                .push(Step::skipped("linear_relation", BY_RELATION, "no Hodge numbers"));
            report
                .steps
                .push(Step::skipped("hodge_symmetry", BY_HS, "no Hodge numbers"));
            return report;
        }
    };
    if sym_ok {
        let c = check_linear_relation(&hodge);
        report.steps.push(Step::from_checks("linear_relation", BY_RELATION, &[c]));
        let symmetric = hodge.is_palindromic();
        let status = if symmetric { Status::Pass } else { Status::Fail };
        report.steps.push(Step::new("hodge_symmetry", BY_HS, status, None));
        report.symmetric = Some(symmetric);
    } else {
        let reason = "slope symmetry not established";
        report.steps.push(Step::skipped("linear_relation", BY_RELATION, reason));
        report.steps.push(Step::skipped("hodge_symmetry", BY_HS, reason));
    }
    report.hodge = Some(hodge);
    report
}

fn verdict(degrees: &[DegreeReport]) -> String {
    let failed: Vec<String> = degrees
        .iter()
        .filter(|d| d.symmetric == Some(false))
        .map(|d| d.q.to_string())
        .collect();
    if !failed.is_empty() {
        return format!("Hodge symmetry fails in degrees {}", failed.join(", "));
    }
    let open: Vec<String> = degrees
        .iter()
        .filter(|d| d.symmetric.is_none())
        .map(|d| d.q.to_string())
        .collect();
    if !open.is_empty() {
        return format!("Hodge symmetry not established in degrees {}", open.join(", "));
    }
    let pairs: Vec<String> = degrees
        .iter()
        .filter_map(|d| d.hodge.as_ref())
        .flat_map(HodgeVector::describe_off_diagonal)
        .collect();
    if pairs.is_empty() {
        "Hodge symmetry holds in all degrees; all Hodge numbers are diagonal".into()
    } else {
        format!("Hodge symmetry holds in all degrees; {}", pairs.join(", "))
    }
}

/// E2, per-degree log hard Lefschetz and weight-monodromy, slopes, slope
/// symmetry, ordinary Hodge numbers and the symmetry verdict.
pub fn hodge_symmetry_report(sc: &StrataComplex, mode: Mode) -> Result<Report> {
    let e2 = compute_e2(&build_e1(sc)?)?;
    let degrees = fan_out((0..=2 * sc.n).collect(), mode, |q| degree_report(&e2, q));
    Ok(Report {
        schema_version: SCHEMA_VERSION,
        name: sc.name.clone(),
        dimension: sc.n,
        cycle_generated: e2.cycle_generated,
        abutment: e2.abutment(),
        verdict: verdict(&degrees),
        degrees,
    })
}

impl Report {
    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("reports serialize")
    }

    /// Failed steps count as failure; skipped ones do not.
    pub fn has_failures(&self) -> bool {
        self.degrees
            .iter()
            .flat_map(|d| &d.steps)
            .any(|s| s.status == Status::Fail)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} (dimension {})", self.name, self.dimension);
        for d in &self.degrees {
            let _ = writeln!(out, "H^{}: dim {}", d.q, d.dim);
            if let Some(s) = &d.slopes {
                let _ = writeln!(out, "  slopes {{{}}}", s.join(", "));
            }
            if let Some(h) = &d.hodge {
                let _ = writeln!(out, "  hodge {:?}", h.values);
            }
            for s in &d.steps {
                let status = match &s.status {
                    Status::Pass => "pass".to_string(),
                    Status::Fail => "FAIL".to_string(),
                    Status::Skipped { reason } => format!("skipped ({reason})"),
                };
                let _ = write!(out, "  {:<24} {status}", s.name);
                if let Some(detail) = &s.detail {
                    let _ = write!(out, ": {detail}");
                }
                let _ = writeln!(out, "  [{}]", s.licensed_by);
            }
        }
        let _ = writeln!(out, "{}", self.verdict);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios::{self, ScenarioSpec};

    #[test]
    fn ngon_verdict() {
        let r = hodge_symmetry_report(&scenarios::ngon(4).unwrap(), Mode::Sequential).unwrap();
        assert_eq!(r.verdict, "Hodge symmetry holds in all degrees; h^{1,0}=h^{0,1}=1");
        assert!(!r.has_failures());
    }

    #[test]
    fn tetrahedron_symmetric_everywhere() {
        let r = hodge_symmetry_report(&scenarios::tetrahedron(), Mode::Parallel).unwrap();
        assert!(r.degrees.iter().all(|d| d.symmetric == Some(true)));
        assert_eq!(r.degrees[2].hodge.as_ref().unwrap().values, vec![1, 4, 1]);
    }

    #[test]
    fn pn_is_diagonal() {
        let r = hodge_symmetry_report(&scenarios::good_reduction_pn(2).unwrap(), Mode::Sequential)
            .unwrap();
        assert!(r.verdict.ends_with("all Hodge numbers are diagonal"), "{}", r.verdict);
        assert_eq!(r.degrees[1].hodge.as_ref().unwrap().values, vec![0, 0]);
    }

    #[test]
    fn elliptic_is_skipped_not_assumed() {
        let r = hodge_symmetry_report(&scenarios::elliptic_stratum(), Mode::Sequential).unwrap();
        assert!(r.degrees.iter().all(|d| d.symmetric.is_none()));
        assert!(r.verdict.starts_with("Hodge symmetry not established"));
        assert!(!r.has_failures());
    }

    #[test]
    fn modes_agree() {
        for spec in ScenarioSpec::builtins() {
            let sc = spec.build().unwrap();
            let a = hodge_symmetry_report(&sc, Mode::Parallel).unwrap().to_json_value();
            let b = hodge_symmetry_report(&sc, Mode::Sequential).unwrap().to_json_value();
            assert_eq!(a, b, "{spec}");
            let a = serde_json::to_value(run_checks(&sc, Selection::all(), Mode::Parallel).unwrap())
                .unwrap();
            let b = serde_json::to_value(run_checks(&sc, Selection::all(), Mode::Sequential).unwrap())
                .unwrap();
            assert_eq!(a, b, "{spec}");
        }
    }

    #[test]
    fn builtins_pass_all_checks() {
        for spec in ScenarioSpec::builtins() {
            let rs = run_checks(&spec.build().unwrap(), Selection::all(), Mode::Parallel).unwrap();
            let bad: Vec<_> = rs.iter().filter(|c| c.failed()).collect();
            assert!(bad.is_empty(), "{spec}: {bad:#?}");
        }
    }
}
