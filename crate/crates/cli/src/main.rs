use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use ssweight::check::{CheckResult, Status, Witness};
use ssweight::ito::{check_ito_axioms, ItoModule};
use ssweight::lefschetz::check_h1_suite;
use ssweight::linalg::{parse_rat, rat_to_string};
use ssweight::polygons::{
    ascii_sketch, check_admissibility_necessary, check_monodromy_rank, check_slope_symmetry,
    hodge_from_ordinary, slopes_from_e2, t_h, t_n, PhiNModule, SlopeMultiset,
};
use ssweight::report::{hodge_symmetry_report, run_checks, Mode, Selection, SCHEMA_VERSION};
use ssweight::scenarios::ScenarioSpec;
use ssweight::strata::StrataComplex;
use ssweight::weight_ss::{build_e1, compute_e2};
use ssweight::Error;

const SCHEMA_HINT: &str = "input formats: docs/strata_complex.schema.json, docs/ito_module.schema.json; \
                           `ssweight scenario <kind> -o file.json` writes a sample";

#[derive(Parser)]
#[command(name = "ssweight", version, about = "Weight spectral sequence and Lefschetz checks on strata data")]
#[command(after_help = SCHEMA_HINT)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a strata complex for structural and duality violations.
    Validate(Common),
    /// Compute the E2 page and the dimensions of the abutment.
    E2(Common),
    /// Run check suites; the page checks always run.
    Check(CheckArgs),
    /// Slopes of each degree from the E2 page.
    Slopes(SlopesArgs),
    /// Newton and Hodge polygons, from strata or from explicit slopes and jumps.
    Polygons(PolygonArgs),
    /// Degree-by-degree Hodge symmetry derivation.
    Report(Common),
    /// Write a builtin scenario as strata JSON; `--list` prints the builtins.
    Scenario(ScenarioArgs),
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum Format {
    Text,
    Json,
}

#[derive(Args)]
struct Common {
    /// Strata complex JSON file.
    input: Option<PathBuf>,
    /// Builtin scenario such as `ngon:3`, `tetrahedron`, `cellular:1,2,1`.
    #[arg(long)]
    scenario: Option<String>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    /// Write output here instead of stdout.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    common: Common,
    /// Log hard Lefschetz for all r.
    #[arg(long)]
    hl: bool,
    /// Weight-monodromy for all (r, w).
    #[arg(long)]
    wm: bool,
    /// The H^1 chain.
    #[arg(long)]
    h1: bool,
    /// Module axioms for the E1 module and its cohomology.
    #[arg(long)]
    ito: bool,
    #[arg(long)]
    all: bool,
}

#[derive(Args)]
struct SlopesArgs {
    #[command(flatten)]
    common: Common,
    /// Only this degree.
    #[arg(long)]
    degree: Option<usize>,
}

#[derive(Args)]
struct PolygonArgs {
    #[command(flatten)]
    common: Common,
    /// Only this degree.
    #[arg(long)]
    degree: Option<usize>,
    /// Comma-separated rational slopes, e.g. `0,1/2,1/2,1`.
    #[arg(long, requires = "jumps")]
    slopes: Option<String>,
    /// Comma-separated integer filtration jumps.
    #[arg(long, requires = "slopes")]
    jumps: Option<String>,
    #[arg(long)]
    monodromy_rank: Option<usize>,
}

#[derive(Args)]
struct ScenarioArgs {
    /// Scenario such as `ngon:3`.
    spec: Option<String>,
    #[arg(long)]
    list: bool,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

/// Exit 2: the input could not be read or processed.
struct InputError(String);

impl From<Error> for InputError {
    fn from(e: Error) -> Self {
        InputError(e.to_string())
    }
}

/// Rendered output and whether every check passed.
struct Outcome {
    text: String,
    ok: bool,
}

type Run = Result<Outcome, InputError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (output, result) = match cli.command {
        Command::Validate(c) => (c.output.clone(), validate(&c)),
        Command::E2(c) => (c.output.clone(), e2(&c)),
        Command::Check(c) => (c.common.output.clone(), check(&c)),
        Command::Slopes(c) => (c.common.output.clone(), slopes(&c)),
        Command::Polygons(c) => (c.common.output.clone(), polygons(&c)),
        Command::Report(c) => (c.output.clone(), report(&c)),
        Command::Scenario(c) => (c.output.clone(), scenario(&c)),
    };
    match result {
        Ok(outcome) => {
            let written = match output {
                Some(path) => std::fs::write(&path, &outcome.text)
                    .map_err(|e| format!("cannot write {}: {e}", path.display())),
                None => match std::io::stdout().write_all(outcome.text.as_bytes()) {
                    Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(format!("stdout: {e}")),
                    _ => Ok(()),
                },
            };
            match written {
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(2)
                }
                Ok(()) if outcome.ok => ExitCode::SUCCESS,
                Ok(()) => ExitCode::from(1),
            }
        }
        Err(InputError(msg)) => {
            eprintln!("error: {msg}");
            eprintln!("{SCHEMA_HINT}");
            ExitCode::from(2)
        }
    }
}

enum Input {
    Strata(StrataComplex),
    Module(ItoModule),
}

fn read_input(c: &Common) -> Result<Input, InputError> {
    match (&c.input, &c.scenario) {
        (Some(_), Some(_)) => Err(InputError("give either an input file or --scenario, not both".into())),
        (None, None) => Err(InputError("no input: give a JSON file or --scenario".into())),
        (None, Some(s)) => Ok(Input::Strata(s.parse::<ScenarioSpec>()?.build()?)),
        (Some(path), None) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| InputError(format!("cannot read {}: {e}", path.display())))?;
            let value: Value = serde_json::from_str(&text)
                .map_err(|e| InputError(format!("{}: {e}", path.display())))?;
            if value.get("spaces").is_some() {
                Ok(Input::Module(ItoModule::from_value(value)?))
            } else {
                Ok(Input::Strata(StrataComplex::from_value(value)?))
            }
        }
    }
}

fn read_strata(c: &Common) -> Result<StrataComplex, InputError> {
    match read_input(c)? {
        Input::Strata(sc) => Ok(sc),
        Input::Module(_) => Err(InputError("expected a strata complex, got a module".into())),
    }
}

/// Strata that also pass validation.
fn read_valid(c: &Common) -> Result<StrataComplex, InputError> {
    let sc = read_strata(c)?;
    let report = sc.validate();
    if let Some(v) = report.violations.first() {
        return Err(InputError(format!(
            "{} violation(s), first: {}; run `ssweight validate` for all",
            report.violations.len(),
            v.message
        )));
    }
    Ok(sc)
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values serialize");
    s.push('\n');
    s
}

fn validate(c: &Common) -> Run {
    let sc = read_strata(c)?;
    let report = sc.validate();
    let ok = report.is_valid();
    let text = match c.format {
        Format::Json => pretty(&json!({
            "schema_version": SCHEMA_VERSION,
            "name": sc.name,
            "valid": ok,
            "violations": report.violations,
        })),
        Format::Text => {
            let mut s = String::new();
            for v in &report.violations {
                let _ = writeln!(s, "{}: {}", v.kind, v.message);
            }
            let _ = writeln!(
                s,
                "{}: {}",
                sc.name,
                if ok { "valid".to_string() } else { format!("{} violation(s)", report.violations.len()) }
            );
            s
        }
    };
    Ok(Outcome { text, ok })
}

fn e2(c: &Common) -> Run {
    let sc = read_valid(c)?;
    let page = compute_e2(&build_e1(&sc)?)?;
    let text = match c.format {
        Format::Json => {
            let mut v = page.to_json_value();
            v["schema_version"] = json!(SCHEMA_VERSION);
            v["name"] = json!(sc.name);
            pretty(&v)
        }
        Format::Text => page.to_text(),
    };
    Ok(Outcome { text, ok: true })
}

fn render_checks(results: &[CheckResult], format: Format, name: &str) -> Outcome {
    let count = |f: fn(&CheckResult) -> bool| results.iter().filter(|c| f(c)).count();
    let (pass, fail) = (count(CheckResult::passed), count(CheckResult::failed));
    let skipped = results.len() - pass - fail;
    let text = match format {
        Format::Json => pretty(&json!({
            "schema_version": SCHEMA_VERSION,
            "name": name,
            "summary": {"pass": pass, "fail": fail, "skipped": skipped},
            "results": results,
        })),
        Format::Text => {
            let mut s = String::new();
            for r in results {
                let loc: Vec<String> = r.location.iter().map(|(k, v)| format!("{k}={v}")).collect();
                let status = match &r.status {
                    Status::Pass => "PASS".to_string(),
                    Status::Fail => "FAIL".to_string(),
                    Status::Skipped { reason } => format!("SKIP ({reason})"),
                };
                let _ = write!(s, "{status} {}", r.name);
                if !loc.is_empty() {
                    let _ = write!(s, " {}", loc.join(" "));
                }
                if let Some(note) = &r.note {
                    let _ = write!(s, " [{note}]");
                }
                s.push('\n');
                if let Some(w) = &r.witness {
                    let _ = writeln!(s, "  witness {}", serde_json::to_string(w).expect("witness serializes"));
                }
            }
            let _ = writeln!(s, "{name}: {pass} pass, {fail} fail, {skipped} skipped");
            s
        }
    };
    Outcome { text, ok: fail == 0 }
}

fn check(c: &CheckArgs) -> Run {
    let mode = Mode::from_env();
    match read_input(&c.common)? {
        Input::Module(v) => {
            let mut results = check_ito_axioms(&v);
            ssweight::check::sort_results(&mut results);
            Ok(render_checks(&results, c.common.format, "module"))
        }
        Input::Strata(sc) => {
            let report = sc.validate();
            if !report.is_valid() {
                // Pages need valid input; the H^1 chain reads absent data as zero.
                let mut results: Vec<CheckResult> = report
                    .violations
                    .iter()
                    .map(|v| {
                        let witness = v.witness.clone().unwrap_or_else(|| Witness::Values {
                            values: [("message".to_string(), v.message.clone())].into(),
                        });
                        CheckResult::new(format!("valid_{}", v.kind), &[]).note(v.message.clone()).fail(witness)
                    })
                    .collect();
                if c.h1 || c.all {
                    results.extend(check_h1_suite(&sc));
                }
                ssweight::check::sort_results(&mut results);
                return Ok(render_checks(&results, c.common.format, &sc.name));
            }
            let sel = if c.all {
                Selection::all()
            } else {
                Selection {
                    hl: c.hl,
                    wm: c.wm,
                    h1: c.h1,
                    ito: c.ito,
                }
            };
            let results = run_checks(&sc, sel, mode)?;
            Ok(render_checks(&results, c.common.format, &sc.name))
        }
    }
}

fn degrees(n: usize, only: Option<usize>) -> Result<Vec<usize>, InputError> {
    match only {
        Some(q) if q > 2 * n => Err(InputError(format!("degree {q} outside 0..={}", 2 * n))),
        Some(q) => Ok(vec![q]),
        None => Ok((0..=2 * n).collect()),
    }
}

fn slopes(c: &SlopesArgs) -> Run {
    let sc = read_valid(&c.common)?;
    let page = compute_e2(&build_e1(&sc)?)?;
    let mut rows = Vec::new();
    let mut ok = true;
    for q in degrees(sc.n, c.degree)? {
        let sl = slopes_from_e2(&page, q)?;
        let sym = check_slope_symmetry(&sl);
        ok &= !sym.failed();
        rows.push((q, sl, sym));
    }
    let text = match c.common.format {
        Format::Json => pretty(&json!({
            "schema_version": SCHEMA_VERSION,
            "name": sc.name,
            "degrees": rows.iter().map(|(q, sl, sym)| json!({
                "q": q,
                "slopes": sl.values().iter().map(rat_to_string).collect::<Vec<_>>(),
                "symmetry": sym,
            })).collect::<Vec<_>>(),
        })),
        Format::Text => {
            let mut s = String::new();
            for (q, sl, sym) in &rows {
                let verdict = if sym.passed() { "symmetric" } else { "NOT symmetric" };
                let _ = writeln!(s, "H^{q}: {sl} {verdict}");
            }
            s
        }
    };
    Ok(Outcome { text, ok })
}

fn parse_list<T>(s: &str, f: impl Fn(&str) -> Result<T, InputError>) -> Result<Vec<T>, InputError> {
    s.split(',').filter(|p| !p.trim().is_empty()).map(f).collect()
}

fn polygons(c: &PolygonArgs) -> Run {
    let modules: Vec<PhiNModule> = match (&c.slopes, &c.jumps) {
        (Some(sl), Some(jumps)) => {
            if c.common.input.is_some() || c.common.scenario.is_some() {
                return Err(InputError("--slopes/--jumps replace the strata input".into()));
            }
            let slopes = parse_list(sl, |p| Ok(parse_rat(p)?))?;
            let jumps = parse_list(jumps, |p| {
                p.trim()
                    .parse::<i64>()
                    .map_err(|_| InputError(format!("jump {p:?} is not an integer")))
            })?;
            let q = c.degree.unwrap_or_else(|| {
                slopes.iter().max().map_or(0, |m| m.ceil().to_integer().try_into().unwrap_or(0))
            });
            vec![PhiNModule::new(SlopeMultiset::new(q, slopes), jumps, c.monodromy_rank)?]
        }
        _ => {
            let sc = read_valid(&c.common)?;
            let page = compute_e2(&build_e1(&sc)?)?;
            let mut out = Vec::new();
            for q in degrees(sc.n, c.degree)? {
                let sl = slopes_from_e2(&page, q)?;
                let h = hodge_from_ordinary(&sl)?;
                out.push(PhiNModule::from_hodge(sl, &h)?);
            }
            out
        }
    };
    let mut ok = true;
    let mut rows = Vec::new();
    for m in &modules {
        let adm = check_admissibility_necessary(m);
        let rank = check_monodromy_rank(m);
        ok &= !adm.failed() && !rank.failed();
        rows.push((m, adm, rank));
    }
    let text = match c.common.format {
        Format::Json => pretty(&json!({
            "schema_version": SCHEMA_VERSION,
            "modules": rows.iter().map(|(m, adm, rank)| json!({
                "q": m.slopes.degree,
                "t_N": rat_to_string(&t_n(m)),
                "t_H": rat_to_string(&t_h(m)),
                "newton": m.newton_polygon().to_json_value(),
                "hodge": m.hodge_polygon().to_json_value(),
                "admissibility": adm,
                "monodromy_rank": rank,
            })).collect::<Vec<_>>(),
        })),
        Format::Text => {
            let mut s = String::new();
            for (m, adm, _) in &rows {
                let verts = |p: &ssweight::polygons::Polygon| {
                    p.vertices()
                        .iter()
                        .map(|(x, y)| format!("({},{})", rat_to_string(x), rat_to_string(y)))
                        .collect::<Vec<_>>()
                        .join(" ")
                };
                let (newton, hodge) = (m.newton_polygon(), m.hodge_polygon());
                let _ = writeln!(s, "q={} t_N={} t_H={}", m.slopes.degree, rat_to_string(&t_n(m)), rat_to_string(&t_h(m)));
                let _ = writeln!(s, "  newton {}", verts(&newton));
                let _ = writeln!(s, "  hodge  {}", verts(&hodge));
                let verdict = if adm.passed() { "pass" } else { "FAIL" };
                let _ = writeln!(s, "  admissibility (necessary conditions only): {verdict}");
                for line in ascii_sketch(&newton, &hodge).lines() {
                    let _ = writeln!(s, "  {line}");
                }
            }
            s
        }
    };
    Ok(Outcome { text, ok })
}

fn report(c: &Common) -> Run {
    let sc = read_valid(c)?;
    let r = hodge_symmetry_report(&sc, Mode::from_env())?;
    let text = match c.format {
        Format::Json => pretty(&r.to_json_value()),
        Format::Text => r.to_text(),
    };
    Ok(Outcome {
        text,
        ok: !r.has_failures(),
    })
}

fn scenario(c: &ScenarioArgs) -> Run {
    if c.list {
        let mut s = String::new();
        for spec in ScenarioSpec::builtins() {
            let _ = writeln!(s, "{spec}");
        }
        return Ok(Outcome { text: s, ok: true });
    }
    let spec = c
        .spec
        .as_deref()
        .ok_or_else(|| InputError("give a scenario such as `ngon:3`, or --list".into()))?;
    let sc = spec.parse::<ScenarioSpec>()?.build()?;
    let mut text = sc.to_json();
    text.push('\n');
    Ok(Outcome { text, ok: true })
}
