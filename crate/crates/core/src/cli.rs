//! The `qk` command line: behavioural distances, logical distances, law
//! checking, lifted matrices and a small relation calculator.
//!
//! Exit codes are fixed for scripting: 0 success, 1 a check suite failed,
//! 2 bad input, 3 a fixpoint ran out of iterations (artifacts are still
//! written, flagged as unconverged).

use crate::behaviour::{behavioural_distance, BdOpts, DistanceResult};
use crate::enriched::{VCat, VRel};
use crate::error::{Error, Result};
use crate::functor::SetFunctor;
use crate::lifting::{LaxExt, Lifting};
use crate::logic::{
    eval_formula, expressivity_report, logical_distance, parse_formula, registry_for, LdOpts,
    ModalityRegistry,
};
use crate::propcheck::{
    broken_extension_fixture, check_enriched, check_galois_extension, check_galois_lifting,
    check_lax_axioms, check_preserves_initial, CheckReport,
};
use crate::quantale::{fmt_rat, parse_rat, Quantale, Rat};
use crate::sysspec;
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NO_CONVERGENCE: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "qk", version, about = "behavioural distances over quantales")]
pub struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Fixpoint behavioural distance of a system under a lifting.
    Bd(BdArgs),
    /// Depth-stratified logical distance; single-formula evaluation.
    Ld(LdArgs),
    /// Law batteries: lax axioms, tensor compatibility, initial morphisms,
    /// lifting/extension round trips.
    Check(CheckArgs),
    /// Two liftings side by side on one system.
    Compare(CompareArgs),
    /// Lifted structure of a finite category under a functor and lifting.
    Lift(LiftArgs),
    /// Relation calculator: compose, converse, residual.
    Rel(RelArgs),
}

#[derive(Args, Debug)]
struct BdArgs {
    /// System description (JSON).
    #[arg(long)]
    system: PathBuf,
    /// Lifting, e.g. "kantorovich:E", "egli-lower", "sym∘kantorovich:dia".
    /// Falls back to the system file's "lifting" field.
    #[arg(long)]
    lifting: Option<String>,
    /// Stop tolerance: a rational like "1/1000000", "0.001" or "1e-6";
    /// 0 demands a literal fixpoint.
    #[arg(long, default_value = "1e-6")]
    epsilon: String,
    #[arg(long, default_value_t = 1000)]
    max_iter: usize,
    /// Write the distance matrix as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Write the JSON report (matrix, iterations, convergence).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct LdArgs {
    #[arg(long)]
    system: PathBuf,
    #[arg(long, default_value_t = 3)]
    depth: usize,
    /// Denominator of the constant grid for <u>*φ / hom(<u>,φ) over infinite
    /// quantales.
    #[arg(long, default_value_t = 4)]
    grid: u32,
    /// Cap on distinct semantic vectors enumerated.
    #[arg(long, default_value_t = 512)]
    budget: usize,
    /// Evaluate one formula and print its value per state instead of running
    /// the distance enumeration.
    #[arg(long)]
    formula: Option<String>,
    /// Also run the behavioural distance under this lifting and report the
    /// per-depth gap (CSV: depth, max_gap, formulas).
    #[arg(long)]
    lifting: Option<String>,
    #[arg(long, default_value = "1e-6")]
    epsilon: String,
    #[arg(long, default_value_t = 1000)]
    max_iter: usize,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CheckArgs {
    /// lax | enriched | initial | galois | all
    #[arg(long)]
    suite: String,
    /// Quantale for the sampled batteries.
    #[arg(long, default_value = "bool2")]
    quantale: String,
    /// Restrict lax/enriched to one extension, e.g. "egli-lower".
    #[arg(long)]
    ext: Option<String>,
    /// Restrict initial to one lifting, e.g. "discrete" or "kantorovich:dia".
    #[arg(long)]
    lifting: Option<String>,
    /// Instances per sampled check; 0 skips everything and reports trivially.
    #[arg(long, default_value_t = 40)]
    budget: usize,
    /// RNG seed; the QK_SEED environment variable overrides this flag.
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Predicate-lifting arity bound for the round-trip checks.
    #[arg(long, default_value_t = 1)]
    arity: usize,
    /// Write all reports as one JSON array.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CompareArgs {
    #[arg(long)]
    system: PathBuf,
    /// Two liftings, comma separated: "kantorovich:E,tv".
    #[arg(long)]
    liftings: String,
    #[arg(long, default_value = "1e-6")]
    epsilon: String,
    #[arg(long, default_value_t = 1000)]
    max_iter: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct LiftArgs {
    /// Finite category file (JSON).
    #[arg(long)]
    category: PathBuf,
    /// Functor shape, e.g. "powerset", "1+dist", "powerset^A".
    #[arg(long)]
    functor: String,
    /// Labels for exponent/sum functors, comma separated.
    #[arg(long, value_delimiter = ',')]
    labels: Vec<String>,
    #[arg(long)]
    lifting: String,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct RelArgs {
    /// compose | converse | residual
    op: String,
    #[arg(long)]
    left: PathBuf,
    #[arg(long)]
    right: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Parse argv, run, and hand back the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            // clap handles --help/--version through this path with status 0.
            let _ = e.print();
            return if e.exit_code() == 0 { EXIT_OK } else { EXIT_INPUT };
        }
    };
    let outcome = match cli.cmd {
        Cmd::Bd(a) => cmd_bd(&a),
        Cmd::Ld(a) => cmd_ld(&a),
        Cmd::Check(a) => cmd_check(&a),
        Cmd::Compare(a) => cmd_compare(&a),
        Cmd::Lift(a) => cmd_lift(&a),
        Cmd::Rel(a) => cmd_rel(&a),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::NonConvergence(_) => EXIT_NO_CONVERGENCE,
                _ => EXIT_INPUT,
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Shared plumbing
// ---------------------------------------------------------------------------

/// "1e-6" / "2.5E-3" / plain rationals. Exponent notation keeps the mantissa
/// exact and scales by a power of ten.
fn parse_epsilon(s: &str) -> Result<Rat> {
    let s = s.trim();
    if let Some(pos) = s.find(['e', 'E']) {
        let mantissa = parse_rat(&s[..pos])?;
        let exp: i32 = s[pos + 1..]
            .parse()
            .map_err(|_| Error::Validation(format!("bad exponent in {s:?}")))?;
        let ten = Rat::from_integer(10.into());
        let mut scale = Rat::from_integer(1.into());
        for _ in 0..exp.unsigned_abs() {
            scale *= ten.clone();
        }
        return Ok(if exp >= 0 { mantissa * scale } else { mantissa / scale });
    }
    parse_rat(s)
}

struct SystemFile {
    coalg: crate::behaviour::Coalgebra,
    lifting_hint: Option<String>,
    modalities: Option<Vec<String>>,
}

fn load_system(path: &Path) -> Result<SystemFile> {
    let v = sysspec::load_value(path)?;
    let coalg = sysspec::coalgebra_from_value(&v, path.parent())?;
    let lifting_hint = v.get("lifting").and_then(Value::as_str).map(str::to_string);
    let modalities = match v.get("modalities") {
        Some(Value::Array(xs)) => Some(
            xs.iter()
                .map(|x| {
                    x.as_str()
                        .map(str::to_string)
                        .ok_or_else(|| Error::Validation("modalities must be names".into()))
                })
                .collect::<Result<Vec<_>>>()?,
        ),
        Some(_) => return Err(Error::Validation("modalities must be an array".into())),
        None => None,
    };
    Ok(SystemFile { coalg, lifting_hint, modalities })
}

fn registry_for_system(sys: &SystemFile) -> Result<ModalityRegistry> {
    let full = registry_for(&sys.coalg.functor);
    match &sys.modalities {
        None => Ok(full),
        Some(names) => {
            let mut out = ModalityRegistry::default();
            for name in names {
                let pl = full
                    .get(name)
                    .ok_or_else(|| Error::Unknown(format!("modality {name:?}")))?;
                out.insert(pl.clone());
            }
            Ok(out)
        }
    }
}

fn resolve_lifting(flag: &Option<String>, sys: &SystemFile) -> Result<Lifting> {
    let name = flag
        .as_deref()
        .or(sys.lifting_hint.as_deref())
        .ok_or_else(|| Error::Validation("no lifting given (flag or system field)".into()))?;
    Lifting::parse(name, &sys.coalg.functor)
}

fn write_artifact(path: &Option<PathBuf>, contents: &str) -> Result<()> {
    if let Some(p) = path {
        sysspec::write_atomic(p, contents)?;
    }
    Ok(())
}

fn print_matrix(cat: &VCat) {
    let n = cat.len();
    let names: Vec<String> = cat.carrier.iter().map(|e| e.to_string()).collect();
    let cells: Vec<Vec<String>> = (0..n)
        .map(|i| (0..n).map(|j| cat.q.value_to_string(cat.at(i, j))).collect())
        .collect();
    let mut width = names.iter().map(String::len).max().unwrap_or(1);
    for row in &cells {
        for c in row {
            width = width.max(c.len());
        }
    }
    print!("{:width$}", "");
    for name in &names {
        print!("  {name:>width$}");
    }
    println!();
    for (i, row) in cells.iter().enumerate() {
        print!("{:>width$}", names[i]);
        for c in row {
            print!("  {c:>width$}");
        }
        println!();
    }
}

// ---------------------------------------------------------------------------
// bd
// ---------------------------------------------------------------------------

fn cmd_bd(a: &BdArgs) -> Result<i32> {
    let sys = load_system(&a.system)?;
    let lifting = resolve_lifting(&a.lifting, &sys)?;
    let opts = BdOpts { epsilon: parse_epsilon(&a.epsilon)?, max_iter: a.max_iter };
    let res = behavioural_distance(&sys.coalg, &lifting, &opts)?;
    report_bd(&sys, &lifting, &res, &a.csv, &a.out)
}

fn report_bd(
    sys: &SystemFile,
    lifting: &Lifting,
    res: &DistanceResult,
    csv: &Option<PathBuf>,
    out: &Option<PathBuf>,
) -> Result<i32> {
    let status = if res.exact {
        "fixpoint".to_string()
    } else if res.converged {
        format!("within {}", fmt_rat(&res.epsilon))
    } else {
        "NOT CONVERGED".to_string()
    };
    println!(
        "bd[{}] on {} states: {} after {} iterations",
        lifting.name(),
        res.cat.len(),
        status,
        res.iterations
    );
    print_matrix(&res.cat);
    write_artifact(csv, &sysspec::matrix_csv(&res.cat)?)?;
    let report = sysspec::distance_report_value(&sys.coalg, &lifting.name(), res);
    write_artifact(out, &serde_json::to_string_pretty(&report)?)?;
    Ok(if res.converged { EXIT_OK } else { EXIT_NO_CONVERGENCE })
}

// ---------------------------------------------------------------------------
// ld
// ---------------------------------------------------------------------------

fn cmd_ld(a: &LdArgs) -> Result<i32> {
    let sys = load_system(&a.system)?;
    let reg = registry_for_system(&sys)?;
    let c = &sys.coalg;

    if let Some(src) = &a.formula {
        let phi = parse_formula(&c.q, src)?;
        reg.validate(&phi)?;
        let vals = eval_formula(&phi, c, &reg)?;
        let mut lines = String::new();
        for (x, v) in c.states.iter().zip(&vals) {
            let line = format!("{x},{}", c.q.value_to_string(v));
            println!("{line}");
            lines.push_str(&line);
            lines.push('\n');
        }
        write_artifact(&a.out, &lines)?;
        return Ok(EXIT_OK);
    }

    let ld_opts = LdOpts { depth: a.depth, const_den: a.grid, max_vectors: a.budget };

    if let Some(lname) = &a.lifting {
        let lifting = Lifting::parse(lname, &c.functor)?;
        let bd_opts = BdOpts { epsilon: parse_epsilon(&a.epsilon)?, max_iter: a.max_iter };
        let rep = expressivity_report(c, &lifting, &reg, &bd_opts, &ld_opts)?;
        println!("{:>5}  {:>12}  {:>8}", "depth", "max_gap", "formulas");
        let mut csv_text = String::from("depth,max_gap,formulas\n");
        for row in &rep.rows {
            let gap = row.gap.as_ref().map_or_else(|| "-".into(), fmt_rat);
            println!("{:>5}  {:>12}  {:>8}", row.depth, gap, row.vectors);
            csv_text.push_str(&format!("{},{},{}\n", row.depth, gap, row.vectors));
        }
        println!(
            "universal direction: {}{}",
            if rep.universal_ok { "holds" } else { "VIOLATED" },
            if rep.budget_hit { " (budget hit)" } else { "" }
        );
        if let Some(w) = &rep.worst {
            println!("widest pair ({}, {}): bd {} vs ld {} via {}", w.x, w.y, w.bd, w.ld, w.formula);
        }
        write_artifact(&a.csv, &csv_text)?;
        let report = sysspec::expressivity_report_value(&rep);
        write_artifact(&a.out, &serde_json::to_string_pretty(&report)?)?;
        return Ok(if rep.bd.converged { EXIT_OK } else { EXIT_NO_CONVERGENCE });
    }

    let res = logical_distance(c, &reg, &ld_opts)?;
    let last = res.per_depth.last().expect("depth 0 always present");
    println!(
        "ld depth {} with {} semantic vectors{}",
        last.depth,
        last.vectors,
        if res.budget_hit { " (budget hit)" } else { "" }
    );
    print_matrix(&last.cat);
    write_artifact(&a.csv, &sysspec::matrix_csv(&last.cat)?)?;
    let depths: Vec<Value> = res
        .per_depth
        .iter()
        .map(|d| {
            let mut v = sysspec::category_to_value(&d.cat);
            let obj = v.as_object_mut().expect("object");
            obj.insert("depth".into(), json!(d.depth));
            obj.insert("vectors".into(), json!(d.vectors));
            v
        })
        .collect();
    let report = json!({ "depths": depths, "budget_hit": res.budget_hit });
    write_artifact(&a.out, &serde_json::to_string_pretty(&report)?)?;
    Ok(EXIT_OK)
}

// ---------------------------------------------------------------------------
// check
// ---------------------------------------------------------------------------

struct PlannedCheck {
    report: CheckReport,
    /// Negative controls are expected to fail; their failure is the pass.
    expected_fail: bool,
}

fn cmd_check(a: &CheckArgs) -> Result<i32> {
    let seed = match std::env::var("QK_SEED") {
        Ok(s) => s
            .parse::<u64>()
            .map_err(|_| Error::Validation(format!("QK_SEED must be an integer, got {s:?}")))?,
        Err(_) => a.seed,
    };
    let q = Quantale::by_name(&a.quantale)?;
    let suites: Vec<&str> = match a.suite.as_str() {
        "all" => vec!["lax", "enriched", "initial", "galois"],
        s @ ("lax" | "enriched" | "initial" | "galois") => vec![s],
        other => return Err(Error::Unknown(format!("suite {other:?}"))),
    };

    let mut checks: Vec<PlannedCheck> = Vec::new();
    let mut push = |rep: CheckReport, expected_fail: bool| {
        checks.push(PlannedCheck { report: rep, expected_fail });
    };

    if a.budget == 0 {
        // Zero budget: nothing sampled, nothing enumerated, trivially green.
        for s in &suites {
            push(CheckReport::trivial(&format!("{s} (skipped: budget 0)"), seed), false);
        }
        return finish_checks(&checks, &a.out);
    }

    for suite in &suites {
        match *suite {
            "lax" => {
                let exts = scoped_extensions(&a.ext)?;
                for ext in &exts {
                    push(check_lax_axioms(&q, ext, a.budget, seed)?, false);
                }
                if a.ext.is_none() {
                    push(check_lax_axioms(&q, &broken_extension_fixture(), a.budget, seed)?, true);
                }
            }
            "enriched" => {
                for ext in &scoped_extensions(&a.ext)? {
                    push(check_enriched(&q, ext, a.budget, seed)?, false);
                }
            }
            "initial" => {
                let subjects: Vec<(Lifting, bool)> = match &a.lifting {
                    Some(name) => {
                        vec![(Lifting::parse(name, &SetFunctor::Powerset)?, false)]
                    }
                    None => {
                        let mut v = vec![
                            (Lifting::FromExtension(LaxExt::EgliLower), false),
                            (Lifting::parse("kantorovich:dia", &SetFunctor::Powerset)?, false),
                            (Lifting::Discrete(SetFunctor::Identity), true),
                            (Lifting::Zigzag, true),
                        ];
                        if q.name() == "luk01" {
                            v.push((Lifting::WassersteinE, false));
                            v.push((Lifting::TotalVariation, true));
                        }
                        v
                    }
                };
                for (l, neg) in subjects {
                    push(check_preserves_initial(&q, &l, a.budget, seed)?, neg);
                }
            }
            "galois" => {
                // Round trips enumerate everything; they live over bool2.
                push(
                    check_galois_lifting(&Lifting::FromExtension(LaxExt::EgliLower), a.arity, 2)?,
                    false,
                );
                push(check_galois_extension(&LaxExt::EgliLower, a.arity.max(2))?, false);
            }
            _ => unreachable!(),
        }
    }
    finish_checks(&checks, &a.out)
}

fn scoped_extensions(flag: &Option<String>) -> Result<Vec<LaxExt>> {
    match flag {
        Some(name) => Ok(vec![LaxExt::parse(name)?]),
        None => Ok(vec![
            LaxExt::EgliLower,
            LaxExt::EgliUpper,
            LaxExt::EgliBoth,
            LaxExt::parse("kantorovich:dia")?,
        ]),
    }
}

fn finish_checks(checks: &[PlannedCheck], out: &Option<PathBuf>) -> Result<i32> {
    let mut all_ok = true;
    for c in checks {
        let ok = c.report.passed() != c.expected_fail;
        all_ok &= ok;
        let tag = match (ok, c.expected_fail) {
            (true, false) => "PASS",
            (true, true) => "XFAIL",
            (false, true) => "UNEXPECTED PASS",
            (false, false) => "FAIL",
        };
        println!("{tag:>15}  {}", c.report.summary());
        for w in &c.report.failures {
            println!("{:>15}  witness: {w}", "");
        }
    }
    let arr: Vec<Value> = checks
        .iter()
        .map(|c| {
            let mut v = sysspec::check_report_value(&c.report);
            v.as_object_mut()
                .expect("object")
                .insert("expected_fail".into(), json!(c.expected_fail));
            v
        })
        .collect();
    write_artifact(out, &serde_json::to_string_pretty(&Value::Array(arr))?)?;
    Ok(if all_ok { EXIT_OK } else { EXIT_CHECK_FAILED })
}

// ---------------------------------------------------------------------------
// compare
// ---------------------------------------------------------------------------

fn cmd_compare(a: &CompareArgs) -> Result<i32> {
    let sys = load_system(&a.system)?;
    let names: Vec<&str> = a.liftings.split(',').map(str::trim).collect();
    if names.len() != 2 {
        return Err(Error::Validation("--liftings wants exactly two names".into()));
    }
    let opts = BdOpts { epsilon: parse_epsilon(&a.epsilon)?, max_iter: a.max_iter };
    let c = &sys.coalg;
    let mut results = Vec::new();
    for name in &names {
        let l = Lifting::parse(name, &c.functor)?;
        let res = behavioural_distance(c, &l, &opts)?;
        println!("-- {name}");
        print_matrix(&res.cat);
        results.push(res);
    }
    let (ra, rb) = (&results[0], &results[1]);
    let mut gap: Option<Rat> = Some(Rat::from_integer(0.into()));
    let mut agree = true;
    for (x, y) in ra.cat.mat.iter().zip(&rb.cat.mat) {
        agree &= x == y;
        match (gap.take(), c.q.diff(x, y)) {
            (Some(g), Some(d)) => gap = Some(g.max(d)),
            _ => gap = None,
        }
    }
    match &gap {
        Some(g) => println!("max numeric gap: {}", fmt_rat(g)),
        None => println!("matrices {}", if agree { "agree" } else { "differ (non-numeric)" }),
    }
    let report = json!({
        "liftings": names,
        "left": sysspec::distance_report_value(c, names[0], ra),
        "right": sysspec::distance_report_value(c, names[1], rb),
        "max_gap": gap.as_ref().map(fmt_rat),
        "equal": agree,
    });
    write_artifact(&a.out, &serde_json::to_string_pretty(&report)?)?;
    Ok(if ra.converged && rb.converged { EXIT_OK } else { EXIT_NO_CONVERGENCE })
}

// ---------------------------------------------------------------------------
// lift / rel
// ---------------------------------------------------------------------------

fn cmd_lift(a: &LiftArgs) -> Result<i32> {
    let cat = sysspec::load_category(&a.category)?;
    let functor = SetFunctor::parse(&a.functor, &a.labels)?;
    let lifting = Lifting::parse(&a.lifting, &functor)?;
    let lifted = lifting.lift(&cat)?;
    println!("{} applied to {} points gives {} points", lifting.name(), cat.len(), lifted.len());
    print_matrix(&lifted);
    write_artifact(&a.csv, &sysspec::matrix_csv(&lifted)?)?;
    write_artifact(&a.out, &serde_json::to_string_pretty(&sysspec::category_to_value(&lifted))?)?;
    Ok(EXIT_OK)
}

fn cmd_rel(a: &RelArgs) -> Result<i32> {
    let left = sysspec::load_relation(&a.left)?;
    let need_right = || -> Result<VRel> {
        let p = a.right.as_ref().ok_or_else(|| {
            Error::Validation(format!("rel {} needs --right", a.op))
        })?;
        sysspec::load_relation(p)
    };
    let result = match a.op.as_str() {
        "compose" => left.then(&need_right()?)?,
        "converse" => left.converse(),
        // Largest t with t·left ≤ right, both legs sharing their source.
        "residual" => VRel::kan(&left, &need_right()?)?,
        other => return Err(Error::Unknown(format!("rel op {other:?}"))),
    };
    let v = sysspec::relation_to_value(&result);
    println!("{}", serde_json::to_string_pretty(&v)?);
    write_artifact(&a.out, &serde_json::to_string_pretty(&v)?)?;
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn epsilon_accepts_exponent_and_rational_forms() {
        assert_eq!(parse_epsilon("1e-6").unwrap(), Rat::new(1.into(), 1_000_000.into()));
        assert_eq!(parse_epsilon("2.5e-3").unwrap(), Rat::new(1.into(), 400.into()));
        assert_eq!(parse_epsilon("1/8").unwrap(), Rat::new(1.into(), 8.into()));
        assert_eq!(parse_epsilon("0").unwrap(), Rat::from_integer(0.into()));
        assert!(parse_epsilon("1e").is_err());
    }

    #[test]
    fn unknown_suite_is_an_input_error() {
        let code = run(["qk", "check", "--suite", "nonsense"]);
        assert_eq!(code, EXIT_INPUT);
    }

    #[test]
    fn zero_budget_check_is_trivially_green() {
        let code = run(["qk", "check", "--suite", "all", "--budget", "0"]);
        assert_eq!(code, EXIT_OK);
    }
}
