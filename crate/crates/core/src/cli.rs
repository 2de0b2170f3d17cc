//! Command-line front end. [`run`] takes the argument list and output
//! streams so it can be driven from tests; the binary is a thin wrapper.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::catalog::{self, builtin, sample_points};
use crate::conformal::conformal_metric;
use crate::curvature::{analyze, kahler_defect, kahler_like_defect};
use crate::metric::MetricSpec;
use crate::mixed::{extremize, ExtremizeOptions, ExtremumReport, MixedParams};
use crate::parser::{parse_expr, parse_metric};
use crate::report::{self, num, SCHEMA_VERSION};
use crate::tensor::CMatrix;
use crate::verify::{run_suite, Suite};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

/// Environment variable supplying a default tolerance override for `verify`.
pub const TOL_ENV: &str = "HERMCURV_TOL";

#[derive(Parser, Debug)]
#[command(name = "hermcurv", version, about = "Chern curvature and mixed curvature of Hermitian metrics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Per-point curvature report as JSON.
    Eval(EvalArgs),
    /// Run the verification battery.
    Verify(VerifyArgs),
    /// Minimum and maximum of the mixed curvature over unit directions.
    Extremize(ExtremizeArgs),
    /// Built-in metrics.
    #[command(subcommand)]
    Catalog(CatalogCommand),
}

#[derive(Args, Debug, Clone)]
pub struct PointArgs {
    /// Catalog name or path to a metric file.
    #[arg(long)]
    pub metric: String,
    /// Number of sampled points.
    #[arg(long, default_value_t = 5)]
    pub points: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Explicit point as comma-separated complex numbers, e.g. "1+0.5i, -0.2".
    /// Repeatable; replaces sampling.
    #[arg(long = "at")]
    pub at: Vec<String>,
    /// Mixed-curvature alpha values, paired in order with --beta.
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Vec<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Vec<f64>,
    /// Real conformal factor F; the metric becomes exp(2F) g.
    #[arg(long)]
    pub conformal: Option<String>,
    /// Evaluate points in parallel.
    #[arg(long)]
    pub parallel: bool,
    #[arg(long, default_value_t = 16)]
    pub restarts: usize,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    #[command(flatten)]
    pub points: PointArgs,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = Suite::All)]
    pub suite: Suite,
    /// Replace every check's tolerance.
    #[arg(long, env = TOL_ENV)]
    pub tol: Option<f64>,
    /// Also write the outcomes as JSON.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ExtremizeArgs {
    #[command(flatten)]
    pub points: PointArgs,
    /// Also write the table as JSON.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum CatalogCommand {
    List,
    /// Print the metric source and expected values.
    Show { name: String },
}

/// An error that maps to exit code 2.
#[derive(Debug)]
pub struct InputError(pub String);

impl<E: std::fmt::Display> From<E> for InputError {
    fn from(e: E) -> Self {
        InputError(e.to_string())
    }
}

pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = if e.use_stderr() { write!(err, "{e}") } else { write!(out, "{e}") };
            return code;
        }
    };
    let result = match cli.command {
        Command::Eval(a) => run_eval(&a, out),
        Command::Verify(a) => run_verify(&a, out),
        Command::Extremize(a) => run_extremize(&a, out),
        Command::Catalog(c) => run_catalog(&c, out),
    };
    match result {
        Ok(code) => code,
        Err(InputError(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_INPUT
        }
    }
}

/// Catalog entry by name, otherwise a metric file.
pub fn load_metric(source: &str) -> Result<MetricSpec, InputError> {
    if let Ok(entry) = builtin(source) {
        return Ok(entry.spec);
    }
    let path = Path::new(source);
    let text = std::fs::read_to_string(path)
        .map_err(|e| InputError(format!("`{source}` is neither a catalog name nor a readable file: {e}")))?;
    let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or(source);
    let spec = parse_metric(&text).map_err(|e| InputError(format!("{}: {e}", path.display())))?;
    Ok(spec.with_name(name))
}

fn parse_point(text: &str, n: usize) -> Result<Vec<Complex64>, InputError> {
    let coords: Vec<Complex64> = text
        .split(',')
        .map(|part| {
            let e = parse_expr(part, 0).map_err(|e| InputError(format!("point `{text}`: {e}")))?;
            e.eval(&[]).map_err(|e| InputError(format!("point `{text}`: {e}")))
        })
        .collect::<Result<_, _>>()?;
    if coords.len() != n {
        return Err(InputError(format!("point `{text}` has {} coordinates, metric has dimension {n}", coords.len())));
    }
    Ok(coords)
}

struct Prepared {
    spec: MetricSpec,
    points: Vec<Vec<Complex64>>,
    params: Vec<MixedParams>,
    options: ExtremizeOptions,
}

fn prepare(a: &PointArgs) -> Result<Prepared, InputError> {
    let mut spec = load_metric(&a.metric)?;
    let n = spec.dim();
    let points = if a.at.is_empty() {
        if a.points == 0 {
            return Err(InputError("at least one point is required".into()));
        }
        let entry = catalog::CatalogEntry {
            name: spec.name.clone(),
            spec: spec.clone(),
            expected: Vec::new(),
            notes: "",
            kahler: false,
        };
        sample_points(&entry, a.points, a.seed)
    } else {
        a.at.iter().map(|t| parse_point(t, n)).collect::<Result<_, _>>()?
    };
    for p in &points {
        if !spec.domain.contains(p) {
            return Err(InputError(format!("point {p:?} lies outside the domain `{}`", spec.domain)));
        }
    }
    if let Some(f) = &a.conformal {
        let f = parse_expr(f, n).map_err(|e| InputError(format!("conformal factor: {e}")))?;
        spec = conformal_metric(&spec, &f);
    }
    if a.alpha.len() != a.beta.len() {
        return Err(InputError(format!(
            "{} --alpha values but {} --beta values",
            a.alpha.len(),
            a.beta.len()
        )));
    }
    let params = a
        .alpha
        .iter()
        .zip(&a.beta)
        .map(|(&al, &be)| MixedParams::new(al, be))
        .collect::<Result<Vec<_>, _>>()?;
    let options = ExtremizeOptions { restarts: a.restarts, seed: a.seed, ..ExtremizeOptions::default() };
    Ok(Prepared { spec, points, params, options })
}

/// Applies `f` to every point, in parallel when asked, keeping point order.
fn map_points<T: Send>(
    points: &[Vec<Complex64>],
    parallel: bool,
    f: impl Fn(&[Complex64]) -> T + Sync,
) -> Vec<T> {
    if parallel {
        points.par_iter().map(|p| f(p)).collect()
    } else {
        points.iter().map(|p| f(p)).collect()
    }
}

fn header(command: &str, spec: &MetricSpec) -> Map<String, Value> {
    let mut doc = Map::new();
    doc.insert("schema".into(), json!(SCHEMA_VERSION));
    doc.insert("command".into(), json!(command));
    doc.insert("metric".into(), json!(spec.name));
    doc.insert("dim".into(), json!(spec.dim()));
    doc.insert("domain".into(), json!(spec.domain.to_string()));
    doc
}

fn extremize_all(spec: &MetricSpec, p: &[Complex64], prep: &Prepared) -> Result<Vec<ExtremumReport>, String> {
    let g = analyze(spec, p).map_err(|e| e.to_string())?;
    let n = spec.dim();
    prep.params
        .iter()
        .map(|&pr| extremize(&g.unitary, &CMatrix::identity(n, n), pr, &prep.options).map_err(|e| e.to_string()))
        .collect()
}

pub fn run_eval(a: &EvalArgs, out: &mut dyn Write) -> Result<i32, InputError> {
    let prep = prepare(&a.points)?;
    let spec = &prep.spec;
    let records = map_points(&prep.points, a.points.parallel, |p| {
        let mut rec = Map::new();
        rec.insert("point".into(), report::vector(p));
        match analyze(spec, p) {
            Ok(g) => {
                rec.extend(report::geometry_fields(&g, kahler_defect(&g.jet), kahler_like_defect(&g.unitary)));
                let mixed: Vec<Value> = match extremize_all(spec, p, &prep) {
                    Ok(reps) => prep.params.iter().zip(&reps).map(|(pr, r)| report::extremum(*pr, r)).collect(),
                    Err(e) => {
                        rec.insert("error".into(), json!(e));
                        Vec::new()
                    }
                };
                rec.insert("mixed".into(), Value::Array(mixed));
            }
            Err(e) => {
                rec.insert("error".into(), json!(e.to_string()));
            }
        }
        Value::Object(rec)
    });
    let failed = records.iter().any(|r| r.get("error").is_some());
    let mut doc = header("eval", spec);
    if let Some(f) = &a.points.conformal {
        doc.insert("conformal".into(), json!(f));
    }
    doc.insert("seed".into(), json!(a.points.seed));
    doc.insert("records".into(), Value::Array(records));
    write_json(&Value::Object(doc), a.out.as_deref(), out)?;
    Ok(if failed { EXIT_INPUT } else { EXIT_OK })
}

fn write_json(doc: &Value, path: Option<&Path>, out: &mut dyn Write) -> Result<(), InputError> {
    let mut text = serde_json::to_string_pretty(doc)?;
    text.push('\n');
    match path {
        Some(path) => std::fs::write(path, text).map_err(|e| InputError(format!("{}: {e}", path.display()))),
        None => out.write_all(text.as_bytes()).map_err(Into::into),
    }
}

pub fn run_verify(a: &VerifyArgs, out: &mut dyn Write) -> Result<i32, InputError> {
    if let Some(t) = a.tol {
        if !(t >= 0.0) {
            return Err(InputError(format!("tolerance must be non-negative, got {t}")));
        }
    }
    let outcomes = run_suite(a.suite, a.tol);
    let failures = outcomes.iter().filter(|o| !o.pass).count();
    for o in &outcomes {
        writeln!(out, "{o}")?;
    }
    writeln!(
        out,
        "{} checks, {} passed, {} failed (suite {})",
        outcomes.len(),
        outcomes.len() - failures,
        failures,
        a.suite.as_str()
    )?;
    if let Some(path) = &a.json {
        let checks: Vec<Value> = outcomes
            .iter()
            .map(|o| {
                json!({
                    "check": o.check_id,
                    "metric": o.metric,
                    "point": o.point.as_deref().map(report::vector),
                    "residual": num(o.residual),
                    "tolerance": num(o.tolerance),
                    "pass": o.pass,
                    "provenance": o.provenance.as_str(),
                    "error": o.error,
                })
            })
            .collect();
        let doc = json!({ "schema": SCHEMA_VERSION, "command": "verify", "suite": a.suite.as_str(), "checks": checks });
        write_json(&doc, Some(path), out)?;
    }
    Ok(if failures == 0 { EXIT_OK } else { EXIT_FAILURE })
}

fn format_vector(v: &[Complex64]) -> String {
    let parts: Vec<String> = v.iter().map(|z| format!("{:+.4}{:+.4}i", z.re, z.im)).collect();
    format!("({})", parts.join(", "))
}

pub fn run_extremize(a: &ExtremizeArgs, out: &mut dyn Write) -> Result<i32, InputError> {
    let prep = prepare(&a.points)?;
    if prep.params.is_empty() {
        return Err(InputError("extremize needs at least one --alpha/--beta pair".into()));
    }
    let spec = &prep.spec;
    let rows = map_points(&prep.points, a.points.parallel, |p| extremize_all(spec, p, &prep));
    writeln!(
        out,
        "{:<4} {:>8} {:>8} {:>22} {:>22} {:>10}  {:<9} argmin / argmax",
        "pt", "alpha", "beta", "min", "max", "spread", "converged"
    )?;
    let mut failed = false;
    let mut json_rows = Vec::new();
    for (k, (p, row)) in prep.points.iter().zip(&rows).enumerate() {
        match row {
            Ok(reps) => {
                for (pr, r) in prep.params.iter().zip(reps) {
                    writeln!(
                        out,
                        "{k:<4} {:>8} {:>8} {:>22.15e} {:>22.15e} {:>10.3e}  {:<9} {} / {}",
                        pr.alpha,
                        pr.beta,
                        r.min_value,
                        r.max_value,
                        r.spread,
                        if r.converged { "yes" } else { "NO" },
                        format_vector(&r.argmin),
                        format_vector(&r.argmax)
                    )?;
                    let mut v = report::extremum(*pr, r);
                    v.as_object_mut().expect("object").insert("point".into(), report::vector(p));
                    json_rows.push(v);
                }
            }
            Err(e) => {
                failed = true;
                writeln!(out, "{k:<4} error: {e}")?;
                json_rows.push(json!({ "point": report::vector(p), "error": e }));
            }
        }
    }
    if let Some(path) = &a.json {
        let mut doc = header("extremize", spec);
        doc.insert("seed".into(), json!(a.points.seed));
        doc.insert("rows".into(), Value::Array(json_rows));
        write_json(&Value::Object(doc), Some(path), out)?;
    }
    Ok(if failed { EXIT_INPUT } else { EXIT_OK })
}

pub fn run_catalog(c: &CatalogCommand, out: &mut dyn Write) -> Result<i32, InputError> {
    match c {
        CatalogCommand::List => {
            for name in catalog::names() {
                let e = builtin(name)?;
                writeln!(out, "{:<24} dim {}  {:<26} {}", name, e.dim(), e.spec.domain.to_string(), e.notes)?;
            }
        }
        CatalogCommand::Show { name } => {
            let e = builtin(name)?;
            write!(out, "{}", catalog::source(name)?)?;
            writeln!(out, "# expected values")?;
            for x in &e.expected {
                writeln!(out, "#   {:<10} = {:<8} tol {:.0e} [{}]", x.label, x.value, x.tolerance, x.provenance.as_str())?;
            }
        }
    }
    Ok(EXIT_OK)
}
