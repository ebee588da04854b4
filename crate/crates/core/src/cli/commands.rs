//! Running a [`RunManifest`]: each command renders its full output as text so
//! that replays can be compared byte for byte.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::KernelWorkspace;
use crate::sharp::{evaluate, BoundKind, BoundQuery, ConstantFactors, Direction, Exponent};
use crate::solver::evaluate_batch;
use crate::verify::report::VerificationReport;
use crate::verify::suite::{run_suite, SuiteConfig};

use super::manifest::{Command, DirectionArg, RunManifest, CSV_MANIFEST_PREFIX};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFICATION_FAILED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_EXPONENT: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

/// Exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::ExponentTooSmall { .. } | Error::DivergentIntegral { .. } => EXIT_EXPONENT,
        Error::QuadratureFailure { .. } => EXIT_NUMERICAL,
        _ => EXIT_INPUT,
    }
}

/// Output text, diagnostics and exit code of one command.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Outcome {
            code: EXIT_OK,
            stdout,
            stderr: String::new(),
        }
    }

    pub fn from_error(e: &Error) -> Self {
        Outcome {
            code: exit_code(e),
            stdout: String::new(),
            stderr: format!("error: {e}\n"),
        }
    }
}

/// Shortest text that parses back to the same `f64` in CSV cells: 17
/// significant digits.
pub fn csv_number(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_exponent(p: Exponent) -> String {
    if p.is_infinite() {
        "inf".into()
    } else {
        csv_number(p.value())
    }
}

pub fn execute(m: &RunManifest) -> Outcome {
    let result = match &m.command {
        Command::Constant { kind, p, t, direction } => constant(m, *kind, *p, *t, direction),
        Command::Solve { kind, data, points } => solve(m, *kind, data, points),
        Command::Verify { check, perturb, jobs } => return verify(m, check.clone(), *perturb, *jobs),
        Command::Sweep {
            kind,
            ps,
            ts,
            direction,
            jobs,
        } => return sweep(m, *kind, ps, ts, direction.as_deref(), *jobs),
    };
    match result {
        Ok(text) => Outcome::ok(text),
        Err(e) => Outcome::from_error(&e),
    }
}

#[derive(Serialize)]
struct ConstantRecord<'a> {
    manifest: &'a RunManifest,
    value: f64,
    factors: ConstantFactors,
    #[serde(skip_serializing_if = "Option::is_none")]
    maximizing_direction: Option<Vec<f64>>,
}

fn constant(m: &RunManifest, kind: BoundKind, p: Exponent, t: f64, direction: &DirectionArg) -> Result<String> {
    let w = m.workspace()?;
    let direction = match direction {
        DirectionArg::Unit(l) => Direction::Unit(l.clone()),
        DirectionArg::Max => Direction::MaxOverDirections,
    };
    let c = evaluate(&w, &BoundQuery { p, direction, t, kind })?;
    let record = ConstantRecord {
        manifest: m,
        value: c.value,
        factors: c.factors,
        maximizing_direction: c.maximizing_direction,
    };
    Ok(format!("{}\n", serde_json::to_string(&record).expect("record serializes")))
}

fn solve(m: &RunManifest, kind: BoundKind, data: &super::manifest::DataSpec, points: &[(Vec<f64>, f64)]) -> Result<String> {
    let w = m.workspace()?;
    let n = w.dim();
    if points.is_empty() {
        return Err(Error::InvalidSpec("no evaluation points given".into()));
    }
    for (x, _) in points {
        if x.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: x.len() });
        }
    }
    let f = data.build(&w, kind, &m.quadrature)?;
    let solutions = evaluate_batch(&w, &f, kind, points, &m.quadrature);
    let mut out = format!("{CSV_MANIFEST_PREFIX}{}\n", m.to_json());
    let mut header: Vec<String> = (1..=n).map(|i| format!("x_{i}")).collect();
    header.push("t".into());
    header.push("u".into());
    header.extend((1..=n).map(|i| format!("du_dx{i}")));
    out.push_str(&header.join(","));
    out.push('\n');
    for ((x, t), s) in points.iter().zip(solutions) {
        let s = s?;
        let row: Vec<String> = x
            .iter()
            .chain([t, &s.u])
            .chain(&s.grad)
            .map(|v| csv_number(*v))
            .collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    Ok(out)
}

#[derive(Serialize)]
struct ManifestLine<'a> {
    manifest: &'a RunManifest,
}

#[derive(Serialize)]
struct ErrorLine<'a> {
    check: &'a str,
    error: String,
}

#[derive(Serialize)]
struct Summary {
    passed: usize,
    failed: usize,
    errors: usize,
}

#[derive(Serialize)]
struct SummaryLine {
    summary: Summary,
}

fn verify(m: &RunManifest, check: Option<String>, perturb: f64, jobs: usize) -> Outcome {
    let cfg = SuiteConfig {
        seed: m.seed,
        perturb,
        quadrature: m.quadrature,
        filter: check,
        jobs,
    };
    let outcome = match run_suite(&cfg) {
        Ok(o) => o,
        Err(e) => return Outcome::from_error(&e),
    };
    if outcome.reports.is_empty() && outcome.errors.is_empty() {
        return Outcome {
            code: EXIT_INPUT,
            stdout: String::new(),
            stderr: format!("error: no check matches {:?}\n", cfg.filter.unwrap_or_default()),
        };
    }
    let mut out = serde_json::to_string(&ManifestLine { manifest: m }).expect("manifest serializes");
    out.push('\n');
    out.push_str(&reports_jsonl(&outcome.reports));
    for (name, e) in &outcome.errors {
        let line = ErrorLine {
            check: name,
            error: e.to_string(),
        };
        out.push_str(&serde_json::to_string(&line).expect("error line serializes"));
        out.push('\n');
    }
    let summary = Summary {
        passed: outcome.passed(),
        failed: outcome.failed(),
        errors: outcome.errors.len(),
    };
    let stderr = format!(
        "{} passed, {} failed, {} errors\n",
        summary.passed, summary.failed, summary.errors
    );
    let code = if !outcome.errors.is_empty() {
        outcome.errors.iter().map(|(_, e)| exit_code(e)).max().unwrap_or(EXIT_NUMERICAL)
    } else if summary.failed > 0 {
        EXIT_VERIFICATION_FAILED
    } else {
        EXIT_OK
    };
    out.push_str(&serde_json::to_string(&SummaryLine { summary }).expect("summary serializes"));
    out.push('\n');
    Outcome { code, stdout: out, stderr }
}

fn reports_jsonl(reports: &[VerificationReport]) -> String {
    let mut s = String::new();
    for r in reports {
        s.push_str(&r.to_json_line());
        s.push('\n');
    }
    s
}

fn sweep_cell(w: &KernelWorkspace, kind: BoundKind, p: Exponent, t: f64, dir: Option<&[f64]>) -> Result<(Option<f64>, f64)> {
    let d = match dir {
        Some(l) => Some(evaluate(w, &BoundQuery { p, direction: Direction::Unit(l.to_vec()), t, kind })?.value),
        None => None,
    };
    let mx = evaluate(w, &BoundQuery { p, direction: Direction::MaxOverDirections, t, kind })?.value;
    Ok((d, mx))
}

fn sweep(m: &RunManifest, kind: BoundKind, ps: &[Exponent], ts: &[f64], dir: Option<&[f64]>, jobs: usize) -> Outcome {
    use rayon::prelude::*;
    let w = match m.workspace() {
        Ok(w) => w,
        Err(e) => return Outcome::from_error(&e),
    };
    if ps.is_empty() || ts.is_empty() {
        return Outcome::from_error(&Error::InvalidSpec("sweep needs at least one p and one t".into()));
    }
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
        Ok(p) => p,
        Err(e) => return Outcome::from_error(&Error::InvalidSpec(format!("cannot start worker pool: {e}"))),
    };
    let cells: Vec<(Exponent, f64)> = ps.iter().flat_map(|&p| ts.iter().map(move |&t| (p, t))).collect();
    let results: Vec<Result<(Option<f64>, f64)>> =
        pool.install(|| cells.par_iter().map(|&(p, t)| sweep_cell(&w, kind, p, t, dir)).collect());

    let letter = match kind {
        BoundKind::Homogeneous => "K",
        BoundKind::Nonhomogeneous => "C",
    };
    let mut out = format!("{CSV_MANIFEST_PREFIX}{}\n", m.to_json());
    let mut header = vec!["p".to_string(), "t".to_string()];
    if dir.is_some() {
        header.push(format!("{letter}_dir"));
    }
    header.push(format!("{letter}_max"));
    header.push("decreasing_in_t".into());
    out.push_str(&header.join(","));
    out.push('\n');

    let mut stderr = String::new();
    let mut first_error = None;
    let mut any_ok = false;
    let diagnose = w.spec().reaction() <= 0.0;
    let mut previous: Option<(Exponent, f64, f64)> = None;
    for ((p, t), r) in cells.iter().zip(results) {
        let (d, mx) = match r {
            Ok(v) => {
                any_ok = true;
                v
            }
            Err(e) => {
                let _ = writeln!(stderr, "warning: cell p = {p}, t = {t}: {e}");
                first_error.get_or_insert(e);
                (dir.map(|_| f64::NAN), f64::NAN)
            }
        };
        let trend = match previous {
            Some((pp, pt, pv)) if diagnose && pp == *p && pt < *t && pv.is_finite() && mx.is_finite() => {
                if mx <= pv {
                    "true"
                } else {
                    "false"
                }
            }
            _ => "",
        };
        previous = Some((*p, *t, mx));
        let mut row = vec![csv_exponent(*p), csv_number(*t)];
        if let Some(d) = d {
            row.push(csv_number(d));
        }
        row.push(csv_number(mx));
        row.push(trend.into());
        out.push_str(&row.join(","));
        out.push('\n');
    }
    let code = match (&first_error, any_ok) {
        (Some(e), false) => exit_code(e),
        _ => EXIT_OK,
    };
    Outcome { code, stdout: out, stderr }
}
