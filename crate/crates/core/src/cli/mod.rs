//! Command-line front end: `constant`, `solve`, `verify`, `sweep` and
//! `replay`.
//!
//! Exit codes: 0 ok, 1 verification failure, 2 input error, 3 inadmissible
//! exponent, 4 numerical failure.

pub mod commands;
pub mod manifest;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::kernel::ProblemSpec;
use crate::sharp::{BoundKind, Exponent};
use crate::solver::QuadratureConfig;
use crate::verify::suite::DEFAULT_SEED;

pub use commands::{execute, exit_code, Outcome, EXIT_EXPONENT, EXIT_INPUT, EXIT_NUMERICAL, EXIT_OK, EXIT_VERIFICATION_FAILED};
pub use manifest::{Command, DataSpec, DirectionArg, RunManifest, QUAD_ORDER_ENV};

#[derive(Debug, Parser)]
#[command(name = "parabound", version, about = "Sharp gradient bounds for constant-coefficient parabolic Cauchy problems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Sub,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Problem JSON: {"n", "A", "b", "c", "T"}.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Write the output here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
}

#[derive(Debug, Subcommand)]
pub enum Sub {
    /// Sharp constant for one (p, t, direction).
    #[command(allow_negative_numbers = true)]
    Constant {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "hom")]
        kind: BoundKind,
        #[arg(long)]
        p: Exponent,
        #[arg(long)]
        t: f64,
        /// Unit direction as comma-separated floats.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, conflicts_with = "max", required_unless_present = "max")]
        dir: Option<Vec<f64>>,
        /// Maximize over all directions.
        #[arg(long)]
        max: bool,
    },
    /// Evaluate u and grad u at a list of points.
    #[command(allow_negative_numbers = true)]
    Solve {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "hom")]
        kind: BoundKind,
        /// Data as inline JSON or a path to a JSON file.
        #[arg(long)]
        data: String,
        /// Spatial point as comma-separated floats; repeatable.
        #[arg(long = "x", allow_hyphen_values = true)]
        xs: Vec<String>,
        /// Times, comma-separated; every x is paired with every t.
        #[arg(long, value_delimiter = ',')]
        t: Vec<f64>,
        /// CSV file with rows x_1,...,x_n,t.
        #[arg(long)]
        points: Option<PathBuf>,
    },
    /// Run the verification suite and emit JSONL reports.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Glob over check names, e.g. 'b_invariance*'.
        #[arg(long)]
        check: Option<String>,
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        /// Relative error injected into the closed forms (testing only).
        #[arg(long, default_value_t = 0.0, hide = true)]
        perturb: f64,
    },
    /// Tabulate constants over a (p, t) grid.
    #[command(allow_negative_numbers = true)]
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "hom")]
        kind: BoundKind,
        #[arg(long, value_delimiter = ',', required = true)]
        p: Vec<Exponent>,
        #[arg(long, value_delimiter = ',', required = true)]
        t: Vec<f64>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        dir: Option<Vec<f64>>,
        #[arg(long, default_value_t = 0)]
        jobs: usize,
    },
    /// Rerun the manifest embedded in an earlier output.
    Replay {
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load_spec(path: Option<&Path>, required: bool) -> Result<ProblemSpec> {
    match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?;
            ProblemSpec::from_json(&text)
        }
        None if required => Err(Error::InvalidSpec("--spec is required".into())),
        None => ProblemSpec::heat(1, crate::verify::suite::RANDOM_HORIZON),
    }
}

fn parse_floats(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|_| Error::InvalidSpec(format!("not a number: {v:?}"))))
        .collect()
}

fn read_points(path: &Path) -> Result<Vec<(Vec<f64>, f64)>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let mut out = Vec::new();
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
        let mut v = parse_floats(line)?;
        let t = v.pop().ok_or_else(|| Error::InvalidSpec("empty point row".into()))?;
        out.push((v, t));
    }
    Ok(out)
}

/// Builds the manifest for a parsed command line; `None` for `replay`.
pub fn manifest_from_args(sub: &Sub, quad_env: Option<&str>) -> Result<Option<RunManifest>> {
    let mut quadrature = QuadratureConfig::default();
    let quad_override = manifest::quad_order_from_env(quad_env)?;
    if let Some(order) = quad_override {
        quadrature.hermite_order = order;
    }
    quadrature.validate()?;
    let (common, command, spec_required) = match sub {
        Sub::Constant {
            common,
            kind,
            p,
            t,
            dir,
            max,
        } => {
            let direction = if *max {
                DirectionArg::Max
            } else {
                DirectionArg::Unit(dir.clone().unwrap_or_default())
            };
            (common, Command::Constant { kind: *kind, p: *p, t: *t, direction }, true)
        }
        Sub::Solve {
            common,
            kind,
            data,
            xs,
            t,
            points,
        } => {
            let mut pts = Vec::new();
            for x in xs {
                let x = parse_floats(x)?;
                pts.extend(t.iter().map(|&t| (x.clone(), t)));
            }
            if let Some(path) = points {
                pts.extend(read_points(path)?);
            }
            let command = Command::Solve {
                kind: *kind,
                data: DataSpec::parse(data)?,
                points: pts,
            };
            (common, command, true)
        }
        Sub::Verify {
            common,
            check,
            jobs,
            perturb,
        } => (
            common,
            Command::Verify {
                check: check.clone(),
                perturb: *perturb,
                jobs: *jobs,
            },
            false,
        ),
        Sub::Sweep {
            common,
            kind,
            p,
            t,
            dir,
            jobs,
        } => (
            common,
            Command::Sweep {
                kind: *kind,
                ps: p.clone(),
                ts: t.clone(),
                direction: dir.clone(),
                jobs: *jobs,
            },
            true,
        ),
        Sub::Replay { .. } => return Ok(None),
    };
    let spec = load_spec(common.spec.as_deref(), spec_required)?;
    let mut m = RunManifest::new(&spec, command, quadrature, common.seed);
    m.quad_order_override = quad_override;
    m.out = common.out.clone();
    Ok(Some(m))
}

fn emit(outcome: &Outcome, out: Option<&Path>) -> i32 {
    eprint!("{}", outcome.stderr);
    match out {
        Some(path) if !outcome.stdout.is_empty() => {
            if let Err(e) = std::fs::write(path, &outcome.stdout) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return EXIT_INPUT;
            }
        }
        _ => {
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(outcome.stdout.as_bytes()).and_then(|_| stdout.flush()).is_err() {
                return EXIT_INPUT;
            }
        }
    }
    outcome.code
}

/// Runs the manifest embedded in `input`. The recorded quadrature settings
/// are used as they are; the environment override is not consulted again.
pub fn replay(input: &Path) -> Result<Outcome> {
    let text = std::fs::read_to_string(input).map_err(|e| Error::Io(format!("{}: {e}", input.display())))?;
    let m = RunManifest::extract(&text)?;
    Ok(execute(&m))
}

/// Entry point of the binary; returns the process exit code.
pub fn main() -> i32 {
    let cli = Cli::parse();
    let quad_env = std::env::var(QUAD_ORDER_ENV).ok();
    if let Sub::Replay { input, out } = &cli.command {
        return match replay(input) {
            Ok(o) => emit(&o, out.as_deref()),
            Err(e) => emit(&Outcome::from_error(&e), None),
        };
    }
    match manifest_from_args(&cli.command, quad_env.as_deref()) {
        Ok(Some(m)) => {
            let outcome = execute(&m);
            emit(&outcome, m.out.as_deref())
        }
        Ok(None) => unreachable!("replay handled above"),
        Err(e) => emit(&Outcome::from_error(&e), None),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Sub {
        Cli::try_parse_from(std::iter::once("parabound").chain(args.iter().copied()))
            .unwrap()
            .command
    }

    #[test]
    fn parses_exponents_and_directions() {
        let sub = parse(&["constant", "--p", "inf", "--t", "1", "--dir", "-0.6,0.8"]);
        let Sub::Constant { p, dir, .. } = &sub else { panic!() };
        assert!(p.is_infinite());
        assert_eq!(dir.as_deref(), Some(&[-0.6, 0.8][..]));
        let sub = parse(&["sweep", "--spec", "s.json", "--p", "2,4,inf", "--t", "0.25,1"]);
        let Sub::Sweep { p, t, .. } = &sub else { panic!() };
        assert_eq!(p.len(), 3);
        assert_eq!(t, &vec![0.25, 1.0]);
        assert!(Cli::try_parse_from(["parabound", "constant", "--p", "2", "--t", "1"]).is_err());
    }

    #[test]
    fn env_override_lands_in_manifest() {
        let sub = parse(&["verify", "--check", "mass*"]);
        let m = manifest_from_args(&sub, Some("24")).unwrap().unwrap();
        assert_eq!(m.quadrature.hermite_order, 24);
        assert_eq!(m.quad_order_override, Some(24));
        assert!(manifest_from_args(&sub, Some("4")).is_err());
    }

    #[test]
    fn exit_codes_follow_error_kinds() {
        assert_eq!(exit_code(&Error::ExponentTooSmall { p: 3.0, n: 1 }), EXIT_EXPONENT);
        assert_eq!(exit_code(&Error::QuadratureFailure { estimate: 1.0, target: 0.1 }), EXIT_NUMERICAL);
        assert_eq!(exit_code(&Error::GridFormat("magic".into())), EXIT_INPUT);
    }
}
