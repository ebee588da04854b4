//! Everything needed to rerun a command: the problem, the command with its
//! arguments, quadrature settings and seed. Every output embeds one.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{KernelWorkspace, ProblemSpec, ProblemSpecFile};
use crate::sharp::{BoundKind, Exponent};
use crate::solver::{Grid, QuadratureConfig, SourceFunction};
use crate::verify::extremal::{build_extremal_hom, build_extremal_nonhom, ExtremalSpec};

/// Prefix of the manifest comment line in CSV outputs.
pub const CSV_MANIFEST_PREFIX: &str = "# manifest: ";

pub const QUAD_ORDER_ENV: &str = "PARABOUND_QUAD_ORDER";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: String,
    pub problem: ProblemSpecFile,
    pub command: Command,
    pub quadrature: QuadratureConfig,
    pub seed: u64,
    /// Value of the quadrature-order environment override, when it was set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quad_order_override: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

/// `Unit` directions are given explicitly; `Max` maximizes over the sphere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DirectionArg {
    Unit(Vec<f64>),
    Max,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Command {
    Constant {
        kind: BoundKind,
        p: Exponent,
        t: f64,
        direction: DirectionArg,
    },
    Solve {
        kind: BoundKind,
        data: DataSpec,
        points: Vec<(Vec<f64>, f64)>,
    },
    Verify {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        check: Option<String>,
        #[serde(default)]
        perturb: f64,
        #[serde(default)]
        jobs: usize,
    },
    Sweep {
        kind: BoundKind,
        ps: Vec<Exponent>,
        ts: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        direction: Option<Vec<f64>>,
        #[serde(default)]
        jobs: usize,
    },
}

impl Command {
    pub fn label(&self) -> &'static str {
        match self {
            Command::Constant { .. } => "constant",
            Command::Solve { .. } => "solve",
            Command::Verify { .. } => "verify",
            Command::Sweep { .. } => "sweep",
        }
    }
}

/// Initial data or source for `solve`, as given on the command line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum DataSpec {
    Constant {
        value: f64,
    },
    Gaussian {
        center: Vec<f64>,
        width: f64,
        #[serde(default = "one")]
        amp: f64,
    },
    Box {
        lo: Vec<f64>,
        hi: Vec<f64>,
        #[serde(default = "one")]
        amp: f64,
    },
    PolynomialGaussian {
        center: Vec<f64>,
        width: f64,
        direction: Vec<f64>,
        #[serde(default = "one")]
        amp: f64,
    },
    Grid {
        path: PathBuf,
    },
    Extremal(ExtremalSpec),
}

fn one() -> f64 {
    1.0
}

impl DataSpec {
    /// Inline JSON, or a path to a JSON file.
    pub fn parse(arg: &str) -> Result<Self> {
        let text = if arg.trim_start().starts_with('{') {
            arg.to_string()
        } else {
            std::fs::read_to_string(arg).map_err(|e| Error::Io(format!("{arg}: {e}")))?
        };
        serde_json::from_str(&text).map_err(|e| Error::InvalidSpec(format!("data JSON: {e}")))
    }

    pub fn build(&self, w: &KernelWorkspace, kind: BoundKind, q: &QuadratureConfig) -> Result<SourceFunction> {
        let n = w.dim();
        match self {
            DataSpec::Constant { value } => SourceFunction::constant(n, *value),
            DataSpec::Gaussian { center, width, amp } => SourceFunction::gaussian(center.clone(), *width, *amp),
            DataSpec::Box { lo, hi, amp } => SourceFunction::box_indicator(lo.clone(), hi.clone(), *amp),
            DataSpec::PolynomialGaussian {
                center,
                width,
                direction,
                amp,
            } => SourceFunction::polynomial_gaussian(center.clone(), *width, direction.clone(), *amp),
            DataSpec::Grid { path } => Ok(SourceFunction::grid(Grid::load(path)?)),
            DataSpec::Extremal(spec) => match kind {
                BoundKind::Homogeneous => build_extremal_hom(spec, w, q),
                BoundKind::Nonhomogeneous => build_extremal_nonhom(spec, w, q),
            },
        }
    }
}

impl RunManifest {
    pub fn new(problem: &ProblemSpec, command: Command, quadrature: QuadratureConfig, seed: u64) -> Self {
        RunManifest {
            version: format!("parabound {}", env!("CARGO_PKG_VERSION")),
            problem: problem.to_file(),
            command,
            quadrature,
            seed,
            quad_order_override: None,
            out: None,
        }
    }

    pub fn workspace(&self) -> Result<KernelWorkspace> {
        KernelWorkspace::new(ProblemSpec::from_file(&self.problem)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("manifest serializes")
    }

    /// Finds the manifest embedded in any output of this program.
    pub fn extract(output: &str) -> Result<Self> {
        let first = output.lines().next().unwrap_or("");
        if let Some(rest) = first.strip_prefix(CSV_MANIFEST_PREFIX) {
            return serde_json::from_str(rest).map_err(|e| Error::InvalidSpec(format!("embedded manifest: {e}")));
        }
        #[derive(Deserialize)]
        struct Carrier {
            manifest: RunManifest,
        }
        let carrier: Carrier = serde_json::from_str(first)
            .map_err(|e| Error::InvalidSpec(format!("no manifest found in the first line: {e}")))?;
        Ok(carrier.manifest)
    }
}

/// `hermite_order` from the environment override, if set.
pub fn quad_order_from_env(value: Option<&str>) -> Result<Option<usize>> {
    match value {
        None => Ok(None),
        Some(v) => v
            .trim()
            .parse::<usize>()
            .map(Some)
            .map_err(|_| Error::InvalidSpec(format!("{QUAD_ORDER_ENV} must be a positive integer, got {v:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_round_trip() {
        let spec = ProblemSpec::heat(1, 10.0).unwrap();
        let cmd = Command::Solve {
            kind: BoundKind::Nonhomogeneous,
            data: DataSpec::Extremal(ExtremalSpec::new(vec![0.0], 1.0, Exponent::INFINITY, vec![1.0], 0.1)),
            points: vec![(vec![0.5], 0.3)],
        };
        let m = RunManifest::new(&spec, cmd, QuadratureConfig::default(), 9);
        let back: RunManifest = serde_json::from_str(&m.to_json()).unwrap();
        assert_eq!(back, m);
        assert!(m.to_json().contains("\"p\":\"inf\""));
        let csv = format!("{CSV_MANIFEST_PREFIX}{}\nx_1,t\n", m.to_json());
        assert_eq!(RunManifest::extract(&csv).unwrap(), m);
        let json = format!("{{\"manifest\":{},\"value\":1}}\n", m.to_json());
        assert_eq!(RunManifest::extract(&json).unwrap(), m);
        assert!(RunManifest::extract("x,y\n1,2\n").is_err());
    }

    #[test]
    fn data_spec_json() {
        let d = DataSpec::parse(r#"{"type":"gaussian","center":[0.0],"width":0.5}"#).unwrap();
        assert_eq!(
            d,
            DataSpec::Gaussian {
                center: vec![0.0],
                width: 0.5,
                amp: 1.0
            }
        );
        assert!(DataSpec::parse(r#"{"type":"nope"}"#).is_err());
        assert_eq!(quad_order_from_env(Some("32")).unwrap(), Some(32));
        assert!(quad_order_from_env(Some("x")).is_err());
    }
}
