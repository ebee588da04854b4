use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::solver::QuadratureConfig;

/// Guard against division by zero in relative errors.
pub const TINY: f64 = 1e-300;

/// How `closed_form` and `oracle` are compared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckMode {
    /// `rel_err = |closed_form - oracle| / |closed_form|`.
    Equality,
    /// `oracle` is a measured quantity bounded by `closed_form`;
    /// `rel_err` is the relative excess `max(0, (oracle - closed_form) / closed_form)`.
    UpperBound,
}

/// Tolerances and settings a report was produced with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportConfig {
    pub tolerance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio_threshold: Option<f64>,
    pub quadrature: QuadratureConfig,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub check: String,
    pub mode: CheckMode,
    pub closed_form: f64,
    pub oracle: f64,
    pub rel_err: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio: Option<f64>,
    pub passed: bool,
    pub config: ReportConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub details: Option<String>,
}

impl VerificationReport {
    pub fn equality(check: impl Into<String>, closed_form: f64, oracle: f64, config: ReportConfig) -> Self {
        let rel_err = (closed_form - oracle).abs() / closed_form.abs().max(TINY);
        Self::build(check.into(), CheckMode::Equality, closed_form, oracle, rel_err, config)
    }

    pub fn upper_bound(check: impl Into<String>, bound: f64, measured: f64, config: ReportConfig) -> Self {
        let rel_err = ((measured - bound) / bound.abs().max(TINY)).max(0.0);
        Self::build(check.into(), CheckMode::UpperBound, bound, measured, rel_err, config)
    }

    fn build(check: String, mode: CheckMode, closed_form: f64, oracle: f64, rel_err: f64, config: ReportConfig) -> Self {
        let passed = rel_err <= config.tolerance;
        VerificationReport {
            check,
            mode,
            closed_form,
            oracle,
            rel_err,
            ratio: None,
            passed,
            config,
            details: None,
        }
    }

    /// Records an attainment ratio; the check additionally requires `ratio >= threshold`.
    pub fn with_ratio(mut self, ratio: f64, threshold: f64) -> Self {
        self.ratio = Some(ratio);
        self.config.ratio_threshold = Some(threshold);
        self.passed = self.passed && ratio >= threshold;
        self
    }

    pub fn with_details(mut self, details: impl Into<String>) -> Self {
        self.details = Some(details.into());
        self
    }

    /// Ands an extra condition into `passed`.
    pub fn require(mut self, ok: bool, why: &str) -> Self {
        if !ok {
            self.passed = false;
            let d = self.details.take().unwrap_or_default();
            self.details = Some(if d.is_empty() { why.to_string() } else { format!("{d}; {why}") });
        }
        self
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

/// Writes one JSON object per line.
pub fn write_jsonl<W: Write>(mut w: W, reports: &[VerificationReport]) -> Result<()> {
    for r in reports {
        writeln!(w, "{}", r.to_json_line())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(tol: f64) -> ReportConfig {
        ReportConfig {
            tolerance: tol,
            ratio_threshold: None,
            quadrature: QuadratureConfig::default(),
            seed: 7,
        }
    }

    #[test]
    fn pass_iff_within_tolerance() {
        let r = VerificationReport::equality("a", 2.0, 2.0 + 1e-7, cfg(1e-6));
        assert!(r.passed && (r.rel_err - 5e-8).abs() < 1e-15);
        let r = VerificationReport::equality("a", 2.0, 2.1, cfg(1e-6));
        assert!(!r.passed);
        let r = VerificationReport::upper_bound("b", 1.0, 0.5, cfg(1e-6));
        assert!(r.passed && r.rel_err == 0.0);
        let r = VerificationReport::upper_bound("b", 1.0, 1.01, cfg(1e-6));
        assert!(!r.passed);
        let r = VerificationReport::equality("c", 1.0, 0.9995, cfg(1e-3)).with_ratio(0.9995, 0.999);
        assert!(r.passed);
        let r = r.require(false, "sequence not monotone");
        assert!(!r.passed && r.details.as_deref() == Some("sequence not monotone"));
    }

    #[test]
    fn json_line_shape() {
        let r = VerificationReport::equality("x", 1.0, 1.0, cfg(1e-6));
        let v: serde_json::Value = serde_json::from_str(&r.to_json_line()).unwrap();
        for key in ["check", "closed_form", "oracle", "rel_err", "passed", "config"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        let back: VerificationReport = serde_json::from_str(&r.to_json_line()).unwrap();
        assert_eq!(back, r);
    }
}
