//! Data attaining equality in the Holder step of the gradient bounds.
//!
//! With `k(y) = (grad G(x0 - y, t0), l)`, the choice
//! `phi = -sign(k) |k|^{p'-1} / (int |k|^{p'})^{1/p}` has unit `L^p` norm and
//! `(grad u(x0, t0), l) = -(int |k|^{p'})^{1/p'}`. The source version uses
//! `k(y, tau) = (grad G(x0 - y, t0 - tau), l)` on `(0, t0)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::KernelWorkspace;
use crate::sharp::{c_dir, k_dir, Exponent, UNIT_TOL};
use crate::solver::{evaluate_hom, evaluate_nonhom, ExtremalProfile, QuadratureConfig, SourceFunction, SourceKind};

use super::oracles::{kernel_grad_power_integral, spacetime_grad_power_integral};

/// Target point, exponent, direction and mollification of an extremal family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtremalSpec {
    pub x0: Vec<f64>,
    pub t0: f64,
    pub p: Exponent,
    pub direction: Vec<f64>,
    /// `0` selects the exact extremal.
    #[serde(default)]
    pub eps: f64,
}

impl ExtremalSpec {
    pub fn new(x0: Vec<f64>, t0: f64, p: Exponent, direction: Vec<f64>, eps: f64) -> Self {
        ExtremalSpec {
            x0,
            t0,
            p,
            direction,
            eps,
        }
    }

    fn validate(&self, w: &KernelWorkspace) -> Result<()> {
        let n = w.dim();
        if self.x0.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: self.x0.len() });
        }
        if self.direction.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: self.direction.len(),
            });
        }
        let len = crate::mathcore::spd::norm(&self.direction);
        if (len - 1.0).abs() > UNIT_TOL {
            return Err(Error::InvalidDirection(len));
        }
        if !(self.t0 > 0.0) {
            return Err(Error::NonpositiveTime(self.t0));
        }
        let horizon = w.spec().horizon();
        if self.t0 > horizon {
            return Err(Error::TimeBeyondHorizon { t: self.t0, horizon });
        }
        if !(self.eps >= 0.0) || !self.eps.is_finite() {
            return Err(Error::DomainError(format!("mollification must be >= 0, got {}", self.eps)));
        }
        if !self.p.is_infinite() && self.eps != 0.0 {
            return Err(Error::DomainError("mollification applies to p = inf only".into()));
        }
        Ok(())
    }
}

/// Extremal initial data for `K_{p,l}(t0)` at `x0`.
///
/// Finite `p` in `(1, inf)` with `eps = 0`, or `p = inf` with `eps >= 0`.
pub fn build_extremal_hom(spec: &ExtremalSpec, w: &KernelWorkspace, q: &QuadratureConfig) -> Result<SourceFunction> {
    spec.validate(w)?;
    if spec.p.value() == 1.0 {
        return Err(Error::UnsupportedData("the p = 1 bound is attained only in the limit of point masses".into()));
    }
    let normalizer = if spec.p.is_infinite() {
        1.0
    } else {
        let pc = spec.p.conjugate();
        kernel_grad_power_integral(w, pc, &spec.direction, spec.t0, q)?.powf(1.0 / spec.p.value())
    };
    let profile = ExtremalProfile::new(
        w.clone(),
        spec.x0.clone(),
        spec.t0,
        spec.p,
        spec.direction.clone(),
        spec.eps,
        normalizer,
    );
    Ok(SourceFunction::from_kind(w.dim(), SourceKind::ExtremalHom(profile)))
}

/// Extremal source for `C_{p,l}(t0)` at `x0`.
///
/// Finite `p > n + 2` with `eps = 0`, or `p = inf` with `eps > 0`.
pub fn build_extremal_nonhom(spec: &ExtremalSpec, w: &KernelWorkspace, q: &QuadratureConfig) -> Result<SourceFunction> {
    spec.validate(w)?;
    let n = w.dim();
    if !spec.p.is_infinite() && spec.p.value() <= n as f64 + 2.0 {
        return Err(Error::ExponentTooSmall { p: spec.p.value(), n });
    }
    if spec.p.is_infinite() && spec.eps == 0.0 {
        return Err(Error::DomainError(
            "the p = inf source must be mollified (eps > 0) to be Holder continuous".into(),
        ));
    }
    let normalizer = if spec.p.is_infinite() {
        1.0
    } else {
        let pc = spec.p.conjugate();
        spacetime_grad_power_integral(w, pc, &spec.direction, spec.t0, q)?.powf(1.0 / spec.p.value())
    };
    let profile = ExtremalProfile::new(
        w.clone(),
        spec.x0.clone(),
        spec.t0,
        spec.p,
        spec.direction.clone(),
        spec.eps,
        normalizer,
    );
    Ok(SourceFunction::from_kind(n, SourceKind::ExtremalNonhom(profile)))
}

/// `|(grad u(x0, t0), l)| / (K_{p,l}(t0) ||phi||_p)` for the extremal data of `spec`.
pub fn attainment_ratio_hom(spec: &ExtremalSpec, w: &KernelWorkspace, q: &QuadratureConfig) -> Result<f64> {
    let phi = build_extremal_hom(spec, w, q)?;
    ratio_hom(&phi, spec, w, q)
}

/// The same ratio for arbitrary initial data.
pub fn ratio_hom(phi: &SourceFunction, spec: &ExtremalSpec, w: &KernelWorkspace, q: &QuadratureConfig) -> Result<f64> {
    let sol = evaluate_hom(w, phi, &spec.x0, spec.t0, q)?;
    let bound = k_dir(w, spec.p, &spec.direction, spec.t0)?.value * phi.lp_norm(spec.p)?.value;
    Ok(sol.directional(&spec.direction).abs() / bound)
}

/// `|(grad u(x0, t0), l)| / (C_{p,l}(t0) ||f||_{p,t0})` for the extremal source of `spec`.
pub fn attainment_ratio_nonhom(spec: &ExtremalSpec, w: &KernelWorkspace, q: &QuadratureConfig) -> Result<f64> {
    let f = build_extremal_nonhom(spec, w, q)?;
    ratio_nonhom(&f, spec, w, q)
}

pub fn ratio_nonhom(f: &SourceFunction, spec: &ExtremalSpec, w: &KernelWorkspace, q: &QuadratureConfig) -> Result<f64> {
    let sol = evaluate_nonhom(w, f, &spec.x0, spec.t0, q)?;
    let bound = c_dir(w, spec.p, &spec.direction, spec.t0)?.value * f.lp_norm_spacetime(spec.p, spec.t0)?.value;
    Ok(sol.directional(&spec.direction).abs() / bound)
}
