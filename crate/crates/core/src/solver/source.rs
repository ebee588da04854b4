//! Initial data `phi(y)` and sources `f(y, tau)`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::kernel::KernelWorkspace;
use crate::mathcore::ln_gamma;
use crate::mathcore::spd::{dot, norm};
use crate::sharp::Exponent;

use super::grid::Grid;

/// The extremal profile built from `k(y, sigma) = (grad G(x0 - y, sigma), l)`:
///
/// * finite `p`: `-sign(k) |k|^{p'-1} / normalizer`
/// * `p = inf`, `eps = 0`: `-sign(k)`
/// * `p = inf`, `eps > 0`: `-tanh(k / (eps * kappa))`, with `kappa = sup_y |k(y, t0)|`.
///
/// For initial data `sigma = t0`. For a source `sigma = t0 - tau` and the
/// profile vanishes for `tau >= t0`.
#[derive(Debug, Clone)]
pub struct ExtremalProfile {
    pub(crate) workspace: KernelWorkspace,
    pub(crate) x0: Vec<f64>,
    pub(crate) t0: f64,
    pub(crate) p: Exponent,
    pub(crate) direction: Vec<f64>,
    pub(crate) eps: f64,
    pub(crate) normalizer: f64,
    pub(crate) kappa: f64,
    /// `A^{-1} l`, the normal of the sign-change hyperplane.
    pub(crate) normal: Vec<f64>,
}

impl ExtremalProfile {
    pub(crate) fn new(
        workspace: KernelWorkspace,
        x0: Vec<f64>,
        t0: f64,
        p: Exponent,
        direction: Vec<f64>,
        eps: f64,
        normalizer: f64,
    ) -> Self {
        let normal = workspace.inverse().mul_vec(&direction);
        let kappa = directional_peak(&workspace, &direction, t0);
        ExtremalProfile {
            workspace,
            x0,
            t0,
            p,
            direction,
            eps,
            normalizer,
            kappa,
            normal,
        }
    }

    pub fn target(&self) -> (&[f64], f64) {
        (&self.x0, self.t0)
    }

    pub fn exponent(&self) -> Exponent {
        self.p
    }

    pub fn direction(&self) -> &[f64] {
        &self.direction
    }

    pub fn mollification(&self) -> f64 {
        self.eps
    }

    pub fn normalizer(&self) -> f64 {
        self.normalizer
    }

    /// `sup_y |k(y, t0)|`.
    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    fn kernel_value(&self, y: &[f64], sigma: f64) -> f64 {
        let z: Vec<f64> = self.x0.iter().zip(y).map(|(a, b)| a - b).collect();
        self.workspace.eval_directional_grad(&z, sigma, &self.direction).unwrap_or(0.0)
    }

    fn profile(&self, k: f64) -> f64 {
        if self.p.is_infinite() {
            if self.eps > 0.0 {
                -(k / (self.eps * self.kappa)).tanh()
            } else if k == 0.0 {
                0.0
            } else {
                -k.signum()
            }
        } else {
            let pc = self.p.conjugate();
            -k.signum() * k.abs().powf(pc - 1.0) / self.normalizer
        }
    }

    fn sup_at(&self, sigma: f64) -> f64 {
        if self.p.is_infinite() {
            return 1.0;
        }
        let peak = directional_peak(&self.workspace, &self.direction, sigma);
        peak.powf(self.p.conjugate() - 1.0) / self.normalizer
    }

    /// Parameter `s` where the line `base + s dir` crosses the hyperplane
    /// `(A^{-1}(x0 - y + sigma b), l) = 0`.
    fn crossing(&self, base: &[f64], dir: &[f64], sigma: f64) -> Option<f64> {
        let b = self.workspace.spec().drift();
        let denom = dot(&self.normal, dir);
        if denom.abs() < 1e-300 {
            return None;
        }
        let num: f64 = (0..base.len()).map(|i| self.normal[i] * (self.x0[i] + sigma * b[i] - base[i])).sum();
        Some(num / denom)
    }

    fn center(&self, sigma: f64) -> Vec<f64> {
        let b = self.workspace.spec().drift();
        self.x0.iter().zip(b).map(|(x, bi)| x + sigma * bi).collect()
    }
}

/// `sup_y |(grad G(y, sigma), l)| = e^{ln prefactor} |A^{-1/2} l| / sqrt(2 e sigma)`.
pub(crate) fn directional_peak(w: &KernelWorkspace, l: &[f64], sigma: f64) -> f64 {
    let v = norm(&w.inv_sqrt().mul_vec(l));
    w.log_prefactor(sigma).exp() * v / (2.0 * std::f64::consts::E * sigma).sqrt()
}

/// Closed-form and sampled data.
#[derive(Debug, Clone)]
pub enum SourceKind {
    /// `value` everywhere.
    Constant { value: f64 },
    /// `amp * exp(-|y - center|^2 / (4 width))`.
    Gaussian { center: Vec<f64>, width: f64, amp: f64 },
    /// `amp` on the closed box `[lo, hi]`, zero outside.
    BoxIndicator { lo: Vec<f64>, hi: Vec<f64>, amp: f64 },
    /// `amp * (d, y - center) * exp(-|y - center|^2 / (4 width))`.
    PolynomialGaussian {
        center: Vec<f64>,
        width: f64,
        direction: Vec<f64>,
        amp: f64,
    },
    /// Extremal initial data for the homogeneous bound.
    ExtremalHom(ExtremalProfile),
    /// Extremal source for the nonhomogeneous bound.
    ExtremalNonhom(ExtremalProfile),
    /// Multilinear interpolation of samples on a uniform grid.
    GridSampled(Grid),
}

/// An `L^p` norm together with its absolute error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormEstimate {
    pub value: f64,
    pub error: f64,
}

impl NormEstimate {
    fn exact(value: f64) -> Self {
        NormEstimate { value, error: 0.0 }
    }
}

/// A source time `tau = base - lag`. Keeping the two parts lets `t0 - tau`
/// be formed without cancellation when `tau` is close to `base`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct SourceTime {
    pub base: f64,
    pub lag: f64,
}

impl SourceTime {
    pub fn at(tau: f64) -> Self {
        SourceTime { base: tau, lag: 0.0 }
    }

    /// `t0 - tau`.
    pub fn before(self, t0: f64) -> f64 {
        (t0 - self.base) + self.lag
    }
}

/// Data of either problem. Initial data ignore the time argument.
#[derive(Debug, Clone)]
pub struct SourceFunction {
    n: usize,
    kind: SourceKind,
}

fn check_len(n: usize, v: &[f64]) -> Result<()> {
    if v.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: v.len() });
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::UnsupportedData("non-finite parameter".into()));
    }
    Ok(())
}

fn check_finite(name: &str, x: f64) -> Result<()> {
    if !x.is_finite() {
        return Err(Error::UnsupportedData(format!("{name} must be finite, got {x}")));
    }
    Ok(())
}

fn check_width(width: f64) -> Result<()> {
    if !(width > 0.0) || !width.is_finite() {
        return Err(Error::UnsupportedData(format!("width must be positive, got {width}")));
    }
    Ok(())
}

impl SourceFunction {
    pub fn constant(n: usize, value: f64) -> Result<Self> {
        check_finite("value", value)?;
        Ok(SourceFunction {
            n,
            kind: SourceKind::Constant { value },
        })
    }

    pub fn gaussian(center: Vec<f64>, width: f64, amp: f64) -> Result<Self> {
        check_width(width)?;
        check_finite("amp", amp)?;
        let n = center.len();
        check_len(n, &center)?;
        Ok(SourceFunction {
            n,
            kind: SourceKind::Gaussian { center, width, amp },
        })
    }

    pub fn box_indicator(lo: Vec<f64>, hi: Vec<f64>, amp: f64) -> Result<Self> {
        let n = lo.len();
        check_len(n, &hi)?;
        check_len(n, &lo)?;
        check_finite("amp", amp)?;
        if lo.iter().zip(&hi).any(|(a, b)| !(a < b)) {
            return Err(Error::UnsupportedData("box needs lo < hi in every coordinate".into()));
        }
        Ok(SourceFunction {
            n,
            kind: SourceKind::BoxIndicator { lo, hi, amp },
        })
    }

    pub fn polynomial_gaussian(center: Vec<f64>, width: f64, direction: Vec<f64>, amp: f64) -> Result<Self> {
        check_width(width)?;
        check_finite("amp", amp)?;
        let n = center.len();
        check_len(n, &direction)?;
        Ok(SourceFunction {
            n,
            kind: SourceKind::PolynomialGaussian {
                center,
                width,
                direction,
                amp,
            },
        })
    }

    pub fn grid(grid: Grid) -> Self {
        SourceFunction {
            n: grid.dim(),
            kind: SourceKind::GridSampled(grid),
        }
    }

    pub(crate) fn from_kind(n: usize, kind: SourceKind) -> Self {
        SourceFunction { n, kind }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> &SourceKind {
        &self.kind
    }

    pub fn is_zero(&self) -> bool {
        match &self.kind {
            SourceKind::Constant { value } => *value == 0.0,
            SourceKind::Gaussian { amp, .. } | SourceKind::BoxIndicator { amp, .. } => *amp == 0.0,
            SourceKind::PolynomialGaussian { amp, direction, .. } => *amp == 0.0 || direction.iter().all(|d| *d == 0.0),
            SourceKind::GridSampled(g) => g.values().iter().all(|v| *v == 0.0),
            SourceKind::ExtremalHom(_) | SourceKind::ExtremalNonhom(_) => false,
        }
    }

    /// Whether tensor Gauss-Hermite is tried before adaptive quadrature.
    pub(crate) fn is_smooth(&self) -> bool {
        matches!(
            self.kind,
            SourceKind::Constant { .. } | SourceKind::Gaussian { .. } | SourceKind::PolynomialGaussian { .. }
        )
    }

    pub fn is_time_dependent(&self) -> bool {
        matches!(self.kind, SourceKind::ExtremalNonhom(_))
    }

    /// `phi(y)` or `f(y, tau)`.
    pub fn eval(&self, y: &[f64], tau: f64) -> f64 {
        self.eval_at(y, SourceTime::at(tau))
    }

    pub(crate) fn eval_at(&self, y: &[f64], tau: SourceTime) -> f64 {
        match &self.kind {
            SourceKind::Constant { value } => *value,
            SourceKind::Gaussian { center, width, amp } => {
                let r2: f64 = y.iter().zip(center).map(|(a, c)| (a - c) * (a - c)).sum();
                amp * (-r2 / (4.0 * width)).exp()
            }
            SourceKind::BoxIndicator { lo, hi, amp } => {
                if y.iter().enumerate().all(|(i, v)| *v >= lo[i] && *v <= hi[i]) {
                    *amp
                } else {
                    0.0
                }
            }
            SourceKind::PolynomialGaussian {
                center,
                width,
                direction,
                amp,
            } => {
                let mut r2 = 0.0;
                let mut lin = 0.0;
                for i in 0..y.len() {
                    let d = y[i] - center[i];
                    r2 += d * d;
                    lin += direction[i] * d;
                }
                amp * lin * (-r2 / (4.0 * width)).exp()
            }
            SourceKind::ExtremalHom(e) => e.profile(e.kernel_value(y, e.t0)),
            SourceKind::ExtremalNonhom(e) => {
                let sigma = tau.before(e.t0);
                if sigma <= 0.0 {
                    0.0
                } else {
                    e.profile(e.kernel_value(y, sigma))
                }
            }
            SourceKind::GridSampled(g) => g.interpolate(y),
        }
    }

    /// An upper bound for `sup_y |f(y, tau)|`, used to scale tolerances.
    pub fn sup_abs_at(&self, tau: f64) -> f64 {
        self.sup_abs_at_time(SourceTime::at(tau))
    }

    pub(crate) fn sup_abs_at_time(&self, tau: SourceTime) -> f64 {
        match &self.kind {
            SourceKind::Constant { value } => value.abs(),
            SourceKind::Gaussian { amp, .. } | SourceKind::BoxIndicator { amp, .. } => amp.abs(),
            SourceKind::PolynomialGaussian {
                width, direction, amp, ..
            } => amp.abs() * norm(direction) * (2.0 * width).sqrt() * (-0.5f64).exp(),
            SourceKind::ExtremalHom(e) => e.sup_at(e.t0),
            SourceKind::ExtremalNonhom(e) => {
                let sigma = tau.before(e.t0);
                if sigma <= 0.0 {
                    0.0
                } else {
                    e.sup_at(sigma)
                }
            }
            SourceKind::GridSampled(g) => g.sup_abs(),
        }
    }

    /// Points in `y` space worth placing breakpoints at (centres, corners).
    pub(crate) fn features(&self, tau: SourceTime) -> Vec<Vec<f64>> {
        match &self.kind {
            SourceKind::Constant { .. } => Vec::new(),
            SourceKind::Gaussian { center, .. } | SourceKind::PolynomialGaussian { center, .. } => vec![center.clone()],
            SourceKind::BoxIndicator { lo, hi, .. } => box_corners(lo, hi),
            SourceKind::ExtremalHom(e) => vec![e.center(e.t0)],
            SourceKind::ExtremalNonhom(e) => {
                let sigma = tau.before(e.t0);
                if sigma > 0.0 {
                    vec![e.center(sigma)]
                } else {
                    Vec::new()
                }
            }
            SourceKind::GridSampled(g) => {
                let (lo, hi) = g.support();
                box_corners(&lo, &hi)
            }
        }
    }

    /// The support box, when bounded.
    pub fn support(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        match &self.kind {
            SourceKind::BoxIndicator { lo, hi, .. } => Some((lo.clone(), hi.clone())),
            SourceKind::GridSampled(g) => Some(g.support()),
            _ => None,
        }
    }

    /// Parameters `s` in `[s_lo, s_hi]` (at least) at which `s -> f(base + s dir, tau)` is not smooth.
    pub(crate) fn line_breaks(&self, base: &[f64], dir: &[f64], tau: SourceTime, s_lo: f64, s_hi: f64) -> Vec<f64> {
        match &self.kind {
            SourceKind::GridSampled(g) => g.plane_crossings(base, dir, s_lo, s_hi),
            SourceKind::BoxIndicator { lo, hi, .. } => {
                let mut out = Vec::new();
                for i in 0..base.len() {
                    if dir[i] != 0.0 {
                        out.push((lo[i] - base[i]) / dir[i]);
                        out.push((hi[i] - base[i]) / dir[i]);
                    }
                }
                out
            }
            SourceKind::ExtremalHom(e) => e.crossing(base, dir, e.t0).into_iter().collect(),
            SourceKind::ExtremalNonhom(e) => {
                let sigma = tau.before(e.t0);
                if sigma > 0.0 {
                    e.crossing(base, dir, sigma).into_iter().collect()
                } else {
                    Vec::new()
                }
            }
            _ => Vec::new(),
        }
    }

    /// Times in `(0, t)` at which `tau -> f(., tau)` is not smooth.
    pub(crate) fn time_breaks(&self) -> Vec<f64> {
        match &self.kind {
            SourceKind::ExtremalNonhom(e) => vec![e.t0],
            _ => Vec::new(),
        }
    }

    /// `||phi||_p` over `R^n`, treating the data as initial data.
    ///
    /// Closed forms for the Gaussian family and boxes; grid data by refined
    /// quadrature; extremal data only at their own exponent.
    pub fn lp_norm(&self, p: Exponent) -> Result<NormEstimate> {
        let n = self.n as f64;
        match &self.kind {
            SourceKind::Constant { value } => Ok(NormEstimate::exact(if p.is_infinite() || *value == 0.0 {
                value.abs()
            } else {
                f64::INFINITY
            })),
            SourceKind::Gaussian { width, amp, .. } => {
                if p.is_infinite() {
                    return Ok(NormEstimate::exact(amp.abs()));
                }
                let pv = p.value();
                Ok(NormEstimate::exact(amp.abs() * (4.0 * PI * width / pv).powf(n / (2.0 * pv))))
            }
            SourceKind::BoxIndicator { lo, hi, amp } => {
                if p.is_infinite() {
                    return Ok(NormEstimate::exact(amp.abs()));
                }
                let vol: f64 = lo.iter().zip(hi).map(|(a, b)| b - a).product();
                Ok(NormEstimate::exact(amp.abs() * vol.powf(1.0 / p.value())))
            }
            SourceKind::PolynomialGaussian {
                width, direction, amp, ..
            } => {
                if p.is_infinite() {
                    return Ok(NormEstimate::exact(self.sup_abs_at(0.0)));
                }
                let d = norm(direction);
                if d == 0.0 || *amp == 0.0 {
                    return Ok(NormEstimate::exact(0.0));
                }
                // |amp d|^p * int |z1|^p e^{-a z1^2} dz1 * (pi / a)^{(n-1)/2}, a = p / 4s
                let pv = p.value();
                let a = pv / (4.0 * width);
                let ln = pv * (amp.abs() * d).ln() + ln_gamma(0.5 * (pv + 1.0))? - 0.5 * (pv + 1.0) * a.ln()
                    + 0.5 * (n - 1.0) * (PI / a).ln();
                Ok(NormEstimate::exact((ln / pv).exp()))
            }
            SourceKind::ExtremalHom(e) => {
                if p != e.p {
                    return Err(Error::UnsupportedData(format!(
                        "norm of extremal data for p = {} requested at p = {p}",
                        e.p
                    )));
                }
                Ok(NormEstimate::exact(extremal_own_norm(e, true)))
            }
            SourceKind::ExtremalNonhom(_) => Err(Error::UnsupportedData(
                "extremal sources have a space-time norm; use lp_norm_spacetime".into(),
            )),
            SourceKind::GridSampled(g) => g.lp_norm(p),
        }
    }

    /// `||f||_{p,t}` over `R^n x (0, t)`.
    ///
    /// Time-independent data give `t^{1/p} ||g||_p`. Extremal sources are
    /// normalized on `(0, t0)` and vanish afterwards, so only `t >= t0` is
    /// supported for them.
    pub fn lp_norm_spacetime(&self, p: Exponent, t: f64) -> Result<NormEstimate> {
        if !(t > 0.0) {
            return Err(Error::NonpositiveTime(t));
        }
        match &self.kind {
            SourceKind::ExtremalNonhom(e) => {
                if p != e.p {
                    return Err(Error::UnsupportedData(format!(
                        "norm of extremal source for p = {} requested at p = {p}",
                        e.p
                    )));
                }
                if t < e.t0 {
                    return Err(Error::UnsupportedData(format!(
                        "extremal source norm is known on (0, t) only for t >= t0 = {}",
                        e.t0
                    )));
                }
                Ok(NormEstimate::exact(extremal_own_norm(e, false)))
            }
            SourceKind::ExtremalHom(_) => Err(Error::UnsupportedData(
                "extremal initial data used as a source".into(),
            )),
            _ => {
                let g = self.lp_norm(p)?;
                if p.is_infinite() {
                    return Ok(g);
                }
                let scale = t.powf(1.0 / p.value());
                Ok(NormEstimate {
                    value: g.value * scale,
                    error: g.error * scale,
                })
            }
        }
    }
}

/// Extremal data are normalized to unit norm, except the mollified sign
/// `-tanh(k / (eps kappa))` whose initial-data sup is `tanh(1 / eps)`. The
/// source version is unbounded in `k` as `sigma -> 0`, so its sup is 1.
fn extremal_own_norm(e: &ExtremalProfile, initial: bool) -> f64 {
    if initial && e.p.is_infinite() && e.eps > 0.0 {
        (1.0 / e.eps).tanh()
    } else {
        1.0
    }
}

fn box_corners(lo: &[f64], hi: &[f64]) -> Vec<Vec<f64>> {
    let n = lo.len();
    (0..1usize << n)
        .map(|mask| (0..n).map(|i| if mask >> i & 1 == 1 { hi[i] } else { lo[i] }).collect())
        .collect()
}
