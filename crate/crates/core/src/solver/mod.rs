//! Pointwise evaluation of
//!
//! ```text
//! u(x, t) = int G(x - y, t) phi(y) dy                               (homogeneous)
//! u(x, t) = int_0^t int G(x - y, t - tau) f(y, tau) dy dtau         (nonhomogeneous)
//! ```
//!
//! and of `grad_x u`.
//!
//! Spatial integrals use `y = x + t b - 2 sqrt(t) A^{1/2} xi`, which turns the
//! kernel into `e^{ct} pi^{-n/2} e^{-|xi|^2}`. Smooth presets go through
//! tensor Gauss-Hermite (order `m`, cross-checked at `m/2`), in the data's own
//! Gaussian variable when the data are much narrower than the kernel; everything else
//! through nested adaptive Gauss-Kronrod on `[-R, R]^n` with the innermost
//! line split where the data are not smooth. Grid data use refined trapezoid
//! sums. The Duhamel time integral substitutes `t - tau = r^2` and runs
//! adaptive Gauss-Kronrod over `r`, seeded with uniform panels and a
//! geometric layer towards `r = 0`.

pub mod grid;
pub mod source;

use std::cell::RefCell;
use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::KernelWorkspace;
use crate::mathcore::quadrature::{gauss_hermite, integrate_vec, Tolerance};
use crate::mathcore::spd::mat_vec;
use crate::sharp::BoundKind;

pub use grid::Grid;
pub use source::{ExtremalProfile, NormEstimate, SourceFunction, SourceKind};
pub(crate) use source::SourceTime;

/// Largest dimension with a solver path.
pub const SOLVER_MAX_DIM: usize = 3;

/// Number of halvings of the first time panel towards `r = 0`.
const GEOMETRIC_LAYERS: usize = 40;

/// Inner integrals are asked for this fraction of the outer tolerance.
const INNER_TOL_FACTOR: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub hermite_order: usize,
    pub time_panels: usize,
    /// Half-width of the integration cube in the scaled variable `xi`.
    pub truncation_radius: f64,
    pub target_rel_err: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            hermite_order: 64,
            time_panels: 48,
            truncation_radius: 12.0,
            target_rel_err: 1e-8,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if self.hermite_order < 8 {
            return Err(Error::InvalidSpec(format!("hermite_order must be >= 8, got {}", self.hermite_order)));
        }
        if self.time_panels == 0 {
            return Err(Error::InvalidSpec("time_panels must be positive".into()));
        }
        if !(self.truncation_radius > 0.0) || !self.truncation_radius.is_finite() {
            return Err(Error::InvalidSpec("truncation_radius must be positive".into()));
        }
        if !(self.target_rel_err > 0.0) || !(self.target_rel_err < 1.0) {
            return Err(Error::InvalidSpec("target_rel_err must lie in (0, 1)".into()));
        }
        Ok(())
    }

    pub fn with_target(mut self, rel: f64) -> Self {
        self.target_rel_err = rel;
        self
    }
}

/// `u`, `grad u` and an absolute error estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub u: f64,
    pub grad: Vec<f64>,
    pub error: f64,
}

impl Solution {
    fn zero(n: usize) -> Self {
        Solution {
            u: 0.0,
            grad: vec![0.0; n],
            error: 0.0,
        }
    }

    pub fn directional(&self, l: &[f64]) -> f64 {
        self.grad.iter().zip(l).map(|(g, l)| g * l).sum()
    }
}

fn check_inputs(w: &KernelWorkspace, data: &SourceFunction, x: &[f64], t: f64, q: &QuadratureConfig) -> Result<()> {
    q.validate()?;
    let n = w.dim();
    if n > SOLVER_MAX_DIM {
        return Err(Error::UnsupportedDimension { n, max: SOLVER_MAX_DIM });
    }
    if data.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: data.dim() });
    }
    if x.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: x.len() });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::DomainError("evaluation point must be finite".into()));
    }
    if !(t > 0.0) {
        return Err(Error::NonpositiveTime(t));
    }
    let horizon = w.spec().horizon();
    if t > horizon {
        return Err(Error::TimeBeyondHorizon { t, horizon });
    }
    Ok(())
}

/// `u(x, t)` and `grad u(x, t)` for initial data `phi`.
pub fn evaluate_hom(w: &KernelWorkspace, phi: &SourceFunction, x: &[f64], t: f64, q: &QuadratureConfig) -> Result<Solution> {
    check_inputs(w, phi, x, t, q)?;
    if phi.is_time_dependent() {
        return Err(Error::UnsupportedData("time-dependent source used as initial data".into()));
    }
    hom_core(w, phi, x, t, SourceTime::at(0.0), q, q.target_rel_err)
}

pub fn solve_hom(w: &KernelWorkspace, phi: &SourceFunction, x: &[f64], t: f64, q: &QuadratureConfig) -> Result<f64> {
    evaluate_hom(w, phi, x, t, q).map(|s| s.u)
}

pub fn grad_hom(w: &KernelWorkspace, phi: &SourceFunction, x: &[f64], t: f64, q: &QuadratureConfig) -> Result<Vec<f64>> {
    evaluate_hom(w, phi, x, t, q).map(|s| s.grad)
}

/// `u(x, t)` and `grad u(x, t)` for the source `f` with zero initial data.
pub fn evaluate_nonhom(w: &KernelWorkspace, f: &SourceFunction, x: &[f64], t: f64, q: &QuadratureConfig) -> Result<Solution> {
    check_inputs(w, f, x, t, q)?;
    nonhom_core(w, f, x, t, q)
}

pub fn solve_nonhom(w: &KernelWorkspace, f: &SourceFunction, x: &[f64], t: f64, q: &QuadratureConfig) -> Result<f64> {
    evaluate_nonhom(w, f, x, t, q).map(|s| s.u)
}

pub fn grad_nonhom(w: &KernelWorkspace, f: &SourceFunction, x: &[f64], t: f64, q: &QuadratureConfig) -> Result<Vec<f64>> {
    evaluate_nonhom(w, f, x, t, q).map(|s| s.grad)
}

pub fn evaluate(
    w: &KernelWorkspace,
    data: &SourceFunction,
    kind: BoundKind,
    x: &[f64],
    t: f64,
    q: &QuadratureConfig,
) -> Result<Solution> {
    match kind {
        BoundKind::Homogeneous => evaluate_hom(w, data, x, t, q),
        BoundKind::Nonhomogeneous => evaluate_nonhom(w, data, x, t, q),
    }
}

/// Evaluates many `(x, t)` points in parallel; results keep the input order.
pub fn evaluate_batch(
    w: &KernelWorkspace,
    data: &SourceFunction,
    kind: BoundKind,
    points: &[(Vec<f64>, f64)],
    q: &QuadratureConfig,
) -> Vec<Result<Solution>> {
    points.par_iter().map(|(x, t)| evaluate(w, data, kind, x, *t, q)).collect()
}

/// Maps the raw `xi` moments `[int e^{-|xi|^2} phi, int xi_i e^{-|xi|^2} phi]`
/// to `u` and `grad u`.
fn finish(w: &KernelWorkspace, t: f64, raw: &[f64], err: f64) -> Solution {
    let n = w.dim();
    let scale = (w.spec().reaction() * t).exp() * PI.powf(-0.5 * n as f64);
    let g = mat_vec(n, w.inv_sqrt().entries(), &raw[1..]);
    let gscale = -scale / t.sqrt();
    Solution {
        u: scale * raw[0],
        grad: g.into_iter().map(|v| v * gscale).collect(),
        error: scale * err * (1.0 + 1.0 / t.sqrt()),
    }
}

/// Homogeneous evaluation with the data frozen at time `tau`.
fn hom_core(
    w: &KernelWorkspace,
    data: &SourceFunction,
    x: &[f64],
    t: f64,
    tau: SourceTime,
    q: &QuadratureConfig,
    rel: f64,
) -> Result<Solution> {
    let n = w.dim();
    if data.is_zero() {
        return Ok(Solution::zero(n));
    }
    let map = XiMap::new(w, x, t);
    if let SourceKind::GridSampled(g) = data.kind() {
        if let Some(start) = romberg_start(w, g, t) {
            return grid_hom(w, g, x, t, rel, start, q);
        }
        let (raw, err) = adaptive(&map, data, tau, q, rel)?;
        return Ok(finish(w, t, &raw, err));
    }
    if data.is_smooth() {
        if let Some((raw, err)) = hermite(&map, data, tau, q.hermite_order, rel) {
            return Ok(finish(w, t, &raw, err));
        }
        if let Some(s) = data_hermite(w, data, x, t, q.hermite_order, rel) {
            return Ok(s);
        }
    }
    let (raw, err) = adaptive(&map, data, tau, q, rel)?;
    Ok(finish(w, t, &raw, err))
}

/// `y(xi) = x + t b - 2 sqrt(t) A^{1/2} xi`.
struct XiMap<'a> {
    w: &'a KernelWorkspace,
    n: usize,
    center: Vec<f64>,
    /// `-2 sqrt(t) A^{1/2}`, row-major.
    jac: Vec<f64>,
    sqrt_t: f64,
}

impl<'a> XiMap<'a> {
    fn new(w: &'a KernelWorkspace, x: &[f64], t: f64) -> Self {
        let n = w.dim();
        let center = x.iter().zip(w.spec().drift()).map(|(a, b)| a + t * b).collect();
        let s = -2.0 * t.sqrt();
        let jac = w.decomposition().sqrt().entries().iter().map(|v| v * s).collect();
        XiMap {
            w,
            n,
            center,
            jac,
            sqrt_t: t.sqrt(),
        }
    }

    fn y(&self, xi: &[f64], out: &mut [f64]) {
        for i in 0..self.n {
            let mut acc = self.center[i];
            for j in 0..self.n {
                acc += self.jac[i * self.n + j] * xi[j];
            }
            out[i] = acc;
        }
    }

    /// Inverse map `xi(y) = A^{-1/2} (center - y) / (2 sqrt t)`.
    fn xi(&self, y: &[f64]) -> Vec<f64> {
        let d: Vec<f64> = self.center.iter().zip(y).map(|(c, v)| c - v).collect();
        let scale = 0.5 / self.sqrt_t;
        mat_vec(self.n, self.w.inv_sqrt().entries(), &d)
            .into_iter()
            .map(|v| v * scale)
            .collect()
    }

    fn column(&self, k: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.jac[i * self.n + k]).collect()
    }
}

/// Writes `[e^{-|xi|^2} phi, xi_i e^{-|xi|^2} phi]` into `out`.
fn moment_integrand(map: &XiMap, data: &SourceFunction, tau: SourceTime, xi: &[f64], y: &mut [f64], out: &mut [f64]) {
    let r2: f64 = xi.iter().map(|v| v * v).sum();
    if r2 > crate::kernel::EXPONENT_CUTOFF {
        out.iter_mut().for_each(|o| *o = 0.0);
        return;
    }
    map.y(xi, y);
    let v = (-r2).exp() * data.eval_at(y, tau);
    out[0] = v;
    for i in 0..xi.len() {
        out[i + 1] = xi[i] * v;
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

fn hermite_sum(map: &XiMap, data: &SourceFunction, tau: SourceTime, order: usize) -> Vec<f64> {
    let rule = gauss_hermite(order);
    let n = map.n;
    let total = order.pow(n as u32);
    let mut acc = vec![0.0; n + 1];
    let mut idx = vec![0usize; n];
    let mut xi = vec![0.0; n];
    let mut y = vec![0.0; n];
    for _ in 0..total {
        let mut weight = 1.0;
        for k in 0..n {
            xi[k] = rule.nodes[idx[k]];
            weight *= rule.weights[idx[k]];
        }
        map.y(&xi, &mut y);
        let v = weight * data.eval_at(&y, tau);
        acc[0] += v;
        for k in 0..n {
            acc[k + 1] += xi[k] * v;
        }
        for k in (0..n).rev() {
            idx[k] += 1;
            if idx[k] < order {
                break;
            }
            idx[k] = 0;
        }
    }
    acc
}

/// Tensor Gauss-Hermite at `order`, accepted when it agrees with `order / 2`.
fn hermite(map: &XiMap, data: &SourceFunction, tau: SourceTime, order: usize, rel: f64) -> Option<(Vec<f64>, f64)> {
    let fine = hermite_sum(map, data, tau, order);
    let coarse = hermite_sum(map, data, tau, (order / 2).max(4));
    let diff = fine.iter().zip(&coarse).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
    let scale = max_abs(&fine);
    // the coarse rule is already accurate when this holds, so the fine one is far below it
    if diff <= rel * scale || (scale == 0.0 && diff == 0.0) {
        Some((fine, diff))
    } else {
        None
    }
}

/// Gauss-Hermite in the data's own variable `y = center + 2 sqrt(width) eta`,
/// for Gaussian data much narrower than the kernel. Returns `[u, grad u]`.
fn data_hermite_sum(w: &KernelWorkspace, data: &SourceFunction, x: &[f64], t: f64, order: usize) -> Option<Vec<f64>> {
    let (center, width, amp, direction) = match data.kind() {
        SourceKind::Gaussian { center, width, amp } => (center, *width, *amp, None),
        SourceKind::PolynomialGaussian {
            center,
            width,
            direction,
            amp,
        } => (center, *width, *amp, Some(direction)),
        _ => return None,
    };
    let rule = gauss_hermite(order);
    let n = w.dim();
    let h = 2.0 * width.sqrt();
    let mut acc = vec![0.0; n + 1];
    let mut idx = vec![0usize; n];
    let mut z = vec![0.0; n];
    for _ in 0..order.pow(n as u32) {
        let mut weight = amp;
        let mut poly = 0.0;
        for k in 0..n {
            let eta = rule.nodes[idx[k]];
            weight *= rule.weights[idx[k]];
            z[k] = x[k] - center[k] - h * eta;
            if let Some(d) = direction {
                poly += d[k] * h * eta;
            }
        }
        if direction.is_some() {
            weight *= poly;
        }
        acc[0] += weight * w.eval_g(&z, t).ok()?;
        for (a, g) in acc[1..].iter_mut().zip(w.eval_grad_g(&z, t).ok()?) {
            *a += weight * g;
        }
        for k in (0..n).rev() {
            idx[k] += 1;
            if idx[k] < order {
                break;
            }
            idx[k] = 0;
        }
    }
    let jac = h.powi(n as i32);
    Some(acc.into_iter().map(|v| v * jac).collect())
}

fn data_hermite(w: &KernelWorkspace, data: &SourceFunction, x: &[f64], t: f64, order: usize, rel: f64) -> Option<Solution> {
    let fine = data_hermite_sum(w, data, x, t, order)?;
    let coarse = data_hermite_sum(w, data, x, t, (order / 2).max(4))?;
    let diff = fine.iter().zip(&coarse).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
    if diff <= rel * max_abs(&fine) {
        Some(Solution {
            u: fine[0],
            grad: fine[1..].to_vec(),
            error: diff,
        })
    } else {
        None
    }
}

/// Nested adaptive Gauss-Kronrod over the `xi` cube.
fn adaptive(map: &XiMap, data: &SourceFunction, tau: SourceTime, q: &QuadratureConfig, rel: f64) -> Result<(Vec<f64>, f64)> {
    let n = map.n;
    let r = q.truncation_radius;
    let mut lo = vec![-r; n];
    let mut hi = vec![r; n];
    if let Some((slo, shi)) = data.support() {
        let corners = source_corners(&slo, &shi);
        let mut blo = vec![f64::INFINITY; n];
        let mut bhi = vec![f64::NEG_INFINITY; n];
        for c in &corners {
            let xi = map.xi(c);
            for k in 0..n {
                blo[k] = blo[k].min(xi[k]);
                bhi[k] = bhi[k].max(xi[k]);
            }
        }
        for k in 0..n {
            lo[k] = lo[k].max(blo[k]);
            hi[k] = hi[k].min(bhi[k]);
            if !(lo[k] < hi[k]) {
                return Ok((vec![0.0; n + 1], 0.0));
            }
        }
    }
    let mut breaks: Vec<Vec<f64>> = (0..n).map(|k| vec![lo[k], hi[k], 0.0]).collect();
    let mut features = data.features(tau);
    if let SourceKind::GridSampled(g) = data.kind() {
        // vertices of the cells under the footprint
        let corners = source_corners(&lo, &hi);
        let mut ylo = vec![f64::INFINITY; n];
        let mut yhi = vec![f64::NEG_INFINITY; n];
        let mut y = vec![0.0; n];
        for c in &corners {
            map.y(c, &mut y);
            for k in 0..n {
                ylo[k] = ylo[k].min(y[k]);
                yhi[k] = yhi[k].max(y[k]);
            }
        }
        features.extend(g.nodes_in(&ylo, &yhi, GRID_VERTEX_LIMIT).unwrap_or_default());
    }
    for f in features {
        let xi = map.xi(&f);
        for k in 0..n {
            breaks[k].push(xi[k]);
        }
    }
    for k in 0..n {
        breaks[k] = clean_breaks(&breaks[k], lo[k], hi[k]);
    }
    let nested = Nested {
        map,
        data,
        tau,
        rel,
        breaks,
        inner_dir: map.column(n - 1),
    };
    let mut prefix = vec![0.0; n];
    nested.integrate(0, &mut prefix)
}

fn source_corners(lo: &[f64], hi: &[f64]) -> Vec<Vec<f64>> {
    let n = lo.len();
    (0..1usize << n)
        .map(|mask| (0..n).map(|i| if mask >> i & 1 == 1 { hi[i] } else { lo[i] }).collect())
        .collect()
}

/// Sorted, deduplicated breakpoints inside `[lo, hi]`, always including both ends.
fn clean_breaks(raw: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    let mut v: Vec<f64> = raw.iter().copied().filter(|b| b.is_finite() && *b >= lo && *b <= hi).collect();
    v.push(lo);
    v.push(hi);
    v.sort_by(f64::total_cmp);
    let width = hi - lo;
    let mut out: Vec<f64> = Vec::with_capacity(v.len());
    for b in v {
        if out.last().map_or(true, |l| b - l > 1e-12 * width) {
            out.push(b);
        }
    }
    if let Some(last) = out.last_mut() {
        *last = hi;
    }
    out
}

struct Nested<'a> {
    map: &'a XiMap<'a>,
    data: &'a SourceFunction,
    tau: SourceTime,
    rel: f64,
    breaks: Vec<Vec<f64>>,
    inner_dir: Vec<f64>,
}

impl Nested<'_> {
    fn integrate(&self, k: usize, prefix: &mut Vec<f64>) -> Result<(Vec<f64>, f64)> {
        let n = self.map.n;
        let last = k + 1 == n;
        let breaks = if last { self.line_breaks(prefix) } else { self.breaks[k].clone() };
        let rel = if k == 0 { self.rel } else { self.rel * INNER_TOL_FACTOR };
        let failure: RefCell<Option<Error>> = RefCell::new(None);
        let inner_err = RefCell::new(0.0_f64);
        let mut y = vec![0.0; n];
        let est = integrate_vec(
            |s, out| {
                prefix[k] = s;
                if last {
                    moment_integrand(self.map, self.data, self.tau, prefix, &mut y, out);
                } else if failure.borrow().is_some() {
                    out.iter_mut().for_each(|o| *o = 0.0);
                } else {
                    match self.integrate(k + 1, prefix) {
                        Ok((v, e)) => {
                            out.copy_from_slice(&v);
                            let mut ie = inner_err.borrow_mut();
                            *ie = ie.max(e);
                        }
                        Err(e) => {
                            *failure.borrow_mut() = Some(e);
                            out.iter_mut().for_each(|o| *o = 0.0);
                        }
                    }
                }
            },
            n + 1,
            &breaks,
            Tolerance::relative(rel),
        )?;
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        let span = breaks[breaks.len() - 1] - breaks[0];
        Ok((est.value, est.error + span * inner_err.into_inner()))
    }

    /// Breakpoints of the innermost line `xi_n -> phi(y(xi))` for fixed outer coordinates.
    fn line_breaks(&self, prefix: &mut [f64]) -> Vec<f64> {
        let n = self.map.n;
        let (lo, hi) = (self.breaks[n - 1][0], *self.breaks[n - 1].last().unwrap());
        prefix[n - 1] = 0.0;
        let mut base = vec![0.0; n];
        self.map.y(prefix, &mut base);
        let mut raw = self.breaks[n - 1].clone();
        raw.extend(self.data.line_breaks(&base, &self.inner_dir, self.tau, lo, hi));
        clean_breaks(&raw, lo, hi)
    }
}

/// Largest number of grid vertices used as outer breakpoints.
const GRID_VERTEX_LIMIT: usize = 4096;

/// Sub-samples per cell for Romberg on grid data, or `None` when the kernel
/// is narrow compared with the grid and nested quadrature with breaks at
/// the grid planes is cheaper.
fn romberg_start(w: &KernelWorkspace, g: &Grid, t: f64) -> Option<usize> {
    let a = w.spec().diffusion();
    let mut start = 1usize;
    for (i, h) in g.spacing().iter().enumerate() {
        // standard deviation of the kernel along axis i
        let sd = (2.0 * t * a.get(i, i)).sqrt();
        if *h > 2.0 * sd {
            return None;
        }
        start = start.max((4.0 * h / sd).ceil() as usize);
    }
    Some(start)
}

fn grid_hom(w: &KernelWorkspace, g: &Grid, x: &[f64], t: f64, rel: f64, start: usize, q: &QuadratureConfig) -> Result<Solution> {
    let n = w.dim();
    let a = w.spec().diffusion();
    let center: Vec<f64> = x.iter().zip(w.spec().drift()).map(|(a, b)| a + t * b).collect();
    let reach = 2.0 * t.sqrt() * q.truncation_radius;
    let lo: Vec<f64> = (0..n).map(|i| center[i] - reach * a.get(i, i).sqrt()).collect();
    let hi: Vec<f64> = (0..n).map(|i| center[i] + reach * a.get(i, i).sqrt()).collect();
    let inv_sqrt = w.inv_sqrt().entries().to_vec();
    let log_pre = w.log_prefactor(t);
    let scale = 0.5 / t.sqrt();
    let b = w.spec().drift().to_vec();
    let (v, err) = g.integrate(&lo, &hi, n + 1, rel, start, |y, phi, out| {
        if phi == 0.0 {
            return;
        }
        let mut z = [0.0; SOLVER_MAX_DIM];
        for i in 0..n {
            z[i] = x[i] - y[i] + t * b[i];
        }
        let mut xi = [0.0; SOLVER_MAX_DIM];
        let mut r2 = 0.0;
        for i in 0..n {
            let mut acc = 0.0;
            for j in 0..n {
                acc += inv_sqrt[i * n + j] * z[j];
            }
            xi[i] = acc * scale;
            r2 += xi[i] * xi[i];
        }
        if r2 > crate::kernel::EXPONENT_CUTOFF {
            return;
        }
        let gv = (log_pre - r2).exp() * phi;
        out[0] = gv;
        let gfac = -gv / t.sqrt();
        for i in 0..n {
            let mut acc = 0.0;
            for j in 0..n {
                acc += inv_sqrt[i * n + j] * xi[j];
            }
            out[i + 1] = gfac * acc;
        }
    })?;
    Ok(Solution {
        u: v[0],
        grad: v[1..].to_vec(),
        error: err,
    })
}

fn nonhom_core(w: &KernelWorkspace, f: &SourceFunction, x: &[f64], t: f64, q: &QuadratureConfig) -> Result<Solution> {
    let n = w.dim();
    if f.is_zero() {
        return Ok(Solution::zero(n));
    }
    let top = t.sqrt();
    let panels = q.time_panels;
    let mut breaks: Vec<f64> = (0..=panels).map(|i| top * i as f64 / panels as f64).collect();
    let first = breaks[1];
    breaks.extend((1..=GEOMETRIC_LAYERS).map(|k| first * 0.5f64.powi(k as i32)));
    for tau in f.time_breaks() {
        if tau > 0.0 && tau < t {
            breaks.push((t - tau).sqrt());
        }
    }
    let breaks = clean_breaks(&breaks, 0.0, top);
    let inner_rel = q.target_rel_err * INNER_TOL_FACTOR;
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let est = integrate_vec(
        |r, out| {
            let sigma = r * r;
            if sigma <= 0.0 || failure.borrow().is_some() {
                out.iter_mut().for_each(|o| *o = 0.0);
                return;
            }
            match hom_core(w, f, x, sigma, SourceTime { base: t, lag: sigma }, q, inner_rel) {
                Ok(s) => {
                    out[0] = 2.0 * r * s.u;
                    for i in 0..n {
                        out[i + 1] = 2.0 * r * s.grad[i];
                    }
                    // the inner error bound is integrated alongside the solution
                    out[n + 1] = 2.0 * r * s.error;
                }
                Err(e) => {
                    *failure.borrow_mut() = Some(e);
                    out.iter_mut().for_each(|o| *o = 0.0);
                }
            }
        },
        n + 2,
        &breaks,
        Tolerance::relative(q.target_rel_err).with_max_intervals(4000),
    )?;
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(Solution {
        u: est.value[0],
        grad: est.value[1..=n].to_vec(),
        error: est.error + est.value[n + 1],
    })
}
