//! The verification suite: named checks built from a fixed seed, run in
//! parallel and reported in name order.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{KernelWorkspace, ProblemSpec};
use crate::mathcore::quadrature::{gauss_hermite, integrate, Tolerance};
use crate::mathcore::spd::{mat_vec, norm};
use crate::mathcore::SpdMatrix;
use crate::sharp::{c_dir, c_max, k_dir, k_max, sphere_integral, BoundKind, BoundQuery, Direction, Exponent};
use crate::solver::{evaluate_hom, evaluate_nonhom, QuadratureConfig, SourceFunction};

use super::extremal::{attainment_ratio_hom, attainment_ratio_nonhom, ExtremalSpec};
use super::oracles::{kernel_grad_norm_oracle, spacetime_grad_norm_oracle};
use super::report::{ReportConfig, VerificationReport};

/// Horizon of randomly drawn problems.
pub const RANDOM_HORIZON: f64 = 10.0;

pub const DEFAULT_SEED: u64 = 20_240_601;

/// Finite-difference steps of the residual checks.
pub const RESIDUAL_STEPS: [f64; 3] = [1e-2, 5e-3, 2.5e-3];

/// Mollification parameters of the `p = inf` source family.
pub const MOLLIFIER_SEQUENCE: [f64; 3] = [0.3, 0.1, 0.03];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub seed: u64,
    /// Relative error injected into closed-form constants, for testing the suite itself.
    #[serde(default)]
    pub perturb: f64,
    pub quadrature: QuadratureConfig,
    /// Glob over check names.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub filter: Option<String>,
    /// Worker threads; `0` uses all cores.
    #[serde(default)]
    pub jobs: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            seed: DEFAULT_SEED,
            perturb: 0.0,
            quadrature: QuadratureConfig::default(),
            filter: None,
            jobs: 0,
        }
    }
}

impl SuiteConfig {
    fn report(&self, tolerance: f64) -> ReportConfig {
        ReportConfig {
            tolerance,
            ratio_threshold: None,
            quadrature: self.quadrature,
            seed: self.seed,
        }
    }

    fn perturbed(&self, v: f64) -> f64 {
        v * (1.0 + self.perturb)
    }
}

type CheckFn = Box<dyn Fn(&SuiteConfig) -> Result<VerificationReport> + Send + Sync>;

/// One named check.
pub struct Check {
    pub name: String,
    run: CheckFn,
}

impl Check {
    pub fn new<F>(name: impl Into<String>, run: F) -> Self
    where
        F: Fn(&SuiteConfig) -> Result<VerificationReport> + Send + Sync + 'static,
    {
        Check {
            name: name.into(),
            run: Box::new(run),
        }
    }

    pub fn run(&self, cfg: &SuiteConfig) -> Result<VerificationReport> {
        (self.run)(cfg)
    }
}

/// Reports and errors of a suite run, both sorted by check name.
#[derive(Debug, Clone)]
pub struct SuiteOutcome {
    pub reports: Vec<VerificationReport>,
    pub errors: Vec<(String, Error)>,
}

impl SuiteOutcome {
    pub fn passed(&self) -> usize {
        self.reports.iter().filter(|r| r.passed).count()
    }

    pub fn failed(&self) -> usize {
        self.reports.len() - self.passed()
    }

    pub fn all_passed(&self) -> bool {
        self.errors.is_empty() && self.reports.iter().all(|r| r.passed)
    }
}

/// A stream of the seeded generator reserved for one check group.
pub fn group_rng(seed: u64, group: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(group);
    rng
}

/// `A = Q^T diag(lambda) Q` with `lambda` log-uniform in `[0.25, 4]`, `Q`
/// orthogonal (Gram-Schmidt of a Gaussian matrix), `b` uniform in `[-2, 2]^n`,
/// `c` uniform in `[-1, 1]`.
pub fn random_spec<R: Rng>(rng: &mut R, n: usize) -> ProblemSpec {
    let lambdas: Vec<f64> = (0..n).map(|_| rng.gen_range(0.25f64.ln()..4f64.ln()).exp()).collect();
    let q = random_orthogonal(rng, n);
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            a[i * n + j] = (0..n).map(|k| q[k * n + i] * lambdas[k] * q[k * n + j]).sum();
        }
    }
    let b = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
    let c = rng.gen_range(-1.0..1.0);
    ProblemSpec::new(SpdMatrix::new(n, a).expect("random SPD"), b, c, RANDOM_HORIZON).expect("random spec")
}

/// Same as [`random_spec`] with `A = a I`.
pub fn random_isotropic_spec<R: Rng>(rng: &mut R, n: usize) -> (ProblemSpec, f64) {
    let a = rng.gen_range(0.25f64.ln()..4f64.ln()).exp();
    let b = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
    let c = rng.gen_range(-1.0..1.0);
    let spec = ProblemSpec::new(SpdMatrix::diagonal(&vec![a; n]).unwrap(), b, c, RANDOM_HORIZON).unwrap();
    (spec, a)
}

fn random_orthogonal<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n);
    while rows.len() < n {
        let mut v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        for _ in 0..2 {
            for r in &rows {
                let d: f64 = v.iter().zip(r).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(r).for_each(|(a, b)| *a -= d * b);
            }
        }
        let l = norm(&v);
        if l > 1e-6 {
            rows.push(v.into_iter().map(|x| x / l).collect());
        }
    }
    rows.concat()
}

pub fn random_unit<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let l = norm(&v);
        if l > 1e-6 {
            return v.into_iter().map(|x| x / l).collect();
        }
    }
}

fn workspace(spec: ProblemSpec) -> KernelWorkspace {
    KernelWorkspace::new(spec).expect("valid spec")
}

fn heat1() -> KernelWorkspace {
    workspace(ProblemSpec::heat(1, RANDOM_HORIZON).unwrap())
}

fn p_label(p: Exponent) -> String {
    if p.is_infinite() {
        "pinf".into()
    } else {
        format!("p{}", p.value())
    }
}

// ----------------------------------------------------------------------------
// individual checks

/// `int G(y, t) dy` by tensor Gauss-Hermite in `y = -t b + 2 sqrt(t) A^{1/2} xi`.
pub fn mass_by_hermite(w: &KernelWorkspace, t: f64, order: usize) -> Result<f64> {
    let n = w.dim();
    let rule = gauss_hermite(order);
    let root = w.decomposition().sqrt().entries().to_vec();
    let s = 2.0 * t.sqrt();
    let b = w.spec().drift();
    let mut idx = vec![0usize; n];
    let mut xi = vec![0.0; n];
    let mut y = vec![0.0; n];
    let mut sum = 0.0;
    for _ in 0..order.pow(n as u32) {
        let mut weight = 1.0;
        for k in 0..n {
            xi[k] = rule.nodes[idx[k]];
            weight *= rule.weights[idx[k]];
        }
        let m = mat_vec(n, &root, &xi);
        for i in 0..n {
            y[i] = -t * b[i] + s * m[i];
        }
        let r2: f64 = xi.iter().map(|v| v * v).sum();
        sum += weight * w.eval_g(&y, t)? * r2.exp();
        for k in (0..n).rev() {
            idx[k] += 1;
            if idx[k] < order {
                break;
            }
            idx[k] = 0;
        }
    }
    Ok(sum * s.powi(n as i32) * w.det_sqrt())
}

pub fn mass_identity_check(name: &str, w: &KernelWorkspace, t: f64, cfg: &SuiteConfig) -> Result<VerificationReport> {
    let oracle = mass_by_hermite(w, t, cfg.quadrature.hermite_order)?;
    Ok(VerificationReport::equality(name, w.mass(t)?, oracle, cfg.report(1e-10)))
}

/// `G_t - div(A grad G) - (b, grad G) - c G` by central differences with step `h`.
pub fn kernel_residual(w: &KernelWorkspace, x: &[f64], t: f64, h: f64) -> Result<f64> {
    let n = w.dim();
    let a = w.spec().diffusion();
    let b = w.spec().drift();
    let c = w.spec().reaction();
    let g = |dx: &[(usize, f64)], dt: f64| -> Result<f64> {
        let mut y = x.to_vec();
        for &(i, d) in dx {
            y[i] += d;
        }
        w.eval_g(&y, t + dt)
    };
    let g0 = g(&[], 0.0)?;
    let gt = (g(&[], h)? - g(&[], -h)?) / (2.0 * h);
    let mut lap = 0.0;
    let mut drift = 0.0;
    for i in 0..n {
        let gp = g(&[(i, h)], 0.0)?;
        let gm = g(&[(i, -h)], 0.0)?;
        lap += a.get(i, i) * (gp - 2.0 * g0 + gm) / (h * h);
        drift += b[i] * (gp - gm) / (2.0 * h);
        for j in (i + 1)..n {
            let mixed = (g(&[(i, h), (j, h)], 0.0)? - g(&[(i, h), (j, -h)], 0.0)? - g(&[(i, -h), (j, h)], 0.0)?
                + g(&[(i, -h), (j, -h)], 0.0)?)
                / (4.0 * h * h);
            lap += 2.0 * a.get(i, j) * mixed;
        }
    }
    Ok(gt - lap - drift - c * g0)
}

/// Observed convergence orders `log2(r(h_k) / r(h_{k+1}))` of the kernel residual.
pub fn residual_orders(w: &KernelWorkspace, x: &[f64], t: f64) -> Result<Vec<f64>> {
    let r: Vec<f64> = RESIDUAL_STEPS
        .iter()
        .map(|&h| kernel_residual(w, x, t, h).map(f64::abs))
        .collect::<Result<_>>()?;
    Ok(r.windows(2).map(|p| (p[0] / p[1]).log2()).collect())
}

/// The smallest observed order over `points`, reported against the nominal 2
/// (capped at 2 so that `rel_err <= 0.1` means order `>= 1.8`).
pub fn pde_residual_check(name: &str, w: &KernelWorkspace, points: &[(Vec<f64>, f64)], cfg: &SuiteConfig) -> Result<VerificationReport> {
    let mut worst = f64::INFINITY;
    for (x, t) in points {
        for o in residual_orders(w, x, *t)? {
            worst = worst.min(o);
        }
    }
    Ok(VerificationReport::equality(name, 2.0, worst.min(2.0), cfg.report(0.1)).with_details(format!("min observed order {worst:.4}")))
}

pub fn kernel_duality_check(name: &str, w: &KernelWorkspace, p: Exponent, l: &[f64], t: f64, cfg: &SuiteConfig) -> Result<VerificationReport> {
    let closed = cfg.perturbed(k_dir(w, p, l, t)?.value);
    let oracle = kernel_grad_norm_oracle(w, p.conjugate(), l, t, &cfg.quadrature)?;
    Ok(VerificationReport::equality(name, closed, oracle, cfg.report(1e-6)))
}

pub fn spacetime_duality_check(name: &str, w: &KernelWorkspace, p: Exponent, l: &[f64], t: f64, cfg: &SuiteConfig) -> Result<VerificationReport> {
    let closed = cfg.perturbed(c_dir(w, p, l, t)?.value);
    let oracle = spacetime_grad_norm_oracle(w, p.conjugate(), l, t, &cfg.quadrature)?;
    Ok(VerificationReport::equality(name, closed, oracle, cfg.report(1e-5)))
}

/// `int_0^t e^{c tau} tau^{-1/2} d tau = 2 int_0^{sqrt t} e^{c v^2} dv`.
pub fn reaction_time_integral(c: f64, t: f64) -> Result<f64> {
    let (v, _) = integrate(|v| (c * v * v).exp(), &[0.0, t.sqrt()], Tolerance::relative(1e-15))?;
    Ok(2.0 * v)
}

/// `K_inf = e^{ct} / sqrt(a pi t)` for `A = a I`.
pub fn k_inf_check(name: &str, w: &KernelWorkspace, a: f64, t: f64, cfg: &SuiteConfig) -> Result<VerificationReport> {
    let c = w.spec().reaction();
    let closed = cfg.perturbed(k_max(w, Exponent::INFINITY, t)?.value);
    let formula = (c * t).exp() / (a * PI * t).sqrt();
    Ok(VerificationReport::equality(name, closed, formula, cfg.report(1e-12)))
}

/// `C_inf = (1 / sqrt(a pi)) int_0^t e^{c tau} tau^{-1/2} d tau` for `A = a I`.
pub fn c_inf_check(name: &str, w: &KernelWorkspace, a: f64, t: f64, cfg: &SuiteConfig) -> Result<VerificationReport> {
    let c = w.spec().reaction();
    let closed = cfg.perturbed(c_max(w, Exponent::INFINITY, t)?.value);
    let formula = reaction_time_integral(c, t)? / (a * PI).sqrt();
    Ok(VerificationReport::equality(name, closed, formula, cfg.report(1e-12)))
}

/// The general-`p` formula at `p = 1e4` against the `p = inf` branch.
pub fn large_p_check(name: &str, w: &KernelWorkspace, l: &[f64], t: f64, kind: BoundKind, cfg: &SuiteConfig) -> Result<VerificationReport> {
    let big = Exponent::new(1e4)?;
    let (inf, finite) = match kind {
        BoundKind::Homogeneous => (k_dir(w, Exponent::INFINITY, l, t)?.value, k_dir(w, big, l, t)?.value),
        BoundKind::Nonhomogeneous => (c_dir(w, Exponent::INFINITY, l, t)?.value, c_dir(w, big, l, t)?.value),
    };
    Ok(VerificationReport::equality(name, cfg.perturbed(inf), finite, cfg.report(1e-3)))
}

/// Sphere integral closed form against product quadrature on `S^1` / `S^2`.
pub fn sphere_integral_check(name: &str, p_conj: f64, v: &[f64], cfg: &SuiteConfig) -> Result<VerificationReport> {
    let n = v.len();
    let closed = sphere_integral(n, p_conj, v)?;
    let tol = Tolerance::relative(1e-13);
    let oracle = match n {
        2 => {
            // angle measured from the x axis; kinks where (e, v) = 0
            let phase = v[1].atan2(v[0]);
            let k0 = phase - 0.5 * PI;
            let (s, _) = integrate(|th| (th.cos() * v[0] + th.sin() * v[1]).abs().powf(p_conj), &[k0, k0 + PI, k0 + 2.0 * PI], tol)?;
            s
        }
        3 => {
            // polar axis along v: 2 pi int_{-1}^{1} |v|^{p'} |z|^{p'} dz
            let len = norm(v);
            let (s, _) = integrate(|z| (len * z).abs().powf(p_conj), &[-1.0, 0.0, 1.0], tol)?;
            2.0 * PI * s
        }
        _ => return Err(Error::UnsupportedDimension { n, max: 3 }),
    };
    Ok(VerificationReport::equality(name, closed, oracle, cfg.report(1e-8)))
}

/// Closed forms bitwise equal across the two drifts and oracle norms within `1e-8`.
pub fn b_invariance_check(
    name: &str,
    w0: &KernelWorkspace,
    w1: &KernelWorkspace,
    query: &BoundQuery,
    cfg: &SuiteConfig,
) -> Result<VerificationReport> {
    if w0.spec().diffusion() != w1.spec().diffusion() || w0.spec().reaction() != w1.spec().reaction() {
        return Err(Error::InvalidSpec("b-invariance needs specs that differ only in b".into()));
    }
    let c0 = crate::sharp::evaluate(w0, query)?;
    let c1 = crate::sharp::evaluate(w1, query)?;
    let bitwise = c0.value.to_bits() == c1.value.to_bits();
    let l = match &query.direction {
        Direction::Unit(l) => l.clone(),
        Direction::MaxOverDirections => c0.maximizing_direction.clone().expect("maximizer"),
    };
    let pc = query.p.conjugate();
    let (o0, o1) = match query.kind {
        BoundKind::Homogeneous => (
            kernel_grad_norm_oracle(w0, pc, &l, query.t, &cfg.quadrature)?,
            kernel_grad_norm_oracle(w1, pc, &l, query.t, &cfg.quadrature)?,
        ),
        BoundKind::Nonhomogeneous => (
            spacetime_grad_norm_oracle(w0, pc, &l, query.t, &cfg.quadrature)?,
            spacetime_grad_norm_oracle(w1, pc, &l, query.t, &cfg.quadrature)?,
        ),
    };
    Ok(VerificationReport::equality(name, o0, o1, cfg.report(1e-8))
        .with_details(format!("closed forms {:e} and {:e}", c0.value, c1.value))
        .require(bitwise, "closed forms differ"))
}

/// `max |u(x, t)| <= e^{ct} sup |phi|` over the samples, within `1e-6 sup |phi|`.
pub fn max_principle_check(
    name: &str,
    w: &KernelWorkspace,
    phi: &SourceFunction,
    samples: &[(Vec<f64>, f64)],
    cfg: &SuiteConfig,
) -> Result<VerificationReport> {
    let sup = phi.lp_norm(Exponent::INFINITY)?.value;
    let c = w.spec().reaction();
    let mut worst = f64::NEG_INFINITY;
    for (x, t) in samples {
        let u = evaluate_hom(w, phi, x, *t, &cfg.quadrature)?.u;
        worst = worst.max(u.abs() / ((c * t).exp() * sup));
    }
    Ok(VerificationReport::upper_bound(name, 1.0, worst, cfg.report(1e-6)))
}

/// `f = 1`: `u = (e^{ct} - 1) / c`, or `t` when `c = 0`.
pub fn constant_source_check(name: &str, w: &KernelWorkspace, x: &[f64], t: f64, cfg: &SuiteConfig) -> Result<VerificationReport> {
    let f = SourceFunction::constant(w.dim(), 1.0)?;
    let u = evaluate_nonhom(w, &f, x, t, &cfg.quadrature)?.u;
    let c = w.spec().reaction();
    let exact = if c == 0.0 { t } else { (c * t).exp_m1() / c };
    Ok(VerificationReport::equality(name, exact, u, cfg.report(1e-9)))
}

/// Measured `|(grad u, l)|` over the best bound `min_p constant(p) ||data||_p`
/// for each `p` in `ps`; reports the largest ratio against 1.
#[allow(clippy::too_many_arguments)]
pub fn bound_domination_check(
    name: &str,
    w: &KernelWorkspace,
    data: &SourceFunction,
    kind: BoundKind,
    ps: &[Exponent],
    x: &[f64],
    t: f64,
    l: &[f64],
    cfg: &SuiteConfig,
) -> Result<VerificationReport> {
    let sol = crate::solver::evaluate(w, data, kind, x, t, &cfg.quadrature)?;
    let measured = sol.directional(l).abs();
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for &p in ps {
        let (constant, dnorm) = match kind {
            BoundKind::Homogeneous => (k_dir(w, p, l, t)?.value, data.lp_norm(p)?.value),
            BoundKind::Nonhomogeneous => (c_dir(w, p, l, t)?.value, data.lp_norm_spacetime(p, t)?.value),
        };
        let ratio = measured / (constant * dnorm);
        parts.push(format!("{}:{ratio:.6}", p_label(p)));
        worst = worst.max(ratio);
    }
    Ok(VerificationReport::upper_bound(name, 1.0, worst, cfg.report(1e-5)).with_details(parts.join(" ")))
}

fn attainment_check(name: &str, ratio: f64, cfg: &SuiteConfig) -> VerificationReport {
    VerificationReport::equality(name, 1.0, ratio, cfg.report(1e-3)).with_ratio(ratio, 0.999)
}

/// Ratios of the mollified `p = inf` source family over [`MOLLIFIER_SEQUENCE`].
pub fn mollified_ratios(w: &KernelWorkspace, x0: &[f64], t0: f64, l: &[f64], q: &QuadratureConfig) -> Result<Vec<f64>> {
    MOLLIFIER_SEQUENCE
        .iter()
        .map(|&eps| attainment_ratio_nonhom(&ExtremalSpec::new(x0.to_vec(), t0, Exponent::INFINITY, l.to_vec(), eps), w, q))
        .collect()
}

pub fn mollified_family_check(name: &str, w: &KernelWorkspace, cfg: &SuiteConfig) -> Result<VerificationReport> {
    let ratios = mollified_ratios(w, &[0.0], 1.0, &[1.0], &cfg.quadrature)?;
    let last = *ratios.last().unwrap();
    let monotone = ratios.windows(2).all(|r| r[1] > r[0]);
    Ok(VerificationReport::equality(name, 1.0, last, cfg.report(1e-2))
        .with_ratio(last, 0.99)
        .with_details(format!("eps {MOLLIFIER_SEQUENCE:?} ratios {ratios:?}"))
        .require(monotone, "ratios not increasing")
        .require(ratios.iter().all(|r| *r <= 1.0 + 1e-6), "ratio above 1"))
}

/// Finite-difference residual of the solved `u` for Gaussian data; orders against 2.
pub fn solution_residual_check(name: &str, w: &KernelWorkspace, phi: &SourceFunction, x: &[f64], t: f64, cfg: &SuiteConfig) -> Result<VerificationReport> {
    let n = w.dim();
    let q = cfg.quadrature.with_target(1e-13);
    let u = |y: &[f64], s: f64| evaluate_hom(w, phi, y, s, &q).map(|v| v.u);
    let a = w.spec().diffusion();
    let b = w.spec().drift();
    let c = w.spec().reaction();
    let mut res = Vec::new();
    for &h in &RESIDUAL_STEPS {
        let shift = |d: &[(usize, f64)]| {
            let mut y = x.to_vec();
            for &(i, v) in d {
                y[i] += v;
            }
            y
        };
        let u0 = u(x, t)?;
        let ut = (u(x, t + h)? - u(x, t - h)?) / (2.0 * h);
        let mut rhs = c * u0;
        for i in 0..n {
            let up = u(&shift(&[(i, h)]), t)?;
            let um = u(&shift(&[(i, -h)]), t)?;
            rhs += a.get(i, i) * (up - 2.0 * u0 + um) / (h * h) + b[i] * (up - um) / (2.0 * h);
            for j in (i + 1)..n {
                let m = (u(&shift(&[(i, h), (j, h)]), t)? - u(&shift(&[(i, h), (j, -h)]), t)? - u(&shift(&[(i, -h), (j, h)]), t)?
                    + u(&shift(&[(i, -h), (j, -h)]), t)?)
                    / (4.0 * h * h);
                rhs += 2.0 * a.get(i, j) * m;
            }
        }
        res.push((ut - rhs).abs());
    }
    let worst = res.windows(2).map(|r| (r[0] / r[1]).log2()).fold(f64::INFINITY, f64::min);
    Ok(VerificationReport::equality(name, 2.0, worst.min(2.0), cfg.report(0.1))
        .with_details(format!("residuals {res:?}")))
}

// ----------------------------------------------------------------------------
// the default suite

/// Group identifiers; each owns a generator stream.
mod group {
    pub const MASS: u64 = 1;
    pub const RESIDUAL: u64 = 2;
    pub const DUALITY: u64 = 3;
    pub const SPACETIME: u64 = 4;
    pub const SPECIAL: u64 = 6;
    pub const B_INVARIANCE: u64 = 7;
    pub const CONSTANT_SOURCE: u64 = 8;
    pub const DOMINATION: u64 = 9;
    pub const SPHERE: u64 = 10;
    pub const SOLUTION_RESIDUAL: u64 = 11;
    pub const MAX_PRINCIPLE: u64 = 12;
}

fn hom_exponents() -> Vec<Exponent> {
    [1.0, 1.5, 2.0, 4.0, 8.0]
        .iter()
        .map(|&p| Exponent::new(p).unwrap())
        .chain([Exponent::INFINITY])
        .collect()
}

fn random_data<R: Rng>(rng: &mut R, n: usize) -> SourceFunction {
    let center: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.5..1.5)).collect();
    let amp = rng.gen_range(0.5..2.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    match rng.gen_range(0..3) {
        0 => SourceFunction::gaussian(center, rng.gen_range(0.05..1.0), amp).unwrap(),
        1 => {
            let half: Vec<f64> = (0..n).map(|_| rng.gen_range(0.2..1.2)).collect();
            let lo = center.iter().zip(&half).map(|(c, h)| c - h).collect();
            let hi = center.iter().zip(&half).map(|(c, h)| c + h).collect();
            SourceFunction::box_indicator(lo, hi, amp).unwrap()
        }
        _ => SourceFunction::polynomial_gaussian(center, rng.gen_range(0.05..1.0), random_unit(rng, n), amp).unwrap(),
    }
}

/// All checks of the default suite, in a fixed order.
pub fn default_checks(seed: u64) -> Vec<Check> {
    let mut checks = Vec::new();

    let mut rng = group_rng(seed, group::MASS);
    for i in 0..20 {
        let n = 1 + i % 3;
        let w = workspace(random_spec(&mut rng, n));
        let t = rng.gen_range(0.1..2.0);
        let name = format!("mass_identity/n{n}/{i:02}");
        checks.push(Check::new(name.clone(), move |cfg| mass_identity_check(&name, &w, t, cfg)));
    }

    let mut rng = group_rng(seed, group::RESIDUAL);
    for i in 0..10 {
        let n = 1 + i % 3;
        let w = workspace(random_spec(&mut rng, n));
        let points: Vec<(Vec<f64>, f64)> = (0..20)
            .map(|_| {
                let t = rng.gen_range(0.5..1.5);
                // points within |xi| <= 1.5 of the kernel centre
                let xi: Vec<f64> = random_unit(&mut rng, n).into_iter().map(|v| v * rng.gen_range(0.2..1.5)).collect();
                let m = mat_vec(n, w.decomposition().sqrt().entries(), &xi);
                let x = (0..n).map(|k| -t * w.spec().drift()[k] + 2.0 * t.sqrt() * m[k]).collect();
                (x, t)
            })
            .collect();
        let name = format!("pde_residual/n{n}/{i:02}");
        checks.push(Check::new(name.clone(), move |cfg| pde_residual_check(&name, &w, &points, cfg)));
    }

    let mut rng = group_rng(seed, group::DUALITY);
    for n in 1..=2 {
        for p in [2.0, 4.0, 8.0, f64::INFINITY] {
            let p = Exponent::new(p).unwrap();
            for i in 0..5 {
                let w = workspace(random_spec(&mut rng, n));
                let l = random_unit(&mut rng, n);
                let t = rng.gen_range(0.2..2.0);
                let name = format!("kernel_duality/n{n}/{}/{i}", p_label(p));
                checks.push(Check::new(name.clone(), move |cfg| kernel_duality_check(&name, &w, p, &l, t, cfg)));
            }
        }
    }

    let mut rng = group_rng(seed, group::SPACETIME);
    for p in [4.0, 6.0, f64::INFINITY] {
        let p = Exponent::new(p).unwrap();
        for i in 0..4 {
            let w = if i == 0 { heat1() } else { workspace(random_spec(&mut rng, 1)) };
            let l = vec![if rng.gen_bool(0.5) { 1.0 } else { -1.0 }];
            let t = if i == 0 { 1.0 } else { rng.gen_range(0.2..2.0) };
            let name = format!("spacetime_duality/n1/{}/{i}", p_label(p));
            checks.push(Check::new(name.clone(), move |cfg| spacetime_duality_check(&name, &w, p, &l, t, cfg)));
        }
    }

    let mut rng = group_rng(seed, group::SPECIAL);
    for i in 0..6 {
        let n = 1 + i % 2;
        let (spec, a) = random_isotropic_spec(&mut rng, n);
        let w = workspace(spec);
        let t = rng.gen_range(0.1..3.0);
        let l = random_unit(&mut rng, n);
        let name = format!("special_cases/k_inf/{i}");
        let wk = w.clone();
        checks.push(Check::new(name.clone(), move |cfg| k_inf_check(&name, &wk, a, t, cfg)));
        let name = format!("special_cases/c_inf/{i}");
        let wc = w.clone();
        checks.push(Check::new(name.clone(), move |cfg| c_inf_check(&name, &wc, a, t, cfg)));
        let name = format!("special_cases/large_p/hom/{i}");
        let (wl, ll) = (w.clone(), l.clone());
        checks.push(Check::new(name.clone(), move |cfg| large_p_check(&name, &wl, &ll, t, BoundKind::Homogeneous, cfg)));
        let name = format!("special_cases/large_p/nonhom/{i}");
        checks.push(Check::new(name.clone(), move |cfg| large_p_check(&name, &w, &l, t, BoundKind::Nonhomogeneous, cfg)));
    }

    let mut rng = group_rng(seed, group::SPHERE);
    for n in 2..=3 {
        for i in 0..3 {
            let v: Vec<f64> = random_unit(&mut rng, n).into_iter().map(|x| x * rng.gen_range(0.5..2.0)).collect();
            let pc = rng.gen_range(1.0..3.0);
            let name = format!("sphere_integral/n{n}/{i}");
            checks.push(Check::new(name.clone(), move |cfg| sphere_integral_check(&name, pc, &v, cfg)));
        }
    }

    checks.push(Check::new("attainment/hom/p2", |cfg| {
        let spec = ExtremalSpec::new(vec![0.0], 1.0, Exponent::new(2.0)?, vec![1.0], 0.0);
        Ok(attainment_check("attainment/hom/p2", attainment_ratio_hom(&spec, &heat1(), &cfg.quadrature)?, cfg))
    }));
    checks.push(Check::new("attainment/hom/pinf", |cfg| {
        let spec = ExtremalSpec::new(vec![0.0], 1.0, Exponent::INFINITY, vec![1.0], 0.0);
        Ok(attainment_check("attainment/hom/pinf", attainment_ratio_hom(&spec, &heat1(), &cfg.quadrature)?, cfg))
    }));
    checks.push(Check::new("attainment/nonhom/p4", |cfg| {
        let spec = ExtremalSpec::new(vec![0.0], 1.0, Exponent::new(4.0)?, vec![1.0], 0.0);
        Ok(attainment_check("attainment/nonhom/p4", attainment_ratio_nonhom(&spec, &heat1(), &cfg.quadrature)?, cfg))
    }));
    checks.push(Check::new("attainment/nonhom_mollified/pinf", |cfg| {
        mollified_family_check("attainment/nonhom_mollified/pinf", &heat1(), cfg)
    }));

    let mut rng = group_rng(seed, group::B_INVARIANCE);
    for (i, n) in [1usize, 2, 1, 2].into_iter().enumerate() {
        let spec = random_spec(&mut rng, n);
        let w0 = workspace(spec.with_drift(vec![0.0; n]).unwrap());
        let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let w1 = w0.with_drift(b).unwrap();
        let l = random_unit(&mut rng, n);
        let t = rng.gen_range(0.2..2.0);
        let queries = [
            ("hom/p2", BoundKind::Homogeneous, Exponent::new(2.0).unwrap(), Direction::Unit(l.clone())),
            ("hom/pinf/max", BoundKind::Homogeneous, Exponent::INFINITY, Direction::MaxOverDirections),
            ("nonhom/pinf", BoundKind::Nonhomogeneous, Exponent::INFINITY, Direction::Unit(l.clone())),
        ];
        for (label, kind, p, direction) in queries {
            if kind == BoundKind::Nonhomogeneous && n > 1 && i > 1 {
                continue;
            }
            let query = BoundQuery { p, direction, t, kind };
            let name = format!("b_invariance/{label}/{i}");
            let (a, b) = (w0.clone(), w1.clone());
            checks.push(Check::new(name.clone(), move |cfg| b_invariance_check(&name, &a, &b, &query, cfg)));
        }
        if n == 1 {
            let name = format!("b_invariance/attainment/{i}");
            let (a, b) = (w0.clone(), w1.clone());
            checks.push(Check::new(name.clone(), move |cfg| {
                let spec = ExtremalSpec::new(vec![0.2], t, Exponent::new(2.0)?, vec![1.0], 0.0);
                let r0 = attainment_ratio_hom(&spec, &a, &cfg.quadrature)?;
                let r1 = attainment_ratio_hom(&spec, &b, &cfg.quadrature)?;
                Ok(VerificationReport::equality(&name, r0, r1, cfg.report(1e-4)))
            }));
        }
    }

    let mut rng = group_rng(seed, group::CONSTANT_SOURCE);
    for (i, c) in [-1.0, -0.3, 0.0, 0.4, 1.0].into_iter().enumerate() {
        let n = 1 + i % 2;
        let spec = random_spec(&mut rng, n).with_reaction(c).unwrap();
        let w = workspace(spec);
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let t = rng.gen_range(0.2..2.0);
        let name = format!("constant_source/{i}");
        checks.push(Check::new(name.clone(), move |cfg| constant_source_check(&name, &w, &x, t, cfg)));
    }

    let mut rng = group_rng(seed, group::DOMINATION);
    for i in 0..50 {
        let n = 1 + i % 2;
        let w = workspace(random_spec(&mut rng, n));
        let data = random_data(&mut rng, n);
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.5..1.5)).collect();
        let t = rng.gen_range(0.1..1.5);
        let l = random_unit(&mut rng, n);
        let name = format!("bound_domination/hom/{i:02}");
        let (wh, dh, xh, lh) = (w.clone(), data.clone(), x.clone(), l.clone());
        checks.push(Check::new(name.clone(), move |cfg| {
            bound_domination_check(&name, &wh, &dh, BoundKind::Homogeneous, &hom_exponents(), &xh, t, &lh, cfg)
        }));
        let name = format!("bound_domination/max_principle/{i:02}");
        let (wm, dm, xm) = (w.clone(), data.clone(), x.clone());
        checks.push(Check::new(name.clone(), move |cfg| max_principle_check(&name, &wm, &dm, &[(xm.clone(), t)], cfg)));
        if i % 5 == 0 {
            let name = format!("bound_domination/nonhom/{i:02}");
            let ps = vec![Exponent::new(n as f64 + 3.0).unwrap(), Exponent::new(2.0 * n as f64 + 6.0).unwrap(), Exponent::INFINITY];
            checks.push(Check::new(name.clone(), move |cfg| {
                bound_domination_check(&name, &w, &data, BoundKind::Nonhomogeneous, &ps, &x, t, &l, cfg)
            }));
        }
    }

    let mut rng = group_rng(seed, group::MAX_PRINCIPLE);
    for i in 0..3 {
        let n = 1 + i % 2;
        let w = workspace(random_spec(&mut rng, n));
        let samples: Vec<(Vec<f64>, f64)> = (0..8)
            .map(|_| ((0..n).map(|_| rng.gen_range(-2.0..2.0)).collect(), rng.gen_range(0.05..3.0)))
            .collect();
        let name = format!("max_principle/constant/{i}");
        let (wc, sc) = (w.clone(), samples.clone());
        checks.push(Check::new(name.clone(), move |cfg| {
            let one = SourceFunction::constant(wc.dim(), 1.0)?;
            let r = max_principle_check(&name, &wc, &one, &sc, cfg)?;
            // the bound is attained: |u| = e^{ct} at every point
            let attained = (r.oracle - 1.0).abs() <= 1e-10;
            Ok(r.require(attained, "constant data should attain the bound"))
        }));
        let name = format!("max_principle/sign/{i}");
        checks.push(Check::new(name.clone(), move |cfg| {
            let l = vec![1.0; n].into_iter().map(|v| v / (n as f64).sqrt()).collect();
            let sign = super::extremal::build_extremal_hom(
                &ExtremalSpec::new(vec![0.0; n], 1.0, Exponent::INFINITY, l, 0.0),
                &w,
                &cfg.quadrature,
            )?;
            let r = max_principle_check(&name, &w, &sign, &samples, cfg)?;
            let strict = r.oracle < 1.0 - 1e-6;
            Ok(r.require(strict, "sign data should be strictly inside the bound"))
        }));
    }

    let mut rng = group_rng(seed, group::SOLUTION_RESIDUAL);
    for i in 0..3 {
        let n = 1 + i % 2;
        let w = workspace(random_spec(&mut rng, n));
        let center: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.5..0.5)).collect();
        let phi = SourceFunction::gaussian(center, rng.gen_range(0.3..1.0), 1.0).unwrap();
        let t = rng.gen_range(0.5..1.0);
        let x: Vec<f64> = (0..n).map(|k| -t * w.spec().drift()[k] + rng.gen_range(-0.5..0.5)).collect();
        let name = format!("solution_residual/n{n}/{i}");
        checks.push(Check::new(name.clone(), move |cfg| solution_residual_check(&name, &w, &phi, &x, t, cfg)));
    }

    checks
}

/// Names of the default checks matching `filter` (all when `None`).
pub fn select(checks: Vec<Check>, filter: Option<&str>) -> Result<Vec<Check>> {
    let Some(f) = filter else {
        return Ok(checks);
    };
    let pattern = glob::Pattern::new(f).map_err(|e| Error::InvalidSpec(format!("bad check filter {f:?}: {e}")))?;
    let opts = glob::MatchOptions {
        case_sensitive: true,
        require_literal_separator: false,
        require_literal_leading_dot: false,
    };
    Ok(checks.into_iter().filter(|c| pattern.matches_with(&c.name, opts)).collect())
}

/// Runs `checks` on up to `cfg.jobs` threads; outcomes are sorted by name.
pub fn run_checks(checks: &[Check], cfg: &SuiteConfig) -> Result<SuiteOutcome> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| Error::InvalidSpec(format!("cannot start worker pool: {e}")))?;
    let mut results: Vec<(String, Result<VerificationReport>)> =
        pool.install(|| checks.par_iter().map(|c| (c.name.clone(), c.run(cfg))).collect());
    results.sort_by(|a, b| a.0.cmp(&b.0));
    let mut outcome = SuiteOutcome {
        reports: Vec::new(),
        errors: Vec::new(),
    };
    for (name, r) in results {
        match r {
            Ok(rep) => outcome.reports.push(rep),
            Err(e) => outcome.errors.push((name, e)),
        }
    }
    Ok(outcome)
}

/// The default suite with the filter of `cfg`.
pub fn run_suite(cfg: &SuiteConfig) -> Result<SuiteOutcome> {
    let checks = select(default_checks(cfg.seed), cfg.filter.as_deref())?;
    run_checks(&checks, cfg)
}
