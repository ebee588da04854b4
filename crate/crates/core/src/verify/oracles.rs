//! Direct quadrature of `L^{p'}` norms of the directional kernel gradient.
//!
//! These never touch the closed forms in [`crate::sharp`]; the kernel is only
//! evaluated pointwise through [`KernelWorkspace::eval_grad_g`].

use crate::error::{Error, Result};
use crate::kernel::KernelWorkspace;
use crate::mathcore::quadrature::{integrate, integrate_nested, Tolerance};
use crate::mathcore::spd::{mat_vec, norm, orthonormal_basis_with};
use crate::mathcore::special::time_exponent;
use crate::solver::QuadratureConfig;

/// Largest dimension for the spatial oracle.
pub const ORACLE_MAX_DIM: usize = 3;
/// Largest dimension for the space-time oracle.
pub const SPACETIME_MAX_DIM: usize = 2;

fn check_direction(w: &KernelWorkspace, l: &[f64]) -> Result<()> {
    if l.len() != w.dim() {
        return Err(Error::DimensionMismatch { expected: w.dim(), got: l.len() });
    }
    let len = norm(l);
    if (len - 1.0).abs() > crate::sharp::UNIT_TOL {
        return Err(Error::InvalidDirection(len));
    }
    Ok(())
}

fn check_conjugate(p_conj: f64) -> Result<()> {
    if !(p_conj >= 1.0) || !p_conj.is_finite() {
        return Err(Error::DomainError(format!("oracle needs finite p' >= 1, got {p_conj}")));
    }
    Ok(())
}

/// `int |(grad G(y, t), l)|^{p'} dy` by nested adaptive quadrature.
///
/// Coordinates `y = -t b + 2 sqrt(t) A^{1/2} R z`, where the first column of
/// the rotation `R` is `A^{-1/2} l / |A^{-1/2} l|`, put the sign change of the
/// integrand on the plane `z_1 = 0`.
pub fn kernel_grad_power_integral(w: &KernelWorkspace, p_conj: f64, l: &[f64], t: f64, q: &QuadratureConfig) -> Result<f64> {
    let n = w.dim();
    if n > ORACLE_MAX_DIM {
        return Err(Error::UnsupportedDimension { n, max: ORACLE_MAX_DIM });
    }
    check_direction(w, l)?;
    check_conjugate(p_conj)?;
    if !(t > 0.0) {
        return Err(Error::NonpositiveTime(t));
    }
    let v = w.inv_sqrt().mul_vec(l);
    let rot = orthonormal_basis_with(&v);
    let root = w.decomposition().sqrt();
    let jac = crate::mathcore::spd::mat_mul(n, root.entries(), &rot);
    let s = 2.0 * t.sqrt();
    let b = w.spec().drift();
    let r = q.truncation_radius;
    let mut breaks = vec![vec![-r, 0.0, r]];
    breaks.extend((1..n).map(|_| vec![-r, r]));
    let mut y = vec![0.0; n];
    let (value, _) = integrate_nested(
        |z| {
            let mapped = mat_vec(n, &jac, z);
            for i in 0..n {
                y[i] = -t * b[i] + s * mapped[i];
            }
            let g = w.eval_grad_g(&y, t).unwrap_or_else(|_| vec![0.0; n]);
            let k: f64 = g.iter().zip(l).map(|(a, b)| a * b).sum();
            k.abs().powf(p_conj)
        },
        &breaks,
        Tolerance::relative(q.target_rel_err * 0.01),
    )?;
    Ok(value * s.powi(n as i32) * w.det_sqrt())
}

/// `(int |(grad G(y, t), l)|^{p'} dy)^{1/p'}`.
pub fn kernel_grad_norm_oracle(w: &KernelWorkspace, p_conj: f64, l: &[f64], t: f64, q: &QuadratureConfig) -> Result<f64> {
    Ok(kernel_grad_power_integral(w, p_conj, l, t, q)?.powf(1.0 / p_conj))
}

/// `int_0^t int |(grad G(y, tau), l)|^{p'} dy dtau`.
///
/// The time integrand behaves like `tau^{-s}`, `s = (n(p'-1) + p')/2`; the
/// substitution `tau = t w^{1/(1-s)}` makes it bounded on `w in [0, 1]`.
pub fn spacetime_grad_power_integral(w: &KernelWorkspace, p_conj: f64, l: &[f64], t: f64, q: &QuadratureConfig) -> Result<f64> {
    let n = w.dim();
    if n > SPACETIME_MAX_DIM {
        return Err(Error::UnsupportedDimension { n, max: SPACETIME_MAX_DIM });
    }
    check_direction(w, l)?;
    check_conjugate(p_conj)?;
    if !(t > 0.0) {
        return Err(Error::NonpositiveTime(t));
    }
    let s = time_exponent(n, p_conj);
    if s >= 1.0 - 1e-12 {
        return Err(Error::DivergentIntegral { exponent: s });
    }
    let e = 1.0 / (1.0 - s);
    let mut failure = None;
    let (value, _) = integrate(
        |v| {
            if v <= 0.0 || failure.is_some() {
                return 0.0;
            }
            let tau = t * v.powf(e);
            let jac = t * e * v.powf(e - 1.0);
            match kernel_grad_power_integral(w, p_conj, l, tau, q) {
                Ok(m) => m * jac,
                Err(err) => {
                    failure = Some(err);
                    0.0
                }
            }
        },
        &[0.0, 0.5, 1.0],
        Tolerance::relative(q.target_rel_err * 0.1),
    )?;
    if let Some(err) = failure {
        return Err(err);
    }
    Ok(value)
}

/// `(int_0^t int |(grad G(y, tau), l)|^{p'} dy dtau)^{1/p'}`.
pub fn spacetime_grad_norm_oracle(w: &KernelWorkspace, p_conj: f64, l: &[f64], t: f64, q: &QuadratureConfig) -> Result<f64> {
    Ok(spacetime_grad_power_integral(w, p_conj, l, t, q)?.powf(1.0 / p_conj))
}
