//! The fundamental solution
//!
//! ```text
//! G(x, t) = e^{ct} / ((2 sqrt(pi t))^n det A^{1/2}) * exp(-|A^{-1/2}(x + t b)|^2 / (4t))
//! ```
//!
//! of `u_t = div(A grad u) + (b, grad u) + c u`, its spatial gradient and its
//! Fourier multiplier.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mathcore::spd::{dot, mat_vec};
use crate::mathcore::{decompose, SpdDecomposition, SpdMatrix};

/// Exponents `|xi|^2` beyond this are reported as an exact zero kernel value.
pub const EXPONENT_CUTOFF: f64 = 700.0;

/// One constant-coefficient equation on `R^n x (0, T)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    a: SpdMatrix,
    b: Vec<f64>,
    c: f64,
    horizon: f64,
}

/// JSON form `{"n": .., "A": [[..]], "b": [..], "c": .., "T": ..}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpecFile {
    pub n: usize,
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub c: f64,
    #[serde(rename = "T")]
    pub horizon: f64,
}

impl ProblemSpec {
    pub fn new(a: SpdMatrix, b: Vec<f64>, c: f64, horizon: f64) -> Result<Self> {
        let n = a.dim();
        if b.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: b.len() });
        }
        if b.iter().any(|v| !v.is_finite()) || !c.is_finite() {
            return Err(Error::InvalidSpec("drift and reaction must be finite".into()));
        }
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(Error::InvalidSpec(format!("horizon T must be positive and finite, got {horizon}")));
        }
        Ok(ProblemSpec { a, b, c, horizon })
    }

    /// The heat equation `u_t = Laplacian u` in dimension `n`.
    pub fn heat(n: usize, horizon: f64) -> Result<Self> {
        Self::new(SpdMatrix::identity(n)?, vec![0.0; n], 0.0, horizon)
    }

    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    pub fn diffusion(&self) -> &SpdMatrix {
        &self.a
    }

    pub fn drift(&self) -> &[f64] {
        &self.b
    }

    pub fn reaction(&self) -> f64 {
        self.c
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Same equation with a different drift vector.
    pub fn with_drift(&self, b: Vec<f64>) -> Result<Self> {
        Self::new(self.a.clone(), b, self.c, self.horizon)
    }

    pub fn with_reaction(&self, c: f64) -> Result<Self> {
        Self::new(self.a.clone(), self.b.clone(), c, self.horizon)
    }

    pub fn from_file(file: &ProblemSpecFile) -> Result<Self> {
        if file.a.len() != file.n {
            return Err(Error::DimensionMismatch { expected: file.n, got: file.a.len() });
        }
        Self::new(SpdMatrix::from_rows(&file.a)?, file.b.clone(), file.c, file.horizon)
    }

    pub fn to_file(&self) -> ProblemSpecFile {
        ProblemSpecFile {
            n: self.dim(),
            a: self.a.to_rows(),
            b: self.b.clone(),
            c: self.c,
            horizon: self.horizon,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ProblemSpecFile =
            serde_json::from_str(text).map_err(|e| Error::InvalidSpec(format!("problem JSON: {e}")))?;
        Self::from_file(&file)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_file()).expect("problem spec serializes")
    }
}

/// A [`ProblemSpec`] with the decomposition of `A` precomputed.
#[derive(Debug, Clone)]
pub struct KernelWorkspace {
    spec: ProblemSpec,
    dec: SpdDecomposition,
}

impl KernelWorkspace {
    pub fn new(spec: ProblemSpec) -> Result<Self> {
        let dec = decompose(spec.diffusion())?;
        Ok(KernelWorkspace { spec, dec })
    }

    pub fn spec(&self) -> &ProblemSpec {
        &self.spec
    }

    pub fn decomposition(&self) -> &SpdDecomposition {
        &self.dec
    }

    pub fn dim(&self) -> usize {
        self.spec.dim()
    }

    pub fn det_sqrt(&self) -> f64 {
        self.dec.det_sqrt()
    }

    pub fn inv_sqrt(&self) -> &SpdMatrix {
        self.dec.inv_sqrt()
    }

    pub fn inverse(&self) -> &SpdMatrix {
        self.dec.inverse()
    }

    /// Same diffusion and reaction, different drift.
    pub fn with_drift(&self, b: Vec<f64>) -> Result<Self> {
        Ok(KernelWorkspace {
            spec: self.spec.with_drift(b)?,
            dec: self.dec.clone(),
        })
    }

    fn check(&self, x: &[f64], t: f64) -> Result<()> {
        if !(t > 0.0) {
            return Err(Error::NonpositiveTime(t));
        }
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: x.len() });
        }
        Ok(())
    }

    /// `xi = A^{-1/2} (x + t b) / (2 sqrt t)`.
    pub fn scaled_coordinates(&self, x: &[f64], t: f64) -> Vec<f64> {
        let shifted: Vec<f64> = x.iter().zip(self.spec.drift()).map(|(xi, bi)| xi + t * bi).collect();
        let scale = 0.5 / t.sqrt();
        mat_vec(self.dim(), self.dec.inv_sqrt().entries(), &shifted)
            .into_iter()
            .map(|v| v * scale)
            .collect()
    }

    /// `ln` of the prefactor `e^{ct} / ((2 sqrt(pi t))^n det A^{1/2})`.
    pub fn log_prefactor(&self, t: f64) -> f64 {
        let n = self.dim() as f64;
        self.spec.reaction() * t - n * (2.0 * (std::f64::consts::PI * t).sqrt()).ln() - self.dec.log_det_sqrt()
    }

    fn value_from_scaled(&self, xi: &[f64], t: f64) -> f64 {
        let q = dot(xi, xi);
        if q > EXPONENT_CUTOFF {
            return 0.0;
        }
        (self.log_prefactor(t) - q).exp()
    }

    /// `G(x, t)`.
    pub fn eval_g(&self, x: &[f64], t: f64) -> Result<f64> {
        self.check(x, t)?;
        Ok(self.value_from_scaled(&self.scaled_coordinates(x, t), t))
    }

    /// `grad_x G(x, t) = -(1 / 2t) A^{-1} (x + t b) G(x, t)`, evaluated as
    /// `-(1 / sqrt t) A^{-1/2} xi G`.
    pub fn eval_grad_g(&self, x: &[f64], t: f64) -> Result<Vec<f64>> {
        self.check(x, t)?;
        let xi = self.scaled_coordinates(x, t);
        let g = self.value_from_scaled(&xi, t);
        let factor = -g / t.sqrt();
        Ok(mat_vec(self.dim(), self.dec.inv_sqrt().entries(), &xi)
            .into_iter()
            .map(|v| v * factor)
            .collect())
    }

    /// `(grad_x G(x, t), l)`.
    pub fn eval_directional_grad(&self, x: &[f64], t: f64, l: &[f64]) -> Result<f64> {
        if l.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: l.len() });
        }
        Ok(dot(&self.eval_grad_g(x, t)?, l))
    }

    /// The multiplier `exp((-(A xi, xi) + i (b, xi) + c) t)` acting on the
    /// Fourier transform of the initial data.
    pub fn fourier_symbol(&self, xi: &[f64], t: f64) -> Result<Complex64> {
        self.check(xi, t)?;
        let re = (self.spec.reaction() - self.spec.diffusion().quad_form(xi)) * t;
        let im = dot(self.spec.drift(), xi) * t;
        Ok(Complex64::from_polar(re.exp(), im))
    }

    /// `int G(x, t) dx = e^{ct}`.
    pub fn mass(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(Error::NonpositiveTime(t));
        }
        Ok((self.spec.reaction() * t).exp())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn ws(a: &[f64], b: Vec<f64>, c: f64) -> KernelWorkspace {
        KernelWorkspace::new(ProblemSpec::new(SpdMatrix::diagonal(a).unwrap(), b, c, 10.0).unwrap()).unwrap()
    }

    #[test]
    fn unit_heat_kernel_at_origin() {
        let w = ws(&[1.0], vec![0.0], 0.0);
        let g = w.eval_g(&[0.0], 1.0).unwrap();
        assert!((g - 0.5 / PI.sqrt()).abs() < 1e-16);
    }

    #[test]
    fn anisotropic_with_reaction() {
        // e^{-0.5} / (4 pi * 2) = 0.024133088157513477 (mpmath)
        let w = ws(&[1.0, 4.0], vec![0.0, 0.0], -0.5);
        let g = w.eval_g(&[0.0, 0.0], 1.0).unwrap();
        assert!((g - 0.024_133_088_157_513_477).abs() < 1e-17);
    }

    #[test]
    fn drift_moves_the_peak() {
        let w = ws(&[1.0], vec![1.0], 0.0);
        let t = 0.7;
        let peak = w.eval_g(&[-t], t).unwrap();
        for dx in [-1e-3, 1e-3, 0.1, -0.5] {
            assert!(w.eval_g(&[-t + dx], t).unwrap() < peak);
        }
        // symmetric about x = -tb
        let l = w.eval_g(&[-t - 0.3], t).unwrap();
        let r = w.eval_g(&[-t + 0.3], t).unwrap();
        assert!((l - r).abs() <= 1e-14 * l);
    }

    #[test]
    fn gradient_examples() {
        let w = ws(&[1.0], vec![0.0], 0.0);
        assert_eq!(w.eval_grad_g(&[0.0], 1.0).unwrap(), vec![-0.0]);
        // -(1 / (2 sqrt pi)) e^{-1} = -0.10377687435514868 (mpmath)
        let g = w.eval_grad_g(&[2.0], 1.0).unwrap()[0];
        assert!((g + 0.103_776_874_355_148_68).abs() < 1e-16);
        let fd = (w.eval_g(&[2.0 + 1e-5], 1.0).unwrap() - w.eval_g(&[2.0 - 1e-5], 1.0).unwrap()) / 2e-5;
        assert!((fd - g).abs() < 1e-8);
    }

    #[test]
    fn gradient_points_back_to_the_peak() {
        let a = SpdMatrix::from_rows(&[vec![2.0, 0.5], vec![0.5, 1.0]]).unwrap();
        let w = KernelWorkspace::new(ProblemSpec::new(a, vec![0.3, -1.0], 0.2, 5.0).unwrap()).unwrap();
        let t = 0.8;
        for x in [[1.0, 0.0], [-2.0, 1.5], [0.1, 0.9]] {
            let z: Vec<f64> = x.iter().zip(w.spec().drift()).map(|(xi, bi)| xi + t * bi).collect();
            let g = w.eval_grad_g(&x, t).unwrap();
            assert!(dot(&g, &z) < 0.0);
        }
    }

    #[test]
    fn fourier_symbol_examples() {
        let w = ws(&[1.0], vec![0.0], 0.0);
        assert_eq!(w.fourier_symbol(&[0.0], 3.0).unwrap(), Complex64::new(1.0, 0.0));
        let s = w.fourier_symbol(&[1.0], 1.0).unwrap();
        assert!((s.re - (-1f64).exp()).abs() < 1e-16 && s.im.abs() < 1e-16);
        let w = ws(&[1.0], vec![2.0], 0.0);
        let s = w.fourier_symbol(&[1.0], 1.0).unwrap();
        let e = (-1f64).exp();
        assert!((s.re - e * 2f64.cos()).abs() < 1e-16 && (s.im - e * 2f64.sin()).abs() < 1e-16);
        let w = ws(&[1.0], vec![0.0], -0.4);
        assert!((w.fourier_symbol(&[0.0], 2.0).unwrap().re - (-0.8f64).exp()).abs() < 1e-16);
    }

    #[test]
    fn mass_examples() {
        assert_eq!(ws(&[1.0], vec![0.0], 0.0).mass(2.0).unwrap(), 1.0);
        assert!((ws(&[1.0], vec![0.0], -0.5).mass(2.0).unwrap() - 0.367_879_441_171_442_3).abs() < 1e-16);
        assert_eq!(ws(&[1.0], vec![0.0], 1.0).mass(0.3).unwrap(), 0.3f64.exp());
    }

    #[test]
    fn nonpositive_time_is_rejected() {
        let w = ws(&[1.0], vec![0.0], 0.0);
        assert_eq!(w.eval_g(&[0.0], 0.0), Err(Error::NonpositiveTime(0.0)));
        assert!(w.eval_grad_g(&[0.0], -1.0).is_err());
        assert!(w.mass(0.0).is_err());
    }

    #[test]
    fn far_tail_is_exact_zero() {
        let w = ws(&[1.0], vec![0.0], 0.0);
        assert_eq!(w.eval_g(&[100.0], 0.1).unwrap(), 0.0);
    }

    #[test]
    fn drift_covariance() {
        let a = SpdMatrix::from_rows(&[vec![1.5, -0.2], vec![-0.2, 0.7]]).unwrap();
        let spec = ProblemSpec::new(a, vec![1.2, -0.4], 0.3, 5.0).unwrap();
        let with = KernelWorkspace::new(spec.clone()).unwrap();
        let without = with.with_drift(vec![0.0, 0.0]).unwrap();
        let (x, t) = ([0.25, -1.0], 0.9);
        let shifted = [x[0] + t * 1.2, x[1] - t * 0.4];
        assert_eq!(with.eval_g(&x, t).unwrap(), without.eval_g(&shifted, t).unwrap());
    }

    #[test]
    fn spec_json_round_trip() {
        let spec = ProblemSpec::from_json(r#"{"n":2,"A":[[2,0.5],[0.5,1]],"b":[0.1,-3],"c":-0.25,"T":2}"#).unwrap();
        assert_eq!(ProblemSpec::from_json(&spec.to_json()).unwrap(), spec);
        assert!(ProblemSpec::from_json(r#"{"n":2,"A":[[1,2],[2,1]],"b":[0,0],"c":0,"T":1}"#).is_err());
        assert!(ProblemSpec::from_json(r#"{"n":1,"A":[[1]],"b":[0,0],"c":0,"T":1}"#).is_err());
    }
}
