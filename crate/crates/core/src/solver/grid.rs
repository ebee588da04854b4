//! Uniformly sampled data with multilinear interpolation.
//!
//! Binary layout, all little-endian:
//!
//! ```text
//! b"PBGR"  version: u32  n: u32  dims: n x u32  origin: n x f64  spacing: n x f64
//! samples: prod(dims) x f64, row-major (last index fastest)
//! ```
//!
//! Outside the sample box the data are zero. Holder continuity, which the
//! Duhamel formula needs, is the user's responsibility.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::sharp::Exponent;

use super::source::NormEstimate;

pub const GRID_MAGIC: &[u8; 4] = b"PBGR";
pub const GRID_VERSION: u32 = 1;
/// Largest grid dimension the solver supports.
pub const GRID_MAX_DIM: usize = 3;
/// Cap on sample evaluations per refinement level.
pub const MAX_GRID_EVALS: usize = 1 << 24;

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    dims: Vec<usize>,
    origin: Vec<f64>,
    spacing: Vec<f64>,
    values: Vec<f64>,
}

impl Grid {
    pub fn new(dims: Vec<usize>, origin: Vec<f64>, spacing: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let n = dims.len();
        if n == 0 || n > GRID_MAX_DIM {
            return Err(Error::UnsupportedDimension { n, max: GRID_MAX_DIM });
        }
        if origin.len() != n || spacing.len() != n {
            return Err(Error::GridFormat("origin/spacing length differs from n".into()));
        }
        if dims.iter().any(|&d| d < 2) {
            return Err(Error::GridFormat("every axis needs at least two samples".into()));
        }
        if origin.iter().any(|v| !v.is_finite()) || spacing.iter().any(|h| !(*h > 0.0) || !h.is_finite()) {
            return Err(Error::GridFormat("origin must be finite and spacing positive".into()));
        }
        let count = dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .ok_or_else(|| Error::GridFormat("sample count overflows".into()))?;
        if values.len() != count {
            return Err(Error::GridFormat(format!("expected {count} samples, found {}", values.len())));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::GridFormat("non-finite sample".into()));
        }
        Ok(Grid {
            dims,
            origin,
            spacing,
            values,
        })
    }

    /// Samples `f` at the grid nodes.
    pub fn sample<F: Fn(&[f64]) -> f64>(dims: Vec<usize>, origin: Vec<f64>, spacing: Vec<f64>, f: F) -> Result<Self> {
        let n = dims.len();
        let count: usize = dims.iter().product();
        let mut values = Vec::with_capacity(count);
        let mut idx = vec![0usize; n];
        let mut y = vec![0.0; n];
        for _ in 0..count {
            for i in 0..n {
                y[i] = origin[i] + idx[i] as f64 * spacing[i];
            }
            values.push(f(&y));
            for i in (0..n).rev() {
                idx[i] += 1;
                if idx[i] < dims[i] {
                    break;
                }
                idx[i] = 0;
            }
        }
        Grid::new(dims, origin, spacing, values)
    }

    pub fn dim(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn support(&self) -> (Vec<f64>, Vec<f64>) {
        let hi = (0..self.dim())
            .map(|i| self.origin[i] + (self.dims[i] - 1) as f64 * self.spacing[i])
            .collect();
        (self.origin.clone(), hi)
    }

    pub fn sup_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    fn flat(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.dims).fold(0, |acc, (i, d)| acc * d + i)
    }

    /// Grid nodes inside `[lo, hi]`, or `None` when there are more than `limit`.
    pub(crate) fn nodes_in(&self, lo: &[f64], hi: &[f64], limit: usize) -> Option<Vec<Vec<f64>>> {
        let n = self.dim();
        let mut ranges = Vec::with_capacity(n);
        let mut count = 1usize;
        for i in 0..n {
            let a = ((lo[i] - self.origin[i]) / self.spacing[i]).ceil().max(0.0);
            let b = ((hi[i] - self.origin[i]) / self.spacing[i]).floor().min((self.dims[i] - 1) as f64);
            if a > b {
                return Some(Vec::new());
            }
            let (a, b) = (a as usize, b as usize);
            count = count.saturating_mul(b - a + 1);
            if count > limit {
                return None;
            }
            ranges.push((a, b));
        }
        let mut out = Vec::with_capacity(count);
        let mut k: Vec<usize> = ranges.iter().map(|r| r.0).collect();
        for _ in 0..count {
            out.push((0..n).map(|i| self.origin[i] + k[i] as f64 * self.spacing[i]).collect());
            for i in (0..n).rev() {
                k[i] += 1;
                if k[i] <= ranges[i].1 {
                    break;
                }
                k[i] = ranges[i].0;
            }
        }
        Some(out)
    }

    /// Parameters `s` in `[s_lo, s_hi]` where `base + s dir` crosses a grid plane.
    pub(crate) fn plane_crossings(&self, base: &[f64], dir: &[f64], s_lo: f64, s_hi: f64) -> Vec<f64> {
        let mut out = Vec::new();
        for i in 0..self.dim() {
            if dir[i] == 0.0 {
                continue;
            }
            let (y0, y1) = (base[i] + s_lo * dir[i], base[i] + s_hi * dir[i]);
            let (ya, yb) = (y0.min(y1), y0.max(y1));
            let h = self.spacing[i];
            let a = ((ya - self.origin[i]) / h).ceil().max(0.0);
            let b = ((yb - self.origin[i]) / h).floor().min((self.dims[i] - 1) as f64);
            let mut k = a;
            while k <= b {
                out.push((self.origin[i] + k * h - base[i]) / dir[i]);
                k += 1.0;
            }
        }
        out
    }

    /// Multilinear interpolation; zero outside the sample box.
    pub fn interpolate(&self, y: &[f64]) -> f64 {
        let n = self.dim();
        let mut base = [0usize; GRID_MAX_DIM];
        let mut frac = [0.0f64; GRID_MAX_DIM];
        for i in 0..n {
            let s = (y[i] - self.origin[i]) / self.spacing[i];
            let last = (self.dims[i] - 1) as f64;
            if !(s >= 0.0 && s <= last) {
                return 0.0;
            }
            let cell = (s.floor() as usize).min(self.dims[i] - 2);
            base[i] = cell;
            frac[i] = s - cell as f64;
        }
        let mut acc = 0.0;
        let mut idx = [0usize; GRID_MAX_DIM];
        for corner in 0..(1usize << n) {
            let mut w = 1.0;
            for i in 0..n {
                let up = corner >> i & 1 == 1;
                idx[i] = base[i] + up as usize;
                w *= if up { frac[i] } else { 1.0 - frac[i] };
            }
            if w != 0.0 {
                acc += w * self.values[self.flat(&idx[..n])];
            }
        }
        acc
    }

    /// Trapezoid sum at `m` sub-samples per cell over the part of the
    /// sample box inside `[lo, hi]`. `f(y, phi(y), out)` accumulates into `out`.
    fn trapezoid<F: Fn(&[f64], f64, &mut [f64])>(&self, m: usize, lo: &[f64], hi: &[f64], dim: usize, f: &F) -> Result<Vec<f64>> {
        let n = self.dim();
        let mut kmin = vec![0usize; n];
        let mut kmax = vec![0usize; n];
        let mut total = 1usize;
        for i in 0..n {
            let h = self.spacing[i] / m as f64;
            let last = (self.dims[i] - 1) * m;
            let a = ((lo[i] - self.origin[i]) / h).ceil().max(0.0);
            let b = ((hi[i] - self.origin[i]) / h).floor().min(last as f64);
            if a > b {
                return Ok(vec![0.0; dim]);
            }
            kmin[i] = a as usize;
            kmax[i] = b as usize;
            total = total.saturating_mul(kmax[i] - kmin[i] + 1);
        }
        if total > MAX_GRID_EVALS {
            return Err(Error::UnsupportedData(format!(
                "grid quadrature needs {total} samples at refinement {m}, limit {MAX_GRID_EVALS}"
            )));
        }
        let cell: f64 = (0..n).map(|i| self.spacing[i] / m as f64).product();
        let mut acc = vec![0.0; dim];
        let mut out = vec![0.0; dim];
        let mut k = kmin.clone();
        let mut y = vec![0.0; n];
        for _ in 0..total {
            let mut w = cell;
            for i in 0..n {
                y[i] = self.origin[i] + k[i] as f64 * self.spacing[i] / m as f64;
                if (k[i] == kmin[i] || k[i] == kmax[i]) && kmin[i] != kmax[i] {
                    w *= 0.5;
                }
            }
            let phi = self.interpolate(&y);
            out.iter_mut().for_each(|o| *o = 0.0);
            f(&y, phi, &mut out);
            for (a, o) in acc.iter_mut().zip(&out) {
                *a += w * o;
            }
            for i in (0..n).rev() {
                k[i] += 1;
                if k[i] <= kmax[i] {
                    break;
                }
                k[i] = kmin[i];
            }
        }
        Ok(acc)
    }

    /// Romberg integration over the sample box intersected with `[lo, hi]`.
    ///
    /// Every refinement keeps the sample nodes, so the integrand is smooth
    /// between trapezoid nodes and the Euler-Maclaurin expansion holds per
    /// cell. Starts at `start` sub-samples per cell and refines until
    /// successive diagonal entries agree to `rel * max |value|`.
    pub(crate) fn integrate<F: Fn(&[f64], f64, &mut [f64])>(
        &self,
        lo: &[f64],
        hi: &[f64],
        dim: usize,
        rel: f64,
        start: usize,
        f: F,
    ) -> Result<(Vec<f64>, f64)> {
        let mut m = start.max(1);
        let mut row = vec![self.trapezoid(m, lo, hi, dim, &f)?];
        let mut last_err = f64::INFINITY;
        loop {
            m *= 2;
            let fine = match self.trapezoid(m, lo, hi, dim, &f) {
                Ok(v) => v,
                // refinement budget exhausted
                Err(Error::UnsupportedData(_)) => {
                    let best = row.last().expect("non-empty row");
                    let scale = best.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
                    return Err(Error::QuadratureFailure {
                        estimate: last_err,
                        target: rel * scale,
                    });
                }
                Err(e) => return Err(e),
            };
            let mut next = vec![fine];
            let mut factor = 1.0;
            for prev in &row {
                factor *= 4.0;
                let cur = next.last().expect("non-empty row");
                let extrap: Vec<f64> = cur.iter().zip(prev).map(|(c, p)| c + (c - p) / (factor - 1.0)).collect();
                next.push(extrap);
            }
            let best = next.last().expect("non-empty row");
            let previous = row.last().expect("non-empty row");
            let err = best.iter().zip(previous).fold(0.0_f64, |a, (b, p)| a.max((b - p).abs()));
            let scale = best.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
            if err <= rel * scale || scale == 0.0 {
                return Ok((best.clone(), err));
            }
            last_err = err;
            row = next;
        }
    }

    /// `||phi||_p` of the interpolant.
    ///
    /// `p = inf` is the largest sample (exact for multilinear data). Finite
    /// `p` uses [`Grid::integrate`] with relative target `1e-10`.
    pub fn lp_norm(&self, p: Exponent) -> Result<NormEstimate> {
        if p.is_infinite() {
            return Ok(NormEstimate {
                value: self.sup_abs(),
                error: 0.0,
            });
        }
        let pv = p.value();
        let (lo, hi) = self.support();
        let (v, err) = self.integrate(&lo, &hi, 1, 1e-10, 1, |_, phi, out| out[0] = phi.abs().powf(pv))?;
        let integral = v[0].max(0.0);
        if integral == 0.0 {
            return Ok(NormEstimate { value: 0.0, error: 0.0 });
        }
        let value = integral.powf(1.0 / pv);
        Ok(NormEstimate {
            value,
            error: value / (pv * integral) * err,
        })
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let n = self.dim();
        let mut out = Vec::with_capacity(12 + 20 * n + 8 * self.values.len());
        out.extend_from_slice(GRID_MAGIC);
        out.extend_from_slice(&GRID_VERSION.to_le_bytes());
        out.extend_from_slice(&(n as u32).to_le_bytes());
        for &d in &self.dims {
            out.extend_from_slice(&(d as u32).to_le_bytes());
        }
        for v in self.origin.iter().chain(&self.spacing).chain(&self.values) {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Cursor { bytes, pos: 0 };
        if r.take(4)? != GRID_MAGIC {
            return Err(Error::GridFormat("bad magic (expected PBGR)".into()));
        }
        let version = r.u32()?;
        if version != GRID_VERSION {
            return Err(Error::GridFormat(format!("unsupported version {version}")));
        }
        let n = r.u32()? as usize;
        if n == 0 || n > GRID_MAX_DIM {
            return Err(Error::GridFormat(format!("dimension {n} outside 1..={GRID_MAX_DIM}")));
        }
        let dims = (0..n).map(|_| r.u32().map(|d| d as usize)).collect::<Result<Vec<_>>>()?;
        let origin = (0..n).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
        let spacing = (0..n).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
        let count = dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .ok_or_else(|| Error::GridFormat("sample count overflows".into()))?;
        let remaining = bytes.len() - r.pos;
        if remaining != count.saturating_mul(8) {
            return Err(Error::GridFormat(format!(
                "expected {count} samples ({} bytes), found {remaining} bytes",
                count.saturating_mul(8)
            )));
        }
        let values = (0..count).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
        Grid::new(dims, origin, spacing, values)
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(&self.to_bytes())?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        Grid::from_bytes(&bytes)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Grid::from_bytes(&fs::read(path)?)
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, k: usize) -> Result<&'a [u8]> {
        if self.pos + k > self.bytes.len() {
            return Err(Error::GridFormat("truncated header".into()));
        }
        let s = &self.bytes[self.pos..self.pos + k];
        self.pos += k;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}
