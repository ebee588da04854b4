//! Quadrature rules: Gauss-Hermite and Gauss-Legendre nodes, and a globally
//! adaptive Gauss-Kronrod (10/21) integrator for vector-valued integrands.

use std::collections::{BinaryHeap, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};

/// Nodes and weights of a one-dimensional rule, nodes ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

fn cached(cache: &'static OnceLock<Mutex<HashMap<usize, Arc<Rule>>>>, order: usize, build: fn(usize) -> Rule) -> Arc<Rule> {
    let map = cache.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(r) = map.lock().expect("rule cache poisoned").get(&order) {
        return Arc::clone(r);
    }
    let rule = Arc::new(build(order));
    map.lock()
        .expect("rule cache poisoned")
        .entry(order)
        .or_insert_with(|| Arc::clone(&rule));
    rule
}

/// Gauss-Hermite rule for the weight `exp(-x^2)` on the real line.
pub fn gauss_hermite(order: usize) -> Arc<Rule> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Rule>>>> = OnceLock::new();
    cached(&CACHE, order, build_gauss_hermite)
}

/// Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(order: usize) -> Arc<Rule> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Rule>>>> = OnceLock::new();
    cached(&CACHE, order, build_gauss_legendre)
}

fn build_gauss_hermite(n: usize) -> Rule {
    assert!(n >= 1, "Gauss-Hermite order must be positive");
    let pim4 = std::f64::consts::PI.powf(-0.25);
    let m = n.div_ceil(2);
    let nf = n as f64;
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut z = 0.0_f64;
    for i in 0..m {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-0.16667),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..100 {
            // orthonormal Hermite recurrence
            let mut p1 = pim4;
            let mut p2 = 0.0;
            for j in 1..=n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    if n % 2 == 1 {
        x[m - 1] = 0.0;
    }
    let mut pairs: Vec<(f64, f64)> = x.into_iter().zip(w).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    Rule {
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1).collect(),
    }
}

fn build_gauss_legendre(n: usize) -> Rule {
    assert!(n >= 1, "Gauss-Legendre order must be positive");
    let nf = n as f64;
    let m = n.div_ceil(2);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = 1.0;
            let mut p2 = 0.0;
            for j in 1..=n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = ((2.0 * jf - 1.0) * z * p2 - (jf - 1.0) * p3) / jf;
            }
            pp = nf * (z * p1 - p2) / (z * z - 1.0);
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        w[n - 1 - i] = w[i];
    }
    if n % 2 == 1 {
        x[m - 1] = 0.0;
    }
    Rule { nodes: x, weights: w }
}

// Kronrod 21-point abscissae on [0, 1], the odd entries are the Gauss 10-point nodes.
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689,
    0.973_906_528_517_171_720_077_964_012_084,
    0.930_157_491_355_708_226_001_207_180_060,
    0.865_063_366_688_984_510_732_096_688_423,
    0.780_817_726_586_416_897_063_717_578_345,
    0.679_409_568_299_024_406_234_327_365_115,
    0.562_757_134_668_604_683_339_000_099_273,
    0.433_395_394_129_247_190_799_265_943_166,
    0.294_392_862_701_460_198_131_126_603_104,
    0.148_874_338_981_631_210_884_826_001_130,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062,
    0.032_558_162_307_964_727_478_818_972_459,
    0.054_755_896_574_351_996_031_381_300_245,
    0.075_039_674_810_919_952_767_043_140_916,
    0.093_125_454_583_697_605_535_065_465_083,
    0.109_387_158_802_297_641_899_210_590_326,
    0.123_491_976_262_065_851_077_208_068_520,
    0.134_709_217_311_473_325_928_054_001_772,
    0.142_775_938_577_060_080_797_094_273_139,
    0.147_739_104_901_338_491_374_841_515_972,
    0.149_445_554_002_916_905_664_936_468_390,
];

const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893,
    0.149_451_349_150_580_593_145_776_339_658,
    0.219_086_362_515_982_043_995_534_934_228,
    0.269_266_719_309_996_355_091_226_921_569,
    0.295_524_224_714_752_870_173_892_994_651,
];

const ROUNDOFF_FLOOR: f64 = 100.0 * f64::EPSILON;

/// Stopping rule for [`integrate_vec`]: converged when the summed error
/// estimate is at most `max(abs, rel * max_i |value_i|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Tolerance {
    pub fn relative(rel: f64) -> Self {
        Tolerance {
            abs: 0.0,
            rel,
            max_intervals: 2000,
        }
    }

    pub fn with_abs(mut self, abs: f64) -> Self {
        self.abs = abs;
        self
    }

    pub fn with_max_intervals(mut self, max_intervals: usize) -> Self {
        self.max_intervals = max_intervals;
        self
    }
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    pub value: Vec<f64>,
    pub error: f64,
    pub evaluations: usize,
}

struct Interval {
    a: f64,
    b: f64,
    value: Vec<f64>,
    error: f64,
    absint: f64,
}

#[derive(PartialEq)]
struct Key(f64, usize);

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    // largest error first, lowest index on ties
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0).then(other.1.cmp(&self.1))
    }
}

/// Returns the Kronrod values, the error estimate and `max_i int |f_i|`.
fn gk21<F: FnMut(f64, &mut [f64])>(f: &mut F, a: f64, b: f64, dim: usize, buf: &mut Vec<Vec<f64>>) -> (Vec<f64>, f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    buf.resize_with(21, Vec::new);
    for v in buf.iter_mut() {
        v.clear();
        v.resize(dim, 0.0);
    }
    f(center, &mut buf[0]);
    for j in 0..10 {
        let dx = half * XGK[j];
        let (lo, hi) = buf.split_at_mut(2 * j + 2);
        f(center - dx, &mut lo[2 * j + 1]);
        f(center + dx, &mut hi[0]);
    }
    let mut kron = vec![0.0; dim];
    let mut worst = 0.0_f64;
    let mut absint = 0.0_f64;
    for c in 0..dim {
        let fc = buf[0][c];
        let mut resk = WGK[10] * fc;
        let mut resg = 0.0;
        let mut resabs = WGK[10] * fc.abs();
        for j in 0..10 {
            let (f1, f2) = (buf[2 * j + 1][c], buf[2 * j + 2][c]);
            resk += WGK[j] * (f1 + f2);
            resabs += WGK[j] * (f1.abs() + f2.abs());
            if j % 2 == 1 {
                resg += WG[j / 2] * (f1 + f2);
            }
        }
        let mean = 0.5 * resk;
        let mut resasc = WGK[10] * (fc - mean).abs();
        for j in 0..10 {
            resasc += WGK[j] * ((buf[2 * j + 1][c] - mean).abs() + (buf[2 * j + 2][c] - mean).abs());
        }
        let (resk, resabs, resasc) = (resk * half, resabs * half.abs(), resasc * half.abs());
        let mut err = (resk - resg * half).abs();
        if resasc != 0.0 && err != 0.0 {
            err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
        }
        if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
            err = err.max(50.0 * f64::EPSILON * resabs);
        }
        kron[c] = resk;
        worst = worst.max(err);
        absint = absint.max(resabs);
    }
    (kron, worst, absint)
}

/// Adaptive Gauss-Kronrod integration of a vector-valued integrand over the
/// union of the consecutive intervals given by `breaks` (ascending, at least
/// two points).
///
/// `f(x, out)` must write `dim` values into `out`. Intervals are bisected in
/// order of decreasing error estimate; ties are broken by creation order so
/// the result is deterministic.
pub fn integrate_vec<F: FnMut(f64, &mut [f64])>(mut f: F, dim: usize, breaks: &[f64], tol: Tolerance) -> Result<Estimate> {
    assert!(breaks.len() >= 2, "need at least one interval");
    let mut buf = Vec::new();
    let mut intervals: Vec<Interval> = Vec::new();
    let mut heap = BinaryHeap::new();
    let mut evaluations = 0;
    for w in breaks.windows(2) {
        if w[1] <= w[0] {
            continue;
        }
        let (value, error, absint) = gk21(&mut f, w[0], w[1], dim, &mut buf);
        evaluations += 21;
        heap.push(Key(error, intervals.len()));
        intervals.push(Interval {
            a: w[0],
            b: w[1],
            value,
            error,
            absint,
        });
    }

    let totals = |intervals: &[Interval]| {
        let mut value = vec![0.0; dim];
        let mut error = 0.0;
        let mut absint = 0.0;
        for iv in intervals {
            for (v, x) in value.iter_mut().zip(&iv.value) {
                *v += x;
            }
            error += iv.error;
            absint += iv.absint;
        }
        (value, error, absint)
    };

    loop {
        let (value, error, absint) = totals(&intervals);
        let scale = value.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        // requests below the rounding floor of the summed rule are unattainable
        let target = tol.abs.max(tol.rel * scale).max(ROUNDOFF_FLOOR * absint);
        if error <= target {
            return Ok(Estimate { value, error, evaluations });
        }
        if intervals.len() >= tol.max_intervals {
            return Err(Error::QuadratureFailure { estimate: error, target });
        }
        let Some(Key(_, idx)) = heap.pop() else {
            return Err(Error::QuadratureFailure { estimate: error, target });
        };
        let (a, b) = (intervals[idx].a, intervals[idx].b);
        let mid = 0.5 * (a + b);
        if !(mid > a && mid < b) || (b - a) <= 4.0 * f64::EPSILON * a.abs().max(b.abs()) {
            // cannot resolve further at double precision
            return Err(Error::QuadratureFailure { estimate: error, target });
        }
        let (v1, e1, s1) = gk21(&mut f, a, mid, dim, &mut buf);
        let (v2, e2, s2) = gk21(&mut f, mid, b, dim, &mut buf);
        evaluations += 42;
        intervals[idx] = Interval {
            a,
            b: mid,
            value: v1,
            error: e1,
            absint: s1,
        };
        heap.push(Key(e1, idx));
        heap.push(Key(e2, intervals.len()));
        intervals.push(Interval {
            a: mid,
            b,
            value: v2,
            error: e2,
            absint: s2,
        });
    }
}

/// Scalar convenience wrapper around [`integrate_vec`]; returns `(value, error)`.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, breaks: &[f64], tol: Tolerance) -> Result<(f64, f64)> {
    let est = integrate_vec(|x, out| out[0] = f(x), 1, breaks, tol)?;
    Ok((est.value[0], est.error))
}

/// Iterated adaptive integration over a box given per-axis breakpoints.
///
/// `breaks[k]` splits axis `k`; the last axis is innermost. Inner integrals
/// are requested to a tenth of `tol.rel`. Returns `(value, error)`, where the
/// error adds the outer estimate to the largest inner estimate times the
/// outer span.
pub fn integrate_nested<F: FnMut(&[f64]) -> f64>(mut f: F, breaks: &[Vec<f64>], tol: Tolerance) -> Result<(f64, f64)> {
    assert!(!breaks.is_empty(), "need at least one axis");
    let mut point = vec![0.0; breaks.len()];
    nested_level(&mut f, breaks, 0, &mut point, tol)
}

fn nested_level(
    f: &mut dyn FnMut(&[f64]) -> f64,
    breaks: &[Vec<f64>],
    k: usize,
    point: &mut Vec<f64>,
    tol: Tolerance,
) -> Result<(f64, f64)> {
    if k + 1 == breaks.len() {
        return integrate(
            |s| {
                point[k] = s;
                f(point)
            },
            &breaks[k],
            tol,
        );
    }
    let inner_tol = Tolerance {
        rel: tol.rel * 0.1,
        abs: tol.abs * 0.1,
        ..tol
    };
    let mut failure = None;
    let mut inner_err = 0.0_f64;
    let (value, err) = integrate(
        |s| {
            if failure.is_some() {
                return 0.0;
            }
            point[k] = s;
            match nested_level(f, breaks, k + 1, point, inner_tol) {
                Ok((v, e)) => {
                    inner_err = inner_err.max(e);
                    v
                }
                Err(e) => {
                    failure = Some(e);
                    0.0
                }
            }
        },
        &breaks[k],
        tol,
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    let span = breaks[k][breaks[k].len() - 1] - breaks[k][0];
    Ok((value, err + span * inner_err))
}

/// Composite Gauss-Legendre sum over the consecutive intervals in `breaks`.
pub fn composite_gauss_legendre<F: FnMut(f64) -> f64>(mut f: F, breaks: &[f64], order: usize) -> f64 {
    let rule = gauss_legendre(order);
    let mut sum = 0.0;
    for w in breaks.windows(2) {
        let c = 0.5 * (w[0] + w[1]);
        let h = 0.5 * (w[1] - w[0]);
        let mut s = 0.0;
        for (x, wt) in rule.nodes.iter().zip(&rule.weights) {
            s += wt * f(c + h * x);
        }
        sum += h * s;
    }
    sum
}
