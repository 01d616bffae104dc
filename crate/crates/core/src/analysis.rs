//! Boundary extraction: correlation ratios, Binder cumulants, modified-Akima
//! interpolation, curve crossings, finite-size power-law fits and label bisection.

use alloc::vec::Vec;

use crate::error::{precondition, Error, Result};
#[cfg(not(feature = "std"))]
use num_traits::Float;

/// Sampled curve for one system size.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub size_label: usize,
}

impl Curve {
    pub fn new(x: Vec<f64>, y: Vec<f64>, size_label: usize) -> Result<Self> {
        if x.len() != y.len() || x.len() < 4 {
            return Err(Error::InvalidParameter("curve needs equal-length x and y with at least 4 points"));
        }
        if x.iter().chain(&y).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("curve values must be finite"));
        }
        if x.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter("curve x must be strictly ascending"));
        }
        Ok(Curve { x, y, size_label })
    }

    pub fn x_min(&self) -> f64 {
        self.x[0]
    }

    pub fn x_max(&self) -> f64 {
        self.x[self.x.len() - 1]
    }

    /// Knot slopes of the modified-Akima interpolant.
    fn slopes(&self) -> Vec<f64> {
        let n = self.x.len();
        // secants padded with two linear extrapolations on each side: e[k] = δ_{k−2}
        let mut e = Vec::with_capacity(n + 3);
        e.extend([0.0, 0.0]);
        for i in 0..n - 1 {
            e.push((self.y[i + 1] - self.y[i]) / (self.x[i + 1] - self.x[i]));
        }
        e.push(2.0 * e[n] - e[n - 1]);
        e.push(2.0 * e[n + 1] - e[n]);
        e[1] = 2.0 * e[2] - e[3];
        e[0] = 2.0 * e[1] - e[2];
        let w: Vec<f64> = (0..n + 2).map(|k| (e[k + 1] - e[k]).abs() + 0.5 * (e[k + 1] + e[k]).abs()).collect();
        (0..n)
            .map(|i| {
                let (w1, w2) = (w[i], w[i + 2]);
                if w1 + w2 == 0.0 {
                    0.0
                } else {
                    (w2 * e[i + 1] + w1 * e[i + 2]) / (w1 + w2)
                }
            })
            .collect()
    }
}

/// Piecewise-cubic modified-Akima interpolant of a curve.
#[derive(Debug, Clone)]
pub struct Makima<'a> {
    curve: &'a Curve,
    slopes: Vec<f64>,
}

impl<'a> Makima<'a> {
    pub fn new(curve: &'a Curve) -> Self {
        Makima { curve, slopes: curve.slopes() }
    }

    pub fn eval(&self, xq: f64) -> Result<f64> {
        let c = self.curve;
        let (lo, hi) = (c.x_min(), c.x_max());
        if !(xq >= lo && xq <= hi) {
            return Err(Error::OutOfRange { x: xq, lo, hi });
        }
        let i = match c.x.binary_search_by(|v| v.partial_cmp(&xq).unwrap_or(core::cmp::Ordering::Less)) {
            Ok(k) => return Ok(c.y[k]),
            Err(k) => k - 1,
        };
        let h = c.x[i + 1] - c.x[i];
        let t = (xq - c.x[i]) / h;
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        Ok(h00 * c.y[i] + h10 * h * self.slopes[i] + h01 * c.y[i + 1] + h11 * h * self.slopes[i + 1])
    }
}

pub fn makima_interpolate(curve: &Curve, xq: f64) -> Result<f64> {
    Makima::new(curve).eval(xq)
}

/// R = C(L/2)/C(L/4) for a distance correlator.
pub fn correlation_ratio(corr: impl Fn(usize) -> f64, sites: usize) -> Result<f64> {
    if sites == 0 || sites % 4 != 0 {
        return Err(Error::InvalidParameter("L must be divisible by 4"));
    }
    let den = corr(sites / 4);
    if den.abs() <= 1e-14 {
        return Err(Error::Degenerate("correlator vanishes at L/4"));
    }
    Ok(corr(sites / 2) / den)
}

/// B = (3 − ⟨φ⁴⟩/⟨φ²⟩²)/2.
pub fn binder_from_moments(phi2: f64, phi4: f64) -> Result<f64> {
    if !(phi2 > 0.0) {
        return Err(Error::Degenerate("⟨φ²⟩ must be positive"));
    }
    Ok(0.5 * (3.0 - phi4 / (phi2 * phi2)))
}

pub const DEFAULT_ZERO_TOL: f64 = 1e-6;
const SUBSAMPLES: usize = 64;
const BISECTIONS: usize = 200;

fn bisect_root(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let fa_neg = f(a) < 0.0;
    for _ in 0..BISECTIONS {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if (f(m) < 0.0) == fa_neg {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

fn dense_grid(lo: f64, hi: f64, knots: &[f64]) -> Vec<f64> {
    let mut pts: Vec<f64> = knots.iter().copied().filter(|&x| x >= lo && x <= hi).collect();
    pts.push(lo);
    pts.push(hi);
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
    pts.dedup();
    let mut out = Vec::with_capacity(pts.len() * SUBSAMPLES);
    for w in pts.windows(2) {
        for s in 0..SUBSAMPLES {
            out.push(w[0] + (w[1] - w[0]) * s as f64 / SUBSAMPLES as f64);
        }
    }
    out.push(hi);
    out
}

/// Largest x at which the interpolated curve is still ≤ `zero_tol`.
pub fn critical_mu_zero_threshold(curve: &Curve, zero_tol: f64) -> Result<f64> {
    if !curve.y.iter().any(|&y| y <= zero_tol) || !curve.y.iter().any(|&y| y > zero_tol) {
        return Err(Error::NoCrossing);
    }
    let m = Makima::new(curve);
    let f = |x: f64| m.eval(x).unwrap_or(f64::NAN) - zero_tol;
    let grid = dense_grid(curve.x_min(), curve.x_max(), &curve.x);
    let last = grid.iter().rposition(|&x| f(x) <= 0.0).ok_or(Error::NoCrossing)?;
    if last + 1 == grid.len() {
        return Ok(curve.x_max());
    }
    Ok(bisect_root(&|x| if f(x) <= 0.0 { -1.0 } else { 1.0 }, grid[last], grid[last + 1]))
}

/// Smallest x in the common range where the two interpolants cross.
pub fn crossing_point(c1: &Curve, c2: &Curve) -> Result<f64> {
    let lo = c1.x_min().max(c2.x_min());
    let hi = c1.x_max().min(c2.x_max());
    if !(lo < hi) {
        return Err(Error::NoCrossing);
    }
    let (m1, m2) = (Makima::new(c1), Makima::new(c2));
    let f = |x: f64| m1.eval(x).unwrap_or(f64::NAN) - m2.eval(x).unwrap_or(f64::NAN);
    let mut knots = c1.x.clone();
    knots.extend(&c2.x);
    let grid = dense_grid(lo, hi, &knots);
    let mut prev: Option<(f64, f64)> = None;
    for &x in &grid {
        let v = f(x);
        if v == 0.0 || !v.is_finite() {
            continue;
        }
        if let Some((xp, vp)) = prev {
            if (vp < 0.0) != (v < 0.0) {
                return Ok(bisect_root(&f, xp, x));
            }
        }
        prev = Some((x, v));
    }
    Err(Error::NoCrossing)
}

/// μ_c(L) = μ_∞ + β L^(−η).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FssFit {
    pub mu_inf: f64,
    pub beta: f64,
    pub eta: f64,
    pub rms_residual: f64,
}

pub const ETA_MIN: f64 = 0.1;
pub const ETA_MAX: f64 = 4.0;
pub const ETA_STEP: f64 = 1e-3;

/// Grid search over η with the linear parameters solved exactly at each η.
pub fn fss_fit(points: &[(f64, f64)]) -> Result<FssFit> {
    let mut sizes: Vec<f64> = points.iter().map(|p| p.0).collect();
    sizes.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
    sizes.dedup();
    if sizes.len() < 3 {
        return Err(precondition("finite-size fit needs at least three distinct sizes"));
    }
    if points.iter().any(|p| !(p.0 > 0.0 && p.0.is_finite() && p.1.is_finite())) {
        return Err(Error::InvalidParameter("sizes must be positive and values finite"));
    }
    let n = points.len() as f64;
    let steps = ((ETA_MAX - ETA_MIN) / ETA_STEP).round() as usize;
    let mut best: Option<FssFit> = None;
    for k in 0..=steps {
        let eta = ETA_MIN + k as f64 * ETA_STEP;
        let (mut sz, mut szz, mut sy, mut szy) = (0.0, 0.0, 0.0, 0.0);
        for &(l, y) in points {
            let z = l.powf(-eta);
            sz += z;
            szz += z * z;
            sy += y;
            szy += z * y;
        }
        let det = n * szz - sz * sz;
        if det.abs() <= 1e-14 * (n * szz).max(f64::MIN_POSITIVE) {
            continue;
        }
        let beta = (n * szy - sz * sy) / det;
        let mu_inf = (sy - beta * sz) / n;
        let ss: f64 = points.iter().map(|&(l, y)| (y - mu_inf - beta * l.powf(-eta)).powi(2)).sum();
        let rms = (ss / n).sqrt();
        if best.is_none_or(|b| rms < b.rms_residual) {
            best = Some(FssFit { mu_inf, beta, eta, rms_residual: rms });
        }
    }
    best.ok_or(Error::Degenerate("rank-deficient finite-size fit"))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bisection {
    pub value: f64,
    pub iterations: usize,
}

/// Bisect on a classifier until the bracket is narrower than `tol`; returns its midpoint.
pub fn boundary_bisect<T: PartialEq>(
    mut classifier: impl FnMut(f64) -> Result<T>,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<Bisection> {
    if !(lo < hi && tol > 0.0) {
        return Err(Error::InvalidParameter("need lo < hi and tol > 0"));
    }
    let (mut a, mut b) = (lo, hi);
    let la = classifier(a)?;
    let lb = classifier(b)?;
    if la == lb {
        return Err(precondition("classifier gives the same label at both endpoints"));
    }
    let mut iterations = 0;
    while b - a > tol {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        iterations += 1;
        if classifier(m)? == la {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(Bisection { value: 0.5 * (a + b), iterations })
}
