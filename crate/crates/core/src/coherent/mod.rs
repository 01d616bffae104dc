//! Product of on-site coherent states ⊗_j |α_j⟩.
//!
//! E = Σ_j [ −μ|α_j|² − 2J Re(α_j α_{j+1}*) − ε Re(α_j²) + (U/2)|α_j|⁴ + V|α_j|²|α_{j+1}|² ]
//!
//! Stationary points come in three closed-form families (trivial, uniform, staggered);
//! general minima are reached by gradient flow from many starts.

mod two_mode;

pub use two_mode::*;

use alloc::vec::Vec;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::flow::{integrate, FlowReport, FlowSystem};
use crate::meanfield::{classify_order, PhaseLabel};
use crate::model::ModelParams;
#[cfg(not(feature = "std"))]
use num_traits::Float;

pub use crate::flow::FlowOptions;

type C64 = Complex<f64>;

pub const DEFAULT_STARTS: usize = 32;

/// One complex amplitude per site.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherentField {
    pub amplitudes: Vec<C64>,
}

impl CoherentField {
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        let l = amplitudes.len();
        if l < 4 || l % 2 != 0 {
            return Err(Error::InvalidParameter("L must be even and ≥ 4"));
        }
        if amplitudes.iter().any(|a| !(a.re.is_finite() && a.im.is_finite())) {
            return Err(Error::InvalidParameter("amplitudes must be finite"));
        }
        Ok(CoherentField { amplitudes })
    }

    pub fn zeros(sites: usize) -> Self {
        CoherentField { amplitudes: alloc::vec![C64::new(0.0, 0.0); sites] }
    }

    /// Amplitude `odd` on sites 0, 2, ... and `even` on sites 1, 3, ...
    pub fn two_sublattice(sites: usize, odd: C64, even: C64) -> Self {
        CoherentField {
            amplitudes: (0..sites).map(|j| if j % 2 == 0 { odd } else { even }).collect(),
        }
    }

    pub fn sites(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn neg(&self) -> Self {
        CoherentField { amplitudes: self.amplitudes.iter().map(|a| -a).collect() }
    }

    pub(crate) fn to_flat(&self) -> Vec<f64> {
        let mut x: Vec<f64> = self.amplitudes.iter().map(|a| a.re).collect();
        x.extend(self.amplitudes.iter().map(|a| a.im));
        x
    }

    pub(crate) fn from_flat(x: &[f64]) -> Self {
        let l = x.len() / 2;
        CoherentField { amplitudes: (0..l).map(|j| C64::new(x[j], x[l + j])).collect() }
    }

    /// Sublattice averages (|α| on sites 0, 2, ..., |α| on 1, 3, ..., ⟨n⟩ on each).
    pub fn sublattice_order(&self) -> (f64, f64, f64, f64) {
        let half = (self.sites() / 2) as f64;
        let (mut po, mut pe, mut ro, mut re) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0), 0.0, 0.0);
        for (j, a) in self.amplitudes.iter().enumerate() {
            if j % 2 == 0 {
                po += a;
                ro += a.norm_sqr();
            } else {
                pe += a;
                re += a.norm_sqr();
            }
        }
        let (po, pe) = ((po / half).norm(), (pe / half).norm());
        let (ro, re) = (ro / half, re / half);
        if ro >= re {
            (po, pe, ro, re)
        } else {
            (pe, po, re, ro)
        }
    }

    pub fn phase(&self, tol_phi: f64, tol_rho: f64) -> PhaseLabel {
        let (po, pe, ro, re) = self.sublattice_order();
        classify_order(po, pe, ro, re, tol_phi, tol_rho)
    }
}

/// Total variational energy.
pub fn energy(field: &CoherentField, params: &ModelParams) -> f64 {
    let a = &field.amplitudes;
    let l = a.len();
    let mut e = 0.0;
    for j in 0..l {
        let x = a[j];
        let y = a[(j + 1) % l];
        let n = x.norm_sqr();
        e += -params.mu * n - 2.0 * params.j * (x * y.conj()).re - params.eps * (x * x).re
            + 0.5 * params.u * n * n
            + params.v * n * y.norm_sqr();
    }
    e
}

/// Wirtinger gradient ∂E/∂α_j*.
pub fn gradient(field: &CoherentField, params: &ModelParams) -> Vec<C64> {
    let a = &field.amplitudes;
    let l = a.len();
    (0..l)
        .map(|j| {
            let x = a[j];
            let (next, prev) = (a[(j + 1) % l], a[(j + l - 1) % l]);
            let diag = -params.mu + params.u * x.norm_sqr() + params.v * (next.norm_sqr() + prev.norm_sqr());
            x * diag - (next + prev) * params.j - x.conj() * params.eps
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnalyticKind {
    Trivial,
    Uniform,
    Staggered,
}

/// Closed-form stationary point. Staggered fields carry `alpha` on sites 0, 2, ... and
/// `r·alpha` on sites 1, 3, ...
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticCoherentSolution {
    pub kind: AnalyticKind,
    pub alpha: f64,
    pub r: f64,
    /// Total energy on the chain the list was built for.
    pub energy: f64,
    /// ν = (μ+ε)/2J (infinite at J = 0).
    pub nu: f64,
    /// a = ν(2V/U − 1).
    pub a: f64,
}

impl AnalyticCoherentSolution {
    pub fn field(&self, sites: usize) -> CoherentField {
        CoherentField::two_sublattice(sites, C64::new(self.alpha, 0.0), C64::new(self.r * self.alpha, 0.0))
    }
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        if num == 0.0 {
            0.0
        } else {
            num.signum() * f64::INFINITY
        }
    } else {
        num / den
    }
}

/// Trivial, uniform and staggered stationary points, ascending in energy.
///
/// E_SF = −L(μ+ε+2J)²/(2(U+2V)), E_SS = −(L/U)[(μ+ε)²/4 + 2J²/(2V/U−1)], the
/// J-regular forms of −2LJ²(ν+1)²/(U+2V) and −(LJ²/U)(ν² + 2/(2V/U−1)).
pub fn analytic_solutions(params: &ModelParams, sites: usize) -> Vec<AnalyticCoherentSolution> {
    let (mu, u, v, j, eps) = (params.mu, params.u, params.v, params.j, params.eps);
    let lf = sites as f64;
    let m = mu + eps;
    let w = 2.0 * v / u - 1.0;
    let nu = ratio(m, 2.0 * j);
    let a = if w == 0.0 { 0.0 } else { nu * w };
    let mut out = Vec::with_capacity(3);
    out.push(AnalyticCoherentSolution { kind: AnalyticKind::Trivial, alpha: 0.0, r: 1.0, energy: 0.0, nu, a });
    let s = m + 2.0 * j;
    if s >= 0.0 {
        out.push(AnalyticCoherentSolution {
            kind: AnalyticKind::Uniform,
            alpha: (s / (u + 2.0 * v)).sqrt(),
            r: 1.0,
            energy: -lf * s * s / (2.0 * (u + 2.0 * v)),
            nu,
            a,
        });
    }
    if w > 0.0 && a >= 2.0 {
        // smaller root of r² − a r + 1 = 0, in the cancellation-free form
        let r = if a.is_infinite() { 0.0 } else { 2.0 / (a + (a * a - 4.0).max(0.0).sqrt()) };
        let alpha2 = (m + 2.0 * r * j) / (u + 2.0 * r * r * v);
        out.push(AnalyticCoherentSolution {
            kind: AnalyticKind::Staggered,
            alpha: alpha2.sqrt(),
            r,
            energy: -(lf / u) * (0.25 * m * m + 2.0 * j * j / w),
            nu,
            a,
        });
    }
    out.sort_by(|x, y| x.energy.partial_cmp(&y.energy).unwrap_or(core::cmp::Ordering::Equal));
    out
}

/// Chemical potential of the uniform/staggered boundary, μ_c = 4J/(2V/U − 1) − ε,
/// defined only for 2V/U > 1.
pub fn ss_boundary_mu(j: f64, u: f64, v: f64, eps: f64) -> Option<f64> {
    let w = 2.0 * v / u - 1.0;
    if w > 0.0 {
        Some(4.0 * j / w - eps)
    } else {
        None
    }
}

/// Phase of the lowest closed-form solution.
///
/// Decided from the branch condition a > 2 rather than by comparing energies: E_SF − E_SS
/// vanishes quadratically at a = 2, so near the boundary the gap drops below rounding.
pub fn analytic_phase(params: &ModelParams) -> PhaseLabel {
    let sols = analytic_solutions(params, 4);
    let w = 2.0 * params.v / params.u - 1.0;
    if w > 0.0 && sols[0].a > 2.0 {
        PhaseLabel::SS
    } else if sols.iter().any(|s| matches!(s.kind, AnalyticKind::Uniform) && s.energy < 0.0) {
        PhaseLabel::SF
    } else {
        PhaseLabel::MI
    }
}

struct CoherentFlow<'a> {
    params: &'a ModelParams,
}

impl FlowSystem for CoherentFlow<'_> {
    fn energy(&self, x: &[f64]) -> f64 {
        energy(&CoherentField::from_flat(x), self.params)
    }

    fn velocity(&self, x: &[f64], out: &mut [f64]) -> f64 {
        let g = gradient(&CoherentField::from_flat(x), self.params);
        let l = g.len();
        let mut m: f64 = 0.0;
        for (k, gk) in g.iter().enumerate() {
            out[k] = -gk.re;
            out[l + k] = -gk.im;
            m = m.max(gk.norm());
        }
        m
    }
}

/// Gradient flow α̇ = −∂E/∂α*; the residual is max_j |∂E/∂α_j*|.
pub fn relax(field0: &CoherentField, params: &ModelParams, opts: &FlowOptions) -> Result<FlowReport<CoherentField>> {
    let sys = CoherentFlow { params };
    let rep = integrate(&sys, field0.to_flat(), opts.step / params.u, opts)?;
    Ok(rep.map(|x| CoherentField::from_flat(&x)))
}

/// Random field with modulus uniform in [0, bound] and uniform phase.
pub fn random_field<R: Rng>(sites: usize, bound: f64, rng: &mut R) -> CoherentField {
    CoherentField {
        amplitudes: (0..sites)
            .map(|_| {
                let r: f64 = rng.random::<f64>() * bound;
                let th: f64 = rng.random::<f64>() * core::f64::consts::TAU;
                C64::from_polar(r, th)
            })
            .collect(),
    }
}

/// Modulus bound for random starts: 2·max(1, α_SF).
pub fn random_start_bound(params: &ModelParams) -> f64 {
    let s = (params.mu + params.eps + 2.0 * params.j).max(0.0);
    2.0 * (s / (params.u + 2.0 * params.v)).sqrt().max(1.0)
}

/// Lowest flow attractor over the closed-form solutions and `n_starts` seeded random fields.
pub fn multistart_ground(
    params: &ModelParams,
    sites: usize,
    n_starts: usize,
    seed: u64,
    opts: &FlowOptions,
) -> Result<(CoherentField, f64)> {
    let mut starts: Vec<CoherentField> = analytic_solutions(params, sites)
        .iter()
        .filter(|s| s.kind != AnalyticKind::Trivial)
        .map(|s| s.field(sites))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bound = random_start_bound(params);
    for _ in 0..n_starts {
        starts.push(random_field(sites, bound, &mut rng));
    }
    if starts.is_empty() {
        starts.push(CoherentField::zeros(sites));
    }
    let mut best: Option<(CoherentField, f64)> = None;
    for s in &starts {
        let rep = relax(s, params, opts)?;
        if best.as_ref().is_none_or(|b| rep.energy < b.1) {
            best = Some((rep.state, rep.energy));
        }
    }
    Ok(best.expect("at least one start"))
}
