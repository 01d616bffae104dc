//! Two-species chain with non-degenerate pair injection −ε Σ_j (a_j b_j + h.c.),
//! in the coherent product ansatz |α_j, β_j⟩. The model has the U(1) symmetry
//! α → e^{iθ}α, β → e^{−iθ}β.

use alloc::vec::Vec;

use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{analytic_solutions, random_field, random_start_bound, AnalyticKind, CoherentField, FlowOptions};
use crate::error::{Error, Result};
use crate::flow::{integrate, FlowReport, FlowSystem};
use crate::model::ModelParams;
#[cfg(not(feature = "std"))]
use num_traits::Float;

type C64 = Complex<f64>;

#[derive(Debug, Clone, PartialEq)]
pub struct TwoModeField {
    pub alphas: Vec<C64>,
    pub betas: Vec<C64>,
}

impl TwoModeField {
    pub fn new(alphas: Vec<C64>, betas: Vec<C64>) -> Result<Self> {
        if alphas.len() != betas.len() || alphas.len() < 2 {
            return Err(Error::InvalidParameter("species fields must have equal length ≥ 2"));
        }
        if alphas.iter().chain(&betas).any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::InvalidParameter("amplitudes must be finite"));
        }
        Ok(TwoModeField { alphas, betas })
    }

    pub fn balanced(field: &CoherentField) -> Self {
        TwoModeField { alphas: field.amplitudes.clone(), betas: field.amplitudes.clone() }
    }

    pub fn sites(&self) -> usize {
        self.alphas.len()
    }

    /// α → e^{iθ}α, β → e^{−iθ}β.
    pub fn rotate(&self, theta: f64) -> Self {
        let p = C64::from_polar(1.0, theta);
        TwoModeField {
            alphas: self.alphas.iter().map(|a| a * p).collect(),
            betas: self.betas.iter().map(|b| b * p.conj()).collect(),
        }
    }

    fn to_flat(&self) -> Vec<f64> {
        let mut x = CoherentField { amplitudes: self.alphas.clone() }.to_flat();
        x.extend(CoherentField { amplitudes: self.betas.clone() }.to_flat());
        x
    }

    fn from_flat(x: &[f64]) -> Self {
        let h = x.len() / 2;
        TwoModeField {
            alphas: CoherentField::from_flat(&x[..h]).amplitudes,
            betas: CoherentField::from_flat(&x[h..]).amplitudes,
        }
    }
}

pub fn two_mode_energy(field: &TwoModeField, params: &ModelParams) -> f64 {
    let l = field.sites();
    let mut e = 0.0;
    for j in 0..l {
        let k = (j + 1) % l;
        for z in [&field.alphas, &field.betas] {
            let n = z[j].norm_sqr();
            e += -params.mu * n - 2.0 * params.j * (z[j] * z[k].conj()).re
                + 0.5 * params.u * n * n
                + params.v * n * z[k].norm_sqr();
        }
        e -= 2.0 * params.eps * (field.alphas[j] * field.betas[j]).re;
    }
    e
}

/// Wirtinger gradients (∂E/∂α_j*, ∂E/∂β_j*).
pub fn two_mode_gradient(field: &TwoModeField, params: &ModelParams) -> (Vec<C64>, Vec<C64>) {
    let l = field.sites();
    let species = |z: &[C64], partner: &[C64]| -> Vec<C64> {
        (0..l)
            .map(|j| {
                let (next, prev) = (z[(j + 1) % l], z[(j + l - 1) % l]);
                let diag = -params.mu + params.u * z[j].norm_sqr() + params.v * (next.norm_sqr() + prev.norm_sqr());
                z[j] * diag - (next + prev) * params.j - partner[j].conj() * params.eps
            })
            .collect()
    };
    (species(&field.alphas, &field.betas), species(&field.betas, &field.alphas))
}

/// Largest |∂E/∂α_j*|, |∂E/∂β_j*|; zero exactly at stationary points.
pub fn two_mode_stationarity_residual(field: &TwoModeField, params: &ModelParams) -> f64 {
    let (ga, gb) = two_mode_gradient(field, params);
    ga.iter().chain(&gb).fold(0.0f64, |m, g| m.max(g.norm()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TwoModeKind {
    /// α_j = β_j following a single-species closed form.
    Balanced(AnalyticKind),
    /// Homogeneous with |α| > |β|.
    UnbalancedAlphaMajor,
    /// Homogeneous with |β| > |α|.
    UnbalancedBetaMajor,
}

/// Real closed-form stationary point; species amplitudes alternate between sites 0, 2, ...
/// and 1, 3, ...
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoModeAnalytic {
    pub kind: TwoModeKind,
    pub alpha: (f64, f64),
    pub beta: (f64, f64),
    pub energy: f64,
}

impl TwoModeAnalytic {
    pub fn field(&self, sites: usize) -> TwoModeField {
        let pick = |(o, e): (f64, f64)| -> Vec<C64> {
            (0..sites).map(|j| C64::new(if j % 2 == 0 { o } else { e }, 0.0)).collect()
        };
        TwoModeField { alphas: pick(self.alpha), betas: pick(self.beta) }
    }
}

/// Balanced solutions (twice the single-species energies) and, when 2ε ≤ μ+2J, the
/// homogeneous unbalanced pair.
///
/// The unbalanced amplitudes satisfy (U+2V)(α²+β²) = μ+2J and (U+2V)²α²β² = ε², and
/// stationarity forces αβ = −ε/(U+2V) < 0, which gives E = −L[(μ+2J)²/2 − ε²]/(U+2V).
pub fn two_mode_analytic(params: &ModelParams, sites: usize) -> Vec<TwoModeAnalytic> {
    let mut out: Vec<TwoModeAnalytic> = analytic_solutions(params, sites)
        .into_iter()
        .map(|s| TwoModeAnalytic {
            kind: TwoModeKind::Balanced(s.kind),
            alpha: (s.alpha, s.r * s.alpha),
            beta: (s.alpha, s.r * s.alpha),
            energy: 2.0 * s.energy,
        })
        .collect();
    let w = params.u + 2.0 * params.v;
    let s = params.mu + 2.0 * params.j;
    let disc = s * s - 4.0 * params.eps * params.eps;
    if s >= 0.0 && disc >= 0.0 {
        let d = disc.sqrt();
        let major = (0.5 * (s + d) / w).sqrt();
        let minor = (0.5 * (s - d).max(0.0) / w).sqrt();
        let energy = -(sites as f64) * (0.5 * s * s - params.eps * params.eps) / w;
        out.push(TwoModeAnalytic {
            kind: TwoModeKind::UnbalancedAlphaMajor,
            alpha: (major, major),
            beta: (-minor, -minor),
            energy,
        });
        out.push(TwoModeAnalytic {
            kind: TwoModeKind::UnbalancedBetaMajor,
            alpha: (-minor, -minor),
            beta: (major, major),
            energy,
        });
    }
    out.sort_by(|x, y| x.energy.partial_cmp(&y.energy).unwrap_or(core::cmp::Ordering::Equal));
    out
}

struct TwoModeFlow<'a> {
    params: &'a ModelParams,
}

impl FlowSystem for TwoModeFlow<'_> {
    fn energy(&self, x: &[f64]) -> f64 {
        two_mode_energy(&TwoModeField::from_flat(x), self.params)
    }

    fn velocity(&self, x: &[f64], out: &mut [f64]) -> f64 {
        let (ga, gb) = two_mode_gradient(&TwoModeField::from_flat(x), self.params);
        let l = ga.len();
        let mut m: f64 = 0.0;
        for (off, g) in [(0, &ga), (2 * l, &gb)] {
            for (k, gk) in g.iter().enumerate() {
                out[off + k] = -gk.re;
                out[off + l + k] = -gk.im;
                m = m.max(gk.norm());
            }
        }
        m
    }
}

/// Gradient flow on both species, same contract as [`super::relax`].
pub fn two_mode_relax(field0: &TwoModeField, params: &ModelParams, opts: &FlowOptions) -> Result<FlowReport<TwoModeField>> {
    let rep = integrate(&TwoModeFlow { params }, field0.to_flat(), opts.step / params.u, opts)?;
    Ok(rep.map(|x| TwoModeField::from_flat(&x)))
}

/// Lowest attractor over the closed-form solutions and seeded random starts.
pub fn two_mode_multistart(
    params: &ModelParams,
    sites: usize,
    n_starts: usize,
    seed: u64,
    opts: &FlowOptions,
) -> Result<(TwoModeField, f64)> {
    let mut starts: Vec<TwoModeField> = two_mode_analytic(params, sites)
        .iter()
        .filter(|s| s.kind != TwoModeKind::Balanced(AnalyticKind::Trivial))
        .map(|s| s.field(sites))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bound = random_start_bound(params);
    for _ in 0..n_starts {
        let a = random_field(sites, bound, &mut rng).amplitudes;
        let b = random_field(sites, bound, &mut rng).amplitudes;
        starts.push(TwoModeField { alphas: a, betas: b });
    }
    let mut best: Option<(TwoModeField, f64)> = None;
    for s in &starts {
        let rep = two_mode_relax(s, params, opts)?;
        if best.as_ref().is_none_or(|b| rep.energy < b.1) {
            best = Some((rep.state, rep.energy));
        }
    }
    best.ok_or(Error::InvalidParameter("no starting fields"))
}
