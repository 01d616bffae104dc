//! Imaginary-time flow on the pure Gaussian manifold:
//! ḋ = −2V ∂E/∂d, V̇ = 4Ωᵀ(∂E/∂V)Ω − 4V(∂E/∂V)V.

use alloc::vec::Vec;
use core::cell::Cell;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::energy::{energy_unchecked, gradients_unchecked};
use super::{covariance_defect, from_coherent, project_pure, purity_defect, random_pure_with, symmetrize, vacuum, GaussianPureState};
use crate::coherent::{analytic_solutions, AnalyticKind};
use crate::error::{Error, Result};
use crate::flow::{integrate, max_abs, FlowOptions, FlowReport, FlowSystem};
use crate::model::ModelParams;

/// Drift below this is left alone; anything larger is projected out after every step.
const REPROJECT_ABOVE: f64 = 1e-12;
const PROJECTION_TARGET: f64 = 1e-14;

pub const DEFAULT_SQUEEZE_BOUND: f64 = 1.0;
pub const DEFAULT_GAUSSIAN_STARTS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianFlowOptions {
    pub flow: FlowOptions,
    /// Largest purity defect tolerated anywhere on the trajectory.
    pub purity_tol: f64,
}

impl Default for GaussianFlowOptions {
    fn default() -> Self {
        GaussianFlowOptions { flow: FlowOptions { grad_tol: 1e-9, ..FlowOptions::default() }, purity_tol: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianFlowReport {
    pub flow: FlowReport<GaussianPureState>,
    /// Largest defect of any projected state the integrator looked at.
    pub max_purity_defect: f64,
    /// Largest defect accumulated over a single step before projection.
    pub max_step_drift: f64,
}

struct GaussianFlow<'a> {
    params: &'a ModelParams,
    modes: usize,
    purity_tol: f64,
    max_defect: Cell<f64>,
    max_drift: Cell<f64>,
}

impl GaussianFlow<'_> {
    fn unpack(&self, x: &[f64]) -> GaussianPureState {
        let n = 2 * self.modes;
        GaussianPureState { d: DVector::from_column_slice(&x[..n]), v: DMatrix::from_column_slice(n, n, &x[n..]) }
    }
}

fn pack(state: &GaussianPureState) -> Vec<f64> {
    let mut x: Vec<f64> = state.d.iter().copied().collect();
    x.extend(state.v.iter().copied());
    x
}

impl FlowSystem for GaussianFlow<'_> {
    fn energy(&self, x: &[f64]) -> f64 {
        energy_unchecked(&self.unpack(x), self.params)
    }

    fn velocity(&self, x: &[f64], out: &mut [f64]) -> f64 {
        let st = self.unpack(x);
        let (gd, gv) = gradients_unchecked(&st, self.params);
        let l = self.modes;
        let d_dot = &st.v * &gd * -2.0;
        // ΩᵀGΩ = [[G_pp, −G_px], [−G_xp, G_xx]]
        let mut og = DMatrix::zeros(2 * l, 2 * l);
        for r in 0..l {
            for c in 0..l {
                og[(r, c)] = gv[(l + r, l + c)];
                og[(r, l + c)] = -gv[(l + r, c)];
                og[(l + r, c)] = -gv[(r, l + c)];
                og[(l + r, l + c)] = gv[(r, c)];
            }
        }
        let v_dot = og * 4.0 - &st.v * &gv * &st.v * 4.0;
        let n = 2 * l;
        out[..n].copy_from_slice(d_dot.as_slice());
        out[n..].copy_from_slice(v_dot.as_slice());
        max_abs(out)
    }

    fn constrain(&self, x: &mut [f64]) -> Result<()> {
        let n = 2 * self.modes;
        let mut v = DMatrix::from_column_slice(n, n, &x[n..]);
        symmetrize(&mut v);
        let drift = covariance_defect(&v);
        self.max_drift.set(self.max_drift.get().max(drift));
        if drift > REPROJECT_ABOVE {
            v = project_pure(&v, PROJECTION_TARGET).or_else(|_| project_pure(&v, self.purity_tol))?;
        }
        let defect = covariance_defect(&v);
        self.max_defect.set(self.max_defect.get().max(defect));
        if defect > self.purity_tol {
            return Err(Error::PurityProjection { defect });
        }
        x[n..].copy_from_slice(v.as_slice());
        Ok(())
    }
}

/// Relax `state0` along the Gaussian imaginary-time flow. The covariance is symmetrized
/// after every step and pulled back to the pure manifold whenever it drifts.
pub fn flow_relax(state0: &GaussianPureState, params: &ModelParams, opts: &GaussianFlowOptions) -> Result<GaussianFlowReport> {
    if state0.modes() < 2 {
        return Err(Error::InvalidParameter("Gaussian energy needs at least two sites"));
    }
    if !(opts.purity_tol > 0.0) {
        return Err(Error::InvalidParameter("purity_tol must be positive"));
    }
    let defect0 = purity_defect(state0);
    if defect0 > opts.purity_tol {
        return Err(Error::PurityProjection { defect: defect0 });
    }
    let sys = GaussianFlow {
        params,
        modes: state0.modes(),
        purity_tol: opts.purity_tol,
        max_defect: Cell::new(defect0),
        max_drift: Cell::new(0.0),
    };
    let rep = integrate(&sys, pack(state0), opts.flow.step / params.u, &opts.flow)?;
    let (max_purity_defect, max_step_drift) = (sys.max_defect.get(), sys.max_drift.get());
    Ok(GaussianFlowReport { flow: rep.map(|x| sys.unpack(&x)), max_purity_defect, max_step_drift })
}

/// Mean scale for random starts: 2·max(1, α_SF).
pub fn random_mean_scale(params: &ModelParams) -> f64 {
    crate::coherent::random_start_bound(params)
}

/// Lowest flow attractor over the vacuum, the closed-form coherent solutions and
/// `n_starts` seeded random pure states.
pub fn gaussian_multistart(
    params: &ModelParams,
    sites: usize,
    n_starts: usize,
    seed: u64,
    opts: &GaussianFlowOptions,
) -> Result<(GaussianPureState, f64)> {
    let mut starts: Vec<GaussianPureState> = analytic_solutions(params, sites)
        .iter()
        .filter(|s| s.kind != AnalyticKind::Trivial)
        .map(|s| from_coherent(&s.field(sites)))
        .collect();
    starts.push(vacuum(sites));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = random_mean_scale(params);
    for _ in 0..n_starts {
        starts.push(random_pure_with(sites, DEFAULT_SQUEEZE_BOUND, scale, &mut rng));
    }
    let mut best: Option<(GaussianPureState, f64)> = None;
    let mut last_err = None;
    for s in &starts {
        match flow_relax(s, params, opts) {
            Ok(rep) => {
                if best.as_ref().is_none_or(|b| rep.flow.energy < b.1) {
                    best = Some((rep.flow.state, rep.flow.energy));
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    match (best, last_err) {
        (Some(b), _) => Ok(b),
        (None, Some(e)) => Err(e),
        (None, None) => Err(Error::InvalidParameter("no starting states")),
    }
}
