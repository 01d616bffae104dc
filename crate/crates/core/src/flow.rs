//! Imaginary-time gradient flow shared by the variational ansatzes.
//!
//! Classical RK4 on a flat real parameter vector. A step is accepted only when the
//! energy does not rise beyond a 1e−13 relative slack; otherwise it is halved.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowOptions {
    /// Initial and maximal step, in units of 1/U.
    pub step: f64,
    /// Stop once the max-norm of the flow vector drops below this.
    pub grad_tol: f64,
    /// Cap on attempted steps.
    pub max_steps: usize,
    /// Keep the energy after every accepted step.
    pub record_trace: bool,
}

impl Default for FlowOptions {
    fn default() -> Self {
        FlowOptions { step: 0.05, grad_tol: 1e-10, max_steps: 1_000_000, record_trace: false }
    }
}

impl FlowOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.grad_tol > 0.0 && self.max_steps > 0) {
            return Err(Error::InvalidParameter("flow options must be positive"));
        }
        Ok(())
    }
}

/// Outcome of a flow: final state, its energy, the final flow-vector max-norm.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowReport<S> {
    pub state: S,
    pub energy: f64,
    pub residual: f64,
    /// Attempted steps, accepted or not.
    pub steps: usize,
    pub converged: bool,
    /// Energies after each accepted step, starting with the initial energy.
    pub trace: Vec<f64>,
}

impl<S> FlowReport<S> {
    pub fn map<T>(self, f: impl FnOnce(S) -> T) -> FlowReport<T> {
        FlowReport {
            state: f(self.state),
            energy: self.energy,
            residual: self.residual,
            steps: self.steps,
            converged: self.converged,
            trace: self.trace,
        }
    }
}

pub(crate) const MIN_STEP: f64 = 1e-14;
const REGROW_AFTER: usize = 10;

pub(crate) trait FlowSystem {
    fn energy(&self, x: &[f64]) -> f64;
    /// Writes the flow vector ẋ into `out`; returns its max-norm.
    fn velocity(&self, x: &[f64], out: &mut [f64]) -> f64;
    /// Pull a candidate back onto the constraint manifold.
    fn constrain(&self, _x: &mut [f64]) -> Result<()> {
        Ok(())
    }
}

pub(crate) fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

pub(crate) fn integrate<S: FlowSystem>(sys: &S, x0: Vec<f64>, dt0: f64, opts: &FlowOptions) -> Result<FlowReport<Vec<f64>>> {
    opts.validate()?;
    let n = x0.len();
    let mut x = x0;
    let mut e = sys.energy(&x);
    let mut k1 = vec![0.0; n];
    let (mut k2, mut k3, mut k4) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut tmp = vec![0.0; n];
    let mut cand = vec![0.0; n];
    let mut res = sys.velocity(&x, &mut k1);
    let mut trace = Vec::new();
    if opts.record_trace {
        trace.push(e);
    }
    let mut h = dt0;
    let mut streak = 0;
    let mut steps = 0;
    while res >= opts.grad_tol && steps < opts.max_steps {
        steps += 1;
        for i in 0..n {
            tmp[i] = x[i] + 0.5 * h * k1[i];
        }
        sys.velocity(&tmp, &mut k2);
        for i in 0..n {
            tmp[i] = x[i] + 0.5 * h * k2[i];
        }
        sys.velocity(&tmp, &mut k3);
        for i in 0..n {
            tmp[i] = x[i] + h * k3[i];
        }
        sys.velocity(&tmp, &mut k4);
        for i in 0..n {
            cand[i] = x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        let ok = sys.constrain(&mut cand).is_ok() && cand.iter().all(|v| v.is_finite());
        let e_new = if ok { sys.energy(&cand) } else { f64::INFINITY };
        if e_new <= e + 1e-13 * e.abs() {
            core::mem::swap(&mut x, &mut cand);
            e = e_new;
            res = sys.velocity(&x, &mut k1);
            if opts.record_trace {
                trace.push(e);
            }
            streak += 1;
            if streak >= REGROW_AFTER && h < dt0 {
                h = (2.0 * h).min(dt0);
                streak = 0;
            }
        } else {
            h *= 0.5;
            streak = 0;
            if h < MIN_STEP {
                return Err(Error::StepCollapse { min_step: MIN_STEP, residual: res });
            }
        }
    }
    Ok(FlowReport { state: x, energy: e, residual: res, steps, converged: res < opts.grad_tol, trace })
}
