//! Energy functional E(d, V) and its gradients.
//!
//! Written in terms of α_j = ⟨a_j⟩, N_jk = ⟨δa_j† δa_k⟩ and M_jk = ⟨δa_j δa_k⟩, which are
//! linear in d and V respectively. Every quartic term then reduces to products of these.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use super::wick::{raw_moment_linear, LinearForm};
use super::GaussianPureState;
use crate::error::{Error, Result};
use crate::model::ModelParams;

type C64 = Complex<f64>;

pub(crate) struct SecondMoments {
    pub alpha: Vec<C64>,
    pub n: DMatrix<C64>,
    pub m: DMatrix<C64>,
}

pub(crate) fn second_moments(state: &GaussianPureState) -> SecondMoments {
    let l = state.modes();
    let v = &state.v;
    let alpha = (0..l).map(|j| state.alpha(j)).collect();
    let n = DMatrix::from_fn(l, l, |j, k| {
        let re = v[(j, k)] + v[(l + j, l + k)] - if j == k { 2.0 } else { 0.0 };
        let im = v[(j, l + k)] - v[(l + j, k)];
        C64::new(0.25 * re, 0.25 * im)
    });
    let m = DMatrix::from_fn(l, l, |j, k| {
        C64::new(0.25 * (v[(j, k)] - v[(l + j, l + k)]), 0.25 * (v[(j, l + k)] + v[(l + j, k)]))
    });
    SecondMoments { alpha, n, m }
}

fn check_modes(state: &GaussianPureState) -> Result<()> {
    if state.modes() < 2 {
        return Err(Error::InvalidParameter("Gaussian energy needs at least two sites"));
    }
    Ok(())
}

/// Closed-form ⟨H⟩ on the periodic chain of `state.modes()` sites.
pub fn energy(state: &GaussianPureState, params: &ModelParams) -> Result<f64> {
    check_modes(state)?;
    Ok(energy_unchecked(state, params))
}

pub(crate) fn energy_unchecked(state: &GaussianPureState, params: &ModelParams) -> f64 {
    let l = state.modes();
    let SecondMoments { alpha, n, m } = second_moments(state);
    let ModelParams { mu, u, v, j: hop, eps } = *params;
    let mut e = 0.0;
    for j in 0..l {
        let a = alpha[j];
        let a2 = a.norm_sqr();
        let nj = n[(j, j)].re;
        let mj = m[(j, j)];
        e += -mu * (a2 + nj)
            + 0.5 * u * (a2 * a2 + 4.0 * a2 * nj + 2.0 * (a.conj() * a.conj() * mj).re + 2.0 * nj * nj + mj.norm_sqr())
            - eps * (a * a + mj).re;
        let k = (j + 1) % l;
        let b = alpha[k];
        let (njk, mjk) = (n[(j, k)], m[(j, k)]);
        let occ_j = a2 + nj;
        let occ_k = b.norm_sqr() + n[(k, k)].re;
        e += -2.0 * hop * (a.conj() * b + njk).re
            + v * (occ_j * occ_k
                + 2.0 * (a.conj() * b.conj() * mjk).re
                + 2.0 * (a * b.conj() * njk).re
                + mjk.norm_sqr()
                + njk.norm_sqr());
    }
    e
}

/// ⟨H⟩ assembled term by term from raw moments of ladder operators through the Wick
/// engine; slow, used to cross-check [`energy`].
pub fn energy_via_moments(state: &GaussianPureState, params: &ModelParams) -> Result<f64> {
    check_modes(state)?;
    let l = state.modes();
    let a = |j: usize| LinearForm::annihilation(l, j);
    let ad = |j: usize| LinearForm::creation(l, j);
    let mut e = C64::new(0.0, 0.0);
    for j in 0..l {
        let k = (j + 1) % l;
        let n = raw_moment_linear(state, &[ad(j), a(j)])?;
        let nn1 = raw_moment_linear(state, &[ad(j), ad(j), a(j), a(j)])?;
        let pair = raw_moment_linear(state, &[a(j), a(j)])? + raw_moment_linear(state, &[ad(j), ad(j)])?;
        let hop = raw_moment_linear(state, &[ad(j), a(k)])? + raw_moment_linear(state, &[ad(k), a(j)])?;
        let nn = raw_moment_linear(state, &[ad(j), a(j), ad(k), a(k)])?;
        e += -n * params.mu + nn1 * (0.5 * params.u) - pair * (0.5 * params.eps) + nn * params.v - hop * params.j;
    }
    Ok(e.re)
}

/// ∂E/∂d and the symmetrized ∂E/∂V.
pub fn gradients(state: &GaussianPureState, params: &ModelParams) -> Result<(DVector<f64>, DMatrix<f64>)> {
    check_modes(state)?;
    Ok(gradients_unchecked(state, params))
}

pub(crate) fn gradients_unchecked(state: &GaussianPureState, params: &ModelParams) -> (DVector<f64>, DMatrix<f64>) {
    let l = state.modes();
    let SecondMoments { alpha, n, m } = second_moments(state);
    let ModelParams { mu, u, v, j: hop, eps } = *params;
    let zero = C64::new(0.0, 0.0);
    // Wirtinger-style derivatives D_z = ∂/∂Re z + i ∂/∂Im z.
    let mut d_alpha = alloc::vec![zero; l];
    let mut d_ndiag = alloc::vec![0.0; l];
    let mut d_n = DMatrix::from_element(l, l, zero);
    let mut d_m = DMatrix::from_element(l, l, zero);
    let occ: Vec<f64> = (0..l).map(|j| alpha[j].norm_sqr() + n[(j, j)].re).collect();
    for j in 0..l {
        let a = alpha[j];
        let nj = n[(j, j)].re;
        let mj = m[(j, j)];
        d_alpha[j] += a * (-2.0 * mu + 2.0 * u * a.norm_sqr() + 4.0 * u * nj) + a.conj() * mj * (2.0 * u) - a.conj() * (2.0 * eps);
        d_ndiag[j] += -mu + 2.0 * u * occ[j];
        d_m[(j, j)] += a * a * u + mj * u - eps;

        let k = (j + 1) % l;
        let b = alpha[k];
        let (njk, mjk) = (n[(j, k)], m[(j, k)]);
        d_alpha[j] += -b * (2.0 * hop) + a * (2.0 * v * occ[k]) + b.conj() * mjk * (2.0 * v) + b * njk.conj() * (2.0 * v);
        d_alpha[k] += -a * (2.0 * hop) + b * (2.0 * v * occ[j]) + a.conj() * mjk * (2.0 * v) + a * njk * (2.0 * v);
        d_ndiag[j] += v * occ[k];
        d_ndiag[k] += v * occ[j];
        d_n[(j, k)] += C64::new(-2.0 * hop, 0.0) + a.conj() * b * (2.0 * v) + njk * (2.0 * v);
        d_m[(j, k)] += a * b * (2.0 * v) + mjk * (2.0 * v);
    }

    let mut gd = DVector::zeros(2 * l);
    for j in 0..l {
        gd[j] = 0.5 * d_alpha[j].re;
        gd[l + j] = 0.5 * d_alpha[j].im;
    }
    let mut g = DMatrix::zeros(2 * l, 2 * l);
    for j in 0..l {
        g[(j, j)] += 0.25 * d_ndiag[j];
        g[(l + j, l + j)] += 0.25 * d_ndiag[j];
        for k in 0..l {
            let dn = d_n[(j, k)];
            if dn != zero {
                g[(j, k)] += 0.25 * dn.re;
                g[(l + j, l + k)] += 0.25 * dn.re;
                g[(j, l + k)] += 0.25 * dn.im;
                g[(l + j, k)] -= 0.25 * dn.im;
            }
            let dm = d_m[(j, k)];
            if dm != zero {
                g[(j, k)] += 0.25 * dm.re;
                g[(l + j, l + k)] -= 0.25 * dm.re;
                g[(j, l + k)] += 0.25 * dm.im;
                g[(l + j, k)] += 0.25 * dm.im;
            }
        }
    }
    let gv = (&g + g.transpose()) * 0.5;
    (gd, gv)
}
