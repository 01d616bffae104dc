//! Pure Gaussian states of L bosonic modes.
//!
//! Quadratures x_j = a_j + a_j†, p_j = i(a_j† − a_j), ordered r = (x_1..x_L, p_1..p_L), with
//! [r_m, r_n] = 2iΩ_mn and Ω = [[0, I], [−I, 0]]. A state is fixed by its mean d = ⟨r⟩ and
//! covariance V_mn = ⟨{δr_m, δr_n}⟩/2; the vacuum has V = I, and purity means (VΩ)² = −I.

mod binder;
mod energy;
mod flow;
mod wick;

pub use binder::*;
pub use energy::*;
pub use flow::*;
pub use wick::*;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::coherent::CoherentField;
use crate::error::{Error, Result};
#[cfg(not(feature = "std"))]
use num_traits::Float;

type C64 = Complex<f64>;

/// Mean vector and covariance matrix of a pure Gaussian state.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianPureState {
    pub d: DVector<f64>,
    pub v: DMatrix<f64>,
}

/// Ω = [[0, I], [−I, 0]] for `modes` modes.
pub fn symplectic_form(modes: usize) -> DMatrix<f64> {
    let mut om = DMatrix::zeros(2 * modes, 2 * modes);
    for j in 0..modes {
        om[(j, modes + j)] = 1.0;
        om[(modes + j, j)] = -1.0;
    }
    om
}

impl GaussianPureState {
    pub fn new(d: DVector<f64>, v: DMatrix<f64>) -> Result<Self> {
        let n = d.len();
        if n == 0 || n % 2 != 0 || v.nrows() != n || v.ncols() != n {
            return Err(Error::InvalidParameter("d must have even length 2L and V must be 2L×2L"));
        }
        if (&v - v.transpose()).amax() > 1e-12 {
            return Err(Error::InvalidParameter("V must be symmetric"));
        }
        Ok(GaussianPureState { d, v })
    }

    pub fn modes(&self) -> usize {
        self.d.len() / 2
    }

    /// α_j = (d_j + i d_{L+j})/2.
    pub fn alpha(&self, j: usize) -> C64 {
        let l = self.modes();
        C64::new(0.5 * self.d[j], 0.5 * self.d[l + j])
    }

    /// Physical state: V + iΩ is positive semidefinite (eigenvalues ≥ −1e−10).
    pub fn is_physical(&self) -> bool {
        let om = symplectic_form(self.modes());
        let h = DMatrix::from_fn(self.v.nrows(), self.v.ncols(), |r, c| C64::new(self.v[(r, c)], om[(r, c)]));
        SymmetricEigen::new(h).eigenvalues.iter().all(|&e| e >= -1e-10)
    }

    /// ⟨n_j⟩ = |α_j|² + (V_xx + V_pp − 2)/4.
    pub fn density(&self, j: usize) -> f64 {
        let l = self.modes();
        self.alpha(j).norm_sqr() + 0.25 * (self.v[(j, j)] + self.v[(l + j, l + j)] - 2.0)
    }

    /// Same convention as [`CoherentField::sublattice_order`]: |mean α| and mean ⟨n⟩ per
    /// sublattice, ordered so that the denser sublattice comes first.
    pub fn sublattice_order(&self) -> (f64, f64, f64, f64) {
        let l = self.modes();
        let half = (l / 2) as f64;
        let (mut po, mut pe, mut ro, mut re) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0), 0.0, 0.0);
        for j in 0..l {
            if j % 2 == 0 {
                po += self.alpha(j);
                ro += self.density(j);
            } else {
                pe += self.alpha(j);
                re += self.density(j);
            }
        }
        let (po, pe, ro, re) = ((po / half).norm(), (pe / half).norm(), ro / half, re / half);
        if ro >= re {
            (po, pe, ro, re)
        } else {
            (pe, po, re, ro)
        }
    }

    pub fn phase(&self, tol_phi: f64, tol_rho: f64) -> crate::meanfield::PhaseLabel {
        let (po, pe, ro, re) = self.sublattice_order();
        crate::meanfield::classify_order(po, pe, ro, re, tol_phi, tol_rho)
    }

    /// Z₂ image d → −d.
    pub fn neg(&self) -> Self {
        GaussianPureState { d: -&self.d, v: self.v.clone() }
    }
}

pub fn vacuum(modes: usize) -> GaussianPureState {
    GaussianPureState { d: DVector::zeros(2 * modes), v: DMatrix::identity(2 * modes, 2 * modes) }
}

/// Coherent product state: V = I, d_j = 2 Re α_j, d_{L+j} = 2 Im α_j.
pub fn from_coherent(field: &CoherentField) -> GaussianPureState {
    let l = field.sites();
    let mut d = DVector::zeros(2 * l);
    for (j, a) in field.amplitudes.iter().enumerate() {
        d[j] = 2.0 * a.re;
        d[l + j] = 2.0 * a.im;
    }
    GaussianPureState { d, v: DMatrix::identity(2 * l, 2 * l) }
}

/// ‖(VΩ)² + I‖_max; zero exactly for pure states.
pub fn purity_defect(state: &GaussianPureState) -> f64 {
    covariance_defect(&state.v)
}

pub(crate) fn covariance_defect(v: &DMatrix<f64>) -> f64 {
    let n = v.nrows();
    let vo = v * symplectic_form(n / 2);
    (&vo * &vo + DMatrix::<f64>::identity(n, n)).amax()
}

/// Orthogonal symplectic K = [[X, −Y], [Y, X]] of the passive unitary Q = X + iY.
pub fn passive_symplectic(q: &DMatrix<C64>) -> DMatrix<f64> {
    let l = q.nrows();
    let mut k = DMatrix::zeros(2 * l, 2 * l);
    for r in 0..l {
        for c in 0..l {
            let z = q[(r, c)];
            k[(r, c)] = z.re;
            k[(r, l + c)] = -z.im;
            k[(l + r, c)] = z.im;
            k[(l + r, l + c)] = z.re;
        }
    }
    k
}

/// Random pure state V = Kᵀ D K, D = diag(e^{−2r_j}, e^{2r_j}) with r_j uniform in
/// [0, squeeze_bound] and K from the unitary factor of a complex Gaussian matrix; the mean
/// has independent normal entries of standard deviation `mean_scale`.
pub fn random_pure(modes: usize, squeeze_bound: f64, mean_scale: f64, seed: u64) -> GaussianPureState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_pure_with(modes, squeeze_bound, mean_scale, &mut rng)
}

pub fn random_pure_with<R: Rng>(modes: usize, squeeze_bound: f64, mean_scale: f64, rng: &mut R) -> GaussianPureState {
    let z = DMatrix::from_fn(modes, modes, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re, im)
    });
    let q = z.qr().q();
    let k = passive_symplectic(&q);
    let mut diag = DVector::zeros(2 * modes);
    for j in 0..modes {
        let r = rng.random::<f64>() * squeeze_bound;
        diag[j] = (-2.0 * r).exp();
        diag[modes + j] = (2.0 * r).exp();
    }
    let mut v = k.transpose() * DMatrix::from_diagonal(&diag) * &k;
    symmetrize(&mut v);
    let d = DVector::from_fn(2 * modes, |_, _| {
        let g: f64 = rng.sample(StandardNormal);
        mean_scale * g
    });
    GaussianPureState { d, v }
}

pub(crate) fn symmetrize(v: &mut DMatrix<f64>) {
    let n = v.nrows();
    for r in 0..n {
        for c in r + 1..n {
            let m = 0.5 * (v[(r, c)] + v[(c, r)]);
            v[(r, c)] = m;
            v[(c, r)] = m;
        }
    }
}

/// Pull a nearly pure covariance back to (VΩ)² = −I by the Newton iteration
/// V ← (V + ΩV⁻¹Ωᵀ)/2, which maps every symplectic eigenvalue ν to (ν + 1/ν)/2.
pub fn project_pure(v: &DMatrix<f64>, tol: f64) -> Result<DMatrix<f64>> {
    let n = v.nrows();
    let om = symplectic_form(n / 2);
    let mut cur = v.clone();
    let mut defect = covariance_defect(&cur);
    for _ in 0..40 {
        if defect <= tol {
            return Ok(cur);
        }
        let inv = cur.clone().cholesky().ok_or(Error::PurityProjection { defect })?.inverse();
        let mut next = (&cur + &om * inv * om.transpose()) * 0.5;
        symmetrize(&mut next);
        let nd = covariance_defect(&next);
        cur = next;
        if nd >= defect && nd > tol {
            defect = nd;
            break;
        }
        defect = nd;
    }
    if defect <= tol {
        Ok(cur)
    } else {
        Err(Error::PurityProjection { defect })
    }
}
