//! Couplings of the chain Hamiltonian
//!
//! H = Σ_j [ −μ n_j + (U/2) n_j(n_j−1) − (ε/2)(a_j² + a_j†²) + V n_j n_{j+1} − J(a_j†a_{j+1} + h.c.) ]
//!
//! on a periodic ring, and the exact ground state of its atomic limit J = ε = 0.

use crate::error::{Error, Result};
#[cfg(not(feature = "std"))]
use num_traits::Float;

/// Hamiltonian couplings in absolute energy units.
///
/// Fields are public so that diagnostic sweeps may push `mu` below zero;
/// [`ModelParams::validate`] enforces the physical domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub mu: f64,
    pub u: f64,
    pub v: f64,
    pub j: f64,
    pub eps: f64,
}

impl ModelParams {
    /// Validated constructor.
    pub fn new(mu: f64, u: f64, v: f64, j: f64, eps: f64) -> Result<Self> {
        let p = ModelParams { mu, u, v, j, eps };
        p.validate()?;
        Ok(p)
    }

    /// Build from the dimensionless ratios μ/U, 2J/U, 2V/U, ε/U with U = 1.
    pub fn from_ratios(mu_u: f64, two_j_u: f64, two_v_u: f64, eps_u: f64) -> Result<Self> {
        Self::new(mu_u, 1.0, 0.5 * two_v_u, 0.5 * two_j_u, eps_u)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.mu, self.u, self.v, self.j, self.eps];
        if all.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("all couplings must be finite"));
        }
        if self.u <= 0.0 {
            return Err(Error::InvalidParameter("u must be positive"));
        }
        if self.mu < 0.0 {
            return Err(Error::InvalidParameter("mu must be nonnegative"));
        }
        if self.v < 0.0 {
            return Err(Error::InvalidParameter("v must be nonnegative"));
        }
        if self.j < 0.0 {
            return Err(Error::InvalidParameter("j must be nonnegative"));
        }
        if self.eps < 0.0 {
            return Err(Error::InvalidParameter("eps must be nonnegative"));
        }
        Ok(())
    }

    /// Copy with a different chemical potential.
    pub fn with_mu(mut self, mu: f64) -> Self {
        self.mu = mu;
        self
    }
}

/// Periodic chain with a truncated local Fock space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LatticeSpec {
    pub sites: usize,
    pub n_max: usize,
}

impl LatticeSpec {
    pub fn new(sites: usize, n_max: usize) -> Result<Self> {
        let l = LatticeSpec { sites, n_max };
        l.validate()?;
        Ok(l)
    }

    pub fn validate(&self) -> Result<()> {
        if self.sites < 4 || self.sites % 2 != 0 {
            return Err(Error::InvalidParameter("L must be even and ≥ 4"));
        }
        if self.n_max < 1 {
            return Err(Error::InvalidParameter("n_max must be at least 1"));
        }
        Ok(())
    }

    pub fn pairs(&self) -> usize {
        self.sites / 2
    }
}

/// Check both parameter sets, reporting the first violated invariant.
pub fn validate(params: &ModelParams, lattice: &LatticeSpec) -> Result<()> {
    params.validate()?;
    lattice.validate()
}

/// Fock occupations of the two sublattices at J = ε = 0, with `n_odd ≥ n_even`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtomicGroundState {
    pub n_odd: u32,
    pub n_even: u32,
    pub energy_per_pair: f64,
}

/// Energy per pair of sites of the product Fock state |n_o, n_e, n_o, n_e, ...⟩ at J = ε = 0.
pub fn atomic_energy_per_pair(n_o: u32, n_e: u32, params: &ModelParams) -> f64 {
    let (no, ne) = (n_o as f64, n_e as f64);
    -params.mu * (no + ne)
        + 2.0 * params.v * no * ne
        + 0.5 * params.u * (no * (no - 1.0) + ne * (ne - 1.0))
}

fn ceil_occupation(x: f64) -> u32 {
    let c = x.ceil();
    if c <= 0.0 {
        0
    } else {
        c as u32
    }
}

/// Closed-form atomic-limit ground state.
///
/// On integer μ/U (2V > U) or integer μ/(U+2V) (2V < U) neighbouring occupations
/// are degenerate; the ceiling is applied exactly as written, so e.g. μ = U,
/// 2V > U yields n_o = 1 although n_o = 2 has the same energy.
pub fn atomic_ground_occupations(params: &ModelParams) -> Result<AtomicGroundState> {
    let two_v = 2.0 * params.v;
    if two_v == params.u {
        return Err(Error::Degenerate(
            "2V = U: many Fock configurations share the atomic ground energy",
        ));
    }
    let (n_odd, n_even) = if two_v > params.u {
        (ceil_occupation(params.mu / params.u), 0)
    } else {
        let w = params.u + two_v;
        (
            ceil_occupation(params.mu / w),
            ceil_occupation((params.mu - two_v) / w),
        )
    };
    Ok(AtomicGroundState {
        n_odd,
        n_even,
        energy_per_pair: atomic_energy_per_pair(n_odd, n_even, params),
    })
}

/// Exhaustive minimum of [`atomic_energy_per_pair`] over 0 ≤ n_e ≤ n_o ≤ n_max.
///
/// Ties resolve to the lexicographically smallest (n_o, n_e). Valid on the
/// degenerate line 2V = U as well.
pub fn atomic_ground_by_enumeration(params: &ModelParams, n_max: u32) -> AtomicGroundState {
    let mut best = AtomicGroundState {
        n_odd: 0,
        n_even: 0,
        energy_per_pair: 0.0,
    };
    for n_o in 0..=n_max {
        for n_e in 0..=n_o {
            let e = atomic_energy_per_pair(n_o, n_e, params);
            if e < best.energy_per_pair {
                best = AtomicGroundState {
                    n_odd: n_o,
                    n_even: n_e,
                    energy_per_pair: e,
                };
            }
        }
    }
    best
}
