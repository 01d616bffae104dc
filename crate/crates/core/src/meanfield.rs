//! Two-sublattice mean field: a product state |ψ_o⟩⊗|ψ_e⟩⊗|ψ_o⟩⊗... found by alternating
//! diagonalization of the local Hamiltonians, plus the perturbative insulator/superfluid boundary.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{precondition, Error, Result};
use crate::linalg::{lowest_eigenpair_hermitian, lowest_eigenpair_real};
use crate::model::{atomic_ground_by_enumeration, ModelParams};
#[cfg(not(feature = "std"))]
use num_traits::Float;

type C64 = Complex<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sublattice {
    Odd,
    Even,
}

/// Normalized state on the local Fock levels 0..=n_max.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalState {
    pub coefficients: Vec<C64>,
}

impl LocalState {
    pub fn fock(n: usize, n_max: usize) -> Self {
        let mut c = vec![C64::new(0.0, 0.0); n_max + 1];
        c[n] = C64::new(1.0, 0.0);
        LocalState { coefficients: c }
    }

    /// Truncated coherent state |α⟩, renormalized.
    pub fn coherent(alpha: C64, n_max: usize) -> Self {
        let mut c = Vec::with_capacity(n_max + 1);
        let mut term = C64::new(1.0, 0.0);
        for n in 0..=n_max {
            if n > 0 {
                term = term * alpha / (n as f64).sqrt();
            }
            c.push(term);
        }
        let mut s = LocalState { coefficients: c };
        s.normalize();
        s
    }

    pub fn n_max(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn norm(&self) -> f64 {
        self.coefficients.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    fn normalize(&mut self) {
        let n = self.norm();
        self.coefficients.iter_mut().for_each(|c| *c /= n);
    }

    /// ⟨a⟩
    pub fn a(&self) -> C64 {
        let c = &self.coefficients;
        (1..c.len()).map(|n| c[n - 1].conj() * c[n] * (n as f64).sqrt()).sum()
    }

    /// ⟨a²⟩
    pub fn a2(&self) -> C64 {
        let c = &self.coefficients;
        (2..c.len())
            .map(|n| c[n - 2].conj() * c[n] * ((n * (n - 1)) as f64).sqrt())
            .sum()
    }

    /// ⟨n⟩
    pub fn n(&self) -> f64 {
        self.coefficients.iter().enumerate().map(|(n, c)| n as f64 * c.norm_sqr()).sum()
    }

    /// ⟨n(n−1)⟩
    pub fn nn1(&self) -> f64 {
        self.coefficients
            .iter()
            .enumerate()
            .map(|(n, c)| (n * n.saturating_sub(1)) as f64 * c.norm_sqr())
            .sum()
    }

    /// ⟨ψ|M|ψ⟩ for a Hermitian matrix on the same levels.
    pub fn expectation(&self, m: &DMatrix<C64>) -> f64 {
        let c = &self.coefficients;
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..c.len() {
            for k in 0..c.len() {
                acc += c[i].conj() * m[(i, k)] * c[k];
            }
        }
        acc.re
    }

    /// Multiply level n by e^{−inθ}; maps ⟨a⟩ → ⟨a⟩e^{−iθ}.
    fn rotate(&mut self, theta: f64) {
        for (n, c) in self.coefficients.iter_mut().enumerate() {
            *c *= C64::from_polar(1.0, -(n as f64) * theta);
        }
    }

    /// Make the largest coefficient real and positive.
    fn fix_global_phase(&mut self) {
        let mut big = C64::new(0.0, 0.0);
        for c in &self.coefficients {
            if c.norm() > big.norm() + 1e-12 {
                big = *c;
            }
        }
        if big.norm() > 0.0 {
            let ph = big.conj() / big.norm();
            self.coefficients.iter_mut().for_each(|c| *c *= ph);
        }
    }
}

/// Sublattice order parameters fed into (or read from) the local Hamiltonians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanFields {
    pub phi_o: C64,
    pub phi_e: C64,
    pub rho_o: f64,
    pub rho_e: f64,
}

impl MeanFields {
    pub fn real(phi_o: f64, phi_e: f64, rho_o: f64, rho_e: f64) -> Self {
        MeanFields {
            phi_o: C64::new(phi_o, 0.0),
            phi_e: C64::new(phi_e, 0.0),
            rho_o,
            rho_e,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScfOptions {
    /// Linear mixing weight λ ∈ (0, 1] of the new mean fields.
    pub mixing: f64,
    /// Energy tolerance per pair, in units of U.
    pub tol_energy: f64,
    /// Tolerance on the change of φ and ρ.
    pub tol_params: f64,
    pub max_iterations: usize,
    /// Anderson history length; 0 gives plain linear mixing.
    pub anderson_depth: usize,
}

impl Default for ScfOptions {
    fn default() -> Self {
        ScfOptions {
            mixing: 0.5,
            tol_energy: 1e-10,
            tol_params: 1e-8,
            max_iterations: 10_000,
            anderson_depth: 5,
        }
    }
}

pub const DEFAULT_N_MAX: usize = 20;
pub const DEFAULT_RANDOM_STARTS: usize = 8;
pub const DEFAULT_CLASSIFY_TOL: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub struct MFSolution {
    pub psi_o: LocalState,
    pub psi_e: LocalState,
    pub phi_o: C64,
    pub phi_e: C64,
    pub rho_o: f64,
    pub rho_e: f64,
    pub e_pair: f64,
    pub converged: bool,
    pub iterations: usize,
}

impl MFSolution {
    fn from_states(mut psi_o: LocalState, mut psi_e: LocalState, params: &ModelParams, converged: bool, iterations: usize) -> Self {
        if psi_o.n() < psi_e.n() {
            core::mem::swap(&mut psi_o, &mut psi_e);
        }
        // gauge: U(1) rotation at ε = 0, otherwise only the Z₂ sign flip is available
        let phi_o = psi_o.a();
        let reference = if phi_o.norm() > 1e-300 { phi_o } else { psi_e.a() };
        if reference.norm() > 1e-300 {
            if params.eps == 0.0 {
                let theta = reference.arg();
                psi_o.rotate(theta);
                psi_e.rotate(theta);
            } else if reference.re < 0.0 {
                psi_o.rotate(core::f64::consts::PI);
                psi_e.rotate(core::f64::consts::PI);
            }
        }
        psi_o.fix_global_phase();
        psi_e.fix_global_phase();
        let e_pair = mf_energy_per_pair(&psi_o, &psi_e, params);
        MFSolution {
            phi_o: psi_o.a(),
            phi_e: psi_e.a(),
            rho_o: psi_o.n(),
            rho_e: psi_e.n(),
            psi_o,
            psi_e,
            e_pair,
            converged,
            iterations,
        }
    }

    pub fn fields(&self) -> MeanFields {
        MeanFields { phi_o: self.phi_o, phi_e: self.phi_e, rho_o: self.rho_o, rho_e: self.rho_e }
    }
}

/// Phases of the two-sublattice classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PhaseLabel {
    MI,
    DW,
    SF,
    SS,
}

impl PhaseLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            PhaseLabel::MI => "MI",
            PhaseLabel::DW => "DW",
            PhaseLabel::SF => "SF",
            PhaseLabel::SS => "SS",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "MI" => Some(PhaseLabel::MI),
            "DW" => Some(PhaseLabel::DW),
            "SF" => Some(PhaseLabel::SF),
            "SS" => Some(PhaseLabel::SS),
            _ => None,
        }
    }

    pub fn is_insulating(self) -> bool {
        matches!(self, PhaseLabel::MI | PhaseLabel::DW)
    }
}

/// Label from sublattice order parameters: coherence decides insulator vs superfluid,
/// the density imbalance decides homogeneous vs staggered.
pub fn classify_order(phi_o: f64, phi_e: f64, rho_o: f64, rho_e: f64, tol_phi: f64, tol_rho: f64) -> PhaseLabel {
    let coherent = phi_o.abs().max(phi_e.abs()) > tol_phi;
    let staggered = (rho_o - rho_e).abs() > tol_rho;
    match (coherent, staggered) {
        (false, false) => PhaseLabel::MI,
        (false, true) => PhaseLabel::DW,
        (true, false) => PhaseLabel::SF,
        (true, true) => PhaseLabel::SS,
    }
}

pub fn classify(sol: &MFSolution, tol_phi: f64, tol_rho: f64) -> PhaseLabel {
    classify_order(sol.phi_o.norm(), sol.phi_e.norm(), sol.rho_o, sol.rho_e, tol_phi, tol_rho)
}

/// ĥ = −(μ − 2Vρ_other) n − (ε/2)(a² + a†²) + (U/2) n(n−1) − 2J(φ_other* a + φ_other a†).
///
/// The operator is the same on both sublattices; `sublattice` only names the site it acts on.
pub fn local_hamiltonian(
    _sublattice: Sublattice,
    phi_other: C64,
    rho_other: f64,
    params: &ModelParams,
    n_max: usize,
) -> DMatrix<C64> {
    let d = n_max + 1;
    let mut h = DMatrix::from_element(d, d, C64::new(0.0, 0.0));
    let mu_eff = params.mu - 2.0 * params.v * rho_other;
    for n in 0..d {
        let nf = n as f64;
        h[(n, n)] = C64::new(-mu_eff * nf + 0.5 * params.u * nf * (nf - 1.0), 0.0);
        if n >= 1 {
            // ⟨n−1|a|n⟩ = √n
            let s = nf.sqrt();
            h[(n - 1, n)] = -2.0 * params.j * phi_other.conj() * s;
            h[(n, n - 1)] = -2.0 * params.j * phi_other * s;
        }
        if n >= 2 {
            let s = (nf * (nf - 1.0)).sqrt();
            h[(n - 2, n)] = C64::new(-0.5 * params.eps * s, 0.0);
            h[(n, n - 2)] = C64::new(-0.5 * params.eps * s, 0.0);
        }
    }
    h
}

/// Ground state of the local Hamiltonian, using a real eigensolve when φ_other is real.
fn local_ground(phi_other: C64, rho_other: f64, params: &ModelParams, n_max: usize) -> LocalState {
    let h = local_hamiltonian(Sublattice::Odd, phi_other, rho_other, params, n_max);
    if phi_other.im == 0.0 {
        let (_, v) = lowest_eigenpair_real(h.map(|z| z.re));
        LocalState { coefficients: v.iter().map(|x| C64::new(*x, 0.0)).collect() }
    } else {
        let (_, v) = lowest_eigenpair_hermitian(h);
        LocalState { coefficients: v.iter().copied().collect() }
    }
}

/// Product-state energy per pair of sites:
/// −μ(ρ_o+ρ_e) + (U/2)Σ⟨n(n−1)⟩ − ε Σ Re⟨a²⟩ − 2J(φ_o*φ_e + c.c.) + 2Vρ_oρ_e.
pub fn mf_energy_per_pair(psi_o: &LocalState, psi_e: &LocalState, params: &ModelParams) -> f64 {
    let (po, pe) = (psi_o.a(), psi_e.a());
    let (ro, re) = (psi_o.n(), psi_e.n());
    -params.mu * (ro + re) + 0.5 * params.u * (psi_o.nn1() + psi_e.nn1())
        - params.eps * (psi_o.a2().re + psi_e.a2().re)
        - 4.0 * params.j * (po.conj() * pe).re
        + 2.0 * params.v * ro * re
}

/// The same energy assembled from the local Hamiltonians built with input fields `inputs`
/// (ĥ_o sees the even inputs, ĥ_e the odd ones) plus the double-counting corrections.
pub fn mf_energy_from_local(psi_o: &LocalState, psi_e: &LocalState, inputs: &MeanFields, params: &ModelParams) -> f64 {
    let n_max = psi_o.n_max();
    let ho = local_hamiltonian(Sublattice::Odd, inputs.phi_e, inputs.rho_e, params, n_max);
    let he = local_hamiltonian(Sublattice::Even, inputs.phi_o, inputs.rho_o, params, psi_e.n_max());
    let (po, pe) = (psi_o.a(), psi_e.a());
    let (ro, re) = (psi_o.n(), psi_e.n());
    psi_o.expectation(&ho) + psi_e.expectation(&he) - 2.0 * params.v * inputs.rho_o * inputs.rho_e
        + 4.0 * params.j * (inputs.phi_o.conj() * inputs.phi_e).re
        + 2.0 * params.v * (ro - inputs.rho_o) * (re - inputs.rho_e)
        - 4.0 * params.j * ((po - inputs.phi_o).conj() * (pe - inputs.phi_e)).re
}

pub fn mf_energy(sol: &MFSolution, params: &ModelParams) -> f64 {
    mf_energy_per_pair(&sol.psi_o, &sol.psi_e, params)
}

fn pack(f: &MeanFields) -> [f64; 6] {
    [f.phi_o.re, f.phi_o.im, f.rho_o, f.phi_e.re, f.phi_e.im, f.rho_e]
}

fn unpack(x: &[f64; 6]) -> MeanFields {
    MeanFields { phi_o: C64::new(x[0], x[1]), phi_e: C64::new(x[3], x[4]), rho_o: x[2], rho_e: x[5] }
}

/// Anderson extrapolation (type II) over the last `depth` differences of the sweep map.
struct Anderson {
    depth: usize,
    xs: Vec<[f64; 6]>,
    fs: Vec<[f64; 6]>,
}

impl Anderson {
    fn new(depth: usize) -> Self {
        Anderson { depth, xs: Vec::new(), fs: Vec::new() }
    }

    fn reset(&mut self) {
        self.xs.clear();
        self.fs.clear();
    }

    /// Next input given the current input `x` and its residual `f = G(x) − x`.
    fn step(&mut self, x: [f64; 6], f: [f64; 6], beta: f64) -> [f64; 6] {
        let mut out = [0.0; 6];
        for r in 0..6 {
            out[r] = x[r] + beta * f[r];
        }
        if self.depth == 0 {
            return out;
        }
        self.xs.push(x);
        self.fs.push(f);
        if self.xs.len() > self.depth + 1 {
            self.xs.remove(0);
            self.fs.remove(0);
        }
        let m = self.xs.len() - 1;
        if m == 0 {
            return out;
        }
        let df = DMatrix::from_fn(6, m, |r, c| self.fs[c + 1][r] - self.fs[c][r]);
        let dx = DMatrix::from_fn(6, m, |r, c| self.xs[c + 1][r] - self.xs[c][r]);
        let svd = df.clone().svd(true, true);
        let cutoff = 1e-10 * svd.singular_values.max();
        if let Ok(gamma) = svd.solve(&DVector::from_row_slice(&f), cutoff) {
            for r in 0..6 {
                for c in 0..m {
                    out[r] -= (dx[(r, c)] + beta * df[(r, c)]) * gamma[c];
                }
            }
        }
        out
    }
}

/// Alternating self-consistent solve.
///
/// One sweep diagonalizes ĥ_o with the current even fields, then ĥ_e with the resulting odd
/// fields. The next input mixes the sweep output with weight λ and, for `anderson_depth > 0`,
/// extrapolates over recent sweeps; this removes most of the critical slowing down near
/// continuous transitions without changing the fixed points. λ is halved (down to 1/64) after
/// three consecutive energy increases, and the history is dropped when the residual grows
/// tenfold over its best value. Non-convergence is reported through `converged = false`.
pub fn scf_solve(params: &ModelParams, n_max: usize, init: MeanFields, opts: &ScfOptions) -> Result<MFSolution> {
    if n_max < 1 {
        return Err(precondition("n_max must be at least 1"));
    }
    if !(opts.mixing > 0.0 && opts.mixing <= 1.0) {
        return Err(precondition("mixing must lie in (0, 1]"));
    }
    let mut x = pack(&init);
    let mut lambda = opts.mixing;
    let mut e_prev = f64::NAN;
    let mut rises = 0;
    let mut best_res = f64::INFINITY;
    let mut acc = Anderson::new(opts.anderson_depth);
    let mut states = (LocalState::fock(0, n_max), LocalState::fock(0, n_max));
    for it in 1..=opts.max_iterations {
        let f = unpack(&x);
        let psi_o = local_ground(f.phi_e, f.rho_e, params, n_max);
        let (po, ro) = (psi_o.a(), psi_o.n());
        let psi_e = local_ground(po, ro, params, n_max);
        let g = pack(&MeanFields { phi_o: po, phi_e: psi_e.a(), rho_o: ro, rho_e: psi_e.n() });
        let mut resid = [0.0; 6];
        for r in 0..6 {
            resid[r] = g[r] - x[r];
        }
        let res = resid.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let e = mf_energy_per_pair(&psi_o, &psi_e, params);
        states = (psi_o, psi_e);
        if it > 1 && (e - e_prev).abs() < opts.tol_energy * params.u && res < opts.tol_params {
            return Ok(MFSolution::from_states(states.0, states.1, params, true, it));
        }
        if it > 1 && e > e_prev + 1e-13 * e.abs().max(1.0) {
            rises += 1;
            if rises >= 3 {
                lambda = (lambda * 0.5).max(1.0 / 64.0);
                rises = 0;
                acc.reset();
            }
        } else {
            rises = 0;
        }
        if res > 10.0 * best_res {
            acc.reset();
        }
        best_res = best_res.min(res);
        e_prev = e;
        x = acc.step(x, resid, lambda);
    }
    Ok(MFSolution::from_states(states.0, states.1, params, false, opts.max_iterations))
}

/// Educated starting fields: atomic limit, uniform coherent, staggered coherent.
pub fn educated_guesses(params: &ModelParams, n_max: usize) -> Vec<MeanFields> {
    let at = atomic_ground_by_enumeration(params, n_max as u32);
    let w = params.u + 2.0 * params.v;
    let s = params.mu + params.eps + 2.0 * params.j;
    let alpha = if s > 0.0 { (s / w).sqrt() } else { 0.0 };
    let a_st = if alpha > 0.0 { alpha } else { 1.0 };
    vec![
        MeanFields::real(0.0, 0.0, at.n_odd as f64, at.n_even as f64),
        MeanFields::real(alpha, alpha, alpha * alpha, alpha * alpha),
        MeanFields::real(1.3 * a_st, 0.5 * a_st, 1.69 * a_st * a_st, 0.25 * a_st * a_st),
    ]
}

/// Best converged solution over the educated guesses and `n_random` seeded random starts.
pub fn multistart_mf(params: &ModelParams, n_max: usize, n_random: usize, seed: u64, opts: &ScfOptions) -> Result<MFSolution> {
    let mut starts = educated_guesses(params, n_max);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = params.u + 2.0 * params.v;
    let s = (params.mu + params.eps + 2.0 * params.j).max(0.0);
    let amp = 2.0 * (s / w).sqrt().max(1.0);
    for _ in 0..n_random {
        let po: f64 = rng.random_range(-amp..amp);
        let pe: f64 = rng.random_range(-amp..amp);
        let (uo, ue): (f64, f64) = (rng.random(), rng.random());
        starts.push(MeanFields::real(po, pe, po * po + uo, pe * pe + ue));
    }
    let mut best: Option<MFSolution> = None;
    let mut worst_iters = 0;
    for init in starts {
        let sol = scf_solve(params, n_max, init, opts)?;
        worst_iters = worst_iters.max(sol.iterations);
        if !sol.converged {
            continue;
        }
        if best.as_ref().is_none_or(|b| sol.e_pair < b.e_pair - 1e-13 * b.e_pair.abs().max(1.0)) {
            best = Some(sol);
        }
    }
    best.ok_or(Error::NoConvergence { iterations: worst_iters, residual: f64::NAN })
}

/// Second-order susceptibilities of the atomic state (n_o, n_e) to a sublattice field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiPair {
    pub chi_o: f64,
    pub chi_e: f64,
}

fn chi_single(n: u32, n_other: u32, mu_u: f64, v_u: f64) -> Result<f64> {
    let n = n as f64;
    let shift = 2.0 * n_other as f64 * v_u;
    let remove = mu_u - shift + 1.0 - n;
    let add = n - mu_u + shift;
    if add.abs() < 1e-12 || (n > 0.0 && remove.abs() < 1e-12) {
        return Err(Error::Degenerate("susceptibility denominator vanishes at a lobe corner"));
    }
    let mut chi = (n + 1.0) / add;
    if n > 0.0 {
        chi += n / remove;
    }
    Ok(chi)
}

/// χ_o, χ_e from the perturbative expansion around the atomic state.
pub fn chi_pair(n_o: u32, n_e: u32, mu_over_u: f64, v_over_u: f64) -> Result<ChiPair> {
    let chi_o = chi_single(n_o, n_e, mu_over_u, v_over_u)?;
    let chi_e = chi_single(n_e, n_o, mu_over_u, v_over_u)?;
    if chi_o < 0.0 || chi_e < 0.0 {
        return Err(Error::Degenerate("occupations outside their atomic lobe give negative susceptibility"));
    }
    Ok(ChiPair { chi_o, chi_e })
}

/// Insulator/superfluid boundary J_c = U / (2√(χ_o χ_e)) at ε = 0, with the
/// occupations taken from the atomic limit at chemical potential `mu`.
pub fn critical_hopping(mu: f64, params: &ModelParams) -> Result<f64> {
    if params.eps != 0.0 {
        return Err(precondition("the perturbative boundary holds only at eps = 0"));
    }
    let p = params.with_mu(mu);
    let at = crate::model::atomic_ground_occupations(&p)?;
    let chi = chi_pair(at.n_odd, at.n_even, mu / p.u, p.v / p.u)?;
    Ok(p.u / (2.0 * (chi.chi_o * chi.chi_e).sqrt()))
}

/// Eigenvalues (κ+, κ−) of the second-order energy curvature in (φ_o, φ_e);
/// κ− changes sign at J = J_c.
pub fn curvature_eigenvalues(j: f64, chi: &ChiPair, u: f64) -> (f64, f64) {
    let (co, ce) = (chi.chi_o, chi.chi_e);
    let root = ((ce - co).powi(2) + 16.0 * j * j * co * co * ce * ce / (u * u)).sqrt();
    let pre = 2.0 * j * j / u;
    (pre * (ce + co + root), pre * (ce + co - root))
}
