//! Exact ground states on small periodic chains in a truncated Fock basis.
//!
//! The Hamiltonian is real symmetric in the occupation basis, so ground states are
//! stored as real coefficient vectors. With ε ≠ 0 particle number is broken down to
//! the parity (−1)^N, and the two parity blocks are diagonalized separately.

use alloc::vec;
use alloc::vec::Vec;


use crate::error::{Error, Result};
use crate::linalg::{lanczos_lowest, lowest_eigenpair_real, CsrMatrix, LanczosOptions};
use crate::model::{LatticeSpec, ModelParams};
#[cfg(not(feature = "std"))]
use num_traits::Float;

pub const DEFAULT_DIM_CAP: usize = 1 << 20;

/// Mixed-radix occupation basis; site 0 is the least significant digit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FockBasis {
    pub lattice: LatticeSpec,
    pub dimension: usize,
    strides: Vec<usize>,
}

impl FockBasis {
    pub fn new(lattice: LatticeSpec, cap: usize) -> Result<Self> {
        lattice.validate()?;
        let radix = (lattice.n_max + 1) as u128;
        let mut dim: u128 = 1;
        let mut strides = Vec::with_capacity(lattice.sites);
        for _ in 0..lattice.sites {
            strides.push(dim as usize);
            dim = dim.saturating_mul(radix);
            if dim > cap as u128 {
                let full = radix.checked_pow(lattice.sites as u32).unwrap_or(u128::MAX);
                return Err(Error::DimensionOverflow { dim: full, cap });
            }
        }
        Ok(FockBasis { lattice, dimension: dim as usize, strides })
    }

    pub fn radix(&self) -> usize {
        self.lattice.n_max + 1
    }

    pub fn stride(&self, site: usize) -> usize {
        self.strides[site]
    }

    pub fn decode(&self, mut index: usize, occ: &mut [usize]) {
        let r = self.radix();
        for o in occ.iter_mut() {
            *o = index % r;
            index /= r;
        }
    }

    pub fn encode(&self, occ: &[usize]) -> usize {
        occ.iter().zip(&self.strides).map(|(n, s)| n * s).sum()
    }

    pub fn occupation(&self, index: usize, site: usize) -> usize {
        (index / self.strides[site]) % self.radix()
    }
}

/// Block of the Hamiltonian that is diagonalized.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sector {
    Full,
    Even,
    Odd,
}

impl Sector {
    fn admits(self, total: usize) -> bool {
        match self {
            Sector::Full => true,
            Sector::Even => total % 2 == 0,
            Sector::Odd => total % 2 == 1,
        }
    }
}

/// How parity blocks are used by [`solve`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SectorMode {
    /// Parity blocks when ε ≠ 0, the full space otherwise.
    Auto,
    Always,
    Never,
}

/// Sparse Hamiltonian restricted to a sector, with the sector-to-basis map.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeHamiltonian {
    pub basis: FockBasis,
    pub sector: Sector,
    /// Full-basis index of each sector state (ascending).
    pub states: Vec<usize>,
    pub matrix: CsrMatrix,
}

/// Hamiltonian on the full Fock basis with the default dimension cap.
pub fn build_hamiltonian(params: &ModelParams, lattice: &LatticeSpec) -> Result<LatticeHamiltonian> {
    let basis = FockBasis::new(*lattice, DEFAULT_DIM_CAP)?;
    Ok(build_sector_hamiltonian(params, &basis, Sector::Full))
}

fn diagonal_energy(params: &ModelParams, occ: &[usize]) -> f64 {
    let l = occ.len();
    let mut e = 0.0;
    for j in 0..l {
        let n = occ[j] as f64;
        let m = occ[(j + 1) % l] as f64;
        e += -params.mu * n + 0.5 * params.u * n * (n - 1.0) + params.v * n * m;
    }
    e
}

pub fn build_sector_hamiltonian(params: &ModelParams, basis: &FockBasis, sector: Sector) -> LatticeHamiltonian {
    let l = basis.lattice.sites;
    let n_max = basis.lattice.n_max;
    let mut occ = vec![0usize; l];
    let mut states = Vec::new();
    let mut lookup = vec![u32::MAX; basis.dimension];
    for idx in 0..basis.dimension {
        basis.decode(idx, &mut occ);
        if sector.admits(occ.iter().sum()) {
            lookup[idx] = states.len() as u32;
            states.push(idx);
        }
    }
    let matrix = CsrMatrix::from_rows(states.len(), |row, entries| {
        let idx = states[row];
        basis.decode(idx, &mut occ);
        entries.push((row as u32, diagonal_energy(params, &occ)));
        let mut push = |target: usize, amp: f64| {
            let col = lookup[target];
            debug_assert!(col != u32::MAX);
            entries.push((col, amp));
        };
        for j in 0..l {
            let n = occ[j];
            if params.j != 0.0 {
                for k in [(j + 1) % l, (j + l - 1) % l] {
                    // a_j† a_k moves one boson from k to j
                    if occ[k] > 0 && n < n_max {
                        let amp = -params.j * (((n + 1) * occ[k]) as f64).sqrt();
                        push(idx + basis.stride(j) - basis.stride(k), amp);
                    }
                }
            }
            if params.eps != 0.0 {
                if n + 2 <= n_max {
                    let amp = -0.5 * params.eps * (((n + 1) * (n + 2)) as f64).sqrt();
                    push(idx + 2 * basis.stride(j), amp);
                }
                if n >= 2 {
                    let amp = -0.5 * params.eps * ((n * (n - 1)) as f64).sqrt();
                    push(idx - 2 * basis.stride(j), amp);
                }
            }
        }
    });
    LatticeHamiltonian { basis: basis.clone(), sector, states, matrix }
}

/// Solver settings for exact diagonalization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdOptions {
    /// Residual tolerance ‖Hψ − Eψ‖.
    pub tol: f64,
    /// Sector dimension at or below which a dense eigensolve is used.
    pub dense_threshold: usize,
    pub dim_cap: usize,
    pub sectors: SectorMode,
    pub lanczos: LanczosOptions,
}

impl Default for EdOptions {
    fn default() -> Self {
        EdOptions {
            tol: 1e-10,
            dense_threshold: 512,
            dim_cap: DEFAULT_DIM_CAP,
            sectors: SectorMode::Auto,
            lanczos: LanczosOptions::default(),
        }
    }
}

/// Ground state with coefficients on the full Fock basis.
#[derive(Debug, Clone, PartialEq)]
pub struct EDGroundState {
    pub basis: FockBasis,
    pub energy: f64,
    pub coefficients: Vec<f64>,
    pub parity: i8,
    /// Set when the two parity sectors are within 1e−12 of each other, or when a
    /// full-space solve returns a state without definite parity.
    pub degenerate: bool,
    pub residual: f64,
}

/// Deterministic start vector with no special symmetry.
fn start_vector(n: usize) -> Vec<f64> {
    (0..n).map(|i| 1.0 + 0.5 * ((i * 7919) % 101) as f64 / 101.0).collect()
}

/// Smallest eigenpair of a sector Hamiltonian, returned as (energy, sector vector, residual).
pub fn ground_state_sector(h: &LatticeHamiltonian, opts: &EdOptions) -> Result<(f64, Vec<f64>, f64)> {
    let n = h.states.len();
    if n == 0 {
        return Err(crate::error::precondition("empty sector"));
    }
    if n <= opts.dense_threshold {
        let (e, v) = lowest_eigenpair_real(h.matrix.to_dense());
        let v: Vec<f64> = v.iter().copied().collect();
        let mut hv = vec![0.0; n];
        h.matrix.mul_vec(&v, &mut hv);
        let res = hv.iter().zip(&v).map(|(a, b)| (a - e * b).powi(2)).sum::<f64>().sqrt();
        if res > opts.tol {
            return Err(Error::NoConvergence { iterations: 0, residual: res });
        }
        return Ok((e, v, res));
    }
    let lopts = LanczosOptions { tol: opts.tol, ..opts.lanczos };
    let ep = lanczos_lowest(n, |x, y| h.matrix.mul_vec(x, y), &start_vector(n), &lopts)?;
    Ok((ep.value, ep.vector, ep.residual))
}

/// Ground state of a single (sector) Hamiltonian embedded in the full basis.
pub fn ground_state(h: &LatticeHamiltonian, opts: &EdOptions) -> Result<EDGroundState> {
    let (energy, v, residual) = ground_state_sector(h, opts)?;
    let mut coefficients = vec![0.0; h.basis.dimension];
    for (k, &idx) in h.states.iter().enumerate() {
        coefficients[idx] = v[k];
    }
    let mut st = EDGroundState {
        basis: h.basis.clone(),
        energy,
        coefficients,
        parity: 1,
        degenerate: false,
        residual,
    };
    normalize(&mut st.coefficients);
    match h.sector {
        Sector::Even => st.parity = 1,
        Sector::Odd => st.parity = -1,
        Sector::Full => {
            let p = parity_expectation(&st);
            st.parity = if p >= 0.0 { 1 } else { -1 };
            st.degenerate = p.abs() < 1.0 - 1e-8;
        }
    }
    Ok(st)
}

fn normalize(v: &mut [f64]) {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= n);
    // fix the overall sign: largest component positive
    let mut big: f64 = 0.0;
    for &x in v.iter() {
        if x.abs() > big.abs() + 1e-12 {
            big = x;
        }
    }
    if big < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// ⟨(−1)^N⟩ of a state.
pub fn parity_expectation(st: &EDGroundState) -> f64 {
    let l = st.basis.lattice.sites;
    let mut occ = vec![0usize; l];
    let mut p = 0.0;
    for (idx, c) in st.coefficients.iter().enumerate() {
        if *c != 0.0 {
            st.basis.decode(idx, &mut occ);
            let s = if occ.iter().sum::<usize>() % 2 == 0 { 1.0 } else { -1.0 };
            p += s * c * c;
        }
    }
    p
}

/// Ground state of the chain, using parity blocks per `opts.sectors`.
pub fn solve(params: &ModelParams, lattice: &LatticeSpec, opts: &EdOptions) -> Result<EDGroundState> {
    let basis = FockBasis::new(*lattice, opts.dim_cap)?;
    let split = match opts.sectors {
        SectorMode::Auto => params.eps != 0.0,
        SectorMode::Always => true,
        SectorMode::Never => false,
    };
    if !split {
        return ground_state(&build_sector_hamiltonian(params, &basis, Sector::Full), opts);
    }
    let even = ground_state(&build_sector_hamiltonian(params, &basis, Sector::Even), opts)?;
    let odd = ground_state(&build_sector_hamiltonian(params, &basis, Sector::Odd), opts)?;
    if (even.energy - odd.energy).abs() < 1e-12 {
        Ok(EDGroundState { degenerate: true, ..even })
    } else if even.energy < odd.energy {
        Ok(even)
    } else {
        Ok(odd)
    }
}

/// Ground-state expectation values. Correlators are averaged over the reference site.
#[derive(Debug, Clone, PartialEq)]
pub struct EdObservables {
    pub density: Vec<f64>,
    /// ⟨a_j⟩ (identically zero on parity eigenstates).
    pub coherence: Vec<f64>,
    /// ⟨a_j²⟩.
    pub pair_amplitude: Vec<f64>,
    /// C_SF(d) = ⟨a_j† a_{j+d}⟩ for d = 1..L/2 (index d−1).
    pub c_sf: Vec<f64>,
    /// C_DW(d) = ⟨δn_j δn_{j+d}⟩ with δn = n − mean density, d = 1..L/2 (index d−1).
    pub c_dw: Vec<f64>,
    /// ⟨φ²⟩ and ⟨φ⁴⟩ of φ = Σ_j (−1)^j n_j (sites 0, 2, 4, ... counted positive).
    pub phi2: f64,
    pub phi4: f64,
}

pub fn observables(st: &EDGroundState) -> EdObservables {
    let basis = &st.basis;
    let l = basis.lattice.sites;
    let n_max = basis.lattice.n_max;
    let half = l / 2;
    let mut occ = vec![0usize; l];
    let mut density = vec![0.0; l];
    let mut coherence = vec![0.0; l];
    let mut pair_amplitude = vec![0.0; l];
    let mut nn = vec![0.0; half];
    let mut hop = vec![0.0; half];
    let (mut phi2, mut phi4) = (0.0, 0.0);
    let c = &st.coefficients;
    for (idx, &ci) in c.iter().enumerate() {
        if ci == 0.0 {
            continue;
        }
        basis.decode(idx, &mut occ);
        let w = ci * ci;
        let mut phi = 0.0;
        for j in 0..l {
            let n = occ[j];
            density[j] += w * n as f64;
            phi += if j % 2 == 0 { n as f64 } else { -(n as f64) };
            for d in 1..=half {
                nn[d - 1] += w * (n * occ[(j + d) % l]) as f64;
            }
            // ⟨ψ|a_j|ψ⟩: a_j maps idx to idx − stride_j with amplitude √n
            if n >= 1 {
                coherence[j] += c[idx - basis.stride(j)] * ci * (n as f64).sqrt();
            }
            if n >= 2 {
                pair_amplitude[j] += c[idx - 2 * basis.stride(j)] * ci * ((n * (n - 1)) as f64).sqrt();
            }
            // ⟨a_j† a_k⟩: from idx, move one boson from k = j+d to j
            for d in 1..=half {
                let k = (j + d) % l;
                if occ[k] > 0 && n < n_max {
                    let t = idx + basis.stride(j) - basis.stride(k);
                    hop[d - 1] += c[t] * ci * (((n + 1) * occ[k]) as f64).sqrt();
                }
            }
        }
        phi2 += w * phi * phi;
        phi4 += w * phi * phi * phi * phi;
    }
    let lf = l as f64;
    let mean = density.iter().sum::<f64>() / lf;
    let mut c_dw = vec![0.0; half];
    for d in 1..=half {
        let mut s = nn[d - 1];
        for j in 0..l {
            s += -mean * (density[j] + density[(j + d) % l]) + mean * mean;
        }
        c_dw[d - 1] = s / lf;
    }
    let c_sf = hop.iter().map(|h| h / lf).collect();
    EdObservables { density, coherence, pair_amplitude, c_sf, c_dw, phi2, phi4 }
}

/// ⟨ψ|H|ψ⟩ for a full-basis state.
pub fn energy_expectation(params: &ModelParams, st: &EDGroundState) -> Result<f64> {
    let h = build_sector_hamiltonian(params, &st.basis, Sector::Full);
    let mut hv = vec![0.0; st.basis.dimension];
    h.matrix.mul_vec(&st.coefficients, &mut hv);
    Ok(hv.iter().zip(&st.coefficients).map(|(a, b)| a * b).sum())
}

/// Options for [`converged_ground_energy`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationScan {
    pub n_start: usize,
    pub n_limit: usize,
    /// Stop once successive truncations change the energy by less than this.
    pub tol: f64,
}

impl Default for TruncationScan {
    fn default() -> Self {
        TruncationScan { n_start: 2, n_limit: 40, tol: 1e-8 }
    }
}

/// Ground energy with the truncation raised until it stops changing.
/// Returns the state at the final truncation.
pub fn converged_ground_energy(
    params: &ModelParams,
    sites: usize,
    scan: &TruncationScan,
    opts: &EdOptions,
) -> Result<EDGroundState> {
    let mut prev: Option<EDGroundState> = None;
    for n_max in scan.n_start..=scan.n_limit {
        let lattice = LatticeSpec::new(sites, n_max)?;
        let st = solve(params, &lattice, opts)?;
        if let Some(p) = &prev {
            if (p.energy - st.energy).abs() < scan.tol {
                return Ok(st);
            }
        }
        prev = Some(st);
    }
    let residual = prev.map(|p| p.residual).unwrap_or(f64::INFINITY);
    Err(Error::NoConvergence { iterations: scan.n_limit, residual })
}
