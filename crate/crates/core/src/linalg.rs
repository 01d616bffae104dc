//! Small dense eigen-solvers and a restarted Lanczos iteration for sparse real symmetric operators.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex;

use crate::error::{Error, Result};
#[cfg(not(feature = "std"))]
use num_traits::Float;

/// Lowest eigenpair of a dense real symmetric matrix.
pub fn lowest_eigenpair_real(m: DMatrix<f64>) -> (f64, DVector<f64>) {
    let eig = SymmetricEigen::new(m);
    let k = argmin(eig.eigenvalues.iter().copied());
    (eig.eigenvalues[k], eig.eigenvectors.column(k).into_owned())
}

/// Lowest eigenpair of a dense Hermitian matrix.
pub fn lowest_eigenpair_hermitian(m: DMatrix<Complex<f64>>) -> (f64, DVector<Complex<f64>>) {
    let eig = SymmetricEigen::new(m);
    let k = argmin(eig.eigenvalues.iter().copied());
    (eig.eigenvalues[k], eig.eigenvectors.column(k).into_owned())
}

fn argmin(values: impl Iterator<Item = f64>) -> usize {
    let mut best = (0, f64::INFINITY);
    for (i, v) in values.enumerate() {
        if v < best.1 {
            best = (i, v);
        }
    }
    best.0
}

/// Compressed sparse row storage of a real symmetric matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    pub dim: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<u32>,
    pub vals: Vec<f64>,
}

impl CsrMatrix {
    /// Assemble from per-row entry lists; duplicates within a row are summed.
    pub fn from_rows(dim: usize, mut row_entries: impl FnMut(usize, &mut Vec<(u32, f64)>)) -> Self {
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        let mut buf = Vec::new();
        row_ptr.push(0);
        for r in 0..dim {
            buf.clear();
            row_entries(r, &mut buf);
            buf.sort_unstable_by_key(|e| e.0);
            let mut i = 0;
            while i < buf.len() {
                let c = buf[i].0;
                let mut v = 0.0;
                while i < buf.len() && buf[i].0 == c {
                    v += buf[i].1;
                    i += 1;
                }
                if v != 0.0 {
                    cols.push(c);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        CsrMatrix { dim, row_ptr, cols, vals }
    }

    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        for (r, yr) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * x[self.cols[k] as usize];
            }
            *yr = acc;
        }
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let range = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.cols[range.clone()].binary_search(&(c as u32)) {
            Ok(k) => self.vals[range.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for r in 0..self.dim {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                m[(r, self.cols[k] as usize)] = self.vals[k];
            }
        }
        m
    }

    /// Largest |A_rc − A_cr| over stored entries.
    pub fn asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for r in 0..self.dim {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                let c = self.cols[k] as usize;
                worst = worst.max((self.vals[k] - self.get(c, r)).abs());
            }
        }
        worst
    }
}

/// Options for [`lanczos_lowest`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LanczosOptions {
    /// Target residual ‖Hψ − Eψ‖.
    pub tol: f64,
    pub max_restarts: usize,
    /// Upper bound on stored Krylov vectors per cycle.
    pub max_basis: usize,
    /// Memory budget for the Krylov basis, in f64 entries.
    pub basis_budget: usize,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        LanczosOptions {
            tol: 1e-10,
            max_restarts: 400,
            max_basis: 120,
            basis_budget: 1 << 24,
        }
    }
}

/// Result of [`lanczos_lowest`].
#[derive(Debug, Clone, PartialEq)]
pub struct Eigenpair {
    pub value: f64,
    pub vector: Vec<f64>,
    pub residual: f64,
    pub matvecs: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn scale(a: &mut [f64], s: f64) {
    a.iter_mut().for_each(|x| *x *= s);
}

fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += a * xi);
}

/// Smallest eigenpair of the symmetric operator `apply` by explicitly restarted
/// Lanczos with full reorthogonalization. Each cycle restarts from the current Ritz vector.
pub fn lanczos_lowest(
    dim: usize,
    apply: impl Fn(&[f64], &mut [f64]),
    start: &[f64],
    opts: &LanczosOptions,
) -> Result<Eigenpair> {
    assert_eq!(start.len(), dim);
    let m_max = (opts.basis_budget / dim.max(1)).max(20).min(opts.max_basis).min(dim);
    let mut x = start.to_vec();
    let n0 = norm(&x);
    if n0 == 0.0 {
        return Err(crate::error::precondition("zero Lanczos start vector"));
    }
    scale(&mut x, 1.0 / n0);
    let mut hx = vec![0.0; dim];
    let mut matvecs = 0;
    let mut residual = f64::INFINITY;
    for _ in 0..=opts.max_restarts {
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m_max);
        let mut alpha: Vec<f64> = Vec::with_capacity(m_max);
        let mut beta: Vec<f64> = Vec::with_capacity(m_max);
        basis.push(x.clone());
        loop {
            let k = basis.len() - 1;
            let mut w = vec![0.0; dim];
            apply(&basis[k], &mut w);
            matvecs += 1;
            let a = dot(&w, &basis[k]);
            alpha.push(a);
            for _pass in 0..2 {
                for q in basis.iter() {
                    let c = dot(&w, q);
                    axpy(&mut w, -c, q);
                }
            }
            let b = norm(&w);
            let full = basis.len() == m_max;
            if b <= 1e-14 * a.abs().max(1.0) || full {
                beta.push(b);
                break;
            }
            beta.push(b);
            scale(&mut w, 1.0 / b);
            basis.push(w);
        }
        let m = alpha.len();
        let mut t = DMatrix::zeros(m, m);
        for i in 0..m {
            t[(i, i)] = alpha[i];
            if i + 1 < m {
                t[(i, i + 1)] = beta[i];
                t[(i + 1, i)] = beta[i];
            }
        }
        let (_, s) = lowest_eigenpair_real(t);
        x.iter_mut().for_each(|v| *v = 0.0);
        for (i, q) in basis.iter().enumerate() {
            axpy(&mut x, s[i], q);
        }
        let nx = norm(&x);
        scale(&mut x, 1.0 / nx);
        apply(&x, &mut hx);
        matvecs += 1;
        let e = dot(&x, &hx);
        axpy(&mut hx, -e, &x);
        residual = norm(&hx);
        if residual <= opts.tol {
            return Ok(Eigenpair { value: e, vector: x, residual, matvecs });
        }
    }
    Err(Error::NoConvergence { iterations: matvecs, residual })
}
