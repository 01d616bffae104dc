//! Wick contractions for Gaussian states.
//!
//! Ordered central moments ⟨δr_{m1} … δr_{mK}⟩ are sums over pairings with pair value
//! ⟨δr_m δr_n⟩ = V_mn + iΩ_mn taken in operator order.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex;

use super::GaussianPureState;
use crate::error::{Error, Result};

type C64 = Complex<f64>;

pub const MAX_WICK_ORDER: usize = 8;

/// ⟨δr_m δr_n⟩ for 0-based quadrature indices.
pub fn pair_value(state: &GaussianPureState, m: usize, n: usize) -> C64 {
    let l = state.modes();
    let om = if m < l && n == m + l {
        1.0
    } else if m >= l && n + l == m {
        -1.0
    } else {
        0.0
    };
    C64::new(state.v[(m, n)], om)
}

fn pairings(pair: &dyn Fn(usize, usize) -> C64, rest: &mut Vec<usize>) -> C64 {
    if rest.is_empty() {
        return C64::new(1.0, 0.0);
    }
    let first = rest.remove(0);
    let mut acc = C64::new(0.0, 0.0);
    for pos in 0..rest.len() {
        let other = rest.remove(pos);
        let p = pair(first, other);
        if p != C64::new(0.0, 0.0) {
            acc += p * pairings(pair, rest);
        }
        rest.insert(pos, other);
    }
    rest.insert(0, first);
    acc
}

fn check_order(k: usize) -> Result<()> {
    if k > MAX_WICK_ORDER {
        return Err(Error::InvalidParameter("moment order must be at most 8"));
    }
    Ok(())
}

/// Ordered central moment of quadratures `idx` (0-based, x block then p block).
/// Odd orders vanish exactly.
pub fn central_moment(state: &GaussianPureState, idx: &[usize]) -> Result<C64> {
    check_order(idx.len())?;
    let n = state.d.len();
    if idx.iter().any(|&m| m >= n) {
        return Err(Error::InvalidParameter("quadrature index out of range"));
    }
    if idx.len() % 2 == 1 {
        return Ok(C64::new(0.0, 0.0));
    }
    let pair = |a: usize, b: usize| pair_value(state, idx[a], idx[b]);
    let mut rest: Vec<usize> = (0..idx.len()).collect();
    Ok(pairings(&pair, &mut rest))
}

/// Operator Σ_m c_m r_m with complex coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearForm {
    pub coeffs: Vec<C64>,
}

impl LinearForm {
    /// a_j = (x_j + i p_j)/2.
    pub fn annihilation(modes: usize, j: usize) -> Self {
        let mut c = vec![C64::new(0.0, 0.0); 2 * modes];
        c[j] = C64::new(0.5, 0.0);
        c[modes + j] = C64::new(0.0, 0.5);
        LinearForm { coeffs: c }
    }

    /// a_j† = (x_j − i p_j)/2.
    pub fn creation(modes: usize, j: usize) -> Self {
        let mut c = vec![C64::new(0.0, 0.0); 2 * modes];
        c[j] = C64::new(0.5, 0.0);
        c[modes + j] = C64::new(0.0, -0.5);
        LinearForm { coeffs: c }
    }

    pub fn quadrature(modes: usize, m: usize) -> Self {
        let mut c = vec![C64::new(0.0, 0.0); 2 * modes];
        c[m] = C64::new(1.0, 0.0);
        LinearForm { coeffs: c }
    }

    fn mean(&self, state: &GaussianPureState) -> C64 {
        self.coeffs.iter().zip(state.d.iter()).map(|(c, d)| c * d).sum()
    }
}

fn form_pair(state: &GaussianPureState, a: &LinearForm, b: &LinearForm) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for (m, ca) in a.coeffs.iter().enumerate() {
        if *ca == C64::new(0.0, 0.0) {
            continue;
        }
        for (n, cb) in b.coeffs.iter().enumerate() {
            if *cb != C64::new(0.0, 0.0) {
                acc += ca * cb * pair_value(state, m, n);
            }
        }
    }
    acc
}

/// Ordered raw moment ⟨F_1 F_2 … F_K⟩ of linear forms, expanded over which factors
/// contribute their mean and which their fluctuation.
pub fn raw_moment_linear(state: &GaussianPureState, forms: &[LinearForm]) -> Result<C64> {
    check_order(forms.len())?;
    let n = state.d.len();
    if forms.iter().any(|f| f.coeffs.len() != n) {
        return Err(Error::InvalidParameter("linear form length must equal 2L"));
    }
    let k = forms.len();
    let means: Vec<C64> = forms.iter().map(|f| f.mean(state)).collect();
    let mut pairs = vec![C64::new(0.0, 0.0); k * k];
    for a in 0..k {
        for b in a + 1..k {
            pairs[a * k + b] = form_pair(state, &forms[a], &forms[b]);
        }
    }
    let mut total = C64::new(0.0, 0.0);
    for mask in 0u32..(1 << k) {
        if mask.count_ones() % 2 == 1 {
            continue;
        }
        let mut fluct: Vec<usize> = Vec::new();
        let mut prefactor = C64::new(1.0, 0.0);
        for (i, m) in means.iter().enumerate() {
            if mask & (1 << i) != 0 {
                fluct.push(i);
            } else {
                prefactor *= m;
            }
        }
        if prefactor == C64::new(0.0, 0.0) {
            continue;
        }
        let pair = |a: usize, b: usize| pairs[fluct[a] * k + fluct[b]];
        let mut rest: Vec<usize> = (0..fluct.len()).collect();
        total += prefactor * pairings(&pair, &mut rest);
    }
    Ok(total)
}
