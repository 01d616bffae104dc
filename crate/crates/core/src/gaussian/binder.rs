//! Ordered moments of quadratic operators and the density-wave Binder cumulant.
//!
//! A product Q_1 ⋯ Q_K of quadratic forms is expanded into constant, linear and quadratic
//! pieces around the mean. Wick pairings of the remaining fluctuation legs fall into
//! open chains (vector–matrix products ending on linear pieces) and closed loops (traces),
//! so each pairing costs a handful of 2L×2L products instead of an explicit sum over
//! O(L⁴) quartic number products.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use super::{symplectic_form, GaussianPureState};
use crate::error::{Error, Result};

type C64 = Complex<f64>;

/// The operator rᵀAr + b·r + c with A real symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadForm {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub c: f64,
}

/// φ̂ = Σ_j s_j n_j with s_j = +1 on sites 0, 2, ... and −1 on sites 1, 3, ...; since
/// n_j = (x_j² + p_j² − 2)/4 the constant cancels on even chains.
pub fn dw_order_parameter(modes: usize) -> QuadForm {
    let mut a = DMatrix::zeros(2 * modes, 2 * modes);
    for j in 0..modes {
        let s = if j % 2 == 0 { 0.25 } else { -0.25 };
        a[(j, j)] = s;
        a[(modes + j, modes + j)] = s;
    }
    let c = if modes % 2 == 0 { 0.0 } else { -0.5 };
    QuadForm { a, b: DVector::zeros(2 * modes), c }
}

/// Form rewritten around the mean: δrᵀAδr + l·δr + c0.
struct Centered {
    a: DMatrix<C64>,
    l: DVector<C64>,
    c0: f64,
}

fn center(q: &QuadForm, d: &DVector<f64>) -> Centered {
    let ad = &q.a * d;
    Centered {
        a: q.a.map(|x| C64::new(x, 0.0)),
        l: (&ad * 2.0 + &q.b).map(|x| C64::new(x, 0.0)),
        c0: d.dot(&ad) + q.b.dot(d) + q.c,
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Piece {
    Const,
    Lin,
    Quad,
}

#[derive(Clone, Copy)]
struct Leg {
    vertex: usize,
    /// Position in operator order.
    pos: usize,
}

struct Engine<'a> {
    forms: &'a [Centered],
    g: DMatrix<C64>,
    gt: DMatrix<C64>,
    identical: bool,
    memo: BTreeMap<(bool, Vec<usize>, Vec<bool>), C64>,
}

impl Engine<'_> {
    fn prop(&self, forward: bool) -> &DMatrix<C64> {
        if forward {
            &self.g
        } else {
            &self.gt
        }
    }

    /// Value of one pairing, split into chains and loops.
    fn matching_value(&mut self, legs: &[Leg], partner: &[usize], pieces: &[Piece]) -> C64 {
        let n = legs.len();
        let mut seen = vec![false; n];
        let mut total = C64::new(1.0, 0.0);
        let sibling = |i: usize| -> Option<usize> {
            let v = legs[i].vertex;
            if pieces[v] != Piece::Quad {
                return None;
            }
            if i + 1 < n && legs[i + 1].vertex == v {
                Some(i + 1)
            } else if i > 0 && legs[i - 1].vertex == v {
                Some(i - 1)
            } else {
                None
            }
        };
        // chains first, starting from linear legs
        for start in 0..n {
            if seen[start] || pieces[legs[start].vertex] != Piece::Lin {
                continue;
            }
            let mut verts = vec![legs[start].vertex];
            let mut dirs = Vec::new();
            let mut cur = start;
            seen[cur] = true;
            loop {
                let t = partner[cur];
                seen[t] = true;
                dirs.push(legs[cur].pos < legs[t].pos);
                verts.push(legs[t].vertex);
                match sibling(t) {
                    Some(s) => {
                        seen[s] = true;
                        cur = s;
                    }
                    None => break,
                }
            }
            total *= self.chain(verts, dirs);
        }
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut verts = Vec::new();
            let mut dirs = Vec::new();
            let first = start;
            let mut cur = sibling(first).expect("loop legs belong to quadratic pieces");
            seen[first] = true;
            seen[cur] = true;
            verts.push(legs[first].vertex);
            loop {
                let t = partner[cur];
                dirs.push(legs[cur].pos < legs[t].pos);
                if t == first {
                    break;
                }
                seen[t] = true;
                verts.push(legs[t].vertex);
                cur = sibling(t).expect("loop legs belong to quadratic pieces");
                seen[cur] = true;
            }
            total *= self.ring(verts, dirs);
        }
        total
    }

    fn key(&self, closed: bool, verts: &[usize], dirs: &[bool]) -> (bool, Vec<usize>, Vec<bool>) {
        let v = if self.identical { Vec::new() } else { verts.to_vec() };
        (closed, v, dirs.to_vec())
    }

    /// l_{v0}ᵀ P A P A ⋯ P l_{vk}.
    fn chain(&mut self, verts: Vec<usize>, dirs: Vec<bool>) -> C64 {
        let key = self.key(false, &verts, &dirs);
        if let Some(v) = self.memo.get(&key) {
            return *v;
        }
        let mut w = self.forms[verts[0]].l.transpose();
        for (i, &dir) in dirs.iter().enumerate() {
            w = &w * self.prop(dir);
            let f = &self.forms[verts[i + 1]];
            if i + 1 == dirs.len() {
                let val = (&w * &f.l)[(0, 0)];
                self.memo.insert(key, val);
                return val;
            }
            w = &w * &f.a;
        }
        unreachable!("chains end on a linear piece")
    }

    /// tr(A_{v0} P A_{v1} P ⋯ A_{vk} P).
    fn ring(&mut self, verts: Vec<usize>, dirs: Vec<bool>) -> C64 {
        let key = self.key(true, &verts, &dirs);
        if let Some(v) = self.memo.get(&key) {
            return *v;
        }
        let mut m = self.forms[verts[0]].a.clone();
        for (i, &dir) in dirs.iter().enumerate() {
            m = &m * self.prop(dir);
            if i + 1 < verts.len() {
                m = &m * &self.forms[verts[i + 1]].a;
            }
        }
        let val = m.trace();
        self.memo.insert(key, val);
        val
    }
}

fn for_each_matching(partner: &mut Vec<usize>, free: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
    if free.is_empty() {
        f(partner);
        return;
    }
    let first = free.remove(0);
    for k in 0..free.len() {
        let other = free.remove(k);
        partner[first] = other;
        partner[other] = first;
        for_each_matching(partner, free, f);
        free.insert(k, other);
    }
    free.insert(0, first);
}

pub const MAX_QUAD_PRODUCT: usize = 4;

/// Ordered expectation ⟨Q_1 Q_2 ⋯ Q_K⟩ for K ≤ 4.
pub fn quad_form_moment(state: &GaussianPureState, forms: &[QuadForm]) -> Result<C64> {
    let n = state.d.len();
    if forms.len() > MAX_QUAD_PRODUCT {
        return Err(Error::InvalidParameter("at most four quadratic factors"));
    }
    if forms.iter().any(|q| q.a.nrows() != n || q.a.ncols() != n || q.b.len() != n) {
        return Err(Error::InvalidParameter("quadratic form size must equal 2L"));
    }
    let centered: Vec<Centered> = forms.iter().map(|q| center(q, &state.d)).collect();
    let om = symplectic_form(n / 2);
    let g = DMatrix::from_fn(n, n, |r, c| C64::new(state.v[(r, c)], om[(r, c)]));
    let identical = forms.windows(2).all(|w| w[0] == w[1]);
    let mut engine = Engine { forms: &centered, gt: g.transpose(), g, identical, memo: BTreeMap::new() };

    let k = forms.len();
    let mut total = C64::new(0.0, 0.0);
    let mut pieces = vec![Piece::Const; k];
    for code in 0..3usize.pow(k as u32) {
        let mut c = code;
        for p in pieces.iter_mut() {
            *p = [Piece::Const, Piece::Lin, Piece::Quad][c % 3];
            c /= 3;
        }
        let mut prefactor = C64::new(1.0, 0.0);
        let mut legs = Vec::new();
        for (v, p) in pieces.iter().enumerate() {
            match p {
                Piece::Const => prefactor *= centered[v].c0,
                Piece::Lin => legs.push(Leg { vertex: v, pos: legs.len() }),
                Piece::Quad => {
                    legs.push(Leg { vertex: v, pos: legs.len() });
                    legs.push(Leg { vertex: v, pos: legs.len() });
                }
            }
        }
        if legs.len() % 2 == 1 || prefactor == C64::new(0.0, 0.0) {
            continue;
        }
        let mut sum = C64::new(0.0, 0.0);
        let mut partner = vec![0usize; legs.len()];
        let mut free: Vec<usize> = (0..legs.len()).collect();
        for_each_matching(&mut partner, &mut free, &mut |p| {
            sum += engine.matching_value(&legs, p, &pieces);
        });
        total += prefactor * sum;
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DwMoments {
    pub phi: f64,
    pub phi2: f64,
    pub phi4: f64,
}

pub fn dw_moments(state: &GaussianPureState) -> Result<DwMoments> {
    let q = dw_order_parameter(state.modes());
    let phi = quad_form_moment(state, core::slice::from_ref(&q))?.re;
    let phi2 = quad_form_moment(state, &[q.clone(), q.clone()])?.re;
    let phi4 = quad_form_moment(state, &[q.clone(), q.clone(), q.clone(), q])?.re;
    Ok(DwMoments { phi, phi2, phi4 })
}

/// B = (3 − ⟨φ̂⁴⟩/⟨φ̂²⟩²)/2.
pub fn binder_dw(state: &GaussianPureState) -> Result<f64> {
    if state.modes() % 2 != 0 {
        return Err(Error::InvalidParameter("L must be even"));
    }
    let m = dw_moments(state)?;
    if m.phi2 < 1e-12 {
        return Err(Error::Degenerate("⟨φ²⟩ vanishes, Binder ratio undefined"));
    }
    Ok(0.5 * (3.0 - m.phi4 / (m.phi2 * m.phi2)))
}
