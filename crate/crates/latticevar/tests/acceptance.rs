//! End-to-end acceptance criteria. Each test prints one PASS/FAIL line on stderr
//! (written directly, so it shows up even when the harness captures output).

use std::io::Write;
use std::time::{Duration, Instant};

use latticevar::config::{Axis, AxisName, BoundaryConfig, Classifier, Method, MfConfig, Range, Ratios, RunConfig};
use latticevar::run;
use latticevar_core::analysis::{
    binder_from_moments, boundary_bisect, critical_mu_zero_threshold, crossing_point, fss_fit, Curve, DEFAULT_ZERO_TOL,
};
use latticevar_core::coherent::{
    self, analytic_phase, multistart_ground, random_field, relax, two_mode_analytic, two_mode_energy, two_mode_multistart,
    two_mode_stationarity_residual, FlowOptions, TwoModeField, TwoModeKind,
};
use latticevar_core::ed::{self, converged_ground_energy, EdOptions, TruncationScan};
use latticevar_core::gaussian::{self, flow_relax, from_coherent, gaussian_multistart, GaussianFlowOptions, GaussianPureState};
use latticevar_core::meanfield::{classify, multistart_mf, ScfOptions, DEFAULT_CLASSIFY_TOL};
use latticevar_core::{LatticeSpec, ModelParams};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type C64 = Complex<f64>;

fn verdict(id: u32, title: &str, ok: bool, detail: &str, elapsed: Duration, limit_s: f64) {
    let secs = elapsed.as_secs_f64();
    let pass = ok && secs < limit_s;
    let status = if pass { "PASS" } else { "FAIL" };
    let _ = writeln!(
        std::io::stderr(),
        "acceptance {id:>2} {status}: {title} [{detail}] ({secs:.2} s, limit {limit_s} s)"
    );
    assert!(pass, "criterion {id} failed: {detail} ({secs:.2} s)");
}

fn ratios(mu: f64, two_j: f64, two_v: f64, eps: f64) -> Ratios {
    Ratios { mu, two_j, two_v, eps }
}

fn base_config(method: Method, params: Ratios) -> RunConfig {
    RunConfig {
        method,
        params,
        lattice: Default::default(),
        axes: Vec::new(),
        seed: 2024,
        output: None,
        workers: Some(1),
        mf: None,
        ed: None,
        coherent: None,
        gaussian: None,
        boundary: None,
        fss: None,
    }
}

/// E_SF and E_SS on L sites, U = 1.
fn closed_forms(mu: f64, two_j: f64, two_v: f64, eps: f64, sites: f64) -> (f64, f64) {
    let j = 0.5 * two_j;
    let e_sf = -sites * (mu + eps + 2.0 * j).powi(2) / (2.0 * (1.0 + two_v));
    let e_ss = -sites * ((mu + eps).powi(2) / 4.0 + 2.0 * j * j / (two_v - 1.0));
    (e_sf, e_ss)
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

#[test]
fn c01_coherent_boundary_exact() {
    let t = Instant::now();
    let mut worst: f64 = 0.0;
    for two_j in [0.4, 0.8] {
        let mut cfg = base_config(Method::Coherent, ratios(0.0, two_j, 1.5, 0.0));
        cfg.coherent = Some(Default::default());
        cfg.boundary = Some(BoundaryConfig {
            bisect: Range { name: AxisName::Mu, min: 0.0, max: 6.0 },
            sweep: Axis { name: AxisName::Eps, min: 0.0, max: 0.4, steps: 3 },
            classifier: Classifier::Staggered,
            tol: 1e-8,
        });
        for row in run::cmd_boundary(&cfg, 1).unwrap() {
            let want = 4.0 * (0.5 * two_j) / (1.5 - 1.0) - row.sweep;
            let got = row.result.map(|b| b.value).unwrap_or(f64::NAN);
            worst = worst.max((got - want).abs());
        }
    }
    let ok = worst <= 1e-6;
    verdict(1, "coherent SF/SS boundary mu_c = 4J/(2V/U-1) - eps", ok, &format!("max |error| {worst:.2e}"), t.elapsed(), 1.0);
}

#[test]
fn c02_analytic_coherent_energies() {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let opts = FlowOptions::default();
    let (mut worst, mut order_ok, mut count) = (0.0f64, true, 0);
    while count < 200 {
        let two_v = rng.random_range(1.1..3.0);
        let two_j = rng.random_range(0.2..1.6);
        let eps = rng.random_range(0.0..0.8);
        let a = rng.random_range(2.05..6.0);
        let mu = a * two_j / (two_v - 1.0) - eps;
        if mu < 0.0 {
            continue;
        }
        count += 1;
        let p = ModelParams::from_ratios(mu, two_j, two_v, eps).unwrap();
        let (_, e) = multistart_ground(&p, 4, 4, count as u64, &opts).unwrap();
        let (e_sf, e_ss) = closed_forms(mu, two_j, two_v, eps, 4.0);
        order_ok &= e_ss <= e_sf;
        let best = e_sf.min(e_ss);
        worst = worst.max((e - best).abs() / best.abs());
    }
    // gap exponent as a → 2⁺ at fixed couplings
    let (two_j, two_v, eps) = (0.6, 1.5, 0.2);
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for delta in [1e-3, 2e-3, 5e-3, 1e-2, 2e-2, 5e-2] {
        let mu = (2.0 + delta) * two_j / (two_v - 1.0) - eps;
        let (e_sf, e_ss) = closed_forms(mu, two_j, two_v, eps, 4.0);
        xs.push(f64::ln(delta));
        ys.push(f64::ln(e_sf - e_ss));
    }
    let exponent = slope(&xs, &ys);
    let ok = worst <= 1e-8 && order_ok && (exponent - 2.0).abs() <= 0.1;
    verdict(
        2,
        "multistart coherent energy equals min(E_SF, E_SS); E_SS <= E_SF; quadratic gap",
        ok,
        &format!("max rel error {worst:.2e}, E_SS<=E_SF {order_ok}, gap exponent {exponent:.4}"),
        t.elapsed(),
        120.0,
    );
}

/// Ceiling formulas for the atomic-limit occupations, (n_o, n_e) with n_o ≥ n_e.
fn atomic_occupations(mu: f64, two_v: f64) -> (u32, u32) {
    let c = |x: f64| x.ceil().max(0.0) as u32;
    if two_v > 1.0 {
        (c(mu), 0)
    } else {
        (c(mu / (1.0 + two_v)), c((mu - two_v) / (1.0 + two_v)))
    }
}

fn atomic_energy(no: u32, ne: u32, mu: f64, two_v: f64) -> f64 {
    let (a, b) = (no as f64, ne as f64);
    -mu * (a + b) + two_v * a * b + 0.5 * (a * (a - 1.0) + b * (b - 1.0))
}

#[test]
fn c03_atomic_limit_exact() {
    let t = Instant::now();
    let opts = ScfOptions::default();
    let (mut worst_e, mut occ_mismatch, mut checked_occ) = (0.0f64, 0, 0);
    let mut points = Vec::new();
    for i in 0..40 {
        for k in 0..40 {
            let mu = 4.0 * (i as f64 + 0.5) / 40.0;
            let two_v = 3.0 * (k as f64 + 0.5) / 40.0;
            if (two_v - 1.0).abs() < 1e-9 {
                continue;
            }
            let p = ModelParams::from_ratios(mu, 0.0, two_v, 0.0).unwrap();
            let sol = multistart_mf(&p, 8, 1, 3, &opts).unwrap();
            let (no, ne) = atomic_occupations(mu, two_v);
            let e = atomic_energy(no, ne, mu, two_v);
            worst_e = worst_e.max((sol.e_pair - e).abs());
            // occupations are unique unless a neighbouring configuration ties
            let mut energies: Vec<f64> =
                (0..=8u32).flat_map(|a| (0..=a).map(move |b| atomic_energy(a, b, mu, two_v))).collect();
            energies.sort_by(f64::total_cmp);
            if energies[1] - energies[0] > 1e-9 {
                checked_occ += 1;
                if (sol.rho_o - no as f64).abs() > 1e-12 || (sol.rho_e - ne as f64).abs() > 1e-12 {
                    occ_mismatch += 1;
                }
            }
            points.push((mu, two_v, e));
        }
    }
    let mut worst_ed: f64 = 0.0;
    for (mu, two_v, e) in points.iter().step_by(points.len() / 20).take(20) {
        let p = ModelParams::from_ratios(*mu, 0.0, *two_v, 0.0).unwrap();
        let st = ed::solve(&p, &LatticeSpec::new(4, 5).unwrap(), &EdOptions::default()).unwrap();
        worst_ed = worst_ed.max((st.energy - 2.0 * e).abs());
    }
    let ok = worst_e <= 1e-12 && occ_mismatch == 0 && worst_ed <= 1e-12;
    verdict(
        3,
        "atomic limit: MF and ED reproduce the ceiling-formula ground states",
        ok,
        &format!("MF max |dE| {worst_e:.1e}, occupation mismatches {occ_mismatch}/{checked_occ}, ED max |dE| {worst_ed:.1e}"),
        t.elapsed(),
        120.0,
    );
}

/// 2J_c/U from second-order perturbation theory around the n-particle Mott state (V = 0).
fn critical_two_j(mu: f64) -> f64 {
    let n = mu.ceil();
    1.0 / ((n + 1.0) / (n - mu) + n / (mu - n + 1.0))
}

#[test]
fn c04_perturbative_boundary() {
    let t = Instant::now();
    let tip = 2.0f64.sqrt() - 1.0;
    let mus = [0.1, 0.25, tip, 0.6, 0.8, 1.1, 1.3, 1.5, 1.7, 1.9];
    let opts = ScfOptions::default();
    let mut worst: f64 = 0.0;
    let mut tip_err = f64::NAN;
    for &mu in &mus {
        let b = boundary_bisect(
            |two_j| {
                let p = ModelParams::from_ratios(mu, two_j, 0.0, 0.0)?;
                let sol = multistart_mf(&p, 8, 2, 11, &opts)?;
                Ok(classify(&sol, DEFAULT_CLASSIFY_TOL, DEFAULT_CLASSIFY_TOL).is_insulating())
            },
            1e-3,
            0.5,
            5e-4,
        )
        .unwrap();
        let err = (b.value - critical_two_j(mu)).abs();
        if mu == tip {
            tip_err = (b.value - (3.0 - 2.0 * 2.0f64.sqrt())).abs();
        }
        worst = worst.max(err);
    }
    let ok = worst <= 2e-3 && tip_err <= 2e-3;
    verdict(
        4,
        "MF insulator/superfluid boundary matches J_c = U/(2 sqrt(chi_o chi_e))",
        ok,
        &format!("max |d(2J/U)| {worst:.2e} over 10 mu values, lobe tip error {tip_err:.2e}"),
        t.elapsed(),
        300.0,
    );
}

#[test]
fn c05_insulator_shrinks_with_eps() {
    let t = Instant::now();
    let mut areas = Vec::new();
    for eps in [0.0, 0.15, 0.30] {
        let mut cfg = base_config(Method::Mf, ratios(0.0, 0.0, 1.5, eps));
        cfg.mf = Some(MfConfig { n_max: 8, random_starts: 2, ..Default::default() });
        cfg.axes = vec![
            Axis { name: AxisName::TwoJ, min: 0.0, max: 1.0, steps: 50 },
            Axis { name: AxisName::Mu, min: 0.0, max: 3.0, steps: 50 },
        ];
        let rows = run::cmd_scan(&cfg, 1).unwrap();
        let failed = rows.iter().filter(|r| r.result.is_err()).count();
        let insulating = rows.iter().filter(|r| r.result.as_ref().is_ok_and(|p| p.phase.is_insulating())).count();
        areas.push((insulating, failed));
    }
    let ok = areas.iter().all(|a| a.1 == 0) && areas.windows(2).all(|w| w[1].0 <= w[0].0);
    verdict(
        5,
        "insulating area on the 2V/U=1.5 window is non-increasing for eps/U = 0, 0.15, 0.30",
        ok,
        &format!("insulating cells (failed) {areas:?} of 2500"),
        t.elapsed(),
        600.0,
    );
}

fn boundary_trace(method: Method, two_j: f64, mu_range: (f64, f64), eps: (f64, f64, usize), n_max: usize) -> Vec<(f64, f64)> {
    let mut cfg = base_config(method, ratios(0.0, two_j, 1.5, 0.0));
    cfg.mf = Some(MfConfig { n_max, random_starts: 2, ..Default::default() });
    cfg.coherent = Some(Default::default());
    cfg.boundary = Some(BoundaryConfig {
        bisect: Range { name: AxisName::Mu, min: mu_range.0, max: mu_range.1 },
        sweep: Axis { name: AxisName::Eps, min: eps.0, max: eps.1, steps: eps.2 },
        classifier: Classifier::Staggered,
        tol: if method == Method::Coherent { 1e-9 } else { 1e-3 },
    });
    run::cmd_boundary(&cfg, 1)
        .unwrap()
        .into_iter()
        .map(|r| (r.sweep, r.result.map(|b| b.value).unwrap_or(f64::NAN)))
        .collect()
}

fn trace_slope(trace: &[(f64, f64)]) -> f64 {
    let (xs, ys): (Vec<f64>, Vec<f64>) = trace.iter().cloned().unzip();
    slope(&xs, &ys)
}

#[test]
fn c06_supersolid_enhancement() {
    let t = Instant::now();
    let mf = boundary_trace(Method::Mf, 0.8, (0.2, 2.5), (0.3, 1.0, 8), 10);
    let decreasing = mf.iter().all(|p| p.1.is_finite()) && mf.windows(2).all(|w| w[1].1 < w[0].1);
    let coh_slope = trace_slope(&boundary_trace(Method::Coherent, 0.8, (1.5, 6.0), (0.3, 1.0, 8), 10));
    // the MF trace steepens towards −1 only gradually, so the slope is fitted in the large-ε
    // window; the small-ε fit is reported alongside
    let large_slope = trace_slope(&boundary_trace(Method::Mf, 2.0, (3.5, 8.5), (1.0, 2.0, 5), 16));
    let small_eps_slope = trace_slope(&boundary_trace(Method::Mf, 2.0, (3.5, 8.5), (0.0, 1.0, 5), 16));
    let ok = decreasing && (coh_slope + 1.0).abs() <= 1e-8 && (-1.2..=-0.8).contains(&large_slope);
    let mf_mu: Vec<String> = mf.iter().map(|p| format!("{:.3}", p.1)).collect();
    verdict(
        6,
        "eps lowers the MF SF/SS boundary; coherent slope -1; MF slope near -1 at 2J/U=2",
        ok,
        &format!(
            "MF 2J/U=0.8 mu_c over eps 0.3..1 {mf_mu:?} decreasing {decreasing}, coherent slope {coh_slope:.10}, \
             MF 2J/U=2 slope {large_slope:.3} on eps in [1,2] ({small_eps_slope:.3} on [0,1])"
        ),
        t.elapsed(),
        600.0,
    );
}

#[test]
fn c07_variational_hierarchy() {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let scan = TruncationScan { tol: 1e-8, ..TruncationScan::default() };
    let (mut violations, mut worst_gap) = (Vec::new(), f64::INFINITY);
    for k in 0..30 {
        let r = ratios(rng.random_range(0.0..1.5), rng.random_range(0.0..0.8), rng.random_range(0.0..2.0), rng.random_range(0.0..0.4));
        let p = r.params().unwrap();
        let e_ed = converged_ground_energy(&p, 4, &scan, &EdOptions::default()).unwrap().energy;
        let (coh, e_coh) = multistart_ground(&p, 4, 8, k, &FlowOptions::default()).unwrap();
        let gopts = GaussianFlowOptions::default();
        let (_, e_multi) = gaussian_multistart(&p, 4, 8, k, &gopts).unwrap();
        // the coherent optimum is itself a Gaussian starting point
        let e_gauss = e_multi.min(flow_relax(&from_coherent(&coh), &p, &gopts).unwrap().flow.energy);
        let e_mf = multistart_mf(&p, 20, 4, k, &ScfOptions::default()).unwrap().e_pair * 2.0;
        let slack = 1e-9;
        if !(e_ed <= e_gauss + slack && e_gauss <= e_coh + slack && e_ed <= e_mf + slack) {
            violations.push((k, e_ed, e_gauss, e_coh, e_mf));
        }
        worst_gap = worst_gap.min((e_gauss - e_ed).min(e_coh - e_gauss).min(e_mf - e_ed));
    }
    let ok = violations.is_empty();
    verdict(
        7,
        "E_ED <= E_Gaussian <= E_coherent and E_ED <= E_MF L/2 at L=4",
        ok,
        &format!("30 points, violations {violations:?}, smallest margin {worst_gap:.2e}"),
        t.elapsed(),
        600.0,
    );
}

/// Truncated Fock space of one or two modes, `cut` quanta per mode.
struct Fock {
    modes: usize,
    cut: usize,
}

impl Fock {
    fn dim(&self) -> usize {
        (self.cut + 1).pow(self.modes as u32)
    }

    fn occupation(&self, idx: usize, mode: usize) -> usize {
        idx / (self.cut + 1).pow(mode as u32) % (self.cut + 1)
    }

    /// Σ_k c_k b_k + e_k b_k† applied to `v`.
    fn apply(&self, c: &[C64], e: &[C64], v: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); v.len()];
        for (idx, &x) in v.iter().enumerate() {
            if x == C64::new(0.0, 0.0) {
                continue;
            }
            for k in 0..self.modes {
                let n = self.occupation(idx, k);
                let stride = (self.cut + 1).pow(k as u32);
                if n > 0 {
                    out[idx - stride] += c[k] * (n as f64).sqrt() * x;
                }
                if n < self.cut {
                    out[idx + stride] += e[k] * ((n + 1) as f64).sqrt() * x;
                }
            }
        }
        out
    }
}

/// Squeezed vacuum S(r)|0⟩ amplitudes c_{2n} = (−tanh r)^n √((2n)!)/(2^n n!)/√cosh r.
fn squeezed_vacuum(r: f64, cut: usize) -> Vec<f64> {
    let mut c = vec![0.0; cut + 1];
    c[0] = 1.0 / r.cosh().sqrt();
    let mut n = 0;
    while 2 * n + 2 <= cut {
        let k = 2 * n;
        c[k + 2] = c[k] * (-r.tanh()) * (((k + 1) as f64) / ((k + 2) as f64)).sqrt();
        n += 1;
    }
    c
}

struct WickCase {
    state: GaussianPureState,
    fock: Fock,
    psi: Vec<C64>,
    /// quadrature m as Σ_k c_k b_k + e_k b_k†
    quads: Vec<(Vec<C64>, Vec<C64>)>,
}

fn wick_case(modes: usize, rng: &mut ChaCha8Rng) -> WickCase {
    let cut = 40;
    let r: Vec<f64> = (0..modes).map(|_| rng.random_range(0.0..0.4)).collect();
    let q: Vec<Vec<C64>> = if modes == 1 {
        vec![vec![C64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU))]]
    } else {
        let th: f64 = rng.random_range(0.0..std::f64::consts::PI);
        let (a, b, c): (f64, f64, f64) = (rng.random_range(0.0..6.3), rng.random_range(0.0..6.3), rng.random_range(0.0..6.3));
        let (ph_a, ph_b, ph_c) = (C64::from_polar(1.0, a), C64::from_polar(1.0, b), C64::from_polar(1.0, c));
        vec![
            vec![ph_a * th.cos(), -ph_a * ph_c * th.sin()],
            vec![ph_b * th.sin(), ph_b * ph_c * th.cos()],
        ]
    };
    let fock = Fock { modes, cut };
    let single: Vec<Vec<f64>> = r.iter().map(|&rk| squeezed_vacuum(rk, cut)).collect();
    let psi: Vec<C64> = (0..fock.dim())
        .map(|idx| C64::new((0..modes).map(|k| single[k][fock.occupation(idx, k)]).product(), 0.0))
        .collect();
    // a_j = Σ_k Q_jk b_k; x_j = a_j + a_j†, p_j = i(a_j† − a_j)
    let i = C64::new(0.0, 1.0);
    let mut quads = Vec::new();
    for j in 0..modes {
        quads.push((q[j].clone(), q[j].iter().map(|z| z.conj()).collect()));
    }
    for j in 0..modes {
        quads.push((q[j].iter().map(|z| -i * z).collect(), q[j].iter().map(|z| i * z.conj()).collect()));
    }
    // V = T diag(e^{−2r}, e^{2r}) Tᵀ with T = [[Re Q, −Im Q], [Im Q, Re Q]]
    let n = 2 * modes;
    let t = DMatrix::from_fn(n, n, |a, b| {
        let (ja, kb) = (a % modes, b % modes);
        match (a < modes, b < modes) {
            (true, true) | (false, false) => q[ja][kb].re,
            (true, false) => -q[ja][kb].im,
            (false, true) => q[ja][kb].im,
        }
    });
    let vb = DMatrix::from_fn(n, n, |a, b| {
        if a != b {
            0.0
        } else if a < modes {
            (-2.0 * r[a]).exp()
        } else {
            (2.0 * r[a - modes]).exp()
        }
    });
    let v = &t * vb * t.transpose();
    let v = (&v + v.transpose()) * 0.5;
    let d = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
    WickCase { state: GaussianPureState::new(d, v).unwrap(), fock, psi, quads }
}

/// All products r_{s_1} ... r_{s_n} ψ for words of length ≤ 4, indexed by word.
fn words(case: &WickCase) -> Vec<Vec<(Vec<usize>, Vec<C64>)>> {
    let mut levels = vec![vec![(Vec::new(), case.psi.clone())]];
    for len in 1..=4 {
        let mut next = Vec::new();
        for (w, v) in &levels[len - 1] {
            for (m, (c, e)) in case.quads.iter().enumerate() {
                // prepend: r_m (r_w ψ)
                let mut word = vec![m];
                word.extend(w);
                next.push((word, case.fock.apply(c, e, v)));
            }
        }
        levels.push(next);
    }
    levels
}

#[test]
fn c08_wick_engine_against_fock_space() {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut worst, mut compared) = (0.0f64, 0usize);
    for s in 0..100 {
        let case = wick_case(1 + s % 2, &mut rng);
        let levels = words(&case);
        let find = |w: &[usize]| -> &Vec<C64> {
            &levels[w.len()].iter().find(|(x, _)| x.as_slice() == w).expect("word present").1
        };
        let nq = case.quads.len();
        for order in 1..=8usize {
            let (h, rest) = (order / 2, order - order / 2);
            for code in 0..nq.pow(order as u32) {
                let idx: Vec<usize> = (0..order).map(|k| code / nq.pow(k as u32) % nq).collect();
                // ⟨ψ|r_1..r_h r_{h+1}..r_n|ψ⟩ = ⟨r_h..r_1 ψ | r_{h+1}..r_n ψ⟩
                let left: Vec<usize> = idx[..h].iter().rev().copied().collect();
                let (lv, rv) = (find(&left), find(&idx[h..h + rest]));
                let fock: C64 = lv.iter().zip(rv).map(|(a, b)| a.conj() * b).sum();
                let wick = gaussian::central_moment(&case.state, &idx).unwrap();
                worst = worst.max((wick - fock).norm() / fock.norm().max(1.0));
                compared += 1;
            }
        }
    }
    let ok = worst <= 1e-6;
    verdict(
        8,
        "Wick central moments of order <= 8 match truncated Fock-space expectations",
        ok,
        &format!("{compared} moments over 100 states, max rel error {worst:.2e}"),
        t.elapsed(),
        120.0,
    );
}

fn monotone(trace: &[f64]) -> bool {
    trace.windows(2).all(|w| w[1] <= w[0] + 1e-12 * w[0].abs().max(1.0))
}

#[test]
fn c09_flow_integrity() {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mut coh_bad, mut gauss_bad, mut worst_defect) = (0, 0, 0.0f64);
    for k in 0..50 {
        let r = ratios(rng.random_range(0.0..2.0), rng.random_range(0.0..1.0), rng.random_range(0.0..2.5), rng.random_range(0.0..0.5));
        let p = r.params().unwrap();
        let opts = FlowOptions { record_trace: true, max_steps: 200_000, ..FlowOptions::default() };
        let f = random_field(4, coherent::random_start_bound(&p), &mut rng);
        let rep = relax(&f, &p, &opts).unwrap();
        coh_bad += usize::from(!monotone(&rep.trace));
        let g0 = gaussian::random_pure(4, 0.5, gaussian::random_mean_scale(&p), 900 + k);
        let gopts = GaussianFlowOptions { flow: FlowOptions { record_trace: true, grad_tol: 1e-7, max_steps: 200_000, ..FlowOptions::default() }, ..Default::default() };
        let rep = flow_relax(&g0, &p, &gopts).unwrap();
        gauss_bad += usize::from(!monotone(&rep.flow.trace));
        worst_defect = worst_defect.max(rep.max_purity_defect);
    }
    let ok = coh_bad == 0 && gauss_bad == 0 && worst_defect <= 1e-6;
    verdict(
        9,
        "flows descend monotonically and Gaussian purity holds",
        ok,
        &format!("non-monotone coherent {coh_bad}/50, Gaussian {gauss_bad}/50, max purity defect {worst_defect:.2e}"),
        t.elapsed(),
        300.0,
    );
}

#[test]
fn c10_gradient_checks() {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let h = 1e-5;
    let (mut worst_c, mut worst_g) = (0.0f64, 0.0f64);
    for k in 0..50 {
        let r = ratios(rng.random_range(0.0..2.0), rng.random_range(0.0..1.0), rng.random_range(0.0..2.5), rng.random_range(0.0..0.5));
        let p = r.params().unwrap();
        let f = random_field(6, 1.5, &mut rng);
        let g = coherent::gradient(&f, &p);
        for j in 0..f.sites() {
            for (part, dir) in [C64::new(1.0, 0.0), C64::new(0.0, 1.0)].into_iter().enumerate() {
                let (mut a, mut b) = (f.clone(), f.clone());
                a.amplitudes[j] += dir * h;
                b.amplitudes[j] -= dir * h;
                let fd = (coherent::energy(&a, &p) - coherent::energy(&b, &p)) / (2.0 * h);
                let an = 2.0 * if part == 0 { g[j].re } else { g[j].im };
                worst_c = worst_c.max((fd - an).abs() / fd.abs().max(1.0));
            }
        }
        let st = gaussian::random_pure(4, 0.5, 1.0, 500 + k);
        let (gd, gv) = gaussian::gradients(&st, &p).unwrap();
        let e = |s: &GaussianPureState| gaussian::energy(s, &p).unwrap();
        for m in 0..st.d.len() {
            let (mut a, mut b) = (st.clone(), st.clone());
            a.d[m] += h;
            b.d[m] -= h;
            let fd = (e(&a) - e(&b)) / (2.0 * h);
            worst_g = worst_g.max((fd - gd[m]).abs() / fd.abs().max(1.0));
        }
        let n = st.v.nrows();
        for rr in 0..n {
            for c in rr..n {
                let (mut a, mut b) = (st.clone(), st.clone());
                a.v[(rr, c)] += h;
                b.v[(rr, c)] -= h;
                if rr != c {
                    a.v[(c, rr)] += h;
                    b.v[(c, rr)] -= h;
                }
                let fd = (e(&a) - e(&b)) / (2.0 * h);
                let an = if rr == c { gv[(rr, c)] } else { 2.0 * gv[(rr, c)] };
                worst_g = worst_g.max((fd - an).abs() / fd.abs().max(1.0));
            }
        }
    }
    let ok = worst_c <= 1e-6 && worst_g <= 1e-6;
    verdict(
        10,
        "analytic gradients match central finite differences",
        ok,
        &format!("coherent max rel error {worst_c:.2e}, Gaussian {worst_g:.2e}"),
        t.elapsed(),
        60.0,
    );
}

#[test]
fn c11_analysis_oracles() {
    let t = Instant::now();
    let pts: Vec<(f64, f64)> = [8.0f64, 16.0, 32.0, 64.0].iter().map(|&l| (l, 2.0 + 3.0 * l.powf(-1.5))).collect();
    let fit = fss_fit(&pts).unwrap();
    let fit_err = (fit.mu_inf - 2.0).abs().max((fit.beta - 3.0).abs()).max((fit.eta - 1.5).abs());

    let mut binder_err: f64 = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let phi2: f64 = rng.random_range(0.1..10.0);
        let phi4 = rng.random_range(1.0..3.0) * phi2 * phi2;
        let s: f64 = rng.random_range(0.1..10.0);
        let a = binder_from_moments(phi2, phi4).unwrap();
        let b = binder_from_moments(s * s * phi2, s.powi(4) * phi4).unwrap();
        binder_err = binder_err.max((a - b).abs());
    }

    let xs: Vec<f64> = (0..41).map(|k| 1.0 + 0.035 * k as f64).collect();
    let sig = |w: f64| -> Curve {
        Curve::new(xs.clone(), xs.iter().map(|x| 1.0 / (1.0 + (-(x - 1.7) / w).exp())).collect(), 8).unwrap()
    };
    let cross_err = (crossing_point(&sig(0.2), &sig(0.1)).unwrap() - 1.7).abs();
    // zero up to 2.5, then (μ − 2.5)·10: the interpolant leaves zero at 2.5 with zero slope
    let grid: Vec<f64> = (0..=64).map(|k| 2.0 + k as f64 / 64.0).collect();
    let ramp = Curve::new(grid.clone(), grid.iter().map(|&m| 10.0 * (m - 2.5f64).max(0.0)).collect(), 8).unwrap();
    let thr = critical_mu_zero_threshold(&ramp, DEFAULT_ZERO_TOL).unwrap();
    let thr_ok = thr >= 2.5 && thr - 2.5 <= 1e-3;
    let thr_val = latticevar_core::analysis::makima_interpolate(&ramp, thr).unwrap();
    let thr_err = (thr_val - DEFAULT_ZERO_TOL).abs();

    let ok = fit_err <= 1e-3 && binder_err <= 1e-12 && cross_err <= 1e-6 && thr_ok && thr_err <= 1e-6;
    verdict(
        11,
        "fss fit, Binder scale invariance, crossing and threshold extractors",
        ok,
        &format!("fit {fit_err:.1e}, Binder {binder_err:.1e}, crossing {cross_err:.1e}, threshold at {thr:.6} (value error {thr_err:.1e})"),
        t.elapsed(),
        10.0,
    );
}

#[test]
fn c12_two_mode_u1() {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let opts = FlowOptions::default();
    let (mut worst_bal, mut worst_res, mut unbalanced_below, mut worst_orbit) = (0.0f64, 0.0f64, 0, 0.0f64);
    for k in 0..50 {
        let r = ratios(rng.random_range(0.0..2.0), rng.random_range(0.1..1.0), rng.random_range(0.0..2.5), rng.random_range(0.0..0.5));
        let p = r.params().unwrap();
        let (_, e1) = multistart_ground(&p, 4, 4, k, &opts).unwrap();
        let (_, e2) = two_mode_multistart(&p, 4, 4, k, &opts).unwrap();
        worst_bal = worst_bal.max((e2 - 2.0 * e1).abs() / (2.0 * e1).abs().max(1e-300));
        let sols = two_mode_analytic(&p, 4);
        let best_bal = sols.iter().filter(|s| matches!(s.kind, TwoModeKind::Balanced(_))).map(|s| s.energy).fold(f64::INFINITY, f64::min);
        for s in sols.iter().filter(|s| !matches!(s.kind, TwoModeKind::Balanced(_))) {
            worst_res = worst_res.max(two_mode_stationarity_residual(&s.field(4), &p));
            unbalanced_below += usize::from(s.energy < best_bal - 1e-12 * best_bal.abs());
        }
        let f = TwoModeField::new(random_field(4, 1.5, &mut rng).amplitudes, random_field(4, 1.5, &mut rng).amplitudes).unwrap();
        let e = two_mode_energy(&f, &p);
        for q in 0..64 {
            let th = q as f64 * std::f64::consts::TAU / 64.0;
            worst_orbit = worst_orbit.max((two_mode_energy(&f.rotate(th), &p) - e).abs() / e.abs().max(1.0));
        }
    }
    let ok = worst_bal <= 1e-8 && worst_res < 1e-12 && unbalanced_below == 0 && worst_orbit <= 1e-12;
    verdict(
        12,
        "two-mode minima are balanced doubles; unbalanced roots stationary and higher; U(1) invariance",
        ok,
        &format!(
            "balanced rel error {worst_bal:.1e}, unbalanced residual {worst_res:.1e}, unbalanced below balanced {unbalanced_below}, orbit {worst_orbit:.1e}"
        ),
        t.elapsed(),
        120.0,
    );
}

#[test]
fn c13_scan_determinism() {
    let t = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("scan.json");
    std::fs::write(
        &cfg_path,
        r#"{
  "method": "mf",
  "params": {"mu": 1.0, "two_j": 0.2, "two_v": 1.5, "eps": 0.1},
  "axes": [
    {"name": "two_j", "min": 0.0, "max": 1.0, "steps": 6},
    {"name": "mu", "min": 0.5, "max": 2.5, "steps": 5}
  ],
  "seed": 99,
  "mf": {"n_max": 8, "random_starts": 3}
}"#,
    )
    .unwrap();
    let bin = env!("CARGO_BIN_EXE_latticevar");
    let mut outputs = Vec::new();
    for workers in [1, 2, 3, 1] {
        let out = dir.path().join(format!("scan_{}_{workers}.csv", outputs.len()));
        let status = std::process::Command::new(bin)
            .args(["scan", "--config"])
            .arg(&cfg_path)
            .arg("--out")
            .arg(&out)
            .args(["--workers", &workers.to_string()])
            .status()
            .unwrap();
        assert!(status.success());
        outputs.push(std::fs::read(&out).unwrap());
    }
    let identical = outputs.windows(2).all(|w| w[0] == w[1]);
    verdict(
        13,
        "repeated scans with a fixed seed are byte-identical across worker counts",
        identical,
        &format!("4 runs with 1, 2, 3, 1 workers, {} bytes each", outputs[0].len()),
        t.elapsed(),
        60.0,
    );
}

#[test]
fn closed_forms_agree_with_analytic_phase() {
    let p = ModelParams::from_ratios(3.5, 0.8, 1.5, 0.0).unwrap();
    assert_eq!(analytic_phase(&p).as_str(), "SS");
    let (e_sf, e_ss) = closed_forms(3.5, 0.8, 1.5, 0.0, 4.0);
    assert!(e_ss < e_sf);
}
