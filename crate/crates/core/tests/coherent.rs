use latticevar_core::coherent::*;
use latticevar_core::ModelParams;
use nalgebra::Complex;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type C64 = Complex<f64>;

fn pick(list: &[AnalyticCoherentSolution], kind: AnalyticKind) -> AnalyticCoherentSolution {
    *list.iter().find(|s| s.kind == kind).unwrap()
}

#[test]
fn uniform_solution_energy_and_stationarity() {
    let p = ModelParams::from_ratios(0.7, 0.4, 0.6, 0.2).unwrap();
    let sols = analytic_solutions(&p, 8);
    let sf = pick(&sols, AnalyticKind::Uniform);
    let f = sf.field(8);
    let nu = (p.mu + p.eps) / (2.0 * p.j);
    let want = -2.0 * 8.0 * p.j * p.j * (nu + 1.0).powi(2) / (p.u + 2.0 * p.v);
    assert!((energy(&f, &p) - want).abs() < 1e-12);
    assert!((sf.energy - want).abs() < 1e-12);
    assert!(gradient(&f, &p).iter().all(|g| g.norm() < 1e-12));
}

#[test]
fn analytic_solutions_are_stationary_and_sorted() {
    for (mu, two_j, two_v, eps) in [(2.0, 0.4, 1.5, 0.1), (0.3, 0.1, 2.5, 0.0), (1.0, 0.8, 0.5, 0.3)] {
        let p = ModelParams::from_ratios(mu, two_j, two_v, eps).unwrap();
        let sols = analytic_solutions(&p, 8);
        assert_eq!(sols[0].energy, sols.iter().map(|s| s.energy).fold(f64::INFINITY, f64::min));
        for s in &sols {
            let g = gradient(&s.field(8), &p);
            assert!(g.iter().all(|z| z.norm() < 1e-10), "{:?}", s.kind);
            assert!((energy(&s.field(8), &p) - s.energy).abs() < 1e-10 * s.energy.abs().max(1.0));
        }
    }
}

#[test]
fn staggered_root_and_boundary_coincidence() {
    // a = 2.5 → r = 0.5
    let p = ModelParams { mu: 1.0, u: 1.0, v: 0.75, j: 0.1, eps: 0.0 };
    let ss = pick(&analytic_solutions(&p, 4), AnalyticKind::Staggered);
    assert!((ss.r - 0.5).abs() < 1e-14);
    assert!((1.0 + ss.r * ss.r - ss.a * ss.r).abs() < 1e-14);
    // a = 2 exactly: ν = 2 with 2V/U = 2
    let p = ModelParams { mu: 0.4, u: 1.0, v: 1.0, j: 0.1, eps: 0.0 };
    let sols = analytic_solutions(&p, 4);
    let ss = pick(&sols, AnalyticKind::Staggered);
    let sf = pick(&sols, AnalyticKind::Uniform);
    assert!((ss.a - 2.0).abs() < 1e-14);
    assert!((ss.r - 1.0).abs() < 1e-7);
    assert!((ss.energy - sf.energy).abs() < 1e-12);
}

#[test]
fn staggered_energy_gap_is_second_order() {
    let (u, v, j) = (1.0, 0.75, 0.1);
    let mut ratios = Vec::new();
    for k in 1..=10 {
        let a = 2.0 + 0.01 * k as f64;
        // a = ν(2V/U − 1) with ν = (μ+ε)/2J
        let mu = a / (2.0 * v / u - 1.0) * 2.0 * j;
        let p = ModelParams { mu, u, v, j, eps: 0.0 };
        let sols = analytic_solutions(&p, 4);
        let gap = pick(&sols, AnalyticKind::Uniform).energy - pick(&sols, AnalyticKind::Staggered).energy;
        assert!(gap >= -1e-14);
        ratios.push(gap / (a - 2.0).powi(2));
    }
    let max = ratios.iter().cloned().fold(0.0, f64::max);
    assert!(max.is_finite() && max < 10.0);
}

#[test]
fn boundary_formula() {
    assert!((ss_boundary_mu(0.4, 1.0, 0.75, 0.0).unwrap() - 3.2).abs() < 1e-12);
    assert!((ss_boundary_mu(0.4, 1.0, 0.75, 0.4).unwrap() - 2.8).abs() < 1e-12);
    assert!(ss_boundary_mu(0.4, 1.0, 0.5, 0.0).is_none());
}

#[test]
fn relax_from_exact_solution_stays() {
    let p = ModelParams::from_ratios(0.7, 0.4, 0.6, 0.2).unwrap();
    let sf = pick(&analytic_solutions(&p, 8), AnalyticKind::Uniform);
    let rep = relax(&sf.field(8), &p, &FlowOptions::default()).unwrap();
    assert_eq!(rep.steps, 0);
    assert_eq!(rep.state, sf.field(8));
}

#[test]
fn random_starts_reach_staggered_attractor() {
    // ν = 5, a = 2.5
    let p = ModelParams { mu: 1.0, u: 1.0, v: 0.75, j: 0.1, eps: 0.0 };
    let e_ss = pick(&analytic_solutions(&p, 16), AnalyticKind::Staggered).energy;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let opts = FlowOptions { record_trace: true, ..FlowOptions::default() };
    let mut best = f64::INFINITY;
    for _ in 0..6 {
        let f0 = random_field(16, random_start_bound(&p), &mut rng);
        let rep = relax(&f0, &p, &opts).unwrap();
        assert!(rep.converged);
        for w in rep.trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-12 * w[0].abs());
        }
        assert!(rep.energy >= e_ss - 1e-8 * e_ss.abs());
        best = best.min(rep.energy);
    }
    assert!((best - e_ss).abs() <= 1e-8 * e_ss.abs());
}

#[test]
fn negative_effective_potential_flows_to_vacuum() {
    let p = ModelParams { mu: -1.0, u: 1.0, v: 0.3, j: 0.1, eps: 0.0 };
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let rep = relax(&random_field(8, 1.0, &mut rng), &p, &FlowOptions::default()).unwrap();
    assert!(rep.state.amplitudes.iter().all(|a| a.norm() < 1e-9));
}

#[test]
fn multistart_examples() {
    let opts = FlowOptions::default();
    let p = ModelParams { mu: 1.0, u: 1.0, v: 0.75, j: 0.1, eps: 0.0 };
    let e_ss = pick(&analytic_solutions(&p, 8), AnalyticKind::Staggered).energy;
    let (_, e) = multistart_ground(&p, 8, 4, 1, &opts).unwrap();
    assert!(e <= e_ss + 1e-10 * e_ss.abs());

    let p = ModelParams::from_ratios(0.5, 0.4, 0.6, 0.1).unwrap();
    let e_sf = pick(&analytic_solutions(&p, 8), AnalyticKind::Uniform).energy;
    let (_, e) = multistart_ground(&p, 8, 8, 2, &opts).unwrap();
    assert!((e - e_sf).abs() <= 1e-10 * e_sf.abs());

    let (_, e16) = multistart_ground(&p, 16, 4, 3, &opts).unwrap();
    let (_, e32) = multistart_ground(&p, 32, 4, 3, &opts).unwrap();
    assert!((e16 / 16.0 - e32 / 32.0).abs() < 1e-10);
}

#[test]
fn two_mode_balanced_doubles_single_mode() {
    let p = ModelParams::from_ratios(1.0, 0.2, 1.5, 0.1).unwrap();
    for s in analytic_solutions(&p, 8) {
        let f = TwoModeField::balanced(&s.field(8));
        assert!((two_mode_energy(&f, &p) - 2.0 * s.energy).abs() < 1e-12 * s.energy.abs().max(1.0));
    }
    let zero = TwoModeField::balanced(&CoherentField::zeros(4));
    assert_eq!(two_mode_energy(&zero, &p), 0.0);
}

#[test]
fn two_mode_unbalanced_roots() {
    // μ + 2J = 1, ε = 0.3, U + 2V = 1
    let p = ModelParams { mu: 0.8, u: 0.6, v: 0.2, j: 0.1, eps: 0.3 };
    let sols = two_mode_analytic(&p, 4);
    let un = sols.iter().find(|s| s.kind == TwoModeKind::UnbalancedAlphaMajor).unwrap();
    assert!((un.alpha.0.powi(2) - 0.9).abs() < 1e-12);
    assert!((un.beta.0.powi(2) - 0.1).abs() < 1e-12);
    let f = un.field(4);
    assert!(two_mode_stationarity_residual(&f, &p) < 1e-12);
    assert!((two_mode_energy(&f, &p) - un.energy).abs() < 1e-12);
    let best_balanced = sols
        .iter()
        .filter(|s| matches!(s.kind, TwoModeKind::Balanced(_)))
        .map(|s| s.energy)
        .fold(f64::INFINITY, f64::min);
    assert!(un.energy >= best_balanced - 1e-12);
    let rep = two_mode_relax(&f, &p, &FlowOptions::default()).unwrap();
    assert_eq!(rep.steps, 0);
}

#[test]
fn two_mode_edge_cases() {
    let p = ModelParams { mu: 0.8, u: 0.6, v: 0.2, j: 0.1, eps: 0.0 };
    let un = two_mode_analytic(&p, 4).into_iter().find(|s| s.kind == TwoModeKind::UnbalancedAlphaMajor).unwrap();
    assert!((un.alpha.0.powi(2) - 1.0).abs() < 1e-12 && un.beta.0 == 0.0);
    let p = ModelParams { eps: 0.5, ..p };
    let sols = two_mode_analytic(&p, 4);
    let un = sols.iter().find(|s| s.kind == TwoModeKind::UnbalancedAlphaMajor).unwrap();
    assert!((un.alpha.0.abs() - un.beta.0.abs()).abs() < 1e-12);
}

#[test]
fn two_mode_flow_reaches_double_staggered_energy() {
    let p = ModelParams { mu: 1.0, u: 1.0, v: 0.75, j: 0.1, eps: 0.0 };
    let e_ss = pick(&analytic_solutions(&p, 8), AnalyticKind::Staggered).energy;
    let (_, e) = two_mode_multistart(&p, 8, 6, 4, &FlowOptions::default()).unwrap();
    assert!((e - 2.0 * e_ss).abs() <= 1e-8 * e_ss.abs());
    let zero = TwoModeField::balanced(&CoherentField::zeros(8));
    let rep = two_mode_relax(&zero, &p, &FlowOptions::default()).unwrap();
    assert_eq!(rep.state, zero);
}

fn finite_difference_check(f: &CoherentField, p: &ModelParams) -> f64 {
    let g = gradient(f, p);
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    for j in 0..f.sites() {
        for (k, dir) in [C64::new(1.0, 0.0), C64::new(0.0, 1.0)].into_iter().enumerate() {
            let (mut a, mut b) = (f.clone(), f.clone());
            a.amplitudes[j] += dir * h;
            b.amplitudes[j] -= dir * h;
            let fd = (energy(&a, p) - energy(&b, p)) / (2.0 * h);
            // ∂E/∂Re α = 2 Re g, ∂E/∂Im α = 2 Im g
            let an = 2.0 * if k == 0 { g[j].re } else { g[j].im };
            worst = worst.max((fd - an).abs() / fd.abs().max(1.0));
        }
    }
    worst
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn gradient_matches_finite_differences(seed in 0u64..1000, mu in 0.0f64..2.0, eps in 0.0f64..0.5) {
        let p = ModelParams::from_ratios(mu, 0.5, 1.2, eps).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_field(6, 1.5, &mut rng);
        prop_assert!(finite_difference_check(&f, &p) < 1e-6);
    }

    #[test]
    fn energy_is_z2_symmetric(seed in 0u64..1000) {
        let p = ModelParams::from_ratios(1.0, 0.5, 1.2, 0.3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_field(6, 1.5, &mut rng);
        prop_assert_eq!(energy(&f, &p), energy(&f.neg(), &p));
    }

    #[test]
    fn two_mode_energy_is_u1_symmetric(seed in 0u64..1000) {
        let p = ModelParams::from_ratios(1.0, 0.5, 1.2, 0.3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = TwoModeField::new(random_field(6, 1.5, &mut rng).amplitudes, random_field(6, 1.5, &mut rng).amplitudes).unwrap();
        let e = two_mode_energy(&f, &p);
        for k in 0..64 {
            let th = k as f64 * core::f64::consts::TAU / 64.0;
            prop_assert!((two_mode_energy(&f.rotate(th), &p) - e).abs() < 1e-12 * e.abs().max(1.0));
        }
    }
}
