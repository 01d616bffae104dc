use latticevar_core::ed::*;
use latticevar_core::model::{atomic_energy_per_pair, atomic_ground_occupations, validate};
use latticevar_core::{Error, LatticeSpec, ModelParams};
use proptest::prelude::*;

fn lattice(l: usize, n_max: usize) -> LatticeSpec {
    LatticeSpec::new(l, n_max).unwrap()
}

#[test]
fn validation_examples() {
    let p = ModelParams { mu: 0.0, u: 1.0, v: 0.0, j: 0.0, eps: 0.0 };
    assert!(validate(&p, &LatticeSpec { sites: 4, n_max: 3 }).is_ok());
    let bad_u = ModelParams { u: 0.0, ..p };
    assert_eq!(validate(&bad_u, &LatticeSpec { sites: 4, n_max: 3 }).unwrap_err().to_string(), "u must be positive");
    assert_eq!(
        validate(&p, &LatticeSpec { sites: 5, n_max: 3 }).unwrap_err().to_string(),
        "L must be even and ≥ 4"
    );
}

#[test]
fn diagonal_without_offsite_terms() {
    let p = ModelParams { mu: 0.7, u: 1.0, v: 0.0, j: 0.0, eps: 0.0 };
    let h = build_hamiltonian(&p, &lattice(4, 2)).unwrap();
    let dense = h.matrix.to_dense();
    let mut occ = vec![0; 4];
    for r in 0..h.basis.dimension {
        h.basis.decode(r, &mut occ);
        let want: f64 = occ.iter().map(|&n| -0.7 * n as f64 + 0.5 * (n * n.saturating_sub(1)) as f64).sum();
        assert!((dense[(r, r)] - want).abs() < 1e-14);
        for c in 0..h.basis.dimension {
            if c != r {
                assert_eq!(dense[(r, c)], 0.0);
            }
        }
    }
}

#[test]
fn hopping_row_sums_bounded() {
    let p = ModelParams { mu: 0.0, u: 1.0, v: 0.0, j: 0.3, eps: 0.0 };
    let h = build_hamiltonian(&p, &lattice(4, 1)).unwrap();
    let mut occ = vec![0; 4];
    for r in 0..h.basis.dimension {
        h.basis.decode(r, &mut occ);
        let particles: usize = occ.iter().sum();
        let off: f64 = (0..h.basis.dimension).filter(|&c| c != r).map(|c| h.matrix.get(r, c).abs()).sum();
        assert!(off <= 2.0 * 0.3 * particles as f64 + 1e-14);
    }
}

#[test]
fn hamiltonian_is_symmetric_and_parity_preserving() {
    let p = ModelParams::from_ratios(0.9, 0.4, 0.7, 0.3).unwrap();
    let h = build_hamiltonian(&p, &lattice(4, 3)).unwrap();
    assert!(h.matrix.asymmetry() <= 1e-14);
    let dim = h.basis.dimension;
    let parity: Vec<f64> = (0..dim)
        .map(|i| {
            let n: usize = (0..4).map(|s| h.basis.occupation(i, s)).sum();
            if n % 2 == 0 { 1.0 } else { -1.0 }
        })
        .collect();
    let mut seed = 12345u64;
    for _ in 0..5 {
        let v: Vec<f64> = (0..dim)
            .map(|_| {
                seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                (seed >> 11) as f64 / (1u64 << 53) as f64 - 0.5
            })
            .collect();
        let mut hv = vec![0.0; dim];
        h.matrix.mul_vec(&v, &mut hv);
        let pv: Vec<f64> = v.iter().zip(&parity).map(|(a, b)| a * b).collect();
        let mut hpv = vec![0.0; dim];
        h.matrix.mul_vec(&pv, &mut hpv);
        let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let comm: f64 = (0..dim).map(|i| (parity[i] * hv[i] - hpv[i]).powi(2)).sum::<f64>().sqrt();
        assert!(comm <= 1e-12 * norm);
    }
}

#[test]
fn dimension_cap_reports_dimension() {
    let err = FockBasis::new(lattice(16, 3), DEFAULT_DIM_CAP).unwrap_err();
    assert_eq!(err, Error::DimensionOverflow { dim: 1u128 << 32, cap: DEFAULT_DIM_CAP });
}

#[test]
fn atomic_density_wave() {
    let p = ModelParams::from_ratios(1.8, 0.0, 1.5, 0.0).unwrap();
    let st = solve(&p, &lattice(4, 3), &EdOptions::default()).unwrap();
    assert!((st.energy + 5.2).abs() < 1e-10);
    let at = atomic_ground_occupations(&p).unwrap();
    assert_eq!((at.n_odd, at.n_even), (2, 0));
    assert!((2.0 * atomic_energy_per_pair(2, 0, &p) - st.energy).abs() < 1e-10);
    let obs = observables(&st);
    // the two translated density waves are degenerate; correlators are insensitive to the mix
    assert!((obs.c_dw[0] + 1.0).abs() < 1e-10);
    assert!((obs.c_dw[1] - 1.0).abs() < 1e-10);
    assert!(obs.c_sf.iter().all(|c| c.abs() < 1e-12));
    let r = latticevar_core::analysis::correlation_ratio(|d| obs.c_dw[d - 1], 4).unwrap();
    assert!((r + 1.0).abs() < 1e-10);
}

#[test]
fn atomic_mixed_sublattice() {
    let p = ModelParams { mu: 1.0, u: 1.0, v: 0.0, j: 0.0, eps: 0.0 };
    let st = solve(&p, &lattice(4, 3), &EdOptions::default()).unwrap();
    assert!((st.energy - 2.0 * atomic_energy_per_pair(1, 1, &p)).abs() < 1e-10);
}

#[test]
fn vacuum_below_zero_chemical_potential() {
    let p = ModelParams { mu: -0.5, u: 1.0, v: 0.0, j: 0.0, eps: 0.0 };
    let st = solve(&p, &lattice(4, 3), &EdOptions::default()).unwrap();
    assert!(st.energy.abs() < 1e-14);
    assert!((st.coefficients[0].abs() - 1.0).abs() < 1e-12);
    let obs = observables(&st);
    assert!(obs.density.iter().chain(&obs.c_sf).chain(&obs.c_dw).all(|x| x.abs() < 1e-14));
}

#[test]
fn parity_eigenstates_have_no_coherence() {
    let p = ModelParams::from_ratios(0.8, 0.5, 0.6, 0.3).unwrap();
    let st = solve(&p, &lattice(4, 4), &EdOptions::default()).unwrap();
    assert!(st.parity == 1 || st.parity == -1);
    let obs = observables(&st);
    assert!(obs.coherence.iter().all(|a| *a == 0.0));
    let norm: f64 = st.coefficients.iter().map(|c| c * c).sum();
    assert!((norm - 1.0).abs() < 1e-12);
    assert!(st.residual <= 1e-10);
    assert!((energy_expectation(&p, &st).unwrap() - st.energy).abs() < 1e-10);
}

#[test]
fn lanczos_agrees_with_dense() {
    let p = ModelParams::from_ratios(1.1, 0.6, 1.2, 0.25).unwrap();
    let lat = lattice(6, 3);
    let dense = solve(&p, &lat, &EdOptions { dense_threshold: usize::MAX, ..EdOptions::default() }).unwrap();
    let sparse = solve(&p, &lat, &EdOptions { dense_threshold: 1, ..EdOptions::default() }).unwrap();
    assert!((dense.energy - sparse.energy).abs() < 1e-9);
    assert!(sparse.residual <= 1e-10);
}

#[test]
fn sectors_agree_with_full_space() {
    let p = ModelParams::from_ratios(0.6, 0.3, 0.4, 0.5).unwrap();
    let lat = lattice(4, 4);
    let split = solve(&p, &lat, &EdOptions { sectors: SectorMode::Always, ..EdOptions::default() }).unwrap();
    let full = solve(&p, &lat, &EdOptions { sectors: SectorMode::Never, ..EdOptions::default() }).unwrap();
    assert!((split.energy - full.energy).abs() < 1e-10);
}

#[test]
fn truncation_scan_converges() {
    let p = ModelParams::from_ratios(0.5, 0.3, 0.5, 0.2).unwrap();
    let st = converged_ground_energy(&p, 4, &TruncationScan::default(), &EdOptions::default()).unwrap();
    let n = st.basis.lattice.n_max;
    let below = solve(&p, &lattice(4, n - 1), &EdOptions::default()).unwrap().energy;
    assert!((st.energy - below).abs() < 1e-8);
    assert!(st.energy <= below + 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn ground_energy_is_a_lower_bound_on_fock_states(mu in 0.0f64..2.0, two_j in 0.0f64..1.0, two_v in 0.0f64..2.0, eps in 0.0f64..0.5) {
        let p = ModelParams::from_ratios(mu, two_j, two_v, eps).unwrap();
        let h = build_hamiltonian(&p, &lattice(4, 2)).unwrap();
        let st = solve(&p, &lattice(4, 2), &EdOptions::default()).unwrap();
        for i in 0..h.basis.dimension {
            prop_assert!(st.energy <= h.matrix.get(i, i) + 1e-10);
        }
    }
}
