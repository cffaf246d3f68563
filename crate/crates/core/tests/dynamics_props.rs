mod common;

use common::*;
use entangle_core::dynamics::*;
use entangle_core::hilbert::*;
use entangle_core::measures::*;
use entangle_core::model::*;
use ndarray::Array2;
use num_complex::Complex64 as C64;
use proptest::prelude::*;

fn generator(p: &SystemParams) -> LindbladGenerator {
    let layout = p.layout().unwrap();
    let h = hamiltonian_driven(p, &layout).unwrap();
    LindbladGenerator::time_independent(&h, &dissipators(p, &layout).unwrap()).unwrap()
}

fn rosenbrock() -> IntegratorConfig {
    IntegratorConfig { method: Method::Rosenbrock, ..IntegratorConfig::default() }
}

fn named(name: NamedState, layout: &SpaceLayout) -> DensityMatrix {
    DensityMatrix::from_pure(&named_state(name, layout))
}

fn residual(l: &Superoperator, rho: &DensityMatrix) -> f64 {
    l.apply(rho.operator()).max_abs()
}

#[test]
fn closed_single_excitation_dynamics_follow_reduced_hamiltonian() {
    let layout = SpaceLayout::new(2).unwrap();
    let p = SystemParams { epsilon: 0.0, ..SystemParams::pumped(1.0, 0.4) }.with_cutoff(2);
    let h = hamiltonian_rot(&p, &layout).unwrap();
    let gen = LindbladGenerator::time_independent(&h, &[]).unwrap();
    let times: Vec<f64> = (0..=40).map(|k| k as f64 * 0.25).collect();
    let rho0 = named(NamedState::E, &layout);
    let traj = evolve(&rho0, &gen, (0.0, 10.0), &times, &IntegratorConfig::default()).unwrap();
    let basis: Vec<_> = REDUCED_BASIS.iter().map(|&s| named_state(s, &layout)).collect();
    for (t, rho) in traj.times.iter().zip(&traj.states) {
        let total: f64 = basis.iter().map(|b| rho.operator().matrix_element(b, b).re).sum();
        assert!((total - 1.0).abs() < 1e-8, "t={t}: {total}");
    }

    let tight = IntegratorConfig { rtol: 1e-11, atol: 1e-13, ..IntegratorConfig::default() };
    let traj = evolve(&rho0, &gen, (0.0, 10.0), &times, &tight).unwrap();
    let reduced = hamiltonian_reduced(p.g, p.delta).unwrap();
    for (t, rho) in traj.times.iter().zip(&traj.states) {
        let u = unitary_propagator(reduced.as_array(), *t);
        for (k, b) in basis.iter().enumerate() {
            let want = u[[k, 0]].norm_sqr();
            let got = rho.operator().matrix_element(b, b).re;
            assert!((got - want).abs() < 1e-9, "t={t} {}: {got} vs {want}", REDUCED_BASIS[k]);
        }
    }
}

#[test]
fn unpumped_system_decays_to_vacuum() {
    let p = SystemParams { gamma: 0.5, epsilon: 0.0, ..SystemParams::pumped(1.0, 0.1) }.with_cutoff(2);
    let layout = p.layout().unwrap();
    let start = StateVector::basis(layout.dim(), layout.index(EXCITED, EXCITED, 2));
    let t_end = 10.0 / p.gamma;
    let traj = evolve(&DensityMatrix::from_pure(&start), &generator(&p), (0.0, t_end), &[t_end], &IntegratorConfig::default())
        .unwrap();
    let f = fidelity_pure(&traj.final_state, &named_state(NamedState::G0, &layout)).unwrap();
    assert!(f > 1.0 - 1e-6, "{f}");
}

#[test]
fn unpumped_steady_state_is_vacuum() {
    let p = SystemParams { epsilon: 0.0, ..SystemParams::pumped(1.0, 0.1) }.with_cutoff(3);
    let layout = p.layout().unwrap();
    let ss = system_steady_state(&p).unwrap();
    assert!(ss.rho.operator().max_abs_diff(&named(NamedState::G0, &layout).into_operator()) < 1e-10);
}

#[test]
fn optimal_point_steady_state_is_highly_entangled() {
    let p = SystemParams::pumped(1.0, 0.1);
    assert_eq!(p.fock_cutoff, 8);
    let ss = system_steady_state(&p).unwrap();
    let c = qubit_concurrence(&ss.rho, &p.layout().unwrap(), &Physicality::STRICT).unwrap();
    assert!(c >= 0.99, "{c}");
    assert!(ss.residual < 1e-12 && ss.min_eigenvalue > -1e-10);
}

/// Integrate decade by decade until ‖𝓛ρ‖∞ < 1e-12.
fn integrate_to_stationarity(p: &SystemParams, rho0: DensityMatrix, cfg: &IntegratorConfig, first: f64) -> DensityMatrix {
    let l = system_liouvillian(p).unwrap();
    let gen = generator(p);
    let (mut t, mut rho, mut step) = (0.0, rho0, first);
    while residual(&l, &rho) >= 1e-12 {
        assert!(t < 1e9, "no stationarity by t={t}: residual {}", residual(&l, &rho));
        rho = evolve(&rho, &gen, (t, t + step), &[], cfg).unwrap().final_state;
        t += step;
        step *= 10.0;
    }
    rho
}

#[test]
fn steady_state_matches_long_time_integration_stiff() {
    let p = SystemParams::pumped(1.0, 1.0).with_cutoff(3);
    let layout = p.layout().unwrap();
    let ss = system_steady_state(&p).unwrap();
    let rho = integrate_to_stationarity(&p, named(NamedState::G0, &layout), &rosenbrock(), 10.0);
    let d = trace_distance(&ss.rho, &rho).unwrap();
    assert!(d < 1e-6, "{d}");
}

#[test]
fn steady_state_matches_long_time_integration_explicit() {
    let p = SystemParams { gamma: 0.2, ..SystemParams::pumped(1.0, 0.5) }.with_cutoff(2);
    let layout = p.layout().unwrap();
    let ss = system_steady_state(&p).unwrap();
    let cfg = IntegratorConfig { rtol: 1e-12, atol: 1e-14, ..IntegratorConfig::default() };
    let rho = integrate_to_stationarity(&p, named(NamedState::E, &layout), &cfg, 50.0);
    let d = trace_distance(&ss.rho, &rho).unwrap();
    assert!(d < 1e-6, "{d}");
}

#[test]
fn steady_state_is_a_fixed_point_of_evolution() {
    for p in [SystemParams::pumped(1.0, 0.1).with_cutoff(4), SystemParams::pumped(1.0, 1.0).with_cutoff(4)] {
        let ss = system_steady_state(&p).unwrap();
        let times: Vec<f64> = (1..=10).map(|k| k as f64 / p.kappa).collect();
        for cfg in [IntegratorConfig::default(), rosenbrock()] {
            let traj = evolve(&ss.rho, &generator(&p), (0.0, 10.0 / p.kappa), &times, &cfg).unwrap();
            for rho in &traj.states {
                let d = trace_distance(&ss.rho, rho).unwrap();
                assert!(d < 1e-8, "{:?}: {d}", cfg.method);
            }
        }
    }
}

#[test]
fn liouvillian_has_a_unique_zero_eigenvalue() {
    for p in [
        SystemParams::pumped(1.0, 0.1).with_cutoff(1),
        SystemParams::pumped(1.0, 1.0).with_cutoff(2),
        SystemParams { gamma: 1e-2, ..SystemParams::pumped(0.5, 2.0) }.with_cutoff(1),
    ] {
        let l = system_liouvillian(&p).unwrap();
        let zeros = eigenvalues(l.as_array()).iter().filter(|z| z.norm() < 1e-10).count();
        assert_eq!(zeros, 1, "{p:?}");
    }
}

#[test]
fn driven_empty_cavity_holds_coherent_state() {
    let p = SystemParams { g: 0.0, delta: 0.0, epsilon: 1.0, ..SystemParams::pumped(0.0, 0.0) };
    let want = p.epsilon * p.epsilon / (p.kappa * p.kappa);
    let photons = |rho: &DensityMatrix, layout: &SpaceLayout| Ok(mean_photon_number(rho, layout)?);
    let (n, value) = converge_cutoff(&p, photons, 2, 1e-3).unwrap();
    assert!((value - want).abs() < 0.02 * want, "N={n}: {value}");

    let p = p.with_cutoff(8);
    let layout = p.layout().unwrap();
    let ss = system_steady_state(&p).unwrap();
    let n_ss = mean_photon_number(&ss.rho, &layout).unwrap();
    assert!((n_ss - want).abs() < 0.02 * want, "{n_ss}");

    let traj = evolve(&named(NamedState::G0, &layout), &generator(&p), (0.0, 20.0), &[20.0], &IntegratorConfig::default())
        .unwrap();
    let n_t = mean_photon_number(&traj.final_state, &layout).unwrap();
    assert!((n_t - n_ss).abs() < 1e-6, "{n_t} vs {n_ss}");
}

#[test]
fn cutoff_convergence_without_pump_stops_at_start() {
    let p = SystemParams { epsilon: 0.0, ..SystemParams::pumped(1.0, 0.1) };
    let conc = |rho: &DensityMatrix, layout: &SpaceLayout| Ok(qubit_concurrence(rho, layout, &Physicality::STRICT)?);
    assert_eq!(converge_cutoff(&p, conc, 2, 1e-10).unwrap().0, 2);
}

#[test]
fn cutoff_convergence_at_optimal_point() {
    let p = SystemParams::pumped(1.0, 0.1);
    let conc = |rho: &DensityMatrix, layout: &SpaceLayout| Ok(qubit_concurrence(rho, layout, &Physicality::STRICT)?);
    let (n, c) = converge_cutoff(&p, conc, 4, 1e-4).unwrap();
    assert!(n <= MAX_CERTIFIED_CUTOFF && c > 0.99, "N={n}: {c}");
    assert!(matches!(
        converge_cutoff(&p, conc, 4, 1e-6),
        Err(DynamicsError::NotConverged { max_cutoff: MAX_CERTIFIED_CUTOFF, .. })
    ));
    assert!(converge_cutoff(&p, conc, 0, 1e-4).is_err());
}

#[test]
fn rejects_bad_inputs() {
    let p = SystemParams::pumped(1.0, 0.1).with_cutoff(1);
    let layout = p.layout().unwrap();
    let gen = generator(&p);
    let rho = named(NamedState::G0, &layout);
    let cfg = IntegratorConfig::default();
    assert!(matches!(evolve(&rho, &gen, (0.0, 1.0), &[0.5, 0.5], &cfg), Err(DynamicsError::InvalidSampleTimes(_))));
    assert!(matches!(evolve(&rho, &gen, (0.0, 1.0), &[2.0], &cfg), Err(DynamicsError::InvalidSampleTimes(_))));
    assert!(matches!(evolve(&rho, &gen, (1.0, 0.0), &[], &cfg), Err(DynamicsError::InvalidSampleTimes(_))));
    let bad_cfg = IntegratorConfig { rtol: 0.0, ..cfg };
    assert!(evolve(&rho, &gen, (0.0, 1.0), &[], &bad_cfg).is_err());

    let small = named(NamedState::G0, &SpaceLayout::new(2).unwrap());
    assert!(matches!(evolve(&small, &gen, (0.0, 1.0), &[], &cfg), Err(DynamicsError::DimensionMismatch { .. })));
    let mut raw = rho.as_array().clone();
    raw[[0, 0]] = C64::new(-0.5, 0.0);
    raw[[1, 1]] = C64::new(0.5, 0.0);
    let unphysical = DensityMatrix::new_unchecked(Operator::from_array(raw).unwrap());
    assert!(matches!(evolve(&unphysical, &gen, (0.0, 1.0), &[], &cfg), Err(DynamicsError::InvalidInitialState(_))));

    let ramp = Schedule::TanhUp { max_value: 1.0, t0: 0.5, lambda: 4.0 };
    let terms = scheduled_hamiltonian(ramp, ramp, 0.0, DetuningSign::Printed, &layout).unwrap();
    let timed = LindbladGenerator::new(&terms, &dissipators(&p, &layout).unwrap()).unwrap();
    assert!(matches!(evolve(&rho, &timed, (0.0, 1.0), &[], &rosenbrock()), Err(DynamicsError::NotAutonomous)));
}

#[test]
fn singular_and_unphysical_steady_states_are_reported() {
    let p = SystemParams { g: 0.0, epsilon: 0.0, gamma: 0.0, ..SystemParams::pumped(0.0, 0.1) }.with_cutoff(1);
    assert!(matches!(system_steady_state(&p), Err(DynamicsError::SingularSystem { .. })));

    // 𝓛(X) = σ·tr X − X has the unique fixed point σ, which is not positive.
    let layout = SpaceLayout::new(1).unwrap();
    let d = layout.dim();
    let mut sigma = Array2::<C64>::zeros((d, d));
    sigma[[0, 0]] = C64::new(1.5, 0.0);
    sigma[[1, 1]] = C64::new(-0.5, 0.0);
    let mut l = Array2::<C64>::zeros((d * d, d * d));
    for k in 0..d {
        for i in 0..d {
            for j in 0..d {
                l[[i + j * d, k + k * d]] += sigma[[i, j]];
            }
        }
    }
    for k in 0..d * d {
        l[[k, k]] -= C64::new(1.0, 0.0);
    }
    let l = Superoperator::from_array(l, d).unwrap();
    match steady_state(&l, &layout) {
        Err(DynamicsError::PositivityViolation { eigenvalue }) => assert!((eigenvalue + 0.5).abs() < 1e-12),
        other => panic!("{other:?}"),
    }
    assert!(matches!(steady_state(&l, &SpaceLayout::new(2).unwrap()), Err(DynamicsError::DimensionMismatch { .. })));
}

fn max_entry_diff(a: &DensityMatrix, b: &DensityMatrix) -> f64 {
    a.operator().max_abs_diff(b.operator())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    /// Halving rtol and atol moves the final state by less than the coarser tolerance.
    #[test]
    fn tolerance_halving_is_self_consistent(
        g in 0.2..2.0f64,
        delta in 0.0..2.0f64,
        gamma in 0.0..0.3f64,
        seed in complex_entries(16 * 16),
        rosenbrock_method in any::<bool>(),
    ) {
        let p = SystemParams { gamma, ..SystemParams::pumped(g, delta) }.with_cutoff(1);
        let rho0 = density_from(&seed, p.layout().unwrap().dim());
        let method = if rosenbrock_method { Method::Rosenbrock } else { Method::DormandPrince };
        let coarse = IntegratorConfig { rtol: 1e-6, atol: 1e-8, method, ..IntegratorConfig::default() };
        let fine = IntegratorConfig { rtol: 5e-7, atol: 5e-9, ..coarse };
        let gen = generator(&p);
        let a = evolve(&rho0, &gen, (0.0, 5.0), &[], &coarse).unwrap().final_state;
        let b = evolve(&rho0, &gen, (0.0, 5.0), &[], &fine).unwrap().final_state;
        let diff = max_entry_diff(&a, &b);
        prop_assert!(diff < coarse.rtol, "{}", diff);
    }

    /// Two random initial states relax onto the same steady state.
    #[test]
    fn steady_state_is_independent_of_initial_state(
        g in 0.5..1.5f64,
        delta in 0.1..1.0f64,
        s1 in complex_entries(24 * 24),
        s2 in complex_entries(24 * 24),
    ) {
        let p = SystemParams { gamma: 0.05, ..SystemParams::pumped(g, delta) }.with_cutoff(2);
        let d = p.layout().unwrap().dim();
        let a = integrate_to_stationarity(&p, density_from(&s1[..d * d], d), &rosenbrock(), 10.0);
        let b = integrate_to_stationarity(&p, density_from(&s2[..d * d], d), &rosenbrock(), 10.0);
        let dist = trace_distance(&a, &b).unwrap();
        prop_assert!(dist < 1e-6, "{}", dist);
    }
}
