mod common;

use common::*;
use entangle_core::hilbert::*;
use entangle_core::model::*;
use num_complex::Complex64 as C64;
use proptest::prelude::*;

fn params_strategy() -> impl Strategy<Value = SystemParams> {
    (0.0..2.0f64, 0.0..2.0f64, 0.0..0.5f64, 0.1..2.0f64, 0.0..2.0f64, 1usize..4, any::<bool>()).prop_map(
        |(g, delta, gamma, kappa, epsilon, cutoff, flip)| SystemParams {
            g,
            delta,
            gamma,
            kappa,
            epsilon,
            fock_cutoff: cutoff,
            omega_m: 3.0,
            detuning_sign: if flip { DetuningSign::Relabeled } else { DetuningSign::Printed },
        },
    )
}

fn schedule_strategy() -> impl Strategy<Value = Schedule> {
    prop_oneof![
        (0.0..5.0f64).prop_map(|value| Schedule::Constant { value }),
        (0.0..5.0f64, -1.0..1.0f64, 0.1..10.0f64).prop_map(|(max_value, t0, lambda)| Schedule::TanhDown { max_value, t0, lambda }),
        (0.0..5.0f64, -1.0..1.0f64, 0.1..10.0f64).prop_map(|(max_value, t0, lambda)| Schedule::TanhUp { max_value, t0, lambda }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    /// L·vec(ρ) against −i[H, ρ] + Σ D[L](ρ) evaluated with matrix products.
    #[test]
    fn liouvillian_matches_direct_rhs(p in params_strategy(), seed in complex_entries(16 * 16)) {
        let layout = p.layout().unwrap();
        let d = layout.dim();
        let rho = density_from(&seed[..d * d], d);
        let h = hamiltonian_driven(&p, &layout).unwrap();
        let diss = dissipators(&p, &layout).unwrap();
        let direct = lindblad_rhs(&h, &diss, rho.operator());
        let via_l = system_liouvillian(&p).unwrap().apply(rho.operator());
        prop_assert!(direct.max_abs_diff(&via_l) < 1e-12, "{}", direct.max_abs_diff(&via_l));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn hamiltonians_are_hermitian(p in params_strategy(), t in -2.0..2.0f64, ds in schedule_strategy(), gs in schedule_strategy()) {
        let layout = p.layout().unwrap();
        for h in [
            hamiltonian_lab(&p, &layout).unwrap(),
            hamiltonian_rot(&p, &layout).unwrap(),
            hamiltonian_pump(p.epsilon, &layout).unwrap(),
            hamiltonian_driven(&p, &layout).unwrap(),
            hamiltonian_reduced(p.g, p.delta).unwrap(),
        ] {
            prop_assert_eq!(h.hermiticity_error(), 0.0);
        }
        let terms = scheduled_hamiltonian(ds, gs, p.epsilon, p.detuning_sign, &layout).unwrap();
        for term in &terms {
            prop_assert_eq!(term.operator.hermiticity_error(), 0.0);
            prop_assert!(term.coefficient.value(t).is_finite());
        }
    }

    /// Σ_k c_k(t) H_k equals the fixed-parameter Hamiltonian at Δ(t), g(t).
    #[test]
    fn scheduled_terms_sum_to_driven_hamiltonian(p in params_strategy(), t in -2.0..2.0f64, ds in schedule_strategy(), gs in schedule_strategy()) {
        let layout = p.layout().unwrap();
        let terms = scheduled_hamiltonian(ds, gs, p.epsilon, p.detuning_sign, &layout).unwrap();
        let mut sum = Operator::zeros(layout.dim());
        for term in &terms {
            sum = &sum + &term.operator.scale(term.coefficient.value(t));
        }
        let fixed = SystemParams { delta: ds.value(t), g: gs.value(t), ..p };
        let want = hamiltonian_driven(&fixed, &layout).unwrap();
        prop_assert!(sum.max_abs_diff(&want) < 1e-13);
    }

    /// tr L(X) = 0 for every X and L maps Hermitian to Hermitian.
    #[test]
    fn liouvillian_is_trace_and_hermiticity_preserving(p in params_strategy(), seed in complex_entries(16 * 16)) {
        let layout = p.layout().unwrap();
        let d = layout.dim();
        let x = Operator::from_array(matrix_from(&seed[..d * d], d)).unwrap();
        let l = system_liouvillian(&p).unwrap();
        prop_assert!(l.apply(&x).trace().norm() < 1e-12);
        let herm = &x + &x.adjoint();
        prop_assert!(l.apply(&herm).hermiticity_error() < 1e-13);
    }

    /// Moving to the frame rotating at ω_m removes ω_m·N and leaves the
    /// detuning with qubit 1 at −Δ, since ω_e⁽¹⁾ = ω_m − Δ.
    #[test]
    fn lab_frame_differs_by_excitation_number(p in params_strategy()) {
        let layout = p.layout().unwrap();
        let n = FullOperators::new(&layout).unwrap().excitation_number();
        let lab = hamiltonian_lab(&p, &layout).unwrap();
        let rot = hamiltonian_rot(&SystemParams { detuning_sign: DetuningSign::Relabeled, ..p }, &layout).unwrap();
        prop_assert!((&lab - &n.scale(p.omega_m)).max_abs_diff(&rot) < 1e-13);
    }

    #[test]
    fn excitation_number_is_conserved_without_pump(p in params_strategy()) {
        let layout = p.layout().unwrap();
        let n = FullOperators::new(&layout).unwrap().excitation_number();
        let h = hamiltonian_rot(&p, &layout).unwrap();
        // a†a carries √n·√n rounding, nothing more
        prop_assert!(h.commutator(&n).max_abs() < 1e-12);
        if p.epsilon > 0.1 {
            prop_assert!(hamiltonian_pump(p.epsilon, &layout).unwrap().commutator(&n).max_abs() > 0.1);
        }
    }

    #[test]
    fn vectorization_is_column_stacking(seed in complex_entries(25)) {
        let x = Operator::from_array(matrix_from(&seed, 5)).unwrap();
        let v = vectorize(&x);
        for i in 0..5 {
            for j in 0..5 {
                prop_assert_eq!(v[i + 5 * j], x.get(i, j));
            }
        }
        prop_assert_eq!(unvectorize(&v, 5), x);
    }
}

#[test]
fn reduced_hamiltonian_matches_full_single_excitation_block() {
    let layout = SpaceLayout::new(3).unwrap();
    let p = SystemParams { epsilon: 0.0, ..SystemParams::pumped(0.7, 0.3) };
    let h = hamiltonian_rot(&p, &layout).unwrap();
    let reduced = hamiltonian_reduced(p.g, p.delta).unwrap();
    for (i, a) in REDUCED_BASIS.iter().enumerate() {
        for (j, b) in REDUCED_BASIS.iter().enumerate() {
            let full = h.matrix_element(&named_state(*a, &layout), &named_state(*b, &layout));
            assert!((full - reduced.get(i, j)).norm() < 1e-14, "{a} {b}: {full} vs {}", reduced.get(i, j));
        }
    }
}

/// With the 2LρL† convention a Fock state |1⟩ empties at rate 2κ and an
/// excited qubit at rate 2Γ.
#[test]
fn dissipators_use_doubled_rates() {
    let layout = SpaceLayout::new(2).unwrap();
    let p = SystemParams { gamma: 0.3, kappa: 0.7, ..SystemParams::pumped(0.0, 0.0) };
    let diss = dissipators(&p, &layout).unwrap();
    let e = named_state(NamedState::E, &layout);
    let g0 = named_state(NamedState::G0, &layout);
    let out = lindblad_rhs(&Operator::zeros(layout.dim()), &diss, &e.projector());
    assert!((out.matrix_element(&e, &e) - C64::new(-1.4, 0.0)).norm() < 1e-15);
    assert!((out.matrix_element(&g0, &g0) - C64::new(1.4, 0.0)).norm() < 1e-15);

    let eg0 = StateVector::basis(layout.dim(), layout.index(EXCITED, GROUND, 0));
    let out = lindblad_rhs(&Operator::zeros(layout.dim()), &diss, &eg0.projector());
    assert!((out.matrix_element(&eg0, &eg0) - C64::new(-0.6, 0.0)).norm() < 1e-15);
}

#[test]
fn rejects_invalid_parameters() {
    let base = SystemParams::pumped(1.0, 0.1);
    for bad in [
        SystemParams { g: -1.0, ..base },
        SystemParams { delta: f64::NAN, ..base },
        SystemParams { gamma: -1e-3, ..base },
        SystemParams { kappa: 0.0, ..base },
        SystemParams { epsilon: f64::INFINITY, ..base },
        SystemParams { fock_cutoff: 0, ..base },
    ] {
        assert!(bad.validate().is_err(), "{bad:?}");
        assert!(system_liouvillian(&bad).is_err());
    }
    assert!(hamiltonian_reduced(-1.0, 0.0).is_err());
    assert!(Schedule::TanhUp { max_value: 1.0, t0: 0.0, lambda: 0.0 }.validate("g").is_err());
    assert!(Superoperator::from_array(ndarray::Array2::zeros((4, 4)), 3).is_err());
}

#[test]
fn schedules_ramp_between_zero_and_peak() {
    let down = Schedule::TanhDown { max_value: 2e5, t0: 4e-3, lambda: 5e2 };
    let up = Schedule::TanhUp { max_value: 2e4, t0: 3e-3, lambda: 1e3 };
    assert!((down.value(4e-3) - 1e5).abs() < 1e-9);
    assert!((up.value(3e-3) - 1e4).abs() < 1e-9);
    assert!(down.value(-1.0) > 0.999 * 2e5 && down.value(1.0) < 1e-3);
    assert!(up.value(-1.0) < 1e-3 && up.value(1.0) > 0.999 * 2e4);
    assert_eq!(down.peak(), 2e5);
    assert_eq!(Schedule::Constant { value: 250.0 }.t0(), None);
}
