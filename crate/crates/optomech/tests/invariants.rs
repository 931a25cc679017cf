use optomech::fockspace::{annihilator, build_space, identity, ModeLadder};
use optomech::models::{bare_hamiltonian, transformed_hamiltonian, ModelParams, System};
use optomech::perturb::{displacement_element, rate_freq_conversion, rate_g10_e01, rate_two_atom};
use optomech::spectra::{eigensolve, state_composition};
use proptest::prelude::*;

fn single() -> impl Strategy<Value = System<f64>> {
    (0.3..0.9f64, 0.2..0.9f64, 0.0..0.1f64, 0.0..0.05f64)
        .prop_map(|(omega_c, omega_a, g, lambda)| System::SingleAtomSingleMode { omega_c, omega_a, g, lambda })
}

fn two_modes() -> impl Strategy<Value = System<f64>> {
    (0.5..0.8f64, 0.3..0.6f64, 0.2..0.5f64, 0.0..0.05f64, 0.0..0.03f64).prop_map(
        |(omega_c1, omega_c2, omega_a, g, lambda)| System::SingleAtomTwoModes { omega_c1, omega_c2, omega_a, g, lambda },
    )
}

fn two_atoms() -> impl Strategy<Value = System<f64>> {
    (0.4..0.8f64, 0.3..0.7f64, 0.3..0.7f64, 0.0..0.05f64, 0.0..0.03f64, 0.0..0.03f64).prop_map(
        |(omega_c, omega_a1, omega_a2, g, lambda1, lambda2)| System::TwoAtomsSingleMode {
            omega_c,
            omega_a1,
            omega_a2,
            g,
            lambda1,
            lambda2,
        },
    )
}

fn any_system() -> impl Strategy<Value = System<f64>> {
    prop_oneof![single(), two_modes(), two_atoms()]
}

fn small(s: System<f64>) -> ModelParams<f64> {
    let cutoffs = s.kind().default_cutoffs();
    let photon = cutoffs.photon.iter().map(|&n| n.min(3)).collect();
    ModelParams::with_cutoffs(s, optomech::models::Cutoffs { phonon: 3, photon })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn ladder_commutator_is_identity_below_the_cutoff(cutoff in 1usize..12) {
        let s = build_space(vec![ModeLadder::new("m", cutoff)], 0).unwrap();
        let a = annihilator::<f64>(&s, 0).unwrap();
        let c = a.commutator(&a.adjoint()).unwrap();
        let id = identity::<f64>(&s);
        let diff = c.checked_sub(&id).unwrap().real_part();
        for i in 0..cutoff {
            for j in 0..=cutoff {
                prop_assert!(diff[(i, j)].abs() < 1e-13);
            }
        }
    }

    #[test]
    fn hamiltonians_are_hermitian(s in any_system()) {
        let p = small(s);
        let space = p.space().unwrap();
        prop_assert!(bare_hamiltonian(&p, &space).unwrap().hermiticity_residual() < 1e-12);
        prop_assert!(transformed_hamiltonian(&p, &space, 3).unwrap().hermiticity_residual() < 1e-12);
    }

    #[test]
    fn eigenpairs_have_small_residual(s in any_system()) {
        let p = small(s);
        let h = bare_hamiltonian(&p, &p.space().unwrap()).unwrap();
        let sol = eigensolve(&h).unwrap();
        prop_assert!(sol.residual(&h) < 1e-10);
        prop_assert!(sol.orthonormality_defect() < 1e-10);
    }

    #[test]
    fn compositions_are_normalized(s in single(), level in 0usize..8) {
        let p = small(s);
        let sol = eigensolve(&bare_hamiltonian(&p, &p.space().unwrap()).unwrap()).unwrap();
        let all: f64 = state_composition(&sol, level, None).unwrap().iter().map(|c| c.weight()).sum();
        prop_assert!((all - 1.0).abs() < 1e-8);
        let top: f64 = state_composition(&sol, level, Some(2)).unwrap().iter().map(|c| c.weight()).sum();
        prop_assert!(top <= all + 1e-12);
    }

    #[test]
    fn single_atom_rates_are_linear_in_lambda(s in single(), k in 0.1..4.0f64) {
        let System::SingleAtomSingleMode { omega_c, omega_a, g, lambda } = s else { unreachable!() };
        let scaled = System::SingleAtomSingleMode { omega_c, omega_a, g, lambda: k * lambda };
        if let (Ok(a), Ok(b)) = (rate_g10_e01(&s), rate_g10_e01(&scaled)) {
            prop_assert!((b.omega_eff - k * a.omega_eff).abs() <= 1e-12 * (1.0 + b.omega_eff.abs()));
        }
    }

    #[test]
    fn conversion_rate_is_linear_in_lambda(s in two_modes(), k in 0.1..4.0f64) {
        let System::SingleAtomTwoModes { omega_c1, omega_c2, omega_a, g, lambda } = s else { unreachable!() };
        let scaled = System::SingleAtomTwoModes { omega_c1, omega_c2, omega_a, g, lambda: k * lambda };
        if let (Ok(a), Ok(b)) = (rate_freq_conversion(&s), rate_freq_conversion(&scaled)) {
            prop_assert!((b.omega_eff - k * a.omega_eff).abs() <= 1e-12 * (1.0 + b.omega_eff.abs()));
        }
    }

    #[test]
    fn two_atom_rate_is_bilinear(s in two_atoms(), k in 0.1..4.0f64) {
        let System::TwoAtomsSingleMode { omega_c, omega_a1, omega_a2, g, lambda1, lambda2 } = s else { unreachable!() };
        let scaled = System::TwoAtomsSingleMode { omega_c, omega_a1, omega_a2, g, lambda1: k * lambda1, lambda2 };
        if let (Ok(a), Ok(b)) = (rate_two_atom(&s), rate_two_atom(&scaled)) {
            prop_assert!((b.omega_eff - k * a.omega_eff).abs() <= 1e-12 * (1.0 + b.omega_eff.abs()));
        }
    }

    #[test]
    fn displacement_is_unitary(alpha in -1.0..1.0f64, a in 0usize..5, b in 0usize..5) {
        // Columns of the infinite displacement matrix are orthonormal; 60 rows are ample for |alpha| <= 1.
        let dot: f64 = (0..60).map(|k| displacement_element(k, a, alpha) * displacement_element(k, b, alpha)).sum();
        let want = if a == b { 1.0 } else { 0.0 };
        prop_assert!((dot - want).abs() < 1e-12);
    }

    #[test]
    fn displacement_inverse_is_opposite_shift(alpha in -1.0..1.0f64, a in 0usize..6, b in 0usize..6) {
        prop_assert!((displacement_element(a, b, alpha) - displacement_element(b, a, -alpha)).abs() < 1e-14);
    }

    #[test]
    fn swapping_the_atoms_keeps_the_spectrum(s in two_atoms()) {
        let System::TwoAtomsSingleMode { omega_c, omega_a1, omega_a2, g, lambda1, lambda2 } = s else { unreachable!() };
        let swapped = System::TwoAtomsSingleMode {
            omega_c,
            omega_a1: omega_a2,
            omega_a2: omega_a1,
            g,
            lambda1: lambda2,
            lambda2: lambda1,
        };
        let (p, q) = (small(s), small(swapped));
        let e1 = eigensolve(&bare_hamiltonian(&p, &p.space().unwrap()).unwrap()).unwrap().values;
        let e2 = eigensolve(&bare_hamiltonian(&q, &q.space().unwrap()).unwrap()).unwrap().values;
        for (x, y) in e1.iter().zip(e2.iter()) {
            prop_assert!((x - y).abs() < 1e-10);
        }
        let r1 = rate_two_atom(&s).map(|e| e.omega_eff);
        let r2 = rate_two_atom(&swapped).map(|e| e.omega_eff);
        if let (Ok(a), Ok(b)) = (r1, r2) {
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
        }
    }
}
