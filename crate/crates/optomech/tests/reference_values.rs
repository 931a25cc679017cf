use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use optomech::fockspace::qubit_lowering;
use optomech::lindblad::{evolve, EvolveOptions, InitialState};
use optomech::models::{bare_hamiltonian, Cutoffs, LossRates, ModelParams, Param, System};
use optomech::perturb::rate_g10_e01;
use optomech::spectra::{eigensolve, find_min_splitting};

fn single(omega_c: f64, omega_a: f64, g: f64, lambda: f64) -> ModelParams<f64> {
    ModelParams::new(System::SingleAtomSingleMode { omega_c, omega_a, g, lambda })
}

fn rel(x: f64, want: f64) -> f64 {
    (x - want).abs() / want.abs()
}

#[test]
fn first_order_crossing_near_omega_c_0_6() {
    let p = single(0.6, 0.4, 0.03, 0.005);
    let r = find_min_splitting(&p, Param::OmegaC, (0.55, 0.65), (3, 4)).unwrap();
    assert!(rel(r.splitting, 1.83e-3) < 0.05, "{}", r.splitting);
    assert!((r.axis_value_at_min - 0.6).abs() < 0.005);
    for state in &r.state_composition {
        let mut labels: Vec<&str> = state[..2].iter().map(|c| c.label.as_str()).collect();
        labels.sort();
        assert_eq!(labels, ["|e,0,1>", "|g,1,0>"]);
        for c in &state[..2] {
            assert!((c.weight() - 0.5).abs() < 0.05, "{}", c.weight());
        }
    }
    assert_eq!(r.resonance_order, 1);
}

#[test]
fn resonant_cavity_splittings() {
    for (g, lambda, want) in [(0.01, 0.01, 8.37e-3), (0.03, 0.01, 2.46e-2), (0.03, 0.005, 2.34e-2)] {
        let r = find_min_splitting(&single(0.5, 0.5, g, lambda), Param::OmegaC, (0.45, 0.55), (3, 4)).unwrap();
        assert!(rel(r.splitting, want) < 0.05, "g = {g}, lambda = {lambda}: {}", r.splitting);
    }
}

#[test]
fn pulse_crossing_splitting() {
    let r = find_min_splitting(&single(0.6, 0.4, 0.03, 0.01), Param::OmegaC, (0.55, 0.65), (3, 4)).unwrap();
    assert!(rel(r.splitting, 3.64e-3) < 0.05, "{}", r.splitting);
}

#[test]
fn main_rate_tracks_numeric_splitting_at_weak_coupling() {
    for g in [0.01, 0.03, 0.05] {
        let p = single(0.6, 0.4, g, 0.005);
        let r = find_min_splitting(&p, Param::OmegaC, (0.55, 0.65), (3, 4)).unwrap();
        let at = p.system.with(Param::OmegaC, r.axis_value_at_min).unwrap();
        let analytic = rate_g10_e01(&at).unwrap().splitting().abs();
        assert!(rel(analytic, r.splitting) < 0.10, "g = {g}: {analytic} vs {}", r.splitting);
    }
}

/// Closed-system evolution against the exact spectral propagator of the same Hamiltonian.
#[test]
fn lossless_evolution_matches_spectral_propagator() {
    let system = System::SingleAtomSingleMode { omega_c: 0.5990350114142342, omega_a: 0.4, g: 0.03, lambda: 0.005 };
    let p = ModelParams::with_cutoffs(system, Cutoffs { phonon: 3, photon: vec![3] });
    let space = p.space().unwrap();
    let h = bare_hamiltonian(&p, &space).unwrap();
    let sol = eigensolve(&h).unwrap();
    let start = space.index_of(&[0, 1, 0]).unwrap();
    let coeffs: Vec<Complex<f64>> = (0..sol.dim()).map(|k| sol.vectors[(start, k)].conj()).collect();
    // Dressed atom lowering operator X built directly from the eigenpairs.
    let sm = qubit_lowering::<f64>(&space, 0).unwrap();
    let sx = sm.entries() + sm.entries().adjoint();
    let elems = sol.vectors.adjoint() * sx * &sol.vectors;
    let low = DMatrix::from_fn(sol.dim(), sol.dim(), |m, n| {
        if sol.values[n] - sol.values[m] > 1e-9 { elems[(m, n)] } else { Complex::new(0.0, 0.0) }
    });
    let x = &sol.vectors * low * sol.vectors.adjoint();
    let n_atom = x.adjoint() * x;

    let times: Vec<f64> = (0..=40).map(|k| 50.0 * k as f64).collect();
    let opts = EvolveOptions { levels: sol.dim(), rtol: 1e-10, atol: 1e-12, ..EvolveOptions::default() };
    let initial = InitialState::Bare { occupations: vec![0, 1, 0] };
    let tr = evolve(&p, &LossRates::zero(p.kind()), None, None, &initial, &times, &opts).unwrap();
    let atom = tr.observable("mean_atom").unwrap();

    for (k, &t) in times.iter().enumerate() {
        let psi: DVector<Complex<f64>> = (0..sol.dim())
            .map(|j| sol.vectors.column(j) * (coeffs[j] * Complex::from_polar(1.0, -sol.values[j] * t)))
            .fold(DVector::zeros(sol.dim()), |acc, v| acc + v);
        let want = psi.dotc(&(&n_atom * &psi)).re;
        assert!((atom[k] - want).abs() < 1e-6, "t = {t}: {} vs {want}", atom[k]);
    }
}

#[test]
fn undriven_ground_state_stays_put_with_losses() {
    let p = single(0.6, 0.4, 0.03, 0.01);
    let times: Vec<f64> = (0..=20).map(|k| 100.0 * k as f64).collect();
    let tr = evolve(&p, &LossRates::uniform(p.kind(), 1e-3), None, None, &InitialState::Ground, &times, &EvolveOptions::default())
        .unwrap();
    for (name, v) in &tr.observables {
        for x in v {
            assert!((x - v[0]).abs() < 1e-10, "{name} drifted to {x}");
        }
    }
    assert!(tr.max_trace_deviation() < 1e-10);
}
