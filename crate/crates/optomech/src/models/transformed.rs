//! Hamiltonians after the polaron-type transformation
//! `U = exp[-beta n (b^dagger - b)]` that removes the radiation-pressure term.
//!
//! The transformed Hamiltonian contains an exact Kerr shift `-g^2 n^2` plus
//! power series in `g` for the pair-creation and atom–cavity terms; the series
//! keep the orders `0..=series_order`. Each order is written in the same
//! operator ordering as the closed-form expansion. In a truncated space these
//! products pick up small non-Hermitian pieces on the highest phonon rungs, so
//! the result is replaced by its Hermitian part.

use nalgebra::DMatrix;

use super::hamiltonian::{Cavity, Locals};
use super::hybrid::{hybridize, joint_modes};
use super::{ModelKind, ModelParams, System};
use crate::error::Result;
use crate::fockspace::{embed, HilbertSpace, OperatorMatrix};
use crate::scalar::Real;

/// Number of retained expansion orders used unless stated otherwise.
pub const DEFAULT_SERIES_ORDER: usize = 3;

fn sign<T: Real>(k: usize) -> T {
    if k % 2 == 0 {
        T::one()
    } else {
        -T::one()
    }
}

fn factorial<T: Real>(k: usize) -> T {
    (1..=k).fold(T::one(), |acc, i| acc * T::from_count(i))
}

/// `(b^dagger - b)^k` for `k = 0..=order`.
fn displacement_powers<T: Real>(l: &Locals<T>, order: usize) -> Vec<DMatrix<T>> {
    let y = l.b.transpose() - &l.b;
    let mut out = vec![DMatrix::identity(y.nrows(), y.nrows())];
    for k in 1..=order {
        out.push(&out[k - 1] * &y);
    }
    out
}

/// Pair-creation series for a mode with lowering matrix `a` (on the factor
/// starting at `slot`) and coupling `g`.
fn pair_series<T: Real>(
    space: &HilbertSpace,
    l: &Locals<T>,
    ys: &[DMatrix<T>],
    slot: usize,
    a: &DMatrix<T>,
    g: T,
) -> DMatrix<T> {
    let ad = a.transpose();
    let (a2, ad2) = (a * a, &ad * &ad);
    let n = &ad * a;
    let mut out = DMatrix::zeros(space.dim(), space.dim());
    for (k, yk) in ys.iter().enumerate() {
        let coef = g.powi(k as i32 + 1) * T::lit(2.0).powi(k as i32 - 1) / factorial::<T>(k);
        let f1 = &ad2 + &a2 * sign::<T>(k);
        out += embed(space, &[(l.mech, &(yk * &l.x_b)), (slot, &f1)]) * coef;
        if k >= 1 {
            let f2 = (&ad2 + &a2 * sign::<T>(k - 1)) * &n;
            out -= embed(space, &[(l.mech, &ys[k - 1]), (slot, &f2)]) * (coef * T::from_count(k));
        }
    }
    out
}

/// Atom–cavity series `sum_k lambda g^k/k! [a^dagger + (-1)^k a] sigma_x Y^k` for the
/// atom on `qubit`.
fn atom_series<T: Real>(
    space: &HilbertSpace,
    l: &Locals<T>,
    ys: &[DMatrix<T>],
    qubit: usize,
    slot: usize,
    a: &DMatrix<T>,
    g: T,
    lambda: T,
) -> DMatrix<T> {
    let ad = a.transpose();
    let mut out = DMatrix::zeros(space.dim(), space.dim());
    for (k, yk) in ys.iter().enumerate() {
        let coef = lambda * g.powi(k as i32) / factorial::<T>(k);
        let f = &ad + a * sign::<T>(k);
        out += embed(space, &[(qubit, &l.sx), (l.mech, yk), (slot, &f)]) * coef;
    }
    out
}

fn hermitian_part<T: Real>(h: DMatrix<T>) -> DMatrix<T> {
    (&h + h.transpose()) * T::lit(0.5)
}

/// Transformed Hamiltonian of the model, truncated after `series_order`.
pub fn transformed_hamiltonian<T: Real>(
    p: &ModelParams<T>,
    space: &HilbertSpace,
    series_order: usize,
) -> Result<OperatorMatrix<T>> {
    p.system.validate()?;
    p.kind().check_space(space)?;
    let l = Locals::<T>::new(space)?;
    let ys = displacement_powers(&l, series_order);
    let mut h = embed(space, &[(l.mech, &l.n_b)]);
    match (p.kind(), p.system) {
        (ModelKind::SingleAtomSingleMode, System::SingleAtomSingleMode { omega_c, omega_a, g, lambda }) => {
            let c = Cavity::<T>::new(space, 0)?;
            let local = &c.n * omega_c - (&c.n * &c.n) * (g * g);
            h += embed(space, &[(c.slot, &local)]);
            h += embed(space, &[(0, &l.pe)]) * omega_a;
            h += pair_series(space, &l, &ys, c.slot, &c.a, g);
            h += atom_series(space, &l, &ys, 0, c.slot, &c.a, g, lambda);
        }
        (
            ModelKind::TwoAtomsSingleMode,
            System::TwoAtomsSingleMode { omega_c, omega_a1, omega_a2, g, lambda1, lambda2 },
        ) => {
            let c = Cavity::<T>::new(space, 0)?;
            let local = &c.n * omega_c - (&c.n * &c.n) * (g * g);
            h += embed(space, &[(c.slot, &local)]);
            h += embed(space, &[(0, &l.pe)]) * omega_a1;
            h += embed(space, &[(1, &l.pe)]) * omega_a2;
            h += pair_series(space, &l, &ys, c.slot, &c.a, g);
            h += atom_series(space, &l, &ys, 0, c.slot, &c.a, g, lambda1);
            h += atom_series(space, &l, &ys, 1, c.slot, &c.a, g, lambda2);
        }
        (ModelKind::SingleAtomTwoModes, System::SingleAtomTwoModes { omega_a, lambda, .. }) => {
            let hy = hybridize(&p.system)?;
            let (slot, pm, qm) = joint_modes(space, hy.c)?;
            let (pd, qd) = (pm.transpose(), qm.transpose());
            let one_c2 = T::one() + hy.c * hy.c;
            let s = T::one() / one_c2.sqrt();
            let nq = &qd * &qm;
            let free = (&pd * &pm) * hy.omega_tilde_c1 + &nq * hy.omega_tilde_c2 - (&nq * &nq) * (hy.big_g * hy.big_g);
            h += embed(space, &[(slot, &free)]);
            h += embed(space, &[(0, &l.pe)]) * omega_a;
            h += pair_series(space, &l, &ys, slot, &qm, hy.big_g);
            h += atom_series(space, &l, &ys, 0, slot, &qm, hy.big_g, lambda * s);
            h += embed(space, &[(0, &l.sx), (slot, &((&pd + &pm) * (lambda * s * hy.c)))]);
            let scatter = hy.delta * hy.c / one_c2;
            let qp_dag = &qm * &pd;
            let qd_p = &qd * &pm;
            for (k, yk) in ys.iter().enumerate() {
                let coef = scatter * hy.big_g.powi(k as i32) / factorial::<T>(k);
                let f = &qd_p + &qp_dag * sign::<T>(k);
                h += embed(space, &[(l.mech, yk), (slot, &f)]) * coef;
            }
        }
        _ => unreachable!("system kind and model kind agree"),
    }
    OperatorMatrix::from_real(space.clone(), &hermitian_part(h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{bare_hamiltonian, Cutoffs};
    use nalgebra::SymmetricEigen;

    fn single(g: f64, lambda: f64) -> ModelParams<f64> {
        ModelParams::new(System::SingleAtomSingleMode { omega_c: 0.6, omega_a: 0.4, g, lambda })
    }

    fn lowest(h: &OperatorMatrix<f64>, n: usize) -> Vec<f64> {
        let mut e: Vec<f64> = SymmetricEigen::new(h.real_part()).eigenvalues.iter().copied().collect();
        e.sort_by(|a, b| a.partial_cmp(b).unwrap());
        e.truncate(n);
        e
    }

    #[test]
    fn identity_transform_without_coupling() {
        let p = single(0.0, 0.005);
        let space = p.space().unwrap();
        let t = transformed_hamiltonian(&p, &space, 0).unwrap();
        assert_eq!(t, bare_hamiltonian(&p, &space).unwrap());
    }

    #[test]
    fn kerr_shift_of_two_photons() {
        let p = single(0.03, 0.005);
        let space = p.space().unwrap();
        let t = transformed_hamiltonian(&p, &space, 3).unwrap();
        let i = space.index_of(&[0, 0, 2]).unwrap();
        let free = 2.0 * 0.6;
        assert!((t.entries()[(i, i)].re - free + 3.6e-3).abs() < 1e-15);
    }

    #[test]
    fn spectrum_matches_bare_frame() {
        let p = single(0.03, 0.005);
        let space = p.space().unwrap();
        let bare = lowest(&bare_hamiltonian(&p, &space).unwrap(), 10);
        let tr = lowest(&transformed_hamiltonian(&p, &space, 6).unwrap(), 10);
        for (a, b) in bare.iter().zip(&tr) {
            assert!((a - b).abs() < 1e-4, "{a} vs {b}");
        }
    }

    #[test]
    fn outputs_are_hermitian() {
        let p = single(0.05, 0.01);
        let t = transformed_hamiltonian(&p, &p.space().unwrap(), 3).unwrap();
        assert!(t.hermiticity_residual() < 1e-12);
    }

    #[test]
    fn two_atom_and_two_mode_frames_agree_with_bare() {
        let atoms = ModelParams::with_cutoffs(
            System::TwoAtomsSingleMode {
                omega_c: 0.7,
                omega_a1: 0.45,
                omega_a2: 0.55,
                g: 0.02,
                lambda1: 0.014,
                lambda2: 0.022,
            },
            Cutoffs { phonon: 6, photon: vec![5] },
        );
        let modes = ModelParams::with_cutoffs(
            System::SingleAtomTwoModes { omega_c1: 0.65, omega_c2: 0.5, omega_a: 0.34, g: 0.02, lambda: 0.01 },
            Cutoffs { phonon: 6, photon: vec![4, 4] },
        );
        for p in [atoms, modes] {
            let space = p.space().unwrap();
            let bare = lowest(&bare_hamiltonian(&p, &space).unwrap(), 8);
            let tr = lowest(&transformed_hamiltonian(&p, &space, 6).unwrap(), 8);
            for (a, b) in bare.iter().zip(&tr) {
                assert!((a - b).abs() < 1e-4, "{:?}: {a} vs {b}", p.kind());
            }
        }
    }
}
