use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::hamiltonian::{Cavity, Locals};
use super::{ModelParams, System};
use crate::error::{Error, Result};
use crate::fockspace::{embed, HilbertSpace, OperatorMatrix};
use crate::scalar::Real;

/// Rotated cavity modes `p = (c a1 + a2)/sqrt(1+c^2)`, `q = (a1 - c a2)/sqrt(1+c^2)`
/// of the two-mode model, with `c = sqrt(omega_c2/omega_c1)`. Only `q` couples
/// to the mirror, with strength `G = (1+c^2) g`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HybridizedModes<T> {
    pub c: T,
    #[serde(rename = "G")]
    pub big_g: T,
    pub delta: T,
    pub omega_tilde_c1: T,
    pub omega_tilde_c2: T,
}

pub fn hybridize<T: Real>(system: &System<T>) -> Result<HybridizedModes<T>> {
    let System::SingleAtomTwoModes { omega_c1, omega_c2, g, .. } = *system else {
        return Err(Error::WrongModel { expected: "single_atom_two_modes", found: system.kind().name() });
    };
    let c2 = omega_c2 / omega_c1;
    let delta = omega_c1 - omega_c2;
    let one_c2 = T::one() + c2;
    Ok(HybridizedModes {
        c: c2.sqrt(),
        big_g: one_c2 * g,
        delta,
        omega_tilde_c1: omega_c2 + delta * c2 / one_c2,
        omega_tilde_c2: omega_c2 + delta / one_c2,
    })
}

/// `p` and `q` as matrices on the joint two-cavity factor (cavity 1 ⊗ cavity 2),
/// plus the slot where that factor starts.
pub(crate) fn joint_modes<T: Real>(space: &HilbertSpace, c: T) -> Result<(usize, DMatrix<T>, DMatrix<T>)> {
    let c1 = Cavity::<T>::new(space, 0)?;
    let c2 = Cavity::<T>::new(space, 1)?;
    let i1 = DMatrix::<T>::identity(c1.a.nrows(), c1.a.nrows());
    let i2 = DMatrix::<T>::identity(c2.a.nrows(), c2.a.nrows());
    let a1 = c1.a.kronecker(&i2);
    let a2 = i1.kronecker(&c2.a);
    let s = T::one() / (T::one() + c * c).sqrt();
    let p = (&a1 * c + &a2) * s;
    let q = (&a1 - &a2 * c) * s;
    Ok((c1.slot, p, q))
}

/// The two-mode Hamiltonian rewritten in the hybridized operators. Equal to the
/// bare Hamiltonian as a matrix, so it has the same spectrum.
pub fn hybridized_hamiltonian<T: Real>(p: &ModelParams<T>, space: &HilbertSpace) -> Result<OperatorMatrix<T>> {
    p.system.validate()?;
    let h = hybridize(&p.system)?;
    let System::SingleAtomTwoModes { omega_a, lambda, .. } = p.system else { unreachable!() };
    p.kind().check_space(space)?;
    let l = Locals::<T>::new(space)?;
    let (slot, pm, qm) = joint_modes(space, h.c)?;
    let (pd, qd) = (pm.transpose(), qm.transpose());
    let one_c2 = T::one() + h.c * h.c;
    let s = T::one() / one_c2.sqrt();

    let free = (&pd * &pm) * h.omega_tilde_c1 + (&qd * &qm) * h.omega_tilde_c2;
    let dce = (&qm * &qm + &qd * &qd) * (h.big_g * T::lit(0.5)) + (&qd * &qm) * h.big_g;
    let af = ((&pd + &pm) * h.c + &qd + &qm) * (lambda * s);
    let ff = (&pd * &qm + &qd * &pm) * (h.delta * h.c / one_c2);

    let mut out = embed(space, &[(slot, &(free + ff))]);
    out += embed(space, &[(l.mech, &l.n_b)]);
    out += embed(space, &[(0, &l.pe)]) * omega_a;
    out += embed(space, &[(l.mech, &l.x_b), (slot, &dce)]);
    out += embed(space, &[(0, &l.sx), (slot, &af)]);
    OperatorMatrix::from_real(space.clone(), &out)
}
