use nalgebra::DMatrix;

use super::{ModelKind, ModelParams, System, MECH_MODE};
use crate::error::{Error, Result};
use crate::fockspace::{embed, ladder, sigma_minus, HilbertSpace, OperatorMatrix};
use crate::scalar::Real;

enum Terms<T: Real> {
    Single {
        n_cav: DMatrix<T>,
        n_mech: DMatrix<T>,
        p_atom: DMatrix<T>,
        x_int: DMatrix<T>,
        v_opt: DMatrix<T>,
    },
    TwoModes {
        n1: DMatrix<T>,
        n2: DMatrix<T>,
        n_mech: DMatrix<T>,
        p_atom: DMatrix<T>,
        x_int: DMatrix<T>,
        t1: DMatrix<T>,
        t2: DMatrix<T>,
        t12: DMatrix<T>,
    },
    TwoAtoms {
        n_cav: DMatrix<T>,
        n_mech: DMatrix<T>,
        p1: DMatrix<T>,
        p2: DMatrix<T>,
        x1: DMatrix<T>,
        x2: DMatrix<T>,
        v_opt: DMatrix<T>,
    },
}

/// Bare lowering operators of every subsystem, embedded in the full space.
#[derive(Debug, Clone)]
pub struct LoweringOperators<T: Real> {
    pub photon: Vec<DMatrix<T>>,
    pub phonon: DMatrix<T>,
    pub atom: Vec<DMatrix<T>>,
}

/// Parameter-independent operator pieces of a model Hamiltonian on a fixed
/// space. Building them once lets sweeps re-assemble `H` with a handful of
/// scaled additions per grid point.
pub struct HamiltonianTerms<T: Real> {
    kind: ModelKind,
    space: HilbertSpace,
    terms: Terms<T>,
}

pub(crate) struct Locals<T: Real> {
    pub mech: usize,
    pub b: DMatrix<T>,
    pub x_b: DMatrix<T>,
    pub n_b: DMatrix<T>,
    pub sm: DMatrix<T>,
    pub sx: DMatrix<T>,
    pub pe: DMatrix<T>,
}

impl<T: Real> Locals<T> {
    pub fn new(space: &HilbertSpace) -> Result<Self> {
        let mech = space.mode_slot(MECH_MODE)?;
        let b = ladder::<T>(space.mode(MECH_MODE)?.cutoff);
        let sm = sigma_minus::<T>();
        Ok(Self {
            mech,
            x_b: &b + b.transpose(),
            n_b: b.transpose() * &b,
            sx: &sm + sm.transpose(),
            pe: sm.transpose() * &sm,
            b,
            sm,
        })
    }
}

pub(crate) struct Cavity<T: Real> {
    pub slot: usize,
    pub a: DMatrix<T>,
    pub ad: DMatrix<T>,
    pub n: DMatrix<T>,
}

impl<T: Real> Cavity<T> {
    pub fn new(space: &HilbertSpace, index: usize) -> Result<Self> {
        let mode = MECH_MODE + 1 + index;
        let a = ladder::<T>(space.mode(mode)?.cutoff);
        Ok(Self { slot: space.mode_slot(mode)?, ad: a.transpose(), n: a.transpose() * &a, a })
    }

    pub fn quadrature(&self) -> DMatrix<T> {
        &self.a + &self.ad
    }

    /// `a^2 + a^dagger^2`.
    pub fn pair(&self) -> DMatrix<T> {
        &self.a * &self.a + &self.ad * &self.ad
    }
}

impl<T: Real> HamiltonianTerms<T> {
    pub fn new(kind: ModelKind, space: &HilbertSpace) -> Result<Self> {
        kind.check_space(space)?;
        let l = Locals::<T>::new(space)?;
        let half = T::lit(0.5);
        let n_mech = embed(space, &[(l.mech, &l.n_b)]);
        let terms = match kind {
            ModelKind::SingleAtomSingleMode => {
                let c = Cavity::<T>::new(space, 0)?;
                let opt = &c.n + c.pair() * half;
                Terms::Single {
                    n_cav: embed(space, &[(c.slot, &c.n)]),
                    p_atom: embed(space, &[(0, &l.pe)]),
                    x_int: embed(space, &[(0, &l.sx), (c.slot, &c.quadrature())]),
                    v_opt: embed(space, &[(l.mech, &l.x_b), (c.slot, &opt)]),
                    n_mech,
                }
            }
            ModelKind::SingleAtomTwoModes => {
                let c1 = Cavity::<T>::new(space, 0)?;
                let c2 = Cavity::<T>::new(space, 1)?;
                let two = T::lit(2.0);
                let s1 = c1.pair() + &c1.n * two;
                let s2 = c2.pair() + &c2.n * two;
                let cross = c1.a.kronecker(&c2.a)
                    + c1.ad.kronecker(&c2.ad)
                    + c1.ad.kronecker(&c2.a)
                    + c1.a.kronecker(&c2.ad);
                Terms::TwoModes {
                    n1: embed(space, &[(c1.slot, &c1.n)]),
                    n2: embed(space, &[(c2.slot, &c2.n)]),
                    p_atom: embed(space, &[(0, &l.pe)]),
                    x_int: embed(space, &[(0, &l.sx), (c1.slot, &c1.quadrature())]),
                    t1: embed(space, &[(l.mech, &l.x_b), (c1.slot, &s1)]),
                    t2: embed(space, &[(l.mech, &l.x_b), (c2.slot, &s2)]),
                    t12: embed(space, &[(l.mech, &l.x_b), (c1.slot, &cross)]),
                    n_mech,
                }
            }
            ModelKind::TwoAtomsSingleMode => {
                let c = Cavity::<T>::new(space, 0)?;
                let opt = &c.n + c.pair() * half;
                let q = c.quadrature();
                Terms::TwoAtoms {
                    n_cav: embed(space, &[(c.slot, &c.n)]),
                    p1: embed(space, &[(0, &l.pe)]),
                    p2: embed(space, &[(1, &l.pe)]),
                    x1: embed(space, &[(0, &l.sx), (c.slot, &q)]),
                    x2: embed(space, &[(1, &l.sx), (c.slot, &q)]),
                    v_opt: embed(space, &[(l.mech, &l.x_b), (c.slot, &opt)]),
                    n_mech,
                }
            }
        };
        Ok(Self { kind, space: space.clone(), terms })
    }

    pub fn for_params(p: &ModelParams<T>) -> Result<Self> {
        Self::new(p.kind(), &p.space()?)
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    /// Real symmetric Hamiltonian matrix for the given parameters.
    pub fn assemble(&self, system: &System<T>) -> Result<DMatrix<T>> {
        if system.kind() != self.kind {
            return Err(Error::WrongModel { expected: self.kind.name(), found: system.kind().name() });
        }
        let h = match (&self.terms, *system) {
            (
                Terms::Single { n_cav, n_mech, p_atom, x_int, v_opt },
                System::SingleAtomSingleMode { omega_c, omega_a, g, lambda },
            ) => {
                let mut h = n_mech.clone();
                axpy(&mut h, omega_c, n_cav);
                axpy(&mut h, omega_a, p_atom);
                axpy(&mut h, lambda, x_int);
                axpy(&mut h, g, v_opt);
                h
            }
            (
                Terms::TwoModes { n1, n2, n_mech, p_atom, x_int, t1, t2, t12 },
                System::SingleAtomTwoModes { omega_c1, omega_c2, omega_a, g, lambda },
            ) => {
                let r = omega_c2 / omega_c1;
                let half_g = g * T::lit(0.5);
                let mut h = n_mech.clone();
                axpy(&mut h, omega_c1, n1);
                axpy(&mut h, omega_c2, n2);
                axpy(&mut h, omega_a, p_atom);
                axpy(&mut h, lambda, x_int);
                axpy(&mut h, half_g, t1);
                axpy(&mut h, half_g * r, t2);
                axpy(&mut h, -(g * r.sqrt()), t12);
                h
            }
            (
                Terms::TwoAtoms { n_cav, n_mech, p1, p2, x1, x2, v_opt },
                System::TwoAtomsSingleMode { omega_c, omega_a1, omega_a2, g, lambda1, lambda2 },
            ) => {
                let mut h = n_mech.clone();
                axpy(&mut h, omega_c, n_cav);
                axpy(&mut h, omega_a1, p1);
                axpy(&mut h, omega_a2, p2);
                axpy(&mut h, lambda1, x1);
                axpy(&mut h, lambda2, x2);
                axpy(&mut h, g, v_opt);
                h
            }
            _ => unreachable!("kind checked above"),
        };
        Ok(h)
    }

    /// Mirror quadrature `b + b^dagger` through which the external force acts.
    pub fn drive_quadrature(&self) -> DMatrix<T> {
        let l = Locals::<T>::new(&self.space).expect("space validated at construction");
        embed(&self.space, &[(l.mech, &l.x_b)])
    }

    pub fn lowering_operators(&self) -> LoweringOperators<T> {
        let space = &self.space;
        let l = Locals::<T>::new(space).expect("space validated at construction");
        let photon = (0..self.kind.cavity_count())
            .map(|i| {
                let c = Cavity::<T>::new(space, i).expect("space validated at construction");
                embed(space, &[(c.slot, &c.a)])
            })
            .collect();
        let atom = (0..self.kind.qubit_count()).map(|q| embed(space, &[(q, &l.sm)])).collect();
        LoweringOperators { photon, phonon: embed(space, &[(l.mech, &l.b)]), atom }
    }
}

fn axpy<T: Real>(h: &mut DMatrix<T>, c: T, m: &DMatrix<T>) {
    h.zip_apply(m, |x, y| *x += c * y);
}

/// Bare model Hamiltonian on `space` (which may use other cutoffs than `p`).
pub fn bare_hamiltonian<T: Real>(p: &ModelParams<T>, space: &HilbertSpace) -> Result<OperatorMatrix<T>> {
    p.system.validate()?;
    let terms = HamiltonianTerms::new(p.kind(), space)?;
    OperatorMatrix::from_real(space.clone(), &terms.assemble(&p.system)?)
}
