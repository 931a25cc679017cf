use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::fockspace::OperatorMatrix;
use crate::scalar::Real;
use crate::spectra::EigenSolution;

/// Keeps the part of `x` that lowers the energy: entries `(m, n)` with
/// `E_n > E_m`.
pub(crate) fn lowering_part<T: Real, S: nalgebra::Scalar + num_traits::Zero>(x: &DMatrix<S>, energies: &DVector<T>) -> DMatrix<S> {
    let n = x.nrows();
    let scale = energies.iter().fold(T::one(), |m, e| m.max(e.abs()));
    let tol = T::lit(1e-12) * scale;
    DMatrix::from_fn(n, n, |m, k| if energies[k] - energies[m] > tol { x[(m, k)].clone() } else { S::zero() })
}

/// Dressed lowering operator `sum_{E_n > E_m} <psi_m|o + o^dagger|psi_n> |psi_m><psi_n|`,
/// returned in the bare basis.
pub fn dressed_lowering<T: Real>(sol: &EigenSolution<T>, bare: &OperatorMatrix<T>) -> Result<OperatorMatrix<T>> {
    if *bare.space() != sol.space {
        return Err(Error::SpaceMismatch);
    }
    let quad = bare.entries() + bare.entries().adjoint();
    let x = sol.vectors.adjoint() * quad * &sol.vectors;
    let low = lowering_part(&x, &sol.values);
    OperatorMatrix::new(sol.space.clone(), &sol.vectors * low * sol.vectors.adjoint())
}

/// Lowest `m` eigenpairs of a real Hamiltonian and the dressed operators
/// expressed in that truncated eigenbasis.
#[derive(Debug, Clone)]
pub(crate) struct DressedBasis<T: Real> {
    /// Energies relative to the ground state.
    pub energies: DVector<T>,
    /// `dim x m`, columns are eigenvectors.
    pub vectors: DMatrix<T>,
}

impl<T: Real> DressedBasis<T> {
    pub fn new(h: DMatrix<T>, m: usize) -> Result<Self> {
        let (values, vectors) = crate::spectra::eigensolve_real(h)?;
        let m = m.min(values.len());
        let e0 = values[0];
        Ok(Self {
            energies: values.rows(0, m).map(|e| e - e0),
            vectors: vectors.columns(0, m).into_owned(),
        })
    }

    pub fn levels(&self) -> usize {
        self.energies.len()
    }

    /// `V^T o V` for a real bare operator.
    pub fn matrix_elements(&self, o: &DMatrix<T>) -> DMatrix<T> {
        self.vectors.transpose() * o * &self.vectors
    }

    /// Dressed lowering operator of the bare operator `o`.
    pub fn lowering(&self, o: &DMatrix<T>) -> DMatrix<T> {
        let quad = o + o.transpose();
        lowering_part(&self.matrix_elements(&quad), &self.energies)
    }
}
