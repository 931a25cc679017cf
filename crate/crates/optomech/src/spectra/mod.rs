//! Diagonalization, level tracking and avoided-crossing analysis.

mod crossing;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fockspace::{HilbertSpace, OperatorMatrix};
use crate::models::{ModelKind, ModelParams, System};
use crate::scalar::Real;

pub use crossing::{find_min_splitting, gap_scan, sweep, CrossingReport, SpectrumSweep, PRESCAN_POINTS};

const MAX_SWEEPS: usize = 10_000;

/// Eigen-decomposition of a Hermitian operator with ascending eigenvalues.
#[derive(Debug, Clone)]
pub struct EigenSolution<T: Real> {
    pub values: DVector<T>,
    /// Eigenvectors stored as columns, in the same order as `values`.
    pub vectors: DMatrix<Complex<T>>,
    pub space: HilbertSpace,
}

/// One bare basis state and its amplitude in an eigenvector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub label: String,
    pub re: f64,
    pub im: f64,
}

impl Component {
    pub fn weight(&self) -> f64 {
        self.re * self.re + self.im * self.im
    }
}

impl<T: Real> EigenSolution<T> {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Eigenvectors as a real matrix, when every imaginary part vanishes.
    pub fn real_vectors(&self) -> Option<DMatrix<T>> {
        if self.vectors.iter().all(|z| z.im == T::zero()) {
            Some(self.vectors.map(|z| z.re))
        } else {
            None
        }
    }

    /// Largest entry of `|H v - E v|` over all columns.
    pub fn residual(&self, h: &OperatorMatrix<T>) -> T {
        let hv = h.entries() * &self.vectors;
        let mut worst = T::zero();
        for (j, e) in self.values.iter().enumerate() {
            for i in 0..self.dim() {
                let d = hv[(i, j)] - self.vectors[(i, j)] * Complex::new(*e, T::zero());
                worst = worst.max(d.norm_sqr().sqrt());
            }
        }
        worst
    }

    /// Largest entry of `|V^dagger V - I|`.
    pub fn orthonormality_defect(&self) -> T {
        let g = self.vectors.adjoint() * &self.vectors;
        let mut worst = T::zero();
        for ((i, j), z) in g.iter().enumerate().map(|(k, z)| ((k % self.dim(), k / self.dim()), z)) {
            let target = if i == j { T::one() } else { T::zero() };
            worst = worst.max((*z - Complex::new(target, T::zero())).norm_sqr().sqrt());
        }
        worst
    }

    fn check_level(&self, level: usize) -> Result<()> {
        if level >= self.dim() {
            return Err(Error::IndexOutOfRange { what: "level", index: level, len: self.dim() });
        }
        Ok(())
    }
}

/// Sorts eigenpairs ascending and fixes each vector's phase so that its
/// largest component is real and positive.
fn ordered<T: Real>(values: DVector<T>, vectors: DMatrix<Complex<T>>, space: HilbertSpace) -> EigenSolution<T> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap_or(std::cmp::Ordering::Equal));
    let values = DVector::from_iterator(n, order.iter().map(|&k| values[k]));
    let mut out = DMatrix::zeros(n, n);
    for (j, &k) in order.iter().enumerate() {
        let col = vectors.column(k);
        let mut pivot = 0;
        for i in 1..n {
            if col[i].norm_sqr() > col[pivot].norm_sqr() {
                pivot = i;
            }
        }
        let p = col[pivot];
        let phase = p.conj() / p.norm_sqr().sqrt();
        for i in 0..n {
            out[(i, j)] = col[i] * phase;
        }
    }
    EigenSolution { values, vectors: out, space }
}

fn real_eigen<T: Real>(m: DMatrix<T>) -> Result<(DVector<T>, DMatrix<T>)> {
    let e = SymmetricEigen::try_new(m, T::machine_eps(), MAX_SWEEPS).ok_or(Error::NoConvergence)?;
    Ok((e.eigenvalues, e.eigenvectors))
}

/// Diagonalizes a Hermitian operator.
///
/// Real operators are handled by the real symmetric solver; complex ones by the
/// complex Hermitian solver.
pub fn eigensolve<T: Real>(h: &OperatorMatrix<T>) -> Result<EigenSolution<T>> {
    let scale = h.entries().iter().fold(T::one(), |m, z| m.max(z.norm_sqr().sqrt()));
    let residual = h.hermiticity_residual();
    if residual > T::lit(1e-10) * scale {
        return Err(Error::NotHermitian { residual: residual.as_f64() });
    }
    if !h.is_finite() {
        return Err(Error::NoConvergence);
    }
    if h.is_real() {
        let (values, vectors) = real_eigen(h.real_part())?;
        let vectors = vectors.map(|x| Complex::new(x, T::zero()));
        return Ok(ordered(values, vectors, h.space().clone()));
    }
    let e = SymmetricEigen::try_new(h.entries().clone(), T::machine_eps(), MAX_SWEEPS).ok_or(Error::NoConvergence)?;
    Ok(ordered(e.eigenvalues, e.eigenvectors, h.space().clone()))
}

/// Real eigen-decomposition of a real symmetric matrix, ascending, with the
/// same phase convention as [`eigensolve`].
pub(crate) fn eigensolve_real<T: Real>(m: DMatrix<T>) -> Result<(DVector<T>, DMatrix<T>)> {
    let (values, vectors) = real_eigen(m)?;
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap_or(std::cmp::Ordering::Equal));
    let vals = DVector::from_iterator(n, order.iter().map(|&k| values[k]));
    let mut vecs = DMatrix::zeros(n, n);
    for (j, &k) in order.iter().enumerate() {
        let col = vectors.column(k);
        let pivot = col.iamax();
        let s = if col[pivot] < T::zero() { -T::one() } else { T::one() };
        vecs.set_column(j, &(col * s));
    }
    Ok((vals, vecs))
}

/// Sorted eigenvalues only.
pub(crate) fn eigenvalues_real<T: Real>(m: DMatrix<T>) -> Vec<T> {
    let mut v: Vec<T> = m.symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(|a, b| a.as_f64().total_cmp(&b.as_f64()));
    v
}

/// Bare-basis components of eigenstate `level`, largest first.
///
/// With `top_k = None` the list continues until it carries all but `1e-9` of
/// the norm.
pub fn state_composition<T: Real>(sol: &EigenSolution<T>, level: usize, top_k: Option<usize>) -> Result<Vec<Component>> {
    sol.check_level(level)?;
    let col = sol.vectors.column(level);
    let mut idx: Vec<usize> = (0..sol.dim()).collect();
    idx.sort_by(|&a, &b| col[b].norm_sqr().as_f64().total_cmp(&col[a].norm_sqr().as_f64()));
    let mut out = Vec::new();
    let mut carried = 0.0;
    for i in idx {
        if let Some(k) = top_k {
            if out.len() >= k {
                break;
            }
        } else if carried >= 1.0 - 1e-9 {
            break;
        }
        let z = col[i];
        let c = Component { label: sol.space.label(i)?, re: z.re.as_f64(), im: z.im.as_f64() };
        carried += c.weight();
        out.push(c);
    }
    Ok(out)
}

fn wrong_label(kind: ModelKind) -> Error {
    Error::WrongModel { expected: kind.name(), found: "an occupation label of another shape" }
}

/// Energy of a bare product state in the frame where the radiation-pressure
/// coupling has been removed, without the atom–cavity coupling.
///
/// `occupations` follows the basis order: atoms first (0 = ground, 1 = excited),
/// then the phonon number, then the photon numbers.
pub fn unperturbed_energy<T: Real>(p: &ModelParams<T>, occupations: &[usize]) -> Result<T> {
    let kind = p.kind();
    let q = kind.qubit_count();
    if occupations.len() != q + 1 + kind.cavity_count() || occupations[..q].iter().any(|&s| s > 1) {
        return Err(wrong_label(kind));
    }
    let f = |n: usize| T::from_count(n);
    let k = f(occupations[q]);
    let e = match p.system {
        System::SingleAtomSingleMode { omega_c, omega_a, g, .. } => {
            let n = f(occupations[2]);
            omega_c * n + k + omega_a * f(occupations[0]) - g * g * n * n
        }
        System::TwoAtomsSingleMode { omega_c, omega_a1, omega_a2, g, .. } => {
            let n = f(occupations[3]);
            omega_c * n + k + omega_a1 * f(occupations[0]) + omega_a2 * f(occupations[1]) - g * g * n * n
        }
        System::SingleAtomTwoModes { omega_c1, omega_c2, omega_a, g, .. } => {
            let (n1, n2) = (f(occupations[2]), f(occupations[3]));
            let c2 = omega_c2 / omega_c1;
            let one = T::one();
            let shift = n1 * n1
                + T::lit(2.0) * c2 * n1 * n2
                + c2 * c2 * n2 * n2
                + c2 * n1 * (n2 + one)
                + c2 * n2 * (n1 + one);
            omega_c1 * n1 + omega_c2 * n2 + k + omega_a * f(occupations[0]) - g * g * shift
        }
    };
    Ok(e)
}
