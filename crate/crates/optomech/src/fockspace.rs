//! Truncated tensor-product Hilbert spaces and the elementary operators used to
//! assemble every Hamiltonian.
//!
//! Subsystem order is fixed: qubits first (in index order), then bosonic modes
//! in the order they were supplied. A basis index is the mixed-radix number
//! whose most significant digit is the first qubit, so `kron(A, B)` places `A`
//! on the earlier subsystem.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Default upper bound on the total Hilbert-space dimension.
pub const DEFAULT_DIM_CEILING: usize = 20_000;

/// One truncated bosonic ladder `|0>, ..., |cutoff>`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModeLadder {
    pub label: String,
    pub cutoff: usize,
}

impl ModeLadder {
    pub fn new(label: impl Into<String>, cutoff: usize) -> Self {
        Self { label: label.into(), cutoff }
    }

    pub fn dim(&self) -> usize {
        self.cutoff + 1
    }
}

#[derive(Debug, PartialEq, Eq, Hash)]
struct SpaceInner {
    modes: Vec<ModeLadder>,
    qubit_count: usize,
    dim: usize,
}

/// Tensor product of `qubit_count` two-level systems and a list of bosonic
/// ladders. Cheap to clone; clones share the same description.
#[derive(Clone)]
pub struct HilbertSpace {
    inner: Arc<SpaceInner>,
}

impl PartialEq for HilbertSpace {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner) || self.inner == other.inner
    }
}

impl Eq for HilbertSpace {}

impl fmt::Debug for HilbertSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HilbertSpace")
            .field("qubits", &self.inner.qubit_count)
            .field("modes", &self.inner.modes)
            .field("dim", &self.inner.dim)
            .finish()
    }
}

/// Builds a space with the default dimension ceiling.
pub fn build_space(modes: Vec<ModeLadder>, qubit_count: usize) -> Result<HilbertSpace> {
    HilbertSpace::new(modes, qubit_count)
}

impl HilbertSpace {
    pub fn new(modes: Vec<ModeLadder>, qubit_count: usize) -> Result<Self> {
        Self::with_ceiling(modes, qubit_count, DEFAULT_DIM_CEILING)
    }

    pub fn with_ceiling(modes: Vec<ModeLadder>, qubit_count: usize, ceiling: usize) -> Result<Self> {
        if let Some(bad) = modes.iter().find(|m| m.cutoff < 1) {
            return Err(Error::InvalidCutoff { label: bad.label.clone(), cutoff: bad.cutoff });
        }
        let overflow = Error::DimensionOverflow { dim: usize::MAX, ceiling };
        let mut dim = u32::try_from(qubit_count)
            .ok()
            .and_then(|q| 1usize.checked_shl(q))
            .ok_or_else(|| overflow.clone())?;
        for m in &modes {
            dim = dim.checked_mul(m.dim()).ok_or_else(|| overflow.clone())?;
        }
        if dim > ceiling {
            return Err(Error::DimensionOverflow { dim, ceiling });
        }
        Ok(Self { inner: Arc::new(SpaceInner { modes, qubit_count, dim }) })
    }

    pub fn dim(&self) -> usize {
        self.inner.dim
    }

    pub fn qubit_count(&self) -> usize {
        self.inner.qubit_count
    }

    pub fn modes(&self) -> &[ModeLadder] {
        &self.inner.modes
    }

    pub fn mode(&self, index: usize) -> Result<&ModeLadder> {
        self.inner.modes.get(index).ok_or(Error::IndexOutOfRange {
            what: "mode",
            index,
            len: self.inner.modes.len(),
        })
    }

    /// Position of the first mode carrying `label`.
    pub fn mode_position(&self, label: &str) -> Option<usize> {
        self.inner.modes.iter().position(|m| m.label == label)
    }

    /// Dimension of every subsystem in basis order (qubits, then modes).
    pub fn slot_dims(&self) -> Vec<usize> {
        std::iter::repeat(2)
            .take(self.qubit_count())
            .chain(self.modes().iter().map(ModeLadder::dim))
            .collect()
    }

    pub(crate) fn mode_slot(&self, mode_index: usize) -> Result<usize> {
        self.mode(mode_index)?;
        Ok(self.qubit_count() + mode_index)
    }

    pub(crate) fn qubit_slot(&self, qubit_index: usize) -> Result<usize> {
        if qubit_index >= self.qubit_count() {
            return Err(Error::IndexOutOfRange {
                what: "qubit",
                index: qubit_index,
                len: self.qubit_count(),
            });
        }
        Ok(qubit_index)
    }

    /// Per-subsystem occupation digits of a basis index.
    pub fn occupations(&self, index: usize) -> Result<Vec<usize>> {
        if index >= self.dim() {
            return Err(Error::IndexOutOfRange { what: "basis", index, len: self.dim() });
        }
        let dims = self.slot_dims();
        let mut digits = vec![0; dims.len()];
        let mut rest = index;
        for (d, slot) in digits.iter_mut().zip(&dims).rev() {
            *d = rest % slot;
            rest /= slot;
        }
        Ok(digits)
    }

    /// Basis index of the given per-subsystem occupations.
    pub fn index_of(&self, occupations: &[usize]) -> Result<usize> {
        let dims = self.slot_dims();
        if occupations.len() != dims.len() {
            return Err(Error::InvalidState(format!(
                "label has {} entries, space has {} subsystems",
                occupations.len(),
                dims.len()
            )));
        }
        let mut index = 0;
        for (&o, &d) in occupations.iter().zip(&dims) {
            if o >= d {
                return Err(Error::IndexOutOfRange { what: "occupation", index: o, len: d });
            }
            index = index * d + o;
        }
        Ok(index)
    }

    /// Human-readable label such as `|g,1,0>`.
    pub fn label(&self, index: usize) -> Result<String> {
        let digits = self.occupations(index)?;
        let q = self.qubit_count();
        let parts: Vec<String> = digits
            .iter()
            .enumerate()
            .map(|(i, d)| match (i < q, d) {
                (true, 0) => "g".to_string(),
                (true, _) => "e".to_string(),
                (false, n) => n.to_string(),
            })
            .collect();
        Ok(format!("|{}>", parts.join(",")))
    }
}

/// Bosonic annihilation operator on a single ladder.
pub fn ladder<T: Real>(cutoff: usize) -> DMatrix<T> {
    let n = cutoff + 1;
    let mut a = DMatrix::zeros(n, n);
    for k in 1..n {
        a[(k - 1, k)] = T::from_count(k).sqrt();
    }
    a
}

/// Two-level lowering operator with `|g> = 0`, `|e> = 1`.
pub fn sigma_minus<T: Real>() -> DMatrix<T> {
    let mut s = DMatrix::zeros(2, 2);
    s[(0, 1)] = T::one();
    s
}

/// Tensor product of local factors placed on the given starting subsystems;
/// every other subsystem carries the identity. A factor may span several
/// consecutive subsystems, in which case its size must equal the product of
/// their dimensions.
pub(crate) fn embed<T: Real>(space: &HilbertSpace, factors: &[(usize, &DMatrix<T>)]) -> DMatrix<T> {
    let dims = space.slot_dims();
    let mut out = DMatrix::<T>::identity(1, 1);
    let mut pending_identity = 1usize;
    let mut slot = 0;
    while slot < dims.len() {
        match factors.iter().find(|(s, _)| *s == slot) {
            Some((_, m)) => {
                if pending_identity > 1 {
                    out = out.kronecker(&DMatrix::identity(pending_identity, pending_identity));
                    pending_identity = 1;
                }
                out = out.kronecker(*m);
                let mut covered = 1;
                while covered < m.nrows() {
                    covered *= dims[slot];
                    slot += 1;
                }
                assert_eq!(covered, m.nrows(), "factor does not align with subsystem boundaries");
            }
            None => {
                pending_identity *= dims[slot];
                slot += 1;
            }
        }
    }
    if pending_identity > 1 {
        out = out.kronecker(&DMatrix::identity(pending_identity, pending_identity));
    }
    out
}

/// Dense operator on a fixed Hilbert space.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix<T: Real> {
    space: HilbertSpace,
    entries: DMatrix<Complex<T>>,
}

impl<T: Real> OperatorMatrix<T> {
    pub fn new(space: HilbertSpace, entries: DMatrix<Complex<T>>) -> Result<Self> {
        if entries.nrows() != space.dim() || entries.ncols() != space.dim() {
            return Err(Error::SpaceMismatch);
        }
        Ok(Self { space, entries })
    }

    pub fn from_real(space: HilbertSpace, entries: &DMatrix<T>) -> Result<Self> {
        Self::new(space, entries.map(|x| Complex::new(x, T::zero())))
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn entries(&self) -> &DMatrix<Complex<T>> {
        &self.entries
    }

    pub fn into_entries(self) -> DMatrix<Complex<T>> {
        self.entries
    }

    pub fn adjoint(&self) -> Self {
        Self { space: self.space.clone(), entries: self.entries.adjoint() }
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.space == other.space {
            Ok(())
        } else {
            Err(Error::SpaceMismatch)
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(Self { space: self.space.clone(), entries: &self.entries + &other.entries })
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(Self { space: self.space.clone(), entries: &self.entries - &other.entries })
    }

    /// Matrix product `self * other`.
    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        if self.is_real() && other.is_real() {
            let p = self.real_part() * other.real_part();
            return Self::from_real(self.space.clone(), &p);
        }
        Ok(Self { space: self.space.clone(), entries: &self.entries * &other.entries })
    }

    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.checked_mul(other)?.checked_sub(&other.checked_mul(self)?)
    }

    pub fn scale(&self, c: Complex<T>) -> Self {
        Self { space: self.space.clone(), entries: self.entries.map(|x| x * c) }
    }

    pub fn scale_real(&self, c: T) -> Self {
        Self { space: self.space.clone(), entries: self.entries.map(|x| x.scale(c)) }
    }

    /// `max |M - M^dagger|` over all entries.
    pub fn hermiticity_residual(&self) -> T {
        let n = self.dim();
        let mut worst = T::zero();
        for j in 0..n {
            for i in 0..=j {
                let d = (self.entries[(i, j)] - self.entries[(j, i)].conj()).norm_sqr().sqrt();
                if d > worst {
                    worst = d;
                }
            }
        }
        worst
    }

    pub fn is_real(&self) -> bool {
        self.entries.iter().all(|z| z.im == T::zero())
    }

    pub fn real_part(&self) -> DMatrix<T> {
        self.entries.map(|z| z.re)
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<T> {
        self.check(other)?;
        Ok(self
            .entries
            .iter()
            .zip(other.entries.iter())
            .map(|(a, b)| (*a - *b).norm_sqr().sqrt())
            .fold(T::zero(), |m, x| if x > m { x } else { m }))
    }

    pub fn apply(&self, v: &DVector<Complex<T>>) -> Result<DVector<Complex<T>>> {
        if v.len() != self.dim() {
            return Err(Error::SpaceMismatch);
        }
        Ok(&self.entries * v)
    }
}

fn embedded_real<T: Real>(space: &HilbertSpace, slot: usize, local: &DMatrix<T>) -> Result<OperatorMatrix<T>> {
    OperatorMatrix::from_real(space.clone(), &embed(space, &[(slot, local)]))
}

/// Annihilation operator of bosonic mode `mode_index`, identity elsewhere.
pub fn annihilator<T: Real>(space: &HilbertSpace, mode_index: usize) -> Result<OperatorMatrix<T>> {
    let slot = space.mode_slot(mode_index)?;
    embedded_real(space, slot, &ladder(space.mode(mode_index)?.cutoff))
}

/// Lowering operator of qubit `qubit_index`: `sigma_-|e> = |g>`.
pub fn qubit_lowering<T: Real>(space: &HilbertSpace, qubit_index: usize) -> Result<OperatorMatrix<T>> {
    let slot = space.qubit_slot(qubit_index)?;
    embedded_real(space, slot, &sigma_minus())
}

pub fn number_operator<T: Real>(space: &HilbertSpace, mode_index: usize) -> Result<OperatorMatrix<T>> {
    let slot = space.mode_slot(mode_index)?;
    let cutoff = space.mode(mode_index)?.cutoff;
    let n = DMatrix::from_diagonal(&DVector::from_fn(cutoff + 1, |k, _| T::from_count(k)));
    embedded_real(space, slot, &n)
}

pub fn identity<T: Real>(space: &HilbertSpace) -> OperatorMatrix<T> {
    let d = space.dim();
    OperatorMatrix { space: space.clone(), entries: DMatrix::identity(d, d) }
}

pub fn adjoint<T: Real>(op: &OperatorMatrix<T>) -> OperatorMatrix<T> {
    op.adjoint()
}

/// A pure state vector or a density matrix in the bare basis.
#[derive(Debug, Clone, PartialEq)]
pub enum State<T: Real> {
    Pure(DVector<Complex<T>>),
    Mixed(DMatrix<Complex<T>>),
}

const STATE_TOL: f64 = 1e-8;

/// `<psi|op|psi>` or `tr(op rho)`.
pub fn expectation<T: Real>(op: &OperatorMatrix<T>, state: &State<T>) -> Result<Complex<T>> {
    let tol = T::lit(STATE_TOL);
    match state {
        State::Pure(psi) => {
            if psi.len() != op.dim() {
                return Err(Error::SpaceMismatch);
            }
            let norm = psi.norm();
            if (norm - T::one()).abs() > tol {
                return Err(Error::InvalidState(format!("state norm {}", norm.as_f64())));
            }
            Ok(psi.dotc(&(op.entries() * psi)))
        }
        State::Mixed(rho) => {
            if rho.nrows() != op.dim() || rho.ncols() != op.dim() {
                return Err(Error::SpaceMismatch);
            }
            let trace = rho.trace();
            if (trace.re - T::one()).abs() > tol || trace.im.abs() > tol {
                return Err(Error::InvalidState(format!("density trace {}", trace.re.as_f64())));
            }
            let herm = (rho - rho.adjoint()).iter().fold(T::zero(), |m, z| {
                let n = z.norm_sqr().sqrt();
                if n > m {
                    n
                } else {
                    m
                }
            });
            if herm > tol {
                return Err(Error::InvalidState(format!("density not Hermitian ({})", herm.as_f64())));
            }
            let mut acc = Complex::new(T::zero(), T::zero());
            for i in 0..rho.nrows() {
                for j in 0..rho.ncols() {
                    acc += op.entries()[(i, j)] * rho[(j, i)];
                }
            }
            Ok(acc)
        }
    }
}

/// Pure bare basis state with the given per-subsystem occupations.
pub fn basis_state<T: Real>(space: &HilbertSpace, occupations: &[usize]) -> Result<DVector<Complex<T>>> {
    let mut v = DVector::zeros(space.dim());
    v[space.index_of(occupations)?] = Complex::new(T::one(), T::zero());
    Ok(v)
}
