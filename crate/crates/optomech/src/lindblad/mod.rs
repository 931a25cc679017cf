//! Dressed-basis Lindblad master equation.
//!
//! The density matrix is propagated in the basis of the lowest `levels`
//! eigenstates of the Hamiltonian, where the dissipators use dressed jump
//! operators that only lower the energy. The free evolution is removed with an
//! integrating factor, so the integrator only resolves the drive and the
//! dissipation. When a [`Schedule`] changes a parameter the basis is rebuilt
//! and the state projected onto it.

mod dressed;
mod fourier;
pub mod ode;
mod protocols;

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::models::{drive_amplitude, DriveSpec, HamiltonianTerms, LossRates, ModelKind, ModelParams, Param};
use crate::scalar::Real;

pub(crate) use dressed::DressedBasis;
pub use dressed::dressed_lowering;
pub use fourier::{spectrum_of, spectrum_of_series, Peak, Preprocess, SpectrumOptions, SpectrumPeaks, MIN_SAMPLES};
pub use ode::OdeStats;
pub use protocols::{
    frequency_conversion_protocol, joint_excitation_check, steady_state_time, ConversionOutcome, ConversionProtocol,
    JointExcitationReport,
};

/// Piecewise-constant value of one model parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule<T> {
    pub param: Param,
    pub segments: Vec<ScheduleSegment<T>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduleSegment<T> {
    pub t_start: T,
    pub value: T,
}

impl<T: Real> Schedule<T> {
    pub fn new(param: Param, segments: Vec<(T, T)>) -> Result<Self> {
        let s = Self {
            param,
            segments: segments.into_iter().map(|(t_start, value)| ScheduleSegment { t_start, value }).collect(),
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let first = self.segments.first().ok_or_else(|| Error::InvalidParameter("empty schedule".into()))?;
        if first.t_start != T::zero() {
            return Err(Error::InvalidParameter("schedule must start at t = 0".into()));
        }
        if self.segments.windows(2).any(|w| !(w[0].t_start < w[1].t_start)) {
            return Err(Error::InvalidParameter("schedule start times must increase strictly".into()));
        }
        Ok(())
    }

    /// Index of the segment in force at time `t`.
    pub fn segment_at(&self, t: T) -> usize {
        self.segments.partition_point(|s| s.t_start <= t).saturating_sub(1)
    }
}

/// Initial condition of a trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialState<T: Real> {
    /// Ground state of the initial Hamiltonian.
    Ground,
    /// Eigenstate `level` of the initial Hamiltonian.
    Eigenstate { level: usize },
    /// A bare product state given by its occupation label.
    Bare { occupations: Vec<usize> },
    /// Real superposition of bare product states; it is normalized on use.
    Superposition { components: Vec<(Vec<usize>, T)> },
    /// Density matrix in the bare basis.
    #[serde(skip)]
    Density(DMatrix<Complex<T>>),
}

/// Integration and truncation settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvolveOptions<T> {
    /// Number of retained eigenstates.
    pub levels: usize,
    pub rtol: T,
    pub atol: T,
    pub max_steps: usize,
    /// Number of samples at which the positivity of the state is checked.
    pub positivity_checks: usize,
}

impl<T: Real> Default for EvolveOptions<T> {
    fn default() -> Self {
        Self { levels: 40, rtol: T::lit(1e-8), atol: T::lit(1e-10), max_steps: 50_000_000, positivity_checks: 10 }
    }
}

/// Sampled observables of one trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    pub observables: BTreeMap<String, Vec<f64>>,
    /// `tr(rho) - 1` at every sample.
    pub trace_deviation: Vec<f64>,
    /// Largest `|rho - rho^dagger|` entry over all samples.
    pub hermiticity_residual: f64,
    /// Smallest eigenvalue of the state over the positivity spot checks.
    pub min_eigenvalue: f64,
    /// SHA-256 of the final density matrix in the dressed basis.
    pub final_rho_digest: String,
    pub levels: usize,
    /// Weight of the initial state inside the retained levels.
    pub initial_weight: f64,
    pub steps_accepted: usize,
    pub steps_rejected: usize,
    pub rhs_evals: usize,
}

impl TrajectoryRecord {
    pub fn observable(&self, name: &str) -> Result<&[f64]> {
        self.observables.get(name).map(Vec::as_slice).ok_or_else(|| Error::MissingObservable(name.to_string()))
    }

    pub fn max_trace_deviation(&self) -> f64 {
        self.trace_deviation.iter().fold(0.0, |m, d| m.max(d.abs()))
    }
}

/// Names of the recorded observables for a model.
pub fn observable_names(kind: ModelKind) -> Vec<String> {
    let mut names = Vec::new();
    let nc = kind.cavity_count();
    let nq = kind.qubit_count();
    for i in 0..nc {
        names.push(if nc == 1 { "mean_photon".to_string() } else { format!("mean_photon_{}", i + 1) });
    }
    names.push("mean_phonon".to_string());
    for j in 0..nq {
        names.push(if nq == 1 { "mean_atom".to_string() } else { format!("mean_atom_{}", j + 1) });
    }
    if nq == 2 {
        names.push("two_atom_correlation".to_string());
    }
    names.push("energy".to_string());
    names
}

/// Hamiltonian data of one schedule segment in its truncated eigenbasis.
struct SegmentModel<T: Real> {
    basis: DressedBasis<T>,
    /// `sqrt(rate) O` and its transpose.
    jumps: Vec<(DMatrix<T>, DMatrix<T>)>,
    /// `(1/2) sum O^T O`.
    k_half: DMatrix<T>,
    drive: DMatrix<T>,
    observables: Vec<DMatrix<T>>,
}

impl<T: Real> SegmentModel<T> {
    fn build(terms: &HamiltonianTerms<T>, p: &ModelParams<T>, losses: &LossRates<T>, levels: usize) -> Result<Self> {
        let basis = DressedBasis::new(terms.assemble(&p.system)?, levels)?;
        let m = basis.levels();
        let bare = terms.lowering_operators();
        let photons: Vec<DMatrix<T>> = bare.photon.iter().map(|o| basis.lowering(o)).collect();
        let phonon = basis.lowering(&bare.phonon);
        let atoms: Vec<DMatrix<T>> = bare.atom.iter().map(|o| basis.lowering(o)).collect();

        let mut jumps = Vec::new();
        let channels = photons
            .iter()
            .zip(&losses.kappa)
            .chain(std::iter::once((&phonon, &losses.gamma)))
            .chain(atoms.iter().zip(&losses.eta));
        let mut k_half = DMatrix::zeros(m, m);
        for (o, &rate) in channels {
            if rate > T::zero() {
                let scaled = o * rate.sqrt();
                k_half += (scaled.transpose() * &scaled) * T::lit(0.5);
                jumps.push((scaled.clone(), scaled.transpose()));
            }
        }

        let number = |o: &DMatrix<T>| o.transpose() * o;
        let mut observables: Vec<DMatrix<T>> = photons.iter().map(number).collect();
        observables.push(number(&phonon));
        observables.extend(atoms.iter().map(number));
        if atoms.len() == 2 {
            observables.push(number(&(&atoms[1] * &atoms[0])));
        }
        observables.push(DMatrix::from_diagonal(&basis.energies));
        let drive = basis.matrix_elements(&terms.drive_quadrature());
        Ok(Self { basis, jumps, k_half, drive, observables })
    }

    fn levels(&self) -> usize {
        self.basis.levels()
    }
}

/// Phase factors `exp[-i (E_m - E_n) tau]` of the integrating factor.
struct Phases<T: Real> {
    re: DMatrix<T>,
    im: DMatrix<T>,
    c: Vec<T>,
    s: Vec<T>,
}

impl<T: Real> Phases<T> {
    fn new(m: usize) -> Self {
        Self { re: DMatrix::zeros(m, m), im: DMatrix::zeros(m, m), c: vec![T::zero(); m], s: vec![T::zero(); m] }
    }

    fn update(&mut self, energies: &DVector<T>, tau: T) {
        let m = energies.len();
        for k in 0..m {
            let (s, c) = (energies[k] * tau).sin_cos();
            self.c[k] = c;
            self.s[k] = s;
        }
        for n in 0..m {
            for k in 0..m {
                self.re[(k, n)] = self.c[k] * self.c[n] + self.s[k] * self.s[n];
                self.im[(k, n)] = self.c[k] * self.s[n] - self.s[k] * self.c[n];
            }
        }
    }

    /// Lab-frame real and imaginary parts from the rotating-frame state `y`.
    fn to_lab(&self, y: &[T], r: &mut DMatrix<T>, i: &mut DMatrix<T>) {
        let mm = r.len();
        let (re, im) = (self.re.as_slice(), self.im.as_slice());
        let (rs, is) = (r.as_mut_slice(), i.as_mut_slice());
        for k in 0..mm {
            let (a, b) = (y[k], y[mm + k]);
            rs[k] = re[k] * a - im[k] * b;
            is[k] = re[k] * b + im[k] * a;
        }
    }
}

struct Rhs<'a, T: Real> {
    seg: &'a SegmentModel<T>,
    drive: Option<&'a DriveSpec<T>>,
    t_seg: T,
    phases: Phases<T>,
    r: DMatrix<T>,
    i: DMatrix<T>,
    dr: DMatrix<T>,
    di: DMatrix<T>,
    jr: DMatrix<T>,
    ji: DMatrix<T>,
    tmp: DMatrix<T>,
}

impl<'a, T: Real> Rhs<'a, T> {
    fn new(seg: &'a SegmentModel<T>, drive: Option<&'a DriveSpec<T>>, t_seg: T) -> Self {
        let m = seg.levels();
        let z = || DMatrix::zeros(m, m);
        Self { seg, drive, t_seg, phases: Phases::new(m), r: z(), i: z(), dr: z(), di: z(), jr: z(), ji: z(), tmp: z() }
    }
}

impl<T: Real> ode::OdeSystem<T> for Rhs<'_, T> {
    fn rhs(&mut self, t: T, y: &[T], dy: &mut [T]) {
        let one = T::one();
        self.phases.update(&self.seg.basis.energies, t - self.t_seg);
        self.phases.to_lab(y, &mut self.r, &mut self.i);
        // Jump terms O rho O^T are already (anti)symmetric; the remaining
        // pieces are accumulated as A and enter as A + A^T (real) or
        // A - A^T (imaginary).
        self.jr.fill(T::zero());
        self.ji.fill(T::zero());
        for (o, ot) in &self.seg.jumps {
            self.tmp.gemm(one, o, &self.r, T::zero());
            self.jr.gemm(one, &self.tmp, ot, one);
            self.tmp.gemm(one, o, &self.i, T::zero());
            self.ji.gemm(one, &self.tmp, ot, one);
        }
        self.dr.gemm(-one, &self.seg.k_half, &self.r, T::zero());
        self.di.gemm(-one, &self.seg.k_half, &self.i, T::zero());
        let force = self.drive.map(|d| drive_amplitude(d, t)).unwrap_or(T::zero());
        if force != T::zero() {
            self.dr.gemm(force, &self.seg.drive, &self.i, one);
            self.di.gemm(-force, &self.seg.drive, &self.r, one);
        }
        let m = self.r.nrows();
        let half = T::lit(0.5);
        for n in 0..m {
            for k in n..m {
                let a = self.dr[(k, n)] + self.dr[(n, k)] + (self.jr[(k, n)] + self.jr[(n, k)]) * half;
                self.dr[(k, n)] = a;
                self.dr[(n, k)] = a;
                let b = self.di[(k, n)] - self.di[(n, k)] + (self.ji[(k, n)] - self.ji[(n, k)]) * half;
                self.di[(k, n)] = b;
                self.di[(n, k)] = -b;
            }
        }
        let mm = m * m;
        let (re, im) = (self.phases.re.as_slice(), self.phases.im.as_slice());
        let (dr, di) = (self.dr.as_slice(), self.di.as_slice());
        for k in 0..mm {
            dy[k] = re[k] * dr[k] + im[k] * di[k];
            dy[mm + k] = re[k] * di[k] - im[k] * dr[k];
        }
    }
}

/// Collects observables at the requested times.
struct Sampler<T: Real> {
    phases: Phases<T>,
    r: DMatrix<T>,
    i: DMatrix<T>,
    times: Vec<f64>,
    series: Vec<Vec<f64>>,
    trace: Vec<f64>,
    hermiticity: f64,
    min_eigenvalue: f64,
    spot: Vec<usize>,
}

impl<T: Real> Sampler<T> {
    fn record(&mut self, seg: &SegmentModel<T>, t_seg: T, t: T, y: &[T]) {
        let m = seg.levels();
        if self.r.nrows() != m {
            self.phases = Phases::new(m);
            self.r = DMatrix::zeros(m, m);
            self.i = DMatrix::zeros(m, m);
        }
        self.phases.update(&seg.basis.energies, t - t_seg);
        self.phases.to_lab(y, &mut self.r, &mut self.i);
        let k = self.times.len();
        self.times.push(t.as_f64());
        self.trace.push((self.r.trace() - T::one()).as_f64());
        for (s, n) in self.series.iter_mut().zip(&seg.observables) {
            s.push(self.r.dot(n).as_f64());
        }
        let mut herm = T::zero();
        for a in 0..m {
            for b in 0..m {
                herm = herm.max((self.r[(a, b)] - self.r[(b, a)]).abs()).max((self.i[(a, b)] + self.i[(b, a)]).abs());
            }
        }
        self.hermiticity = self.hermiticity.max(herm.as_f64());
        if self.spot.binary_search(&k).is_ok() {
            let e = min_eigenvalue(&self.r, &self.i);
            self.min_eigenvalue = self.min_eigenvalue.min(e);
        }
    }
}

/// Smallest eigenvalue of `R + iI` from its real `2m x 2m` embedding.
fn min_eigenvalue<T: Real>(r: &DMatrix<T>, i: &DMatrix<T>) -> f64 {
    let m = r.nrows();
    let mut big = DMatrix::zeros(2 * m, 2 * m);
    big.view_mut((0, 0), (m, m)).copy_from(r);
    big.view_mut((m, m), (m, m)).copy_from(r);
    big.view_mut((m, 0), (m, m)).copy_from(i);
    big.view_mut((0, m), (m, m)).copy_from(&(-i));
    big.symmetric_eigenvalues().iter().fold(f64::INFINITY, |a, e| a.min(e.as_f64()))
}

/// Largest weight of the initial state allowed outside the retained levels.
const MAX_TRUNCATION_LOSS: f64 = 1e-3;

fn truncation_error<T: Real>(kept: T, m: usize) -> Error {
    Error::InvalidState(format!("only {:.6} of the initial state lies in the lowest {m} levels", kept.as_f64()))
}

/// Initial state in the truncated eigenbasis, renormalized, together with the
/// weight it had there before renormalization.
fn initial_matrix<T: Real>(
    initial: &InitialState<T>,
    basis: &DressedBasis<T>,
    p: &ModelParams<T>,
) -> Result<(DMatrix<T>, DMatrix<T>, T)> {
    let m = basis.levels();
    let space = p.space()?;
    let pure = |v: DVector<T>| -> Result<(DMatrix<T>, DMatrix<T>, T)> {
        let c = basis.vectors.transpose() * v;
        let kept = c.norm_squared();
        if kept < T::one() - T::lit(MAX_TRUNCATION_LOSS) {
            return Err(truncation_error(kept, m));
        }
        let c = c / kept.sqrt();
        Ok((&c * c.transpose(), DMatrix::zeros(m, m), kept))
    };
    let bare = |occ: &[usize]| -> Result<DVector<T>> {
        let mut v = DVector::zeros(space.dim());
        v[space.index_of(occ)?] = T::one();
        Ok(v)
    };
    match initial {
        InitialState::Ground => {
            let mut r = DMatrix::zeros(m, m);
            r[(0, 0)] = T::one();
            Ok((r, DMatrix::zeros(m, m), T::one()))
        }
        InitialState::Eigenstate { level } => {
            if *level >= m {
                return Err(Error::IndexOutOfRange { what: "initial level", index: *level, len: m });
            }
            let mut r = DMatrix::zeros(m, m);
            r[(*level, *level)] = T::one();
            Ok((r, DMatrix::zeros(m, m), T::one()))
        }
        InitialState::Bare { occupations } => pure(bare(occupations)?),
        InitialState::Superposition { components } => {
            let mut v = DVector::zeros(space.dim());
            for (occ, amp) in components {
                v += bare(occ)? * *amp;
            }
            let norm = v.norm();
            if norm == T::zero() {
                return Err(Error::InvalidState("superposition has zero norm".into()));
            }
            pure(v / norm)
        }
        InitialState::Density(rho) => {
            if rho.nrows() != space.dim() || rho.ncols() != space.dim() {
                return Err(Error::InvalidState("density matrix has the wrong dimension".into()));
            }
            let tol = T::lit(1e-10);
            let herm = (rho - rho.adjoint()).iter().fold(T::zero(), |a, z| a.max(z.norm_sqr().sqrt()));
            let tr = rho.trace();
            if herm > tol || (tr.re - T::one()).abs() > tol || tr.im.abs() > tol {
                return Err(Error::InvalidState("density matrix must be Hermitian with unit trace".into()));
            }
            let lowest = rho.clone().symmetric_eigenvalues().iter().fold(T::one(), |a, e| a.min(*e));
            if lowest < -tol {
                return Err(Error::InvalidState(format!("density matrix has eigenvalue {:e}", lowest.as_f64())));
            }
            let v = basis.vectors.map(|x| Complex::new(x, T::zero()));
            let small = v.adjoint() * rho * &v;
            let kept = small.trace().re;
            if kept < T::one() - T::lit(MAX_TRUNCATION_LOSS) {
                return Err(truncation_error(kept, m));
            }
            Ok((small.map(|z| z.re / kept), small.map(|z| z.im / kept), kept))
        }
    }
}

fn digest<T: Real>(r: &DMatrix<T>, i: &DMatrix<T>) -> String {
    let mut h = Sha256::new();
    h.update((r.nrows() as u64).to_le_bytes());
    for x in r.iter().chain(i.iter()) {
        h.update(x.as_f64().to_le_bytes());
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Integrates the master equation from `t = 0` and samples at `t_grid`.
///
/// The drive couples to the mirror quadrature `b + b^dagger` and is kept out
/// of the dressing. With a `schedule`, the Hamiltonian, the dressed basis and
/// the jump operators are rebuilt at every switching time.
pub fn evolve<T: Real>(
    p: &ModelParams<T>,
    losses: &LossRates<T>,
    drive: Option<&DriveSpec<T>>,
    schedule: Option<&Schedule<T>>,
    initial: &InitialState<T>,
    t_grid: &[T],
    opts: &EvolveOptions<T>,
) -> Result<TrajectoryRecord> {
    p.validate()?;
    losses.validate(p.kind())?;
    if let Some(d) = drive {
        d.validate()?;
    }
    if let Some(s) = schedule {
        s.validate()?;
        p.system.with(s.param, s.segments[0].value)?;
    }
    if opts.levels == 0 {
        return Err(Error::InvalidParameter("at least one level must be retained".into()));
    }
    let t_end = *t_grid.last().ok_or_else(|| Error::InvalidParameter("empty time grid".into()))?;
    if t_grid[0] < T::zero() || t_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidParameter("time grid must be non-negative and strictly increasing".into()));
    }

    let terms = HamiltonianTerms::for_params(p)?;
    let params_at = |seg: usize| -> Result<ModelParams<T>> {
        let mut q = p.clone();
        if let Some(s) = schedule {
            q.system = q.system.with(s.param, s.segments[seg].value)?;
        }
        Ok(q)
    };

    // Breakpoints: schedule switches and the edges of the pulse window.
    let mut breaks = vec![T::zero(), t_end];
    if let Some(s) = schedule {
        breaks.extend(s.segments.iter().map(|x| x.t_start));
    }
    let window = drive.and_then(|d| d.active_window());
    if let Some((a, b)) = window {
        breaks.extend([a, b]);
    }
    breaks.retain(|&t| t >= T::zero() && t <= t_end);
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    breaks.dedup();

    let mut seg_index = schedule.map(|s| s.segment_at(T::zero())).unwrap_or(0);
    let mut seg = SegmentModel::build(&terms, &params_at(seg_index)?, losses, opts.levels)?;
    let (r0, i0, kept) = initial_matrix(initial, &seg.basis, p)?;
    let mut m = seg.levels();
    let mut y: Vec<T> = r0.iter().chain(i0.iter()).copied().collect();
    let mut t_seg = T::zero();

    let names = observable_names(p.kind());
    let checks = opts.positivity_checks.min(t_grid.len());
    let spot: Vec<usize> = match checks {
        0 => vec![],
        1 => vec![t_grid.len() - 1],
        c => {
            let mut v: Vec<usize> = (0..c).map(|k| (k * (t_grid.len() - 1) + (c - 1) / 2) / (c - 1)).collect();
            v.dedup();
            v
        }
    };
    let mut sampler = Sampler {
        phases: Phases::new(m),
        r: DMatrix::zeros(m, m),
        i: DMatrix::zeros(m, m),
        times: Vec::with_capacity(t_grid.len()),
        series: vec![Vec::with_capacity(t_grid.len()); names.len()],
        trace: Vec::with_capacity(t_grid.len()),
        hermiticity: 0.0,
        min_eigenvalue: f64::INFINITY,
        spot,
    };
    if t_grid[0] == T::zero() {
        sampler.record(&seg, t_seg, T::zero(), &y);
    }

    let mut stats = OdeStats::default();
    let mut h = None;
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        if let Some(s) = schedule {
            let next = s.segment_at(a);
            if next != seg_index {
                let new_seg = SegmentModel::build(&terms, &params_at(next)?, losses, opts.levels)?;
                let mut ph = Phases::new(m);
                ph.update(&seg.basis.energies, a - t_seg);
                let (mut r, mut i) = (DMatrix::zeros(m, m), DMatrix::zeros(m, m));
                ph.to_lab(&y, &mut r, &mut i);
                let overlap = new_seg.basis.vectors.transpose() * &seg.basis.vectors;
                let r2 = &overlap * r * overlap.transpose();
                let i2 = &overlap * i * overlap.transpose();
                y = r2.iter().chain(i2.iter()).copied().collect();
                seg = new_seg;
                seg_index = next;
                m = seg.levels();
                t_seg = a;
                h = None;
            }
        }
        let mid = (a + b) * T::lit(0.5);
        let active = match (drive, window) {
            (Some(_), Some((lo, hi))) => mid > lo && mid < hi,
            (Some(_), None) => true,
            (None, _) => false,
        };
        let max_step = match (active, drive.and_then(|d| d.envelope_scale())) {
            (true, Some(sigma)) => sigma * T::lit(0.5),
            _ => T::lit(f64::MAX),
        };
        let ode_opts = ode::OdeOptions { rtol: opts.rtol, atol: opts.atol, max_step, max_steps: opts.max_steps };
        let mut rhs = Rhs::new(&seg, if active { drive } else { None }, t_seg);
        let seg_ref = &seg;
        let sampler_ref = &mut sampler;
        let ts = t_seg;
        h = Some(ode::integrate(
            &mut rhs,
            a,
            &mut y,
            b,
            t_grid,
            &ode_opts,
            h,
            |t, state| sampler_ref.record(seg_ref, ts, t, state),
            &mut stats,
        )?);
    }

    let mut ph = Phases::new(m);
    ph.update(&seg.basis.energies, t_end - t_seg);
    let (mut r, mut i) = (DMatrix::zeros(m, m), DMatrix::zeros(m, m));
    ph.to_lab(&y, &mut r, &mut i);

    Ok(TrajectoryRecord {
        times: sampler.times,
        observables: names.into_iter().zip(sampler.series).collect(),
        trace_deviation: sampler.trace,
        hermiticity_residual: sampler.hermiticity,
        min_eigenvalue: sampler.min_eigenvalue,
        final_rho_digest: digest(&r, &i),
        levels: m,
        initial_weight: kept.as_f64(),
        steps_accepted: stats.accepted,
        steps_rejected: stats.rejected,
        rhs_evals: stats.rhs_evals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{Cutoffs, System};

    fn detuned_single(lambda: f64) -> ModelParams<f64> {
        ModelParams::with_cutoffs(
            System::SingleAtomSingleMode { omega_c: 0.6, omega_a: 0.4, g: 0.03, lambda },
            Cutoffs { phonon: 4, photon: vec![4] },
        )
    }

    fn grid(t: f64, n: usize) -> Vec<f64> {
        (0..=n).map(|k| t * k as f64 / n as f64).collect()
    }

    fn opts(levels: usize) -> EvolveOptions<f64> {
        EvolveOptions { levels, ..Default::default() }
    }

    #[test]
    fn ground_state_is_stationary() {
        let p = detuned_single(0.01);
        let losses = LossRates::uniform(p.kind(), 1e-3);
        let rec = evolve(&p, &losses, None, None, &InitialState::Ground, &grid(500.0, 50), &opts(20)).unwrap();
        for (name, s) in &rec.observables {
            assert!(s.iter().all(|v| v.abs() < 1e-10), "{name}");
        }
        assert!(rec.max_trace_deviation() < 1e-12);
    }

    #[test]
    fn excited_atom_decays_at_its_rate() {
        let p = ModelParams::with_cutoffs(
            System::SingleAtomSingleMode { omega_c: 0.6, omega_a: 0.4, g: 0.0, lambda: 0.0 },
            Cutoffs { phonon: 2, photon: vec![2] },
        );
        let eta = 2e-3;
        let losses = LossRates { kappa: vec![0.0], gamma: 0.0, eta: vec![eta] };
        let init = InitialState::Bare { occupations: vec![1, 0, 0] };
        let ts = grid(1000.0, 20);
        let rec = evolve(&p, &losses, None, None, &init, &ts, &opts(18)).unwrap();
        for (t, v) in ts.iter().zip(rec.observable("mean_atom").unwrap()) {
            assert!((v - (-eta * t).exp()).abs() < 1e-7, "{t}: {v}");
        }
    }

    #[test]
    fn closed_system_conserves_energy_and_rabi_oscillates() {
        let p = detuned_single(0.01);
        let losses = LossRates::zero(p.kind());
        let init = InitialState::Bare { occupations: vec![1, 0, 1] };
        let ts = grid(2000.0, 400);
        let rec = evolve(&p, &losses, None, None, &init, &ts, &opts(30)).unwrap();
        let e = rec.observable("energy").unwrap();
        assert!(e.iter().all(|x| (x - e[0]).abs() < 1e-7 * e[0]));
        assert!(rec.max_trace_deviation() < 1e-9);
        assert!(rec.hermiticity_residual < 1e-12);
        assert!(rec.min_eigenvalue > -1e-7);
        let atom = rec.observable("mean_atom").unwrap();
        let phonon = rec.observable("mean_phonon").unwrap();
        assert!(atom.iter().cloned().fold(1.0, f64::min) < 0.6);
        assert!(phonon.iter().cloned().fold(0.0, f64::max) > 0.4);
    }

    #[test]
    fn schedule_validation() {
        assert!(Schedule::new(Param::OmegaA, vec![(1.0, 0.4)]).is_err());
        assert!(Schedule::new(Param::OmegaA, vec![(0.0, 0.4), (0.0, 0.5)]).is_err());
        let s = Schedule::new(Param::OmegaA, vec![(0.0, 0.4), (10.0, 0.5)]).unwrap();
        assert_eq!(s.segment_at(9.99), 0);
        assert_eq!(s.segment_at(10.0), 1);
    }

    #[test]
    fn trivial_schedule_matches_plain_run() {
        let p = detuned_single(0.01);
        let losses = LossRates::uniform(p.kind(), 1e-3);
        let init = InitialState::Bare { occupations: vec![0, 1, 0] };
        let ts = grid(600.0, 60);
        let plain = evolve(&p, &losses, None, None, &init, &ts, &opts(25)).unwrap();
        let s = Schedule::new(Param::OmegaA, vec![(0.0, 0.4), (300.0, 0.4)]).unwrap();
        let split = evolve(&p, &losses, None, Some(&s), &init, &ts, &opts(25)).unwrap();
        for name in observable_names(p.kind()) {
            let (a, b) = (plain.observable(&name).unwrap(), split.observable(&name).unwrap());
            for (x, y) in a.iter().zip(b) {
                assert!((x - y).abs() < 1e-6, "{name}: {x} vs {y}");
            }
        }
    }

    #[test]
    fn rejects_bad_initial_density() {
        let p = detuned_single(0.01);
        let dim = p.space().unwrap().dim();
        let rho = DMatrix::from_element(dim, dim, Complex::new(0.0, 0.0));
        let r = evolve(&p, &LossRates::zero(p.kind()), None, None, &InitialState::Density(rho), &[1.0], &opts(10));
        assert!(matches!(r, Err(Error::InvalidState(_))));
    }

    #[test]
    fn deterministic_digest() {
        let p = detuned_single(0.01);
        let losses = LossRates::uniform(p.kind(), 1e-3);
        let d = DriveSpec::Cw { amplitude: 2e-3, omega_d: 1.0 };
        let run = || evolve(&p, &losses, Some(&d), None, &InitialState::Ground, &grid(50.0, 10), &opts(15)).unwrap();
        let (a, b) = (run(), run());
        assert_eq!(a.final_rho_digest, b.final_rho_digest);
        assert_eq!(a.final_rho_digest.len(), 64);
        assert!(a.observable("mean_phonon").unwrap()[10] > 0.0);
    }
}
