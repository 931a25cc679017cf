use serde::{Deserialize, Serialize};

use super::{evolve, EvolveOptions, InitialState, Schedule, TrajectoryRecord};
use crate::error::{Error, Result};
use crate::models::{HamiltonianTerms, LossRates, ModelKind, ModelParams, Param};
use crate::scalar::Real;
use crate::spectra::eigensolve_real;

/// Timing of the frequency-conversion pulse sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConversionProtocol<T> {
    /// Atom detuning outside the resonant window.
    pub detuning: T,
    /// Time at which the atom is brought into resonance.
    pub t_on: T,
    /// Length of the resonant window; half a Rabi period when absent.
    #[serde(default)]
    pub window: Option<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConversionOutcome {
    /// Resonant atom frequency.
    pub omega_a0: f64,
    /// Splitting `2 Omega` of the pair of eigenstates sharing `|e,0,1,0>`.
    pub splitting: f64,
    pub t_on: f64,
    pub t_off: f64,
    /// Largest `<A1^dagger A1>` reached.
    pub peak_mode1: f64,
    /// `<A2^dagger A2>` at the first sample.
    pub initial_mode2: f64,
    pub trajectory: TrajectoryRecord,
}

/// Splitting of the two eigenstates with the largest weight on `|e,0,1,0>`.
pub(crate) fn conversion_splitting<T: Real>(p: &ModelParams<T>) -> Result<T> {
    let terms = HamiltonianTerms::for_params(p)?;
    let (values, vectors) = eigensolve_real(terms.assemble(&p.system)?)?;
    let target = terms.space().index_of(&[1, 0, 1, 0])?;
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| vectors[(target, b)].abs().partial_cmp(&vectors[(target, a)].abs()).unwrap());
    Ok((values[order[0]] - values[order[1]]).abs())
}

/// Transfers a photon from the second cavity mode to the first.
///
/// The atom starts detuned by `detuning`, is switched to the resonant
/// frequency (the `omega_a` of `p`) at `t_on` for half a Rabi period, and then
/// detuned again. The initial state is `(|g,1,0,0> - |g,0,0,2>)/sqrt2`.
pub fn frequency_conversion_protocol<T: Real>(
    p: &ModelParams<T>,
    losses: &LossRates<T>,
    protocol: &ConversionProtocol<T>,
    t_grid: &[T],
    opts: &EvolveOptions<T>,
) -> Result<ConversionOutcome> {
    if p.kind() != ModelKind::SingleAtomTwoModes {
        return Err(Error::WrongModel { expected: ModelKind::SingleAtomTwoModes.name(), found: p.kind().name() });
    }
    let omega_a0 = p.system.get(Param::OmegaA)?;
    let splitting = conversion_splitting(p)?;
    let window = match protocol.window {
        Some(w) => w,
        None => T::pi() / splitting,
    };
    let t_off = protocol.t_on + window;
    let detuned = omega_a0 + protocol.detuning;
    let mut segments = Vec::new();
    if protocol.t_on > T::zero() {
        segments.push((T::zero(), detuned));
    }
    segments.push((protocol.t_on, omega_a0));
    segments.push((t_off, detuned));
    let schedule = Schedule::new(Param::OmegaA, segments)?;
    let amp = T::lit(std::f64::consts::FRAC_1_SQRT_2);
    let initial = InitialState::Superposition { components: vec![(vec![0, 1, 0, 0], amp), (vec![0, 0, 0, 2], -amp)] };
    let start = p.clone();
    let trajectory = evolve(&start, losses, None, Some(&schedule), &initial, t_grid, opts)?;
    let mode1 = trajectory.observable("mean_photon_1")?;
    let mode2 = trajectory.observable("mean_photon_2")?;
    Ok(ConversionOutcome {
        omega_a0: omega_a0.as_f64(),
        splitting: splitting.as_f64(),
        t_on: protocol.t_on.as_f64(),
        t_off: t_off.as_f64(),
        peak_mode1: mode1.iter().cloned().fold(0.0, f64::max),
        initial_mode2: mode2.first().copied().unwrap_or(0.0),
        trajectory,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointExcitationReport {
    /// `max_t |<X_i^dagger X_i> - G2|` for each atom.
    pub max_deviation: [f64; 2],
    /// Largest single-atom excitation reached.
    pub max_excitation: f64,
    pub tolerance: f64,
    /// Both deviations are below `tolerance * max_excitation`.
    pub within_tolerance: bool,
}

/// Compares each atom's excitation with the joint two-atom excitation.
pub fn joint_excitation_check(traj: &TrajectoryRecord, tolerance: f64) -> Result<JointExcitationReport> {
    let g2 = traj.observable("two_atom_correlation")?;
    let mut max_deviation = [0.0; 2];
    let mut max_excitation: f64 = 0.0;
    for (k, name) in ["mean_atom_1", "mean_atom_2"].iter().enumerate() {
        let x = traj.observable(name)?;
        for (a, b) in x.iter().zip(g2) {
            max_deviation[k] = f64::max(max_deviation[k], (a - b).abs());
            max_excitation = max_excitation.max(*a);
        }
    }
    let within_tolerance = max_deviation.iter().all(|d| *d <= tolerance * max_excitation);
    Ok(JointExcitationReport { max_deviation, max_excitation, tolerance, within_tolerance })
}

/// First sample time after which no observable changes by more than `rel`
/// (relative) over one `period`.
pub fn steady_state_time(traj: &TrajectoryRecord, period: f64, rel: f64) -> Option<f64> {
    let t = &traj.times;
    let interp = |s: &[f64], x: f64| -> Option<f64> {
        let k = t.partition_point(|&v| v <= x);
        if k == 0 || k >= t.len() {
            return (k == t.len() && (x - t[t.len() - 1]).abs() < 1e-12).then(|| s[t.len() - 1]);
        }
        let w = (x - t[k - 1]) / (t[k] - t[k - 1]);
        Some(s[k - 1] + w * (s[k] - s[k - 1]))
    };
    let settled_at = |j: usize| -> Option<bool> {
        let mut ok = true;
        for s in traj.observables.values() {
            let later = interp(s, t[j] + period)?;
            ok &= (later - s[j]).abs() <= rel * s[j].abs().max(1e-12);
        }
        Some(ok)
    };
    let mut candidate = None;
    for j in 0..t.len() {
        match settled_at(j) {
            Some(true) => {
                candidate.get_or_insert(t[j]);
            }
            Some(false) => candidate = None,
            None => break,
        }
    }
    candidate
}
