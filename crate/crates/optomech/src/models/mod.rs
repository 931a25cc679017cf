//! Model parameters and Hamiltonian builders for the three atom–cavity–mirror
//! configurations.
//!
//! All quantities are in natural units: `hbar = 1` and the mechanical
//! frequency is fixed to 1, so every frequency and rate below is a multiple of
//! the mirror frequency.

mod circuit;
mod drive;
mod hamiltonian;
mod hybrid;
mod transformed;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fockspace::{HilbertSpace, ModeLadder};
use crate::scalar::Real;

pub use circuit::{charge_qubit_g, CircuitParams};
pub use drive::{drive_amplitude, drive_term, DriveSpec, PulseNormalization};
pub use hamiltonian::{bare_hamiltonian, HamiltonianTerms, LoweringOperators};
pub use hybrid::{hybridize, hybridized_hamiltonian, HybridizedModes};
pub use transformed::{transformed_hamiltonian, DEFAULT_SERIES_ORDER};

/// Label of the mechanical ladder; it is always the first bosonic mode.
pub const MECH_LABEL: &str = "mech";
/// Index of the mechanical mode among the bosonic modes.
pub const MECH_MODE: usize = 0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    SingleAtomSingleMode,
    SingleAtomTwoModes,
    TwoAtomsSingleMode,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::SingleAtomSingleMode => "single_atom_single_mode",
            ModelKind::SingleAtomTwoModes => "single_atom_two_modes",
            ModelKind::TwoAtomsSingleMode => "two_atoms_single_mode",
        }
    }

    pub fn qubit_count(self) -> usize {
        match self {
            ModelKind::TwoAtomsSingleMode => 2,
            _ => 1,
        }
    }

    pub fn cavity_count(self) -> usize {
        match self {
            ModelKind::SingleAtomTwoModes => 2,
            _ => 1,
        }
    }

    pub fn default_cutoffs(self) -> Cutoffs {
        match self {
            ModelKind::SingleAtomTwoModes => Cutoffs { phonon: 5, photon: vec![5, 6] },
            _ => Cutoffs { phonon: 6, photon: vec![6] },
        }
    }

    pub(crate) fn check_space(self, space: &HilbertSpace) -> Result<()> {
        let modes_ok = space.modes().len() == 1 + self.cavity_count()
            && space.modes()[MECH_MODE].label == MECH_LABEL;
        if space.qubit_count() == self.qubit_count() && modes_ok {
            Ok(())
        } else {
            Err(Error::SpaceMismatch)
        }
    }
}

/// Physical parameters of one of the three system models.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum System<T> {
    SingleAtomSingleMode { omega_c: T, omega_a: T, g: T, lambda: T },
    SingleAtomTwoModes { omega_c1: T, omega_c2: T, omega_a: T, g: T, lambda: T },
    TwoAtomsSingleMode { omega_c: T, omega_a1: T, omega_a2: T, g: T, lambda1: T, lambda2: T },
}

/// Highest retained Fock level of every bosonic mode.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Cutoffs {
    pub phonon: usize,
    /// One entry per cavity mode.
    pub photon: Vec<usize>,
}

/// A tunable model parameter, used by sweeps and schedules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Param {
    OmegaC,
    OmegaC1,
    OmegaC2,
    /// Atom frequency; on the two-atom model it addresses both atoms.
    OmegaA,
    OmegaA1,
    OmegaA2,
    G,
    /// Atom–cavity coupling; on the two-atom model it addresses both atoms.
    Lambda,
    Lambda1,
    Lambda2,
}

impl Param {
    pub fn name(self) -> &'static str {
        match self {
            Param::OmegaC => "omega_c",
            Param::OmegaC1 => "omega_c1",
            Param::OmegaC2 => "omega_c2",
            Param::OmegaA => "omega_a",
            Param::OmegaA1 => "omega_a1",
            Param::OmegaA2 => "omega_a2",
            Param::G => "g",
            Param::Lambda => "lambda",
            Param::Lambda1 => "lambda1",
            Param::Lambda2 => "lambda2",
        }
    }

    fn is_frequency(self) -> bool {
        !matches!(self, Param::G | Param::Lambda | Param::Lambda1 | Param::Lambda2)
    }
}

/// Model parameters plus truncation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams<T> {
    #[serde(flatten)]
    pub system: System<T>,
    pub cutoffs: Cutoffs,
}

impl<T: Real> System<T> {
    pub fn kind(&self) -> ModelKind {
        match self {
            System::SingleAtomSingleMode { .. } => ModelKind::SingleAtomSingleMode,
            System::SingleAtomTwoModes { .. } => ModelKind::SingleAtomTwoModes,
            System::TwoAtomsSingleMode { .. } => ModelKind::TwoAtomsSingleMode,
        }
    }

    pub fn g(&self) -> T {
        match *self {
            System::SingleAtomSingleMode { g, .. }
            | System::SingleAtomTwoModes { g, .. }
            | System::TwoAtomsSingleMode { g, .. } => g,
        }
    }

    fn wrong(&self, param: Param) -> Error {
        Error::InvalidParameter(format!("`{}` does not exist on the {} model", param.name(), self.kind().name()))
    }

    pub fn get(&self, param: Param) -> Result<T> {
        use Param::*;
        let v = match (*self, param) {
            (_, G) => self.g(),
            (System::SingleAtomSingleMode { omega_c, .. }, OmegaC) => omega_c,
            (System::SingleAtomSingleMode { omega_a, .. }, OmegaA) => omega_a,
            (System::SingleAtomSingleMode { lambda, .. }, Lambda) => lambda,
            (System::SingleAtomTwoModes { omega_c1, .. }, OmegaC1) => omega_c1,
            (System::SingleAtomTwoModes { omega_c2, .. }, OmegaC2) => omega_c2,
            (System::SingleAtomTwoModes { omega_a, .. }, OmegaA) => omega_a,
            (System::SingleAtomTwoModes { lambda, .. }, Lambda) => lambda,
            (System::TwoAtomsSingleMode { omega_c, .. }, OmegaC) => omega_c,
            (System::TwoAtomsSingleMode { omega_a1, .. }, OmegaA1) => omega_a1,
            (System::TwoAtomsSingleMode { omega_a2, .. }, OmegaA2) => omega_a2,
            (System::TwoAtomsSingleMode { lambda1, .. }, Lambda1) => lambda1,
            (System::TwoAtomsSingleMode { lambda2, .. }, Lambda2) => lambda2,
            (System::TwoAtomsSingleMode { omega_a1, omega_a2, .. }, OmegaA) if omega_a1 == omega_a2 => omega_a1,
            (System::TwoAtomsSingleMode { lambda1, lambda2, .. }, Lambda) if lambda1 == lambda2 => lambda1,
            _ => return Err(self.wrong(param)),
        };
        Ok(v)
    }

    pub fn set(&mut self, param: Param, value: T) -> Result<()> {
        use Param::*;
        let wrong = self.wrong(param);
        match (self, param) {
            (System::SingleAtomSingleMode { g, .. }, G)
            | (System::SingleAtomTwoModes { g, .. }, G)
            | (System::TwoAtomsSingleMode { g, .. }, G) => *g = value,
            (System::SingleAtomSingleMode { omega_c, .. }, OmegaC) => *omega_c = value,
            (System::SingleAtomSingleMode { omega_a, .. }, OmegaA) => *omega_a = value,
            (System::SingleAtomSingleMode { lambda, .. }, Lambda) => *lambda = value,
            (System::SingleAtomTwoModes { omega_c1, .. }, OmegaC1) => *omega_c1 = value,
            (System::SingleAtomTwoModes { omega_c2, .. }, OmegaC2) => *omega_c2 = value,
            (System::SingleAtomTwoModes { omega_a, .. }, OmegaA) => *omega_a = value,
            (System::SingleAtomTwoModes { lambda, .. }, Lambda) => *lambda = value,
            (System::TwoAtomsSingleMode { omega_c, .. }, OmegaC) => *omega_c = value,
            (System::TwoAtomsSingleMode { omega_a1, .. }, OmegaA1) => *omega_a1 = value,
            (System::TwoAtomsSingleMode { omega_a2, .. }, OmegaA2) => *omega_a2 = value,
            (System::TwoAtomsSingleMode { omega_a1, omega_a2, .. }, OmegaA) => {
                *omega_a1 = value;
                *omega_a2 = value;
            }
            (System::TwoAtomsSingleMode { lambda1, .. }, Lambda1) => *lambda1 = value,
            (System::TwoAtomsSingleMode { lambda2, .. }, Lambda2) => *lambda2 = value,
            (System::TwoAtomsSingleMode { lambda1, lambda2, .. }, Lambda) => {
                *lambda1 = value;
                *lambda2 = value;
            }
            _ => return Err(wrong),
        }
        Ok(())
    }

    pub fn with(mut self, param: Param, value: T) -> Result<Self> {
        self.set(param, value)?;
        Ok(self)
    }

    fn named_values(&self) -> Vec<(Param, T)> {
        use Param::*;
        match *self {
            System::SingleAtomSingleMode { omega_c, omega_a, g, lambda } => {
                vec![(OmegaC, omega_c), (OmegaA, omega_a), (G, g), (Lambda, lambda)]
            }
            System::SingleAtomTwoModes { omega_c1, omega_c2, omega_a, g, lambda } => vec![
                (OmegaC1, omega_c1),
                (OmegaC2, omega_c2),
                (OmegaA, omega_a),
                (G, g),
                (Lambda, lambda),
            ],
            System::TwoAtomsSingleMode { omega_c, omega_a1, omega_a2, g, lambda1, lambda2 } => vec![
                (OmegaC, omega_c),
                (OmegaA1, omega_a1),
                (OmegaA2, omega_a2),
                (G, g),
                (Lambda1, lambda1),
                (Lambda2, lambda2),
            ],
        }
    }

    /// Frequencies must be positive and couplings non-negative.
    pub fn validate(&self) -> Result<()> {
        for (p, v) in self.named_values() {
            if !v.is_finite() {
                return Err(Error::InvalidParameter(format!("`{}` is not finite", p.name())));
            }
            if p.is_frequency() && v <= T::zero() {
                return Err(Error::InvalidParameter(format!("frequency `{}` must be > 0", p.name())));
            }
            if !p.is_frequency() && v < T::zero() {
                return Err(Error::InvalidParameter(format!("coupling `{}` must be >= 0", p.name())));
            }
        }
        Ok(())
    }
}

impl<T: Real> ModelParams<T> {
    /// Parameters with the default truncation of the model.
    pub fn new(system: System<T>) -> Self {
        let cutoffs = system.kind().default_cutoffs();
        Self { system, cutoffs }
    }

    pub fn with_cutoffs(system: System<T>, cutoffs: Cutoffs) -> Self {
        Self { system, cutoffs }
    }

    pub fn kind(&self) -> ModelKind {
        self.system.kind()
    }

    pub fn validate(&self) -> Result<()> {
        self.system.validate()?;
        let want = self.kind().cavity_count();
        if self.cutoffs.photon.len() != want {
            return Err(Error::InvalidParameter(format!(
                "{} model needs {} photon cutoffs, got {}",
                self.kind().name(),
                want,
                self.cutoffs.photon.len()
            )));
        }
        Ok(())
    }

    /// Hilbert space of the model: qubits, then `[mech, cavity...]`.
    pub fn space(&self) -> Result<HilbertSpace> {
        self.validate()?;
        let mut modes = vec![ModeLadder::new(MECH_LABEL, self.cutoffs.phonon)];
        match self.cutoffs.photon.as_slice() {
            [n] => modes.push(ModeLadder::new("cavity", *n)),
            many => {
                for (i, n) in many.iter().enumerate() {
                    modes.push(ModeLadder::new(format!("cavity{}", i + 1), *n));
                }
            }
        }
        HilbertSpace::new(modes, self.kind().qubit_count())
    }
}

/// Loss rates of every subsystem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossRates<T> {
    /// One rate per cavity mode.
    pub kappa: Vec<T>,
    pub gamma: T,
    /// One rate per atom.
    pub eta: Vec<T>,
}

impl<T: Real> LossRates<T> {
    /// Equal rate on every channel of the given model.
    pub fn uniform(kind: ModelKind, rate: T) -> Self {
        Self {
            kappa: vec![rate; kind.cavity_count()],
            gamma: rate,
            eta: vec![rate; kind.qubit_count()],
        }
    }

    pub fn zero(kind: ModelKind) -> Self {
        Self::uniform(kind, T::zero())
    }

    pub fn validate(&self, kind: ModelKind) -> Result<()> {
        if self.kappa.len() != kind.cavity_count() || self.eta.len() != kind.qubit_count() {
            return Err(Error::InvalidParameter(format!(
                "loss rates need {} cavity and {} atom entries",
                kind.cavity_count(),
                kind.qubit_count()
            )));
        }
        let all = self.kappa.iter().chain(self.eta.iter()).chain(std::iter::once(&self.gamma));
        for r in all {
            if !(r.is_finite() && *r >= T::zero()) {
                return Err(Error::InvalidParameter("loss rates must be finite and >= 0".into()));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn detuned_single() -> System<f64> {
        System::SingleAtomSingleMode { omega_c: 0.6, omega_a: 0.4, g: 0.03, lambda: 0.005 }
    }

    #[test]
    fn param_access() {
        let mut s = detuned_single();
        assert_eq!(s.get(Param::OmegaC).unwrap(), 0.6);
        s.set(Param::G, 0.05).unwrap();
        assert_eq!(s.g(), 0.05);
        assert!(s.set(Param::OmegaC1, 0.3).is_err());
        let mut two = System::TwoAtomsSingleMode {
            omega_c: 0.7,
            omega_a1: 0.45,
            omega_a2: 0.55,
            g: 0.01,
            lambda1: 0.014,
            lambda2: 0.022,
        };
        assert!(two.get(Param::OmegaA).is_err());
        two.set(Param::OmegaA, 0.5).unwrap();
        assert_eq!(two.get(Param::OmegaA).unwrap(), 0.5);
        assert_eq!(two.get(Param::OmegaA2).unwrap(), 0.5);
    }

    #[test]
    fn validation() {
        assert!(detuned_single().validate().is_ok());
        assert!(detuned_single().with(Param::OmegaC, 0.0).unwrap().validate().is_err());
        assert!(detuned_single().with(Param::Lambda, -1e-3).unwrap().validate().is_err());
        let mut p = ModelParams::new(detuned_single());
        p.cutoffs.photon.push(3);
        assert!(p.space().is_err());
    }

    #[test]
    fn spaces_follow_model_layout() {
        let single = ModelParams::new(detuned_single()).space().unwrap();
        assert_eq!(single.dim(), 98);
        assert_eq!(single.mode_position("cavity"), Some(1));
        let two = ModelParams::new(System::SingleAtomTwoModes {
            omega_c1: 0.65,
            omega_c2: 0.5,
            omega_a: 0.34,
            g: 0.02,
            lambda: 0.01,
        });
        assert_eq!(two.space().unwrap().dim(), 2 * 6 * 6 * 7);
    }
}
