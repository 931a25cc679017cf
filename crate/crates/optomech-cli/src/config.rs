//! Declarative scenario configuration.
//!
//! A config is a JSON object. All frequencies, rates and times are in units of
//! the mirror frequency `omega_m` (and its inverse). The `scenario` field picks
//! which of the optional sections are required; see [`ScenarioConfig::validate`].

use std::fmt;
use std::path::{Path, PathBuf};

use optomech::lindblad::{ConversionProtocol, EvolveOptions, InitialState, Preprocess, Schedule, SpectrumOptions};
use optomech::models::{Cutoffs, ModelKind, ModelParams, Param, PulseNormalization, System};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: line {line}, column {column}: {message}")]
    Parse { path: PathBuf, line: usize, column: usize, message: String },
    #[error("invalid config field `{field}`: {message}")]
    Validation { field: String, message: String },
}

fn invalid(field: impl Into<String>, message: impl Into<String>) -> ConfigError {
    ConfigError::Validation { field: field.into(), message: message.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    Spectrum,
    Crossing,
    PerturbCompare,
    Dynamics,
    FreqConversion,
    JointExcitation,
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ScenarioKind::Spectrum => "spectrum",
            ScenarioKind::Crossing => "crossing",
            ScenarioKind::PerturbCompare => "perturb_compare",
            ScenarioKind::Dynamics => "dynamics",
            ScenarioKind::FreqConversion => "freq_conversion",
            ScenarioKind::JointExcitation => "joint_excitation",
        };
        f.write_str(s)
    }
}

/// Hamiltonian used by the `spectrum` scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Frame {
    #[default]
    Bare,
    /// Polaron-transformed Hamiltonian truncated after `series_order`.
    Transformed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Numerics {
    /// Defaults to the model's standard truncation.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cutoffs: Option<Cutoffs>,
    pub frame: Frame,
    pub series_order: usize,
    /// Retained eigenstates in master-equation runs.
    pub levels: usize,
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    pub positivity_checks: usize,
}

impl Default for Numerics {
    fn default() -> Self {
        let e = EvolveOptions::<f64>::default();
        Self {
            cutoffs: None,
            frame: Frame::Bare,
            series_order: optomech::models::DEFAULT_SERIES_ORDER,
            levels: e.levels,
            rtol: e.rtol,
            atol: e.atol,
            max_steps: e.max_steps,
            positivity_checks: e.positivity_checks,
        }
    }
}

impl Numerics {
    pub fn evolve_options(&self) -> EvolveOptions<f64> {
        EvolveOptions {
            levels: self.levels,
            rtol: self.rtol,
            atol: self.atol,
            max_steps: self.max_steps,
            positivity_checks: self.positivity_checks,
        }
    }
}

/// Uniform grid of one parameter for the `spectrum` scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub axis: Param,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    /// Number of tracked levels above the ground state (the ground state included).
    pub levels: usize,
}

impl SweepConfig {
    pub fn grid(&self) -> Vec<f64> {
        let n = self.points;
        (0..n).map(|i| self.start + (self.stop - self.start) * i as f64 / (n - 1) as f64).collect()
    }
}

/// Where to look for an avoided crossing.
///
/// Either give `bracket` and `level_pair` directly, or name the two bare
/// `states` whose unperturbed energies cross; the bracket is then centred on
/// their resonance with half-width `half_width` and the level pair is the two
/// eigenstates that carry most of their weight there.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrossingConfig {
    pub axis: Param,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bracket: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level_pair: Option<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub states: Option<[Vec<usize>; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub half_width: Option<f64>,
}

/// Numeric splitting against closed-form rates over a parameter grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareConfig {
    #[serde(default = "default_compare_param")]
    pub param: Param,
    pub values: Vec<f64>,
    /// Formula names: `g10_e01`, `g20_e01`, `freq_conversion`, `two_atom`,
    /// `dce_only_displaced`, `dce_only_polaron`, `two_photon_corrected`,
    /// `two_photon_polaron`.
    pub formulas: Vec<String>,
}

fn default_compare_param() -> Param {
    Param::G
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LossConfig {
    /// The same rate on every channel.
    Uniform { rate: f64 },
    Channels { kappa: Vec<f64>, gamma: f64, eta: Vec<f64> },
    /// Every channel at `Omega / divisor`, where `2 Omega` is the splitting of
    /// the `crossing` section.
    CouplingFraction { divisor: f64 },
}

/// Pulse width, either absolute or as `1 / (multiple * Omega)` with `2 Omega`
/// the splitting of the `crossing` section.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PulseWidth {
    Time(f64),
    InverseCoupling { inverse_coupling: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DriveConfig {
    Cw {
        amplitude: f64,
        omega_d: f64,
    },
    GaussianPulse {
        amplitude: f64,
        omega_d: f64,
        sigma: PulseWidth,
        /// Pulse centre; `9 sigma` when absent.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        t0: Option<f64>,
        #[serde(default)]
        normalization: PulseNormalization,
    },
}

/// Uniform sampling grid starting at `t = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    pub duration: f64,
    /// Number of intervals; the grid has `samples + 1` points.
    pub samples: usize,
    /// Measure `duration` from the end of the pulse instead of from `t = 0`.
    #[serde(default)]
    pub after_pulse: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FourierConfig {
    pub observable: String,
    /// Window start; the end of the pulse (or 0) when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub end: Option<f64>,
    #[serde(default)]
    pub preprocess: Preprocess,
    #[serde(default)]
    pub hann: bool,
    /// Eigenvalue gaps `E_j - E_i` reported next to the peaks.
    #[serde(default)]
    pub level_pairs: Vec<[usize; 2]>,
}

impl FourierConfig {
    pub fn options(&self) -> SpectrumOptions {
        SpectrumOptions { preprocess: self.preprocess, hann: self.hann }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JointConfig {
    #[serde(default = "default_joint_tolerance")]
    pub tolerance: f64,
}

fn default_joint_tolerance() -> f64 {
    0.05
}

/// Cutoff ladder rerun by `run` after the main scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceConfig {
    pub quantities: Vec<String>,
    pub ladder: Vec<Cutoffs>,
    #[serde(default = "default_convergence_tolerance")]
    pub tolerance: f64,
}

pub fn default_convergence_tolerance() -> f64 {
    0.01
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    /// Tables as CSV files, reports as JSON.
    #[default]
    Csv,
    /// Everything in the JSON report.
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Directory below the output root that receives the files.
    pub path: String,
    #[serde(default)]
    pub format: OutputFormat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: ScenarioKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub model: System<f64>,
    #[serde(default)]
    pub numerics: Numerics,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub crossing: Option<CrossingConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compare: Option<CompareConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub losses: Option<LossConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drive: Option<DriveConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<Schedule<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<InitialState<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time: Option<TimeConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fourier: Option<FourierConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub protocol: Option<ConversionProtocol<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub joint: Option<JointConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub convergence: Option<ConvergenceConfig>,
    pub output: OutputConfig,
}

impl ScenarioConfig {
    pub fn from_json(text: &str, path: &Path) -> Result<Self, ConfigError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| ConfigError::Parse {
            path: path.to_path_buf(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
        Self::from_json(&text, path)
    }

    /// Canonical serialization; parsing it back gives the same config.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// SHA-256 of the canonical serialization.
    pub fn digest(&self) -> String {
        let h = Sha256::digest(self.canonical_json().as_bytes());
        h.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn kind(&self) -> ModelKind {
        self.model.kind()
    }

    pub fn params(&self) -> ModelParams<f64> {
        match &self.numerics.cutoffs {
            Some(c) => ModelParams::with_cutoffs(self.model, c.clone()),
            None => ModelParams::new(self.model),
        }
    }

    /// The same scenario at a different truncation.
    pub fn with_cutoffs(&self, cutoffs: Cutoffs) -> Self {
        let mut c = self.clone();
        c.numerics.cutoffs = Some(cutoffs);
        c
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.model.validate().map_err(|e| invalid("model", e.to_string()))?;
        self.params().validate().map_err(|e| invalid("numerics.cutoffs", e.to_string()))?;
        if let Some(c) = &self.numerics.cutoffs {
            if c.phonon == 0 || c.photon.iter().any(|&n| n == 0) {
                return Err(invalid("numerics.cutoffs", "every cutoff must be at least 1"));
            }
        }
        let n = &self.numerics;
        if n.levels == 0 {
            return Err(invalid("numerics.levels", "must be at least 1"));
        }
        if !(n.rtol > 0.0 && n.atol > 0.0) {
            return Err(invalid("numerics.rtol", "tolerances must be > 0"));
        }
        if self.output.path.is_empty() || Path::new(&self.output.path).is_absolute() {
            return Err(invalid("output.path", "must be a non-empty relative path"));
        }
        if let Some(c) = &self.crossing {
            c.validate()?;
        }
        if let Some(c) = &self.convergence {
            if c.quantities.is_empty() || c.ladder.len() < 2 {
                return Err(invalid("convergence", "needs a quantity and at least two cutoff sets"));
            }
        }
        match self.scenario {
            ScenarioKind::Spectrum => {
                let s = require(&self.sweep, "sweep")?;
                if s.points < 2 || s.levels == 0 || !(s.start < s.stop) {
                    return Err(invalid("sweep", "needs points >= 2, levels >= 1 and start < stop"));
                }
            }
            ScenarioKind::Crossing => {
                require(&self.crossing, "crossing")?;
            }
            ScenarioKind::PerturbCompare => {
                require(&self.crossing, "crossing")?;
                let c = require(&self.compare, "compare")?;
                if c.values.is_empty() || c.formulas.is_empty() {
                    return Err(invalid("compare", "needs at least one value and one formula"));
                }
                for f in &c.formulas {
                    crate::compare::Formula::parse(f).map_err(|e| invalid("compare.formulas", e.to_string()))?;
                }
            }
            ScenarioKind::Dynamics | ScenarioKind::JointExcitation => {
                require(&self.losses, "losses")?;
                self.validate_time()?;
                if self.scenario == ScenarioKind::JointExcitation && self.kind() != ModelKind::TwoAtomsSingleMode {
                    return Err(invalid("model.kind", "joint_excitation needs the two_atoms_single_mode model"));
                }
            }
            ScenarioKind::FreqConversion => {
                require(&self.losses, "losses")?;
                require(&self.protocol, "protocol")?;
                self.validate_time()?;
                if self.kind() != ModelKind::SingleAtomTwoModes {
                    return Err(invalid("model.kind", "freq_conversion needs the single_atom_two_modes model"));
                }
                if self.drive.is_some() || self.schedule.is_some() {
                    return Err(invalid("drive", "freq_conversion builds its own schedule and takes no drive"));
                }
            }
        }
        let needs_coupling = matches!(self.losses, Some(LossConfig::CouplingFraction { .. }))
            || matches!(self.drive, Some(DriveConfig::GaussianPulse { sigma: PulseWidth::InverseCoupling { .. }, .. }));
        if needs_coupling && self.crossing.is_none() {
            return Err(invalid("crossing", "rates given relative to the coupling need a crossing section"));
        }
        Ok(())
    }

    fn validate_time(&self) -> Result<(), ConfigError> {
        let t = require(&self.time, "time")?;
        if !(t.duration > 0.0) || t.samples == 0 {
            return Err(invalid("time", "needs duration > 0 and samples >= 1"));
        }
        if t.after_pulse && !matches!(self.drive, Some(DriveConfig::GaussianPulse { .. })) {
            return Err(invalid("time.after_pulse", "requires a gaussian_pulse drive"));
        }
        Ok(())
    }
}

impl CrossingConfig {
    fn validate(&self) -> Result<(), ConfigError> {
        if self.bracket.is_none() && self.states.is_none() {
            return Err(invalid("crossing", "give either `bracket` or `states`"));
        }
        if self.level_pair.is_none() && self.states.is_none() {
            return Err(invalid("crossing", "give either `level_pair` or `states`"));
        }
        if let Some([a, b]) = self.bracket {
            if !(a < b) {
                return Err(invalid("crossing.bracket", "lower end must be below upper end"));
            }
        }
        if let Some([i, j]) = self.level_pair {
            if j != i + 1 {
                return Err(invalid("crossing.level_pair", "levels must be adjacent"));
            }
        }
        if self.bracket.is_none() && !self.half_width.is_some_and(|w| w > 0.0) {
            return Err(invalid("crossing.half_width", "needed (> 0) when the bracket is derived from `states`"));
        }
        Ok(())
    }
}

fn require<'a, T>(field: &'a Option<T>, name: &str) -> Result<&'a T, ConfigError> {
    field.as_ref().ok_or_else(|| invalid(name, "required by this scenario"))
}

/// Writes a cutoff set as `phonon,photon[,photon2]`.
pub fn format_cutoffs(c: &Cutoffs) -> String {
    let all = std::iter::once(c.phonon).chain(c.photon.iter().copied());
    all.map(|n| n.to_string()).collect::<Vec<_>>().join(",")
}

/// Parses a cutoff set written as `phonon,photon[,photon2]`.
pub fn parse_cutoffs(s: &str) -> Result<Cutoffs, String> {
    let parts: Result<Vec<usize>, _> = s.split(',').map(|x| x.trim().parse::<usize>()).collect();
    match parts.map_err(|e| format!("`{s}`: {e}"))?.as_slice() {
        [phonon, photon @ ..] if !photon.is_empty() => Ok(Cutoffs { phonon: *phonon, photon: photon.to_vec() }),
        _ => Err(format!("`{s}`: expected phonon,photon[,photon2]")),
    }
}
