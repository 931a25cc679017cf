use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fockspace::{embed, ladder, HilbertSpace, OperatorMatrix};
use crate::scalar::Real;

/// How the Gaussian envelope of a pulse is normalized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PulseNormalization {
    /// `G(0) = 1`, so the amplitude is the peak force.
    #[default]
    UnitPeak,
    /// `integral G = 1`, so the amplitude is the pulse area.
    UnitArea,
}

/// External force `F(t)` on the mirror.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DriveSpec<T> {
    /// `F(t) = A cos(omega_d t)`.
    Cw { amplitude: T, omega_d: T },
    /// `F(t) = A G(t - t0) cos(omega_d t)` with a Gaussian envelope of width `sigma`.
    GaussianPulse {
        amplitude: T,
        omega_d: T,
        sigma: T,
        t0: T,
        #[serde(default)]
        normalization: PulseNormalization,
    },
}

impl<T: Real> DriveSpec<T> {
    pub fn validate(&self) -> Result<()> {
        let (a, w, sigma) = match *self {
            DriveSpec::Cw { amplitude, omega_d } => (amplitude, omega_d, T::one()),
            DriveSpec::GaussianPulse { amplitude, omega_d, sigma, .. } => (amplitude, omega_d, sigma),
        };
        if a < T::zero() || w <= T::zero() || sigma <= T::zero() {
            return Err(Error::InvalidParameter(
                "drive needs amplitude >= 0, omega_d > 0 and sigma > 0".into(),
            ));
        }
        Ok(())
    }

    /// Interval outside which the force is below `1e-15` of its scale, if any.
    pub fn active_window(&self) -> Option<(T, T)> {
        match *self {
            DriveSpec::Cw { .. } => None,
            DriveSpec::GaussianPulse { sigma, t0, .. } => {
                let half = sigma * T::lit(8.5);
                Some((t0 - half, t0 + half))
            }
        }
    }

    /// Shortest time scale of the envelope.
    pub fn envelope_scale(&self) -> Option<T> {
        match *self {
            DriveSpec::Cw { .. } => None,
            DriveSpec::GaussianPulse { sigma, .. } => Some(sigma),
        }
    }
}

/// Value of the force at time `t`.
pub fn drive_amplitude<T: Real>(d: &DriveSpec<T>, t: T) -> T {
    match *d {
        DriveSpec::Cw { amplitude, omega_d } => amplitude * (omega_d * t).cos(),
        DriveSpec::GaussianPulse { amplitude, omega_d, sigma, t0, normalization } => {
            let x = (t - t0) / sigma;
            let mut env = (-(x * x) * T::lit(0.5)).exp();
            if normalization == PulseNormalization::UnitArea {
                env /= sigma * T::two_pi().sqrt();
            }
            amplitude * env * (omega_d * t).cos()
        }
    }
}

/// The mirror quadrature `b + b^dagger` of bosonic mode `mech_index`.
pub fn drive_term<T: Real>(space: &HilbertSpace, mech_index: usize) -> Result<OperatorMatrix<T>> {
    let slot = space.mode_slot(mech_index)?;
    let b = ladder::<T>(space.mode(mech_index)?.cutoff);
    let local = &b + b.transpose();
    OperatorMatrix::from_real(space.clone(), &embed(space, &[(slot, &local)]))
}
