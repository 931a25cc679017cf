//! Closed-form perturbative coupling rates between near-degenerate states.
//!
//! Every rate is a half-splitting `Omega` in units of the mirror frequency;
//! the corresponding level splitting is `2 Omega`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{ModelKind, System};
use crate::scalar::Real;

/// Smallest denominator magnitude accepted before a rate is declared singular.
pub const SINGULAR_GUARD: f64 = 1e-6;

/// Which closed form produced a rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormulaId {
    /// `|g,1,0> <-> |e,0,1>` through pair creation and the counter-rotating term.
    G10E01,
    /// `|g,2,0> <-> |e,0,1>`.
    G20E01,
    /// `(|g,1,0,0> - |g,0,0,2>)/sqrt2 <-> |e,0,1,0>` in the two-mode cavity.
    FreqConversion,
    /// `|g,g,1,0> <-> |e,e,0,0>`.
    TwoAtom,
    DceOnlyDisplaced,
    DceOnlyPolaron,
    TwoPhotonCorrected,
    TwoPhotonPolaron,
}

impl FormulaId {
    pub fn name(self) -> &'static str {
        match self {
            FormulaId::G10E01 => "g10_e01",
            FormulaId::G20E01 => "g20_e01",
            FormulaId::FreqConversion => "freq_conversion",
            FormulaId::TwoAtom => "two_atom",
            FormulaId::DceOnlyDisplaced => "dce_only_displaced",
            FormulaId::DceOnlyPolaron => "dce_only_polaron",
            FormulaId::TwoPhotonCorrected => "two_photon_corrected",
            FormulaId::TwoPhotonPolaron => "two_photon_polaron",
        }
    }
}

impl fmt::Display for FormulaId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Alternative estimates of the single-atom coupling used for method comparisons.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RabiMethod {
    /// Pair-creation path only, with displaced phonon states and unshifted couplings.
    DceOnlyDisplaced,
    /// Pair-creation path only, in the polaron frame.
    DceOnlyPolaron,
    /// Two-photon Rabi coupling with displacement matrix elements restored.
    TwoPhotonCorrected,
    /// Two-photon Rabi coupling in the polaron frame.
    TwoPhotonPolaron,
}

impl RabiMethod {
    pub const ALL: [RabiMethod; 4] = [
        RabiMethod::DceOnlyDisplaced,
        RabiMethod::DceOnlyPolaron,
        RabiMethod::TwoPhotonCorrected,
        RabiMethod::TwoPhotonPolaron,
    ];

    pub fn formula(self) -> FormulaId {
        match self {
            RabiMethod::DceOnlyDisplaced => FormulaId::DceOnlyDisplaced,
            RabiMethod::DceOnlyPolaron => FormulaId::DceOnlyPolaron,
            RabiMethod::TwoPhotonCorrected => FormulaId::TwoPhotonCorrected,
            RabiMethod::TwoPhotonPolaron => FormulaId::TwoPhotonPolaron,
        }
    }
}

impl FromStr for RabiMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        RabiMethod::ALL
            .into_iter()
            .find(|m| m.formula().name() == s)
            .ok_or_else(|| Error::UnknownMethod(s.to_string()))
    }
}

/// A perturbative rate together with the inputs it was evaluated at.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingEstimate<T> {
    pub omega_eff: T,
    pub formula_id: FormulaId,
    pub inputs: System<T>,
}

impl<T: Real> CouplingEstimate<T> {
    pub fn splitting(&self) -> T {
        self.omega_eff * T::lit(2.0)
    }
}

fn den<T: Real>(formula: FormulaId, value: T) -> Result<T> {
    if value.abs() <= T::lit(SINGULAR_GUARD) || !value.is_finite() {
        return Err(Error::SingularDenominator { formula: formula.name(), value: value.as_f64() });
    }
    Ok(value)
}

fn expect_kind<T: Real>(p: &System<T>, kind: ModelKind) -> Result<()> {
    if p.kind() != kind {
        return Err(Error::WrongModel { expected: kind.name(), found: p.kind().name() });
    }
    Ok(())
}

fn single<T: Real>(p: &System<T>) -> Result<(T, T, T, T)> {
    expect_kind(p, ModelKind::SingleAtomSingleMode)?;
    match *p {
        System::SingleAtomSingleMode { omega_c, omega_a, g, lambda } => Ok((omega_c, omega_a, g, lambda)),
        _ => unreachable!(),
    }
}

fn estimate<T: Real>(omega_eff: T, formula_id: FormulaId, p: &System<T>) -> CouplingEstimate<T> {
    CouplingEstimate { omega_eff, formula_id, inputs: *p }
}

fn dce_polaron<T: Real>(id: FormulaId, omega_c: T, g: T, lambda: T) -> Result<T> {
    let sqrt2 = T::lit(2f64.sqrt());
    let d = den(id, T::one() - T::lit(2.0) * omega_c + T::lit(4.0) * g * g)?;
    Ok(lambda * g * (sqrt2 - sqrt2 * g * g * T::lit(0.5)) * (sqrt2 * T::lit(0.5) + sqrt2 * g * g) / d)
}

/// Coupling between `|g,1,0>` and `|e,0,1>` near `omega_c + omega_a = omega_m`.
pub fn rate_g10_e01<T: Real>(p: &System<T>) -> Result<CouplingEstimate<T>> {
    let (omega_c, _, g, lambda) = single(p)?;
    let omega = dce_polaron(FormulaId::G10E01, omega_c, g, lambda)? - lambda * g + lambda * g.powi(3) * T::lit(0.5);
    Ok(estimate(omega, FormulaId::G10E01, p))
}

/// Coupling between `|g,2,0>` and `|e,0,1>` near `omega_c + omega_a = 2 omega_m`.
pub fn rate_g20_e01<T: Real>(p: &System<T>) -> Result<CouplingEstimate<T>> {
    let (omega_c, _, g, lambda) = single(p)?;
    let id = FormulaId::G20E01;
    let sqrt2 = T::lit(2f64.sqrt());
    let g2 = g * g;
    let d1 = den(id, T::one() - omega_c + T::lit(2.0) * g2)?;
    let d2 = den(id, T::one() - T::lit(2.0) * omega_c + T::lit(4.0) * g2)?;
    let pair = g2 * lambda * (sqrt2 - sqrt2 * g2 * T::lit(0.5));
    let omega = -pair / d1 + pair / d2 + sqrt2 * lambda * g2 * T::lit(0.5);
    Ok(estimate(omega, id, p))
}

/// Coupling that converts a mirror phonon into an excitation of the atom via
/// the second cavity mode.
pub fn rate_freq_conversion<T: Real>(p: &System<T>) -> Result<CouplingEstimate<T>> {
    expect_kind(p, ModelKind::SingleAtomTwoModes)?;
    let System::SingleAtomTwoModes { omega_c1, omega_c2, g, lambda, .. } = *p else { unreachable!() };
    let id = FormulaId::FreqConversion;
    let c2 = omega_c2 / omega_c1;
    let one_c2 = T::one() + c2;
    let sqrt2 = T::lit(2f64.sqrt());
    let two = T::lit(2.0);
    let d = den(id, two * (omega_c2 - omega_c1) - T::lit(4.0) * g * g * (c2 * c2 - T::one()))?;
    let num = -lambda
        * (T::one() - one_c2 * g * g * T::lit(0.5))
        * (two * g * g * c2 + sqrt2 * g * T::lit(0.5) + one_c2 * one_c2 * g.powi(3) * sqrt2);
    let direct = -(-g * lambda + one_c2 * one_c2 * lambda * g.powi(3) * T::lit(0.5)) / sqrt2;
    Ok(estimate(num / d + direct, id, p))
}

/// Coupling between `|g,g,1,0>` and `|e,e,0,0>` for two atoms in one cavity.
pub fn rate_two_atom<T: Real>(p: &System<T>) -> Result<CouplingEstimate<T>> {
    expect_kind(p, ModelKind::TwoAtomsSingleMode)?;
    let System::TwoAtomsSingleMode { omega_c, omega_a1, omega_a2, g, lambda1, lambda2 } = *p else { unreachable!() };
    let id = FormulaId::TwoAtom;
    let g2 = g * g;
    let half = T::lit(0.5);
    let shrink = T::one() - g2 * half;
    let t1 = g * lambda1 * lambda2 * shrink * (-T::one() + g2 * half);
    let t3 = T::lit(2.0) * g * lambda1 * lambda2 * shrink * shrink * (half + g2);
    let d1 = den(id, T::one() - omega_c - omega_a1 + g2)?;
    let d2 = den(id, T::one() - omega_c - omega_a2 + g2)?;
    let d3 = den(id, T::one() - T::lit(2.0) * omega_c + T::lit(4.0) * g2)?;
    let omega = t1 / d1 + t1 / d2 + t3 / (d1 * d3) + t3 / (d2 * d3);
    Ok(estimate(omega, id, p))
}

/// `<k_out| exp[alpha (b - b^dagger)] |k_in>` for real `alpha`.
pub fn displacement_element<T: Real>(k_out: usize, k_in: usize, alpha: T) -> T {
    if k_out < k_in {
        return displacement_element(k_in, k_out, -alpha);
    }
    let m = k_out - k_in;
    let x = alpha * alpha;
    // L_k^(m)(x) by the three-term recurrence in k.
    let mut l_prev = T::one();
    let mut l = T::one() + T::from_count(m) - x;
    if k_in == 0 {
        l = l_prev;
    } else {
        for j in 1..k_in {
            let jj = T::from_count(j);
            let next = ((T::lit(2.0) * jj + T::one() + T::from_count(m) - x) * l - (jj + T::from_count(m)) * l_prev)
                / (jj + T::one());
            l_prev = l;
            l = next;
        }
    }
    let mut ratio = T::one();
    for j in (k_in + 1)..=k_out {
        ratio /= T::from_count(j);
    }
    ratio.sqrt() * (-alpha).powi(m as i32) * (-x * T::lit(0.5)).exp() * l
}

/// One of the alternative single-atom coupling estimates.
pub fn rate_rabi_comparison<T: Real>(p: &System<T>, method: RabiMethod) -> Result<CouplingEstimate<T>> {
    let (omega_c, omega_a, g, lambda) = single(p)?;
    let id = method.formula();
    let g2 = g * g;
    let beta = g;
    let two = T::lit(2.0);
    let dce_den = || den(id, T::one() - two * omega_c + T::lit(4.0) * g2);
    let omega = match method {
        RabiMethod::DceOnlyPolaron => {
            dce_polaron(id, omega_c, g, lambda)?
        }
        RabiMethod::DceOnlyDisplaced => {
            let sqrt2 = T::lit(2f64.sqrt());
            let d = dce_den()?;
            let inner = sqrt2 * T::lit(0.5) * g * displacement_element(0, 0, -two * beta)
                + g * displacement_element(0, 2, -two * beta);
            sqrt2 * lambda * displacement_element(0, 0, beta) * inner / d
        }
        RabiMethod::TwoPhotonCorrected => {
            let d1 = den(id, -omega_a - two * omega_c + T::lit(4.0) * g2)?;
            let d2 = dce_den()?;
            let first = (g * lambda * displacement_element(0, 0, two * beta)
                - two * g * lambda * beta * displacement_element(0, 1, two * beta))
                * displacement_element(1, 1, -two * beta);
            first / d1 + lambda * g * displacement_element(0, 0, two * beta) * displacement_element(0, 0, -two * beta) / d2
        }
        RabiMethod::TwoPhotonPolaron => {
            let d1 = den(id, -omega_a - two * omega_c + T::lit(4.0) * g2)?;
            let d2 = dce_den()?;
            let g3 = g2 * g;
            (lambda * g - T::lit(6.0) * lambda * g3) / d1 + (lambda * g + two * lambda * g3) / d2
        }
    };
    Ok(estimate(omega, id, p))
}
