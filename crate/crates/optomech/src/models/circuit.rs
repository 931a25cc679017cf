use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Mechanical resonator coupled to a charge qubit that is itself coupled to a
/// microwave resonator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircuitParams<T> {
    pub g_m: T,
    pub g_c: T,
    pub omega_q: T,
    pub omega_c: T,
}

/// Effective optomechanical rate `g = 2 g_m g_c^2 / (omega_q - omega_c)^2`
/// obtained after eliminating the dispersively detuned qubit.
pub fn charge_qubit_g<T: Real>(c: &CircuitParams<T>) -> Result<T> {
    let detuning = c.omega_q - c.omega_c;
    if detuning.abs() < T::lit(1e-12) {
        return Err(Error::DegenerateDetuning { detuning: detuning.abs().as_f64() });
    }
    Ok(T::lit(2.0) * c.g_m * c.g_c * c.g_c / (detuning * detuning))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circuit(g_m: f64, g_c: f64, omega_q: f64) -> CircuitParams<f64> {
        CircuitParams { g_m, g_c, omega_q, omega_c: 1.0 }
    }

    #[test]
    fn closed_form() {
        assert_eq!(charge_qubit_g(&circuit(1.0, 1.0, 3.0)).unwrap(), 0.5);
        assert_eq!(charge_qubit_g(&circuit(1.0, 0.0, 3.0)).unwrap(), 0.0);
        assert_eq!(charge_qubit_g(&circuit(0.0, 1.0, 3.0)).unwrap(), 0.0);
    }

    #[test]
    fn degenerate_detuning() {
        assert!(matches!(
            charge_qubit_g(&circuit(1.0, 1.0, 1.0)),
            Err(Error::DegenerateDetuning { .. })
        ));
    }
}
