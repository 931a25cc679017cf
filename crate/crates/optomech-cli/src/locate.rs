//! Resolving a `crossing` section into a bracket and a level pair.

use anyhow::{anyhow, bail, Context, Result};
use optomech::models::{bare_hamiltonian, ModelParams, Param};
use optomech::spectra::{eigensolve, find_min_splitting, unperturbed_energy, CrossingReport};
use serde::Serialize;

use crate::config::CrossingConfig;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Located {
    pub axis: Param,
    pub bracket: (f64, f64),
    pub level_pair: (usize, usize),
    /// Axis value at which the unperturbed energies of the named states meet.
    pub resonance: Option<f64>,
}

/// Axis value where the unperturbed energies of `a` and `b` coincide.
pub fn unperturbed_resonance(p: &ModelParams<f64>, axis: Param, a: &[usize], b: &[usize]) -> Result<f64> {
    let f = |x: f64| -> Result<f64> {
        let q = ModelParams { system: p.system.with(axis, x)?, ..p.clone() };
        Ok(unperturbed_energy(&q, a)? - unperturbed_energy(&q, b)?)
    };
    let mut x0 = p.system.get(axis)?;
    let mut x1 = x0 + 0.01;
    let (mut f0, mut f1) = (f(x0)?, f(x1)?);
    for _ in 0..60 {
        if f1 == 0.0 {
            return Ok(x1);
        }
        if (f1 - f0).abs() < 1e-15 {
            bail!("the energies of {a:?} and {b:?} do not cross along `{}`", axis.name());
        }
        let x2 = x1 - f1 * (x1 - x0) / (f1 - f0);
        (x0, f0) = (x1, f1);
        x1 = x2;
        f1 = f(x1)?;
        if (x1 - x0).abs() < 1e-13 {
            return Ok(x1);
        }
    }
    bail!("resonance search along `{}` did not settle", axis.name())
}

/// The two adjacent eigenstates carrying most of the weight of `a` and `b`.
pub fn dominant_pair(p: &ModelParams<f64>, a: &[usize], b: &[usize]) -> Result<(usize, usize)> {
    let space = p.space()?;
    let sol = eigensolve(&bare_hamiltonian(p, &space)?)?;
    let (ia, ib) = (space.index_of(a)?, space.index_of(b)?);
    let mut w: Vec<(usize, f64)> = (0..sol.dim())
        .map(|k| (k, sol.vectors[(ia, k)].norm_sqr() + sol.vectors[(ib, k)].norm_sqr()))
        .collect();
    w.sort_by(|x, y| y.1.total_cmp(&x.1));
    let (i, j) = (w[0].0.min(w[1].0), w[0].0.max(w[1].0));
    if j != i + 1 {
        bail!("states {a:?} and {b:?} are spread over levels {i} and {j}, which are not adjacent");
    }
    Ok((i, j))
}

pub fn locate(p: &ModelParams<f64>, c: &CrossingConfig) -> Result<Located> {
    let resonance = match &c.states {
        Some([a, b]) => Some(unperturbed_resonance(p, c.axis, a, b)?),
        None => None,
    };
    let bracket = match (c.bracket, resonance, c.half_width) {
        (Some([lo, hi]), _, _) => (lo, hi),
        (None, Some(x), Some(w)) => (x - w, x + w),
        _ => bail!("crossing section gives neither a bracket nor states with a half-width"),
    };
    let level_pair = match (c.level_pair, &c.states, resonance) {
        (Some([i, j]), _, _) => (i, j),
        (None, Some([a, b]), Some(x)) => {
            let q = ModelParams { system: p.system.with(c.axis, x)?, ..p.clone() };
            dominant_pair(&q, a, b)?
        }
        _ => bail!("crossing section gives neither a level pair nor states"),
    };
    Ok(Located { axis: c.axis, bracket, level_pair, resonance })
}

/// Locates and refines the crossing described by `c`.
pub fn find_crossing(p: &ModelParams<f64>, c: &CrossingConfig) -> Result<(Located, CrossingReport)> {
    let loc = locate(p, c)?;
    let report = find_min_splitting(p, c.axis, loc.bracket, loc.level_pair)
        .with_context(|| format!("levels {:?} along `{}`", loc.level_pair, c.axis.name()))?;
    Ok((loc, report))
}

/// `p` with the crossing axis moved to the minimum of the splitting.
pub fn tuned(p: &ModelParams<f64>, report: &CrossingReport, axis: Param) -> Result<ModelParams<f64>> {
    let system = p.system.with(axis, report.axis_value_at_min).map_err(|e| anyhow!(e))?;
    Ok(ModelParams { system, ..p.clone() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use optomech::models::System;

    fn detuned_single() -> ModelParams<f64> {
        ModelParams::new(System::SingleAtomSingleMode { omega_c: 0.5, omega_a: 0.4, g: 0.03, lambda: 0.005 })
    }

    #[test]
    fn resonance_includes_kerr_shift() {
        let x = unperturbed_resonance(&detuned_single(), Param::OmegaC, &[0, 1, 0], &[1, 0, 1]).unwrap();
        assert!((x - (0.6 + 0.03f64.powi(2))).abs() < 1e-12, "{x}");
    }

    #[test]
    fn states_pick_the_pair() {
        let c = CrossingConfig {
            axis: Param::OmegaC,
            bracket: None,
            level_pair: None,
            states: Some([vec![0, 1, 0], vec![1, 0, 1]]),
            half_width: Some(0.05),
        };
        let loc = locate(&detuned_single(), &c).unwrap();
        assert_eq!(loc.level_pair, (3, 4));
        let (_, r) = find_crossing(&detuned_single(), &c).unwrap();
        assert!((r.splitting - 1.83e-3).abs() < 0.05 * 1.83e-3);
    }

    #[test]
    fn untunable_states_are_rejected() {
        assert!(unperturbed_resonance(&detuned_single(), Param::OmegaA, &[0, 1, 0], &[0, 0, 1]).is_err());
    }
}
