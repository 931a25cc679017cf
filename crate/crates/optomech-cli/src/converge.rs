//! Cutoff-ladder convergence of scalar scenario outputs.

use anyhow::{bail, Result};
use optomech::models::Cutoffs;
use serde::Serialize;

use crate::config::{format_cutoffs, ScenarioConfig};
use crate::output::{Cell, Table};
use crate::runner::execute;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub cutoffs: Cutoffs,
    pub value: f64,
    /// Change relative to the previous rung.
    pub relative_change: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceTable {
    pub quantity: String,
    pub rows: Vec<ConvergenceRow>,
    pub final_relative_change: f64,
    pub tolerance: f64,
    pub converged: bool,
}

fn relative_change(prev: f64, next: f64) -> f64 {
    let d = (next - prev).abs();
    if d == 0.0 {
        0.0
    } else if prev == 0.0 {
        f64::INFINITY
    } else {
        d / prev.abs()
    }
}

/// Reruns `cfg` at every cutoff set of `ladder` and tabulates each quantity.
pub fn converge(
    cfg: &ScenarioConfig,
    quantities: &[String],
    ladder: &[Cutoffs],
    tolerance: f64,
) -> Result<Vec<ConvergenceTable>> {
    if ladder.len() < 2 {
        bail!("a convergence ladder needs at least two cutoff sets");
    }
    let mut values = vec![Vec::with_capacity(ladder.len()); quantities.len()];
    for c in ladder {
        let rung = cfg.with_cutoffs(c.clone());
        rung.validate()?;
        let out = execute(&rung)?;
        for (q, v) in quantities.iter().zip(values.iter_mut()) {
            v.push(out.scalar(q)?);
        }
    }
    Ok(quantities
        .iter()
        .zip(values)
        .map(|(q, v)| {
            let rows: Vec<ConvergenceRow> = ladder
                .iter()
                .enumerate()
                .map(|(k, c)| ConvergenceRow {
                    cutoffs: c.clone(),
                    value: v[k],
                    relative_change: (k > 0).then(|| relative_change(v[k - 1], v[k])),
                })
                .collect();
            let last = rows.last().and_then(|r| r.relative_change).unwrap_or(0.0);
            ConvergenceTable {
                quantity: q.clone(),
                rows,
                final_relative_change: last,
                tolerance,
                converged: last < tolerance,
            }
        })
        .collect())
}

pub fn convergence_table(tables: &[ConvergenceTable]) -> Table {
    let cols = ["quantity", "cutoffs", "value", "relative_change"].map(String::from).to_vec();
    let mut t = Table::new("convergence", cols);
    for c in tables {
        for r in &c.rows {
            let cut = Cell::Text(format_cutoffs(&r.cutoffs));
            t.push(vec![Cell::Text(c.quantity.clone()), cut, Cell::Num(r.value), r.relative_change.into()]);
        }
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relative_change_edges() {
        assert_eq!(relative_change(0.0, 0.0), 0.0);
        assert_eq!(relative_change(0.0, 1.0), f64::INFINITY);
        assert!((relative_change(2.0, 2.02) - 0.01).abs() < 1e-12);
    }
}
