//! Numeric splittings against the closed-form rates over a parameter grid.

use anyhow::{Context, Result};
use optomech::models::{ModelParams, Param, System};
use optomech::perturb::{
    rate_freq_conversion, rate_g10_e01, rate_g20_e01, rate_rabi_comparison, rate_two_atom, CouplingEstimate, RabiMethod,
};
use optomech::Error;
use serde::Serialize;

use crate::config::{CompareConfig, CrossingConfig};
use crate::locate::find_crossing;
use crate::output::{Cell, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Formula {
    G10E01,
    G20E01,
    FreqConversion,
    TwoAtom,
    Rabi(RabiMethod),
}

impl Formula {
    pub fn parse(name: &str) -> optomech::Result<Self> {
        Ok(match name {
            "g10_e01" => Formula::G10E01,
            "g20_e01" => Formula::G20E01,
            "freq_conversion" => Formula::FreqConversion,
            "two_atom" => Formula::TwoAtom,
            other => Formula::Rabi(other.parse()?),
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Formula::G10E01 => "g10_e01",
            Formula::G20E01 => "g20_e01",
            Formula::FreqConversion => "freq_conversion",
            Formula::TwoAtom => "two_atom",
            Formula::Rabi(m) => m.formula().name(),
        }
    }

    pub fn evaluate(self, p: &System<f64>) -> optomech::Result<CouplingEstimate<f64>> {
        match self {
            Formula::G10E01 => rate_g10_e01(p),
            Formula::G20E01 => rate_g20_e01(p),
            Formula::FreqConversion => rate_freq_conversion(p),
            Formula::TwoAtom => rate_two_atom(p),
            Formula::Rabi(m) => rate_rabi_comparison(p, m),
        }
    }
}

/// One formula at one grid point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FormulaValue {
    pub formula: String,
    /// `|2 Omega|`; absent when a denominator is singular.
    pub splitting: Option<f64>,
    /// `(analytic - numeric) / numeric`.
    pub relative_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareRow {
    pub value: f64,
    pub axis_value_at_min: f64,
    pub numeric_splitting: f64,
    pub formulas: Vec<FormulaValue>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub param: Param,
    pub crossing_axis: Param,
    pub rows: Vec<CompareRow>,
}

impl Comparison {
    /// Largest `|relative error|` of `formula` over rows whose parameter lies in `range`.
    pub fn max_abs_error(&self, formula: &str, range: (f64, f64)) -> Option<f64> {
        self.errors(formula, range).map(f64::abs).reduce(f64::max)
    }

    pub fn mean_abs_error(&self, formula: &str, range: (f64, f64)) -> Option<f64> {
        let e: Vec<f64> = self.errors(formula, range).map(f64::abs).collect();
        (!e.is_empty()).then(|| e.iter().sum::<f64>() / e.len() as f64)
    }

    fn errors<'a>(&'a self, formula: &'a str, range: (f64, f64)) -> impl Iterator<Item = f64> + 'a {
        self.rows
            .iter()
            .filter(move |r| r.value >= range.0 - 1e-12 && r.value <= range.1 + 1e-12)
            .flat_map(move |r| r.formulas.iter().filter(move |f| f.formula == formula))
            .filter_map(|f| f.relative_error)
    }

    pub fn value(&self, row: usize, formula: &str) -> Option<f64> {
        self.rows.get(row)?.formulas.iter().find(|f| f.formula == formula)?.splitting
    }

    pub fn table(&self) -> Table {
        let formulas: Vec<&str> = self.rows.first().map_or(vec![], |r| r.formulas.iter().map(|f| f.formula.as_str()).collect());
        let mut cols = vec![self.param.name().to_string(), format!("{}_at_min", self.crossing_axis.name()), "numeric_splitting".into()];
        for f in &formulas {
            cols.push(format!("{f}_splitting"));
            cols.push(format!("{f}_rel_error"));
        }
        cols.push("notes".into());
        let mut t = Table::new("compare", cols);
        for r in &self.rows {
            let mut row = vec![Cell::Num(r.value), Cell::Num(r.axis_value_at_min), Cell::Num(r.numeric_splitting)];
            for f in &r.formulas {
                row.push(f.splitting.into());
                row.push(f.relative_error.into());
            }
            row.push(Cell::Text(r.notes.join("; ")));
            t.push(row);
        }
        t
    }
}

/// Numeric splittings below this are treated as an exact crossing, where a
/// relative error is undefined.
pub const SPLITTING_FLOOR: f64 = 1e-9;

/// Runs the crossing search at every grid value and evaluates each formula
/// at the located minimum.
pub fn compare_rates(p: &ModelParams<f64>, crossing: &CrossingConfig, cfg: &CompareConfig) -> Result<Comparison> {
    let formulas: Vec<Formula> = cfg.formulas.iter().map(|f| Formula::parse(f)).collect::<optomech::Result<_>>()?;
    let mut rows = Vec::with_capacity(cfg.values.len());
    for &v in &cfg.values {
        let q = ModelParams { system: p.system.with(cfg.param, v)?, ..p.clone() };
        let (_, report) = find_crossing(&q, crossing).with_context(|| format!("{} = {v}", cfg.param.name()))?;
        let numeric = report.splitting;
        let at_min = q.system.with(crossing.axis, report.axis_value_at_min)?;
        let mut notes = Vec::new();
        let mut values = Vec::with_capacity(formulas.len());
        for f in &formulas {
            let splitting = match f.evaluate(&at_min) {
                Ok(e) => Some(e.splitting().abs()),
                Err(e @ Error::SingularDenominator { .. }) => {
                    notes.push(e.to_string());
                    None
                }
                Err(e) => return Err(e).with_context(|| format!("formula `{}`", f.name())),
            };
            let relative_error = splitting.filter(|_| numeric > SPLITTING_FLOOR).map(|s| (s - numeric) / numeric);
            values.push(FormulaValue { formula: f.name().to_string(), splitting, relative_error });
        }
        rows.push(CompareRow {
            value: v,
            axis_value_at_min: report.axis_value_at_min,
            numeric_splitting: numeric,
            formulas: values,
            notes,
        });
    }
    Ok(Comparison { param: cfg.param, crossing_axis: crossing.axis, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formula_names_round_trip() {
        for name in ["g10_e01", "g20_e01", "freq_conversion", "two_atom", "dce_only_displaced", "two_photon_polaron"] {
            assert_eq!(Formula::parse(name).unwrap().name(), name);
        }
        assert!(Formula::parse("eq99").is_err());
    }

    #[test]
    fn zero_coupling_row_is_all_zero() {
        let p = ModelParams::new(System::SingleAtomSingleMode { omega_c: 0.6, omega_a: 0.4, g: 0.03, lambda: 0.0 });
        let crossing = CrossingConfig {
            axis: Param::OmegaC,
            bracket: None,
            level_pair: None,
            states: Some([vec![0, 1, 0], vec![1, 0, 1]]),
            half_width: Some(0.05),
        };
        let cfg = CompareConfig { param: Param::G, values: vec![0.03], formulas: vec!["g10_e01".into()] };
        let c = compare_rates(&p, &crossing, &cfg).unwrap();
        assert!(c.rows[0].numeric_splitting < 1e-8);
        assert_eq!(c.value(0, "g10_e01"), Some(0.0));
        assert_eq!(c.rows[0].formulas[0].relative_error, None);
    }
}
