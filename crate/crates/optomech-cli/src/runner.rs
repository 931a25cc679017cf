//! Execution of a parsed scenario into tables, a report and named scalars.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use anyhow::{bail, Context, Result};
use optomech::lindblad::{
    evolve, frequency_conversion_protocol, joint_excitation_check, spectrum_of, steady_state_time, InitialState,
    TrajectoryRecord,
};
use optomech::models::{bare_hamiltonian, transformed_hamiltonian, DriveSpec, LossRates, ModelParams};
use optomech::spectra::{eigensolve, sweep, CrossingReport};
use serde::Serialize;
use serde_json::{json, Value};

use crate::compare::compare_rates;
use crate::config::{DriveConfig, Frame, LossConfig, PulseWidth, ScenarioConfig, ScenarioKind};
use crate::locate::{find_crossing, tuned, Located};
use crate::output::{Cell, Table};

/// Pulse centre, in widths, when the config leaves it out.
const DEFAULT_PULSE_CENTER: f64 = 9.0;
/// Relative change per drive period below which a CW run counts as steady.
const STEADY_TOLERANCE: f64 = 1e-3;
/// Trailing share of the samples averaged into the `tail_mean_*` scalars.
const TAIL_FRACTION: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunOutcome {
    pub scenario: ScenarioKind,
    pub tables: Vec<Table>,
    pub report: Value,
    /// Scalar results addressable by name, e.g. from `converge`.
    pub scalars: BTreeMap<String, f64>,
}

impl RunOutcome {
    pub fn scalar(&self, name: &str) -> Result<f64> {
        match self.scalars.get(name) {
            Some(v) => Ok(*v),
            None => bail!(
                "scenario `{}` has no scalar `{name}`; available: {}",
                self.scenario,
                self.scalars.keys().cloned().collect::<Vec<_>>().join(", ")
            ),
        }
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }
}

pub fn execute(cfg: &ScenarioConfig) -> Result<RunOutcome> {
    let run = || match cfg.scenario {
        ScenarioKind::Spectrum => spectrum(cfg),
        ScenarioKind::Crossing => crossing(cfg),
        ScenarioKind::PerturbCompare => perturb_compare(cfg),
        ScenarioKind::Dynamics | ScenarioKind::JointExcitation => dynamics(cfg),
        ScenarioKind::FreqConversion => freq_conversion(cfg),
    };
    run().with_context(|| format!("{} scenario", cfg.scenario))
}

fn spectrum(cfg: &ScenarioConfig) -> Result<RunOutcome> {
    let s = cfg.sweep.as_ref().expect("validated");
    let p = cfg.params();
    let grid = s.grid();
    let (levels, continuity) = match cfg.numerics.frame {
        Frame::Bare => {
            let sw = sweep(&p, s.axis, &grid, s.levels)?;
            (sw.tracked_levels, Some(sw.overlap_continuity))
        }
        Frame::Transformed => {
            let space = p.space()?;
            let mut levels = vec![Vec::with_capacity(grid.len()); s.levels];
            for &x in &grid {
                let q = ModelParams { system: p.system.with(s.axis, x)?, ..p.clone() };
                let sol = eigensolve(&transformed_hamiltonian(&q, &space, cfg.numerics.series_order)?)?;
                if sol.dim() < s.levels {
                    bail!("space of dimension {} holds fewer than {} levels", sol.dim(), s.levels);
                }
                for (k, l) in levels.iter_mut().enumerate() {
                    l.push(sol.values[k] - sol.values[0]);
                }
            }
            (levels, None)
        }
    };
    let mut cols = vec![s.axis.name().to_string()];
    cols.extend((0..s.levels).map(|k| format!("level_{k}")));
    let mut t = Table::new("spectrum", cols);
    for (j, &x) in grid.iter().enumerate() {
        let mut row = vec![Cell::Num(x)];
        row.extend(levels.iter().map(|l| Cell::Num(l[j])));
        t.push(row);
    }
    let mut scalars = BTreeMap::new();
    for (k, l) in levels.iter().enumerate() {
        scalars.insert(format!("level_{k}"), l[0]);
        scalars.insert(format!("level_{k}_last"), l[l.len() - 1]);
    }
    let min_continuity = continuity.as_ref().map(|c| c.iter().cloned().fold(1.0, f64::min));
    let report = json!({
        "axis": s.axis,
        "points": grid.len(),
        "levels": s.levels,
        "frame": cfg.numerics.frame,
        "min_overlap_continuity": min_continuity,
    });
    Ok(RunOutcome { scenario: cfg.scenario, tables: vec![t], report, scalars })
}

fn crossing_scalars(r: &CrossingReport, scalars: &mut BTreeMap<String, f64>) {
    scalars.insert("splitting".into(), r.splitting);
    scalars.insert("axis_value_at_min".into(), r.axis_value_at_min);
    scalars.insert("resonance_order".into(), r.resonance_order as f64);
    for (state, name) in r.state_composition.iter().zip(["lower", "upper"]) {
        for (k, c) in state.iter().take(2).enumerate() {
            scalars.insert(format!("{name}_weight_{k}"), c.weight());
        }
    }
}

fn crossing(cfg: &ScenarioConfig) -> Result<RunOutcome> {
    let c = cfg.crossing.as_ref().expect("validated");
    let (loc, r) = find_crossing(&cfg.params(), c)?;
    let mut t = Table::new(
        "crossing",
        ["axis", "axis_value_at_min", "splitting", "lower_level", "upper_level", "resonance_order"]
            .iter()
            .map(|s| s.to_string())
            .chain((0..2).flat_map(|k| {
                ["lower", "upper"].into_iter().flat_map(move |s| [format!("{s}_label_{k}"), format!("{s}_amplitude_{k}")])
            }))
            .collect(),
    );
    let mut row = vec![
        Cell::Text(r.axis_name.clone()),
        Cell::Num(r.axis_value_at_min),
        Cell::Num(r.splitting),
        r.level_pair.0.into(),
        r.level_pair.1.into(),
        r.resonance_order.into(),
    ];
    for k in 0..2 {
        for state in &r.state_composition {
            match state.get(k) {
                Some(comp) => row.extend([Cell::Text(comp.label.clone()), Cell::Num(comp.re)]),
                None => row.extend([Cell::Empty, Cell::Empty]),
            }
        }
    }
    t.push(row);
    let mut scalars = BTreeMap::new();
    crossing_scalars(&r, &mut scalars);
    let report = json!({ "located": loc, "crossing": r });
    Ok(RunOutcome { scenario: cfg.scenario, tables: vec![t], report, scalars })
}

fn perturb_compare(cfg: &ScenarioConfig) -> Result<RunOutcome> {
    let (c, cmp) = (cfg.crossing.as_ref().expect("validated"), cfg.compare.as_ref().expect("validated"));
    let result = compare_rates(&cfg.params(), c, cmp)?;
    let mut scalars = BTreeMap::new();
    let all = (f64::NEG_INFINITY, f64::INFINITY);
    for f in &cmp.formulas {
        if let Some(e) = result.max_abs_error(f, all) {
            scalars.insert(format!("max_abs_rel_error_{f}"), e);
        }
        if let Some(e) = result.mean_abs_error(f, all) {
            scalars.insert(format!("mean_abs_rel_error_{f}"), e);
        }
    }
    for (k, r) in result.rows.iter().enumerate() {
        scalars.insert(format!("numeric_splitting_{k}"), r.numeric_splitting);
    }
    let report = serde_json::to_value(&result)?;
    Ok(RunOutcome { scenario: cfg.scenario, tables: vec![result.table()], report, scalars })
}

/// Model, rates and drive of a master-equation scenario after tuning.
struct Prepared {
    params: ModelParams<f64>,
    crossing: Option<(Located, CrossingReport)>,
    losses: LossRates<f64>,
    drive: Option<DriveSpec<f64>>,
    grid: Vec<f64>,
}

impl Prepared {
    fn coupling(&self) -> Option<f64> {
        self.crossing.as_ref().map(|(_, r)| r.splitting / 2.0)
    }

    fn pulse_end(&self) -> Option<f64> {
        self.drive.and_then(|d| d.active_window()).map(|(_, b)| b)
    }
}

fn prepare(cfg: &ScenarioConfig) -> Result<Prepared> {
    let mut params = cfg.params();
    let crossing = match &cfg.crossing {
        Some(c) => {
            let (loc, r) = find_crossing(&params, c)?;
            params = tuned(&params, &r, c.axis)?;
            Some((loc, r))
        }
        None => None,
    };
    let omega = crossing.as_ref().map(|(_, r)| r.splitting / 2.0);
    let kind = params.kind();
    let losses = match cfg.losses.as_ref().expect("validated") {
        LossConfig::Uniform { rate } => LossRates::uniform(kind, *rate),
        LossConfig::Channels { kappa, gamma, eta } => LossRates { kappa: kappa.clone(), gamma: *gamma, eta: eta.clone() },
        LossConfig::CouplingFraction { divisor } => LossRates::uniform(kind, omega.expect("validated") / divisor),
    };
    let drive = cfg.drive.as_ref().map(|d| match *d {
        DriveConfig::Cw { amplitude, omega_d } => DriveSpec::Cw { amplitude, omega_d },
        DriveConfig::GaussianPulse { amplitude, omega_d, sigma, t0, normalization } => {
            let sigma = match sigma {
                PulseWidth::Time(s) => s,
                PulseWidth::InverseCoupling { inverse_coupling } => 1.0 / (inverse_coupling * omega.expect("validated")),
            };
            let t0 = t0.unwrap_or(DEFAULT_PULSE_CENTER * sigma);
            DriveSpec::GaussianPulse { amplitude, omega_d, sigma, t0, normalization }
        }
    });
    let t = cfg.time.as_ref().expect("validated");
    let start = match (t.after_pulse, drive.and_then(|d| d.active_window())) {
        (true, Some((_, end))) => end,
        _ => 0.0,
    };
    let t_end = start + t.duration;
    let grid = (0..=t.samples).map(|k| t_end * k as f64 / t.samples as f64).collect();
    Ok(Prepared { params, crossing, losses, drive, grid })
}

fn trajectory_table(tr: &TrajectoryRecord) -> Table {
    let mut cols = vec!["time".to_string()];
    cols.extend(tr.observables.keys().cloned());
    cols.push("trace_deviation".into());
    let mut t = Table::new("trajectory", cols);
    for (k, &time) in tr.times.iter().enumerate() {
        let mut row = vec![Cell::Num(time)];
        row.extend(tr.observables.values().map(|v| Cell::Num(v[k])));
        row.push(Cell::Num(tr.trace_deviation[k]));
        t.push(row);
    }
    t
}

fn trajectory_summary(tr: &TrajectoryRecord, scalars: &mut BTreeMap<String, f64>) -> Value {
    for (name, v) in &tr.observables {
        scalars.insert(format!("max_{name}"), v.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
        scalars.insert(format!("final_{name}"), v[v.len() - 1]);
        let tail = &v[v.len() - ((v.len() as f64 * TAIL_FRACTION).ceil() as usize).max(1)..];
        scalars.insert(format!("tail_mean_{name}"), tail.iter().sum::<f64>() / tail.len() as f64);
    }
    scalars.insert("max_trace_deviation".into(), tr.max_trace_deviation());
    scalars.insert("min_eigenvalue".into(), tr.min_eigenvalue);
    scalars.insert("hermiticity_residual".into(), tr.hermiticity_residual);
    json!({
        "levels": tr.levels,
        "samples": tr.times.len(),
        "initial_weight": tr.initial_weight,
        "max_trace_deviation": tr.max_trace_deviation(),
        "hermiticity_residual": tr.hermiticity_residual,
        "min_eigenvalue": tr.min_eigenvalue,
        "final_rho_digest": tr.final_rho_digest,
        "steps_accepted": tr.steps_accepted,
        "steps_rejected": tr.steps_rejected,
        "rhs_evals": tr.rhs_evals,
    })
}

fn dynamics(cfg: &ScenarioConfig) -> Result<RunOutcome> {
    let prep = prepare(cfg)?;
    let initial = cfg.initial.clone().unwrap_or(InitialState::Ground);
    let tr = evolve(
        &prep.params,
        &prep.losses,
        prep.drive.as_ref(),
        cfg.schedule.as_ref(),
        &initial,
        &prep.grid,
        &cfg.numerics.evolve_options(),
    )?;
    let mut scalars = BTreeMap::new();
    let mut report = serde_json::Map::new();
    report.insert("system".into(), serde_json::to_value(prep.params.system)?);
    report.insert("losses".into(), serde_json::to_value(&prep.losses)?);
    report.insert("drive".into(), serde_json::to_value(prep.drive)?);
    if let Some((loc, r)) = &prep.crossing {
        crossing_scalars(r, &mut scalars);
        report.insert("crossing".into(), json!({ "located": loc, "crossing": r }));
    }
    report.insert("trajectory".into(), trajectory_summary(&tr, &mut scalars));

    if let Some(DriveSpec::Cw { omega_d, .. }) = prep.drive {
        let steady = steady_state_time(&tr, TAU / omega_d, STEADY_TOLERANCE);
        report.insert("steady_state_time".into(), json!(steady));
        if let Some(t) = steady {
            scalars.insert("steady_state_time".into(), t);
        }
    }

    let mut tables = vec![trajectory_table(&tr)];
    if let Some(f) = &cfg.fourier {
        let start = f.start.or(prep.pulse_end()).unwrap_or(0.0);
        let end = f.end.unwrap_or(prep.grid[prep.grid.len() - 1]);
        let sp = spectrum_of(&tr, &f.observable, (start, end), &f.options())?;
        if let Some(top) = sp.peaks.first() {
            scalars.insert("dominant_frequency".into(), top.frequency);
        }
        scalars.insert("frequency_resolution".into(), sp.resolution);
        let mut gaps = Vec::new();
        if !f.level_pairs.is_empty() {
            let sol = eigensolve(&bare_hamiltonian(&prep.params, &prep.params.space()?)?)?;
            for &[i, j] in &f.level_pairs {
                if j >= sol.dim() {
                    bail!("level {j} is outside the {}-dimensional space", sol.dim());
                }
                let gap = sol.values[j] - sol.values[i];
                scalars.insert(format!("gap_{i}_{j}"), gap);
                gaps.push(json!({ "levels": [i, j], "omega": gap }));
            }
        }
        let mut pt = Table::new("spectrum_peaks", vec!["frequency".into(), "magnitude".into()]);
        for p in &sp.peaks {
            pt.push(vec![Cell::Num(p.frequency), Cell::Num(p.magnitude)]);
        }
        tables.push(pt);
        report.insert(
            "fourier".into(),
            json!({ "observable": f.observable, "window": [start, end], "spectrum": sp, "level_gaps": gaps }),
        );
    }

    if cfg.scenario == ScenarioKind::JointExcitation {
        let tol = cfg.joint.as_ref().map_or(0.05, |j| j.tolerance);
        let j = joint_excitation_check(&tr, tol)?;
        scalars.insert("max_deviation_1".into(), j.max_deviation[0]);
        scalars.insert("max_deviation_2".into(), j.max_deviation[1]);
        scalars.insert("max_excitation".into(), j.max_excitation);
        if j.max_excitation > 0.0 {
            scalars.insert("relative_deviation".into(), j.max_deviation[0].max(j.max_deviation[1]) / j.max_excitation);
        }
        report.insert("joint_excitation".into(), serde_json::to_value(&j)?);
    }
    Ok(RunOutcome { scenario: cfg.scenario, tables, report: Value::Object(report), scalars })
}

fn freq_conversion(cfg: &ScenarioConfig) -> Result<RunOutcome> {
    let prep = prepare(cfg)?;
    let protocol = cfg.protocol.as_ref().expect("validated");
    let out = frequency_conversion_protocol(
        &prep.params,
        &prep.losses,
        protocol,
        &prep.grid,
        &cfg.numerics.evolve_options(),
    )?;
    let mut scalars = BTreeMap::new();
    if let Some((_, r)) = &prep.crossing {
        crossing_scalars(r, &mut scalars);
    }
    let summary = trajectory_summary(&out.trajectory, &mut scalars);
    scalars.insert("conversion_splitting".into(), out.splitting);
    scalars.insert("omega_a0".into(), out.omega_a0);
    scalars.insert("t_off".into(), out.t_off);
    scalars.insert("peak_mode1".into(), out.peak_mode1);
    scalars.insert("initial_mode2".into(), out.initial_mode2);
    if out.initial_mode2 > 0.0 {
        scalars.insert("transfer_ratio".into(), out.peak_mode1 / out.initial_mode2);
    }
    let report = json!({
        "system": prep.params.system,
        "losses": prep.losses,
        "coupling": prep.coupling(),
        "crossing": prep.crossing.as_ref().map(|(loc, r)| json!({ "located": loc, "crossing": r })),
        "omega_a0": out.omega_a0,
        "splitting": out.splitting,
        "t_on": out.t_on,
        "t_off": out.t_off,
        "peak_mode1": out.peak_mode1,
        "initial_mode2": out.initial_mode2,
        "trajectory": summary,
    });
    Ok(RunOutcome { scenario: cfg.scenario, tables: vec![trajectory_table(&out.trajectory)], report, scalars })
}
