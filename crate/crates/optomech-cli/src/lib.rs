//! Scenario runner for the `optomech` engine.
//!
//! A run reads one JSON [`ScenarioConfig`], executes it, and writes CSV tables,
//! a JSON report and a [`RunManifest`] below the output root.

pub mod compare;
pub mod config;
pub mod converge;
pub mod locate;
pub mod manifest;
pub mod output;
pub mod runner;

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use optomech::models::Cutoffs;
use serde_json::json;

pub use config::{ConfigError, ScenarioConfig, ScenarioKind};
pub use converge::{converge, ConvergenceTable};
pub use manifest::{ConvergenceEntry, RunManifest, CODE_VERSION};
pub use runner::{execute, RunOutcome};

use config::OutputFormat;
use output::{to_json, write_atomic, Table};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOptions {
    pub out_root: PathBuf,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub outcome: Option<RunOutcome>,
    pub convergence: Vec<ConvergenceTable>,
    pub manifest: RunManifest,
    pub dir: PathBuf,
}

impl RunResult {
    /// Whether every requested quantity was produced and converged.
    pub fn success(&self) -> bool {
        self.manifest.converged
    }
}

/// Sizes the global worker pool; `None` keeps the default of one thread per core.
pub fn configure_threads(threads: Option<usize>) -> Result<()> {
    if let Some(n) = threads {
        if n == 0 {
            bail!("--threads must be at least 1");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("configuring worker threads")?;
    }
    Ok(())
}

struct Writer<'a> {
    cfg: &'a ScenarioConfig,
    dir: PathBuf,
    digest: String,
    outputs: Vec<String>,
}

impl<'a> Writer<'a> {
    fn new(cfg: &'a ScenarioConfig, dir: PathBuf) -> Self {
        Self { cfg, dir, digest: cfg.digest(), outputs: Vec::new() }
    }

    fn comments(&self) -> Vec<String> {
        vec![format!("config_sha256={}", self.digest), format!("scenario={}", self.cfg.scenario)]
    }

    fn csv(&mut self, t: &Table) -> Result<()> {
        let name = format!("{}.csv", t.name);
        write_atomic(&self.dir.join(&name), &t.to_csv(&self.comments())?).with_context(|| format!("writing {name}"))?;
        self.outputs.push(name);
        Ok(())
    }

    fn json(&mut self, name: &str, value: &impl serde::Serialize) -> Result<()> {
        write_atomic(&self.dir.join(name), &to_json(value)?).with_context(|| format!("writing {name}"))?;
        self.outputs.push(name.to_string());
        Ok(())
    }

    fn finish(self, config_path: &Path, started: Instant, opts: &RunOptions, convergence: &[ConvergenceTable]) -> Result<RunManifest> {
        let manifest = RunManifest {
            config_path: config_path.display().to_string(),
            config_digest: self.digest.clone(),
            scenario: self.cfg.scenario,
            code_version: CODE_VERSION.to_string(),
            wall_time_seconds: started.elapsed().as_secs_f64(),
            threads: rayon::current_num_threads(),
            seed: opts.seed,
            convergence: convergence.iter().map(ConvergenceEntry::from).collect(),
            converged: convergence.iter().all(|c| c.converged),
            outputs: self.outputs,
        };
        write_atomic(&self.dir.join("manifest.json"), &to_json(&manifest)?).context("writing manifest.json")?;
        Ok(manifest)
    }
}

/// Executes a scenario, plus its convergence ladder when the config has one.
pub fn run(config_path: &Path, opts: &RunOptions) -> Result<RunResult> {
    let started = Instant::now();
    let cfg = ScenarioConfig::load(config_path)?;
    let outcome = execute(&cfg)?;
    let convergence = match &cfg.convergence {
        Some(c) => converge(&cfg, &c.quantities, &c.ladder, c.tolerance).context("convergence ladder")?,
        None => Vec::new(),
    };
    let dir = opts.out_root.join(&cfg.output.path);
    let mut w = Writer::new(&cfg, dir.clone());
    let mut report = json!({
        "scenario": cfg.scenario,
        "config_digest": w.digest,
        "report": outcome.report,
        "scalars": outcome.scalars,
    });
    match cfg.output.format {
        OutputFormat::Csv => {
            for t in &outcome.tables {
                w.csv(t)?;
            }
            if !convergence.is_empty() {
                w.csv(&converge::convergence_table(&convergence))?;
            }
        }
        OutputFormat::Json => {
            report["tables"] = serde_json::to_value(&outcome.tables)?;
            report["convergence"] = serde_json::to_value(&convergence)?;
        }
    }
    w.json("report.json", &report)?;
    let manifest = w.finish(config_path, started, opts, &convergence)?;
    Ok(RunResult { outcome: Some(outcome), convergence, manifest, dir })
}

/// Reruns a scenario over a cutoff ladder; results go to `<output>/converge`.
///
/// Empty `quantities` or `ladder`, and a missing `tolerance`, fall back to the
/// config's `convergence` section.
pub fn run_converge(
    config_path: &Path,
    quantities: &[String],
    ladder: &[Cutoffs],
    tolerance: Option<f64>,
    opts: &RunOptions,
) -> Result<RunResult> {
    let started = Instant::now();
    let cfg = ScenarioConfig::load(config_path)?;
    let section = cfg.convergence.as_ref();
    let quantities = match (quantities.is_empty(), section) {
        (false, _) => quantities.to_vec(),
        (true, Some(c)) => c.quantities.clone(),
        (true, None) => bail!("no quantities: pass --quantity or add a `convergence` section"),
    };
    let ladder = match (ladder.is_empty(), section) {
        (false, _) => ladder.to_vec(),
        (true, Some(c)) => c.ladder.clone(),
        (true, None) => bail!("no cutoff ladder: pass --ladder or add a `convergence` section"),
    };
    let tolerance = tolerance
        .or(section.map(|c| c.tolerance))
        .unwrap_or_else(config::default_convergence_tolerance);
    let tables = converge(&cfg, &quantities, &ladder, tolerance)?;
    let dir = opts.out_root.join(&cfg.output.path).join("converge");
    let mut w = Writer::new(&cfg, dir.clone());
    w.csv(&converge::convergence_table(&tables))?;
    w.json("convergence.json", &tables)?;
    let manifest = w.finish(config_path, started, opts, &tables)?;
    Ok(RunResult { outcome: None, convergence: tables, manifest, dir })
}

/// Runs a `perturb_compare` scenario.
pub fn run_compare(config_path: &Path, opts: &RunOptions) -> Result<RunResult> {
    let cfg = ScenarioConfig::load(config_path)?;
    if cfg.scenario != ScenarioKind::PerturbCompare {
        bail!("compare-rates needs a perturb_compare config, got `{}`", cfg.scenario);
    }
    run(config_path, opts)
}
