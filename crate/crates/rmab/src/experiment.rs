//! Experiment orchestration: resolve a configuration, run every requested
//! policy through the Monte-Carlo engine, and emit one CSV plus a JSON
//! sidecar recording the fully resolved configuration.
//!
//! The CSV schema is stable: `t,policy,mean_regret,std_err,normalized`, one
//! row per (policy, checkpoint), policies in request order. The sidecar
//! contains everything needed to reproduce the CSV byte for byte, including
//! the full arm matrices and the resolved constants.

use serde::{Deserialize, Serialize};
use std::path::PathBuf;
use std::str::FromStr;

use crate::asr::{AsrConfig, AsrMode};
use crate::baselines::{DseeConfig, RcaConfig};
use crate::bound::{bound_constants, regret_bound};
use crate::engine::{default_checkpoints, monte_carlo, Dynamics, PolicySpec, RegretCurve};
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::scenario::{load_scenario, Scenario};

/// Policies selectable from the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyKind {
    Asr,
    Dsee,
    Rca,
    Oracle,
    Random,
}

impl FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "asr" => Ok(PolicyKind::Asr),
            "dsee" => Ok(PolicyKind::Dsee),
            "rca" => Ok(PolicyKind::Rca),
            "oracle" => Ok(PolicyKind::Oracle),
            "random" => Ok(PolicyKind::Random),
            other => Err(Error::Config(format!(
                "unknown policy '{other}' (expected asr, dsee, rca, oracle, or random)"
            ))),
        }
    }
}

/// A full experiment description.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Preset name or path to a scenario JSON file.
    pub scenario: String,
    pub policies: Vec<PolicyKind>,
    pub mode: AsrMode,
    pub epsilon: f64,
    pub delta: f64,
    pub horizon: u64,
    pub runs: u64,
    pub master_seed: u64,
    /// Number of log-spaced checkpoints.
    pub checkpoints: usize,
    pub dynamics: Dynamics,
    /// Multiplier on the instance constant `L` for the adaptive policy.
    /// 1.0 runs the published constant; smaller values are the customary
    /// practical reduction of exploration rates.
    pub asr_scale: f64,
    /// Multiplier on the constants of both comparator policies. 1.0 (the
    /// default) runs them at their published operating points.
    pub baseline_scale: f64,
    /// Explicit override for the adaptive policy's `L` (used verbatim,
    /// bypassing `asr_scale`).
    pub asr_l: Option<f64>,
    /// Append the theoretical bound curve (requires positive epsilon and
    /// delta).
    pub bound: bool,
    /// Additive constant for the bound curve.
    pub bound_offset: f64,
    /// Cap on Monte-Carlo worker threads; `None` uses the default pool.
    pub threads: Option<usize>,
    /// CSV destination; `None` means standard output (no sidecar then).
    pub output: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            scenario: "fig_5arm".to_string(),
            policies: vec![PolicyKind::Asr, PolicyKind::Dsee, PolicyKind::Rca],
            mode: AsrMode::Practical,
            epsilon: 0.0,
            delta: 0.0,
            horizon: 100_000,
            runs: 100,
            master_seed: 7,
            checkpoints: 50,
            dynamics: Dynamics::Restless,
            asr_scale: 1.0,
            baseline_scale: 1.0,
            asr_l: None,
            bound: false,
            bound_offset: 0.0,
            threads: None,
            output: None,
        }
    }
}

/// Constants actually used by the run, recorded for provenance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResolvedConstants {
    /// Instance constant from the true chain parameters.
    pub instance_l: f64,
    /// `L` handed to the adaptive policy.
    pub asr_l: f64,
    /// `L` handed to both baselines.
    pub baseline_l: f64,
    /// Squared-gap lower bound handed to the deterministic-sequencing
    /// baseline (defaults to half the true squared top gap when the
    /// configuration leaves `delta` at 0).
    pub dsee_delta: f64,
    pub checkpoints: Vec<u64>,
}

/// Sidecar payload: the request, the resolved constants, and the scenario
/// itself (so file-based scenarios stay reproducible).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentSidecar {
    pub config: ExperimentConfig,
    pub resolved: ResolvedConstants,
    pub scenario: Scenario,
}

/// Result of a run: the CSV text and the sidecar JSON text.
#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub csv: String,
    pub sidecar: String,
}

fn validate(cfg: &ExperimentConfig) -> Result<()> {
    if cfg.policies.is_empty() {
        return Err(Error::Config("no policies requested".into()));
    }
    if cfg.runs == 0 {
        return Err(Error::Config("runs must be at least 1".into()));
    }
    if cfg.checkpoints == 0 {
        return Err(Error::Config("need at least one checkpoint".into()));
    }
    for (name, scale) in [("asr", cfg.asr_scale), ("baseline", cfg.baseline_scale)] {
        if !scale.is_finite() || scale <= 0.0 {
            return Err(Error::Config(format!(
                "{name} exploration scale must be positive, got {scale}"
            )));
        }
    }
    if cfg.mode == AsrMode::Theoretical && (cfg.epsilon <= 0.0 || cfg.delta <= 0.0) {
        return Err(Error::Config(
            "theoretical mode requires --epsilon > 0 and --delta > 0".into(),
        ));
    }
    if cfg.bound && (cfg.epsilon <= 0.0 || cfg.delta <= 0.0) {
        return Err(Error::Config(
            "the bound curve requires --epsilon > 0 and --delta > 0".into(),
        ));
    }
    Ok(())
}

/// Resolve the per-policy specifications for an instance.
pub fn resolve_policies(
    cfg: &ExperimentConfig,
    instance: &Instance,
) -> Result<(Vec<PolicySpec>, ResolvedConstants)> {
    let instance_l = instance.stats.big_l;
    let asr_l = cfg.asr_l.unwrap_or(instance_l * cfg.asr_scale);
    let baseline_l = instance_l * cfg.baseline_scale;
    let dsee_delta = if cfg.delta > 0.0 {
        cfg.delta
    } else {
        0.5 * instance.stats.mean_gap(1).powi(2)
    };
    let specs = cfg
        .policies
        .iter()
        .map(|kind| match kind {
            PolicyKind::Asr => PolicySpec::Asr {
                cfg: match cfg.mode {
                    AsrMode::Practical => AsrConfig::practical(asr_l),
                    AsrMode::Theoretical => {
                        AsrConfig::theoretical(asr_l, cfg.epsilon, cfg.delta)
                    }
                },
            },
            PolicyKind::Dsee => PolicySpec::Dsee {
                cfg: DseeConfig {
                    big_l: baseline_l,
                    delta: dsee_delta,
                },
            },
            PolicyKind::Rca => PolicySpec::Rca {
                cfg: RcaConfig { big_l: baseline_l },
            },
            PolicyKind::Oracle => PolicySpec::Oracle,
            PolicyKind::Random => PolicySpec::Random,
        })
        .collect();
    let resolved = ResolvedConstants {
        instance_l,
        asr_l,
        baseline_l,
        dsee_delta,
        checkpoints: default_checkpoints(cfg.horizon, cfg.checkpoints),
    };
    Ok((specs, resolved))
}

/// Render curves into the stable CSV schema.
pub fn render_csv(curves: &[(String, RegretCurve)]) -> String {
    let mut out = String::from("t,policy,mean_regret,std_err,normalized\n");
    for (label, curve) in curves {
        for (k, &t) in curve.checkpoints.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                t, label, curve.mean_regret[k], curve.std_err[k], curve.normalized[k]
            ));
        }
    }
    out
}

fn compute(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let scenario = load_scenario(&cfg.scenario)?;
    let instance = scenario.instance(cfg.epsilon, cfg.delta)?;
    let (specs, resolved) = resolve_policies(cfg, &instance)?;

    // Evaluate the bound before simulating so configuration problems
    // surface first.
    let bound_curve = if cfg.bound {
        let bc = bound_constants(&instance)?;
        let mut mean = Vec::new();
        let mut normalized = Vec::new();
        for &t in &resolved.checkpoints {
            let v = regret_bound(t, &bc, cfg.bound_offset)?;
            mean.push(v);
            normalized.push(v / (t as f64).ln());
        }
        Some(RegretCurve {
            checkpoints: resolved.checkpoints.clone(),
            std_err: vec![0.0; mean.len()],
            mean_regret: mean,
            normalized,
        })
    } else {
        None
    };

    let mut curves: Vec<(String, RegretCurve)> = Vec::new();
    for spec in &specs {
        eprintln!(
            "[{}] {}: {} runs, horizon {}",
            scenario.name,
            spec.label(),
            cfg.runs,
            cfg.horizon
        );
        let curve = monte_carlo(
            &instance,
            spec,
            cfg.horizon,
            cfg.runs,
            cfg.master_seed,
            &resolved.checkpoints,
            cfg.dynamics,
        )?;
        curves.push((spec.label().to_string(), curve));
    }
    if let Some(b) = bound_curve {
        curves.push(("bound".to_string(), b));
    }

    let sidecar = ExperimentSidecar {
        config: cfg.clone(),
        resolved,
        scenario,
    };
    Ok(ExperimentOutput {
        csv: render_csv(&curves),
        sidecar: serde_json::to_string_pretty(&sidecar)?,
    })
}

/// Run a full experiment. Writes the CSV and the `<output>.config.json`
/// sidecar when an output path is configured; always returns both texts.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    validate(cfg)?;
    let out = match cfg.threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
            pool.install(|| compute(cfg))?
        }
        None => compute(cfg)?,
    };
    if let Some(path) = &cfg.output {
        if let Some(dir) = path.parent() {
            if !dir.as_os_str().is_empty() {
                std::fs::create_dir_all(dir)?;
            }
        }
        std::fs::write(path, &out.csv)?;
        let mut sidecar_path = path.clone().into_os_string();
        sidecar_path.push(".config.json");
        std::fs::write(PathBuf::from(sidecar_path), &out.sidecar)?;
    }
    Ok(out)
}
