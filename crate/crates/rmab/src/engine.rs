//! Restless environment loop, regret computation, and Monte-Carlo
//! aggregation across seeded runs.
//!
//! Every run is a pure function of `(instance, policy config, horizon,
//! seed)`: per-run seeds come from a stated SplitMix64 derivation, the
//! environment and the policy draw from separate ChaCha8 streams, and
//! parallel aggregation reduces in run-index order, so results are
//! bit-identical regardless of scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asr::{AsrConfig, AsrPolicy};
use crate::baselines::{
    DseeConfig, DseePolicy, FixedPolicy, OraclePolicy, RandomPolicy, RcaConfig, RcaPolicy,
};
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::markov::sample_next;
use crate::policy::{Policy, SlotPhase};

/// How passive arms evolve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dynamics {
    /// Every arm transitions each slot according to its own chain (default;
    /// only the played arm's state is revealed).
    Restless,
    /// Passive arms stay frozen (diagnostics only).
    Rested,
}

/// Buildable policy configuration, serializable for provenance sidecars.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "lowercase")]
pub enum PolicySpec {
    Asr { cfg: AsrConfig },
    Dsee { cfg: DseeConfig },
    Rca { cfg: RcaConfig },
    Oracle,
    Random,
    Fixed { arm: usize },
}

impl PolicySpec {
    /// CSV label.
    pub fn label(&self) -> &'static str {
        match self {
            PolicySpec::Asr { .. } => "asr",
            PolicySpec::Dsee { .. } => "dsee",
            PolicySpec::Rca { .. } => "rca",
            PolicySpec::Oracle => "oracle",
            PolicySpec::Random => "random",
            PolicySpec::Fixed { .. } => "fixed",
        }
    }

    /// Instantiate a fresh policy state machine for one run.
    pub fn build(&self, instance: &Instance, seed: u64) -> Result<Box<dyn Policy>> {
        Ok(match self {
            PolicySpec::Asr { cfg } => Box::new(AsrPolicy::new(instance, *cfg)?),
            PolicySpec::Dsee { cfg } => Box::new(DseePolicy::new(instance, *cfg)?),
            PolicySpec::Rca { cfg } => Box::new(RcaPolicy::new(instance, *cfg)?),
            PolicySpec::Oracle => Box::new(OraclePolicy::new(instance)),
            PolicySpec::Random => {
                Box::new(RandomPolicy::new(instance, ChaCha8Rng::seed_from_u64(seed)))
            }
            PolicySpec::Fixed { arm } => {
                if *arm >= instance.n_arms() {
                    return Err(Error::Config(format!(
                        "fixed arm {arm} out of range for {} arms",
                        instance.n_arms()
                    )));
                }
                Box::new(FixedPolicy::new(*arm))
            }
        })
    }
}

/// SplitMix64 output function.
fn splitmix64_mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-run seed: the `(run_index + 1)`-th output of the SplitMix64 stream
/// seeded at `master_seed`. Adding runs never changes earlier runs' seeds.
pub fn run_seed(master_seed: u64, run_index: u64) -> u64 {
    splitmix64_mix(
        master_seed.wrapping_add((run_index.wrapping_add(1)).wrapping_mul(0x9E37_79B9_7F4A_7C15)),
    )
}

/// One slot of the instrumentation stream.
#[derive(Debug, Clone, Copy)]
pub struct SlotRecord {
    /// 1-based slot index.
    pub t: u64,
    pub arm: u32,
    pub reward: f64,
    pub phase: SlotPhase,
}

/// Everything one episode produced.
#[derive(Debug, Clone)]
pub struct Trajectory {
    /// Arm played per slot.
    pub actions: Vec<u32>,
    /// Reward observed per slot.
    pub rewards: Vec<f64>,
    /// Per-slot phase stream, present when instrumentation was requested.
    pub log: Option<Vec<SlotRecord>>,
}

fn sample_categorical<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            acc += w;
            last = i;
            if u < acc {
                return i;
            }
        }
    }
    last
}

/// Play one episode.
///
/// Initial states are drawn from each arm's stationary distribution. Each
/// slot the policy picks an arm, the environment reveals that arm's current
/// reward state, and then the arms transition according to `dynamics`.
pub fn run_episode(
    instance: &Instance,
    spec: &PolicySpec,
    horizon: u64,
    seed: u64,
    dynamics: Dynamics,
    instrument: bool,
) -> Result<Trajectory> {
    let n = instance.n_arms();
    if horizon < n as u64 {
        return Err(Error::Config(format!(
            "horizon {horizon} is below the number of arms {n}"
        )));
    }
    let mut env_rng = ChaCha8Rng::seed_from_u64(run_seed(seed, 0));
    let mut policy = spec.build(instance, run_seed(seed, 1))?;

    let mut states: Vec<usize> = instance
        .chains
        .iter()
        .map(|c| sample_categorical(&c.pi, &mut env_rng))
        .collect();

    let mut actions = Vec::with_capacity(horizon as usize);
    let mut rewards = Vec::with_capacity(horizon as usize);
    let mut log = instrument.then(|| Vec::with_capacity(horizon as usize));

    let mut last = None;
    for t in 1..=horizon {
        let d = policy.step(last)?;
        let reward = instance.arms[d.arm].rewards[states[d.arm]];
        actions.push(d.arm as u32);
        rewards.push(reward);
        if let Some(log) = log.as_mut() {
            log.push(SlotRecord {
                t,
                arm: d.arm as u32,
                reward,
                phase: d.phase,
            });
        }
        last = Some(reward);
        match dynamics {
            Dynamics::Restless => {
                for (i, arm) in instance.arms.iter().enumerate() {
                    states[i] = sample_next(&arm.transition, states[i], &mut env_rng);
                }
            }
            Dynamics::Rested => {
                states[d.arm] = sample_next(&instance.arms[d.arm].transition, states[d.arm], &mut env_rng);
            }
        }
    }
    Ok(Trajectory {
        actions,
        rewards,
        log,
    })
}

/// Cumulative pseudo-regret series: `r(t) = t mu* - sum_{tau <= t}
/// mu(a_tau)`, plugging in the true means of the played arms. Accumulated as
/// per-slot mean gaps, so the series is exactly non-negative and
/// non-decreasing.
pub fn pseudo_regret(trajectory: &Trajectory, instance: &Instance) -> Vec<f64> {
    let best = instance.stats.best_mean();
    let mut acc = 0.0;
    trajectory
        .actions
        .iter()
        .map(|&a| {
            acc += best - instance.mu(a as usize);
            acc
        })
        .collect()
}

/// Cumulative realized-reward regret series: `r(t) = t mu* - sum_{tau <= t}
/// reward(tau)`. Agrees with pseudo-regret in expectation; higher variance.
pub fn realized_regret(trajectory: &Trajectory, instance: &Instance) -> Vec<f64> {
    let best = instance.stats.best_mean();
    let mut acc = 0.0;
    trajectory
        .rewards
        .iter()
        .map(|&r| {
            acc += best - r;
            acc
        })
        .collect()
}

/// Time-indexed mean pseudo-regret with standard error across runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegretCurve {
    pub checkpoints: Vec<u64>,
    pub mean_regret: Vec<f64>,
    pub std_err: Vec<f64>,
    /// `mean_regret / ln t` per checkpoint.
    pub normalized: Vec<f64>,
}

/// Log-spaced checkpoints in `[min(100, horizon), horizon]`, deduplicated.
pub fn default_checkpoints(horizon: u64, count: usize) -> Vec<u64> {
    let lo = 100u64.min(horizon).max(1);
    let count = count.max(1);
    let ratio = horizon as f64 / lo as f64;
    let mut points: Vec<u64> = (0..count)
        .map(|k| {
            let frac = if count == 1 {
                1.0
            } else {
                k as f64 / (count - 1) as f64
            };
            ((lo as f64) * ratio.powf(frac)).round() as u64
        })
        .collect();
    points.push(horizon);
    points.sort_unstable();
    points.dedup();
    points.retain(|&t| t >= 1 && t <= horizon);
    points
}

/// One run's pseudo-regret sampled at checkpoints, without keeping the
/// trajectory.
fn run_checkpoint_regret(
    instance: &Instance,
    spec: &PolicySpec,
    horizon: u64,
    seed: u64,
    dynamics: Dynamics,
    checkpoints: &[u64],
) -> Result<Vec<f64>> {
    let n = instance.n_arms();
    if horizon < n as u64 {
        return Err(Error::Config(format!(
            "horizon {horizon} is below the number of arms {n}"
        )));
    }
    let mut env_rng = ChaCha8Rng::seed_from_u64(run_seed(seed, 0));
    let mut policy = spec.build(instance, run_seed(seed, 1))?;
    let mut states: Vec<usize> = instance
        .chains
        .iter()
        .map(|c| sample_categorical(&c.pi, &mut env_rng))
        .collect();

    let best = instance.stats.best_mean();
    let mut regret = 0.0;
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut next_cp = 0usize;
    let mut last = None;
    for t in 1..=horizon {
        let d = policy.step(last)?;
        let reward = instance.arms[d.arm].rewards[states[d.arm]];
        regret += best - instance.mu(d.arm);
        last = Some(reward);
        match dynamics {
            Dynamics::Restless => {
                for (i, arm) in instance.arms.iter().enumerate() {
                    states[i] = sample_next(&arm.transition, states[i], &mut env_rng);
                }
            }
            Dynamics::Rested => {
                states[d.arm] =
                    sample_next(&instance.arms[d.arm].transition, states[d.arm], &mut env_rng);
            }
        }
        while next_cp < checkpoints.len() && checkpoints[next_cp] == t {
            out.push(regret);
            next_cp += 1;
        }
    }
    Ok(out)
}

/// Monte-Carlo mean pseudo-regret across `runs` independent episodes.
///
/// Run `i` uses seed [`run_seed`]`(master_seed, i)`. Episodes execute in
/// parallel on the ambient rayon pool; aggregation is a deterministic
/// reduction in run-index order.
pub fn monte_carlo(
    instance: &Instance,
    spec: &PolicySpec,
    horizon: u64,
    runs: u64,
    master_seed: u64,
    checkpoints: &[u64],
    dynamics: Dynamics,
) -> Result<RegretCurve> {
    if runs == 0 {
        return Err(Error::Config("need at least one run".into()));
    }
    if checkpoints.is_empty() {
        return Err(Error::Config("need at least one checkpoint".into()));
    }
    if checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config("checkpoints must be strictly increasing".into()));
    }
    if *checkpoints.last().unwrap() > horizon {
        return Err(Error::Config("checkpoints must not exceed the horizon".into()));
    }

    let per_run: Vec<Vec<f64>> = (0..runs)
        .into_par_iter()
        .map(|i| {
            run_checkpoint_regret(
                instance,
                spec,
                horizon,
                run_seed(master_seed, i),
                dynamics,
                checkpoints,
            )
        })
        .collect::<Result<Vec<_>>>()?;

    let n = runs as f64;
    let mut mean_regret = Vec::with_capacity(checkpoints.len());
    let mut std_err = Vec::with_capacity(checkpoints.len());
    let mut normalized = Vec::with_capacity(checkpoints.len());
    for (k, &t) in checkpoints.iter().enumerate() {
        let mean = per_run.iter().map(|r| r[k]).sum::<f64>() / n;
        let se = if runs == 1 {
            0.0
        } else {
            let var = per_run
                .iter()
                .map(|r| (r[k] - mean).powi(2))
                .sum::<f64>()
                / (n - 1.0);
            (var / n).sqrt()
        };
        mean_regret.push(mean);
        std_err.push(se);
        normalized.push(mean / (t as f64).ln());
    }
    Ok(RegretCurve {
        checkpoints: checkpoints.to_vec(),
        mean_regret,
        std_err,
        normalized,
    })
}
