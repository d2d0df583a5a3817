//! Cross-arm instance constants and the bundled problem instance.
//!
//! The constants collected here size every confidence radius and exploration
//! rate in the policies:
//!
//! ```text
//! L = 30 r_max^2 / ((3 - 2 sqrt(2)) gap_min)
//! I = eps^2 gap_min / (192 (r_max + 2)^2 S_max^2 r_max^2 pi_hat_max^2)
//! A_max = max_i (min_s pi_i(s))^{-1} sum_s s
//! ```
//!
//! `gap_min` is the smallest eigenvalue gap across arms (`1 - lambda_max`),
//! `pi_hat_max = max_{i,s} max{pi_i(s), 1 - pi_i(s)}`, and `r_max` is the
//! largest per-arm reward sum.

use crate::error::{Error, Result};
use crate::markov::{chain_stats, ArmSpec, ChainStats};

/// Cross-arm constants plus the tuning parameters `epsilon` and `delta`.
#[derive(Debug, Clone)]
pub struct InstanceStats {
    /// Number of arms.
    pub n_arms: usize,
    /// `max_i sum_{s in S_i} s`.
    pub r_max: f64,
    /// Largest single state reward across arms.
    pub s_max: f64,
    /// Largest state-space size across arms.
    pub max_states: usize,
    /// Smallest stationary probability across arms and states.
    pub pi_min: f64,
    /// `max_{i,s} max{pi_i(s), 1 - pi_i(s)}`.
    pub pi_hat_max: f64,
    /// Largest second eigenvalue across arms.
    pub lambda_max: f64,
    /// Smallest eigenvalue gap, `1 - lambda_max`.
    pub gap_min: f64,
    /// `max_i (min_s pi_i(s))^{-1} sum_s s`.
    pub a_max: f64,
    /// The concentration constant `L`.
    pub big_l: f64,
    /// The minimal rate constant `I` (0 when `epsilon` is 0).
    pub big_i: f64,
    /// Tuning parameter for the theoretical selection rule.
    pub epsilon: f64,
    /// Known lower bound on the squared gap between the two best means.
    pub delta: f64,
    /// Stationary means sorted descending.
    pub mu_sorted: Vec<f64>,
    /// Permutation: `sigma[k]` is the arm index with the k-th largest mean
    /// (ties broken by arm index).
    pub sigma: Vec<usize>,
}

impl InstanceStats {
    /// Arm index of the highest stationary mean.
    pub fn best_arm(&self) -> usize {
        self.sigma[0]
    }

    /// Highest stationary mean.
    pub fn best_mean(&self) -> f64 {
        self.mu_sorted[0]
    }

    /// Mean gap of the k-th best arm (`k` is 0-based; gap 0 for k = 0).
    pub fn mean_gap(&self, k: usize) -> f64 {
        self.mu_sorted[0] - self.mu_sorted[k]
    }

    /// The minimal rate constant `I` for a given tuning parameter, zero when
    /// `epsilon` is zero.
    pub fn rate_constant(&self, epsilon: f64) -> f64 {
        if epsilon == 0.0 {
            return 0.0;
        }
        epsilon * epsilon * self.gap_min
            / (192.0
                * (self.r_max + 2.0).powi(2)
                * (self.max_states as f64).powi(2)
                * self.r_max
                * self.r_max
                * self.pi_hat_max
                * self.pi_hat_max)
    }
}

/// Compute [`InstanceStats`] from arm specifications.
///
/// Requires at least two arms. `epsilon >= 0` and `delta >= 0`; a positive
/// `delta` must be strictly below the squared gap between the two highest
/// means, since it is a lower bound on exactly that quantity.
pub fn instance_stats(arms: &[ArmSpec], epsilon: f64, delta: f64) -> Result<InstanceStats> {
    let chains = arms
        .iter()
        .enumerate()
        .map(|(i, arm)| chain_stats(arm).map_err(|e| e.for_arm(i)))
        .collect::<Result<Vec<_>>>()?;
    instance_stats_from_chains(arms, &chains, epsilon, delta)
}

pub(crate) fn instance_stats_from_chains(
    arms: &[ArmSpec],
    chains: &[ChainStats],
    epsilon: f64,
    delta: f64,
) -> Result<InstanceStats> {
    let n = arms.len();
    if n < 2 {
        return Err(Error::Config(format!("need at least 2 arms, got {n}")));
    }
    if !epsilon.is_finite() || epsilon < 0.0 {
        return Err(Error::Config(format!("epsilon must be >= 0, got {epsilon}")));
    }
    if !delta.is_finite() || delta < 0.0 {
        return Err(Error::Config(format!("delta must be >= 0, got {delta}")));
    }

    let mut sigma: Vec<usize> = (0..n).collect();
    sigma.sort_by(|&a, &b| chains[b].mu.total_cmp(&chains[a].mu).then(a.cmp(&b)));
    let mu_sorted: Vec<f64> = sigma.iter().map(|&i| chains[i].mu).collect();

    if delta > 0.0 {
        let top_gap_sq = (mu_sorted[0] - mu_sorted[1]).powi(2);
        if delta >= top_gap_sq {
            return Err(Error::Config(format!(
                "delta = {delta} must be strictly below the squared top mean gap {top_gap_sq}"
            )));
        }
    }

    let r_max = chains.iter().map(|c| c.reward_sum).fold(0.0, f64::max);
    let s_max = arms
        .iter()
        .flat_map(|a| a.rewards.iter().copied())
        .fold(0.0, f64::max);
    let max_states = arms.iter().map(|a| a.n_states()).max().unwrap_or(0);
    let pi_min = chains
        .iter()
        .flat_map(|c| c.pi.iter().copied())
        .fold(f64::INFINITY, f64::min);
    let pi_hat_max = chains
        .iter()
        .flat_map(|c| c.pi.iter().map(|&v| v.max(1.0 - v)))
        .fold(0.0, f64::max);
    let lambda_max = chains
        .iter()
        .map(|c| c.lambda2)
        .fold(f64::NEG_INFINITY, f64::max);
    let gap_min = 1.0 - lambda_max;
    let a_max = chains.iter().map(|c| c.a_p).fold(0.0, f64::max);
    let big_l = 30.0 * r_max * r_max / ((3.0 - 2.0 * 2.0f64.sqrt()) * gap_min);

    let mut stats = InstanceStats {
        n_arms: n,
        r_max,
        s_max,
        max_states,
        pi_min,
        pi_hat_max,
        lambda_max,
        gap_min,
        a_max,
        big_l,
        big_i: 0.0,
        epsilon,
        delta,
        mu_sorted,
        sigma,
    };
    stats.big_i = stats.rate_constant(epsilon);
    Ok(stats)
}

/// A fully validated problem instance: arms, their per-chain statistics, and
/// the cross-arm constants. All policies and the regret engine consume this.
#[derive(Debug, Clone)]
pub struct Instance {
    pub arms: Vec<ArmSpec>,
    pub chains: Vec<ChainStats>,
    pub stats: InstanceStats,
}

impl Instance {
    pub fn new(arms: Vec<ArmSpec>, epsilon: f64, delta: f64) -> Result<Self> {
        let chains = arms
            .iter()
            .enumerate()
            .map(|(i, arm)| chain_stats(arm).map_err(|e| e.for_arm(i)))
            .collect::<Result<Vec<_>>>()?;
        let stats = instance_stats_from_chains(&arms, &chains, epsilon, delta)?;
        Ok(Instance {
            arms,
            chains,
            stats,
        })
    }

    pub fn n_arms(&self) -> usize {
        self.arms.len()
    }

    /// Stationary mean of one arm.
    pub fn mu(&self, arm: usize) -> f64 {
        self.chains[arm].mu
    }
}
