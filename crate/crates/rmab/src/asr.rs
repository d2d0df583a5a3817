//! Adaptive sequencing rules: explore each arm at its own estimated rate.
//!
//! Time is carved into epochs. An exploration epoch for arm `i` is a random
//! sub-block SB1 (play until the anchor state `gamma_i` from the previous
//! epoch recurs; discarded from all means) followed by a deterministic
//! sub-block SB2 of length `4^k` whose samples extend a single contiguous
//! sample path of the chain. An exploitation epoch plays the arm with the
//! highest overall sample mean for `2 * 4^(n-1)` slots.
//!
//! At every epoch boundary at time `t`, arm `i` is explored if
//!
//! ```text
//! |V_i| <= max{ Dhat_i(t), 2/I } * ln t
//! ```
//!
//! where `Dhat_i(t) = 4L / max{delta, (max_j stilde_j - stilde_i)^2 - eps}`
//! in the theoretical variant. The practical variant needs neither `delta`
//! nor `eps`: it estimates the rate directly as
//! `4L / (max_j stilde_j - stilde_i)^2`, drops the `2/I` floor (`eps = 0`
//! makes it vacuous), and treats a zero gap as an infinite rate, which
//! forces exploration of any arm tied with the empirical best until the tie
//! resolves. The current empirical-best arm itself (lowest index among the
//! argmax set) is the exploitation target and is not an exploration
//! candidate in this variant: its own rate formula is infinite at every
//! `t`, so without the exemption no exploitation epoch could ever start.
//!
//! When several arms qualify at one boundary, the arm furthest behind its
//! own required rate (smallest `|V_i| / Dhat_i`) is explored first; exact
//! ties (including the exploitation argmax) break to the lowest arm
//! index, and all logarithms are natural, so runs are reproducible.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::policy::{argmax_lowest, Decision, Policy, SlotPhase};

/// Which variant of the selection rule to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AsrMode {
    /// Verbatim rule with the `delta` clamp, `epsilon` slack, and `2/I`
    /// floor.
    Theoretical,
    /// On-the-fly rate estimation; `delta` and `epsilon` unused.
    Practical,
}

/// Policy parameters.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct AsrConfig {
    pub mode: AsrMode,
    /// Tuning slack in the rate denominator (theoretical mode only).
    pub epsilon: f64,
    /// Known lower bound on the squared top-mean gap (theoretical mode only).
    pub delta: f64,
    /// Effective concentration constant `L` used in all rates.
    pub big_l: f64,
}

impl AsrConfig {
    pub fn practical(big_l: f64) -> Self {
        AsrConfig {
            mode: AsrMode::Practical,
            epsilon: 0.0,
            delta: 0.0,
            big_l,
        }
    }

    pub fn theoretical(big_l: f64, epsilon: f64, delta: f64) -> Self {
        AsrConfig {
            mode: AsrMode::Theoretical,
            epsilon,
            delta,
            big_l,
        }
    }

    fn validate(&self) -> Result<()> {
        if !self.big_l.is_finite() || self.big_l <= 0.0 {
            return Err(Error::Config(format!(
                "L must be positive, got {}",
                self.big_l
            )));
        }
        if self.mode == AsrMode::Theoretical && (self.epsilon <= 0.0 || self.delta <= 0.0) {
            return Err(Error::Config(format!(
                "theoretical mode requires epsilon > 0 and delta > 0, got epsilon = {}, delta = {}",
                self.epsilon, self.delta
            )));
        }
        Ok(())
    }
}

/// Per-arm tallies. SB1 samples are never counted anywhere.
#[derive(Debug, Clone, Default)]
pub struct AsrArmState {
    /// Number of deterministic-sub-block samples, `|V_i|`.
    pub v_count: u64,
    /// Number of exploitation samples, `|W_i|`.
    pub w_count: u64,
    /// Reward sum over `V_i`.
    pub v_sum: f64,
    /// Reward sum over `V_i` and `W_i` together.
    pub vw_sum: f64,
    /// Anchor: last reward state observed in the most recent exploration
    /// epoch.
    pub gamma_last: Option<f64>,
    /// Completed exploration epochs (the initialization pass is epoch 0).
    pub n_explore: u32,
}

impl AsrArmState {
    /// Exploration-only sample mean.
    pub fn s_tilde(&self) -> f64 {
        self.v_sum / self.v_count as f64
    }

    /// Overall sample mean over exploration and exploitation samples.
    pub fn s_bar(&self) -> f64 {
        self.vw_sum / (self.v_count + self.w_count) as f64
    }
}

/// Phase of the epoch machine. The phase describes the slot currently being
/// played; observation bookkeeping happens when the next slot's reward
/// arrives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AsrPhase {
    /// Initialization pass: one observation per arm, in index order.
    Init { arm: usize },
    /// Random sub-block of exploration epoch `epoch` for `arm`.
    Sb1 { arm: usize, epoch: u32 },
    /// Deterministic sub-block: `remaining` slots left including the current
    /// one.
    Sb2 {
        arm: usize,
        epoch: u32,
        remaining: u64,
    },
    /// Exploitation epoch `epoch` (1-based), playing `arm`.
    Exploit {
        arm: usize,
        epoch: u32,
        remaining: u64,
    },
    /// Between epochs; resolved by the selection rule before the next slot.
    Boundary,
}

/// Full mutable policy state.
#[derive(Debug, Clone)]
pub struct AsrState {
    pub arms: Vec<AsrArmState>,
    /// Exploitation epochs entered so far.
    pub n_exploit: u32,
    pub phase: AsrPhase,
    /// 1-based index of the slot most recently returned by `step`.
    pub t: u64,
}

/// Outcome of the selection rule at an epoch boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EpochChoice {
    Explore(usize),
    Exploit,
}

/// Required exploration rate estimate for arm `i` given the
/// exploration-only sample means.
///
/// Theoretical: `4L / max{delta, (max_j stilde_j - stilde_i)^2 - eps}`.
/// Practical: `4L / (max_j stilde_j - stilde_i)^2`, `+inf` when the gap is
/// zero (the empirical best arm and anything tied with it).
pub fn d_hat(cfg: &AsrConfig, s_tilde: &[f64], i: usize) -> f64 {
    let best = s_tilde.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let gap = best - s_tilde[i];
    match cfg.mode {
        AsrMode::Theoretical => 4.0 * cfg.big_l / (gap * gap - cfg.epsilon).max(cfg.delta),
        AsrMode::Practical => {
            if gap == 0.0 {
                f64::INFINITY
            } else {
                4.0 * cfg.big_l / (gap * gap)
            }
        }
    }
}

/// Evaluate the selection rule at the start of an epoch at time `t`.
///
/// Arm `i` qualifies for exploration when `|V_i| <= max{Dhat_i, 2/I} * ln t`
/// (the `2/I` floor applies in theoretical mode only); `Exploit` is returned
/// when no arm qualifies. Among qualifying arms the one furthest behind its
/// own required rate is explored: smallest `|V_i| / rate_i`, with
/// infinite-rate arms (ties at the empirical top) served first and exact
/// deficit ties broken to the lowest index. At `t = 1` the threshold is zero
/// for every arm, including arms with an infinite rate. In practical mode
/// the current empirical-best arm (lowest index among the argmax set) is
/// not a candidate; see the module docs.
pub fn select_epoch(
    cfg: &AsrConfig,
    v_counts: &[u64],
    s_tilde: &[f64],
    t: u64,
    big_i: f64,
) -> EpochChoice {
    let ln_t = (t as f64).ln();
    let incumbent = match cfg.mode {
        AsrMode::Practical => Some(argmax_lowest(s_tilde)),
        AsrMode::Theoretical => None,
    };
    let mut chosen: Option<(usize, f64)> = None;
    for (i, &v) in v_counts.iter().enumerate() {
        if incumbent == Some(i) {
            continue;
        }
        let mut rate = d_hat(cfg, s_tilde, i);
        if cfg.mode == AsrMode::Theoretical {
            rate = rate.max(2.0 / big_i);
        }
        let threshold = if ln_t <= 0.0 { 0.0 } else { rate * ln_t };
        if (v as f64) <= threshold {
            // Deficit relative to the required rate; infinite-rate arms have
            // deficit 0 and are served first.
            let deficit = if rate.is_infinite() {
                0.0
            } else {
                v as f64 / rate
            };
            match chosen {
                Some((_, best)) if best <= deficit => {}
                _ => chosen = Some((i, deficit)),
            }
        }
    }
    match chosen {
        Some((i, _)) => EpochChoice::Explore(i),
        None => EpochChoice::Exploit,
    }
}

/// The adaptive sequencing-rules policy.
#[derive(Debug, Clone)]
pub struct AsrPolicy {
    cfg: AsrConfig,
    /// Per-arm state reward sets, for observation validation.
    rewards: Vec<Vec<f64>>,
    /// Rate floor constant `I` for the configured epsilon.
    big_i: f64,
    pub state: AsrState,
}

impl AsrPolicy {
    pub fn new(instance: &Instance, cfg: AsrConfig) -> Result<Self> {
        cfg.validate()?;
        if cfg.mode == AsrMode::Theoretical {
            let top_gap_sq = (instance.stats.mu_sorted[0] - instance.stats.mu_sorted[1]).powi(2);
            if cfg.delta >= top_gap_sq {
                return Err(Error::Config(format!(
                    "delta = {} must be strictly below the squared top mean gap {top_gap_sq}",
                    cfg.delta
                )));
            }
        }
        let n = instance.n_arms();
        Ok(AsrPolicy {
            cfg,
            rewards: instance.arms.iter().map(|a| a.rewards.clone()).collect(),
            big_i: instance.stats.rate_constant(cfg.epsilon),
            state: AsrState {
                arms: vec![AsrArmState::default(); n],
                n_exploit: 0,
                phase: AsrPhase::Init { arm: 0 },
                t: 0,
            },
        })
    }

    /// Exploration-only sample means of all arms.
    pub fn s_tilde_vec(&self) -> Vec<f64> {
        self.state.arms.iter().map(AsrArmState::s_tilde).collect()
    }

    /// Overall sample means of all arms.
    pub fn s_bar_vec(&self) -> Vec<f64> {
        self.state.arms.iter().map(AsrArmState::s_bar).collect()
    }

    fn check_observation(&self, arm: usize, reward: f64) -> Result<()> {
        if self.rewards[arm].contains(&reward) {
            Ok(())
        } else {
            Err(Error::ModelMismatch { arm, reward })
        }
    }

    /// Fold the reward observed for the previous slot into the tallies and
    /// advance the phase machine past any completed phase.
    fn apply_observation(&mut self, reward: f64) -> Result<()> {
        match self.state.phase {
            AsrPhase::Init { arm } => {
                self.check_observation(arm, reward)?;
                let st = &mut self.state.arms[arm];
                st.v_count += 1;
                st.v_sum += reward;
                st.vw_sum += reward;
                st.gamma_last = Some(reward);
                st.n_explore = 1;
                self.state.phase = if arm + 1 < self.state.arms.len() {
                    AsrPhase::Init { arm: arm + 1 }
                } else {
                    AsrPhase::Boundary
                };
            }
            AsrPhase::Sb1 { arm, epoch } => {
                self.check_observation(arm, reward)?;
                if Some(reward) == self.state.arms[arm].gamma_last {
                    self.state.phase = AsrPhase::Sb2 {
                        arm,
                        epoch,
                        remaining: 4u64.saturating_pow(epoch),
                    };
                }
            }
            AsrPhase::Sb2 {
                arm,
                epoch,
                remaining,
            } => {
                self.check_observation(arm, reward)?;
                let st = &mut self.state.arms[arm];
                st.v_count += 1;
                st.v_sum += reward;
                st.vw_sum += reward;
                if remaining == 1 {
                    st.gamma_last = Some(reward);
                    st.n_explore += 1;
                    self.state.phase = AsrPhase::Boundary;
                } else {
                    self.state.phase = AsrPhase::Sb2 {
                        arm,
                        epoch,
                        remaining: remaining - 1,
                    };
                }
            }
            AsrPhase::Exploit {
                arm,
                epoch,
                remaining,
            } => {
                self.check_observation(arm, reward)?;
                let st = &mut self.state.arms[arm];
                st.w_count += 1;
                st.vw_sum += reward;
                self.state.phase = if remaining == 1 {
                    AsrPhase::Boundary
                } else {
                    AsrPhase::Exploit {
                        arm,
                        epoch,
                        remaining: remaining - 1,
                    }
                };
            }
            AsrPhase::Boundary => {
                // Unreachable: a boundary is always resolved before a slot is
                // played.
                return Err(Error::Numeric("observation at epoch boundary".into()));
            }
        }
        Ok(())
    }

    /// Resolve an epoch boundary at the current time.
    fn enter_epoch(&mut self) {
        let v_counts: Vec<u64> = self.state.arms.iter().map(|a| a.v_count).collect();
        let s_tilde = self.s_tilde_vec();
        match select_epoch(&self.cfg, &v_counts, &s_tilde, self.state.t, self.big_i) {
            EpochChoice::Explore(arm) => {
                self.state.phase = AsrPhase::Sb1 {
                    arm,
                    epoch: self.state.arms[arm].n_explore,
                };
            }
            EpochChoice::Exploit => {
                self.state.n_exploit += 1;
                let arm = argmax_lowest(&self.s_bar_vec());
                self.state.phase = AsrPhase::Exploit {
                    arm,
                    epoch: self.state.n_exploit,
                    remaining: 2u64.saturating_mul(4u64.saturating_pow(self.state.n_exploit - 1)),
                };
            }
        }
    }
}

impl Policy for AsrPolicy {
    fn step(&mut self, last_reward: Option<f64>) -> Result<Decision> {
        if let Some(r) = last_reward {
            self.apply_observation(r)?;
        }
        self.state.t += 1;
        if self.state.phase == AsrPhase::Boundary {
            self.enter_epoch();
        }
        let decision = match self.state.phase {
            AsrPhase::Init { arm } => Decision {
                arm,
                phase: SlotPhase::Sb2 { epoch: 0 },
            },
            AsrPhase::Sb1 { arm, epoch } => Decision {
                arm,
                phase: SlotPhase::Sb1 { epoch },
            },
            AsrPhase::Sb2 { arm, epoch, .. } => Decision {
                arm,
                phase: SlotPhase::Sb2 { epoch },
            },
            AsrPhase::Exploit { arm, epoch, .. } => Decision {
                arm,
                phase: SlotPhase::Exploit { epoch },
            },
            AsrPhase::Boundary => unreachable!("boundary resolved above"),
        };
        Ok(decision)
    }

    fn name(&self) -> &'static str {
        "asr"
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::markov::ArmSpec;
    use approx::assert_abs_diff_eq;

    fn two_state_arm(p01: f64, p10: f64) -> ArmSpec {
        ArmSpec::new(
            vec![0.1, 1.0],
            vec![vec![1.0 - p01, p01], vec![p10, 1.0 - p10]],
        )
        .unwrap()
    }

    fn two_arm_instance() -> Instance {
        Instance::new(vec![two_state_arm(0.1, 0.2), two_state_arm(0.5, 0.1)], 0.0, 0.0).unwrap()
    }

    fn five_arm_l() -> f64 {
        30.0 * 1.21 / ((3.0 - 2.0 * 2.0f64.sqrt()) * 0.3)
    }

    #[test]
    fn d_hat_practical_examples() {
        let cfg = AsrConfig::practical(five_arm_l());
        let s = vec![0.85, 0.40];
        assert_abs_diff_eq!(
            d_hat(&cfg, &s, 1),
            4.0 * five_arm_l() / 0.2025,
            epsilon = 1e-9
        );
        assert!((d_hat(&cfg, &s, 1) - 13930.0).abs() < 5.0);
        // Zero gap for the empirical best (and anything tied with it).
        assert_eq!(d_hat(&cfg, &s, 0), f64::INFINITY);
        let tied = vec![0.85, 0.85, 0.40];
        assert_eq!(d_hat(&cfg, &tied, 0), f64::INFINITY);
        assert_eq!(d_hat(&cfg, &tied, 1), f64::INFINITY);
        assert!(d_hat(&cfg, &tied, 2).is_finite());
    }

    #[test]
    fn d_hat_theoretical_delta_binds() {
        let l = five_arm_l();
        let cfg = AsrConfig::theoretical(l, 0.01, 0.1);
        // Observed squared gap 0.05: 0.05 - 0.01 < 0.1, so delta binds.
        let gap = 0.05f64.sqrt();
        let s = vec![0.5 + gap, 0.5];
        assert_abs_diff_eq!(d_hat(&cfg, &s, 1), 4.0 * l / 0.1, epsilon = 1e-9);
    }

    #[test]
    fn select_epoch_threshold_zero_at_t_one() {
        let cfg = AsrConfig::practical(five_arm_l());
        let choice = select_epoch(&cfg, &[1, 1], &[1.0, 0.1], 1, 0.0);
        assert_eq!(choice, EpochChoice::Exploit);
        let cfg = AsrConfig::theoretical(five_arm_l(), 0.01, 0.1);
        let choice = select_epoch(&cfg, &[1, 1], &[1.0, 0.1], 1, 4.8e-9);
        assert_eq!(choice, EpochChoice::Exploit);
    }

    #[test]
    fn select_epoch_explores_ties_with_the_best() {
        let cfg = AsrConfig::practical(1e-9);
        // Arm 1 ties the incumbent (arm 0): infinite rate, explored no
        // matter how tiny L is, until the tie resolves.
        let choice = select_epoch(&cfg, &[100, 100, 100], &[1.0, 1.0, 0.1], 10, 0.0);
        assert_eq!(choice, EpochChoice::Explore(1));
    }

    #[test]
    fn select_epoch_prefers_the_lowest_qualifying_index() {
        let cfg = AsrConfig::theoretical(five_arm_l(), 0.01, 0.1);
        // Huge thresholds: every arm qualifies, so the lowest index wins.
        let choice = select_epoch(&cfg, &[1, 1, 1], &[0.9, 0.5, 0.4], 10, 4.8e-9);
        assert_eq!(choice, EpochChoice::Explore(0));
    }

    #[test]
    fn select_epoch_practical_exploits_when_no_candidate_qualifies() {
        let cfg = AsrConfig::practical(1e-9);
        let choice = select_epoch(&cfg, &[50, 50], &[1.0, 0.1], 100, 0.0);
        assert_eq!(choice, EpochChoice::Exploit);
    }

    #[test]
    fn initialization_plays_each_arm_once_in_order() {
        let inst = Instance::new(
            vec![
                two_state_arm(0.1, 0.2),
                two_state_arm(0.5, 0.1),
                two_state_arm(0.3, 0.3),
            ],
            0.0,
            0.0,
        )
        .unwrap();
        let mut p = AsrPolicy::new(&inst, AsrConfig::practical(1.0)).unwrap();
        let d1 = p.step(None).unwrap();
        let d2 = p.step(Some(1.0)).unwrap();
        let d3 = p.step(Some(0.1)).unwrap();
        assert_eq!((d1.arm, d2.arm, d3.arm), (0, 1, 2));
        assert_eq!(d1.phase, SlotPhase::Sb2 { epoch: 0 });
        assert_eq!(p.state.arms[0].v_count, 1);
        assert_eq!(p.state.arms[0].gamma_last, Some(1.0));
    }

    #[test]
    fn exploitation_epochs_grow_two_eight_thirty_two() {
        // Vanishing L: thresholds are ~0, so every boundary exploits. Arm 1
        // observes 0.1 so the sample means never tie (a tie would force
        // exploration).
        let inst = two_arm_instance();
        let mut p = AsrPolicy::new(&inst, AsrConfig::practical(1e-12)).unwrap();
        let mut last = None;
        let mut lengths: Vec<(u32, u64)> = Vec::new();
        for _ in 0..(2 + 2 + 8 + 32 + 1) {
            let d = p.step(last).unwrap();
            if let SlotPhase::Exploit { epoch } = d.phase {
                match lengths.last_mut() {
                    Some((e, len)) if *e == epoch => *len += 1,
                    _ => lengths.push((epoch, 1)),
                }
            }
            last = Some(if d.arm == 0 { 1.0 } else { 0.1 });
        }
        assert_eq!(lengths[0], (1, 2));
        assert_eq!(lengths[1], (2, 8));
        assert_eq!(lengths[2], (3, 32));
    }

    #[test]
    fn first_exploration_epoch_has_sb1_then_four_sb2_slots() {
        // Huge L: every candidate qualifies. The incumbent (arm 0, s_tilde
        // 1.0 vs 0.1) is exempt, so arm 1 is explored; its anchor is 0.1.
        let inst = two_arm_instance();
        let mut p = AsrPolicy::new(&inst, AsrConfig::practical(1e12)).unwrap();
        p.step(None).unwrap(); // slot 1: init arm 0
        p.step(Some(1.0)).unwrap(); // slot 2: init arm 1
        let d = p.step(Some(0.1)).unwrap(); // boundary at t = 3
        assert_eq!(d.arm, 1);
        assert_eq!(d.phase, SlotPhase::Sb1 { epoch: 1 });
        // Miss the anchor once: still SB1.
        let d = p.step(Some(1.0)).unwrap();
        assert_eq!(d.phase, SlotPhase::Sb1 { epoch: 1 });
        // Hit the anchor: SB2 of exactly 4 slots follows.
        for k in 0..4 {
            let d = p.step(Some(0.1)).unwrap();
            assert_eq!(d.phase, SlotPhase::Sb2 { epoch: 1 }, "slot {k}");
            assert_eq!(d.arm, 1);
        }
        let _ = p.step(Some(0.1)).unwrap();
        // Epoch complete: |V_1| = 1 + 4, anchor updated, SB1 samples dropped.
        assert_eq!(p.state.arms[1].v_count, 5);
        assert_eq!(p.state.arms[1].n_explore, 2);
        assert_eq!(p.state.arms[1].gamma_last, Some(0.1));
    }

    #[test]
    fn observation_outside_the_state_set_is_rejected() {
        let inst = two_arm_instance();
        let mut p = AsrPolicy::new(&inst, AsrConfig::practical(1.0)).unwrap();
        p.step(None).unwrap();
        let err = p.step(Some(0.5)).unwrap_err();
        assert!(matches!(err, Error::ModelMismatch { arm: 0, .. }));
    }

    #[test]
    fn theoretical_mode_requires_positive_epsilon_and_delta() {
        let inst = two_arm_instance();
        let err = AsrPolicy::new(&inst, AsrConfig::theoretical(1.0, 0.0, 0.1)).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
        let err = AsrPolicy::new(&inst, AsrConfig::theoretical(1.0, 0.01, 0.0)).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
        // Delta at or above the squared top gap is also rejected.
        let err = AsrPolicy::new(&inst, AsrConfig::theoretical(1.0, 0.01, 0.3)).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }
}
