//! Comparator policies: deterministic epoch sequencing, UCB over
//! regenerative cycles, the omniscient single-best-arm oracle, uniform
//! random, and a fixed-arm diagnostic.
//!
//! Both learned baselines are configured with the same concentration
//! constant `L` as the adaptive policy so comparisons stay apples to apples,
//! and both break ties to the lowest arm index.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::policy::{argmax_lowest, Decision, Policy, SlotPhase};

/// Deterministic sequencing of exploration and exploitation.
///
/// Every epoch boundary at time `t` checks whether the total exploration
/// time so far is at most `(4L / delta) * N * ln t`; if so, one exploration
/// epoch plays every arm consecutively for `4^n` slots each (the same
/// worst-case rate for all arms, which is exactly the oversampling of bad
/// arms that the adaptive rule avoids). Otherwise the arm with the best
/// exploration sample mean is exploited for `2 * 4^(n_I - 1)` slots.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DseeConfig {
    /// Effective concentration constant.
    pub big_l: f64,
    /// Known lower bound on the squared top-mean gap; must be positive.
    pub delta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum DseePhase {
    Boundary,
    Explore {
        arm: usize,
        epoch: u32,
        remaining: u64,
    },
    Exploit {
        arm: usize,
        epoch: u32,
        remaining: u64,
    },
}

#[derive(Debug, Clone)]
pub struct DseePolicy {
    cfg: DseeConfig,
    n_arms: usize,
    /// Exploration-sample sums and counts per arm (exploitation samples are
    /// not used for selection).
    sums: Vec<f64>,
    counts: Vec<u64>,
    /// Total slots spent exploring.
    explore_slots: u64,
    /// Index of the next exploration epoch.
    next_epoch: u32,
    n_exploit: u32,
    phase: DseePhase,
    t: u64,
}

impl DseePolicy {
    pub fn new(instance: &Instance, cfg: DseeConfig) -> Result<Self> {
        if !cfg.big_l.is_finite() || cfg.big_l <= 0.0 {
            return Err(Error::Config(format!(
                "L must be positive, got {}",
                cfg.big_l
            )));
        }
        if !cfg.delta.is_finite() || cfg.delta <= 0.0 {
            return Err(Error::Config(format!(
                "deterministic sequencing requires delta > 0, got {}",
                cfg.delta
            )));
        }
        let n = instance.n_arms();
        Ok(DseePolicy {
            cfg,
            n_arms: n,
            sums: vec![0.0; n],
            counts: vec![0; n],
            explore_slots: 0,
            next_epoch: 0,
            n_exploit: 0,
            phase: DseePhase::Boundary,
            t: 0,
        })
    }

    /// Exploration sample counts per arm (equal across arms at every epoch
    /// boundary, by construction).
    pub fn exploration_counts(&self) -> &[u64] {
        &self.counts
    }

    fn apply_observation(&mut self, reward: f64) {
        match self.phase {
            DseePhase::Explore {
                arm,
                epoch,
                remaining,
            } => {
                self.sums[arm] += reward;
                self.counts[arm] += 1;
                self.explore_slots += 1;
                if remaining > 1 {
                    self.phase = DseePhase::Explore {
                        arm,
                        epoch,
                        remaining: remaining - 1,
                    };
                } else if arm + 1 < self.n_arms {
                    self.phase = DseePhase::Explore {
                        arm: arm + 1,
                        epoch,
                        remaining: 4u64.saturating_pow(epoch),
                    };
                } else {
                    self.next_epoch += 1;
                    self.phase = DseePhase::Boundary;
                }
            }
            DseePhase::Exploit { arm, epoch, remaining } => {
                self.phase = if remaining > 1 {
                    DseePhase::Exploit {
                        arm,
                        epoch,
                        remaining: remaining - 1,
                    }
                } else {
                    DseePhase::Boundary
                };
            }
            DseePhase::Boundary => {}
        }
    }

    fn enter_epoch(&mut self) {
        let ln_t = (self.t as f64).ln().max(0.0);
        let threshold = 4.0 * self.cfg.big_l / self.cfg.delta * self.n_arms as f64 * ln_t;
        if (self.explore_slots as f64) <= threshold {
            self.phase = DseePhase::Explore {
                arm: 0,
                epoch: self.next_epoch,
                remaining: 4u64.saturating_pow(self.next_epoch),
            };
        } else {
            self.n_exploit += 1;
            let means: Vec<f64> = self
                .sums
                .iter()
                .zip(&self.counts)
                .map(|(&s, &c)| s / c as f64)
                .collect();
            self.phase = DseePhase::Exploit {
                arm: argmax_lowest(&means),
                epoch: self.n_exploit,
                remaining: 2u64.saturating_mul(4u64.saturating_pow(self.n_exploit - 1)),
            };
        }
    }
}

impl Policy for DseePolicy {
    fn step(&mut self, last_reward: Option<f64>) -> Result<Decision> {
        if let Some(r) = last_reward {
            self.apply_observation(r);
        }
        self.t += 1;
        if self.phase == DseePhase::Boundary {
            self.enter_epoch();
        }
        Ok(match self.phase {
            DseePhase::Explore { arm, epoch, .. } => Decision {
                arm,
                phase: SlotPhase::Explore { epoch },
            },
            DseePhase::Exploit { arm, epoch, .. } => Decision {
                arm,
                phase: SlotPhase::Exploit { epoch },
            },
            DseePhase::Boundary => unreachable!("boundary resolved above"),
        })
    }

    fn name(&self) -> &'static str {
        "dsee"
    }
}

/// Upper-confidence-bound selection over regenerative cycles.
///
/// At each cycle boundary the arm maximizing `sbar_i + sqrt(L ln t / T_i)`
/// is played through one full regenerative cycle: first until its anchor
/// state is hit (discarded), then until the anchor is hit again. The second
/// segment, everything after the opening anchor hit through the closing
/// anchor observation, is the recorded renewal cycle; index statistics use
/// only completed cycles. Each arm's anchor is the first state ever observed
/// on it.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RcaConfig {
    /// Effective concentration constant in the confidence radius.
    pub big_l: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum RcaPhase {
    Boundary,
    /// First-ever slot on this arm; its observation defines the anchor.
    AnchorInit { arm: usize },
    /// Hunting for the anchor (discarded).
    Seg1 { arm: usize },
    /// Recording the renewal segment.
    Seg2 {
        arm: usize,
        pending_sum: f64,
        pending_count: u64,
    },
}

#[derive(Debug, Clone)]
pub struct RcaPolicy {
    cfg: RcaConfig,
    rewards: Vec<Vec<f64>>,
    /// Committed sums/counts over completed cycles only.
    sums: Vec<f64>,
    counts: Vec<u64>,
    cycles: Vec<u32>,
    gamma: Vec<Option<f64>>,
    phase: RcaPhase,
    t: u64,
}

impl RcaPolicy {
    pub fn new(instance: &Instance, cfg: RcaConfig) -> Result<Self> {
        if !cfg.big_l.is_finite() || cfg.big_l <= 0.0 {
            return Err(Error::Config(format!(
                "L must be positive, got {}",
                cfg.big_l
            )));
        }
        let n = instance.n_arms();
        Ok(RcaPolicy {
            cfg,
            rewards: instance.arms.iter().map(|a| a.rewards.clone()).collect(),
            sums: vec![0.0; n],
            counts: vec![0; n],
            cycles: vec![0; n],
            gamma: vec![None; n],
            phase: RcaPhase::Boundary,
            t: 0,
        })
    }

    /// Completed-cycle sample counts per arm.
    pub fn sample_counts(&self) -> &[u64] {
        &self.counts
    }

    fn check_observation(&self, arm: usize, reward: f64) -> Result<()> {
        if self.rewards[arm].contains(&reward) {
            Ok(())
        } else {
            Err(Error::ModelMismatch { arm, reward })
        }
    }

    fn apply_observation(&mut self, reward: f64) -> Result<()> {
        match self.phase {
            RcaPhase::AnchorInit { arm } => {
                self.check_observation(arm, reward)?;
                self.gamma[arm] = Some(reward);
                self.phase = RcaPhase::Seg2 {
                    arm,
                    pending_sum: 0.0,
                    pending_count: 0,
                };
            }
            RcaPhase::Seg1 { arm } => {
                self.check_observation(arm, reward)?;
                if Some(reward) == self.gamma[arm] {
                    self.phase = RcaPhase::Seg2 {
                        arm,
                        pending_sum: 0.0,
                        pending_count: 0,
                    };
                }
            }
            RcaPhase::Seg2 {
                arm,
                pending_sum,
                pending_count,
            } => {
                self.check_observation(arm, reward)?;
                let sum = pending_sum + reward;
                let count = pending_count + 1;
                if Some(reward) == self.gamma[arm] {
                    self.sums[arm] += sum;
                    self.counts[arm] += count;
                    self.cycles[arm] += 1;
                    self.phase = RcaPhase::Boundary;
                } else {
                    self.phase = RcaPhase::Seg2 {
                        arm,
                        pending_sum: sum,
                        pending_count: count,
                    };
                }
            }
            RcaPhase::Boundary => {
                return Err(Error::Numeric("observation at cycle boundary".into()));
            }
        }
        Ok(())
    }

    fn enter_cycle(&mut self) {
        let ln_t = (self.t as f64).ln().max(0.0);
        let indices: Vec<f64> = self
            .counts
            .iter()
            .zip(&self.sums)
            .map(|(&c, &s)| {
                if c == 0 {
                    f64::INFINITY
                } else {
                    s / c as f64 + (self.cfg.big_l * ln_t / c as f64).sqrt()
                }
            })
            .collect();
        let arm = argmax_lowest(&indices);
        self.phase = if self.gamma[arm].is_none() {
            RcaPhase::AnchorInit { arm }
        } else {
            RcaPhase::Seg1 { arm }
        };
    }
}

impl Policy for RcaPolicy {
    fn step(&mut self, last_reward: Option<f64>) -> Result<Decision> {
        if let Some(r) = last_reward {
            self.apply_observation(r)?;
        }
        self.t += 1;
        if self.phase == RcaPhase::Boundary {
            self.enter_cycle();
        }
        Ok(match self.phase {
            RcaPhase::AnchorInit { arm } | RcaPhase::Seg1 { arm } => Decision {
                arm,
                phase: SlotPhase::CycleDiscard {
                    cycle: self.cycles[arm],
                },
            },
            RcaPhase::Seg2 { arm, .. } => Decision {
                arm,
                phase: SlotPhase::CycleSample {
                    cycle: self.cycles[arm],
                },
            },
            RcaPhase::Boundary => unreachable!("boundary resolved above"),
        })
    }

    fn name(&self) -> &'static str {
        "rca"
    }
}

/// Always plays the arm with the highest true stationary mean.
#[derive(Debug, Clone)]
pub struct OraclePolicy {
    best: usize,
}

impl OraclePolicy {
    pub fn new(instance: &Instance) -> Self {
        OraclePolicy {
            best: instance.stats.best_arm(),
        }
    }
}

impl Policy for OraclePolicy {
    fn step(&mut self, _last_reward: Option<f64>) -> Result<Decision> {
        Ok(Decision {
            arm: self.best,
            phase: SlotPhase::Fixed,
        })
    }

    fn name(&self) -> &'static str {
        "oracle"
    }
}

/// Plays one chosen arm forever (diagnostics; not exposed on the CLI).
#[derive(Debug, Clone)]
pub struct FixedPolicy {
    arm: usize,
}

impl FixedPolicy {
    pub fn new(arm: usize) -> Self {
        FixedPolicy { arm }
    }
}

impl Policy for FixedPolicy {
    fn step(&mut self, _last_reward: Option<f64>) -> Result<Decision> {
        Ok(Decision {
            arm: self.arm,
            phase: SlotPhase::Fixed,
        })
    }

    fn name(&self) -> &'static str {
        "fixed"
    }
}

/// Picks a uniformly random arm each slot.
#[derive(Debug, Clone)]
pub struct RandomPolicy {
    n_arms: usize,
    rng: ChaCha8Rng,
}

impl RandomPolicy {
    pub fn new(instance: &Instance, rng: ChaCha8Rng) -> Self {
        RandomPolicy {
            n_arms: instance.n_arms(),
            rng,
        }
    }
}

impl Policy for RandomPolicy {
    fn step(&mut self, _last_reward: Option<f64>) -> Result<Decision> {
        Ok(Decision {
            arm: self.rng.random_range(0..self.n_arms),
            phase: SlotPhase::Uniform,
        })
    }

    fn name(&self) -> &'static str {
        "random"
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::markov::ArmSpec;

    fn two_state_arm(p01: f64, p10: f64) -> ArmSpec {
        ArmSpec::new(
            vec![0.1, 1.0],
            vec![vec![1.0 - p01, p01], vec![p10, 1.0 - p10]],
        )
        .unwrap()
    }

    fn three_arm_instance() -> Instance {
        Instance::new(
            vec![
                two_state_arm(0.1, 0.2),
                two_state_arm(0.5, 0.1),
                two_state_arm(0.3, 0.3),
            ],
            0.0,
            0.0,
        )
        .unwrap()
    }

    #[test]
    fn dsee_requires_positive_delta() {
        let inst = three_arm_instance();
        let err = DseePolicy::new(&inst, DseeConfig { big_l: 1.0, delta: 0.0 }).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn dsee_starts_exploring_and_round_robins() {
        let inst = three_arm_instance();
        let mut p = DseePolicy::new(&inst, DseeConfig { big_l: 100.0, delta: 0.1 }).unwrap();
        // Epoch 0, one slot per arm.
        let mut last = None;
        for expect in [0usize, 1, 2] {
            let d = p.step(last).unwrap();
            assert_eq!(d.arm, expect);
            assert_eq!(d.phase, SlotPhase::Explore { epoch: 0 });
            last = Some(1.0);
        }
        // Epoch 1: N * 4 consecutive slots, four per arm.
        for expect in [0usize, 0, 0, 0, 1, 1, 1, 1, 2, 2, 2, 2] {
            let d = p.step(last).unwrap();
            assert_eq!(d.arm, expect);
            assert_eq!(d.phase, SlotPhase::Explore { epoch: 1 });
        }
        // Per-arm exploration counts are equal at the boundary.
        p.step(last).unwrap();
        let c = p.exploration_counts();
        assert_eq!(c[0], c[1]);
        assert_eq!(c[1], c[2]);
    }

    #[test]
    fn dsee_exploits_geometrically_once_explored_enough() {
        let inst = three_arm_instance();
        // Tiny L: the exploration budget is exhausted right after epoch 0.
        let mut p = DseePolicy::new(&inst, DseeConfig { big_l: 1e-9, delta: 0.1 }).unwrap();
        let mut last = None;
        let mut exploit_lengths: Vec<(u32, u64)> = Vec::new();
        for _ in 0..(3 + 2 + 8 + 1) {
            let d = p.step(last).unwrap();
            if let SlotPhase::Exploit { epoch } = d.phase {
                match exploit_lengths.last_mut() {
                    Some((e, n)) if *e == epoch => *n += 1,
                    _ => exploit_lengths.push((epoch, 1)),
                }
                // Selection is the best exploration mean; with identical 1.0
                // observations ties break to arm 0.
                assert_eq!(d.arm, 0);
            }
            last = Some(1.0);
        }
        assert_eq!(exploit_lengths[0], (1, 2));
        assert_eq!(exploit_lengths[1], (2, 8));
    }

    #[test]
    fn rca_first_cycles_visit_every_arm_once() {
        let inst = three_arm_instance();
        let mut p = RcaPolicy::new(&inst, RcaConfig { big_l: 1.0 }).unwrap();
        // Arm 0: anchor-init slot (observation 1.0 becomes the anchor), then
        // the cycle runs until 1.0 recurs.
        let d = p.step(None).unwrap();
        assert_eq!(d.arm, 0);
        assert_eq!(d.phase, SlotPhase::CycleDiscard { cycle: 0 });
        let d = p.step(Some(1.0)).unwrap();
        assert_eq!(d.arm, 0);
        assert_eq!(d.phase, SlotPhase::CycleSample { cycle: 0 });
        let d = p.step(Some(0.1)).unwrap();
        assert_eq!(d.phase, SlotPhase::CycleSample { cycle: 0 });
        // Closing anchor hit finishes arm 0's cycle; arm 1 (count 0, index
        // infinite) is next.
        let d = p.step(Some(1.0)).unwrap();
        assert_eq!(d.arm, 1);
        // Recorded segment was {0.1, 1.0}: the closing anchor is recorded,
        // the opening one is not.
        assert_eq!(p.counts[0], 2);
        assert_eq!(p.sums[0], 1.1);
        assert_eq!(p.cycles[0], 1);
        // Send arm 1 through a one-slot cycle (anchor recurs immediately).
        let d = p.step(Some(0.1)).unwrap();
        assert_eq!(d.arm, 1);
        assert_eq!(d.phase, SlotPhase::CycleSample { cycle: 0 });
        let d = p.step(Some(0.1)).unwrap();
        assert_eq!(d.arm, 2, "third cycle visits the last uninitialized arm");
        assert_eq!(p.counts[1], 1);
    }

    #[test]
    fn rca_index_ignores_incomplete_cycles() {
        let inst = three_arm_instance();
        let mut p = RcaPolicy::new(&inst, RcaConfig { big_l: 1.0 }).unwrap();
        p.step(None).unwrap();
        p.step(Some(1.0)).unwrap();
        // Mid-cycle: nothing committed yet.
        assert_eq!(p.counts, vec![0, 0, 0]);
        p.step(Some(0.1)).unwrap();
        assert_eq!(p.counts, vec![0, 0, 0]);
    }

    #[test]
    fn oracle_plays_the_best_arm_constantly() {
        let inst = three_arm_instance();
        // Means: 0.4, 0.85, 0.55; arm 1 is best.
        let mut p = OraclePolicy::new(&inst);
        for _ in 0..5 {
            assert_eq!(p.step(Some(1.0)).unwrap().arm, 1);
        }
    }
}
