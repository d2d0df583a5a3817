//! The slot-by-slot policy interface shared by all arm-selection strategies.
//!
//! The regret engine drives every policy the same way: once per time slot it
//! calls [`Policy::step`] with the reward observed for the previously
//! returned arm (`None` on the first slot) and receives the arm to play now,
//! tagged with the phase that slot belongs to. The phase tags feed the
//! instrumentation log that the structural epoch tests consume.

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// What kind of slot a policy decision belongs to.
///
/// Epoch indices follow the sequencing-rule convention: the initialization
/// pass is exploration epoch 0 (one slot per arm, no random sub-block), so
/// exploration epoch `k` has a deterministic sub-block of length `4^k`.
/// Exploitation epochs are 1-based with length `2 * 4^(n-1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SlotPhase {
    /// Random-length sub-block hunting for the anchor state (samples are
    /// discarded from all means).
    Sb1 { epoch: u32 },
    /// Deterministic exploration sub-block; samples feed the exploration
    /// means.
    Sb2 { epoch: u32 },
    /// Exploitation epoch slot.
    Exploit { epoch: u32 },
    /// Deterministic round-robin exploration slot (epoch-sequencing
    /// baseline).
    Explore { epoch: u32 },
    /// Regenerative-cycle slot before the anchor is hit (discarded).
    CycleDiscard { cycle: u32 },
    /// Regenerative-cycle slot from the anchor hit through the return to the
    /// anchor.
    CycleSample { cycle: u32 },
    /// Constant-arm policy slot.
    Fixed,
    /// Uniform-random policy slot.
    Uniform,
}

/// One slot decision: which arm to play and what phase the slot belongs to.
#[derive(Debug, Clone, Copy)]
pub struct Decision {
    pub arm: usize,
    pub phase: SlotPhase,
}

/// A single-owner, slot-by-slot arm-selection state machine.
///
/// Implementations are deterministic functions of their observation history
/// (any internal randomness comes from a seed fixed at construction), so an
/// identical (config, instance, seed) triple reproduces the action sequence
/// bit for bit.
pub trait Policy {
    /// Advance one slot. `last_reward` is the reward observed for the arm
    /// returned by the previous call; it is ignored on the first call.
    fn step(&mut self, last_reward: Option<f64>) -> Result<Decision>;

    /// Short label used in CSV output.
    fn name(&self) -> &'static str;
}

/// Index of the maximum value, lowest index on ties.
pub(crate) fn argmax_lowest(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}
