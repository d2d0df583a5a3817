//! Scenario presets and custom-scenario loading.
//!
//! The two-state presets are Gilbert-Elliott channel banks: each arm is a
//! channel with a bad state (reward 0.1) and a good state (reward 1.0), and
//! per-arm switching probabilities `p01` (bad to good) and `p10` (good to
//! bad). The 20-state preset is a reconstruction (the original matrices are
//! not published) built from a fixed-seed Metropolis construction, so it is
//! reproducible but not claimed identical to any external source.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::markov::ArmSpec;

/// A named bank of arms.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Scenario {
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub arms: Vec<ArmSpec>,
}

impl Scenario {
    /// Build the validated instance for this scenario.
    pub fn instance(&self, epsilon: f64, delta: f64) -> Result<Instance> {
        Instance::new(self.arms.clone(), epsilon, delta)
    }
}

/// Two-state Gilbert-Elliott arm: state 0 pays `r0`, state 1 pays `r1`.
pub fn gilbert_elliott(p01: f64, p10: f64, r0: f64, r1: f64) -> Result<ArmSpec> {
    ArmSpec::new(
        vec![r0, r1],
        vec![vec![1.0 - p01, p01], vec![p10, 1.0 - p10]],
    )
}

fn two_state_bank(name: &str, description: &str, p01: &[f64], p10: &[f64]) -> Scenario {
    let arms = p01
        .iter()
        .zip(p10)
        .map(|(&a, &b)| gilbert_elliott(a, b, 0.1, 1.0).expect("preset arms are valid"))
        .collect();
    Scenario {
        name: name.to_string(),
        description: description.to_string(),
        arms,
    }
}

/// Preset names recognized by [`load_scenario`], with one-line descriptions.
pub fn preset_names() -> &'static [(&'static str, &'static str)] {
    &[
        (
            "fig_5arm",
            "5 Gilbert-Elliott arms, two states each; the standard comparison bank",
        ),
        (
            "fig_10arm",
            "10 Gilbert-Elliott arms; stresses scaling with the number of arms",
        ),
        (
            "fig_closegap",
            "5 arms with the top two means only 0.03 apart",
        ),
        (
            "fig_20state",
            "5 arms with 20 states each (fixed-seed reconstruction)",
        ),
        (
            "fig_bursty",
            "5 arms with small switching probabilities (long hitting times)",
        ),
    ]
}

/// Look up a preset by name.
pub fn preset(name: &str) -> Option<Scenario> {
    match name {
        "fig_5arm" => Some(two_state_bank(
            "fig_5arm",
            "5 arms, two states each: p01 = [0.1, 0.1, 0.5, 0.1, 0.1], p10 = [0.2, 0.3, 0.1, 0.4, 0.5], rewards 1 / 0.1",
            &[0.1, 0.1, 0.5, 0.1, 0.1],
            &[0.2, 0.3, 0.1, 0.4, 0.5],
        )),
        "fig_10arm" => Some(two_state_bank(
            "fig_10arm",
            "10 arms, two states each: p01 = [0.1, 0.1, 0.5, 0.1, 0.1, 0.2, 0.1, 0.2, 0.15, 0.25], p10 = [0.2, 0.3, 0.1, 0.4, 0.5, 0.45, 0.35, 0.3, 0.5, 0.4]",
            &[0.1, 0.1, 0.5, 0.1, 0.1, 0.2, 0.1, 0.2, 0.15, 0.25],
            &[0.2, 0.3, 0.1, 0.4, 0.5, 0.45, 0.35, 0.3, 0.5, 0.4],
        )),
        "fig_closegap" => Some(two_state_bank(
            "fig_closegap",
            "5 arms, two states each, top mean gap 0.03: p01 = [0.1, 0.8, 0.5, 0.1, 0.1], p10 = [0.2, 0.2, 0.1, 0.4, 0.5]",
            &[0.1, 0.8, 0.5, 0.1, 0.1],
            &[0.2, 0.2, 0.1, 0.4, 0.5],
        )),
        "fig_bursty" => Some(two_state_bank(
            "fig_bursty",
            "5 bursty arms: p01 = [0.04, 0.05, 0.36, 0.05, 0.06], p10 = [0.08, 0.15, 0.09, 0.05, 0.18]",
            &[0.04, 0.05, 0.36, 0.05, 0.06],
            &[0.08, 0.15, 0.09, 0.05, 0.18],
        )),
        "fig_20state" => Some(twenty_state_bank()),
        _ => None,
    }
}

/// 5 random 20-state reversible chains from the fixed generator seed 20.
///
/// Rewards are evenly spaced, `(k + 1) / 20` for state `k`. Each arm draws a
/// smoothed random stationary target (normalized `0.5 + U[0,1)` weights,
/// keeping every mass above 1.7%) and realizes it with a Metropolis kernel
/// under a uniform proposal, which is reversible for the target by
/// construction.
fn twenty_state_bank() -> Scenario {
    const N_ARMS: usize = 5;
    const N_STATES: usize = 20;
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let rewards: Vec<f64> = (0..N_STATES).map(|k| (k + 1) as f64 / 20.0).collect();
    let arms = (0..N_ARMS)
        .map(|_| {
            let raw: Vec<f64> = (0..N_STATES).map(|_| 0.5 + rng.random::<f64>()).collect();
            let total: f64 = raw.iter().sum();
            let target: Vec<f64> = raw.iter().map(|w| w / total).collect();
            let q = 1.0 / N_STATES as f64;
            let mut p = vec![vec![0.0; N_STATES]; N_STATES];
            for x in 0..N_STATES {
                let mut off = 0.0;
                for y in 0..N_STATES {
                    if y != x {
                        p[x][y] = q * (target[y] / target[x]).min(1.0);
                        off += p[x][y];
                    }
                }
                p[x][x] = 1.0 - off;
            }
            ArmSpec::new(rewards.clone(), p).expect("metropolis chains are valid")
        })
        .collect();
    Scenario {
        name: "fig_20state".to_string(),
        description: "5 arms, 20 states each; Metropolis reconstruction with generator seed 20"
            .to_string(),
        arms,
    }
}

/// Load a preset by name, or a custom scenario from a JSON file.
///
/// A custom file holds `{"name": ..., "description": ..., "arms": [{"rewards":
/// [..], "transition": [[..], ..]}, ..]}`; `name` and `description` are
/// optional. Every arm is validated on parse.
pub fn load_scenario(name_or_path: &str) -> Result<Scenario> {
    if let Some(s) = preset(name_or_path) {
        return Ok(s);
    }
    let path = Path::new(name_or_path);
    if !path.is_file() {
        return Err(Error::UnknownScenario(name_or_path.to_string()));
    }
    let text = std::fs::read_to_string(path)?;
    let mut scenario: Scenario = serde_json::from_str(&text)?;
    if scenario.arms.is_empty() {
        return Err(Error::Config("scenario has no arms".into()));
    }
    if scenario.name.is_empty() {
        scenario.name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "custom".to_string());
    }
    Ok(scenario)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::io::Write;

    #[test]
    fn five_arm_preset_carries_the_published_parameters() {
        let s = preset("fig_5arm").unwrap();
        assert_eq!(s.arms.len(), 5);
        let p01: Vec<f64> = s.arms.iter().map(|a| a.transition[0][1]).collect();
        let p10: Vec<f64> = s.arms.iter().map(|a| a.transition[1][0]).collect();
        assert_eq!(p01, vec![0.1, 0.1, 0.5, 0.1, 0.1]);
        assert_eq!(p10, vec![0.2, 0.3, 0.1, 0.4, 0.5]);
        assert!(s.arms.iter().all(|a| a.rewards == vec![0.1, 1.0]));
    }

    #[test]
    fn bursty_preset_carries_the_published_parameters() {
        let s = preset("fig_bursty").unwrap();
        let p01: Vec<f64> = s.arms.iter().map(|a| a.transition[0][1]).collect();
        let p10: Vec<f64> = s.arms.iter().map(|a| a.transition[1][0]).collect();
        assert_eq!(p01, vec![0.04, 0.05, 0.36, 0.05, 0.06]);
        assert_eq!(p10, vec![0.08, 0.15, 0.09, 0.05, 0.18]);
    }

    #[test]
    fn closegap_preset_top_gap_is_three_hundredths() {
        let inst = preset("fig_closegap").unwrap().instance(0.0, 0.0).unwrap();
        assert_abs_diff_eq!(inst.stats.mean_gap(1), 0.03, epsilon = 1e-12);
    }

    #[test]
    fn twenty_state_preset_is_valid_and_deterministic() {
        let a = preset("fig_20state").unwrap();
        let b = preset("fig_20state").unwrap();
        assert_eq!(a.arms.len(), 5);
        assert!(a.arms.iter().all(|arm| arm.n_states() == 20));
        for (x, y) in a.arms.iter().zip(&b.arms) {
            assert_eq!(x.transition, y.transition);
        }
        // Reversible by construction: the full instance builds.
        let inst = a.instance(0.0, 0.0).unwrap();
        assert!(inst.stats.gap_min > 0.0);
    }

    #[test]
    fn every_preset_loads_by_name() {
        for (name, _) in preset_names() {
            let s = load_scenario(name).unwrap();
            assert_eq!(&s.name, name);
            assert!(s.instance(0.0, 0.0).is_ok(), "{name} fails validation");
        }
    }

    #[test]
    fn custom_file_round_trip() {
        let dir = std::env::temp_dir();
        let path = dir.join("rmab_scenario_ok.json");
        let mut f = std::fs::File::create(&path).unwrap();
        write!(
            f,
            r#"{{"arms": [
                {{"rewards": [0.1, 1.0], "transition": [[0.9, 0.1], [0.2, 0.8]]}},
                {{"rewards": [0.1, 1.0], "transition": [[0.5, 0.5], [0.1, 0.9]]}}
            ]}}"#
        )
        .unwrap();
        let s = load_scenario(path.to_str().unwrap()).unwrap();
        assert_eq!(s.arms.len(), 2);
        assert_eq!(s.name, "rmab_scenario_ok");
    }

    #[test]
    fn non_stochastic_row_is_rejected_with_its_index() {
        let dir = std::env::temp_dir();
        let path = dir.join("rmab_scenario_bad.json");
        let mut f = std::fs::File::create(&path).unwrap();
        write!(
            f,
            r#"{{"arms": [{{"rewards": [0.1, 1.0], "transition": [[0.9, 0.1], [0.3, 0.8]]}}]}}"#
        )
        .unwrap();
        let err = load_scenario(path.to_str().unwrap()).unwrap_err();
        assert!(err.to_string().contains("row 1"), "message: {err}");
    }

    #[test]
    fn unknown_name_is_an_error() {
        let err = load_scenario("fig_does_not_exist").unwrap_err();
        assert!(matches!(err, Error::UnknownScenario(_)));
    }
}
