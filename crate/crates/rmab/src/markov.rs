//! Finite-state Markov reward chains and their derived statistics.
//!
//! Each arm is an irreducible, aperiodic, reversible chain over a finite set
//! of reward states. The reward value *is* the state: observing a reward
//! identifies the state exactly, which is why rewards must be distinct and
//! strictly positive within an arm.
//!
//! Derived quantities per chain:
//! - stationary distribution `pi` (fixed linear solve, not iteration);
//! - stationary mean `mu = sum_s s * pi(s)`;
//! - second-largest eigenvalue `lambda2` and gap `1 - lambda2`, computed on
//!   the symmetric similarity `D^{1/2} P D^{-1/2}` (valid exactly because the
//!   chain is reversible);
//! - mean hitting times `M[x][y]` solving `M[x][y] = 1 + sum_{z != y} P[x][z] M[z][y]`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row sums may deviate from 1 by at most this much.
pub const ROW_SUM_TOL: f64 = 1e-12;
/// Stationarity residual bound: `max_y |(pi P)(y) - pi(y)|`.
pub const STATIONARY_TOL: f64 = 1e-10;
/// Detailed-balance residual bound: `max_{x,y} |pi_x P_xy - pi_y P_yx|`.
pub const REVERSIBILITY_TOL: f64 = 1e-10;

/// One arm: a finite-state Markov chain where state `k` pays `rewards[k]`.
///
/// Validated on construction (and on deserialization): square row-stochastic
/// matrix, strictly positive pairwise-distinct rewards, irreducible and
/// aperiodic support graph. Reversibility is checked later, when the
/// stationary distribution is available (see [`chain_stats`]).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "RawArmSpec")]
pub struct ArmSpec {
    /// Reward of each state, in state order.
    pub rewards: Vec<f64>,
    /// Row-stochastic transition matrix, `transition[x][y] = P(x -> y)`.
    pub transition: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
struct RawArmSpec {
    rewards: Vec<f64>,
    transition: Vec<Vec<f64>>,
}

impl TryFrom<RawArmSpec> for ArmSpec {
    type Error = Error;

    fn try_from(raw: RawArmSpec) -> Result<Self> {
        ArmSpec::new(raw.rewards, raw.transition)
    }
}

impl ArmSpec {
    /// Validate and build an arm.
    pub fn new(rewards: Vec<f64>, transition: Vec<Vec<f64>>) -> Result<Self> {
        let n = rewards.len();
        if n == 0 {
            return Err(Error::Dimension("arm has no states".into()));
        }
        if transition.len() != n {
            return Err(Error::Dimension(format!(
                "{} states but {} transition rows",
                n,
                transition.len()
            )));
        }
        for (x, row) in transition.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Dimension(format!(
                    "transition row {x} has {} entries, expected {n}",
                    row.len()
                )));
            }
            let mut sum = 0.0;
            for (y, &p) in row.iter().enumerate() {
                if !p.is_finite() || !(0.0..=1.0).contains(&p) {
                    return Err(Error::EntryOutOfRange {
                        row: x,
                        col: y,
                        value: p,
                    });
                }
                sum += p;
            }
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::NonStochasticRow { row: x, sum });
            }
        }
        for (k, &s) in rewards.iter().enumerate() {
            if !s.is_finite() || s <= 0.0 {
                return Err(Error::NonPositiveReward { state: k, value: s });
            }
        }
        for a in 0..n {
            for b in (a + 1)..n {
                if rewards[a] == rewards[b] {
                    return Err(Error::DuplicateReward {
                        a,
                        b,
                        value: rewards[a],
                    });
                }
            }
        }
        check_irreducible(&transition)?;
        check_aperiodic(&transition)?;
        Ok(ArmSpec {
            rewards,
            transition,
        })
    }

    /// Number of states.
    pub fn n_states(&self) -> usize {
        self.rewards.len()
    }

    /// State index of an observed reward, exact match on the state set.
    pub fn state_of_reward(&self, reward: f64) -> Option<usize> {
        self.rewards.iter().position(|&s| s == reward)
    }
}

/// Derived per-arm quantities consumed by policies and the bound calculator.
#[derive(Debug, Clone)]
pub struct ChainStats {
    /// Stationary distribution.
    pub pi: Vec<f64>,
    /// Stationary reward mean `sum_s s * pi(s)`.
    pub mu: f64,
    /// Second-largest eigenvalue of the transition matrix.
    pub lambda2: f64,
    /// Eigenvalue gap `1 - lambda2`.
    pub gap: f64,
    /// Mean hitting times, `hitting[x][y]` = expected steps from `x` to first
    /// visit of `y`; zero diagonal. Single-state chains get `[[0.0]]`.
    pub hitting: Vec<Vec<f64>>,
    /// Largest off-diagonal hitting time (0 for a single state).
    pub max_hit: f64,
    /// Sum of state rewards.
    pub reward_sum: f64,
    /// Per-arm switching-cost constant `(min_s pi(s))^{-1} * sum_s s`.
    pub a_p: f64,
}

/// BFS reachability over the support graph, following `edges(x)`.
fn reachable(n: usize, edges: impl Fn(usize) -> Vec<usize>) -> Vec<bool> {
    let mut seen = vec![false; n];
    let mut queue = std::collections::VecDeque::from([0usize]);
    seen[0] = true;
    while let Some(x) = queue.pop_front() {
        for y in edges(x) {
            if !seen[y] {
                seen[y] = true;
                queue.push_back(y);
            }
        }
    }
    seen
}

/// Irreducibility: every state reachable from 0 and vice versa, so the
/// support graph is a single strongly connected component.
fn check_irreducible(p: &[Vec<f64>]) -> Result<()> {
    let n = p.len();
    let fwd = reachable(n, |x| {
        (0..n).filter(|&y| p[x][y] > 0.0).collect::<Vec<_>>()
    });
    let bwd = reachable(n, |x| {
        (0..n).filter(|&y| p[y][x] > 0.0).collect::<Vec<_>>()
    });
    for s in 0..n {
        if !fwd[s] || !bwd[s] {
            return Err(Error::NotIrreducible { state: s });
        }
    }
    Ok(())
}

/// Aperiodicity via the gcd of cycle lengths: BFS levels from state 0, then
/// gcd over support edges (u, v) of `level(u) + 1 - level(v)`. Assumes the
/// graph is already known to be strongly connected.
fn check_aperiodic(p: &[Vec<f64>]) -> Result<()> {
    let n = p.len();
    let mut level = vec![i64::MIN; n];
    level[0] = 0;
    let mut queue = std::collections::VecDeque::from([0usize]);
    while let Some(x) = queue.pop_front() {
        for y in 0..n {
            if p[x][y] > 0.0 && level[y] == i64::MIN {
                level[y] = level[x] + 1;
                queue.push_back(y);
            }
        }
    }
    let mut g: i64 = 0;
    for x in 0..n {
        for y in 0..n {
            if p[x][y] > 0.0 {
                g = gcd(g, (level[x] + 1 - level[y]).abs());
            }
        }
    }
    if g != 1 {
        return Err(Error::Periodic {
            period: g.max(0) as usize,
        });
    }
    Ok(())
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 { a } else { gcd(b, a % b) }
}

/// Stationary distribution of a row-stochastic, irreducible matrix.
///
/// Solves `(P^T - I) pi = 0` with the last equation replaced by the
/// normalization `sum pi = 1`, using an LU factorization with partial
/// pivoting (a fixed algorithm, so results are reproducible bit-for-bit on
/// one platform). The result satisfies `max_y |(pi P)(y) - pi(y)| <= 1e-10`
/// and is strictly positive component-wise.
pub fn stationary_distribution(p: &[Vec<f64>]) -> Result<Vec<f64>> {
    validate_square_stochastic(p)?;
    check_irreducible(p)?;
    let n = p.len();
    if n == 1 {
        return Ok(vec![1.0]);
    }
    let mut a = DMatrix::zeros(n, n);
    for x in 0..n {
        for y in 0..n {
            // Row y of (P^T - I) is the balance equation for state y.
            a[(y, x)] = p[x][y] - if x == y { 1.0 } else { 0.0 };
        }
    }
    for x in 0..n {
        a[(n - 1, x)] = 1.0;
    }
    let mut b = DVector::zeros(n);
    b[n - 1] = 1.0;
    let pi = a
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::Numeric("singular stationary system".into()))?;
    let pi: Vec<f64> = pi.iter().copied().collect();
    let residual = stationary_residual(p, &pi);
    if residual > STATIONARY_TOL || pi.iter().any(|&v| v <= 0.0) {
        return Err(Error::Numeric(format!(
            "stationary solve residual {residual:.3e} or non-positive component"
        )));
    }
    Ok(pi)
}

/// `max_y |(pi P)(y) - pi(y)|`.
pub fn stationary_residual(p: &[Vec<f64>], pi: &[f64]) -> f64 {
    let n = p.len();
    (0..n)
        .map(|y| {
            let flow: f64 = (0..n).map(|x| pi[x] * p[x][y]).sum();
            (flow - pi[y]).abs()
        })
        .fold(0.0, f64::max)
}

/// `max_{x,y} |pi_x P_xy - pi_y P_yx|`.
pub fn detailed_balance_residual(p: &[Vec<f64>], pi: &[f64]) -> f64 {
    let n = p.len();
    let mut worst = 0.0f64;
    for x in 0..n {
        for y in (x + 1)..n {
            worst = worst.max((pi[x] * p[x][y] - pi[y] * p[y][x]).abs());
        }
    }
    worst
}

fn validate_square_stochastic(p: &[Vec<f64>]) -> Result<()> {
    let n = p.len();
    if n == 0 {
        return Err(Error::Dimension("empty transition matrix".into()));
    }
    for (x, row) in p.iter().enumerate() {
        if row.len() != n {
            return Err(Error::Dimension(format!(
                "transition row {x} has {} entries, expected {n}",
                row.len()
            )));
        }
        let mut sum = 0.0;
        for (y, &v) in row.iter().enumerate() {
            if !v.is_finite() || !(0.0..=1.0).contains(&v) {
                return Err(Error::EntryOutOfRange {
                    row: x,
                    col: y,
                    value: v,
                });
            }
            sum += v;
        }
        if (sum - 1.0).abs() > ROW_SUM_TOL {
            return Err(Error::NonStochasticRow { row: x, sum });
        }
    }
    Ok(())
}

/// Second-largest eigenvalue and eigenvalue gap of a reversible chain.
///
/// Reversibility (detailed balance within 1e-10) is a hard precondition: it
/// makes `D^{1/2} P D^{-1/2}` symmetric with the same spectrum as `P`, so the
/// eigenvalues are real and a symmetric eigensolver applies.
pub fn spectral_gap(p: &[Vec<f64>], pi: &[f64]) -> Result<(f64, f64)> {
    let n = p.len();
    if n == 1 {
        // Degenerate single-state chain: gap 1 by convention.
        return Ok((0.0, 1.0));
    }
    let residual = detailed_balance_residual(p, pi);
    if residual > REVERSIBILITY_TOL {
        let (x, y) = worst_balance_pair(p, pi);
        return Err(Error::NotReversible { x, y, residual });
    }
    let mut s = DMatrix::zeros(n, n);
    for x in 0..n {
        for y in 0..n {
            s[(x, y)] = (pi[x] / pi[y]).sqrt() * p[x][y];
        }
    }
    // Average away the last rounding asymmetry before the symmetric solver.
    let sym = (&s + s.transpose()) * 0.5;
    let eigen = sym.symmetric_eigenvalues();
    let mut vals: Vec<f64> = eigen.iter().copied().collect();
    vals.sort_by(|a, b| b.total_cmp(a));
    if (vals[0] - 1.0).abs() > 1e-8 {
        return Err(Error::Numeric(format!(
            "leading eigenvalue {} is not 1",
            vals[0]
        )));
    }
    let lambda2 = vals[1];
    Ok((lambda2, 1.0 - lambda2))
}

fn worst_balance_pair(p: &[Vec<f64>], pi: &[f64]) -> (usize, usize) {
    let n = p.len();
    let mut worst = (0, 0);
    let mut best = -1.0;
    for x in 0..n {
        for y in (x + 1)..n {
            let r = (pi[x] * p[x][y] - pi[y] * p[y][x]).abs();
            if r > best {
                best = r;
                worst = (x, y);
            }
        }
    }
    worst
}

/// Mean hitting times `M[x][y]` for an irreducible chain.
///
/// For each target `y`, solves the linear system
/// `M[x][y] = 1 + sum_{z != y} P[x][z] M[z][y]` over `x != y`; `M[y][y] = 0`.
pub fn mean_hitting_times(p: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    validate_square_stochastic(p)?;
    check_irreducible(p)?;
    let n = p.len();
    let mut m = vec![vec![0.0; n]; n];
    if n == 1 {
        return Ok(m);
    }
    for target in 0..n {
        let others: Vec<usize> = (0..n).filter(|&x| x != target).collect();
        let k = others.len();
        let mut a = DMatrix::zeros(k, k);
        for (i, &x) in others.iter().enumerate() {
            for (j, &z) in others.iter().enumerate() {
                a[(i, j)] = if i == j { 1.0 } else { 0.0 } - p[x][z];
            }
        }
        let b = DVector::from_element(k, 1.0);
        let sol = a.lu().solve(&b).ok_or_else(|| {
            Error::Numeric(format!("singular hitting-time system for target {target}"))
        })?;
        for (i, &x) in others.iter().enumerate() {
            m[x][target] = sol[i];
        }
    }
    Ok(m)
}

/// Draw the next state from row `P[state]` using one uniform variate.
pub fn sample_next<R: Rng + ?Sized>(p: &[Vec<f64>], state: usize, rng: &mut R) -> usize {
    let row = &p[state];
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last_positive = state;
    for (y, &prob) in row.iter().enumerate() {
        if prob > 0.0 {
            acc += prob;
            last_positive = y;
            if u < acc {
                return y;
            }
        }
    }
    // Rounding can leave acc marginally below 1; fall back to the last
    // reachable state.
    last_positive
}

/// All derived statistics for one arm; rejects non-reversible chains.
pub fn chain_stats(arm: &ArmSpec) -> Result<ChainStats> {
    let p = &arm.transition;
    let pi = stationary_distribution(p)?;
    let (lambda2, gap) = spectral_gap(p, &pi)?;
    let mu = arm
        .rewards
        .iter()
        .zip(&pi)
        .map(|(&s, &w)| s * w)
        .sum::<f64>();
    let hitting = mean_hitting_times(p)?;
    let hit_residual = hitting_residual(p, &hitting);
    if hit_residual > 1e-8 {
        return Err(Error::Numeric(format!(
            "hitting-time residual {hit_residual:.3e}"
        )));
    }
    let max_hit = hitting
        .iter()
        .enumerate()
        .flat_map(|(x, row)| {
            row.iter()
                .enumerate()
                .filter(move |(y, _)| *y != x)
                .map(|(_, &v)| v)
        })
        .fold(0.0, f64::max);
    let reward_sum: f64 = arm.rewards.iter().sum();
    let pi_min = pi.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(ChainStats {
        pi,
        mu,
        lambda2,
        gap,
        hitting,
        max_hit,
        reward_sum,
        a_p: reward_sum / pi_min,
    })
}

/// `max_{x != y} |M[x][y] - 1 - sum_{z != y} P[x][z] M[z][y]|`.
pub fn hitting_residual(p: &[Vec<f64>], m: &[Vec<f64>]) -> f64 {
    let n = p.len();
    let mut worst = 0.0f64;
    for x in 0..n {
        for y in 0..n {
            if x == y {
                continue;
            }
            let rhs: f64 = 1.0
                + (0..n)
                    .filter(|&z| z != y)
                    .map(|z| p[x][z] * m[z][y])
                    .sum::<f64>();
            worst = worst.max((m[x][y] - rhs).abs());
        }
    }
    worst
}
