//! Core domain types shared by every other module: reward matrices, urn
//! states, policy parameters, and the derived gap/drift quantities that the
//! trajectory and regret formulas are built from.
//!
//! Conventions: all indices are 0-based, and type 0 is the target type whose
//! population share the recommender is shaping. Arm `i` is the preferred arm
//! of type `i`.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};

/// Index of the user type whose population share is being maximized.
pub const TARGET_TYPE: usize = 0;

/// Square matrix of mean Bernoulli rewards: entry `(i, j)` is the probability
/// that a type-`i` user rewards arm `j`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RewardMatrix {
    n_arms: usize,
    entries: Vec<f64>,
}

impl RewardMatrix {
    /// Builds a matrix from rows, validating shape and entry ranges.
    pub fn new(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n < 2 {
            return Err(Error::TooFewArms(n));
        }
        let mut entries = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::NotSquare {
                    rows: n,
                    row: i,
                    len: row.len(),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                if !(0.0..=1.0).contains(&v) || !v.is_finite() {
                    return Err(Error::EntryOutOfRange {
                        row: i,
                        col: j,
                        value: v,
                    });
                }
                entries.push(v);
            }
        }
        Ok(Self { n_arms: n, entries })
    }

    /// Convenience constructor for the two-arm case, entries in row-major
    /// order: `(b11, b12, b21, b22)` in the usual cell naming.
    pub fn two_arm(b11: f64, b12: f64, b21: f64, b22: f64) -> Result<Self> {
        Self::new(&[vec![b11, b12], vec![b21, b22]])
    }

    /// N-arm matrix with a common diagonal and a common off-diagonal value.
    pub fn with_diagonal(n_arms: usize, diag: f64, off: f64) -> Result<Self> {
        let rows: Vec<Vec<f64>> = (0..n_arms)
            .map(|i| (0..n_arms).map(|j| if i == j { diag } else { off }).collect())
            .collect();
        Self::new(&rows)
    }

    pub fn n_arms(&self) -> usize {
        self.n_arms
    }

    /// Mean reward when a type-`user_type` user is shown `arm`.
    pub fn mean(&self, user_type: usize, arm: usize) -> f64 {
        self.entries[user_type * self.n_arms + arm]
    }

    pub fn row(&self, user_type: usize) -> &[f64] {
        &self.entries[user_type * self.n_arms..(user_type + 1) * self.n_arms]
    }

    fn require_two_arm(&self) -> Result<()> {
        if self.n_arms != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                got: self.n_arms,
            });
        }
        Ok(())
    }

    /// True when the two-arm matrix is symmetric in the sense `b11 = b22`
    /// and `b12 = b21` (the case covered by the closed-form ETC bound).
    pub fn is_symmetric_two_arm(&self) -> bool {
        self.n_arms == 2 && self.mean(0, 0) == self.mean(1, 1) && self.mean(0, 1) == self.mean(1, 0)
    }

    /// Gap pair `(|b11 + b12 - 1|, |b22 + b21 - 1|)`; the per-step regret
    /// scale of each user type. Two-arm only.
    pub fn gaps(&self) -> Result<Gaps> {
        self.require_two_arm()?;
        Ok(Gaps {
            delta1: (self.mean(0, 0) + self.mean(0, 1) - 1.0).abs(),
            delta2: (self.mean(1, 1) + self.mean(1, 0) - 1.0).abs(),
        })
    }

    /// Drift pair under a fixed `(p, q)` policy:
    /// `d1 = p(1 - b11) + (1 - p) b12` is the outflow rate of target-type
    /// balls, `d2 = q(1 - b22) + (1 - q) b21` the inflow rate. Two-arm only.
    pub fn drift(&self, policy: &TwoArmPolicy) -> Result<DriftPair> {
        self.require_two_arm()?;
        let (p, q) = (policy.p(), policy.q());
        Ok(DriftPair {
            d1: p * (1.0 - self.mean(0, 0)) + (1.0 - p) * self.mean(0, 1),
            d2: q * (1.0 - self.mean(1, 1)) + (1.0 - q) * self.mean(1, 0),
        })
    }
}

/// Gap pair: distances of the two row sums `b_i1 + b_i2` from 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Gaps {
    pub delta1: f64,
    pub delta2: f64,
}

/// Drift pair of a fixed two-arm policy; the asymptotic target share is
/// `d2 / (d1 + d2)` whenever the pair is non-degenerate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DriftPair {
    pub d1: f64,
    pub d2: f64,
}

impl DriftPair {
    pub fn total(&self) -> f64 {
        self.d1 + self.d2
    }

    /// Degenerate drift freezes the population share at its initial value.
    pub fn is_degenerate(&self) -> bool {
        self.total() == 0.0
    }
}

/// Randomized two-arm policy: `p` is the probability of showing arm 0 to a
/// type-0 user, `q` the probability of showing arm 1 to a type-1 user.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoArmPolicy {
    p: f64,
    q: f64,
}

impl TwoArmPolicy {
    pub fn new(p: f64, q: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) || !p.is_finite() {
            return Err(Error::InvalidProbability { name: "p", value: p });
        }
        if !(0.0..=1.0).contains(&q) || !q.is_finite() {
            return Err(Error::InvalidProbability { name: "q", value: q });
        }
        Ok(Self { p, q })
    }

    /// Deterministic policy on a corner of the unit square.
    pub fn corner(p: bool, q: bool) -> Self {
        Self {
            p: if p { 1.0 } else { 0.0 },
            q: if q { 1.0 } else { 0.0 },
        }
    }

    /// The four deterministic policies `(0,0), (0,1), (1,0), (1,1)`.
    pub fn corners() -> [Self; 4] {
        [
            Self::corner(false, false),
            Self::corner(false, true),
            Self::corner(true, false),
            Self::corner(true, true),
        ]
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// Samples the recommended arm for a user of the given type.
    pub fn sample_arm<R: Rng + ?Sized>(&self, user_type: usize, rng: &mut R) -> usize {
        let own = match user_type {
            0 => rng.random::<f64>() < self.p,
            1 => rng.random::<f64>() < self.q,
            other => panic!("two-arm policy asked for user type {other}"),
        };
        if own {
            user_type
        } else {
            1 - user_type
        }
    }
}

/// Row-stochastic N x N policy: entry `(i, j)` is the probability that arm
/// `j` is shown to a type-`i` user.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolicyMatrix {
    n_arms: usize,
    probs: Vec<f64>,
}

impl PolicyMatrix {
    pub fn new(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n < 2 {
            return Err(Error::TooFewArms(n));
        }
        let mut probs = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::NotSquare {
                    rows: n,
                    row: i,
                    len: row.len(),
                });
            }
            let mut sum = 0.0;
            for (j, &v) in row.iter().enumerate() {
                if v < 0.0 || !v.is_finite() {
                    return Err(Error::NegativePolicyEntry {
                        row: i,
                        col: j,
                        value: v,
                    });
                }
                sum += v;
            }
            if (sum - 1.0).abs() > 1e-9 {
                return Err(Error::NotRowStochastic { row: i, sum });
            }
            probs.extend_from_slice(row);
        }
        Ok(Self { n_arms: n, probs })
    }

    /// Deterministic policy: row `i` puts all mass on `chosen[i]`.
    pub fn deterministic(n_arms: usize, chosen: &[usize]) -> Self {
        debug_assert_eq!(chosen.len(), n_arms);
        let mut probs = vec![0.0; n_arms * n_arms];
        for (i, &j) in chosen.iter().enumerate() {
            probs[i * n_arms + j] = 1.0;
        }
        Self { n_arms, probs }
    }

    pub fn n_arms(&self) -> usize {
        self.n_arms
    }

    pub fn prob(&self, user_type: usize, arm: usize) -> f64 {
        self.probs[user_type * self.n_arms + arm]
    }

    pub fn row(&self, user_type: usize) -> &[f64] {
        &self.probs[user_type * self.n_arms..(user_type + 1) * self.n_arms]
    }

    /// Arm with the largest probability in the row; lowest index on ties.
    pub fn argmax_arm(&self, user_type: usize) -> usize {
        let row = self.row(user_type);
        let mut best = 0;
        for (j, &v) in row.iter().enumerate().skip(1) {
            if v > row[best] {
                best = j;
            }
        }
        best
    }

    /// Samples an arm for the given user type from the policy row.
    pub fn sample_arm<R: Rng + ?Sized>(&self, user_type: usize, rng: &mut R) -> usize {
        let row = self.row(user_type);
        let mut u = rng.random::<f64>();
        for (j, &v) in row.iter().enumerate() {
            if u < v {
                return j;
            }
            u -= v;
        }
        self.n_arms - 1
    }
}

/// Composition of the preference urn: one ball color per user type.
///
/// Ball counts are the authoritative state; shares are always derived.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UrnState {
    counts: Vec<u64>,
    time: u64,
    initial_total: u64,
}

impl UrnState {
    /// Fresh urn at time 0; `counts[i]` balls of color `i`.
    pub fn new(counts: Vec<u64>) -> Result<Self> {
        if counts.len() < 2 {
            return Err(Error::TooFewArms(counts.len()));
        }
        let initial_total = counts.iter().sum();
        Ok(Self {
            counts,
            time: 0,
            initial_total,
        })
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn n_colors(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Steps taken so far.
    pub fn time(&self) -> u64 {
        self.time
    }

    /// Ball count at time 0 (the `N0` of the trajectory formulas).
    pub fn initial_total(&self) -> u64 {
        self.initial_total
    }

    /// Fraction of balls of the given color; 0 for an empty urn.
    pub fn share(&self, color: usize) -> f64 {
        let total = self.total();
        if total == 0 {
            0.0
        } else {
            self.counts[color] as f64 / total as f64
        }
    }

    /// Share of the target type (color 0).
    pub fn target_share(&self) -> f64 {
        self.share(TARGET_TYPE)
    }

    /// Successor state one step later; used by the dynamics module.
    pub(crate) fn evolved(&self, counts: Vec<u64>) -> Self {
        Self {
            counts,
            time: self.time + 1,
            initial_total: self.initial_total,
        }
    }
}

/// Beta posterior parameters per (user type, arm) cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PosteriorState {
    n_arms: usize,
    alpha: Vec<f64>,
    beta: Vec<f64>,
}

impl PosteriorState {
    /// Uniform priors: every cell starts at `Beta(1, 1)`.
    pub fn uniform(n_arms: usize) -> Self {
        Self {
            n_arms,
            alpha: vec![1.0; n_arms * n_arms],
            beta: vec![1.0; n_arms * n_arms],
        }
    }

    /// Builds a posterior from explicit parameters, row-major per cell.
    pub fn with_params(n_arms: usize, alpha: Vec<f64>, beta: Vec<f64>) -> Result<Self> {
        if alpha.len() != n_arms * n_arms || beta.len() != n_arms * n_arms {
            return Err(Error::InvalidConfig(format!(
                "posterior needs {n} parameters per array, got {a} alphas and {b} betas",
                n = n_arms * n_arms,
                a = alpha.len(),
                b = beta.len()
            )));
        }
        for (idx, (&a, &b)) in alpha.iter().zip(beta.iter()).enumerate() {
            let (row, col) = (idx / n_arms, idx % n_arms);
            if !(a >= 1.0) {
                return Err(Error::BadPosteriorParameter {
                    name: "alpha",
                    row,
                    col,
                    value: a,
                });
            }
            if !(b >= 1.0) {
                return Err(Error::BadPosteriorParameter {
                    name: "beta",
                    row,
                    col,
                    value: b,
                });
            }
        }
        Ok(Self { n_arms, alpha, beta })
    }

    pub fn n_arms(&self) -> usize {
        self.n_arms
    }

    pub fn alpha(&self, user_type: usize, arm: usize) -> f64 {
        self.alpha[user_type * self.n_arms + arm]
    }

    pub fn beta(&self, user_type: usize, arm: usize) -> f64 {
        self.beta[user_type * self.n_arms + arm]
    }

    /// Folds one Bernoulli observation into the cell.
    pub fn observe(&mut self, user_type: usize, arm: usize, reward: bool) {
        let idx = user_type * self.n_arms + arm;
        if reward {
            self.alpha[idx] += 1.0;
        } else {
            self.beta[idx] += 1.0;
        }
    }

    /// Number of observations folded into the cell: `alpha + beta - 2`.
    pub fn observation_count(&self, user_type: usize, arm: usize) -> f64 {
        self.alpha(user_type, arm) + self.beta(user_type, arm) - 2.0
    }
}

/// 2x2 popularity counts for two competing recommenders: row = user type,
/// column = recommender.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PopularityMatrix {
    counts: [[f64; 2]; 2],
}

impl PopularityMatrix {
    pub fn new(counts: [[f64; 2]; 2]) -> Result<Self> {
        for (i, row) in counts.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if !(v > 0.0) || !v.is_finite() {
                    return Err(Error::BadPopularityEntry {
                        row: i,
                        col: j,
                        value: v,
                    });
                }
            }
        }
        Ok(Self { counts })
    }

    /// All-ones start: both systems equally (un)popular with both types.
    pub fn ones() -> Self {
        Self {
            counts: [[1.0; 2]; 2],
        }
    }

    pub fn count(&self, user_type: usize, system: usize) -> f64 {
        self.counts[user_type][system]
    }

    /// Probability that a user of the given type is served by `system`.
    pub fn share(&self, user_type: usize, system: usize) -> f64 {
        let row = &self.counts[user_type];
        row[system] / (row[0] + row[1])
    }

    pub fn total(&self) -> f64 {
        self.counts.iter().flatten().sum()
    }

    /// Credits the serving system with the reward and the other system with
    /// its complement, in the arriving user's row.
    pub fn credit(&mut self, user_type: usize, serving: usize, reward: bool) {
        let w = if reward { 1.0 } else { 0.0 };
        self.counts[user_type][serving] += w;
        self.counts[user_type][1 - serving] += 1.0 - w;
    }
}

/// Per-step log of one simulated episode.
///
/// `shares[t-1]` is the target share after step `t`; the regret at step `t`
/// is evaluated at the share the decision saw (before the step).
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub initial_share: f64,
    pub shares: Vec<f64>,
    pub step_regret: Vec<f64>,
    pub cum_regret: Vec<f64>,
    pub user_types: Vec<usize>,
    pub arms: Vec<usize>,
    pub rewards: Vec<bool>,
}

impl TrajectoryRecord {
    pub fn with_capacity(initial_share: f64, horizon: usize) -> Self {
        Self {
            initial_share,
            shares: Vec::with_capacity(horizon),
            step_regret: Vec::with_capacity(horizon),
            cum_regret: Vec::with_capacity(horizon),
            user_types: Vec::with_capacity(horizon),
            arms: Vec::with_capacity(horizon),
            rewards: Vec::with_capacity(horizon),
        }
    }

    pub fn len(&self) -> usize {
        self.shares.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shares.is_empty()
    }

    pub fn final_share(&self) -> f64 {
        self.shares.last().copied().unwrap_or(self.initial_share)
    }

    pub fn final_cum_regret(&self) -> f64 {
        self.cum_regret.last().copied().unwrap_or(0.0)
    }

    pub(crate) fn push(
        &mut self,
        user_type: usize,
        arm: usize,
        reward: bool,
        share: f64,
        step_regret: f64,
    ) {
        let cum = self.final_cum_regret() + step_regret;
        self.shares.push(share);
        self.step_regret.push(step_regret);
        self.cum_regret.push(cum);
        self.user_types.push(user_type);
        self.arms.push(arm);
        self.rewards.push(reward);
    }
}
