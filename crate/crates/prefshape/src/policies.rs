//! Decision rules: the known-matrix shaping policy for two and N arms,
//! explore-then-commit, and Thompson sampling.

use rand::Rng;
use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{PolicyMatrix, PosteriorState, RewardMatrix, TwoArmPolicy};

/// Share-maximizing two-arm policy for a known reward matrix:
/// `p* = 1{b11 + b12 - 1 > 0}`, `q* = 1{b21 + b22 - 1 < 0}`.
///
/// Both indicators are strict; at equality either action gives the same
/// drift and the indicator evaluates to 0.
pub fn optimal_policy_two_arm(b: &RewardMatrix) -> Result<TwoArmPolicy> {
    if b.n_arms() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: b.n_arms(),
        });
    }
    let p = b.mean(0, 0) + b.mean(0, 1) - 1.0 > 0.0;
    let q = b.mean(1, 0) + b.mean(1, 1) - 1.0 < 0.0;
    Ok(TwoArmPolicy::corner(p, q))
}

/// Policy of a competing recommender that maximizes the share of type 1
/// instead: relabel types and arms (0 <-> 1), optimize, express the result
/// back in the original frame.
pub fn opponent_optimal_policy(b: &RewardMatrix) -> Result<TwoArmPolicy> {
    if b.n_arms() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: b.n_arms(),
        });
    }
    let relabeled = RewardMatrix::two_arm(b.mean(1, 1), b.mean(1, 0), b.mean(0, 1), b.mean(0, 0))?;
    let opt = optimal_policy_two_arm(&relabeled)?;
    // In the original frame p is the relabeled q and vice versa.
    TwoArmPolicy::new(opt.q(), opt.p())
}

/// Share-maximizing deterministic N-arm policy for a known reward matrix.
///
/// Target row: keep the own arm only if its reward beats the reinforcement
/// gained from every disliked alternative (`B00 + B0k - 1 > 0` for all k),
/// otherwise show the alternative with the smallest mean (lowest index on
/// ties). Other rows: send the user to the target arm when
/// `(N-1) B_i0 + B_ii - 1 >= 0`, otherwise keep them on their own arm; ties
/// go to the target arm. Written this way, the N = 2 case evaluates exactly
/// the same floating-point expressions as [`optimal_policy_two_arm`].
pub fn optimal_policy_n_arm(b: &RewardMatrix) -> PolicyMatrix {
    let n = b.n_arms();
    let mut chosen = vec![0usize; n];

    let own_beats_all = (1..n).all(|k| b.mean(0, 0) + b.mean(0, k) - 1.0 > 0.0);
    chosen[0] = if own_beats_all {
        0
    } else {
        (1..n)
            .min_by(|&a, &k| b.mean(0, a).partial_cmp(&b.mean(0, k)).unwrap())
            .unwrap()
    };

    for i in 1..n {
        let toward_target = (n as f64 - 1.0) * b.mean(i, 0) + b.mean(i, i) - 1.0 >= 0.0;
        chosen[i] = if toward_target { 0 } else { i };
    }
    PolicyMatrix::deterministic(n, &chosen)
}

/// Arm a corner policy shows to the given user type.
pub(crate) fn corner_arm(policy: &TwoArmPolicy, user_type: usize) -> usize {
    let own = match user_type {
        0 => policy.p() >= 0.5,
        1 => policy.q() >= 0.5,
        other => panic!("corner policy asked for user type {other}"),
    };
    if own {
        user_type
    } else {
        1 - user_type
    }
}

/// How explore-then-commit turns its reward tallies into an estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EtcEstimator {
    /// Literal initialization `n_ij = 1`: the estimate is `sum / (count + 1)`,
    /// slightly biased toward 0.
    Paper,
    /// Plain sample mean `sum / count`; 0.5 for a cell never observed.
    Unbiased,
}

/// Explore-then-commit learner state for the two-arm model.
///
/// Uniform exploration for the first `m` steps, then a one-time commit to
/// the share-maximizing policy of the estimated matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct EtcState {
    exploration_len: u64,
    estimator: EtcEstimator,
    reward_sums: [[f64; 2]; 2],
    pull_counts: [[u64; 2]; 2],
    committed: Option<TwoArmPolicy>,
}

impl EtcState {
    pub fn new(exploration_len: u64, estimator: EtcEstimator) -> Result<Self> {
        if exploration_len == 0 {
            return Err(Error::InvalidConfig(
                "explore-then-commit needs an exploration length of at least 1".into(),
            ));
        }
        Ok(Self {
            exploration_len,
            estimator,
            reward_sums: [[0.0; 2]; 2],
            pull_counts: [[0; 2]; 2],
            committed: None,
        })
    }

    /// State with a pre-filled exploration log; used to test and resume.
    pub fn with_observations(
        exploration_len: u64,
        estimator: EtcEstimator,
        reward_sums: [[f64; 2]; 2],
        pull_counts: [[u64; 2]; 2],
    ) -> Result<Self> {
        let mut state = Self::new(exploration_len, estimator)?;
        state.reward_sums = reward_sums;
        state.pull_counts = pull_counts;
        Ok(state)
    }

    pub fn exploration_len(&self) -> u64 {
        self.exploration_len
    }

    /// Exploration covers steps `1..=m`.
    pub fn is_exploring(&self, t: u64) -> bool {
        t <= self.exploration_len
    }

    pub fn committed(&self) -> Option<TwoArmPolicy> {
        self.committed
    }

    /// Estimated mean-reward matrix under the configured estimator.
    pub fn estimate(&self) -> [[f64; 2]; 2] {
        let mut out = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                let s = self.reward_sums[i][j];
                let n = self.pull_counts[i][j];
                out[i][j] = match self.estimator {
                    EtcEstimator::Paper => s / (n + 1) as f64,
                    EtcEstimator::Unbiased => {
                        if n > 0 {
                            s / n as f64
                        } else {
                            0.5
                        }
                    }
                };
            }
        }
        out
    }

    fn commit(&mut self) -> TwoArmPolicy {
        if let Some(policy) = self.committed {
            return policy;
        }
        let est = self.estimate();
        let p = est[0][0] + est[0][1] - 1.0 > 0.0;
        let q = est[1][0] + est[1][1] - 1.0 < 0.0;
        let policy = TwoArmPolicy::corner(p, q);
        self.committed = Some(policy);
        policy
    }

    /// Chooses an arm at step `t`: uniform while exploring, deterministic
    /// from the committed estimate afterwards.
    pub fn choose<R: Rng + ?Sized>(&mut self, t: u64, user_type: usize, rng: &mut R) -> usize {
        if self.is_exploring(t) {
            rng.random_range(0..2)
        } else {
            let policy = self.commit();
            corner_arm(&policy, user_type)
        }
    }

    /// The `(p_t, q_t)` the policy realizes at step `t`: `(0.5, 0.5)` while
    /// exploring, the committed indicators afterwards.
    pub fn decision_params(&mut self, t: u64) -> TwoArmPolicy {
        if self.is_exploring(t) {
            TwoArmPolicy::new(0.5, 0.5).expect("constant in range")
        } else {
            self.commit()
        }
    }

    /// Records one exploration observation. Once committed the estimate is
    /// frozen and updates are ignored.
    pub fn update(&mut self, user_type: usize, arm: usize, reward: bool) {
        if self.committed.is_some() {
            return;
        }
        self.reward_sums[user_type][arm] += reward as u64 as f64;
        self.pull_counts[user_type][arm] += 1;
    }
}

/// Decision of the two-arm sampled-matrix rule for one user type: arm 0 for
/// a type-0 user iff `row[0] + row[1] - 1 > 0`, arm 1 for a type-1 user iff
/// `row[0] + row[1] - 1 < 0` (ties go to the cross arm in both cases).
pub fn arm_from_sampled_row(user_type: usize, row: [f64; 2]) -> usize {
    match user_type {
        0 => {
            if row[0] + row[1] - 1.0 > 0.0 {
                0
            } else {
                1
            }
        }
        1 => {
            if row[0] + row[1] - 1.0 < 0.0 {
                1
            } else {
                0
            }
        }
        other => panic!("two-arm rule asked for user type {other}"),
    }
}

/// Thompson sampling state: independent Beta posteriors per (type, arm) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct TsState {
    posterior: PosteriorState,
}

impl TsState {
    /// Fresh learner with uniform `Beta(1, 1)` priors.
    pub fn new(n_arms: usize) -> Self {
        Self {
            posterior: PosteriorState::uniform(n_arms),
        }
    }

    pub fn with_posterior(posterior: PosteriorState) -> Self {
        Self { posterior }
    }

    pub fn posterior(&self) -> &PosteriorState {
        &self.posterior
    }

    pub fn n_arms(&self) -> usize {
        self.posterior.n_arms()
    }

    fn sample_cell<R: Rng + ?Sized>(&self, user_type: usize, arm: usize, rng: &mut R) -> f64 {
        let beta = Beta::new(
            self.posterior.alpha(user_type, arm),
            self.posterior.beta(user_type, arm),
        )
        .expect("posterior parameters are >= 1");
        beta.sample(rng)
    }

    /// Samples the posterior row of one user type.
    pub fn sample_row<R: Rng + ?Sized>(&self, user_type: usize, rng: &mut R) -> Vec<f64> {
        (0..self.n_arms())
            .map(|arm| self.sample_cell(user_type, arm, rng))
            .collect()
    }

    /// Samples a full matrix from the posterior, row-major order.
    pub fn sample_matrix<R: Rng + ?Sized>(&self, rng: &mut R) -> RewardMatrix {
        let rows: Vec<Vec<f64>> = (0..self.n_arms())
            .map(|i| self.sample_row(i, rng))
            .collect();
        RewardMatrix::new(&rows).expect("beta samples lie in (0, 1)")
    }

    /// Two-arm Thompson step for the arrived type: samples that posterior
    /// row and applies the indicator rule. Returns the arm and the sample.
    pub fn choose_two_arm<R: Rng + ?Sized>(&self, user_type: usize, rng: &mut R) -> (usize, [f64; 2]) {
        let row = [
            self.sample_cell(user_type, 0, rng),
            self.sample_cell(user_type, 1, rng),
        ];
        (arm_from_sampled_row(user_type, row), row)
    }

    /// Samples both rows and reports the realized `(p_t, q_t)` indicators of
    /// the step, exactly as the two-arm algorithm draws them each slot.
    pub fn decision_params<R: Rng + ?Sized>(&self, rng: &mut R) -> TwoArmPolicy {
        let row0 = [self.sample_cell(0, 0, rng), self.sample_cell(0, 1, rng)];
        let row1 = [self.sample_cell(1, 0, rng), self.sample_cell(1, 1, rng)];
        let p = arm_from_sampled_row(0, row0) == 0;
        let q = arm_from_sampled_row(1, row1) == 1;
        TwoArmPolicy::corner(p, q)
    }

    /// N-arm Thompson step: samples a full matrix and plays the arm the
    /// share-maximizing policy of the sample assigns to the arrived type.
    pub fn choose_n_arm<R: Rng + ?Sized>(&self, user_type: usize, rng: &mut R) -> usize {
        let sampled = self.sample_matrix(rng);
        optimal_policy_n_arm(&sampled).argmax_arm(user_type)
    }

    /// Folds one Bernoulli observation into the posterior.
    pub fn update(&mut self, user_type: usize, arm: usize, reward: bool) {
        self.posterior.observe(user_type, arm, reward);
    }
}
