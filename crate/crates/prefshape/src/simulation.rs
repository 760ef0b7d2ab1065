//! Episode runner coupling dynamics, policy, and regret accounting, the
//! Monte Carlo replication harness, and the two-recommender competition.
//!
//! Replication `r` of a run always uses seed `base_seed + r`, and aggregates
//! are reduced in replication order, so results are byte-identical across
//! runs and across thread counts.

use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::per_step_regret;
use crate::dynamics::{sample_user, step_cid, step_did, DynamicsKind};
use crate::error::{Error, Result};
use crate::model::{
    PolicyMatrix, PopularityMatrix, RewardMatrix, TrajectoryRecord, TwoArmPolicy, UrnState,
};
use crate::policies::{
    corner_arm, optimal_policy_n_arm, optimal_policy_two_arm, EtcEstimator, EtcState, TsState,
};

/// Deterministic generator used for every sample path; one seed fully
/// determines an episode.
pub type EpisodeRng = rand_chacha::ChaCha8Rng;

/// Which decision rule an episode runs.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum PolicySpec {
    /// Fixed randomized two-arm policy.
    Fixed { p: f64, q: f64 },
    /// Share-maximizing two-arm policy computed from the true matrix.
    OptimalKnownB,
    /// Explore-then-commit with the given exploration length.
    Etc {
        exploration_len: u64,
        estimator: EtcEstimator,
    },
    /// Two-arm Thompson sampling with uniform priors.
    ThompsonSampling,
    /// Fixed row-stochastic N-arm policy.
    NArmMatrix { probs: PolicyMatrix },
    /// Share-maximizing N-arm policy computed from the true matrix.
    NArmOptimal,
    /// N-arm Thompson sampling with uniform priors.
    NArmThompson,
}

impl PolicySpec {
    /// Short label used in output file names and reports.
    pub fn label(&self) -> String {
        match self {
            PolicySpec::Fixed { p, q } => format!("fixed-{p}-{q}"),
            PolicySpec::OptimalKnownB => "optimal".into(),
            PolicySpec::Etc { exploration_len, .. } => format!("etc-m{exploration_len}"),
            PolicySpec::ThompsonSampling => "ts".into(),
            PolicySpec::NArmMatrix { .. } => "narm-matrix".into(),
            PolicySpec::NArmOptimal => "narm-optimal".into(),
            PolicySpec::NArmThompson => "narm-ts".into(),
        }
    }

    fn requires_two_arms(&self) -> bool {
        matches!(
            self,
            PolicySpec::Fixed { .. }
                | PolicySpec::OptimalKnownB
                | PolicySpec::Etc { .. }
                | PolicySpec::ThompsonSampling
        )
    }
}

/// Full description of a single-system simulation run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimConfig {
    pub dynamics: DynamicsKind,
    pub reward_matrix: RewardMatrix,
    pub policy: PolicySpec,
    pub horizon: u64,
    pub initial_counts: Vec<u64>,
    pub replications: u64,
    pub base_seed: u64,
}

impl SimConfig {
    pub fn n_arms(&self) -> usize {
        self.reward_matrix.n_arms()
    }

    /// Initial ball count `N0`.
    pub fn initial_total(&self) -> u64 {
        self.initial_counts.iter().sum()
    }

    pub fn initial_share(&self) -> f64 {
        self.initial_counts[0] as f64 / self.initial_total() as f64
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_arms();
        if self.horizon == 0 {
            return Err(Error::InvalidConfig("horizon must be at least 1".into()));
        }
        if self.replications == 0 {
            return Err(Error::InvalidConfig(
                "replications must be at least 1".into(),
            ));
        }
        if self.initial_counts.len() != n {
            return Err(Error::InvalidConfig(format!(
                "initial_counts has {} entries but the reward matrix has {} arms",
                self.initial_counts.len(),
                n
            )));
        }
        if self.initial_total() == 0 {
            return Err(Error::InvalidConfig(
                "initial_counts must hold at least one ball".into(),
            ));
        }
        if self.dynamics == DynamicsKind::Cid && n != 2 {
            return Err(Error::UnsupportedDynamics(n));
        }
        if self.policy.requires_two_arms() && n != 2 {
            return Err(Error::InvalidConfig(format!(
                "policy {} needs a 2x2 reward matrix, got {n}x{n}",
                self.policy.label()
            )));
        }
        match &self.policy {
            PolicySpec::Fixed { p, q } => {
                TwoArmPolicy::new(*p, *q)?;
            }
            PolicySpec::Etc { exploration_len, .. } => {
                if *exploration_len == 0 {
                    return Err(Error::InvalidConfig(
                        "etc exploration length must be at least 1".into(),
                    ));
                }
            }
            PolicySpec::NArmMatrix { probs } => {
                if probs.n_arms() != n {
                    return Err(Error::InvalidConfig(format!(
                        "policy matrix is {}x{} but the reward matrix has {} arms",
                        probs.n_arms(),
                        probs.n_arms(),
                        n
                    )));
                }
            }
            _ => {}
        }
        Ok(())
    }
}

/// Resolved per-episode learner state.
enum Learner {
    Fixed(TwoArmPolicy),
    Optimal(TwoArmPolicy),
    Etc(EtcState),
    Ts(TsState),
    Matrix {
        probs: PolicyMatrix,
        two_arm: Option<TwoArmPolicy>,
        /// Per-row arms when every row is a point mass; avoids burning a
        /// random draw on a deterministic decision.
        fixed_arms: Option<Vec<usize>>,
    },
    NTs(TsState),
}

fn point_mass_arms(probs: &PolicyMatrix) -> Option<Vec<usize>> {
    (0..probs.n_arms())
        .map(|i| {
            let row = probs.row(i);
            row.iter().position(|&v| v == 1.0).filter(|&j| {
                row.iter().enumerate().all(|(k, &v)| k == j || v == 0.0)
            })
        })
        .collect()
}

fn clamp01(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

/// Two-arm `(p, q)` parameters equivalent to a policy matrix, if it is 2x2.
fn matrix_params(probs: &PolicyMatrix) -> Option<TwoArmPolicy> {
    if probs.n_arms() != 2 {
        return None;
    }
    Some(
        TwoArmPolicy::new(clamp01(probs.prob(0, 0)), clamp01(probs.prob(1, 1)))
            .expect("clamped probabilities are in range"),
    )
}

impl Learner {
    fn from_config(config: &SimConfig) -> Result<Self> {
        let b = &config.reward_matrix;
        Ok(match &config.policy {
            PolicySpec::Fixed { p, q } => Learner::Fixed(TwoArmPolicy::new(*p, *q)?),
            PolicySpec::OptimalKnownB => Learner::Optimal(optimal_policy_two_arm(b)?),
            PolicySpec::Etc {
                exploration_len,
                estimator,
            } => Learner::Etc(EtcState::new(*exploration_len, *estimator)?),
            PolicySpec::ThompsonSampling => Learner::Ts(TsState::new(2)),
            PolicySpec::NArmMatrix { probs } => Learner::Matrix {
                two_arm: matrix_params(probs),
                fixed_arms: point_mass_arms(probs),
                probs: probs.clone(),
            },
            PolicySpec::NArmOptimal => {
                let probs = optimal_policy_n_arm(b);
                Learner::Matrix {
                    two_arm: matrix_params(&probs),
                    fixed_arms: point_mass_arms(&probs),
                    probs,
                }
            }
            PolicySpec::NArmThompson => Learner::NTs(TsState::new(b.n_arms())),
        })
    }

    /// Picks the arm for step `t` and reports the realized `(p_t, q_t)` for
    /// regret accounting. `None` means regret is not defined (N > 2).
    fn decide<R: Rng + ?Sized>(
        &mut self,
        t: u64,
        user_type: usize,
        rng: &mut R,
    ) -> (usize, Option<TwoArmPolicy>) {
        match self {
            Learner::Fixed(policy) => (policy.sample_arm(user_type, rng), Some(*policy)),
            Learner::Optimal(policy) => (corner_arm(policy, user_type), Some(*policy)),
            Learner::Etc(etc) => {
                let arm = etc.choose(t, user_type, rng);
                (arm, Some(etc.decision_params(t)))
            }
            Learner::Ts(ts) => {
                let params = ts.decision_params(rng);
                (corner_arm(&params, user_type), Some(params))
            }
            Learner::Matrix {
                probs,
                two_arm,
                fixed_arms,
            } => {
                let arm = match fixed_arms {
                    Some(arms) => arms[user_type],
                    None => probs.sample_arm(user_type, rng),
                };
                (arm, *two_arm)
            }
            Learner::NTs(ts) => {
                if ts.n_arms() == 2 {
                    let sampled = ts.sample_matrix(rng);
                    let policy = optimal_policy_n_arm(&sampled);
                    let params = matrix_params(&policy);
                    (policy.argmax_arm(user_type), params)
                } else {
                    (ts.choose_n_arm(user_type, rng), None)
                }
            }
        }
    }

    fn observe(&mut self, user_type: usize, arm: usize, reward: bool) {
        match self {
            Learner::Etc(etc) => etc.update(user_type, arm, reward),
            Learner::Ts(ts) | Learner::NTs(ts) => ts.update(user_type, arm, reward),
            _ => {}
        }
    }
}

/// Runs one seeded episode and returns its full per-step log.
///
/// Each step samples the arriving user from the urn, lets the policy pick an
/// arm, draws a Bernoulli reward, evolves the urn, and records the share
/// after the step together with the one-step regret evaluated at the share
/// the decision saw.
pub fn run_episode(config: &SimConfig, seed: u64) -> Result<TrajectoryRecord> {
    config.validate()?;
    let b = &config.reward_matrix;
    let mut rng = EpisodeRng::seed_from_u64(seed);
    let mut state = UrnState::new(config.initial_counts.clone())?;
    let mut learner = Learner::from_config(config)?;
    let mut record = TrajectoryRecord::with_capacity(state.target_share(), config.horizon as usize);
    let n0 = state.initial_total();

    for t in 1..=config.horizon {
        let share_seen = state.target_share();
        let user_type = sample_user(&state, &mut rng)?;
        let (arm, params) = learner.decide(t, user_type, &mut rng);
        let reward = rng.random::<f64>() < b.mean(user_type, arm);
        state = match config.dynamics {
            DynamicsKind::Did => step_did(&state, user_type, arm, reward, &mut rng),
            DynamicsKind::Cid => step_cid(&state, user_type, arm, reward)?,
        };
        debug_assert_eq!(
            state.total(),
            match config.dynamics {
                DynamicsKind::Did => n0 + t,
                DynamicsKind::Cid => n0,
            },
            "urn conservation broken at step {t}"
        );
        learner.observe(user_type, arm, reward);
        let step_regret = match &params {
            Some(p) => per_step_regret(b, share_seen, p)?,
            None => 0.0,
        };
        record.push(user_type, arm, reward, state.target_share(), step_regret);
    }
    Ok(record)
}

/// Per-step statistics across replications, reduced in replication order.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateResult {
    pub horizon: u64,
    pub replications: u64,
    pub initial_share: f64,
    /// Mean target share after each step.
    pub mean_share: Vec<f64>,
    /// Population standard deviation of the share after each step.
    pub std_share: Vec<f64>,
    pub mean_step_regret: Vec<f64>,
    pub mean_cum_regret: Vec<f64>,
    /// Final share of every replication, in replication order.
    pub final_shares: Vec<f64>,
    /// Steps where type `i` arrived, across all replications.
    pub type_counts: Vec<u64>,
    /// Steps where type `i` arrived and was shown arm `i`.
    pub own_arm_counts: Vec<u64>,
}

impl AggregateResult {
    pub fn final_mean_share(&self) -> f64 {
        self.mean_share.last().copied().unwrap_or(self.initial_share)
    }

    pub fn final_mean_cum_regret(&self) -> f64 {
        self.mean_cum_regret.last().copied().unwrap_or(0.0)
    }

    /// Fraction of arrivals of type `i` that were shown their own arm; the
    /// measured `f_i` of the Thompson bound. `None` when the type never
    /// arrived.
    pub fn own_arm_fraction(&self, user_type: usize) -> Option<f64> {
        let total = self.type_counts[user_type];
        (total > 0).then(|| self.own_arm_counts[user_type] as f64 / total as f64)
    }

    fn from_records(
        horizon: u64,
        initial_share: f64,
        n_arms: usize,
        records: &[TrajectoryRecord],
    ) -> Self {
        let t_len = horizon as usize;
        let reps = records.len();
        let mut sum = vec![0.0; t_len];
        let mut sum_sq = vec![0.0; t_len];
        let mut sum_step = vec![0.0; t_len];
        let mut sum_cum = vec![0.0; t_len];
        let mut final_shares = Vec::with_capacity(reps);
        let mut type_counts = vec![0u64; n_arms];
        let mut own_arm_counts = vec![0u64; n_arms];

        for rec in records {
            for t in 0..t_len {
                let z = rec.shares[t];
                sum[t] += z;
                sum_sq[t] += z * z;
                sum_step[t] += rec.step_regret[t];
                sum_cum[t] += rec.cum_regret[t];
            }
            for (&user_type, &arm) in rec.user_types.iter().zip(rec.arms.iter()) {
                type_counts[user_type] += 1;
                if user_type == arm {
                    own_arm_counts[user_type] += 1;
                }
            }
            final_shares.push(rec.final_share());
        }

        let r = reps as f64;
        let mean_share: Vec<f64> = sum.iter().map(|s| s / r).collect();
        let std_share: Vec<f64> = sum_sq
            .iter()
            .zip(mean_share.iter())
            .map(|(sq, m)| (sq / r - m * m).max(0.0).sqrt())
            .collect();
        AggregateResult {
            horizon,
            replications: reps as u64,
            initial_share,
            mean_share,
            std_share,
            mean_step_regret: sum_step.iter().map(|s| s / r).collect(),
            mean_cum_regret: sum_cum.iter().map(|s| s / r).collect(),
            final_shares,
            type_counts,
            own_arm_counts,
        }
    }
}

/// Runs `replications` episodes in parallel (seed `base_seed + r` for
/// replication `r`) and aggregates them deterministically.
pub fn run_monte_carlo(config: &SimConfig) -> Result<AggregateResult> {
    config.validate()?;
    let records: Vec<TrajectoryRecord> = (0..config.replications)
        .into_par_iter()
        .map(|r| run_episode(config, config.base_seed.wrapping_add(r)))
        .collect::<Result<_>>()?;
    Ok(AggregateResult::from_records(
        config.horizon,
        config.initial_share(),
        config.n_arms(),
        &records,
    ))
}

/// Full description of a two-recommender competition run. Both policies are
/// expressed in the same `(p, q)` frame as a single system's policy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompetingConfig {
    pub dynamics: DynamicsKind,
    pub reward_matrix: RewardMatrix,
    /// Policy of the system shaping toward type 0.
    pub policy_first: TwoArmPolicy,
    /// Policy of the opposing system (shaping toward type 1).
    pub policy_second: TwoArmPolicy,
    pub initial_popularity: PopularityMatrix,
    pub horizon: u64,
    pub initial_counts: Vec<u64>,
    pub replications: u64,
    pub base_seed: u64,
}

impl CompetingConfig {
    pub fn initial_total(&self) -> u64 {
        self.initial_counts.iter().sum()
    }

    pub fn initial_share(&self) -> f64 {
        self.initial_counts[0] as f64 / self.initial_total() as f64
    }

    pub fn validate(&self) -> Result<()> {
        if self.reward_matrix.n_arms() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                got: self.reward_matrix.n_arms(),
            });
        }
        if self.horizon == 0 {
            return Err(Error::InvalidConfig("horizon must be at least 1".into()));
        }
        if self.replications == 0 {
            return Err(Error::InvalidConfig(
                "replications must be at least 1".into(),
            ));
        }
        if self.initial_counts.len() != 2 {
            return Err(Error::InvalidConfig(format!(
                "initial_counts has {} entries, expected 2",
                self.initial_counts.len()
            )));
        }
        if self.initial_total() == 0 {
            return Err(Error::InvalidConfig(
                "initial_counts must hold at least one ball".into(),
            ));
        }
        Ok(())
    }
}

struct CompetingEpisode {
    record: TrajectoryRecord,
    /// Popularity share of the first system in each type row, after each step.
    first_share: [Vec<f64>; 2],
    serve_counts: [u64; 2],
}

fn run_competing_episode(config: &CompetingConfig, seed: u64) -> Result<CompetingEpisode> {
    let b = &config.reward_matrix;
    let mut rng = EpisodeRng::seed_from_u64(seed);
    let mut state = UrnState::new(config.initial_counts.clone())?;
    let mut popularity = config.initial_popularity.clone();
    let mut record = TrajectoryRecord::with_capacity(state.target_share(), config.horizon as usize);
    let mut first_share = [
        Vec::with_capacity(config.horizon as usize),
        Vec::with_capacity(config.horizon as usize),
    ];
    let mut serve_counts = [0u64; 2];
    let total_before = popularity.total();

    for t in 1..=config.horizon {
        let user_type = sample_user(&state, &mut rng)?;
        let serving = if rng.random::<f64>() < popularity.share(user_type, 0) {
            0
        } else {
            1
        };
        serve_counts[serving] += 1;
        let policy = if serving == 0 {
            &config.policy_first
        } else {
            &config.policy_second
        };
        let arm = policy.sample_arm(user_type, &mut rng);
        let reward = rng.random::<f64>() < b.mean(user_type, arm);
        popularity.credit(user_type, serving, reward);
        debug_assert!(
            (popularity.total() - total_before - t as f64).abs() < 1e-6,
            "popularity must grow by exactly one per served user"
        );
        state = match config.dynamics {
            DynamicsKind::Did => step_did(&state, user_type, arm, reward, &mut rng),
            DynamicsKind::Cid => step_cid(&state, user_type, arm, reward)?,
        };
        record.push(user_type, arm, reward, state.target_share(), 0.0);
        for row in 0..2 {
            first_share[row].push(popularity.share(row, 0));
        }
    }
    Ok(CompetingEpisode {
        record,
        first_share,
        serve_counts,
    })
}

/// Aggregated outcome of a competition run.
#[derive(Debug, Clone, PartialEq)]
pub struct CompetingResult {
    /// Share statistics; the regret columns are identically zero (regret is
    /// not defined when two systems interleave their decisions).
    pub aggregate: AggregateResult,
    /// Mean popularity share of the first system per type row, per step.
    pub mean_first_share: [Vec<f64>; 2],
    /// Final popularity share of the first system per type row, per
    /// replication.
    pub final_first_share: Vec<[f64; 2]>,
    /// Total steps served by each system, across all replications.
    pub serve_counts: [u64; 2],
}

/// Runs the two-recommender competition over `replications` episodes.
///
/// Each step routes the arriving user to the first system with probability
/// proportional to its popularity in the user's type row, lets the serving
/// system recommend, credits the serving system with the reward and the
/// other with its complement, and evolves the urn.
pub fn run_competing(config: &CompetingConfig) -> Result<CompetingResult> {
    config.validate()?;
    let episodes: Vec<CompetingEpisode> = (0..config.replications)
        .into_par_iter()
        .map(|r| run_competing_episode(config, config.base_seed.wrapping_add(r)))
        .collect::<Result<_>>()?;

    let t_len = config.horizon as usize;
    let reps = episodes.len() as f64;
    let mut sum_first = [vec![0.0; t_len], vec![0.0; t_len]];
    let mut final_first_share = Vec::with_capacity(episodes.len());
    let mut serve_counts = [0u64; 2];
    for ep in &episodes {
        for row in 0..2 {
            for t in 0..t_len {
                sum_first[row][t] += ep.first_share[row][t];
            }
        }
        final_first_share.push([
            *ep.first_share[0].last().expect("horizon >= 1"),
            *ep.first_share[1].last().expect("horizon >= 1"),
        ]);
        serve_counts[0] += ep.serve_counts[0];
        serve_counts[1] += ep.serve_counts[1];
    }
    let mean_first_share =
        sum_first.map(|row| row.into_iter().map(|s| s / reps).collect::<Vec<f64>>());

    let records: Vec<TrajectoryRecord> = episodes.into_iter().map(|ep| ep.record).collect();
    let aggregate = AggregateResult::from_records(
        config.horizon,
        config.initial_share(),
        2,
        &records,
    );
    Ok(CompetingResult {
        aggregate,
        mean_first_share,
        final_first_share,
        serve_counts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{asymptote, trajectory_did};

    fn b1() -> RewardMatrix {
        RewardMatrix::two_arm(0.9, 0.4, 0.2, 0.6).unwrap()
    }

    fn base_config(policy: PolicySpec) -> SimConfig {
        SimConfig {
            dynamics: DynamicsKind::Did,
            reward_matrix: b1(),
            policy,
            horizon: 200,
            initial_counts: vec![10, 10],
            replications: 1,
            base_seed: 7,
        }
    }

    #[test]
    fn an_absorbing_urn_stays_absorbed() {
        let mut config = base_config(PolicySpec::Fixed { p: 1.0, q: 1.0 });
        config.reward_matrix = RewardMatrix::two_arm(1.0, 0.4, 0.2, 0.6).unwrap();
        config.initial_counts = vec![20, 0];
        let rec = run_episode(&config, 3).unwrap();
        assert!(rec.shares.iter().all(|&z| z == 1.0));
    }

    #[test]
    fn the_optimal_policy_accrues_exactly_zero_regret() {
        for dynamics in [DynamicsKind::Did, DynamicsKind::Cid] {
            let mut config = base_config(PolicySpec::OptimalKnownB);
            config.dynamics = dynamics;
            for seed in 0..20 {
                let rec = run_episode(&config, seed).unwrap();
                assert!(rec.cum_regret.iter().all(|&r| r == 0.0), "{dynamics}");
            }
        }
    }

    #[test]
    fn episode_mean_tracks_the_closed_form() {
        let mut config = base_config(PolicySpec::OptimalKnownB);
        config.horizon = 1000;
        config.replications = 1000;
        let agg = run_monte_carlo(&config).unwrap();
        let opt = optimal_policy_two_arm(&config.reward_matrix).unwrap();
        let ode = trajectory_did(&config.reward_matrix, &opt, 0.5, 20, 1000.0).unwrap();
        assert!(
            (agg.final_mean_share() - ode).abs() < 0.02,
            "mc {} vs ode {}",
            agg.final_mean_share(),
            ode
        );
    }

    #[test]
    fn a_single_replication_aggregate_is_the_record() {
        let config = base_config(PolicySpec::ThompsonSampling);
        let agg = run_monte_carlo(&config).unwrap();
        let rec = run_episode(&config, config.base_seed).unwrap();
        assert_eq!(agg.mean_share, rec.shares);
        assert_eq!(agg.mean_step_regret, rec.step_regret);
        assert_eq!(agg.mean_cum_regret, rec.cum_regret);
        assert_eq!(agg.final_shares, vec![rec.final_share()]);
        assert!(agg.std_share.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn reruns_with_the_same_seed_are_identical() {
        let mut config = base_config(PolicySpec::ThompsonSampling);
        config.replications = 16;
        let a = run_monte_carlo(&config).unwrap();
        let b = run_monte_carlo(&config).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn etc_explore_steps_carry_the_uniform_regret() {
        let mut config = base_config(PolicySpec::Etc {
            exploration_len: 50,
            estimator: EtcEstimator::Paper,
        });
        config.horizon = 60;
        let rec = run_episode(&config, 11).unwrap();
        // during exploration the regret is 0.5 z D1 + 0.5 (1-z) D2 > 0
        assert!(rec.step_regret[..50].iter().all(|&r| r > 0.0));
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let mut config = base_config(PolicySpec::OptimalKnownB);
        config.horizon = 0;
        assert!(matches!(
            config.validate().unwrap_err(),
            Error::InvalidConfig(_)
        ));

        let mut config = base_config(PolicySpec::OptimalKnownB);
        config.initial_counts = vec![10, 10, 10];
        assert!(matches!(
            config.validate().unwrap_err(),
            Error::InvalidConfig(_)
        ));

        let mut config = base_config(PolicySpec::OptimalKnownB);
        config.reward_matrix = RewardMatrix::with_diagonal(3, 0.9, 0.7).unwrap();
        config.initial_counts = vec![10, 10, 10];
        assert!(matches!(
            config.validate().unwrap_err(),
            Error::InvalidConfig(_)
        ));

        let mut config = base_config(PolicySpec::NArmOptimal);
        config.dynamics = DynamicsKind::Cid;
        config.reward_matrix = RewardMatrix::with_diagonal(3, 0.9, 0.7).unwrap();
        config.initial_counts = vec![10, 10, 10];
        assert_eq!(config.validate().unwrap_err(), Error::UnsupportedDynamics(3));
    }

    #[test]
    fn n_arm_optimal_at_two_arms_matches_the_two_arm_optimum() {
        let config_a = base_config(PolicySpec::OptimalKnownB);
        let config_b = base_config(PolicySpec::NArmOptimal);
        let a = run_episode(&config_a, 42).unwrap();
        let b = run_episode(&config_b, 42).unwrap();
        assert_eq!(a, b);
    }

    fn competing_config() -> CompetingConfig {
        let b = b1();
        CompetingConfig {
            dynamics: DynamicsKind::Did,
            policy_first: optimal_policy_two_arm(&b).unwrap(),
            policy_second: crate::policies::opponent_optimal_policy(&b).unwrap(),
            reward_matrix: b,
            initial_popularity: PopularityMatrix::ones(),
            horizon: 300,
            initial_counts: vec![10, 10],
            replications: 50,
            base_seed: 5,
        }
    }

    #[test]
    fn popularity_grows_by_one_per_served_user() {
        let config = competing_config();
        let result = run_competing(&config).unwrap();
        assert_eq!(
            result.serve_counts[0] + result.serve_counts[1],
            config.horizon * config.replications
        );
        // shares stay inside (0, 1)
        for row in &result.mean_first_share {
            assert!(row.iter().all(|&s| s > 0.0 && s < 1.0));
        }
    }

    #[test]
    fn a_vanishing_opponent_reduces_to_the_single_system() {
        let mut config = competing_config();
        config.replications = 400;
        config.initial_popularity =
            PopularityMatrix::new([[1.0, 1e-12], [1.0, 1e-12]]).unwrap();
        // with perfect rewards the opponent is never credited, so its
        // popularity share stays negligible and it never serves
        config.reward_matrix = RewardMatrix::two_arm(1.0, 1.0, 1.0, 1.0).unwrap();
        config.policy_first = TwoArmPolicy::corner(true, true);
        config.policy_second = TwoArmPolicy::corner(false, false);
        let result = run_competing(&config).unwrap();
        assert_eq!(result.serve_counts[1], 0);

        let single = SimConfig {
            dynamics: DynamicsKind::Did,
            reward_matrix: config.reward_matrix.clone(),
            policy: PolicySpec::Fixed { p: 1.0, q: 1.0 },
            horizon: config.horizon,
            initial_counts: config.initial_counts.clone(),
            replications: config.replications,
            base_seed: 900,
        };
        let single_agg = run_monte_carlo(&single).unwrap();
        let diff = (result.aggregate.final_mean_share() - single_agg.final_mean_share()).abs();
        assert!(diff < 0.03, "competing vs single mean differ by {diff}");
    }

    #[test]
    fn competing_regret_columns_are_zero() {
        let result = run_competing(&competing_config()).unwrap();
        assert!(result.aggregate.mean_cum_regret.iter().all(|&r| r == 0.0));
    }

    #[test]
    fn asymptote_is_shared_between_dynamics() {
        let b = b1();
        let opt = optimal_policy_two_arm(&b).unwrap();
        assert_eq!(asymptote(&b, &opt).unwrap(), 0.8);
    }
}
