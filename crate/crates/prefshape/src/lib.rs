//! Simulation library for preference-shaping bandits.
//!
//! A recommender serves a population whose preferences are reinforced by the
//! rewards it observes, tracked as ball colors in an urn. The library
//! implements the urn dynamics (growing urn and fixed-size voter variant),
//! the share-maximizing policies for known reward matrices (two arms and N
//! arms), explore-then-commit and Thompson sampling learners for unknown
//! matrices, the closed-form trajectory and regret analytics, a seeded Monte
//! Carlo harness, and a two-recommender competition model.
//!
//! Everything is deterministic given a base seed: replication `r` runs on
//! seed `base_seed + r` and aggregation order is fixed, so results do not
//! depend on thread count.

pub mod analysis;
pub mod dynamics;
pub mod error;
pub mod model;
pub mod policies;
pub mod simulation;

pub use analysis::{
    alt_regret_dominated, asymptote, etc_exploration_length, etc_regret_bound,
    etc_regret_bound_auto, per_step_regret, regret_definition_gap, trajectory_cid, trajectory_did,
    ts_regret_bound, BoundInputs, BoundKind, BoundReport,
};
pub use dynamics::{sample_user, step_cid, step_did, DynamicsKind, StepOutcome};
pub use error::{Error, Result};
pub use model::{
    DriftPair, Gaps, PolicyMatrix, PopularityMatrix, PosteriorState, RewardMatrix,
    TrajectoryRecord, TwoArmPolicy, UrnState, TARGET_TYPE,
};
pub use policies::{
    arm_from_sampled_row, opponent_optimal_policy, optimal_policy_n_arm, optimal_policy_two_arm,
    EtcEstimator, EtcState, TsState,
};
pub use simulation::{
    run_competing, run_episode, run_monte_carlo, AggregateResult, CompetingConfig,
    CompetingResult, EpisodeRng, PolicySpec, SimConfig,
};
