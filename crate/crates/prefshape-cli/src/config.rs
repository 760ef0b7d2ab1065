//! Experiment descriptions: the JSON config schema, the run plans presets
//! and configs resolve into, and the final validated library configs.
//!
//! A plan keeps unresolved choices (an `auto` exploration length, default
//! initial counts) so command-line overrides can be applied before the plan
//! is resolved into a fully explicit [`SimConfig`] or [`CompetingConfig`].

use std::path::Path;

use serde::Deserialize;

use prefshape::{
    etc_exploration_length, opponent_optimal_policy, optimal_policy_two_arm, CompetingConfig,
    DynamicsKind, EtcEstimator, PolicyMatrix, PolicySpec, PopularityMatrix, RewardMatrix,
    SimConfig, TwoArmPolicy,
};

use crate::error::{CliError, Result};

pub const DEFAULT_HORIZON: u64 = 1000;
pub const DEFAULT_REPLICATIONS: u64 = 1000;
/// Fixed default seed; never drawn from entropy.
pub const DEFAULT_BASE_SEED: u64 = 1;
/// Default balls per color, so `N0 = 10 N` and every color starts equal.
pub const DEFAULT_BALLS_PER_COLOR: u64 = 10;

/// Exploration length of an explore-then-commit run: explicit or tuned to
/// the horizon as `min(ceil(8 ln T / delta1^2), T)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EtcLength {
    Steps(u64),
    Auto,
}

/// A policy choice that may still depend on the horizon or reward matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum PolicyChoice {
    Fixed { p: f64, q: f64 },
    Optimal,
    Etc { length: EtcLength, estimator: EtcEstimator },
    Ts,
    NArmMatrix(PolicyMatrix),
    NArmOptimal,
    NArmTs,
}

impl PolicyChoice {
    fn resolve(&self, b: &RewardMatrix, horizon: u64) -> Result<PolicySpec> {
        Ok(match self {
            PolicyChoice::Fixed { p, q } => PolicySpec::Fixed { p: *p, q: *q },
            PolicyChoice::Optimal => PolicySpec::OptimalKnownB,
            PolicyChoice::Etc { length, estimator } => {
                let exploration_len = match length {
                    EtcLength::Steps(m) => *m,
                    EtcLength::Auto => {
                        let delta1 = b.gaps()?.delta1;
                        etc_exploration_length(horizon, delta1)?.min(horizon)
                    }
                };
                PolicySpec::Etc {
                    exploration_len,
                    estimator: *estimator,
                }
            }
            PolicyChoice::Ts => PolicySpec::ThompsonSampling,
            PolicyChoice::NArmMatrix(probs) => PolicySpec::NArmMatrix {
                probs: probs.clone(),
            },
            PolicyChoice::NArmOptimal => PolicySpec::NArmOptimal,
            PolicyChoice::NArmTs => PolicySpec::NArmThompson,
        })
    }
}

/// One single-system run, possibly still carrying unresolved defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct RunPlan {
    /// Label override; defaults to the resolved policy label.
    pub label: Option<String>,
    pub dynamics: DynamicsKind,
    pub reward_matrix: RewardMatrix,
    pub policy: PolicyChoice,
    pub horizon: u64,
    pub replications: u64,
    pub base_seed: u64,
    pub initial_counts: Option<Vec<u64>>,
}

impl RunPlan {
    pub fn new(reward_matrix: RewardMatrix, policy: PolicyChoice) -> Self {
        Self {
            label: None,
            dynamics: DynamicsKind::Did,
            reward_matrix,
            policy,
            horizon: DEFAULT_HORIZON,
            replications: DEFAULT_REPLICATIONS,
            base_seed: DEFAULT_BASE_SEED,
            initial_counts: None,
        }
    }

    pub fn labeled(mut self, label: &str) -> Self {
        self.label = Some(label.to_string());
        self
    }

    /// Resolves the plan into a validated config plus its output label.
    pub fn resolve(&self) -> Result<(String, SimConfig)> {
        let n = self.reward_matrix.n_arms();
        let policy = self.policy.resolve(&self.reward_matrix, self.horizon)?;
        let config = SimConfig {
            dynamics: self.dynamics,
            reward_matrix: self.reward_matrix.clone(),
            policy,
            horizon: self.horizon,
            initial_counts: self
                .initial_counts
                .clone()
                .unwrap_or_else(|| vec![DEFAULT_BALLS_PER_COLOR; n]),
            replications: self.replications,
            base_seed: self.base_seed,
        };
        config.validate()?;
        let label = self
            .label
            .clone()
            .unwrap_or_else(|| config.policy.label());
        Ok((label, config))
    }
}

/// A two-recommender competition run. Policies default to the
/// shaping-optimal pair computed from the reward matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CompetingPlan {
    pub label: Option<String>,
    pub dynamics: DynamicsKind,
    pub reward_matrix: RewardMatrix,
    pub policy_first: Option<TwoArmPolicy>,
    pub policy_second: Option<TwoArmPolicy>,
    pub initial_popularity: Option<PopularityMatrix>,
    pub horizon: u64,
    pub replications: u64,
    pub base_seed: u64,
    pub initial_counts: Option<Vec<u64>>,
}

impl CompetingPlan {
    pub fn new(reward_matrix: RewardMatrix) -> Self {
        Self {
            label: None,
            dynamics: DynamicsKind::Did,
            reward_matrix,
            policy_first: None,
            policy_second: None,
            initial_popularity: None,
            horizon: DEFAULT_HORIZON,
            replications: DEFAULT_REPLICATIONS,
            base_seed: DEFAULT_BASE_SEED,
            initial_counts: None,
        }
    }

    pub fn resolve(&self) -> Result<(String, CompetingConfig)> {
        let policy_first = match self.policy_first {
            Some(p) => p,
            None => optimal_policy_two_arm(&self.reward_matrix)?,
        };
        let policy_second = match self.policy_second {
            Some(p) => p,
            None => opponent_optimal_policy(&self.reward_matrix)?,
        };
        let config = CompetingConfig {
            dynamics: self.dynamics,
            reward_matrix: self.reward_matrix.clone(),
            policy_first,
            policy_second,
            initial_popularity: self
                .initial_popularity
                .clone()
                .unwrap_or_else(PopularityMatrix::ones),
            horizon: self.horizon,
            initial_counts: self
                .initial_counts
                .clone()
                .unwrap_or_else(|| vec![DEFAULT_BALLS_PER_COLOR; 2]),
            replications: self.replications,
            base_seed: self.base_seed,
        };
        config.validate()?;
        let label = self.label.clone().unwrap_or_else(|| "competing".into());
        Ok((label, config))
    }
}

/// A resolved experiment: either a set of single-system runs sharing a name,
/// or one competition run.
#[derive(Debug, Clone, PartialEq)]
pub enum Experiment {
    Single { name: String, plans: Vec<RunPlan> },
    Competing { name: String, plan: CompetingPlan },
}

impl Experiment {
    pub fn name(&self) -> &str {
        match self {
            Experiment::Single { name, .. } => name,
            Experiment::Competing { name, .. } => name,
        }
    }
}

// ---------------------------------------------------------------------------
// JSON schema
// ---------------------------------------------------------------------------

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawExperiment {
    kind: Option<String>,
    dynamics: Option<String>,
    reward_matrix: Option<Vec<Vec<f64>>>,
    policy: Option<RawPolicy>,
    horizon: Option<u64>,
    replications: Option<u64>,
    base_seed: Option<u64>,
    initial_counts: Option<Vec<u64>>,
    initial_popularity: Option<[[f64; 2]; 2]>,
    policy_first: Option<RawTwoArm>,
    policy_second: Option<RawTwoArm>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTwoArm {
    p: f64,
    q: f64,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
enum RawPolicy {
    Fixed { p: f64, q: f64 },
    Optimal,
    Etc {
        m: Option<RawEtcLength>,
        estimator: Option<String>,
    },
    Ts,
    NarmMatrix { probs: Vec<Vec<f64>> },
    NarmOptimal,
    NarmTs,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawEtcLength {
    Steps(u64),
    Keyword(String),
}

pub fn parse_dynamics(s: &str) -> Result<DynamicsKind> {
    match s {
        "did" => Ok(DynamicsKind::Did),
        "cid" => Ok(DynamicsKind::Cid),
        other => Err(CliError::Parse(format!(
            "dynamics: expected `did` or `cid`, got `{other}`"
        ))),
    }
}

pub fn parse_estimator(s: &str) -> Result<EtcEstimator> {
    match s {
        "paper" => Ok(EtcEstimator::Paper),
        "unbiased" => Ok(EtcEstimator::Unbiased),
        other => Err(CliError::Parse(format!(
            "etc estimator: expected `paper` or `unbiased`, got `{other}`"
        ))),
    }
}

fn parse_etc_length(raw: &RawEtcLength) -> Result<EtcLength> {
    match raw {
        RawEtcLength::Steps(m) => Ok(EtcLength::Steps(*m)),
        RawEtcLength::Keyword(s) if s == "auto" => Ok(EtcLength::Auto),
        RawEtcLength::Keyword(other) => Err(CliError::Parse(format!(
            "policy.m: expected a step count or `auto`, got `{other}`"
        ))),
    }
}

fn parse_policy(raw: &RawPolicy) -> Result<PolicyChoice> {
    Ok(match raw {
        RawPolicy::Fixed { p, q } => PolicyChoice::Fixed { p: *p, q: *q },
        RawPolicy::Optimal => PolicyChoice::Optimal,
        RawPolicy::Etc { m, estimator } => PolicyChoice::Etc {
            length: match m {
                Some(raw) => parse_etc_length(raw)?,
                None => EtcLength::Auto,
            },
            estimator: match estimator {
                Some(s) => parse_estimator(s)?,
                None => EtcEstimator::Paper,
            },
        },
        RawPolicy::Ts => PolicyChoice::Ts,
        RawPolicy::NarmMatrix { probs } => PolicyChoice::NArmMatrix(
            PolicyMatrix::new(probs)
                .map_err(|e| CliError::Parse(format!("policy.probs: {e}")))?,
        ),
        RawPolicy::NarmOptimal => PolicyChoice::NArmOptimal,
        RawPolicy::NarmTs => PolicyChoice::NArmTs,
    })
}

fn build_reward_matrix(rows: &[Vec<f64>]) -> Result<RewardMatrix> {
    RewardMatrix::new(rows).map_err(|e| match e {
        prefshape::Error::EntryOutOfRange { row, col, value } => CliError::Parse(format!(
            "reward_matrix[{row}][{col}] = {value} lies outside [0, 1]"
        )),
        other => CliError::Parse(format!("reward_matrix: {other}")),
    })
}

/// Parses a JSON experiment description, applying the documented defaults.
pub fn parse_config_str(name: &str, text: &str) -> Result<Experiment> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let raw: RawExperiment = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        CliError::Parse(format!("config key `{path}`: {}", e.inner()))
    })?;

    let kind = raw.kind.as_deref().unwrap_or("single");
    let mut missing = Vec::new();
    if raw.reward_matrix.is_none() {
        missing.push("reward_matrix");
    }
    if kind == "single" && raw.policy.is_none() {
        missing.push("policy");
    }
    if !missing.is_empty() {
        return Err(CliError::Parse(format!(
            "missing required keys: {}",
            missing.join(", ")
        )));
    }
    let reward_matrix = build_reward_matrix(raw.reward_matrix.as_ref().unwrap())?;
    let dynamics = match raw.dynamics.as_deref() {
        Some(s) => parse_dynamics(s)?,
        None => DynamicsKind::Did,
    };

    match kind {
        "single" => {
            let mut plan = RunPlan::new(reward_matrix, parse_policy(raw.policy.as_ref().unwrap())?);
            plan.dynamics = dynamics;
            if let Some(h) = raw.horizon {
                plan.horizon = h;
            }
            if let Some(r) = raw.replications {
                plan.replications = r;
            }
            if let Some(s) = raw.base_seed {
                plan.base_seed = s;
            }
            plan.initial_counts = raw.initial_counts;
            Ok(Experiment::Single {
                name: name.to_string(),
                plans: vec![plan],
            })
        }
        "competing" => {
            let mut plan = CompetingPlan::new(reward_matrix);
            plan.dynamics = dynamics;
            if let Some(h) = raw.horizon {
                plan.horizon = h;
            }
            if let Some(r) = raw.replications {
                plan.replications = r;
            }
            if let Some(s) = raw.base_seed {
                plan.base_seed = s;
            }
            plan.initial_counts = raw.initial_counts;
            if let Some(p) = raw.initial_popularity {
                plan.initial_popularity = Some(
                    PopularityMatrix::new(p)
                        .map_err(|e| CliError::Parse(format!("initial_popularity: {e}")))?,
                );
            }
            if let Some(p) = &raw.policy_first {
                plan.policy_first = Some(
                    TwoArmPolicy::new(p.p, p.q)
                        .map_err(|e| CliError::Parse(format!("policy_first: {e}")))?,
                );
            }
            if let Some(p) = &raw.policy_second {
                plan.policy_second = Some(
                    TwoArmPolicy::new(p.p, p.q)
                        .map_err(|e| CliError::Parse(format!("policy_second: {e}")))?,
                );
            }
            Ok(Experiment::Competing {
                name: name.to_string(),
                plan,
            })
        }
        other => Err(CliError::Parse(format!(
            "kind: expected `single` or `competing`, got `{other}`"
        ))),
    }
}

/// Reads and parses a JSON experiment file; the experiment is named after
/// the file stem.
pub fn parse_config_file(path: &Path) -> Result<Experiment> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "run".into());
    parse_config_str(&name, &text)
}
