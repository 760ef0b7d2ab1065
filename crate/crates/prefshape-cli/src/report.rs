//! Bound-vs-empirical reports for learner runs.

use serde::Serialize;

use prefshape::{
    asymptote, etc_regret_bound, optimal_policy_two_arm, ts_regret_bound, AggregateResult,
    BoundReport, PolicySpec, SimConfig,
};

/// Outcome of comparing an empirical regret curve against its bound.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum BoundStatus {
    /// A bound applies; `pass` is `empirical <= bound`.
    Applicable { bound: BoundReport, pass: bool },
    /// No bound applies to this run; never a silent pass.
    NotApplicable { reason: String },
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundCheck {
    pub policy: String,
    pub horizon: u64,
    pub replications: u64,
    pub empirical_cum_regret: f64,
    /// Measured own-arm fractions per type, when defined.
    pub measured_f1: Option<f64>,
    pub measured_f2: Option<f64>,
    #[serde(flatten)]
    pub status: BoundStatus,
}

impl BoundCheck {
    pub fn passed(&self) -> Option<bool> {
        match &self.status {
            BoundStatus::Applicable { pass, .. } => Some(*pass),
            BoundStatus::NotApplicable { .. } => None,
        }
    }
}

fn not_applicable(config: &SimConfig, result: &AggregateResult, reason: String) -> BoundCheck {
    BoundCheck {
        policy: config.policy.label(),
        horizon: config.horizon,
        replications: config.replications,
        empirical_cum_regret: result.final_mean_cum_regret(),
        measured_f1: None,
        measured_f2: None,
        status: BoundStatus::NotApplicable { reason },
    }
}

/// Compares the run's mean cumulative regret at the horizon against the
/// applicable bound. Explore-then-commit is covered only for symmetric
/// matrices; Thompson sampling uses the empirically measured own-arm
/// fractions; everything else reports not-applicable.
pub fn report_bounds(config: &SimConfig, result: &AggregateResult) -> BoundCheck {
    let b = &config.reward_matrix;
    match &config.policy {
        PolicySpec::Etc { exploration_len, .. } => {
            if !b.is_symmetric_two_arm() {
                return not_applicable(
                    config,
                    result,
                    "the explore-then-commit bound covers only symmetric matrices \
                     (b11 = b22, b12 = b21)"
                        .into(),
                );
            }
            let delta1 = match b.gaps() {
                Ok(g) if g.delta1 > 0.0 => g.delta1,
                _ => {
                    return not_applicable(
                        config,
                        result,
                        "the gap is zero; the bound is vacuous".into(),
                    )
                }
            };
            match etc_regret_bound(*exploration_len, config.horizon, delta1) {
                Ok(bound) => {
                    let empirical = result.final_mean_cum_regret();
                    let pass = empirical <= bound.value;
                    BoundCheck {
                        policy: config.policy.label(),
                        horizon: config.horizon,
                        replications: config.replications,
                        empirical_cum_regret: empirical,
                        measured_f1: result.own_arm_fraction(0),
                        measured_f2: result.own_arm_fraction(1),
                        status: BoundStatus::Applicable { bound, pass },
                    }
                }
                Err(e) => not_applicable(config, result, e.to_string()),
            }
        }
        PolicySpec::ThompsonSampling => {
            let gaps = match b.gaps() {
                Ok(g) => g,
                Err(e) => return not_applicable(config, result, e.to_string()),
            };
            let z_star = match optimal_policy_two_arm(b).and_then(|opt| asymptote(b, &opt)) {
                Ok(z) => z,
                Err(e) => return not_applicable(config, result, e.to_string()),
            };
            let (f1, f2) = (result.own_arm_fraction(0), result.own_arm_fraction(1));
            let (Some(f1), Some(f2)) = (f1, f2) else {
                return not_applicable(
                    config,
                    result,
                    "a user type never arrived; the own-arm fractions are undefined".into(),
                );
            };
            match ts_regret_bound(config.horizon, gaps.delta1, gaps.delta2, z_star, f1, f2) {
                Ok(bound) => {
                    let empirical = result.final_mean_cum_regret();
                    let pass = empirical <= bound.value;
                    BoundCheck {
                        policy: config.policy.label(),
                        horizon: config.horizon,
                        replications: config.replications,
                        empirical_cum_regret: empirical,
                        measured_f1: Some(f1),
                        measured_f2: Some(f2),
                        status: BoundStatus::Applicable { bound, pass },
                    }
                }
                Err(e) => not_applicable(config, result, e.to_string()),
            }
        }
        PolicySpec::OptimalKnownB => not_applicable(
            config,
            result,
            "the optimal policy accrues zero regret; no bound applies".into(),
        ),
        other => not_applicable(
            config,
            result,
            format!("no closed-form bound covers the {} policy", other.label()),
        ),
    }
}
