//! Named experiment presets mirroring the reference figure setups.

use prefshape::{DynamicsKind, EtcEstimator, RewardMatrix};

use crate::config::{CompetingPlan, EtcLength, Experiment, PolicyChoice, RunPlan};
use crate::error::{CliError, Result};

fn b(entries: (f64, f64, f64, f64)) -> RewardMatrix {
    RewardMatrix::two_arm(entries.0, entries.1, entries.2, entries.3)
        .expect("preset matrices are valid")
}

/// The four two-arm matrices of the share-vs-time figure set.
pub fn figure_matrices() -> [RewardMatrix; 4] {
    [
        b((0.9, 0.4, 0.2, 0.6)),
        b((0.9, 0.4, 0.6, 0.7)),
        b((0.7, 0.1, 0.3, 0.5)),
        b((0.7, 0.1, 0.6, 0.6)),
    ]
}

/// The symmetric matrix the closed-form explore-then-commit bound covers.
pub fn symmetric_matrix() -> RewardMatrix {
    b((0.9, 0.7, 0.7, 0.9))
}

fn policy_comparison(name: &str, matrix: RewardMatrix) -> Experiment {
    let plans = vec![
        RunPlan::new(matrix.clone(), PolicyChoice::Optimal),
        RunPlan::new(
            matrix.clone(),
            PolicyChoice::Etc {
                length: EtcLength::Auto,
                estimator: EtcEstimator::Paper,
            },
        ),
        RunPlan::new(matrix, PolicyChoice::Ts),
    ];
    Experiment::Single {
        name: name.to_string(),
        plans,
    }
}

fn ode_comparison(name: &str) -> Experiment {
    let matrix = b((0.9, 0.4, 0.2, 0.6));
    let plans = [1u64, 10, 100]
        .into_iter()
        .map(|reps| {
            let mut plan = RunPlan::new(matrix.clone(), PolicyChoice::Optimal)
                .labeled(&format!("optimal-r{reps}"));
            plan.replications = reps;
            plan
        })
        .collect();
    Experiment::Single {
        name: name.to_string(),
        plans,
    }
}

fn dynamics_comparison(name: &str, matrix: RewardMatrix) -> Experiment {
    let plans = [DynamicsKind::Did, DynamicsKind::Cid]
        .into_iter()
        .map(|dynamics| {
            let mut plan = RunPlan::new(matrix.clone(), PolicyChoice::Optimal)
                .labeled(&format!("optimal-{dynamics}"));
            plan.dynamics = dynamics;
            plan
        })
        .collect();
    Experiment::Single {
        name: name.to_string(),
        plans,
    }
}

fn n_arm_comparison(name: &str, n: usize, off: f64) -> Experiment {
    let matrix = RewardMatrix::with_diagonal(n, 0.9, off).expect("preset matrices are valid");
    let plans = [PolicyChoice::NArmOptimal, PolicyChoice::NArmTs]
        .into_iter()
        .map(|policy| {
            let mut plan = RunPlan::new(matrix.clone(), policy);
            plan.replications = 200;
            plan
        })
        .collect();
    Experiment::Single {
        name: name.to_string(),
        plans,
    }
}

fn competing(name: &str, matrix: RewardMatrix) -> Experiment {
    Experiment::Competing {
        name: name.to_string(),
        plan: CompetingPlan::new(matrix),
    }
}

pub const PRESET_NAMES: &[&str] = &[
    "fig-popvtime1-a",
    "fig-popvtime1-b",
    "fig-popvtime1-c",
    "fig-popvtime1-d",
    "fig-popvtimesym",
    "fig-odesimcomp",
    "fig-fixpopvtime-a",
    "fig-fixpopvtime-b",
    "fig-narm-3",
    "fig-narm-4",
    "fig-narm-5",
    "fig-competing-case1",
    "fig-competing-case2",
];

/// Resolves a preset name into its experiment.
pub fn resolve(name: &str) -> Result<Experiment> {
    let [b1, b2, b3, b4] = figure_matrices();
    match name {
        "fig-popvtime1-a" => Ok(policy_comparison(name, b1)),
        "fig-popvtime1-b" => Ok(policy_comparison(name, b2)),
        "fig-popvtime1-c" => Ok(policy_comparison(name, b3)),
        "fig-popvtime1-d" => Ok(policy_comparison(name, b4)),
        "fig-popvtimesym" => Ok(policy_comparison(name, symmetric_matrix())),
        "fig-odesimcomp" => Ok(ode_comparison(name)),
        "fig-fixpopvtime-a" => Ok(dynamics_comparison(name, b((0.7, 0.1, 0.2, 0.5)))),
        "fig-fixpopvtime-b" => Ok(dynamics_comparison(name, symmetric_matrix())),
        "fig-narm-3" => Ok(n_arm_comparison(name, 3, 0.7)),
        "fig-narm-4" => Ok(n_arm_comparison(name, 4, 0.6)),
        "fig-narm-5" => Ok(n_arm_comparison(name, 5, 0.7)),
        "fig-competing-case1" => Ok(competing(name, b1)),
        "fig-competing-case2" => Ok(competing(name, b((0.6, 0.2, 0.2, 0.6)))),
        other => Err(CliError::UnknownPreset {
            name: other.to_string(),
            available: PRESET_NAMES.join(", "),
        }),
    }
}
