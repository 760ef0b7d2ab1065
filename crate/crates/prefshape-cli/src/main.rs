use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use prefshape::{run_competing, run_monte_carlo};
use prefshape_cli::{
    config::{self, EtcLength, Experiment, PolicyChoice},
    emit_csv, emit_popularity_csv, preset, report_bounds, write_json, BoundStatus, CliError,
    RunMetadata,
};

/// Preference-shaping bandit experiments: urn dynamics, shaping policies,
/// and Monte Carlo regret curves, written out as CSV.
#[derive(Debug, Parser)]
#[command(name = "prefshape", version, after_help = preset_help())]
struct Cli {
    /// Named experiment preset.
    #[arg(long, conflicts_with = "config")]
    preset: Option<String>,

    /// JSON experiment description.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Base seed; replication r runs on seed base_seed + r.
    #[arg(long)]
    seed: Option<u64>,

    /// Number of replications.
    #[arg(long)]
    reps: Option<u64>,

    /// Steps per episode.
    #[arg(long)]
    horizon: Option<u64>,

    /// Output directory for CSV, metadata, and bound reports.
    #[arg(long, default_value = "out")]
    out: PathBuf,

    /// Run one policy instead of the experiment's own list:
    /// optimal | etc | ts | fixed:P,Q | narm-optimal | narm-ts
    #[arg(long)]
    policy: Option<String>,

    /// Urn dynamics: did | cid.
    #[arg(long)]
    dynamics: Option<String>,

    /// ETC exploration length: a step count, or "auto" for 8 ln(T)/delta1^2.
    #[arg(long, value_name = "INT|auto")]
    etc_m: Option<String>,

    /// ETC estimator: paper | unbiased.
    #[arg(long)]
    etc_estimator: Option<String>,
}

fn preset_help() -> String {
    format!("Presets:\n  {}", preset::PRESET_NAMES.join("\n  "))
}

fn parse_policy_flag(s: &str, cli: &Cli) -> Result<PolicyChoice, CliError> {
    let etc_length = match cli.etc_m.as_deref() {
        None | Some("auto") => EtcLength::Auto,
        Some(raw) => EtcLength::Steps(raw.parse::<u64>().map_err(|_| {
            CliError::Parse(format!("--etc-m: expected a step count or `auto`, got `{raw}`"))
        })?),
    };
    let estimator = match cli.etc_estimator.as_deref() {
        Some(s) => config::parse_estimator(s)?,
        None => prefshape::EtcEstimator::Paper,
    };
    match s {
        "optimal" => Ok(PolicyChoice::Optimal),
        "etc" => Ok(PolicyChoice::Etc {
            length: etc_length,
            estimator,
        }),
        "ts" => Ok(PolicyChoice::Ts),
        "narm-optimal" => Ok(PolicyChoice::NArmOptimal),
        "narm-ts" => Ok(PolicyChoice::NArmTs),
        other => {
            if let Some(rest) = other.strip_prefix("fixed:") {
                let parts: Vec<&str> = rest.split(',').collect();
                if parts.len() != 2 {
                    return Err(CliError::Parse(format!(
                        "--policy fixed takes `fixed:P,Q`, got `{other}`"
                    )));
                }
                let p: f64 = parts[0].parse().map_err(|_| {
                    CliError::Parse(format!("--policy fixed: `{}` is not a number", parts[0]))
                })?;
                let q: f64 = parts[1].parse().map_err(|_| {
                    CliError::Parse(format!("--policy fixed: `{}` is not a number", parts[1]))
                })?;
                Ok(PolicyChoice::Fixed { p, q })
            } else {
                Err(CliError::Parse(format!(
                    "--policy: expected optimal | etc | ts | fixed:P,Q | narm-optimal | narm-ts, \
                     got `{other}`"
                )))
            }
        }
    }
}

fn apply_overrides(experiment: &mut Experiment, cli: &Cli) -> Result<(), CliError> {
    let dynamics = cli.dynamics.as_deref().map(config::parse_dynamics).transpose()?;
    match experiment {
        Experiment::Single { plans, .. } => {
            if let Some(policy_flag) = &cli.policy {
                let choice = parse_policy_flag(policy_flag, cli)?;
                let mut plan = plans
                    .first()
                    .expect("experiments have at least one run")
                    .clone();
                plan.policy = choice;
                plan.label = None;
                *plans = vec![plan];
            }
            for plan in plans.iter_mut() {
                if let Some(d) = dynamics {
                    plan.dynamics = d;
                }
                if let Some(s) = cli.seed {
                    plan.base_seed = s;
                }
                if let Some(r) = cli.reps {
                    plan.replications = r;
                }
                if let Some(h) = cli.horizon {
                    plan.horizon = h;
                }
                if let PolicyChoice::Etc { length, estimator } = &mut plan.policy {
                    if let Some(raw) = cli.etc_m.as_deref() {
                        *length = match raw {
                            "auto" => EtcLength::Auto,
                            other => EtcLength::Steps(other.parse::<u64>().map_err(|_| {
                                CliError::Parse(format!(
                                    "--etc-m: expected a step count or `auto`, got `{other}`"
                                ))
                            })?),
                        };
                    }
                    if let Some(s) = cli.etc_estimator.as_deref() {
                        *estimator = config::parse_estimator(s)?;
                    }
                }
            }
        }
        Experiment::Competing { plan, .. } => {
            if cli.policy.is_some() {
                return Err(CliError::Parse(
                    "--policy does not apply to competing experiments".into(),
                ));
            }
            if let Some(d) = dynamics {
                plan.dynamics = d;
            }
            if let Some(s) = cli.seed {
                plan.base_seed = s;
            }
            if let Some(r) = cli.reps {
                plan.replications = r;
            }
            if let Some(h) = cli.horizon {
                plan.horizon = h;
            }
        }
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let mut experiment = match (&cli.preset, &cli.config) {
        (Some(name), None) => preset::resolve(name)?,
        (None, Some(path)) => config::parse_config_file(path)?,
        (None, None) => {
            return Err(CliError::Parse(
                "nothing to run: pass --preset NAME or --config PATH (see --help)".into(),
            ))
        }
        (Some(_), Some(_)) => unreachable!("clap rejects the combination"),
    };
    apply_overrides(&mut experiment, cli)?;

    let name = experiment.name().to_string();
    match &experiment {
        Experiment::Single { plans, .. } => {
            for plan in plans {
                let (label, config) = plan.resolve()?;
                let result = run_monte_carlo(&config)?;
                let csv_path = cli.out.join(format!("{name}-{label}.csv"));
                let meta = RunMetadata::single(&name, &label, &config);
                emit_csv(&result, &csv_path, &meta)?;

                let check = report_bounds(&config, &result);
                let bounds_path = cli.out.join(format!("{name}-{label}.bounds.json"));
                write_json(&bounds_path, &check)?;

                let bound_note = match &check.status {
                    BoundStatus::Applicable { bound, pass } => format!(
                        "bound {:.4} -> {}",
                        bound.value,
                        if *pass { "pass" } else { "FAIL" }
                    ),
                    BoundStatus::NotApplicable { .. } => "bound n/a".into(),
                };
                println!(
                    "{name}/{label}: final z1 mean {:.4}, cumulative regret {:.4} ({bound_note}) -> {}",
                    result.final_mean_share(),
                    result.final_mean_cum_regret(),
                    csv_path.display()
                );
            }
        }
        Experiment::Competing { plan, .. } => {
            let (label, config) = plan.resolve()?;
            let result = run_competing(&config)?;
            let csv_path = cli.out.join(format!("{name}-{label}.csv"));
            let meta = RunMetadata::competing(&name, &label, &config);
            emit_csv(&result.aggregate, &csv_path, &meta)?;
            let pop_path = cli.out.join(format!("{name}-{label}.popularity.csv"));
            emit_popularity_csv(&result, &pop_path)?;
            let last = result
                .mean_first_share
                .each_ref()
                .map(|row| *row.last().expect("horizon >= 1"));
            println!(
                "{name}/{label}: final z1 mean {:.4}, S1 popularity share by type ({:.4}, {:.4}) -> {}",
                result.aggregate.final_mean_share(),
                last[0],
                last[1],
                csv_path.display()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
