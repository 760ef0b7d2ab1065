//! Closed-form trajectories, asymptotes, one-step regret, and the regret
//! bounds. These double as library functions and as oracles for the
//! simulation tests.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{RewardMatrix, TwoArmPolicy};
use crate::policies::optimal_policy_two_arm;

fn check_share(name: &'static str, value: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&value) || !value.is_finite() {
        return Err(Error::InvalidProbability { name, value });
    }
    Ok(())
}

fn check_n0(n0: u64) -> Result<()> {
    if n0 == 0 {
        return Err(Error::InvalidConfig(
            "the initial ball count N0 must be at least 1".into(),
        ));
    }
    Ok(())
}

/// Expected target share after `t` steps of the growing urn under a fixed
/// `(p, q)` policy:
///
/// `z1(t) = d2/(d1+d2) + (z0 - d2/(d1+d2)) (1 + t/N0)^-(d1+d2)`.
///
/// With degenerate drift (`d1 + d2 = 0`) the share never moves and `z0` is
/// returned for every `t`.
pub fn trajectory_did(
    b: &RewardMatrix,
    policy: &TwoArmPolicy,
    z0: f64,
    n0: u64,
    t: f64,
) -> Result<f64> {
    check_share("z0", z0)?;
    check_n0(n0)?;
    let d = b.drift(policy)?;
    if d.is_degenerate() {
        return Ok(z0);
    }
    let limit = d.d2 / d.total();
    Ok(limit + (z0 - limit) * (1.0 + t / n0 as f64).powf(-d.total()))
}

/// Expected target share after `t` steps of the fixed-size urn:
///
/// `z1(t) = d2/(d1+d2) + (z0 - d2/(d1+d2)) exp(-t (d1+d2)/N0)`.
pub fn trajectory_cid(
    b: &RewardMatrix,
    policy: &TwoArmPolicy,
    z0: f64,
    n0: u64,
    t: f64,
) -> Result<f64> {
    check_share("z0", z0)?;
    check_n0(n0)?;
    let d = b.drift(policy)?;
    if d.is_degenerate() {
        return Ok(z0);
    }
    let limit = d.d2 / d.total();
    Ok(limit + (z0 - limit) * (-t * d.total() / n0 as f64).exp())
}

/// Asymptotic target share `d2 / (d1 + d2)` of a fixed policy; identical
/// under both kinds of dynamics.
pub fn asymptote(b: &RewardMatrix, policy: &TwoArmPolicy) -> Result<f64> {
    let d = b.drift(policy)?;
    if d.is_degenerate() {
        return Err(Error::DegenerateDrift);
    }
    Ok(d.d2 / d.total())
}

/// One-step regret of playing `(p_t, q_t)` at target share `z1`:
///
/// `R_t = z1 |1{b11+b12-1>0} - p_t| D1 + (1-z1) |1{b21+b22-1<0} - q_t| D2`.
///
/// Zero exactly when the parameters equal the optimal indicators.
pub fn per_step_regret(b: &RewardMatrix, z1: f64, params: &TwoArmPolicy) -> Result<f64> {
    debug_assert!((0.0..=1.0).contains(&z1), "share {z1} out of range");
    let gaps = b.gaps()?;
    let opt = optimal_policy_two_arm(b)?;
    Ok(z1 * (opt.p() - params.p()).abs() * gaps.delta1
        + (1.0 - z1) * (opt.q() - params.q()).abs() * gaps.delta2)
}

/// Which bound a [`BoundReport`] carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BoundKind {
    /// Explore-then-commit bound at an explicit exploration length.
    EtcRaw,
    /// Explore-then-commit bound at the horizon-tuned length `m*`.
    EtcLog,
    /// Thompson sampling bound.
    Ts,
}

/// Inputs a bound was evaluated at; unused fields stay `None`.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct BoundInputs {
    pub exploration_len: Option<u64>,
    pub horizon: Option<u64>,
    pub delta1: Option<f64>,
    pub delta2: Option<f64>,
    pub z_star: Option<f64>,
    pub f1: Option<f64>,
    pub f2: Option<f64>,
}

/// A cumulative-regret upper bound together with the inputs it used.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub kind: BoundKind,
    pub value: f64,
    pub inputs: BoundInputs,
}

/// Explore-then-commit cumulative-regret bound for a symmetric matrix
/// (`b11 = b22`, `b12 = b21`, caller-asserted):
///
/// `R <= m D1 / 2 + (T - m) D1 exp(-m D1^2 / 8)`.
pub fn etc_regret_bound(m: u64, horizon: u64, delta1: f64) -> Result<BoundReport> {
    if delta1 <= 0.0 {
        return Err(Error::ZeroGap);
    }
    if m == 0 || m > horizon {
        return Err(Error::BadExplorationLength { m, horizon });
    }
    let mf = m as f64;
    let value = mf * delta1 / 2.0
        + (horizon - m) as f64 * delta1 * (-mf * delta1 * delta1 / 8.0).exp();
    Ok(BoundReport {
        kind: BoundKind::EtcRaw,
        value,
        inputs: BoundInputs {
            exploration_len: Some(m),
            horizon: Some(horizon),
            delta1: Some(delta1),
            ..BoundInputs::default()
        },
    })
}

/// Horizon-tuned exploration length `m* = ceil(8 ln(T) / D1^2)` (natural
/// log), the choice that makes the bound logarithmic in `T`.
pub fn etc_exploration_length(horizon: u64, delta1: f64) -> Result<u64> {
    if delta1 <= 0.0 {
        return Err(Error::ZeroGap);
    }
    let m = (8.0 * (horizon as f64).ln() / (delta1 * delta1)).ceil();
    Ok(m.max(1.0) as u64)
}

/// Explore-then-commit bound evaluated at the horizon-tuned length `m*`.
/// Fails when `m*` exceeds the horizon (the tuning needs `T` large enough).
pub fn etc_regret_bound_auto(horizon: u64, delta1: f64) -> Result<BoundReport> {
    let m = etc_exploration_length(horizon, delta1)?;
    let mut report = etc_regret_bound(m, horizon, delta1)?;
    report.kind = BoundKind::EtcLog;
    Ok(report)
}

/// Thompson sampling cumulative-regret bound:
///
/// `R <= (z*)^2 / 4 (1/(f1(1-f1) D1) + 1/(f2(1-f2) D2)) ln(T)`,
///
/// where `z*` is the asymptotic share of the optimal policy and `f_i` the
/// fraction of time type `i` was shown its own arm (measured empirically).
pub fn ts_regret_bound(
    horizon: u64,
    delta1: f64,
    delta2: f64,
    z_star: f64,
    f1: f64,
    f2: f64,
) -> Result<BoundReport> {
    if delta1 <= 0.0 || delta2 <= 0.0 {
        return Err(Error::ZeroGap);
    }
    if !(z_star > 0.0 && z_star <= 1.0) {
        return Err(Error::InvalidProbability {
            name: "z_star",
            value: z_star,
        });
    }
    for (name, f) in [("f1", f1), ("f2", f2)] {
        if !(f > 0.0 && f < 1.0) {
            return Err(Error::OutOfDomain { name, value: f });
        }
    }
    let value = z_star * z_star / 4.0
        * (1.0 / (f1 * (1.0 - f1) * delta1) + 1.0 / (f2 * (1.0 - f2) * delta2))
        * (horizon as f64).ln();
    Ok(BoundReport {
        kind: BoundKind::Ts,
        value,
        inputs: BoundInputs {
            horizon: Some(horizon),
            delta1: Some(delta1),
            delta2: Some(delta2),
            z_star: Some(z_star),
            f1: Some(f1),
            f2: Some(f2),
            ..BoundInputs::default()
        },
    })
}

fn alt_regret_coefficient(b: &RewardMatrix) -> Result<f64> {
    if b.n_arms() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: b.n_arms(),
        });
    }
    let pos = |x: f64| x.max(0.0);
    Ok(pos(b.mean(0, 0) + b.mean(0, 1) - 1.0) + (1.0 - b.mean(0, 1))
        - pos(1.0 - b.mean(1, 0) - b.mean(1, 1))
        - b.mean(1, 0))
}

/// Gap between this regret definition and the trajectory-conditioned one:
/// `(z1 - z1*) ((b11+b12-1)^+ + (1-b12) - (1-b21-b22)^+ - b21)`.
pub fn regret_definition_gap(b: &RewardMatrix, z1: f64, z1_star: f64) -> Result<f64> {
    check_share("z1", z1)?;
    check_share("z1_star", z1_star)?;
    Ok((z1 - z1_star) * alt_regret_coefficient(b)?)
}

/// Whether the trajectory-conditioned regret is dominated by this one:
/// true iff `(b11+b12-1)^+ + (1-b12) <= (1-b21-b22)^+ + b21`.
pub fn alt_regret_dominated(b: &RewardMatrix) -> Result<bool> {
    Ok(alt_regret_coefficient(b)? <= 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b1() -> RewardMatrix {
        RewardMatrix::two_arm(0.9, 0.4, 0.2, 0.6).unwrap()
    }

    fn own_own() -> TwoArmPolicy {
        TwoArmPolicy::corner(true, true)
    }

    #[test]
    fn trajectories_start_at_the_initial_share() {
        let b = b1();
        for z0 in [0.0, 0.25, 0.5, 1.0] {
            assert_eq!(trajectory_did(&b, &own_own(), z0, 20, 0.0).unwrap(), z0);
            assert_eq!(trajectory_cid(&b, &own_own(), z0, 20, 0.0).unwrap(), z0);
        }
    }

    #[test]
    fn the_asymptote_is_a_fixed_point_of_both_trajectories() {
        let b = b1();
        let z_star = asymptote(&b, &own_own()).unwrap();
        for t in [1.0, 10.0, 1000.0] {
            let did = trajectory_did(&b, &own_own(), z_star, 20, t).unwrap();
            let cid = trajectory_cid(&b, &own_own(), z_star, 20, t).unwrap();
            assert!((did - z_star).abs() < 1e-12);
            assert!((cid - z_star).abs() < 1e-12);
        }
    }

    #[test]
    fn degenerate_drift_freezes_the_trajectory() {
        let b = RewardMatrix::two_arm(1.0, 0.4, 0.2, 1.0).unwrap();
        let policy = own_own();
        assert_eq!(trajectory_did(&b, &policy, 0.37, 20, 500.0).unwrap(), 0.37);
        assert_eq!(trajectory_cid(&b, &policy, 0.37, 20, 500.0).unwrap(), 0.37);
        assert_eq!(asymptote(&b, &policy).unwrap_err(), Error::DegenerateDrift);
    }

    #[test]
    fn cid_trajectory_approaches_the_asymptote() {
        let b = b1();
        let z_star = asymptote(&b, &own_own()).unwrap();
        let far = trajectory_cid(&b, &own_own(), 0.5, 20, 2000.0).unwrap();
        assert!((far - z_star).abs() < 1e-9);
    }

    #[test]
    fn asymptotes_match_the_figure_captions() {
        let cases = [
            ((0.9, 0.4, 0.2, 0.6), 0.8),
            ((0.9, 0.4, 0.6, 0.7), 6.0 / 7.0),
            ((0.7, 0.1, 0.3, 0.5), 5.0 / 6.0),
            ((0.7, 0.1, 0.6, 0.6), 6.0 / 7.0),
        ];
        for ((b11, b12, b21, b22), expected) in cases {
            let b = RewardMatrix::two_arm(b11, b12, b21, b22).unwrap();
            let opt = optimal_policy_two_arm(&b).unwrap();
            let z = asymptote(&b, &opt).unwrap();
            assert!((z - expected).abs() < 1e-12, "matrix {b11} {b12} {b21} {b22}");
        }
    }

    #[test]
    fn regret_vanishes_at_the_optimal_policy() {
        for b in [
            b1(),
            RewardMatrix::two_arm(0.7, 0.1, 0.3, 0.5).unwrap(),
            RewardMatrix::two_arm(0.9, 0.7, 0.7, 0.9).unwrap(),
        ] {
            let opt = optimal_policy_two_arm(&b).unwrap();
            for z in [0.0, 0.3, 1.0] {
                assert_eq!(per_step_regret(&b, z, &opt).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn regret_of_the_anti_policy_at_even_shares() {
        let r = per_step_regret(&b1(), 0.5, &TwoArmPolicy::corner(false, false)).unwrap();
        assert!((r - 0.25).abs() < 1e-12);
    }

    #[test]
    fn regret_of_the_uniform_policy_at_even_shares() {
        let r = per_step_regret(&b1(), 0.5, &TwoArmPolicy::new(0.5, 0.5).unwrap()).unwrap();
        assert!((r - 0.125).abs() < 1e-12);
    }

    #[test]
    fn etc_bound_with_full_exploration_is_linear() {
        let report = etc_regret_bound(1000, 1000, 0.6).unwrap();
        assert!((report.value - 1000.0 * 0.6 / 2.0).abs() < 1e-9);
    }

    #[test]
    fn etc_tuned_exploration_length_for_the_symmetric_matrix() {
        assert_eq!(etc_exploration_length(1000, 0.6).unwrap(), 154);
    }

    #[test]
    fn etc_bound_at_the_tuned_length() {
        let report = etc_regret_bound(154, 1000, 0.6).unwrap();
        // 46.2 + 846 * 0.6 * exp(-6.93)
        let expected = 154.0 * 0.3 + 846.0 * 0.6 * (-6.93f64).exp();
        assert!((report.value - expected).abs() < 1e-9);
        assert!((report.value - 46.7).abs() < 0.05);
        let auto = etc_regret_bound_auto(1000, 0.6).unwrap();
        assert_eq!(auto.kind, BoundKind::EtcLog);
        assert_eq!(auto.value, report.value);
        assert_eq!(auto.inputs.exploration_len, Some(154));
    }

    #[test]
    fn etc_bound_rejects_bad_inputs() {
        assert_eq!(etc_regret_bound(10, 5, 0.6).unwrap_err(), Error::BadExplorationLength { m: 10, horizon: 5 });
        assert_eq!(etc_regret_bound(10, 100, 0.0).unwrap_err(), Error::ZeroGap);
        assert_eq!(etc_exploration_length(1000, 0.0).unwrap_err(), Error::ZeroGap);
    }

    #[test]
    fn ts_bound_shrinks_with_the_asymptotic_share() {
        let small = ts_regret_bound(1000, 0.3, 0.2, 1e-6, 0.5, 0.5).unwrap();
        assert!(small.value < 1e-9);
    }

    #[test]
    fn ts_bound_symmetric_simplification() {
        // f1 = f2 = 1/2 and equal gaps simplify to 2 (z*)^2 ln(T) / delta
        let delta = 0.4;
        let z_star = 0.7;
        let report = ts_regret_bound(1000, delta, delta, z_star, 0.5, 0.5).unwrap();
        let expected = 2.0 * z_star * z_star * (1000f64).ln() / delta;
        assert!((report.value - expected).abs() < 1e-9);
    }

    #[test]
    fn ts_bound_at_the_first_figure_matrix() {
        let report = ts_regret_bound(1000, 0.3, 0.2, 0.8, 0.5, 0.5).unwrap();
        assert!((report.value - 36.8).abs() < 0.1, "value {}", report.value);
    }

    #[test]
    fn ts_bound_rejects_boundary_fractions() {
        assert_eq!(
            ts_regret_bound(1000, 0.3, 0.2, 0.8, 0.0, 0.5).unwrap_err(),
            Error::OutOfDomain { name: "f1", value: 0.0 }
        );
        assert_eq!(
            ts_regret_bound(1000, 0.3, 0.2, 0.8, 0.5, 1.0).unwrap_err(),
            Error::OutOfDomain { name: "f2", value: 1.0 }
        );
    }

    #[test]
    fn regret_definition_gap_vanishes_at_equal_states() {
        assert_eq!(regret_definition_gap(&b1(), 0.4, 0.4).unwrap(), 0.0);
    }

    #[test]
    fn regret_definition_comparison_on_the_figure_matrix() {
        // coefficient = 0.3 + 0.6 - 0.2 - 0.2 = 0.5 > 0: not dominated
        assert!(!alt_regret_dominated(&b1()).unwrap());
        let gap = regret_definition_gap(&b1(), 0.6, 0.4).unwrap();
        assert!((gap - 0.2 * 0.5).abs() < 1e-12);
    }

    #[test]
    fn regret_definition_comparison_at_the_symmetric_tie() {
        let b = RewardMatrix::two_arm(0.5, 0.5, 0.5, 0.5).unwrap();
        assert!(alt_regret_dominated(&b).unwrap());
    }
}
