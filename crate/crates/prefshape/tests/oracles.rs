//! Independent numerical oracles for the closed-form layer: a Runge-Kutta
//! integrator for the share trajectories, a full branch enumeration for the
//! one-step regret, and the deterministic stochastic-approximation iterate.

use prefshape::{
    optimal_policy_two_arm, per_step_regret, trajectory_cid, trajectory_did, RewardMatrix,
    TwoArmPolicy,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Classic fourth-order Runge-Kutta with fixed step size.
fn rk4<F: Fn(f64, f64) -> f64>(f: F, mut z: f64, t_end: f64, h: f64) -> f64 {
    let steps = (t_end / h).round() as u64;
    let mut t = 0.0;
    for _ in 0..steps {
        let k1 = f(t, z);
        let k2 = f(t + h / 2.0, z + h / 2.0 * k1);
        let k3 = f(t + h / 2.0, z + h / 2.0 * k2);
        let k4 = f(t + h, z + h * k3);
        z += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        t += h;
    }
    z
}

fn b1() -> RewardMatrix {
    RewardMatrix::two_arm(0.9, 0.4, 0.2, 0.6).unwrap()
}

#[test]
fn growing_urn_trajectory_matches_numerical_integration() {
    let b = b1();
    let policy = TwoArmPolicy::corner(true, true);
    let d = b.drift(&policy).unwrap();
    let n0 = 20.0;
    let numeric = rk4(
        |t, z| (d.d2 - d.total() * z) / (n0 + t),
        0.5,
        1000.0,
        1e-3,
    );
    let closed = trajectory_did(&b, &policy, 0.5, 20, 1000.0).unwrap();
    assert!(
        (closed - numeric).abs() < 1e-4,
        "closed {closed} vs numeric {numeric}"
    );
}

#[test]
fn fixed_urn_trajectory_matches_numerical_integration() {
    let b = b1();
    let policy = TwoArmPolicy::corner(true, true);
    let d = b.drift(&policy).unwrap();
    let n0 = 20.0;
    let numeric = rk4(|_, z| (d.d2 - d.total() * z) / n0, 0.5, 1000.0, 1e-3);
    let closed = trajectory_cid(&b, &policy, 0.5, 20, 1000.0).unwrap();
    assert!(
        (closed - numeric).abs() < 1e-4,
        "closed {closed} vs numeric {numeric}"
    );
}

/// Expected gain of target-type balls in one step: full enumeration over the
/// (type, arm, reward) branches of the two-arm growing urn.
fn expected_gain(b: &RewardMatrix, z: f64, p: f64, q: f64) -> f64 {
    let mut total = 0.0;
    for (user_type, type_prob) in [(0usize, z), (1usize, 1.0 - z)] {
        for arm in 0..2usize {
            let own = arm == user_type;
            let arm_prob = match (user_type, own) {
                (0, true) => p,
                (0, false) => 1.0 - p,
                (1, true) => q,
                (1, false) => 1.0 - q,
                _ => unreachable!(),
            };
            let mean = b.mean(user_type, arm);
            for (reward, reward_prob) in [(true, mean), (false, 1.0 - mean)] {
                let w = reward as u64 as f64;
                // gain of color 0 is W 1{arm=0} + (1-W) 1{arm=1}
                let gain = w * (arm == 0) as u64 as f64 + (1.0 - w) * (arm == 1) as u64 as f64;
                total += type_prob * arm_prob * reward_prob * gain;
            }
        }
    }
    total
}

#[test]
fn one_step_regret_matches_the_branch_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..2000 {
        let b = RewardMatrix::two_arm(
            rng.random(),
            rng.random(),
            rng.random(),
            rng.random(),
        )
        .unwrap();
        let z: f64 = rng.random();
        let p: f64 = rng.random();
        let q: f64 = rng.random();
        let opt = optimal_policy_two_arm(&b).unwrap();
        let oracle = expected_gain(&b, z, opt.p(), opt.q()) - expected_gain(&b, z, p, q);
        let policy = TwoArmPolicy::new(p, q).unwrap();
        let direct = per_step_regret(&b, z, &policy).unwrap();
        assert!(
            (oracle - direct).abs() < 1e-12,
            "oracle {oracle} vs direct {direct}"
        );
    }
}

#[test]
fn one_step_regret_frozen_values_agree_with_the_enumeration() {
    let b = b1();
    let anti = expected_gain(&b, 0.5, 1.0, 1.0) - expected_gain(&b, 0.5, 0.0, 0.0);
    assert!((anti - 0.25).abs() < 1e-12, "anti-policy oracle {anti}");
    let uniform = expected_gain(&b, 0.5, 1.0, 1.0) - expected_gain(&b, 0.5, 0.5, 0.5);
    assert!((uniform - 0.125).abs() < 1e-12, "uniform oracle {uniform}");
}

#[test]
fn deterministic_share_iterate_converges_to_the_asymptote() {
    // z(t+1) = z(t) + (d2 - (d1 + d2) z(t)) / (N0 + t + 1) with no noise
    let b = b1();
    let d = b.drift(&TwoArmPolicy::corner(true, true)).unwrap();
    let n0 = 20.0;
    let mut z = 0.5;
    for t in 0..10_000_000u64 {
        z += (d.d2 - d.total() * z) / (n0 + t as f64 + 1.0);
    }
    let limit = d.d2 / d.total();
    assert!((z - limit).abs() < 1e-3, "iterate {z} vs limit {limit}");
}
