// Copyright 2026 The ngame Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
mod common;

use std::sync::Arc;

use common::*;
use ngame::measure::Measure;
use ngame::model::{FnDynamics, Policy, PolicyProfile, StationarySpec};
use ngame::nonatomic::{propagate, step_env, value};
use ngame::stationary::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Payoff = fn(usize, usize, usize, &Measure<f64>) -> f64;
type Transition = fn(usize, usize, usize, &Measure<f64>, usize) -> usize;

fn fn_spec(dims: (usize, usize, usize, usize), alpha: f64, payoff: Payoff, transition: Transition) -> StationarySpec<f64> {
    let sp = spaces::<f64>(dims.0, dims.1, dims.2, dims.3);
    let gamma = Measure::uniform(sp.preshocks.clone());
    let iota = Measure::uniform(sp.postshocks.clone());
    StationarySpec::new(sp, gamma, iota, Arc::new(FnDynamics::new(payoff, transition)), 1.0, alpha).unwrap()
}

fn sup(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn identity_step_keeps_sigma() {
    let spec = fn_spec((3, 2, 2, 2), 0.5, |_, _, _, _| 0.0, |_, s, _, _, _| s);
    let sigma = Measure::new(spec.spaces.states.clone(), vec![0.1, 0.6, 0.3]).unwrap();
    let x = Policy::from_fn(3, 2, |s, g| (s + g) % 2);
    assert_eq!(step_env_stationary(&spec, &sigma, &x).unwrap(), sigma);
}

#[test]
fn constant_transition_collapses() {
    let spec = fn_spec((3, 2, 2, 2), 0.5, |_, _, _, _| 0.0, |_, _, _, _, _| 2);
    let sigma = Measure::uniform(spec.spaces.states.clone());
    let next = step_env_stationary(&spec, &sigma, &Policy::constant(3, 2, 1)).unwrap();
    assert_eq!(next, Measure::dirac(spec.spaces.states.clone(), 2).unwrap());
    let inv = invariant_env(&spec, &Policy::constant(3, 2, 1), &sigma, &1e-12, 10).unwrap();
    assert!(inv.converged);
    assert_eq!(inv.iterations, 1);
}

#[test]
fn stationary_step_equals_lifted_step() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..20 {
        let spec = table_stationary(&mut rng, (4, 3, 2, 3), 0.7);
        let game = spec.lift(3).unwrap();
        let x = random_policy(&mut rng, 4, 2, 3);
        let sigma = Measure::uniform(spec.spaces.states.clone());
        let a = step_env_stationary(&spec, &sigma, &x).unwrap();
        for t in 1..=3 {
            assert_eq!(a, step_env(&game, &sigma, &x, t).unwrap());
        }
    }
}

#[test]
fn two_state_chain_invariant_law() {
    // From 0 move up with probability 1/4; from 1 move down with probability 1/2.
    let spec = fn_spec((2, 1, 1, 4), 0.5, |_, _, _, _| 0.0, |_, s, _, _, i| match s {
        0 => usize::from(i == 0),
        _ => usize::from(i >= 2),
    });
    let x = Policy::constant(2, 1, 0);
    let inv = invariant_env(&spec, &x, &Measure::dirac(spec.spaces.states.clone(), 0).unwrap(), &1e-13, 10_000).unwrap();
    assert!(inv.converged);
    assert!((inv.sigma.weight(0) - 2.0 / 3.0).abs() < 1e-10, "{:?}", inv.sigma);
    assert!(inv.residual < 1e-13);
}

#[test]
fn invariant_law_matches_linear_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut checked = 0;
    for _ in 0..40 {
        let spec = table_stationary(&mut rng, (4, 2, 2, 3), 0.6);
        let x = random_policy(&mut rng, 4, 2, 2);
        let (p, _) = induced_chain(&spec, &x);
        // Mixing check: some power of P is strictly positive.
        let mut pk = p.clone();
        for _ in 0..8 {
            pk = (0..4).map(|i| (0..4).map(|j| (0..4).map(|k| pk[i][k] * p[k][j]).sum()).collect()).collect();
        }
        if pk.iter().flatten().any(|&v| v <= 0.0) {
            continue;
        }
        checked += 1;
        let oracle = stationary_law(&p);
        let guesses = vec![Measure::uniform(spec.spaces.states.clone())];
        let inv = invariant_env_restarts(&spec, &x, &guesses, &1e-13, 100_000).unwrap();
        assert!(inv.converged);
        assert!(sup(inv.sigma.weights(), &oracle) < 1e-10, "{:?} vs {oracle:?}", inv.sigma);
    }
    assert!(checked >= 5, "only {checked} mixing chains");
}

#[test]
fn restarts_need_guesses() {
    let spec = fn_spec((2, 1, 1, 1), 0.5, |_, _, _, _| 0.0, |_, s, _, _, _| s);
    assert!(invariant_env_restarts(&spec, &Policy::constant(2, 1, 0), &[], &1e-9, 10).is_err());
}

#[test]
fn discounted_values_match_linear_solve() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for alpha in [0.0, 0.3, 0.9] {
        for _ in 0..10 {
            let spec = table_stationary(&mut rng, (5, 3, 2, 2), alpha);
            let x = random_policy(&mut rng, 5, 2, 3);
            let (p, r) = induced_chain(&spec, &x);
            let sigma = Measure::uniform(spec.spaces.states.clone());
            let got = value_infty(&spec, &sigma, &x, None, &1e-10).unwrap();
            let want = discounted_values(&p, &r, alpha);
            assert!(sup(&got.values, &want) < 1e-9);
            assert!(got.error_bound < 1e-10);
            if alpha == 0.0 {
                assert_eq!(got.iterations, 1);
                assert!(sup(&got.values, &r) < 1e-15);
            }
            assert!(got.values.iter().all(|v| *v >= 0.0 && *v <= 1.0 / (1.0 - alpha) + 1e-12));
            assert!(got.cauchy_trace.windows(2).all(|w| w[1] <= alpha * w[0] * (1.0 + 1e-9) + 1e-14));
        }
    }
}

#[test]
fn constant_payoff_value_is_geometric() {
    let spec = fn_spec((3, 2, 2, 2), 0.75, |_, _, _, _| 0.5, |_, s, x, _, i| (s + x + i) % 3);
    let x = Policy::constant(3, 2, 0);
    let sigma = Measure::uniform(spec.spaces.states.clone());
    let got = value_infty(&spec, &sigma, &x, None, &1e-12).unwrap();
    assert!(got.values.iter().all(|v| (v - 2.0).abs() < 1e-12));
    assert!(value_infty(&spec, &sigma, &x, None, &0.0).is_err());
}

#[test]
fn deviation_changes_first_period_only() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let spec = table_stationary(&mut rng, (4, 3, 2, 2), 0.8);
    let x = random_policy(&mut rng, 4, 2, 3);
    let y = random_policy(&mut rng, 4, 2, 3);
    let sigma = Measure::uniform(spec.spaces.states.clone());
    let base = value_infty(&spec, &sigma, &x, None, &1e-12).unwrap();
    let dev = value_infty(&spec, &sigma, &x, Some(&y), &1e-12).unwrap();
    let (p, r) = induced_chain(&spec, &x);
    let v = discounted_values(&p, &r, 0.8);
    let (py, ry) = induced_chain(&spec, &y);
    for s in 0..4 {
        let want = ry[s] + 0.8 * (0..4).map(|k| py[s][k] * v[k]).sum::<f64>();
        assert!((dev.values[s] - want).abs() < 1e-10);
    }
    assert!(sup(&base.values, &v) < 1e-10);
}

#[test]
fn value_iterates_agree_with_lifted_values() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let spec = table_stationary(&mut rng, (4, 2, 2, 3), 0.9);
    let x = random_policy(&mut rng, 4, 2, 2);
    let sigma = Measure::uniform(spec.spaces.states.clone());
    let h = 6;
    let its = value_iterates(&spec, &sigma, &x, h).unwrap();
    assert_eq!(its.len(), h + 1);
    let game = spec.lift(h).unwrap();
    let profile = PolicyProfile::repeated(x, h);
    let traj = propagate(&game, &sigma, &profile).unwrap();
    let table = value(&game, &profile, &traj, None).unwrap();
    for t in 1..=h {
        let scale = 0.9f64.powi(t as i32 - 1);
        let lifted: Vec<f64> = table.row(t).iter().map(|v| v / scale).collect();
        assert!(sup(&lifted, &its[h - t + 1]) < 1e-12);
    }
}

#[test]
fn dominant_policy_is_certified() {
    let spec = fn_spec((3, 2, 2, 2), 0.8, |_, _, x, _| x as f64, |_, s, x, _, i| (s + x + i) % 3);
    let x = Policy::constant(3, 2, 1);
    let sigma = invariant_env(&spec, &x, &Measure::uniform(spec.spaces.states.clone()), &1e-12, 1000).unwrap().sigma;
    let rep = check_se(&spec, &x, &sigma, &1e-9).unwrap();
    assert!(rep.certified);
    assert_eq!(rep.gap, 0.0);
    assert_eq!(rep.best_response, x);

    let mut worse = x.clone();
    worse.set(1, 0, 0);
    let rep = check_se(&spec, &worse, &sigma, &1e-9).unwrap();
    assert!(!rep.certified);
    assert!(rep.pointwise >= 0.5 - 1e-9);
    assert_eq!(rep.best_response, x);
}

#[test]
fn solver_matches_mdp_optimum_when_environment_is_inert() {
    let mut rng = ChaCha8Rng::seed_from_u64(34);
    for _ in 0..15 {
        let spec = table_stationary(&mut rng, (3, 2, 2, 2), 0.7);
        let sol = solve_se(&spec, &SeOptions::default()).unwrap();
        assert!(sol.converged, "{} {} {} {:?}", sol.residual, sol.gap, sol.iterations, sol.sigma_star);
        assert!(sol.residual + sol.gap <= 1e-9);
        let mut best = [f64::NEG_INFINITY; 3];
        for p in all_policies(3, 2, 2) {
            let (pm, r) = induced_chain(&spec, &p);
            for (b, v) in best.iter_mut().zip(discounted_values(&pm, &r, 0.7)) {
                *b = b.max(v);
            }
        }
        for (s, w) in sol.sigma_star.support() {
            assert!(*w <= 0.0 || (sol.value[s] - best[s]).abs() < 1e-7, "state {s}");
        }
    }
}

#[test]
fn truncation_depth_examples() {
    assert_eq!(truncation_depth(0.0, 1.0, 0.1).unwrap(), 1);
    let d = truncation_depth(0.5, 1.0, 0.1).unwrap();
    let raw = (6.0f64 / (0.1 * 0.5)).ln() / 2.0f64.ln() + 1.0;
    assert_eq!(d, raw.ceil() as usize);
    assert!(0.5f64.powi(d as i32 - 1) * 6.0 / 0.5 <= 0.1 + 1e-12);
    assert!(truncation_depth(1.0, 1.0, 0.1).is_err());
    assert!(truncation_depth(0.5, 1.0, 0.0).is_err());
}

#[test]
fn stationary_regret_of_self_is_zero() {
    let spec = fn_spec((3, 2, 2, 2), 0.5, |_, s, x, env| *env.weight(s * 2 + x), |_, s, x, _, i| (s + x + i) % 3);
    let x = Policy::constant(3, 2, 0);
    let sigma = Measure::uniform(spec.spaces.states.clone());
    let rows = stationary_regret_experiment(&spec, &x, &sigma, &x, &[3, 6], 20, 0.1, &[1, 2]).unwrap();
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r.estimate.gap.mean == 0.0 && r.depth == truncation_depth(0.5, 1.0, 0.1).unwrap()));
}

#[test]
fn periodic_chain_needs_damping() {
    let spec = fn_spec((2, 1, 1, 1), 0.5, |_, _, _, _| 0.0, |_, s, _, _, _| 1 - s);
    let x = Policy::constant(2, 1, 0);
    let start = Measure::dirac(spec.spaces.states.clone(), 0).unwrap();
    let plain = invariant_env(&spec, &x, &start, &1e-12, 1_000_000).unwrap();
    assert!(!plain.converged);
    assert!(plain.iterations <= 3000, "stalled run kept going for {}", plain.iterations);
    assert_eq!(plain.residual, 1.0);
    let damped = invariant_env_damped(&spec, &x, &start, &1e-12, 500).unwrap();
    assert!(damped.converged);
    assert_eq!(damped.sigma, Measure::uniform(spec.spaces.states.clone()));
    let both = invariant_env_restarts(&spec, &x, &[start], &1e-12, 500).unwrap();
    assert!(both.converged);
}
