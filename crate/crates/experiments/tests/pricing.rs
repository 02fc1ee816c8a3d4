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
use ngame::measure::Measure;
use ngame::model::{Policy, PolicyProfile};
use ngame::nonatomic::propagate;
use ngame_experiments::pricing::*;

fn env_on(spec: &ngame::GameSpec, pairs: &[(usize, usize)]) -> Measure<f64> {
    let pts: Vec<usize> = pairs.iter().map(|&(s, x)| spec.spaces.pair(s, x)).collect();
    Measure::empirical(spec.spaces.state_action.clone(), &pts).unwrap()
}

#[test]
fn zero_demand_freezes_stock() {
    let g = pricing_game(&PricingParams { demand_rate: 0.0, ..PricingParams::default() }).unwrap();
    let env = Measure::uniform(g.spaces.state_action.clone());
    for s in 0..=3 {
        for x in 0..3 {
            assert_eq!(g.dynamics.payoff(1, s, x, &env), 0.0);
            for i in 0..20 {
                assert_eq!(g.dynamics.transition(1, s, x, &env, i), s);
            }
        }
    }
}

#[test]
fn sales_follow_the_demand_grid() {
    let params = PricingParams::default();
    let g = pricing_game(&params).unwrap();
    let dy = PricingDynamics::new(params.clone());
    for pairs in [vec![(1, 0)], vec![(2, 2), (3, 1)], vec![(0, 0), (1, 1), (2, 2)]] {
        let env = env_on(&g, &pairs);
        let others: f64 = pairs.iter().map(|&(_, x)| params.prices[x]).sum::<f64>() / pairs.len() as f64;
        assert!((dy.average_price(&env) - others).abs() < 1e-12);
        for x in 0..3 {
            let z = params.intercept - params.own_sensitivity * params.prices[x] + params.cross_sensitivity * others;
            let q = params.demand_rate / (1.0 + (-z).exp());
            // Count levels (i + 1/2)/L below q directly.
            let sold = (0..20).filter(|&i| (i as f64 + 0.5) / 20.0 < q).count();
            let pay = g.dynamics.payoff(1, 2, x, &env);
            assert!((pay - params.prices[x] * sold as f64 / 20.0).abs() < 1e-12);
            let downs = (0..20).filter(|&i| g.dynamics.transition(1, 2, x, &env, i) == 1).count();
            assert_eq!(downs, sold);
            assert_eq!(g.dynamics.payoff(1, 0, x, &env), 0.0);
            assert_eq!(g.dynamics.transition(1, 0, x, &env, 0), 0);
        }
    }
}

#[test]
fn demand_moves_the_right_way() {
    let dy = PricingDynamics::new(PricingParams::default());
    assert!(dy.purchase_probability(1.0, 2.0) > dy.purchase_probability(2.0, 2.0));
    assert!(dy.purchase_probability(2.0, 3.0) > dy.purchase_probability(2.0, 1.0));
    assert!(dy.purchase_probability(0.0, 100.0) <= 0.9);
}

#[test]
fn single_price_single_unit_is_a_death_process() {
    let params = PricingParams { capacity: 1, prices: vec![1.0], ..PricingParams::default() };
    let g = pricing_game(&params).unwrap();
    let x = Policy::constant(2, 2, 0);
    let traj = propagate(&g, &Measure::dirac(g.spaces.states.clone(), 1).unwrap(), &PolicyProfile::repeated(x, 4)).unwrap();
    let dy = PricingDynamics::new(params);
    let q = dy.purchase_probability(1.0, 1.0);
    let p = (q * 20.0 - 0.5).ceil() / 20.0;
    for t in 1..=5 {
        let want = (1.0 - p).powi(t as i32 - 1);
        assert!((traj.sigma(t).weight(1) - want).abs() < 1e-12, "t={t}");
    }
}

#[test]
fn lock_in_refills_only_at_zero() {
    let params = PricingParams { lock_in: true, ..PricingParams::default() };
    let g = pricing_game(&params).unwrap();
    let env = Measure::uniform(g.spaces.state_action.clone());
    for x in 0..3 {
        for i in 0..20 {
            assert_eq!(g.dynamics.transition(1, 0, x, &env, i), 3);
            for s in 1..=3 {
                let next = g.dynamics.transition(1, s, x, &env, i);
                assert!(next == s || next == s - 1);
            }
        }
    }
}

#[test]
fn transient_stock_only_falls() {
    let g = pricing_game(&PricingParams::default()).unwrap();
    let profile = PolicyProfile::repeated(Policy::from_fn(4, 2, |s, gg| (s + gg) % 3), 4);
    let traj = propagate(&g, &Measure::uniform(g.spaces.states.clone()), &profile).unwrap();
    for t in 1..5 {
        // Mass at or below each level can only grow.
        for s in 0..=3 {
            let below = |k: usize| (0..=s).map(|j| traj.sigma(k).weight(j)).sum::<f64>();
            assert!(below(t + 1) >= below(t) - 1e-12);
        }
    }
}

#[test]
fn invalid_parameters_are_rejected() {
    let base = PricingParams::default();
    for bad in [
        PricingParams { capacity: 0, ..base.clone() },
        PricingParams { prices: vec![], ..base.clone() },
        PricingParams { prices: vec![1.0, 1.0], ..base.clone() },
        PricingParams { demand_rate: 1.5, ..base.clone() },
        PricingParams { demand_levels: 0, ..base.clone() },
        PricingParams { alpha: 1.0, ..base.clone() },
        PricingParams { horizon: 0, ..base.clone() },
    ] {
        assert!(bad.validate().is_err());
        assert!(pricing_game(&bad).is_err());
    }
    assert_eq!(base.payoff_bound(), 3.0);
    assert!(matches!(build_pricing_instance(&base, true).unwrap(), PricingInstance::Stationary(_)));
}
