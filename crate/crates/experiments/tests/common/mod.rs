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
//! Independent oracles and random instances shared by the integration tests.

#![allow(dead_code)]

use std::sync::Arc;

use ngame::measure::{FiniteSpace, Measure};
use ngame::model::{FnDynamics, GameSpaces, GameSpec, Policy, PolicyProfile};
use ngame::Scalar;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;

pub type Q = BigRational;

pub fn q(n: i64, d: i64) -> Q {
    Q::new(n.into(), d.into())
}

/// Prohorov distance by brute force: every subset `A` of the space, every
/// candidate radius among the pairwise distances, strict fattening.
pub fn prohorov_oracle<T: Scalar>(mu: &Measure<T>, nu: &Measure<T>) -> T {
    let space = mu.space();
    let k = space.len();
    let mut levels = vec![T::zero()];
    for a in 0..k {
        for b in 0..k {
            let d = space.dist(a, b).clone();
            if !levels.contains(&d) {
                levels.push(d);
            }
        }
    }
    levels.sort_by(|a, b| a.partial_cmp(b).unwrap());
    // On the interval (d_j, d_{j+1}] the open fattening equals the closed
    // one at d_j, so the smallest feasible radius there is max(d_j, h_j).
    let mut best: Option<T> = None;
    for d in &levels {
        let mut h = T::zero();
        for mask in 1u32..(1 << k) {
            let mut lhs = T::zero();
            let mut rhs = T::zero();
            for p in 0..k {
                if mask & (1 << p) != 0 {
                    lhs = lhs + mu.weight(p).clone();
                }
                let near = (0..k).any(|a| mask & (1 << a) != 0 && space.dist(a, p) <= *d);
                if near {
                    rhs = rhs + nu.weight(p).clone();
                }
            }
            let excess = lhs - rhs;
            if excess > h {
                h = excess;
            }
        }
        let cand = if h > *d { h } else { d.clone() };
        if best.as_ref().is_none_or(|b| cand < *b) {
            best = Some(cand);
        }
    }
    best.unwrap()
}

/// A random line space with `k` points at distinct integer coordinates / 4.
pub fn random_line_q<R: Rng>(rng: &mut R, k: usize) -> Arc<FiniteSpace<Q>> {
    let mut coords: Vec<i64> = Vec::new();
    while coords.len() < k {
        let c = rng.gen_range(0..16);
        if !coords.contains(&c) {
            coords.push(c);
        }
    }
    let labels = (0..k).map(|i| format!("p{i}")).collect();
    let c: Vec<Q> = coords.iter().map(|&c| q(c, 4)).collect();
    Arc::new(FiniteSpace::line(labels, &c).unwrap())
}

/// Random measure supported on at most `max_support` points.
pub fn random_measure_q<R: Rng>(rng: &mut R, space: &Arc<FiniteSpace<Q>>, max_support: usize) -> Measure<Q> {
    let k = space.len();
    let support = rng.gen_range(1..=max_support.min(k));
    let mut w = vec![0i64; k];
    for _ in 0..support {
        w[rng.gen_range(0..k)] += rng.gen_range(1..10);
    }
    let total: i64 = w.iter().sum();
    Measure::new(space.clone(), w.iter().map(|&v| q(v, total)).collect()).unwrap()
}

/// Random game on two-point spaces with environment-dependent payoff and
/// transition, used by the enumeration oracle.
pub fn random_small_game<R: Rng>(rng: &mut R, horizon: usize) -> GameSpec<f64> {
    let two = |p: &str| Arc::new(FiniteSpace::<f64>::discrete(vec![format!("{p}0"), format!("{p}1")]).unwrap());
    let spaces = GameSpaces::new(two("s"), two("x"), two("g"), two("i"));
    let gw: f64 = rng.gen_range(0.2..0.8);
    let iw: f64 = rng.gen_range(0.2..0.8);
    let gamma = Measure::new(spaces.preshocks.clone(), vec![gw, 1.0 - gw]).unwrap();
    let iota = Measure::new(spaces.postshocks.clone(), vec![iw, 1.0 - iw]).unwrap();
    let base: Vec<f64> = (0..horizon * 4).map(|_| rng.gen_range(0.0..1.0)).collect();
    let slope: Vec<f64> = (0..horizon * 4).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let low: Vec<usize> = (0..horizon * 8).map(|_| rng.gen_range(0..2)).collect();
    let high: Vec<usize> = (0..horizon * 8).map(|_| rng.gen_range(0..2)).collect();
    let payoff = move |t: usize, s: usize, x: usize, env: &Measure<f64>| {
        let k = (t - 1) * 4 + s * 2 + x;
        base[k] + slope[k] * env.weight(3)
    };
    let transition = move |t: usize, s: usize, x: usize, env: &Measure<f64>, i: usize| {
        let k = (t - 1) * 8 + (s * 2 + x) * 2 + i;
        let busy = env.weight(0) + env.weight(1);
        if busy >= 0.5 { high[k] } else { low[k] }
    };
    GameSpec::new(
        horizon,
        spaces,
        gamma,
        iota,
        Arc::new(FnDynamics::new(payoff, transition)),
        vec![2.0; horizon],
    )
    .unwrap()
}

pub fn random_policy<R: Rng>(rng: &mut R, states: usize, preshocks: usize, actions: usize) -> Policy {
    let table = (0..states * preshocks).map(|_| rng.gen_range(0..actions)).collect();
    Policy::new(states, preshocks, table).unwrap()
}

/// Exact `v_{nt}` for player 0 by enumerating every shock vector.
pub fn enumerate_value(
    game: &GameSpec<f64>,
    t: usize,
    states: &[usize],
    profile: &PolicyProfile,
    deviation: Option<&Policy>,
) -> f64 {
    let sp = &game.spaces;
    let n = states.len();
    let (ng, ni) = (sp.preshocks.len(), sp.postshocks.len());
    let mut total = 0.0;
    for gcode in 0..ng.pow(n as u32) {
        let g: Vec<usize> = (0..n).map(|m| gcode / ng.pow(m as u32) % ng).collect();
        let pg: f64 = g.iter().map(|&v| game.gamma.weight(v)).product();
        let actions: Vec<usize> = (0..n)
            .map(|m| match deviation {
                Some(y) if m == 0 => y.action(states[m], g[m]),
                _ => profile.period(t).action(states[m], g[m]),
            })
            .collect();
        let envs: Vec<Measure<f64>> = (0..n)
            .map(|m| {
                let mut w = vec![0.0; sp.state_action.len()];
                for k in (0..n).filter(|&k| k != m) {
                    w[states[k] * sp.actions.len() + actions[k]] += 1.0 / (n - 1) as f64;
                }
                Measure::new(sp.state_action.clone(), w).unwrap()
            })
            .collect();
        let mut inner = game.dynamics.payoff(t, states[0], actions[0], &envs[0]);
        if t < game.horizon {
            for icode in 0..ni.pow(n as u32) {
                let i: Vec<usize> = (0..n).map(|m| icode / ni.pow(m as u32) % ni).collect();
                let pi: f64 = i.iter().map(|&v| game.iota.weight(v)).product();
                let next: Vec<usize> = (0..n)
                    .map(|m| game.dynamics.transition(t, states[m], actions[m], &envs[m], i[m]))
                    .collect();
                inner += pi * enumerate_value(game, t + 1, &next, profile, None);
            }
        }
        total += pg * inner;
    }
    total
}

pub fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        (v[k / 2 - 1] + v[k / 2]) / 2.0
    }
}

pub fn is_zero(v: &Q) -> bool {
    v.is_zero()
}

pub fn one() -> Q {
    Q::one()
}
