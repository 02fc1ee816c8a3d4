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
#![allow(dead_code, clippy::needless_range_loop)]

use std::sync::Arc;

use ngame::measure::{FiniteSpace, Measure};
use ngame::model::{FnDynamics, GameSpaces, GameSpec, Policy, StationarySpec, TableDynamics};
use num_rational::BigRational;
use rand::Rng;

pub type Q = BigRational;

pub fn q(n: i64, d: i64) -> Q {
    Q::new(n.into(), d.into())
}

pub fn discrete<T: ngame::Scalar>(prefix: &str, k: usize) -> Arc<FiniteSpace<T>> {
    Arc::new(FiniteSpace::discrete((0..k).map(|i| format!("{prefix}{i}")).collect()).unwrap())
}

pub fn spaces<T: ngame::Scalar>(ns: usize, nx: usize, ng: usize, ni: usize) -> GameSpaces<T> {
    GameSpaces::new(discrete("s", ns), discrete("x", nx), discrete("g", ng), discrete("i", ni))
}

pub fn random_weights_q<R: Rng>(rng: &mut R, k: usize) -> Vec<Q> {
    let raw: Vec<i64> = (0..k).map(|_| rng.gen_range(1..6)).collect();
    let total: i64 = raw.iter().sum();
    raw.iter().map(|&w| q(w, total)).collect()
}

pub fn random_measure_q<R: Rng>(rng: &mut R, space: &Arc<FiniteSpace<Q>>) -> Measure<Q> {
    Measure::new(space.clone(), random_weights_q(rng, space.len())).unwrap()
}

/// Random exact game whose payoff and transition depend on the in-action
/// environment through the mass on pair 0.
pub fn random_game_q<R: Rng>(rng: &mut R, horizon: usize, dims: (usize, usize, usize, usize)) -> GameSpec<Q> {
    let (ns, nx, ng, ni) = dims;
    let sp = spaces::<Q>(ns, nx, ng, ni);
    let gamma = Measure::new(sp.preshocks.clone(), random_weights_q(rng, ng)).unwrap();
    let iota = Measure::new(sp.postshocks.clone(), random_weights_q(rng, ni)).unwrap();
    let base: Vec<Q> = (0..horizon * ns * nx).map(|_| q(rng.gen_range(0..10), 10)).collect();
    let slope: Vec<Q> = (0..horizon * ns * nx).map(|_| q(rng.gen_range(-5..5), 10)).collect();
    let low: Vec<usize> = (0..horizon * ns * nx * ni).map(|_| rng.gen_range(0..ns)).collect();
    let high: Vec<usize> = (0..horizon * ns * nx * ni).map(|_| rng.gen_range(0..ns)).collect();
    let payoff = move |t: usize, s: usize, x: usize, env: &Measure<Q>| {
        let k = ((t - 1) * ns + s) * nx + x;
        base[k].clone() + slope[k].clone() * env.weight(0).clone()
    };
    let transition = move |t: usize, s: usize, x: usize, env: &Measure<Q>, i: usize| {
        let k = (((t - 1) * ns + s) * nx + x) * ni + i;
        if *env.weight(0) > q(1, 3) { high[k] } else { low[k] }
    };
    GameSpec::new(horizon, sp, gamma, iota, Arc::new(FnDynamics::new(payoff, transition)), vec![q(1, 1); horizon]).unwrap()
}

pub fn random_policy<R: Rng>(rng: &mut R, ns: usize, ng: usize, nx: usize) -> Policy {
    Policy::new(ns, ng, (0..ns * ng).map(|_| rng.gen_range(0..nx)).collect()).unwrap()
}

/// Every table in `𝓜(S × G, X)`.
pub fn all_policies(ns: usize, ng: usize, nx: usize) -> Vec<Policy> {
    let cells = ns * ng;
    (0..nx.pow(cells as u32))
        .map(|code| {
            let table = (0..cells).map(|c| code / nx.pow(c as u32) % nx).collect();
            Policy::new(ns, ng, table).unwrap()
        })
        .collect()
}

/// Environment-independent stationary game given by tables.
pub fn table_stationary<R: Rng>(rng: &mut R, dims: (usize, usize, usize, usize), alpha: f64) -> StationarySpec<f64> {
    let (ns, nx, ng, ni) = dims;
    let sp = spaces::<f64>(ns, nx, ng, ni);
    let raw = |rng: &mut R, k: usize| {
        let w: Vec<f64> = (0..k).map(|_| rng.gen_range(0.1..1.0)).collect();
        let t: f64 = w.iter().sum();
        w.into_iter().map(|v| v / t).collect::<Vec<_>>()
    };
    let gamma = Measure::new(sp.preshocks.clone(), raw(rng, ng)).unwrap();
    let iota = Measure::new(sp.postshocks.clone(), raw(rng, ni)).unwrap();
    let payoff: Vec<f64> = (0..ns * nx).map(|_| rng.gen_range(0.0..1.0)).collect();
    let transition: Vec<usize> = (0..ns * nx * ni).map(|_| rng.gen_range(0..ns)).collect();
    let dynamics = TableDynamics::new(&sp, vec![payoff], vec![transition]).unwrap();
    StationarySpec::new(sp, gamma, iota, Arc::new(dynamics), 1.0, alpha).unwrap()
}

/// Induced kernel `P[s][s']` and reward `r[s]` of a policy in an
/// environment-independent stationary game.
pub fn induced_chain(spec: &StationarySpec<f64>, policy: &Policy) -> (Vec<Vec<f64>>, Vec<f64>) {
    let ns = spec.spaces.states.len();
    let env = Measure::uniform(spec.spaces.state_action.clone());
    let mut p = vec![vec![0.0; ns]; ns];
    let mut r = vec![0.0; ns];
    for s in 0..ns {
        for (g, wg) in spec.gamma.weights().iter().enumerate() {
            let x = policy.action(s, g);
            r[s] += wg * spec.dynamics.payoff(1, s, x, &env);
            for (i, wi) in spec.iota.weights().iter().enumerate() {
                p[s][spec.dynamics.transition(1, s, x, &env, i)] += wg * wi;
            }
        }
    }
    (p, r)
}

/// Dense Gaussian elimination with partial pivoting.
pub fn solve_linear(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x
}

/// `(I - αP) v = r`.
pub fn discounted_values(p: &[Vec<f64>], r: &[f64], alpha: f64) -> Vec<f64> {
    let n = r.len();
    let a = (0..n)
        .map(|i| (0..n).map(|j| f64::from(u8::from(i == j)) - alpha * p[i][j]).collect())
        .collect();
    solve_linear(a, r.to_vec())
}

/// Stationary law: `π P = π`, `Σ π = 1`, by replacing one balance row.
pub fn stationary_law(p: &[Vec<f64>]) -> Vec<f64> {
    let n = p.len();
    let mut a: Vec<Vec<f64>> = (0..n)
        .map(|j| (0..n).map(|i| p[i][j] - f64::from(u8::from(i == j))).collect())
        .collect();
    a[n - 1] = vec![1.0; n];
    let mut b = vec![0.0; n];
    b[n - 1] = 1.0;
    solve_linear(a, b)
}
