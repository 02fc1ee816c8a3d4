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
//! Infinite-horizon stationary engine.
//!
//! With time-invariant primitives an environment `σ` is associated with a
//! policy `x` when `σ = T(x) ∘ σ`. Values are discounted sums computed by
//! value iteration whose stopping rule is the telescoped Cauchy bound
//! `α^t ψ̄ / (1 - α) < tol`, so every reported value carries an exact
//! error certificate.

use crate::error::{invalid, Result};
use crate::finite::{regret_gap, GapEstimate, InitialLaw};
use crate::measure::{same_space, Measure};
use crate::model::{Policy, PolicyProfile, StationarySpec};
use crate::nonatomic::{average_over_shocks, check_on_states, greedy_policy, in_action_env, push_states, q_values};
use crate::scalar::Scalar;

/// `T(x) ∘ σ`.
pub fn step_env_stationary<T: Scalar>(spec: &StationarySpec<T>, sigma: &Measure<T>, policy: &Policy) -> Result<Measure<T>> {
    let prim = spec.primitives();
    check_on_states(prim, sigma, policy)?;
    let env = in_action_env(prim, sigma, policy);
    push_states(prim, 1, sigma, policy, &env)
}

#[derive(Debug, Clone)]
pub struct InvariantEnv<T> {
    pub sigma: Measure<T>,
    /// `ρ_S(σ, T(x) ∘ σ)` at the returned `σ`.
    pub residual: T,
    pub iterations: usize,
    pub converged: bool,
}

/// Fixed-point iteration `σ ← T(x) ∘ σ` until the Prohorov change drops
/// below `tol`. Exhausting `max_iter` is reported, not raised.
pub fn invariant_env<T: Scalar>(
    spec: &StationarySpec<T>,
    policy: &Policy,
    initial: &Measure<T>,
    tol: &T,
    max_iter: usize,
) -> Result<InvariantEnv<T>> {
    iterate_env(spec, policy, initial, tol, max_iter, 0)
}

/// Like [`invariant_env`] but steps `σ ← (σ + T(x) ∘ σ) / 2`. The fixed
/// points are the same, and periodic chains no longer oscillate.
pub fn invariant_env_damped<T: Scalar>(
    spec: &StationarySpec<T>,
    policy: &Policy,
    initial: &Measure<T>,
    tol: &T,
    max_iter: usize,
) -> Result<InvariantEnv<T>> {
    iterate_env(spec, policy, initial, tol, max_iter, 1)
}

/// `(1 - 2^{-k}) a + 2^{-k} b`.
fn relax<T: Scalar>(a: &Measure<T>, b: &Measure<T>, k: u32) -> Measure<T> {
    let step = T::one() / T::from_count(1usize << k);
    let keep = T::one() - step.clone();
    let w = a
        .weights()
        .iter()
        .zip(b.weights())
        .map(|(x, y)| keep.clone() * x.clone() + step.clone() * y.clone())
        .collect();
    Measure::from_raw(a.space().clone(), w)
}

fn iterate_env<T: Scalar>(
    spec: &StationarySpec<T>,
    policy: &Policy,
    initial: &Measure<T>,
    tol: &T,
    max_iter: usize,
    damping: u32,
) -> Result<InvariantEnv<T>> {
    if !same_space(initial.space(), &spec.spaces.states) {
        return invalid("initial guess must live on the state space");
    }
    let mut sigma = initial.clone();
    let mut next = step_env_stationary(spec, &sigma, policy)?;
    let mut residual = sigma.prohorov(&next)?;
    let mut iterations = 0;
    let mut window_best = residual.clone();
    let mut last_window = None;
    while residual >= *tol && iterations < max_iter {
        iterations += 1;
        if iterations % STALL_WINDOW == 0 {
            if let Some(last) = last_window.replace(window_best.clone()) {
                if window_best.clone() >= last * T::from_f64(STALL_FACTOR).expect("representable") {
                    break;
                }
            }
        }
        sigma = if damping == 0 { next } else { relax(&sigma, &next, damping) };
        next = step_env_stationary(spec, &sigma, policy)?;
        residual = sigma.prohorov(&next)?;
        window_best = window_best.min_of(residual.clone());
    }
    Ok(InvariantEnv {
        converged: residual < *tol,
        sigma,
        residual,
        iterations,
    })
}

/// Iterations stop early once the best residual so far has not dropped
/// below `STALL_FACTOR` times its value `STALL_WINDOW` steps earlier.
const STALL_WINDOW: usize = 1000;
const STALL_FACTOR: f64 = 0.999;

/// Finest relaxation tried by [`invariant_env_restarts`]: step `2^{-4}`.
pub const RELAXATION_LEVELS: u32 = 4;

/// Runs [`invariant_env`] from each guess in turn, then relaxed iterations
/// `σ ← (1 - β) σ + β T(x) ∘ σ` with `β = 1/2, 1/4, …`,
/// and returns the first converged result, or the one with the smallest
/// residual. Relaxation keeps the fixed points and damps oscillation.
pub fn invariant_env_restarts<T: Scalar>(
    spec: &StationarySpec<T>,
    policy: &Policy,
    guesses: &[Measure<T>],
    tol: &T,
    max_iter: usize,
) -> Result<InvariantEnv<T>> {
    let mut best: Option<InvariantEnv<T>> = None;
    for damping in 0..=RELAXATION_LEVELS {
        for guess in guesses {
            let found = iterate_env(spec, policy, guess, tol, max_iter, damping)?;
            if found.converged {
                return Ok(found);
            }
            if best.as_ref().is_none_or(|b| found.residual < b.residual) {
                best = Some(found);
            }
        }
    }
    best.ok_or_else(|| crate::Error::InvalidInput("no initial guesses supplied".into()))
}

/// Approximate `v_∞(·, σ, x, y)` with its certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscountedValue<T> {
    pub values: Vec<T>,
    /// Value-iteration sweeps.
    pub iterations: usize,
    /// `α^t ψ̄ / (1 - α)`, a bound on `|v_∞ - values|`.
    pub error_bound: T,
    /// Successive sup-norm differences `‖v_{k+1} - v_k‖`, `k = 0, 1, …`.
    pub cauchy_trace: Vec<T>,
}

fn sup_diff<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .fold(T::zero(), |m, (x, y)| m.max_of((x.clone() - y.clone()).abs_val()))
}

fn sweep<T: Scalar>(spec: &StationarySpec<T>, env: &Measure<T>, policy: &Policy, next: &[T]) -> Vec<T> {
    let prim = spec.primitives();
    let q = q_values(prim, 1, env, next, &spec.alpha);
    average_over_shocks(prim, &q, policy)
}

/// `t` sweeps of the no-deviation recursion from `v_0 = 0`; returns every iterate.
pub fn value_iterates<T: Scalar>(spec: &StationarySpec<T>, sigma: &Measure<T>, policy: &Policy, sweeps: usize) -> Result<Vec<Vec<T>>> {
    let prim = spec.primitives();
    check_on_states(prim, sigma, policy)?;
    let env = in_action_env(prim, sigma, policy);
    let mut out = vec![vec![T::zero(); spec.spaces.states.len()]];
    for _ in 0..sweeps {
        let v = sweep(spec, &env, policy, out.last().expect("nonempty"));
        out.push(v);
    }
    Ok(out)
}

/// `v_∞(s, σ, x, y)`: the player follows `y` in the first period (if
/// given) and `x` afterwards, while the environment stays at `σ`.
///
/// Iterates until `α^t ψ̄ / (1 - α) < tol`; `σ` should be associated with `x`.
pub fn value_infty<T: Scalar>(
    spec: &StationarySpec<T>,
    sigma: &Measure<T>,
    policy: &Policy,
    deviation: Option<&Policy>,
    tol: &T,
) -> Result<DiscountedValue<T>> {
    if *tol <= T::zero() {
        return invalid("tolerance must be positive");
    }
    if let Some(y) = deviation {
        y.check(&spec.spaces)?;
    }
    let prim = spec.primitives();
    check_on_states(prim, sigma, policy)?;
    let env = in_action_env(prim, sigma, policy);
    let one_minus = T::one() - spec.alpha.clone();
    let bound = |t: usize| spec.alpha.powi_count(t) * spec.payoff_bound.clone() / one_minus.clone();
    let mut sweeps = 1;
    while bound(sweeps) >= *tol {
        sweeps += 1;
    }
    let mut prev = vec![T::zero(); spec.spaces.states.len()];
    let mut trace = Vec::with_capacity(sweeps);
    for k in 1..=sweeps {
        let now = match deviation {
            Some(y) if k == sweeps => y,
            _ => policy,
        };
        let v = sweep(spec, &env, now, &prev);
        trace.push(sup_diff(&v, &prev));
        prev = v;
    }
    Ok(DiscountedValue {
        values: prev,
        iterations: sweeps,
        error_bound: bound(sweeps),
        cauchy_trace: trace,
    })
}

/// Outcome of the stationary equilibrium check.
#[derive(Debug, Clone, PartialEq)]
pub struct SeReport<T> {
    /// `σ`-weighted improvement of the best one-shot deviation.
    pub gap: T,
    /// Largest per-state improvement (diagnostic).
    pub pointwise: T,
    pub best_response: Policy,
    pub values: DiscountedValue<T>,
    pub certified: bool,
}

/// One-shot deviation check of `(x, σ)` against `v_∞(·, σ, x, x)`.
pub fn check_se<T: Scalar>(spec: &StationarySpec<T>, policy: &Policy, sigma: &Measure<T>, tol: &T) -> Result<SeReport<T>> {
    let values = value_infty(spec, sigma, policy, None, &value_tolerance(tol))?;
    let prim = spec.primitives();
    let env = in_action_env(prim, sigma, policy);
    let q = q_values(prim, 1, &env, &values.values, &spec.alpha);
    let best = greedy_policy(prim, &q);
    let with_best = average_over_shocks(prim, &q, &best);
    let with_x = average_over_shocks(prim, &q, policy);
    let diff: Vec<T> = with_best.into_iter().zip(with_x).map(|(a, b)| a - b).collect();
    let gap = sigma
        .support()
        .fold(T::zero(), |acc, (s, w)| acc + w.clone() * diff[s].clone());
    let pointwise = diff.into_iter().fold(T::zero(), T::max_of);
    Ok(SeReport {
        certified: gap <= *tol,
        gap,
        pointwise,
        best_response: best,
        values,
    })
}

/// Value accuracy used inside equilibrium checks: a tenth of the gap tolerance.
fn value_tolerance<T: Scalar>(tol: &T) -> T {
    tol.clone() / T::from_count(10)
}

#[derive(Debug, Clone)]
pub struct SeOptions<T> {
    /// Bound on residual plus gap.
    pub tol: T,
    pub max_iter: usize,
    pub env_max_iter: usize,
    pub initial: Option<Policy>,
}

impl<T: Scalar> Default for SeOptions<T> {
    fn default() -> Self {
        Self {
            tol: T::from_f64(1e-9).unwrap_or_else(T::zero),
            max_iter: 100,
            env_max_iter: 100_000,
            initial: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct StationarySolution<T> {
    pub policy: Policy,
    pub sigma_star: Measure<T>,
    pub residual: T,
    pub value: Vec<T>,
    pub gap: T,
    pub iterations: usize,
    pub converged: bool,
}

/// Alternates the invariant environment of the current policy with a
/// one-shot best response until residual plus gap is within tolerance.
///
/// A revisited policy means best response cycles; the solver stops and
/// reports non-convergence.
pub fn solve_se<T: Scalar>(spec: &StationarySpec<T>, opts: &SeOptions<T>) -> Result<StationarySolution<T>> {
    let sp = &spec.spaces;
    let mut policy = opts
        .initial
        .clone()
        .unwrap_or_else(|| Policy::constant(sp.states.len(), sp.preshocks.len(), 0));
    policy.check(sp)?;
    let env_tol = opts.tol.clone() / T::from_count(4);
    let mut guesses = vec![Measure::uniform(sp.states.clone())];
    guesses.extend((0..sp.states.len()).map(|s| Measure::dirac(sp.states.clone(), s).expect("valid point")));
    let mut seen = vec![policy.clone()];
    let mut iterations = 0;
    loop {
        iterations += 1;
        let inv = invariant_env_restarts(spec, &policy, &guesses, &env_tol, opts.env_max_iter)?;
        let report = check_se(spec, &policy, &inv.sigma, &(opts.tol.clone() / T::from_count(2)))?;
        let total = inv.residual.clone() + report.gap.clone();
        let done = total <= opts.tol && inv.converged;
        let solution = StationarySolution {
            policy: policy.clone(),
            residual: inv.residual.clone(),
            value: report.values.values.clone(),
            gap: report.gap.clone(),
            sigma_star: inv.sigma.clone(),
            iterations,
            converged: done,
        };
        if done || iterations >= opts.max_iter || seen.contains(&report.best_response) {
            return Ok(solution);
        }
        policy = report.best_response;
        seen.push(policy.clone());
        guesses[0] = inv.sigma;
    }
}

/// Smallest horizon `t >= ln(6ψ̄ / (ε(1 - α))) / ln(1/α) + 1`.
pub fn truncation_depth(alpha: f64, payoff_bound: f64, epsilon: f64) -> Result<usize> {
    if !(0.0..1.0).contains(&alpha) || payoff_bound <= 0.0 || epsilon <= 0.0 {
        return invalid("truncation depth needs α in [0, 1), ψ̄ > 0 and ε > 0");
    }
    if alpha == 0.0 {
        return Ok(1);
    }
    let raw = (6.0 * payoff_bound / (epsilon * (1.0 - alpha))).ln() / (1.0 / alpha).ln() + 1.0;
    Ok(raw.ceil().max(1.0) as usize)
}

/// One row of the finite-n stationary regret table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationaryGap {
    pub seed: u64,
    pub depth: usize,
    pub estimate: GapEstimate,
}

/// Finite-n one-shot deviation gaps for a stationary equilibrium.
///
/// The horizon is truncated at [`truncation_depth`] for `ε_target`; initial
/// states are i.i.d. `σ*` and player 0 deviates to `challenger` in the first
/// period only.
#[allow(clippy::too_many_arguments)]
pub fn stationary_regret_experiment<T: Scalar>(
    spec: &StationarySpec<T>,
    policy: &Policy,
    sigma_star: &Measure<T>,
    challenger: &Policy,
    ns: &[usize],
    replications: usize,
    epsilon_target: f64,
    seeds: &[u64],
) -> Result<Vec<StationaryGap>> {
    let depth = truncation_depth(
        spec.alpha.to_f64_lossy(),
        spec.payoff_bound.to_f64_lossy(),
        epsilon_target,
    )?;
    let game = spec.lift(depth)?;
    let profile = PolicyProfile::repeated(policy.clone(), depth);
    let law = InitialLaw::Iid(sigma_star.clone());
    let mut rows = Vec::new();
    for &n in ns {
        for &seed in seeds {
            let estimate = regret_gap(&game, &profile, &law, n, 1, challenger, replications, seed)?;
            rows.push(StationaryGap { seed, depth, estimate });
        }
    }
    Ok(rows)
}
