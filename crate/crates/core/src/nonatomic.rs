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
//! Deterministic engine for the nonatomic game.
//!
//! With a continuum of players the pre-action environment evolves
//! deterministically: `μ_t = M(σ_t, x_t)` is the pushforward of `σ_t × γ`
//! under `(s, g) ↦ (s, x_t(s, g))`, and `σ_{t+1} = T_t(x_t) ∘ σ_t` pushes
//! `σ_t × γ × ι` through the transition. Values are computed by backward
//! induction with exact finite sums over `G` and `I`. A single player's
//! deviation never feeds back into the trajectory.

use crate::error::{invalid, Result};
use crate::measure::{same_space, Measure};
use crate::model::{GameSpec, Policy, PolicyProfile, Primitives};
use crate::scalar::Scalar;

/// In-action environment `M(σ, x)` on `S × X`.
pub fn in_action_env<T: Scalar>(prim: Primitives<'_, T>, sigma: &Measure<T>, policy: &Policy) -> Measure<T> {
    let sp = prim.spaces;
    let mut w = vec![T::zero(); sp.state_action.len()];
    for (s, ws) in sigma.support() {
        for (g, wg) in prim.gamma.support() {
            let p = sp.pair(s, policy.action(s, g));
            w[p] = w[p].clone() + ws.clone() * wg.clone();
        }
    }
    Measure::from_raw(sp.state_action.clone(), w)
}

/// `T_t(x) ∘ σ` for the given in-action environment.
pub(crate) fn push_states<T: Scalar>(
    prim: Primitives<'_, T>,
    period: usize,
    sigma: &Measure<T>,
    policy: &Policy,
    env: &Measure<T>,
) -> Result<Measure<T>> {
    let states = &prim.spaces.states;
    let mut w = vec![T::zero(); states.len()];
    for (s, ws) in sigma.support() {
        for (g, wg) in prim.gamma.support() {
            let x = policy.action(s, g);
            let wsg = ws.clone() * wg.clone();
            for (i, wi) in prim.iota.support() {
                let next = prim.dynamics.transition(period, s, x, env, i);
                if next >= states.len() {
                    return invalid(format!("transition returned state {next}, outside S"));
                }
                w[next] = w[next].clone() + wsg.clone() * wi.clone();
            }
        }
    }
    Ok(Measure::from_raw(states.clone(), w))
}

pub(crate) fn check_on_states<T: Scalar>(prim: Primitives<'_, T>, sigma: &Measure<T>, policy: &Policy) -> Result<()> {
    if !same_space(sigma.space(), &prim.spaces.states) {
        return invalid("pre-action environment must live on the state space");
    }
    policy.check(prim.spaces)
}

/// One environment step `σ_{t+1} = T_t(x_t) ∘ σ_t`.
pub fn step_env<T: Scalar>(game: &GameSpec<T>, sigma: &Measure<T>, policy: &Policy, period: usize) -> Result<Measure<T>> {
    if period == 0 || period > game.horizon {
        return invalid(format!("period {period} is outside 1..={}", game.horizon));
    }
    let prim = game.primitives();
    check_on_states(prim, sigma, policy)?;
    let env = in_action_env(prim, sigma, policy);
    push_states(prim, period, sigma, policy, &env)
}

/// Pre-action environments `σ_1, …, σ_{t̄+1}` with the in-action
/// environments `μ_1, …, μ_t̄` that produced them.
#[derive(Debug, Clone)]
pub struct EnvironmentTrajectory<T> {
    sigma: Vec<Measure<T>>,
    mu: Vec<Measure<T>>,
}

impl<T: Scalar> EnvironmentTrajectory<T> {
    /// `σ_t` for `t = 1, …, t̄ + 1`.
    pub fn sigma(&self, t: usize) -> &Measure<T> {
        &self.sigma[t - 1]
    }

    /// `μ_t` for `t = 1, …, t̄`.
    pub fn mu(&self, t: usize) -> &Measure<T> {
        &self.mu[t - 1]
    }

    pub fn len(&self) -> usize {
        self.sigma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sigma.is_empty()
    }

    pub fn sigmas(&self) -> &[Measure<T>] {
        &self.sigma
    }
}

pub fn propagate<T: Scalar>(
    game: &GameSpec<T>,
    initial: &Measure<T>,
    profile: &PolicyProfile,
) -> Result<EnvironmentTrajectory<T>> {
    profile.check(game)?;
    let prim = game.primitives();
    if !same_space(initial.space(), &game.spaces.states) {
        return invalid("initial environment must live on the state space");
    }
    let mut sigma = vec![initial.clone()];
    let mut mu = Vec::with_capacity(game.horizon);
    for t in 1..=game.horizon {
        let x = profile.period(t);
        let env = in_action_env(prim, &sigma[t - 1], x);
        let next = push_states(prim, t, &sigma[t - 1], x, &env)?;
        mu.push(env);
        sigma.push(next);
    }
    Ok(EnvironmentTrajectory { sigma, mu })
}

/// `v(t, s)` for `t = 1, …, t̄ + 1` and `u_t = Σ_s v(t, s) σ_t(s)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueTable<T> {
    v: Vec<Vec<T>>,
    u: Vec<T>,
}

impl<T: Scalar> ValueTable<T> {
    pub fn v(&self, t: usize, state: usize) -> &T {
        &self.v[t - 1][state]
    }

    /// Row `v(t, ·)`.
    pub fn row(&self, t: usize) -> &[T] {
        &self.v[t - 1]
    }

    pub fn u(&self, t: usize) -> &T {
        &self.u[t - 1]
    }

    pub fn horizon(&self) -> usize {
        self.u.len()
    }
}

/// A one-period deviation `y_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct Deviation {
    pub period: usize,
    pub policy: Policy,
}

fn check_trajectory<T: Scalar>(game: &GameSpec<T>, profile: &PolicyProfile, traj: &EnvironmentTrajectory<T>) -> Result<()> {
    if traj.sigma.len() != game.horizon + 1 || traj.mu.len() != game.horizon {
        return invalid("trajectory length does not match the horizon");
    }
    let recomputed = propagate(game, traj.sigma(1), profile)?;
    let tol = T::renormalize_tolerance();
    for t in 1..=game.horizon {
        if !recomputed.sigma(t + 1).approx_eq(traj.sigma(t + 1), &tol) || !recomputed.mu(t).approx_eq(traj.mu(t), &tol) {
            return invalid(format!("trajectory is inconsistent with the profile at period {t}"));
        }
    }
    Ok(())
}

/// Expected period payoff plus continuation, `q(s, x)`, indexed `s·|X| + x`.
pub(crate) fn q_values<T: Scalar>(
    prim: Primitives<'_, T>,
    period: usize,
    env: &Measure<T>,
    next_values: &[T],
    continuation_weight: &T,
) -> Vec<T> {
    let sp = prim.spaces;
    let (ns, nx) = (sp.states.len(), sp.actions.len());
    let mut q = Vec::with_capacity(ns * nx);
    for s in 0..ns {
        for x in 0..nx {
            let mut cont = T::zero();
            for (i, wi) in prim.iota.support() {
                let next = prim.dynamics.transition(period, s, x, env, i);
                cont = cont + wi.clone() * next_values[next].clone();
            }
            q.push(prim.dynamics.payoff(period, s, x, env) + continuation_weight.clone() * cont);
        }
    }
    q
}

/// `Σ_g γ(g) q(s, x(s, g))` for every state.
pub(crate) fn average_over_shocks<T: Scalar>(prim: Primitives<'_, T>, q: &[T], policy: &Policy) -> Vec<T> {
    let nx = prim.spaces.actions.len();
    (0..prim.spaces.states.len())
        .map(|s| {
            prim.gamma.support().fold(T::zero(), |acc, (g, wg)| {
                acc + wg.clone() * q[s * nx + policy.action(s, g)].clone()
            })
        })
        .collect()
}

/// Pointwise argmax over actions; ties go to the smallest action index.
pub(crate) fn greedy_policy<T: Scalar>(prim: Primitives<'_, T>, q: &[T]) -> Policy {
    let (ng, nx) = (prim.spaces.preshocks.len(), prim.spaces.actions.len());
    Policy::from_fn(prim.spaces.states.len(), ng, |s, _g| {
        let row = &q[s * nx..(s + 1) * nx];
        let mut best = 0;
        for x in 1..nx {
            if row[x] > row[best] {
                best = x;
            }
        }
        best
    })
}

fn dot<T: Scalar>(values: &[T], sigma: &Measure<T>) -> T {
    sigma
        .support()
        .fold(T::zero(), |acc, (s, w)| acc + w.clone() * values[s].clone())
}

fn backward<T: Scalar>(
    game: &GameSpec<T>,
    profile: &PolicyProfile,
    traj: &EnvironmentTrajectory<T>,
    deviation: Option<&Deviation>,
) -> ValueTable<T> {
    let prim = game.primitives();
    let ns = game.spaces.states.len();
    let mut v = vec![vec![T::zero(); ns]; game.horizon + 1];
    let one = T::one();
    for t in (1..=game.horizon).rev() {
        let policy = match deviation {
            Some(d) if d.period == t => &d.policy,
            _ => profile.period(t),
        };
        let q = q_values(prim, t, traj.mu(t), &v[t], &one);
        v[t - 1] = average_over_shocks(prim, &q, policy);
    }
    let u = (1..=game.horizon).map(|t| dot(&v[t - 1], traj.sigma(t))).collect();
    ValueTable { v, u }
}

/// Backward induction of `v_t(s, σ_t, x_{[t t̄]}, y_t)` along a trajectory.
///
/// The trajectory must be the one generated by `profile`; the optional
/// deviation replaces the player's own policy in its period only and never
/// touches the trajectory.
pub fn value<T: Scalar>(
    game: &GameSpec<T>,
    profile: &PolicyProfile,
    traj: &EnvironmentTrajectory<T>,
    deviation: Option<&Deviation>,
) -> Result<ValueTable<T>> {
    check_trajectory(game, profile, traj)?;
    if let Some(d) = deviation {
        if d.period == 0 || d.period > game.horizon {
            return invalid(format!("deviation period {} is outside the horizon", d.period));
        }
        d.policy.check(&game.spaces)?;
    }
    Ok(backward(game, profile, traj, deviation))
}

/// Outcome of [`best_deviation`].
#[derive(Debug, Clone, PartialEq)]
pub struct BestDeviation<T> {
    pub policy: Policy,
    /// `u_t(σ_t, x, y*_t) - u_t(σ_t, x, x_t)`.
    pub gain: T,
    /// `max_s [v_t(s, …, y*_t) - v_t(s, …, x_t)]`, the pointwise criterion.
    pub pointwise_regret: T,
}

fn deviation_against<T: Scalar>(
    game: &GameSpec<T>,
    t: usize,
    profile: &PolicyProfile,
    traj: &EnvironmentTrajectory<T>,
    values: &ValueTable<T>,
) -> BestDeviation<T> {
    let prim = game.primitives();
    let q = q_values(prim, t, traj.mu(t), values.row(t + 1), &T::one());
    let best = greedy_policy(prim, &q);
    let with_best = average_over_shocks(prim, &q, &best);
    let with_x = average_over_shocks(prim, &q, profile.period(t));
    let diff: Vec<T> = with_best
        .into_iter()
        .zip(with_x)
        .map(|(a, b)| a - b)
        .collect();
    let pointwise = diff.iter().cloned().fold(T::zero(), T::max_of);
    BestDeviation {
        gain: dot(&diff, traj.sigma(t)),
        pointwise_regret: pointwise,
        policy: best,
    }
}

/// The best period-`t` deviation against the profile's own trajectory.
pub fn best_deviation<T: Scalar>(
    game: &GameSpec<T>,
    t: usize,
    profile: &PolicyProfile,
    traj: &EnvironmentTrajectory<T>,
) -> Result<BestDeviation<T>> {
    if t == 0 || t > game.horizon {
        return invalid(format!("period {t} is outside 1..={}", game.horizon));
    }
    let values = value(game, profile, traj, None)?;
    Ok(deviation_against(game, t, profile, traj, &values))
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumReport<T> {
    /// Averaged deviation gain per period.
    pub gaps: Vec<T>,
    /// Pointwise regret per period (diagnostic).
    pub pointwise: Vec<T>,
    pub max_gap: T,
    pub certified: bool,
}

fn report<T: Scalar>(
    game: &GameSpec<T>,
    profile: &PolicyProfile,
    traj: &EnvironmentTrajectory<T>,
    tol: &T,
) -> EquilibriumReport<T> {
    let values = backward(game, profile, traj, None);
    let (mut gaps, mut pointwise) = (Vec::new(), Vec::new());
    for t in 1..=game.horizon {
        let d = deviation_against(game, t, profile, traj, &values);
        gaps.push(d.gain);
        pointwise.push(d.pointwise_regret);
    }
    let max_gap = gaps.iter().cloned().fold(T::zero(), T::max_of);
    EquilibriumReport {
        certified: max_gap <= *tol,
        gaps,
        pointwise,
        max_gap,
    }
}

/// Per-period averaged gaps along the profile's own trajectory from `σ_1`.
pub fn check_equilibrium<T: Scalar>(
    game: &GameSpec<T>,
    profile: &PolicyProfile,
    initial: &Measure<T>,
    tol: &T,
) -> Result<EquilibriumReport<T>> {
    let traj = propagate(game, initial, profile)?;
    Ok(report(game, profile, &traj, tol))
}

/// Dynamic-programming best response to a fixed trajectory.
pub fn best_response_profile<T: Scalar>(game: &GameSpec<T>, traj: &EnvironmentTrajectory<T>) -> PolicyProfile {
    let prim = game.primitives();
    let ns = game.spaces.states.len();
    let mut next = vec![T::zero(); ns];
    let mut periods = Vec::with_capacity(game.horizon);
    for t in (1..=game.horizon).rev() {
        let q = q_values(prim, t, traj.mu(t), &next, &T::one());
        let policy = greedy_policy(prim, &q);
        next = average_over_shocks(prim, &q, &policy);
        periods.push(policy);
    }
    periods.reverse();
    PolicyProfile::new(periods)
}

#[derive(Debug, Clone)]
pub struct SolveOptions<T> {
    pub max_iter: usize,
    pub tol: T,
    /// Accept a sweep only if it lowers the largest gap; otherwise fall back
    /// to single-period updates in a rotating order.
    pub damping: bool,
    pub initial: Option<PolicyProfile>,
}

impl<T: Scalar> Default for SolveOptions<T> {
    fn default() -> Self {
        Self {
            max_iter: 200,
            tol: T::from_f64(1e-9).unwrap_or_else(T::zero),
            damping: true,
            initial: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct NgSolution<T> {
    pub profile: PolicyProfile,
    pub trajectory: EnvironmentTrajectory<T>,
    pub report: EquilibriumReport<T>,
    /// Best-response sweeps performed.
    pub iterations: usize,
    pub converged: bool,
}

/// Iterated best response from `σ_1`.
///
/// Each sweep propagates the current profile and replaces it with the
/// dynamic-programming best response to that trajectory. Non-convergence is
/// reported through `converged`, never hidden.
pub fn solve_equilibrium<T: Scalar>(
    game: &GameSpec<T>,
    initial: &Measure<T>,
    opts: &SolveOptions<T>,
) -> Result<NgSolution<T>> {
    let ns = game.spaces.states.len();
    let ng = game.spaces.preshocks.len();
    let mut profile = match &opts.initial {
        Some(p) => p.clone(),
        None => PolicyProfile::repeated(Policy::constant(ns, ng, 0), game.horizon),
    };
    let mut traj = propagate(game, initial, &profile)?;
    let mut rep = report(game, &profile, &traj, &opts.tol);
    let mut iterations = 0;
    while !rep.certified && iterations < opts.max_iter {
        iterations += 1;
        let candidate = best_response_profile(game, &traj);
        let cand_traj = propagate(game, initial, &candidate)?;
        let cand_rep = report(game, &candidate, &cand_traj, &opts.tol);
        if !opts.damping || cand_rep.max_gap < rep.max_gap {
            (profile, traj, rep) = (candidate, cand_traj, cand_rep);
            continue;
        }
        let mut accepted = false;
        let values = backward(game, &profile, &traj, None);
        for k in 0..game.horizon {
            let t = (iterations + k) % game.horizon + 1;
            let d = deviation_against(game, t, &profile, &traj, &values);
            if d.policy == *profile.period(t) {
                continue;
            }
            let candidate = profile.with_period(t, d.policy);
            let cand_traj = propagate(game, initial, &candidate)?;
            let cand_rep = report(game, &candidate, &cand_traj, &opts.tol);
            if cand_rep.max_gap < rep.max_gap {
                (profile, traj, rep) = (candidate, cand_traj, cand_rep);
                accepted = true;
                break;
            }
        }
        if !accepted {
            break;
        }
    }
    Ok(NgSolution {
        converged: rep.certified,
        profile,
        trajectory: traj,
        report: rep,
        iterations,
    })
}
