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
//! Stochastic engine for the n-player game.
//!
//! Player `m` moves against `M_n`, the empirical law of the other `n - 1`
//! players' state-action pairs; its own pair is always excluded. Values are
//! estimated by Monte Carlo over independent, seeded replications. Player 0
//! is the designated deviator.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::measure::{same_space, FiniteSpace, Measure, Sampler};
use crate::model::{GameSpec, Policy, PolicyProfile, Primitives};
use crate::nonatomic::{in_action_env, push_states};
use crate::scalar::Scalar;

/// Generator for replication `stream` under `seed`. Streams are independent,
/// so results do not depend on how replications are scheduled.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Player states `s_t = (s_{t1}, …, s_{tn})`, `n >= 2`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PopulationState {
    states: Vec<usize>,
}

impl PopulationState {
    pub fn new<T: Scalar>(states: Vec<usize>, space: &FiniteSpace<T>) -> Result<Self> {
        if states.len() < 2 {
            return invalid(format!("a population needs at least two players, got {}", states.len()));
        }
        if let Some(s) = states.iter().find(|&&s| s >= space.len()) {
            return invalid(format!("player state {s} is outside S"));
        }
        Ok(Self { states })
    }

    /// `n` i.i.d. draws from `σ`.
    pub fn sample<T: Scalar, R: rand::Rng + ?Sized>(sigma: &Measure<T>, n: usize, rng: &mut R) -> Result<Self> {
        Self::new(sigma.sample(rng, n), sigma.space())
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[usize] {
        &self.states
    }

    /// `ε(s_t)` on `S`.
    pub fn empirical<T: Scalar>(&self, space: Arc<FiniteSpace<T>>) -> Measure<T> {
        let mut counts = vec![0; space.len()];
        for &s in &self.states {
            counts[s] += 1;
        }
        Measure::from_counts(space, &counts, self.states.len())
    }
}

/// `M_n(s_{-m}, g_{-m}, x)` from the other players' states and pre-action shocks.
pub fn in_action_env_n<T: Scalar>(
    prim: Primitives<'_, T>,
    others_states: &[usize],
    others_preshocks: &[usize],
    policy: &Policy,
) -> Result<Measure<T>> {
    if others_states.is_empty() {
        return invalid("the exclusion list is empty");
    }
    if others_states.len() != others_preshocks.len() {
        return invalid("state and shock vectors differ in length");
    }
    let sp = prim.spaces;
    let mut counts = vec![0; sp.state_action.len()];
    for (&s, &g) in others_states.iter().zip(others_preshocks) {
        counts[sp.pair(s, policy.action(s, g))] += 1;
    }
    Ok(Measure::from_counts(sp.state_action.clone(), &counts, others_states.len()))
}

/// Builds every player's exclusive environment from one pair-count table.
/// Players sharing a state-action pair share the same environment.
struct EnvTable<T> {
    counts: Vec<usize>,
    cache: Vec<Option<Measure<T>>>,
    space: Arc<FiniteSpace<T>>,
    n: usize,
}

impl<T: Scalar> EnvTable<T> {
    fn new(space: Arc<FiniteSpace<T>>, pairs: &[usize]) -> Self {
        let mut counts = vec![0; space.len()];
        for &p in pairs {
            counts[p] += 1;
        }
        Self {
            cache: vec![None; space.len()],
            counts,
            space,
            n: pairs.len(),
        }
    }

    fn excluding(&mut self, own: usize) -> &Measure<T> {
        if self.cache[own].is_none() {
            let mut c = self.counts.clone();
            c[own] -= 1;
            self.cache[own] = Some(Measure::from_counts(self.space.clone(), &c, self.n - 1));
        }
        self.cache[own].as_ref().expect("filled above")
    }
}

/// Advances every player one period; returns the next states and the
/// realized per-player payoffs. `deviation` replaces player 0's policy.
fn advance<T: Scalar>(
    prim: Primitives<'_, T>,
    period: usize,
    states: &[usize],
    policy: &Policy,
    deviation: Option<&Policy>,
    preshocks: &[usize],
    postshocks: &[usize],
) -> (Vec<usize>, Vec<T>) {
    let sp = prim.spaces;
    let actions: Vec<usize> = states
        .iter()
        .zip(preshocks)
        .enumerate()
        .map(|(m, (&s, &g))| match deviation {
            Some(y) if m == 0 => y.action(s, g),
            _ => policy.action(s, g),
        })
        .collect();
    let pairs: Vec<usize> = states.iter().zip(&actions).map(|(&s, &x)| sp.pair(s, x)).collect();
    let mut envs = EnvTable::new(sp.state_action.clone(), &pairs);
    let mut next = Vec::with_capacity(states.len());
    let mut payoffs = Vec::with_capacity(states.len());
    for m in 0..states.len() {
        let env = envs.excluding(pairs[m]);
        payoffs.push(prim.dynamics.payoff(period, states[m], actions[m], env));
        next.push(prim.dynamics.transition(period, states[m], actions[m], env, postshocks[m]));
    }
    (next, payoffs)
}

/// `s_{t+1} = T_{nt}(x_t, g_t, i_t) ∘ s_t` for explicit shock draws.
pub fn step_n<T: Scalar>(
    game: &GameSpec<T>,
    population: &PopulationState,
    policy: &Policy,
    preshocks: &[usize],
    postshocks: &[usize],
    period: usize,
) -> Result<PopulationState> {
    let n = population.len();
    if preshocks.len() != n || postshocks.len() != n {
        return invalid(format!("shock vectors must have length {n}"));
    }
    if period == 0 || period > game.horizon {
        return invalid(format!("period {period} is outside 1..={}", game.horizon));
    }
    policy.check(&game.spaces)?;
    if preshocks.iter().any(|&g| g >= game.spaces.preshocks.len())
        || postshocks.iter().any(|&i| i >= game.spaces.postshocks.len())
    {
        return invalid("shock index outside its space");
    }
    let (next, _) = advance(game.primitives(), period, population.states(), policy, None, preshocks, postshocks);
    PopulationState::new(next, &game.spaces.states)
}

/// Samplers for `γ` and `ι`, drawn in a fixed order: all pre-action
/// shocks for the period, then all post-action shocks.
struct ShockSource {
    gamma: Sampler,
    iota: Sampler,
}

impl ShockSource {
    fn new<T: Scalar>(game: &GameSpec<T>) -> Self {
        Self {
            gamma: game.gamma.sampler(),
            iota: game.iota.sampler(),
        }
    }

    fn draw(&self, rng: &mut ChaCha8Rng, n: usize) -> (Vec<usize>, Vec<usize>) {
        let g = (0..n).map(|_| self.gamma.draw(rng)).collect();
        let i = (0..n).map(|_| self.iota.draw(rng)).collect();
        (g, i)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeriodRecord<T> {
    pub states: Vec<usize>,
    pub preshocks: Vec<usize>,
    pub postshocks: Vec<usize>,
    pub payoffs: Vec<T>,
}

/// A replayable n-player history; identical seeds give identical records.
#[derive(Debug, Clone, PartialEq)]
pub struct RolloutRecord<T> {
    pub seed: u64,
    pub stream: u64,
    pub periods: Vec<PeriodRecord<T>>,
    pub terminal: Vec<usize>,
}

impl<T: Scalar> RolloutRecord<T> {
    /// Each player's realized total payoff.
    pub fn totals(&self) -> Vec<T> {
        let n = self.terminal.len();
        let mut out = vec![T::zero(); n];
        for p in &self.periods {
            for (acc, v) in out.iter_mut().zip(&p.payoffs) {
                *acc = acc.clone() + v.clone();
            }
        }
        out
    }

    /// Population states at period `t`, `t = 1, …, t̄ + 1`.
    pub fn states(&self, t: usize) -> &[usize] {
        if t <= self.periods.len() {
            &self.periods[t - 1].states
        } else {
            &self.terminal
        }
    }
}

/// Simulates periods `1..=t̄` under a common profile.
pub fn rollout<T: Scalar>(
    game: &GameSpec<T>,
    initial: &PopulationState,
    profile: &PolicyProfile,
    seed: u64,
    stream: u64,
) -> Result<RolloutRecord<T>> {
    profile.check(game)?;
    if initial.states().iter().any(|&s| s >= game.spaces.states.len()) {
        return invalid("initial population has a state outside S");
    }
    let prim = game.primitives();
    let shocks = ShockSource::new(game);
    let mut rng = stream_rng(seed, stream);
    let mut states = initial.states().to_vec();
    let mut periods = Vec::with_capacity(game.horizon);
    for t in 1..=game.horizon {
        let (g, i) = shocks.draw(&mut rng, states.len());
        let (next, payoffs) = advance(prim, t, &states, profile.period(t), None, &g, &i);
        periods.push(PeriodRecord {
            states: std::mem::replace(&mut states, next),
            preshocks: g,
            postshocks: i,
            payoffs,
        });
    }
    Ok(RolloutRecord {
        seed,
        stream,
        periods,
        terminal: states,
    })
}

/// Monte-Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
    pub replications: usize,
}

impl Estimate {
    pub fn from_samples(samples: &[f64]) -> Self {
        let r = samples.len();
        let mean = samples.iter().sum::<f64>() / r as f64;
        let var = if r > 1 {
            samples.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (r - 1) as f64
        } else {
            0.0
        };
        Self {
            mean,
            std_error: (var / r as f64).sqrt(),
            replications: r,
        }
    }

    /// Normal-approximation 95% interval.
    pub fn ci95(&self) -> (f64, f64) {
        let h = 1.96 * self.std_error;
        (self.mean - h, self.mean + h)
    }
}

/// Player 0's total payoff over periods `t..=t̄` from `states`, with an
/// optional period-`t` deviation. Shocks must cover those periods.
fn play_from<T: Scalar>(
    prim: Primitives<'_, T>,
    horizon: usize,
    t: usize,
    states: &[usize],
    profile: &PolicyProfile,
    deviation: Option<&Policy>,
    shocks: &[(Vec<usize>, Vec<usize>)],
) -> T {
    let mut states = states.to_vec();
    let mut total = T::zero();
    for (k, period) in (t..=horizon).enumerate() {
        let dev = if period == t { deviation } else { None };
        let (g, i) = &shocks[k];
        let (next, payoffs) = advance(prim, period, &states, profile.period(period), dev, g, i);
        total = total + payoffs[0].clone();
        states = next;
    }
    total
}

fn check_period<T: Scalar>(game: &GameSpec<T>, t: usize) -> Result<()> {
    if t == 0 || t > game.horizon {
        return invalid(format!("period {t} is outside 1..={}", game.horizon));
    }
    Ok(())
}

/// Estimate of `v_{nt}(s_{t1}, ε(s_{t,-1}), x_{[t t̄]}, y_t)` from `R` replications.
pub fn value_n_estimate<T: Scalar>(
    game: &GameSpec<T>,
    t: usize,
    population: &PopulationState,
    profile: &PolicyProfile,
    deviation: Option<&Policy>,
    replications: usize,
    seed: u64,
) -> Result<Estimate> {
    if replications < 2 {
        return invalid("at least two replications are required");
    }
    check_period(game, t)?;
    profile.check(game)?;
    if let Some(y) = deviation {
        y.check(&game.spaces)?;
    }
    let prim = game.primitives();
    let source = ShockSource::new(game);
    let n = population.len();
    let samples: Vec<f64> = (0..replications as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream_rng(seed, r);
            let shocks: Vec<_> = (t..=game.horizon).map(|_| source.draw(&mut rng, n)).collect();
            play_from(prim, game.horizon, t, population.states(), profile, deviation, &shocks).to_f64_lossy()
        })
        .collect();
    Ok(Estimate::from_samples(&samples))
}

/// How the period-`t` population is generated.
#[derive(Debug, Clone)]
pub enum InitialLaw<T> {
    /// States at period `t` drawn i.i.d. from `σ_t`.
    Iid(Measure<T>),
    /// States drawn i.i.d. from `σ_1` and rolled forward under the profile,
    /// keeping whatever correlation the dynamics create.
    Rolled(Measure<T>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapEstimate {
    pub n: usize,
    pub period: usize,
    pub gap: Estimate,
    /// Replications in which the challenger and the profile chose different
    /// actions for player 0; all others contribute an exact zero.
    pub active: usize,
}

fn draw_population<T: Scalar>(
    game: &GameSpec<T>,
    law: &InitialLaw<T>,
    n: usize,
    t: usize,
    profile: &PolicyProfile,
    source: &ShockSource,
    rng: &mut ChaCha8Rng,
) -> Vec<usize> {
    match law {
        InitialLaw::Iid(sigma) => sigma.sample(rng, n),
        InitialLaw::Rolled(sigma) => {
            let mut states = sigma.sample(rng, n);
            for period in 1..t {
                let (g, i) = source.draw(rng, n);
                states = advance(game.primitives(), period, &states, profile.period(period), None, &g, &i).0;
            }
            states
        }
    }
}

/// CRN estimate of `E[v_{nt}(…, y_t)] - E[v_{nt}(…, x_t)]` for player 0.
///
/// Both arms see the same population and shocks. When the challenger agrees
/// with the profile at player 0's realized `(s, g)` the arms coincide and the
/// difference is exactly zero, so those replications skip the rollout.
#[allow(clippy::too_many_arguments)]
pub fn regret_gap<T: Scalar>(
    game: &GameSpec<T>,
    profile: &PolicyProfile,
    law: &InitialLaw<T>,
    n: usize,
    t: usize,
    challenger: &Policy,
    replications: usize,
    seed: u64,
) -> Result<GapEstimate> {
    if n < 2 {
        return invalid(format!("n must be at least 2, got {n}"));
    }
    if replications < 2 {
        return invalid("at least two replications are required");
    }
    check_period(game, t)?;
    profile.check(game)?;
    challenger.check(&game.spaces)?;
    let sigma = match law {
        InitialLaw::Iid(s) | InitialLaw::Rolled(s) => s,
    };
    if !same_space(sigma.space(), &game.spaces.states) {
        return invalid("initial law must live on the state space");
    }
    let prim = game.primitives();
    let source = ShockSource::new(game);
    let base = profile.period(t);
    let results: Vec<Option<f64>> = (0..replications as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream_rng(seed, r);
            let states = draw_population(game, law, n, t, profile, &source, &mut rng);
            let shocks: Vec<_> = (t..=game.horizon).map(|_| source.draw(&mut rng, n)).collect();
            let (s0, g0) = (states[0], shocks[0].0[0]);
            if challenger.action(s0, g0) == base.action(s0, g0) {
                return None;
            }
            let dev = play_from(prim, game.horizon, t, &states, profile, Some(challenger), &shocks);
            let stay = play_from(prim, game.horizon, t, &states, profile, None, &shocks);
            Some((dev - stay).to_f64_lossy())
        })
        .collect();
    let active = results.iter().filter(|d| d.is_some()).count();
    let samples: Vec<f64> = results.into_iter().map(|d| d.unwrap_or(0.0)).collect();
    Ok(GapEstimate {
        n,
        period: t,
        gap: Estimate::from_samples(&samples),
        active,
    })
}

/// Per-cell finite-n challenger: for each own `(s, g)`, the action with the
/// best CRN-estimated continuation from `pilot` replications. Its gap must be
/// estimated on fresh streams to stay unbiased.
#[allow(clippy::too_many_arguments)]
pub fn refine_challenger<T: Scalar>(
    game: &GameSpec<T>,
    profile: &PolicyProfile,
    law: &InitialLaw<T>,
    n: usize,
    t: usize,
    pilot: usize,
    seed: u64,
) -> Result<Policy> {
    if n < 2 || pilot < 2 {
        return invalid("refinement needs n >= 2 and at least two pilot replications");
    }
    check_period(game, t)?;
    profile.check(game)?;
    let prim = game.primitives();
    let source = ShockSource::new(game);
    let sp = &game.spaces;
    let (ns, ng, nx) = (sp.states.len(), sp.preshocks.len(), sp.actions.len());
    let base = profile.period(t);
    // sums[(s*ng+g)*nx+x], counts[s*ng+g]
    let per_rep: Vec<(usize, Vec<f64>)> = (0..pilot as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream_rng(seed, r);
            let states = draw_population(game, law, n, t, profile, &source, &mut rng);
            let shocks: Vec<_> = (t..=game.horizon).map(|_| source.draw(&mut rng, n)).collect();
            let (s0, g0) = (states[0], shocks[0].0[0]);
            let stay = play_from(prim, game.horizon, t, &states, profile, None, &shocks).to_f64_lossy();
            let diffs = (0..nx)
                .map(|x| {
                    if x == base.action(s0, g0) {
                        return 0.0;
                    }
                    let mut y = base.clone();
                    y.set(s0, g0, x);
                    play_from(prim, game.horizon, t, &states, profile, Some(&y), &shocks).to_f64_lossy() - stay
                })
                .collect();
            (s0 * ng + g0, diffs)
        })
        .collect();
    let mut sums = vec![0.0; ns * ng * nx];
    let mut counts = vec![0usize; ns * ng];
    for (cell, diffs) in per_rep {
        counts[cell] += 1;
        for (x, d) in diffs.into_iter().enumerate() {
            sums[cell * nx + x] += d;
        }
    }
    let mut y = base.clone();
    for cell in 0..ns * ng {
        if counts[cell] == 0 {
            continue;
        }
        let row = &sums[cell * nx..(cell + 1) * nx];
        let mut best = base.action(cell / ng, cell % ng);
        for x in 0..nx {
            if row[x] > row[best] {
                best = x;
            }
        }
        y.set(cell / ng, cell % ng, best);
    }
    Ok(y)
}

/// One row of the environment-convergence table.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvDistance<T> {
    pub n: usize,
    pub seed: u64,
    pub period: usize,
    pub distance: T,
}

/// `ρ_S(ε(s_{t'}), σ_{t'})` for `t' = t, …, t̄ + 1`, each `n` and seed.
///
/// For a given seed, the period-`t` population is `n` i.i.d. draws from
/// `σ_t` and is rolled forward; `σ_{t'}` is the nonatomic trajectory from
/// the same `σ_t`. Rows are ordered by `n`, seed, then period.
pub fn env_convergence_experiment<T: Scalar>(
    game: &GameSpec<T>,
    t: usize,
    sigma_t: &Measure<T>,
    profile: &PolicyProfile,
    ns: &[usize],
    seeds: &[u64],
) -> Result<Vec<EnvDistance<T>>> {
    check_period(game, t)?;
    profile.check(game)?;
    if let Some(n) = ns.iter().find(|&&n| n < 2) {
        return invalid(format!("n must be at least 2, got {n}"));
    }
    if !same_space(sigma_t.space(), &game.spaces.states) {
        return invalid("environment must live on the state space");
    }
    let prim = game.primitives();
    let mut reference = vec![sigma_t.clone()];
    for period in t..=game.horizon {
        let x = profile.period(period);
        let sigma = reference.last().expect("nonempty");
        let env = in_action_env(prim, sigma, x);
        let next = push_states(prim, period, sigma, x, &env)?;
        reference.push(next);
    }
    let source = ShockSource::new(game);
    let jobs: Vec<(usize, u64)> = ns.iter().flat_map(|&n| seeds.iter().map(move |&s| (n, s))).collect();
    let tables: Vec<Result<Vec<EnvDistance<T>>>> = jobs
        .par_iter()
        .map(|&(n, seed)| {
            let mut rng = stream_rng(seed, n as u64);
            let mut pop = PopulationState::sample(sigma_t, n, &mut rng)?;
            let mut rows = Vec::with_capacity(reference.len());
            for (k, sigma) in reference.iter().enumerate() {
                let period = t + k;
                let distance = pop.empirical(game.spaces.states.clone()).prohorov(sigma)?;
                rows.push(EnvDistance { n, seed, period, distance });
                if period <= game.horizon {
                    let (g, i) = source.draw(&mut rng, n);
                    let next = advance(prim, period, pop.states(), profile.period(period), None, &g, &i).0;
                    pop = PopulationState { states: next };
                }
            }
            Ok(rows)
        })
        .collect();
    let mut out = Vec::new();
    for table in tables {
        out.extend(table?);
    }
    Ok(out)
}
