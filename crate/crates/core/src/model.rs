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
//! Game primitives: spaces, shock laws, payoff and transition functions,
//! policies, plus exhaustive validation and sampled continuity probes.

use std::fmt;
use std::sync::Arc;

use rand::Rng;

use crate::error::{invalid, Result};
use crate::measure::{same_space, FiniteSpace, Measure};
use crate::scalar::Scalar;

/// Per-period payoff `ψ_t(s, x, μ)` and transition `θ_t(s, x, μ, i)`.
///
/// States, actions and shocks are point indices into the game's spaces and
/// `env` is a measure on the state-action product. Periods are 1-based.
/// Stationary engines always pass period 1. Implementations must be pure.
pub trait Dynamics<T>: Send + Sync {
    fn payoff(&self, period: usize, state: usize, action: usize, env: &Measure<T>) -> T;
    fn transition(
        &self,
        period: usize,
        state: usize,
        action: usize,
        env: &Measure<T>,
        shock: usize,
    ) -> usize;
}

/// Dynamics from a pair of closures.
pub struct FnDynamics<P, Q> {
    payoff: P,
    transition: Q,
}

impl<P, Q> FnDynamics<P, Q> {
    pub fn new(payoff: P, transition: Q) -> Self {
        Self { payoff, transition }
    }
}

impl<T, P, Q> Dynamics<T> for FnDynamics<P, Q>
where
    P: Fn(usize, usize, usize, &Measure<T>) -> T + Send + Sync,
    Q: Fn(usize, usize, usize, &Measure<T>, usize) -> usize + Send + Sync,
{
    fn payoff(&self, period: usize, state: usize, action: usize, env: &Measure<T>) -> T {
        (self.payoff)(period, state, action, env)
    }

    fn transition(&self, period: usize, state: usize, action: usize, env: &Measure<T>, shock: usize) -> usize {
        (self.transition)(period, state, action, env, shock)
    }
}

/// Environment-independent dynamics from dense tables.
///
/// `payoff[k][s * |X| + x]` and `transition[k][(s * |X| + x) * |I| + i]`,
/// where `k` is the period minus one, clamped to the last table given, so a
/// single table serves every period.
#[derive(Debug, Clone)]
pub struct TableDynamics<T> {
    actions: usize,
    shocks: usize,
    payoff: Vec<Vec<T>>,
    transition: Vec<Vec<usize>>,
}

impl<T: Scalar> TableDynamics<T> {
    pub fn new(
        spaces: &GameSpaces<T>,
        payoff: Vec<Vec<T>>,
        transition: Vec<Vec<usize>>,
    ) -> Result<Self> {
        let (ns, nx, ni) = (spaces.states.len(), spaces.actions.len(), spaces.postshocks.len());
        if payoff.is_empty() || transition.is_empty() {
            return invalid("payoff and transition tables need at least one period");
        }
        if payoff.iter().any(|p| p.len() != ns * nx) {
            return invalid(format!("payoff tables must have {} entries", ns * nx));
        }
        if transition.iter().any(|p| p.len() != ns * nx * ni) {
            return invalid(format!("transition tables must have {} entries", ns * nx * ni));
        }
        Ok(Self {
            actions: nx,
            shocks: ni,
            payoff,
            transition,
        })
    }
}

impl<T: Scalar> Dynamics<T> for TableDynamics<T> {
    fn payoff(&self, period: usize, state: usize, action: usize, _env: &Measure<T>) -> T {
        let k = (period.max(1) - 1).min(self.payoff.len() - 1);
        self.payoff[k][state * self.actions + action].clone()
    }

    fn transition(&self, period: usize, state: usize, action: usize, _env: &Measure<T>, shock: usize) -> usize {
        let k = (period.max(1) - 1).min(self.transition.len() - 1);
        self.transition[k][(state * self.actions + action) * self.shocks + shock]
    }
}

/// Geometric discounting of a stationary payoff: `ψ_t = α^{t-1} ψ`.
pub struct Discounted<T> {
    inner: Arc<dyn Dynamics<T>>,
    alpha: T,
}

impl<T: Scalar> Dynamics<T> for Discounted<T> {
    fn payoff(&self, period: usize, state: usize, action: usize, env: &Measure<T>) -> T {
        self.alpha.powi_count(period - 1) * self.inner.payoff(1, state, action, env)
    }

    fn transition(&self, _period: usize, state: usize, action: usize, env: &Measure<T>, shock: usize) -> usize {
        self.inner.transition(1, state, action, env, shock)
    }
}

/// The four primitive spaces plus the state-action product that houses
/// in-action environments.
#[derive(Debug, Clone)]
pub struct GameSpaces<T> {
    pub states: Arc<FiniteSpace<T>>,
    pub actions: Arc<FiniteSpace<T>>,
    pub preshocks: Arc<FiniteSpace<T>>,
    pub postshocks: Arc<FiniteSpace<T>>,
    pub state_action: Arc<FiniteSpace<T>>,
}

impl<T: Scalar> GameSpaces<T> {
    pub fn new(
        states: Arc<FiniteSpace<T>>,
        actions: Arc<FiniteSpace<T>>,
        preshocks: Arc<FiniteSpace<T>>,
        postshocks: Arc<FiniteSpace<T>>,
    ) -> Self {
        let state_action = Arc::new(
            FiniteSpace::product(vec![states.clone(), actions.clone()])
                .expect("product of valid spaces"),
        );
        Self {
            states,
            actions,
            preshocks,
            postshocks,
            state_action,
        }
    }

    /// Index of `(s, x)` in the state-action product.
    pub fn pair(&self, state: usize, action: usize) -> usize {
        state * self.actions.len() + action
    }
}

/// Finite-horizon game primitives.
#[derive(Clone)]
pub struct GameSpec<T> {
    pub horizon: usize,
    pub spaces: GameSpaces<T>,
    pub gamma: Measure<T>,
    pub iota: Measure<T>,
    pub dynamics: Arc<dyn Dynamics<T>>,
    pub payoff_bounds: Vec<T>,
}

impl<T: Scalar> GameSpec<T> {
    pub fn new(
        horizon: usize,
        spaces: GameSpaces<T>,
        gamma: Measure<T>,
        iota: Measure<T>,
        dynamics: Arc<dyn Dynamics<T>>,
        payoff_bounds: Vec<T>,
    ) -> Result<Self> {
        if horizon == 0 {
            return invalid("horizon must be at least one period");
        }
        if payoff_bounds.len() != horizon {
            return invalid(format!("{} payoff bounds for {horizon} periods", payoff_bounds.len()));
        }
        if payoff_bounds.iter().any(|b| *b < T::zero()) {
            return invalid("payoff bounds must be nonnegative");
        }
        check_laws(&spaces, &gamma, &iota)?;
        Ok(Self {
            horizon,
            spaces,
            gamma,
            iota,
            dynamics,
            payoff_bounds,
        })
    }

    /// `ψ̄_t` for a 1-based period.
    pub fn bound(&self, period: usize) -> &T {
        &self.payoff_bounds[period - 1]
    }

    /// `Σ_{t' >= t} ψ̄_{t'}`; zero past the horizon.
    pub fn tail_bound(&self, period: usize) -> T {
        self.payoff_bounds
            .iter()
            .skip(period.saturating_sub(1))
            .fold(T::zero(), |acc, b| acc + b.clone())
    }

    pub fn total_bound(&self) -> T {
        self.tail_bound(1)
    }
}

/// Time-invariant primitives with discount factor `α ∈ [0, 1)`.
#[derive(Clone)]
pub struct StationarySpec<T> {
    pub spaces: GameSpaces<T>,
    pub gamma: Measure<T>,
    pub iota: Measure<T>,
    pub dynamics: Arc<dyn Dynamics<T>>,
    pub payoff_bound: T,
    pub alpha: T,
}

impl<T: Scalar> StationarySpec<T> {
    pub fn new(
        spaces: GameSpaces<T>,
        gamma: Measure<T>,
        iota: Measure<T>,
        dynamics: Arc<dyn Dynamics<T>>,
        payoff_bound: T,
        alpha: T,
    ) -> Result<Self> {
        if alpha < T::zero() || alpha >= T::one() {
            return invalid(format!("discount factor {alpha} is outside [0, 1)"));
        }
        if payoff_bound <= T::zero() {
            return invalid("payoff bound must be positive");
        }
        check_laws(&spaces, &gamma, &iota)?;
        Ok(Self {
            spaces,
            gamma,
            iota,
            dynamics,
            payoff_bound,
            alpha,
        })
    }

    /// The finite-horizon game with `ψ_t = α^{t-1} ψ` and `θ_t = θ`.
    pub fn lift(&self, horizon: usize) -> Result<GameSpec<T>> {
        let bounds = (0..horizon)
            .map(|k| self.alpha.powi_count(k) * self.payoff_bound.clone())
            .collect();
        GameSpec::new(
            horizon,
            self.spaces.clone(),
            self.gamma.clone(),
            self.iota.clone(),
            Arc::new(Discounted {
                inner: self.dynamics.clone(),
                alpha: self.alpha.clone(),
            }),
            bounds,
        )
    }
}

/// Borrowed view of the primitives both game kinds share.
pub struct Primitives<'a, T> {
    pub spaces: &'a GameSpaces<T>,
    pub gamma: &'a Measure<T>,
    pub iota: &'a Measure<T>,
    pub dynamics: &'a dyn Dynamics<T>,
}

impl<T> Clone for Primitives<'_, T> {
    fn clone(&self) -> Self {
        *self
    }
}

impl<T> Copy for Primitives<'_, T> {}

impl<T: Scalar> GameSpec<T> {
    pub fn primitives(&self) -> Primitives<'_, T> {
        Primitives {
            spaces: &self.spaces,
            gamma: &self.gamma,
            iota: &self.iota,
            dynamics: self.dynamics.as_ref(),
        }
    }
}

impl<T: Scalar> StationarySpec<T> {
    pub fn primitives(&self) -> Primitives<'_, T> {
        Primitives {
            spaces: &self.spaces,
            gamma: &self.gamma,
            iota: &self.iota,
            dynamics: self.dynamics.as_ref(),
        }
    }
}

fn check_laws<T: Scalar>(spaces: &GameSpaces<T>, gamma: &Measure<T>, iota: &Measure<T>) -> Result<()> {
    if !same_space(gamma.space(), &spaces.preshocks) {
        return invalid("pre-action shock law must live on the pre-action shock space");
    }
    if !same_space(iota.space(), &spaces.postshocks) {
        return invalid("post-action shock law must live on the post-action shock space");
    }
    Ok(())
}

/// One period's action plan `x(s, g)`, stored row-major over `S × G`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Policy {
    preshocks: usize,
    actions: Vec<usize>,
}

impl Policy {
    pub fn new(states: usize, preshocks: usize, actions: Vec<usize>) -> Result<Self> {
        if actions.len() != states * preshocks {
            return invalid(format!(
                "policy table has {} cells, expected {}",
                actions.len(),
                states * preshocks
            ));
        }
        Ok(Self { preshocks, actions })
    }

    pub fn constant(states: usize, preshocks: usize, action: usize) -> Self {
        Self {
            preshocks,
            actions: vec![action; states * preshocks],
        }
    }

    pub fn from_fn(states: usize, preshocks: usize, f: impl Fn(usize, usize) -> usize) -> Self {
        let actions = (0..states)
            .flat_map(|s| (0..preshocks).map(move |g| (s, g)))
            .map(|(s, g)| f(s, g))
            .collect();
        Self { preshocks, actions }
    }

    pub fn action(&self, state: usize, preshock: usize) -> usize {
        self.actions[state * self.preshocks + preshock]
    }

    pub fn set(&mut self, state: usize, preshock: usize, action: usize) {
        self.actions[state * self.preshocks + preshock] = action;
    }

    pub fn states(&self) -> usize {
        self.actions.len() / self.preshocks
    }

    pub fn preshocks(&self) -> usize {
        self.preshocks
    }

    pub fn table(&self) -> &[usize] {
        &self.actions
    }

    /// Totality and range against the game's spaces.
    pub fn check<T: Scalar>(&self, spaces: &GameSpaces<T>) -> Result<()> {
        if self.preshocks != spaces.preshocks.len() || self.states() != spaces.states.len() {
            return invalid("policy shape does not match S × G");
        }
        if let Some(a) = self.actions.iter().find(|&&a| a >= spaces.actions.len()) {
            return invalid(format!("policy prescribes action {a}, outside the action space"));
        }
        Ok(())
    }
}

/// Per-period policies `x_1, …, x_t̄`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolicyProfile {
    periods: Vec<Policy>,
}

impl PolicyProfile {
    pub fn new(periods: Vec<Policy>) -> Self {
        Self { periods }
    }

    /// The same policy in every one of `horizon` periods.
    pub fn repeated(policy: Policy, horizon: usize) -> Self {
        Self {
            periods: vec![policy; horizon],
        }
    }

    pub fn len(&self) -> usize {
        self.periods.len()
    }

    pub fn is_empty(&self) -> bool {
        self.periods.is_empty()
    }

    /// Policy of a 1-based period.
    pub fn period(&self, t: usize) -> &Policy {
        &self.periods[t - 1]
    }

    pub fn period_mut(&mut self, t: usize) -> &mut Policy {
        &mut self.periods[t - 1]
    }

    pub fn periods(&self) -> &[Policy] {
        &self.periods
    }

    /// Copy with period `t` replaced.
    pub fn with_period(&self, t: usize, policy: Policy) -> Self {
        let mut out = self.clone();
        out.periods[t - 1] = policy;
        out
    }

    pub fn check<T: Scalar>(&self, game: &GameSpec<T>) -> Result<()> {
        if self.periods.len() != game.horizon {
            return invalid(format!(
                "profile covers {} periods, the game has {}",
                self.periods.len(),
                game.horizon
            ));
        }
        self.periods.iter().try_for_each(|p| p.check(&game.spaces))
    }
}

/// A failed exhaustive check from [`validate`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    PayoffBound {
        period: usize,
        state: String,
        action: String,
        value: f64,
        bound: f64,
    },
    NonFinitePayoff {
        period: usize,
        state: String,
        action: String,
    },
    TransitionRange {
        period: usize,
        state: String,
        action: String,
        shock: String,
        returned: usize,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::PayoffBound { period, state, action, value, bound } => write!(
                f,
                "period {period}: |payoff({state}, {action})| = {} exceeds bound {bound}",
                value.abs()
            ),
            Violation::NonFinitePayoff { period, state, action } => {
                write!(f, "period {period}: payoff({state}, {action}) is not finite")
            }
            Violation::TransitionRange { period, state, action, shock, returned } => write!(
                f,
                "period {period}: transition({state}, {action}, {shock}) returned {returned}, outside S"
            ),
        }
    }
}

/// Environments used by [`validate`]: the uniform law plus every point mass
/// on `S × X`.
pub fn probe_environments<T: Scalar>(spaces: &GameSpaces<T>) -> Vec<Measure<T>> {
    let sx = &spaces.state_action;
    let mut probes = vec![Measure::uniform(sx.clone())];
    probes.extend((0..sx.len()).map(|p| Measure::dirac(sx.clone(), p).expect("point in range")));
    probes
}

/// Exhaustive bound and range checks over every period, state, action and
/// post-action shock for each probe environment. One violation is reported
/// per offending `(t, s, x)` cell.
pub fn validate<T: Scalar>(spec: &GameSpec<T>) -> Vec<Violation> {
    let sp = &spec.spaces;
    let probes = probe_environments(sp);
    let mut out = Vec::new();
    for t in 1..=spec.horizon {
        let bound = spec.bound(t).to_f64_lossy();
        for s in 0..sp.states.len() {
            for x in 0..sp.actions.len() {
                let (sl, xl) = (sp.states.label(s).to_string(), sp.actions.label(x).to_string());
                let mut payoff_bad = false;
                let mut range_bad = false;
                for env in &probes {
                    let v = spec.dynamics.payoff(t, s, x, env);
                    if !payoff_bad {
                        if !v.is_finite_value() {
                            out.push(Violation::NonFinitePayoff { period: t, state: sl.clone(), action: xl.clone() });
                            payoff_bad = true;
                        } else if v.abs_val() > *spec.bound(t) {
                            out.push(Violation::PayoffBound {
                                period: t,
                                state: sl.clone(),
                                action: xl.clone(),
                                value: v.to_f64_lossy(),
                                bound,
                            });
                            payoff_bad = true;
                        }
                    }
                    if range_bad {
                        continue;
                    }
                    for i in 0..sp.postshocks.len() {
                        let next = spec.dynamics.transition(t, s, x, env, i);
                        if next >= sp.states.len() {
                            out.push(Violation::TransitionRange {
                                period: t,
                                state: sl.clone(),
                                action: xl.clone(),
                                shock: sp.postshocks.label(i).to_string(),
                                returned: next,
                            });
                            range_bad = true;
                            break;
                        }
                    }
                }
            }
        }
    }
    out
}

/// Empirical continuity evidence for one kind of input perturbation.
///
/// `distance` is an input distance (an exact distance level for state and
/// action perturbations, an upper bin edge for environment perturbations).
/// The `*_gap` columns are sups over the probed pairs in that bin; the
/// `*_modulus` columns are the running sups over all bins up to this one.
#[derive(Debug, Clone, PartialEq)]
pub struct ModulusRow {
    pub distance: f64,
    pub pairs: usize,
    pub payoff_gap: f64,
    /// Largest `ι`-expected distance between the two successor states.
    pub transition_gap: f64,
    /// Largest `ι`-probability that the two successor states differ.
    pub transition_split: f64,
    pub payoff_modulus: f64,
    pub transition_modulus: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuityReport {
    pub state: Vec<ModulusRow>,
    pub action: Vec<ModulusRow>,
    pub environment: Vec<ModulusRow>,
}

/// Upper edges of the Prohorov-distance bins for environment perturbations.
pub const ENV_BIN_EDGES: [f64; 8] = [0.005, 0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0];

#[derive(Default, Clone)]
struct Acc {
    pairs: usize,
    payoff: f64,
    transition: f64,
    split: f64,
}

impl Acc {
    fn add(&mut self, payoff: f64, transition: f64, split: f64) {
        self.pairs += 1;
        self.payoff = self.payoff.max(payoff);
        self.transition = self.transition.max(transition);
        self.split = self.split.max(split);
    }
}

fn rows_from(bins: Vec<(f64, Acc)>) -> Vec<ModulusRow> {
    let (mut pm, mut tm) = (0.0f64, 0.0f64);
    bins.into_iter()
        .filter(|(_, a)| a.pairs > 0)
        .map(|(distance, a)| {
            pm = pm.max(a.payoff);
            tm = tm.max(a.transition);
            ModulusRow {
                distance,
                pairs: a.pairs,
                payoff_gap: a.payoff,
                transition_gap: a.transition,
                transition_split: a.split,
                payoff_modulus: pm,
                transition_modulus: tm,
            }
        })
        .collect()
}

fn random_env<T: Scalar, R: Rng + ?Sized>(space: &Arc<FiniteSpace<T>>, rng: &mut R) -> Measure<T> {
    let raw: Vec<f64> = (0..space.len()).map(|_| rng.gen::<f64>() + 1e-3).collect();
    let total: f64 = raw.iter().sum();
    let weights = raw
        .iter()
        .map(|w| T::from_f64(w / total).expect("finite weight"))
        .collect();
    Measure::new(space.clone(), weights).expect("normalized weights")
}

/// Probes the continuity assumptions the convergence results rely on.
///
/// State and action perturbations are enumerated exhaustively (the spaces
/// are finite) against the uniform environment and `num_env_pairs` random
/// ones; environment perturbations mix a random environment with another by
/// a random weight below one half and bin the pair by its Prohorov distance.
/// The result is evidence, not a proof.
pub fn continuity_probe<T: Scalar, R: Rng + ?Sized>(
    spec: &GameSpec<T>,
    num_env_pairs: usize,
    rng: &mut R,
) -> Result<ContinuityReport> {
    let sp = &spec.spaces;
    let (ns, nx) = (sp.states.len(), sp.actions.len());
    let dyn_ = &spec.dynamics;
    let iota = spec.iota.weights();

    let mut envs = vec![Measure::uniform(sp.state_action.clone())];
    envs.extend((0..num_env_pairs).map(|_| random_env(&sp.state_action, rng)));

    let succ_gap = |t: usize, a: (usize, usize, &Measure<T>), b: (usize, usize, &Measure<T>)| {
        let (mut mean, mut split) = (0.0, 0.0);
        for (i, w) in iota.iter().enumerate() {
            let w = w.to_f64_lossy();
            let s1 = dyn_.transition(t, a.0, a.1, a.2, i);
            let s2 = dyn_.transition(t, b.0, b.1, b.2, i);
            if s1 >= ns || s2 >= ns {
                continue;
            }
            mean += w * sp.states.dist(s1, s2).to_f64_lossy();
            if s1 != s2 {
                split += w;
            }
        }
        (mean, split)
    };
    let pay = |t: usize, s: usize, x: usize, env: &Measure<T>| dyn_.payoff(t, s, x, env).to_f64_lossy();

    let levels = |space: &FiniteSpace<T>| -> Vec<(f64, Acc)> {
        space
            .distance_levels()
            .into_iter()
            .map(|d| (d.to_f64_lossy(), Acc::default()))
            .collect()
    };
    let slot = |bins: &[(f64, Acc)], d: f64| bins.iter().position(|(b, _)| *b == d).expect("distance level");

    let mut state_bins = levels(&sp.states);
    let mut action_bins = levels(&sp.actions);
    for t in 1..=spec.horizon {
        for env in &envs {
            for x in 0..nx {
                for s in 0..ns {
                    for s2 in 0..ns {
                        let d = sp.states.dist(s, s2).to_f64_lossy();
                        let gp = (pay(t, s, x, env) - pay(t, s2, x, env)).abs();
                        let (gt, split) = succ_gap(t, (s, x, env), (s2, x, env));
                        let k = slot(&state_bins, d);
                        state_bins[k].1.add(gp, gt, split);
                    }
                }
            }
            for s in 0..ns {
                for x in 0..nx {
                    for x2 in 0..nx {
                        let d = sp.actions.dist(x, x2).to_f64_lossy();
                        let gp = (pay(t, s, x, env) - pay(t, s, x2, env)).abs();
                        let (gt, split) = succ_gap(t, (s, x, env), (s, x2, env));
                        let k = slot(&action_bins, d);
                        action_bins[k].1.add(gp, gt, split);
                    }
                }
            }
        }
    }

    let mut env_bins: Vec<(f64, Acc)> = ENV_BIN_EDGES.iter().map(|e| (*e, Acc::default())).collect();
    for _ in 0..num_env_pairs {
        let a = random_env(&sp.state_action, rng);
        let b = random_env(&sp.state_action, rng);
        let lambda: f64 = rng.gen_range(0.0..0.5);
        let lam = T::from_f64(lambda).expect("finite weight");
        let mixed: Vec<T> = a
            .weights()
            .iter()
            .zip(b.weights())
            .map(|(wa, wb)| (T::one() - lam.clone()) * wa.clone() + lam.clone() * wb.clone())
            .collect();
        let a2 = Measure::new(sp.state_action.clone(), mixed)?;
        let rho = a.prohorov(&a2)?.to_f64_lossy();
        let k = env_bins
            .iter()
            .position(|(e, _)| rho <= *e)
            .unwrap_or(env_bins.len() - 1);
        let mut acc = Acc::default();
        for t in 1..=spec.horizon {
            for s in 0..ns {
                for x in 0..nx {
                    let gp = (pay(t, s, x, &a) - pay(t, s, x, &a2)).abs();
                    let (gt, split) = succ_gap(t, (s, x, &a), (s, x, &a2));
                    acc.add(gp, gt, split);
                }
            }
        }
        let bin = &mut env_bins[k].1;
        bin.pairs += 1;
        bin.payoff = bin.payoff.max(acc.payoff);
        bin.transition = bin.transition.max(acc.transition);
        bin.split = bin.split.max(acc.split);
    }

    Ok(ContinuityReport {
        state: rows_from(state_bins),
        action: rows_from(action_bins),
        environment: rows_from(env_bins),
    })
}
