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
//! Desk-scale dynamic pricing games.
//!
//! Each firm holds `0..=K` units and posts a price from a grid. One
//! customer arrives per period and buys with probability
//! `q = q_max · logistic(a - b·p + c·p̄)`, where `p̄` is the average price
//! of the other firms under the in-action environment. The post-action
//! shock `i` is uniform on a grid `u_i = (i + 1/2) / L` and a sale happens
//! when `u_i < q`, so the payoff (price times expected units sold) uses the
//! same discretized probability as the transition. In the lock-in variant an
//! empty firm produces back up to `K`.
//!
//! These functional forms are an interpretation; the calibrated model is
//! not reproduced.

use std::sync::Arc;

use ngame::measure::{FiniteSpace, Measure};
use ngame::model::{Dynamics, GameSpaces, GameSpec, StationarySpec};
use ngame::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PricingParams {
    /// Inventory capacity `K`.
    pub capacity: usize,
    pub prices: Vec<f64>,
    /// Logistic intercept `a`.
    #[serde(default = "default_intercept")]
    pub intercept: f64,
    /// Own-price sensitivity `b`.
    #[serde(default = "default_own")]
    pub own_sensitivity: f64,
    /// Competitor-price sensitivity `c`.
    #[serde(default = "default_cross")]
    pub cross_sensitivity: f64,
    /// `q_max`; zero switches demand off.
    #[serde(default = "default_rate")]
    pub demand_rate: f64,
    /// Size `L` of the demand-shock grid.
    #[serde(default = "default_levels")]
    pub demand_levels: usize,
    /// Size of the pre-action dice space `G`.
    #[serde(default = "default_dice")]
    pub dice: usize,
    #[serde(default = "default_horizon")]
    pub horizon: usize,
    /// Used by the stationary variant only.
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default)]
    pub lock_in: bool,
}

fn default_intercept() -> f64 {
    1.0
}
fn default_own() -> f64 {
    1.5
}
fn default_cross() -> f64 {
    1.0
}
fn default_rate() -> f64 {
    0.9
}
fn default_levels() -> usize {
    20
}
fn default_dice() -> usize {
    2
}
fn default_horizon() -> usize {
    4
}
fn default_alpha() -> f64 {
    0.8
}

impl Default for PricingParams {
    fn default() -> Self {
        Self {
            capacity: 3,
            prices: vec![1.0, 2.0, 3.0],
            intercept: default_intercept(),
            own_sensitivity: default_own(),
            cross_sensitivity: default_cross(),
            demand_rate: default_rate(),
            demand_levels: default_levels(),
            dice: default_dice(),
            horizon: default_horizon(),
            alpha: default_alpha(),
            lock_in: false,
        }
    }
}

impl PricingParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidInput(m.to_string()));
        if self.capacity == 0 {
            return bad("capacity must be at least 1");
        }
        if self.prices.is_empty() {
            return bad("price grid is empty");
        }
        if self.prices.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return bad("prices must be finite and nonnegative");
        }
        let mut sorted = self.prices.clone();
        sorted.sort_by(f64::total_cmp);
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return bad("prices must be distinct");
        }
        if !(0.0..=1.0).contains(&self.demand_rate) {
            return bad("demand rate must lie in [0, 1]");
        }
        if self.demand_levels == 0 || self.dice == 0 {
            return bad("demand and dice grids need at least one point");
        }
        if self.horizon == 0 {
            return bad("horizon must be at least 1");
        }
        if !(0.0..1.0).contains(&self.alpha) {
            return bad("alpha must lie in [0, 1)");
        }
        for v in [self.intercept, self.own_sensitivity, self.cross_sensitivity] {
            if !v.is_finite() {
                return bad("demand coefficients must be finite");
            }
        }
        Ok(())
    }

    /// `ψ̄ = max price × one unit`.
    pub fn payoff_bound(&self) -> f64 {
        self.prices.iter().cloned().fold(0.0, f64::max)
    }
}

/// Pricing dynamics on `S = {0, …, K}`, `X` = price grid.
#[derive(Debug, Clone)]
pub struct PricingDynamics {
    params: PricingParams,
}

impl PricingDynamics {
    pub fn new(params: PricingParams) -> Self {
        Self { params }
    }

    /// Purchase probability for own price `p` against competitor average `p̄`.
    pub fn purchase_probability(&self, price: f64, others: f64) -> f64 {
        let p = &self.params;
        let z = p.intercept - p.own_sensitivity * price + p.cross_sensitivity * others;
        p.demand_rate / (1.0 + (-z).exp())
    }

    /// Average price posted by the other firms under `env` on `S × X`.
    pub fn average_price(&self, env: &Measure<f64>) -> f64 {
        let nx = self.params.prices.len();
        env.support().map(|(pair, w)| w * self.params.prices[pair % nx]).sum()
    }

    /// Number of demand levels `u_i` below `q`.
    fn selling_levels(&self, action: usize, env: &Measure<f64>) -> usize {
        let q = self.purchase_probability(self.params.prices[action], self.average_price(env));
        let l = self.params.demand_levels as f64;
        // u_i < q  ⇔  i < q·L - 1/2
        let k = (q * l - 0.5).ceil();
        k.clamp(0.0, l) as usize
    }
}

impl Dynamics<f64> for PricingDynamics {
    fn payoff(&self, _period: usize, state: usize, action: usize, env: &Measure<f64>) -> f64 {
        if state == 0 {
            return 0.0;
        }
        let sold = self.selling_levels(action, env) as f64 / self.params.demand_levels as f64;
        self.params.prices[action] * sold
    }

    fn transition(&self, _period: usize, state: usize, action: usize, env: &Measure<f64>, shock: usize) -> usize {
        if state == 0 {
            return if self.params.lock_in { self.params.capacity } else { 0 };
        }
        if shock < self.selling_levels(action, env) {
            state - 1
        } else {
            state
        }
    }
}

fn spaces(params: &PricingParams) -> Result<GameSpaces<f64>> {
    let k = params.capacity;
    let coords: Vec<f64> = (0..=k).map(|s| s as f64 / k as f64).collect();
    let states = FiniteSpace::line((0..=k).map(|s| s.to_string()).collect(), &coords)?;
    let actions = FiniteSpace::line(params.prices.iter().map(|p| format!("p{p}")).collect(), &params.prices)?;
    let l = params.demand_levels;
    let levels: Vec<f64> = (0..l).map(|i| (i as f64 + 0.5) / l as f64).collect();
    let postshocks = FiniteSpace::line((0..l).map(|i| format!("u{i}")).collect(), &levels)?;
    let preshocks = FiniteSpace::discrete((0..params.dice).map(|g| format!("g{g}")).collect())?;
    Ok(GameSpaces::new(
        Arc::new(states),
        Arc::new(actions),
        Arc::new(preshocks),
        Arc::new(postshocks),
    ))
}

/// The finite-horizon (transient or lock-in) pricing game.
pub fn pricing_game(params: &PricingParams) -> Result<GameSpec<f64>> {
    params.validate()?;
    let sp = spaces(params)?;
    let gamma = Measure::uniform(sp.preshocks.clone());
    let iota = Measure::uniform(sp.postshocks.clone());
    let bounds = vec![params.payoff_bound(); params.horizon];
    GameSpec::new(
        params.horizon,
        sp,
        gamma,
        iota,
        Arc::new(PricingDynamics { params: params.clone() }),
        bounds,
    )
}

/// The discounted stationary pricing game.
pub fn pricing_stationary(params: &PricingParams) -> Result<StationarySpec<f64>> {
    params.validate()?;
    let sp = spaces(params)?;
    let gamma = Measure::uniform(sp.preshocks.clone());
    let iota = Measure::uniform(sp.postshocks.clone());
    StationarySpec::new(
        sp,
        gamma,
        iota,
        Arc::new(PricingDynamics { params: params.clone() }),
        params.payoff_bound().max(f64::MIN_POSITIVE),
        params.alpha,
    )
}

/// Either game kind, as selected by `lock_in`/`stationary`.
pub enum PricingInstance {
    Finite(GameSpec<f64>),
    Stationary(StationarySpec<f64>),
}

pub fn build_pricing_instance(params: &PricingParams, stationary: bool) -> Result<PricingInstance> {
    if stationary {
        pricing_stationary(params).map(PricingInstance::Stationary)
    } else {
        pricing_game(params).map(PricingInstance::Finite)
    }
}
