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
//! Game-spec and experiment-config files (TOML).
//!
//! Validation errors carry the line of the offending key when the file
//! provides one.

use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use ngame::measure::{FiniteSpace, Measure};
use ngame::model::{GameSpaces, GameSpec, StationarySpec, TableDynamics};
use serde::{Deserialize, Serialize};
use toml::Spanned;

use crate::pricing::{pricing_game, pricing_stationary, PricingParams};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub file: String,
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "{}:{}: {}", self.file, line, self.message),
            None => write!(f, "{}: {}", self.file, self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

struct Source<'a> {
    name: String,
    text: &'a str,
}

impl Source<'_> {
    fn line_of(&self, offset: usize) -> usize {
        self.text[..offset.min(self.text.len())].matches('\n').count() + 1
    }

    fn at<T>(&self, span: &Spanned<T>, message: impl Into<String>) -> ConfigError {
        ConfigError {
            file: self.name.clone(),
            line: Some(self.line_of(span.span().start)),
            message: message.into(),
        }
    }

    fn general(&self, message: impl Into<String>) -> ConfigError {
        ConfigError {
            file: self.name.clone(),
            line: None,
            message: message.into(),
        }
    }

    fn parse<T: for<'de> Deserialize<'de>>(&self) -> Result<T, ConfigError> {
        toml::from_str(self.text).map_err(|e| ConfigError {
            file: self.name.clone(),
            line: e.span().map(|s| self.line_of(s.start)),
            message: e.message().to_string(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    EnvConverge,
    Regret,
    StationaryRegret,
    Solve,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::EnvConverge => "env-converge",
            Self::Regret => "regret",
            Self::StationaryRegret => "stationary-regret",
            Self::Solve => "solve",
        }
    }
}

/// Deviation used by the regret experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ChallengerKind {
    /// The nonatomic best response.
    #[default]
    BestResponse,
    /// Per-cell finite-n refinement from separate pilot streams.
    Refined,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    spec: Spanned<String>,
    kind: ExperimentKind,
    #[serde(default)]
    n: Option<Spanned<Vec<i64>>>,
    #[serde(default)]
    replications: Option<Spanned<i64>>,
    #[serde(default)]
    seeds: Option<Spanned<Vec<u64>>>,
    #[serde(default)]
    tol: Option<Spanned<f64>>,
    #[serde(default)]
    output: Option<String>,
    #[serde(default)]
    period: Option<Spanned<i64>>,
    #[serde(default)]
    epsilon: Option<Spanned<f64>>,
    #[serde(default)]
    challenger: ChallengerKind,
    #[serde(default)]
    pilot: Option<Spanned<i64>>,
    #[serde(default)]
    rolled: bool,
}

/// A validated experiment description. Relative paths are resolved against
/// the config file's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub spec: PathBuf,
    pub kind: ExperimentKind,
    pub n: Vec<usize>,
    pub replications: usize,
    pub seeds: Vec<u64>,
    pub tol: f64,
    pub output: PathBuf,
    /// Period at which environments are compared or deviations happen.
    pub period: usize,
    /// `ε` target for the stationary truncation depth.
    pub epsilon: f64,
    pub challenger: ChallengerKind,
    /// Pilot replications for the refined challenger.
    pub pilot: usize,
    /// Draw regret populations by rolling forward from `σ_1`.
    pub rolled: bool,
}

pub const DEFAULT_REPLICATIONS: usize = 100;
pub const DEFAULT_TOL: f64 = 1e-6;

/// Reads and validates an experiment config.
pub fn load_config(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
        file: path.display().to_string(),
        line: None,
        message: format!("cannot read: {e}"),
    })?;
    let base = path.parent().unwrap_or(Path::new("."));
    parse_config(&text, &path.display().to_string(), base)
}

pub fn parse_config(text: &str, name: &str, base: &Path) -> Result<ExperimentConfig, ConfigError> {
    let src = Source { name: name.to_string(), text };
    let raw: RawConfig = src.parse()?;
    if raw.spec.get_ref().trim().is_empty() {
        return Err(src.at(&raw.spec, "field `spec` must name a game spec file"));
    }
    let n = match &raw.n {
        Some(list) => {
            if list.get_ref().is_empty() {
                return Err(src.at(list, "field `n` must not be empty"));
            }
            if let Some(bad) = list.get_ref().iter().find(|&&v| v < 2) {
                return Err(src.at(list, format!("field `n`: population sizes must be at least 2, got {bad}")));
            }
            list.get_ref().iter().map(|&v| v as usize).collect()
        }
        None if raw.kind == ExperimentKind::Solve => Vec::new(),
        None => return Err(src.general("missing field `n`")),
    };
    let replications = match &raw.replications {
        Some(r) if *r.get_ref() < 2 => {
            return Err(src.at(r, "field `replications` must be at least 2"));
        }
        Some(r) => *r.get_ref() as usize,
        None => DEFAULT_REPLICATIONS,
    };
    let seeds = match &raw.seeds {
        Some(s) => {
            if s.get_ref().is_empty() {
                return Err(src.at(s, "field `seeds` must not be empty"));
            }
            let mut sorted = s.get_ref().clone();
            sorted.sort_unstable();
            if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
                return Err(src.at(s, format!("field `seeds`: seed {} is repeated", w[0])));
            }
            s.get_ref().clone()
        }
        None => vec![0],
    };
    let tol = match &raw.tol {
        Some(t) if !(*t.get_ref() > 0.0 && t.get_ref().is_finite()) => {
            return Err(src.at(t, "field `tol` must be positive"));
        }
        Some(t) => *t.get_ref(),
        None => DEFAULT_TOL,
    };
    let period = match &raw.period {
        Some(p) if *p.get_ref() < 1 => return Err(src.at(p, "field `period` must be at least 1")),
        Some(p) => *p.get_ref() as usize,
        None => 1,
    };
    let epsilon = match &raw.epsilon {
        Some(e) if !(*e.get_ref() > 0.0 && e.get_ref().is_finite()) => {
            return Err(src.at(e, "field `epsilon` must be positive"));
        }
        Some(e) => *e.get_ref(),
        None => 0.05,
    };
    let pilot = match &raw.pilot {
        Some(p) if *p.get_ref() < 2 => return Err(src.at(p, "field `pilot` must be at least 2")),
        Some(p) => *p.get_ref() as usize,
        None => replications,
    };
    Ok(ExperimentConfig {
        spec: base.join(raw.spec.get_ref()),
        kind: raw.kind,
        n,
        replications,
        seeds,
        tol,
        output: base.join(raw.output.unwrap_or_else(|| "out".into())),
        period,
        epsilon,
        challenger: raw.challenger,
        pilot,
        rolled: raw.rolled,
    })
}

/// Tabular game with environment-independent primitives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableGame {
    pub states: Vec<String>,
    /// Positions on a line; the discrete metric when absent.
    #[serde(default)]
    pub state_coords: Option<Vec<f64>>,
    pub actions: Vec<String>,
    #[serde(default)]
    pub action_coords: Option<Vec<f64>>,
    pub preshock_weights: Vec<f64>,
    pub postshock_weights: Vec<f64>,
    /// Per period, `ψ_t(s, x)` indexed `s·|X| + x`.
    pub payoff: Vec<Vec<f64>>,
    /// Per period, `θ_t(s, x, i)` indexed `(s·|X| + x)·|I| + i`.
    pub transition: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameFile {
    #[serde(default)]
    pub stationary: bool,
    /// Finite horizon (table games; pricing games use their own field).
    #[serde(default)]
    pub horizon: Option<usize>,
    #[serde(default)]
    pub alpha: Option<f64>,
    /// Initial environment `σ_1` (or the stationary starting guess); uniform when absent.
    #[serde(default)]
    pub initial: Option<Vec<f64>>,
    #[serde(default)]
    pub pricing: Option<PricingParams>,
    #[serde(default)]
    pub table: Option<TableGame>,
}

/// A loaded game of either kind plus its initial environment.
pub enum Game {
    Finite(GameSpec<f64>),
    Stationary(StationarySpec<f64>),
}

pub struct LoadedGame {
    pub game: Game,
    pub initial: Measure<f64>,
}

fn space(labels: &[String], coords: &Option<Vec<f64>>) -> ngame::Result<Arc<FiniteSpace<f64>>> {
    Ok(Arc::new(match coords {
        Some(c) => FiniteSpace::line(labels.to_vec(), c)?,
        None => FiniteSpace::discrete(labels.to_vec())?,
    }))
}

fn build_table(file: &GameFile, table: &TableGame) -> ngame::Result<Game> {
    let states = space(&table.states, &table.state_coords)?;
    let actions = space(&table.actions, &table.action_coords)?;
    let g_labels: Vec<String> = (0..table.preshock_weights.len()).map(|g| format!("g{g}")).collect();
    let i_labels: Vec<String> = (0..table.postshock_weights.len()).map(|i| format!("i{i}")).collect();
    let preshocks = Arc::new(FiniteSpace::discrete(g_labels)?);
    let postshocks = Arc::new(FiniteSpace::discrete(i_labels)?);
    let spaces = GameSpaces::new(states, actions, preshocks.clone(), postshocks.clone());
    let gamma = Measure::new(preshocks, table.preshock_weights.clone())?;
    let iota = Measure::new(postshocks, table.postshock_weights.clone())?;
    let dynamics = TableDynamics::new(&spaces, table.payoff.clone(), table.transition.clone())?;
    let bound_of = |row: &Vec<f64>| row.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if file.stationary {
        let alpha = file
            .alpha
            .ok_or_else(|| ngame::Error::InvalidInput("stationary table game needs `alpha`".into()))?;
        let bound = table.payoff.first().map(bound_of).unwrap_or(0.0).max(f64::MIN_POSITIVE);
        Ok(Game::Stationary(StationarySpec::new(
            spaces,
            gamma,
            iota,
            Arc::new(dynamics),
            bound,
            alpha,
        )?))
    } else {
        let horizon = file.horizon.unwrap_or(table.payoff.len());
        let bounds = (0..horizon)
            .map(|t| bound_of(&table.payoff[t.min(table.payoff.len() - 1)]))
            .collect();
        Ok(Game::Finite(GameSpec::new(horizon, spaces, gamma, iota, Arc::new(dynamics), bounds)?))
    }
}

/// Parses a game-spec file.
pub fn parse_game(text: &str, name: &str) -> Result<LoadedGame, ConfigError> {
    let src = Source { name: name.to_string(), text };
    let file: GameFile = src.parse()?;
    let fail = |e: ngame::Error| src.general(e.to_string());
    let game = match (&file.pricing, &file.table) {
        (Some(p), None) => {
            if file.horizon.is_some() || file.alpha.is_some() {
                return Err(src.general("pricing games set `horizon` and `alpha` inside [pricing]"));
            }
            if file.stationary {
                Game::Stationary(pricing_stationary(p).map_err(fail)?)
            } else {
                Game::Finite(pricing_game(p).map_err(fail)?)
            }
        }
        (None, Some(t)) => build_table(&file, t).map_err(fail)?,
        _ => return Err(src.general("exactly one of [pricing] or [table] is required")),
    };
    let states = match &game {
        Game::Finite(g) => g.spaces.states.clone(),
        Game::Stationary(s) => s.spaces.states.clone(),
    };
    let initial = match &file.initial {
        Some(w) => Measure::new(states, w.clone()).map_err(|e| src.general(format!("field `initial`: {e}")))?,
        None => Measure::uniform(states),
    };
    Ok(LoadedGame { game, initial })
}

pub fn load_game(path: &Path) -> Result<LoadedGame, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
        file: path.display().to_string(),
        line: None,
        message: format!("cannot read: {e}"),
    })?;
    parse_game(&text, &path.display().to_string())
}
