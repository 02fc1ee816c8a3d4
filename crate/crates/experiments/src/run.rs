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
//! Experiment execution, CSV emission and manifests.
//!
//! Every table is rendered to a string first and then written with an
//! atomic rename, so a manifest only ever describes complete files.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use ngame::finite::{env_convergence_experiment, refine_challenger, regret_gap, rollout, InitialLaw, PopulationState};
use ngame::measure::Measure;
use ngame::model::{GameSpec, Policy, PolicyProfile, StationarySpec};
use ngame::nonatomic::{best_deviation, propagate, solve_equilibrium, value, NgSolution, SolveOptions};
use ngame::stationary::{check_se, solve_se, stationary_regret_experiment, truncation_depth, SeOptions, StationarySolution};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{load_config, load_game, ChallengerKind, ConfigError, ExperimentConfig, ExperimentKind, Game, LoadedGame};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("did not converge: {0}")]
    NonConvergence(String),
    #[error("{0}")]
    Other(#[from] anyhow::Error),
}

impl From<ngame::Error> for RunError {
    fn from(e: ngame::Error) -> Self {
        RunError::Invalid(e.to_string())
    }
}

impl RunError {
    /// Process exit code: 2 for validation problems, 3 for non-convergence.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) | RunError::Invalid(_) => 2,
            RunError::NonConvergence(_) => 3,
            RunError::Other(_) => 1,
        }
    }
}

pub type RunResult<T> = std::result::Result<T, RunError>;

/// A rendered output file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub name: String,
    pub contents: String,
}

struct CsvTable {
    writer: csv::Writer<Vec<u8>>,
}

impl CsvTable {
    fn new(meta: &str, columns: &[&str]) -> Self {
        let mut buf = Vec::new();
        buf.extend_from_slice(format!("# {meta}\n").as_bytes());
        let mut writer = csv::Writer::from_writer(buf);
        writer.write_record(columns).expect("in-memory write");
        Self { writer }
    }

    fn row<I: IntoIterator<Item = String>>(&mut self, fields: I) {
        self.writer.write_record(fields.into_iter().collect::<Vec<_>>()).expect("in-memory write");
    }

    fn finish(self, name: &str) -> Table {
        let bytes = self.writer.into_inner().expect("in-memory flush");
        Table {
            name: name.to_string(),
            contents: String::from_utf8(bytes).expect("utf-8 fields"),
        }
    }
}

/// Header metadata line shared by every table.
#[derive(Debug, Clone)]
pub struct Meta {
    pub command: String,
    pub seeds: Vec<u64>,
    pub extra: Vec<(String, String)>,
}

impl Meta {
    pub fn new(command: &str, seeds: &[u64]) -> Self {
        Self {
            command: command.to_string(),
            seeds: seeds.to_vec(),
            extra: Vec::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.extra.push((key.to_string(), value.to_string()));
        self
    }

    fn line(&self) -> String {
        let seeds: Vec<String> = self.seeds.iter().map(u64::to_string).collect();
        let mut s = format!("ngame {} seeds={}", self.command, seeds.join(";"));
        for (k, v) in &self.extra {
            s.push_str(&format!(" {k}={v}"));
        }
        s
    }
}

/// Plain decimals, switching to exponent form for very small or large magnitudes.
fn f(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && a.is_finite() && !(1e-5..1e16).contains(&a) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

pub fn finite_game(loaded: &LoadedGame) -> RunResult<&GameSpec<f64>> {
    match &loaded.game {
        Game::Finite(g) => Ok(g),
        Game::Stationary(_) => Err(RunError::Invalid("this command needs a finite-horizon game".into())),
    }
}

pub fn stationary_game(loaded: &LoadedGame) -> RunResult<&StationarySpec<f64>> {
    match &loaded.game {
        Game::Stationary(s) => Ok(s),
        Game::Finite(_) => Err(RunError::Invalid("this command needs a stationary game".into())),
    }
}

/// Solves the nonatomic game from the spec's initial environment.
pub fn solve_ng(game: &GameSpec<f64>, initial: &Measure<f64>, tol: f64) -> RunResult<NgSolution<f64>> {
    let opts = SolveOptions {
        tol,
        ..SolveOptions::default()
    };
    Ok(solve_equilibrium(game, initial, &opts)?)
}

fn require_ng(game: &GameSpec<f64>, initial: &Measure<f64>, tol: f64) -> RunResult<NgSolution<f64>> {
    let sol = solve_ng(game, initial, tol)?;
    if !sol.converged {
        return Err(RunError::NonConvergence(format!(
            "nonatomic best response stopped after {} sweeps with gap {}",
            sol.iterations, sol.report.max_gap
        )));
    }
    Ok(sol)
}

pub fn profile_table(game: &GameSpec<f64>, profile: &PolicyProfile, meta: &Meta) -> Table {
    let sp = &game.spaces;
    let mut t = CsvTable::new(&meta.line(), &["t", "state", "preshock", "action"]);
    for (k, policy) in profile.periods().iter().enumerate() {
        for s in 0..sp.states.len() {
            for g in 0..sp.preshocks.len() {
                t.row([
                    (k + 1).to_string(),
                    sp.states.label(s).to_string(),
                    sp.preshocks.label(g).to_string(),
                    sp.actions.label(policy.action(s, g)).to_string(),
                ]);
            }
        }
    }
    t.finish("profile.csv")
}

/// Columns `t`, `state`, `mass` for `σ_1, …, σ_{t̄+1}`.
pub fn trajectory_table(sigmas: &[Measure<f64>], meta: &Meta) -> Table {
    let mut t = CsvTable::new(&meta.line(), &["t", "state", "mass"]);
    for (k, sigma) in sigmas.iter().enumerate() {
        for s in 0..sigma.space().len() {
            t.row([(k + 1).to_string(), sigma.space().label(s).to_string(), f(*sigma.weight(s))]);
        }
    }
    t.finish("trajectory.csv")
}

/// `ng-solve`: profile, per-period gaps and the equilibrium trajectory.
pub fn ng_solve(loaded: &LoadedGame, tol: f64) -> RunResult<(Vec<Table>, bool)> {
    let game = finite_game(loaded)?;
    let sol = solve_ng(game, &loaded.initial, tol)?;
    let meta = Meta::new("ng-solve", &[])
        .with("tol", f(tol))
        .with("converged", sol.converged)
        .with("sweeps", sol.iterations);
    let mut gaps = CsvTable::new(&meta.line(), &["t", "gap", "pointwise"]);
    for (k, (g, p)) in sol.report.gaps.iter().zip(&sol.report.pointwise).enumerate() {
        gaps.row([(k + 1).to_string(), f(*g), f(*p)]);
    }
    Ok((
        vec![
            profile_table(game, &sol.profile, &meta),
            gaps.finish("gaps.csv"),
            trajectory_table(sol.trajectory.sigmas(), &meta),
        ],
        sol.converged,
    ))
}

/// Reads a profile table written by [`profile_table`].
pub fn parse_profile(game: &GameSpec<f64>, text: &str) -> RunResult<PolicyProfile> {
    let sp = &game.spaces;
    let mut periods = vec![Policy::constant(sp.states.len(), sp.preshocks.len(), 0); game.horizon];
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut seen = vec![false; game.horizon * sp.states.len() * sp.preshocks.len()];
    for (k, rec) in reader.records().enumerate() {
        let line = k + 2;
        let rec = rec.map_err(|e| RunError::Invalid(format!("profile line {line}: {e}")))?;
        if rec.len() != 4 {
            return Err(RunError::Invalid(format!("profile line {line}: expected 4 columns")));
        }
        let bad = |what: &str| RunError::Invalid(format!("profile line {line}: unknown {what}"));
        let t: usize = rec[0].parse().map_err(|_| bad("period"))?;
        if t == 0 || t > game.horizon {
            return Err(bad("period"));
        }
        let s = sp.states.index_of(&rec[1]).ok_or_else(|| bad("state"))?;
        let g = sp.preshocks.index_of(&rec[2]).ok_or_else(|| bad("pre-action shock"))?;
        let x = sp.actions.index_of(&rec[3]).ok_or_else(|| bad("action"))?;
        periods[t - 1].set(s, g, x);
        seen[((t - 1) * sp.states.len() + s) * sp.preshocks.len() + g] = true;
    }
    if seen.iter().any(|v| !v) {
        return Err(RunError::Invalid("profile does not cover every (t, state, preshock)".into()));
    }
    Ok(PolicyProfile::new(periods))
}

fn profile_or_solve(game: &GameSpec<f64>, initial: &Measure<f64>, profile: Option<&Path>, tol: f64) -> RunResult<PolicyProfile> {
    match profile {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| RunError::Invalid(format!("{}: {e}", p.display())))?;
            parse_profile(game, &text)
        }
        None => Ok(require_ng(game, initial, tol)?.profile),
    }
}

/// `ng-evolve`: the nonatomic trajectory under a profile.
pub fn ng_evolve(loaded: &LoadedGame, profile: Option<&Path>, tol: f64) -> RunResult<Vec<Table>> {
    let game = finite_game(loaded)?;
    let profile = profile_or_solve(game, &loaded.initial, profile, tol)?;
    let traj = propagate(game, &loaded.initial, &profile)?;
    Ok(vec![trajectory_table(traj.sigmas(), &Meta::new("ng-evolve", &[]))])
}

/// `ng-value`: `v(t, s)` and `u_t` along the profile's trajectory.
pub fn ng_value(loaded: &LoadedGame, profile: Option<&Path>, tol: f64) -> RunResult<Vec<Table>> {
    let game = finite_game(loaded)?;
    let profile = profile_or_solve(game, &loaded.initial, profile, tol)?;
    let traj = propagate(game, &loaded.initial, &profile)?;
    let values = value(game, &profile, &traj, None)?;
    let meta = Meta::new("ng-value", &[]);
    let mut v = CsvTable::new(&meta.line(), &["t", "state", "value"]);
    for t in 1..=game.horizon + 1 {
        for s in 0..game.spaces.states.len() {
            v.row([t.to_string(), game.spaces.states.label(s).to_string(), f(*values.v(t, s))]);
        }
    }
    let mut u = CsvTable::new(&meta.line(), &["t", "average_value"]);
    for t in 1..=game.horizon {
        u.row([t.to_string(), f(*values.u(t))]);
    }
    Ok(vec![v.finish("values.csv"), u.finish("average_values.csv")])
}

/// `finite-sim`: one rollout per seed from `n` i.i.d. draws of `σ_1`.
pub fn finite_sim(loaded: &LoadedGame, profile: Option<&Path>, n: usize, seeds: &[u64], tol: f64) -> RunResult<Vec<Table>> {
    let game = finite_game(loaded)?;
    let profile = profile_or_solve(game, &loaded.initial, profile, tol)?;
    let meta = Meta::new("finite-sim", seeds).with("n", n);
    let mut t = CsvTable::new(&meta.line(), &["seed", "t", "player", "state", "preshock", "postshock", "payoff"]);
    let labels = &game.spaces;
    for &seed in seeds {
        let mut rng = ngame::finite::stream_rng(seed, u64::MAX);
        let pop = PopulationState::sample(&loaded.initial, n, &mut rng)?;
        let rec = rollout(game, &pop, &profile, seed, 0)?;
        for (k, p) in rec.periods.iter().enumerate() {
            for m in 0..n {
                t.row([
                    seed.to_string(),
                    (k + 1).to_string(),
                    m.to_string(),
                    labels.states.label(p.states[m]).to_string(),
                    labels.preshocks.label(p.preshocks[m]).to_string(),
                    labels.postshocks.label(p.postshocks[m]).to_string(),
                    f(p.payoffs[m]),
                ]);
            }
        }
        for (m, &s) in rec.terminal.iter().enumerate() {
            t.row([
                seed.to_string(),
                (game.horizon + 1).to_string(),
                m.to_string(),
                labels.states.label(s).to_string(),
                String::new(),
                String::new(),
                String::new(),
            ]);
        }
    }
    Ok(vec![t.finish("rollouts.csv")])
}

/// `env-converge`: `ρ_S(ε(s_{t'}), σ_{t'})` per `n`, seed and period.
pub fn env_converge(loaded: &LoadedGame, ns: &[usize], seeds: &[u64], period: usize, tol: f64) -> RunResult<Vec<Table>> {
    let game = finite_game(loaded)?;
    let sol = require_ng(game, &loaded.initial, tol)?;
    if period == 0 || period > game.horizon {
        return Err(RunError::Invalid(format!("period {period} is outside 1..={}", game.horizon)));
    }
    let sigma_t = sol.trajectory.sigma(period).clone();
    let rows = env_convergence_experiment(game, period, &sigma_t, &sol.profile, ns, seeds)?;
    let meta = Meta::new("env-converge", seeds).with("tol", f(tol));
    let mut t = CsvTable::new(&meta.line(), &["n", "seed", "t", "distance"]);
    for r in rows {
        t.row([r.n.to_string(), r.seed.to_string(), r.period.to_string(), f(r.distance)]);
    }
    Ok(vec![t.finish("distances.csv")])
}

/// Seed for the pilot streams of the refined challenger; disjoint from the
/// evaluation seed so the reported gap stays unbiased.
pub fn pilot_seed(seed: u64) -> u64 {
    seed ^ 0x9e37_79b9_7f4a_7c15
}

#[derive(Debug, Clone)]
pub struct RegretSettings {
    pub ns: Vec<usize>,
    pub seeds: Vec<u64>,
    pub period: usize,
    pub replications: usize,
    pub challenger: ChallengerKind,
    pub pilot: usize,
    pub rolled: bool,
    pub tol: f64,
}

const GAP_COLUMNS: [&str; 9] = ["n", "seed", "t", "gap", "std_error", "ci_low", "ci_high", "active", "replications"];

/// `regret`: CRN gap of a one-period deviation from the NG equilibrium.
pub fn regret(loaded: &LoadedGame, s: &RegretSettings) -> RunResult<Vec<Table>> {
    let game = finite_game(loaded)?;
    let sol = require_ng(game, &loaded.initial, s.tol)?;
    if s.period == 0 || s.period > game.horizon {
        return Err(RunError::Invalid(format!("period {} is outside 1..={}", s.period, game.horizon)));
    }
    let law = if s.rolled {
        InitialLaw::Rolled(loaded.initial.clone())
    } else {
        InitialLaw::Iid(sol.trajectory.sigma(s.period).clone())
    };
    let br = best_deviation(game, s.period, &sol.profile, &sol.trajectory)?.policy;
    let meta = Meta::new("regret", &s.seeds)
        .with("R", s.replications)
        .with("challenger", challenger_name(s.challenger))
        .with("law", if s.rolled { "rolled" } else { "iid" })
        .with("total_bound", f(game.total_bound()));
    let mut t = CsvTable::new(&meta.line(), &GAP_COLUMNS);
    for &n in &s.ns {
        for &seed in &s.seeds {
            let y = match s.challenger {
                ChallengerKind::BestResponse => br.clone(),
                ChallengerKind::Refined => {
                    refine_challenger(game, &sol.profile, &law, n, s.period, s.pilot, pilot_seed(seed))?
                }
            };
            let e = regret_gap(game, &sol.profile, &law, n, s.period, &y, s.replications, seed)?;
            let (lo, hi) = e.gap.ci95();
            t.row([
                n.to_string(),
                seed.to_string(),
                s.period.to_string(),
                f(e.gap.mean),
                f(e.gap.std_error),
                f(lo),
                f(hi),
                e.active.to_string(),
                e.gap.replications.to_string(),
            ]);
        }
    }
    Ok(vec![t.finish("regret.csv")])
}

fn challenger_name(c: ChallengerKind) -> &'static str {
    match c {
        ChallengerKind::BestResponse => "best-response",
        ChallengerKind::Refined => "refined",
    }
}

/// Solves for a stationary equilibrium starting from the spec's guess.
pub fn solve_stationary(spec: &StationarySpec<f64>, tol: f64) -> RunResult<StationarySolution<f64>> {
    let opts = SeOptions {
        tol,
        ..SeOptions::default()
    };
    Ok(solve_se(spec, &opts)?)
}

/// `stationary-solve`: policy, `σ*`, `v_∞` and a summary row.
pub fn stationary_solve(loaded: &LoadedGame, tol: f64) -> RunResult<(Vec<Table>, bool)> {
    let spec = stationary_game(loaded)?;
    let sol = solve_stationary(spec, tol)?;
    let sp = &spec.spaces;
    let meta = Meta::new("stationary-solve", &[])
        .with("tol", f(tol))
        .with("alpha", f(spec.alpha))
        .with("converged", sol.converged);
    let mut policy = CsvTable::new(&meta.line(), &["state", "preshock", "action"]);
    for s in 0..sp.states.len() {
        for g in 0..sp.preshocks.len() {
            policy.row([
                sp.states.label(s).to_string(),
                sp.preshocks.label(g).to_string(),
                sp.actions.label(sol.policy.action(s, g)).to_string(),
            ]);
        }
    }
    let mut sigma = CsvTable::new(&meta.line(), &["state", "mass"]);
    let mut value = CsvTable::new(&meta.line(), &["state", "value"]);
    for s in 0..sp.states.len() {
        sigma.row([sp.states.label(s).to_string(), f(*sol.sigma_star.weight(s))]);
        value.row([sp.states.label(s).to_string(), f(sol.value[s])]);
    }
    let mut summary = CsvTable::new(&meta.line(), &["residual", "gap", "iterations", "converged"]);
    summary.row([f(sol.residual), f(sol.gap), sol.iterations.to_string(), sol.converged.to_string()]);
    Ok((
        vec![
            policy.finish("policy.csv"),
            sigma.finish("sigma.csv"),
            value.finish("value.csv"),
            summary.finish("summary.csv"),
        ],
        sol.converged,
    ))
}

/// `stationary-regret`: finite-n gaps at the truncation depth for `ε`.
pub fn stationary_regret(loaded: &LoadedGame, s: &RegretSettings, epsilon: f64) -> RunResult<Vec<Table>> {
    let spec = stationary_game(loaded)?;
    let sol = solve_stationary(spec, s.tol)?;
    if !sol.converged {
        return Err(RunError::NonConvergence(format!(
            "stationary solver stopped with residual {} and gap {}",
            sol.residual, sol.gap
        )));
    }
    let depth = truncation_depth(spec.alpha, spec.payoff_bound, epsilon)?;
    let meta = Meta::new("stationary-regret", &s.seeds)
        .with("R", s.replications)
        .with("epsilon", f(epsilon))
        .with("depth", depth)
        .with("challenger", challenger_name(s.challenger));
    let mut t = CsvTable::new(&meta.line(), &GAP_COLUMNS);
    let br = check_se(spec, &sol.policy, &sol.sigma_star, &s.tol)?.best_response;
    for &n in &s.ns {
        for &seed in &s.seeds {
            let y = match s.challenger {
                ChallengerKind::BestResponse => br.clone(),
                ChallengerKind::Refined => {
                    let game = spec.lift(depth)?;
                    let profile = PolicyProfile::repeated(sol.policy.clone(), depth);
                    let law = InitialLaw::Iid(sol.sigma_star.clone());
                    refine_challenger(&game, &profile, &law, n, 1, s.pilot, pilot_seed(seed))?
                }
            };
            let rows = stationary_regret_experiment(spec, &sol.policy, &sol.sigma_star, &y, &[n], s.replications, epsilon, &[seed])?;
            for r in rows {
                let (lo, hi) = r.estimate.gap.ci95();
                t.row([
                    n.to_string(),
                    seed.to_string(),
                    "1".to_string(),
                    f(r.estimate.gap.mean),
                    f(r.estimate.gap.std_error),
                    f(lo),
                    f(hi),
                    r.estimate.active.to_string(),
                    r.estimate.gap.replications.to_string(),
                ]);
            }
        }
    }
    Ok(vec![t.finish("stationary_regret.csv")])
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes through a temporary file in the same directory and renames it
/// into place.
pub fn write_atomic(dir: &Path, name: &str, contents: &[u8]) -> anyhow::Result<PathBuf> {
    use std::io::Write;
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.flush()?;
    let path = dir.join(name);
    tmp.persist(&path).map_err(|e| e.error)?;
    Ok(path)
}

pub fn write_tables(dir: &Path, tables: &[Table]) -> anyhow::Result<()> {
    for t in tables {
        write_atomic(dir, &t.name, t.contents.as_bytes())?;
    }
    Ok(())
}

/// Everything needed to reproduce an experiment's files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub config: ExperimentConfig,
    pub spec_sha256: String,
    pub files: BTreeMap<String, String>,
}

pub const MANIFEST_NAME: &str = "manifest.json";

fn settings(config: &ExperimentConfig) -> RegretSettings {
    RegretSettings {
        ns: config.n.clone(),
        seeds: config.seeds.clone(),
        period: config.period,
        replications: config.replications,
        challenger: config.challenger,
        pilot: config.pilot,
        rolled: config.rolled,
        tol: config.tol,
    }
}

/// Computes the tables for a validated config without writing anything.
pub fn experiment_tables(config: &ExperimentConfig, loaded: &LoadedGame) -> RunResult<Vec<Table>> {
    match config.kind {
        ExperimentKind::EnvConverge => env_converge(loaded, &config.n, &config.seeds, config.period, config.tol),
        ExperimentKind::Regret => regret(loaded, &settings(config)),
        ExperimentKind::StationaryRegret => stationary_regret(loaded, &settings(config), config.epsilon),
        ExperimentKind::Solve => {
            let (tables, converged) = match loaded.game {
                Game::Finite(_) => ng_solve(loaded, config.tol)?,
                Game::Stationary(_) => stationary_solve(loaded, config.tol)?,
            };
            if !converged {
                return Err(RunError::NonConvergence("solver did not reach the tolerance".into()));
            }
            Ok(tables)
        }
    }
}

/// Runs a config, writes its tables and `manifest.json` to the output directory.
pub fn run_experiment(config: &ExperimentConfig) -> RunResult<Manifest> {
    let spec_bytes = std::fs::read(&config.spec)
        .map_err(|e| RunError::Invalid(format!("spec {}: {e}", config.spec.display())))?;
    let loaded = load_game(&config.spec)?;
    let tables = experiment_tables(config, &loaded)?;
    write_tables(&config.output, &tables)?;
    let manifest = Manifest {
        tool: "ngame".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config: config.clone(),
        spec_sha256: sha256_hex(&spec_bytes),
        files: tables
            .iter()
            .map(|t| (t.name.clone(), sha256_hex(t.contents.as_bytes())))
            .collect(),
    };
    let json = serde_json::to_string_pretty(&manifest).map_err(anyhow::Error::from)?;
    write_atomic(&config.output, MANIFEST_NAME, json.as_bytes())?;
    Ok(manifest)
}

pub fn run_config_file(path: &Path) -> RunResult<Manifest> {
    run_experiment(&load_config(path)?)
}

/// Re-runs the experiment recorded in a manifest into `output` and checks
/// that every file hashes to the recorded digest.
pub fn replay(manifest_path: &Path, output: &Path) -> RunResult<Manifest> {
    let text = std::fs::read_to_string(manifest_path)
        .map_err(|e| RunError::Invalid(format!("{}: {e}", manifest_path.display())))?;
    let recorded: Manifest =
        serde_json::from_str(&text).map_err(|e| RunError::Invalid(format!("{}: {e}", manifest_path.display())))?;
    let spec_bytes = std::fs::read(&recorded.config.spec)
        .map_err(|e| RunError::Invalid(format!("spec {}: {e}", recorded.config.spec.display())))?;
    if sha256_hex(&spec_bytes) != recorded.spec_sha256 {
        return Err(RunError::Invalid("spec file changed since the manifest was written".into()));
    }
    let mut config = recorded.config.clone();
    config.output = output.to_path_buf();
    let fresh = run_experiment(&config)?;
    if fresh.files != recorded.files {
        let differing: Vec<&String> = recorded
            .files
            .iter()
            .filter(|(k, v)| fresh.files.get(*k) != Some(v))
            .map(|(k, _)| k)
            .collect();
        return Err(RunError::Other(anyhow::anyhow!("replay differs in {differing:?}")));
    }
    Ok(fresh)
}
