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
//! `ngame` command-line interface.
//!
//! Exit codes: 0 success, 2 invalid input or config, 3 non-convergence.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ngame::measure::{FiniteSpace, Measure};
use ngame_experiments::config::{load_game, ChallengerKind, DEFAULT_REPLICATIONS, DEFAULT_TOL};
use ngame_experiments::run::{self, RegretSettings, RunError, RunResult, Table};

#[derive(Parser)]
#[command(name = "ngame", version, about = "Nonatomic and n-player Markov games on finite spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GameArgs {
    /// Game spec file (TOML).
    #[arg(long)]
    spec: PathBuf,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
}

#[derive(Args)]
struct ProfileArg {
    /// Profile CSV as written by ng-solve; the NG equilibrium is solved when absent.
    #[arg(long)]
    profile: Option<PathBuf>,
}

#[derive(Args)]
struct SampleArgs {
    /// Population sizes, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    n: Vec<usize>,
    /// Seeds, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "0")]
    seeds: Vec<u64>,
}

#[derive(Args)]
struct RegretArgs {
    #[arg(long = "replications", short = 'R', default_value_t = DEFAULT_REPLICATIONS)]
    replications: usize,
    /// best-response (nonatomic) or refined (finite-n, from pilot streams).
    #[arg(long, default_value = "best-response", value_parser = parse_challenger)]
    challenger: ChallengerKind,
    /// Pilot replications for the refined challenger.
    #[arg(long, default_value_t = DEFAULT_REPLICATIONS)]
    pilot: usize,
}

fn parse_challenger(s: &str) -> Result<ChallengerKind, String> {
    match s {
        "best-response" => Ok(ChallengerKind::BestResponse),
        "refined" => Ok(ChallengerKind::Refined),
        _ => Err(format!("unknown challenger {s:?}")),
    }
}

#[derive(Subcommand)]
enum Command {
    /// Solve the nonatomic game by iterated best response.
    NgSolve(GameArgs),
    /// Nonatomic environment trajectory (columns t, state, mass).
    NgEvolve {
        #[command(flatten)]
        game: GameArgs,
        #[command(flatten)]
        profile: ProfileArg,
    },
    /// Nonatomic value table along the trajectory.
    NgValue {
        #[command(flatten)]
        game: GameArgs,
        #[command(flatten)]
        profile: ProfileArg,
    },
    /// n-player rollouts, one per seed.
    FiniteSim {
        #[command(flatten)]
        game: GameArgs,
        #[command(flatten)]
        profile: ProfileArg,
        #[arg(long)]
        n: usize,
        #[arg(long, value_delimiter = ',', default_value = "0")]
        seeds: Vec<u64>,
    },
    /// Prohorov distance between empirical and nonatomic environments.
    EnvConverge {
        #[command(flatten)]
        game: GameArgs,
        #[command(flatten)]
        sample: SampleArgs,
        /// Starting period.
        #[arg(long, default_value_t = 1)]
        period: usize,
    },
    /// Finite-n deviation gap of the NG equilibrium.
    Regret {
        #[command(flatten)]
        game: GameArgs,
        #[command(flatten)]
        sample: SampleArgs,
        #[command(flatten)]
        regret: RegretArgs,
        #[arg(long, default_value_t = 1)]
        period: usize,
        /// Roll populations forward from sigma_1 instead of sampling sigma_t.
        #[arg(long)]
        rolled: bool,
    },
    /// Stationary equilibrium: policy, invariant environment, values.
    StationarySolve(GameArgs),
    /// Finite-n gap of the stationary equilibrium. The horizon is truncated
    /// at ln(6 psi/(eps (1 - alpha)))/ln(1/alpha) + 1 periods, so runtime
    /// grows like ln(1/eps)/ln(1/alpha).
    StationaryRegret {
        #[command(flatten)]
        game: GameArgs,
        #[command(flatten)]
        sample: SampleArgs,
        #[command(flatten)]
        regret: RegretArgs,
        #[arg(long, default_value_t = 0.05)]
        epsilon: f64,
    },
    /// Prohorov distance between two measures on a space file.
    Prohorov {
        #[arg(long)]
        space: PathBuf,
        mu: PathBuf,
        nu: PathBuf,
    },
    /// Run an experiment config and write its manifest.
    Run { config: PathBuf },
    /// Re-run a manifest into a directory and verify the digests.
    Replay {
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn read(path: &Path) -> RunResult<String> {
    std::fs::read_to_string(path).map_err(|e| RunError::Invalid(format!("{}: {e}", path.display())))
}

fn emit(out: &Path, tables: &[Table]) -> RunResult<()> {
    run::write_tables(out, tables)?;
    for t in tables {
        println!("{}", out.join(&t.name).display());
    }
    Ok(())
}

fn settings(sample: SampleArgs, regret: RegretArgs, period: usize, rolled: bool, tol: f64) -> RegretSettings {
    RegretSettings {
        ns: sample.n,
        seeds: sample.seeds,
        period,
        replications: regret.replications,
        challenger: regret.challenger,
        pilot: regret.pilot,
        rolled,
        tol,
    }
}

fn check_sample(sample: &SampleArgs) -> RunResult<()> {
    if let Some(n) = sample.n.iter().find(|&&n| n < 2) {
        return Err(RunError::Invalid(format!("population sizes must be at least 2, got {n}")));
    }
    let mut seeds = sample.seeds.clone();
    seeds.sort_unstable();
    if seeds.windows(2).any(|w| w[0] == w[1]) {
        return Err(RunError::Invalid("seeds must be distinct".into()));
    }
    Ok(())
}

fn non_converged(tables: Vec<Table>, converged: bool, out: &Path) -> RunResult<()> {
    emit(out, &tables)?;
    if converged {
        Ok(())
    } else {
        Err(RunError::NonConvergence("solver did not reach the tolerance; outputs hold the last iterate".into()))
    }
}

fn execute(cli: Cli) -> RunResult<()> {
    match cli.command {
        Command::NgSolve(g) => {
            let (tables, ok) = run::ng_solve(&load_game(&g.spec)?, g.tol)?;
            non_converged(tables, ok, &g.out)
        }
        Command::NgEvolve { game, profile } => {
            let tables = run::ng_evolve(&load_game(&game.spec)?, profile.profile.as_deref(), game.tol)?;
            emit(&game.out, &tables)
        }
        Command::NgValue { game, profile } => {
            let tables = run::ng_value(&load_game(&game.spec)?, profile.profile.as_deref(), game.tol)?;
            emit(&game.out, &tables)
        }
        Command::FiniteSim { game, profile, n, seeds } => {
            check_sample(&SampleArgs { n: vec![n], seeds: seeds.clone() })?;
            let tables = run::finite_sim(&load_game(&game.spec)?, profile.profile.as_deref(), n, &seeds, game.tol)?;
            emit(&game.out, &tables)
        }
        Command::EnvConverge { game, sample, period } => {
            check_sample(&sample)?;
            let tables = run::env_converge(&load_game(&game.spec)?, &sample.n, &sample.seeds, period, game.tol)?;
            emit(&game.out, &tables)
        }
        Command::Regret { game, sample, regret, period, rolled } => {
            check_sample(&sample)?;
            let loaded = load_game(&game.spec)?;
            let tables = run::regret(&loaded, &settings(sample, regret, period, rolled, game.tol))?;
            emit(&game.out, &tables)
        }
        Command::StationarySolve(g) => {
            let (tables, ok) = run::stationary_solve(&load_game(&g.spec)?, g.tol)?;
            non_converged(tables, ok, &g.out)
        }
        Command::StationaryRegret { game, sample, regret, epsilon } => {
            check_sample(&sample)?;
            let loaded = load_game(&game.spec)?;
            let tables = run::stationary_regret(&loaded, &settings(sample, regret, 1, false, game.tol), epsilon)?;
            emit(&game.out, &tables)
        }
        Command::Prohorov { space, mu, nu } => {
            let space = std::sync::Arc::new(FiniteSpace::<f64>::parse_table(&read(&space)?)?);
            let mu = Measure::parse_table(space.clone(), &read(&mu)?)?;
            let nu = Measure::parse_table(space, &read(&nu)?)?;
            println!("{}", mu.prohorov(&nu)?);
            Ok(())
        }
        Command::Run { config } => {
            let m = run::run_config_file(&config)?;
            println!("{}", m.config.output.join(run::MANIFEST_NAME).display());
            Ok(())
        }
        Command::Replay { manifest, out } => {
            run::replay(&manifest, &out)?;
            println!("replay matches {}", manifest.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
