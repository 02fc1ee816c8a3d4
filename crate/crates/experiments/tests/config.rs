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
use std::path::Path;

use ngame_experiments::config::*;

fn parse(text: &str) -> Result<ExperimentConfig, ConfigError> {
    parse_config(text, "exp.toml", Path::new("/base"))
}

#[test]
fn defaults_fill_optional_fields() {
    let c = parse("spec = \"game.toml\"\nkind = \"regret\"\nn = [8, 16]\n").unwrap();
    assert_eq!(c.replications, DEFAULT_REPLICATIONS);
    assert_eq!(c.replications, 100);
    assert_eq!(c.tol, 1e-6);
    assert_eq!(c.seeds, vec![0]);
    assert_eq!(c.period, 1);
    assert_eq!(c.epsilon, 0.05);
    assert_eq!(c.pilot, 100);
    assert_eq!(c.challenger, ChallengerKind::BestResponse);
    assert!(!c.rolled);
    assert_eq!(c.spec, Path::new("/base/game.toml"));
    assert_eq!(c.output, Path::new("/base/out"));
    assert_eq!(c.n, vec![8, 16]);
}

#[test]
fn small_population_is_reported_with_its_line() {
    let e = parse("spec = \"g.toml\"\nkind = \"regret\"\n\nn = [1]\n").unwrap_err();
    assert_eq!(e.line, Some(4));
    assert!(e.message.contains("at least 2"), "{e}");
    assert!(e.to_string().starts_with("exp.toml:4:"), "{e}");
}

#[test]
fn missing_spec_names_the_field() {
    let e = parse("kind = \"regret\"\nn = [4]\n").unwrap_err();
    assert!(e.message.contains("spec"), "{e}");
}

#[test]
fn other_problems_are_located() {
    let e = parse("spec = \"g.toml\"\nkind = \"regret\"\nn = [4]\nseeds = [3, 3]\n").unwrap_err();
    assert_eq!(e.line, Some(4));
    let e = parse("spec = \"g.toml\"\nkind = \"regret\"\nn = [4]\ntol = -1.0\n").unwrap_err();
    assert_eq!(e.line, Some(4));
    let e = parse("spec = \"g.toml\"\nkind = \"regret\"\nn = [4]\nbogus = 1\n").unwrap_err();
    assert!(e.message.contains("bogus"), "{e}");
    assert!(e.line.is_some());
    let e = parse("spec = \"g.toml\"\nkind = \"sideways\"\nn = [4]\n").unwrap_err();
    assert_eq!(e.line, Some(2));
    assert!(parse("spec = \"g.toml\"\nkind = \"regret\"\n").is_err());
    assert!(parse("spec = \"g.toml\"\nkind = \"solve\"\n").unwrap().n.is_empty());
}

#[test]
fn game_files_need_exactly_one_section() {
    assert!(parse_game("stationary = false\n", "g").is_err());
    let both = "[pricing]\ncapacity = 2\nprices = [1.0]\n[table]\nstates = [\"a\"]\nactions = [\"x\"]\npreshock_weights = [1.0]\npostshock_weights = [1.0]\npayoff = [[0.0]]\ntransition = [[0]]\n";
    assert!(parse_game(both, "g").is_err());
}

#[test]
fn table_game_loads() {
    let text = "horizon = 3\ninitial = [0.25, 0.75]\n[table]\nstates = [\"lo\", \"hi\"]\nactions = [\"a\", \"b\"]\npreshock_weights = [1.0]\npostshock_weights = [0.5, 0.5]\npayoff = [[0.0, 1.0, 2.0, -3.0]]\ntransition = [[0, 1, 0, 0, 1, 1, 0, 1]]\n";
    let g = parse_game(text, "g").unwrap();
    let Game::Finite(spec) = g.game else { panic!("expected a finite game") };
    assert_eq!(spec.horizon, 3);
    assert_eq!(spec.payoff_bounds, vec![3.0; 3]);
    assert_eq!(g.initial.weights(), &[0.25, 0.75]);
    let bad = text.replace("[0.25, 0.75]", "[0.5, 0.6]");
    let Err(e) = parse_game(&bad, "g") else { panic!("bad initial law accepted") };
    assert!(e.message.contains("initial"), "{e}");
    let stationary = text.replace("horizon = 3", "stationary = true");
    assert!(parse_game(&stationary, "g").is_err());
    let stationary = text.replace("horizon = 3", "stationary = true\nalpha = 0.5");
    assert!(matches!(parse_game(&stationary, "g").unwrap().game, Game::Stationary(_)));
}

#[test]
fn shipped_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    for name in ["env_converge.toml", "regret.toml", "stationary_regret.toml"] {
        let c = load_config(&dir.join(name)).unwrap();
        load_game(&c.spec).unwrap();
    }
    for name in ["pricing.toml", "pricing_lockin.toml"] {
        load_game(&dir.join(name)).unwrap();
    }
}
