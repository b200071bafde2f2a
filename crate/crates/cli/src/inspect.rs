use std::io::{self, BufRead, Write};
use std::path::Path;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use ggb_core::engine::{Action, GameState, Player, TrajectoryStep};
use ggb_core::gdl::{self, compute_bounds, validate, GameDescription};
use ggb_core::measure::{complexity, estimate_tau, RunLog};
use ggb_core::seed::{derive_seed, tags};

use crate::batch::{self, GAMES_FILE};
use crate::error::{usage, CliError};
use crate::{InspectArgs, VERSION};

#[derive(Serialize, Deserialize)]
struct TraceEnd {
    score: i32,
    ticks: u16,
    terminal: String,
}

fn load_game(path: &Path, index: usize) -> Result<Arc<GameDescription>, CliError> {
    let file = if path.is_dir() {
        path.join(GAMES_FILE)
    } else {
        path.to_path_buf()
    };
    let games = batch::parse_file(&file)?;
    let n = games.len();
    games.into_iter().nth(index).map(Arc::new).ok_or_else(|| {
        usage(format!(
            "{}: index {index} out of range ({n} games)",
            file.display()
        ))
    })
}

pub fn run(a: InspectArgs) -> Result<(), CliError> {
    let desc = load_game(&a.game, a.index)?;
    if a.play {
        return play(&desc, a.seed, io::stdin().lock(), &mut io::stdout().lock());
    }
    if let Some(out) = &a.trace {
        return trace(&desc, a.seed, out);
    }
    if let Some(log) = &a.replay {
        return replay(&desc, log);
    }
    show(&desc);
    Ok(())
}

fn show(desc: &Arc<GameDescription>) {
    println!("{}", gdl::serialize(desc));
    let report = validate(desc);
    for issue in &report.issues {
        println!(
            "{:?} {} at {}: {}",
            issue.severity, issue.code, issue.location, issue.message
        );
    }
    let b = compute_bounds(desc);
    let p = complexity(desc, estimate_tau(desc, 32, 0));
    println!(
        "players {}  horizon {}  score range [{}, {}]",
        desc.players, desc.horizon, b.r_min, b.r_max
    );
    println!(
        "l = {:.3} bits  tau = {:.2}  K = {:.3} bits",
        desc.desc_len_bits, p.tau, p.k_bits
    );
    println!("{}", GameState::new(Arc::clone(desc), 0).render());
}

fn key_action(line: &str) -> Option<Action> {
    let mut words = line.split_whitespace();
    Some(match words.next()? {
        "w" => Action::Up,
        "s" => Action::Down,
        "a" => Action::Left,
        "d" => Action::Right,
        "x" => Action::Stay,
        "p" => Action::Place {
            x: words.next()?.parse().ok()?,
            y: words.next()?.parse().ok()?,
        },
        other => other.parse().ok()?,
    })
}

/// Steps player one from keystroke lines until the episode ends or `q`.
pub fn play(
    desc: &Arc<GameDescription>,
    seed: u64,
    input: impl BufRead,
    out: &mut impl Write,
) -> Result<(), CliError> {
    let mut state = GameState::new(Arc::clone(desc), seed);
    writeln!(out, "{}", state.render())?;
    for line in input.lines() {
        let line = line?;
        if line.trim() == "q" {
            break;
        }
        let legal = state.legal_actions(Player::One);
        let Some(action) = key_action(&line).filter(|a| legal.contains(a)) else {
            let names: Vec<String> = legal.iter().map(ToString::to_string).collect();
            writeln!(out, "legal: {}", names.join(" "))?;
            continue;
        };
        let step = state
            .step(action)
            .map_err(|e| CliError::Internal(e.to_string()))?;
        writeln!(
            out,
            "tick {} reward {:+} score {}",
            state.tick(),
            step.reward_delta,
            state.score()
        )?;
        writeln!(out, "{}", state.render())?;
        if let Some(t) = step.terminal {
            writeln!(out, "episode over: {t:?}")?;
            break;
        }
    }
    Ok(())
}

fn trace(desc: &Arc<GameDescription>, seed: u64, path: &Path) -> Result<(), CliError> {
    let header = json!({
        "version": VERSION,
        "command": "inspect",
        "game": gdl::serialize(desc),
        "seed": seed,
    });
    let file =
        std::fs::File::create(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let mut log = RunLog::new(io::BufWriter::new(file), &header)?;
    let mut state = GameState::new(Arc::clone(desc), seed);
    let mut chooser = ChaCha8Rng::seed_from_u64(derive_seed(seed, tags::ROLLOUT, 0));
    let terminal = loop {
        let legal = state.legal_actions(Player::One);
        let action = if legal.is_empty() {
            Action::Pass
        } else {
            legal[chooser.random_range(0..legal.len())]
        };
        let step = state
            .step(action)
            .map_err(|e| CliError::Internal(e.to_string()))?;
        log.record(
            "step",
            &TrajectoryStep {
                tick: state.tick(),
                action,
                observation: state.observe(Player::One),
                reward: step.reward_delta,
            },
        )?;
        if let Some(t) = step.terminal {
            break t;
        }
    };
    let end = TraceEnd {
        score: state.score(),
        ticks: state.tick(),
        terminal: format!("{terminal:?}"),
    };
    println!(
        "score {} after {} ticks ({})",
        end.score, end.ticks, end.terminal
    );
    log.summary(&end)?;
    Ok(())
}

fn replay(desc: &Arc<GameDescription>, path: &Path) -> Result<(), CliError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let mut seed = None;
    let mut steps = Vec::new();
    let mut end: Option<TraceEnd> = None;
    for (n, line) in text.lines().enumerate() {
        let bad = |e: serde_json::Error| usage(format!("{}:{}: {e}", path.display(), n + 1));
        let v: serde_json::Value = serde_json::from_str(line).map_err(bad)?;
        match v["record"].as_str() {
            Some("config") => seed = v["seed"].as_u64(),
            Some("step") => steps.push(serde_json::from_value::<TrajectoryStep>(v).map_err(bad)?),
            Some("summary") => end = Some(serde_json::from_value(v).map_err(bad)?),
            _ => {}
        }
    }
    let seed =
        seed.ok_or_else(|| usage(format!("{}: no config record with a seed", path.display())))?;
    let mut state = GameState::new(Arc::clone(desc), seed);
    for s in &steps {
        let step = state
            .step(s.action)
            .map_err(|e| CliError::Internal(format!("replay diverged at tick {}: {e}", s.tick)))?;
        println!(
            "tick {} {} reward {:+}",
            state.tick(),
            s.action,
            step.reward_delta
        );
        println!("{}", state.render());
        if step.reward_delta != s.reward
            || state.tick() != s.tick
            || state.observe(Player::One) != s.observation
        {
            return Err(CliError::Internal(format!(
                "replay diverged at tick {}: reward {} vs logged {}",
                s.tick, step.reward_delta, s.reward
            )));
        }
    }
    if let Some(end) = end {
        if end.score != state.score() {
            return Err(CliError::Internal(format!(
                "replay score {} differs from logged {}",
                state.score(),
                end.score
            )));
        }
    }
    println!("replayed {} steps, score {}", steps.len(), state.score());
    Ok(())
}
