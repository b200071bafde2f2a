use std::io::Write;
use std::sync::Arc;

use serde_json::json;

use ggb_core::arena::{run_ladder, Entrant, LadderConfig};

use crate::batch;
use crate::config::ConfigFile;
use crate::error::{usage, CliError};
use crate::estimate::{external_config, open_log, parse_agents};
use crate::{LadderArgs, VERSION};

pub fn run(a: LadderArgs, cfg: &ConfigFile) -> Result<(), CliError> {
    let specs = parse_agents(cfg.pick_all(a.agents, "agent"))?;
    if specs.len() < 2 {
        return Err(usage("a ladder needs at least two --agent specs"));
    }
    let seed = cfg.pick(a.seed, "seed", 0u64)?;
    let path = cfg
        .pick_opt(a.batch, "batch")?
        .ok_or_else(|| usage("give --batch"))?;
    let defaults = LadderConfig::default();
    let lc = LadderConfig {
        rounds: cfg.pick(a.rounds, "rounds", defaults.rounds)?,
        k_factor: cfg.pick(a.k_factor, "k-factor", defaults.k_factor)?,
        budget: cfg.pick(a.budget, "budget", defaults.budget)?,
        master_seed: seed,
        ..defaults
    };
    if lc.rounds == 0 || lc.budget == 0 {
        return Err(usage("rounds and budget must be positive"));
    }
    let ext = external_config(cfg.pick_opt(a.ceiling_ms, "ceiling-ms")?);
    let out = cfg.pick_opt(a.out, "out")?;

    let b = batch::load(&path, seed)?;
    let games: Vec<_> = b
        .games
        .iter()
        .filter(|g| g.desc.players == 2)
        .map(|g| (g.id.clone(), Arc::clone(&g.desc)))
        .collect();
    if games.is_empty() {
        return Err(usage(format!(
            "{}: no two-player games",
            b.source.display()
        )));
    }
    let entrants: Vec<Entrant> = specs
        .iter()
        .map(|s| {
            let (s, ext) = (s.clone(), ext.clone());
            Entrant {
                id: s.to_string(),
                make: Box::new(move || s.build(&ext)),
            }
        })
        .collect();

    let header = json!({
        "version": VERSION,
        "command": "ladder",
        "agents": specs.iter().map(ToString::to_string).collect::<Vec<_>>(),
        "batch": path.display().to_string(),
        "games": games.iter().map(|(id, _)| id).collect::<Vec<_>>(),
        "ladder": lc,
    });
    let mut log = open_log(out.as_ref(), &header)?;
    let ladder = run_ladder(&entrants, &games, &lc);
    for m in &ladder.matches {
        log.record("match", m)?;
    }
    let ranking = ladder.ranking();
    log.record("ranking", &json!({ "ratings": ranking }))?;
    log.into_inner().flush()?;

    println!("{} matches on {} games", ladder.matches.len(), games.len());
    println!("{:>4} {:>9} {:>6}  agent", "rank", "elo", "games");
    for (i, r) in ranking.iter().enumerate() {
        println!(
            "{:>4} {:>9.1} {:>6}  {}",
            i + 1,
            r.elo,
            r.games_played,
            r.agent
        );
    }
    let forfeits = ladder
        .matches
        .iter()
        .filter(|m| m.result.forfeit.is_some())
        .count();
    if forfeits > 0 && specs.iter().any(|s| s.is_external()) {
        return Err(CliError::Protocol(format!(
            "{forfeits} matches ended in a forfeit"
        )));
    }
    Ok(())
}
