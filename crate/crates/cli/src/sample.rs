use std::path::PathBuf;

use ggb_core::sampler::{sample_batch, FilterPolicy, GameMeta, Prior, SampleConfig};

use crate::batch::{self, BatchMeta};
use crate::config::ConfigFile;
use crate::error::{usage, CliError};
use crate::{SampleArgs, VERSION};

pub fn parse_prior(s: &str) -> Result<Prior, CliError> {
    match s {
        "length" => Ok(Prior::Length),
        "complexity" => Ok(Prior::Complexity),
        _ => Err(usage(format!("unknown prior `{s}` (length, complexity)"))),
    }
}

pub fn parse_players(p: Option<u8>) -> Result<Option<u8>, CliError> {
    match p {
        None | Some(1 | 2) => Ok(p),
        Some(n) => Err(usage(format!("players must be 1 or 2, got {n}"))),
    }
}

pub fn run(a: SampleArgs, cfg: &ConfigFile) -> Result<(), CliError> {
    let n = cfg.pick(a.n, "n", 100usize)?;
    let seed = cfg.pick(a.seed, "seed", 0u64)?;
    let filter: FilterPolicy = cfg
        .pick(a.filter, "filter", "keep-all".to_string())?
        .parse()
        .map_err(usage)?;
    let prior = parse_prior(&cfg.pick(a.prior, "prior", "length".to_string())?)?;
    let players = parse_players(cfg.pick_opt(a.players, "players")?)?;
    let out = cfg.pick(a.out, "out", PathBuf::from("batch"))?;
    if n == 0 {
        return Err(usage("n must be positive"));
    }
    let defaults = SampleConfig::default();
    let config = SampleConfig {
        filter,
        prior,
        players,
        tau_rollouts: cfg.pick(a.tau_rollouts, "tau-rollouts", defaults.tau_rollouts)?,
        ..defaults
    };
    let set = sample_batch(n, seed, &config).map_err(|e| CliError::Internal(e.to_string()))?;
    let meta = BatchMeta {
        version: VERSION.to_string(),
        seed,
        n,
        config,
        stats: set.stats.clone(),
        games: set.games.iter().map(GameMeta::of).collect(),
    };
    batch::write(&out, &set.games, &meta)?;
    let s = &set.stats;
    println!(
        "{n} games -> {} ({} draws: {} trivial, {} impossible, {} playable, {} flat, {} duplicates)",
        out.display(),
        s.draws,
        s.trivial,
        s.impossible,
        s.playable,
        s.flat,
        s.duplicates
    );
    Ok(())
}
