//! Batch directories: `games.gdl` (one game per line) and `meta.json`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use ggb_core::gdl::{self, GameDescription};
use ggb_core::sampler::{
    games_from_descriptions, load_batch, DrawStats, GameMeta, PretestConfig, Prior, SampleConfig,
    SampledGame,
};

use crate::error::{usage, CliError};

pub const GAMES_FILE: &str = "games.gdl";
pub const META_FILE: &str = "meta.json";

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BatchMeta {
    pub version: String,
    pub seed: u64,
    pub n: usize,
    pub config: SampleConfig,
    pub stats: DrawStats,
    pub games: Vec<GameMeta>,
}

pub struct Batch {
    pub source: PathBuf,
    pub games: Vec<SampledGame>,
    /// `None` for bare `.gdl` files.
    pub meta: Option<BatchMeta>,
}

impl Batch {
    pub fn prior(&self) -> Prior {
        self.meta.as_ref().map_or(Prior::Length, |m| m.config.prior)
    }
}

pub fn write(dir: &Path, games: &[SampledGame], meta: &BatchMeta) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)?;
    let text: String = games
        .iter()
        .map(|g| gdl::serialize(&g.desc) + "\n")
        .collect();
    std::fs::write(dir.join(GAMES_FILE), text)?;
    let mut json = serde_json::to_string_pretty(meta)?;
    json.push('\n');
    std::fs::write(dir.join(META_FILE), json)?;
    Ok(())
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

/// Loads a batch directory, or a `.gdl` file whose games get fresh metadata.
pub fn load(path: &Path, seed: u64) -> Result<Batch, CliError> {
    if path.is_dir() {
        let text = read(&path.join(GAMES_FILE))?;
        let meta: BatchMeta = serde_json::from_str(&read(&path.join(META_FILE))?)
            .map_err(|e| usage(format!("{}: {e}", path.join(META_FILE).display())))?;
        let games = load_batch(&text, &meta.games).map_err(usage)?;
        return Ok(Batch {
            source: path.to_path_buf(),
            games,
            meta: Some(meta),
        });
    }
    let descs = parse_file(path)?;
    let games = games_from_descriptions(descs, seed, 32, &PretestConfig::default());
    Ok(Batch {
        source: path.to_path_buf(),
        games,
        meta: None,
    })
}

pub fn parse_file(path: &Path) -> Result<Vec<GameDescription>, CliError> {
    let text = read(path)?;
    let games = gdl::parse_batch(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    if games.is_empty() {
        return Err(usage(format!("{}: no games", path.display())));
    }
    Ok(games)
}
