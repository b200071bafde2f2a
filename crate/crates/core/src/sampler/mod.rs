//! Drawing games from the grammar prior and screening them for playability.

mod pretest;

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gdl::{self, ChoiceSource, GameDescription};
use crate::measure::{complexity, estimate_tau, ComplexityProfile, Task};
use crate::seed::{derive_seed, tags};

pub use pretest::{pretest, Playability, PretestConfig, Verdict};

/// Index of the player-count choice in a derivation (after width, height).
const PLAYERS_CHOICE: usize = 2;

/// Choice source that draws uniformly and keeps its own tally of the
/// log-probability of the path taken.
struct Sampling {
    rng: ChaCha8Rng,
    ln_p: f64,
    calls: usize,
    players: Option<u8>,
}

impl ChoiceSource for Sampling {
    fn choose(&mut self, arity: u32) -> u32 {
        let call = self.calls;
        self.calls += 1;
        if let (PLAYERS_CHOICE, Some(p)) = (call, self.players) {
            debug_assert_eq!(arity, 2);
            return u32::from(p - 1);
        }
        self.ln_p -= f64::from(arity).ln();
        self.rng.random_range(0..arity)
    }
}

/// Draws one game from the grammar prior.
///
/// Returns the game and `-log2` of the probability with which it was drawn,
/// accumulated during the draw.
pub fn sample_game(seed: u64) -> (GameDescription, f64) {
    sample_game_with_players(seed, None)
}

/// Like [`sample_game`], but draws from the prior conditioned on the player
/// count. The returned bits are those of the conditional draw.
pub fn sample_game_with_players(seed: u64, players: Option<u8>) -> (GameDescription, f64) {
    assert!(players.is_none_or(|p| (1..=2).contains(&p)));
    let mut src = Sampling {
        rng: ChaCha8Rng::seed_from_u64(seed),
        ln_p: 0.0,
        calls: 0,
        players,
    };
    let desc = gdl::derive(&mut src);
    (desc, -src.ln_p / std::f64::consts::LN_2)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FilterPolicy {
    KeepAll,
    DropImpossible,
    DropNonPlayable,
    /// Playable, and the greedy probe beats random play by at least the
    /// configured margin. Drops games where no decision matters.
    Learnable,
}

impl FilterPolicy {
    pub fn keeps(self, p: &Playability, cfg: &PretestConfig) -> bool {
        match self {
            FilterPolicy::KeepAll => true,
            FilterPolicy::DropImpossible => p.verdict != Verdict::Impossible,
            FilterPolicy::DropNonPlayable => p.verdict == Verdict::Playable,
            FilterPolicy::Learnable => {
                p.verdict == Verdict::Playable && p.headroom() >= cfg.learnable_margin
            }
        }
    }
}

impl FromStr for FilterPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "keepall" | "all" => Ok(FilterPolicy::KeepAll),
            "dropimpossible" => Ok(FilterPolicy::DropImpossible),
            "dropnonplayable" | "playable" => Ok(FilterPolicy::DropNonPlayable),
            "learnable" => Ok(FilterPolicy::Learnable),
            _ => Err(format!(
                "unknown filter `{s}` (keep-all, drop-impossible, drop-non-playable, learnable)"
            )),
        }
    }
}

impl fmt::Display for FilterPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FilterPolicy::KeepAll => "keep-all",
            FilterPolicy::DropImpossible => "drop-impossible",
            FilterPolicy::DropNonPlayable => "drop-non-playable",
            FilterPolicy::Learnable => "learnable",
        })
    }
}

/// Which prior the accepted games follow.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Prior {
    /// `2^-l`: plain grammar sampling.
    Length,
    /// `2^-K`: grammar sampling thinned by acceptance probability `1/tau`.
    Complexity,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleConfig {
    pub filter: FilterPolicy,
    pub prior: Prior,
    /// Draw only games with this many players.
    pub players: Option<u8>,
    pub tau_rollouts: u32,
    pub pretest: PretestConfig,
}

impl Default for SampleConfig {
    fn default() -> Self {
        SampleConfig {
            filter: FilterPolicy::KeepAll,
            prior: Prior::Length,
            players: None,
            tau_rollouts: 32,
            pretest: PretestConfig::default(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SampledGame {
    pub id: String,
    pub desc: Arc<GameDescription>,
    pub profile: ComplexityProfile,
    pub playability: Playability,
    /// Seed of the draw that produced the game.
    pub seed: u64,
}

impl SampledGame {
    pub fn task(&self, budget: u64) -> Task {
        Task {
            game_id: self.id.clone(),
            desc: Arc::clone(&self.desc),
            profile: self.profile,
            budget,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DrawStats {
    pub draws: u64,
    pub duplicates: u64,
    pub wrong_players: u64,
    pub rejected_by_prior: u64,
    pub trivial: u64,
    pub impossible: u64,
    pub playable: u64,
    /// Playable games dropped for too little probe headroom.
    pub flat: u64,
}

#[derive(Clone, Debug)]
pub struct SampleSet {
    pub games: Vec<SampledGame>,
    pub master_seed: u64,
    pub config: SampleConfig,
    pub stats: DrawStats,
}

impl SampleSet {
    pub fn tasks(&self, budget: u64) -> Vec<Task> {
        self.games.iter().map(|g| g.task(budget)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("sampling exhausted: {consecutive} consecutive draws failed the filter after {accepted} of {wanted} games")]
pub struct SamplingExhausted {
    pub consecutive: u64,
    pub accepted: usize,
    pub wanted: usize,
}

struct Candidate {
    seed: u64,
    desc: Arc<GameDescription>,
    text: String,
    accept_draw: f64,
    /// `None` for games with the wrong number of players.
    screen: Option<(ComplexityProfile, Playability)>,
}

fn evaluate_candidate(seed: u64, cfg: &SampleConfig) -> Candidate {
    let (desc, _) = sample_game_with_players(seed, cfg.players);
    let text = gdl::serialize(&desc);
    let desc = Arc::new(desc);
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, tags::ACCEPT, 0));
    let accept_draw = rng.random::<f64>();
    let wanted = cfg.players.is_none_or(|p| p == desc.players);
    let screen = wanted.then(|| {
        let tau = estimate_tau(&desc, cfg.tau_rollouts, derive_seed(seed, tags::TAU, 0));
        let p = pretest(&desc, derive_seed(seed, tags::PRETEST, 0), &cfg.pretest);
        (complexity(&desc, tau), p)
    });
    Candidate {
        seed,
        desc,
        text,
        accept_draw,
        screen,
    }
}

/// Draws until `n` distinct games pass the filter.
///
/// Candidates are screened in parallel chunks but accepted strictly in draw
/// order, so the result depends only on `(n, master_seed, cfg)`.
pub fn sample_batch(
    n: usize,
    master_seed: u64,
    cfg: &SampleConfig,
) -> Result<SampleSet, SamplingExhausted> {
    assert!(n >= 1);
    let limit = 100 * n as u64;
    let mut stats = DrawStats::default();
    let mut seen = HashSet::new();
    let mut games = Vec::with_capacity(n);
    let mut consecutive = 0u64;
    let mut next = 0u64;
    while games.len() < n {
        let chunk = (2 * (n - games.len())).clamp(16, 256) as u64;
        let seeds: Vec<u64> = (next..next + chunk)
            .map(|i| derive_seed(master_seed, tags::GAME, i))
            .collect();
        next += chunk;
        let candidates: Vec<Candidate> = seeds
            .par_iter()
            .map(|&s| evaluate_candidate(s, cfg))
            .collect();
        for c in candidates {
            stats.draws += 1;
            let ok = match &c.screen {
                None => {
                    stats.wrong_players += 1;
                    false
                }
                Some(_) if seen.contains(&c.text) => {
                    stats.duplicates += 1;
                    false
                }
                Some((prof, _))
                    if cfg.prior == Prior::Complexity && c.accept_draw >= 1.0 / prof.tau =>
                {
                    stats.rejected_by_prior += 1;
                    false
                }
                Some((_, p)) => {
                    match p.verdict {
                        Verdict::Trivial => stats.trivial += 1,
                        Verdict::Impossible => stats.impossible += 1,
                        Verdict::Playable => stats.playable += 1,
                    }
                    let keep = cfg.filter.keeps(p, &cfg.pretest);
                    if !keep && p.verdict == Verdict::Playable {
                        stats.flat += 1;
                    }
                    keep
                }
            };
            if !ok {
                consecutive += 1;
                if consecutive >= limit {
                    return Err(SamplingExhausted {
                        consecutive,
                        accepted: games.len(),
                        wanted: n,
                    });
                }
                continue;
            }
            consecutive = 0;
            seen.insert(c.text);
            let (profile, playability) = c.screen.expect("checked");
            games.push(SampledGame {
                id: format!("g{:04}", games.len()),
                desc: c.desc,
                profile,
                playability,
                seed: c.seed,
            });
            if games.len() == n {
                break;
            }
        }
    }
    Ok(SampleSet {
        games,
        master_seed,
        config: cfg.clone(),
        stats,
    })
}

/// Sidecar metadata for one game of a batch file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameMeta {
    pub id: String,
    pub l: f64,
    pub tau: f64,
    #[serde(rename = "K")]
    pub k: f64,
    pub verdict: Verdict,
    pub random_mean_v: f64,
    pub probe_mean_v: f64,
    pub seed: u64,
}

impl GameMeta {
    pub fn of(g: &SampledGame) -> Self {
        GameMeta {
            id: g.id.clone(),
            l: g.desc.desc_len_bits,
            tau: g.profile.tau,
            k: g.profile.k_bits,
            verdict: g.playability.verdict,
            random_mean_v: g.playability.random_mean_v,
            probe_mean_v: g.playability.probe_mean_v,
            seed: g.seed,
        }
    }
}

/// Rebuilds sampled games from batch text and its metadata records.
pub fn load_batch(gdl_text: &str, meta: &[GameMeta]) -> Result<Vec<SampledGame>, LoadError> {
    let descs = gdl::parse_batch(gdl_text)?;
    if descs.len() != meta.len() {
        return Err(LoadError::Mismatch {
            games: descs.len(),
            records: meta.len(),
        });
    }
    Ok(descs
        .into_iter()
        .zip(meta)
        .map(|(d, m)| SampledGame {
            id: m.id.clone(),
            profile: complexity(&d, m.tau),
            desc: Arc::new(d),
            playability: Playability {
                verdict: m.verdict,
                random_mean_v: m.random_mean_v,
                probe_mean_v: m.probe_mean_v,
                episodes_tested: 0,
            },
            seed: m.seed,
        })
        .collect())
}

/// Wraps games parsed without metadata, measuring tau afresh.
pub fn games_from_descriptions(
    descs: Vec<GameDescription>,
    seed: u64,
    tau_rollouts: u32,
    pretest_cfg: &PretestConfig,
) -> Vec<SampledGame> {
    descs
        .into_par_iter()
        .enumerate()
        .map(|(i, d)| {
            let d = Arc::new(d);
            let s = derive_seed(seed, tags::GAME, i as u64);
            let tau = estimate_tau(&d, tau_rollouts, derive_seed(s, tags::TAU, 0));
            SampledGame {
                id: format!("g{i:04}"),
                profile: complexity(&d, tau),
                playability: pretest(&d, derive_seed(s, tags::PRETEST, 0), pretest_cfg),
                desc: d,
                seed: s,
            }
        })
        .collect()
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error(transparent)]
    Gdl(#[from] gdl::GdlError),
    #[error("batch has {games} games but {records} metadata records")]
    Mismatch { games: usize, records: usize },
}
