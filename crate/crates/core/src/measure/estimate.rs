use std::io::{self, Write};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{evaluate_two_phase, ComplexityProfile, EvalResult};
use crate::agents::{Agent, AgentError};
use crate::gdl::GameDescription;
use crate::seed::{derive_seed, tags};

/// The paper-style doubling scheme for iteration `i`: `2^i` evaluations,
/// half at `t0`, a quarter at `2 t0`, ..., one at `2^(i-1) t0` and one at
/// `2^i t0`. Returned as `(count, budget)` pairs.
pub fn doubling_schedule(iteration: u32, t0: u64) -> Vec<(u64, u64)> {
    assert!(iteration < 64, "iteration too large");
    let budget = |j: u32| t0.saturating_mul(1u64 << j);
    if iteration == 0 {
        return vec![(1, t0)];
    }
    let mut out: Vec<(u64, u64)> = (0..iteration)
        .map(|j| (1u64 << (iteration - 1 - j), budget(j)))
        .collect();
    out.push((1, budget(iteration)));
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EstimateMode {
    /// Games were already drawn in proportion to `2^-K`.
    PlainMean,
    /// Games were drawn in proportion to `2^-l`; each is reweighted by `1/tau`.
    ImportanceWeighted,
}

/// One game to evaluate.
#[derive(Clone, Debug)]
pub struct Task {
    pub game_id: String,
    pub desc: Arc<GameDescription>,
    pub profile: ComplexityProfile,
    pub budget: u64,
}

/// Per-game run-log record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameRecord {
    pub game_id: String,
    #[serde(rename = "K_bits")]
    pub k_bits: f64,
    pub tau: f64,
    #[serde(rename = "T")]
    pub budget: u64,
    pub v: f64,
    pub switched_at: Option<u64>,
    pub episodes: u32,
    pub seed: u64,
    pub errors: Vec<String>,
}

impl GameRecord {
    fn new(task: &Task, seed: u64, outcome: &Result<EvalResult, AgentError>) -> Self {
        let (v, switched_at, episodes, errors) = match outcome {
            Ok(r) => (
                r.v,
                r.switched_at,
                r.eval_episode_scores.len() as u32,
                vec![],
            ),
            Err(e) => (0.0, None, 0, vec![e.to_string()]),
        };
        GameRecord {
            game_id: task.game_id.clone(),
            k_bits: task.profile.k_bits,
            tau: task.profile.tau,
            budget: task.budget,
            v,
            switched_at,
            episodes,
            seed,
            errors,
        }
    }
}

/// Running estimate; valid after every added game.
#[derive(Clone, Debug)]
pub struct Accumulator {
    mode: EstimateMode,
    vs: Vec<f64>,
    weights: Vec<f64>,
}

impl Accumulator {
    pub fn new(mode: EstimateMode) -> Self {
        Accumulator {
            mode,
            vs: Vec::new(),
            weights: Vec::new(),
        }
    }

    pub fn push(&mut self, v: f64, tau: f64) {
        self.vs.push(v);
        self.weights.push(match self.mode {
            EstimateMode::PlainMean => 1.0,
            EstimateMode::ImportanceWeighted => 1.0 / tau,
        });
    }

    pub fn len(&self) -> usize {
        self.vs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vs.is_empty()
    }

    /// Self-normalized weighted mean (the plain mean under unit weights).
    pub fn mean(&self) -> f64 {
        let w: f64 = self.weights.iter().sum();
        if w == 0.0 {
            return 0.0;
        }
        self.vs
            .iter()
            .zip(&self.weights)
            .map(|(v, w)| v * w)
            .sum::<f64>()
            / w
    }

    /// Standard error of [`Accumulator::mean`]; zero for fewer than two games.
    ///
    /// Unit weights give the sample standard deviation over `sqrt(n)`.
    pub fn stderr(&self) -> f64 {
        let n = self.vs.len();
        if n < 2 {
            return 0.0;
        }
        let mu = self.mean();
        let sw: f64 = self.weights.iter().sum();
        let ss: f64 = self
            .vs
            .iter()
            .zip(&self.weights)
            .map(|(v, w)| (w * (v - mu)).powi(2))
            .sum();
        let n = n as f64;
        (n / (n - 1.0) * ss).sqrt() / sw
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerGame {
    pub game_id: String,
    #[serde(rename = "K_bits")]
    pub k_bits: f64,
    #[serde(rename = "T")]
    pub budget: u64,
    pub v: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntelligenceEstimate {
    pub upsilon_hat: f64,
    pub n_games: usize,
    pub stderr: f64,
    pub mode: EstimateMode,
    pub t0: u64,
    pub iterations: u32,
    pub errors: usize,
    pub per_game: Vec<PerGame>,
}

impl IntelligenceEstimate {
    pub fn from_records(
        records: &[GameRecord],
        mode: EstimateMode,
        t0: u64,
        iterations: u32,
    ) -> Self {
        let mut acc = Accumulator::new(mode);
        for r in records {
            acc.push(r.v, r.tau);
        }
        IntelligenceEstimate {
            upsilon_hat: acc.mean(),
            n_games: records.len(),
            stderr: acc.stderr(),
            mode,
            t0,
            iterations,
            errors: records.iter().filter(|r| !r.errors.is_empty()).count(),
            per_game: records
                .iter()
                .map(|r| PerGame {
                    game_id: r.game_id.clone(),
                    k_bits: r.k_bits,
                    budget: r.budget,
                    v: r.v,
                })
                .collect(),
        }
    }

    /// 95% normal confidence interval, clipped to [0, 1].
    pub fn confidence_interval(&self) -> (f64, f64) {
        let h = 1.96 * self.stderr;
        (
            (self.upsilon_hat - h).max(0.0),
            (self.upsilon_hat + h).min(1.0),
        )
    }
}

/// Seed of the `index`-th evaluation under `master_seed`.
pub fn evaluation_seed(master_seed: u64, index: usize) -> u64 {
    derive_seed(master_seed, tags::EVALUATION, index as u64)
}

/// Evaluates every task in order with one agent instance, reporting each
/// record (and the running estimate) to `observe` as it completes.
///
/// Agent failures are recorded as `v = 0` with the error message.
pub fn estimate_upsilon(
    agent: &mut dyn Agent,
    tasks: &[Task],
    mode: EstimateMode,
    master_seed: u64,
    mut observe: impl FnMut(&GameRecord, &Accumulator),
) -> Vec<GameRecord> {
    let mut acc = Accumulator::new(mode);
    let mut out = Vec::with_capacity(tasks.len());
    for (i, task) in tasks.iter().enumerate() {
        let seed = evaluation_seed(master_seed, i);
        let result = evaluate_two_phase(agent, &task.desc, task.budget, seed);
        let record = GameRecord::new(task, seed, &result);
        acc.push(record.v, record.tau);
        observe(&record, &acc);
        out.push(record);
    }
    out
}

/// Parallel variant: one fresh agent per task from `factory`, records
/// returned in task order so the result equals the sequential one.
pub fn estimate_upsilon_parallel<F>(
    factory: &F,
    tasks: &[Task],
    master_seed: u64,
    jobs: usize,
) -> Vec<GameRecord>
where
    F: Fn() -> Box<dyn Agent> + Sync,
{
    let run = || {
        tasks
            .par_iter()
            .enumerate()
            .map(|(i, task)| {
                let seed = evaluation_seed(master_seed, i);
                let mut agent = factory();
                let result = evaluate_two_phase(agent.as_mut(), &task.desc, task.budget, seed);
                GameRecord::new(task, seed, &result)
            })
            .collect()
    };
    match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
        Ok(pool) => pool.install(run),
        Err(_) => run(),
    }
}

/// Newline-delimited JSON run log: a header record, one record per game,
/// and a summary record last.
pub struct RunLog<W: Write> {
    out: W,
}

impl<W: Write> RunLog<W> {
    pub fn new(mut out: W, header: &serde_json::Value) -> io::Result<Self> {
        let mut rec = serde_json::Map::new();
        rec.insert("record".into(), "config".into());
        if let serde_json::Value::Object(m) = header {
            rec.extend(m.clone());
        }
        writeln!(out, "{}", serde_json::Value::Object(rec))?;
        Ok(RunLog { out })
    }

    pub fn game(&mut self, r: &GameRecord) -> io::Result<()> {
        self.record("game", r)
    }

    pub fn summary<S: Serialize>(&mut self, s: &S) -> io::Result<()> {
        self.record("summary", s)?;
        self.out.flush()
    }

    /// Writes `s` with a leading `"record": tag` field.
    pub fn record<S: Serialize>(&mut self, tag: &str, s: &S) -> io::Result<()> {
        let mut v = serde_json::to_value(s).map_err(io::Error::other)?;
        if let serde_json::Value::Object(m) = &mut v {
            let mut rec = serde_json::Map::new();
            rec.insert("record".into(), tag.into());
            rec.append(m);
            v = serde_json::Value::Object(rec);
        }
        writeln!(self.out, "{v}")
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}
