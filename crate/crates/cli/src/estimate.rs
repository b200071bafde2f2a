use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use serde::Serialize;
use serde_json::json;

use ggb_core::agents::AgentSpec;
use ggb_core::measure::{
    doubling_schedule, estimate_upsilon_parallel, EstimateMode, GameRecord, IntelligenceEstimate,
    RunLog, Task,
};
use ggb_core::proto::ExternalConfig;
use ggb_core::sampler::{sample_batch, FilterPolicy, Prior, SampleConfig};
use ggb_core::seed::{derive_seed, tags};

use crate::batch;
use crate::config::ConfigFile;
use crate::error::{usage, CliError};
use crate::sample::parse_players;
use crate::{EstimateArgs, VERSION};

#[derive(Serialize)]
struct AgentGame<'a> {
    agent: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    iteration: Option<u32>,
    #[serde(flatten)]
    record: &'a GameRecord,
}

#[derive(Serialize)]
struct AgentSummary<'a> {
    agent: String,
    ci95: (f64, f64),
    #[serde(flatten)]
    estimate: &'a IntelligenceEstimate,
}

#[derive(Serialize)]
struct Paired {
    a: String,
    b: String,
    n: usize,
    mean_diff: f64,
    stderr: f64,
}

pub fn parse_agents(specs: Vec<String>) -> Result<Vec<AgentSpec>, CliError> {
    specs
        .iter()
        .map(|s| s.parse().map_err(|e| usage(format!("agent `{s}`: {e}"))))
        .collect()
}

pub fn external_config(ceiling: Option<u64>) -> ExternalConfig {
    let mut c = ExternalConfig::from_env();
    if let Some(ms) = ceiling {
        c.wall_ceiling_ms = ms;
    }
    c
}

pub fn default_jobs() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

pub fn open_log(
    out: Option<&PathBuf>,
    header: &serde_json::Value,
) -> Result<RunLog<Box<dyn Write>>, CliError> {
    let w: Box<dyn Write> = match out {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| usage(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(io::sink()),
    };
    Ok(RunLog::new(w, header)?)
}

fn parse_mode(s: &str) -> Result<EstimateMode, CliError> {
    match s {
        "plain" => Ok(EstimateMode::PlainMean),
        "weighted" => Ok(EstimateMode::ImportanceWeighted),
        _ => Err(usage(format!("unknown mode `{s}` (plain, weighted)"))),
    }
}

fn mode_name(m: EstimateMode) -> &'static str {
    match m {
        EstimateMode::PlainMean => "plain",
        EstimateMode::ImportanceWeighted => "weighted",
    }
}

/// Games evaluated in one pass: all of a batch, or one doubling iteration.
struct Stage {
    iteration: Option<u32>,
    tasks: Vec<Task>,
    seed: u64,
}

pub fn run(a: EstimateArgs, cfg: &ConfigFile) -> Result<(), CliError> {
    let specs = parse_agents(cfg.pick_all(a.agents, "agent"))?;
    if specs.is_empty() {
        return Err(usage("at least one --agent is required"));
    }
    let seed = cfg.pick(a.seed, "seed", 0u64)?;
    let jobs = cfg.pick(a.jobs, "jobs", default_jobs())?.max(1);
    let ext = external_config(cfg.pick_opt(a.ceiling_ms, "ceiling-ms")?);
    let batch_path = cfg.pick_opt(a.batch, "batch")?;
    let iters = cfg.pick_opt(a.iters, "iters")?;
    let out = cfg.pick_opt(a.out, "out")?;

    let mut header = json!({
        "version": VERSION,
        "command": "estimate",
        "agents": specs.iter().map(ToString::to_string).collect::<Vec<_>>(),
        "seed": seed,
        "jobs": jobs,
        "clock": if specs.iter().any(AgentSpec::is_external) { "wall" } else { "deterministic" },
    });
    if specs.iter().any(AgentSpec::is_external) {
        header["rate"] = json!(ext.rate);
        header["ceiling_ms"] = json!(ext.wall_ceiling_ms);
    }

    let (stages, mode, t0) = match (batch_path, iters) {
        (Some(_), Some(_)) => return Err(usage("give either --batch or --iters, not both")),
        (None, None) => return Err(usage("give --batch or --iters")),
        (Some(path), None) => {
            let budget = cfg.pick(a.budget, "budget", 10_000u64)?;
            let b = batch::load(&path, seed)?;
            let default = match b.prior() {
                Prior::Length => "weighted",
                Prior::Complexity => "plain",
            };
            let mode = parse_mode(&cfg.pick(a.mode, "mode", default.to_string())?)?;
            header["batch"] = json!(path.display().to_string());
            header["batch_seed"] = json!(b.meta.as_ref().map(|m| m.seed));
            header["T"] = json!(budget);
            header["mode"] = json!(mode_name(mode));
            let tasks = b.games.iter().map(|g| g.task(budget)).collect();
            let stage = Stage {
                iteration: None,
                tasks,
                seed,
            };
            (vec![stage], mode, budget)
        }
        (None, Some(iters)) => {
            if iters > 24 {
                return Err(usage("iters above 24 would need over 2^24 games"));
            }
            let t0 = cfg.pick(a.t0, "t0", 100u64)?;
            if t0 == 0 {
                return Err(usage("t0 must be positive"));
            }
            let sc = SampleConfig {
                filter: cfg
                    .pick(a.filter, "filter", "keep-all".to_string())?
                    .parse::<FilterPolicy>()
                    .map_err(usage)?,
                players: parse_players(cfg.pick_opt(a.players, "players")?)?,
                ..SampleConfig::default()
            };
            let mode = parse_mode(&cfg.pick(a.mode, "mode", "weighted".to_string())?)?;
            header["iters"] = json!(iters);
            header["t0"] = json!(t0);
            header["mode"] = json!(mode_name(mode));
            header["sample"] = serde_json::to_value(&sc)?;
            let mut stages = Vec::new();
            for i in 0..=iters {
                let schedule = doubling_schedule(i, t0);
                let n: u64 = schedule.iter().map(|&(c, _)| c).sum();
                let set =
                    sample_batch(n as usize, derive_seed(seed, tags::GAME, u64::from(i)), &sc)
                        .map_err(|e| CliError::Internal(e.to_string()))?;
                let budgets = schedule
                    .iter()
                    .flat_map(|&(c, t)| std::iter::repeat_n(t, c as usize));
                let tasks = set
                    .games
                    .iter()
                    .zip(budgets)
                    .map(|(g, t)| {
                        let mut task = g.task(t);
                        task.game_id = format!("i{i}/{}", g.id);
                        task
                    })
                    .collect();
                stages.push(Stage {
                    iteration: Some(i),
                    tasks,
                    seed: derive_seed(seed, tags::EVALUATION, u64::from(i)),
                });
            }
            (stages, mode, t0)
        }
    };

    let mut log = open_log(out.as_ref(), &header)?;
    let mut all: Vec<Vec<GameRecord>> = Vec::new();
    for spec in &specs {
        let make = || spec.build(&ext);
        let mut records = Vec::new();
        for stage in &stages {
            for r in estimate_upsilon_parallel(&make, &stage.tasks, stage.seed, jobs) {
                log.record(
                    "game",
                    &AgentGame {
                        agent: spec.to_string(),
                        iteration: stage.iteration,
                        record: &r,
                    },
                )?;
                records.push(r);
            }
        }
        all.push(records);
    }

    let iterations = stages.iter().filter_map(|s| s.iteration).max().unwrap_or(0);
    println!(
        "{:>8} {:>8} {:>17} {:>6} {:>6}  agent",
        "upsilon", "stderr", "95% CI", "games", "errors"
    );
    let mut failures = 0;
    for (spec, records) in specs.iter().zip(&all) {
        let e = IntelligenceEstimate::from_records(records, mode, t0, iterations);
        let ci = e.confidence_interval();
        println!(
            "{:>8.4} {:>8.4} {:>17} {:>6} {:>6}  {spec}",
            e.upsilon_hat,
            e.stderr,
            format!("[{:.4}, {:.4}]", ci.0, ci.1),
            e.n_games,
            e.errors
        );
        failures += e.errors;
        log.record(
            "summary",
            &AgentSummary {
                agent: spec.to_string(),
                ci95: ci,
                estimate: &e,
            },
        )?;
    }
    if a.paired || cfg.pick(None, "paired", false)? {
        for (i, w) in all.windows(2).enumerate() {
            let p = paired(&specs[i], &specs[i + 1], &w[0], &w[1]);
            println!(
                "paired {} - {}: {:+.4} ± {:.4} over {} games",
                p.a, p.b, p.mean_diff, p.stderr, p.n
            );
            log.record("paired", &p)?;
        }
    }
    log.into_inner().flush()?;
    if failures > 0 {
        return Err(CliError::Protocol(format!(
            "{failures} evaluations failed; see the run log for details"
        )));
    }
    Ok(())
}

fn paired(a: &AgentSpec, b: &AgentSpec, ra: &[GameRecord], rb: &[GameRecord]) -> Paired {
    let d: Vec<f64> = ra.iter().zip(rb).map(|(x, y)| x.v - y.v).collect();
    let n = d.len();
    let mean = d.iter().sum::<f64>() / n.max(1) as f64;
    let stderr = if n < 2 {
        0.0
    } else {
        let var = d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        (var / n as f64).sqrt()
    };
    Paired {
        a: a.to_string(),
        b: b.to_string(),
        n,
        mean_diff: mean,
        stderr,
    }
}
