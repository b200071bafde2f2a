//! Byte-exact wire transcripts.
//!
//! Each case is a pair of files under `tests/golden/`: `<name>.in.jsonl` holds
//! every line the harness sends, `<name>.out.jsonl` every reply. Set
//! `GGB_BLESS=1` to rewrite them after an intentional protocol change.

use std::path::PathBuf;
use std::sync::Arc;

use ggb_core::agents::{Agent, QLearnAgent, QLearnConfig, RandomAgent, Response, ScriptedAgent};
use ggb_core::engine::Action;
use ggb_core::gdl;
use ggb_core::measure::evaluate_two_phase;
use ggb_core::proto::{decode, encode, Recorder};

const CORRIDOR: &str = "(game (grid 4 2) (players 1) (obs full) (noise 0) (horizon 8) (init (avatar 0 0) (wall 0 1) (wall 1 1) (wall 2 1) (wall 3 1) (goal 3 0)) (actions left right) (rules (when (overlap avatar goal) (end win))) (score -1 4 0))";
const NOISY: &str = "(game (grid 3 3) (players 1) (obs radius 1) (noise 1/4) (horizon 8) (opponent chase avatar) (init (avatar 0 0) (hazard 2 0) (opp 2 2)) (actions up down left right stay) (rules (when (overlap avatar opp) (end lose)) (when (tick ge 6) (end win))) (score 0 3 -3))";
const PLACE: &str = "(game (grid 3 3) (players 1) (obs full) (noise 0) (horizon 8) (init (avatar 1 1)) (actions stay place) (rules (when (count item ge 2) (spawn goal corner) (end win))) (score 0 1 0))";

fn case(name: &str, text: &str, budget: u64, seed: u64, agent: Box<dyn Agent>) -> (String, String) {
    let desc = Arc::new(gdl::parse(text).unwrap());
    let mut rec = Recorder::new(agent);
    evaluate_two_phase(&mut rec, &desc, budget, seed).unwrap_or_else(|e| panic!("{name}: {e}"));
    let (mut sent, mut replies) = (String::new(), String::new());
    for line in rec.lines() {
        let (dir, body) = line.split_at(2);
        match dir {
            "> " => sent.push_str(body),
            "< " => replies.push_str(body),
            _ => unreachable!(),
        }
    }
    (sent, replies)
}

fn cases() -> Vec<(&'static str, String, String)> {
    let corridor = vec![
        Response::Switch,
        Response::Act(Action::Right),
        Response::Act(Action::Right),
        Response::Pass,
        Response::Act(Action::Right),
    ];
    let mut out = Vec::new();
    let mut add = |name, text, budget, seed, agent| {
        let (sent, replies) = case(name, text, budget, seed, agent);
        out.push((name, sent, replies));
    };
    add(
        "scripted_corridor",
        CORRIDOR,
        40,
        0,
        Box::new(ScriptedAgent::sequence("script", 1, corridor)),
    );
    add("random_noisy", NOISY, 60, 7, Box::new(RandomAgent::new()));
    add("random_place", PLACE, 30, 2, Box::new(RandomAgent::new()));
    add(
        "qlearn_corridor",
        CORRIDOR,
        120,
        5,
        Box::new(QLearnAgent::new(QLearnConfig::default())),
    );
    out
}

fn dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

#[test]
fn transcripts_match_golden_files() {
    let bless = std::env::var_os("GGB_BLESS").is_some();
    for (name, sent, replies) in cases() {
        for (suffix, got) in [("in", &sent), ("out", &replies)] {
            let path = dir().join(format!("{name}.{suffix}.jsonl"));
            if bless {
                std::fs::create_dir_all(dir()).unwrap();
                std::fs::write(&path, got).unwrap();
                continue;
            }
            let want = std::fs::read_to_string(&path)
                .unwrap_or_else(|e| panic!("{}: {e} (run with GGB_BLESS=1)", path.display()));
            assert_eq!(got, &want, "{} differs", path.display());
        }
    }
}

#[test]
fn golden_lines_are_canonical() {
    let mut files = 0;
    for entry in std::fs::read_dir(dir()).unwrap() {
        let path = entry.unwrap().path();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.ends_with('\n'));
        for line in text.split_inclusive('\n') {
            let msg = decode(line).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            assert_eq!(encode(&msg), line);
        }
        files += 1;
    }
    assert_eq!(files, 8);
}

#[test]
fn framing_is_lock_step() {
    for (name, sent, replies) in cases() {
        let kinds: Vec<String> = sent
            .lines()
            .map(|l| decode(l).unwrap().type_name().to_string())
            .collect();
        assert_eq!(kinds.first().map(String::as_str), Some("init"), "{name}");
        assert_eq!(kinds.last().map(String::as_str), Some("result"), "{name}");
        let obs = kinds.iter().filter(|k| *k == "obs").count();
        assert_eq!(obs, replies.lines().count(), "{name}");
        let switches = replies.lines().filter(|l| l.contains("\"switch\"")).count();
        assert_eq!(switches, 1, "{name}");
    }
}
