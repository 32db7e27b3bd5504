//! JSON-lines game traces.
//!
//! The first line is a header naming the seed, the generator and a SHA-256
//! of the scene's canonical JSON. Each turn then writes the command it ran
//! and the events it produced, all as `{"turn", "kind", "payload"}` objects.
//! A command the rules refused is written with kind `rejected` and does not
//! use up a turn.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::game::{Command, Game};
use super::rng::PRNG_ID;
use crate::scene::Scene;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceHeader {
    pub kind: String,
    pub seed: u64,
    pub prng: String,
    pub scene: String,
    pub scene_hash: String,
}

#[derive(Serialize, Deserialize)]
struct Line<T> {
    turn: u32,
    kind: String,
    payload: T,
}

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("line {line}: {message}")]
    Bad { line: usize, message: String },
}

pub fn scene_hash(scene: &Scene) -> String {
    format!("{:x}", Sha256::digest(scene.to_canonical_json().as_bytes()))
}

fn json<T: Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("trace values serialize")
}

/// Plays `commands` from the game's current state and returns the trace.
/// Commands after the game ends are recorded as rejected.
pub fn run_trace(game: &mut Game, commands: &[Command]) -> String {
    let header = TraceHeader {
        kind: "header".into(),
        seed: game.seed(),
        prng: PRNG_ID.into(),
        scene: game.state().scene.0.clone(),
        scene_hash: scene_hash(game.scene()),
    };
    let mut out = json(&header) + "\n";
    for cmd in commands {
        let turn = game.state().turn + 1;
        out += &json(&Line { turn, kind: "command".into(), payload: cmd });
        out.push('\n');
        match game.step(cmd) {
            Ok(events) => {
                for e in events {
                    let mut value = serde_json::to_value(&e).expect("events serialize");
                    let payload = value
                        .get_mut("payload")
                        .map(serde_json::Value::take)
                        .unwrap_or(serde_json::Value::Null);
                    out += &json(&Line { turn, kind: e.kind().into(), payload });
                    out.push('\n');
                }
            }
            Err(e) => {
                let payload = serde_json::json!({ "message": e.to_string() });
                out += &json(&Line { turn, kind: "rejected".into(), payload });
                out.push('\n');
            }
        }
    }
    out
}

pub fn parse_header(text: &str) -> Result<TraceHeader, TraceError> {
    let first = text.lines().next().unwrap_or("");
    let header: TraceHeader = serde_json::from_str(first).map_err(|e| TraceError::Bad {
        line: 1,
        message: e.to_string(),
    })?;
    if header.kind != "header" {
        return Err(TraceError::Bad {
            line: 1,
            message: "first line is not a header".into(),
        });
    }
    Ok(header)
}

/// The command script recorded in a trace.
pub fn commands_from_trace(text: &str) -> Result<Vec<Command>, TraceError> {
    parse_header(text)?;
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate().skip(1) {
        if raw.trim().is_empty() {
            continue;
        }
        let line: Line<serde_json::Value> = serde_json::from_str(raw).map_err(|e| TraceError::Bad {
            line: i + 1,
            message: e.to_string(),
        })?;
        if line.kind == "command" {
            out.push(serde_json::from_value(line.payload).map_err(|e| TraceError::Bad {
                line: i + 1,
                message: e.to_string(),
            })?);
        }
    }
    Ok(out)
}
