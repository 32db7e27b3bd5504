//! Plain-text command scripts, one command per line:
//!
//! ```text
//! move 4 7
//! interact 3 open
//! combine 1 blend 2,5
//! portal
//! wait
//! ```
//!
//! Blank lines and `#` comments are ignored.

use thiserror::Error;

use super::game::Command;
use crate::kb::InstanceId;
use crate::scene::Pos;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct ScriptError {
    pub line: usize,
    pub message: String,
}

fn number<T: std::str::FromStr>(tok: &str, what: &str, line: usize) -> Result<T, ScriptError> {
    tok.parse().map_err(|_| ScriptError {
        line,
        message: format!("bad {what} `{tok}`"),
    })
}

fn is_id_list(tok: &str) -> bool {
    !tok.is_empty() && tok.chars().all(|c| c.is_ascii_digit() || c == ',')
}

pub fn parse_command(text: &str, line: usize) -> Result<Command, ScriptError> {
    let toks: Vec<&str> = text.split_whitespace().collect();
    let err = |message: String| ScriptError { line, message };
    match toks.as_slice() {
        ["move", x, y] => Ok(Command::MoveTo {
            target: Pos::new(number(x, "x", line)?, number(y, "y", line)?),
        }),
        ["interact", id, verb @ ..] if !verb.is_empty() => Ok(Command::Interact {
            instance: InstanceId(number(id, "instance id", line)?),
            action: verb.join(" "),
        }),
        ["combine", id, rest @ ..] if !rest.is_empty() => {
            let (verb, list) = match rest.split_last() {
                Some((last, init)) if !init.is_empty() && is_id_list(last) => (init, Some(*last)),
                _ => (rest, None),
            };
            let ingredients = list
                .map(|l| {
                    l.split(',')
                        .filter(|s| !s.is_empty())
                        .map(|s| number(s, "ingredient id", line).map(InstanceId))
                        .collect::<Result<Vec<_>, _>>()
                })
                .transpose()?
                .unwrap_or_default();
            Ok(Command::Combine {
                item: InstanceId(number(id, "item id", line)?),
                action: verb.join(" "),
                ingredients,
            })
        }
        ["portal"] => Ok(Command::UsePortal),
        ["wait"] => Ok(Command::Wait),
        [] => Err(err("empty command".into())),
        [word, ..] => Err(err(format!("cannot parse `{word}` command: `{}`", text.trim()))),
    }
}

pub fn parse_script(text: &str) -> Result<Vec<Command>, ScriptError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| {
            let t = l.trim();
            !t.is_empty() && !t.starts_with('#')
        })
        .map(|(i, l)| parse_command(l, i + 1))
        .collect()
}

pub fn render_command(cmd: &Command) -> String {
    match cmd {
        Command::MoveTo { target } => format!("move {} {}", target.x, target.y),
        Command::Interact { instance, action } => format!("interact {instance} {action}"),
        Command::Combine {
            item,
            action,
            ingredients,
        } => {
            let list: Vec<String> = ingredients.iter().map(|i| i.to_string()).collect();
            if list.is_empty() {
                format!("combine {item} {action}")
            } else {
                format!("combine {item} {action} {}", list.join(","))
            }
        }
        Command::UsePortal => "portal".into(),
        Command::Wait => "wait".into(),
    }
}

pub fn render_script(cmds: &[Command]) -> String {
    cmds.iter().map(|c| render_command(c) + "\n").collect()
}
