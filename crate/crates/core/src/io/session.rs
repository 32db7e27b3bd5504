//! Session log: the ordered record of designer and player actions.
//!
//! Payloads refer to types, actions and goals by name so that a session is
//! self-contained and can be replayed into any knowledge base.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::kb::{KnowledgeBase, PrereqKind, Prerequisite, ShapePart};
use crate::io::normalize_term;
use crate::scene::{Pos, PortalKind, SceneId, Tile};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Session {
    pub id: String,
    pub designer: String,
    /// ISO-8601 UTC, e.g. `2016-03-01T09:30:00Z`.
    pub timestamp: String,
    pub scenes: Vec<SceneId>,
    pub actions: Vec<SessionAction>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionAction {
    pub seq: u32,
    #[serde(flatten)]
    pub payload: Payload,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "kebab-case")]
pub enum Payload {
    PlaceObject(PlaceRecord),
    DefineType(TypeRecord),
    DefinePoag(PoagRecord),
    DefineCombination(PoagRecord),
    EditTile(TileRecord),
    EditScene(SceneEditRecord),
    PlacePortal(PortalRecord),
    PlayEvent(EventRecord),
}

impl Payload {
    pub fn kind(&self) -> &'static str {
        match self {
            Payload::PlaceObject(_) => "place-object",
            Payload::DefineType(_) => "define-type",
            Payload::DefinePoag(_) => "define-poag",
            Payload::DefineCombination(_) => "define-combination",
            Payload::EditTile(_) => "edit-tile",
            Payload::EditScene(_) => "edit-scene",
            Payload::PlacePortal(_) => "place-portal",
            Payload::PlayEvent(_) => "play-event",
        }
    }

    /// The POAG carried by define-poag and define-combination actions.
    pub fn poag(&self) -> Option<&PoagRecord> {
        match self {
            Payload::DefinePoag(p) | Payload::DefineCombination(p) => Some(p),
            _ => None,
        }
    }
}

pub const ACTION_KINDS: [&str; 8] = [
    "place-object",
    "define-type",
    "define-poag",
    "define-combination",
    "edit-tile",
    "edit-scene",
    "place-portal",
    "play-event",
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlaceRecord {
    pub instance: u32,
    #[serde(rename = "type")]
    pub object_type: String,
    pub scene: SceneId,
    pub position: Pos,
    #[serde(default)]
    pub states: Vec<String>,
    #[serde(default)]
    pub overrides: Vec<OverrideRecord>,
}

/// Exception on a placed instance. `seq` names the earlier define-poag or
/// define-combination action being overridden; no replacement means removed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OverrideRecord {
    pub seq: u32,
    pub replacement: Option<PoagRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypeRecord {
    pub name: String,
    pub parent: Option<String>,
    #[serde(default)]
    pub recipe: Vec<ShapePart>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PoagRecord {
    pub item: String,
    pub action: String,
    pub goal: Option<String>,
    #[serde(default)]
    pub prerequisites: Vec<Prerequisite>,
    #[serde(default)]
    pub outcome: Vec<OutcomeRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutcomeRecord {
    pub name: String,
    pub state: Option<String>,
}

impl OutcomeRecord {
    pub fn named(name: &str) -> Self {
        OutcomeRecord {
            name: name.to_string(),
            state: None,
        }
    }
}

impl PoagRecord {
    /// Shorthand for the common case: object-present prerequisites and
    /// untagged outcomes.
    pub fn simple(item: &str, action: &str, prereqs: &[&str], outcome: &[&str], goal: Option<&str>) -> Self {
        PoagRecord {
            item: item.to_string(),
            action: action.to_string(),
            goal: goal.map(str::to_string),
            prerequisites: prereqs.iter().map(|p| Prerequisite::object(p)).collect(),
            outcome: outcome.iter().map(|o| OutcomeRecord::named(o)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TileRecord {
    pub scene: SceneId,
    pub position: Pos,
    pub tile: Tile,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SceneEditRecord {
    pub scene: SceneId,
    pub edit: SceneEdit,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "kebab-case")]
pub enum SceneEdit {
    RemoveInstance { instance: u32 },
    AddSpawn { position: Pos },
    AddGoal { goal: String },
    SetStart { position: Pos },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PortalRecord {
    pub scene: SceneId,
    pub kind: PortalKind,
    pub position: Pos,
    pub target: Option<SceneId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventRecord {
    pub game: String,
    pub turn: u64,
    pub kind: String,
    pub detail: String,
}

/// Why a session cannot be exported or mined.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SessionError {
    #[error("action {index}: expected seq {expected}, found {found}")]
    BadSequence {
        index: usize,
        expected: u32,
        found: u32,
    },
    #[error("seq {seq}: dangling reference to {what}")]
    DanglingReference { seq: u32, what: String },
    #[error("seq {seq}: {message}")]
    Invalid { seq: u32, message: String },
}

impl Session {
    pub fn new(id: &str, designer: &str, timestamp: &str) -> Self {
        Session {
            id: id.to_string(),
            designer: designer.to_string(),
            timestamp: timestamp.to_string(),
            scenes: Vec::new(),
            actions: Vec::new(),
        }
    }

    /// Appends with the next sequence number and returns it.
    pub fn push(&mut self, payload: Payload) -> u32 {
        let seq = self.actions.len() as u32 + 1;
        self.actions.push(SessionAction { seq, payload });
        seq
    }

    pub fn action(&self, seq: u32) -> Option<&SessionAction> {
        self.actions.get(seq.checked_sub(1)? as usize).filter(|a| a.seq == seq)
    }

    /// Checks numbering and that every name a payload depends on is known,
    /// either to `kb` or from an earlier action in this session. POAG
    /// outcomes count as known types from then on, as replay registers them.
    pub fn check(&self, kb: &KnowledgeBase) -> Result<(), SessionError> {
        for (index, a) in self.actions.iter().enumerate() {
            let expected = index as u32 + 1;
            if a.seq != expected {
                return Err(SessionError::BadSequence {
                    index,
                    expected,
                    found: a.seq,
                });
            }
        }
        let mut types: BTreeSet<String> = BTreeSet::new();
        let mut poag_seqs: BTreeSet<u32> = BTreeSet::new();
        let scenes: BTreeSet<&SceneId> = self.scenes.iter().collect();
        let known = |types: &BTreeSet<String>, name: &str| {
            let n = normalize_term(name);
            types.contains(&n) || kb.type_by_name(&n).is_some()
        };
        let dangling = |seq: u32, what: String| SessionError::DanglingReference { seq, what };
        let scene_ok = |seq: u32, s: &SceneId| {
            if scenes.contains(s) {
                Ok(())
            } else {
                Err(dangling(seq, format!("scene `{s}`")))
            }
        };
        for a in &self.actions {
            let seq = a.seq;
            match &a.payload {
                Payload::DefineType(t) => {
                    if normalize_term(&t.name).is_empty() {
                        return Err(SessionError::Invalid {
                            seq,
                            message: "empty type name".into(),
                        });
                    }
                    if let Some(p) = &t.parent {
                        if !known(&types, p) {
                            return Err(dangling(seq, format!("parent type `{p}`")));
                        }
                    }
                    types.insert(normalize_term(&t.name));
                }
                Payload::DefinePoag(p) | Payload::DefineCombination(p) => {
                    check_poag_record(seq, p)?;
                    if !known(&types, &p.item) {
                        return Err(dangling(seq, format!("item type `{}`", p.item)));
                    }
                    types.extend(p.outcome.iter().map(|o| normalize_term(&o.name)));
                    poag_seqs.insert(seq);
                }
                Payload::PlaceObject(pl) => {
                    scene_ok(seq, &pl.scene)?;
                    if !known(&types, &pl.object_type) {
                        return Err(dangling(seq, format!("type `{}`", pl.object_type)));
                    }
                    for ov in &pl.overrides {
                        if !poag_seqs.contains(&ov.seq) {
                            return Err(dangling(seq, format!("poag action {}", ov.seq)));
                        }
                        if let Some(r) = &ov.replacement {
                            check_poag_record(seq, r)?;
                        }
                    }
                }
                Payload::EditTile(t) => scene_ok(seq, &t.scene)?,
                Payload::EditScene(e) => scene_ok(seq, &e.scene)?,
                Payload::PlacePortal(p) => {
                    scene_ok(seq, &p.scene)?;
                    if p.kind == PortalKind::Entry && p.target.is_some() {
                        return Err(SessionError::Invalid {
                            seq,
                            message: "entry portal with target".into(),
                        });
                    }
                }
                Payload::PlayEvent(_) => {}
            }
        }
        Ok(())
    }
}

fn check_poag_record(seq: u32, p: &PoagRecord) -> Result<(), SessionError> {
    let invalid = |message: &str| SessionError::Invalid {
        seq,
        message: message.to_string(),
    };
    if normalize_term(&p.item).is_empty() || normalize_term(&p.action).is_empty() {
        return Err(invalid("poag needs an item and an action"));
    }
    if p.goal.as_deref().is_some_and(|g| normalize_term(g).is_empty()) {
        return Err(invalid("empty goal"));
    }
    for pre in &p.prerequisites {
        if normalize_term(&pre.name).is_empty() {
            return Err(invalid("empty prerequisite name"));
        }
        if pre.kind == PrereqKind::ActionDone && pre.state.is_some() {
            return Err(invalid("action-done prerequisite with a state tag"));
        }
    }
    if p.outcome.iter().any(|o| normalize_term(&o.name).is_empty()) {
        return Err(invalid("empty outcome name"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn push_numbers_from_one() {
        let mut s = Session::new("a", "d", "2016-01-01T00:00:00Z");
        assert_eq!(s.push(Payload::DefineType(TypeRecord {
            name: "bread".into(),
            parent: None,
            recipe: vec![],
        })), 1);
        assert_eq!(s.action(1).unwrap().payload.kind(), "define-type");
        assert!(s.action(0).is_none());
        s.check(&KnowledgeBase::new()).unwrap();
    }

    #[test]
    fn check_finds_dangling_item() {
        let mut s = Session::new("a", "d", "t");
        s.push(Payload::DefinePoag(PoagRecord::simple("blender", "blend", &["orange"], &["orange juice"], None)));
        assert!(matches!(
            s.check(&KnowledgeBase::new()),
            Err(SessionError::DanglingReference { seq: 1, .. })
        ));
        let mut kb = KnowledgeBase::new();
        kb.define_object_type("Blender", None, None).unwrap();
        s.check(&kb).unwrap();
    }

    #[test]
    fn outcomes_become_known_types() {
        let mut s = Session::new("a", "d", "t");
        s.push(Payload::DefineType(TypeRecord { name: "bread".into(), parent: None, recipe: vec![] }));
        s.push(Payload::DefinePoag(PoagRecord::simple("bread", "cut", &["knife"], &["bread slices"], None)));
        s.push(Payload::DefinePoag(PoagRecord::simple("bread slices", "stack", &["cheese", "ham"], &["sandwich"], Some("satisfy hunger"))));
        s.check(&KnowledgeBase::new()).unwrap();
    }

    #[test]
    fn check_rejects_bad_numbering() {
        let mut s = Session::new("a", "d", "t");
        s.push(Payload::PlayEvent(EventRecord { game: "g".into(), turn: 0, kind: "wait".into(), detail: String::new() }));
        s.actions[0].seq = 2;
        assert!(matches!(s.check(&KnowledgeBase::new()), Err(SessionError::BadSequence { .. })));
    }

    #[test]
    fn json_shape() {
        let mut s = Session::new("a", "d", "t");
        s.scenes.push("k".into());
        s.push(Payload::EditTile(TileRecord { scene: "k".into(), position: Pos::new(1, 2), tile: Tile::Wall }));
        let v = serde_json::to_value(&s).unwrap();
        assert_eq!(v["actions"][0]["kind"], "edit-tile");
        assert_eq!(v["actions"][0]["seq"], 1);
        assert_eq!(v["actions"][0]["payload"]["tile"], "wall");
        let back: Session = serde_json::from_value(v).unwrap();
        assert_eq!(back, s);
    }
}
