//! Session XML, format `gecka3d-1`.
//!
//! The writer emits one canonical form: fixed attribute order, optional
//! attributes omitted when absent, two-space indentation, `\n` line ends.
//! The reader accepts any attribute order and whitespace layout. The schema
//! is described in `docs/session-xml.md`.

use std::collections::BTreeSet;
use std::str::FromStr;

use roxmltree::{Document, Node};
use thiserror::Error;

use super::session::{
    EventRecord, OutcomeRecord, OverrideRecord, Payload, PlaceRecord, PoagRecord, PortalRecord,
    SceneEdit, SceneEditRecord, Session, SessionAction, SessionError, TileRecord, TypeRecord,
    ACTION_KINDS,
};
use crate::kb::{KnowledgeBase, PrereqKind, Prerequisite, ShapePart};
use crate::scene::{Pos, PortalKind, SceneId, Tile};

pub const FORMAT: &str = "gecka3d-1";
const ROOT: &str = "gecka-session";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum XmlError {
    #[error("line {line}: malformed xml: {message}")]
    Malformed { line: u32, message: String },
    #[error("line {line}: unknown action kind `{kind}`")]
    UnknownKind { kind: String, line: u32 },
    #[error("line {line}: duplicate sequence number {seq}")]
    DuplicateSequence { seq: u32, line: u32 },
    #[error("line {line}: sequence gap, expected {expected} but found {found}")]
    SequenceGap { expected: u32, found: u32, line: u32 },
    #[error("line {line}: {message}")]
    Invalid { line: u32, message: String },
}

impl XmlError {
    pub fn line(&self) -> u32 {
        match self {
            XmlError::Malformed { line, .. }
            | XmlError::UnknownKind { line, .. }
            | XmlError::DuplicateSequence { line, .. }
            | XmlError::SequenceGap { line, .. }
            | XmlError::Invalid { line, .. } => *line,
        }
    }
}

struct El {
    name: &'static str,
    attrs: Vec<(&'static str, String)>,
    children: Vec<El>,
}

impl El {
    fn new(name: &'static str) -> Self {
        El {
            name,
            attrs: Vec::new(),
            children: Vec::new(),
        }
    }

    fn attr(mut self, key: &'static str, value: impl ToString) -> Self {
        self.attrs.push((key, value.to_string()));
        self
    }

    fn opt(self, key: &'static str, value: Option<impl ToString>) -> Self {
        match value {
            Some(v) => self.attr(key, v),
            None => self,
        }
    }

    fn child(mut self, el: El) -> Self {
        self.children.push(el);
        self
    }

    fn render(&self, depth: usize, out: &mut String) {
        for _ in 0..depth {
            out.push_str("  ");
        }
        out.push('<');
        out.push_str(self.name);
        for (k, v) in &self.attrs {
            out.push(' ');
            out.push_str(k);
            out.push_str("=\"");
            escape_into(v, out);
            out.push('"');
        }
        if self.children.is_empty() {
            out.push_str("/>\n");
            return;
        }
        out.push_str(">\n");
        for c in &self.children {
            c.render(depth + 1, out);
        }
        for _ in 0..depth {
            out.push_str("  ");
        }
        out.push_str("</");
        out.push_str(self.name);
        out.push_str(">\n");
    }
}

fn escape_into(value: &str, out: &mut String) {
    for c in value.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\t' => out.push_str("&#9;"),
            '\n' => out.push_str("&#10;"),
            '\r' => out.push_str("&#13;"),
            c => out.push(c),
        }
    }
}

fn xml_char_ok(c: char) -> bool {
    matches!(c, '\t' | '\n' | '\r' | '\u{20}'..='\u{D7FF}' | '\u{E000}'..='\u{FFFD}' | '\u{10000}'..='\u{10FFFF}')
}

fn poag_el(p: &PoagRecord) -> El {
    let mut el = El::new("poag")
        .attr("item", &p.item)
        .attr("action", &p.action)
        .opt("goal", p.goal.as_ref());
    for pre in &p.prerequisites {
        let kind = (pre.kind != PrereqKind::ObjectPresent).then(|| pre.kind.as_str());
        el = el.child(
            El::new("prereq")
                .attr("name", &pre.name)
                .opt("state", pre.state.as_ref())
                .opt("kind", kind),
        );
    }
    for o in &p.outcome {
        el = el.child(
            El::new("outcome")
                .attr("name", &o.name)
                .opt("state", o.state.as_ref()),
        );
    }
    el
}

fn at(el: El, scene: &SceneId, p: Pos) -> El {
    el.attr("scene", scene).attr("x", p.x).attr("y", p.y)
}

fn payload_el(payload: &Payload) -> El {
    match payload {
        Payload::PlaceObject(pl) => {
            let mut el = El::new("place")
                .attr("instance", pl.instance)
                .attr("type", &pl.object_type);
            el = at(el, &pl.scene, pl.position);
            for s in &pl.states {
                el = el.child(El::new("state").attr("tag", s));
            }
            for ov in &pl.overrides {
                let mut o = El::new("override").attr("seq", ov.seq);
                if let Some(r) = &ov.replacement {
                    o = o.child(poag_el(r));
                }
                el = el.child(o);
            }
            el
        }
        Payload::DefineType(t) => {
            let mut el = El::new("type")
                .attr("name", &t.name)
                .opt("parent", t.parent.as_ref());
            for s in &t.recipe {
                el = el.child(
                    El::new("shape")
                        .attr("form", &s.shape)
                        .attr("transform", &s.transform),
                );
            }
            el
        }
        Payload::DefinePoag(p) | Payload::DefineCombination(p) => poag_el(p),
        Payload::EditTile(t) => at(El::new("tile"), &t.scene, t.position).attr("kind", t.tile.as_str()),
        Payload::EditScene(e) => match &e.edit {
            SceneEdit::RemoveInstance { instance } => El::new("remove")
                .attr("scene", &e.scene)
                .attr("instance", instance),
            SceneEdit::AddSpawn { position } => at(El::new("spawn"), &e.scene, *position),
            SceneEdit::AddGoal { goal } => El::new("goal").attr("scene", &e.scene).attr("name", goal),
            SceneEdit::SetStart { position } => at(El::new("start"), &e.scene, *position),
        },
        Payload::PlacePortal(p) => at(El::new("portal"), &p.scene, p.position)
            .attr("kind", p.kind.as_str())
            .opt("target", p.target.as_ref()),
        Payload::PlayEvent(e) => El::new("event")
            .attr("game", &e.game)
            .attr("turn", e.turn)
            .attr("kind", &e.kind)
            .attr("detail", &e.detail),
    }
}

/// Canonical serialization without reference checks.
pub fn write_session_xml(session: &Session) -> String {
    let mut root = El::new(ROOT)
        .attr("format", FORMAT)
        .attr("id", &session.id)
        .attr("designer", &session.designer)
        .attr("timestamp", &session.timestamp);
    for s in &session.scenes {
        root = root.child(El::new("scene").attr("id", s));
    }
    let mut actions = El::new("actions");
    for a in &session.actions {
        actions = actions.child(
            El::new("action")
                .attr("seq", a.seq)
                .attr("type", a.payload.kind())
                .child(payload_el(&a.payload)),
        );
    }
    root = root.child(actions);
    let mut out = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    root.render(0, &mut out);
    out
}

/// Validates the session against `kb` and writes its canonical XML.
pub fn export_session_xml(session: &Session, kb: &KnowledgeBase) -> Result<String, SessionError> {
    session.check(kb)?;
    let text = write_session_xml(session);
    if let Some(c) = text.chars().find(|c| !xml_char_ok(*c)) {
        return Err(SessionError::Invalid {
            seq: 0,
            message: format!("character {c:?} cannot be represented in xml"),
        });
    }
    Ok(text)
}

struct Reader<'a, 'input> {
    doc: &'a Document<'input>,
}

impl<'a, 'input> Reader<'a, 'input> {
    fn line(&self, node: Node) -> u32 {
        self.doc.text_pos_at(node.range().start).row
    }

    fn invalid(&self, node: Node, message: impl Into<String>) -> XmlError {
        XmlError::Invalid {
            line: self.line(node),
            message: message.into(),
        }
    }

    fn attr<'n>(&self, node: Node<'n, 'input>, key: &str) -> Result<&'n str, XmlError> {
        node.attribute(key).ok_or_else(|| {
            self.invalid(
                node,
                format!("<{}> is missing attribute `{key}`", node.tag_name().name()),
            )
        })
    }

    fn num<T: FromStr>(&self, node: Node, key: &str) -> Result<T, XmlError> {
        let raw = self.attr(node, key)?;
        raw.parse()
            .map_err(|_| self.invalid(node, format!("attribute `{key}`: bad number `{raw}`")))
    }

    fn pos(&self, node: Node) -> Result<Pos, XmlError> {
        Ok(Pos::new(self.num(node, "x")?, self.num(node, "y")?))
    }

    fn scene(&self, node: Node) -> Result<SceneId, XmlError> {
        Ok(SceneId(self.attr(node, "scene")?.to_string()))
    }

    /// Element children; stray non-whitespace text is an error.
    fn elements<'n>(&self, node: Node<'n, 'input>) -> Result<Vec<Node<'n, 'input>>, XmlError> {
        let mut out = Vec::new();
        for c in node.children() {
            if c.is_element() {
                out.push(c);
            } else if c.is_text() && !c.text().unwrap_or("").trim().is_empty() {
                return Err(self.invalid(c, "unexpected text content"));
            }
        }
        Ok(out)
    }

    fn expect(&self, node: Node, name: &str) -> Result<(), XmlError> {
        if node.tag_name().name() == name {
            Ok(())
        } else {
            Err(self.invalid(
                node,
                format!("expected <{name}>, found <{}>", node.tag_name().name()),
            ))
        }
    }

    fn single_child<'n>(&self, node: Node<'n, 'input>) -> Result<Node<'n, 'input>, XmlError> {
        let kids = self.elements(node)?;
        match kids.as_slice() {
            [one] => Ok(*one),
            _ => Err(self.invalid(node, "action must hold exactly one payload element")),
        }
    }

    fn poag(&self, node: Node) -> Result<PoagRecord, XmlError> {
        self.expect(node, "poag")?;
        let mut rec = PoagRecord {
            item: self.attr(node, "item")?.to_string(),
            action: self.attr(node, "action")?.to_string(),
            goal: node.attribute("goal").map(str::to_string),
            prerequisites: Vec::new(),
            outcome: Vec::new(),
        };
        for c in self.elements(node)? {
            match c.tag_name().name() {
                "prereq" => {
                    let kind = match c.attribute("kind") {
                        None => PrereqKind::ObjectPresent,
                        Some(k) => PrereqKind::parse(k)
                            .ok_or_else(|| self.invalid(c, format!("unknown prerequisite kind `{k}`")))?,
                    };
                    rec.prerequisites.push(Prerequisite {
                        kind,
                        name: self.attr(c, "name")?.to_string(),
                        state: c.attribute("state").map(str::to_string),
                    });
                }
                "outcome" => rec.outcome.push(OutcomeRecord {
                    name: self.attr(c, "name")?.to_string(),
                    state: c.attribute("state").map(str::to_string),
                }),
                other => return Err(self.invalid(c, format!("unexpected <{other}> in <poag>"))),
            }
        }
        Ok(rec)
    }

    fn payload(&self, kind: &str, node: Node) -> Result<Payload, XmlError> {
        let payload = match kind {
            "place-object" => {
                self.expect(node, "place")?;
                let mut rec = PlaceRecord {
                    instance: self.num(node, "instance")?,
                    object_type: self.attr(node, "type")?.to_string(),
                    scene: self.scene(node)?,
                    position: self.pos(node)?,
                    states: Vec::new(),
                    overrides: Vec::new(),
                };
                for c in self.elements(node)? {
                    match c.tag_name().name() {
                        "state" => rec.states.push(self.attr(c, "tag")?.to_string()),
                        "override" => {
                            let replacement = match self.elements(c)?.as_slice() {
                                [] => None,
                                [p] => Some(self.poag(*p)?),
                                _ => return Err(self.invalid(c, "override holds at most one <poag>")),
                            };
                            rec.overrides.push(OverrideRecord {
                                seq: self.num(c, "seq")?,
                                replacement,
                            });
                        }
                        other => return Err(self.invalid(c, format!("unexpected <{other}> in <place>"))),
                    }
                }
                Payload::PlaceObject(rec)
            }
            "define-type" => {
                self.expect(node, "type")?;
                let mut recipe = Vec::new();
                for c in self.elements(node)? {
                    self.expect(c, "shape")?;
                    recipe.push(ShapePart {
                        shape: self.attr(c, "form")?.to_string(),
                        transform: self.attr(c, "transform")?.to_string(),
                    });
                }
                Payload::DefineType(TypeRecord {
                    name: self.attr(node, "name")?.to_string(),
                    parent: node.attribute("parent").map(str::to_string),
                    recipe,
                })
            }
            "define-poag" => Payload::DefinePoag(self.poag(node)?),
            "define-combination" => Payload::DefineCombination(self.poag(node)?),
            "edit-tile" => {
                self.expect(node, "tile")?;
                let raw = self.attr(node, "kind")?;
                let tile = Tile::parse(raw).ok_or_else(|| self.invalid(node, format!("unknown tile kind `{raw}`")))?;
                Payload::EditTile(TileRecord {
                    scene: self.scene(node)?,
                    position: self.pos(node)?,
                    tile,
                })
            }
            "edit-scene" => {
                let edit = match node.tag_name().name() {
                    "remove" => SceneEdit::RemoveInstance {
                        instance: self.num(node, "instance")?,
                    },
                    "spawn" => SceneEdit::AddSpawn {
                        position: self.pos(node)?,
                    },
                    "goal" => SceneEdit::AddGoal {
                        goal: self.attr(node, "name")?.to_string(),
                    },
                    "start" => SceneEdit::SetStart {
                        position: self.pos(node)?,
                    },
                    other => return Err(self.invalid(node, format!("unexpected <{other}> for edit-scene"))),
                };
                if !self.elements(node)?.is_empty() {
                    return Err(self.invalid(node, "scene edits have no children"));
                }
                Payload::EditScene(SceneEditRecord {
                    scene: self.scene(node)?,
                    edit,
                })
            }
            "place-portal" => {
                self.expect(node, "portal")?;
                let kind = match self.attr(node, "kind")? {
                    "entry" => PortalKind::Entry,
                    "exit" => PortalKind::Exit,
                    other => return Err(self.invalid(node, format!("unknown portal kind `{other}`"))),
                };
                Payload::PlacePortal(PortalRecord {
                    scene: self.scene(node)?,
                    kind,
                    position: self.pos(node)?,
                    target: node.attribute("target").map(SceneId::from),
                })
            }
            "play-event" => {
                self.expect(node, "event")?;
                Payload::PlayEvent(EventRecord {
                    game: self.attr(node, "game")?.to_string(),
                    turn: self.num(node, "turn")?,
                    kind: self.attr(node, "kind")?.to_string(),
                    detail: self.attr(node, "detail")?.to_string(),
                })
            }
            other => unreachable!("kind `{other}` is checked by the caller"),
        };
        Ok(payload)
    }
}

pub fn parse_session_xml(text: &str) -> Result<Session, XmlError> {
    let doc = Document::parse(text).map_err(|e| XmlError::Malformed {
        line: e.pos().row,
        message: e.to_string(),
    })?;
    let r = Reader { doc: &doc };
    let root = doc.root_element();
    if root.tag_name().name() != ROOT {
        return Err(r.invalid(root, format!("root element must be <{ROOT}>")));
    }
    let format = r.attr(root, "format")?;
    if format != FORMAT {
        return Err(r.invalid(root, format!("unsupported format `{format}`")));
    }
    let mut session = Session::new(
        r.attr(root, "id")?,
        r.attr(root, "designer")?,
        r.attr(root, "timestamp")?,
    );
    let mut actions_seen = false;
    for el in r.elements(root)? {
        match el.tag_name().name() {
            "scene" => session.scenes.push(SceneId(r.attr(el, "id")?.to_string())),
            "actions" => {
                if actions_seen {
                    return Err(r.invalid(el, "more than one <actions> element"));
                }
                actions_seen = true;
                let mut seen = BTreeSet::new();
                for a in r.elements(el)? {
                    r.expect(a, "action")?;
                    let line = r.line(a);
                    let seq: u32 = r.num(a, "seq")?;
                    let kind = r.attr(a, "type")?;
                    if !ACTION_KINDS.contains(&kind) {
                        return Err(XmlError::UnknownKind {
                            kind: kind.to_string(),
                            line,
                        });
                    }
                    if !seen.insert(seq) {
                        return Err(XmlError::DuplicateSequence { seq, line });
                    }
                    let expected = session.actions.len() as u32 + 1;
                    if seq != expected {
                        return Err(XmlError::SequenceGap {
                            expected,
                            found: seq,
                            line,
                        });
                    }
                    let payload = r.payload(kind, r.single_child(a)?)?;
                    session.actions.push(SessionAction { seq, payload });
                }
            }
            other => return Err(r.invalid(el, format!("unexpected <{other}> in <{ROOT}>"))),
        }
    }
    if !actions_seen {
        return Err(r.invalid(root, "missing <actions> element"));
    }
    Ok(session)
}
