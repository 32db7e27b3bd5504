//! Tile scenes as authored in the editor: the grid, placed instances,
//! portals, monster spawns and scene goals.
//!
//! Scenes are plain values. [`Scene::apply_edit`] returns a new scene and
//! rejects any edit that would break bounds, floor-only placement or the
//! single-entry rule. Whole-scene checks that may legitimately fail while a
//! level is still being built live in [`validate_scene`].

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kb::{GoalId, InstanceId, KnowledgeBase, ObjectTypeId, Poag};

pub const DEFAULT_SIZE: u32 = 32;
pub const MAX_SIZE: u32 = 256;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SceneId(pub String);

impl From<&str> for SceneId {
    fn from(s: &str) -> Self {
        SceneId(s.to_string())
    }
}

impl fmt::Display for SceneId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Pos {
    pub x: i32,
    pub y: i32,
}

impl Pos {
    pub const fn new(x: i32, y: i32) -> Self {
        Pos { x, y }
    }

    /// Neighbours in expansion order: north, east, south, west.
    pub fn neighbors4(self) -> [Pos; 4] {
        [
            Pos::new(self.x, self.y - 1),
            Pos::new(self.x + 1, self.y),
            Pos::new(self.x, self.y + 1),
            Pos::new(self.x - 1, self.y),
        ]
    }

    pub fn manhattan(self, other: Pos) -> u32 {
        self.x.abs_diff(other.x) + self.y.abs_diff(other.y)
    }

    pub fn chebyshev(self, other: Pos) -> u32 {
        self.x.abs_diff(other.x).max(self.y.abs_diff(other.y))
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Tile {
    Floor,
    Wall,
    Void,
}

impl Tile {
    pub fn glyph(self) -> char {
        match self {
            Tile::Floor => '.',
            Tile::Wall => '#',
            Tile::Void => ' ',
        }
    }

    pub fn from_glyph(c: char) -> Option<Tile> {
        match c {
            '.' => Some(Tile::Floor),
            '#' => Some(Tile::Wall),
            ' ' => Some(Tile::Void),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Tile::Floor => "floor",
            Tile::Wall => "wall",
            Tile::Void => "void",
        }
    }

    pub fn parse(s: &str) -> Option<Tile> {
        match s {
            "floor" => Some(Tile::Floor),
            "wall" => Some(Tile::Wall),
            "void" => Some(Tile::Void),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PortalKind {
    Entry,
    Exit,
}

impl PortalKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PortalKind::Entry => "entry",
            PortalKind::Exit => "exit",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Portal {
    pub kind: PortalKind,
    pub position: Pos,
    pub target_scene: Option<SceneId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Placement {
    pub instance: InstanceId,
    #[serde(rename = "type")]
    pub object_type: ObjectTypeId,
    pub position: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SceneDoc", into = "SceneDoc")]
pub struct Scene {
    pub id: SceneId,
    pub name: String,
    pub width: u32,
    pub height: u32,
    tiles: Vec<Tile>,
    pub instances: Vec<Placement>,
    pub portals: Vec<Portal>,
    pub monster_spawns: Vec<Pos>,
    pub goals: Vec<GoalId>,
    pub start_position: Option<Pos>,
}

/// On-disk shape: tiles as one glyph string per row.
#[derive(Serialize, Deserialize)]
struct SceneDoc {
    id: SceneId,
    name: String,
    width: u32,
    height: u32,
    tiles: Vec<String>,
    instances: Vec<Placement>,
    portals: Vec<Portal>,
    monster_spawns: Vec<Pos>,
    goals: Vec<GoalId>,
    start_position: Option<Pos>,
}

impl TryFrom<SceneDoc> for Scene {
    type Error = String;

    fn try_from(doc: SceneDoc) -> Result<Self, String> {
        check_dimensions(doc.width, doc.height).map_err(|e| e.to_string())?;
        if doc.tiles.len() != doc.height as usize {
            return Err(format!(
                "expected {} tile rows, found {}",
                doc.height,
                doc.tiles.len()
            ));
        }
        let mut tiles = Vec::with_capacity((doc.width * doc.height) as usize);
        for (y, row) in doc.tiles.iter().enumerate() {
            let before = tiles.len();
            for c in row.chars() {
                tiles.push(
                    Tile::from_glyph(c).ok_or_else(|| format!("row {y}: bad tile glyph {c:?}"))?,
                );
            }
            if tiles.len() - before != doc.width as usize {
                return Err(format!("row {y}: expected {} tiles", doc.width));
            }
        }
        Ok(Scene {
            id: doc.id,
            name: doc.name,
            width: doc.width,
            height: doc.height,
            tiles,
            instances: doc.instances,
            portals: doc.portals,
            monster_spawns: doc.monster_spawns,
            goals: doc.goals,
            start_position: doc.start_position,
        })
    }
}

impl From<Scene> for SceneDoc {
    fn from(s: Scene) -> Self {
        let tiles = s.rows();
        SceneDoc {
            id: s.id,
            name: s.name,
            width: s.width,
            height: s.height,
            tiles,
            instances: s.instances,
            portals: s.portals,
            monster_spawns: s.monster_spawns,
            goals: s.goals,
            start_position: s.start_position,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "kebab-case")]
pub enum EditOp {
    SetTile { position: Pos, tile: Tile },
    PlaceInstance {
        instance: InstanceId,
        #[serde(rename = "type")]
        object_type: ObjectTypeId,
        position: Pos,
    },
    RemoveInstance { instance: InstanceId },
    PlacePortal { portal: Portal },
    AddSpawn { position: Pos },
    AddGoal { goal: GoalId },
    SetStart { position: Pos },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SceneError {
    #[error("scene size {0}x{1} outside 1..={MAX_SIZE}")]
    BadDimensions(u32, u32),
    #[error("position {0} out of bounds")]
    OutOfBounds(Pos),
    #[error("position {0} is not a floor tile")]
    NotFloor(Pos),
    #[error("position {0} is occupied")]
    Occupied(Pos),
    #[error("scene already has an entry portal")]
    DuplicateEntry,
    #[error("entry portals cannot target another scene")]
    EntryWithTarget,
    #[error("instance {0} already placed")]
    DuplicateInstance(InstanceId),
    #[error("instance {0} not in scene")]
    UnknownInstance(InstanceId),
    #[error("goal {0} already listed")]
    DuplicateGoal(GoalId),
}

fn check_dimensions(width: u32, height: u32) -> Result<(), SceneError> {
    if width == 0 || height == 0 || width > MAX_SIZE || height > MAX_SIZE {
        return Err(SceneError::BadDimensions(width, height));
    }
    Ok(())
}

impl Scene {
    /// An all-floor scene with nothing placed.
    pub fn new(id: SceneId, name: &str, width: u32, height: u32) -> Result<Self, SceneError> {
        Self::filled(id, name, width, height, Tile::Floor)
    }

    pub fn filled(
        id: SceneId,
        name: &str,
        width: u32,
        height: u32,
        tile: Tile,
    ) -> Result<Self, SceneError> {
        check_dimensions(width, height)?;
        Ok(Scene {
            id,
            name: name.to_string(),
            width,
            height,
            tiles: vec![tile; (width * height) as usize],
            instances: Vec::new(),
            portals: Vec::new(),
            monster_spawns: Vec::new(),
            goals: Vec::new(),
            start_position: None,
        })
    }

    /// Builds a scene from glyph rows (`.` floor, `#` wall, space void).
    pub fn from_rows(id: SceneId, rows: &[&str]) -> Result<Self, String> {
        let height = rows.len() as u32;
        let width = rows.first().map(|r| r.chars().count()).unwrap_or(0) as u32;
        Scene::try_from(SceneDoc {
            id: id.clone(),
            name: id.0,
            width,
            height,
            tiles: rows.iter().map(|r| r.to_string()).collect(),
            instances: Vec::new(),
            portals: Vec::new(),
            monster_spawns: Vec::new(),
            goals: Vec::new(),
            start_position: None,
        })
    }

    pub fn rows(&self) -> Vec<String> {
        self.tiles
            .chunks(self.width as usize)
            .map(|row| row.iter().map(|t| t.glyph()).collect())
            .collect()
    }

    pub fn in_bounds(&self, p: Pos) -> bool {
        p.x >= 0 && p.y >= 0 && (p.x as u32) < self.width && (p.y as u32) < self.height
    }

    fn index(&self, p: Pos) -> usize {
        p.y as usize * self.width as usize + p.x as usize
    }

    pub fn tile(&self, p: Pos) -> Option<Tile> {
        self.in_bounds(p).then(|| self.tiles[self.index(p)])
    }

    pub fn is_floor(&self, p: Pos) -> bool {
        self.tile(p) == Some(Tile::Floor)
    }

    /// Raw tile write with no occupancy checks; generators use this.
    pub fn set_tile(&mut self, p: Pos, tile: Tile) {
        if self.in_bounds(p) {
            let i = self.index(p);
            self.tiles[i] = tile;
        }
    }

    pub fn positions(&self) -> impl Iterator<Item = Pos> + '_ {
        (0..self.height as i32).flat_map(move |y| (0..self.width as i32).map(move |x| Pos::new(x, y)))
    }

    pub fn floor_count(&self) -> usize {
        self.tiles.iter().filter(|t| **t == Tile::Floor).count()
    }

    pub fn entry(&self) -> Option<&Portal> {
        self.portals.iter().find(|p| p.kind == PortalKind::Entry)
    }

    pub fn exits(&self) -> impl Iterator<Item = &Portal> {
        self.portals.iter().filter(|p| p.kind == PortalKind::Exit)
    }

    pub fn exit_at(&self, p: Pos) -> Option<&Portal> {
        self.exits().find(|e| e.position == p)
    }

    pub fn placement(&self, id: InstanceId) -> Option<&Placement> {
        self.instances.iter().find(|i| i.instance == id)
    }

    fn occupied(&self, p: Pos) -> bool {
        self.instances.iter().any(|i| i.position == p)
            || self.portals.iter().any(|q| q.position == p)
            || self.monster_spawns.contains(&p)
            || self.start_position == Some(p)
    }

    fn floor_at(&self, p: Pos) -> Result<(), SceneError> {
        match self.tile(p) {
            None => Err(SceneError::OutOfBounds(p)),
            Some(Tile::Floor) => Ok(()),
            Some(_) => Err(SceneError::NotFloor(p)),
        }
    }

    pub fn apply_edit(&self, op: &EditOp) -> Result<Scene, SceneError> {
        let mut next = self.clone();
        next.apply_in_place(op)?;
        Ok(next)
    }

    pub fn apply_in_place(&mut self, op: &EditOp) -> Result<(), SceneError> {
        match op {
            EditOp::SetTile { position, tile } => {
                if !self.in_bounds(*position) {
                    return Err(SceneError::OutOfBounds(*position));
                }
                if *tile != Tile::Floor && self.occupied(*position) {
                    return Err(SceneError::Occupied(*position));
                }
                self.set_tile(*position, *tile);
            }
            EditOp::PlaceInstance {
                instance,
                object_type,
                position,
            } => {
                self.floor_at(*position)?;
                if self.placement(*instance).is_some() {
                    return Err(SceneError::DuplicateInstance(*instance));
                }
                if self.instances.iter().any(|i| i.position == *position) {
                    return Err(SceneError::Occupied(*position));
                }
                self.instances.push(Placement {
                    instance: *instance,
                    object_type: *object_type,
                    position: *position,
                });
            }
            EditOp::RemoveInstance { instance } => {
                let idx = self
                    .instances
                    .iter()
                    .position(|i| i.instance == *instance)
                    .ok_or(SceneError::UnknownInstance(*instance))?;
                self.instances.remove(idx);
            }
            EditOp::PlacePortal { portal } => {
                self.floor_at(portal.position)?;
                if portal.kind == PortalKind::Entry {
                    if portal.target_scene.is_some() {
                        return Err(SceneError::EntryWithTarget);
                    }
                    if self.entry().is_some() {
                        return Err(SceneError::DuplicateEntry);
                    }
                    self.start_position = Some(portal.position);
                }
                self.portals.push(portal.clone());
            }
            EditOp::AddSpawn { position } => {
                self.floor_at(*position)?;
                if self.monster_spawns.contains(position) {
                    return Err(SceneError::Occupied(*position));
                }
                self.monster_spawns.push(*position);
            }
            EditOp::AddGoal { goal } => {
                if self.goals.contains(goal) {
                    return Err(SceneError::DuplicateGoal(*goal));
                }
                self.goals.push(*goal);
            }
            EditOp::SetStart { position } => {
                self.floor_at(*position)?;
                self.start_position = Some(*position);
            }
        }
        Ok(())
    }

    /// Floor tiles 4-connected to `from` (empty if `from` is not floor).
    pub fn flood_fill(&self, from: Pos) -> BTreeSet<Pos> {
        let mut seen = BTreeSet::new();
        if !self.is_floor(from) {
            return seen;
        }
        let mut queue = VecDeque::from([from]);
        seen.insert(from);
        while let Some(p) = queue.pop_front() {
            for n in p.neighbors4() {
                if self.is_floor(n) && seen.insert(n) {
                    queue.push_back(n);
                }
            }
        }
        seen
    }

    /// Canonical JSON document.
    pub fn to_canonical_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scene serializes") + "\n"
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "issue", rename_all = "kebab-case")]
pub enum Issue {
    MissingEntry,
    MultipleEntries { count: usize },
    MissingExit,
    EntryWithTarget,
    StartMismatch,
    OutOfBounds { what: String, position: Pos },
    NonFloor { what: String, position: Pos },
    SpawnOnStart { position: Pos },
    UnreachableExit { position: Pos },
    DanglingType { instance: InstanceId, object_type: ObjectTypeId },
    UnknownGoal { goal: GoalId },
    GoalUnsatisfiable { goal: GoalId },
}

impl Issue {
    pub fn severity(&self) -> Severity {
        match self {
            Issue::GoalUnsatisfiable { .. } => Severity::Warning,
            _ => Severity::Error,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub issues: Vec<Issue>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.issues.is_empty()
    }

    pub fn has_errors(&self) -> bool {
        self.issues.iter().any(|i| i.severity() == Severity::Error)
    }

    pub fn errors(&self) -> impl Iterator<Item = &Issue> {
        self.issues.iter().filter(|i| i.severity() == Severity::Error)
    }
}

/// Reports every problem found; never fails.
pub fn validate_scene(scene: &Scene, kb: &KnowledgeBase) -> ValidationReport {
    let mut issues = Vec::new();
    let entries: Vec<&Portal> = scene
        .portals
        .iter()
        .filter(|p| p.kind == PortalKind::Entry)
        .collect();
    match entries.len() {
        0 => issues.push(Issue::MissingEntry),
        1 => {}
        n => issues.push(Issue::MultipleEntries { count: n }),
    }
    if entries.iter().any(|e| e.target_scene.is_some()) {
        issues.push(Issue::EntryWithTarget);
    }
    if scene.exits().next().is_none() {
        issues.push(Issue::MissingExit);
    }
    if let Some(entry) = entries.first() {
        if scene.start_position != Some(entry.position) {
            issues.push(Issue::StartMismatch);
        }
    }

    let check_pos = |what: &str, p: Pos, issues: &mut Vec<Issue>| match scene.tile(p) {
        None => issues.push(Issue::OutOfBounds {
            what: what.to_string(),
            position: p,
        }),
        Some(Tile::Floor) => {}
        Some(_) => issues.push(Issue::NonFloor {
            what: what.to_string(),
            position: p,
        }),
    };
    for i in &scene.instances {
        check_pos("instance", i.position, &mut issues);
    }
    for p in &scene.portals {
        check_pos(p.kind.as_str(), p.position, &mut issues);
    }
    for s in &scene.monster_spawns {
        check_pos("spawn", *s, &mut issues);
        if scene.start_position == Some(*s) {
            issues.push(Issue::SpawnOnStart { position: *s });
        }
    }
    if let Some(s) = scene.start_position {
        check_pos("start", s, &mut issues);
    }

    let reachable = entries.first().map(|e| scene.flood_fill(e.position));
    if let Some(reach) = &reachable {
        for exit in scene.exits() {
            if !reach.contains(&exit.position) {
                issues.push(Issue::UnreachableExit {
                    position: exit.position,
                });
            }
        }
    }

    for i in &scene.instances {
        let known = kb.object_type(i.object_type).is_some();
        let consistent = kb
            .instance(i.instance)
            .is_none_or(|inst| inst.object_type == i.object_type);
        if !known || !consistent {
            issues.push(Issue::DanglingType {
                instance: i.instance,
                object_type: i.object_type,
            });
        }
    }

    let achievable = achievable_goals(scene, kb, reachable.as_ref());
    for g in &scene.goals {
        if kb.goal(*g).is_none() {
            issues.push(Issue::UnknownGoal { goal: *g });
        } else if !achievable.contains(g) {
            issues.push(Issue::GoalUnsatisfiable { goal: *g });
        }
    }
    ValidationReport { issues }
}

/// Goals some sequence of POAG firings could reach from the placed items,
/// ignoring consumption. Only instances on tiles reachable from the entry
/// count (all instances when there is no entry). Over-approximates, so a goal
/// missing from the result is certainly unreachable.
fn achievable_goals(
    scene: &Scene,
    kb: &KnowledgeBase,
    reachable: Option<&BTreeSet<Pos>>,
) -> BTreeSet<GoalId> {
    let mut have: BTreeSet<(ObjectTypeId, Option<String>)> = BTreeSet::new();
    let mut pool: Vec<Poag> = Vec::new();
    let mut pooled_types: BTreeSet<ObjectTypeId> = BTreeSet::new();
    let no_overrides = BTreeMap::new();

    for p in &scene.instances {
        if kb.object_type(p.object_type).is_none() {
            continue;
        }
        if reachable.is_some_and(|r| !r.contains(&p.position)) {
            continue;
        }
        have.insert((p.object_type, None));
        let overrides = match kb.instance(p.instance) {
            Some(inst) if inst.object_type == p.object_type => {
                for tag in &inst.state_tags {
                    have.insert((p.object_type, Some(tag.clone())));
                }
                &inst.overrides
            }
            _ => &no_overrides,
        };
        // Plain instances share their type's rule set; instances with
        // exceptions contribute their own.
        if overrides.is_empty() && !pooled_types.insert(p.object_type) {
            continue;
        }
        pool.extend(kb.poags_with_overrides(p.object_type, overrides).unwrap_or_default());
    }

    let mut fired = vec![false; pool.len()];
    let mut done_verbs: BTreeSet<String> = BTreeSet::new();
    let mut goals = BTreeSet::new();
    loop {
        let mut progress = false;
        let mut i = 0;
        while i < pool.len() {
            if fired[i] {
                i += 1;
                continue;
            }
            let poag = &pool[i];
            let ok = poag.prerequisites.iter().all(|pre| {
                if pre.needs_item() {
                    have.iter().any(|(t, s)| {
                        (pre.state.is_none() || pre.state == *s) && kb.type_is_a(*t, &pre.name)
                    })
                } else {
                    done_verbs.contains(&pre.name)
                }
            });
            if ok {
                fired[i] = true;
                progress = true;
                done_verbs.insert(kb.verb(poag.action).to_string());
                if let Some(g) = poag.goal {
                    goals.insert(g);
                }
                let outcomes = poag.outcome.clone();
                for o in outcomes {
                    have.insert((o.object, None));
                    have.insert((o.object, o.state.clone()));
                    if pooled_types.insert(o.object) {
                        let extra = kb
                            .poags_with_overrides(o.object, &no_overrides)
                            .unwrap_or_default();
                        fired.extend(std::iter::repeat_n(false, extra.len()));
                        pool.extend(extra);
                    }
                }
            }
            i += 1;
        }
        if !progress {
            break;
        }
    }
    goals
}
