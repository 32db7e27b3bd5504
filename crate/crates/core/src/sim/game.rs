//! Turn-based player runtime.
//!
//! Every step runs four phases in a fixed order: the player's command, fog
//! reveal, zombie pursuit, then win/lose resolution.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::path::{astar, visible_tiles};
use super::rng::SplitMix64;
use crate::kb::{
    Available, GoalId, InstanceId, KnowledgeBase, ObjectTypeId, PoagId, Resolution, WORLD_TYPE,
};
use crate::scene::{validate_scene, Issue, Pos, Scene, SceneId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameConfig {
    /// Chebyshev vision radius.
    pub vision_radius: u32,
    pub initial_health: u32,
}

impl Default for GameConfig {
    fn default() -> Self {
        GameConfig {
            vision_radius: 3,
            initial_health: 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Running,
    Won,
    Lost,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Running => "running",
            Status::Won => "won",
            Status::Lost => "lost",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Character {
    pub position: Pos,
    /// Held item ids, ascending.
    pub inventory: BTreeSet<InstanceId>,
    pub health: u32,
    /// Remaining hops of the current move, next hop first.
    pub pending_path: Option<Vec<Pos>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Zombie {
    pub id: u32,
    pub position: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "where", rename_all = "kebab-case")]
pub enum ItemLocation {
    Inventory,
    Scene { scene: SceneId, position: Pos },
}

/// An object in play: a placed instance or something a POAG produced.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameItem {
    pub object_type: ObjectTypeId,
    pub state: Option<String>,
    pub location: ItemLocation,
    /// Placed instances resolve through their own exceptions.
    pub placed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameState {
    pub scene: SceneId,
    pub character: Character,
    pub zombies: Vec<Zombie>,
    pub revealed: BTreeMap<SceneId, BTreeSet<Pos>>,
    pub completed_goals: BTreeSet<GoalId>,
    pub turn: u32,
    /// Generator state, carried so that rules drawing randomness stay
    /// replayable. The current rules draw nothing.
    pub rng_state: SplitMix64,
    pub status: Status,
    /// Applied (verb, item type) pairs, oldest first.
    pub action_history: Vec<(String, String)>,
    pub items: BTreeMap<InstanceId, GameItem>,
    /// States set on the world pseudo-object.
    pub world_states: BTreeSet<String>,
    pub next_item: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    MoveTo { target: Pos },
    Interact { instance: InstanceId, action: String },
    Combine {
        item: InstanceId,
        action: String,
        ingredients: Vec<InstanceId>,
    },
    UsePortal,
    Wait,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "kebab-case")]
pub enum Event {
    Moved { from: Pos, to: Pos },
    Arrived { position: Pos },
    NoPath { target: Pos },
    PoagApplied {
        poag: PoagId,
        item: InstanceId,
        action: String,
        consumed: Vec<InstanceId>,
        produced: Vec<InstanceId>,
        world_states: Vec<String>,
    },
    NoMatch { item: InstanceId, action: String },
    GoalCompleted { goal: GoalId, description: String },
    SceneChanged { from: SceneId, to: SceneId },
    PortalLocked { missing: Vec<GoalId> },
    NotOnExit { position: Pos },
    Waited {},
    ZombieMoved { zombie: u32, from: Pos, to: Pos },
    Damage { zombie: u32, health: u32 },
    StatusChanged { status: Status },
}

impl Event {
    pub fn kind(&self) -> &'static str {
        match self {
            Event::Moved { .. } => "moved",
            Event::Arrived { .. } => "arrived",
            Event::NoPath { .. } => "no-path",
            Event::PoagApplied { .. } => "poag-applied",
            Event::NoMatch { .. } => "no-match",
            Event::GoalCompleted { .. } => "goal-completed",
            Event::SceneChanged { .. } => "scene-changed",
            Event::PortalLocked { .. } => "portal-locked",
            Event::NotOnExit { .. } => "not-on-exit",
            Event::Waited {} => "waited",
            Event::ZombieMoved { .. } => "zombie-moved",
            Event::Damage { .. } => "damage",
            Event::StatusChanged { .. } => "status-changed",
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GameError {
    #[error("scene `{0}` is not loaded")]
    UnknownScene(SceneId),
    #[error("invalid scene: {}", describe(.0))]
    InvalidScene(Vec<Issue>),
    #[error("game is over ({})", .0.as_str())]
    Finished(Status),
    #[error("target {0} is out of bounds")]
    OutOfBounds(Pos),
    #[error("no item {0} in play")]
    UnknownItem(InstanceId),
    #[error("item {0} is neither held nor within reach")]
    OutOfReach(InstanceId),
    #[error("ingredient {0} listed twice or equal to the item")]
    RepeatedIngredient(InstanceId),
}

fn describe(issues: &[Issue]) -> String {
    issues
        .iter()
        .map(|i| serde_json::to_string(i).unwrap_or_default())
        .collect::<Vec<_>>()
        .join("; ")
}

/// A running game: shared, immutable rules and scenes plus the evolving
/// state.
#[derive(Debug, Clone)]
pub struct Game {
    kb: Arc<KnowledgeBase>,
    scenes: Arc<BTreeMap<SceneId, Scene>>,
    config: GameConfig,
    state: GameState,
    seed: u64,
}

/// Starts a single-scene game with the default configuration.
pub fn start_game(scene: &Scene, kb: &KnowledgeBase, seed: u64) -> Result<Game, GameError> {
    let scenes = BTreeMap::from([(scene.id.clone(), scene.clone())]);
    Game::new(Arc::new(kb.clone()), Arc::new(scenes), &scene.id, seed, GameConfig::default())
}

fn hard_errors(scene: &Scene, kb: &KnowledgeBase) -> Vec<Issue> {
    validate_scene(scene, kb).errors().cloned().collect()
}

fn spawn_zombies(scene: &Scene, character: Pos) -> Vec<Zombie> {
    let mut taken = BTreeSet::from([character]);
    let mut out = Vec::new();
    for &p in &scene.monster_spawns {
        if scene.is_floor(p) && taken.insert(p) {
            out.push(Zombie {
                id: out.len() as u32 + 1,
                position: p,
            });
        }
    }
    out
}

impl Game {
    /// Starts at the entry of `start`. Every scene is validated up front;
    /// portals may lead to any of them.
    pub fn new(
        kb: Arc<KnowledgeBase>,
        scenes: Arc<BTreeMap<SceneId, Scene>>,
        start: &SceneId,
        seed: u64,
        config: GameConfig,
    ) -> Result<Game, GameError> {
        let scene = scenes
            .get(start)
            .ok_or_else(|| GameError::UnknownScene(start.clone()))?;
        for s in scenes.values() {
            let errors = hard_errors(s, &kb);
            if !errors.is_empty() {
                return Err(GameError::InvalidScene(errors));
            }
        }
        let entry = scene.entry().expect("validated scene has an entry").position;

        let mut items = BTreeMap::new();
        let mut next_item = 0;
        for s in scenes.values() {
            for pl in &s.instances {
                let state = kb
                    .instance(pl.instance)
                    .and_then(|i| i.state_tags.iter().next().cloned());
                items.insert(
                    pl.instance,
                    GameItem {
                        object_type: pl.object_type,
                        state,
                        location: ItemLocation::Scene {
                            scene: s.id.clone(),
                            position: pl.position,
                        },
                        placed: kb.instance(pl.instance).is_some(),
                    },
                );
                next_item = next_item.max(pl.instance.0);
            }
        }
        next_item = next_item.max(kb.instances().map(|i| i.id.0).max().unwrap_or(0));

        let revealed = BTreeMap::from([(
            start.clone(),
            visible_tiles(scene, entry, config.vision_radius),
        )]);
        let state = GameState {
            scene: start.clone(),
            character: Character {
                position: entry,
                inventory: BTreeSet::new(),
                health: config.initial_health,
                pending_path: None,
            },
            zombies: spawn_zombies(scene, entry),
            revealed,
            completed_goals: BTreeSet::new(),
            turn: 0,
            rng_state: SplitMix64::new(seed),
            status: Status::Running,
            action_history: Vec::new(),
            items,
            world_states: BTreeSet::new(),
            next_item: next_item + 1,
        };
        Ok(Game {
            kb,
            scenes,
            config,
            state,
            seed,
        })
    }

    pub fn state(&self) -> &GameState {
        &self.state
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn config(&self) -> GameConfig {
        self.config
    }

    pub fn kb(&self) -> &KnowledgeBase {
        &self.kb
    }

    pub fn scene(&self) -> &Scene {
        &self.scenes[&self.state.scene]
    }

    pub fn scenes(&self) -> &BTreeMap<SceneId, Scene> {
        &self.scenes
    }

    pub fn revealed(&self) -> &BTreeSet<Pos> {
        static EMPTY: BTreeSet<Pos> = BTreeSet::new();
        self.state.revealed.get(&self.state.scene).unwrap_or(&EMPTY)
    }

    /// Item ids lying in the current scene.
    pub fn scene_items(&self) -> impl Iterator<Item = (InstanceId, Pos)> + '_ {
        self.state.items.iter().filter_map(|(id, it)| match &it.location {
            ItemLocation::Scene { scene, position } if *scene == self.state.scene => {
                Some((*id, *position))
            }
            _ => None,
        })
    }

    /// Runs one turn. Errors leave the state untouched.
    pub fn step(&mut self, cmd: &Command) -> Result<Vec<Event>, GameError> {
        if self.state.status != Status::Running {
            return Err(GameError::Finished(self.state.status));
        }
        let mut next = self.state.clone();
        let mut events = Vec::new();
        let escaped = self.player_phase(&mut next, cmd, &mut events)?;

        let scene = &self.scenes[&next.scene];
        let seen = visible_tiles(scene, next.character.position, self.config.vision_radius);
        next.revealed.entry(next.scene.clone()).or_default().extend(seen);

        if !escaped {
            zombie_phase(scene, &mut next, &mut events);
        }

        if next.character.health == 0 {
            next.status = Status::Lost;
        } else if escaped {
            next.status = Status::Won;
        }
        if next.status != Status::Running {
            events.push(Event::StatusChanged {
                status: next.status,
            });
        }
        next.turn += 1;
        self.state = next;
        Ok(events)
    }

    fn reachable(&self, st: &GameState, id: InstanceId) -> Result<(), GameError> {
        let item = st.items.get(&id).ok_or(GameError::UnknownItem(id))?;
        match &item.location {
            ItemLocation::Inventory => Ok(()),
            ItemLocation::Scene { scene, position }
                if *scene == st.scene && position.manhattan(st.character.position) <= 1 =>
            {
                Ok(())
            }
            _ => Err(GameError::OutOfReach(id)),
        }
    }

    /// Returns true when the character leaves through a final exit.
    fn player_phase(
        &self,
        st: &mut GameState,
        cmd: &Command,
        events: &mut Vec<Event>,
    ) -> Result<bool, GameError> {
        let scene = &self.scenes[&st.scene];
        match cmd {
            Command::MoveTo { target } => {
                if !scene.in_bounds(*target) {
                    return Err(GameError::OutOfBounds(*target));
                }
                let here = st.character.position;
                if *target == here {
                    st.character.pending_path = None;
                    events.push(Event::Arrived { position: here });
                    return Ok(false);
                }
                // Plan over what the player has seen, avoiding zombies.
                let revealed = st.revealed.get(&st.scene);
                let zombies: BTreeSet<Pos> = st.zombies.iter().map(|z| z.position).collect();
                let passable = |p: Pos| {
                    scene.is_floor(p)
                        && !zombies.contains(&p)
                        && (p == *target || revealed.is_some_and(|r| r.contains(&p)))
                };
                match astar(scene.width, scene.height, here, *target, passable) {
                    Some(path) => {
                        let hop = path[1];
                        st.character.position = hop;
                        let rest: Vec<Pos> = path[2..].to_vec();
                        st.character.pending_path = (!rest.is_empty()).then_some(rest);
                        events.push(Event::Moved { from: here, to: hop });
                        if hop == *target {
                            events.push(Event::Arrived { position: hop });
                        }
                    }
                    None => {
                        st.character.pending_path = None;
                        events.push(Event::NoPath { target: *target });
                    }
                }
                Ok(false)
            }
            Command::Interact { instance, action } => {
                self.reachable(st, *instance)?;
                let mut pool: Vec<InstanceId> = st.character.inventory.iter().copied().collect();
                let here = st.character.position;
                for (id, it) in &st.items {
                    if let ItemLocation::Scene { scene: s, position } = &it.location {
                        if *s == st.scene && position.manhattan(here) <= 1 {
                            pool.push(*id);
                        }
                    }
                }
                pool.sort();
                pool.dedup();
                pool.retain(|id| id != instance);
                self.apply(st, *instance, action, &pool, events);
                Ok(false)
            }
            Command::Combine {
                item,
                action,
                ingredients,
            } => {
                self.reachable(st, *item)?;
                let mut seen = BTreeSet::from([*item]);
                for i in ingredients {
                    if !seen.insert(*i) {
                        return Err(GameError::RepeatedIngredient(*i));
                    }
                    self.reachable(st, *i)?;
                }
                self.apply(st, *item, action, ingredients, events);
                Ok(false)
            }
            Command::UsePortal => {
                let here = st.character.position;
                let Some(exit) = scene.exit_at(here) else {
                    events.push(Event::NotOnExit { position: here });
                    return Ok(false);
                };
                match exit.target_scene.as_ref().and_then(|t| self.scenes.get(t)) {
                    Some(target) => {
                        let entry = target.entry().expect("validated").position;
                        events.push(Event::SceneChanged {
                            from: st.scene.clone(),
                            to: target.id.clone(),
                        });
                        st.scene = target.id.clone();
                        st.character.position = entry;
                        st.character.pending_path = None;
                        st.zombies = spawn_zombies(target, entry);
                        Ok(false)
                    }
                    None => {
                        let missing: Vec<GoalId> = scene
                            .goals
                            .iter()
                            .filter(|g| !st.completed_goals.contains(g))
                            .copied()
                            .collect();
                        if missing.is_empty() {
                            Ok(true)
                        } else {
                            events.push(Event::PortalLocked { missing });
                            Ok(false)
                        }
                    }
                }
            }
            Command::Wait => {
                events.push(Event::Waited {});
                Ok(false)
            }
        }
    }

    fn resolve(&self, st: &GameState, item: InstanceId, verb: &str, pool: &[InstanceId]) -> Option<Resolution> {
        let action = self.kb.action_by_verb(verb)?;
        let mut available = Available::items(pool.iter().map(|id| {
            let it = &st.items[id];
            (it.object_type, it.state.clone())
        }));
        available.actions_done = st.action_history.iter().map(|(v, _)| v.clone()).collect();
        let it = &st.items[&item];
        let found = if it.placed {
            self.kb.resolve_for_instance(item, action, &available)
        } else {
            self.kb.resolve_combination(it.object_type, action, &available)
        };
        found.ok().flatten()
    }

    /// Fires the best POAG of `item` for `verb` against `pool`.
    fn apply(&self, st: &mut GameState, item: InstanceId, verb: &str, pool: &[InstanceId], events: &mut Vec<Event>) {
        let verb = crate::io::normalize_term(verb);
        let Some(res) = self.resolve(st, item, &verb, pool) else {
            events.push(Event::NoMatch { item, action: verb });
            return;
        };
        let consumed: Vec<InstanceId> = res.consumed().into_iter().map(|i| pool[i]).collect();
        for id in &consumed {
            st.items.remove(id);
            st.character.inventory.remove(id);
        }
        let mut produced = Vec::new();
        let mut world_states = Vec::new();
        for o in &res.poag.outcome {
            if self.kb.type_name(o.object) == WORLD_TYPE {
                if let Some(s) = &o.state {
                    st.world_states.insert(s.clone());
                    world_states.push(s.clone());
                }
                continue;
            }
            let id = InstanceId(st.next_item);
            st.next_item += 1;
            st.items.insert(
                id,
                GameItem {
                    object_type: o.object,
                    state: o.state.clone(),
                    location: ItemLocation::Inventory,
                    placed: false,
                },
            );
            st.character.inventory.insert(id);
            produced.push(id);
        }
        let item_type = self.kb.type_name(st.items[&item].object_type).to_string();
        st.action_history.push((verb.clone(), item_type));
        events.push(Event::PoagApplied {
            poag: res.poag.id,
            item,
            action: verb,
            consumed,
            produced,
            world_states,
        });
        if let Some(goal) = res.poag.goal {
            if st.completed_goals.insert(goal) {
                let description = self
                    .kb
                    .goal(goal)
                    .map(|g| g.description.clone())
                    .unwrap_or_default();
                events.push(Event::GoalCompleted { goal, description });
            }
        }
    }

    /// The player's view: unrevealed tiles masked, zombies and items only
    /// where revealed.
    pub fn view(&self) -> GameView {
        let scene = self.scene();
        let revealed = self.revealed();
        let tiles = (0..scene.height as i32)
            .map(|y| {
                (0..scene.width as i32)
                    .map(|x| {
                        let p = Pos::new(x, y);
                        if revealed.contains(&p) {
                            scene.tile(p).map_or('?', |t| t.glyph())
                        } else {
                            '?'
                        }
                    })
                    .collect()
            })
            .collect();
        let st = &self.state;
        let items = self
            .scene_items()
            .filter(|(_, p)| revealed.contains(p))
            .map(|(id, p)| ViewItem {
                id,
                object_type: self.kb.type_name(st.items[&id].object_type).to_string(),
                state: st.items[&id].state.clone(),
                position: Some(p),
            })
            .collect();
        let inventory = st
            .character
            .inventory
            .iter()
            .map(|id| ViewItem {
                id: *id,
                object_type: self.kb.type_name(st.items[id].object_type).to_string(),
                state: st.items[id].state.clone(),
                position: None,
            })
            .collect();
        GameView {
            scene: st.scene.clone(),
            width: scene.width,
            height: scene.height,
            tiles,
            revealed: revealed.iter().copied().collect(),
            character: st.character.clone(),
            inventory,
            zombies: st
                .zombies
                .iter()
                .filter(|z| revealed.contains(&z.position))
                .copied()
                .collect(),
            items,
            portals: scene
                .portals
                .iter()
                .filter(|p| revealed.contains(&p.position))
                .cloned()
                .collect(),
            goals: scene
                .goals
                .iter()
                .map(|g| ViewGoal {
                    id: *g,
                    description: self.kb.goal(*g).map(|x| x.description.clone()).unwrap_or_default(),
                    completed: st.completed_goals.contains(g),
                })
                .collect(),
            completed_goals: st.completed_goals.iter().copied().collect(),
            world_states: st.world_states.iter().cloned().collect(),
            turn: st.turn,
            status: st.status,
        }
    }
}

/// Zombies move in ascending id order, each one hop along its shortest path
/// to the character with the other zombies treated as walls. A zombie whose
/// next hop is the character's tile attacks instead of moving.
fn zombie_phase(scene: &Scene, st: &mut GameState, events: &mut Vec<Event>) {
    let target = st.character.position;
    st.zombies.sort_by_key(|z| z.id);
    for i in 0..st.zombies.len() {
        let me = st.zombies[i];
        let others: BTreeSet<Pos> = st
            .zombies
            .iter()
            .filter(|z| z.id != me.id)
            .map(|z| z.position)
            .collect();
        let path = astar(scene.width, scene.height, me.position, target, |p| {
            scene.is_floor(p) && !others.contains(&p)
        });
        let Some(path) = path else { continue };
        if path.len() < 2 {
            continue;
        }
        if path[1] == target {
            st.character.health = st.character.health.saturating_sub(1);
            events.push(Event::Damage {
                zombie: me.id,
                health: st.character.health,
            });
        } else {
            st.zombies[i].position = path[1];
            events.push(Event::ZombieMoved {
                zombie: me.id,
                from: me.position,
                to: path[1],
            });
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ViewItem {
    pub id: InstanceId,
    #[serde(rename = "type")]
    pub object_type: String,
    pub state: Option<String>,
    pub position: Option<Pos>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ViewGoal {
    pub id: GoalId,
    pub description: String,
    pub completed: bool,
}

/// What a client may see of a game. Unrevealed tiles are `?`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameView {
    pub scene: SceneId,
    pub width: u32,
    pub height: u32,
    pub tiles: Vec<String>,
    pub revealed: Vec<Pos>,
    pub character: Character,
    pub inventory: Vec<ViewItem>,
    pub zombies: Vec<Zombie>,
    pub items: Vec<ViewItem>,
    pub portals: Vec<crate::scene::Portal>,
    pub goals: Vec<ViewGoal>,
    pub completed_goals: Vec<GoalId>,
    pub world_states: Vec<String>,
    pub turn: u32,
    pub status: Status,
}
