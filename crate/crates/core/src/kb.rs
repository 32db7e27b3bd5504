//! Object types, actions, goals and POAG records.
//!
//! POAGs are attached to types and looked up through the parent chain when
//! queried, so attaching a record is visible to every existing and future
//! instance of the type and its subtypes without copying anything. Instances
//! only store their own exceptions (removed or replaced records).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::io::normalize_term;
use crate::scene::{Pos, SceneId};

/// Longest allowed parent chain, counting the type itself.
pub const MAX_TYPE_DEPTH: usize = 16;

/// Name of the pseudo-object carrying world and emotional states.
pub const WORLD_TYPE: &str = "world";

macro_rules! id_newtype {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(
            Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
        )]
        #[serde(transparent)]
        pub struct $name(pub u32);

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}", self.0)
            }
        }
    };
}

id_newtype!(ObjectTypeId);
id_newtype!(ActionId);
id_newtype!(GoalId);
id_newtype!(PoagId);
id_newtype!(
    /// Instance ids are shared between the knowledge base and the scenes
    /// that place them.
    InstanceId
);

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KbError {
    #[error("empty name")]
    EmptyName,
    #[error("unknown object type {0}")]
    UnknownType(ObjectTypeId),
    #[error("unknown object type `{0}`")]
    UnknownTypeName(String),
    #[error("unknown parent type {0}")]
    UnknownParent(ObjectTypeId),
    #[error("type `{name}` already defined under the same parent")]
    DuplicateType { name: String },
    #[error("parent chain of `{0}` is cyclic")]
    Cycle(String),
    #[error("type chain deeper than {MAX_TYPE_DEPTH}")]
    DepthExceeded,
    #[error("recipe given for a non-custom type")]
    RecipeOnBaseType,
    #[error("unknown action {0}")]
    UnknownAction(ActionId),
    #[error("unknown goal {0}")]
    UnknownGoal(GoalId),
    #[error("unknown poag {0}")]
    UnknownPoag(PoagId),
    #[error("unknown instance {0}")]
    UnknownInstance(InstanceId),
    #[error("poag item {found} does not match attachment type {expected}")]
    ItemMismatch {
        expected: ObjectTypeId,
        found: ObjectTypeId,
    },
    #[error("outcome references unknown type {0}")]
    DanglingOutcome(ObjectTypeId),
    #[error("invalid prerequisite: {0}")]
    InvalidPrerequisite(String),
    #[error("override targets poag {0}, which instance type does not inherit")]
    OverrideNotInherited(PoagId),
}

/// One primitive of a designer-built item. Stored verbatim.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShapePart {
    pub shape: String,
    pub transform: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObjectType {
    pub id: ObjectTypeId,
    pub name: String,
    pub parent: Option<ObjectTypeId>,
    pub recipe: Option<Vec<ShapePart>>,
    pub is_custom: bool,
    /// Registered implicitly because a POAG outcome named it.
    pub auto_registered: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Action {
    pub id: ActionId,
    pub verb: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Goal {
    pub id: GoalId,
    pub description: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PrereqKind {
    ObjectPresent,
    StateHolds,
    ActionDone,
}

impl PrereqKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PrereqKind::ObjectPresent => "object-present",
            PrereqKind::StateHolds => "state-holds",
            PrereqKind::ActionDone => "action-done",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "object-present" => Some(PrereqKind::ObjectPresent),
            "state-holds" => Some(PrereqKind::StateHolds),
            "action-done" => Some(PrereqKind::ActionDone),
            _ => None,
        }
    }
}

/// `ObjectPresent` prerequisites are consumed when the POAG fires,
/// `StateHolds` ones only have to be there, and `ActionDone` ones name a verb
/// that must appear in the game's action history.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Prerequisite {
    pub kind: PrereqKind,
    pub name: String,
    pub state: Option<String>,
}

impl Prerequisite {
    pub fn object(name: &str) -> Self {
        Prerequisite {
            kind: PrereqKind::ObjectPresent,
            name: name.to_string(),
            state: None,
        }
    }

    pub fn state(name: &str, state: &str) -> Self {
        Prerequisite {
            kind: PrereqKind::StateHolds,
            name: name.to_string(),
            state: Some(state.to_string()),
        }
    }

    pub fn action_done(verb: &str) -> Self {
        Prerequisite {
            kind: PrereqKind::ActionDone,
            name: verb.to_string(),
            state: None,
        }
    }

    /// Counts against the available item multiset.
    pub fn needs_item(&self) -> bool {
        self.kind != PrereqKind::ActionDone
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Outcome {
    pub object: ObjectTypeId,
    pub state: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Poag {
    pub id: PoagId,
    pub item: ObjectTypeId,
    pub action: ActionId,
    pub prerequisites: Vec<Prerequisite>,
    pub outcome: Vec<Outcome>,
    pub goal: Option<GoalId>,
}

/// A POAG before it has been given an id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NewPoag {
    pub item: ObjectTypeId,
    pub action: ActionId,
    pub prerequisites: Vec<Prerequisite>,
    pub outcome: Vec<Outcome>,
    pub goal: Option<GoalId>,
}

impl NewPoag {
    fn into_poag(self, id: PoagId) -> Poag {
        Poag {
            id,
            item: self.item,
            action: self.action,
            prerequisites: self.prerequisites,
            outcome: self.outcome,
            goal: self.goal,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Override {
    Removed,
    Replaced(Poag),
}

/// Requested exception at instantiation time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OverrideSpec {
    Remove,
    Replace(NewPoag),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObjectInstance {
    pub id: InstanceId,
    pub object_type: ObjectTypeId,
    pub scene: SceneId,
    pub position: Pos,
    pub state_tags: BTreeSet<String>,
    pub overrides: BTreeMap<PoagId, Override>,
}

/// What a combination may draw on: concrete items (type plus optional state
/// tag) and the verbs already performed in the game.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Available {
    pub items: Vec<(ObjectTypeId, Option<String>)>,
    pub actions_done: BTreeSet<String>,
}

impl Available {
    pub fn items(items: impl IntoIterator<Item = (ObjectTypeId, Option<String>)>) -> Self {
        Available {
            items: items.into_iter().collect(),
            actions_done: BTreeSet::new(),
        }
    }
}

/// A matched POAG together with the available item bound to each
/// prerequisite (`None` for action-done prerequisites).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Resolution {
    pub poag: Poag,
    pub bindings: Vec<Option<usize>>,
}

impl Resolution {
    /// Indices of the available items that firing this POAG consumes.
    pub fn consumed(&self) -> Vec<usize> {
        self.poag
            .prerequisites
            .iter()
            .zip(&self.bindings)
            .filter(|(p, _)| p.kind == PrereqKind::ObjectPresent)
            .filter_map(|(_, b)| *b)
            .collect()
    }
}

#[derive(Debug, Clone, Default)]
pub struct KnowledgeBase {
    object_types: BTreeMap<ObjectTypeId, ObjectType>,
    actions: BTreeMap<ActionId, Action>,
    goals: BTreeMap<GoalId, Goal>,
    poags: BTreeMap<PoagId, Poag>,
    instances: BTreeMap<InstanceId, ObjectInstance>,
    poags_by_type: BTreeMap<ObjectTypeId, BTreeSet<PoagId>>,
    next_type: u32,
    next_action: u32,
    next_goal: u32,
    next_poag: u32,
    next_instance: u32,
}

fn normalized(text: &str) -> Result<String, KbError> {
    let name = normalize_term(text);
    if name.is_empty() {
        Err(KbError::EmptyName)
    } else {
        Ok(name)
    }
}

fn bump(counter: &mut u32) -> u32 {
    *counter += 1;
    *counter
}

impl KnowledgeBase {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn define_object_type(
        &mut self,
        name: &str,
        parent: Option<ObjectTypeId>,
        recipe: Option<Vec<ShapePart>>,
    ) -> Result<ObjectTypeId, KbError> {
        let name = normalized(name)?;
        if let Some(p) = parent {
            if !self.object_types.contains_key(&p) {
                return Err(KbError::UnknownParent(p));
            }
            if self.ancestors(p)?.len() + 1 > MAX_TYPE_DEPTH {
                return Err(KbError::DepthExceeded);
            }
        }
        if self
            .object_types
            .values()
            .any(|t| t.name == name && t.parent == parent)
        {
            return Err(KbError::DuplicateType { name });
        }
        let id = ObjectTypeId(bump(&mut self.next_type));
        let is_custom = parent.is_some() || recipe.is_some();
        self.object_types.insert(
            id,
            ObjectType {
                id,
                name,
                parent,
                recipe,
                is_custom,
                auto_registered: false,
            },
        );
        Ok(id)
    }

    /// Looks a type up by name, registering a flagged base type if unseen.
    /// Returns the id and whether it was newly registered.
    pub fn type_named_or_register(&mut self, name: &str) -> Result<(ObjectTypeId, bool), KbError> {
        let name = normalized(name)?;
        if let Some(id) = self.type_by_name(&name) {
            return Ok((id, false));
        }
        let id = self.define_object_type(&name, None, None)?;
        if let Some(t) = self.object_types.get_mut(&id) {
            t.auto_registered = true;
        }
        Ok((id, true))
    }

    /// The reserved pseudo-object for world states.
    pub fn world_type(&mut self) -> ObjectTypeId {
        self.type_named_or_register(WORLD_TYPE)
            .map(|(id, _)| id)
            .expect("reserved name is non-empty")
    }

    /// First-registered type with this (normalized) name.
    pub fn type_by_name(&self, name: &str) -> Option<ObjectTypeId> {
        let name = normalize_term(name);
        self.object_types
            .values()
            .find(|t| t.name == name)
            .map(|t| t.id)
    }

    pub fn object_type(&self, id: ObjectTypeId) -> Option<&ObjectType> {
        self.object_types.get(&id)
    }

    pub fn object_types(&self) -> impl Iterator<Item = &ObjectType> {
        self.object_types.values()
    }

    /// Returns the existing action for this verb or defines a new one.
    pub fn define_action(&mut self, verb: &str) -> Result<ActionId, KbError> {
        let verb = normalized(verb)?;
        if let Some(a) = self.actions.values().find(|a| a.verb == verb) {
            return Ok(a.id);
        }
        let id = ActionId(bump(&mut self.next_action));
        self.actions.insert(id, Action { id, verb });
        Ok(id)
    }

    pub fn action(&self, id: ActionId) -> Option<&Action> {
        self.actions.get(&id)
    }

    pub fn action_by_verb(&self, verb: &str) -> Option<ActionId> {
        let verb = normalize_term(verb);
        self.actions.values().find(|a| a.verb == verb).map(|a| a.id)
    }

    /// Returns the existing goal with this description or defines a new one.
    pub fn define_goal(&mut self, description: &str) -> Result<GoalId, KbError> {
        let description = normalized(description)?;
        if let Some(g) = self.goals.values().find(|g| g.description == description) {
            return Ok(g.id);
        }
        let id = GoalId(bump(&mut self.next_goal));
        self.goals.insert(id, Goal { id, description });
        Ok(id)
    }

    pub fn goal(&self, id: GoalId) -> Option<&Goal> {
        self.goals.get(&id)
    }

    pub fn goal_by_description(&self, description: &str) -> Option<GoalId> {
        let description = normalize_term(description);
        self.goals
            .values()
            .find(|g| g.description == description)
            .map(|g| g.id)
    }

    pub fn poag(&self, id: PoagId) -> Option<&Poag> {
        self.poags.get(&id)
    }

    pub fn poags(&self) -> impl Iterator<Item = &Poag> {
        self.poags.values()
    }

    pub fn instance(&self, id: InstanceId) -> Option<&ObjectInstance> {
        self.instances.get(&id)
    }

    pub fn instances(&self) -> impl Iterator<Item = &ObjectInstance> {
        self.instances.values()
    }

    /// The type itself followed by its ancestors, nearest first.
    pub fn ancestors(&self, id: ObjectTypeId) -> Result<Vec<ObjectTypeId>, KbError> {
        let mut chain = Vec::new();
        let mut cursor = Some(id);
        while let Some(t) = cursor {
            let ty = self.object_types.get(&t).ok_or(KbError::UnknownType(t))?;
            if chain.contains(&t) {
                return Err(KbError::Cycle(ty.name.clone()));
            }
            chain.push(t);
            cursor = ty.parent;
        }
        Ok(chain)
    }

    /// True when `id` or one of its ancestors is called `name`.
    pub fn type_is_a(&self, id: ObjectTypeId, name: &str) -> bool {
        self.ancestors(id)
            .map(|chain| chain.iter().any(|t| self.object_types[t].name == name))
            .unwrap_or(false)
    }

    fn check_poag_refs(&self, poag: &NewPoag) -> Result<(), KbError> {
        if !self.object_types.contains_key(&poag.item) {
            return Err(KbError::UnknownType(poag.item));
        }
        if !self.actions.contains_key(&poag.action) {
            return Err(KbError::UnknownAction(poag.action));
        }
        if let Some(g) = poag.goal {
            if !self.goals.contains_key(&g) {
                return Err(KbError::UnknownGoal(g));
            }
        }
        for o in &poag.outcome {
            if !self.object_types.contains_key(&o.object) {
                return Err(KbError::DanglingOutcome(o.object));
            }
        }
        for p in &poag.prerequisites {
            if p.name.is_empty() || normalize_term(&p.name) != p.name {
                return Err(KbError::InvalidPrerequisite(format!(
                    "name `{}` is not normalized",
                    p.name
                )));
            }
            if p.kind == PrereqKind::ActionDone && p.state.is_some() {
                return Err(KbError::InvalidPrerequisite(
                    "action-done prerequisites take no state tag".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn attach_poag(
        &mut self,
        object_type: ObjectTypeId,
        poag: NewPoag,
    ) -> Result<PoagId, KbError> {
        if !self.object_types.contains_key(&object_type) {
            return Err(KbError::UnknownType(object_type));
        }
        if poag.item != object_type {
            return Err(KbError::ItemMismatch {
                expected: object_type,
                found: poag.item,
            });
        }
        self.check_poag_refs(&poag)?;
        let id = PoagId(bump(&mut self.next_poag));
        self.poags.insert(id, poag.into_poag(id));
        self.poags_by_type.entry(object_type).or_default().insert(id);
        Ok(id)
    }

    /// POAGs reachable through the type chain, nearest type first, then by id.
    pub fn inherited_poags(&self, object_type: ObjectTypeId) -> Result<Vec<&Poag>, KbError> {
        let mut out = Vec::new();
        for t in self.ancestors(object_type)? {
            if let Some(ids) = self.poags_by_type.get(&t) {
                out.extend(ids.iter().map(|id| &self.poags[id]));
            }
        }
        Ok(out)
    }

    fn build_override(
        &mut self,
        object_type: ObjectTypeId,
        target: PoagId,
        spec: OverrideSpec,
    ) -> Result<Override, KbError> {
        let inherited = self.inherited_poags(object_type)?;
        let original = inherited
            .iter()
            .find(|p| p.id == target)
            .ok_or(KbError::OverrideNotInherited(target))?;
        match spec {
            OverrideSpec::Remove => Ok(Override::Removed),
            OverrideSpec::Replace(replacement) => {
                if replacement.item != object_type && replacement.item != original.item {
                    return Err(KbError::ItemMismatch {
                        expected: object_type,
                        found: replacement.item,
                    });
                }
                self.check_poag_refs(&replacement)?;
                let id = PoagId(bump(&mut self.next_poag));
                Ok(Override::Replaced(replacement.into_poag(id)))
            }
        }
    }

    pub fn instantiate(
        &mut self,
        object_type: ObjectTypeId,
        scene: SceneId,
        position: Pos,
        overrides: BTreeMap<PoagId, OverrideSpec>,
    ) -> Result<InstanceId, KbError> {
        if !self.object_types.contains_key(&object_type) {
            return Err(KbError::UnknownType(object_type));
        }
        let mut built = BTreeMap::new();
        for (target, spec) in overrides {
            let ov = self.build_override(object_type, target, spec)?;
            built.insert(target, ov);
        }
        let id = InstanceId(bump(&mut self.next_instance));
        self.instances.insert(
            id,
            ObjectInstance {
                id,
                object_type,
                scene,
                position,
                state_tags: BTreeSet::new(),
                overrides: built,
            },
        );
        Ok(id)
    }

    /// Adds or changes one exception on an existing instance.
    pub fn set_override(
        &mut self,
        instance: InstanceId,
        target: PoagId,
        spec: OverrideSpec,
    ) -> Result<(), KbError> {
        let object_type = self
            .instances
            .get(&instance)
            .ok_or(KbError::UnknownInstance(instance))?
            .object_type;
        let ov = self.build_override(object_type, target, spec)?;
        if let Some(inst) = self.instances.get_mut(&instance) {
            inst.overrides.insert(target, ov);
        }
        Ok(())
    }

    pub fn add_state_tag(&mut self, instance: InstanceId, tag: &str) -> Result<(), KbError> {
        let tag = normalized(tag)?;
        self.instances
            .get_mut(&instance)
            .ok_or(KbError::UnknownInstance(instance))?
            .state_tags
            .insert(tag);
        Ok(())
    }

    pub fn remove_instance(&mut self, instance: InstanceId) -> Option<ObjectInstance> {
        self.instances.remove(&instance)
    }

    /// Effective POAGs of a type chain under a set of instance exceptions.
    pub fn poags_with_overrides(
        &self,
        object_type: ObjectTypeId,
        overrides: &BTreeMap<PoagId, Override>,
    ) -> Result<Vec<Poag>, KbError> {
        Ok(self
            .inherited_poags(object_type)?
            .into_iter()
            .filter_map(|p| match overrides.get(&p.id) {
                None => Some(p.clone()),
                Some(Override::Removed) => None,
                Some(Override::Replaced(r)) => Some(r.clone()),
            })
            .collect())
    }

    pub fn effective_poags(&self, instance: InstanceId) -> Result<Vec<Poag>, KbError> {
        let inst = self
            .instances
            .get(&instance)
            .ok_or(KbError::UnknownInstance(instance))?;
        self.poags_with_overrides(inst.object_type, &inst.overrides)
    }

    /// Best matching POAG among `candidates`: the action must match and every
    /// prerequisite must be satisfied by a distinct available item. The most
    /// specific rule (most prerequisites) wins, then the smallest id.
    pub fn resolve_among<'a>(
        &self,
        candidates: impl IntoIterator<Item = &'a Poag>,
        action: ActionId,
        available: &Available,
    ) -> Option<Resolution> {
        let mut best: Option<Resolution> = None;
        for poag in candidates.into_iter().filter(|p| p.action == action) {
            let Some(bindings) = self.match_prerequisites(&poag.prerequisites, available) else {
                continue;
            };
            let better = match &best {
                None => true,
                Some(b) => {
                    let (n, m) = (poag.prerequisites.len(), b.poag.prerequisites.len());
                    n > m || (n == m && poag.id < b.poag.id)
                }
            };
            if better {
                best = Some(Resolution {
                    poag: poag.clone(),
                    bindings,
                });
            }
        }
        best
    }

    /// Resolution against the raw type chain (no instance exceptions).
    pub fn resolve_combination(
        &self,
        item: ObjectTypeId,
        action: ActionId,
        available: &Available,
    ) -> Result<Option<Resolution>, KbError> {
        if !self.actions.contains_key(&action) {
            return Err(KbError::UnknownAction(action));
        }
        let candidates = self.inherited_poags(item)?;
        Ok(self.resolve_among(candidates, action, available))
    }

    /// Resolution against an instance's effective POAGs.
    pub fn resolve_for_instance(
        &self,
        instance: InstanceId,
        action: ActionId,
        available: &Available,
    ) -> Result<Option<Resolution>, KbError> {
        if !self.actions.contains_key(&action) {
            return Err(KbError::UnknownAction(action));
        }
        let candidates = self.effective_poags(instance)?;
        Ok(self.resolve_among(&candidates, action, available))
    }

    fn satisfies(&self, prereq: &Prerequisite, item: &(ObjectTypeId, Option<String>)) -> bool {
        let state_ok = match &prereq.state {
            None => true,
            Some(s) => item.1.as_deref() == Some(s.as_str()),
        };
        state_ok && self.type_is_a(item.0, &prereq.name)
    }

    /// Binds each item-needing prerequisite to a distinct available item
    /// (bipartite matching by augmenting paths).
    fn match_prerequisites(
        &self,
        prereqs: &[Prerequisite],
        available: &Available,
    ) -> Option<Vec<Option<usize>>> {
        let edges: Vec<Vec<usize>> = prereqs
            .iter()
            .map(|p| {
                if p.needs_item() {
                    (0..available.items.len())
                        .filter(|&j| self.satisfies(p, &available.items[j]))
                        .collect()
                } else {
                    Vec::new()
                }
            })
            .collect();
        let mut owner: Vec<Option<usize>> = vec![None; available.items.len()];
        for (i, p) in prereqs.iter().enumerate() {
            if !p.needs_item() {
                if !available.actions_done.contains(&p.name) {
                    return None;
                }
                continue;
            }
            let mut seen = vec![false; available.items.len()];
            if !augment(i, &edges, &mut owner, &mut seen) {
                return None;
            }
        }
        let mut bindings = vec![None; prereqs.len()];
        for (j, o) in owner.iter().enumerate() {
            if let Some(i) = o {
                bindings[*i] = Some(j);
            }
        }
        Some(bindings)
    }

    /// Registered POAGs whose goal is `goal`, by id.
    pub fn goal_facilitators(&self, goal: GoalId) -> Result<Vec<PoagId>, KbError> {
        if !self.goals.contains_key(&goal) {
            return Err(KbError::UnknownGoal(goal));
        }
        Ok(self
            .poags
            .values()
            .filter(|p| p.goal == Some(goal))
            .map(|p| p.id)
            .collect())
    }

    pub fn type_name(&self, id: ObjectTypeId) -> &str {
        self.object_types
            .get(&id)
            .map(|t| t.name.as_str())
            .unwrap_or("?")
    }

    pub fn verb(&self, id: ActionId) -> &str {
        self.actions.get(&id).map(|a| a.verb.as_str()).unwrap_or("?")
    }

    /// Checks that cross references and the per-type index agree with the
    /// primary collections.
    pub fn check_consistency(&self) -> Result<(), String> {
        for (id, p) in &self.poags {
            if !self.object_types.contains_key(&p.item) {
                return Err(format!("poag {id} has dangling item"));
            }
            if !self.poags_by_type.get(&p.item).is_some_and(|s| s.contains(id)) {
                return Err(format!("poag {id} missing from type index"));
            }
        }
        for (t, ids) in &self.poags_by_type {
            for id in ids {
                match self.poags.get(id) {
                    Some(p) if p.item == *t => {}
                    _ => return Err(format!("type index entry {t}->{id} is stale")),
                }
            }
        }
        for t in self.object_types.keys() {
            self.ancestors(*t).map_err(|e| e.to_string())?;
        }
        Ok(())
    }
}

fn augment(
    i: usize,
    edges: &[Vec<usize>],
    owner: &mut [Option<usize>],
    seen: &mut [bool],
) -> bool {
    for &j in &edges[i] {
        if seen[j] {
            continue;
        }
        seen[j] = true;
        if owner[j].is_none_or(|k| augment(k, edges, owner, seen)) {
            owner[j] = Some(i);
            return true;
        }
    }
    false
}
