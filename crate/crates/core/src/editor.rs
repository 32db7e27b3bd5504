//! Editor-mode workspace: a knowledge base, the scenes being authored and
//! the session log every accepted edit is appended to.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::io::session::{
    OutcomeRecord, OverrideRecord, Payload, PlaceRecord, PoagRecord, PortalRecord, SceneEdit,
    SceneEditRecord, Session, TileRecord, TypeRecord,
};
use crate::kb::{
    GoalId, InstanceId, KbError, KnowledgeBase, NewPoag, ObjectTypeId, Outcome, OverrideSpec,
    PoagId, Prerequisite, ShapePart,
};
use crate::scene::{EditOp, Pos, Scene, SceneError, SceneId};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EditorError {
    #[error(transparent)]
    Kb(#[from] KbError),
    #[error(transparent)]
    Scene(#[from] SceneError),
    #[error("unknown scene `{0}`")]
    UnknownScene(SceneId),
    #[error("scene `{0}` already exists")]
    DuplicateScene(SceneId),
}

#[derive(Debug, Clone)]
pub struct Editor {
    kb: KnowledgeBase,
    scenes: BTreeMap<SceneId, Scene>,
    /// Size each scene was created with, for replay.
    blanks: BTreeMap<SceneId, Scene>,
    session: Session,
    /// Scene edits by session seq, in order.
    edit_log: Vec<(u32, SceneId, EditOp)>,
    /// POAG id to the seq of the action that defined it.
    poag_seq: BTreeMap<PoagId, u32>,
}

impl Editor {
    pub fn new(session_id: &str, designer: &str, timestamp: &str) -> Self {
        Self::with_kb(KnowledgeBase::new(), session_id, designer, timestamp)
    }

    pub fn with_kb(kb: KnowledgeBase, session_id: &str, designer: &str, timestamp: &str) -> Self {
        Editor {
            kb,
            scenes: BTreeMap::new(),
            blanks: BTreeMap::new(),
            session: Session::new(session_id, designer, timestamp),
            edit_log: Vec::new(),
            poag_seq: BTreeMap::new(),
        }
    }

    pub fn kb(&self) -> &KnowledgeBase {
        &self.kb
    }

    pub fn session(&self) -> &Session {
        &self.session
    }

    pub fn scene(&self, id: &SceneId) -> Option<&Scene> {
        self.scenes.get(id)
    }

    pub fn scenes(&self) -> impl Iterator<Item = &Scene> {
        self.scenes.values()
    }

    pub fn into_parts(self) -> (KnowledgeBase, BTreeMap<SceneId, Scene>, Session) {
        (self.kb, self.scenes, self.session)
    }

    /// Starts a blank all-floor scene.
    pub fn new_scene(&mut self, id: &str, name: &str, width: u32, height: u32) -> Result<SceneId, EditorError> {
        let id = SceneId::from(id);
        if self.scenes.contains_key(&id) {
            return Err(EditorError::DuplicateScene(id));
        }
        let scene = Scene::new(id.clone(), name, width, height)?;
        self.blanks.insert(id.clone(), scene.clone());
        self.scenes.insert(id.clone(), scene);
        self.session.scenes.push(id.clone());
        Ok(id)
    }

    pub fn define_type(
        &mut self,
        name: &str,
        parent: Option<ObjectTypeId>,
        recipe: Option<Vec<ShapePart>>,
    ) -> Result<ObjectTypeId, EditorError> {
        let id = self.kb.define_object_type(name, parent, recipe.clone())?;
        let record = TypeRecord {
            name: self.kb.type_name(id).to_string(),
            parent: parent.map(|p| self.kb.type_name(p).to_string()),
            recipe: recipe.unwrap_or_default(),
        };
        self.session.push(Payload::DefineType(record));
        Ok(id)
    }

    fn record_of(&self, poag: &NewPoag) -> PoagRecord {
        PoagRecord {
            item: self.kb.type_name(poag.item).to_string(),
            action: self.kb.verb(poag.action).to_string(),
            goal: poag
                .goal
                .and_then(|g| self.kb.goal(g))
                .map(|g| g.description.clone()),
            prerequisites: poag.prerequisites.clone(),
            outcome: poag
                .outcome
                .iter()
                .map(|o| OutcomeRecord {
                    name: self.kb.type_name(o.object).to_string(),
                    state: o.state.clone(),
                })
                .collect(),
        }
    }

    /// Builds and attaches a POAG from names, registering unseen outcome
    /// types, actions and goals. `combination` logs it as a combination
    /// rule rather than a plain POAG definition.
    pub fn define_poag(
        &mut self,
        item: ObjectTypeId,
        verb: &str,
        prerequisites: Vec<Prerequisite>,
        outcomes: &[(&str, Option<&str>)],
        goal: Option<&str>,
        combination: bool,
    ) -> Result<PoagId, EditorError> {
        let action = self.kb.define_action(verb)?;
        let goal = goal.map(|g| self.kb.define_goal(g)).transpose()?;
        let mut outcome = Vec::new();
        for (name, state) in outcomes {
            let (object, _) = self.kb.type_named_or_register(name)?;
            outcome.push(Outcome {
                object,
                state: state.map(str::to_string),
            });
        }
        let poag = NewPoag {
            item,
            action,
            prerequisites,
            outcome,
            goal,
        };
        let record = self.record_of(&poag);
        let id = self.kb.attach_poag(item, poag)?;
        let seq = self.session.push(if combination {
            Payload::DefineCombination(record)
        } else {
            Payload::DefinePoag(record)
        });
        self.poag_seq.insert(id, seq);
        Ok(id)
    }

    fn scene_mut(&mut self, id: &SceneId) -> Result<&mut Scene, EditorError> {
        self.scenes
            .get_mut(id)
            .ok_or_else(|| EditorError::UnknownScene(id.clone()))
    }

    /// Instantiates a type and places it in a scene.
    pub fn place_instance(
        &mut self,
        scene: &SceneId,
        object_type: ObjectTypeId,
        position: Pos,
        overrides: BTreeMap<PoagId, OverrideSpec>,
    ) -> Result<InstanceId, EditorError> {
        let current = self
            .scenes
            .get(scene)
            .ok_or_else(|| EditorError::UnknownScene(scene.clone()))?;
        // Check the placement before creating the instance.
        let probe = EditOp::PlaceInstance {
            instance: InstanceId(u32::MAX),
            object_type,
            position,
        };
        current.apply_edit(&probe)?;
        let mut override_records = Vec::new();
        for (target, spec) in &overrides {
            let seq = self.poag_seq.get(target).copied().unwrap_or(0);
            let replacement = match spec {
                OverrideSpec::Remove => None,
                OverrideSpec::Replace(p) => Some(self.record_of(p)),
            };
            override_records.push(OverrideRecord { seq, replacement });
        }
        let instance = self.kb.instantiate(object_type, scene.clone(), position, overrides)?;
        let op = EditOp::PlaceInstance {
            instance,
            object_type,
            position,
        };
        self.scene_mut(scene)?.apply_in_place(&op)?;
        let seq = self.session.push(Payload::PlaceObject(PlaceRecord {
            instance: instance.0,
            object_type: self.kb.type_name(object_type).to_string(),
            scene: scene.clone(),
            position,
            states: Vec::new(),
            overrides: override_records,
        }));
        self.edit_log.push((seq, scene.clone(), op));
        Ok(instance)
    }

    /// Applies a scene edit and logs it. Instance placement should go
    /// through [`Editor::place_instance`] so the knowledge base knows the
    /// instance.
    pub fn apply_edit(&mut self, scene: &SceneId, op: EditOp) -> Result<(), EditorError> {
        let next = self
            .scenes
            .get(scene)
            .ok_or_else(|| EditorError::UnknownScene(scene.clone()))?
            .apply_edit(&op)?;
        let payload = match &op {
            EditOp::SetTile { position, tile } => Payload::EditTile(TileRecord {
                scene: scene.clone(),
                position: *position,
                tile: *tile,
            }),
            EditOp::PlaceInstance {
                instance,
                object_type,
                position,
            } => Payload::PlaceObject(PlaceRecord {
                instance: instance.0,
                object_type: self.kb.type_name(*object_type).to_string(),
                scene: scene.clone(),
                position: *position,
                states: Vec::new(),
                overrides: Vec::new(),
            }),
            EditOp::RemoveInstance { instance } => self.scene_edit(scene, SceneEdit::RemoveInstance { instance: instance.0 }),
            EditOp::PlacePortal { portal } => Payload::PlacePortal(PortalRecord {
                scene: scene.clone(),
                kind: portal.kind,
                position: portal.position,
                target: portal.target_scene.clone(),
            }),
            EditOp::AddSpawn { position } => self.scene_edit(scene, SceneEdit::AddSpawn { position: *position }),
            EditOp::AddGoal { goal } => {
                let description = self
                    .kb
                    .goal(*goal)
                    .map(|g| g.description.clone())
                    .ok_or(KbError::UnknownGoal(*goal))?;
                self.scene_edit(scene, SceneEdit::AddGoal { goal: description })
            }
            EditOp::SetStart { position } => self.scene_edit(scene, SceneEdit::SetStart { position: *position }),
        };
        self.scenes.insert(scene.clone(), next);
        let seq = self.session.push(payload);
        self.edit_log.push((seq, scene.clone(), op));
        Ok(())
    }

    fn scene_edit(&self, scene: &SceneId, edit: SceneEdit) -> Payload {
        Payload::EditScene(SceneEditRecord {
            scene: scene.clone(),
            edit,
        })
    }

    pub fn add_goal(&mut self, scene: &SceneId, description: &str) -> Result<GoalId, EditorError> {
        let goal = self.kb.define_goal(description)?;
        self.apply_edit(scene, EditOp::AddGoal { goal })?;
        Ok(goal)
    }

    /// Logged edits for one scene, in order.
    pub fn edits_for<'a>(&'a self, scene: &'a SceneId) -> impl Iterator<Item = &'a EditOp> + 'a {
        self.edit_log
            .iter()
            .filter(move |(_, s, _)| s == scene)
            .map(|(_, _, op)| op)
    }

    /// Rebuilds a scene by replaying its logged edits onto a blank scene of
    /// the same size.
    pub fn replay_scene(&self, scene: &SceneId) -> Result<Scene, EditorError> {
        let mut out = self
            .blanks
            .get(scene)
            .cloned()
            .ok_or_else(|| EditorError::UnknownScene(scene.clone()))?;
        for op in self.edits_for(scene) {
            out.apply_in_place(op)?;
        }
        Ok(out)
    }
}
