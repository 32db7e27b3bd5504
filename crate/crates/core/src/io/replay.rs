//! Rebuilding knowledge-base state from a session log.

use std::collections::BTreeMap;

use super::normalize_term;
use super::session::{Payload, PoagRecord, SceneEdit, Session};
use crate::kb::{
    InstanceId, KbError, KnowledgeBase, NewPoag, ObjectTypeId, Outcome, OverrideSpec, PoagId,
    Prerequisite,
};

/// Ids assigned while replaying, keyed by what the session called them.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Replayed {
    /// define-poag / define-combination seq to registered POAG.
    pub poags: BTreeMap<u32, PoagId>,
    /// Session-side instance number to knowledge-base instance.
    pub instances: BTreeMap<u32, InstanceId>,
    /// Types created implicitly from POAG items and outcomes.
    pub auto_registered: Vec<ObjectTypeId>,
}

fn lookup(kb: &KnowledgeBase, name: &str) -> Result<ObjectTypeId, KbError> {
    kb.type_by_name(name)
        .ok_or_else(|| KbError::UnknownTypeName(normalize_term(name)))
}

fn new_poag(
    kb: &mut KnowledgeBase,
    rec: &PoagRecord,
    item: Option<ObjectTypeId>,
    replayed: &mut Replayed,
) -> Result<NewPoag, KbError> {
    let mut register = |kb: &mut KnowledgeBase, name: &str| -> Result<ObjectTypeId, KbError> {
        let (id, fresh) = kb.type_named_or_register(name)?;
        if fresh {
            replayed.auto_registered.push(id);
        }
        Ok(id)
    };
    let item = match item {
        Some(t) => t,
        None => register(kb, &rec.item)?,
    };
    let action = kb.define_action(&rec.action)?;
    let goal = rec.goal.as_deref().map(|g| kb.define_goal(g)).transpose()?;
    let prerequisites = rec
        .prerequisites
        .iter()
        .map(|p| Prerequisite {
            kind: p.kind,
            name: normalize_term(&p.name),
            state: p.state.as_deref().map(normalize_term),
        })
        .collect();
    let mut outcome = Vec::new();
    for o in &rec.outcome {
        outcome.push(Outcome {
            object: register(kb, &o.name)?,
            state: o.state.as_deref().map(normalize_term),
        });
    }
    Ok(NewPoag {
        item,
        action,
        prerequisites,
        outcome,
        goal,
    })
}

/// Applies the knowledge-bearing actions of `session` to `kb`: type and
/// POAG definitions, object placements (with their exceptions) and scene
/// goals. Tile, portal and play actions do not touch the knowledge base.
pub fn apply_session(kb: &mut KnowledgeBase, session: &Session) -> Result<Replayed, KbError> {
    let mut replayed = Replayed::default();
    for action in &session.actions {
        match &action.payload {
            Payload::DefineType(t) => {
                let parent = t.parent.as_deref().map(|p| lookup(kb, p)).transpose()?;
                let name = normalize_term(&t.name);
                let exists = kb
                    .object_types()
                    .any(|ty| ty.name == name && ty.parent == parent);
                if !exists {
                    let recipe = (!t.recipe.is_empty()).then(|| t.recipe.clone());
                    kb.define_object_type(&name, parent, recipe)?;
                }
            }
            Payload::DefinePoag(rec) | Payload::DefineCombination(rec) => {
                let poag = new_poag(kb, rec, None, &mut replayed)?;
                let id = kb.attach_poag(poag.item, poag)?;
                replayed.poags.insert(action.seq, id);
            }
            Payload::PlaceObject(pl) => {
                let object_type = lookup(kb, &pl.object_type)?;
                let mut overrides = BTreeMap::new();
                for ov in &pl.overrides {
                    let target = *replayed.poags.get(&ov.seq).ok_or_else(|| {
                        KbError::InvalidPrerequisite(format!("override of unknown poag action {}", ov.seq))
                    })?;
                    let spec = match &ov.replacement {
                        None => OverrideSpec::Remove,
                        Some(r) => OverrideSpec::Replace(new_poag(kb, r, Some(object_type), &mut replayed)?),
                    };
                    overrides.insert(target, spec);
                }
                let id = kb.instantiate(object_type, pl.scene.clone(), pl.position, overrides)?;
                for s in &pl.states {
                    kb.add_state_tag(id, s)?;
                }
                replayed.instances.insert(pl.instance, id);
            }
            Payload::EditScene(e) => {
                if let SceneEdit::AddGoal { goal } = &e.edit {
                    kb.define_goal(goal)?;
                }
            }
            Payload::EditTile(_) | Payload::PlacePortal(_) | Payload::PlayEvent(_) => {}
        }
    }
    Ok(replayed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::session::{OverrideRecord, PlaceRecord, TypeRecord};
    use crate::scene::Pos;

    #[test]
    fn replay_builds_inheritance_and_overrides() {
        let mut s = Session::new("s", "d", "t");
        s.scenes.push("k".into());
        s.push(Payload::DefineType(TypeRecord { name: "bread".into(), parent: None, recipe: vec![] }));
        s.push(Payload::DefineType(TypeRecord { name: "moldy bread".into(), parent: Some("bread".into()), recipe: vec![] }));
        s.push(Payload::DefinePoag(PoagRecord::simple("bread", "cut", &["knife"], &["bread slices"], None)));
        s.push(Payload::PlaceObject(PlaceRecord {
            instance: 7,
            object_type: "moldy bread".into(),
            scene: "k".into(),
            position: Pos::new(1, 1),
            states: vec!["green".into()],
            overrides: vec![OverrideRecord { seq: 3, replacement: None }],
        }));
        s.push(Payload::PlaceObject(PlaceRecord {
            instance: 8,
            object_type: "bread".into(),
            scene: "k".into(),
            position: Pos::new(2, 1),
            states: vec![],
            overrides: vec![],
        }));
        let mut kb = KnowledgeBase::new();
        let r = apply_session(&mut kb, &s).unwrap();
        let moldy = r.instances[&7];
        let plain = r.instances[&8];
        assert!(kb.effective_poags(moldy).unwrap().is_empty());
        assert_eq!(kb.effective_poags(plain).unwrap()[0].id, r.poags[&3]);
        assert!(kb.instance(moldy).unwrap().state_tags.contains("green"));
        assert_eq!(r.auto_registered.len(), 1);
        assert!(kb.object_type(r.auto_registered[0]).unwrap().auto_registered);
        kb.check_consistency().unwrap();
    }

    #[test]
    fn replay_twice_reuses_types() {
        let mut s = Session::new("s", "d", "t");
        s.push(Payload::DefineType(TypeRecord { name: "bag".into(), parent: None, recipe: vec![] }));
        let mut kb = KnowledgeBase::new();
        apply_session(&mut kb, &s).unwrap();
        apply_session(&mut kb, &s).unwrap();
        assert_eq!(kb.object_types().count(), 1);
    }
}
