use std::collections::BTreeMap;

use gecka_core::{
    KnowledgeBase, NewPoag, ObjectTypeId, Override, OverrideSpec, Poag, PoagId, Pos, Prerequisite,
    SceneId,
};
use proptest::prelude::*;

fn rule(kb: &mut KnowledgeBase, item: ObjectTypeId, verb: &str, tool: &str, out: &str) -> NewPoag {
    let action = kb.define_action(verb).unwrap();
    let (object, _) = kb.type_named_or_register(out).unwrap();
    NewPoag {
        item,
        action,
        prerequisites: vec![Prerequisite::object(tool)],
        outcome: vec![gecka_core::Outcome { object, state: None }],
        goal: None,
    }
}

#[test]
fn moldy_bread() {
    let mut kb = KnowledgeBase::new();
    let bread = kb.define_object_type("bread", None, None).unwrap();
    let moldy = kb.define_object_type("moldy bread", Some(bread), None).unwrap();
    let cut = rule(&mut kb, bread, "cut", "knife", "bread slices");
    let cut = kb.attach_poag(bread, cut).unwrap();
    let (a, b) = (SceneId::from("kitchen"), SceneId::from("pantry"));
    let plain: Vec<_> = [(&a, 1), (&a, 2), (&b, 1)]
        .iter()
        .map(|(s, x)| kb.instantiate(bread, (*s).clone(), Pos::new(*x, 0), BTreeMap::new()).unwrap())
        .collect();
    let spoiled = kb
        .instantiate(moldy, b.clone(), Pos::new(3, 3), BTreeMap::from([(cut, OverrideSpec::Remove)]))
        .unwrap();
    let with_cut: Vec<_> = kb
        .instances()
        .filter(|i| kb.effective_poags(i.id).unwrap().iter().any(|p| p.id == cut))
        .map(|i| i.id)
        .collect();
    assert_eq!(with_cut, plain);

    let toast = rule(&mut kb, bread, "toast", "toaster", "toast");
    let toast = kb.attach_poag(bread, toast).unwrap();
    for i in plain.iter().chain([&spoiled]) {
        assert!(kb.effective_poags(*i).unwrap().iter().any(|p| p.id == toast));
    }
    assert!(!kb.effective_poags(spoiled).unwrap().iter().any(|p| p.id == cut));
}

#[derive(Debug, Clone)]
struct Plan {
    parents: Vec<Option<usize>>,
    rules: Vec<usize>,
    instances: Vec<(usize, Vec<(usize, u8)>)>,
    late: Vec<usize>,
}

fn plan() -> impl Strategy<Value = Plan> {
    (1usize..8).prop_flat_map(|n| {
        (
            proptest::collection::vec(proptest::option::of(0..n), n),
            proptest::collection::vec(0..n, 0..10),
            proptest::collection::vec((0..n, proptest::collection::vec((0usize..10, 0u8..3), 0..4)), 0..6),
            proptest::collection::vec(0..n, 0..4),
        )
            .prop_map(|(parents, rules, instances, late)| Plan { parents, rules, instances, late })
    })
}

fn chain(kb: &KnowledgeBase, t: ObjectTypeId) -> Vec<ObjectTypeId> {
    let mut out = vec![t];
    while let Some(p) = kb.object_type(*out.last().unwrap()).unwrap().parent {
        out.push(p);
    }
    out
}

/// Nearest type first, then ascending id, over the raw POAG table.
fn inherited(kb: &KnowledgeBase, t: ObjectTypeId) -> Vec<Poag> {
    let mut out = Vec::new();
    for ty in chain(kb, t) {
        let mut here: Vec<Poag> = kb.poags().filter(|p| p.item == ty).cloned().collect();
        here.sort_by_key(|p| p.id);
        out.extend(here);
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn effective_poags_follow_chain_and_exceptions(p in plan()) {
        let mut kb = KnowledgeBase::new();
        let mut types = Vec::new();
        for (i, parent) in p.parents.iter().enumerate() {
            let parent = parent.filter(|q| *q < i).map(|q| types[q]);
            types.push(kb.define_object_type(&format!("t{i}"), parent, None).unwrap());
        }
        for (k, t) in p.rules.iter().enumerate() {
            let r = rule(&mut kb, types[*t], "use", &format!("tool{k}"), "thing");
            kb.attach_poag(types[*t], r).unwrap();
        }
        let mut expected: Vec<(gecka_core::InstanceId, ObjectTypeId, BTreeMap<PoagId, Option<NewPoag>>)> = Vec::new();
        for (t, ovs) in &p.instances {
            let ty = types[*t];
            let inh = inherited(&kb, ty);
            let mut specs = BTreeMap::new();
            let mut model = BTreeMap::new();
            for (pick, mode) in ovs {
                if inh.is_empty() {
                    break;
                }
                let target = inh[pick % inh.len()].id;
                if *mode == 0 {
                    specs.insert(target, OverrideSpec::Remove);
                    model.insert(target, None);
                } else {
                    let r = rule(&mut kb, ty, "use", "other tool", "other thing");
                    specs.insert(target, OverrideSpec::Replace(r.clone()));
                    model.insert(target, Some(r));
                }
            }
            let id = kb.instantiate(ty, SceneId::from("s"), Pos::new(0, 0), specs).unwrap();
            expected.push((id, ty, model));
        }
        for t in &p.late {
            let r = rule(&mut kb, types[*t], "use", "late tool", "late thing");
            kb.attach_poag(types[*t], r).unwrap();
        }

        for (ty, t) in types.iter().zip(0..) {
            let got: Vec<PoagId> = kb.inherited_poags(*ty).unwrap().iter().map(|p| p.id).collect();
            let want: Vec<PoagId> = inherited(&kb, *ty).iter().map(|p| p.id).collect();
            prop_assert_eq!(got, want, "type t{}", t);
        }
        for (id, ty, model) in &expected {
            let got = kb.effective_poags(*id).unwrap();
            let mut want = Vec::new();
            for poag in inherited(&kb, *ty) {
                match model.get(&poag.id) {
                    None => want.push((poag.item, poag.action, poag.prerequisites.clone(), true, poag.id)),
                    Some(None) => {}
                    Some(Some(r)) => want.push((r.item, r.action, r.prerequisites.clone(), false, poag.id)),
                }
            }
            prop_assert_eq!(got.len(), want.len());
            for (g, w) in got.iter().zip(&want) {
                prop_assert_eq!((g.item, g.action, &g.prerequisites), (w.0, w.1, &w.2));
                // Inherited rules keep their id; replacements get a fresh,
                // unregistered one.
                prop_assert_eq!(g.id == w.4, w.3);
                if !w.3 {
                    prop_assert!(kb.poag(g.id).is_none());
                }
            }
            let inst = kb.instance(*id).unwrap();
            for ov in inst.overrides.values() {
                if let Override::Replaced(r) = ov {
                    prop_assert!(kb.poag(r.id).is_none());
                }
            }
        }
        kb.check_consistency().unwrap();
    }
}
