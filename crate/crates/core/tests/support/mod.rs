//! Random valid sessions, shared by the round-trip tests.

#![allow(dead_code)]

use gecka_core::io::session::{
    EventRecord, OutcomeRecord, OverrideRecord, Payload, PlaceRecord, PoagRecord, PortalRecord,
    SceneEdit, SceneEditRecord, Session, TileRecord, TypeRecord,
};
use gecka_core::sim::SplitMix64;
use gecka_core::{PortalKind, Pos, Prerequisite, SceneId, ShapePart, Tile};

const WORDS: &[&str] = &[
    "bread", "orange", "blender", "kettle", "water", "bag", "sand", "knife", "cheese", "ham",
    "coffee maker", "can opener", "moldy bread", "orange juice", "hammer", "towel",
];
const VERBS: &[&str] = &["blend", "cut", "stack", "hit", "fill", "open", "boil", "wash"];
const STATES: &[&str] = &["boiled", "green", "sliced", "wet"];
const GOALS: &[&str] = &["quench thirst", "flood control", "make breakfast", "wake up"];
/// Free text for the fields written verbatim.
const TEXT: &[&str] = &[
    "plain",
    "a & b < c > d \"quoted\" 'single'",
    "tab\there",
    "two\nlines\r\nand more",
    "  padded  ",
    "ünïcödé 日本 🍊",
    "",
];

fn pick<'a>(rng: &mut SplitMix64, from: &[&'a str]) -> &'a str {
    from[rng.below(from.len() as u64) as usize]
}

fn chance(rng: &mut SplitMix64, percent: u64) -> bool {
    rng.below(100) < percent
}

fn pos(rng: &mut SplitMix64) -> Pos {
    Pos::new(rng.below(40) as i32, rng.below(40) as i32)
}

fn poag(rng: &mut SplitMix64, item: String, types: &[String]) -> PoagRecord {
    let mut prerequisites = Vec::new();
    for _ in 0..rng.below(4) {
        let p = match rng.below(3) {
            0 => Prerequisite::object(&types[rng.below(types.len() as u64) as usize]),
            1 => Prerequisite::state(pick(rng, WORDS), pick(rng, STATES)),
            _ => Prerequisite::action_done(pick(rng, VERBS)),
        };
        prerequisites.push(p);
    }
    let outcome = (0..rng.below(3))
        .map(|_| OutcomeRecord {
            name: pick(rng, WORDS).to_string(),
            state: chance(rng, 30).then(|| pick(rng, STATES).to_string()),
        })
        .collect();
    PoagRecord {
        item,
        action: pick(rng, VERBS).to_string(),
        goal: chance(rng, 50).then(|| pick(rng, GOALS).to_string()),
        prerequisites,
        outcome,
    }
}

/// A session that passes `Session::check` against an empty knowledge base.
pub fn random_session(seed: u64) -> Session {
    let mut rng = SplitMix64::new(seed);
    let mut s = Session::new(
        &format!("session-{seed}"),
        pick(&mut rng, TEXT),
        "2016-02-01T10:00:00Z",
    );
    let scene_count = rng.below(3);
    for i in 0..scene_count {
        s.scenes.push(SceneId(format!("scene-{i}")));
    }
    let mut types: Vec<String> = Vec::new();
    let mut poag_seqs: Vec<u32> = Vec::new();
    let n = rng.below(25);
    for _ in 0..n {
        let roll = rng.below(100);
        let scene = (!s.scenes.is_empty())
            .then(|| s.scenes[rng.below(s.scenes.len() as u64) as usize].clone());
        let payload = if roll < 20 || types.is_empty() {
            let name = pick(&mut rng, WORDS).to_string();
            let parent = (!types.is_empty() && chance(&mut rng, 40))
                .then(|| types[rng.below(types.len() as u64) as usize].clone());
            let recipe = (0..rng.below(3))
                .map(|_| ShapePart {
                    shape: pick(&mut rng, &["cube", "sphere", "cylinder"]).into(),
                    transform: pick(&mut rng, TEXT).into(),
                })
                .collect();
            types.push(name.clone());
            Payload::DefineType(TypeRecord { name, parent, recipe })
        } else if roll < 45 {
            let item = types[rng.below(types.len() as u64) as usize].clone();
            let rec = poag(&mut rng, item, &types);
            types.extend(rec.outcome.iter().map(|o| o.name.clone()));
            poag_seqs.push(s.actions.len() as u32 + 1);
            if chance(&mut rng, 50) {
                Payload::DefinePoag(rec)
            } else {
                Payload::DefineCombination(rec)
            }
        } else if roll < 60 && scene.is_some() {
            let object_type = types[rng.below(types.len() as u64) as usize].clone();
            let mut overrides = Vec::new();
            for _ in 0..rng.below(3) {
                if poag_seqs.is_empty() {
                    break;
                }
                let seq = poag_seqs[rng.below(poag_seqs.len() as u64) as usize];
                let replacement = chance(&mut rng, 50).then(|| poag(&mut rng, object_type.clone(), &types));
                overrides.push(OverrideRecord { seq, replacement });
            }
            Payload::PlaceObject(PlaceRecord {
                instance: rng.below(1000) as u32,
                object_type,
                scene: scene.unwrap(),
                position: pos(&mut rng),
                states: (0..rng.below(3)).map(|_| pick(&mut rng, STATES).to_string()).collect(),
                overrides,
            })
        } else if roll < 70 && scene.is_some() {
            let tile = [Tile::Floor, Tile::Wall, Tile::Void][rng.below(3) as usize];
            Payload::EditTile(TileRecord { scene: scene.unwrap(), position: pos(&mut rng), tile })
        } else if roll < 80 && scene.is_some() {
            let edit = match rng.below(4) {
                0 => SceneEdit::RemoveInstance { instance: rng.below(1000) as u32 },
                1 => SceneEdit::AddSpawn { position: pos(&mut rng) },
                2 => SceneEdit::AddGoal { goal: pick(&mut rng, GOALS).into() },
                _ => SceneEdit::SetStart { position: pos(&mut rng) },
            };
            Payload::EditScene(SceneEditRecord { scene: scene.unwrap(), edit })
        } else if roll < 90 && scene.is_some() {
            let kind = if chance(&mut rng, 50) { PortalKind::Entry } else { PortalKind::Exit };
            let target = (kind == PortalKind::Exit && chance(&mut rng, 50))
                .then(|| SceneId(format!("scene-{}", rng.below(5))));
            Payload::PlacePortal(PortalRecord { scene: scene.unwrap(), kind, position: pos(&mut rng), target })
        } else {
            Payload::PlayEvent(EventRecord {
                game: format!("game-{}", rng.below(10)),
                turn: rng.next_u64() >> rng.below(64),
                kind: pick(&mut rng, &["moved", "damage", "poag-applied"]).into(),
                detail: pick(&mut rng, TEXT).into(),
            })
        };
        s.push(payload);
    }
    s
}
