//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each
//! and exits non-zero if any failed.

#[path = "../../core/tests/support/mod.rs"]
mod support;

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::panic::{self, AssertUnwindSafe};
use std::sync::Arc;
use std::time::{Duration, Instant};

use axum::body::Body;
use axum::http::{header, Request, StatusCode};
use gecka_core::io::corpus::{load_word_list, TsvCounts};
use gecka_core::io::{bootstrap_corpus, export_session_xml, parse_session_xml};
use gecka_core::sim::{
    commands_from_trace, generate_dungeon, run_trace, shortest_path, Command, DungeonParams, Game, GameConfig,
    SplitMix64,
};
use gecka_core::{
    EditOp, KnowledgeBase, NewPoag, Outcome, OverrideSpec, Portal, PortalKind, Pos, Prerequisite, Scene, SceneId,
    Tile,
};
use http_body_util::BodyExt;
use serde_json::Value;
use tower::ServiceExt;

const ROOT: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../..");

type Check = fn() -> Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn main() {
    let criteria: [(&str, u64, Check); 7] = [
        ("pilot-rule-stats", 5, pilot_rule_stats),
        ("xml-round-trip", 30, xml_round_trip),
        ("pathfinding-oracle", 60, pathfinding_oracle),
        ("dungeon-properties", 60, dungeon_properties),
        ("inheritance-suite", 5, inheritance_suite),
        ("simulation-determinism-and-pursuit", 30, simulation),
        ("corpus-bootstrap", 30, corpus_bootstrap),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (name, limit, check) in criteria {
        let start = Instant::now();
        let result = panic::catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|p| Err(p.downcast_ref::<String>().cloned().unwrap_or_else(|| format!("{:?}", p.downcast_ref::<&str>()))));
        let took = start.elapsed();
        let result = result.and_then(|detail| {
            if took > Duration::from_secs(limit) {
                Err(format!("{detail}; took {took:.2?}, limit {limit} s"))
            } else {
                Ok(detail)
            }
        });
        match result {
            Ok(detail) => println!("PASS {name} ({took:.2?}, limit {limit} s): {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name} ({took:.2?}, limit {limit} s): {why}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}

fn pilot_rule_stats() -> Result<String, String> {
    let xml = std::fs::read_to_string(format!("{ROOT}/fixtures/pilot-session.xml")).map_err(|e| e.to_string())?;
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let app = gecka_server::router(gecka_server::AppState::open(dir.path(), None).map_err(|e| e.to_string())?, None);
    let rt = tokio::runtime::Runtime::new().map_err(|e| e.to_string())?;
    let call = |method: &str, uri: &str, body: String| {
        let req = Request::builder()
            .method(method)
            .uri(uri)
            .header(header::CONTENT_TYPE, "application/xml")
            .body(Body::from(body))
            .unwrap();
        rt.block_on(async {
            let resp = app.clone().oneshot(req).await.unwrap();
            let status = resp.status();
            let bytes = resp.into_body().collect().await.unwrap().to_bytes();
            (status, String::from_utf8_lossy(&bytes).into_owned())
        })
    };
    let (status, body) = call("POST", "/api/sessions", xml);
    ensure(status == StatusCode::CREATED, || format!("ingest returned {status}: {body}"))?;
    let (_, stats) = call("GET", "/api/stats/poags?limit=10", String::new());
    let stats: Vec<Value> = serde_json::from_str(&stats).map_err(|e| e.to_string())?;
    let strs = |v: &Value| -> Vec<String> { v.as_array().unwrap().iter().map(|s| s.as_str().unwrap().to_string()).collect() };
    let got: BTreeSet<(String, String, Vec<String>, Vec<String>, Option<String>)> = stats
        .iter()
        .map(|s| {
            (
                s["item"].as_str().unwrap().to_string(),
                s["action"].as_str().unwrap().to_string(),
                strs(&s["prerequisites"]),
                strs(&s["outcome"]),
                s["goal"].as_str().map(str::to_string),
            )
        })
        .collect();
    let table: [(&str, &str, &[&str], &str, Option<&str>); 10] = [
        ("blender", "blend", &["orange"], "orange juice", Some("quench thirst")),
        ("bread", "cut", &["knife"], "bread slices", None),
        ("bread slices", "stack", &["cheese", "ham"], "sandwich", Some("satisfy hunger")),
        ("coffee beans", "hit", &["pestle"], "coffee powder", None),
        ("coffee maker", "fill", &["coffee powder", "boiled water"], "coffee", None),
        ("kettle", "fill", &["water"], "boiled water", None),
        ("chair", "hit", &["hammer"], "wood pieces", None),
        ("can", "open", &["can opener"], "food", Some("satisfy hunger")),
        ("towel", "cut", &["scissors"], "bandage", None),
        ("bag", "fill", &["sand"], "sandbag", Some("flood control")),
    ];
    let want: BTreeSet<_> = table
        .iter()
        .map(|(i, a, p, o, g)| {
            (
                i.to_string(),
                a.to_string(),
                p.iter().map(|s| s.to_string()).collect(),
                vec![o.to_string()],
                g.map(str::to_string),
            )
        })
        .collect();
    ensure(stats.len() == 10, || format!("{} stat rows", stats.len()))?;
    ensure(got == want, || format!("stats differ: {:?}", got.symmetric_difference(&want).collect::<Vec<_>>()))?;
    let (_, tsv) = call("GET", "/api/assertions?session=pilot-kitchen&format=tsv", String::new());
    let sentence = "the result of blending an orange with a blender, is orange juice";
    ensure(tsv.contains(sentence), || "blending sentence missing".into())?;
    Ok("10 rows match, blending sentence exported".into())
}

fn xml_round_trip() -> Result<String, String> {
    let mut failures = 0;
    for seed in 0..1000u64 {
        let s = support::random_session(seed.wrapping_mul(0x9e37_79b9_7f4a_7c15));
        let xml = export_session_xml(&s, &KnowledgeBase::new()).map_err(|e| format!("seed {seed}: {e}"))?;
        if parse_session_xml(&xml).ok().as_ref() != Some(&s) {
            failures += 1;
        }
    }
    ensure(failures == 0, || format!("{failures} of 1000 sessions failed"))?;
    Ok("1000/1000 sessions".into())
}

fn bfs_from(scene: &Scene, from: Pos) -> HashMap<Pos, usize> {
    let mut dist = HashMap::from([(from, 0)]);
    let mut queue = VecDeque::from([from]);
    while let Some(p) = queue.pop_front() {
        let d = dist[&p];
        for q in [Pos::new(p.x, p.y - 1), Pos::new(p.x + 1, p.y), Pos::new(p.x, p.y + 1), Pos::new(p.x - 1, p.y)] {
            if scene.is_floor(q) && !dist.contains_key(&q) {
                dist.insert(q, d + 1);
                queue.push_back(q);
            }
        }
    }
    dist
}

fn pathfinding_oracle() -> Result<String, String> {
    let mut rng = SplitMix64::new(15);
    let mut pairs = 0u64;
    for g in 0..100 {
        let mut scene = Scene::new(SceneId::from("grid"), "grid", 15, 15).unwrap();
        let floors: Vec<Pos> = (0..225)
            .filter_map(|i| {
                let p = Pos::new(i % 15, i / 15);
                if rng.below(100) < 30 {
                    scene.set_tile(p, Tile::Wall);
                    None
                } else {
                    Some(p)
                }
            })
            .collect();
        for &from in &floors {
            let dist = bfs_from(&scene, from);
            for &to in &floors {
                let path = shortest_path(&scene, from, to).map_err(|e| e.to_string())?;
                match (dist.get(&to), path) {
                    (None, None) => {}
                    (Some(&d), Some(path)) => {
                        pairs += 1;
                        ensure(path.len() == d + 1, || format!("grid {g} {from:?}->{to:?}: {} vs bfs {d}", path.len() - 1))?;
                        ensure(path[0] == from && path[d] == to, || format!("grid {g}: endpoints"))?;
                        ensure(path.windows(2).all(|w| w[0].manhattan(w[1]) == 1 && scene.is_floor(w[1])), || {
                            format!("grid {g}: broken path")
                        })?;
                    }
                    (want, got) => return Err(format!("grid {g} {from:?}->{to:?}: bfs {want:?}, path {got:?}")),
                }
            }
        }
    }
    Ok(format!("{pairs} reachable pairs on 100 grids"))
}

fn dungeon_properties() -> Result<String, String> {
    for seed in 0..1000u64 {
        let params = DungeonParams::new(32, 32, seed);
        let scene = generate_dungeon(&params).map_err(|e| format!("seed {seed}: {e}"))?;
        let again = generate_dungeon(&params).map_err(|e| format!("seed {seed}: {e}"))?;
        ensure(scene.to_canonical_json() == again.to_canonical_json(), || format!("seed {seed}: not deterministic"))?;
        let entry = scene.entry().ok_or(format!("seed {seed}: no entry"))?.position;
        let reach = bfs_from(&scene, entry);
        for exit in scene.exits() {
            ensure(reach.contains_key(&exit.position), || format!("seed {seed}: exit unreachable"))?;
        }
        ensure(scene.exits().count() >= 1, || format!("seed {seed}: no exit"))?;
        let floor = (0..32)
            .flat_map(|y| (0..32).map(move |x| Pos::new(x, y)))
            .filter(|&p| scene.is_floor(p))
            .count();
        ensure(reach.len() == floor, || format!("seed {seed}: {} of {floor} floor tiles reachable", reach.len()))?;
    }
    Ok("1000/1000 seeds connected and deterministic".into())
}

fn inheritance_suite() -> Result<String, String> {
    let mut kb = KnowledgeBase::new();
    let bread = kb.define_object_type("bread", None, None).map_err(|e| e.to_string())?;
    let moldy = kb.define_object_type("moldy bread", Some(bread), None).map_err(|e| e.to_string())?;
    let rule = |kb: &mut KnowledgeBase, verb: &str, tool: &str, out: &str| {
        let action = kb.define_action(verb).unwrap();
        let (object, _) = kb.type_named_or_register(out).unwrap();
        let poag = NewPoag {
            item: bread,
            action,
            prerequisites: vec![Prerequisite::object(tool)],
            outcome: vec![Outcome { object, state: None }],
            goal: None,
        };
        kb.attach_poag(bread, poag).unwrap()
    };
    let cut = rule(&mut kb, "cut", "knife", "bread slices");
    let (kitchen, pantry) = (SceneId::from("kitchen"), SceneId::from("pantry"));
    let plain: BTreeSet<_> = [(&kitchen, 1), (&kitchen, 2), (&pantry, 1)]
        .into_iter()
        .map(|(s, x)| kb.instantiate(bread, s.clone(), Pos::new(x, 1), BTreeMap::new()).unwrap())
        .collect();
    let spoiled = kb
        .instantiate(moldy, pantry.clone(), Pos::new(2, 2), BTreeMap::from([(cut, OverrideSpec::Remove)]))
        .map_err(|e| e.to_string())?;
    let holders = |kb: &KnowledgeBase, p| -> BTreeSet<_> {
        kb.instances()
            .filter(|i| kb.effective_poags(i.id).unwrap().iter().any(|q| q.id == p))
            .map(|i| i.id)
            .collect()
    };
    ensure(holders(&kb, cut) == plain, || format!("cut held by {:?}", holders(&kb, cut)))?;
    let toast = rule(&mut kb, "toast", "toaster", "toast");
    let all: BTreeSet<_> = plain.iter().copied().chain([spoiled]).collect();
    ensure(holders(&kb, toast) == all, || format!("new rule held by {:?}", holders(&kb, toast)))?;
    ensure(holders(&kb, cut) == plain, || "override leaked".into())?;
    Ok("cut on the 3 plain breads, new rule on all 4".into())
}

fn simulation() -> Result<String, String> {
    let mut params = DungeonParams::new(32, 32, 42);
    params.zombie_count = 3;
    let scene = generate_dungeon(&params).map_err(|e| e.to_string())?;
    let floors: Vec<Pos> = (0..32).flat_map(|y| (0..32).map(move |x| Pos::new(x, y))).filter(|&p| scene.is_floor(p)).collect();
    let mut rng = SplitMix64::new(7);
    let script: Vec<Command> = (0..100)
        .map(|_| match rng.below(4) {
            0 => Command::Wait,
            _ => Command::MoveTo { target: floors[rng.below(floors.len() as u64) as usize] },
        })
        .collect();
    // Health high enough that all 100 commands are played.
    let config = GameConfig { initial_health: 1000, ..GameConfig::default() };
    let scenes = Arc::new(BTreeMap::from([(scene.id.clone(), scene.clone())]));
    let kb = Arc::new(KnowledgeBase::new());
    let play = |commands: &[Command]| {
        let mut game = Game::new(kb.clone(), scenes.clone(), &scene.id, 42, config).unwrap();
        let trace = run_trace(&mut game, commands);
        (trace, game.state().turn)
    };
    let (first, turns) = play(&script);
    ensure(turns == 100, || format!("only {turns} turns played"))?;
    let (second, _) = play(&script);
    ensure(first == second, || "re-run trace differs".into())?;
    let replayed = commands_from_trace(&first).map_err(|e| e.to_string())?;
    ensure(replayed == script, || "trace does not carry the script".into())?;
    ensure(play(&replayed).0 == first, || "replay from trace differs".into())?;

    let mut corridor = Scene::from_rows(SceneId::from("corridor"), &["........................"]).unwrap();
    for (kind, x) in [(PortalKind::Entry, 0), (PortalKind::Exit, 1)] {
        corridor
            .apply_in_place(&EditOp::PlacePortal { portal: Portal { kind, position: Pos::new(x, 0), target_scene: None } })
            .map_err(|e| e.to_string())?;
    }
    corridor.monster_spawns.push(Pos::new(23, 0));
    let mut game = gecka_core::sim::start_game(&corridor, &KnowledgeBase::new(), 1).map_err(|e| e.to_string())?;
    let me = game.state().character.position;
    let mut d = bfs_from(&corridor, me)[&game.state().zombies[0].position];
    let mut steps = 0;
    while d > 1 {
        game.step(&Command::Wait).map_err(|e| e.to_string())?;
        ensure(game.state().character.position == me, || "character moved".into())?;
        let now = bfs_from(&corridor, me)[&game.state().zombies[0].position];
        ensure(now == d - 1, || format!("distance {d} -> {now}"))?;
        d = now;
        steps += 1;
    }
    Ok(format!("100-turn trace replays byte-identically; pursuit closed 1 tile/turn over {steps} turns"))
}

fn corpus_bootstrap() -> Result<String, String> {
    let read = |f: &str| std::fs::read_to_string(format!("{ROOT}/data/seed/{f}")).map_err(|e| e.to_string());
    let nouns = load_word_list(&read("nouns.txt")?).map_err(|e| e.to_string())?;
    let verbs = load_word_list(&read("verbs.txt")?).map_err(|e| e.to_string())?;
    ensure(nouns.len() == 1500 && verbs.len() == 636, || format!("{} nouns, {} verbs", nouns.len(), verbs.len()))?;

    // Offline counts over a sample of pairs with a narrow range, so ties
    // and zeros are common.
    let mut rng = SplitMix64::new(2016);
    let mut tsv = String::from("# verb\tnoun\tcount\n");
    let mut table = Vec::new();
    for v in &verbs {
        for n in &nouns {
            if rng.below(20) == 0 {
                let c = rng.below(6);
                tsv += &format!("{v}\t{n}\t{c}\n");
                table.push((v.clone(), n.clone(), c));
            }
        }
    }
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("counts.tsv");
    std::fs::write(&path, &tsv).map_err(|e| e.to_string())?;
    let counts = TsvCounts::parse(&std::fs::read_to_string(&path).unwrap()).map_err(|e| e.to_string())?;
    let report = bootstrap_corpus(&nouns, &verbs, &counts).map_err(|e| e.to_string())?;
    ensure(report.failures.is_empty(), || format!("{} provider failures", report.failures.len()))?;

    let mut want: Vec<(String, String, u64)> = table.into_iter().filter(|t| t.2 > 0).collect();
    want.sort_by(|a, b| b.2.cmp(&a.2).then(a.0.cmp(&b.0)).then(a.1.cmp(&b.1)));
    let got: Vec<(String, String, u64)> = report.entries.iter().map(|e| (e.verb.clone(), e.noun.clone(), e.score as u64)).collect();
    ensure(got == want, || "corpus order differs from the sort oracle".into())?;
    for w in got.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        ensure(a.2 > b.2 || (a.2 == b.2 && (&a.0, &a.1) < (&b.0, &b.1)), || format!("{a:?} before {b:?}"))?;
    }
    Ok(format!("1500 nouns, 636 verbs; {} scored pairs in oracle order", got.len()))
}
