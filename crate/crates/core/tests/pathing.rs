use std::collections::{BTreeSet, VecDeque};

use gecka_core::sim::{shortest_path, visible_tiles};
use gecka_core::{Pos, Scene, SceneId, Tile};
use proptest::prelude::*;

fn bfs_distance(scene: &Scene, from: Pos, to: Pos) -> Option<usize> {
    let mut dist = std::collections::HashMap::from([(from, 0usize)]);
    let mut queue = VecDeque::from([from]);
    while let Some(p) = queue.pop_front() {
        if p == to {
            return Some(dist[&p]);
        }
        let d = dist[&p];
        for q in [Pos::new(p.x + 1, p.y), Pos::new(p.x - 1, p.y), Pos::new(p.x, p.y + 1), Pos::new(p.x, p.y - 1)] {
            if scene.is_floor(q) && !dist.contains_key(&q) {
                dist.insert(q, d + 1);
                queue.push_back(q);
            }
        }
    }
    None
}

fn grid(w: u32, h: u32, walls: &[bool]) -> Scene {
    let mut s = Scene::new(SceneId::from("g"), "g", w, h).unwrap();
    for (i, &wall) in walls.iter().enumerate().take((w * h) as usize) {
        if wall {
            s.set_tile(Pos::new((i as u32 % w) as i32, (i as u32 / w) as i32), Tile::Wall);
        }
    }
    s
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn path_length_matches_bfs(
        w in 1u32..10,
        h in 1u32..10,
        walls in proptest::collection::vec(proptest::bool::weighted(0.3), 100),
        a in any::<(u32, u32)>(),
        b in any::<(u32, u32)>(),
    ) {
        let s = grid(w, h, &walls);
        let from = Pos::new((a.0 % w) as i32, (a.1 % h) as i32);
        let to = Pos::new((b.0 % w) as i32, (b.1 % h) as i32);
        let got = shortest_path(&s, from, to);
        if !s.is_floor(from) || !s.is_floor(to) {
            prop_assert!(got.is_err());
            return Ok(());
        }
        let got = got.unwrap();
        match (got, bfs_distance(&s, from, to)) {
            (None, None) => {}
            (Some(path), Some(d)) => {
                prop_assert_eq!(path.len(), d + 1);
                prop_assert_eq!(path[0], from);
                prop_assert_eq!(*path.last().unwrap(), to);
                for pair in path.windows(2) {
                    prop_assert_eq!(pair[0].manhattan(pair[1]), 1);
                    prop_assert!(s.is_floor(pair[1]));
                }
            }
            (got, want) => prop_assert!(false, "path {:?} vs bfs {:?}", got, want),
        }
        // Same inputs, same path.
        prop_assert_eq!(shortest_path(&s, from, to).unwrap(), shortest_path(&s, from, to).unwrap());
    }

    #[test]
    fn vision_is_the_clipped_chebyshev_ball(w in 1u32..12, h in 1u32..12, x in 0i32..12, y in 0i32..12, r in 0u32..6) {
        let s = Scene::new(SceneId::from("v"), "v", w, h).unwrap();
        let p = Pos::new(x % w as i32, y % h as i32);
        let mut want = BTreeSet::new();
        for yy in 0..h as i32 {
            for xx in 0..w as i32 {
                if (xx - p.x).unsigned_abs().max((yy - p.y).unsigned_abs()) <= r {
                    want.insert(Pos::new(xx, yy));
                }
            }
        }
        prop_assert_eq!(visible_tiles(&s, p, r), want);
    }
}
