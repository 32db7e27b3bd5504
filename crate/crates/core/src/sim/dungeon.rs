//! Seeded rooms-and-corridors dungeon generation.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::rng::SplitMix64;
use crate::scene::{Portal, PortalKind, Pos, Scene, SceneError, SceneId, Tile};

/// Attempts per room before giving up on it.
const PLACEMENT_ATTEMPTS: u32 = 1000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DungeonParams {
    pub width: u32,
    pub height: u32,
    /// Inclusive range of rooms to attempt.
    pub room_count: (u32, u32),
    /// Smallest room, (w, h).
    pub room_min: (u32, u32),
    /// Largest room, (w, h). Clipped to the grid interior.
    pub room_max: (u32, u32),
    pub zombie_count: u32,
    pub seed: u64,
}

impl DungeonParams {
    pub fn new(width: u32, height: u32, seed: u64) -> Self {
        DungeonParams {
            width,
            height,
            room_count: (4, 8),
            room_min: (3, 3),
            room_max: (8, 8),
            zombie_count: 3,
            seed,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DungeonError {
    #[error("grid {width}x{height} cannot hold a {room_w}x{room_h} room inside its border wall")]
    GridTooSmall {
        width: u32,
        height: u32,
        room_w: u32,
        room_h: u32,
    },
    #[error("empty or invalid range: {0}")]
    BadRange(&'static str),
    #[error("a single 1x1 room leaves no tile for the exit")]
    NoExitTile,
    #[error(transparent)]
    Scene(#[from] SceneError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Room {
    x: i32,
    y: i32,
    w: i32,
    h: i32,
}

impl Room {
    fn center(&self) -> Pos {
        Pos::new(self.x + self.w / 2, self.y + self.h / 2)
    }

    fn contains(&self, p: Pos) -> bool {
        p.x >= self.x && p.x < self.x + self.w && p.y >= self.y && p.y < self.y + self.h
    }

    /// True if the rooms overlap or touch; rooms keep a wall between them.
    fn crowds(&self, o: &Room) -> bool {
        self.x - 1 < o.x + o.w && o.x - 1 < self.x + self.w && self.y - 1 < o.y + o.h && o.y - 1 < self.y + self.h
    }
}

fn check(p: &DungeonParams) -> Result<(), DungeonError> {
    if p.room_count.0 == 0 || p.room_count.0 > p.room_count.1 {
        return Err(DungeonError::BadRange("room_count"));
    }
    let (min, max) = (p.room_min, p.room_max);
    if min.0 == 0 || min.1 == 0 || min.0 > max.0 || min.1 > max.1 {
        return Err(DungeonError::BadRange("room size"));
    }
    if p.width < min.0 + 2 || p.height < min.1 + 2 {
        return Err(DungeonError::GridTooSmall {
            width: p.width,
            height: p.height,
            room_w: min.0,
            room_h: min.1,
        });
    }
    Ok(())
}

fn carve_corridor(scene: &mut Scene, a: Pos, b: Pos) {
    let (x0, x1) = (a.x.min(b.x), a.x.max(b.x));
    for x in x0..=x1 {
        scene.set_tile(Pos::new(x, a.y), Tile::Floor);
    }
    let (y0, y1) = (a.y.min(b.y), a.y.max(b.y));
    for y in y0..=y1 {
        scene.set_tile(Pos::new(b.x, y), Tile::Floor);
    }
}

/// Builds an all-wall grid, carves rooms placed by rejection sampling and
/// joins consecutive rooms with L-shaped corridors (horizontal leg first).
/// Entry goes at the first room's center, the exit at the last room's
/// center, zombies on distinct random floor tiles outside the first room.
pub fn generate_dungeon(params: &DungeonParams) -> Result<Scene, DungeonError> {
    check(params)?;
    let mut rng = SplitMix64::new(params.seed);
    let id = SceneId(format!("dungeon-{}", params.seed));
    let mut scene = Scene::filled(id, &format!("dungeon {}", params.seed), params.width, params.height, Tile::Wall)?;

    let max_w = params.room_max.0.min(params.width - 2);
    let max_h = params.room_max.1.min(params.height - 2);
    let wanted = rng.range_inclusive(params.room_count.0, params.room_count.1);
    let mut rooms: Vec<Room> = Vec::new();
    for _ in 0..wanted {
        for _ in 0..PLACEMENT_ATTEMPTS {
            let w = rng.range_inclusive(params.room_min.0, max_w);
            let h = rng.range_inclusive(params.room_min.1, max_h);
            let x = rng.range_inclusive(1, params.width - 1 - w);
            let y = rng.range_inclusive(1, params.height - 1 - h);
            let room = Room {
                x: x as i32,
                y: y as i32,
                w: w as i32,
                h: h as i32,
            };
            if rooms.iter().all(|r| !r.crowds(&room)) {
                rooms.push(room);
                break;
            }
        }
    }

    for r in &rooms {
        for y in r.y..r.y + r.h {
            for x in r.x..r.x + r.w {
                scene.set_tile(Pos::new(x, y), Tile::Floor);
            }
        }
    }
    for pair in rooms.windows(2) {
        carve_corridor(&mut scene, pair[0].center(), pair[1].center());
    }

    let first = rooms[0];
    let last = *rooms.last().expect("at least one room");
    let entry = first.center();
    let exit = if rooms.len() > 1 {
        last.center()
    } else {
        let corner = Pos::new(first.x + first.w - 1, first.y + first.h - 1);
        if corner == entry {
            return Err(DungeonError::NoExitTile);
        }
        corner
    };
    scene.apply_in_place(&crate::scene::EditOp::PlacePortal {
        portal: Portal {
            kind: PortalKind::Entry,
            position: entry,
            target_scene: None,
        },
    })?;
    scene.apply_in_place(&crate::scene::EditOp::PlacePortal {
        portal: Portal {
            kind: PortalKind::Exit,
            position: exit,
            target_scene: None,
        },
    })?;

    // Partial Fisher-Yates over the candidate tiles in row-major order.
    let mut candidates: Vec<Pos> = scene
        .positions()
        .filter(|&p| scene.is_floor(p) && !first.contains(p))
        .collect();
    let k = (params.zombie_count as usize).min(candidates.len());
    for i in 0..k {
        let j = i + rng.below((candidates.len() - i) as u64) as usize;
        candidates.swap(i, j);
    }
    candidates.truncate(k);
    scene.monster_spawns = candidates;
    Ok(scene)
}
