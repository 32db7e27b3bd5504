//! Grid pathing and vision.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap};

use thiserror::Error;

use crate::scene::{Pos, Scene};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PathError {
    #[error("path endpoint {0} is out of bounds")]
    OutOfBounds(Pos),
    #[error("path endpoint {0} is not a floor tile")]
    NotFloor(Pos),
}

/// A* over a `width` x `height` grid with a Manhattan heuristic. Neighbours
/// are expanded north, east, south, west and equal-priority entries leave
/// the queue in insertion order, so the result is fully determined by the
/// inputs. `passable` is consulted for every tile but `from`.
pub fn astar(
    width: u32,
    height: u32,
    from: Pos,
    to: Pos,
    passable: impl Fn(Pos) -> bool,
) -> Option<Vec<Pos>> {
    let (w, h) = (width as i32, height as i32);
    let inside = |p: Pos| p.x >= 0 && p.y >= 0 && p.x < w && p.y < h;
    if !inside(from) || !inside(to) {
        return None;
    }
    let index = |p: Pos| (p.y * w + p.x) as usize;
    let n = (w * h) as usize;
    let mut g = vec![u32::MAX; n];
    let mut parent: Vec<Option<Pos>> = vec![None; n];
    let mut closed = vec![false; n];
    let mut open = BinaryHeap::new();
    let mut counter = 0u64;
    g[index(from)] = 0;
    open.push(Reverse((from.manhattan(to), counter, from)));
    while let Some(Reverse((_, _, p))) = open.pop() {
        let i = index(p);
        if closed[i] {
            continue;
        }
        closed[i] = true;
        if p == to {
            let mut path = vec![p];
            let mut cur = p;
            while let Some(prev) = parent[index(cur)] {
                path.push(prev);
                cur = prev;
            }
            path.reverse();
            return Some(path);
        }
        for q in p.neighbors4() {
            if !inside(q) || closed[index(q)] || !passable(q) {
                continue;
            }
            let cost = g[i] + 1;
            let j = index(q);
            if cost < g[j] {
                g[j] = cost;
                parent[j] = Some(p);
                counter += 1;
                open.push(Reverse((cost + q.manhattan(to), counter, q)));
            }
        }
    }
    None
}

/// Shortest 4-connected path over floor tiles, endpoints included.
pub fn shortest_path(scene: &Scene, from: Pos, to: Pos) -> Result<Option<Vec<Pos>>, PathError> {
    for p in [from, to] {
        if !scene.in_bounds(p) {
            return Err(PathError::OutOfBounds(p));
        }
        if !scene.is_floor(p) {
            return Err(PathError::NotFloor(p));
        }
    }
    Ok(astar(scene.width, scene.height, from, to, |p| scene.is_floor(p)))
}

/// In-bounds tiles within Chebyshev distance `radius` of `pos`. Nothing
/// occludes.
pub fn visible_tiles(scene: &Scene, pos: Pos, radius: u32) -> BTreeSet<Pos> {
    let r = radius.min(2 * crate::scene::MAX_SIZE) as i32;
    let mut out = BTreeSet::new();
    for y in pos.y - r..=pos.y + r {
        for x in pos.x - r..=pos.x + r {
            let p = Pos::new(x, y);
            if scene.in_bounds(p) {
                out.insert(p);
            }
        }
    }
    out
}
