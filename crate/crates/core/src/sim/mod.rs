//! Player-mode runtime: dungeon generation, pathing, fog of war, zombie
//! pursuit and POAG application, all deterministic given a seed.

pub mod dungeon;
pub mod game;
pub mod path;
pub mod rng;
pub mod script;
pub mod trace;

pub use dungeon::{generate_dungeon, DungeonError, DungeonParams};
pub use game::{
    start_game, Character, Command, Event, Game, GameConfig, GameError, GameItem, GameState,
    GameView, ItemLocation, Status, ViewGoal, ViewItem, Zombie,
};
pub use path::{astar, shortest_path, visible_tiles, PathError};
pub use rng::{SplitMix64, PRNG_ID};
pub use script::{parse_command, parse_script, render_command, render_script, ScriptError};
pub use trace::{commands_from_trace, parse_header, run_trace, scene_hash, TraceError, TraceHeader};
