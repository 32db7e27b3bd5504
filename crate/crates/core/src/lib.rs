//! Core of the gecka engine: object types with POAG semantics, tile scenes,
//! the turn-based player runtime and the session interchange formats.
//!
//! A POAG (prerequisite, object, action, goal) record says what an object
//! type can do: "blend" a "blender" with an "orange" present and you get
//! "orange juice", which helps to "quench thirst". Records attached to a type
//! are seen by every instance of that type and of its subtypes; single
//! instances may remove or replace what they inherit.

pub mod editor;
pub mod io;
pub mod kb;
pub mod scene;
pub mod sim;

pub use editor::Editor;
pub use io::normalize_term;
pub use kb::{
    Action, ActionId, Available, GoalId, InstanceId, KbError, KnowledgeBase, NewPoag,
    ObjectInstance, ObjectType, ObjectTypeId, Outcome, Override, OverrideSpec, Poag, PoagId,
    PrereqKind, Prerequisite, Resolution, ShapePart,
};
pub use scene::{EditOp, Pos, Portal, PortalKind, Scene, SceneError, SceneId, Tile};
