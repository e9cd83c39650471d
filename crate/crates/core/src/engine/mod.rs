//! The discrete-time loop: sense, react, act and iterate phases, collision
//! detection, agent lifecycle and population control.

mod collision;
mod config;
mod world;

pub use collision::{
    detect_collisions, threshold, Collision, CollisionBody, CollisionKind, VEHICLE_RADIUS,
    VEHICLE_VEHICLE_THRESHOLD, WALKER_RADIUS, WALKER_VEHICLE_THRESHOLD,
};
pub use config::{ConfigError, Dist, ProfileDist, Range, SimConfig, SpawnMode};
pub use world::{run, run_with_candidates, ReactivateError, SimulationResult, StepRecord, World};

use thiserror::Error;

use crate::agents::AgentId;
use crate::environment::Point;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EventKind {
    Spawn,
    Goal,
    Park,
    Reactivate,
    CollisionVv,
    Runover,
    JaywalkEntry,
    Replan,
}

impl EventKind {
    pub const fn name(self) -> &'static str {
        match self {
            EventKind::Spawn => "spawn",
            EventKind::Goal => "goal",
            EventKind::Park => "park",
            EventKind::Reactivate => "reactivate",
            EventKind::CollisionVv => "collision_vv",
            EventKind::Runover => "runover",
            EventKind::JaywalkEntry => "jaywalk_entry",
            EventKind::Replan => "replan",
        }
    }
}

/// One event-log row.
#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    pub step: u64,
    pub kind: EventKind,
    pub agents: Vec<AgentId>,
    pub position: Point,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error(transparent)]
    Config(#[from] ConfigError),
}
