//! Deterministic multi-agent urban mobility simulation on a grid-encoded city.
//!
//! Pedestrians ("walkers") and vehicles ("drivers") plan routes with a
//! risk-aware Weighted A* and interact through a four-phase discrete-time loop
//! (sense, react, act, iterate). Runs emit per-step metrics, an event log and
//! per-cell heatmaps.

pub mod agents;
pub mod engine;
pub mod environment;
pub mod metrics;
pub mod planner;
pub mod scenario;

pub use agents::{AgentId, AgentState, Decision, Status};
pub use engine::{run, SimConfig, SimulationResult, World};
pub use environment::{Cell, CellCode, Direction, Flow, GridMap, GroundType, LayoutSpec, Point};
pub use planner::{plan, AgentKind, BehaviorProfile, Plan};
