use crate::agents::AgentId;
use crate::environment::Point;
use crate::planner::AgentKind;

/// Half the side of a vehicle's square footprint.
pub const VEHICLE_RADIUS: f64 = 0.4;
/// Half the side of a pedestrian's square footprint.
pub const WALKER_RADIUS: f64 = 0.05;
/// Vehicle–vehicle collision threshold (sum of radii).
pub const VEHICLE_VEHICLE_THRESHOLD: f64 = 0.8;
/// Walker–vehicle collision threshold (sum of radii).
pub const WALKER_VEHICLE_THRESHOLD: f64 = 0.45;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CollisionKind {
    VehicleVehicle,
    /// One walker and one driver.
    Runover,
}

/// Collision-relevant view of an agent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollisionBody {
    pub id: AgentId,
    pub kind: AgentKind,
    pub position: Point,
    /// Whether the agent moved this step; pairs where neither moved are ignored.
    pub moved: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Collision {
    pub kind: CollisionKind,
    /// Participant ids, smaller first. For runovers the order is still by id.
    pub ids: [AgentId; 2],
    /// Midpoint of the two positions.
    pub position: Point,
}

/// Collision threshold for a pair of kinds; `None` for walker pairs.
pub fn threshold(a: AgentKind, b: AgentKind) -> Option<f64> {
    match (a, b) {
        (AgentKind::Driver, AgentKind::Driver) => Some(VEHICLE_VEHICLE_THRESHOLD),
        (AgentKind::Walker, AgentKind::Walker) => None,
        _ => Some(WALKER_VEHICLE_THRESHOLD),
    }
}

/// All colliding pairs, each reported once, sorted by participant ids.
/// The result does not depend on the order of `bodies`.
pub fn detect_collisions(bodies: &[CollisionBody]) -> Vec<Collision> {
    let mut sorted = bodies.to_vec();
    sorted.sort_by_key(|b| b.id);
    let mut out = Vec::new();
    for (i, a) in sorted.iter().enumerate() {
        for b in &sorted[i + 1..] {
            if !(a.moved || b.moved) {
                continue;
            }
            let Some(t) = threshold(a.kind, b.kind) else {
                continue;
            };
            if a.position.distance(b.position) < t {
                let kind = if a.kind == b.kind {
                    CollisionKind::VehicleVehicle
                } else {
                    CollisionKind::Runover
                };
                out.push(Collision {
                    kind,
                    ids: [a.id, b.id],
                    position: Point::new(
                        (a.position.x + b.position.x) / 2.0,
                        (a.position.y + b.position.y) / 2.0,
                    ),
                });
            }
        }
    }
    out
}
