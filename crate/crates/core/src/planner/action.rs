use serde::{Deserialize, Serialize};

use crate::environment::{Cell, Direction, GridMap, GroundType};

/// Movement primitive taken to enter a cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Action {
    Forward,
    RightTurn,
    LeftTurn,
    LaneChange,
    InvalidTurn,
    Backward,
    /// Walker move; walkers carry no maneuver semantics.
    Step,
}

impl Action {
    pub const fn name(self) -> &'static str {
        match self {
            Action::Forward => "forward",
            Action::RightTurn => "right_turn",
            Action::LeftTurn => "left_turn",
            Action::LaneChange => "lane_change",
            Action::InvalidTurn => "invalid_turn",
            Action::Backward => "backward",
            Action::Step => "step",
        }
    }
}

/// Risk of a driver maneuver.
pub fn driver_risk(action: Action) -> f64 {
    match action {
        Action::Forward | Action::Step => 0.0,
        Action::RightTurn => 1.0,
        Action::LeftTurn => 2.0,
        Action::LaneChange => 3.0,
        Action::InvalidTurn => 5.0,
        Action::Backward => 20.0,
    }
}

/// Walkers are assumed lawful: their risk is always zero.
pub fn walker_risk(_action: Action) -> f64 {
    0.0
}

/// Classifies a driver move between 4-adjacent cells given the current heading.
///
/// Rules, first match wins (`d` is the move direction):
/// 1. `d` not in the origin's flow but opposite one of its directions: `Backward`.
/// 2. `d` equals the heading: `Forward` if the origin allows `d`, else `InvalidTurn`.
/// 3. The origin has a single flow direction and `d` is it: `Forward`.
/// 4. `d` reverses the heading: `Backward`.
/// 5. Perpendicular from a turn cell into a cell that allows `d`: `RightTurn` / `LeftTurn`.
/// 6. Perpendicular into a parallel road lane with the same flow: `LaneChange`.
/// 7. Anything else: `InvalidTurn`.
///
/// Panics if the cells are not 4-adjacent.
pub fn classify_action(grid: &GridMap, from: Cell, to: Cell, heading: Direction) -> Action {
    let d = from
        .direction_to(to)
        .expect("classify_action requires 4-adjacent cells");
    let origin = grid.get(from);
    let flow = origin.flow;

    if !flow.contains(d) && flow.iter().any(|f| f == d.opposite()) {
        return Action::Backward;
    }
    if d == heading {
        return if flow.is_empty() || flow.contains(d) {
            Action::Forward
        } else {
            Action::InvalidTurn
        };
    }
    if flow.len() == 1 && flow.contains(d) {
        return Action::Forward;
    }
    if d == heading.opposite() {
        return Action::Backward;
    }
    let target = grid.get(to);
    if origin.ground.is_turn() && target.flow.contains(d) {
        return if d == heading.right() {
            Action::RightTurn
        } else {
            Action::LeftTurn
        };
    }
    if matches!(target.ground, GroundType::Road | GroundType::Pothole) && target.flow.same_set(&flow) {
        return Action::LaneChange;
    }
    Action::InvalidTurn
}

/// Heading after taking `action` in direction `d`. Lane changes keep the lane direction.
pub fn heading_after(action: Action, heading: Direction, d: Direction) -> Direction {
    if action == Action::LaneChange {
        heading
    } else {
        d
    }
}
