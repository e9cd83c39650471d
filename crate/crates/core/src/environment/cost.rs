use super::{CellCode, GroundType};

/// Pedestrian traversal cost of a cell's ground. Infinite cells are never expanded.
pub fn walker_cost(cell: &CellCode) -> f64 {
    match cell.ground {
        GroundType::Sidewalk | GroundType::Zebra => 1.0,
        GroundType::Road => 5.0,
        GroundType::TurnCell | GroundType::LeftTurnCell => 10.0,
        GroundType::Parking => 5.0,
        // Potholes impede vehicles, not pedestrians.
        GroundType::Pothole => 1.0,
        GroundType::Building | GroundType::Obstacle => f64::INFINITY,
    }
}

/// Vehicle traversal cost of a cell's ground.
pub fn driver_cost(cell: &CellCode) -> f64 {
    match cell.ground {
        GroundType::Road | GroundType::Zebra => 1.0,
        GroundType::Parking | GroundType::Pothole => 5.0,
        // Turning is priced by the action risk, not the ground.
        GroundType::TurnCell | GroundType::LeftTurnCell => 1.0,
        GroundType::Sidewalk | GroundType::Building | GroundType::Obstacle => f64::INFINITY,
    }
}
