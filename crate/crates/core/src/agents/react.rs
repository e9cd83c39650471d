use super::{AgentParams, AgentState, Decision, Perception};
use crate::environment::{Cell, GridMap, GroundType};
use crate::planner::AgentKind;

/// Walker rule: stop for active vehicles in the window unless standing on a
/// zebra (right of way); route around inactive blockers.
pub fn react_walker(state: &AgentState, p: &Perception, grid: &GridMap, params: &AgentParams) -> Decision {
    let on_zebra = grid.ground(state.cell()) == GroundType::Zebra;
    let vehicle = p
        .sightings
        .iter()
        .any(|s| s.view.kind == AgentKind::Driver && s.view.active);
    if vehicle && !on_zebra {
        if impatient(state, p, params) {
            return Decision::Replan;
        }
        return Decision::Stop;
    }
    if !p.blocked.is_empty() {
        return Decision::Replan;
    }
    Decision::Proceed
}

/// Driver rule: yield at zebras with walkers nearby, route around inactive
/// blockers, slow down for anything else ahead, otherwise speed up.
pub fn react_driver(state: &AgentState, p: &Perception, params: &AgentParams) -> Decision {
    if !p.zebra_walkers.is_empty() {
        return Decision::Yield;
    }
    if !p.blocked.is_empty() {
        return Decision::Replan;
    }
    let ahead = p.sightings.iter().any(|s| s.view.active) || !p.vehicle_conflicts.is_empty();
    if ahead {
        if impatient(state, p, params) {
            return Decision::Replan;
        }
        return Decision::Decelerate;
    }
    Decision::Accelerate
}

pub fn react(state: &AgentState, p: &Perception, grid: &GridMap, params: &AgentParams) -> Decision {
    match state.kind {
        AgentKind::Walker => react_walker(state, p, grid, params),
        AgentKind::Driver => react_driver(state, p, params),
    }
}

fn impatient(state: &AgentState, p: &Perception, params: &AgentParams) -> bool {
    state.speed == 0.0 && state.wait_steps >= params.patience && !p.stalled.is_empty()
}

/// Cells a `Replan` treats as impassable: inactive blockers in the window,
/// plus stalled agents once patience has run out.
pub fn replan_blockers(state: &AgentState, p: &Perception, params: &AgentParams) -> Vec<Cell> {
    let mut cells = p.blocked.clone();
    if state.wait_steps >= params.patience {
        cells.extend(p.stalled.iter().copied().filter(|c| !p.blocked.contains(c)));
    }
    cells
}
