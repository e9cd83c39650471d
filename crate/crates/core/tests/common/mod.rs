//! Shared fixtures: random mixed-ground grids and an independent shortest-path oracle.
#![allow(dead_code)]

use citysim::environment::{Cell, CellCode, Direction, Flow, GridMap, GroundType};
use citysim::planner::{classify_action, heading_after, AgentKind};
use petgraph::algo::dijkstra;
use petgraph::graph::{DiGraph, NodeIndex};
use rand::Rng;

/// Ground cost table written out independently of the library.
pub fn oracle_cell_cost(kind: AgentKind, g: GroundType) -> Option<f64> {
    use GroundType::*;
    let c = match (kind, g) {
        (_, Building) | (_, Obstacle) => return None,
        (AgentKind::Walker, Sidewalk | Zebra | Pothole) => 1.0,
        (AgentKind::Walker, Road | Parking) => 5.0,
        (AgentKind::Walker, TurnCell | LeftTurnCell) => 10.0,
        (AgentKind::Driver, Sidewalk) => return None,
        (AgentKind::Driver, Road | Zebra | TurnCell | LeftTurnCell) => 1.0,
        (AgentKind::Driver, Parking | Pothole) => 5.0,
    };
    Some(c)
}

pub fn oracle_risk(name: &str) -> f64 {
    match name {
        "forward" | "step" => 0.0,
        "right_turn" => 1.0,
        "left_turn" => 2.0,
        "lane_change" => 3.0,
        "invalid_turn" => 5.0,
        "backward" => 20.0,
        other => panic!("unknown action {other}"),
    }
}

fn cost_at(grid: &GridMap, c: Cell, kind: AgentKind, blocked: &[Cell]) -> Option<f64> {
    if grid.is_obstacle(c) || blocked.contains(&c) {
        return None;
    }
    oracle_cell_cost(kind, grid.ground(c))
}

/// Random grid of mixed ground types with random 1–2 direction flows.
pub fn random_grid<R: Rng>(rng: &mut R, w: usize, h: usize) -> GridMap {
    use GroundType::*;
    let table = [
        (Sidewalk, 28),
        (Road, 30),
        (Zebra, 8),
        (TurnCell, 6),
        (LeftTurnCell, 4),
        (Parking, 5),
        (Pothole, 5),
        (Building, 10),
        (Obstacle, 4),
    ];
    let total: u32 = table.iter().map(|t| t.1).sum();
    let cells = (0..w * h)
        .map(|_| {
            let mut roll = rng.random_range(0..total);
            let ground = table
                .iter()
                .find(|(_, p)| {
                    if roll < *p {
                        true
                    } else {
                        roll -= p;
                        false
                    }
                })
                .unwrap()
                .0;
            if !ground.carries_flow() {
                return CellCode::bare(ground);
            }
            let a = Direction::ALL[rng.random_range(0..4)];
            let flow = if rng.random_bool(0.3) {
                Flow::two(a, a.right()).unwrap()
            } else {
                Flow::one(a)
            };
            CellCode::new(ground, flow).unwrap()
        })
        .collect();
    GridMap::new(w, h, cells)
}

pub fn random_traversable<R: Rng>(rng: &mut R, grid: &GridMap, kind: AgentKind) -> Option<Cell> {
    let cells: Vec<Cell> = grid
        .cells_iter()
        .filter(|&c| cost_at(grid, c, kind, &[]).is_some())
        .collect();
    (!cells.is_empty()).then(|| cells[rng.random_range(0..cells.len())])
}

const SLOTS: usize = 5;

/// Cheapest route cost by Dijkstra on an explicit state graph whose edge
/// weights are `cell cost + alpha * action risk`. Driver states carry the heading.
pub fn oracle_cost(
    grid: &GridMap,
    start: Cell,
    goal: Cell,
    kind: AgentKind,
    alpha: f64,
    blocked: &[Cell],
) -> Option<f64> {
    let mut graph: DiGraph<(), f64> = DiGraph::new();
    let nodes: Vec<NodeIndex> = (0..grid.len() * SLOTS).map(|_| graph.add_node(())).collect();
    let id = |c: Cell, slot: usize| nodes[grid.index(c) * SLOTS + slot];
    for c in grid.cells_iter() {
        for (d, n) in grid.neighbors(c) {
            let Some(cost) = cost_at(grid, n, kind, blocked) else {
                continue;
            };
            match kind {
                AgentKind::Walker => {
                    graph.add_edge(id(c, 4), id(n, 4), cost);
                }
                AgentKind::Driver => {
                    for h in Direction::ALL {
                        let a = classify_action(grid, c, n, h);
                        let nh = heading_after(a, h, d);
                        graph.add_edge(id(c, h.index()), id(n, nh.index()), cost + alpha * oracle_risk(a.name()));
                    }
                }
            }
        }
    }
    let start_slot = match kind {
        AgentKind::Walker => 4,
        AgentKind::Driver => grid.get(start).flow.first().unwrap_or(Direction::North).index(),
    };
    let dist = dijkstra(&graph, id(start, start_slot), None, |e| *e.weight());
    (0..SLOTS)
        .filter_map(|s| dist.get(&id(goal, s)).copied())
        .min_by(|a, b| a.total_cmp(b))
}
