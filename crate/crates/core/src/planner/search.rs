//! Weighted A* over the grid with an additive action-risk term.
//!
//! A node is a cell for walkers and a `(cell, heading)` pair for drivers, so
//! that turn and wrong-way risks are well defined. Entering a cell costs its
//! ground cost plus `alpha * risk(action)`; the open list is ordered by
//! `f = g + w * manhattan(cell, goal)`, ties broken by smaller `h` and then by
//! insertion order. Nodes are re-opened whenever a strictly cheaper `g` is found.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::action::{classify_action, driver_risk, heading_after, walker_risk, Action};
use super::{manhattan, AgentKind, BehaviorProfile, Plan, PlanError, PlanStep};
use crate::environment::{Cell, Direction, GridMap};

/// Ground costs and maneuver risks used by the search.
pub trait CostModel {
    fn cell_cost(&self, grid: &GridMap, cell: Cell, kind: AgentKind) -> f64;
    fn risk(&self, kind: AgentKind, action: Action) -> f64;
}

/// The walker and driver cost tables with the driver risk table.
#[derive(Debug, Clone, Copy, Default)]
pub struct StandardCosts;

impl CostModel for StandardCosts {
    fn cell_cost(&self, grid: &GridMap, cell: Cell, kind: AgentKind) -> f64 {
        match kind {
            AgentKind::Walker => grid.walker_cost_at(cell),
            AgentKind::Driver => grid.driver_cost_at(cell),
        }
    }

    fn risk(&self, kind: AgentKind, action: Action) -> f64 {
        match kind {
            AgentKind::Walker => walker_risk(action),
            AgentKind::Driver => driver_risk(action),
        }
    }
}

/// One search request.
#[derive(Debug, Clone, Copy)]
pub struct Query<'a> {
    pub grid: &'a GridMap,
    pub start: Cell,
    /// Driver heading at the start; defaults to the start cell's first flow direction.
    pub heading: Option<Direction>,
    pub goal: Cell,
    pub profile: &'a BehaviorProfile,
    /// Temporarily impassable cells (damaged or parked agents). The start cell is exempt.
    pub blocked: &'a [Cell],
}

/// One popped-and-expanded node, for debugging traces.
#[derive(Debug, Clone, PartialEq)]
pub struct Expansion {
    pub order: usize,
    pub cell: Cell,
    pub heading: Option<Direction>,
    pub g: f64,
    pub h: f64,
    /// Unweighted risk of the action that reached this node.
    pub r: f64,
    pub f: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    pub plan: Option<Plan>,
    pub expansions: usize,
}

#[derive(Debug)]
struct OpenEntry {
    f: f64,
    h: f64,
    seq: u64,
    node: usize,
    g: f64,
}

impl PartialEq for OpenEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for OpenEntry {}

impl PartialOrd for OpenEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OpenEntry {
    // BinaryHeap is a max-heap: the "greatest" entry has the smallest f, then h, then seq.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .f
            .total_cmp(&self.f)
            .then_with(|| other.h.total_cmp(&self.h))
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

const SLOTS: usize = 5;
const NO_HEADING: usize = 4;

fn slot(h: Option<Direction>) -> usize {
    h.map_or(NO_HEADING, Direction::index)
}

fn heading_of(slot: usize) -> Option<Direction> {
    Direction::ALL.get(slot).copied()
}

/// Runs the search. `trace` receives every expanded node when given.
pub fn search<M: CostModel>(
    q: &Query<'_>,
    model: &M,
    mut trace: Option<&mut Vec<Expansion>>,
) -> Result<SearchOutcome, PlanError> {
    let grid = q.grid;
    let kind = q.profile.kind;
    for c in [q.start, q.goal] {
        if !grid.contains(c) {
            return Err(PlanError::OutOfBounds(c));
        }
    }
    if model.cell_cost(grid, q.start, kind).is_infinite() {
        return Err(PlanError::StartUntraversable(q.start));
    }
    if model.cell_cost(grid, q.goal, kind).is_infinite() {
        return Err(PlanError::GoalUntraversable(q.goal));
    }

    let mut blocked = vec![false; grid.len()];
    for &c in q.blocked {
        if grid.contains(c) && c != q.start {
            blocked[grid.index(c)] = true;
        }
    }
    if blocked[grid.index(q.goal)] {
        return Ok(SearchOutcome {
            plan: None,
            expansions: 0,
        });
    }

    let start_heading = match kind {
        AgentKind::Walker => None,
        AgentKind::Driver => Some(
            q.heading
                .or_else(|| grid.get(q.start).flow.first())
                .unwrap_or(Direction::North),
        ),
    };

    let n = grid.len() * SLOTS;
    let mut g = vec![f64::INFINITY; n];
    let mut parent = vec![usize::MAX; n];
    let mut via = vec![Action::Step; n];
    let mut entry_risk = vec![0.0f64; n];
    let mut open = BinaryHeap::new();
    let mut seq = 0u64;
    let w = q.profile.w;
    let alpha = q.profile.alpha;
    let h_of = |c: Cell| manhattan(c, q.goal) as f64;

    let start_node = grid.index(q.start) * SLOTS + slot(start_heading);
    g[start_node] = 0.0;
    via[start_node] = match kind {
        AgentKind::Walker => Action::Step,
        AgentKind::Driver => Action::Forward,
    };
    let h0 = h_of(q.start);
    open.push(OpenEntry {
        f: w * h0,
        h: h0,
        seq,
        node: start_node,
        g: 0.0,
    });

    let mut expansions = 0;
    while let Some(entry) = open.pop() {
        if entry.g > g[entry.node] {
            continue;
        }
        let cell = grid.cell_at(entry.node / SLOTS);
        let heading = heading_of(entry.node % SLOTS);
        if let Some(t) = trace.as_deref_mut() {
            t.push(Expansion {
                order: expansions,
                cell,
                heading,
                g: entry.g,
                h: entry.h,
                r: entry_risk[entry.node],
                f: entry.f,
            });
        }
        expansions += 1;
        if cell == q.goal {
            let plan = reconstruct(grid, entry.node, &g, &parent, &via, &entry_risk);
            return Ok(SearchOutcome {
                plan: Some(plan),
                expansions,
            });
        }

        for (d, next) in grid.neighbors(cell) {
            let ni = grid.index(next);
            if blocked[ni] {
                continue;
            }
            let cost = model.cell_cost(grid, next, kind);
            if cost.is_infinite() {
                continue;
            }
            let (action, next_heading) = match heading {
                None => (Action::Step, None),
                Some(h) => {
                    let a = classify_action(grid, cell, next, h);
                    (a, Some(heading_after(a, h, d)))
                }
            };
            let r = model.risk(kind, action);
            let tentative = entry.g + cost + alpha * r;
            let node = ni * SLOTS + slot(next_heading);
            if tentative < g[node] {
                g[node] = tentative;
                parent[node] = entry.node;
                via[node] = action;
                entry_risk[node] = r;
                seq += 1;
                let h = h_of(next);
                open.push(OpenEntry {
                    f: tentative + w * h,
                    h,
                    seq,
                    node,
                    g: tentative,
                });
            }
        }
    }
    Ok(SearchOutcome {
        plan: None,
        expansions,
    })
}

fn reconstruct(
    grid: &GridMap,
    goal_node: usize,
    g: &[f64],
    parent: &[usize],
    via: &[Action],
    risk: &[f64],
) -> Plan {
    let mut steps = Vec::new();
    let mut total_risk = 0.0;
    let mut node = goal_node;
    loop {
        steps.push(PlanStep {
            cell: grid.cell_at(node / SLOTS),
            action: via[node],
            heading: heading_of(node % SLOTS),
        });
        total_risk += risk[node];
        if parent[node] == usize::MAX {
            break;
        }
        node = parent[node];
    }
    steps.reverse();
    Plan {
        steps,
        cost: g[goal_node],
        risk: total_risk,
    }
}
