//! Risk-aware Weighted A* route planning for walkers and drivers.

mod action;
mod search;

pub use action::{classify_action, driver_risk, heading_after, walker_risk, Action};
pub use search::{search, CostModel, Expansion, Query, SearchOutcome, StandardCosts};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::environment::{Cell, Direction, GridMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AgentKind {
    Walker,
    Driver,
}

impl AgentKind {
    pub const fn name(self) -> &'static str {
        match self {
            AgentKind::Walker => "walker",
            AgentKind::Driver => "driver",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlanError {
    #[error("cell {0} is outside the grid")]
    OutOfBounds(Cell),
    #[error("start cell {0} is not traversable for this agent kind")]
    StartUntraversable(Cell),
    #[error("goal cell {0} is not traversable for this agent kind")]
    GoalUntraversable(Cell),
    #[error("invalid behavior profile: {0}")]
    Profile(String),
}

/// Per-agent planning and motion parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BehaviorProfile {
    pub kind: AgentKind,
    /// Heuristic weight, at least 1.
    pub w: f64,
    /// Risk sensitivity, non-negative.
    pub alpha: f64,
    /// Cells per step, positive.
    pub max_speed: f64,
}

impl BehaviorProfile {
    pub fn new(kind: AgentKind, w: f64, alpha: f64, max_speed: f64) -> Result<Self, PlanError> {
        let p = BehaviorProfile {
            kind,
            w,
            alpha,
            max_speed,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn walker(w: f64) -> Self {
        BehaviorProfile {
            kind: AgentKind::Walker,
            w,
            alpha: 0.0,
            max_speed: 1.0,
        }
    }

    pub fn driver(w: f64, alpha: f64) -> Self {
        BehaviorProfile {
            kind: AgentKind::Driver,
            w,
            alpha,
            max_speed: 2.0,
        }
    }

    pub fn validate(&self) -> Result<(), PlanError> {
        if !(self.w >= 1.0) || !self.w.is_finite() {
            return Err(PlanError::Profile(format!("w must be >= 1, got {}", self.w)));
        }
        if !(self.alpha >= 0.0) || !self.alpha.is_finite() {
            return Err(PlanError::Profile(format!("alpha must be >= 0, got {}", self.alpha)));
        }
        if !(self.max_speed > 0.0) || !self.max_speed.is_finite() {
            return Err(PlanError::Profile(format!(
                "max_speed must be > 0, got {}",
                self.max_speed
            )));
        }
        Ok(())
    }
}

/// One plan entry: the cell, the action taken to enter it, and the heading
/// held on arrival (drivers only). The first entry's action is nominal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanStep {
    pub cell: Cell,
    pub action: Action,
    pub heading: Option<Direction>,
}

/// A route from start to goal inclusive.
#[derive(Debug, Clone, PartialEq)]
pub struct Plan {
    pub steps: Vec<PlanStep>,
    /// Accumulated `g` at the goal: ground costs plus `alpha * risk` of every move.
    pub cost: f64,
    /// Unweighted sum of the action risks along the route.
    pub risk: f64,
}

impl Plan {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn start(&self) -> Cell {
        self.steps[0].cell
    }

    pub fn goal(&self) -> Cell {
        self.steps[self.steps.len() - 1].cell
    }

    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        self.steps.iter().map(|s| s.cell)
    }

    pub fn cell(&self, i: usize) -> Cell {
        self.steps[i].cell
    }
}

/// Manhattan distance between two cells.
pub fn manhattan(a: Cell, b: Cell) -> usize {
    a.x.abs_diff(b.x) + a.y.abs_diff(b.y)
}

/// Plans from `start` to `goal`. `Ok(None)` means no route exists.
pub fn plan(
    grid: &GridMap,
    start: Cell,
    goal: Cell,
    profile: &BehaviorProfile,
    blocked: &[Cell],
) -> Result<Option<Plan>, PlanError> {
    plan_from(grid, start, None, goal, profile, blocked)
}

/// [`plan`] with an explicit driver heading at the start.
pub fn plan_from(
    grid: &GridMap,
    start: Cell,
    heading: Option<Direction>,
    goal: Cell,
    profile: &BehaviorProfile,
    blocked: &[Cell],
) -> Result<Option<Plan>, PlanError> {
    profile.validate()?;
    let q = Query {
        grid,
        start,
        heading,
        goal,
        profile,
        blocked,
    };
    Ok(search(&q, &StandardCosts, None)?.plan)
}

/// Plans again from the agent's current cell and heading, treating `blocked`
/// cells as impassable.
pub fn replan(
    grid: &GridMap,
    current: Cell,
    heading: Option<Direction>,
    goal: Cell,
    profile: &BehaviorProfile,
    blocked: &[Cell],
) -> Result<Option<Plan>, PlanError> {
    plan_from(grid, current, heading, goal, profile, blocked)
}
