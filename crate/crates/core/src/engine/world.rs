use std::collections::BTreeSet;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use thiserror::Error;

use super::collision::{detect_collisions, CollisionBody, CollisionKind};
use super::config::{SimConfig, SpawnMode};
use super::{Event, EventKind, SimError};
use crate::agents::{act, react, replan_blockers, sense, AgentId, AgentState, AgentView, Decision, Status, WorldView};
use crate::environment::{place_obstacles_among, Cell, GridMap, GroundType, Point};
use crate::metrics::{accumulate_heatmaps, jaywalk_entries, record_step, HeatmapSet, MetricsFrame, RunSummary};
use crate::planner::{plan, replan, AgentKind, BehaviorProfile, Plan, PlanError};

const OBSTACLE_STREAM: u64 = 1;
const SIMULATION_STREAM: u64 = 2;
/// Start/goal draws tried per spawn before the spawn is skipped.
const SPAWN_ATTEMPTS: usize = 8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReactivateError {
    #[error("no agent with id {0}")]
    UnknownAgent(AgentId),
    #[error("agent {0} is not parked")]
    NotParked(AgentId),
    #[error("no route from the parking cell of agent {id} to {goal}")]
    NoRoute { id: AgentId, goal: Cell },
    #[error(transparent)]
    Plan(#[from] PlanError),
}

/// Per-step bookkeeping returned by [`World::step`].
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub frame: MetricsFrame,
    /// Agents added this step (spawns).
    pub created: usize,
    /// Agents removed this step (goal reached or collision countdown expired).
    pub removed: usize,
    /// Agents present after the step, whatever their status.
    pub population: usize,
    pub spawn_skips: usize,
}

/// Everything a run produces.
#[derive(Debug, Clone)]
pub struct SimulationResult {
    pub config: SimConfig,
    /// The map the run used, obstacles included.
    pub grid: GridMap,
    pub frames: Vec<MetricsFrame>,
    pub events: Vec<Event>,
    pub heatmaps: HeatmapSet,
    pub created: u64,
    pub removed: u64,
    pub spawn_skips: u64,
}

impl SimulationResult {
    pub fn summary(&self) -> RunSummary {
        RunSummary::from_frames(&self.frames)
    }
}

/// Simulation state. Agents are kept sorted by id.
#[derive(Debug, Clone)]
pub struct World {
    config: SimConfig,
    grid: GridMap,
    agents: Vec<AgentState>,
    step: u64,
    next_id: AgentId,
    rng: ChaCha8Rng,
    events: Vec<Event>,
    frames: Vec<MetricsFrame>,
    heatmaps: HeatmapSet,
    created: u64,
    removed: u64,
    spawn_skips: u64,
    driver_goals: Vec<Cell>,
}

impl World {
    /// Validates `config` and obstructs `config.obstruction` of the sidewalks of `base`.
    pub fn new(config: SimConfig, base: GridMap) -> Result<World, SimError> {
        let candidates = base.sidewalk_cells();
        World::with_obstacle_candidates(config, base, &candidates)
    }

    /// Like [`World::new`] with obstacles sampled among `candidates` only.
    pub fn with_obstacle_candidates(config: SimConfig, base: GridMap, candidates: &[Cell]) -> Result<World, SimError> {
        config.validate()?;
        let mut obstacle_rng = ChaCha8Rng::seed_from_u64(config.seed);
        obstacle_rng.set_stream(OBSTACLE_STREAM);
        let grid = place_obstacles_among(&base, candidates, config.obstruction, &mut obstacle_rng);
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(SIMULATION_STREAM);
        let mut driver_goals: Vec<Cell> = grid
            .exit_sites()
            .iter()
            .chain(grid.driver_sites())
            .chain(grid.parking_sites())
            .copied()
            .filter(|&c| !grid.is_obstacle(c))
            .collect();
        driver_goals.sort();
        driver_goals.dedup();
        let heatmaps = HeatmapSet::new(grid.width(), grid.height());
        Ok(World {
            config,
            grid,
            agents: Vec::new(),
            step: 0,
            next_id: 0,
            rng,
            events: Vec::new(),
            frames: Vec::new(),
            heatmaps,
            created: 0,
            removed: 0,
            spawn_skips: 0,
            driver_goals,
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn grid(&self) -> &GridMap {
        &self.grid
    }

    pub fn agents(&self) -> &[AgentState] {
        &self.agents
    }

    pub fn agent(&self, id: AgentId) -> Option<&AgentState> {
        self.agents
            .binary_search_by_key(&id, |a| a.id)
            .ok()
            .map(|i| &self.agents[i])
    }

    /// Number of completed steps.
    pub fn step_count(&self) -> u64 {
        self.step
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn frames(&self) -> &[MetricsFrame] {
        &self.frames
    }

    pub fn heatmaps(&self) -> &HeatmapSet {
        &self.heatmaps
    }

    pub fn active_count(&self, kind: AgentKind) -> usize {
        self.agents
            .iter()
            .filter(|a| a.kind == kind && a.is_active())
            .count()
    }

    /// Places an agent with `profile` at `start` heading for `goal`.
    /// `Ok(None)` when no route exists.
    pub fn add_agent(&mut self, profile: BehaviorProfile, start: Cell, goal: Cell) -> Result<Option<AgentId>, PlanError> {
        let Some(p) = plan(&self.grid, start, goal, &profile, &[])? else {
            return Ok(None);
        };
        Ok(Some(self.insert(profile, p)))
    }

    fn insert(&mut self, profile: BehaviorProfile, p: Plan) -> AgentId {
        let id = self.next_id;
        self.next_id += 1;
        let start = p.start();
        self.agents.push(AgentState::new(id, profile, p));
        self.created += 1;
        self.log(EventKind::Spawn, vec![id], start.center());
        id
    }

    /// Gives a parked driver a new goal. An unreachable goal leaves it parked.
    pub fn reactivate(&mut self, id: AgentId, goal: Cell) -> Result<(), ReactivateError> {
        let i = self
            .agents
            .binary_search_by_key(&id, |a| a.id)
            .map_err(|_| ReactivateError::UnknownAgent(id))?;
        let a = &self.agents[i];
        if a.status != Status::Parked {
            return Err(ReactivateError::NotParked(id));
        }
        let blocked = self.static_blockers(id);
        let p = plan(&self.grid, a.cell(), goal, &a.profile, &blocked)?
            .ok_or(ReactivateError::NoRoute { id, goal })?;
        let a = &mut self.agents[i];
        let position = a.position;
        *a = AgentState {
            status: Status::Active,
            ..AgentState::new(id, a.profile, p)
        };
        self.log(EventKind::Reactivate, vec![id], position);
        Ok(())
    }

    /// Cells of inactive agents other than `except`.
    fn static_blockers(&self, except: AgentId) -> Vec<Cell> {
        self.agents
            .iter()
            .filter(|a| a.id != except && !a.is_active())
            .map(AgentState::cell)
            .collect()
    }

    fn log(&mut self, kind: EventKind, agents: Vec<AgentId>, position: Point) {
        self.events.push(Event {
            step: self.step,
            kind,
            agents,
            position,
        });
    }

    /// Runs one sense–react–act–iterate cycle.
    pub fn step(&mut self) -> StepRecord {
        let params = self.config.agents;
        let created_before = self.created;
        let removed_before = self.removed;
        let skips_before = self.spawn_skips;

        // Sense and react against the pre-step snapshot, then act.
        let views: Vec<AgentView> = self.agents.iter().map(AgentState::view).collect();
        let agents = std::mem::take(&mut self.agents);
        let decided: Vec<(AgentState, Option<(Decision, Vec<Cell>)>)> = {
            let snapshot = WorldView::new(&self.grid, &views);
            agents
                .into_iter()
                .map(|a| {
                    if !a.is_active() {
                        return (a, None);
                    }
                    let p = sense(&a, &snapshot, &params);
                    let decision = react(&a, &p, &self.grid, &params);
                    let blocked = if decision == Decision::Replan {
                        replan_blockers(&a, &p, &params)
                    } else {
                        Vec::new()
                    };
                    (a, Some((decision, blocked)))
                })
                .collect()
        };
        let occupied: BTreeSet<Cell> = views.iter().filter_map(|v| v.position.cell()).collect();
        let mut next = Vec::with_capacity(decided.len());
        for (a, choice) in decided {
            let Some((decision, blocked)) = choice else {
                next.push(a);
                continue;
            };
            let replanned = if decision == Decision::Replan {
                self.replan_for(&a, &blocked, &occupied)
            } else {
                None
            };
            if replanned.is_some() {
                self.log(EventKind::Replan, vec![a.id], a.position);
            }
            next.push(act(a, decision, replanned, &params));
        }

        for (id, cell) in jaywalk_entries(&self.grid, &views, &next) {
            self.log(EventKind::JaywalkEntry, vec![id], cell.center());
        }

        // Iterate: collisions, countdowns, goals, reactivation, spawning.
        let bodies: Vec<CollisionBody> = next
            .iter()
            .zip(&views)
            .map(|(a, v)| CollisionBody {
                id: a.id,
                kind: a.kind,
                position: a.position,
                moved: a.position != v.position,
            })
            .collect();
        let collisions = detect_collisions(&bodies);

        for a in next.iter_mut() {
            if let Status::Collided { remaining } = a.status {
                a.status = if remaining <= 1 {
                    Status::Done
                } else {
                    Status::Collided {
                        remaining: remaining - 1,
                    }
                };
            }
        }
        let mut hit = BTreeSet::new();
        for c in &collisions {
            let kind = match c.kind {
                CollisionKind::VehicleVehicle => EventKind::CollisionVv,
                CollisionKind::Runover => EventKind::Runover,
            };
            self.log(kind, c.ids.to_vec(), c.position);
            hit.extend(c.ids);
        }
        for a in next.iter_mut() {
            if hit.contains(&a.id) && matches!(a.status, Status::Active | Status::Parked) {
                a.status = Status::Collided {
                    remaining: self.config.collision_countdown,
                };
                a.speed = 0.0;
            }
        }

        for a in next.iter_mut() {
            if a.is_active() && a.at_goal() {
                if a.kind == AgentKind::Driver && self.grid.ground(a.cell()) == GroundType::Parking {
                    a.status = Status::Parked;
                    a.speed = 0.0;
                    self.log(EventKind::Park, vec![a.id], a.position);
                } else {
                    a.status = Status::Done;
                    self.log(EventKind::Goal, vec![a.id], a.position);
                }
            }
        }
        let before = next.len();
        next.retain(|a| a.status != Status::Done);
        self.removed += (before - next.len()) as u64;
        self.agents = next;

        self.reactivate_parked();
        self.spawn();

        let frame = record_step(self.step, &self.grid, &self.agents, &self.events);
        accumulate_heatmaps(&mut self.heatmaps, &self.grid, &self.agents)
            .expect("heatmaps are sized from the grid");
        self.frames.push(frame.clone());
        self.step += 1;
        StepRecord {
            frame,
            created: (self.created - created_before) as usize,
            removed: (self.removed - removed_before) as usize,
            population: self.agents.len(),
            spawn_skips: (self.spawn_skips - skips_before) as usize,
        }
    }

    /// New route around `blocked`; when none exists, a route to a fresh goal.
    fn replan_for(&mut self, a: &AgentState, blocked: &[Cell], occupied: &BTreeSet<Cell>) -> Option<Plan> {
        let from = a.cell();
        if let Ok(Some(p)) = replan(&self.grid, from, a.heading, a.goal(), &a.profile, blocked) {
            return Some(p);
        }
        let goal = self.pick_goal(a.kind, from, occupied)?;
        replan(&self.grid, from, a.heading, goal, &a.profile, blocked).ok().flatten()
    }

    fn reactivate_parked(&mut self) {
        let p = self.config.reactivation_probability;
        if p <= 0.0 {
            return;
        }
        let parked: Vec<AgentId> = self
            .agents
            .iter()
            .filter(|a| a.status == Status::Parked)
            .map(|a| a.id)
            .collect();
        for id in parked {
            if !self.rng.random_bool(p) {
                continue;
            }
            let from = self.agent(id).map(AgentState::cell).expect("parked agent exists");
            let occupied = self.occupied_cells();
            if let Some(goal) = self.pick_goal(AgentKind::Driver, from, &occupied) {
                // An unreachable goal leaves the driver parked until a later draw.
                let _ = self.reactivate(id, goal);
            }
        }
    }

    fn occupied_cells(&self) -> BTreeSet<Cell> {
        self.agents.iter().map(AgentState::cell).collect()
    }

    fn pick_goal(&mut self, kind: AgentKind, start: Cell, occupied: &BTreeSet<Cell>) -> Option<Cell> {
        let sites = match kind {
            AgentKind::Walker => self.grid.walker_sites(),
            AgentKind::Driver => &self.driver_goals,
        };
        let eligible: Vec<Cell> = sites
            .iter()
            .copied()
            .filter(|&c| c != start && !self.grid.is_obstacle(c))
            .filter(|c| self.grid.ground(*c) != GroundType::Parking || !occupied.contains(c))
            .collect();
        (!eligible.is_empty()).then(|| eligible[self.rng.random_range(0..eligible.len())])
    }

    fn spawn(&mut self) {
        for kind in [AgentKind::Walker, AgentKind::Driver] {
            let room = self.config.target(kind).saturating_sub(self.active_count(kind));
            let wanted = match self.config.spawn {
                SpawnMode::Replenish => room,
                SpawnMode::Poisson {
                    walker_rate,
                    driver_rate,
                } => {
                    let rate = match kind {
                        AgentKind::Walker => walker_rate,
                        AgentKind::Driver => driver_rate,
                    };
                    let arrivals = if rate > 0.0 {
                        Poisson::new(rate).expect("validated rate").sample(&mut self.rng) as usize
                    } else {
                        0
                    };
                    arrivals.min(room)
                }
            };
            for _ in 0..wanted {
                if !self.spawn_one(kind) {
                    self.spawn_skips += 1;
                }
            }
        }
    }

    fn spawn_one(&mut self, kind: AgentKind) -> bool {
        let occupied = self.occupied_cells();
        let starts: Vec<Cell> = match kind {
            AgentKind::Walker => self.grid.walker_sites(),
            AgentKind::Driver => self.grid.driver_sites(),
        }
        .iter()
        .copied()
        .filter(|c| !occupied.contains(c) && !self.grid.is_obstacle(*c))
        .collect();
        if starts.is_empty() {
            return false;
        }
        let profile = self.config.profile_dist(kind).sample(kind, &mut self.rng);
        for _ in 0..SPAWN_ATTEMPTS {
            let start = starts[self.rng.random_range(0..starts.len())];
            let Some(goal) = self.pick_goal(kind, start, &occupied) else {
                return false;
            };
            if let Ok(Some(p)) = plan(&self.grid, start, goal, &profile, &[]) {
                self.insert(profile, p);
                return true;
            }
        }
        false
    }

    pub fn into_result(self) -> SimulationResult {
        SimulationResult {
            config: self.config,
            grid: self.grid,
            frames: self.frames,
            events: self.events,
            heatmaps: self.heatmaps,
            created: self.created,
            removed: self.removed,
            spawn_skips: self.spawn_skips,
        }
    }
}

/// Runs `config.steps` steps on `base` with obstacles among all its sidewalks.
pub fn run(config: &SimConfig, base: &GridMap) -> Result<SimulationResult, SimError> {
    let candidates = base.sidewalk_cells();
    run_with_candidates(config, base, &candidates)
}

/// [`run`] with obstacles sampled among `candidates`.
pub fn run_with_candidates(config: &SimConfig, base: &GridMap, candidates: &[Cell]) -> Result<SimulationResult, SimError> {
    let mut world = World::with_obstacle_candidates(config.clone(), base.clone(), candidates)?;
    for _ in 0..config.steps {
        world.step();
    }
    Ok(world.into_result())
}
