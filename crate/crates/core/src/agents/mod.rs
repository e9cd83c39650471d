//! Walker and driver behavior: perception of a local window along the route,
//! reaction rules and kinematic motion along the planned polyline.

mod motion;
mod react;
mod sense;

pub use motion::{act, distance_to_polyline};
pub use react::{react, react_driver, react_walker, replan_blockers};
pub use sense::{sense, AgentView, Perception, Sighting, SpatialIndex, WorldView};

use serde::{Deserialize, Serialize};

use crate::environment::{Cell, Direction, Point};
use crate::planner::{AgentKind, BehaviorProfile, Plan};

pub type AgentId = u64;

/// Lifecycle status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Active,
    /// Driver waiting on a parking cell until given a new goal.
    Parked,
    /// Static blocker until removal; `remaining` counts down to zero.
    Collided { remaining: u32 },
    Done,
}

/// One step's outcome of the react phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Decision {
    Proceed,
    Stop,
    Decelerate,
    Accelerate,
    Yield,
    Replan,
}

impl Decision {
    pub const fn name(self) -> &'static str {
        match self {
            Decision::Proceed => "proceed",
            Decision::Stop => "stop",
            Decision::Decelerate => "decelerate",
            Decision::Accelerate => "accelerate",
            Decision::Yield => "yield",
            Decision::Replan => "replan",
        }
    }
}

/// Sensing and motion parameters shared by all agents of a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgentParams {
    /// Plan cells ahead that make up the sensing window.
    pub lookahead: usize,
    /// An entity is in the window when its distance to a window cell center is below this.
    pub radius: f64,
    /// Walkers within this distance of a zebra cell ahead make drivers yield.
    pub yield_radius: f64,
    /// Vehicles closer than this to each other are in conflict.
    pub vehicle_conflict: f64,
    /// Steps an agent waits behind a stalled entity before routing around it.
    pub patience: u32,
    /// Cells per step gained by `Accelerate`.
    pub accel: f64,
    /// Cells per step lost by `Decelerate`.
    pub decel: f64,
}

impl Default for AgentParams {
    fn default() -> Self {
        AgentParams {
            lookahead: 4,
            radius: 1.0,
            yield_radius: 1.5,
            vehicle_conflict: 1.0,
            patience: 5,
            accel: 1.0,
            decel: 1.0,
        }
    }
}

impl AgentParams {
    pub fn validate(&self) -> Result<(), String> {
        if self.lookahead == 0 {
            return Err("lookahead must be >= 1".into());
        }
        for (name, v) in [
            ("radius", self.radius),
            ("yield_radius", self.yield_radius),
            ("vehicle_conflict", self.vehicle_conflict),
            ("accel", self.accel),
            ("decel", self.decel),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(format!("{name} must be a finite value >= 0, got {v}"));
            }
        }
        Ok(())
    }
}

/// Full state of one agent.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentState {
    pub id: AgentId,
    pub kind: AgentKind,
    pub profile: BehaviorProfile,
    pub position: Point,
    /// Travel direction; drivers only.
    pub heading: Option<Direction>,
    pub speed: f64,
    pub plan: Plan,
    /// Index of the next plan vertex to reach; equals `plan.len()` once the goal is reached.
    pub cursor: usize,
    pub status: Status,
    /// Consecutive steps spent at speed zero.
    pub wait_steps: u32,
}

impl AgentState {
    /// A fresh agent standing on the first cell of `plan`.
    pub fn new(id: AgentId, profile: BehaviorProfile, plan: Plan) -> AgentState {
        let start = plan.steps[0];
        AgentState {
            id,
            kind: profile.kind,
            profile,
            position: start.cell.center(),
            heading: start.heading,
            speed: 0.0,
            cursor: 1.min(plan.len()),
            plan,
            status: Status::Active,
            wait_steps: 0,
        }
    }

    pub fn is_active(&self) -> bool {
        self.status == Status::Active
    }

    /// Occupied cell (floor of the position).
    pub fn cell(&self) -> Cell {
        self.position
            .cell()
            .expect("agent positions stay inside the grid")
    }

    pub fn goal(&self) -> Cell {
        self.plan.goal()
    }

    pub fn at_goal(&self) -> bool {
        self.cursor >= self.plan.len()
    }

    /// Up to `n` upcoming plan cells, starting with the next vertex.
    pub fn upcoming(&self, n: usize) -> impl Iterator<Item = Cell> + '_ {
        self.plan.steps[self.cursor.min(self.plan.len())..]
            .iter()
            .take(n)
            .map(|s| s.cell)
    }

    pub fn view(&self) -> AgentView {
        AgentView {
            id: self.id,
            kind: self.kind,
            position: self.position,
            speed: self.speed,
            active: self.is_active(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environment::{parse_grid, CellCode, GridMap, GroundType};
    use crate::planner::{plan, AgentKind};
    use proptest::prelude::*;

    /// A sidewalk row, an eastbound lane with a zebra at x=4, and a sidewalk row.
    fn street() -> GridMap {
        parse_grid(
            "9 3\n\
             s-- s-- s-- s-- s-- s-- s-- s-- s--\n\
             rE- rE- rE- rE- zE- rE- rE- rE- rE-\n\
             s-- s-- s-- s-- s-- s-- s-- s-- s--\n",
        )
        .unwrap()
    }

    fn driver(grid: &GridMap, id: AgentId, from: Cell, to: Cell, speed: f64) -> AgentState {
        let prof = BehaviorProfile::driver(1.0, 1.0);
        let p = plan(grid, from, to, &prof, &[]).unwrap().unwrap();
        let mut a = AgentState::new(id, prof, p);
        a.speed = speed;
        a
    }

    fn walker(grid: &GridMap, id: AgentId, from: Cell, to: Cell) -> AgentState {
        let prof = BehaviorProfile::walker(1.0);
        let p = plan(grid, from, to, &prof, &[]).unwrap().unwrap();
        AgentState::new(id, prof, p)
    }

    fn perceive(grid: &GridMap, me: &AgentState, others: &[AgentState]) -> Perception {
        let views: Vec<AgentView> = others.iter().map(AgentState::view).collect();
        sense(me, &WorldView::new(grid, &views), &AgentParams::default())
    }

    #[test]
    fn empty_world_perceives_nothing() {
        let g = street();
        let d = driver(&g, 1, Cell::new(0, 1), Cell::new(8, 1), 2.0);
        let p = perceive(&g, &d, &[]);
        assert!(p.is_empty());
        assert_eq!(p.window.len(), 4);
    }

    #[test]
    fn close_vehicles_conflict_both_ways() {
        let g = street();
        let a = driver(&g, 1, Cell::new(0, 1), Cell::new(8, 1), 1.0);
        let mut b = driver(&g, 2, Cell::new(1, 1), Cell::new(8, 1), 1.0);
        b.position = Point::new(a.position.x + 0.9, a.position.y);
        assert_eq!(perceive(&g, &a, &[b.clone()]).vehicle_conflicts, vec![2]);
        assert_eq!(perceive(&g, &b, &[a.clone()]).vehicle_conflicts, vec![1]);
        assert_eq!(react_driver(&a, &perceive(&g, &a, &[b]), &AgentParams::default()), Decision::Decelerate);
    }

    #[test]
    fn walker_off_route_not_perceived() {
        let g = GridMap::new(9, 5, vec![CellCode::bare(GroundType::Sidewalk); 45]);
        let me = walker(&g, 1, Cell::new(0, 0), Cell::new(8, 0));
        let mut other = walker(&g, 2, Cell::new(2, 3), Cell::new(2, 4));
        other.position = Cell::new(2, 3).center();
        assert!(perceive(&g, &me, &[other.clone()]).sightings.is_empty());
        other.position = Cell::new(2, 0).center();
        assert_eq!(perceive(&g, &me, &[other]).sightings.len(), 1);
    }

    #[test]
    fn walker_stops_on_road_but_keeps_right_of_way_on_zebra() {
        let g = street();
        let params = AgentParams::default();
        // Crossing on the plain road at x=2, driver one cell west on the lane.
        let w = walker(&g, 1, Cell::new(2, 0), Cell::new(2, 2));
        let d = driver(&g, 2, Cell::new(2, 1), Cell::new(8, 1), 1.0);
        assert_eq!(react_walker(&w, &perceive(&g, &w, &[d]), &g, &params), Decision::Stop);

        // Two lanes with a zebra band at x=4; the walker is halfway across.
        let g = parse_grid(
            "9 4\n\
             s-- s-- s-- s-- s-- s-- s-- s-- s--\n\
             rE- rE- rE- rE- zE- rE- rE- rE- rE-\n\
             rE- rE- rE- rE- zE- rE- rE- rE- rE-\n\
             s-- s-- s-- s-- s-- s-- s-- s-- s--\n",
        )
        .unwrap();
        let mut w = walker(&g, 1, Cell::new(4, 0), Cell::new(4, 3));
        w.position = Cell::new(4, 1).center();
        w.cursor = 2;
        let mut d = driver(&g, 2, Cell::new(1, 2), Cell::new(8, 2), 1.0);
        d.position = Point::new(3.7, 2.5);
        let p = perceive(&g, &w, &[d.clone()]);
        assert!(!p.sightings.is_empty());
        assert_eq!(react_walker(&w, &p, &g, &params), Decision::Proceed);
        let pd = perceive(&g, &d, &[w]);
        assert!(matches!(
            react_driver(&d, &pd, &params),
            Decision::Yield | Decision::Decelerate
        ));
    }

    #[test]
    fn walker_routes_around_parked_vehicle() {
        let g = street();
        let w = walker(&g, 1, Cell::new(0, 0), Cell::new(8, 0));
        let mut parked = walker(&g, 2, Cell::new(0, 2), Cell::new(1, 2));
        parked.kind = AgentKind::Driver;
        parked.status = Status::Parked;
        parked.position = Cell::new(2, 0).center();
        let p = perceive(&g, &w, &[parked]);
        assert_eq!(p.blocked, vec![Cell::new(2, 0)]);
        assert_eq!(react_walker(&w, &p, &g, &AgentParams::default()), Decision::Replan);
        assert_eq!(replan_blockers(&w, &p, &AgentParams::default()), vec![Cell::new(2, 0)]);
    }

    #[test]
    fn driver_yields_to_walker_on_zebra_ahead() {
        let g = street();
        let d = driver(&g, 1, Cell::new(2, 1), Cell::new(8, 1), 2.0);
        let mut w = walker(&g, 2, Cell::new(4, 0), Cell::new(4, 2));
        w.position = Cell::new(4, 0).center();
        let p = perceive(&g, &d, &[w.clone()]);
        assert_eq!(p.zebra_walkers, vec![2]);
        assert_eq!(react_driver(&d, &p, &AgentParams::default()), Decision::Yield);
        // Right of way: the walker on the zebra proceeds while the driver yields.
        w.position = Cell::new(4, 1).center();
        w.cursor = 2;
        let pw = perceive(&g, &w, &[d.clone()]);
        assert_eq!(react_walker(&w, &pw, &g, &AgentParams::default()), Decision::Proceed);
        let after = act(d.clone(), Decision::Yield, None, &AgentParams::default());
        assert_eq!(after.speed, 0.0);
        assert_eq!(after.position, d.position);
    }

    #[test]
    fn clear_road_accelerates_to_max() {
        let g = street();
        let params = AgentParams::default();
        let mut d = driver(&g, 1, Cell::new(0, 1), Cell::new(8, 1), 0.0);
        let mut speeds = Vec::new();
        for _ in 0..3 {
            let dec = react_driver(&d, &perceive(&g, &d, &[]), &params);
            assert_eq!(dec, Decision::Accelerate);
            d = act(d.clone(), dec, None, &params);
            speeds.push(d.speed);
        }
        assert_eq!(speeds, vec![1.0, 2.0, 2.0]);
        assert_eq!(d.position, Cell::new(5, 1).center());
    }

    #[test]
    fn sudden_walker_only_triggers_deceleration() {
        let g = street();
        let d = driver(&g, 1, Cell::new(0, 1), Cell::new(8, 1), 2.0);
        let mut w = walker(&g, 2, Cell::new(1, 0), Cell::new(1, 2));
        w.position = Point::new(0.8, 1.5);
        w.speed = 1.0;
        let params = AgentParams::default();
        let dec = react_driver(&d, &perceive(&g, &d, &[w]), &params);
        assert_eq!(dec, Decision::Decelerate);
        assert_eq!(act(d.clone(), dec, None, &params).speed, 1.0);
    }

    #[test]
    fn act_examples() {
        let g = street();
        let params = AgentParams::default();
        let w = walker(&g, 1, Cell::new(0, 0), Cell::new(8, 0));
        let stopped = act(w.clone(), Decision::Stop, None, &params);
        assert_eq!(stopped.position, w.position);
        assert_eq!(stopped.wait_steps, 1);
        let moved = act(w.clone(), Decision::Proceed, None, &params);
        assert_eq!(moved.position, Cell::new(1, 0).center());
        assert_eq!(moved.cursor, 2);
        let d = driver(&g, 2, Cell::new(0, 1), Cell::new(8, 1), 2.0);
        assert_eq!(act(d.clone(), Decision::Accelerate, None, &params).speed, 2.0);
        let failed = act(d.clone(), Decision::Replan, None, &params);
        assert_eq!((failed.speed, failed.position), (0.0, d.position));
    }

    #[test]
    fn walker_reaches_goal() {
        let g = street();
        let params = AgentParams::default();
        let mut w = walker(&g, 1, Cell::new(0, 0), Cell::new(3, 0));
        for _ in 0..3 {
            w = act(w.clone(), Decision::Proceed, None, &params);
        }
        assert!(w.at_goal());
        assert_eq!(w.cell(), Cell::new(3, 0));
    }

    fn decision_strategy() -> impl Strategy<Value = Decision> {
        prop_oneof![
            Just(Decision::Proceed),
            Just(Decision::Stop),
            Just(Decision::Decelerate),
            Just(Decision::Accelerate),
            Just(Decision::Yield),
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]

        #[test]
        fn motion_invariants(
            decisions in proptest::collection::vec(decision_strategy(), 1..40),
            max_speed in 0.3f64..3.0,
            goal_x in 1usize..9,
            is_driver in any::<bool>(),
        ) {
            let g = parse_grid(
                "9 3\n\
                 rE- rE- rE- rE- rE- rE- rE- rE- rS-\n\
                 rN- rW- rW- rW- rW- rW- rW- rW- rS-\n\
                 rN- rE- rE- rE- rE- rE- rE- rE- rE-\n",
            ).unwrap();
            let kind = if is_driver { AgentKind::Driver } else { AgentKind::Walker };
            let prof = BehaviorProfile::new(kind, 1.0, 1.0, max_speed).unwrap();
            let (start, goal) = if is_driver {
                (Cell::new(0, 0), Cell::new(goal_x, 2))
            } else {
                (Cell::new(0, 0), Cell::new(goal_x, 1))
            };
            let p = plan(&g, start, goal, &prof, &[]).unwrap().unwrap();
            let params = AgentParams::default();
            let mut a = AgentState::new(1, prof, p);
            for dec in decisions {
                let before = a.position;
                let next = act(a.clone(), dec, None, &params);
                prop_assert!(next.speed >= 0.0 && next.speed <= max_speed);
                prop_assert!(distance_to_polyline(&next.plan, next.position) < 1e-9);
                prop_assert!(before.distance(next.position) <= next.speed + 1e-9);
                prop_assert!(next.cursor >= a.cursor && next.cursor <= next.plan.len());
                a = next;
            }
        }
    }
}
