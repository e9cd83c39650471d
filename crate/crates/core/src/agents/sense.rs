use super::{AgentId, AgentParams, AgentState};
use crate::environment::{Cell, GridMap, GroundType, Point};
use crate::planner::AgentKind;

/// What other agents see of an agent: the pre-step snapshot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgentView {
    pub id: AgentId,
    pub kind: AgentKind,
    pub position: Point,
    pub speed: f64,
    /// `false` for parked and collided agents, which act as static blockers.
    pub active: bool,
}

/// Agents bucketed by occupied cell.
#[derive(Debug, Clone)]
pub struct SpatialIndex {
    width: usize,
    height: usize,
    buckets: Vec<Vec<usize>>,
}

impl SpatialIndex {
    pub fn build(grid: &GridMap, views: &[AgentView]) -> SpatialIndex {
        let mut buckets = vec![Vec::new(); grid.len()];
        for (i, v) in views.iter().enumerate() {
            if let Some(c) = grid.cell_of(v.position) {
                buckets[grid.index(c)].push(i);
            }
        }
        SpatialIndex {
            width: grid.width(),
            height: grid.height(),
            buckets,
        }
    }

    /// Indices of agents whose cell lies in the box spanned by `lo..=hi`
    /// widened by `margin` cells.
    fn in_box(&self, lo: Point, hi: Point, margin: f64) -> impl Iterator<Item = usize> + '_ {
        let clamp = |v: f64, n: usize| (v.floor().max(0.0) as usize).min(n.saturating_sub(1));
        let (x0, x1) = (clamp(lo.x - margin, self.width), clamp(hi.x + margin, self.width));
        let (y0, y1) = (clamp(lo.y - margin, self.height), clamp(hi.y + margin, self.height));
        (y0..=y1).flat_map(move |y| {
            (x0..=x1).flat_map(move |x| self.buckets[y * self.width + x].iter().copied())
        })
    }
}

/// Read-only snapshot every agent senses against.
#[derive(Debug, Clone)]
pub struct WorldView<'a> {
    pub grid: &'a GridMap,
    pub agents: &'a [AgentView],
    pub index: SpatialIndex,
}

impl<'a> WorldView<'a> {
    pub fn new(grid: &'a GridMap, agents: &'a [AgentView]) -> Self {
        WorldView {
            grid,
            agents,
            index: SpatialIndex::build(grid, agents),
        }
    }
}

/// Another agent inside the sensing window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sighting {
    pub view: AgentView,
    /// Distance to the observer.
    pub distance: f64,
    /// Position in the window (0 = next plan cell) of the closest window cell.
    pub window_index: usize,
    /// Distance to that window cell's center.
    pub window_distance: f64,
    /// The agent occupies a window plan cell.
    pub on_plan: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Perception {
    /// Upcoming plan cells making up the window.
    pub window: Vec<Cell>,
    pub sightings: Vec<Sighting>,
    /// Window cells occupied by inactive agents.
    pub blocked: Vec<Cell>,
    /// Window cells occupied by active agents standing still.
    pub stalled: Vec<Cell>,
    /// Active walkers near a zebra cell of the window (reported to drivers only).
    pub zebra_walkers: Vec<AgentId>,
    /// Other vehicles closer than the conflict distance (reported to drivers only).
    pub vehicle_conflicts: Vec<AgentId>,
}

impl Perception {
    pub fn is_empty(&self) -> bool {
        self.sightings.is_empty()
            && self.blocked.is_empty()
            && self.zebra_walkers.is_empty()
            && self.vehicle_conflicts.is_empty()
    }
}

/// Perceives the agents around the next `lookahead` plan cells.
pub fn sense(agent: &AgentState, world: &WorldView<'_>, params: &AgentParams) -> Perception {
    let window: Vec<Cell> = agent.upcoming(params.lookahead).collect();
    let mut p = Perception {
        window,
        ..Perception::default()
    };
    let is_driver = agent.kind == AgentKind::Driver;
    let zebras: Vec<Point> = if is_driver {
        p.window
            .iter()
            .filter(|&&c| world.grid.ground(c) == GroundType::Zebra)
            .map(|c| c.center())
            .collect()
    } else {
        Vec::new()
    };

    let mut lo = agent.position;
    let mut hi = agent.position;
    for c in &p.window {
        let q = c.center();
        lo = Point::new(lo.x.min(q.x), lo.y.min(q.y));
        hi = Point::new(hi.x.max(q.x), hi.y.max(q.y));
    }
    let margin = params
        .radius
        .max(params.yield_radius)
        .max(params.vehicle_conflict)
        + 1.0;
    let mut seen: Vec<usize> = world.index.in_box(lo, hi, margin).collect();
    seen.sort_unstable();

    for i in seen {
        let other = world.agents[i];
        if other.id == agent.id {
            continue;
        }
        let distance = agent.position.distance(other.position);
        if is_driver {
            if other.kind == AgentKind::Driver && distance < params.vehicle_conflict {
                p.vehicle_conflicts.push(other.id);
            }
            if other.kind == AgentKind::Walker
                && other.active
                && zebras.iter().any(|z| z.distance(other.position) <= params.yield_radius)
            {
                p.zebra_walkers.push(other.id);
            }
        }
        let nearest = p
            .window
            .iter()
            .enumerate()
            .map(|(k, c)| (k, c.center().distance(other.position)))
            .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        let Some((window_index, window_distance)) = nearest else {
            continue;
        };
        if window_distance >= params.radius {
            continue;
        }
        let occupied = other.position.cell().filter(|c| p.window.contains(c));
        if let Some(c) = occupied {
            if !other.active {
                push_unique(&mut p.blocked, c);
            } else if other.speed == 0.0 {
                push_unique(&mut p.stalled, c);
            }
        }
        p.sightings.push(Sighting {
            view: other,
            distance,
            window_index,
            window_distance,
            on_plan: occupied.is_some(),
        });
    }
    p
}

fn push_unique(list: &mut Vec<Cell>, c: Cell) {
    if !list.contains(&c) {
        list.push(c);
    }
}
