//! Per-step indicators, per-cell heatmap layers and CSV export.

mod export;

pub use export::{
    events_csv, export_run, heatmap_csv, metrics_csv, write_events, write_heatmap, write_metrics, ExportError,
};

use thiserror::Error;

use crate::agents::{AgentId, AgentState, AgentView};
use crate::engine::{Event, EventKind};
use crate::environment::{Cell, GridMap};
use crate::planner::AgentKind;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("heatmap is {layer:?} but the grid is {grid:?} (width, height)")]
    DimensionMismatch {
        layer: (usize, usize),
        grid: (usize, usize),
    },
}

/// Aggregates of one step, taken after the iterate phase.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsFrame {
    pub step: u64,
    pub active_walkers: usize,
    pub active_drivers: usize,
    /// Mean speed over active drivers; `None` when there are none.
    pub mean_driver_speed: Option<f64>,
    pub jaywalk_entries: usize,
    /// Active walkers standing on road-family cells.
    pub walkers_on_road: usize,
    pub collisions_vv: usize,
    pub runovers: usize,
}

/// Active walkers that moved from a non-road cell onto a road-family cell.
/// `before` is the pre-step snapshot, sorted by id.
pub fn jaywalk_entries(grid: &GridMap, before: &[AgentView], after: &[AgentState]) -> Vec<(AgentId, Cell)> {
    after
        .iter()
        .filter(|a| a.kind == AgentKind::Walker && a.is_active())
        .filter_map(|a| {
            let prev = before.binary_search_by_key(&a.id, |b| b.id).ok()?;
            let from = before[prev].position.cell()?;
            let to = a.cell();
            (!grid.ground(from).is_road_family() && grid.ground(to).is_road_family()).then_some((a.id, to))
        })
        .collect()
}

/// Builds the frame for `step` from the post-step agents and that step's events.
pub fn record_step(step: u64, grid: &GridMap, agents: &[AgentState], events: &[Event]) -> MetricsFrame {
    let active = |k: AgentKind| agents.iter().filter(move |a| a.kind == k && a.is_active());
    let speeds: Vec<f64> = active(AgentKind::Driver).map(|a| a.speed).collect();
    let of_kind = |k: EventKind| events.iter().filter(|e| e.step == step && e.kind == k).count();
    MetricsFrame {
        step,
        active_walkers: active(AgentKind::Walker).count(),
        active_drivers: speeds.len(),
        mean_driver_speed: (!speeds.is_empty()).then(|| speeds.iter().sum::<f64>() / speeds.len() as f64),
        jaywalk_entries: of_kind(EventKind::JaywalkEntry),
        walkers_on_road: active(AgentKind::Walker)
            .filter(|a| grid.ground(a.cell()).is_road_family())
            .count(),
        collisions_vv: of_kind(EventKind::CollisionVv),
        runovers: of_kind(EventKind::Runover),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LayerKind {
    DriverOccupancy,
    DriverSpeed,
    WalkerOccupancy,
    Jaywalk,
}

impl LayerKind {
    pub const ALL: [LayerKind; 4] = [
        LayerKind::DriverOccupancy,
        LayerKind::DriverSpeed,
        LayerKind::WalkerOccupancy,
        LayerKind::Jaywalk,
    ];

    pub const fn name(self) -> &'static str {
        match self {
            LayerKind::DriverOccupancy => "driver_occupancy",
            LayerKind::DriverSpeed => "driver_speed",
            LayerKind::WalkerOccupancy => "walker_occupancy",
            LayerKind::Jaywalk => "jaywalk",
        }
    }
}

/// Per-cell accumulator. Occupancy layers use `count`; the speed layer keeps
/// `(sum, count)` pairs so its mean is exact.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatmapLayer {
    pub kind: LayerKind,
    width: usize,
    height: usize,
    sum: Vec<f64>,
    count: Vec<u64>,
}

impl HeatmapLayer {
    pub fn new(kind: LayerKind, width: usize, height: usize) -> Self {
        HeatmapLayer {
            kind,
            width,
            height,
            sum: vec![0.0; width * height],
            count: vec![0; width * height],
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    fn add(&mut self, c: Cell, v: f64) {
        let i = c.y * self.width + c.x;
        self.sum[i] += v;
        self.count[i] += 1;
    }

    pub fn count(&self, c: Cell) -> u64 {
        self.count[c.y * self.width + c.x]
    }

    pub fn sum(&self, c: Cell) -> f64 {
        self.sum[c.y * self.width + c.x]
    }

    /// Exported value: the mean for the speed layer (0 where never visited), else the count.
    pub fn value(&self, c: Cell) -> f64 {
        let i = c.y * self.width + c.x;
        match self.kind {
            LayerKind::DriverSpeed if self.count[i] == 0 => 0.0,
            LayerKind::DriverSpeed => self.sum[i] / self.count[i] as f64,
            _ => self.count[i] as f64,
        }
    }

    pub fn total_count(&self) -> u64 {
        self.count.iter().sum()
    }

    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (0..self.height).flat_map(move |y| (0..self.width).map(move |x| Cell::new(x, y)))
    }
}

/// The four layers of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatmapSet {
    pub driver_occupancy: HeatmapLayer,
    pub driver_speed: HeatmapLayer,
    pub walker_occupancy: HeatmapLayer,
    pub jaywalk: HeatmapLayer,
}

impl HeatmapSet {
    pub fn new(width: usize, height: usize) -> Self {
        HeatmapSet {
            driver_occupancy: HeatmapLayer::new(LayerKind::DriverOccupancy, width, height),
            driver_speed: HeatmapLayer::new(LayerKind::DriverSpeed, width, height),
            walker_occupancy: HeatmapLayer::new(LayerKind::WalkerOccupancy, width, height),
            jaywalk: HeatmapLayer::new(LayerKind::Jaywalk, width, height),
        }
    }

    pub fn layers(&self) -> [&HeatmapLayer; 4] {
        [
            &self.driver_occupancy,
            &self.driver_speed,
            &self.walker_occupancy,
            &self.jaywalk,
        ]
    }
}

/// Adds one step of active agents to the layers.
pub fn accumulate_heatmaps(set: &mut HeatmapSet, grid: &GridMap, agents: &[AgentState]) -> Result<(), MetricsError> {
    for layer in set.layers() {
        if layer.dims() != (grid.width(), grid.height()) {
            return Err(MetricsError::DimensionMismatch {
                layer: layer.dims(),
                grid: (grid.width(), grid.height()),
            });
        }
    }
    for a in agents.iter().filter(|a| a.is_active()) {
        let c = a.cell();
        match a.kind {
            AgentKind::Driver => {
                set.driver_occupancy.add(c, 1.0);
                set.driver_speed.add(c, a.speed);
            }
            AgentKind::Walker => {
                set.walker_occupancy.add(c, 1.0);
                if grid.ground(c).is_road_family() {
                    set.jaywalk.add(c, 1.0);
                }
            }
        }
    }
    Ok(())
}

/// Run-level aggregates used by sweep summaries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSummary {
    /// Mean over steps of the per-step mean driver speed (steps without drivers skipped).
    pub mean_driver_speed: Option<f64>,
    pub jaywalk_entries: usize,
    pub collisions_vv: usize,
    pub runovers: usize,
    /// Walker-steps on road cells divided by active walker-steps.
    pub road_occupancy: Option<f64>,
}

impl RunSummary {
    pub fn from_frames(frames: &[MetricsFrame]) -> RunSummary {
        let speeds: Vec<f64> = frames.iter().filter_map(|f| f.mean_driver_speed).collect();
        let on_road: usize = frames.iter().map(|f| f.walkers_on_road).sum();
        let walkers: usize = frames.iter().map(|f| f.active_walkers).sum();
        RunSummary {
            mean_driver_speed: (!speeds.is_empty()).then(|| speeds.iter().sum::<f64>() / speeds.len() as f64),
            jaywalk_entries: frames.iter().map(|f| f.jaywalk_entries).sum(),
            collisions_vv: frames.iter().map(|f| f.collisions_vv).sum(),
            runovers: frames.iter().map(|f| f.runovers).sum(),
            road_occupancy: (walkers > 0).then(|| on_road as f64 / walkers as f64),
        }
    }
}
