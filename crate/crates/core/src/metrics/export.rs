use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use super::{HeatmapLayer, HeatmapSet, MetricsFrame};
use crate::engine::Event;

#[derive(Debug, Error)]
#[error("cannot write {}: {source}", path.display())]
pub struct ExportError {
    pub path: PathBuf,
    #[source]
    pub source: std::io::Error,
}

fn write(path: &Path, body: String) -> Result<(), ExportError> {
    fs::write(path, body).map_err(|source| ExportError {
        path: path.to_path_buf(),
        source,
    })
}

pub fn metrics_csv(frames: &[MetricsFrame]) -> String {
    let mut s = String::from(
        "step,active_walkers,active_drivers,mean_driver_speed,jaywalk_entries,walkers_on_road,collisions_vv,runovers\n",
    );
    for f in frames {
        let speed = f.mean_driver_speed.map(|v| v.to_string()).unwrap_or_default();
        writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            f.step,
            f.active_walkers,
            f.active_drivers,
            speed,
            f.jaywalk_entries,
            f.walkers_on_road,
            f.collisions_vv,
            f.runovers
        )
        .unwrap();
    }
    s
}

pub fn events_csv(events: &[Event]) -> String {
    let mut s = String::from("step,event_type,agent_ids,x,y\n");
    for e in events {
        let ids: Vec<String> = e.agents.iter().map(u64::to_string).collect();
        writeln!(
            s,
            "{},{},{},{},{}",
            e.step,
            e.kind.name(),
            ids.join(";"),
            e.position.x,
            e.position.y
        )
        .unwrap();
    }
    s
}

pub fn heatmap_csv(layer: &HeatmapLayer) -> String {
    let mut s = String::from("x,y,value\n");
    for c in layer.cells() {
        writeln!(s, "{},{},{}", c.x, c.y, layer.value(c)).unwrap();
    }
    s
}

pub fn write_metrics(frames: &[MetricsFrame], path: &Path) -> Result<(), ExportError> {
    write(path, metrics_csv(frames))
}

pub fn write_events(events: &[Event], path: &Path) -> Result<(), ExportError> {
    write(path, events_csv(events))
}

pub fn write_heatmap(layer: &HeatmapLayer, path: &Path) -> Result<(), ExportError> {
    write(path, heatmap_csv(layer))
}

/// Writes `metrics.csv`, `events.csv` and `heatmap_<layer>.csv` into `dir`, creating it.
pub fn export_run(
    frames: &[MetricsFrame],
    events: &[Event],
    heatmaps: &HeatmapSet,
    dir: &Path,
) -> Result<(), ExportError> {
    fs::create_dir_all(dir).map_err(|source| ExportError {
        path: dir.to_path_buf(),
        source,
    })?;
    write_metrics(frames, &dir.join("metrics.csv"))?;
    write_events(events, &dir.join("events.csv"))?;
    for layer in heatmaps.layers() {
        write_heatmap(layer, &dir.join(format!("heatmap_{}.csv", layer.kind.name())))?;
    }
    Ok(())
}
