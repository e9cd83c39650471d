//! Scenario files, single runs with output directories, and parameter sweeps.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{run_with_candidates, ConfigError, SimConfig, SimError, SimulationResult};
use crate::environment::{generate_layout, parse_grid, parse_obstacles, Cell, GridError, GridMap, LayoutError, LayoutSpec};
use crate::metrics::{export_run, ExportError, RunSummary};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {}: {source}", path.display())]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {message}", path.display())]
    Parse { path: PathBuf, message: String },
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("invalid layout: {0}")]
    Layout(#[from] LayoutError),
    #[error("{}: {source}", path.display())]
    Grid {
        path: PathBuf,
        #[source]
        source: GridError,
    },
    #[error(transparent)]
    Export(#[from] ExportError),
    #[error("cannot create {}: {source}", path.display())]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("thread pool: {0}")]
    Pool(String),
}

/// Parameter lists of a sweep. Absent lists keep the base value.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub walkers: Option<Vec<usize>>,
    pub drivers: Option<Vec<usize>>,
    pub obstruction: Option<Vec<f64>>,
}

/// One point of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub walkers: usize,
    pub drivers: usize,
    pub obstruction: f64,
}

impl SweepPoint {
    /// Directory name `w<walkers>_d<drivers>_o<obstruction>`.
    pub fn dir_name(&self) -> String {
        format!("w{}_d{}_o{}", self.walkers, self.drivers, self.obstruction)
    }

    pub fn apply(&self, base: &SimConfig) -> SimConfig {
        SimConfig {
            walkers: self.walkers,
            drivers: self.drivers,
            obstruction: self.obstruction,
            ..base.clone()
        }
    }
}

/// A scenario document: run parameters plus the environment, either a
/// generated `layout` or a `grid` file, and optionally an `obstacles` list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub grid: Option<PathBuf>,
    pub obstacles: Option<PathBuf>,
    #[serde(default)]
    pub sim: SimConfig,
    pub layout: Option<LayoutSpec>,
    pub sweep: Option<Sweep>,
}

impl ScenarioFile {
    pub fn from_layout(layout: LayoutSpec, sim: SimConfig) -> Self {
        ScenarioFile {
            grid: None,
            obstacles: None,
            sim,
            layout: Some(layout),
            sweep: None,
        }
    }

    /// Parses TOML text; relative paths are resolved against `base_dir`.
    pub fn parse(text: &str, origin: &Path, base_dir: &Path) -> Result<ScenarioFile, ScenarioError> {
        let mut s: ScenarioFile = toml::from_str(text).map_err(|e| ScenarioError::Parse {
            path: origin.to_path_buf(),
            message: e.to_string(),
        })?;
        for p in [&mut s.grid, &mut s.obstacles].into_iter().flatten() {
            if p.is_relative() {
                *p = base_dir.join(&*p);
            }
        }
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        match (&self.layout, &self.grid) {
            (Some(_), Some(_)) => {
                return Err(ConfigError::new("layout", "give either `layout` or `grid`, not both").into())
            }
            (None, None) => return Err(ConfigError::new("layout", "one of `layout` or `grid` is required").into()),
            (Some(l), None) => l.validate()?,
            (None, Some(_)) => {}
        }
        self.sim.validate()?;
        if let Some(blocks) = &self.sim.obstruction_blocks {
            let Some(layout) = &self.layout else {
                return Err(ConfigError::new("sim.obstruction_blocks", "requires a generated `layout`").into());
            };
            if let Some(&b) = blocks.iter().find(|&&b| b >= layout.block_count()) {
                return Err(ConfigError::new(
                    "sim.obstruction_blocks",
                    format!("block {b} out of range (layout has {})", layout.block_count()),
                )
                .into());
            }
        }
        if let Some(sweep) = &self.sweep {
            let lists = [
                ("sweep.walkers", sweep.walkers.as_ref().map(Vec::len)),
                ("sweep.drivers", sweep.drivers.as_ref().map(Vec::len)),
                ("sweep.obstruction", sweep.obstruction.as_ref().map(Vec::len)),
            ];
            for (field, len) in lists {
                if len == Some(0) {
                    return Err(ConfigError::new(field, "list must not be empty").into());
                }
            }
            for p in self.points() {
                p.apply(&self.sim).validate()?;
            }
        }
        Ok(())
    }

    /// The Cartesian product of the sweep lists, walkers outermost. A
    /// scenario without a sweep has the single base point.
    pub fn points(&self) -> Vec<SweepPoint> {
        let sweep = self.sweep.clone().unwrap_or_default();
        let walkers = sweep.walkers.unwrap_or_else(|| vec![self.sim.walkers]);
        let drivers = sweep.drivers.unwrap_or_else(|| vec![self.sim.drivers]);
        let obstruction = sweep.obstruction.unwrap_or_else(|| vec![self.sim.obstruction]);
        let mut out = Vec::with_capacity(walkers.len() * drivers.len() * obstruction.len());
        for &w in &walkers {
            for &d in &drivers {
                for &o in &obstruction {
                    out.push(SweepPoint {
                        walkers: w,
                        drivers: d,
                        obstruction: o,
                    });
                }
            }
        }
        out
    }

    /// The base map and the cells obstacles may be sampled from.
    pub fn environment(&self) -> Result<(GridMap, Vec<Cell>), ScenarioError> {
        let mut grid = match (&self.layout, &self.grid) {
            (Some(layout), _) => generate_layout(layout)?,
            (None, Some(path)) => {
                let text = read(path)?;
                parse_grid(&text).map_err(|source| ScenarioError::Grid {
                    path: path.clone(),
                    source,
                })?
            }
            (None, None) => return Err(ConfigError::new("layout", "one of `layout` or `grid` is required").into()),
        };
        if let Some(path) = &self.obstacles {
            let text = read(path)?;
            let grid_err = |source| ScenarioError::Grid {
                path: path.clone(),
                source,
            };
            let cells = parse_obstacles(&text).map_err(grid_err)?;
            grid = grid
                .with_obstacles(cells)
                .map_err(|e| grid_err(GridError::Overlay(e)))?;
        }
        let candidates = match (&self.sim.obstruction_blocks, &self.layout) {
            (Some(blocks), Some(layout)) => blocks
                .iter()
                .flat_map(|&b| layout.block_sidewalks(b % layout.blocks_x, b / layout.blocks_x))
                .collect(),
            _ => grid.sidewalk_cells(),
        };
        Ok((grid, candidates))
    }

    /// The fully resolved document for one run: `sim` as used, no sweep.
    pub fn effective(&self, sim: &SimConfig) -> ScenarioFile {
        ScenarioFile {
            grid: self.grid.clone(),
            obstacles: self.obstacles.clone(),
            sim: sim.clone(),
            layout: self.layout.clone(),
            sweep: None,
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario documents serialize")
    }
}

fn read(path: &Path) -> Result<String, ScenarioError> {
    fs::read_to_string(path).map_err(|source| ScenarioError::Read {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads and validates a scenario file.
pub fn load_config(path: &Path) -> Result<ScenarioFile, ScenarioError> {
    let text = read(path)?;
    let dir = path.parent().unwrap_or(Path::new("."));
    let dir = fs::canonicalize(dir).unwrap_or_else(|_| dir.to_path_buf());
    ScenarioFile::parse(&text, path, &dir)
}

/// Runs `sim` on the scenario's environment.
pub fn run_scenario(scenario: &ScenarioFile, sim: &SimConfig) -> Result<SimulationResult, ScenarioError> {
    let (grid, candidates) = scenario.environment()?;
    run_with_candidates(sim, &grid, &candidates).map_err(ScenarioError::from_sim)
}

/// Writes a run's CSV files plus `config.toml`, the effective scenario.
pub fn write_run(scenario: &ScenarioFile, result: &SimulationResult, dir: &Path) -> Result<(), ScenarioError> {
    export_run(&result.frames, &result.events, &result.heatmaps, dir)?;
    let path = dir.join("config.toml");
    fs::write(&path, scenario.effective(&result.config).to_toml()).map_err(|source| ScenarioError::Write { path, source })
}

/// Outcome of one sweep run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub point: SweepPoint,
    pub seed: u64,
    pub dir: PathBuf,
    pub result: Result<RunSummary, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub runs: Vec<RunOutcome>,
}

impl SweepReport {
    pub fn failures(&self) -> usize {
        self.runs.iter().filter(|r| r.result.is_err()).count()
    }
}

/// Runs every sweep point for every seed, `parallelism` runs at a time,
/// writing `<out>/<point>/seed<k>/` per run and `<out>/summary.csv`.
/// A failed run leaves `error.txt` in its directory; the sweep continues.
pub fn run_sweep(
    scenario: &ScenarioFile,
    seeds: &[u64],
    parallelism: usize,
    out: &Path,
) -> Result<SweepReport, ScenarioError> {
    let (grid, candidates) = scenario.environment()?;
    let jobs: Vec<(SweepPoint, u64)> = scenario
        .points()
        .into_iter()
        .flat_map(|p| seeds.iter().map(move |&s| (p, s)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism.max(1))
        .build()
        .map_err(|e| ScenarioError::Pool(e.to_string()))?;
    let runs: Vec<RunOutcome> = pool.install(|| {
        jobs.par_iter()
            .map(|&(point, seed)| {
                let dir = out.join(point.dir_name()).join(format!("seed{seed}"));
                let sim = SimConfig {
                    seed,
                    ..point.apply(&scenario.sim)
                };
                let result = run_with_candidates(&sim, &grid, &candidates)
                    .map_err(ScenarioError::from_sim)
                    .and_then(|r| write_run(scenario, &r, &dir).map(|_| r.summary()))
                    .map_err(|e| {
                        let msg = e.to_string();
                        let _ = fs::create_dir_all(&dir);
                        let _ = fs::write(dir.join("error.txt"), format!("{msg}\n"));
                        msg
                    });
                RunOutcome {
                    point,
                    seed,
                    dir,
                    result,
                }
            })
            .collect()
    });
    let report = SweepReport { runs };
    let path = out.join("summary.csv");
    fs::create_dir_all(out).map_err(|source| ScenarioError::Write {
        path: out.to_path_buf(),
        source,
    })?;
    fs::write(&path, summary_csv(&report)).map_err(|source| ScenarioError::Write { path, source })?;
    Ok(report)
}

impl ScenarioError {
    fn from_sim(e: SimError) -> Self {
        match e {
            SimError::Config(c) => ScenarioError::Config(c),
        }
    }
}

/// Mean and sample standard deviation; the deviation is `None` below two values.
pub fn mean_sd(values: &[f64]) -> Option<(f64, Option<f64>)> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let sd = (values.len() > 1)
        .then(|| (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt());
    Some((mean, sd))
}

/// One row per sweep point, in sweep order, with seed means and sample SDs.
pub fn summary_csv(report: &SweepReport) -> String {
    let mut s = String::from(
        "walkers,drivers,obstruction,runs,failed,\
         mean_driver_speed,mean_driver_speed_sd,jaywalk_entries,jaywalk_entries_sd,\
         collisions_vv,collisions_vv_sd,runovers,runovers_sd,road_occupancy,road_occupancy_sd\n",
    );
    let mut points: Vec<SweepPoint> = Vec::new();
    for r in &report.runs {
        if !points.contains(&r.point) {
            points.push(r.point);
        }
    }
    let cell = |v: Option<(f64, Option<f64>)>| match v {
        None => ",".to_string(),
        Some((m, None)) => format!("{m},"),
        Some((m, Some(sd))) => format!("{m},{sd}"),
    };
    for p in points {
        let runs: Vec<&RunOutcome> = report.runs.iter().filter(|r| r.point == p).collect();
        let ok: Vec<&RunSummary> = runs.iter().filter_map(|r| r.result.as_ref().ok()).collect();
        let collect = |f: &dyn Fn(&RunSummary) -> Option<f64>| ok.iter().filter_map(|r| f(r)).collect::<Vec<f64>>();
        writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{}",
            p.walkers,
            p.drivers,
            p.obstruction,
            runs.len(),
            runs.len() - ok.len(),
            cell(mean_sd(&collect(&|r| r.mean_driver_speed))),
            cell(mean_sd(&collect(&|r| Some(r.jaywalk_entries as f64)))),
            cell(mean_sd(&collect(&|r| Some(r.collisions_vv as f64)))),
            cell(mean_sd(&collect(&|r| Some(r.runovers as f64)))),
            cell(mean_sd(&collect(&|r| r.road_occupancy))),
        )
        .unwrap();
    }
    s
}
