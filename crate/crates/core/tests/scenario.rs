use std::fs;
use std::path::{Path, PathBuf};

use citysim::engine::{Dist, Range, SpawnMode};
use citysim::scenario::{load_config, run_scenario, run_sweep, write_run, ScenarioError, ScenarioFile};

fn scenarios_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

#[test]
fn minimal_config_gets_defaults() {
    let tmp = tempfile::tempdir().unwrap();
    let p = write(tmp.path(), "s.toml", "[layout]\nblocks_x = 2\nblocks_y = 1\n");
    let s = load_config(&p).unwrap();
    assert_eq!(s.sim.steps, 1000);
    assert_eq!(s.sim.collision_countdown, 10);
    assert_eq!(s.sim.agents.lookahead, 4);
    assert_eq!(s.sim.spawn, SpawnMode::Replenish);
    let layout = s.layout.clone().unwrap();
    assert_eq!((layout.block_side, layout.building_side, layout.lanes_per_direction), (15, 13, 2));
    assert_eq!(s.points().len(), 1);
}

#[test]
fn layout_and_grid_are_exclusive() {
    let tmp = tempfile::tempdir().unwrap();
    let p = write(tmp.path(), "s.toml", "grid = \"city.txt\"\n[layout]\nblocks_x = 1\nblocks_y = 1\n");
    let err = load_config(&p).unwrap_err();
    assert!(matches!(&err, ScenarioError::Config(c) if c.field == "layout"), "{err}");
    let p = write(tmp.path(), "n.toml", "[sim]\nsteps = 5\n");
    assert!(matches!(load_config(&p), Err(ScenarioError::Config(c)) if c.field == "layout"));
}

#[test]
fn errors_name_the_field() {
    let tmp = tempfile::tempdir().unwrap();
    let p = write(tmp.path(), "a.toml", "[layout]\nblocks_x = 1\nblocks_y = 1\n[sim]\nwalkrs = 3\n");
    let msg = load_config(&p).unwrap_err().to_string();
    assert!(msg.contains("walkrs"), "{msg}");
    let p = write(tmp.path(), "b.toml", "[layout]\nblocks_x = 1\nblocks_y = 1\n[sim]\nsteps = 0\n");
    assert!(matches!(load_config(&p), Err(ScenarioError::Config(c)) if c.field == "steps"));
    let p = write(tmp.path(), "c.toml", "[layout]\nblocks_x = 1\nblocks_y = 1\n[sweep]\nwalkers = []\n");
    assert!(matches!(load_config(&p), Err(ScenarioError::Config(c)) if c.field == "sweep.walkers"));
    let p = write(tmp.path(), "d.toml", "[layout]\nblocks_x = 2\nblocks_y = 2\n[sim]\nobstruction_blocks = [4]\n");
    assert!(matches!(load_config(&p), Err(ScenarioError::Config(c)) if c.field == "sim.obstruction_blocks"));
    assert!(matches!(load_config(&tmp.path().join("missing.toml")), Err(ScenarioError::Read { .. })));
}

#[test]
fn experiment_grid_has_135_points() {
    let s = load_config(&scenarios_dir().join("density_sweep.toml")).unwrap();
    let points = s.points();
    assert_eq!(points.len(), 9 * 5 * 3);
    assert_eq!(points[0].dir_name(), "w0_d20_o0");
    assert_eq!(points[134].dir_name(), "w200_d100_o0.1");
}

#[test]
fn obstructed_blocks_scenario_parses() {
    let s = load_config(&scenarios_dir().join("obstructed_blocks.toml")).unwrap();
    assert_eq!(s.sim.walker_profile.w, Dist::Ranged(Range::UniformInt([1, 3])));
    assert_eq!(s.sim.driver_profile.w, Dist::Ranged(Range::UniformInt([1, 5])));
    let (grid, candidates) = s.environment().unwrap();
    assert_eq!(candidates.len(), 2 * 56);
    assert!(candidates.iter().all(|&c| grid.ground(c) == citysim::GroundType::Sidewalk));
}

#[test]
fn grid_and_obstacle_files_resolve_relative_to_the_scenario() {
    let tmp = tempfile::tempdir().unwrap();
    write(tmp.path(), "city.txt", "3 1\ns-- s-- s--\n");
    write(tmp.path(), "obs.txt", "1 0\n");
    let p = write(tmp.path(), "s.toml", "grid = \"city.txt\"\nobstacles = \"obs.txt\"\n");
    let s = load_config(&p).unwrap();
    let (grid, _) = s.environment().unwrap();
    assert!(grid.is_obstacle(citysim::Cell::new(1, 0)));
}

fn tiny_sweep(tmp: &Path) -> ScenarioFile {
    let p = write(
        tmp,
        "sweep.toml",
        "[layout]\nblocks_x = 2\nblocks_y = 1\n[sim]\nsteps = 30\nwalkers = 8\ndrivers = 4\n[sweep]\ndrivers = [2, 4]\n",
    );
    load_config(&p).unwrap()
}

#[test]
fn sweep_layout_and_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let s = tiny_sweep(tmp.path());
    let out = tmp.path().join("out");
    let report = run_sweep(&s, &[1, 2, 3], 2, &out).unwrap();
    assert_eq!(report.runs.len(), 6);
    assert_eq!(report.failures(), 0);
    for d in ["w8_d2_o0", "w8_d4_o0"] {
        for k in 1..=3 {
            let dir = out.join(d).join(format!("seed{k}"));
            for f in ["metrics.csv", "events.csv", "config.toml", "heatmap_jaywalk.csv"] {
                assert!(dir.join(f).is_file(), "{}", dir.join(f).display());
            }
        }
    }
    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 3);
    assert!(summary.lines().nth(1).unwrap().starts_with("8,2,0,3,0,"));

    let again = tmp.path().join("again");
    run_sweep(&s, &[1, 2, 3], 1, &again).unwrap();
    assert_eq!(summary, fs::read_to_string(again.join("summary.csv")).unwrap());
}

#[test]
fn failed_run_leaves_marker_and_sweep_continues() {
    let tmp = tempfile::tempdir().unwrap();
    let s = tiny_sweep(tmp.path());
    let out = tmp.path().join("out");
    // A directory where metrics.csv should go makes that run's export fail.
    fs::create_dir_all(out.join("w8_d2_o0/seed1/metrics.csv")).unwrap();
    let report = run_sweep(&s, &[1], 2, &out).unwrap();
    assert_eq!(report.failures(), 1);
    assert!(out.join("w8_d2_o0/seed1/error.txt").is_file());
    assert!(out.join("w8_d4_o0/seed1/metrics.csv").is_file());
    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    assert!(summary.lines().nth(1).unwrap().starts_with("8,2,0,1,1,"));
}

#[test]
fn echoed_config_reproduces_the_run() {
    let tmp = tempfile::tempdir().unwrap();
    let s = tiny_sweep(tmp.path());
    let mut sim = s.sim.clone();
    sim.seed = 42;
    let first = run_scenario(&s, &sim).unwrap();
    let dir = tmp.path().join("run");
    write_run(&s, &first, &dir).unwrap();
    let echoed = load_config(&dir.join("config.toml")).unwrap();
    assert_eq!(echoed.sim, sim);
    let second = run_scenario(&echoed, &echoed.sim).unwrap();
    let dir2 = tmp.path().join("run2");
    write_run(&echoed, &second, &dir2).unwrap();
    for f in ["metrics.csv", "events.csv", "heatmap_driver_speed.csv", "config.toml"] {
        assert_eq!(fs::read(dir.join(f)).unwrap(), fs::read(dir2.join(f)).unwrap(), "{f}");
    }
}
