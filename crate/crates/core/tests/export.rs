use std::fs;

use citysim::engine::run;
use citysim::environment::{generate_layout, LayoutSpec};
use citysim::metrics::{export_run, write_metrics, LayerKind};
use citysim::SimConfig;

fn config(walkers: usize, drivers: usize, steps: usize) -> SimConfig {
    SimConfig {
        walkers,
        drivers,
        steps,
        seed: 2,
        ..SimConfig::default()
    }
}

#[test]
fn thousand_steps_thousand_rows() {
    let grid = generate_layout(&LayoutSpec::standard(1, 1)).unwrap();
    let r = run(&config(5, 3, 1000), &grid).unwrap();
    let tmp = tempfile::tempdir().unwrap();
    export_run(&r.frames, &r.events, &r.heatmaps, tmp.path()).unwrap();
    let text = fs::read_to_string(tmp.path().join("metrics.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "step,active_walkers,active_drivers,mean_driver_speed,jaywalk_entries,walkers_on_road,collisions_vv,runovers"
    );
    assert_eq!(lines.count(), 1000);
    let events = fs::read_to_string(tmp.path().join("events.csv")).unwrap();
    assert_eq!(events.lines().next().unwrap(), "step,event_type,agent_ids,x,y");
    assert!(events.lines().any(|l| l.split(',').nth(1) == Some("spawn")));
}

#[test]
fn empty_run_has_zero_heatmaps_and_absent_speed() {
    let grid = generate_layout(&LayoutSpec::standard(1, 1)).unwrap();
    let r = run(&config(0, 0, 20), &grid).unwrap();
    let tmp = tempfile::tempdir().unwrap();
    export_run(&r.frames, &r.events, &r.heatmaps, tmp.path()).unwrap();
    for kind in LayerKind::ALL {
        let text = fs::read_to_string(tmp.path().join(format!("heatmap_{}.csv", kind.name()))).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("x,y,value"));
        let rows: Vec<&str> = lines.collect();
        assert_eq!(rows.len(), grid.len());
        assert_eq!(rows[0], "0,0,0");
        assert_eq!(rows[1], "1,0,0");
        assert!(rows.iter().all(|l| l.ends_with(",0")));
    }
    let metrics = fs::read_to_string(tmp.path().join("metrics.csv")).unwrap();
    assert_eq!(metrics.lines().nth(1), Some("0,0,0,,0,0,0,0"));
}

#[test]
fn re_export_is_byte_identical() {
    let grid = generate_layout(&LayoutSpec::standard(2, 1)).unwrap();
    let r = run(&config(20, 10, 80), &grid).unwrap();
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    export_run(&r.frames, &r.events, &r.heatmaps, a.path()).unwrap();
    export_run(&r.frames, &r.events, &r.heatmaps, b.path()).unwrap();
    let mut names: Vec<_> = fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert_eq!(names.len(), 6);
    for n in names {
        assert_eq!(fs::read(a.path().join(&n)).unwrap(), fs::read(b.path().join(&n)).unwrap());
    }
}

#[test]
fn unwritable_path_is_named() {
    let tmp = tempfile::tempdir().unwrap();
    let target = tmp.path().join("no/such/dir/metrics.csv");
    let err = write_metrics(&[], &target).unwrap_err();
    assert_eq!(err.path, target);
    assert!(err.to_string().contains("metrics.csv"));
}
