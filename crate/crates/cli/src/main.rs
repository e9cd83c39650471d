use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use citysim::environment::{generate_layout, parse_grid, serialize_grid};
use citysim::planner::{search, AgentKind, BehaviorProfile, Query, StandardCosts};
use citysim::scenario::{load_config, run_scenario, run_sweep, write_run, ScenarioError, ScenarioFile};
use citysim::{Cell, GridMap, LayoutSpec, World};

#[derive(Parser)]
#[command(name = "citysim", version, about = "Grid city simulation of walkers and drivers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation and write its outputs.
    Run(RunArgs),
    /// Run every sweep point for every seed.
    Sweep(SweepArgs),
    /// Generate a block layout and write it as a grid file.
    GenMap(GenMapArgs),
    /// Plan one route and dump the expanded nodes as CSV.
    PlanDebug(PlanDebugArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Scenario file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Seed override.
    #[arg(long)]
    seed: Option<u64>,
    /// Step count override.
    #[arg(long)]
    steps: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    /// Seeds as a list (`1,2,3`) or a half-open range (`0..10`).
    #[arg(long, default_value = "0")]
    seeds: String,
    /// Runs executed concurrently.
    #[arg(long, default_value_t = 1)]
    parallel: usize,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct GenMapArgs {
    #[arg(long)]
    blocks_x: usize,
    #[arg(long)]
    blocks_y: usize,
    #[arg(long, default_value_t = 15)]
    block_side: usize,
    #[arg(long, default_value_t = 13)]
    building_side: usize,
    #[arg(long, default_value_t = 2)]
    lanes: usize,
    #[arg(long)]
    parking_bays: bool,
    /// Grid file to write.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Walker,
    Driver,
}

#[derive(Args)]
struct PlanDebugArgs {
    /// Scenario whose environment (with its obstacles) is used.
    #[arg(long, conflicts_with = "grid", required_unless_present = "grid")]
    config: Option<PathBuf>,
    /// Plain grid file instead of a scenario.
    #[arg(long)]
    grid: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Start cell as `x,y`.
    #[arg(long, value_parser = parse_cell)]
    from: Cell,
    /// Goal cell as `x,y`.
    #[arg(long, value_parser = parse_cell)]
    to: Cell,
    #[arg(long, value_enum, default_value_t = Kind::Walker)]
    kind: Kind,
    #[arg(long, default_value_t = 1.0)]
    w: f64,
    #[arg(long, default_value_t = 0.0)]
    alpha: f64,
    /// Trace CSV path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Marks errors caused by invalid input, reported with exit code 2.
#[derive(Debug)]
struct ConfigFailure(String);

impl std::fmt::Display for ConfigFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigFailure {}

fn config_error(e: impl std::fmt::Display) -> anyhow::Error {
    anyhow::Error::new(ConfigFailure(e.to_string()))
}

fn parse_cell(s: &str) -> Result<Cell, String> {
    let (x, y) = s
        .split_once(',')
        .ok_or_else(|| format!("expected x,y, got {s:?}"))?;
    let n = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("{v:?}: {e}"));
    Ok(Cell::new(n(x)?, n(y)?))
}

fn parse_seeds(s: &str) -> Result<Vec<u64>> {
    if let Some((a, b)) = s.split_once("..") {
        let (a, b): (u64, u64) = (a.trim().parse()?, b.trim().parse()?);
        if a >= b {
            bail!("empty seed range {s:?}");
        }
        return Ok((a..b).collect());
    }
    s.split(',')
        .map(|v| v.trim().parse::<u64>().with_context(|| format!("bad seed {v:?}")))
        .collect()
}

fn load(path: &Path, steps: Option<usize>) -> Result<ScenarioFile> {
    let mut s = load_config(path).map_err(config_error)?;
    if let Some(n) = steps {
        s.sim.steps = n;
        s.validate().map_err(config_error)?;
    }
    Ok(s)
}

fn cmd_run(args: RunArgs) -> Result<ExitCode> {
    let scenario = load(&args.config, args.steps)?;
    let mut sim = scenario.sim.clone();
    if let Some(seed) = args.seed {
        sim.seed = seed;
    }
    let result = run_scenario(&scenario, &sim).map_err(|e| match e {
        ScenarioError::Export(_) | ScenarioError::Write { .. } | ScenarioError::Pool(_) => anyhow!(e),
        other => config_error(other),
    })?;
    write_run(&scenario, &result, &args.out).context("writing run outputs")?;
    let s = result.summary();
    println!(
        "{} steps, mean driver speed {}, jaywalk entries {}, vehicle collisions {}, runovers {}",
        result.frames.len(),
        s.mean_driver_speed.map_or("n/a".to_string(), |v| format!("{v:.3}")),
        s.jaywalk_entries,
        s.collisions_vv,
        s.runovers
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_sweep(args: SweepArgs) -> Result<ExitCode> {
    let scenario = load(&args.config, args.steps)?;
    let seeds = parse_seeds(&args.seeds).map_err(config_error)?;
    let report = run_sweep(&scenario, &seeds, args.parallel, &args.out)?;
    let failed = report.failures();
    println!(
        "{} runs, {} failed, summary at {}",
        report.runs.len(),
        failed,
        args.out.join("summary.csv").display()
    );
    for r in report.runs.iter().filter(|r| r.result.is_err()) {
        eprintln!("{}: {}", r.dir.display(), r.result.as_ref().unwrap_err());
    }
    Ok(if failed > 0 { ExitCode::from(1) } else { ExitCode::SUCCESS })
}

fn cmd_gen_map(args: GenMapArgs) -> Result<ExitCode> {
    let spec = LayoutSpec {
        blocks_x: args.blocks_x,
        blocks_y: args.blocks_y,
        block_side: args.block_side,
        building_side: args.building_side,
        lanes_per_direction: args.lanes,
        parking_bays: args.parking_bays,
    };
    let grid = generate_layout(&spec).map_err(config_error)?;
    fs::write(&args.out, serialize_grid(&grid)).with_context(|| format!("writing {}", args.out.display()))?;
    println!("{}x{} grid written to {}", grid.width(), grid.height(), args.out.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_plan_debug(args: PlanDebugArgs) -> Result<ExitCode> {
    let grid: GridMap = match (&args.config, &args.grid) {
        (Some(path), _) => {
            let scenario = load(path, None)?;
            let mut sim = scenario.sim.clone();
            if let Some(seed) = args.seed {
                sim.seed = seed;
            }
            let (base, candidates) = scenario.environment().map_err(config_error)?;
            World::with_obstacle_candidates(sim, base, &candidates)
                .map_err(config_error)?
                .grid()
                .clone()
        }
        (None, Some(path)) => {
            let text = fs::read_to_string(path).map_err(|e| config_error(format!("{}: {e}", path.display())))?;
            parse_grid(&text).map_err(|e| config_error(format!("{}: {e}", path.display())))?
        }
        (None, None) => return Err(config_error("one of --config or --grid is required")),
    };
    let kind = match args.kind {
        Kind::Walker => AgentKind::Walker,
        Kind::Driver => AgentKind::Driver,
    };
    let speed = if kind == AgentKind::Walker { 1.0 } else { 2.0 };
    let profile = BehaviorProfile::new(kind, args.w, args.alpha, speed).map_err(config_error)?;
    let q = Query {
        grid: &grid,
        start: args.from,
        heading: None,
        goal: args.to,
        profile: &profile,
        blocked: &[],
    };
    let mut trace = Vec::new();
    let outcome = search(&q, &StandardCosts, Some(&mut trace)).map_err(config_error)?;
    let mut csv = String::from("step,x,y,heading,g,h,r,f\n");
    for e in &trace {
        let heading = e.heading.map(|d| d.as_char().to_string()).unwrap_or_default();
        writeln!(csv, "{},{},{},{},{},{},{},{}", e.order, e.cell.x, e.cell.y, heading, e.g, e.h, e.r, e.f)?;
    }
    match &args.out {
        Some(path) => fs::write(path, &csv).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{csv}"),
    }
    match &outcome.plan {
        Some(p) => eprintln!(
            "plan: {} cells, cost {}, risk {}, {} expansions",
            p.len(),
            p.cost,
            p.risk,
            outcome.expansions
        ),
        None => eprintln!("no route ({} expansions)", outcome.expansions),
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::GenMap(a) => cmd_gen_map(a),
        Command::PlanDebug(a) => cmd_plan_debug(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<ConfigFailure>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_lists_and_ranges() {
        assert_eq!(parse_seeds("3").unwrap(), vec![3]);
        assert_eq!(parse_seeds("1, 5,2").unwrap(), vec![1, 5, 2]);
        assert_eq!(parse_seeds("2..5").unwrap(), vec![2, 3, 4]);
        assert!(parse_seeds("5..5").is_err());
        assert!(parse_seeds("a").is_err());
    }

    #[test]
    fn cell_argument() {
        assert_eq!(parse_cell("4, 7"), Ok(Cell::new(4, 7)));
        assert!(parse_cell("4").is_err());
    }
}
