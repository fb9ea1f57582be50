//! `feasreg`: feasible-region computations from scenario files.

mod svg;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use feasible_region::geometry::{fmt_sig, Point2, Polygon2};
use feasible_region::global::{feasible_volume, global_region, volume_index, SipRequest};
use feasible_region::optim::chebyshev_margin;
use feasible_region::planner::{crawl_simulate, force_distribution, CrawlOptions, GaitSchedule, PhaseKind, PlanError, Strategy};
use feasible_region::region::{compute_region, ConstraintMode, RegionError, RegionResult};
use feasible_region::scenario::Scenario;
use feasible_region::terrain::{self, HeightMap};
use log::info;
use nalgebra::Vector3;
use serde::Serialize;
use svg::{Plot, Stroke};

const BENCH_P50_MS: f64 = 25.0;
const BENCH_P995_MS: f64 = 100.0;

#[derive(Parser)]
#[command(name = "feasreg", version, about = "Actuation-aware support regions for legged robots")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Friction,
    Actuation,
    Feasible,
}

impl From<ModeArg> for ConstraintMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Friction => ConstraintMode::FrictionOnly,
            ModeArg::Actuation => ConstraintMode::ActuationOnly,
            ModeArg::Feasible => ConstraintMode::FrictionAndActuation,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Friction,
    Feasible,
}

#[derive(Clone, Copy, ValueEnum)]
enum TerrainKind {
    Flat,
    Pallet,
    Bricks,
}

#[derive(Subcommand)]
enum Command {
    /// Compute a support region and write CSV, SVG and metadata files.
    Region {
        #[arg(long, value_enum)]
        mode: ModeArg,
        #[arg(long)]
        scenario: PathBuf,
        /// Area tolerance in m² (defaults to the scenario's value).
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Print the feasibility margin r and the torque-violation flag at a CoM.
    Margin {
        #[arg(long)]
        scenario: PathBuf,
        /// Horizontal CoM as `X,Y`; the height comes from the scenario.
        #[arg(long, value_parser = parse_xy, allow_hyphen_values = true)]
        com: Point2,
    },
    /// Simulate a crawl over terrain and log every phase.
    Plan {
        #[arg(long)]
        scenario: PathBuf,
        /// Height map file; defaults to the scenario's terrain, else flat ground.
        #[arg(long)]
        terrain: Option<PathBuf>,
        #[arg(long)]
        schedule: PathBuf,
        #[arg(long, value_enum)]
        strategy: StrategyArg,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Configuration-independent region by search along N directions.
    Global {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, default_value_t = 16)]
        directions: usize,
        /// Base heights `z1,z2,...` for a volume of stacked slices.
        #[arg(long, value_delimiter = ',')]
        volume: Option<Vec<f64>>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Time repeated region computations in every mode.
    Bench {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, default_value_t = 200)]
        repeat: usize,
    },
    /// Write a synthetic height map.
    Terrain {
        #[arg(long, value_enum)]
        kind: TerrainKind,
        /// Block or brick height, m.
        #[arg(long, default_value_t = 0.15)]
        height: f64,
        /// Pallet x range `START,END`, m.
        #[arg(long, value_delimiter = ',', default_value = "0.6,3.0")]
        span: Vec<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Failure carrying its process exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl std::fmt::Display) -> Self {
        Self { code, message: message.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::new(1, e)
    }
}

fn parse_xy(s: &str) -> Result<Point2, String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err(format!("expected X,Y, got `{s}`"));
    }
    let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}"));
    Ok(Point2::new(num(parts[0])?, num(parts[1])?))
}

fn load_scenario(path: &Path) -> Result<Scenario, Failure> {
    Scenario::load(path).map_err(|e| Failure::new(1, e))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::new(1, format!("{}: {e}", path.display())))?;
    info!("wrote {}", path.display());
    Ok(())
}

fn contact_points(s: &Scenario) -> Vec<Point2> {
    s.contacts.iter().map(|c| c.position.xy()).collect()
}

#[derive(Serialize)]
struct RegionMeta<'a> {
    mode: &'a str,
    eps: f64,
    converged: bool,
    iterations: usize,
    lp_calls: usize,
    inner_vertices: usize,
    outer_vertices: usize,
    area_inner: String,
    area_outer: String,
    area_gap: String,
}

fn region_cmd(mode: ModeArg, scenario: &Path, eps: Option<f64>, out: &Path) -> Result<(), Failure> {
    let s = load_scenario(scenario)?;
    let mode = ConstraintMode::from(mode);
    let sys = s.constraint_system().map_err(|e| Failure::new(1, e))?;
    let mut req = s.region.request(mode);
    if let Some(e) = eps {
        req.eps = e;
    }
    fs::create_dir_all(out)?;
    let (res, code): (RegionResult, u8) = match compute_region(&sys, &req) {
        Ok(r) => (r, 0),
        Err(RegionError::NotConverged(r)) => (*r, 3),
        Err(e @ (RegionError::EmptyRegion | RegionError::LowerDimensional)) => return Err(Failure::new(2, e)),
        Err(e) => return Err(Failure::new(1, e)),
    };
    write(&out.join("region_inner.csv"), &res.inner.to_csv())?;
    write(&out.join("region_outer.csv"), &res.outer.to_csv())?;

    let mut plot = Plot::default();
    if mode != ConstraintMode::FrictionOnly {
        let fr = s.region.request(ConstraintMode::FrictionOnly);
        if let Ok(f) = compute_region(&sys, &fr) {
            plot.polygon(&f.inner, "#4477aa", Stroke::Dashed);
        }
    }
    let color = if mode == ConstraintMode::FrictionOnly { "#4477aa" } else { "#cc3311" };
    plot.polygon(&res.inner, color, Stroke::Solid);
    for p in contact_points(&s) {
        plot.marker(p, "black", 4.0);
    }
    plot.marker(s.com_xy(), "#228833", 3.0);
    write(&out.join("region.svg"), &plot.render())?;

    let meta = RegionMeta {
        mode: mode.name(),
        eps: req.eps,
        converged: res.converged,
        iterations: res.iterations,
        lp_calls: res.lp_calls,
        inner_vertices: res.inner.vertices().len(),
        outer_vertices: res.outer.vertices().len(),
        area_inner: fmt_sig(res.inner.area()),
        area_outer: fmt_sig(res.outer.area()),
        area_gap: fmt_sig(res.area_gap),
    };
    let text = serde_json::to_string_pretty(&meta).map_err(|e| Failure::new(1, e))?;
    write(&out.join("region_meta.json"), &(text + "\n"))?;
    println!("{} region: area {} m², {} vertices, gap {}", mode.name(), meta.area_inner, meta.inner_vertices, meta.area_gap);
    if code == 3 {
        return Err(Failure::new(3, format!("not converged after {} iterations", res.iterations)));
    }
    Ok(())
}

fn margin_cmd(scenario: &Path, com: Point2) -> Result<(), Failure> {
    let s = load_scenario(scenario)?;
    let at = Vector3::new(com.x, com.y, s.com.z);
    let sys = match s.constraint_system_at(&at) {
        Ok(sys) => sys,
        Err(e) => {
            // legs cannot reach with the base there; keep the nominal posture
            log::warn!("{e}; using the nominal configuration");
            s.constraint_system().map_err(|e| Failure::new(1, e))?
        }
    };
    let r = match compute_region(&sys, &s.region.request(ConstraintMode::FrictionAndActuation)) {
        Ok(res) => chebyshev_margin(&res.inner, &com),
        Err(RegionError::NotConverged(res)) => chebyshev_margin(&res.inner, &com),
        Err(RegionError::EmptyRegion | RegionError::LowerDimensional) => f64::NEG_INFINITY,
        Err(e) => return Err(Failure::new(1, e)),
    };
    let beta = match force_distribution(&sys, &com, ConstraintMode::FrictionOnly) {
        Ok(fd) => fd.beta,
        Err(PlanError::Infeasible) => true,
        Err(e) => return Err(Failure::new(1, e)),
    };
    println!("r = {}", fmt_sig(r));
    println!("beta = {}", u8::from(beta));
    Ok(())
}

fn plan_cmd(scenario: &Path, terrain_path: Option<&Path>, schedule: &Path, strategy: StrategyArg, out: &Path) -> Result<(), Failure> {
    let s = load_scenario(scenario)?;
    let text = fs::read_to_string(schedule).map_err(|e| Failure::new(1, format!("{}: {e}", schedule.display())))?;
    let sched = GaitSchedule::from_toml(&text).map_err(|e| Failure::new(1, format!("{}: {e}", schedule.display())))?;
    let map = match terrain_path {
        Some(p) => HeightMap::load(p).map_err(|e| Failure::new(1, format!("{}: {e}", p.display())))?,
        None => s.terrain.clone().unwrap_or_else(|| terrain::flat(0.0)),
    };
    let strategy = match strategy {
        StrategyArg::Friction => Strategy::FrictionBased,
        StrategyArg::Feasible => Strategy::FeasibleBased,
    };
    let opts = CrawlOptions {
        strategy,
        scale: sched.scale.unwrap_or(s.region.scale),
        region: s.region.request(strategy.mode()),
    };
    let log = crawl_simulate(&s, &sched, &map, &opts).map_err(|e| Failure::new(1, e))?;
    fs::create_dir_all(out)?;
    write(&out.join("plan.csv"), &log.to_csv())?;

    // replay the footholds to draw each phase's stance
    let mut feet: Vec<Point2> = (0..s.robot.legs.len())
        .map(|l| s.contacts.iter().find(|c| c.leg == Some(l)).map_or(Point2::zeros(), |c| c.position.xy()))
        .collect();
    for (k, r) in log.records.iter().enumerate() {
        let mut plot = Plot::default();
        if let Some(region) = &r.target_region {
            plot.polygon(region, "#cc3311", Stroke::Solid);
        }
        let swing = s.robot.leg_index(&r.swing_leg).ok();
        for (l, p) in feet.iter().enumerate() {
            let color = if Some(l) == swing { "#bbbbbb" } else { "black" };
            plot.marker(*p, color, 4.0);
        }
        plot.path(&[r.com_start.xy(), r.com_end.xy()], "#228833").marker(r.com_end.xy(), "#228833", 3.0);
        if let (Some(l), Some(f)) = (swing, r.foothold) {
            feet[l] = f.xy();
            plot.marker(f.xy(), "#4477aa", 4.0);
        }
        plot.label(r.com_end.xy(), format!("{} {}", r.kind.name(), r.swing_leg));
        write(&out.join(format!("phase_{k:03}.svg")), &plot.render())?;
    }
    let aborted = log.records.iter().filter(|r| r.kind == PhaseKind::Aborted).count();
    match log.min_torque_margin() {
        Some(m) => println!("strategy {}: min torque margin {} N·m over {} phases ({aborted} aborted)", strategy.name(), fmt_sig(m), log.records.len()),
        None => println!("strategy {}: no triple stance evaluated", strategy.name()),
    }
    Ok(())
}

fn vertices_csv(res: &feasible_region::global::GlobalRegionResult) -> String {
    let mut s = String::from("dir_x,dir_y,x,y,iterations\n");
    for v in &res.vertices {
        s.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt_sig(v.direction.x),
            fmt_sig(v.direction.y),
            fmt_sig(v.vertex.x),
            fmt_sig(v.vertex.y),
            v.trace.len()
        ));
    }
    s
}

fn global_cmd(scenario: &Path, directions: usize, volume: Option<&[f64]>, out: &Path) -> Result<(), Failure> {
    let s = load_scenario(scenario)?;
    let mut req = SipRequest::uniform(directions);
    req.region = s.region.request(ConstraintMode::FrictionAndActuation);
    fs::create_dir_all(out)?;
    if let Some(levels) = volume {
        let slices = feasible_volume(&s, levels, &req);
        let name = |i: usize| format!("slice_{i:02}.csv");
        for (i, sl) in slices.iter().enumerate() {
            let text = sl.result.polygon.as_ref().map(Polygon2::to_csv).unwrap_or_default();
            write(&out.join(name(i)), &text)?;
        }
        write(&out.join("volume_index.csv"), &volume_index(&slices, name))?;
        let filled = slices.iter().filter(|sl| sl.result.polygon.is_some()).count();
        println!("volume: {filled} of {} slices non-empty", slices.len());
        return if filled == 0 { Err(Failure::new(2, "every slice is empty")) } else { Ok(()) };
    }
    let res = global_region(&s, &req);
    for (a, e) in &res.failures {
        log::warn!("direction ({}, {}): {e}", fmt_sig(a.x), fmt_sig(a.y));
    }
    write(&out.join("global_vertices.csv"), &vertices_csv(&res))?;
    let Some(poly) = &res.polygon else {
        return Err(Failure::new(2, "fewer than three directions converged"));
    };
    write(&out.join("global.csv"), &poly.to_csv())?;
    let mut plot = Plot::default();
    let sys = s.constraint_system().map_err(|e| Failure::new(1, e))?;
    if let Ok(f) = compute_region(&sys, &s.region.request(ConstraintMode::FrictionOnly)) {
        plot.polygon(&f.inner, "#4477aa", Stroke::Dashed);
    }
    plot.polygon(poly, "#cc3311", Stroke::Solid);
    for v in &res.vertices {
        plot.marker(v.vertex, "#cc3311", 2.5);
    }
    for p in contact_points(&s) {
        plot.marker(p, "black", 4.0);
    }
    write(&out.join("global.svg"), &plot.render())?;
    println!(
        "global region: area {} m², {} of {} directions converged",
        fmt_sig(poly.area()),
        res.vertices.len(),
        directions
    );
    Ok(())
}

fn percentile(sorted: &[f64], q: f64) -> f64 {
    let idx = ((sorted.len() as f64 - 1.0) * q).round() as usize;
    sorted[idx.min(sorted.len() - 1)]
}

fn bench_cmd(scenario: &Path, repeat: usize) -> Result<(), Failure> {
    let s = load_scenario(scenario)?;
    let sys = s.constraint_system().map_err(|e| Failure::new(1, e))?;
    let repeat = repeat.max(1);
    println!("mode,p50_ms,p99.5_ms,max_ms");
    for mode in [ConstraintMode::FrictionOnly, ConstraintMode::ActuationOnly, ConstraintMode::FrictionAndActuation] {
        let req = s.region.request(mode);
        let mut times: Vec<f64> = (0..repeat)
            .map(|_| {
                let t = Instant::now();
                let r = compute_region(&sys, &req);
                std::hint::black_box(&r);
                t.elapsed().as_secs_f64() * 1e3
            })
            .collect();
        times.sort_by(f64::total_cmp);
        println!(
            "{},{:.3},{:.3},{:.3}",
            mode.name(),
            percentile(&times, 0.5),
            percentile(&times, 0.995),
            times[times.len() - 1]
        );
    }
    println!("thresholds: p50 < {BENCH_P50_MS} ms, p99.5 < {BENCH_P995_MS} ms");
    Ok(())
}

fn terrain_cmd(kind: TerrainKind, height: f64, span: &[f64], seed: u64, out: &Path) -> Result<(), Failure> {
    let map = match kind {
        TerrainKind::Flat => terrain::flat(height),
        TerrainKind::Pallet => {
            let [a, b] = span else {
                return Err(Failure::new(1, "--span needs START,END"));
            };
            terrain::pallet(height, *a, *b)
        }
        TerrainKind::Bricks => terrain::brick_field(height, seed),
    };
    map.save(out).map_err(|e| Failure::new(1, format!("{}: {e}", out.display())))?;
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Region { mode, scenario, eps, out } => region_cmd(*mode, scenario, *eps, out),
        Command::Margin { scenario, com } => margin_cmd(scenario, *com),
        Command::Plan { scenario, terrain, schedule, strategy, out } => {
            plan_cmd(scenario, terrain.as_deref(), schedule, *strategy, out)
        }
        Command::Global { scenario, directions, volume, out } => global_cmd(scenario, *directions, volume.as_deref(), out),
        Command::Bench { scenario, repeat } => bench_cmd(scenario, *repeat),
        Command::Terrain { kind, height, span, seed, out } => terrain_cmd(*kind, *height, span, *seed, out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
