//! `kinoplan` command line: single plans, the random-map benchmark, control
//! set generation and rendering.
//!
//! Exit codes: 0 success, 2 no path found, 3 bad input, 4 internal
//! invariant violation.

use std::fs;
use std::path::{Path as FsPath, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use kinoplan::bench::{self, BenchOptions, MapSpec};
use kinoplan::geometry::PoseSE2;
use kinoplan::gridmap::load_map;
use kinoplan::heuristics::MotionModel;
use kinoplan::lattice::{generate_with_report, load_control_set, save_control_set, GeneratorOptions};
use kinoplan::planners::{GoalMode, Path, PlanError, Planner, PlannerConfig, PlannerKind};

#[derive(Parser)]
#[command(
    name = "kinoplan",
    version,
    about = "Search-based kinematically feasible path planning"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Plan one path on a map and write it as CSV.
    Plan(PlanArgs),
    /// Run the random-map benchmark and print the summary table.
    Bench(BenchArgs),
    /// Generate a minimal control set for the lattice planner.
    Genlattice(GenArgs),
    /// Draw paths over a map as SVG (or PPM when the output ends in .ppm).
    Render(RenderArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum GoalModeArg {
    Exact,
    Bidirectional,
    Any,
}

#[derive(Args)]
struct Tuning {
    /// Cost weight α of the traversal cost.
    #[arg(long, default_value_t = 2.0)]
    alpha: f64,
    /// Penalty β on turning motions.
    #[arg(long, default_value_t = 0.05)]
    beta: f64,
    /// Penalty γ on changing turn direction.
    #[arg(long, default_value_t = 0.05)]
    gamma: f64,
    /// Minimum turning radius, meters.
    #[arg(long, default_value_t = 0.4)]
    turning_radius: f64,
    /// Allow reversing (Reeds-Shepp expansion); forward-only uses Dubins.
    #[arg(long)]
    reverse: bool,
    /// Multiplier on the heuristic in the search order (1 = admissible).
    #[arg(long)]
    heuristic_weight: Option<f64>,
    /// Control set file for the lattice planner; generated in memory when absent.
    #[arg(long)]
    control_set: Option<PathBuf>,
}

#[derive(Args)]
struct PlanArgs {
    /// Map image (.pgm) with its .meta sidecar.
    #[arg(long)]
    map: PathBuf,
    /// Start pose `x,y,theta` (meters, radians).
    #[arg(long, allow_hyphen_values = true, value_parser = parse_pose)]
    start: PoseSE2,
    /// Goal pose `x,y,theta` (meters, radians).
    #[arg(long, allow_hyphen_values = true, value_parser = parse_pose)]
    goal: PoseSE2,
    /// Planner: 2d, hybrid or lattice.
    #[arg(long, default_value = "hybrid")]
    planner: PlannerKind,
    /// Goal heading handling.
    #[arg(long, value_enum, default_value = "exact")]
    goal_mode: GoalModeArg,
    /// Smooth the path before writing it.
    #[arg(long)]
    smooth: bool,
    /// Output CSV with columns x,y,theta,direction.
    #[arg(long)]
    out: PathBuf,
    /// Also render the map and path to this SVG.
    #[arg(long)]
    svg: Option<PathBuf>,
    #[command(flatten)]
    tuning: Tuning,
}

#[derive(Args)]
struct BenchArgs {
    /// Obstacle densities, comma separated fractions.
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.15,0.2")]
    densities: Vec<f64>,
    /// Start/goal pairs per map.
    #[arg(long, default_value_t = 100)]
    pairs: usize,
    /// Maps per density.
    #[arg(long, default_value_t = 1)]
    maps: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Side length of the square maps, meters.
    #[arg(long, default_value_t = 100.0)]
    size: f64,
    /// Planners to run, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "hybrid,lattice,2d")]
    planners: Vec<PlannerKind>,
    /// Also time a replan with the heuristic cached.
    #[arg(long)]
    warm: bool,
    /// Per-plan records.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Write one SVG per map showing its first scenario.
    #[arg(long)]
    render_dir: Option<PathBuf>,
    /// Search weight; defaults to the benchmark setting 1/cos(π/8).
    #[arg(long)]
    heuristic_weight: Option<f64>,
    /// Control set file for the lattice planner; generated in memory when absent.
    #[arg(long)]
    control_set: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    /// Minimum turning radius, meters.
    #[arg(long, default_value_t = 0.4)]
    radius: f64,
    /// Grid resolution, meters.
    #[arg(long, default_value_t = 0.05)]
    resolution: f64,
    /// Heading count.
    #[arg(long, default_value_t = 16)]
    headings: usize,
    /// Consecutive rings without additions before stopping.
    #[arg(long, default_value_t = 3)]
    stop_after: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RenderArgs {
    #[arg(long)]
    map: PathBuf,
    /// Path CSV files, comma separated.
    #[arg(long, value_delimiter = ',')]
    paths: Vec<PathBuf>,
    /// Output file; `.ppm` selects the raster format.
    #[arg(long)]
    out: PathBuf,
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    msg: String,
}

impl Failure {
    fn input(msg: impl std::fmt::Display) -> Self {
        Self {
            code: 3,
            msg: msg.to_string(),
        }
    }
}

impl From<PlanError> for Failure {
    fn from(e: PlanError) -> Self {
        Self {
            code: e.exit_code() as u8,
            msg: e.to_string(),
        }
    }
}

fn parse_pose(s: &str) -> Result<PoseSE2, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| format!("bad number `{t}`")))
        .collect::<Result<_, _>>()?;
    match v[..] {
        [x, y, th] if v.iter().all(|a| a.is_finite()) => Ok(PoseSE2::new(x, y, th)),
        _ => Err("expected finite `x,y,theta`".into()),
    }
}

fn write(path: &FsPath, bytes: &[u8]) -> Result<(), Failure> {
    fs::write(path, bytes).map_err(|e| Failure::input(format!("cannot write {}: {e}", path.display())))
}

fn apply_tuning(cfg: &mut PlannerConfig, t: &Tuning) -> Result<(), Failure> {
    cfg.alpha = t.alpha;
    cfg.beta = t.beta;
    cfg.gamma = t.gamma;
    cfg.turning_radius = t.turning_radius;
    cfg.lut_window = 10.0 * t.turning_radius;
    if t.reverse {
        cfg.allow_reverse = true;
        cfg.motion_model = MotionModel::ReedsShepp;
    }
    if let Some(w) = t.heuristic_weight {
        cfg.heuristic_weight = w;
    }
    cfg.validate().map_err(Failure::from)
}

fn lattice_planner(cfg: PlannerConfig, file: Option<&FsPath>, resolution: f64) -> Result<Planner, Failure> {
    let cs = match file {
        Some(f) => load_control_set(f).map_err(Failure::input)?,
        None => {
            let opts = GeneratorOptions::new(resolution, cfg.turning_radius, cfg.heading_bins);
            generate_with_report(&opts).map_err(Failure::input)?.0
        }
    };
    Ok(Planner::with_control_set(cfg, cs)?)
}

fn run_plan(a: PlanArgs) -> Result<(), Failure> {
    let map = load_map(&a.map).map_err(Failure::input)?;
    let mut cfg = PlannerConfig::new(a.planner);
    apply_tuning(&mut cfg, &a.tuning)?;
    cfg.goal_mode = match a.goal_mode {
        GoalModeArg::Exact => GoalMode::Exact,
        GoalModeArg::Bidirectional => GoalMode::Bidirectional,
        GoalModeArg::Any => GoalMode::AnyHeading,
    };
    cfg.smoother.enabled = a.smooth;
    let mut planner = match a.planner {
        PlannerKind::Lattice => lattice_planner(cfg, a.tuning.control_set.as_deref(), map.resolution())?,
        _ => Planner::new(cfg)?,
    };
    let path = planner.plan(&map, a.start, a.goal)?;
    write(&a.out, path.to_csv().as_bytes())?;
    if let Some(svg) = &a.svg {
        let text = bench::render_svg(&map, &[(a.planner.name(), &path)]).map_err(Failure::input)?;
        write(svg, text.as_bytes())?;
    }
    println!(
        "{} poses, {:.3} m, cost {:.3}, {} expansions, {:.1} ms",
        path.poses.len(),
        path.length_m,
        path.cost_total,
        path.expansions,
        path.planning_time_s * 1e3
    );
    Ok(())
}

fn run_bench(a: BenchArgs) -> Result<(), Failure> {
    if a.densities.iter().any(|d| !(0.0..1.0).contains(d)) {
        return Err(Failure::input("densities must be in [0, 1)"));
    }
    if !(a.size > 0.0) {
        return Err(Failure::input("map size must be positive"));
    }
    let spec = MapSpec {
        width_m: a.size,
        height_m: a.size,
        ..MapSpec::default()
    };
    let mut opts = BenchOptions::desk_scale(None);
    opts.planners = a.planners.clone();
    opts.warm = a.warm;
    opts.keep_paths = a.render_dir.is_some();
    if let Some(w) = a.heuristic_weight {
        opts.config.heuristic_weight = w;
    }
    opts.config.validate()?;
    if a.planners.contains(&PlannerKind::Lattice) {
        opts.control_set = Some(match &a.control_set {
            Some(f) => load_control_set(f).map_err(Failure::input)?,
            None => {
                let g = GeneratorOptions::new(spec.resolution, opts.config.turning_radius, opts.config.heading_bins);
                generate_with_report(&g).map_err(Failure::input)?.0
            }
        });
    }
    let suite = bench::generate_scenarios(&a.densities, a.maps, a.pairs, a.seed, &spec, &opts.config)
        .map_err(Failure::input)?;
    for w in &suite.warnings {
        eprintln!("warning: {w}");
    }
    let run = bench::run_benchmark(&suite, &opts);
    if let Some(csv) = &a.csv {
        write(csv, bench::to_csv(&run.records).as_bytes())?;
    }
    if let Some(dir) = &a.render_dir {
        fs::create_dir_all(dir).map_err(|e| Failure::input(format!("cannot create {}: {e}", dir.display())))?;
        let per = opts.planners.len();
        for m in &suite.maps {
            let Some(first) = suite.scenarios.iter().position(|s| s.map_id == m.id) else {
                continue;
            };
            let drawn: Vec<(&str, &Path)> = (0..per)
                .filter_map(|k| {
                    let idx = first * per + k;
                    run.paths[idx].as_ref().map(|p| (run.records[idx].planner.name(), p))
                })
                .collect();
            let svg = bench::render_svg(&m.map, &drawn).map_err(Failure::input)?;
            write(&dir.join(format!("map{}_scenario{}.svg", m.id, first)), svg.as_bytes())?;
        }
    }
    print!("{}", bench::summary_table(&bench::summarize(&run.records)));
    println!("{} plans in {:.1} s", run.records.len(), run.elapsed_s);
    Ok(())
}

fn run_genlattice(a: GenArgs) -> Result<(), Failure> {
    let mut opts = GeneratorOptions::new(a.resolution, a.radius, a.headings);
    opts.stop_after_decomposable_rings = a.stop_after;
    let (cs, report) = generate_with_report(&opts).map_err(Failure::input)?;
    save_control_set(&cs, &a.out).map_err(Failure::input)?;
    let counts: Vec<usize> = (0..cs.heading_bins()).map(|h| cs.primitives_for(h).len()).collect();
    println!(
        "{} primitives over {} headings {:?}, horizon ring {}",
        cs.primitives.len(),
        cs.heading_bins(),
        counts,
        report.horizon_ring
    );
    Ok(())
}

fn run_render(a: RenderArgs) -> Result<(), Failure> {
    let map = load_map(&a.map).map_err(Failure::input)?;
    let mut paths = Vec::new();
    for p in &a.paths {
        let text = fs::read_to_string(p).map_err(|e| Failure::input(format!("cannot read {}: {e}", p.display())))?;
        let path = Path::from_csv(&text).map_err(|e| Failure::input(format!("{}: {e}", p.display())))?;
        let label = p
            .file_stem()
            .map_or_else(|| p.display().to_string(), |s| s.to_string_lossy().into_owned());
        paths.push((label, path));
    }
    if a.out.extension().is_some_and(|e| e == "ppm") {
        let refs: Vec<&Path> = paths.iter().map(|(_, p)| p).collect();
        write(&a.out, &bench::render_ppm(&map, &refs))
    } else {
        let refs: Vec<(&str, &Path)> = paths.iter().map(|(l, p)| (l.as_str(), p)).collect();
        let svg = bench::render_svg(&map, &refs).map_err(Failure::input)?;
        write(&a.out, svg.as_bytes())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Plan(a) => run_plan(a),
        Command::Bench(a) => run_bench(a),
        Command::Genlattice(a) => run_genlattice(a),
        Command::Render(a) => run_render(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
