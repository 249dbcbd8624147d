//! `cheese`: generate Swiss-cheese specs, build towers over them, integrate
//! boundary measures, certify, and render reports.
//!
//! Exit codes: 0 success, 1 certification failed (the verdict is still
//! written), 2 invalid input or missing files, 3 a seeded search ran out of
//! retries.

use anyhow::Context;
use cheese_core::cheese::{arc_conj_integral, boundary_chain, check_arrangement, render_svg, CheeseSpec};
use cheese_core::io::{read_json, write_atomic, write_json};
use cheese_core::pipeline::{self, RunConfig, Verdict};
use cheese_core::quadrature::{contributions_csv, direct_measure, MeasureMethod};
use cheese_core::tower::{ExpTower, Stage, TowerKind, TowerSpec};
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "cheese", version, about = "Swiss-cheese covering towers and boundary-measure certificates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded cheese spec.
    GenCheese(GenArgs),
    /// Build an exponential or square-root tower.
    BuildTower(BuildArgs),
    /// Integrate boundary measures of a stored tower.
    Measure(MeasureArgs),
    /// Certify a stored tower and write the verdict.
    Certify(CertifyArgs),
    /// Render an SVG, per-arc CSV and a text summary.
    Report(ReportArgs),
}

#[derive(Args)]
struct Common {
    /// JSON run configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    budget: Option<f64>,
    #[arg(long)]
    holes: Option<usize>,
    #[arg(long)]
    min_angle: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Exp,
    Sqrt,
}

#[derive(Args)]
struct BuildArgs {
    #[command(flatten)]
    common: Common,
    /// Cheese spec (exponential towers).
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long, value_enum)]
    kind: Option<KindArg>,
    #[arg(long)]
    stages: Option<usize>,
    #[arg(long)]
    dict: Option<usize>,
    /// Truncations, comma separated.
    #[arg(long, value_delimiter = ',')]
    k: Option<Vec<usize>>,
    #[arg(long)]
    target_delta: Option<f64>,
    #[arg(long)]
    transversality_tol: Option<f64>,
    #[arg(long)]
    lift_tol: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Direct,
    Recursive,
    Both,
}

#[derive(Args)]
struct MeasureArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    tower: PathBuf,
    #[arg(long, value_enum, default_value = "both")]
    method: MethodArg,
    #[arg(long)]
    quadrature_tol: Option<f64>,
    #[arg(long)]
    direct_max_stage: Option<usize>,
    /// Also write per-piece contributions of each direct measure here.
    #[arg(long)]
    pieces_dir: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CertifyArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    tower: PathBuf,
    /// Cheese spec; checked against the one stored in the tower.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Size of the nontriviality test family.
    #[arg(long)]
    tests: Option<usize>,
    #[arg(long)]
    quadrature_tol: Option<f64>,
    #[arg(long)]
    direct_max_stage: Option<usize>,
    #[arg(long)]
    mc_samples: Option<u64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long)]
    spec: PathBuf,
    #[arg(long)]
    tower: Option<PathBuf>,
    #[arg(long)]
    verdict: Option<PathBuf>,
    /// Truncation whose boundary arcs and cut curves are drawn (default: all holes).
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    out_dir: PathBuf,
}

/// Input problems map to exit code 2.
#[derive(Debug)]
struct InputError(String);

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

fn input_err(msg: impl Into<String>) -> anyhow::Error {
    InputError(msg.into()).into()
}

fn load_config(common: &Common) -> anyhow::Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| input_err(format!("{}: {e}", p.display())))?;
            RunConfig::from_json(&text).map_err(|e| input_err(format!("{}: {e}", p.display())))?
        }
        None => RunConfig::default(),
    };
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

/// Relative output paths are placed under the configured output directory.
fn out_path(cfg: &RunConfig, p: &Path) -> PathBuf {
    match &cfg.output_dir {
        Some(d) if p.is_relative() => Path::new(d).join(p),
        _ => p.to_path_buf(),
    }
}

fn read_verdict(path: &Path) -> anyhow::Result<Verdict> {
    if !path.exists() {
        return Err(input_err(format!("{}: no such file", path.display())));
    }
    read_json(path).map_err(|e| input_err(format!("{}: {e}", path.display())))
}

fn read_spec(path: &Path) -> anyhow::Result<CheeseSpec> {
    let text = std::fs::read_to_string(path).map_err(|e| input_err(format!("{}: {e}", path.display())))?;
    CheeseSpec::from_json(&text).map_err(|e| input_err(format!("{}: {e}", path.display())))
}

fn read_tower(path: &Path) -> anyhow::Result<TowerSpec> {
    let text = std::fs::read_to_string(path).map_err(|e| input_err(format!("{}: {e}", path.display())))?;
    TowerSpec::from_json(&text).map_err(|e| input_err(format!("{}: {e}", path.display())))
}

fn gen_cheese(a: GenArgs) -> anyhow::Result<bool> {
    let mut cfg = load_config(&a.common)?;
    if let Some(b) = a.budget {
        cfg.radius_budget = b;
    }
    if let Some(h) = a.holes {
        cfg.hole_count = h;
    }
    if let Some(m) = a.min_angle {
        cfg.min_crossing_angle = m;
    }
    // Truncations play no part in generation.
    cfg.truncations = vec![cfg.hole_count];
    let spec = pipeline::generate_spec(&cfg)?;
    let arr = check_arrangement(&spec, spec.holes.len())?;
    write_atomic(&out_path(&cfg, &a.out), spec.to_json()?.as_bytes())?;
    println!(
        "holes {}  sum r = {:.6} < {}  min crossing angle = {}",
        spec.holes.len(),
        spec.radius_sum(),
        spec.radius_budget,
        arr.min_crossing_angle.map_or("none".to_string(), |a| format!("{a:.6}"))
    );
    Ok(true)
}

fn build_tower(a: BuildArgs) -> anyhow::Result<bool> {
    let mut cfg = load_config(&a.common)?;
    if let Some(k) = a.kind {
        cfg.kind = match k {
            KindArg::Exp => TowerKind::Exponential,
            KindArg::Sqrt => TowerKind::SquareRoot,
        };
    }
    if let Some(n) = a.stages {
        cfg.stages = n;
    }
    if let Some(j) = a.dict {
        cfg.dictionary_size = j;
    }
    if let Some(d) = a.target_delta {
        cfg.target_delta = d;
    }
    if let Some(t) = a.transversality_tol {
        cfg.transversality_tol = t;
    }
    if let Some(t) = a.lift_tol {
        cfg.lift_tol = t;
    }
    let spec = match (&a.spec, cfg.kind) {
        (Some(p), _) => Some(read_spec(p)?),
        (None, TowerKind::Exponential) => return Err(input_err("--spec is required for exponential towers")),
        (None, TowerKind::SquareRoot) => None,
    };
    if let Some(s) = &spec {
        cfg.hole_count = s.holes.len();
        cfg.radius_budget = s.radius_budget;
        cfg.truncations = match a.k {
            Some(k) => k,
            None => cfg.truncations.iter().copied().filter(|&k| k <= s.holes.len()).collect(),
        };
        if cfg.truncations.is_empty() {
            cfg.truncations = vec![s.holes.len()];
        }
    }
    let tower = pipeline::build_tower(&cfg, spec.as_ref())?;
    write_atomic(&out_path(&cfg, &a.out), tower.to_json()?.as_bytes())?;
    for st in &tower.stages {
        match st {
            Stage::Exponential(e) => {
                let d = e.truncations.iter().map(|t| t.delta).fold(f64::INFINITY, f64::min);
                println!(
                    "stage {}: c = {:.6}  m = {}  cut margin {:.3e}  min delta {:.6}",
                    e.level,
                    e.c,
                    e.m,
                    e.cut.margin(),
                    d
                );
            }
            Stage::SquareRoot(s) => println!(
                "stage {}: alpha = {:.6}  |alpha| = {:.6} < 1/{}  regular-value margin {:.3e}",
                s.level,
                s.alpha,
                s.alpha.norm(),
                s.level,
                s.regular_value_margin
            ),
        }
    }
    Ok(true)
}

fn measure(a: MeasureArgs) -> anyhow::Result<bool> {
    let mut cfg = load_config(&a.common)?;
    if let Some(t) = a.quadrature_tol {
        cfg.quadrature_tol = t;
    }
    if let Some(d) = a.direct_max_stage {
        cfg.direct_max_stage = d;
    }
    let tower = read_tower(&a.tower)?;
    if tower.kind != TowerKind::Exponential {
        return Err(input_err("measures are defined for exponential towers"));
    }
    let et = pipeline::rebuild(&cfg, &tower)?;
    let mut reports = pipeline::measures(&cfg, &et)?;
    reports.retain(|r| match a.method {
        MethodArg::Direct => r.method == MeasureMethod::Direct,
        MethodArg::Recursive => r.method == MeasureMethod::Recursive,
        MethodArg::Both => true,
    });
    if let Some(dir) = &a.pieces_dir {
        for r in reports.iter().filter(|r| r.method == MeasureMethod::Direct) {
            let region = et.region(r.k, r.stage)?;
            let (_, rows) = direct_measure(region, &et.stack(r.stage)?, cfg.quadrature_tol)?;
            write_atomic(&out_path(&cfg, dir).join(format!("pieces_N{}_k{}.csv", r.stage, r.k)), contributions_csv(&rows).as_bytes())?;
        }
    }
    write_json(&out_path(&cfg, &a.out), &reports)?;
    for r in &reports {
        println!(
            "N={} k={} {:?}: ||mu|| = {:.9}  int zbar dz1 = {:.9}",
            r.stage, r.k, r.method, r.total_variation, r.moment_zbar
        );
    }
    Ok(true)
}

fn certify(a: CertifyArgs) -> anyhow::Result<bool> {
    let mut cfg = load_config(&a.common)?;
    if let Some(t) = a.tests {
        cfg.test_count = t;
    }
    if let Some(t) = a.quadrature_tol {
        cfg.quadrature_tol = t;
    }
    if let Some(d) = a.direct_max_stage {
        cfg.direct_max_stage = d;
    }
    if let Some(m) = a.mc_samples {
        cfg.mc_samples = m;
    }
    let tower = read_tower(&a.tower)?;
    let spec = a.spec.as_deref().map(read_spec).transpose()?;
    if let Some(base) = tower.base.as_ref() {
        cfg.hole_count = base.holes.len();
        cfg.radius_budget = base.radius_budget;
        cfg.truncations = tower.truncations.clone();
    }
    cfg.kind = tower.kind;
    let verdict = pipeline::certify(&cfg, spec.as_ref(), &tower)?;
    write_json(&out_path(&cfg, &a.out), &verdict)?;
    print!("{}", verdict.summary());
    for g in &verdict.payload.nontriviality {
        println!("gap N={} k={}: {:.6} (floor {:.6})", g.stage, g.k, g.gap, g.theoretical_floor);
    }
    println!("all pass: {}", verdict.payload.all_pass);
    Ok(verdict.payload.all_pass)
}

fn report(a: ReportArgs) -> anyhow::Result<bool> {
    let spec = read_spec(&a.spec)?;
    let tower = a.tower.as_deref().map(read_tower).transpose()?;
    let verdict: Option<Verdict> = a.verdict.as_deref().map(read_verdict).transpose()?;
    let k = a.k.unwrap_or(spec.holes.len());
    if k > spec.holes.len() {
        return Err(input_err(format!("k = {k} exceeds the hole count {}", spec.holes.len())));
    }
    let mut overlays = Vec::new();
    if let Some(t) = tower.as_ref().filter(|t| t.kind == TowerKind::Exponential) {
        let et = ExpTower::rebuild(t, Some(vec![k]), false)?;
        for stage in &et.cut_curves[0] {
            overlays.extend(stage.iter().cloned());
        }
    }
    std::fs::create_dir_all(&a.out_dir).with_context(|| format!("creating {}", a.out_dir.display()))?;
    write_atomic(&a.out_dir.join("cheese.svg"), render_svg(&spec, &overlays).as_bytes())?;

    let chain = boundary_chain(&spec, k)?;
    let mut csv = String::from("arc,circle_index,start_angle,end_angle,orientation,length,integral_re,integral_im\n");
    for (i, arc) in chain.arcs.iter().enumerate() {
        let v = arc_conj_integral(&spec, arc);
        csv.push_str(&format!(
            "{},{},{:?},{:?},{},{:?},{:?},{:?}\n",
            i,
            arc.circle_index,
            arc.start_angle,
            arc.end_angle,
            arc.orientation,
            spec.circle(arc.circle_index).radius * arc.extent(),
            v.re,
            v.im
        ));
    }
    write_atomic(&a.out_dir.join("arcs.csv"), csv.as_bytes())?;

    let summary = match &verdict {
        Some(v) => v.summary(),
        None => format!("k={k}: {} arcs, no verdict supplied\n", chain.arcs.len()),
    };
    write_atomic(&a.out_dir.join("summary.txt"), summary.as_bytes())?;
    print!("{summary}");
    Ok(true)
}

fn exit_code(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<InputError>().is_some() {
        return 2;
    }
    match e.downcast_ref::<cheese_core::Error>() {
        Some(ce) if ce.is_retry_exhaustion() => 3,
        Some(
            cheese_core::Error::InvalidParameter(_)
            | cheese_core::Error::UnsupportedVersion { .. }
            | cheese_core::Error::Json(_)
            | cheese_core::Error::Io(_),
        ) => 2,
        Some(_) => 1,
        None => 2,
    }
}

fn configure_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("CHEESE_THREADS") {
        let n: usize = v.parse().map_err(|_| input_err(format!("CHEESE_THREADS must be a positive integer, got {v:?}")))?;
        if n == 0 {
            return Err(input_err("CHEESE_THREADS must be positive"));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|_| match cli.command {
        Command::GenCheese(a) => gen_cheese(a),
        Command::BuildTower(a) => build_tower(a),
        Command::Measure(a) => measure(a),
        Command::Certify(a) => certify(a),
        Command::Report(a) => report(a),
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
