use std::fmt::Display;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use carm::cache::{load_cache, save_cache, PlannerCache};
use carm::planner::{validate_path, PlanRequest, PlanResult};
use carm::scene::{
    emit_polyline, emit_result, gen_random_scenarios, parse_scene, parse_scenes, run_scene,
    scene_digest, OutputFormat, Outcome, Scene,
};

/// Exit code for queries that are well formed but admit no path.
const EXIT_NO_PATH: i32 = 2;
/// Exit code for unusable input: files, schemas, invariants, queries.
const EXIT_INPUT: i32 = 3;

#[derive(Parser)]
#[command(
    name = "carm",
    version,
    about = "Plans smooth tip paths for a three-section pneumatic continuum arm"
)]
struct Cli {
    /// Worker threads for parallel phases (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Table,
    Machine,
}

impl From<FormatArg> for OutputFormat {
    fn from(f: FormatArg) -> OutputFormat {
        match f {
            FormatArg::Table => OutputFormat::Table,
            FormatArg::Machine => OutputFormat::Machine,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate a scene's configuration space and write the planner cache.
    BuildCache {
        /// Scene file describing the arm and its discretization.
        #[arg(long)]
        scene: PathBuf,
        /// Where to write the cache.
        #[arg(long)]
        cache: PathBuf,
        /// Override the scene's actuator grid step count.
        #[arg(long)]
        steps: Option<u32>,
        /// Override the scene's workspace cube edge length (meters).
        #[arg(long)]
        cube_dim: Option<f64>,
    },
    /// Plan the query a scene describes, against a prebuilt cache.
    Plan {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        cache: PathBuf,
        /// Override the scene's cube path retry budget.
        #[arg(long)]
        retries: Option<usize>,
        #[arg(long, value_enum, default_value_t = FormatArg::Table)]
        format: FormatArg,
        /// Also write the successful path as CSV to this file.
        #[arg(long)]
        polyline: Option<PathBuf>,
    },
    /// Write a suite of random scenarios drawn against a cache.
    GenScenarios {
        #[arg(long)]
        cache: PathBuf,
        /// How many scenarios to draw.
        #[arg(long, default_value_t = 10)]
        count: usize,
        /// Seed for the scenario stream.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file (a JSON array of scenes).
        #[arg(long)]
        out: PathBuf,
    },
    /// Plan every scenario of a suite; exits 0 once every scenario ran.
    RunSuite {
        #[arg(long)]
        cache: PathBuf,
        /// Suite file produced by gen-scenarios (or by hand).
        #[arg(long)]
        scenarios: PathBuf,
        #[arg(long, value_enum, default_value_t = FormatArg::Table)]
        format: FormatArg,
    },
    /// Plan a scene, then re-derive and check every claim of the result.
    Validate {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        cache: PathBuf,
    },
    /// Repeat a scene's query and report per-phase timings.
    Bench {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        cache: PathBuf,
        /// Planning repetitions to average over.
        #[arg(long, default_value_t = 5)]
        repeat: usize,
    },
}

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { 0 };
        }
    };
    if let Some(workers) = cli.workers {
        if workers == 0 {
            return fail("--workers must be at least 1");
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
        {
            return fail(format!("could not configure {workers} workers: {e}"));
        }
    }
    match cli.command {
        Command::BuildCache {
            scene,
            cache,
            steps,
            cube_dim,
        } => build_cache_cmd(&scene, &cache, steps, cube_dim),
        Command::Plan {
            scene,
            cache,
            retries,
            format,
            polyline,
        } => plan_cmd(&scene, &cache, retries, format.into(), polyline.as_deref()),
        Command::GenScenarios {
            cache,
            count,
            seed,
            out,
        } => gen_cmd(&cache, count, seed, &out),
        Command::RunSuite {
            cache,
            scenarios,
            format,
        } => suite_cmd(&cache, &scenarios, format.into()),
        Command::Validate { scene, cache } => validate_cmd(&scene, &cache),
        Command::Bench {
            scene,
            cache,
            repeat,
        } => bench_cmd(&scene, &cache, repeat),
    }
}

fn fail(msg: impl Display) -> i32 {
    eprintln!("carm: {msg}");
    EXIT_INPUT
}

fn read_scene(path: &std::path::Path) -> Result<Scene, i32> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| fail(format_args!("{}: {e}", path.display())))?;
    let scene = parse_scene(&text).map_err(|e| fail(e))?;
    scene.validate().map_err(|e| fail(e))?;
    Ok(scene)
}

fn read_cache(path: &std::path::Path) -> Result<(PlannerCache, u64), i32> {
    let t0 = Instant::now();
    let cache = load_cache(path).map_err(|e| fail(format_args!("{}: {e}", path.display())))?;
    Ok((cache, t0.elapsed().as_nanos() as u64))
}

fn build_cache_cmd(
    scene_path: &std::path::Path,
    cache_path: &std::path::Path,
    steps: Option<u32>,
    cube_dim: Option<f64>,
) -> i32 {
    let text = match std::fs::read_to_string(scene_path) {
        Ok(t) => t,
        Err(e) => return fail(format_args!("{}: {e}", scene_path.display())),
    };
    let mut scene = match parse_scene(&text) {
        Ok(s) => s,
        Err(e) => return fail(e),
    };
    if let Some(steps) = steps {
        scene.grid.steps = steps;
    }
    if let Some(d) = cube_dim {
        scene.cube_dim = d;
    }
    if let Err(e) = scene.validate() {
        return fail(e);
    }
    let t0 = Instant::now();
    let cache = match scene.build_cache() {
        Ok(c) => c,
        Err(e) => return fail(e),
    };
    let built = t0.elapsed();
    if let Err(e) = save_cache(&cache, cache_path) {
        return fail(format_args!("{}: {e}", cache_path.display()));
    }
    let [n1, n2, n3] = cache.tables.counts();
    println!(
        "cache {} | samples {n1}/{n2}/{n3} | configs {} | cubes {} | bucketed {} | dropped {} | built in {:.2?}",
        cache_path.display(),
        cache.tables.config_count(),
        cache.bbox.cube_count(),
        cache.buckets.bucketed(),
        cache.buckets.dropped(),
        built,
    );
    0
}

fn plan_cmd(
    scene_path: &std::path::Path,
    cache_path: &std::path::Path,
    retries: Option<usize>,
    format: OutputFormat,
    polyline: Option<&std::path::Path>,
) -> i32 {
    let mut scene = match read_scene(scene_path) {
        Ok(s) => s,
        Err(code) => return code,
    };
    if let Some(r) = retries {
        scene.retry_budget = r;
        if let Err(e) = scene.validate() {
            return fail(e);
        }
    }
    let (cache, cache_ns) = match read_cache(cache_path) {
        Ok(c) => c,
        Err(code) => return code,
    };
    if let Err(e) = scene.matches_cache(&cache) {
        return fail(e);
    }
    let run = match run_scene(&cache, &scene, cache_ns) {
        Ok(r) => r,
        Err(e) => return fail(e),
    };
    print!("{}", emit_result(&run.record, format));
    if let PlanResult::Success(s) = &run.result {
        if let Some(path) = polyline {
            let csv = emit_polyline(&cache, s, scene.skeleton_samples);
            if let Err(e) = std::fs::write(path, csv) {
                return fail(format_args!("{}: {e}", path.display()));
            }
        }
        0
    } else {
        EXIT_NO_PATH
    }
}

fn gen_cmd(cache_path: &std::path::Path, count: usize, seed: u64, out: &std::path::Path) -> i32 {
    let (cache, _) = match read_cache(cache_path) {
        Ok(c) => c,
        Err(code) => return code,
    };
    let scenes = gen_random_scenarios(&cache, count, seed);
    let json = serde_json::to_string_pretty(&scenes).expect("scenes always serialize");
    if let Err(e) = std::fs::write(out, json) {
        return fail(format_args!("{}: {e}", out.display()));
    }
    println!("wrote {count} scenarios to {}", out.display());
    0
}

fn suite_cmd(cache_path: &std::path::Path, suite_path: &std::path::Path, format: OutputFormat) -> i32 {
    let (cache, cache_ns) = match read_cache(cache_path) {
        Ok(c) => c,
        Err(code) => return code,
    };
    let text = match std::fs::read_to_string(suite_path) {
        Ok(t) => t,
        Err(e) => return fail(format_args!("{}: {e}", suite_path.display())),
    };
    let scenes = match parse_scenes(&text) {
        Ok(s) => s,
        Err(e) => return fail(e),
    };
    let mut successes = 0usize;
    let mut no_paths = 0usize;
    for (i, scene) in scenes.iter().enumerate() {
        if let Err(e) = scene.validate() {
            return fail(format_args!("scenario {i}: {e}"));
        }
        if let Err(e) = scene.matches_cache(&cache) {
            return fail(format_args!("scenario {i}: {e}"));
        }
        let run = match run_scene(&cache, scene, cache_ns) {
            Ok(r) => r,
            Err(e) => return fail(format_args!("scenario {i}: {e}")),
        };
        match run.record.outcome {
            Outcome::Success => successes += 1,
            Outcome::NoPath => no_paths += 1,
        }
        match format {
            OutputFormat::Machine => print!("{}", emit_result(&run.record, format)),
            OutputFormat::Table => {
                println!("--- scenario {i} ---");
                print!("{}", emit_result(&run.record, format));
            }
        }
    }
    if matches!(format, OutputFormat::Table) {
        println!("suite: {successes} success, {no_paths} no-path");
    }
    0
}

fn validate_cmd(scene_path: &std::path::Path, cache_path: &std::path::Path) -> i32 {
    let scene = match read_scene(scene_path) {
        Ok(s) => s,
        Err(code) => return code,
    };
    let (cache, cache_ns) = match read_cache(cache_path) {
        Ok(c) => c,
        Err(code) => return code,
    };
    if let Err(e) = scene.matches_cache(&cache) {
        return fail(e);
    }
    let run = match run_scene(&cache, &scene, cache_ns) {
        Ok(r) => r,
        Err(e) => return fail(e),
    };
    let PlanResult::Success(success) = &run.result else {
        println!(
            "no path found for scene {} after {} attempts; nothing to validate",
            &scene_digest(&scene)[..12],
            run.record.attempts
        );
        return EXIT_NO_PATH;
    };
    let obstacles = scene.obstacle_spheres();
    let req = PlanRequest {
        start: scene.start_config(),
        target: scene.plan_target(),
        obstacles: &obstacles,
        connectivity: scene.connectivity.into(),
        retry_budget: scene.retry_budget,
        skeleton_samples: scene.skeleton_samples,
    };
    let report = validate_path(&cache, success, &req);
    for check in &report.checks {
        match (&check.passed, &check.detail) {
            (true, _) => println!("ok   {}", check.name),
            (false, Some(d)) => println!("FAIL {} ({d})", check.name),
            (false, None) => println!("FAIL {}", check.name),
        }
    }
    if report.passed() {
        println!("all checks passed");
        0
    } else {
        1
    }
}

fn bench_cmd(scene_path: &std::path::Path, cache_path: &std::path::Path, repeat: usize) -> i32 {
    if repeat == 0 {
        return fail("--repeat must be at least 1");
    }
    let scene = match read_scene(scene_path) {
        Ok(s) => s,
        Err(code) => return code,
    };
    let (cache, cache_ns) = match read_cache(cache_path) {
        Ok(c) => c,
        Err(code) => return code,
    };
    if let Err(e) = scene.matches_cache(&cache) {
        return fail(e);
    }
    let mut outcome = None;
    let mut total = Vec::with_capacity(repeat);
    let mut cube_path = Vec::with_capacity(repeat);
    let mut layers = Vec::with_capacity(repeat);
    let mut relax = Vec::with_capacity(repeat);
    for _ in 0..repeat {
        let t0 = Instant::now();
        let run = match run_scene(&cache, &scene, cache_ns) {
            Ok(r) => r,
            Err(e) => return fail(e),
        };
        total.push(t0.elapsed().as_secs_f64() * 1e3);
        cube_path.push(run.timings.cube_path.as_secs_f64() * 1e3);
        layers.push(run.timings.layer_build.as_secs_f64() * 1e3);
        relax.push(run.timings.relaxation.as_secs_f64() * 1e3);
        outcome = Some(run.record);
    }
    let stats = |v: &[f64]| {
        let min = v.iter().cloned().fold(f64::INFINITY, f64::min);
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        (min, mean)
    };
    let record = outcome.expect("at least one repetition ran");
    println!(
        "outcome     {}",
        match record.outcome {
            Outcome::Success => "success",
            Outcome::NoPath => "no-path",
        }
    );
    if let Some(cost) = record.total_cost {
        println!("cost        {cost}");
    }
    println!("cache load  {:.3} ms", cache_ns as f64 / 1e6);
    let (tmin, tmean) = stats(&total);
    println!("plan        min {tmin:.3} ms, mean {tmean:.3} ms over {repeat} runs");
    let (a, b) = stats(&cube_path);
    println!("  cube path min {a:.3} ms, mean {b:.3} ms");
    let (a, b) = stats(&layers);
    println!("  layers    min {a:.3} ms, mean {b:.3} ms");
    let (a, b) = stats(&relax);
    println!("  relax     min {a:.3} ms, mean {b:.3} ms");
    0
}
