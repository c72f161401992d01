use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;
use smoothspatial::accuracy::{measure_pair, summarize, Measurement};
use smoothspatial::learn::synth::{self, SynthConfig};
use smoothspatial::learn::{discover, learn_margins, DemonstrationSet, DiscoveryConfig, MarginConfig, MarginReport, Phase};
use smoothspatial::logic::{eval_exact_breakdown, eval_smooth_breakdown, smoothing_budget, Window};
use smoothspatial::opt::{optimize, OptimizationOutcome, OptimizerConfig};
use smoothspatial::spatial::Direction;
use smoothspatial::Smoothing;

use crate::args::{AccuracyArgs, EvalArgs, LearnArgs, Mode, OptimizeArgs, SynthArgs};
use crate::error::CliError;
use crate::manifest::{now_unix, Manifest};
use crate::scenario::Scenario;
use crate::{io, svg};

/// Caps worker threads when set to a positive integer.
pub const THREADS_ENV: &str = "DIFF_SPATIAL_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    /// Exit 0.
    Satisfied,
    /// Exit 1.
    Unsatisfied,
}

impl Status {
    fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Satisfied
        } else {
            Status::Unsatisfied
        }
    }
}

#[derive(Debug, Clone)]
pub struct Output {
    pub status: Status,
    pub report: String,
}

pub fn thread_pool() -> Result<rayon::ThreadPool, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok()).filter(|&n| n > 0) {
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| CliError::Usage(format!("thread pool: {e}")))
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

pub fn eval(args: &EvalArgs) -> Result<Output, CliError> {
    let scenario = Scenario::load(&args.scenario)?;
    let poses = io::read_trajectory(&args.trajectory, &scenario.problem)?;
    let traj = scenario.problem.trajectory(&poses, |c| c)?;
    let phi = &scenario.formula;
    let exact = eval_exact_breakdown(phi, &traj)?;
    let mut report = String::new();
    let _ = writeln!(report, "formula: {phi}");
    let per_time = match args.mode {
        Mode::Exact => {
            let _ = writeln!(report, "mode: exact");
            let _ = writeln!(report, "robustness: {:.10}", exact.value);
            exact.per_time
        }
        Mode::Smooth => {
            let s = Smoothing { tau: args.tau, samples: args.samples, sigmoid_k: args.sigmoid_k };
            let smooth = eval_smooth_breakdown(phi, &traj, &s)?;
            let _ = writeln!(report, "mode: smooth (tau = {}, samples = {})", args.tau, args.samples);
            let _ = writeln!(report, "robustness: {:.10}", smooth.value);
            let _ = writeln!(report, "exact robustness: {:.10}", exact.value);
            let _ = writeln!(report, "difference: {:.3e}", smooth.value - exact.value);
            match smoothing_budget(phi, traj.scene(0), args.tau)? {
                Some((lo, hi)) => {
                    let _ = writeln!(report, "budget: [{lo:.6e}, {hi:.6e}]");
                }
                None => {
                    let _ = writeln!(report, "budget: not available for sampled geometry");
                }
            }
            smooth.per_time
        }
    };
    Ok(finish_eval(report, per_time.filter(|_| args.breakdown), exact.value))
}

fn finish_eval(mut report: String, per_time: Option<Vec<f64>>, exact: f64) -> Output {
    if let Some(values) = per_time {
        let _ = writeln!(report, "t,robustness");
        for (t, v) in values.iter().enumerate() {
            let _ = writeln!(report, "{t},{v:.10}");
        }
    }
    let status = Status::from_bool(exact > 0.0);
    let _ = writeln!(report, "satisfied: {}", status == Status::Satisfied);
    Output { status, report }
}

fn optimizer_json(cfg: &OptimizerConfig) -> serde_json::Value {
    json!({
        "step": cfg.step,
        "iterations": cfg.iterations,
        "margin": cfg.margin,
        "smoothness": cfg.smoothness,
        "perturbation": cfg.perturbation,
        "stall_threshold": cfg.stall_threshold,
        "stall_patience": cfg.stall_patience,
        "adam": cfg.adam,
        "tau": cfg.tau,
        "anneal_to": cfg.anneal_to,
        "anneal_fraction": cfg.anneal_fraction,
        "samples": cfg.samples,
        "sigmoid_k": cfg.sigmoid_k,
        "seed": cfg.seed,
        "snapshots": cfg.snapshots,
    })
}

/// Result of one scenario run.
#[derive(Debug, Clone)]
pub struct OptimizeRun {
    pub name: String,
    pub dir: PathBuf,
    pub outcome: OptimizationOutcome,
}

pub fn optimize_one(path: &Path, args: &OptimizeArgs) -> Result<OptimizeRun, CliError> {
    let started = now_unix();
    let scenario = Scenario::load(path)?;
    let mut cfg = scenario.optimizer_config();
    if let Some(k) = args.iterations {
        cfg.iterations = k;
    }
    if let Some(t) = args.tau {
        cfg.tau = t;
        if cfg.anneal_to.is_some_and(|a| a > t) {
            cfg.anneal_to = Some(t);
        }
    }
    if let Some(s) = args.samples {
        cfg.samples = s;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    let k = cfg.iterations;
    cfg.snapshots = match args.svg_every {
        Some(0) => return Err(CliError::Usage("--svg-every must be positive".into())),
        Some(n) => (0..k).step_by(n).collect(),
        None => vec![0, k / 4, k / 2],
    };
    let outcome = optimize(&scenario.problem, &scenario.init, &scenario.formula, &cfg)?;

    let dir = args.out_dir.join(scenario.name());
    let frames = dir.join("frames");
    create_dir(&frames)?;
    let mut outputs = vec![dir.join("trajectory.csv"), dir.join("trace.csv")];
    io::write_trajectory(&outputs[0], &scenario.problem, &outcome.poses)?;
    io::write_trace(&outputs[1], &outcome.trace)?;
    let tables: Vec<_> = outcome.snapshots.iter().map(|(_, p)| p).collect();
    let view = svg::bounds(&scenario.problem, &tables);
    let goals = svg::goal_names(&scenario.formula);
    for (iteration, poses) in &outcome.snapshots {
        let path = frames.join(format!("frame_{iteration:04}.svg"));
        let caption = format!("{} iteration {iteration}", scenario.name());
        let text = svg::render(&scenario.problem, poses, &goals, view, &caption);
        std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
        outputs.push(path);
    }
    let config = json!({ "scenario": scenario.file, "optimizer": optimizer_json(&cfg) });
    Manifest::new("optimize", cfg.seed, config, started).write(&dir, &[path.to_path_buf()], &outputs)?;
    Ok(OptimizeRun { name: scenario.name().to_string(), dir, outcome })
}

pub fn optimize_all(args: &OptimizeArgs) -> Result<Output, CliError> {
    let runs: Vec<Result<OptimizeRun, CliError>> =
        thread_pool()?.install(|| args.scenarios.par_iter().map(|p| optimize_one(p, args)).collect());
    let mut report = String::new();
    let mut all = true;
    for run in runs {
        let run = run?;
        let o = &run.outcome;
        let last = o.trace.last().map_or(0, |r| r.iteration);
        let _ = writeln!(
            report,
            "{}: {} after {} iterations, exact robustness {:.6} -> {}",
            run.name,
            if o.success { "satisfied" } else { "NOT satisfied" },
            last + 1,
            o.rho_exact,
            run.dir.display()
        );
        all &= o.success;
    }
    Ok(Output { status: Status::from_bool(all), report })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseEntry {
    pub name: String,
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarginEntry {
    pub tau: Option<f64>,
    pub iterations: Option<usize>,
    pub step: Option<f64>,
    pub penalty: Option<f64>,
    pub tolerance: Option<f64>,
}

/// `learn.toml`: what to enumerate and how to learn margins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LearnFile {
    pub subjects: Vec<String>,
    pub objects: Vec<String>,
    pub phases: Vec<PhaseEntry>,
    #[serde(default)]
    pub kappa: Option<f64>,
    #[serde(default)]
    pub keep_per_pair: Option<usize>,
    /// Directional predicate names; all six by default.
    #[serde(default)]
    pub directions: Option<Vec<String>>,
    #[serde(default)]
    pub margin: MarginEntry,
}

impl LearnFile {
    fn discovery(&self) -> Result<DiscoveryConfig, CliError> {
        let d = DiscoveryConfig::default();
        let directions = match &self.directions {
            None => d.directions,
            Some(names) => names
                .iter()
                .map(|n| {
                    Direction::ALL
                        .into_iter()
                        .find(|d| d.name() == n)
                        .ok_or_else(|| CliError::Usage(format!("unknown direction `{n}`")))
                })
                .collect::<Result<_, _>>()?,
        };
        Ok(DiscoveryConfig {
            kappa: self.kappa.unwrap_or(d.kappa),
            directions,
            keep_per_pair: self.keep_per_pair.unwrap_or(d.keep_per_pair),
        })
    }

    fn margin(&self) -> MarginConfig {
        let d = MarginConfig::default();
        let m = &self.margin;
        MarginConfig {
            tau: m.tau.unwrap_or(d.tau),
            iterations: m.iterations.unwrap_or(d.iterations),
            step: m.step.unwrap_or(d.step),
            penalty: m.penalty.unwrap_or(d.penalty),
            tolerance: m.tolerance.unwrap_or(d.tolerance),
            ..d
        }
    }

    fn phases(&self) -> Result<Vec<Phase>, CliError> {
        self.phases
            .iter()
            .map(|p| {
                let window = Window::new(p.start, p.end)
                    .ok_or_else(|| CliError::Usage(format!("phase `{}` ends before it starts", p.name)))?;
                Ok(Phase { name: p.name.clone(), window })
            })
            .collect()
    }
}

/// Demonstration CSV files of `dir`, sorted by name.
pub fn demo_files(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| CliError::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(CliError::data(dir, "no demonstration CSV files"));
    }
    Ok(files)
}

#[derive(Debug, Serialize)]
struct SpecEntry {
    phase: String,
    formula: String,
    tightened: String,
    margin: f64,
    closed_form: f64,
    sound: bool,
    tight: bool,
}

pub fn learn(args: &LearnArgs) -> Result<Output, CliError> {
    let started = now_unix();
    let config_path = args.config.clone().unwrap_or_else(|| args.demos.join("learn.toml"));
    let text = std::fs::read_to_string(&config_path).map_err(|e| CliError::io(&config_path, e))?;
    let file: LearnFile = toml::from_str(&text).map_err(|e| CliError::data(&config_path, e.to_string()))?;
    let files = demo_files(&args.demos)?;
    let trajectories = files.iter().map(|f| io::read_demo(f)).collect::<Result<Vec<_>, _>>()?;
    let set = DemonstrationSet::new(trajectories, file.phases()?)?;
    let subjects: Vec<&str> = file.subjects.iter().map(String::as_str).collect();
    let objects: Vec<&str> = file.objects.iter().map(String::as_str).collect();
    let found = discover(&set, &subjects, &objects, &file.discovery()?)?;
    let mut margin_cfg = file.margin();
    if let Some(t) = args.tau {
        margin_cfg.tau = t;
    }
    if let Some(k) = args.iterations {
        margin_cfg.iterations = k;
    }
    let candidates: Vec<_> = found.retained.iter().map(|c| c.candidate.clone()).collect();
    let report = learn_margins(&set, &candidates, &margin_cfg)?;

    create_dir(&args.out_dir)?;
    let outputs = write_learn_outputs(&args.out_dir, &report)?;
    let config = json!({
        "learn": file,
        "margin": {
            "tau": margin_cfg.tau,
            "iterations": margin_cfg.iterations,
            "step": margin_cfg.step,
            "penalty": margin_cfg.penalty,
            "tolerance": margin_cfg.tolerance,
        },
    });
    let mut inputs = vec![config_path];
    inputs.extend(files);
    Manifest::new("learn", 0, config, started).write(&args.out_dir, &inputs, &outputs)?;

    let mut text = format!(
        "{} candidates enumerated, {} satisfied by all {} demonstrations, {} retained\n",
        found.enumerated,
        found.satisfied.len(),
        set.len(),
        found.retained.len()
    );
    for (phase, object) in &found.omitted {
        let _ = writeln!(text, "warning: nothing holds for `{object}` in phase `{phase}`");
    }
    text.push_str(&report.table());
    let _ = writeln!(text, "max deviation from closed form: {:.3e}", report.max_deviation());
    Ok(Output { status: Status::from_bool(report.ok()), report: text })
}

fn write_learn_outputs(dir: &Path, report: &MarginReport) -> Result<Vec<PathBuf>, CliError> {
    let entries: Vec<SpecEntry> = report
        .margins
        .iter()
        .map(|m| SpecEntry {
            phase: m.candidate.phase.name.clone(),
            formula: m.candidate.to_string(),
            tightened: m.candidate.formula_with_margin(m.margin).to_string(),
            margin: m.margin,
            closed_form: m.closed_form,
            sound: m.sound,
            tight: m.tight,
        })
        .collect();
    let paths = [dir.join("specification.json"), dir.join("specification.txt"), dir.join("table.txt")];
    let json = serde_json::to_string_pretty(&entries).expect("entries serialize") + "\n";
    let spec = report.specification().map_or_else(String::new, |f| format!("{f}\n"));
    for (path, text) in paths.iter().zip([json, spec, report.table()]) {
        std::fs::write(path, text).map_err(|e| CliError::io(path, e))?;
    }
    Ok(paths.to_vec())
}

pub fn accuracy(args: &AccuracyArgs) -> Result<Output, CliError> {
    let started = now_unix();
    if args.tau.iter().any(|&t| !(t > 0.0)) || args.samples.contains(&0) {
        return Err(CliError::Usage("temperatures and sample counts must be positive".into()));
    }
    let rows: Vec<Measurement> = thread_pool()?.install(|| {
        (0..args.pairs)
            .into_par_iter()
            .map(|i| measure_pair(args.seed, i, &args.tau, &args.samples, args.sigmoid_k))
            .collect::<Result<Vec<_>, _>>()
    })?
    .into_iter()
    .flatten()
    .collect();
    let summary = summarize(&rows);
    create_dir(&args.out_dir)?;
    let outputs = [args.out_dir.join("accuracy.csv"), args.out_dir.join("summary.csv")];
    io::write_accuracy(&outputs[0], &rows)?;
    io::write_summary(&outputs[1], &summary)?;
    let config = json!({
        "pairs": args.pairs,
        "tau": args.tau,
        "samples": args.samples,
        "sigmoid_k": args.sigmoid_k,
    });
    Manifest::new("accuracy", args.seed, config, started).write(&args.out_dir, &[], &outputs)?;
    let mut report = format!("{:<17} {:>8} {:>7} {:>12} {:>12}\n", "quantity", "tau", "samples", "max error", "mean error");
    for s in &summary {
        let _ = writeln!(
            report,
            "{:<17} {:>8} {:>7} {:>12.4e} {:>12.4e}",
            s.quantity.name(),
            s.tau,
            s.samples,
            s.max_error,
            s.mean_error
        );
    }
    Ok(Output { status: Status::Satisfied, report })
}

pub fn synth_demos(args: &SynthArgs) -> Result<Output, CliError> {
    let started = now_unix();
    let cfg = SynthConfig { demos: args.demos, seed: args.seed, horizon: args.horizon, ..SynthConfig::default() };
    let demos = synth::synthesize(&cfg)?;
    create_dir(&args.out_dir)?;
    let mut outputs = Vec::new();
    for (i, traj) in demos.set.trajectories().iter().enumerate() {
        let path = args.out_dir.join(format!("demo_{i:03}.csv"));
        io::write_demo(&path, traj)?;
        outputs.push(path);
    }
    let file = LearnFile {
        subjects: vec![synth::ARM.to_string()],
        objects: synth::OBSTACLES.iter().map(|s| s.to_string()).collect(),
        phases: demos
            .set
            .phases()
            .iter()
            .map(|p| PhaseEntry { name: p.name.clone(), start: p.window.lo, end: p.window.hi })
            .collect(),
        kappa: Some(cfg.kappa),
        keep_per_pair: None,
        directions: None,
        margin: MarginEntry::default(),
    };
    let config_path = args.out_dir.join("learn.toml");
    let text = toml::to_string(&file).map_err(|e| CliError::Usage(e.to_string()))?;
    std::fs::write(&config_path, text).map_err(|e| CliError::io(&config_path, e))?;
    outputs.push(config_path);
    let planted: Vec<String> = demos
        .planted
        .iter()
        .map(|p| synth::planted_formula(p, cfg.horizon, cfg.kappa).to_string())
        .collect();
    let config = json!({ "demos": cfg.demos, "horizon": cfg.horizon, "kappa": cfg.kappa, "planted": planted });
    Manifest::new("synth-demos", cfg.seed, config, started).write(&args.out_dir, &[], &outputs)?;
    let mut report = format!("{} demonstrations ({} rejected) in {}\nplanted:\n", demos.set.len(), demos.rejected, args.out_dir.display());
    for p in planted {
        let _ = writeln!(report, "  {p}");
    }
    Ok(Output { status: Status::Satisfied, report })
}
