//! Seeded anneal runs fanned out over threads, merged into one report.

use std::path::{Path, PathBuf};
use std::time::Instant;

use kitchen_core::cost::total_path_cost;
use kitchen_core::optimizer::{AnnealError, Scored};
use kitchen_core::planner::Policy;
use kitchen_core::{anneal, AnnealConfig, AnnealResult, CostVector, Mode, ParetoSet, Problem, Solution};
use rayon::prelude::*;
use thiserror::Error;

use crate::config::{ConfigError, ProblemConfig, RoomVariant};
use crate::report::{RunMetadata, RunRecord, RunReport, SolutionRecord};
use crate::svg;
use crate::verify::{verify_solution, VerifyError};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("seed {seed}: {source}")]
    Anneal { seed: u64, source: AnnealError },
    #[error("no run produced a verified solution:\n{}", .0.join("\n"))]
    NoSolution(Vec<String>),
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

/// Command-line overrides of the configured run.
#[derive(Clone, Debug, PartialEq)]
pub struct Overrides {
    pub seed: u64,
    pub runs: usize,
    pub mode: Option<Mode>,
    pub room: RoomVariant,
    pub iterations: Option<usize>,
    pub always_infer: bool,
    pub timing: bool,
}

impl Default for Overrides {
    fn default() -> Self {
        Self { seed: 0, runs: 1, mode: None, room: RoomVariant::Regular, iterations: None, always_infer: false, timing: false }
    }
}

impl Overrides {
    pub fn seeds(&self) -> Vec<u64> {
        (0..self.runs as u64).map(|k| self.seed.wrapping_add(k)).collect()
    }

    pub fn apply(&self, config: &ProblemConfig) -> ProblemConfig {
        let mut c = config.clone();
        if let Some(mode) = self.mode {
            c.anneal.mode = mode;
        }
        if let Some(n) = self.iterations {
            c.anneal.iterations = n;
        }
        if self.always_infer {
            c.policy = Policy::AlwaysInfer;
        }
        c
    }
}

/// One finished anneal run.
#[derive(Clone, Debug)]
pub struct SeedRun {
    pub seed: u64,
    pub problem: Problem,
    pub result: AnnealResult,
}

impl SeedRun {
    /// Pareto members that pass verification, in archive order.
    pub fn verified(&self) -> (Vec<&Solution>, Vec<(usize, VerifyError)>) {
        let mut ok = Vec::new();
        let mut bad = Vec::new();
        for (i, s) in self.result.pareto.members().iter().enumerate() {
            match verify_solution(&self.problem, s) {
                Ok(()) => ok.push(s),
                Err(e) => bad.push((i, e)),
            }
        }
        (ok, bad)
    }

    /// Member with the smallest weighted path cost.
    pub fn best_path(&self) -> Option<&Solution> {
        let w = self.problem.costs.weights;
        self.result.pareto.min_by(|s| total_path_cost(&s.costs, &w))
    }
}

pub fn run_seed(config: &ProblemConfig, room: RoomVariant, seed: u64) -> Result<SeedRun, ExperimentError> {
    let problem = config.problem(room, seed)?;
    let anneal_config = AnnealConfig { seed, ..config.anneal };
    let result = anneal(&anneal_config, &problem).map_err(|source| ExperimentError::Anneal { seed, source })?;
    Ok(SeedRun { seed, problem, result })
}

/// Runs every seed in parallel; results come back in seed order.
pub fn run_seeds(config: &ProblemConfig, room: RoomVariant, seeds: &[u64]) -> Vec<Result<SeedRun, ExperimentError>> {
    seeds.par_iter().map(|&seed| run_seed(config, room, seed)).collect()
}

struct Tagged {
    seed: u64,
    solution: Solution,
}

impl Scored for Tagged {
    fn costs(&self) -> &CostVector {
        &self.solution.costs
    }
}

pub fn run_experiment(config: &ProblemConfig, o: &Overrides) -> Result<RunReport, ExperimentError> {
    let started = Instant::now();
    let config = o.apply(config);
    let seeds = o.seeds();
    let results = run_seeds(&config, o.room, &seeds);

    let mut merged: ParetoSet<Tagged> = ParetoSet::new(config.costs.weights);
    let mut runs = Vec::new();
    let mut diagnostics = Vec::new();
    for r in results {
        let run = match r {
            Ok(run) => run,
            Err(e) => {
                diagnostics.push(e.to_string());
                continue;
            }
        };
        let (ok, bad) = run.verified();
        for (i, e) in &bad {
            diagnostics.push(format!("seed {}: Pareto member {i} rejected: {e}", run.seed));
        }
        if ok.is_empty() {
            diagnostics.push(format!(
                "seed {}: no successful simulation ({} of {} failed)",
                run.seed, run.result.stats.failed_simulations, run.result.stats.simulations
            ));
        }
        for s in &ok {
            merged.insert(Tagged { seed: run.seed, solution: (*s).clone() });
        }
        let w = run.problem.costs.weights;
        runs.push(RunRecord {
            seed: run.seed,
            initial_total_cost: run.result.initial.total_cost,
            initial_success: run.result.initial.outcome.success,
            best_total_cost: ok.iter().map(|s| s.total_cost).min_by(f64::total_cmp),
            best_path_cost: ok.iter().map(|s| total_path_cost(&s.costs, &w)).min_by(f64::total_cmp),
            pareto_size: run.result.pareto.len(),
            rejected: bad.len(),
            stats: run.result.stats,
            final_temperature: run.result.final_temperature,
        });
    }
    if merged.is_empty() {
        return Err(ExperimentError::NoSolution(diagnostics));
    }
    let solutions =
        merged.into_members().into_iter().map(|t| SolutionRecord::new(t.seed, &t.solution, &config.costs)).collect();
    Ok(RunReport {
        metadata: RunMetadata {
            seeds,
            mode: config.anneal.mode,
            room: o.room,
            iterations: config.anneal.iterations,
            policy: config.policy,
            wall_clock_seconds: o.timing.then(|| started.elapsed().as_secs_f64()),
        },
        runs,
        solutions,
    })
}

/// Writes `report.json` and, when `render` is set, one SVG per solution.
/// Returns the paths written.
pub fn write_outputs(report: &RunReport, dir: &Path, render: bool) -> Result<Vec<PathBuf>, ExperimentError> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| ExperimentError::Io { path, source }
    };
    std::fs::create_dir_all(dir).map_err(io(dir))?;
    let mut written = Vec::new();
    let path = dir.join("report.json");
    std::fs::write(&path, report.to_json()).map_err(io(&path))?;
    written.push(path);
    if render {
        for (k, rec) in report.solutions.iter().enumerate() {
            let path = dir.join(format!("solution-{k}.svg"));
            std::fs::write(&path, svg::render_solution(&rec.solution)).map_err(io(&path))?;
            written.push(path);
        }
    }
    Ok(written)
}
