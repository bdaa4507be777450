//! Alternating simulated annealing over layouts and task/path plans.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::pareto::ParetoSet;
use crate::cost::{layout_cost, CostModel, CostVector, Solution};
use crate::geometry::{Counter, Layout, Point2, QuarterTurn, Room, Violation};
use crate::planner::{simulate, SimConfig, SimOutcome};
use crate::recipe::SubTask;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    /// Layout and path stages alternate under one schedule.
    #[default]
    Together,
    /// Layout first, then paths on the frozen layout.
    Separate,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnnealConfig {
    pub t0: f64,
    /// Temperature factor per iteration.
    pub cooling: f64,
    pub iterations: usize,
    /// Iterations per stage before switching between layout and path moves.
    pub stage_length: usize,
    pub mode: Mode,
    /// Layout cost below which the separate mode starts its path phase.
    pub layout_threshold: f64,
    pub seed: u64,
    /// Standard deviation of a counter displacement at temperature 1, in metres.
    pub step_scale: f64,
    pub swap_probability: f64,
    /// Proposals tried before a layout move is skipped.
    pub max_resamples: usize,
    /// Re-simulate after every layout move instead of reusing valid paths.
    pub resimulate_layout_moves: bool,
}

impl Default for AnnealConfig {
    fn default() -> Self {
        Self {
            t0: 1.0,
            cooling: 0.995,
            iterations: 2_000,
            stage_length: 10,
            mode: Mode::Together,
            layout_threshold: 0.1,
            seed: 0,
            step_scale: 1.0,
            swap_probability: 0.5,
            max_resamples: 20,
            resimulate_layout_moves: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error, Serialize, Deserialize)]
pub enum AnnealError {
    #[error("temperature must be positive, got {0}")]
    Temperature(f64),
    #[error("cooling factor must be in (0, 1], got {0}")]
    Cooling(f64),
    #[error("stage length must be at least 1")]
    StageLength,
    #[error("layout is invalid: {0:?}")]
    InvalidLayout(Vec<Violation>),
    #[error("no valid initial layout found")]
    NoInitialLayout,
}

impl AnnealConfig {
    pub fn validate(&self) -> Result<(), AnnealError> {
        if !(self.t0 > 0.0) {
            return Err(AnnealError::Temperature(self.t0));
        }
        if !(self.cooling > 0.0 && self.cooling <= 1.0) {
            return Err(AnnealError::Cooling(self.cooling));
        }
        if self.stage_length == 0 {
            return Err(AnnealError::StageLength);
        }
        Ok(())
    }
}

/// Boltzmann-style score of a cost at temperature `t`.
pub fn objective(total_cost: f64, t: f64) -> Result<f64, AnnealError> {
    if !(t > 0.0) {
        return Err(AnnealError::Temperature(t));
    }
    Ok((-total_cost / t).exp())
}

/// Metropolis rule on objective values: accept with probability
/// `min(1, f_new / f_old)`.
pub fn accept<R: Rng + ?Sized>(f_old: f64, f_new: f64, rng: &mut R) -> bool {
    let ratio = f_new / f_old;
    ratio >= 1.0 || rng.random::<f64>() < ratio
}

/// [`accept`] written on the cost change, which stays finite where the
/// objective values themselves underflow.
pub fn accept_delta<R: Rng + ?Sized>(delta: f64, t: f64, rng: &mut R) -> bool {
    delta <= 0.0 || rng.random::<f64>() < (-delta / t).exp()
}

/// Everything an annealing run works on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Problem {
    pub initial: Layout,
    pub tasks: Vec<SubTask>,
    pub sim: SimConfig,
    pub costs: CostModel,
}

impl Problem {
    pub fn admissible(&self, layout: &Layout) -> bool {
        admissible(layout, &self.sim)
    }

    fn solution<R: Rng + ?Sized>(&self, layout: Layout, rng: &mut R) -> Solution {
        let outcome = simulate(&layout, &self.tasks, &self.sim, &mut ChaCha8Rng::seed_from_u64(rng.random()));
        Solution::new(layout, outcome, &self.costs, self.sim.params.speed)
    }

    fn rescore(&self, layout: Layout, outcome: SimOutcome) -> Solution {
        Solution::new(layout, outcome, &self.costs, self.sim.params.speed)
    }
}

/// Layout rules plus clear spawn points.
pub fn admissible(layout: &Layout, sim: &SimConfig) -> bool {
    let r = sim.params.agent_radius;
    layout.is_valid() && layout.point_clear(sim.spawn_human, r) && layout.point_clear(sim.spawn_robot, r)
}

/// A fresh simulation in `layout` on a new random stream.
pub fn propose_path_move<R: Rng + ?Sized>(
    layout: &Layout,
    tasks: &[SubTask],
    sim: &SimConfig,
    rng: &mut R,
) -> Result<SimOutcome, AnnealError> {
    let violations = layout.validate();
    if !violations.is_empty() {
        return Err(AnnealError::InvalidLayout(violations));
    }
    Ok(simulate(layout, tasks, sim, &mut ChaCha8Rng::seed_from_u64(rng.random())))
}

/// One layout move: either displace one counter by a Gaussian step of
/// standard deviation `step_scale * t` and give it a random quarter-turn, or
/// swap the poses of two counters. Proposals failing `admissible` are
/// redrawn; `None` when every try fails.
pub fn propose_layout_move<R: Rng + ?Sized>(
    layout: &Layout,
    t: f64,
    config: &AnnealConfig,
    admissible: impl Fn(&Layout) -> bool,
    rng: &mut R,
) -> Option<Layout> {
    let n = layout.counters.len();
    if n == 0 {
        return None;
    }
    let sigma = config.step_scale * t;
    let normal = Normal::new(0.0, sigma).ok();
    for _ in 0..config.max_resamples.max(1) {
        let mut next = layout.clone();
        if n >= 2 && rng.random_bool(config.swap_probability.clamp(0.0, 1.0)) {
            let i = rng.random_range(0..n);
            let mut j = rng.random_range(0..n - 1);
            if j >= i {
                j += 1;
            }
            swap_poses(&mut next.counters, i, j);
        } else {
            let i = rng.random_range(0..n);
            let c = &mut next.counters[i];
            if let Some(normal) = normal {
                c.position = c.position + Point2::new(normal.sample(rng), normal.sample(rng));
            }
            c.orientation = QuarterTurn::from_steps(rng.random_range(0..4));
        }
        if admissible(&next) {
            return Some(next);
        }
    }
    None
}

fn swap_poses(counters: &mut [Counter], i: usize, j: usize) {
    let (pi, oi) = (counters[i].position, counters[i].orientation);
    counters[i].position = counters[j].position;
    counters[i].orientation = counters[j].orientation;
    counters[j].position = pi;
    counters[j].orientation = oi;
}

/// Places the counters one by one at random spots along the boundary, backs
/// flush against the wall and facing into the room. Each placement must keep
/// the layout admissible and every service pose so far clear.
pub fn initial_layout<R: Rng + ?Sized>(
    room: &Room,
    inventory: &[Counter],
    sim: &SimConfig,
    rng: &mut R,
) -> Option<Layout> {
    let edges: Vec<_> = room.boundary_edges().collect();
    let total: f64 = edges.iter().map(|e| e.length()).sum();
    let p = &sim.params;
    for _ in 0..100 {
        let mut layout = Layout::new(room.clone(), Vec::new());
        let mut ok = true;
        for proto in inventory {
            let mut placed = false;
            for _ in 0..200 {
                let mut s = rng.random::<f64>() * total;
                let edge = edges
                    .iter()
                    .find(|e| {
                        let l = e.length();
                        if s <= l {
                            true
                        } else {
                            s -= l;
                            false
                        }
                    })
                    .unwrap_or(&edges[edges.len() - 1]);
                let on = edge.a.lerp(edge.b, (s / edge.length()).clamp(0.0, 1.0));
                let facing = QuarterTurn::snap((edge.b - edge.a).perp());
                let mut c = proto.clone();
                c.orientation = facing;
                c.position = on + facing.direction() * (0.5 * c.depth);
                layout.counters.push(c);
                let serviceable = (0..layout.counters.len())
                    .all(|i| layout.service_configuration(i, p.agent_radius, p.standoff).is_ok());
                if serviceable && admissible(&layout, sim) {
                    placed = true;
                    break;
                }
                layout.counters.pop();
            }
            if !placed {
                ok = false;
                break;
            }
        }
        if ok {
            return Some(layout);
        }
    }
    None
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnealStats {
    pub proposals: usize,
    pub accepted: usize,
    /// Accepted proposals that raised the cost.
    pub uphill_accepted: usize,
    pub skipped_layout_moves: usize,
    pub simulations: usize,
    pub failed_simulations: usize,
    /// Iteration at which the separate mode switched to path moves.
    pub phase_switch: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnealResult {
    pub pareto: ParetoSet<Solution>,
    /// The starting state, evaluated with a full simulation.
    pub initial: Solution,
    /// State held when the schedule ended.
    pub last: Solution,
    pub stats: AnnealStats,
    pub final_temperature: f64,
}

impl AnnealResult {
    pub fn best(&self) -> Option<&Solution> {
        self.pareto.best_total()
    }
}

/// Whether a stored simulation is still valid after a layout change: every
/// visited counter keeps its service pose and every path stays clear.
fn paths_still_valid(problem: &Problem, before: &Layout, after: &Layout, outcome: &SimOutcome) -> bool {
    if !outcome.success {
        return false;
    }
    let p = &problem.sim.params;
    let pose = |l: &Layout, i: usize| l.service_configuration(i, p.agent_radius, p.standoff).ok();
    for (i, c) in before.counters.iter().enumerate() {
        let visited = outcome.segments.iter().any(|s| s.visits.iter().any(|v| v.counter == c.kind));
        if visited && pose(before, i) != pose(after, i) {
            return false;
        }
    }
    [&outcome.human, &outcome.robot].iter().all(|path| {
        path.nodes.windows(2).all(|w| after.segment_clear(w[0].q, w[1].q, p.agent_radius))
            && path.nodes.iter().all(|n| after.point_clear(n.q, p.agent_radius))
    })
}

/// Runs the schedule from `problem.initial`.
pub fn anneal(config: &AnnealConfig, problem: &Problem) -> Result<AnnealResult, AnnealError> {
    config.validate()?;
    let violations = problem.initial.validate();
    if !violations.is_empty() {
        return Err(AnnealError::InvalidLayout(violations));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut stats = AnnealStats::default();
    let mut pareto = ParetoSet::new(problem.costs.weights);
    let weights = problem.costs.weights;

    let initial = problem.solution(problem.initial.clone(), &mut rng);
    stats.simulations += 1;
    stats.failed_simulations += usize::from(!initial.outcome.success);
    if initial.outcome.success {
        pareto.insert(initial.clone());
    }

    let mut current = initial.clone();
    let mut t = config.t0;
    // Separate mode starts on layout cost alone.
    let mut layout_phase = config.mode == Mode::Separate;
    let layout_only = |c: &CostVector| layout_cost(c, &weights);

    for it in 0..config.iterations {
        if layout_phase
            && (layout_only(&current.costs) < config.layout_threshold || it >= config.iterations / 2)
        {
            layout_phase = false;
            stats.phase_switch = Some(it);
            // Paths have not been looked at since the start; refresh them.
            current = problem.solution(current.layout.clone(), &mut rng);
            stats.simulations += 1;
            stats.failed_simulations += usize::from(!current.outcome.success);
            if current.outcome.success {
                pareto.insert(current.clone());
            }
        }
        let layout_stage = match config.mode {
            Mode::Together => (it / config.stage_length).is_multiple_of(2),
            Mode::Separate => layout_phase,
        };
        stats.proposals += 1;
        let candidate = if layout_stage {
            let Some(layout) =
                propose_layout_move(&current.layout, t, config, |l| problem.admissible(l), &mut rng)
            else {
                stats.skipped_layout_moves += 1;
                t *= config.cooling;
                continue;
            };
            if layout_phase {
                // Paths are ignored until the path phase.
                problem.rescore(layout, current.outcome.clone())
            } else if !config.resimulate_layout_moves
                && paths_still_valid(problem, &current.layout, &layout, &current.outcome)
            {
                problem.rescore(layout, current.outcome.clone())
            } else {
                stats.simulations += 1;
                let s = problem.solution(layout, &mut rng);
                stats.failed_simulations += usize::from(!s.outcome.success);
                s
            }
        } else {
            stats.simulations += 1;
            let s = problem.solution(current.layout.clone(), &mut rng);
            stats.failed_simulations += usize::from(!s.outcome.success);
            s
        };
        let delta = if layout_phase {
            layout_only(&candidate.costs) - layout_only(&current.costs)
        } else {
            candidate.total_cost - current.total_cost
        };
        if accept_delta(delta, t, &mut rng) {
            stats.accepted += 1;
            stats.uphill_accepted += usize::from(delta > 0.0);
            current = candidate;
            if !layout_phase && current.outcome.success {
                pareto.insert(current.clone());
            }
        }
        t *= config.cooling;
    }
    Ok(AnnealResult { pareto, initial, last: current, stats, final_temperature: t })
}
