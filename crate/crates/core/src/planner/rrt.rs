//! Goal-biased RRT over (position, time) and counter tours built from it.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::dynamic::{piece_clear_of, Piece};
use super::{PlanError, PlannerParams, TimedNode, TimedPath};
use crate::geometry::{CounterKind, Layout, Point2};
use crate::recipe::{Agent, SubTask, Visit};

/// Outcome of one sampling draw.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Sample {
    Goal,
    Random(Point2),
}

/// Draws the goal with probability `goal_bias`, otherwise a uniform point in
/// the bounding box.
#[derive(Clone, Copy, Debug)]
pub struct GoalSampler {
    pub goal_bias: f64,
    pub lo: Point2,
    pub hi: Point2,
}

impl GoalSampler {
    pub fn for_layout(layout: &Layout, goal_bias: f64) -> Self {
        let (lo, hi) = layout.room.bounding_box();
        Self { goal_bias, lo, hi }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Sample {
        if rng.random::<f64>() < self.goal_bias {
            Sample::Goal
        } else {
            Sample::Random(Point2::new(
                self.lo.x + rng.random::<f64>() * (self.hi.x - self.lo.x),
                self.lo.y + rng.random::<f64>() * (self.hi.y - self.lo.y),
            ))
        }
    }
}

#[derive(Clone, Copy)]
struct TreeNode {
    node: TimedNode,
    parent: usize,
}

/// Plans from `start` to `goal`, avoiding counters, blocking walls and the
/// moving obstacles.
///
/// Goal samples extend the nearest node towards the goal until the first
/// invalid configuration; random samples add at most
/// `params.max_random_steps` steps. Every step advances time by its length
/// over `params.speed`. When only a moving obstacle blocks a goal extension
/// the agent may wait in place, one step duration at a time, up to
/// `params.max_wait_steps` times in total.
pub fn plan_single<R: Rng + ?Sized>(
    layout: &Layout,
    params: &PlannerParams,
    agent: Agent,
    start: TimedNode,
    goal: Point2,
    obstacles: &[TimedPath],
    rng: &mut R,
) -> Result<TimedPath, PlanError> {
    plan_single_holding(layout, params, agent, start, goal, 0.0, obstacles, rng)
}

/// [`plan_single`] where the agent must also be able to stay at the goal for
/// `hold` seconds after arriving.
#[allow(clippy::too_many_arguments)]
pub fn plan_single_holding<R: Rng + ?Sized>(
    layout: &Layout,
    params: &PlannerParams,
    agent: Agent,
    start: TimedNode,
    goal: Point2,
    hold: f64,
    obstacles: &[TimedPath],
    rng: &mut R,
) -> Result<TimedPath, PlanError> {
    let r = params.agent_radius;
    if !layout.point_clear(start.q, r) {
        return Err(PlanError::StartBlocked);
    }
    if !layout.point_clear(goal, r) {
        return Err(PlanError::GoalBlocked);
    }
    let tol = params.time_tolerance();
    let sep = params.min_separation();
    let dynamic_ok = |piece: &Piece| obstacles.iter().all(|o| piece_clear_of(piece, o, sep, tol));
    let holds = |at: TimedNode| dynamic_ok(&Piece::stationary(at.q, at.t, at.t + hold.max(0.0)));

    if start.q.distance(goal) <= 1e-12 && holds(start) {
        return Ok(TimedPath::new(agent, alloc::vec![start]));
    }

    let sampler = GoalSampler::for_layout(layout, params.goal_bias);
    let mut tree = Tree::new(sampler.lo, sampler.hi);
    tree.push(TreeNode { node: start, parent: usize::MAX });
    let mut waits = 0;
    for _ in 0..params.iteration_budget {
        let sample = sampler.sample(rng);
        let (target, max_steps) = match sample {
            Sample::Goal => (goal, usize::MAX),
            Sample::Random(p) => (p, params.max_random_steps),
        };
        let mut cur = tree.nearest(target);
        let mut steps = 0;
        while steps < max_steps {
            let from = tree.nodes[cur].node;
            let gap = from.q.distance(target);
            if gap <= 1e-12 {
                break;
            }
            let step = gap.min(params.step_length);
            let q = if step >= gap { target } else { from.q.lerp(target, step / gap) };
            let next = TimedNode::new(q, from.t + step / params.speed);
            if !layout.segment_clear(from.q, q, r) {
                break;
            }
            let at_goal = q.distance(goal) <= 1e-12;
            if !dynamic_ok(&Piece::new(from, next)) || at_goal && !holds(next) {
                // Blocked only by moving obstacles: on the way to the goal,
                // try letting them pass first.
                if sample != Sample::Goal || waits >= params.max_wait_steps {
                    break;
                }
                let stay = TimedNode::new(from.q, from.t + params.step_length / params.speed);
                if !dynamic_ok(&Piece::new(from, stay)) {
                    break;
                }
                tree.push(TreeNode { node: stay, parent: cur });
                cur = tree.nodes.len() - 1;
                waits += 1;
                continue;
            }
            tree.push(TreeNode { node: next, parent: cur });
            cur = tree.nodes.len() - 1;
            steps += 1;
            if at_goal {
                return Ok(extract(&tree.nodes, cur, agent));
            }
        }
    }
    Err(PlanError::BudgetExhausted)
}

/// Euclidean nearest node by position; among equals the latest, so that a
/// node that has been waiting is extended from the end of its wait.
fn nearest(tree: &[TreeNode], p: Point2) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, n) in tree.iter().enumerate() {
        let d = (n.node.q - p).norm_sq();
        if d <= best_d {
            best_d = d;
            best = i;
        }
    }
    best
}

/// Side of a bucket in the nearest-node grid, in metres.
const GRID_CELL: f64 = 0.5;

/// Tree nodes bucketed on a uniform grid over the room's bounding box.
/// Queries give the same answer as [`nearest`].
struct Tree {
    nodes: Vec<TreeNode>,
    lo: Point2,
    hi: Point2,
    nx: usize,
    ny: usize,
    buckets: Vec<Vec<usize>>,
    /// Set once a node lands outside the box, which breaks the ring bound.
    linear: bool,
}

impl Tree {
    fn new(lo: Point2, hi: Point2) -> Self {
        let nx = (((hi.x - lo.x) / GRID_CELL).ceil() as usize).max(1);
        let ny = (((hi.y - lo.y) / GRID_CELL).ceil() as usize).max(1);
        Self { nodes: Vec::new(), lo, hi, nx, ny, buckets: alloc::vec![Vec::new(); nx * ny], linear: false }
    }

    fn cell(&self, p: Point2) -> (usize, usize) {
        let cx = ((p.x - self.lo.x) / GRID_CELL).floor().max(0.0) as usize;
        let cy = ((p.y - self.lo.y) / GRID_CELL).floor().max(0.0) as usize;
        (cx.min(self.nx - 1), cy.min(self.ny - 1))
    }

    fn inside(&self, p: Point2) -> bool {
        p.x >= self.lo.x && p.x <= self.hi.x && p.y >= self.lo.y && p.y <= self.hi.y
    }

    fn push(&mut self, n: TreeNode) {
        let i = self.nodes.len();
        let (cx, cy) = self.cell(n.node.q);
        self.nodes.push(n);
        if self.inside(n.node.q) {
            self.buckets[cy * self.nx + cx].push(i);
        } else {
            self.linear = true;
        }
    }

    fn nearest(&self, p: Point2) -> usize {
        if self.linear || !self.inside(p) {
            return nearest(&self.nodes, p);
        }
        let (cx, cy) = self.cell(p);
        let (cx, cy) = (cx as isize, cy as isize);
        let mut best = (0, f64::INFINITY);
        for r in 0..=self.nx.max(self.ny) as isize {
            if r > 0 && best.1.is_finite() {
                // Ring r lies outside the block of cells within r - 1 of the
                // center cell.
                let x0 = self.lo.x + (cx - r + 1) as f64 * GRID_CELL;
                let y0 = self.lo.y + (cy - r + 1) as f64 * GRID_CELL;
                let x1 = self.lo.x + (cx + r) as f64 * GRID_CELL;
                let y1 = self.lo.y + (cy + r) as f64 * GRID_CELL;
                let gap = (p.x - x0).min(x1 - p.x).min(p.y - y0).min(y1 - p.y) - 1e-9;
                if gap > 0.0 && gap * gap > best.1 {
                    break;
                }
            }
            if r == 0 {
                self.scan(cx, cy, p, &mut best);
                continue;
            }
            for x in cx - r..=cx + r {
                self.scan(x, cy - r, p, &mut best);
                self.scan(x, cy + r, p, &mut best);
            }
            for y in cy - r + 1..cy + r {
                self.scan(cx - r, y, p, &mut best);
                self.scan(cx + r, y, p, &mut best);
            }
        }
        best.0
    }

    fn scan(&self, x: isize, y: isize, p: Point2, best: &mut (usize, f64)) {
        if x < 0 || y < 0 || x >= self.nx as isize || y >= self.ny as isize {
            return;
        }
        for &i in &self.buckets[y as usize * self.nx + x as usize] {
            let d = (self.nodes[i].node.q - p).norm_sq();
            if d < best.1 || (d == best.1 && i > best.0) {
                *best = (i, d);
            }
        }
    }
}

fn extract(tree: &[TreeNode], mut i: usize, agent: Agent) -> TimedPath {
    let mut nodes = Vec::new();
    while i != usize::MAX {
        nodes.push(tree[i].node);
        i = tree[i].parent;
    }
    nodes.reverse();
    TimedPath::new(agent, nodes)
}

/// When an agent was at a counter during a tour.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VisitRecord {
    pub counter: CounterKind,
    pub position: Point2,
    pub arrive: f64,
    pub depart: f64,
}

/// A planned sub-task: the timed path through its service configurations,
/// dwell included.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tour {
    pub path: TimedPath,
    pub visits: Vec<VisitRecord>,
}

impl Tour {
    pub fn end_time(&self) -> f64 {
        self.path.end_time().unwrap_or(0.0)
    }
}

/// Visits the sub-task's counters in order, one planned segment per leg,
/// holding at each service configuration for the visit's dwell.
pub fn plan_tour<R: Rng + ?Sized>(
    layout: &Layout,
    params: &PlannerParams,
    agent: Agent,
    task: &SubTask,
    start: TimedNode,
    obstacles: &[TimedPath],
    rng: &mut R,
) -> Result<Tour, PlanError> {
    plan_visits(layout, params, agent, &task.visits, start, obstacles, rng)
}

pub(crate) fn plan_visits<R: Rng + ?Sized>(
    layout: &Layout,
    params: &PlannerParams,
    agent: Agent,
    visits: &[Visit],
    start: TimedNode,
    obstacles: &[TimedPath],
    rng: &mut R,
) -> Result<Tour, PlanError> {
    let mut goals = Vec::with_capacity(visits.len());
    for v in visits {
        let idx = layout.counter_of_kind(v.counter).ok_or(PlanError::MissingCounter(v.counter))?;
        let pose = layout
            .service_configuration(idx, params.agent_radius, params.standoff)
            .map_err(|_| PlanError::Unreachable(v.counter))?;
        goals.push(pose.position);
    }
    let mut nodes = alloc::vec![start];
    let mut records = Vec::with_capacity(visits.len());
    for (v, goal) in visits.iter().zip(goals) {
        let from = *nodes.last().expect("tour starts with the start node");
        let leg = plan_single_holding(layout, params, agent, from, goal, v.dwell, obstacles, rng)?;
        nodes.extend_from_slice(&leg.nodes[1..]);
        let arrive = nodes.last().expect("non-empty").t;
        if v.dwell > 0.0 {
            nodes.push(TimedNode::new(goal, arrive + v.dwell));
        }
        records.push(VisitRecord { counter: v.counter, position: goal, arrive, depart: arrive + v.dwell });
    }
    Ok(Tour { path: TimedPath::new(agent, nodes), visits: records })
}
