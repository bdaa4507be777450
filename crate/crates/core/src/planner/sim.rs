//! Discrete-event simulation of the human and the robot sharing a kitchen.
//!
//! Agents act in order of their clocks. Whenever one commits new motion the
//! pair is checked for conflicts; the human never yields, so the robot pauses
//! at the current time and re-plans the rest of its work around the human's
//! known trajectory and a predicted continuation of it.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::belief::{belief_init, belief_update, parked, virtual_human_path, Belief};
use super::dynamic::first_conflict;
use super::rrt::{plan_single_holding, plan_visits, VisitRecord};
use super::{PlanError, PlannerParams, TimedNode, TimedPath};
use crate::geometry::{Layout, Point2};
use crate::recipe::{Agent, SubTask, TaskPool, Visit};

/// When the robot consults the predicted human path.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Policy {
    /// Plan directly; predict the human only after a conflict.
    #[default]
    DirectThenReactive,
    /// Always plan around the predicted human path.
    AlwaysInfer,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    pub params: PlannerParams,
    pub spawn_human: Point2,
    pub spawn_robot: Point2,
    pub policy: Policy,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            params: PlannerParams::default(),
            spawn_human: Point2::new(3.5, 1.5),
            spawn_robot: Point2::new(4.5, 1.5),
            policy: Policy::default(),
        }
    }
}

impl SimConfig {
    /// Spawns near the south wall of a room whose bounding box starts at the
    /// origin and is `width` wide.
    pub fn with_south_spawns(width: f64) -> Self {
        Self {
            spawn_human: Point2::new(0.5 * width - 0.5, 1.5),
            spawn_robot: Point2::new(0.5 * width + 0.5, 1.5),
            ..Self::default()
        }
    }
}

/// One sub-task as executed by one agent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabeledSegment {
    pub agent: Agent,
    pub sub_task: String,
    pub dish: String,
    pub path: TimedPath,
    pub visits: Vec<VisitRecord>,
    /// Seed of the tour's first planning attempt.
    pub plan_seed: u64,
    pub replans: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum SimFailure {
    Planning { agent: Agent, sub_task: Option<String>, error: PlanError },
    UnavoidableCollision { time: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimOutcome {
    pub success: bool,
    /// Completed sub-tasks in completion order.
    pub segments: Vec<LabeledSegment>,
    /// Full human trajectory, waits included.
    pub human: TimedPath,
    pub robot: TimedPath,
    /// Completion time of each dish's last sub-task.
    pub finish_times: BTreeMap<String, f64>,
    pub failure: Option<SimFailure>,
    pub replan_count: usize,
}

impl SimOutcome {
    pub fn segments_of(&self, agent: Agent) -> impl Iterator<Item = &LabeledSegment> + '_ {
        self.segments.iter().filter(move |s| s.agent == agent)
    }
}

struct Active {
    task: SubTask,
    start_idx: usize,
    visits: Vec<VisitRecord>,
    /// Visits not planned yet because the robot stepped aside.
    pending: Vec<Visit>,
    seed: u64,
    replans: usize,
}

struct AgentSim {
    traj: Vec<TimedNode>,
    active: Option<Active>,
    waiting: bool,
    idle: bool,
}

impl AgentSim {
    fn new(at: Point2) -> Self {
        Self { traj: alloc::vec![TimedNode::new(at, 0.0)], active: None, waiting: false, idle: false }
    }

    fn node(&self) -> TimedNode {
        *self.traj.last().expect("trajectories are never empty")
    }

    fn clock(&self) -> f64 {
        self.node().t
    }

    fn has_pending(&self) -> bool {
        self.active.as_ref().is_some_and(|a| !a.pending.is_empty())
    }
}

/// What the robot still has to do after a pause.
enum Rest {
    Visits(Vec<Visit>),
    HoldUntil(f64),
}

/// Upper bound on scheduling events, so a pathological layout cannot spin.
const MAX_EVENTS: usize = 10_000;

/// Shortest time the robot stays aside when it yields.
const MIN_YIELD: f64 = 1.0;

struct Sim<'a, R: Rng + ?Sized> {
    layout: &'a Layout,
    config: &'a SimConfig,
    pool: TaskPool,
    rng: &'a mut R,
    human: AgentSim,
    robot: AgentSim,
    belief: Belief,
    segments: Vec<LabeledSegment>,
    finish_times: BTreeMap<String, f64>,
    replan_count: usize,
}

/// Runs both agents until every sub-task is done or something fails.
pub fn simulate<R: Rng + ?Sized>(layout: &Layout, tasks: &[SubTask], config: &SimConfig, rng: &mut R) -> SimOutcome {
    let pool = TaskPool::new(tasks.to_vec());
    let belief = belief_init(&pool);
    let mut sim = Sim {
        layout,
        config,
        pool,
        rng,
        human: AgentSim::new(config.spawn_human),
        robot: AgentSim::new(config.spawn_robot),
        belief,
        segments: Vec::new(),
        finish_times: BTreeMap::new(),
        replan_count: 0,
    };
    let failure = sim.run().err();
    let success = failure.is_none() && sim.pool.is_done();
    SimOutcome {
        success,
        segments: sim.segments,
        human: TimedPath::new(Agent::Human, sim.human.traj),
        robot: TimedPath::new(Agent::Robot, sim.robot.traj),
        finish_times: sim.finish_times,
        failure,
        replan_count: sim.replan_count,
    }
}

fn tail(traj: &[TimedNode], from: f64) -> &[TimedNode] {
    let i = traj.partition_point(|n| n.t < from).saturating_sub(1);
    &traj[i..]
}

impl<R: Rng + ?Sized> Sim<'_, R> {
    fn params(&self) -> &PlannerParams {
        &self.config.params
    }

    fn agent(&mut self, a: Agent) -> &mut AgentSim {
        match a {
            Agent::Human => &mut self.human,
            Agent::Robot => &mut self.robot,
        }
    }

    fn next_agent(&self) -> Option<Agent> {
        let key = |s: &AgentSim| (s.clock(), s.active.is_none());
        match (self.human.idle, self.robot.idle) {
            (true, true) => None,
            (false, true) => Some(Agent::Human),
            (true, false) => Some(Agent::Robot),
            (false, false) => {
                let (h, r) = (key(&self.human), key(&self.robot));
                // Earlier clock first; at equal clocks an agent with work in
                // hand goes before one that is waiting, then the human.
                if r.0 < h.0 || (r.0 == h.0 && h.1 && !r.1) {
                    Some(Agent::Robot)
                } else {
                    Some(Agent::Human)
                }
            }
        }
    }

    fn run(&mut self) -> Result<(), SimFailure> {
        let mut events = 0;
        while let Some(a) = self.next_agent() {
            events += 1;
            if events > MAX_EVENTS {
                let now = self.agent(a).clock();
                return Err(SimFailure::UnavoidableCollision { time: now });
            }
            if self.agent(a).has_pending() {
                self.resume(a)?;
                continue;
            }
            self.finish_active(a);
            self.agent(a).waiting = false;
            match self.pool.next_sub_task(a, &mut *self.rng) {
                Some(task) => self.start_task(a, task)?,
                None => {
                    let other = match a {
                        Agent::Human => &self.robot,
                        Agent::Robot => &self.human,
                    };
                    if self.pool.unclaimed_remaining() > 0 && other.active.is_some() {
                        let until = other.clock();
                        self.wait(a, until)?;
                    } else {
                        self.agent(a).idle = true;
                    }
                }
            }
        }
        Ok(())
    }

    fn finish_active(&mut self, a: Agent) {
        let Some(active) = self.agent(a).active.take() else { return };
        let state = self.agent(a);
        let end = state.clock();
        let path = TimedPath::new(a, state.traj[active.start_idx..].to_vec());
        self.pool.complete(&active.task.id).expect("active sub-tasks are claimed");
        let finish = self.finish_times.entry(active.task.dish.clone()).or_insert(end);
        *finish = finish.max(end);
        if let Ok(b) = belief_update(&self.belief, &active.task.id) {
            self.belief = b;
        }
        self.segments.push(LabeledSegment {
            agent: a,
            sub_task: active.task.id,
            dish: active.task.dish,
            path,
            visits: active.visits,
            plan_seed: active.seed,
            replans: active.replans,
        });
    }

    fn plan_from_here(&mut self, a: Agent, visits: &[Visit], seed: u64) -> Result<Vec<TimedNode>, PlanError> {
        let start = self.agent(a).node();
        let obstacles = match (a, self.config.policy) {
            (Agent::Robot, Policy::AlwaysInfer) => self.human_obstacles(),
            _ => Vec::new(),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tour = plan_visits(self.layout, self.params(), a, visits, start, &obstacles, &mut rng)?;
        let state = self.agent(a);
        state.traj.extend_from_slice(&tour.path.nodes[1..]);
        if let Some(active) = &mut state.active {
            active.visits.extend(tour.visits);
        }
        Ok(tour.path.nodes)
    }

    fn start_task(&mut self, a: Agent, task: SubTask) -> Result<(), SimFailure> {
        let now = self.agent(a).clock();
        let seed = self.rng.random::<u64>();
        let visits = task.visits.clone();
        let id = task.id.clone();
        let start_idx = self.agent(a).traj.len() - 1;
        self.agent(a).active =
            Some(Active { task, start_idx, visits: Vec::new(), pending: Vec::new(), seed, replans: 0 });
        self.plan_from_here(a, &visits, seed)
            .map_err(|error| SimFailure::Planning { agent: a, sub_task: Some(id), error })?;
        self.after_commit(now)
    }

    /// Plans the visits left over from an earlier yield.
    fn resume(&mut self, a: Agent) -> Result<(), SimFailure> {
        let now = self.agent(a).clock();
        let seed = self.rng.random::<u64>();
        let active = self.agent(a).active.as_mut().expect("pending work implies an active task");
        let visits = core::mem::take(&mut active.pending);
        let id = active.task.id.clone();
        self.plan_from_here(a, &visits, seed)
            .map_err(|error| SimFailure::Planning { agent: a, sub_task: Some(id), error })?;
        self.after_commit(now)
    }

    fn wait(&mut self, a: Agent, until: f64) -> Result<(), SimFailure> {
        let state = self.agent(a);
        let here = state.node();
        state.waiting = true;
        if until > here.t {
            state.traj.push(TimedNode::new(here.q, until));
            return self.after_commit(here.t);
        }
        Ok(())
    }

    /// Re-checks the pair after new motion starting at `now` and repairs the
    /// robot's plan if needed.
    fn after_commit(&mut self, now: f64) -> Result<(), SimFailure> {
        match self.robot_conflict(now) {
            None => Ok(()),
            Some(_) => self.repair_robot(now),
        }
    }

    fn robot_conflict(&self, from: f64) -> Option<f64> {
        let p = self.params();
        let from = from - p.time_tolerance();
        let robot = TimedPath::new(Agent::Robot, tail(&self.robot.traj, from).to_vec());
        let human = TimedPath::new(Agent::Human, tail(&self.human.traj, from).to_vec());
        first_conflict(&robot, &human, p.min_separation(), p.time_tolerance())
    }

    /// The human's known trajectory plus its predicted next tour.
    fn human_obstacles(&mut self) -> Vec<TimedPath> {
        let mut out = alloc::vec![TimedPath::new(Agent::Human, self.human.traj.clone())];
        if self.human.idle {
            return out;
        }
        let claimable: Vec<String> = self.pool.claimable().map(|s| s.id.clone()).collect();
        let live = self.belief.probs.iter().any(|(id, &p)| p > 0.0 && claimable.contains(id));
        if !live {
            self.belief = belief_init(&self.pool);
        }
        let at = self.human.node();
        let seed = self.rng.random::<u64>();
        let predicted = virtual_human_path(
            self.layout,
            self.params(),
            &self.belief,
            self.pool.all(),
            at,
            &mut ChaCha8Rng::seed_from_u64(seed),
        )
        .unwrap_or_else(|_| parked(at));
        out.push(predicted);
        out
    }

    /// Pauses the robot at `now` and re-plans what it still has to do. Each
    /// attempt first tries to carry on with its visits; failing that, the
    /// robot steps aside until the human's known trajectory runs out and
    /// plans the remaining visits then.
    fn repair_robot(&mut self, now: f64) -> Result<(), SimFailure> {
        let collision = |t: f64| SimFailure::UnavoidableCollision { time: t };
        let rest = if let Some(active) = &mut self.robot.active {
            let k = active.visits.iter().position(|v| v.depart > now);
            let mut rest = match k {
                Some(k) => {
                    active.visits.truncate(k);
                    active.task.visits[k..].to_vec()
                }
                None => Vec::new(),
            };
            rest.append(&mut active.pending);
            // An interrupted dwell is redone in full later.
            pause_at(&mut self.robot.traj, now);
            if rest.is_empty() {
                Rest::HoldUntil(now)
            } else {
                Rest::Visits(rest)
            }
        } else if self.robot.waiting {
            let until = self.robot.clock();
            pause_at(&mut self.robot.traj, now);
            Rest::HoldUntil(until)
        } else {
            return Err(collision(self.robot_conflict(now).unwrap_or(now)));
        };
        if let Some(t) = self.robot_conflict(now) {
            return Err(collision(t));
        }
        let pause = self.robot.node();
        let obstacles = self.human_obstacles();
        let step_aside_until = match &rest {
            Rest::Visits(_) => self.human.clock().max(now + MIN_YIELD),
            Rest::HoldUntil(until) => until.max(now),
        };
        let mut last = now;
        for _ in 0..self.params().max_replans {
            self.replan_count += 1;
            let seed = self.rng.random::<u64>();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut candidates = Vec::new();
            if let Rest::Visits(visits) = &rest {
                if let Ok(t) = plan_visits(self.layout, self.params(), Agent::Robot, visits, pause, &obstacles, &mut rng) {
                    candidates.push((t.path.nodes, t.visits, Vec::new()));
                }
            }
            if let Ok(nodes) = self.retreat(pause, step_aside_until, &obstacles, &mut rng) {
                let pending = match &rest {
                    Rest::Visits(v) => v.clone(),
                    Rest::HoldUntil(_) => Vec::new(),
                };
                candidates.push((nodes, Vec::new(), pending));
            }
            for (nodes, visits, pending) in candidates {
                let keep = self.robot.traj.len();
                self.robot.traj.extend_from_slice(&nodes[1..]);
                match self.robot_conflict(now) {
                    None => {
                        if let Some(active) = &mut self.robot.active {
                            active.visits.extend(visits);
                            active.pending = pending;
                            active.replans += 1;
                        }
                        return Ok(());
                    }
                    Some(t) => {
                        last = t;
                        self.robot.traj.truncate(keep);
                    }
                }
            }
        }
        Err(collision(last))
    }

    /// Moves the robot to some clear spot and keeps it there until `until`.
    fn retreat(
        &self,
        from: TimedNode,
        until: f64,
        obstacles: &[TimedPath],
        rng: &mut ChaCha8Rng,
    ) -> Result<Vec<TimedNode>, PlanError> {
        let p = self.params();
        let (lo, hi) = self.layout.room.bounding_box();
        let goal = (0..100)
            .map(|_| Point2::new(rng.random_range(lo.x..hi.x), rng.random_range(lo.y..hi.y)))
            .find(|&q| self.layout.point_clear(q, p.agent_radius))
            .ok_or(PlanError::GoalBlocked)?;
        let hold = (until - from.t).max(0.0);
        let path = plan_single_holding(self.layout, p, Agent::Robot, from, goal, hold, obstacles, rng)?;
        let mut nodes = path.nodes;
        let arrive = nodes.last().expect("non-empty").t;
        if until > arrive {
            nodes.push(TimedNode::new(goal, until));
        }
        Ok(nodes)
    }
}

/// Cuts `traj` at time `t`, ending it with the interpolated node there.
fn pause_at(traj: &mut Vec<TimedNode>, t: f64) {
    let q = TimedPath::new(Agent::Robot, core::mem::take(traj));
    let at = q.position_at(t).expect("trajectories are never empty");
    *traj = q.nodes;
    let cut = traj.partition_point(|n| n.t < t);
    traj.truncate(cut);
    traj.push(TimedNode::new(at, t));
}

/// Whether every human segment is reproduced exactly by planning its tour
/// alone with the recorded seed.
pub fn human_segments_replay(layout: &Layout, params: &PlannerParams, tasks: &[SubTask], outcome: &SimOutcome) -> bool {
    outcome.segments_of(Agent::Human).all(|seg| {
        let Some(task) = tasks.iter().find(|t| t.id == seg.sub_task) else { return false };
        let start = seg.path.nodes[0];
        let mut rng = ChaCha8Rng::seed_from_u64(seg.plan_seed);
        plan_visits(layout, params, Agent::Human, &task.visits, start, &[], &mut rng)
            .is_ok_and(|tour| tour.path == seg.path && tour.visits == seg.visits)
    })
}
