//! Time-parameterized path planning for the two agents and the event-driven
//! simulation that coordinates them.
//!
//! Agents plan with a goal-biased RRT whose nodes carry timestamps. The human
//! has priority and plans as if alone; the robot plans directly, and only when
//! the simulation finds a conflict does it pause and re-plan around the
//! human's committed path plus a predicted ("virtual") continuation of it.

mod belief;
mod dynamic;
mod rrt;
mod sim;

pub use belief::{belief_init, belief_update, virtual_human_path, Belief};
pub use dynamic::{check_dynamic_collision, first_conflict, min_windowed_distance, Piece};
pub use rrt::{plan_single, plan_single_holding, plan_tour, GoalSampler, Sample, Tour, VisitRecord};
pub use sim::{human_segments_replay, simulate, LabeledSegment, Policy, SimConfig, SimFailure, SimOutcome};

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{CounterKind, Point2};
use crate::recipe::Agent;

/// A configuration with a timestamp, in seconds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimedNode {
    pub q: Point2,
    pub t: f64,
}

impl TimedNode {
    pub const fn new(q: Point2, t: f64) -> Self {
        Self { q, t }
    }
}

/// A timed polyline. Consecutive equal positions encode waiting.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimedPath {
    pub agent: Agent,
    pub nodes: Vec<TimedNode>,
}

impl TimedPath {
    pub fn new(agent: Agent, nodes: Vec<TimedNode>) -> Self {
        Self { agent, nodes }
    }

    pub fn start_time(&self) -> Option<f64> {
        self.nodes.first().map(|n| n.t)
    }

    pub fn end_time(&self) -> Option<f64> {
        self.nodes.last().map(|n| n.t)
    }

    pub fn length(&self) -> f64 {
        self.nodes.windows(2).map(|w| w[0].q.distance(w[1].q)).sum()
    }

    /// Position at time `t`, clamped to the first/last node outside the span.
    pub fn position_at(&self, t: f64) -> Option<Point2> {
        let first = self.nodes.first()?;
        let last = self.nodes.last()?;
        if t <= first.t {
            return Some(first.q);
        }
        if t >= last.t {
            return Some(last.q);
        }
        let i = self.nodes.partition_point(|n| n.t <= t);
        let (a, b) = (self.nodes[i - 1], self.nodes[i]);
        let u = if b.t > a.t { (t - a.t) / (b.t - a.t) } else { 1.0 };
        Some(a.q.lerp(b.q, u))
    }
}

/// Motion and search parameters shared by both agents.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlannerParams {
    pub agent_radius: f64,
    /// Tree expansion step; also the longest gap between consecutive nodes.
    pub step_length: f64,
    pub speed: f64,
    /// Probability that an iteration samples the goal.
    pub goal_bias: f64,
    /// Cap on steps added towards a random (non-goal) sample.
    pub max_random_steps: usize,
    /// Cap on wait-in-place steps over one planning call.
    pub max_wait_steps: usize,
    pub iteration_budget: usize,
    /// Gap between an agent disc and the counter it services.
    pub standoff: f64,
    /// Robot re-plan attempts per detected conflict.
    pub max_replans: usize,
}

impl Default for PlannerParams {
    fn default() -> Self {
        Self {
            agent_radius: 0.3,
            step_length: 0.3,
            speed: 1.0,
            goal_bias: 0.8,
            max_random_steps: 5,
            max_wait_steps: 50,
            iteration_budget: 5_000,
            standoff: 0.3,
            max_replans: 3,
        }
    }
}

impl PlannerParams {
    /// Timestamp matching tolerance: one step's travel time.
    pub fn time_tolerance(&self) -> f64 {
        self.step_length / self.speed
    }

    pub fn min_separation(&self) -> f64 {
        2.0 * self.agent_radius
    }
}

#[derive(Debug, Clone, PartialEq, Error, Serialize, Deserialize)]
pub enum PlanError {
    #[error("start configuration is not clear")]
    StartBlocked,
    #[error("goal configuration is not clear")]
    GoalBlocked,
    #[error("iteration budget exhausted")]
    BudgetExhausted,
    #[error("no {0} counter in the layout")]
    MissingCounter(CounterKind),
    #[error("{0} counter cannot be serviced")]
    Unreachable(CounterKind),
    #[error("belief has no entry for sub-task {0}")]
    UnknownBeliefEntry(String),
    #[error("belief is empty")]
    EmptyBelief,
}

