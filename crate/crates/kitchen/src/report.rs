//! Structured run reports.

use std::fmt;

use kitchen_core::cost::{layout_cost, per_path_narrowness, total_path_cost};
use kitchen_core::optimizer::AnnealStats;
use kitchen_core::planner::{LabeledSegment, Policy};
use kitchen_core::{Agent, CostModel, CostVector, Mode, Solution};
use serde::{Deserialize, Serialize};

use crate::config::RoomVariant;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub seeds: Vec<u64>,
    pub mode: Mode,
    pub room: RoomVariant,
    pub iterations: usize,
    pub policy: Policy,
    /// Only recorded on request so that reports stay reproducible.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_clock_seconds: Option<f64>,
}

/// Summary of one seeded anneal run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub seed: u64,
    pub initial_total_cost: f64,
    pub initial_success: bool,
    pub best_total_cost: Option<f64>,
    pub best_path_cost: Option<f64>,
    pub pareto_size: usize,
    /// Pareto members dropped because they failed verification.
    pub rejected: usize,
    pub stats: AnnealStats,
    pub final_temperature: f64,
}

/// Which agent served which sub-task.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssignmentTable {
    pub human: Vec<String>,
    pub robot: Vec<String>,
}

impl AssignmentTable {
    pub fn from_segments(segments: &[LabeledSegment]) -> Self {
        let mut t = Self::default();
        for s in segments {
            match s.agent {
                Agent::Human => t.human.push(s.sub_task.clone()),
                Agent::Robot => t.robot.push(s.sub_task.clone()),
            }
        }
        t
    }
}

impl fmt::Display for AssignmentTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Human | {}", self.human.join(", "))?;
        write!(f, "Robot | {}", self.robot.join(", "))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub terms: CostVector,
    pub layout_cost: f64,
    pub path_cost: f64,
    pub total: f64,
    /// Narrowness of each sub-task path in completion order.
    pub narrowness_per_path: Vec<f64>,
}

impl CostBreakdown {
    pub fn of(s: &Solution, model: &CostModel) -> Self {
        Self {
            terms: s.costs,
            layout_cost: layout_cost(&s.costs, &model.weights),
            path_cost: total_path_cost(&s.costs, &model.weights),
            total: s.total_cost,
            narrowness_per_path: per_path_narrowness(&s.layout, &s.outcome, model.safe_width),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionRecord {
    /// Seed of the run that found it.
    pub seed: u64,
    pub assignment: AssignmentTable,
    pub costs: CostBreakdown,
    /// Layout, labeled path segments and full trajectories.
    pub solution: Solution,
}

impl SolutionRecord {
    pub fn new(seed: u64, s: &Solution, model: &CostModel) -> Self {
        Self {
            seed,
            assignment: AssignmentTable::from_segments(&s.outcome.segments),
            costs: CostBreakdown::of(s, model),
            solution: s.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub metadata: RunMetadata,
    pub runs: Vec<RunRecord>,
    /// Merged Pareto set over all runs.
    pub solutions: Vec<SolutionRecord>,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }
}
