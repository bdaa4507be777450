//! Independent re-verification of a solution before it is reported.

use std::collections::BTreeMap;

use kitchen_core::geometry::Violation;
use kitchen_core::planner::{first_conflict, SimFailure};
use kitchen_core::{Agent, Problem, Solution, TimedPath};
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum VerifyError {
    #[error("invalid layout: {0:?}")]
    Layout(Vec<Violation>),
    #[error("simulation did not succeed: {0:?}")]
    Simulation(Option<SimFailure>),
    #[error("{agent:?} path hits an obstacle between nodes {index} and {}", index + 1)]
    StaticCollision { agent: Agent, index: usize },
    #[error("agents come within the minimum separation at t = {time}")]
    DynamicCollision { time: f64 },
    #[error("recomputed costs differ from the recorded ones")]
    Costs,
    #[error("sub-task bookkeeping: {0}")]
    Tasks(String),
}

/// Checks the layout, both trajectories against the layout and each other,
/// the cost values and the sub-task record.
pub fn verify_solution(problem: &Problem, s: &Solution) -> Result<(), VerifyError> {
    let violations = s.layout.validate();
    if !violations.is_empty() {
        return Err(VerifyError::Layout(violations));
    }
    let out = &s.outcome;
    if !out.success {
        return Err(VerifyError::Simulation(out.failure.clone()));
    }
    let p = &problem.sim.params;
    for path in [&out.human, &out.robot] {
        static_check(s, path, p.agent_radius)?;
    }
    for seg in &out.segments {
        static_check(s, &seg.path, p.agent_radius)?;
    }
    if let Some(time) = first_conflict(&out.robot, &out.human, p.min_separation(), p.time_tolerance()) {
        return Err(VerifyError::DynamicCollision { time });
    }
    let costs = problem.costs.evaluate(&s.layout, out, p.speed);
    let total = problem.costs.total(&costs);
    if costs != s.costs || total.to_bits() != s.total_cost.to_bits() {
        return Err(VerifyError::Costs);
    }
    check_tasks(problem, s)
}

fn static_check(s: &Solution, path: &TimedPath, radius: f64) -> Result<(), VerifyError> {
    let bad = path.nodes.windows(2).position(|w| !s.layout.segment_clear(w[0].q, w[1].q, radius));
    match bad {
        Some(index) => Err(VerifyError::StaticCollision { agent: path.agent, index }),
        None => Ok(()),
    }
}

fn check_tasks(problem: &Problem, s: &Solution) -> Result<(), VerifyError> {
    let err = |m: String| Err(VerifyError::Tasks(m));
    let mut span: BTreeMap<&str, (f64, f64)> = BTreeMap::new();
    for seg in &s.outcome.segments {
        let (Some(t0), Some(t1)) = (seg.path.start_time(), seg.path.end_time()) else {
            return err(format!("{} has an empty path", seg.sub_task));
        };
        if span.insert(seg.sub_task.as_str(), (t0, t1)).is_some() {
            return err(format!("{} completed twice", seg.sub_task));
        }
    }
    for task in &problem.tasks {
        let Some(&(start, _)) = span.get(task.id.as_str()) else {
            return err(format!("{} never completed", task.id));
        };
        for pre in &task.prerequisites {
            match span.get(pre.as_str()) {
                Some(&(_, end)) if end <= start => {}
                _ => return err(format!("{} started before {pre} finished", task.id)),
            }
        }
    }
    if span.len() != problem.tasks.len() {
        return err("unknown sub-task in the record".into());
    }
    Ok(())
}
