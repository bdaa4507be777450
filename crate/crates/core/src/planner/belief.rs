//! Belief over the human's next sub-task and the predicted path it implies.

use alloc::collections::BTreeMap;
use alloc::string::String;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::rrt::plan_visits;
use super::{PlanError, PlannerParams, TimedNode, TimedPath};
use crate::geometry::Layout;
use crate::recipe::{Agent, SubTask, TaskPool};

/// How long the fallback virtual human stays parked.
const PARKED_HORIZON: f64 = 1.0e6;

/// Probability per sub-task id. Sums to one whenever non-empty.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Belief {
    pub probs: BTreeMap<String, f64>,
}

impl Belief {
    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.probs.values().sum()
    }

    /// Most probable sub-task; ties go to the lowest id.
    pub fn argmax(&self) -> Option<&str> {
        let mut best: Option<(&str, f64)> = None;
        for (id, &p) in &self.probs {
            if best.is_none_or(|(_, b)| p > b) {
                best = Some((id, p));
            }
        }
        best.map(|(id, _)| id)
    }
}

/// Uniform over the currently claimable sub-tasks.
pub fn belief_init(pool: &TaskPool) -> Belief {
    let ids: alloc::vec::Vec<&str> = pool.claimable().map(|s| s.id.as_str()).collect();
    let p = 1.0 / ids.len() as f64;
    Belief { probs: ids.into_iter().map(|id| (id.into(), p)).collect() }
}

/// Zeroes the completed entry and spreads its mass evenly over the entries
/// that still have positive probability. When none are left the belief
/// becomes empty.
pub fn belief_update(belief: &Belief, completed: &str) -> Result<Belief, PlanError> {
    let mass = *belief
        .probs
        .get(completed)
        .ok_or_else(|| PlanError::UnknownBeliefEntry(completed.into()))?;
    let mut probs = belief.probs.clone();
    probs.insert(completed.into(), 0.0);
    let live = probs.values().filter(|&&p| p > 0.0).count();
    if live == 0 {
        return Ok(Belief::default());
    }
    let share = mass / live as f64;
    for p in probs.values_mut() {
        if *p > 0.0 {
            *p += share;
        }
    }
    Ok(Belief { probs })
}

/// Predicted human path: a tour for the most probable sub-task from the
/// human's current node. If that tour cannot be planned the human is assumed
/// to stay where it is.
pub fn virtual_human_path<R: Rng + ?Sized>(
    layout: &Layout,
    params: &PlannerParams,
    belief: &Belief,
    tasks: &[SubTask],
    human: TimedNode,
    rng: &mut R,
) -> Result<TimedPath, PlanError> {
    let id = belief.argmax().ok_or(PlanError::EmptyBelief)?;
    let task = tasks
        .iter()
        .find(|t| t.id == id)
        .ok_or_else(|| PlanError::UnknownBeliefEntry(id.into()))?;
    Ok(match plan_visits(layout, params, Agent::Human, &task.visits, human, &[], rng) {
        Ok(tour) => tour.path,
        Err(_) => parked(human),
    })
}

pub(crate) fn parked(at: TimedNode) -> TimedPath {
    TimedPath::new(
        Agent::Human,
        alloc::vec![at, TimedNode::new(at.q, at.t + PARKED_HORIZON)],
    )
}
