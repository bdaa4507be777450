//! Layout and path costs, their weighted total and Pareto dominance.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::geometry::{Layout, Room};
use crate::planner::{SimOutcome, TimedPath};
use crate::recipe::Agent;

/// Per-path narrowness below this is treated as zero.
const NARROW_EPS: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Weights {
    /// Scale applied to both layout weights.
    pub alpha: f64,
    pub distance: f64,
    pub rotation: f64,
    pub length: f64,
    pub time: f64,
    pub narrowness: f64,
}

impl Default for Weights {
    fn default() -> Self {
        Self { alpha: 1.0, distance: 1.0, rotation: 1.0, length: 1.0, time: 1.0, narrowness: 2.0 }
    }
}

/// Everything needed to turn a layout and a simulation into costs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CostModel {
    pub weights: Weights,
    /// Passage width at and above which narrowness costs nothing.
    pub safe_width: f64,
    /// Multiplies the room perimeter to give the length normalizer.
    pub normalization_factor: f64,
}

impl Default for CostModel {
    fn default() -> Self {
        Self { weights: Weights::default(), safe_width: 1.2, normalization_factor: 5.0 }
    }
}

/// Divisors that bring path length and time into `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathNormalization {
    pub length: f64,
    pub time: f64,
}

impl PathNormalization {
    pub fn for_room(room: &Room, factor: f64, speed: f64) -> Self {
        let length = room.perimeter() * factor;
        Self { length, time: length / speed }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CostVector {
    pub layout_distance: f64,
    pub layout_rotation: f64,
    pub path_length: f64,
    pub path_time: f64,
    pub path_narrowness: f64,
    /// Normalized length of each agent's paths; `path_length` is their mean.
    pub human_length: f64,
    pub robot_length: f64,
}

impl CostVector {
    /// The five terms that take part in dominance.
    pub fn terms(&self) -> [f64; 5] {
        [self.layout_distance, self.layout_rotation, self.path_length, self.path_time, self.path_narrowness]
    }

    /// Path terms of a failed simulation.
    pub fn with_failed_paths(mut self) -> Self {
        self.path_length = 1.0;
        self.path_time = 1.0;
        self.path_narrowness = 1.0;
        self.human_length = 1.0;
        self.robot_length = 1.0;
        self
    }
}

/// Squared shortfall of each counter's back face from its target distance to
/// the nearest wall, summed.
pub fn layout_distance_cost(layout: &Layout) -> f64 {
    layout
        .counters
        .iter()
        .map(|c| {
            let hit = layout.nearest_wall_unchecked(c.back_midpoint());
            let gap = hit.distance - c.target_wall_distance;
            gap * gap
        })
        .sum()
}

/// Squared angle between each counter's facing and the inward direction of
/// its nearest wall, summed.
pub fn layout_rotation_cost(layout: &Layout) -> f64 {
    layout
        .counters
        .iter()
        .map(|c| {
            let hit = layout.nearest_wall_unchecked(c.back_midpoint());
            let a = c.orientation.angle_to(hit.orientation);
            a * a
        })
        .sum()
}

/// Total length of `paths` over `normalizer`, clamped to 1.
pub fn path_length_cost<'a>(paths: impl IntoIterator<Item = &'a TimedPath>, normalizer: f64) -> f64 {
    let total: f64 = paths.into_iter().map(TimedPath::length).sum();
    (total / normalizer).min(1.0)
}

/// Latest dish finish time over `normalizer` (seconds), clamped to 1. A
/// failed simulation costs 1.
pub fn path_time_cost(outcome: &SimOutcome, normalizer: f64) -> f64 {
    if !outcome.success {
        return 1.0;
    }
    let latest = outcome.finish_times.values().copied().fold(0.0, f64::max);
    (latest / normalizer).min(1.0)
}

/// Narrowest passage along one path: twice the smaller side clearance,
/// minimized over every node that has a later node at a different position.
/// `None` for paths that never move.
pub fn path_min_width(layout: &Layout, path: &TimedPath) -> Option<f64> {
    let nodes = &path.nodes;
    let mut min: Option<f64> = None;
    let mut next: Option<usize> = None;
    // Walking backwards, `next` is the first later node at another position.
    for i in (0..nodes.len().saturating_sub(1)).rev() {
        if nodes[i + 1].q != nodes[i].q {
            next = Some(i + 1);
        }
        if let Some(j) = next {
            let w = layout.clearance_left_right(nodes[i].q, nodes[j].q - nodes[i].q).width();
            min = Some(min.map_or(w, |m| m.min(w)));
        }
    }
    min
}

/// Shortfall of a path's narrowest passage below `safe_width`, as a fraction.
pub fn narrowness_of_width(width: Option<f64>, safe_width: f64) -> f64 {
    match width {
        Some(w) => {
            let c = ((safe_width - w) / safe_width).clamp(0.0, 1.0);
            if c < NARROW_EPS {
                0.0
            } else {
                c
            }
        }
        None => 0.0,
    }
}

/// Mean of the strictly positive per-path narrowness costs, 0 if none.
pub fn aggregate_narrowness(per_path: impl IntoIterator<Item = f64>) -> f64 {
    let (sum, n) = per_path.into_iter().filter(|&c| c > 0.0).fold((0.0, 0usize), |(s, n), c| (s + c, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

pub fn path_narrowness_cost<'a>(
    layout: &Layout,
    paths: impl IntoIterator<Item = &'a TimedPath>,
    safe_width: f64,
) -> f64 {
    aggregate_narrowness(paths.into_iter().map(|p| narrowness_of_width(path_min_width(layout, p), safe_width)))
}

impl CostModel {
    pub fn normalization(&self, room: &Room, speed: f64) -> PathNormalization {
        PathNormalization::for_room(room, self.normalization_factor, speed)
    }

    pub fn layout_costs(&self, layout: &Layout) -> CostVector {
        CostVector {
            layout_distance: layout_distance_cost(layout),
            layout_rotation: layout_rotation_cost(layout),
            ..CostVector::default()
        }
    }

    /// All five terms for a layout and the simulation run in it.
    pub fn evaluate(&self, layout: &Layout, outcome: &SimOutcome, speed: f64) -> CostVector {
        let base = self.layout_costs(layout);
        if !outcome.success {
            return base.with_failed_paths();
        }
        let norm = self.normalization(&layout.room, speed);
        let of = |a: Agent| outcome.segments_of(a).map(|s| &s.path);
        let human_length = path_length_cost(of(Agent::Human), norm.length);
        let robot_length = path_length_cost(of(Agent::Robot), norm.length);
        CostVector {
            path_length: 0.5 * (human_length + robot_length),
            path_time: path_time_cost(outcome, norm.time),
            path_narrowness: path_narrowness_cost(layout, outcome.segments.iter().map(|s| &s.path), self.safe_width),
            human_length,
            robot_length,
            ..base
        }
    }

    pub fn total(&self, c: &CostVector) -> f64 {
        total_cost(c, &self.weights)
    }
}

pub fn layout_cost(c: &CostVector, w: &Weights) -> f64 {
    w.alpha * (w.distance * c.layout_distance + w.rotation * c.layout_rotation)
}

pub fn total_path_cost(c: &CostVector, w: &Weights) -> f64 {
    w.length * c.path_length + w.time * c.path_time + w.narrowness * c.path_narrowness
}

pub fn total_cost(c: &CostVector, w: &Weights) -> f64 {
    layout_cost(c, w) + total_path_cost(c, w)
}

/// `a` is no worse than `b` in every term and better in at least one.
pub fn dominates(a: &CostVector, b: &CostVector) -> bool {
    let (a, b) = (a.terms(), b.terms());
    a.iter().zip(&b).all(|(x, y)| x <= y) && a.iter().zip(&b).any(|(x, y)| x < y)
}

/// A scored design: the layout, the simulation in it and its costs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub layout: Layout,
    pub outcome: SimOutcome,
    pub costs: CostVector,
    pub total_cost: f64,
}

impl Solution {
    pub fn new(layout: Layout, outcome: SimOutcome, model: &CostModel, speed: f64) -> Self {
        let costs = model.evaluate(&layout, &outcome, speed);
        let total_cost = model.total(&costs);
        Self { layout, outcome, costs, total_cost }
    }

    pub fn total_path_cost(&self, w: &Weights) -> f64 {
        total_path_cost(&self.costs, w)
    }
}

/// Per-path narrowness costs in segment order, for reporting.
pub fn per_path_narrowness(layout: &Layout, outcome: &SimOutcome, safe_width: f64) -> Vec<f64> {
    outcome
        .segments
        .iter()
        .map(|s| narrowness_of_width(path_min_width(layout, &s.path), safe_width))
        .collect()
}
