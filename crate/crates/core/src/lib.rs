//! Kitchen layout synthesis for a human and a robot cooking together.
//!
//! A layout is scored by simulating both agents through a recipe: the robot
//! and the human claim sub-tasks, plan timed paths with a goal-biased RRT and
//! avoid each other with the human taking priority. Annealing then searches
//! layouts and plans together and keeps a small Pareto set of the best
//! trade-offs.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod cost;
pub mod geometry;
pub mod optimizer;
pub mod planner;
pub mod recipe;

#[cfg(test)]
pub(crate) mod fixtures;

pub use cost::{CostModel, CostVector, Solution, Weights};
pub use geometry::{Counter, CounterKind, Layout, Point2, QuarterTurn, Room};
pub use optimizer::{anneal, AnnealConfig, AnnealResult, Mode, ParetoSet, Problem};
pub use planner::{simulate, PlannerParams, SimConfig, SimOutcome, TimedNode, TimedPath};
pub use recipe::{expand_recipes, Agent, Component, DwellTimes, Recipe, SubTask, Submission};
