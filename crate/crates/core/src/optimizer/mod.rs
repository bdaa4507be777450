//! Annealing over layouts and plans, and the Pareto archive it fills.

mod anneal;
mod pareto;

pub use anneal::{
    accept, accept_delta, admissible, anneal, initial_layout, objective, propose_layout_move, propose_path_move,
    AnnealConfig, AnnealError, AnnealResult, AnnealStats, Mode, Problem,
};
pub use pareto::{ParetoSet, Scored, PARETO_CAPACITY};
