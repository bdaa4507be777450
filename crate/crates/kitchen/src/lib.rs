//! Command-line side of kitchen-core: JSON problem configs, seeded
//! experiment runs, verified reports and SVG renderings.

pub mod config;
pub mod experiment;
pub mod report;
pub mod svg;
pub mod verify;

pub use config::{load_config, ProblemConfig, RoomVariant};
pub use experiment::{run_experiment, run_seed, write_outputs, Overrides};
pub use report::RunReport;
pub use verify::verify_solution;
