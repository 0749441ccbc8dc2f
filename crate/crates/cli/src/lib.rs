//! Batch front end for `mmdegree`: scenario files in, JSON/CSV reports out.

pub mod run;
pub mod scenario;

pub use run::{run, write_outputs, Outcome, EXIT_IO, EXIT_MATH, EXIT_PASS};
pub use scenario::{emit_scenario, parse_scenario, Scenario, ScenarioError};
