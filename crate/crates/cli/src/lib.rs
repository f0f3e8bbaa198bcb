//! Scenario files, task dispatch and CSV/plot export around `homspec_core`.

pub mod export;
pub mod run;
pub mod scenario;

pub use run::{run, RunOptions, RunReport};
pub use scenario::{load_scenario, parse_scenario, Scenario, ScenarioError, Task};
