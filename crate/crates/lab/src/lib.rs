//! Scenario files, tables and the command-line runner around `nevlab-core`.

pub mod build;
pub mod error;
pub mod families;
pub mod plot;
pub mod runner;
pub mod scenario;
pub mod table;
pub mod tasks;

pub use error::{exit, LabError, Result};
pub use runner::{run, run_path, RunOptions, RunOutcome};
pub use scenario::{Scenario, Task};
pub use table::{Cell, Table};
