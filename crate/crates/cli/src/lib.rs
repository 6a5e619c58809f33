//! Library behind the `racsim` binary: scenario-file parsing, command
//! implementations, and report-bundle emission. Kept as a library so the
//! acceptance and CLI tests drive the exact code paths the binary uses.

pub mod bundle;
pub mod commands;
pub mod quantity;
pub mod scenario_file;

pub use bundle::{ReportBundle, StructuredReport};
pub use commands::{
    cmd_plan, cmd_report, cmd_simulate, cmd_validate, resolve_out_dir, CommandError, PlanFlags,
    SimulateFlags, DEFAULT_OUT_DIR, EXIT_INVALID, EXIT_OK, EXIT_PARSE, OUT_DIR_ENV,
};
pub use quantity::{parse_bytes, Quantity};
pub use scenario_file::{parse_scenario, to_toml, PlanningInputs, ScenarioFile, ScenarioFileError};
