//! Configuration, scenario dispatch and output files behind the `plateau-hyp` binary.

pub mod config;
pub mod output;
pub mod run;

pub use config::{load_config, parse_config, CheckRecord, CheckStatus, DiagnosticsReport, Mode, RunConfig};
pub use output::{graph_obj, grid_csv, read_grid_csv, write_atomic};
pub use run::{emit_outputs, execute, exit_code, run_scenario, Artifacts};
