//! Library side of the scenario runner, shared by the binary and the
//! acceptance tests.

pub mod run;
pub mod schema;

use std::path::Path;

pub use run::{
    csv_document, csv_row, exit_code, expand_rows, export_polyline, run_rows, summary_line,
    trace_document, RowResult, RowSpec, CSV_HEADER,
};
pub use schema::{solver_params, LoadedScenario, ScenarioFile};

/// Parses and validates a scenario file.
pub fn load_scenario(path: &Path) -> Result<LoadedScenario, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let file: ScenarioFile = serde_json::from_str(&text)
        .map_err(|e| format!("{}: {e}", path.display()))?;
    file.load().map_err(|e| format!("{}: {e}", path.display()))
}
