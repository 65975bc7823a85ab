//! Experiment harness for `nodal-morse`: command implementations, the
//! normal-limit probe, and deterministic run records.

pub mod cli;
pub mod clt;
pub mod commands;
pub mod error;
pub mod record;

pub use cli::Cli;
pub use commands::{run, Output};
pub use error::LabError;

use std::path::Path;

/// Writes a command's output: the primary document to `out` (or stdout),
/// extra files next to it, and summary lines to stderr.
pub fn emit(output: &Output, out: Option<&Path>) -> Result<(), LabError> {
    match out {
        Some(path) => {
            std::fs::write(path, &output.primary).map_err(|e| LabError::Io(format!("{}: {e}", path.display())))?
        }
        None => print!("{}", output.primary),
    }
    for (path, text) in &output.extra {
        std::fs::write(path, text).map_err(|e| LabError::Io(format!("{}: {e}", path.display())))?;
    }
    for line in &output.summary {
        eprintln!("{line}");
    }
    Ok(())
}
