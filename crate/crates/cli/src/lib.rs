//! Spec-file parsing, report rendering and the subcommands behind `ddm`.

pub mod commands;
pub mod report;
pub mod spec_file;

pub use commands::{
    cmd_moments, cmd_validate, cmd_value, ExitStatus, MomentsOptions, ValidateOptions,
};
pub use report::{to_machine, MomentsReport, ValuationReport, Verdict};
pub use spec_file::{EntryDiagnostic, SpecFile, SpecFileError};
