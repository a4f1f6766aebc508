//! Command-line front end: configuration loading, command dispatch and
//! serialization of matrices, spectra and oracle reports.

pub mod commands;
pub mod config;

use hetspec_core::Error;

pub use commands::{run, Cli, Command, Format};
pub use config::{SchemeFile, Setup};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_PARTIAL_OVERLAP: i32 = 3;
pub const EXIT_UNMATCHED_SQUEEZER: i32 = 4;
pub const EXIT_SHAPE_MISMATCH: i32 = 5;
pub const EXIT_ORACLE_FAIL: i32 = 6;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] Error),
    #[error("scheme shape: {0}")]
    Shape(String),
    #[error("output: {0}")]
    Io(#[from] std::io::Error),
    #[error("oracle estimate outside tolerance: band error {band_rel_err:.4} > {tolerance}")]
    OracleFail { band_rel_err: f64, tolerance: f64 },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_VALIDATION,
            CliError::Core(Error::PartialOverlap(..)) => EXIT_PARTIAL_OVERLAP,
            CliError::Core(Error::UnmatchedSqueezer(_) | Error::SqueezerNotCentered { .. }) => {
                EXIT_UNMATCHED_SQUEEZER
            }
            CliError::Core(_) => EXIT_VALIDATION,
            CliError::Shape(_) => EXIT_SHAPE_MISMATCH,
            CliError::Io(_) => EXIT_INTERNAL,
            CliError::OracleFail { .. } => EXIT_ORACLE_FAIL,
        }
    }
}
