//! Configuration, verification suites and reports for the `heisenberg` CLI.

pub mod checks;
pub mod config;
pub mod export;
pub mod report;
pub mod suites;

pub use checks::Setup;
pub use config::{RunConfig, Suite};
pub use report::{CheckRecord, VerificationReport};
