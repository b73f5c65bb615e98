//! Command-line orchestration for hecke-lab: character specs, the structure-table cache,
//! reports and verification campaigns.

pub mod cache;
pub mod campaign;
pub mod charspec;
pub mod commands;
pub mod error;
pub mod report;
pub mod suite;

pub use error::{CliError, Result};
