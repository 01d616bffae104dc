//! Batch front end for the extended Bose-Hubbard chain with pair injection: single-point
//! solves, parameter scans, boundary traces and finite-size studies on top of
//! [`latticevar_core`], with CSV and SVG outputs.

pub mod config;
pub mod csvio;
pub mod error;
pub mod plot;
pub mod point;
pub mod run;

pub use config::RunConfig;
pub use error::CliError;
