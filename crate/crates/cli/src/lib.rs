//! Command-line front end: job parsing, dispatch and report rendering.

pub mod job;
pub mod report;
pub mod run;
