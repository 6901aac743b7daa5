//! Command-line front end: file formats, synthetic data, reports and the
//! command implementations behind the `boxsize` binary.

pub mod commands;
pub mod io;
pub mod report;
pub mod synth;
