//! File formats, configuration, reports and the command-line front end for
//! [`dupsched_core`].

pub mod bench;
pub mod cli;
pub mod config;
pub mod io;
pub mod report;
