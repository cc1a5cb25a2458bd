//! Command-line harness around the `blockvoice-core` engine: configuration
//! directories, trial datasets and reports, a typed REPL and the session
//! server used by the web interface.

pub mod cli;
pub mod config_dir;
pub mod dataset;
pub mod repl;
pub mod report;
pub mod serve;
