//! File formats, synthetic meshes, result records and the `flatnorm` command.

pub mod app;
pub mod io;
pub mod record;
pub mod synth;

pub use app::{run, run_command, Cli, Command};
pub use record::ResultRecord;
