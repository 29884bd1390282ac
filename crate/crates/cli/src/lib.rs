//! Command implementations behind the `tim` binary.

pub mod commands;
pub mod io;

pub use commands::CommandResult;
