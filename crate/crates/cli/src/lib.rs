//! Library side of the `eclosure` command: input files, result records and
//! the commands themselves.

pub mod commands;
pub mod error;
pub mod input;
pub mod record;
pub mod selfcheck;

pub use error::{CliError, Result};
pub use record::{Format, ResultRecord};
