//! File formats, rendering, simulations, and the command-line front end for
//! `ellband-core`.

pub mod cli;
pub mod error;
pub mod input;
pub mod output;
pub mod sim;
pub mod svg;
pub mod table_file;

pub use error::CliError;
