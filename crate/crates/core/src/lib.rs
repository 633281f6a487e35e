#![no_std]

extern crate alloc;

pub mod band;
pub mod distributions;
pub mod ell_one_sided;
pub mod ell_two_sided;
pub mod error;
pub mod level_solver;
pub mod numerics;
pub mod plot;
mod recursion;

pub use error::{Error, Result};
pub use recursion::RecursionStats;
