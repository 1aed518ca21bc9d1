//! Gate-level generation, simulation and analysis of Dadda multipliers:
//! the regular full-matrix design and a partitioned design whose halves are
//! compressed independently and joined by a CLA + MBEC hybrid final adder.

pub mod adders;
pub mod analysis;
pub mod dadda;
mod error;
pub mod json;
pub mod multiplier;
pub mod netlist;
pub mod ppgen;
pub mod report;
pub mod verilog;

pub use error::{Error, Result};
