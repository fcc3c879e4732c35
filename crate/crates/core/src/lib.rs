//! Simulation and measurement toolkit for critical (`s = 2`) long-range
//! percolation on ℤ: exact samplers, effective resistances of condensed
//! networks, multi-scale good-pair diagnostics, the firework spreading
//! process and Monte Carlo campaigns around resistance growth.

pub mod error;
pub mod experiments;
pub mod firework;
pub mod model;
pub mod multiscale;
pub mod network;
pub mod rng;
pub mod stats;

pub use error::{LrpError, Result};
