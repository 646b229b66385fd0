//! Variation of local maximal functions of indicator sets, computed on
//! uniform grids.

pub mod cli;
pub mod coverings;
pub mod edt;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod grid;
pub mod maximal;
pub mod numeric;

pub use error::{Error, Result};
