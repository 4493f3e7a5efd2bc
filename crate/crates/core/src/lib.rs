#![allow(clippy::needless_range_loop)]

pub mod check;
pub mod cli;
pub mod detprod;
pub mod dualgraph;
pub mod error;
pub mod exactalg;
pub mod fixtures;
pub mod generate;
pub mod lattice;
pub mod treekit;
pub mod ultra;
pub mod valord;

pub use error::{Error, ErrorKind, Result};
