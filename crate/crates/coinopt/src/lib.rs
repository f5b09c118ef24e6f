//! Command line, option-chain IO and multi-threaded simulation drivers for
//! `coinopt-core`.

pub use coinopt_core as core;

pub mod chain;
pub mod cli;
pub mod error;
pub mod format;
pub mod grids;
pub mod instrument;
pub mod parallel;
pub mod verify;

pub use error::AppError;
