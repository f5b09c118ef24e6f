//! Pricing kernels for crypto option product classes: standard, direct,
//! inverse, standard quanto, quanto direct and quanto inverse.
//!
//! The crate is `no_std` (it needs `alloc` for sample buffers and grids) and
//! carries no IO. Everything here is a pure function of its inputs:
//!
//! - [`payoff`]: terminal payoffs for every product class.
//! - [`analytic`]: closed-form GBM prices, including the foreign/domestic
//!   duality for inverse options and the quanto inverse formula.
//! - [`greeks`]: closed-form Greeks plus a central finite-difference engine.
//! - [`implied_vol`]: bracketing volatility inversion that reports multiple roots.
//! - [`mc`]: seedable Monte-Carlo oracle with block-indexed random substreams.
//! - [`hedge`]: delta hedging of an option on a non-tradable index with a
//!   correlated tradable instrument.
//!
//! Parallel drivers, CSV formats and the command line live in the `coinopt`
//! companion crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod analytic;
pub mod error;
pub mod greeks;
pub mod hedge;
pub mod implied_vol;
pub mod mc;
pub mod numeric;
pub mod payoff;
pub mod types;

pub use error::{Error, Result};
pub use types::{
    Currency, DValues, Denomination, MarketState, Money, OptionContract, OptionSide, ProductClass,
    QuantoFix, Timestamp,
};
