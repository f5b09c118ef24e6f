//! Implied volatility by bracketing root search.
//!
//! The quanto inverse price is not monotone in σ (its vega changes sign), so
//! the solver scans a log-spaced σ grid first, returns the smallest root and
//! reports how many sign changes it saw.

use crate::analytic::price_contract;
use crate::error::{finite, Error, Result};
use crate::types::{MarketState, OptionContract};

pub const SIGMA_MIN: f64 = 1e-4;
pub const SIGMA_MAX: f64 = 10.0;
/// Points in the bracketing scan over `[SIGMA_MIN, SIGMA_MAX]`.
pub const SCAN_POINTS: usize = 512;
pub const MAX_ITERATIONS: u32 = 200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IvResult {
    pub sigma: f64,
    pub iterations: u32,
    /// `price(sigma) − target`
    pub residual: f64,
    /// Sign changes of `price(σ) − target` found by the scan.
    pub roots_bracketed: usize,
}

impl IvResult {
    pub fn multiple_roots(&self) -> bool {
        self.roots_bracketed > 1
    }
}

/// Residual tolerance for a target price: `1e-10·max(1, |target|)`.
pub fn tolerance(target: f64) -> f64 {
    1e-10 * target.abs().max(1.0)
}

fn scan_sigma(i: usize) -> f64 {
    let t = i as f64 / (SCAN_POINTS - 1) as f64;
    SIGMA_MIN * libm::pow(SIGMA_MAX / SIGMA_MIN, t)
}

/// Volatility at which `contract` is worth `target` in its payout currency.
///
/// `market.vol` is ignored. Errors when the target lies outside the prices
/// seen on the scan grid.
pub fn implied_vol(contract: &OptionContract, market: &MarketState, target: f64) -> Result<IvResult> {
    finite("target price", target)?;
    if market.tau <= 0.0 {
        return Err(Error::Degenerate("implied volatility needs positive time to expiry"));
    }
    let base = market.with_vol(1.0);
    base.validate()?;
    let f = |sigma: f64| -> Result<f64> {
        Ok(price_contract(contract, &base.with_vol(sigma))?.value.amount - target)
    };

    if target <= 0.0 {
        // option values are strictly positive for σ > 0
        return Err(Error::BelowAttainable { target, min: f(SIGMA_MIN)? + target });
    }

    let mut lo_price = f64::INFINITY;
    let mut hi_price = f64::NEG_INFINITY;
    let mut first: Option<(f64, f64, f64, f64)> = None;
    let mut roots = 0usize;
    let mut prev = (scan_sigma(0), f(scan_sigma(0))?);
    for i in 0..SCAN_POINTS {
        let x = scan_sigma(i);
        let fx = if i == 0 { prev.1 } else { f(x)? };
        lo_price = lo_price.min(fx);
        hi_price = hi_price.max(fx);
        if fx == 0.0 {
            roots += 1;
            first.get_or_insert((x, fx, x, fx));
        } else if i > 0 && prev.1 != 0.0 && (prev.1 < 0.0) != (fx < 0.0) {
            roots += 1;
            first.get_or_insert((prev.0, prev.1, x, fx));
        }
        prev = (x, fx);
    }
    if lo_price > 0.0 {
        return Err(Error::BelowAttainable { target, min: lo_price + target });
    }
    if hi_price < 0.0 {
        return Err(Error::AboveAttainable { target, max: hi_price + target });
    }
    let (a, fa, b, fb) = first.ok_or(Error::NoRoot(target))?;
    let (sigma, iterations, residual) = brent(&f, a, fa, b, fb, tolerance(target))?;
    Ok(IvResult {
        sigma,
        iterations,
        residual,
        roots_bracketed: roots,
    })
}

/// Brent's method on a sign-changing bracket. Returns `(x, iterations, f(x))`.
fn brent<F: Fn(f64) -> Result<f64>>(
    f: &F,
    mut a: f64,
    mut fa: f64,
    mut b: f64,
    mut fb: f64,
    ftol: f64,
) -> Result<(f64, u32, f64)> {
    if fa == 0.0 {
        return Ok((a, 0, fa));
    }
    if fb == 0.0 {
        return Ok((b, 0, fb));
    }
    if fa.abs() < fb.abs() {
        core::mem::swap(&mut a, &mut b);
        core::mem::swap(&mut fa, &mut fb);
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut bisected = true;
    for it in 1..=MAX_ITERATIONS {
        if fb.abs() <= ftol {
            return Ok((b, it - 1, fb));
        }
        let mut s = if fa != fc && fb != fc {
            a * fb * fc / ((fa - fb) * (fa - fc))
                + b * fa * fc / ((fb - fa) * (fb - fc))
                + c * fa * fb / ((fc - fa) * (fc - fb))
        } else {
            b - fb * (b - a) / (fb - fa)
        };
        let xtol = 4.0 * f64::EPSILON * b.abs();
        let lo = (3.0 * a + b) / 4.0;
        let outside = !((s > lo.min(b)) && (s < lo.max(b)));
        if outside
            || (bisected && (s - b).abs() >= (b - c).abs() / 2.0)
            || (!bisected && (s - b).abs() >= (c - d).abs() / 2.0)
            || (bisected && (b - c).abs() < xtol)
            || (!bisected && (c - d).abs() < xtol)
        {
            s = 0.5 * (a + b);
            bisected = true;
        } else {
            bisected = false;
        }
        let fs = f(s)?;
        d = c;
        c = b;
        fc = fb;
        if (fa < 0.0) != (fs < 0.0) {
            b = s;
            fb = fs;
        } else {
            a = s;
            fa = fs;
        }
        if fa.abs() < fb.abs() {
            core::mem::swap(&mut a, &mut b);
            core::mem::swap(&mut fa, &mut fb);
        }
        if (b - a).abs() <= 2.0 * f64::EPSILON * b.abs() {
            // bracket exhausted at double precision
            return if fb.abs() <= ftol {
                Ok((b, it, fb))
            } else {
                Err(Error::NoRoot(fb))
            };
        }
    }
    if fb.abs() <= ftol {
        Ok((b, MAX_ITERATIONS, fb))
    } else {
        Err(Error::NoRoot(fb))
    }
}
