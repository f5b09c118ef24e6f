//! Discrete delta hedging of an option that settles on a non-tradable index
//! `B`, using a correlated tradable instrument `H`:
//!
//! ```text
//! dB/B = μ_B dt + σ_B dW^B,   dH/H = μ dt + σ dW,   W^B = ρW + √(1−ρ²) W̃
//! ```
//!
//! The writer sells the option at its closed-form value, and at each
//! rebalance date holds `Δ·B/H` units of `H`, with `Δ` the closed-form delta
//! at the current index level. Cash accrues at `r`. The reported P&L is the
//! discounted hedge account minus the payoff, in the quote currency of the
//! liability (coin payoffs of inverse options are converted at `B_T`).
//!
//! Paths are generated on a driver grid of `driver_steps` steps and the
//! Brownian increments are summed up to each rebalance interval, so runs
//! with different rebalance frequencies or correlations can share the same
//! draws. Path blocks follow the substream rule of [`crate::mc`].

use alloc::vec;
use alloc::vec::Vec;

use crate::analytic::{price_quanto_inverse, price_standard};
use crate::error::{finite, positive, Error, Result};
use crate::greeks::{greeks_inverse, greeks_quanto_inverse};
use crate::mc::{Moments, NormalStream, PathConfig};
use crate::payoff::intrinsic;
use crate::types::{Currency, MarketState, OptionContract, OptionSide, ProductClass};

/// Paths (antithetic pairs count once) per block.
pub const HEDGE_BLOCK: u64 = 256;

/// Which closed-form delta drives the hedge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GreekSource {
    /// Garman-Kohlhagen delta of the quote value.
    Inverse,
    /// Quanto inverse delta, `X̄` included.
    QuantoInverse,
}

impl GreekSource {
    pub fn for_class(class: ProductClass) -> GreekSource {
        match class {
            ProductClass::QuantoInverse => GreekSource::QuantoInverse,
            _ => GreekSource::Inverse,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HedgeSimConfig {
    pub mu_index: f64,
    pub sigma_index: f64,
    pub mu_hedge: f64,
    pub sigma_hedge: f64,
    pub rho: f64,
    /// Years between rebalances; the count per path is `ceil(τ/dt)`.
    pub rebalance_dt: f64,
    pub greek_source: GreekSource,
    /// Initial level of the hedge instrument.
    pub hedge_spot: f64,
    /// Steps of the driver grid; a multiple of the rebalance count. `None`
    /// uses the rebalance grid itself.
    pub driver_steps: Option<u32>,
    pub paths: PathConfig,
}

impl HedgeSimConfig {
    /// Matched dynamics (`ρ = 1`, equal drifts and vols, hedge level equal
    /// to the index level) rebalanced every `dt`.
    pub fn matched(market: &MarketState, class: ProductClass, dt: f64, paths: PathConfig) -> HedgeSimConfig {
        HedgeSimConfig {
            mu_index: market.rate_dom,
            sigma_index: market.vol,
            mu_hedge: market.rate_dom,
            sigma_hedge: market.vol,
            rho: 1.0,
            rebalance_dt: dt,
            greek_source: GreekSource::for_class(class),
            hedge_spot: market.spot,
            driver_steps: None,
            paths,
        }
    }

    pub fn validate(&self, tau: f64) -> Result<()> {
        self.paths.validate()?;
        for (name, v) in [("mu_index", self.mu_index), ("mu_hedge", self.mu_hedge)] {
            finite(name, v)?;
        }
        for (name, v) in [("sigma_index", self.sigma_index), ("sigma_hedge", self.sigma_hedge)] {
            finite(name, v)?;
            if v < 0.0 {
                return Err(Error::OutOfRange { name, value: v, reason: "must be non-negative" });
            }
        }
        positive("hedge_spot", self.hedge_spot)?;
        finite("rho", self.rho)?;
        if self.rho.abs() > 1.0 {
            return Err(Error::InvalidHedgeConfig("correlation outside [-1, 1]"));
        }
        positive("rebalance_dt", self.rebalance_dt)?;
        if !(tau > 0.0) {
            return Err(Error::InvalidHedgeConfig("hedging needs positive time to expiry"));
        }
        if self.rebalance_dt > tau * (1.0 + 1e-12) {
            return Err(Error::InvalidHedgeConfig("rebalance interval longer than time to expiry"));
        }
        let n = self.rebalance_steps(tau);
        match self.driver_steps {
            Some(0) => Err(Error::InvalidHedgeConfig("driver grid needs at least one step")),
            Some(m) if m as u64 % n != 0 => Err(Error::InvalidHedgeConfig(
                "driver steps must be a multiple of the rebalance count",
            )),
            _ => Ok(()),
        }
    }

    pub fn rebalance_steps(&self, tau: f64) -> u64 {
        (libm::ceil(tau / self.rebalance_dt - 1e-9) as u64).max(1)
    }
}

/// Distribution of discounted hedging P&L.
#[derive(Debug, Clone, PartialEq)]
pub struct HedgeReport {
    pub mean_pnl: f64,
    pub std_pnl: f64,
    /// Standard error of `mean_pnl` (antithetic pairs averaged first).
    pub std_error: f64,
    /// P&L quantiles at [`HedgeReport::LEVELS`].
    pub quantiles: [f64; 5],
    pub n_paths: u64,
    pub denom: Currency,
}

impl HedgeReport {
    pub const LEVELS: [f64; 5] = [0.01, 0.05, 0.50, 0.95, 0.99];

    /// Summary of per-path P&Ls given in path order.
    pub fn from_pnls(pnls: &[f64], antithetic: bool, denom: Currency) -> Result<HedgeReport> {
        if pnls.len() < 2 {
            return Err(Error::Degenerate("need at least two P&L samples"));
        }
        let mut all = Moments::default();
        pnls.iter().for_each(|&x| all.push(x));
        let std_error = if antithetic {
            let mut pairs = Moments::default();
            pnls.chunks(2).for_each(|p| pairs.push(0.5 * (p[0] + p[p.len() - 1])));
            pairs.std_error()
        } else {
            all.std_error()
        };
        let mut sorted = pnls.to_vec();
        sorted.sort_by(f64::total_cmp);
        Ok(HedgeReport {
            mean_pnl: all.mean,
            std_pnl: libm::sqrt(all.sample_variance()),
            std_error,
            quantiles: Self::LEVELS.map(|p| quantile_sorted(&sorted, p)),
            n_paths: pnls.len() as u64,
            denom,
        })
    }
}

/// Linear-interpolation quantile (Hyndman-Fan type 7) of sorted data.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 0 {
        return f64::NAN;
    }
    let h = (n - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = libm::floor(h) as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Everything one path needs, precomputed from contract, market and config.
#[derive(Debug, Clone, Copy)]
pub struct HedgeKernel {
    side: OptionSide,
    class: ProductClass,
    strike: f64,
    xbar: f64,
    notional: f64,
    market: MarketState,
    cfg: HedgeSimConfig,
    steps: u64,
    substeps: u64,
    premium: f64,
    denom: Currency,
}

impl HedgeKernel {
    pub fn new(contract: &OptionContract, market: &MarketState, cfg: &HedgeSimConfig) -> Result<HedgeKernel> {
        contract.validate()?;
        market.validate()?;
        cfg.validate(market.tau)?;
        let steps = cfg.rebalance_steps(market.tau);
        let substeps = cfg.driver_steps.map_or(1, |m| m as u64 / steps);
        let denom = match contract.class {
            ProductClass::Inverse => contract.underlying_quote,
            _ => contract.payout_denom()?,
        };
        let mut k = HedgeKernel {
            side: contract.side,
            class: contract.class,
            strike: contract.strike,
            xbar: contract.xbar(),
            notional: contract.notional,
            market: *market,
            cfg: *cfg,
            steps,
            substeps,
            premium: 0.0,
            denom,
        };
        k.premium = k.value(market.spot, market.tau)?;
        Ok(k)
    }

    pub fn denom(&self) -> Currency {
        self.denom
    }

    pub fn premium(&self) -> f64 {
        self.premium
    }

    fn at(&self, index: f64, tau: f64) -> MarketState {
        MarketState { spot: index, tau, ..self.market }
    }

    /// Liability value in its quote currency.
    fn value(&self, index: f64, tau: f64) -> Result<f64> {
        let m = self.at(index, tau);
        let unit = match self.class {
            ProductClass::QuantoInverse => price_quanto_inverse(self.side, &m, self.strike, self.xbar)?,
            _ => self.xbar * price_standard(self.side, &m, self.strike)?,
        };
        Ok(self.notional * unit)
    }

    fn delta(&self, index: f64, tau: f64) -> Result<f64> {
        let m = self.at(index, tau);
        let unit = match self.cfg.greek_source {
            GreekSource::Inverse => self.xbar * greeks_inverse(self.side, &m, self.strike)?.delta,
            GreekSource::QuantoInverse => {
                greeks_quanto_inverse(self.side, &m, self.strike, self.xbar)?.delta
            }
        };
        Ok(self.notional * unit)
    }

    fn settle(&self, index: f64) -> f64 {
        let i = intrinsic(self.side, index, self.strike);
        let unit = match self.class {
            ProductClass::QuantoInverse => self.xbar * i / index,
            _ => self.xbar * i,
        };
        self.notional * unit
    }

    /// Normals per path: two per driver step.
    pub fn draws_per_path(&self) -> usize {
        2 * (self.steps * self.substeps) as usize
    }

    /// Discounted P&L of one path. `z` holds `(W, W̃)` normals per driver
    /// step; `sign` flips them for the antithetic partner.
    pub fn path_pnl(&self, z: &[f64], sign: f64) -> Result<f64> {
        let c = &self.cfg;
        let tau = self.market.tau;
        let r = self.market.rate_dom;
        let h = tau / self.steps as f64;
        let sqrt_fine = libm::sqrt(h / self.substeps as f64);
        let eps = libm::sqrt((1.0 - c.rho * c.rho).max(0.0));
        let drift_b = (c.mu_index - 0.5 * c.sigma_index * c.sigma_index) * h;
        let drift_h = (c.mu_hedge - 0.5 * c.sigma_hedge * c.sigma_hedge) * h;
        let growth = libm::exp(r * h);

        let mut b = self.market.spot;
        let mut hedge = c.hedge_spot;
        let mut units = self.delta(b, tau)? * b / hedge;
        let mut cash = self.premium - units * hedge;
        let mut pairs = z.chunks_exact(2);
        for i in 0..self.steps {
            let (mut dw, mut dw_perp) = (0.0, 0.0);
            for _ in 0..self.substeps {
                let p = pairs.next().ok_or(Error::Degenerate("short normal buffer"))?;
                dw += p[0];
                dw_perp += p[1];
            }
            dw *= sign * sqrt_fine;
            dw_perp *= sign * sqrt_fine;
            let dw_index = c.rho * dw + eps * dw_perp;
            b *= libm::exp(drift_b + c.sigma_index * dw_index);
            hedge *= libm::exp(drift_h + c.sigma_hedge * dw);
            cash *= growth;
            if i + 1 < self.steps {
                let remaining = tau - (i + 1) as f64 * h;
                let target = self.delta(b, remaining)? * b / hedge;
                cash -= (target - units) * hedge;
                units = target;
            }
        }
        let account = units * hedge + cash;
        Ok(libm::exp(-r * tau) * (account - self.settle(b)))
    }

    /// P&Ls of block `b`, in path order; antithetic partners follow their
    /// path.
    pub fn block_pnls(&self, b: u64, out: &mut Vec<f64>) -> Result<()> {
        let p = &self.cfg.paths;
        let units = if p.antithetic { p.n_paths / 2 } else { p.n_paths };
        let start = b * HEDGE_BLOCK;
        let end = (start + HEDGE_BLOCK).min(units);
        let mut normals = NormalStream::new(p.seed, b);
        let mut z = vec![0.0; self.draws_per_path()];
        for _ in start..end {
            z.iter_mut().for_each(|x| *x = normals.next_normal());
            out.push(self.path_pnl(&z, 1.0)?);
            if p.antithetic {
                out.push(self.path_pnl(&z, -1.0)?);
            }
        }
        Ok(())
    }

    pub fn n_blocks(&self) -> u64 {
        let p = &self.cfg.paths;
        let units = if p.antithetic { p.n_paths / 2 } else { p.n_paths };
        units.div_ceil(HEDGE_BLOCK)
    }

    pub fn report(&self, pnls: &[f64]) -> Result<HedgeReport> {
        HedgeReport::from_pnls(pnls, self.cfg.paths.antithetic, self.denom)
    }
}

/// Sequential hedging simulation.
pub fn simulate_hedge(
    contract: &OptionContract,
    market: &MarketState,
    cfg: &HedgeSimConfig,
) -> Result<HedgeReport> {
    let kernel = HedgeKernel::new(contract, market, cfg)?;
    let mut pnls = Vec::with_capacity(cfg.paths.n_paths as usize);
    for b in 0..kernel.n_blocks() {
        kernel.block_pnls(b, &mut pnls)?;
    }
    kernel.report(&pnls)
}
