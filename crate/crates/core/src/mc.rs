//! Monte-Carlo oracle for terminal-payoff options under GBM.
//!
//! Normal draws are split into blocks of [`BLOCK_DRAWS`]. Block `b` reads
//! its uniforms from ChaCha8 stream `b` of the configured seed, so any
//! partition of blocks over workers yields the same draws, and per-block
//! moments are merged in block order. The sequential functions here and the
//! parallel drivers in the companion crate therefore agree bit for bit.
//!
//! Quote-denominated values are `e^{−rτ} E^ℚ[payoff]` with the underlying
//! drifting at `r − r_f`. The coin value of an inverse option is priced
//! under the coin measure instead: `e^{−r_f τ} E^{ℚ_f}[payoff]` with drift
//! `r − r_f + σ²`.

use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::analytic::EXPIRY_EPSILON;
use crate::error::{finite, positive, Error, Result};
use crate::numeric::inv_cdf;
use crate::payoff::payoff_amount;
use crate::types::{MarketState, Money, OptionContract, OptionSide, ProductClass};

/// Normal draws per block.
pub const BLOCK_DRAWS: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PathConfig {
    pub seed: u64,
    pub n_paths: u64,
    pub antithetic: bool,
    /// Worker threads for the parallel drivers. Results do not depend on it.
    pub workers: usize,
}

impl PathConfig {
    pub fn new(seed: u64, n_paths: u64) -> PathConfig {
        PathConfig {
            seed,
            n_paths,
            antithetic: true,
            workers: 1,
        }
    }

    pub fn with_antithetic(mut self, on: bool) -> Self {
        self.antithetic = on;
        self
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_paths < 2 {
            return Err(Error::InvalidPathConfig("need at least two paths"));
        }
        if self.antithetic && self.n_paths % 2 != 0 {
            return Err(Error::InvalidPathConfig("antithetic sampling needs an even path count"));
        }
        if self.workers == 0 {
            return Err(Error::InvalidPathConfig("need at least one worker"));
        }
        Ok(())
    }

    /// Independent normal draws: pairs count once under antithetic sampling.
    pub fn n_draws(&self) -> u64 {
        if self.antithetic {
            self.n_paths / 2
        } else {
            self.n_paths
        }
    }

    pub fn n_blocks(&self) -> u64 {
        self.n_draws().div_ceil(BLOCK_DRAWS)
    }

    /// Draw index range `[start, end)` covered by block `b`.
    pub fn block_range(&self, b: u64) -> (u64, u64) {
        let start = b * BLOCK_DRAWS;
        (start, (start + BLOCK_DRAWS).min(self.n_draws()))
    }
}

/// Standard normal stream for one block: uniforms from the 53 high bits of
/// each 64-bit output, centred in their cell, through the inverse CDF.
pub struct NormalStream {
    rng: ChaCha8Rng,
}

impl NormalStream {
    pub fn new(seed: u64, stream: u64) -> NormalStream {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        NormalStream { rng }
    }

    #[inline]
    pub fn next_uniform(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    #[inline]
    pub fn next_normal(&mut self) -> f64 {
        inv_cdf(self.next_uniform())
    }
}

/// Count, mean and sum of squared deviations, mergeable in a fixed order.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Moments {
    pub n: u64,
    pub mean: f64,
    pub m2: f64,
}

impl Moments {
    #[inline]
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(self, other: Moments) -> Moments {
        if self.n == 0 {
            return other;
        }
        if other.n == 0 {
            return self;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        let (na, nb) = (self.n as f64, other.n as f64);
        Moments {
            n,
            mean: self.mean + delta * nb / n as f64,
            m2: self.m2 + other.m2 + delta * delta * na * nb / n as f64,
        }
    }

    pub fn sample_variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub fn std_error(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            libm::sqrt(self.sample_variance() / self.n as f64)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub value: Money,
    pub std_error: f64,
    /// Independent samples behind the estimate (antithetic pairs count once).
    pub n_effective: u64,
}

/// Terminal law and discounted payoff of one contract under the measure
/// that matches its payout currency.
#[derive(Debug, Clone, Copy)]
pub struct McKernel {
    spot: f64,
    /// `(drift − σ²/2)τ`
    log_drift: f64,
    /// `σ√τ`
    vol_sqrt: f64,
    discount: f64,
    class: ProductClass,
    side: OptionSide,
    strike: f64,
    xbar: f64,
    notional: f64,
    contract: OptionContract,
}

impl McKernel {
    pub fn new(contract: &OptionContract, market: &MarketState) -> Result<McKernel> {
        contract.validate()?;
        market.validate()?;
        let m = market;
        let (r, rf, sigma) = (m.rate_dom, m.rate_for, m.vol);
        let tau = m.tau.max(0.0);
        let (drift, discount_rate) = match contract.class {
            ProductClass::Inverse => (r - rf + sigma * sigma, rf),
            _ => (r - rf, r),
        };
        Ok(McKernel {
            spot: m.spot,
            log_drift: (drift - 0.5 * sigma * sigma) * tau,
            vol_sqrt: sigma * libm::sqrt(tau),
            discount: libm::exp(-discount_rate * tau),
            class: contract.class,
            side: contract.side,
            strike: contract.strike,
            xbar: contract.xbar(),
            notional: contract.notional,
            contract: *contract,
        })
    }

    #[inline]
    pub fn terminal(&self, z: f64) -> f64 {
        self.spot * libm::exp(self.log_drift + self.vol_sqrt * z)
    }

    #[inline]
    pub fn discounted_payoff(&self, z: f64) -> f64 {
        let st = self.terminal(z);
        self.discount * payoff_amount(self.class, self.side, self.strike, self.xbar, self.notional, st)
    }

    /// Moments of one block. Under antithetic sampling each sample is the
    /// average of the pair `(Z, −Z)`.
    pub fn block_moments(&self, cfg: &PathConfig, b: u64) -> Moments {
        let (start, end) = cfg.block_range(b);
        let mut normals = NormalStream::new(cfg.seed, b);
        let mut acc = Moments::default();
        for _ in start..end {
            let z = normals.next_normal();
            let x = if cfg.antithetic {
                0.5 * (self.discounted_payoff(z) + self.discounted_payoff(-z))
            } else {
                self.discounted_payoff(z)
            };
            acc.push(x);
        }
        acc
    }

    pub fn estimate(&self, moments: Moments) -> Result<McEstimate> {
        Ok(McEstimate {
            value: Money::new(moments.mean, self.contract.payout_denom()?),
            std_error: moments.std_error(),
            n_effective: moments.n,
        })
    }

    /// Exact value when the option has expired, `None` otherwise.
    pub fn expired(&self, market: &MarketState, cfg: &PathConfig) -> Result<Option<McEstimate>> {
        if market.tau > EXPIRY_EPSILON {
            return Ok(None);
        }
        let amount = payoff_amount(
            self.class,
            self.side,
            self.strike,
            self.xbar,
            self.notional,
            market.spot,
        );
        Ok(Some(McEstimate {
            value: Money::new(amount, self.contract.payout_denom()?),
            std_error: 0.0,
            n_effective: cfg.n_draws(),
        }))
    }
}

/// Sequential Monte-Carlo price in the contract's payout currency.
pub fn mc_price(contract: &OptionContract, market: &MarketState, cfg: &PathConfig) -> Result<McEstimate> {
    cfg.validate()?;
    let kernel = McKernel::new(contract, market)?;
    if let Some(done) = kernel.expired(market, cfg)? {
        return Ok(done);
    }
    let total = (0..cfg.n_blocks())
        .map(|b| kernel.block_moments(cfg, b))
        .fold(Moments::default(), Moments::merge);
    kernel.estimate(total)
}

/// Parameters of a lognormal terminal law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TerminalLaw {
    pub spot: f64,
    pub drift: f64,
    pub sigma: f64,
    pub tau: f64,
}

impl TerminalLaw {
    pub fn new(spot: f64, drift: f64, sigma: f64, tau: f64) -> Result<TerminalLaw> {
        positive("spot", spot)?;
        finite("drift", drift)?;
        finite("volatility", sigma)?;
        finite("tau", tau)?;
        if sigma < 0.0 || tau < 0.0 {
            return Err(Error::OutOfRange {
                name: "volatility or tau",
                value: sigma.min(tau),
                reason: "must be non-negative",
            });
        }
        Ok(TerminalLaw { spot, drift, sigma, tau })
    }

    /// Samples of block `b`, in draw order; antithetic partners follow
    /// their draw.
    pub fn block_samples(&self, cfg: &PathConfig, b: u64, out: &mut Vec<f64>) {
        let log_drift = (self.drift - 0.5 * self.sigma * self.sigma) * self.tau;
        let vol_sqrt = self.sigma * libm::sqrt(self.tau);
        let (start, end) = cfg.block_range(b);
        let mut normals = NormalStream::new(cfg.seed, b);
        for _ in start..end {
            let z = normals.next_normal();
            out.push(self.spot * libm::exp(log_drift + vol_sqrt * z));
            if cfg.antithetic {
                out.push(self.spot * libm::exp(log_drift - vol_sqrt * z));
            }
        }
    }
}

/// `S·exp{(drift − σ²/2)τ + σ√τ·Z}` for `cfg.n_paths` draws.
pub fn terminal_samples(law: &TerminalLaw, cfg: &PathConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    let mut out = Vec::with_capacity(cfg.n_paths as usize);
    for b in 0..cfg.n_blocks() {
        law.block_samples(cfg, b, &mut out);
    }
    Ok(out)
}
