//! Multi-threaded drivers over the block kernels of `coinopt-core`.
//!
//! Blocks are evaluated on a pool of worker threads and their results are
//! combined in block order, so every method here returns exactly what its
//! sequential core counterpart returns.

use coinopt_core::hedge::{HedgeKernel, HedgeReport, HedgeSimConfig};
use coinopt_core::mc::{McEstimate, McKernel, Moments, PathConfig, TerminalLaw};
use coinopt_core::{MarketState, OptionContract};
use rayon::prelude::*;

use crate::error::AppError;

pub struct Workers {
    pool: rayon::ThreadPool,
}

impl Workers {
    pub fn new(workers: usize) -> Result<Workers, AppError> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers.max(1))
            .build()
            .map_err(|e| AppError::Runtime(e.to_string()))?;
        Ok(Workers { pool })
    }

    pub fn install<R: Send>(&self, f: impl FnOnce() -> R + Send) -> R {
        self.pool.install(f)
    }

    pub fn mc_price(
        &self,
        contract: &OptionContract,
        market: &MarketState,
        cfg: &PathConfig,
    ) -> Result<McEstimate, AppError> {
        cfg.validate()?;
        let kernel = McKernel::new(contract, market)?;
        if let Some(done) = kernel.expired(market, cfg)? {
            return Ok(done);
        }
        let blocks: Vec<Moments> = self.install(|| {
            (0..cfg.n_blocks())
                .into_par_iter()
                .map(|b| kernel.block_moments(cfg, b))
                .collect()
        });
        let total = blocks.into_iter().fold(Moments::default(), Moments::merge);
        Ok(kernel.estimate(total)?)
    }

    pub fn terminal_samples(&self, law: &TerminalLaw, cfg: &PathConfig) -> Result<Vec<f64>, AppError> {
        cfg.validate()?;
        let blocks: Vec<Vec<f64>> = self.install(|| {
            (0..cfg.n_blocks())
                .into_par_iter()
                .map(|b| {
                    let mut out = Vec::new();
                    law.block_samples(cfg, b, &mut out);
                    out
                })
                .collect()
        });
        Ok(blocks.concat())
    }

    pub fn simulate_hedge(
        &self,
        contract: &OptionContract,
        market: &MarketState,
        cfg: &HedgeSimConfig,
    ) -> Result<HedgeReport, AppError> {
        let kernel = HedgeKernel::new(contract, market, cfg)?;
        let blocks: Vec<coinopt_core::Result<Vec<f64>>> = self.install(|| {
            (0..kernel.n_blocks())
                .into_par_iter()
                .map(|b| {
                    let mut out = Vec::new();
                    kernel.block_pnls(b, &mut out).map(|()| out)
                })
                .collect()
        });
        let mut pnls = Vec::with_capacity(cfg.paths.n_paths as usize);
        for block in blocks {
            pnls.extend(block?);
        }
        Ok(kernel.report(&pnls)?)
    }
}

/// [`Workers::mc_price`] on a pool of `cfg.workers` threads.
pub fn mc_price(
    contract: &OptionContract,
    market: &MarketState,
    cfg: &PathConfig,
) -> Result<McEstimate, AppError> {
    Workers::new(cfg.workers)?.mc_price(contract, market, cfg)
}

pub fn terminal_samples(law: &TerminalLaw, cfg: &PathConfig) -> Result<Vec<f64>, AppError> {
    Workers::new(cfg.workers)?.terminal_samples(law, cfg)
}

pub fn simulate_hedge(
    contract: &OptionContract,
    market: &MarketState,
    cfg: &HedgeSimConfig,
) -> Result<HedgeReport, AppError> {
    Workers::new(cfg.paths.workers)?.simulate_hedge(contract, market, cfg)
}
