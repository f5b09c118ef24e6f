//! Oracle comparisons behind `coinopt verify`.
//!
//! Every check draws its parameters from a seeded stream, so the report is
//! a pure function of the configuration.

use std::io::Write;

use coinopt_core::analytic::{
    parity_gap, price_contract, price_inverse, price_quanto_inverse, price_standard,
};
use coinopt_core::greeks::{
    fd_greeks, greeks_inverse, greeks_quanto_inverse, relative_errors, to_coin_denomination,
    BumpSpec, Greeks,
};
use coinopt_core::implied_vol::{implied_vol, tolerance};
use coinopt_core::mc::{NormalStream, PathConfig};
use coinopt_core::payoff::{payoff, Settlement};
use coinopt_core::{
    Currency, Denomination, MarketState, OptionContract, OptionSide, ProductClass, QuantoFix,
};

use crate::error::AppError;
use crate::format::num;
use crate::grids::table1;
use crate::parallel::Workers;

/// Payoff comparison table as displayed: BTC/USD then ETH-USD panel; per
/// panel standard, inverse, standard quanto and quanto inverse calls, then
/// the same puts.
pub const TABLE1_DISPLAYED: [[[&str; 5]; 8]; 2] = [
    [
        ["0", "0", "5000", "15000", "25000"],
        ["0", "0", "0.17", "0.38", "0.5"],
        ["0", "0", "0.22", "0.67", "1.11"],
        ["0", "0", "3750", "8438", "11250"],
        ["15000", "5000", "0", "0", "0"],
        ["1.5", "0.25", "0", "0", "0"],
        ["0.67", "0.22", "0", "0", "0"],
        ["33750", "5625", "0", "0", "0"],
    ],
    [
        ["0", "0", "0", "250", "750"],
        ["0", "0", "0", "0.125", "0.3"],
        ["0", "0", "0", "0.01", "0.03"],
        ["0", "0", "0", "250", "600"],
        ["1250", "750", "250", "0", "0"],
        ["2.5", "0.75", "0.17", "0", "0"],
        ["0.06", "0.03", "0.01", "0", "0"],
        ["5000", "1500", "333", "0", "0"],
    ],
];

/// Distance between `value` and a displayed number, in units of the last
/// displayed digit. Rounding to the display gives the display iff this is at
/// most 0.5 (ties away from zero).
pub fn display_error(value: f64, displayed: &str) -> f64 {
    let decimals = displayed.split_once('.').map_or(0, |(_, f)| f.len());
    let digits: f64 = displayed.replace('.', "").parse().expect("numeric literal");
    (value * 10f64.powi(decimals as i32) - digits).abs()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyConfig {
    pub seed: u64,
    pub paths: u64,
    pub grid: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { seed: 42, paths: 1_000_000, grid: 50 }
    }
}

impl VerifyConfig {
    pub fn validate(&self) -> Result<(), AppError> {
        if self.grid == 0 {
            return Err(AppError::Usage("grid must be at least 1".into()));
        }
        PathConfig::new(self.seed, self.paths).validate()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub points: usize,
    pub failures: usize,
    /// Failures tolerated (Monte Carlo checks only).
    pub allowed: usize,
    /// Largest error in the check's own unit.
    pub worst: f64,
    pub tolerance: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.failures <= self.allowed
    }
}

/// Seeded parameter stream; stream ids keep checks independent.
pub struct ParamStream(NormalStream);

impl ParamStream {
    pub fn new(seed: u64, stream: u64) -> ParamStream {
        ParamStream(NormalStream::new(seed, stream))
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.0.next_uniform()
    }

    pub fn side(&mut self) -> OptionSide {
        if self.0.next_uniform() < 0.5 {
            OptionSide::Call
        } else {
            OptionSide::Put
        }
    }

    /// Spot within ±`spread` log-moneyness of `strike`, σ ∈ [0.2, 2],
    /// τ ∈ [5, 365] days, r ∈ [0, 0.1], r_f ∈ [0, 0.05] when `foreign`.
    pub fn market(&mut self, strike: f64, spread: f64, foreign: bool) -> MarketState {
        let spot = strike * self.uniform(-spread, spread).exp();
        let vol = self.uniform(0.2, 2.0);
        let tau = self.uniform(5.0, 365.0) / 365.0;
        let r = self.uniform(0.0, 0.1);
        let rf = if foreign { self.uniform(0.0, 0.05) } else { 0.0 };
        MarketState::new(spot, vol, r, rf, tau).expect("grid parameters are valid")
    }
}

pub const STRIKE: f64 = 25_000.0;
pub const XBAR: f64 = 25_000.0;
pub const FD_TOLERANCE: f64 = 1e-6;

/// Contract of `class` on BTC with strike 25 000 and a representative fix.
pub fn sample_contract(class: ProductClass, side: OptionSide) -> OptionContract {
    let quote = match class {
        ProductClass::Direct | ProductClass::QuantoDirect => Currency::USDT,
        _ => Currency::USD,
    };
    let c = OptionContract::new(class, side, Currency::BTC, quote, STRIKE);
    let fix = match class {
        ProductClass::StandardQuanto => QuantoFix::new(1.0 / 22_500.0, Currency::USD, Currency::BTC),
        ProductClass::QuantoDirect => QuantoFix::new(1.0, Currency::USDT, Currency::USD),
        ProductClass::QuantoInverse => QuantoFix::new(XBAR, Currency::BTC, Currency::USD),
        _ => return c,
    };
    c.with_quanto(fix.expect("fixed quanto parameters are valid"))
}

/// Closed-form Greek families checked against finite differences.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GreekFamily {
    /// Garman-Kohlhagen Greeks of the quote-denominated inverse value.
    InverseQuote,
    /// Inverse Greeks in coins, the contract's payout currency.
    InverseCoin,
    QuantoInverse,
}

impl GreekFamily {
    pub const ALL: [GreekFamily; 3] =
        [GreekFamily::InverseQuote, GreekFamily::InverseCoin, GreekFamily::QuantoInverse];

    pub fn tag(self) -> &'static str {
        match self {
            GreekFamily::InverseQuote => "inverse_quote",
            GreekFamily::InverseCoin => "inverse_coin",
            GreekFamily::QuantoInverse => "quanto_inverse",
        }
    }

    fn foreign(self) -> bool {
        self != GreekFamily::QuantoInverse
    }

    /// Closed form and Richardson-extrapolated finite differences.
    pub fn pair(self, side: OptionSide, m: &MarketState) -> Result<(Greeks, Greeks), AppError> {
        let bumps = BumpSpec::extrapolated(m.tau);
        Ok(match self {
            GreekFamily::InverseQuote => (
                greeks_inverse(side, m, STRIKE)?,
                fd_greeks(|m: &MarketState| price_standard(side, m, STRIKE), m, &bumps)?,
            ),
            GreekFamily::InverseCoin => (
                to_coin_denomination(greeks_inverse(side, m, STRIKE)?, m.spot),
                fd_greeks(
                    |m: &MarketState| price_inverse(side, m, STRIKE, Denomination::Base),
                    m,
                    &bumps,
                )?,
            ),
            GreekFamily::QuantoInverse => (
                greeks_quanto_inverse(side, m, STRIKE, XBAR)?,
                fd_greeks(|m: &MarketState| price_quanto_inverse(side, m, STRIKE, XBAR), m, &bumps)?,
            ),
        })
    }
}

/// Rounding floor of the extrapolated second difference in σ: eight ulps
/// of the price amplified by the `16/(3h²)` stencil weight.
pub fn volga_rounding_floor(price: f64, tau: f64) -> f64 {
    let h = BumpSpec::extrapolated(tau).vol_abs;
    let h = 2f64.powi(h.log2().floor() as i32);
    8.0 * f64::EPSILON * price.abs() * 16.0 / (3.0 * h * h)
}

/// Per-Greek relative errors over `n` grid points, in [`Greeks::NAMES`]
/// order. `with_floor` adds [`volga_rounding_floor`] to the volga
/// denominator so that a pure rounding miss scores at most 1.
pub fn fd_errors(
    family: GreekFamily,
    seed: u64,
    n: usize,
    with_floor: bool,
) -> Result<Vec<[f64; 7]>, AppError> {
    let mut params = ParamStream::new(seed, 100 + family as u64);
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let side = params.side();
        let m = params.market(STRIKE, 0.7, family.foreign());
        let (closed, fd) = family.pair(side, &m)?;
        let mut e = relative_errors(&closed, &fd);
        if with_floor {
            let scale = FD_TOLERANCE * fd.volga.abs().max(1.0) + volga_rounding_floor(closed.price, m.tau);
            e[4] = (closed.volga - fd.volga).abs() / scale * FD_TOLERANCE;
        }
        out.push(e);
    }
    Ok(out)
}

fn max_of(xs: impl IntoIterator<Item = f64>) -> f64 {
    xs.into_iter().fold(0.0, f64::max)
}

fn count_over(errs: &[f64], tol: f64) -> usize {
    errs.iter().filter(|&&e| !(e <= tol)).count()
}

pub fn check_table1() -> Result<Check, AppError> {
    let cells = table1()?;
    let mut errs = Vec::with_capacity(cells.len());
    for (i, cell) in cells.iter().enumerate() {
        let shown = TABLE1_DISPLAYED[i / 40][(i % 40) / 5][i % 5];
        errs.push(display_error(cell.payoff, shown));
    }
    Ok(Check {
        name: "table1_payoffs".into(),
        points: errs.len(),
        failures: count_over(&errs, 0.5),
        allowed: 0,
        worst: max_of(errs),
        tolerance: 0.5,
    })
}

/// Quanto inverse call at S = 30 000, K = X̄ = 25 000, r = 0: τ in days, σ,
/// expected value and its tolerance.
pub const PRICE_ANCHORS: [(f64, f64, f64, f64); 5] = [
    (10.0, 2.0, 4_123.0, 5.0),
    (90.0, 2.0, 4_080.0, 10.0),
    (180.0, 2.0, 3_490.0, 10.0),
    (90.0, 0.5, 4_020.0, 10.0),
    (90.0, 1.0, 4_270.0, 15.0),
];

pub fn check_price_anchors() -> Result<Check, AppError> {
    let c = sample_contract(ProductClass::QuantoInverse, OptionSide::Call);
    let mut errs = Vec::new();
    for (days, vol, want, tol) in PRICE_ANCHORS {
        let m = MarketState::new(30_000.0, vol, 0.0, 0.0, days / 365.0)?;
        let p = price_contract(&c, &m)?.value.amount;
        errs.push((p - want).abs() / tol);
    }
    Ok(Check {
        name: "price_anchors".into(),
        points: errs.len(),
        failures: count_over(&errs, 1.0),
        allowed: 0,
        worst: max_of(errs),
        tolerance: 1.0,
    })
}

/// Quanto inverse put with K = X̄ = 9 000 settled at 3 500, and the matching
/// standard put.
pub fn black_swan_payoffs() -> Result<(f64, f64), AppError> {
    let qi = OptionContract::new(ProductClass::QuantoInverse, OptionSide::Put, Currency::BTC, Currency::USD, 9_000.0)
        .with_quanto(QuantoFix::new(9_000.0, Currency::BTC, Currency::USD)?);
    let std = OptionContract { class: ProductClass::Standard, quanto: None, ..qi };
    let s = Settlement::at(3_500.0);
    Ok((payoff(&qi, &s)?.amount, payoff(&std, &s)?.amount))
}

pub fn check_black_swan() -> Result<Check, AppError> {
    let (qi, std) = black_swan_payoffs()?;
    let err = (qi - 14_142.86).abs();
    let failures = usize::from(!(err <= 1.0)) + usize::from(!(qi > 2.0 * std));
    Ok(Check {
        name: "black_swan_put".into(),
        points: 2,
        failures,
        allowed: 0,
        worst: err,
        tolerance: 1.0,
    })
}

pub fn duality_errors(seed: u64, n: usize) -> Result<Vec<f64>, AppError> {
    let mut params = ParamStream::new(seed, 200);
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let side = params.side();
        let m = params.market(STRIKE, 0.7, true);
        let quote = price_inverse(side, &m, STRIKE, Denomination::Quote)?;
        let base = price_inverse(side, &m, STRIKE, Denomination::Base)?;
        out.push((quote - m.spot * base).abs() / quote.abs().max(f64::MIN_POSITIVE));
    }
    Ok(out)
}

pub fn check_duality(seed: u64) -> Result<Check, AppError> {
    let errs = duality_errors(seed, 100)?;
    Ok(Check {
        name: "inverse_duality".into(),
        points: errs.len(),
        failures: count_over(&errs, 1e-12),
        allowed: 0,
        worst: max_of(errs),
        tolerance: 1e-12,
    })
}

/// Volga is scored against the rounding-floor model: a second difference in
/// σ of a price of size `|f|` cannot resolve better than
/// [`volga_rounding_floor`], which exceeds 1e-6 on deep in-the-money corners.
pub fn check_fd(family: GreekFamily, seed: u64) -> Result<Check, AppError> {
    let errs: Vec<f64> = fd_errors(family, seed, 200, true)?.iter().map(|e| max_of(*e)).collect();
    Ok(Check {
        name: format!("fd_greeks_{}", family.tag()),
        points: errs.len(),
        failures: count_over(&errs, FD_TOLERANCE),
        allowed: 0,
        worst: max_of(errs),
        tolerance: FD_TOLERANCE,
    })
}

/// Shape of the quanto inverse call over a log-spaced spot grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeReport {
    /// Largest `price / (X̄e^{−rτ})`.
    pub bound_ratio: f64,
    pub gamma_sign_changes: usize,
    pub convex_then_concave: bool,
    pub delta_max_interior: bool,
    /// Largest `|parity gap| / X̄`.
    pub parity: f64,
}

pub fn quanto_inverse_shape(vol: f64, rate: f64, tau: f64) -> Result<ShapeReport, AppError> {
    const N: usize = 4001;
    let (lo, hi) = (1_000f64.ln(), 250_000f64.ln());
    let mut bound_ratio = 0.0f64;
    let mut parity = 0.0f64;
    let mut signs = Vec::with_capacity(N);
    let mut deltas = Vec::with_capacity(N);
    let cap = XBAR * (-rate * tau).exp();
    for i in 0..N {
        let s = (lo + (hi - lo) * i as f64 / (N - 1) as f64).exp();
        let m = MarketState::new(s, vol, rate, 0.0, tau)?;
        let g = greeks_quanto_inverse(OptionSide::Call, &m, STRIKE, XBAR)?;
        let put = price_quanto_inverse(OptionSide::Put, &m, STRIKE, XBAR)?;
        bound_ratio = bound_ratio.max(g.price / cap);
        parity = parity.max(parity_gap(g.price, put, &m, STRIKE, XBAR).abs() / XBAR);
        if g.gamma != 0.0 {
            signs.push(g.gamma > 0.0);
        }
        deltas.push(g.delta);
    }
    let gamma_sign_changes = signs.windows(2).filter(|w| w[0] != w[1]).count();
    let imax = deltas
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map_or(0, |(i, _)| i);
    Ok(ShapeReport {
        bound_ratio,
        gamma_sign_changes,
        convex_then_concave: signs.first() == Some(&true) && signs.last() == Some(&false),
        delta_max_interior: imax > 0 && imax + 1 < deltas.len(),
        parity,
    })
}

/// `(σ, r, τ in days)` combinations for the shape checks.
pub const SHAPE_CASES: [(f64, f64, f64); 6] = [
    (0.75, 0.0, 10.0),
    (0.75, 0.0, 90.0),
    (2.0, 0.0, 10.0),
    (2.0, 0.0, 180.0),
    (0.5, 0.05, 365.0),
    (1.2, 0.03, 30.0),
];

pub fn check_shape() -> Result<Check, AppError> {
    let mut failures = 0;
    let mut worst = 0.0f64;
    for (vol, rate, days) in SHAPE_CASES {
        let r = quanto_inverse_shape(vol, rate, days / 365.0)?;
        let ok = r.bound_ratio <= 1.0
            && r.gamma_sign_changes == 1
            && r.convex_then_concave
            && r.delta_max_interior
            && r.parity <= 1e-12;
        failures += usize::from(!ok);
        worst = worst.max(r.parity);
    }
    Ok(Check {
        name: "quanto_inverse_shape".into(),
        points: SHAPE_CASES.len(),
        failures,
        allowed: 0,
        worst,
        tolerance: 1e-12,
    })
}

pub fn check_implied_vol(seed: u64, n: usize) -> Result<Check, AppError> {
    let mut params = ParamStream::new(seed, 300);
    let mut errs = Vec::with_capacity(n * 2);
    for class in [ProductClass::Inverse, ProductClass::QuantoInverse] {
        for _ in 0..n {
            let side = params.side();
            let m = params.market(STRIKE, 0.3, false);
            let c = sample_contract(class, side);
            let target = price_contract(&c, &m)?.value.amount;
            let iv = implied_vol(&c, &m, target)?;
            let resid = iv.residual.abs() / tolerance(target);
            let sigma_err = if iv.roots_bracketed == 1 { (iv.sigma - m.vol).abs() / 1e-6 } else { 0.0 };
            errs.push(resid.max(sigma_err));
        }
    }
    Ok(Check {
        name: "implied_vol_round_trip".into(),
        points: errs.len(),
        failures: count_over(&errs, 1.0),
        allowed: 0,
        worst: max_of(errs),
        tolerance: 1.0,
    })
}

/// Closed form against Monte Carlo: `|MC − closed| / SE` per grid point.
pub fn mc_z_scores(
    class: ProductClass,
    cfg: &VerifyConfig,
    workers: &Workers,
) -> Result<Vec<f64>, AppError> {
    let idx = ProductClass::ALL.iter().position(|&c| c == class).unwrap_or(0) as u64;
    let mut params = ParamStream::new(cfg.seed, 400 + idx);
    let foreign = class != ProductClass::QuantoInverse;
    let mut out = Vec::with_capacity(cfg.grid);
    for i in 0..cfg.grid {
        let side = params.side();
        let mut m = params.market(STRIKE, 0.5, foreign);
        m.vol = params.uniform(0.2, 1.5);
        let c = sample_contract(class, side);
        let closed = price_contract(&c, &m)?.value.amount;
        let paths = PathConfig::new(cfg.seed ^ (idx << 32 | i as u64), cfg.paths);
        let est = workers.mc_price(&c, &m, &paths)?;
        let diff = (est.value.amount - closed).abs();
        out.push(if est.std_error > 0.0 { diff / est.std_error } else if diff == 0.0 { 0.0 } else { f64::INFINITY });
    }
    Ok(out)
}

/// Points beyond 3 SE tolerated on an `n`-point grid: 1% of the grid,
/// rounded up.
pub fn mc_allowance(n: usize) -> usize {
    n.div_ceil(100)
}

pub fn check_mc(class: ProductClass, cfg: &VerifyConfig, workers: &Workers) -> Result<Check, AppError> {
    let z = mc_z_scores(class, cfg, workers)?;
    let beyond_5 = count_over(&z, 5.0);
    let allowed = mc_allowance(z.len());
    let mut failures = count_over(&z, 3.0);
    if beyond_5 > 0 {
        // a 5 SE miss fails the check outright
        failures = failures.max(allowed + 1);
    }
    Ok(Check {
        name: format!("mc_{}", class.tag().replace('-', "_")),
        points: z.len(),
        failures,
        allowed,
        worst: max_of(z),
        tolerance: 3.0,
    })
}

pub fn run(cfg: &VerifyConfig, workers: &Workers) -> Result<Vec<Check>, AppError> {
    cfg.validate()?;
    let mut out = vec![
        check_table1()?,
        check_price_anchors()?,
        check_black_swan()?,
        check_duality(cfg.seed)?,
    ];
    for family in GreekFamily::ALL {
        out.push(check_fd(family, cfg.seed)?);
    }
    out.push(check_shape()?);
    out.push(check_implied_vol(cfg.seed, cfg.grid)?);
    for class in ProductClass::ALL {
        out.push(check_mc(class, cfg, workers)?);
    }
    Ok(out)
}

pub fn write_report<W: Write>(checks: &[Check], out: W) -> Result<(), AppError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["check", "points", "failures", "allowed", "worst", "tolerance", "status"])?;
    for c in checks {
        w.write_record([
            c.name.clone(),
            c.points.to_string(),
            c.failures.to_string(),
            c.allowed.to_string(),
            num(c.worst),
            num(c.tolerance),
            if c.passed() { "pass" } else { "fail" }.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
