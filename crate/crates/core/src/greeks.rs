//! Closed-form Greeks for inverse and quanto inverse options and a central
//! finite-difference engine used to validate them.
//!
//! Theta is reported as `−∂f/∂τ` throughout. Quanto inverse Greeks include
//! the `X̄` multiplier.
//!
//! The quanto inverse volga ships the form obtained by differentiating the
//! closed-form vega in σ:
//!
//! ```text
//! volga = X̄ { e^{−rτ} √τ φ(d2) d1 d2 / σ
//!             − 2ω (K/S) τ e^{(σ²−2r)τ} [Φ(ω d3)(1 + 2σ²τ) + ω σ φ(d3)(−d1/σ − √τ)] }
//! ```
//!
//! The commonly printed variant with `− σ φ(d3)(…)` inside the bracket
//! disagrees with finite differences.

use alloc::vec::Vec;

use crate::analytic::{price_quanto_inverse, price_standard};
use crate::error::{positive, Error, Result};
use crate::numeric::{cdf, d_values_unchecked, pdf};
use crate::types::{Currency, MarketState, OptionContract, OptionSide, ProductClass};

/// Price and first/second-order sensitivities.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Greeks {
    pub price: f64,
    /// ∂f/∂S
    pub delta: f64,
    /// ∂²f/∂S²
    pub gamma: f64,
    /// ∂f/∂σ
    pub vega: f64,
    /// ∂²f/∂σ²
    pub volga: f64,
    /// ∂²f/∂S∂σ
    pub vanna: f64,
    /// −∂f/∂τ
    pub theta: f64,
}

impl Greeks {
    pub fn scale(self, k: f64) -> Greeks {
        Greeks {
            price: self.price * k,
            delta: self.delta * k,
            gamma: self.gamma * k,
            vega: self.vega * k,
            volga: self.volga * k,
            vanna: self.vanna * k,
            theta: self.theta * k,
        }
    }

    /// `[price, delta, gamma, vega, volga, vanna, theta]`
    pub fn to_array(self) -> [f64; 7] {
        [
            self.price, self.delta, self.gamma, self.vega, self.volga, self.vanna, self.theta,
        ]
    }

    pub const NAMES: [&'static str; 7] =
        ["price", "delta", "gamma", "vega", "volga", "vanna", "theta"];

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreekReport {
    pub greeks: Greeks,
    pub denom: Currency,
}

fn require_live(market: &MarketState, strike: f64) -> Result<()> {
    market.validate()?;
    positive("strike", strike)?;
    if market.tau <= 0.0 {
        return Err(Error::Degenerate("Greeks need positive time to expiry"));
    }
    Ok(())
}

/// Greeks of the quote-denominated inverse (Garman-Kohlhagen) value.
pub fn greeks_inverse(side: OptionSide, market: &MarketState, strike: f64) -> Result<Greeks> {
    require_live(market, strike)?;
    let m = market;
    let w = side.omega();
    let (s, k, sigma, tau) = (m.spot, strike, m.vol, m.tau);
    let (r, rf) = (m.rate_dom, m.rate_for);
    let sqrt_t = libm::sqrt(tau);
    let d = d_values_unchecked(s, k, r, rf, sigma, tau);
    let df_dom = libm::exp(-r * tau);
    let df_for = libm::exp(-rf * tau);
    let nd1 = pdf(d.d1);

    let vega = s * df_for * nd1 * sqrt_t;
    Ok(Greeks {
        price: price_standard(side, m, k)?,
        delta: w * df_for * cdf(w * d.d1),
        gamma: df_for * nd1 / (s * sigma * sqrt_t),
        vega,
        volga: vega * d.d1 * d.d2 / sigma,
        vanna: -df_for * nd1 * d.d2 / sigma,
        theta: -df_for * s * nd1 * sigma / (2.0 * sqrt_t)
            + w * rf * s * df_for * cdf(w * d.d1)
            - w * r * k * df_dom * cdf(w * d.d2),
    })
}

/// Re-expresses quote-denominated Greeks of `V` as Greeks of `V/S`, the
/// coin-denominated value of an inverse option.
pub fn to_coin_denomination(g: Greeks, spot: f64) -> Greeks {
    let s = spot;
    Greeks {
        price: g.price / s,
        delta: g.delta / s - g.price / (s * s),
        gamma: g.gamma / s - 2.0 * g.delta / (s * s) + 2.0 * g.price / (s * s * s),
        vega: g.vega / s,
        volga: g.volga / s,
        vanna: g.vanna / s - g.vega / (s * s),
        theta: g.theta / s,
    }
}

/// Quanto inverse Greeks in the quanto target currency, `X̄` included.
pub fn greeks_quanto_inverse(
    side: OptionSide,
    market: &MarketState,
    strike: f64,
    xbar: f64,
) -> Result<Greeks> {
    require_live(market, strike)?;
    let price = price_quanto_inverse(side, market, strike, xbar)?;
    let m = market;
    let w = side.omega();
    let (s, k, sigma, tau, r) = (m.spot, strike, m.vol, m.tau, m.rate_dom);
    let sqrt_t = libm::sqrt(tau);
    let vol_sqrt = sigma * sqrt_t;
    let d = d_values_unchecked(s, k, r, 0.0, sigma, tau);
    let df = libm::exp(-r * tau);
    // e^{(σ²−2r)τ}
    let growth = libm::exp((sigma * sigma - 2.0 * r) * tau);
    let n3 = cdf(w * d.d3);
    let phi2 = pdf(d.d2);
    let phi3 = pdf(d.d3);
    let k_s = k / s;
    // ∂d3/∂σ
    let dd3_dsigma = -d.d1 / sigma - sqrt_t;

    let unit = Greeks {
        price: price / xbar,
        delta: w * growth * k_s / s * n3,
        gamma: growth * k_s / (s * s) * (phi3 / vol_sqrt - w * 2.0 * n3),
        vega: df * phi2 * sqrt_t - w * 2.0 * growth * sigma * tau * k_s * n3,
        volga: df * sqrt_t * phi2 * d.d2 * d.d1 / sigma
            - w * 2.0 * k_s * tau * growth
                * (n3 * (1.0 + 2.0 * sigma * sigma * tau) + w * sigma * phi3 * dd3_dsigma),
        vanna: w * growth * k_s / s * (2.0 * tau * sigma * n3 + w * phi3 * dd3_dsigma),
        theta: -df * (phi2 * sigma / (2.0 * sqrt_t) - w * r * cdf(w * d.d2))
            + w * growth * k_s * (sigma * sigma - 2.0 * r) * n3,
    };
    Ok(unit.scale(xbar))
}

/// Closed-form Greeks of a contract in its payout currency, scaled by notional.
pub fn greeks_contract(contract: &OptionContract, market: &MarketState) -> Result<GreekReport> {
    contract.validate()?;
    let (side, k) = (contract.side, contract.strike);
    let per_coin = match contract.class {
        ProductClass::Standard | ProductClass::Direct => greeks_inverse(side, market, k)?,
        ProductClass::Inverse => to_coin_denomination(greeks_inverse(side, market, k)?, market.spot),
        ProductClass::StandardQuanto | ProductClass::QuantoDirect => {
            greeks_inverse(side, market, k)?.scale(contract.xbar())
        }
        ProductClass::QuantoInverse => greeks_quanto_inverse(side, market, k, contract.xbar())?,
    };
    Ok(GreekReport {
        greeks: per_coin.scale(contract.notional),
        denom: contract.payout_denom()?,
    })
}

/// Bump sizes for [`fd_greeks`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BumpSpec {
    /// Spot bump as a fraction of spot.
    pub spot_rel: f64,
    /// Absolute volatility bump.
    pub vol_abs: f64,
    /// Absolute time bump in years.
    pub tau_abs: f64,
    /// Combine steps `h` and `h/2` as `(4·D(h/2) − D(h))/3`.
    pub richardson: bool,
}

impl BumpSpec {
    pub const MAX_BUMP: f64 = 1e-3;

    /// `h_S = 1e-5·S`, `h_σ = 1e-5`, `h_τ = min(1e-5, τ/10)`, plain central
    /// differences.
    pub fn for_tau(tau: f64) -> BumpSpec {
        BumpSpec {
            spot_rel: 1e-5,
            vol_abs: 1e-5,
            tau_abs: 1e-5_f64.min(tau / 10.0),
            richardson: false,
        }
    }

    /// Larger steps with Richardson extrapolation: `h_S = 1e-3·S`,
    /// `h_σ = 1e-3`, `h_τ = min(1e-3, τ/64)`.
    pub fn extrapolated(tau: f64) -> BumpSpec {
        BumpSpec {
            spot_rel: 1e-3,
            vol_abs: 1e-3,
            tau_abs: 1e-3_f64.min(tau / 64.0),
            richardson: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("spot bump", self.spot_rel),
            ("vol bump", self.vol_abs),
            ("tau bump", self.tau_abs),
        ] {
            positive(name, v)?;
            if v > Self::MAX_BUMP {
                return Err(Error::OutOfRange {
                    name,
                    value: v,
                    reason: "bump larger than 1e-3 of its scale",
                });
            }
        }
        Ok(())
    }
}

/// Largest power of two not above `x`, so `a ± h` is exact for `a ≥ h`.
fn pow2_floor(x: f64) -> f64 {
    libm::exp2(libm::floor(libm::log2(x)))
}

struct Diffs {
    first: f64,
    second: f64,
}

fn central<F: Fn(f64) -> Result<f64>>(f: &F, x: f64, h: f64, fx: f64) -> Result<Diffs> {
    let up = f(x + h)?;
    let dn = f(x - h)?;
    Ok(Diffs {
        first: (up - dn) / (2.0 * h),
        second: (up - 2.0 * fx + dn) / (h * h),
    })
}

fn extrapolate(coarse: f64, fine: f64, richardson: bool) -> f64 {
    if richardson {
        (4.0 * fine - coarse) / 3.0
    } else {
        coarse
    }
}

/// Central finite-difference Greeks of an arbitrary pricer.
///
/// A bump that would push volatility or time to expiry to zero or below is
/// an error; the caller picks smaller bumps.
pub fn fd_greeks<F>(pricer: F, market: &MarketState, bumps: &BumpSpec) -> Result<Greeks>
where
    F: Fn(&MarketState) -> Result<f64>,
{
    market.validate()?;
    bumps.validate()?;
    let m = *market;
    let hs = pow2_floor(m.spot * bumps.spot_rel);
    let hv = pow2_floor(bumps.vol_abs);
    let ht = pow2_floor(bumps.tau_abs);
    if m.vol - hv <= 0.0 {
        return Err(Error::BumpCrossesBoundary("vol bump reaches zero volatility"));
    }
    if m.tau - ht <= 0.0 {
        return Err(Error::BumpCrossesBoundary("tau bump reaches expiry"));
    }

    let f0 = pricer(&m)?;
    let in_spot = |x: f64| pricer(&m.with_spot(x));
    let in_vol = |x: f64| pricer(&m.with_vol(x));
    let in_tau = |x: f64| pricer(&m.with_tau(x));
    let mixed = |h: f64, k: f64| -> Result<f64> {
        let pp = pricer(&m.with_spot(m.spot + h).with_vol(m.vol + k))?;
        let pm = pricer(&m.with_spot(m.spot + h).with_vol(m.vol - k))?;
        let mp = pricer(&m.with_spot(m.spot - h).with_vol(m.vol + k))?;
        let mm = pricer(&m.with_spot(m.spot - h).with_vol(m.vol - k))?;
        Ok((pp - pm - mp + mm) / (4.0 * h * k))
    };

    let s1 = central(&in_spot, m.spot, hs, f0)?;
    let v1 = central(&in_vol, m.vol, hv, f0)?;
    let t1 = central(&in_tau, m.tau, ht, f0)?;
    let x1 = mixed(hs, hv)?;
    if !bumps.richardson {
        return Ok(Greeks {
            price: f0,
            delta: s1.first,
            gamma: s1.second,
            vega: v1.first,
            volga: v1.second,
            vanna: x1,
            theta: -t1.first,
        });
    }
    let s2 = central(&in_spot, m.spot, hs / 2.0, f0)?;
    let v2 = central(&in_vol, m.vol, hv / 2.0, f0)?;
    let t2 = central(&in_tau, m.tau, ht / 2.0, f0)?;
    let x2 = mixed(hs / 2.0, hv / 2.0)?;
    Ok(Greeks {
        price: f0,
        delta: extrapolate(s1.first, s2.first, true),
        gamma: extrapolate(s1.second, s2.second, true),
        vega: extrapolate(v1.first, v2.first, true),
        volga: extrapolate(v1.second, v2.second, true),
        vanna: extrapolate(x1, x2, true),
        theta: -extrapolate(t1.first, t2.first, true),
    })
}

/// `|closed − fd| / max(1, |fd|)` per Greek, in [`Greeks::NAMES`] order.
pub fn relative_errors(closed: &Greeks, fd: &Greeks) -> [f64; 7] {
    let a = closed.to_array();
    let b = fd.to_array();
    core::array::from_fn(|i| (a[i] - b[i]).abs() / b[i].abs().max(1.0))
}

/// Parameters of a family of Greek curves over strike.
#[derive(Debug, Clone)]
pub struct CurveSpec {
    pub spot: f64,
    pub xbar: f64,
    pub vol: f64,
    pub rate: f64,
    pub strikes: Vec<f64>,
    /// Times to expiry in years.
    pub maturities: Vec<f64>,
}

impl Default for CurveSpec {
    /// Spot and fix at 25 000, 75% volatility, zero rate, strikes 5 000 to
    /// 60 000 in steps of 250, maturities of 10, 30 and 90 days.
    fn default() -> Self {
        CurveSpec {
            spot: 25_000.0,
            xbar: 25_000.0,
            vol: 0.75,
            rate: 0.0,
            strikes: (0..=220).map(|i| 5_000.0 + 250.0 * i as f64).collect(),
            maturities: alloc::vec![10.0 / 365.0, 30.0 / 365.0, 90.0 / 365.0],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub class: ProductClass,
    pub side: OptionSide,
    pub tau: f64,
    pub strike: f64,
    pub greeks: Greeks,
}

/// Greeks of inverse (quote-denominated) and quanto inverse calls and puts
/// over the strike grid, for every maturity.
pub fn greek_curves(spec: &CurveSpec) -> Result<Vec<CurvePoint>> {
    if spec.strikes.is_empty() || spec.maturities.is_empty() {
        return Err(Error::Degenerate("empty curve grid"));
    }
    let mut out = Vec::with_capacity(4 * spec.strikes.len() * spec.maturities.len());
    for class in [ProductClass::Inverse, ProductClass::QuantoInverse] {
        for side in [OptionSide::Call, OptionSide::Put] {
            for &tau in &spec.maturities {
                let m = MarketState::new(spec.spot, spec.vol, spec.rate, 0.0, tau)?;
                for &strike in &spec.strikes {
                    let greeks = match class {
                        ProductClass::Inverse => greeks_inverse(side, &m, strike)?,
                        _ => greeks_quanto_inverse(side, &m, strike, spec.xbar)?,
                    };
                    out.push(CurvePoint {
                        class,
                        side,
                        tau,
                        strike,
                        greeks,
                    });
                }
            }
        }
    }
    Ok(out)
}
