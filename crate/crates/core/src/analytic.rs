//! Closed-form prices under geometric Brownian motion.
//!
//! Standard and direct options use Garman-Kohlhagen with a general foreign
//! (coin) rate. Inverse options are the same claim expressed in coins: the
//! coin-denominated value is the quote-denominated value divided by spot.
//! Quanto inverse options are priced by changing numeraire to the discounted
//! reciprocal of the underlying, which introduces the third d-value
//! `d3 = d2 − σ√τ`:
//!
//! ```text
//! V = ω e^{−rτ} X̄ [Φ(ω d2) − e^{(σ²−r)τ} (K/S) Φ(ω d3)]
//! ```

use crate::error::{positive, Error, Result};
use crate::numeric::{cdf, d_values_unchecked};
use crate::payoff::intrinsic;
use crate::types::{Denomination, MarketState, Money, OptionContract, OptionSide, ProductClass};

/// Times to expiry at or below this many years are valued at intrinsic.
pub const EXPIRY_EPSILON: f64 = 1e-12;

/// Price with the class and inputs it was computed from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriceQuote {
    pub value: Money,
    pub class: ProductClass,
    pub side: OptionSide,
    pub inputs: MarketState,
}

fn check_inputs(market: &MarketState, strike: f64) -> Result<()> {
    market.validate()?;
    positive("strike", strike)?;
    Ok(())
}

fn clamp_rounding(value: f64, scale: f64) -> Result<f64> {
    if value >= 0.0 {
        Ok(value)
    } else if value >= -1e-12 * scale {
        Ok(0.0)
    } else {
        Err(Error::NegativePrice(value))
    }
}

/// Garman-Kohlhagen value in the quote currency, per coin of notional:
/// `ω[e^{−r_f τ} S Φ(ω d1) − e^{−rτ} K Φ(ω d2)]`.
pub fn price_standard(side: OptionSide, market: &MarketState, strike: f64) -> Result<f64> {
    check_inputs(market, strike)?;
    if market.tau <= EXPIRY_EPSILON {
        return Ok(intrinsic(side, market.spot, strike));
    }
    let w = side.omega();
    let m = market;
    let d = d_values_unchecked(m.spot, strike, m.rate_dom, m.rate_for, m.vol, m.tau);
    let fwd_leg = libm::exp(-m.rate_for * m.tau) * m.spot * cdf(w * d.d1);
    let strike_leg = libm::exp(-m.rate_dom * m.tau) * strike * cdf(w * d.d2);
    clamp_rounding(w * (fwd_leg - strike_leg), m.spot + strike)
}

/// Inverse option value per coin of notional, in either leg of the pair.
///
/// The quote value equals [`price_standard`]; the coin value is that divided
/// by spot (a USD call is `1/S` units of coin-denominated puts).
pub fn price_inverse(
    side: OptionSide,
    market: &MarketState,
    strike: f64,
    denom: Denomination,
) -> Result<f64> {
    let quote = price_standard(side, market, strike)?;
    Ok(match denom {
        Denomination::Quote => quote,
        Denomination::Base => quote / market.spot,
    })
}

/// Quanto inverse value in the quanto target currency, per coin of notional.
///
/// The derivation holds the coin yield at zero, so a nonzero `rate_for` is
/// rejected rather than ignored.
pub fn price_quanto_inverse(
    side: OptionSide,
    market: &MarketState,
    strike: f64,
    xbar: f64,
) -> Result<f64> {
    check_inputs(market, strike)?;
    positive("xbar", xbar)?;
    if market.rate_for != 0.0 {
        return Err(Error::NonZeroForeignRate(market.rate_for));
    }
    let m = market;
    if m.tau <= EXPIRY_EPSILON {
        return Ok(xbar * intrinsic(side, m.spot, strike) / m.spot);
    }
    let w = side.omega();
    let r = m.rate_dom;
    let s2 = m.vol * m.vol;
    // reciprocal of spot, Y = 1/S
    let y = 1.0 / m.spot;
    let d = d_values_unchecked(m.spot, strike, r, 0.0, m.vol, m.tau);
    let bracket = cdf(w * d.d2) - libm::exp((s2 - r) * m.tau) * y * strike * cdf(w * d.d3);
    let unit = clamp_rounding(w * libm::exp(-r * m.tau) * bracket, 1.0)?;
    Ok(xbar * unit)
}

/// Residual of quanto inverse put-call parity:
/// `(C − P) − e^{−rτ} X̄ [1 − e^{(σ²−r)τ} K/S]`.
pub fn parity_gap(call: f64, put: f64, market: &MarketState, strike: f64, xbar: f64) -> f64 {
    let m = market;
    let r = m.rate_dom;
    let forward = libm::exp(-r * m.tau)
        * xbar
        * (1.0 - libm::exp((m.vol * m.vol - r) * m.tau) * strike / m.spot);
    (call - put) - forward
}

/// Prices a contract in its payout currency, scaled by notional.
///
/// Standard quanto and quanto direct are valued as `X̄` times the
/// Garman-Kohlhagen price with the underlying drifting at `r − r_f`, i.e. no
/// correlation adjustment between the underlying and the fixed FX pair.
pub fn price_contract(contract: &OptionContract, market: &MarketState) -> Result<PriceQuote> {
    contract.validate()?;
    let side = contract.side;
    let k = contract.strike;
    let per_coin = match contract.class {
        ProductClass::Standard | ProductClass::Direct => price_standard(side, market, k)?,
        ProductClass::Inverse => price_inverse(side, market, k, Denomination::Base)?,
        ProductClass::StandardQuanto | ProductClass::QuantoDirect => {
            contract.xbar() * price_standard(side, market, k)?
        }
        ProductClass::QuantoInverse => price_quanto_inverse(side, market, k, contract.xbar())?,
    };
    Ok(PriceQuote {
        value: Money::new(contract.notional * per_coin, contract.payout_denom()?),
        class: contract.class,
        side,
        inputs: *market,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{Currency, QuantoFix};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn mkt(spot: f64, vol: f64, r: f64, rf: f64, tau: f64) -> MarketState {
        MarketState::new(spot, vol, r, rf, tau).unwrap()
    }

    /// The separate call and put closed forms, used as oracles for the ω form.
    fn quanto_inverse_call_oracle(m: &MarketState, k: f64, xbar: f64) -> f64 {
        let d = d_values_unchecked(m.spot, k, m.rate_dom, 0.0, m.vol, m.tau);
        let r = m.rate_dom;
        libm::exp(-r * m.tau)
            * xbar
            * (cdf(d.d2) - libm::exp((m.vol * m.vol - r) * m.tau) * k / m.spot * cdf(d.d3))
    }

    fn quanto_inverse_put_oracle(m: &MarketState, k: f64, xbar: f64) -> f64 {
        let d = d_values_unchecked(m.spot, k, m.rate_dom, 0.0, m.vol, m.tau);
        let r = m.rate_dom;
        libm::exp(-r * m.tau)
            * xbar
            * (libm::exp((m.vol * m.vol - r) * m.tau) * k / m.spot * cdf(-d.d3) - cdf(-d.d2))
    }

    #[test]
    fn quanto_inverse_reference_prices() {
        let cases = [
            (10.0, 2.0, 4_123.0, 5.0),
            (90.0, 2.0, 4_080.0, 10.0),
            (180.0, 2.0, 3_490.0, 10.0),
            (90.0, 0.5, 4_020.0, 10.0),
            (90.0, 1.0, 4_270.0, 15.0),
        ];
        for (days, vol, want, tol) in cases {
            let m = mkt(30_000.0, vol, 0.0, 0.0, days / 365.0);
            let p = price_quanto_inverse(OptionSide::Call, &m, 25_000.0, 25_000.0).unwrap();
            assert!((p - want).abs() <= tol, "{days}d σ={vol}: {p}");
        }
    }

    #[test]
    fn omega_form_matches_separate_forms() {
        for &(s, k, vol, r, tau) in &[
            (30_000.0, 25_000.0, 2.0, 0.0, 0.1),
            (20_000.0, 25_000.0, 0.75, 0.03, 0.5),
            (25_000.0, 25_000.0, 0.4, 0.05, 1.0),
        ] {
            let m = mkt(s, vol, r, 0.0, tau);
            let c = price_quanto_inverse(OptionSide::Call, &m, k, 22_500.0).unwrap();
            let p = price_quanto_inverse(OptionSide::Put, &m, k, 22_500.0).unwrap();
            assert_relative_eq!(c, quanto_inverse_call_oracle(&m, k, 22_500.0), max_relative = 1e-14);
            assert_relative_eq!(p, quanto_inverse_put_oracle(&m, k, 22_500.0), max_relative = 1e-14);
        }
    }

    #[test]
    fn standard_parity_and_limits() {
        let m = mkt(25_000.0, 0.75, 0.04, 0.01, 0.3);
        let c = price_standard(OptionSide::Call, &m, 27_000.0).unwrap();
        let p = price_standard(OptionSide::Put, &m, 27_000.0).unwrap();
        let fwd = libm::exp(-0.01 * 0.3) * 25_000.0 - libm::exp(-0.04 * 0.3) * 27_000.0;
        assert!((c - p - fwd).abs() < 1e-9);

        let tiny = mkt(30_000.0, 1e-9, 0.0, 0.0, 0.5);
        assert_relative_eq!(
            price_standard(OptionSide::Call, &tiny, 25_000.0).unwrap(),
            5_000.0,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            price_quanto_inverse(OptionSide::Call, &tiny, 25_000.0, 25_000.0).unwrap(),
            25_000.0 * 5_000.0 / 30_000.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn atm_standard_call_value() {
        // Monte-Carlo cross-check lives in the acceptance suite; this pins the value.
        let m = mkt(25_000.0, 0.75, 0.0, 0.0, 30.0 / 365.0);
        let c = price_standard(OptionSide::Call, &m, 25_000.0).unwrap();
        assert!((c - 2_140.0).abs() < 5.0, "{c}");
    }

    #[test]
    fn expiry_returns_payoff() {
        let m = mkt(30_000.0, 0.0, 0.0, 0.0, 0.0);
        assert_eq!(price_standard(OptionSide::Call, &m, 25_000.0).unwrap(), 5_000.0);
        assert_eq!(price_standard(OptionSide::Put, &m, 25_000.0).unwrap(), 0.0);
        assert_eq!(
            price_inverse(OptionSide::Call, &m, 25_000.0, Denomination::Base).unwrap(),
            5_000.0 / 30_000.0
        );
        assert_eq!(
            price_quanto_inverse(OptionSide::Call, &m, 25_000.0, 22_500.0).unwrap(),
            3_750.0
        );
    }

    #[test]
    fn inverse_coin_value_reference() {
        let m = mkt(30_000.0, 2.0, 0.0, 0.0, 10.0 / 365.0);
        let b = price_inverse(OptionSide::Call, &m, 25_000.0, Denomination::Base).unwrap();
        // C/S with C from an independent Black-Scholes evaluation
        assert_relative_eq!(b, 0.221_449_661_167_894_7, max_relative = 1e-13);
    }

    #[test]
    fn deep_otm_is_worthless() {
        let m = mkt(20_000.0, 0.5, 0.0, 0.0, 2.0 / 365.0);
        assert!(price_inverse(OptionSide::Call, &m, 80_000.0, Denomination::Base).unwrap() < 1e-12);
        assert!(price_inverse(OptionSide::Call, &m, 80_000.0, Denomination::Quote).unwrap() < 1e-8);
    }

    #[test]
    fn quanto_inverse_rejects_foreign_rate() {
        let m = mkt(1.0, 0.5, 0.0, 0.01, 1.0);
        assert_eq!(
            price_quanto_inverse(OptionSide::Call, &m, 1.0, 1.0),
            Err(Error::NonZeroForeignRate(0.01))
        );
    }

    #[test]
    fn parity_gap_examples() {
        let m = mkt(1.0, 1e-9, 0.0, 0.0, 1.0);
        let c = price_quanto_inverse(OptionSide::Call, &m, 1.0, 10.0).unwrap();
        let p = price_quanto_inverse(OptionSide::Put, &m, 1.0, 10.0).unwrap();
        assert!((c - p).abs() < 1e-6);
        assert!(parity_gap(c, p, &m, 1.0, 10.0).abs() <= 1e-12 * 10.0);

        let m = mkt(30_000.0, 1.3, 0.02, 0.0, 0.7);
        let gap = |x: f64| {
            let c = price_quanto_inverse(OptionSide::Call, &m, 26_000.0, x).unwrap();
            let p = price_quanto_inverse(OptionSide::Put, &m, 26_000.0, x).unwrap();
            parity_gap(c, p, &m, 26_000.0, x)
        };
        assert!(gap(1.0).abs() <= 1e-12);
        assert!(gap(25_000.0).abs() <= 1e-12 * 25_000.0);
        // linear in xbar with a deliberately wrong call price
        assert_relative_eq!(parity_gap(1.0, 0.0, &m, 26_000.0, 2.0) - 1.0,
                            2.0 * (parity_gap(1.0, 0.0, &m, 26_000.0, 1.0) - 1.0), max_relative = 1e-12);
    }

    #[test]
    fn contract_pricing_denominations() {
        let m = mkt(30_000.0, 0.8, 0.0, 0.0, 0.25);
        let base = OptionContract::new(ProductClass::Inverse, OptionSide::Call, Currency::BTC, Currency::USD, 25_000.0)
            .with_notional(2.0);
        let q = price_contract(&base, &m).unwrap();
        assert_eq!(q.value.denom, Currency::BTC);
        let usd = price_standard(OptionSide::Call, &m, 25_000.0).unwrap();
        assert_relative_eq!(q.value.amount * 30_000.0, 2.0 * usd, max_relative = 1e-14);

        let qi = OptionContract { class: ProductClass::QuantoInverse, ..base }
            .with_quanto(QuantoFix::new(22_500.0, Currency::BTC, Currency::USD).unwrap());
        let v = price_contract(&qi, &m).unwrap();
        assert_eq!(v.value.denom, Currency::USD);

        let missing = OptionContract { class: ProductClass::StandardQuanto, ..base };
        assert!(price_contract(&missing, &m).is_err());
    }

    proptest! {
        #[test]
        fn duality(s in 1_000.0f64..100_000.0, kr in 0.5f64..2.0, vol in 0.1f64..2.5,
                   r in -0.02f64..0.1, rf in 0.0f64..0.05, tau in 0.005f64..2.0, call in any::<bool>()) {
            let side = if call { OptionSide::Call } else { OptionSide::Put };
            let m = mkt(s, vol, r, rf, tau);
            let k = s * kr;
            let quote = price_inverse(side, &m, k, Denomination::Quote).unwrap();
            let base = price_inverse(side, &m, k, Denomination::Base).unwrap();
            prop_assert!((quote - s * base).abs() <= 1e-12 * quote.abs().max(1e-300));
        }

        #[test]
        fn quanto_inverse_call_bounded(s in 1_000.0f64..1e6, kr in 0.01f64..5.0, vol in 0.05f64..2.5,
                                       r in 0.0f64..0.1, tau in 0.001f64..2.0, x in 1.0f64..1e5) {
            let m = mkt(s, vol, r, 0.0, tau);
            let c = price_quanto_inverse(OptionSide::Call, &m, s * kr, x).unwrap();
            prop_assert!(c >= 0.0);
            prop_assert!(c <= x * libm::exp(-r * tau) * (1.0 + 1e-12));
        }

        #[test]
        fn prices_nonnegative(s in 100.0f64..1e5, kr in 0.2f64..5.0, vol in 0.05f64..3.0,
                              r in 0.0f64..0.1, rf in 0.0f64..0.1, tau in 0.0f64..3.0) {
            let m = mkt(s, vol, r, rf, tau);
            for side in [OptionSide::Call, OptionSide::Put] {
                prop_assert!(price_standard(side, &m, s * kr).unwrap() >= 0.0);
                let m0 = MarketState { rate_for: 0.0, ..m };
                prop_assert!(price_quanto_inverse(side, &m0, s * kr, 10.0).unwrap() >= 0.0);
            }
        }
    }

    #[test]
    fn call_converges_to_discounted_cap() {
        let m = mkt(1e9, 0.75, 0.03, 0.0, 0.5);
        let c = price_quanto_inverse(OptionSide::Call, &m, 25_000.0, 22_500.0).unwrap();
        let cap = 22_500.0 * libm::exp(-0.03 * 0.5);
        assert!((cap - c) / cap < 1e-4);
    }
}
