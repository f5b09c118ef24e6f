//! Domain types shared by every pricing module.

use core::fmt;
use core::str::FromStr;

use crate::error::{finite, positive, Error, Result};

const CURRENCY_CAP: usize = 8;

/// Short uppercase currency tag such as `USD`, `USDT` or `BTC`.
///
/// Stored inline so the type stays `Copy` without an allocator.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Currency {
    len: u8,
    code: [u8; CURRENCY_CAP],
}

impl Currency {
    pub const USD: Currency = Currency::from_static("USD");
    pub const USDT: Currency = Currency::from_static("USDT");
    pub const USDC: Currency = Currency::from_static("USDC");
    pub const BTC: Currency = Currency::from_static("BTC");
    pub const ETH: Currency = Currency::from_static("ETH");
    pub const SOL: Currency = Currency::from_static("SOL");

    const fn from_static(s: &str) -> Currency {
        let bytes = s.as_bytes();
        let mut code = [0u8; CURRENCY_CAP];
        let mut i = 0;
        while i < bytes.len() {
            code[i] = bytes[i];
            i += 1;
        }
        Currency {
            len: bytes.len() as u8,
            code,
        }
    }

    /// Accepts 1 to 8 ASCII letters or digits; lowercase input is uppercased.
    pub fn new(code: &str) -> Result<Currency> {
        let bytes = code.as_bytes();
        if bytes.is_empty() || bytes.len() > CURRENCY_CAP {
            return Err(Error::InvalidCurrency);
        }
        let mut out = [0u8; CURRENCY_CAP];
        for (slot, &b) in out.iter_mut().zip(bytes) {
            if !b.is_ascii_alphanumeric() {
                return Err(Error::InvalidCurrency);
            }
            *slot = b.to_ascii_uppercase();
        }
        Ok(Currency {
            len: bytes.len() as u8,
            code: out,
        })
    }

    pub fn as_str(&self) -> &str {
        // only ASCII alphanumerics are ever stored
        core::str::from_utf8(&self.code[..self.len as usize]).unwrap_or("")
    }
}

impl FromStr for Currency {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Currency::new(s)
    }
}

impl fmt::Display for Currency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Debug for Currency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Currency({})", self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OptionSide {
    Call,
    Put,
}

impl OptionSide {
    /// +1 for a call, -1 for a put.
    #[inline]
    pub fn omega(self) -> f64 {
        match self {
            OptionSide::Call => 1.0,
            OptionSide::Put => -1.0,
        }
    }

    pub fn from_omega(omega: i32) -> Result<OptionSide> {
        match omega {
            1 => Ok(OptionSide::Call),
            -1 => Ok(OptionSide::Put),
            _ => Err(Error::OutOfRange {
                name: "omega",
                value: omega as f64,
                reason: "must be +1 or -1",
            }),
        }
    }
}

impl fmt::Display for OptionSide {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OptionSide::Call => "call",
            OptionSide::Put => "put",
        })
    }
}

impl FromStr for OptionSide {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "call" | "Call" | "CALL" | "C" | "c" => Ok(OptionSide::Call),
            "put" | "Put" | "PUT" | "P" | "p" => Ok(OptionSide::Put),
            _ => Err(Error::Degenerate("option side must be call or put")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProductClass {
    Standard,
    Direct,
    Inverse,
    StandardQuanto,
    QuantoDirect,
    QuantoInverse,
}

impl ProductClass {
    pub const ALL: [ProductClass; 6] = [
        ProductClass::Standard,
        ProductClass::Direct,
        ProductClass::Inverse,
        ProductClass::StandardQuanto,
        ProductClass::QuantoDirect,
        ProductClass::QuantoInverse,
    ];

    pub fn is_quanto(self) -> bool {
        matches!(
            self,
            ProductClass::StandardQuanto | ProductClass::QuantoDirect | ProductClass::QuantoInverse
        )
    }

    /// Payoff divided by the settlement price (point value).
    pub fn is_inverse(self) -> bool {
        matches!(self, ProductClass::Inverse | ProductClass::QuantoInverse)
    }

    pub fn tag(self) -> &'static str {
        match self {
            ProductClass::Standard => "standard",
            ProductClass::Direct => "direct",
            ProductClass::Inverse => "inverse",
            ProductClass::StandardQuanto => "standard-quanto",
            ProductClass::QuantoDirect => "quanto-direct",
            ProductClass::QuantoInverse => "quanto-inverse",
        }
    }
}

impl fmt::Display for ProductClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for ProductClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ProductClass::ALL
            .into_iter()
            .find(|c| c.tag().eq_ignore_ascii_case(s))
            .ok_or(Error::Degenerate("unknown product class"))
    }
}

/// Which leg of the currency pair a value is expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Denomination {
    /// The coin (BTC, ETH, ...).
    Base,
    /// The quote currency the strike is written in (USD, USDT, ...).
    Quote,
}

/// Fixed conversion factor agreed at inception.
///
/// `xbar` is the literal multiplier applied to the (point value of the)
/// payoff: 22 500 USD per BTC for a BTC quanto inverse, 1/22 500 BTC per USD
/// for a standard quanto paid in BTC.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantoFix {
    pub xbar: f64,
    pub source_denom: Currency,
    pub target_denom: Currency,
}

impl QuantoFix {
    pub fn new(xbar: f64, source_denom: Currency, target_denom: Currency) -> Result<QuantoFix> {
        let fix = QuantoFix {
            xbar,
            source_denom,
            target_denom,
        };
        fix.validate()?;
        Ok(fix)
    }

    pub fn validate(&self) -> Result<()> {
        positive("xbar", self.xbar)?;
        if self.source_denom == self.target_denom {
            return Err(Error::Degenerate("quanto source and target currency coincide"));
        }
        Ok(())
    }
}

/// Seconds since the Unix epoch, UTC.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Timestamp(pub i64);

impl Timestamp {
    /// ACT/365 fixed year fraction from `self` to `later`, floored at zero.
    pub fn year_fraction_to(self, later: Timestamp) -> f64 {
        let secs = (later.0 - self.0).max(0) as f64;
        secs / (365.0 * 86_400.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptionContract {
    pub underlying_base: Currency,
    pub underlying_quote: Currency,
    pub class: ProductClass,
    pub side: OptionSide,
    pub strike: f64,
    pub expiry: Timestamp,
    /// Number of coins.
    pub notional: f64,
    pub quanto: Option<QuantoFix>,
}

impl OptionContract {
    /// Unit-notional contract with a zero expiry timestamp; callers supply
    /// time to expiry through [`MarketState::tau`].
    pub fn new(
        class: ProductClass,
        side: OptionSide,
        underlying_base: Currency,
        underlying_quote: Currency,
        strike: f64,
    ) -> OptionContract {
        OptionContract {
            underlying_base,
            underlying_quote,
            class,
            side,
            strike,
            expiry: Timestamp::default(),
            notional: 1.0,
            quanto: None,
        }
    }

    pub fn with_quanto(mut self, fix: QuantoFix) -> Self {
        self.quanto = Some(fix);
        self
    }

    pub fn with_notional(mut self, notional: f64) -> Self {
        self.notional = notional;
        self
    }

    pub fn with_expiry(mut self, expiry: Timestamp) -> Self {
        self.expiry = expiry;
        self
    }

    pub fn validate(&self) -> Result<()> {
        positive("strike", self.strike)?;
        positive("notional", self.notional)?;
        if self.underlying_base == self.underlying_quote {
            return Err(Error::Degenerate("base and quote currency coincide"));
        }
        match (self.class.is_quanto(), &self.quanto) {
            (true, None) => Err(Error::MissingQuantoFix(self.class)),
            (false, Some(_)) => Err(Error::UnexpectedQuantoFix(self.class)),
            (true, Some(fix)) => fix.validate(),
            (false, None) => Ok(()),
        }
    }

    /// Currency the payoff is settled in.
    pub fn payout_denom(&self) -> Result<Currency> {
        match self.class {
            ProductClass::Standard | ProductClass::Direct => Ok(self.underlying_quote),
            ProductClass::Inverse => Ok(self.underlying_base),
            _ => self
                .quanto
                .map(|q| q.target_denom)
                .ok_or(Error::MissingQuantoFix(self.class)),
        }
    }

    /// Quanto multiplier, 1 for non-quanto classes.
    pub(crate) fn xbar(&self) -> f64 {
        self.quanto.map_or(1.0, |q| q.xbar)
    }
}

/// Market inputs for a single valuation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarketState {
    /// Quote units per base unit.
    pub spot: f64,
    /// Annualised volatility.
    pub vol: f64,
    pub rate_dom: f64,
    pub rate_for: f64,
    /// Years, ACT/365.
    pub tau: f64,
}

impl MarketState {
    pub fn new(spot: f64, vol: f64, rate_dom: f64, rate_for: f64, tau: f64) -> Result<MarketState> {
        let m = MarketState {
            spot,
            vol,
            rate_dom,
            rate_for,
            tau,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        positive("spot", self.spot)?;
        finite("rate_dom", self.rate_dom)?;
        finite("rate_for", self.rate_for)?;
        finite("tau", self.tau)?;
        finite("vol", self.vol)?;
        if self.tau < 0.0 {
            return Err(Error::OutOfRange {
                name: "tau",
                value: self.tau,
                reason: "must be nonnegative",
            });
        }
        if self.tau > 0.0 && self.vol <= 0.0 {
            return Err(Error::OutOfRange {
                name: "vol",
                value: self.vol,
                reason: "must be positive before expiry",
            });
        }
        if self.vol < 0.0 {
            return Err(Error::OutOfRange {
                name: "vol",
                value: self.vol,
                reason: "must be nonnegative",
            });
        }
        Ok(())
    }

    pub fn with_spot(mut self, spot: f64) -> Self {
        self.spot = spot;
        self
    }

    pub fn with_vol(mut self, vol: f64) -> Self {
        self.vol = vol;
        self
    }

    pub fn with_tau(mut self, tau: f64) -> Self {
        self.tau = tau;
        self
    }
}

/// An amount tagged with its currency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Money {
    pub amount: f64,
    pub denom: Currency,
}

impl Money {
    pub fn new(amount: f64, denom: Currency) -> Money {
        Money { amount, denom }
    }

    pub fn zero(denom: Currency) -> Money {
        Money { amount: 0.0, denom }
    }

    fn same_denom(&self, other: &Money) -> Result<()> {
        if self.denom == other.denom {
            Ok(())
        } else {
            Err(Error::DenominationMismatch {
                expected: self.denom,
                actual: other.denom,
            })
        }
    }

    pub fn checked_add(self, other: Money) -> Result<Money> {
        self.same_denom(&other)?;
        Ok(Money::new(self.amount + other.amount, self.denom))
    }

    pub fn checked_sub(self, other: Money) -> Result<Money> {
        self.same_denom(&other)?;
        Ok(Money::new(self.amount - other.amount, self.denom))
    }

    pub fn scale(self, factor: f64) -> Money {
        Money::new(self.amount * factor, self.denom)
    }

    /// Converts at `rate` units of `to` per unit of `self.denom`.
    pub fn convert(self, rate: f64, to: Currency) -> Money {
        Money::new(self.amount * rate, to)
    }
}

impl fmt::Display for Money {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.amount, self.denom)
    }
}

/// Black-Scholes d-values; `d2 = d1 - σ√τ`, `d3 = d2 - σ√τ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DValues {
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
}
