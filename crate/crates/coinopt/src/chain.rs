//! Option-chain CSV ingestion, batch pricing and emission.

use std::io::{Read, Write};

use chrono::{DateTime, NaiveTime, Utc};
use coinopt_core::greeks::{greeks_contract, GreekReport};
use coinopt_core::implied_vol::implied_vol;
use coinopt_core::{
    Currency, MarketState, OptionContract, ProductClass, QuantoFix, Timestamp,
};

use crate::instrument::{parse_instrument, InstrumentName};

pub const CHAIN_HEADER: [&str; 7] =
    ["instrument", "class", "spot", "vol", "rate", "quanto_fix", "observed_price"];

pub const PRICED_HEADER: [&str; 9] = [
    "instrument", "price", "delta", "gamma", "vega", "volga", "vanna", "theta", "implied_vol",
];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("line {line}: {reason}")]
pub struct ChainError {
    pub line: u64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainRow {
    /// 1-based line in the source file.
    pub line: u64,
    pub instrument: InstrumentName,
    pub class: ProductClass,
    pub spot: f64,
    pub vol: f64,
    pub rate: f64,
    pub quanto_fix: Option<f64>,
    /// In the contract's payout currency.
    pub observed_price: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LoadedChain {
    pub rows: Vec<ChainRow>,
    /// Rows skipped in lenient mode.
    pub skipped: Vec<ChainError>,
}

fn optional(cell: &str, name: &str) -> Result<Option<f64>, String> {
    let cell = cell.trim();
    if cell.is_empty() {
        return Ok(None);
    }
    let v: f64 = cell.parse().map_err(|_| format!("{name}: not a number: {cell:?}"))?;
    if v.is_finite() && v > 0.0 {
        Ok(Some(v))
    } else {
        Err(format!("{name} must be positive, got {cell}"))
    }
}

fn number(cell: &str, name: &str) -> Result<f64, String> {
    let v: f64 = cell
        .trim()
        .parse()
        .map_err(|_| format!("{name}: not a number: {cell:?}"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{name} must be finite"))
    }
}

fn parse_row(line: u64, rec: &csv::StringRecord) -> Result<ChainRow, String> {
    if rec.len() != CHAIN_HEADER.len() {
        return Err(format!("expected {} fields, got {}", CHAIN_HEADER.len(), rec.len()));
    }
    let instrument = parse_instrument(rec[0].trim()).map_err(|e| e.to_string())?;
    let class: ProductClass = rec[1].trim().parse().map_err(|e: coinopt_core::Error| e.to_string())?;
    let spot = number(&rec[2], "spot")?;
    let vol = number(&rec[3], "vol")?;
    let rate = number(&rec[4], "rate")?;
    if spot <= 0.0 {
        return Err("spot must be positive".into());
    }
    if vol <= 0.0 {
        return Err("vol must be positive".into());
    }
    let quanto_fix = optional(&rec[5], "quanto_fix")?;
    match (class.is_quanto(), quanto_fix) {
        (true, None) => return Err("missing quanto fix".into()),
        (false, Some(_)) => return Err(format!("unexpected quanto fix for {class} row")),
        _ => {}
    }
    let observed_price = optional(&rec[6], "observed_price")?;
    Ok(ChainRow { line, instrument, class, spot, vol, rate, quanto_fix, observed_price })
}

/// Reads a chain. Strict mode stops at the first invalid row; lenient mode
/// skips it and records why.
pub fn load_chain<R: Read>(input: R, lenient: bool) -> Result<LoadedChain, ChainError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(input);
    let header = reader
        .headers()
        .map_err(|e| ChainError { line: 1, reason: e.to_string() })?;
    let got: Vec<&str> = header.iter().map(str::trim).collect();
    if got != CHAIN_HEADER {
        return Err(ChainError {
            line: 1,
            reason: format!("expected header {}", CHAIN_HEADER.join(",")),
        });
    }
    let mut out = LoadedChain::default();
    for rec in reader.records() {
        let (line, parsed) = match rec {
            Ok(rec) => {
                let line = rec.position().map_or(0, |p| p.line());
                (line, parse_row(line, &rec))
            }
            Err(e) => (e.position().map_or(0, |p| p.line()), Err(e.to_string())),
        };
        match parsed {
            Ok(row) => out.rows.push(row),
            Err(reason) => {
                let e = ChainError { line, reason };
                if lenient {
                    out.skipped.push(e);
                } else {
                    return Err(e);
                }
            }
        }
    }
    Ok(out)
}

impl ChainRow {
    /// Contract with default currencies: quote USD (USDT for direct);
    /// quanto inverse pays USD, standard quanto converts USD into BTC, quanto
    /// direct converts USDT into USD.
    pub fn contract(&self) -> Result<OptionContract, coinopt_core::Error> {
        let n = &self.instrument;
        let quote = match self.class {
            ProductClass::Direct | ProductClass::QuantoDirect => Currency::USDT,
            _ => Currency::USD,
        };
        let expiry = n.expiry.and_time(NaiveTime::MIN).and_utc().timestamp();
        let mut c = OptionContract::new(self.class, n.side, n.asset, quote, n.strike)
            .with_expiry(Timestamp(expiry));
        if let Some(xbar) = self.quanto_fix {
            let (from, to) = match self.class {
                ProductClass::QuantoInverse => (n.asset, Currency::USD),
                ProductClass::StandardQuanto => (Currency::USD, Currency::BTC),
                _ => (Currency::USDT, Currency::USD),
            };
            c = c.with_quanto(QuantoFix::new(xbar, from, to)?);
        }
        c.validate()?;
        Ok(c)
    }

    /// Market as of `asof`, with expiry at 00:00 UTC on the expiry date and
    /// ACT/365 year fractions.
    pub fn market(&self, asof: DateTime<Utc>) -> Result<MarketState, coinopt_core::Error> {
        let expiry = Timestamp(self.instrument.expiry.and_time(NaiveTime::MIN).and_utc().timestamp());
        let tau = Timestamp(asof.timestamp()).year_fraction_to(expiry);
        MarketState::new(self.spot, self.vol, self.rate, 0.0, tau)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PricedRow {
    pub instrument: InstrumentName,
    pub report: GreekReport,
    pub implied_vol: Option<f64>,
}

/// Prices one row on its own.
pub fn price_row(row: &ChainRow, asof: DateTime<Utc>) -> Result<PricedRow, ChainError> {
    let fail = |e: coinopt_core::Error| ChainError { line: row.line, reason: e.to_string() };
    let contract = row.contract().map_err(fail)?;
    let market = row.market(asof).map_err(fail)?;
    let report = greeks_contract(&contract, &market).map_err(fail)?;
    let implied_vol = match row.observed_price {
        Some(p) => Some(implied_vol(&contract, &market, p).map_err(fail)?.sigma),
        None => None,
    };
    Ok(PricedRow { instrument: row.instrument, report, implied_vol })
}

/// Prices every row independently, in parallel, preserving order.
pub fn price_chain(rows: &[ChainRow], asof: DateTime<Utc>) -> Result<Vec<PricedRow>, ChainError> {
    use rayon::prelude::*;
    rows.par_iter().map(|r| price_row(r, asof)).collect()
}

/// 17 significant digits, enough to round-trip any f64.
fn cell(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn emit_priced_chain<W: Write>(rows: &[PricedRow], out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(PRICED_HEADER)?;
    for r in rows {
        let g = &r.report.greeks;
        let mut rec = vec![r.instrument.to_string()];
        rec.extend([g.price, g.delta, g.gamma, g.vega, g.volga, g.vanna, g.theta].map(cell));
        rec.push(r.implied_vol.map(cell).unwrap_or_default());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// One row of an emitted chain.
#[derive(Debug, Clone, PartialEq)]
pub struct PricedRecord {
    pub instrument: InstrumentName,
    /// `price, delta, gamma, vega, volga, vanna, theta`
    pub values: [f64; 7],
    pub implied_vol: Option<f64>,
}

pub fn read_priced_chain<R: Read>(input: R) -> Result<Vec<PricedRecord>, ChainError> {
    let mut reader = csv::Reader::from_reader(input);
    let mut out = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| ChainError { line: e.position().map_or(0, |p| p.line()), reason: e.to_string() })?;
        let line = rec.position().map_or(0, |p| p.line());
        let bad = |reason: String| ChainError { line, reason };
        if rec.len() != PRICED_HEADER.len() {
            return Err(bad("wrong field count".into()));
        }
        let instrument = parse_instrument(&rec[0]).map_err(|e| bad(e.to_string()))?;
        let mut values = [0.0; 7];
        for (i, v) in values.iter_mut().enumerate() {
            *v = rec[i + 1].parse().map_err(|_| bad(format!("bad {}", PRICED_HEADER[i + 1])))?;
        }
        let implied_vol = match &rec[8] {
            "" => None,
            s => Some(s.parse().map_err(|_| bad("bad implied_vol".into()))?),
        };
        out.push(PricedRecord { instrument, values, implied_vol });
    }
    Ok(out)
}

impl From<&PricedRow> for PricedRecord {
    fn from(r: &PricedRow) -> Self {
        PricedRecord {
            instrument: r.instrument,
            values: r.report.greeks.to_array(),
            implied_vol: r.implied_vol,
        }
    }
}
