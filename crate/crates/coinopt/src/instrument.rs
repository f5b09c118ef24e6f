//! Exchange-style instrument names: `ASSET-DDMMMYY-STRIKE-C|P`.

use std::fmt;
use std::str::FromStr;

use chrono::{Datelike, NaiveDate};
use coinopt_core::{Currency, OptionSide};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("instrument {text:?}: token {position} ({token:?}): {reason}")]
pub struct InstrumentError {
    pub text: String,
    /// 1-based token index: asset, expiry, strike, side.
    pub position: usize,
    pub token: String,
    pub reason: &'static str,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InstrumentName {
    pub asset: Currency,
    pub expiry: NaiveDate,
    pub strike: f64,
    pub side: OptionSide,
}

const MONTHS: [&str; 12] = [
    "JAN", "FEB", "MAR", "APR", "MAY", "JUN", "JUL", "AUG", "SEP", "OCT", "NOV", "DEC",
];

fn parse_expiry(tok: &str) -> Result<NaiveDate, &'static str> {
    if !tok.is_ascii() {
        return Err("expected DDMMMYY");
    }
    let split = tok.find(|c: char| !c.is_ascii_digit()).ok_or("expected DDMMMYY")?;
    let (day, rest) = tok.split_at(split);
    if day.is_empty() || day.len() > 2 || rest.len() != 5 {
        return Err("expected DDMMMYY");
    }
    let (mon, year) = rest.split_at(3);
    let month = MONTHS
        .iter()
        .position(|m| m.eq_ignore_ascii_case(mon))
        .ok_or("unknown month")? as u32
        + 1;
    if !year.bytes().all(|b| b.is_ascii_digit()) {
        return Err("expected two-digit year");
    }
    let day: u32 = day.parse().map_err(|_| "bad day")?;
    let year: i32 = 2000 + year.parse::<i32>().map_err(|_| "expected two-digit year")?;
    NaiveDate::from_ymd_opt(year, month, day).ok_or("no such date")
}

fn parse_strike(tok: &str) -> Result<f64, &'static str> {
    let digits = tok.bytes().filter(|b| b.is_ascii_digit()).count();
    let dots = tok.bytes().filter(|&b| b == b'.').count();
    if digits == 0 || digits + dots != tok.len() || dots > 1 {
        return Err("expected a positive decimal strike");
    }
    let k: f64 = tok.parse().map_err(|_| "expected a positive decimal strike")?;
    if k > 0.0 && k.is_finite() {
        Ok(k)
    } else {
        Err("strike must be positive")
    }
}

/// Parses `ASSET-DDMMMYY-STRIKE-C|P`. Letters are case-insensitive and
/// leading zeros are accepted; [`InstrumentName`]'s `Display` writes the
/// normalized form.
pub fn parse_instrument(text: &str) -> Result<InstrumentName, InstrumentError> {
    let err = |position: usize, token: &str, reason| InstrumentError {
        text: text.to_string(),
        position,
        token: token.to_string(),
        reason,
    };
    let tokens: Vec<&str> = text.split('-').collect();
    if tokens.len() != 4 {
        let pos = if tokens.len() < 4 { tokens.len() + 1 } else { 5 };
        let tok = tokens.get(4).copied().unwrap_or("");
        return Err(err(pos, tok, "expected four dash-separated tokens"));
    }
    let asset = Currency::new(tokens[0]).map_err(|_| err(1, tokens[0], "expected 1-8 letters or digits"))?;
    let expiry = parse_expiry(tokens[1]).map_err(|r| err(2, tokens[1], r))?;
    let strike = parse_strike(tokens[2]).map_err(|r| err(3, tokens[2], r))?;
    let side = match tokens[3] {
        "C" | "c" => OptionSide::Call,
        "P" | "p" => OptionSide::Put,
        t => return Err(err(4, t, "expected C or P")),
    };
    Ok(InstrumentName { asset, expiry, strike, side })
}

impl FromStr for InstrumentName {
    type Err = InstrumentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_instrument(s)
    }
}

impl fmt::Display for InstrumentName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let side = match self.side {
            OptionSide::Call => 'C',
            OptionSide::Put => 'P',
        };
        write!(
            f,
            "{}-{}{}{:02}-{}-{}",
            self.asset,
            self.expiry.day(),
            MONTHS[self.expiry.month0() as usize],
            self.expiry.year() % 100,
            self.strike,
            side
        )
    }
}
