//! CSV grids: payoff comparison table, price surfaces and Greek curves.

use std::io::Write;

use coinopt_core::analytic::price_contract;
use coinopt_core::greeks::{greek_curves, CurveSpec, Greeks};
use coinopt_core::payoff::comparison_panels;
use coinopt_core::{MarketState, OptionContract, OptionSide, ProductClass};

use crate::error::AppError;
use crate::format::num;

#[derive(Debug, Clone, PartialEq)]
pub struct Table1Cell {
    pub panel: &'static str,
    pub product: &'static str,
    pub class: ProductClass,
    pub side: OptionSide,
    pub settlement: f64,
    pub payoff: f64,
    pub currency: String,
}

/// Both comparison panels, row-major: panel, contract, settlement.
pub fn table1() -> Result<Vec<Table1Cell>, AppError> {
    let mut out = Vec::with_capacity(80);
    for panel in comparison_panels() {
        let values = panel.evaluate()?;
        for ((product, contract), row) in panel.rows.iter().zip(values) {
            for (&settlement, money) in panel.settlements.iter().zip(row) {
                out.push(Table1Cell {
                    panel: panel.name,
                    product,
                    class: contract.class,
                    side: contract.side,
                    settlement,
                    payoff: money.amount,
                    currency: money.denom.to_string(),
                });
            }
        }
    }
    Ok(out)
}

pub fn write_table1<W: Write>(cells: &[Table1Cell], out: W) -> Result<(), AppError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["panel", "product", "class", "side", "settlement", "payoff", "currency"])?;
    for c in cells {
        w.write_record([
            c.panel.to_string(),
            c.product.to_string(),
            c.class.to_string(),
            c.side.to_string(),
            num(c.settlement),
            num(c.payoff),
            c.currency.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `LO:HI:N`, `N ≥ 2` evenly spaced points including both ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinGrid {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl LinGrid {
    pub fn parse(text: &str) -> Result<LinGrid, String> {
        let parts: Vec<&str> = text.split(':').collect();
        let [lo, hi, n] = parts.as_slice() else {
            return Err(format!("expected LO:HI:N, got {text:?}"));
        };
        let lo: f64 = lo.parse().map_err(|_| format!("bad grid start {lo:?}"))?;
        let hi: f64 = hi.parse().map_err(|_| format!("bad grid end {hi:?}"))?;
        let n: usize = n.parse().map_err(|_| format!("bad grid size {n:?}"))?;
        if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && hi > lo) {
            return Err("grid needs 0 < LO < HI".into());
        }
        if n < 2 {
            return Err("grid needs at least 2 points".into());
        }
        Ok(LinGrid { lo, hi, n })
    }

    pub fn points(&self) -> Vec<f64> {
        let step = (self.hi - self.lo) / (self.n - 1) as f64;
        (0..self.n)
            .map(|i| if i + 1 == self.n { self.hi } else { self.lo + step * i as f64 })
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct SurfaceSpec {
    pub contract: OptionContract,
    pub rate: f64,
    pub rate_foreign: f64,
    pub spots: LinGrid,
    pub taus: Vec<f64>,
    pub vols: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfacePoint {
    pub tau: f64,
    pub vol: f64,
    pub spot: f64,
    pub price: f64,
}

/// Prices over `tau × vol × spot`, in that nesting order.
pub fn surface(spec: &SurfaceSpec) -> Result<Vec<SurfacePoint>, AppError> {
    spec.contract.validate()?;
    let spots = spec.spots.points();
    let mut out = Vec::with_capacity(spec.taus.len() * spec.vols.len() * spots.len());
    for &tau in &spec.taus {
        for &vol in &spec.vols {
            for &spot in &spots {
                let m = MarketState::new(spot, vol, spec.rate, spec.rate_foreign, tau)?;
                let price = price_contract(&spec.contract, &m)?.value.amount;
                out.push(SurfacePoint { tau, vol, spot, price });
            }
        }
    }
    Ok(out)
}

pub fn write_surface<W: Write>(spec: &SurfaceSpec, points: &[SurfacePoint], out: W) -> Result<(), AppError> {
    let c = &spec.contract;
    let currency = c.payout_denom()?.to_string();
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["class", "side", "strike", "tau", "vol", "spot", "price", "currency"])?;
    for p in points {
        w.write_record([
            c.class.to_string(),
            c.side.to_string(),
            num(c.strike),
            num(p.tau),
            num(p.vol),
            num(p.spot),
            num(p.price),
            currency.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_curves<W: Write>(spec: &CurveSpec, out: W) -> Result<(), AppError> {
    let points = greek_curves(spec)?;
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["class", "side", "tau", "strike"];
    header.extend(Greeks::NAMES);
    w.write_record(&header)?;
    for p in &points {
        let mut rec = vec![p.class.to_string(), p.side.to_string(), num(p.tau), num(p.strike)];
        rec.extend(p.greeks.to_array().map(num));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
