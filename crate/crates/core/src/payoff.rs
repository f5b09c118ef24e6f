//! Terminal payoffs for every product class.
//!
//! With intrinsic value `I = (ω(S_T − K))⁺` and notional `N`:
//!
//! | class                           | payoff        | paid in             |
//! |---------------------------------|---------------|---------------------|
//! | standard, direct                | `N·I`         | quote currency      |
//! | inverse                         | `N·I/S_T`     | base coin           |
//! | standard quanto, quanto direct  | `N·X̄·I`       | quanto target       |
//! | quanto inverse                  | `N·X̄·I/S_T`   | quanto target       |

use alloc::vec::Vec;

use crate::error::{positive, Error, Result};
use crate::types::{Currency, Money, OptionContract, OptionSide, ProductClass, QuantoFix};

/// Settlement observation at expiry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Settlement {
    /// Settlement index value `S_T`.
    pub price: f64,
    /// Spot rate at settlement used to translate coin payoffs into the quote
    /// currency. It need not equal the index value.
    pub spot_at_settlement: Option<f64>,
}

impl Settlement {
    pub fn at(price: f64) -> Settlement {
        Settlement {
            price,
            spot_at_settlement: None,
        }
    }

    pub fn with_spot(price: f64, spot: f64) -> Settlement {
        Settlement {
            price,
            spot_at_settlement: Some(spot),
        }
    }

    pub fn validate(&self) -> Result<()> {
        positive("settlement price", self.price)?;
        if let Some(s) = self.spot_at_settlement {
            positive("spot at settlement", s)?;
        }
        Ok(())
    }
}

/// `(ω(S_T − K))⁺`, exactly zero at the strike.
#[inline]
pub fn intrinsic(side: OptionSide, settle: f64, strike: f64) -> f64 {
    let v = side.omega() * (settle - strike);
    if v > 0.0 {
        v
    } else {
        0.0
    }
}

/// Payoff amount without validation. `xbar` is 1 for non-quanto classes.
#[inline]
pub(crate) fn payoff_amount(
    class: ProductClass,
    side: OptionSide,
    strike: f64,
    xbar: f64,
    notional: f64,
    settle: f64,
) -> f64 {
    let i = intrinsic(side, settle, strike);
    match class {
        ProductClass::Standard | ProductClass::Direct => notional * i,
        ProductClass::Inverse => notional * i / settle,
        ProductClass::StandardQuanto | ProductClass::QuantoDirect => notional * xbar * i,
        ProductClass::QuantoInverse => notional * xbar * i / settle,
    }
}

pub fn payoff(contract: &OptionContract, settlement: &Settlement) -> Result<Money> {
    contract.validate()?;
    settlement.validate()?;
    let amount = payoff_amount(
        contract.class,
        contract.side,
        contract.strike,
        contract.xbar(),
        contract.notional,
        settlement.price,
    );
    Ok(Money::new(amount, contract.payout_denom()?))
}

/// Translates a coin-denominated inverse payoff into the contract's quote
/// currency at the settlement spot `S̄_T`.
pub fn usd_translation(
    contract: &OptionContract,
    inverse_payoff: Money,
    settlement: &Settlement,
) -> Result<Money> {
    settlement.validate()?;
    if inverse_payoff.denom != contract.underlying_base {
        return Err(Error::DenominationMismatch {
            expected: contract.underlying_base,
            actual: inverse_payoff.denom,
        });
    }
    let spot = settlement
        .spot_at_settlement
        .ok_or(Error::Degenerate("spot at settlement required for translation"))?;
    Ok(inverse_payoff.convert(spot, contract.underlying_quote))
}

/// Row per contract, column per settlement price.
pub fn payoff_table(settlements: &[f64], contracts: &[OptionContract]) -> Result<Vec<Vec<Money>>> {
    if settlements.is_empty() {
        return Err(Error::Degenerate("empty settlement grid"));
    }
    contracts
        .iter()
        .map(|c| {
            settlements
                .iter()
                .map(|&s| payoff(c, &Settlement::at(s)))
                .collect()
        })
        .collect()
}

/// A labelled set of contracts evaluated over one settlement grid.
#[derive(Debug, Clone)]
pub struct PayoffPanel {
    pub name: &'static str,
    pub settlements: Vec<f64>,
    pub rows: Vec<(&'static str, OptionContract)>,
}

impl PayoffPanel {
    pub fn evaluate(&self) -> Result<Vec<Vec<Money>>> {
        let contracts: Vec<OptionContract> = self.rows.iter().map(|(_, c)| *c).collect();
        payoff_table(&self.settlements, &contracts)
    }
}

fn comparison_panel(
    name: &'static str,
    coin: Currency,
    strike: f64,
    settlements: Vec<f64>,
    quanto_inverse_xbar: f64,
) -> PayoffPanel {
    // BTC-based trader fixing 22 500 USD per BTC for the standard quanto
    let standard_quanto = QuantoFix {
        xbar: 1.0 / 22_500.0,
        source_denom: Currency::USD,
        target_denom: Currency::BTC,
    };
    let quanto_inverse = QuantoFix {
        xbar: quanto_inverse_xbar,
        source_denom: coin,
        target_denom: Currency::USD,
    };
    let mut rows = Vec::with_capacity(8);
    for side in [OptionSide::Call, OptionSide::Put] {
        let base = OptionContract::new(ProductClass::Standard, side, coin, Currency::USD, strike);
        rows.push(("standard", base));
        rows.push((
            "inverse",
            OptionContract {
                class: ProductClass::Inverse,
                ..base
            },
        ));
        rows.push((
            "standard-quanto",
            OptionContract {
                class: ProductClass::StandardQuanto,
                ..base
            }
            .with_quanto(standard_quanto),
        ));
        rows.push((
            "quanto-inverse",
            OptionContract {
                class: ProductClass::QuantoInverse,
                ..base
            }
            .with_quanto(quanto_inverse),
        ));
    }
    PayoffPanel {
        name,
        settlements,
        rows,
    }
}

/// The BTC/USD and ETH-USD payoff comparison panels: strike 25 000 with a
/// 22 500 USD/BTC fix, and strike 1 750 with a 2 000 USD/ETH fix.
pub fn comparison_panels() -> [PayoffPanel; 2] {
    [
        comparison_panel(
            "BTC/USD",
            Currency::BTC,
            25_000.0,
            alloc::vec![10_000.0, 20_000.0, 30_000.0, 40_000.0, 50_000.0],
            22_500.0,
        ),
        comparison_panel(
            "ETH-USD",
            Currency::ETH,
            1_750.0,
            alloc::vec![500.0, 1_000.0, 1_500.0, 2_000.0, 2_500.0],
            2_000.0,
        ),
    ]
}
