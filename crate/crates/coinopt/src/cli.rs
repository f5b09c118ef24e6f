//! Command-line front end.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, NaiveDate, Utc};
use clap::{Args, Parser, Subcommand};
use coinopt_core::analytic::price_contract;
use coinopt_core::greeks::{greeks_contract, CurveSpec, Greeks};
use coinopt_core::hedge::{GreekSource, HedgeReport, HedgeSimConfig};
use coinopt_core::implied_vol::implied_vol;
use coinopt_core::mc::PathConfig;
use coinopt_core::payoff::{payoff, usd_translation, Settlement};
use coinopt_core::{
    Currency, MarketState, OptionContract, OptionSide, ProductClass, QuantoFix,
};

use crate::chain::{emit_priced_chain, load_chain, price_chain};
use crate::error::AppError;
use crate::format::num;
use crate::grids::{surface, table1, write_curves, write_surface, write_table1, LinGrid, SurfaceSpec};
use crate::parallel::Workers;
use crate::verify::{self, VerifyConfig};

/// Duration: an integer followed by `d` (days) or `h` (hours), converted to
/// years on ACT/365.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dur(pub f64);

pub fn parse_dur(text: &str) -> Result<Dur, String> {
    let (digits, per_year) = if let Some(d) = text.strip_suffix('d') {
        (d, 365.0)
    } else if let Some(h) = text.strip_suffix('h') {
        (h, 365.0 * 24.0)
    } else {
        return Err(format!("expected <integer>d or <integer>h, got {text:?}"));
    };
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(format!("expected <integer>d or <integer>h, got {text:?}"));
    }
    let n: u64 = digits.parse().map_err(|_| format!("duration out of range: {text:?}"))?;
    Ok(Dur(n as f64 / per_year))
}

fn parse_num(text: &str) -> Result<f64, String> {
    text.trim().parse().map_err(|_| format!("bad number {text:?}"))
}

fn parse_years(text: &str) -> Result<f64, String> {
    parse_dur(text.trim()).map(|d| d.0)
}

fn parse_class(text: &str) -> Result<ProductClass, String> {
    text.parse().map_err(|_| {
        let names: Vec<&str> = ProductClass::ALL.iter().map(|c| c.tag()).collect();
        format!("expected one of {}", names.join(", "))
    })
}

fn parse_side(text: &str) -> Result<OptionSide, String> {
    text.parse().map_err(|_| "expected call or put".to_string())
}

fn parse_asof(text: &str) -> Result<DateTime<Utc>, String> {
    if let Ok(t) = DateTime::parse_from_rfc3339(text) {
        return Ok(t.with_timezone(&Utc));
    }
    NaiveDate::parse_from_str(text, "%Y-%m-%d")
        .map(|d| d.and_time(chrono::NaiveTime::MIN).and_utc())
        .map_err(|_| format!("expected RFC 3339 timestamp or YYYY-MM-DD, got {text:?}"))
}

#[derive(Debug, Parser)]
#[command(name = "coinopt", version, about = "Pricing, Greeks and hedging of inverse and quanto crypto options")]
pub struct Cli {
    /// Worker threads for simulations; results do not depend on it.
    #[arg(long, global = true, default_value_t = 1)]
    pub workers: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct ContractArgs {
    #[arg(long, value_parser = parse_class)]
    pub class: ProductClass,
    #[arg(long, value_parser = parse_side)]
    pub side: OptionSide,
    #[arg(long)]
    pub strike: f64,
    /// Fixed conversion factor; required for quanto classes only.
    #[arg(long)]
    pub quanto_fix: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub notional: f64,
    #[arg(long, default_value = "BTC")]
    pub asset: String,
}

#[derive(Debug, Args)]
pub struct MarketArgs {
    #[arg(long)]
    pub spot: f64,
    #[arg(long)]
    pub rate: f64,
    #[arg(long, default_value_t = 0.0)]
    pub rate_foreign: f64,
    /// e.g. 10d or 36h
    #[arg(long, value_parser = parse_dur)]
    pub tau: Dur,
}

#[derive(Debug, Args)]
pub struct OutArg {
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form price in the payout currency.
    Price {
        #[command(flatten)]
        contract: ContractArgs,
        #[command(flatten)]
        market: MarketArgs,
        #[arg(long)]
        vol: f64,
    },
    /// Closed-form price and Greeks as a one-row CSV.
    Greeks {
        #[command(flatten)]
        contract: ContractArgs,
        #[command(flatten)]
        market: MarketArgs,
        #[arg(long)]
        vol: f64,
    },
    /// Payoff at settlement; with --spot-at-settle an inverse payoff is
    /// translated into the quote currency.
    Payoff {
        #[command(flatten)]
        contract: ContractArgs,
        #[arg(long)]
        settle: f64,
        #[arg(long)]
        spot_at_settle: Option<f64>,
    },
    /// Both payoff comparison panels.
    Table1 {
        #[command(flatten)]
        out: OutArg,
    },
    /// Price grid over spot, maturity and volatility.
    Surface {
        #[command(flatten)]
        contract: ContractArgs,
        #[arg(long, default_value_t = 0.0)]
        rate: f64,
        #[arg(long, default_value_t = 0.0)]
        rate_foreign: f64,
        /// LO:HI:N
        #[arg(long, value_parser = LinGrid::parse)]
        spot_grid: LinGrid,
        /// Comma-separated durations.
        #[arg(long, required = true, value_delimiter = ',', value_parser = parse_years)]
        tau: Vec<f64>,
        /// Comma-separated volatilities.
        #[arg(long, required = true, value_delimiter = ',', value_parser = parse_num)]
        vol: Vec<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Greek curves over strike for inverse and quanto inverse options.
    Curves {
        #[arg(long)]
        out: PathBuf,
    },
    /// Closed forms against finite differences and Monte Carlo.
    Verify {
        #[arg(long, default_value_t = 1_000_000)]
        paths: u64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 50)]
        grid: usize,
        #[command(flatten)]
        out: OutArg,
    },
    /// Implied volatility from a price in the payout currency.
    Iv {
        #[command(flatten)]
        contract: ContractArgs,
        #[command(flatten)]
        market: MarketArgs,
        #[arg(long)]
        price: f64,
    },
    /// Delta-hedging simulation on a correlated instrument.
    Hedge {
        #[command(flatten)]
        contract: ContractArgs,
        #[command(flatten)]
        market: MarketArgs,
        #[arg(long)]
        vol: f64,
        #[arg(long)]
        rho: f64,
        #[arg(long, value_parser = parse_dur)]
        rebalance: Dur,
        #[arg(long)]
        paths: u64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Index drift; defaults to the rate.
        #[arg(long)]
        mu_index: Option<f64>,
        /// Hedge-instrument drift; defaults to the rate.
        #[arg(long)]
        mu_hedge: Option<f64>,
        /// Hedge-instrument volatility; defaults to --vol.
        #[arg(long)]
        sigma_hedge: Option<f64>,
        /// Index volatility; defaults to --vol.
        #[arg(long)]
        sigma_index: Option<f64>,
        /// Simulation steps, a multiple of the rebalance count.
        #[arg(long)]
        driver_steps: Option<u32>,
        #[arg(long)]
        no_antithetic: bool,
        #[command(flatten)]
        out: OutArg,
    },
    /// Option-chain batch jobs.
    Chain {
        #[command(subcommand)]
        command: ChainCommand,
    },
}

#[derive(Debug, Subcommand)]
pub enum ChainCommand {
    /// Prices every row of a chain CSV.
    Price {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Valuation time (RFC 3339 or YYYY-MM-DD); defaults to now.
        #[arg(long, value_parser = parse_asof)]
        asof: Option<DateTime<Utc>>,
        /// Skip invalid rows with a warning instead of failing.
        #[arg(long)]
        lenient: bool,
    },
}

impl ContractArgs {
    pub fn build(&self) -> Result<OptionContract, AppError> {
        let asset = Currency::new(&self.asset)?;
        let quote = match self.class {
            ProductClass::Direct | ProductClass::QuantoDirect => Currency::USDT,
            _ => Currency::USD,
        };
        let mut c = OptionContract::new(self.class, self.side, asset, quote, self.strike)
            .with_notional(self.notional);
        match (self.class.is_quanto(), self.quanto_fix) {
            (true, Some(xbar)) => {
                let (from, to) = match self.class {
                    ProductClass::QuantoInverse => (asset, Currency::USD),
                    ProductClass::StandardQuanto => (Currency::USD, asset),
                    _ => (Currency::USDT, Currency::USD),
                };
                c = c.with_quanto(QuantoFix::new(xbar, from, to)?);
            }
            (true, None) => return Err(AppError::Usage(format!("--quanto-fix is required for {}", self.class))),
            (false, Some(_)) => {
                return Err(AppError::Usage(format!("--quanto-fix does not apply to {}", self.class)))
            }
            (false, None) => {}
        }
        c.validate()?;
        Ok(c)
    }
}

impl MarketArgs {
    pub fn build(&self, vol: f64) -> Result<MarketState, AppError> {
        Ok(MarketState::new(self.spot, vol, self.rate, self.rate_foreign, self.tau.0)?)
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, AppError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| AppError::Input { path: path.display().to_string(), source })
}

fn with_out<F>(out: &Option<PathBuf>, stdout: &mut dyn Write, f: F) -> Result<(), AppError>
where
    F: FnOnce(&mut dyn Write) -> Result<(), AppError>,
{
    match out {
        Some(p) => {
            let mut w = create(p)?;
            f(&mut w)?;
            w.flush()?;
            Ok(())
        }
        None => f(stdout),
    }
}

fn write_hedge<W: Write>(r: &HedgeReport, out: W) -> Result<(), AppError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "mean_pnl", "std_pnl", "std_error", "q01", "q05", "q50", "q95", "q99", "n_paths", "currency",
    ])?;
    let mut rec = vec![num(r.mean_pnl), num(r.std_pnl), num(r.std_error)];
    rec.extend(r.quantiles.map(num));
    rec.push(r.n_paths.to_string());
    rec.push(r.denom.to_string());
    w.write_record(&rec)?;
    w.flush()?;
    Ok(())
}

/// Runs a parsed command, writing results to `stdout` and warnings to
/// `stderr`.
pub fn execute(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), AppError> {
    if cli.workers == 0 {
        return Err(AppError::Usage("--workers must be at least 1".into()));
    }
    match cli.command {
        Command::Price { contract, market, vol } => {
            let c = contract.build()?;
            let m = market.build(vol)?;
            writeln!(stdout, "{}", num(price_contract(&c, &m)?.value.amount))?;
        }
        Command::Greeks { contract, market, vol } => {
            let c = contract.build()?;
            let m = market.build(vol)?;
            let g = greeks_contract(&c, &m)?;
            writeln!(stdout, "{},currency", Greeks::NAMES.join(","))?;
            let vals: Vec<String> = g.greeks.to_array().map(num).into();
            writeln!(stdout, "{},{}", vals.join(","), g.denom)?;
        }
        Command::Payoff { contract, settle, spot_at_settle } => {
            let c = contract.build()?;
            let s = match spot_at_settle {
                Some(spot) => Settlement::with_spot(settle, spot),
                None => Settlement::at(settle),
            };
            let mut p = payoff(&c, &s)?;
            if spot_at_settle.is_some() {
                if c.class != ProductClass::Inverse {
                    return Err(AppError::Usage("--spot-at-settle applies to inverse options only".into()));
                }
                p = usd_translation(&c, p, &s)?;
            }
            writeln!(stdout, "{}", num(p.amount))?;
        }
        Command::Table1 { out } => {
            let cells = table1()?;
            with_out(&out.out, stdout, |w| write_table1(&cells, w))?;
        }
        Command::Surface { contract, rate, rate_foreign, spot_grid, tau, vol, out } => {
            let spec = SurfaceSpec {
                contract: contract.build()?,
                rate,
                rate_foreign,
                spots: spot_grid,
                taus: tau,
                vols: vol,
            };
            let pts = surface(&spec)?;
            let mut w = create(&out)?;
            write_surface(&spec, &pts, &mut w)?;
            w.flush()?;
        }
        Command::Curves { out } => {
            let mut w = create(&out)?;
            write_curves(&CurveSpec::default(), &mut w)?;
            w.flush()?;
        }
        Command::Verify { paths, seed, grid, out } => {
            let cfg = VerifyConfig { seed, paths, grid };
            cfg.validate()?;
            let workers = Workers::new(cli.workers)?;
            let checks = verify::run(&cfg, &workers)?;
            with_out(&out.out, stdout, |w| verify::write_report(&checks, w))?;
            let failed = checks.iter().filter(|c| !c.passed()).count();
            if failed > 0 {
                return Err(AppError::Verification(failed));
            }
        }
        Command::Iv { contract, market, price } => {
            let c = contract.build()?;
            let m = market.build(1.0)?;
            let iv = implied_vol(&c, &m, price)?;
            if iv.multiple_roots() {
                writeln!(stderr, "warning: {} volatilities match this price; reporting the smallest", iv.roots_bracketed)?;
            }
            writeln!(stdout, "{}", num(iv.sigma))?;
        }
        Command::Hedge {
            contract,
            market,
            vol,
            rho,
            rebalance,
            paths,
            seed,
            mu_index,
            mu_hedge,
            sigma_hedge,
            sigma_index,
            driver_steps,
            no_antithetic,
            out,
        } => {
            let c = contract.build()?;
            let m = market.build(vol)?;
            let cfg = HedgeSimConfig {
                mu_index: mu_index.unwrap_or(m.rate_dom),
                sigma_index: sigma_index.unwrap_or(vol),
                mu_hedge: mu_hedge.unwrap_or(m.rate_dom),
                sigma_hedge: sigma_hedge.unwrap_or(vol),
                rho,
                rebalance_dt: rebalance.0,
                greek_source: GreekSource::for_class(c.class),
                hedge_spot: m.spot,
                driver_steps,
                paths: PathConfig::new(seed, paths)
                    .with_antithetic(!no_antithetic)
                    .with_workers(cli.workers),
            };
            cfg.validate(m.tau)?;
            let report = Workers::new(cli.workers)?.simulate_hedge(&c, &m, &cfg)?;
            with_out(&out.out, stdout, |w| write_hedge(&report, w))?;
        }
        Command::Chain { command: ChainCommand::Price { input, out, asof, lenient } } => {
            let file = File::open(&input)
                .map_err(|source| AppError::Input { path: input.display().to_string(), source })?;
            let chain = load_chain(BufReader::new(file), lenient)?;
            for e in &chain.skipped {
                writeln!(stderr, "warning: skipped {e}")?;
            }
            let asof = asof.unwrap_or_else(Utc::now);
            let priced = price_chain(&chain.rows, asof)?;
            let mut w = create(&out)?;
            emit_priced_chain(&priced, &mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

/// Parses `argv` and runs it; returns the process exit code.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { stdout.write_all(text.as_bytes()) } else { stderr.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(cli, stdout, stderr) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

/// [`run`] against the process's standard streams.
pub fn main_with_args(argv: impl IntoIterator<Item = OsString>) -> i32 {
    let stdout = io::stdout();
    let stderr = io::stderr();
    let mut out = stdout.lock();
    let mut err = stderr.lock();
    let code = run(argv, &mut out, &mut err);
    let _ = out.flush();
    code
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let mut argv = vec!["coinopt"];
        argv.extend_from_slice(args);
        let code = run(argv, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn durations() {
        assert_eq!(parse_dur("10d").unwrap().0, 10.0 / 365.0);
        assert_eq!(parse_dur("36h").unwrap().0, 36.0 / 8760.0);
        assert_eq!(parse_dur("0d").unwrap().0, 0.0);
        for bad in ["10", "d", "1.5d", "-1d", "10w", "1e2d", " 1d"] {
            assert!(parse_dur(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn asof_formats() {
        assert_eq!(parse_asof("2022-09-20").unwrap().timestamp(), 1_663_632_000);
        assert_eq!(parse_asof("2022-09-20T12:00:00Z").unwrap().timestamp(), 1_663_675_200);
        assert!(parse_asof("20/09/2022").is_err());
    }

    #[test]
    fn price_anchor() {
        let (code, out, _) = run_args(&[
            "price", "--class", "quanto-inverse", "--side", "call", "--spot", "30000", "--strike", "25000",
            "--vol", "2.0", "--rate", "0", "--tau", "10d", "--quanto-fix", "25000",
        ]);
        assert_eq!(code, 0);
        let p: f64 = out.trim().parse().unwrap();
        assert!((p - 4_123.0).abs() <= 5.0, "{p}");
    }

    #[test]
    fn expired_price_is_payoff() {
        let (code, out, _) = run_args(&[
            "price", "--class", "inverse", "--side", "call", "--spot", "40000", "--strike", "25000",
            "--vol", "0.8", "--rate", "0", "--tau", "0d",
        ]);
        assert_eq!(code, 0);
        assert_eq!(out.trim(), "0.375");
    }

    #[test]
    fn validation_errors_exit_2() {
        for args in [
            &["price", "--class", "quanto-inverse", "--side", "call", "--spot", "1", "--strike", "1", "--vol", "1", "--rate", "0", "--tau", "1d"][..],
            &["price", "--class", "inverse", "--side", "call", "--spot", "1", "--strike", "1", "--vol", "1", "--rate", "0", "--tau", "1d", "--quanto-fix", "3"],
            &["price", "--class", "inverse", "--side", "call", "--spot", "-1", "--strike", "1", "--vol", "1", "--rate", "0", "--tau", "1d"],
            &["price", "--class", "inverse", "--side", "call", "--spot", "1", "--strike", "1", "--vol", "1", "--rate", "0", "--tau", "1y"],
            &["price", "--bogus"],
            &["frobnicate"],
            &["verify", "--grid", "0"],
            &["--workers", "0", "table1"],
        ] {
            let (code, _, err) = run_args(args);
            assert_eq!(code, 2, "{args:?}: {err}");
            assert!(!err.is_empty());
        }
    }

    #[test]
    fn help_exits_0() {
        let (code, out, _) = run_args(&["--help"]);
        assert_eq!(code, 0);
        assert!(out.contains("verify"));
    }

    #[test]
    fn payoff_and_translation() {
        let base = ["payoff", "--class", "inverse", "--side", "call", "--strike", "25000", "--settle", "40000"];
        assert_eq!(run_args(&base).1.trim(), "0.375");
        let mut args = base.to_vec();
        args.extend(["--spot-at-settle", "41000"]);
        assert_eq!(run_args(&args).1.trim(), "15375");
    }

    #[test]
    fn greeks_row() {
        let (code, out, _) = run_args(&[
            "greeks", "--class", "inverse", "--side", "put", "--spot", "25000", "--strike", "25000",
            "--vol", "0.75", "--rate", "0", "--tau", "30d",
        ]);
        assert_eq!(code, 0);
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(lines[0], "price,delta,gamma,vega,volga,vanna,theta,currency");
        assert!(lines[1].ends_with(",BTC"));
    }

    #[test]
    fn implied_vol_round_trip() {
        let (_, out, _) = run_args(&[
            "price", "--class", "inverse", "--side", "call", "--spot", "25000", "--strike", "27000",
            "--vol", "0.8", "--rate", "0.01", "--tau", "30d",
        ]);
        let (code, iv, _) = run_args(&[
            "iv", "--class", "inverse", "--side", "call", "--spot", "25000", "--strike", "27000",
            "--rate", "0.01", "--tau", "30d", "--price", out.trim(),
        ]);
        assert_eq!(code, 0);
        assert!((iv.trim().parse::<f64>().unwrap() - 0.8).abs() < 1e-8);
    }
}
