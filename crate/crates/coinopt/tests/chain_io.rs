use std::fs;

use chrono::{TimeZone, Utc};
use coinopt::chain::{load_chain, price_chain, price_row, read_priced_chain};
use coinopt::cli;

const HEADER: &str = "instrument,class,spot,vol,rate,quanto_fix,observed_price\n";

fn run(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = cli::run(std::iter::once("coinopt").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn sample_chain() -> String {
    let mut s = HEADER.to_string();
    s.push_str("BTC-30SEP22-25000-C,quanto-inverse,30000,2.0,0,25000,\n");
    s.push_str("BTC-30SEP22-25000-P,inverse,30000,2.0,0,,0.05\n");
    s.push_str("eth-30sep22-1750-c,standard,1600,0.9,0.01,,\n");
    s.push_str("BTC-30SEP22-20000-P,direct,30000,0.8,0.02,,\n");
    s
}

#[test]
fn cli_chain_price_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("chain.csv");
    let output = dir.path().join("priced.csv");
    fs::write(&input, sample_chain()).unwrap();
    let args = [
        "chain", "price", "--in", input.to_str().unwrap(), "--out", output.to_str().unwrap(),
        "--asof", "2022-09-20T00:00:00Z",
    ];
    let (code, _, err) = run(&args);
    assert_eq!(code, 0, "{err}");
    let text = fs::read_to_string(&output).unwrap();
    let rows = read_priced_chain(text.as_bytes()).unwrap();
    assert_eq!(rows.len(), 4);
    assert!((rows[0].values[0] - 4_123.0).abs() <= 5.0);
    assert_eq!(rows[2].instrument.to_string(), "ETH-30SEP22-1750-C");
    assert!(rows[1].implied_vol.is_some());
    assert!(rows[0].implied_vol.is_none());
    assert!(text.lines().nth(1).unwrap().ends_with(','));

    // batch pricing equals row-by-row pricing, and the file is reproducible
    let chain = load_chain(sample_chain().as_bytes(), false).unwrap();
    let asof = Utc.with_ymd_and_hms(2022, 9, 20, 0, 0, 0).unwrap();
    let batch = price_chain(&chain.rows, asof).unwrap();
    for (row, p) in chain.rows.iter().zip(&batch) {
        assert_eq!(&price_row(row, asof).unwrap(), p);
    }
    let again = dir.path().join("again.csv");
    let mut args2 = args;
    args2[5] = again.to_str().unwrap();
    assert_eq!(run(&args2).0, 0);
    assert_eq!(fs::read(&output).unwrap(), fs::read(&again).unwrap());
}

#[test]
fn strict_and_lenient_modes() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("chain.csv");
    let output = dir.path().join("priced.csv");
    let mut csv = sample_chain();
    csv.push_str("BTC-30SEP22-25000-C,quanto-inverse,30000,2.0,0,,\n");
    fs::write(&input, &csv).unwrap();
    let base = ["chain", "price", "--in", input.to_str().unwrap(), "--out", output.to_str().unwrap(), "--asof", "2022-09-20"];

    let (code, _, err) = run(&base);
    assert_eq!(code, 2);
    assert!(err.contains("line 6") && err.contains("missing quanto fix"), "{err}");

    let mut lenient = base.to_vec();
    lenient.push("--lenient");
    let (code, _, err) = run(&lenient);
    assert_eq!(code, 0);
    assert!(err.contains("warning") && err.contains("line 6"), "{err}");
    assert_eq!(read_priced_chain(fs::File::open(&output).unwrap()).unwrap().len(), 4);
}

#[test]
fn header_only_and_missing_file() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("empty.csv");
    let output = dir.path().join("out.csv");
    fs::write(&input, HEADER).unwrap();
    let (code, _, _) = run(&["chain", "price", "--in", input.to_str().unwrap(), "--out", output.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(
        fs::read_to_string(&output).unwrap(),
        "instrument,price,delta,gamma,vega,volga,vanna,theta,implied_vol\n"
    );
    let missing = dir.path().join("nope.csv");
    let (code, _, err) = run(&["chain", "price", "--in", missing.to_str().unwrap(), "--out", output.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("nope.csv"));
}
