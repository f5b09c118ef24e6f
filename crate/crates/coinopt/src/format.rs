/// Shortest decimal that parses back to `x`; scientific notation outside
/// `[1e-5, 1e16)`.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || !x.is_finite() || (1e-5..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips() {
        for x in [0.0, 1.0, -2.5, 4123.456, 1e-5, 9.99e-6, 1e16, 1e300, -3e-200, 0.1 + 0.2] {
            let s = num(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
        }
        assert_eq!(num(25_000.0), "25000");
        assert_eq!(num(1e-7), "1e-7");
        assert_eq!(num(2e16), "2e16");
    }
}
