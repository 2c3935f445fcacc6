//! Parsing and printing of reals written either as decimals or as `2^-k`.

use crate::error::{Error, Result};

/// Parses `0.125`, `1e-3`, `2^-3` or `2^{-3}`.
pub fn parse_real(s: &str) -> Result<f64> {
    let t = s.trim();
    if let Some(exp) = t.strip_prefix("2^") {
        let exp = exp.trim_start_matches('{').trim_end_matches('}');
        let k: i32 = exp
            .parse()
            .map_err(|_| Error::Config(format!("bad power-of-two exponent in '{s}'")))?;
        if !(-1074..=1023).contains(&k) {
            return Err(Error::Config(format!("exponent out of range in '{s}'")));
        }
        return Ok(pow2(k));
    }
    t.parse::<f64>()
        .map_err(|_| Error::Config(format!("cannot parse '{s}' as a number")))
}

/// `2^k` built from its bit pattern, exact over the whole `f64` range
/// including subnormals.
pub fn pow2(k: i32) -> f64 {
    match k {
        -1022..=1023 => f64::from_bits(((k + 1023) as u64) << 52),
        -1074..=-1023 => f64::from_bits(1u64 << (k + 1074)),
        _ if k > 0 => f64::INFINITY,
        _ => 0.0,
    }
}

/// The exponent `k` when `v = 2^k` exactly.
pub fn power_of_two_exponent(v: f64) -> Option<i32> {
    if !(v > 0.0 && v.is_finite()) {
        return None;
    }
    let k = v.log2().round() as i32;
    (pow2(k) == v).then_some(k)
}

/// `2^k` for exact powers of two, otherwise the shortest round-trip decimal.
pub fn format_real(v: f64) -> String {
    match power_of_two_exponent(v) {
        Some(k) => format!("2^{k}"),
        None => format!("{v}"),
    }
}

/// Scientific notation with `digits` significant digits and a two-digit
/// signed exponent, e.g. `1.0212e-03`.
pub fn format_sci(v: f64, digits: usize) -> String {
    if !v.is_finite() {
        return format!("{v}");
    }
    let s = format!("{:.*e}", digits.saturating_sub(1), v);
    let (mantissa, exp) = s.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}
