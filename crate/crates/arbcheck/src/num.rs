//! Exact rational arithmetic and decimal conversion.
//!
//! All pricing conditions in this crate are algebraic inequalities, so every
//! internal computation runs on arbitrary-precision rationals. Floats appear
//! only at I/O boundaries.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

pub type Rat = BigRational;

pub fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Parses a decimal literal (`"1.05"`, `"-3e-2"`) or a fraction (`"21/20"`)
/// into an exact rational.
pub fn parse_rat(s: &str) -> Option<Rat> {
    let s = s.trim();
    if let Some((num, den)) = s.split_once('/') {
        let n: BigInt = num.trim().parse().ok()?;
        let d: BigInt = den.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(Rat::new(n, d));
    }
    let (sign, body) = match s.strip_prefix('-') {
        Some(rest) => (-1i64, rest),
        None => (1i64, s.strip_prefix('+').unwrap_or(s)),
    };
    let (mantissa, exp) = match body.split_once(['e', 'E']) {
        Some((m, e)) => (m, e.parse::<i32>().ok()?),
        None => (body, 0),
    };
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((i, f)) => (i, f),
        None => (mantissa, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().all(|c| c.is_ascii_digit()) || !frac_part.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{}{}", int_part, frac_part);
    let digits = if digits.is_empty() { "0".to_string() } else { digits };
    let n: BigInt = digits.parse().ok()?;
    let scale = frac_part.len() as i32 - exp;
    let ten = BigInt::from(10);
    let value = if scale >= 0 {
        Rat::new(n, ten.pow(scale as u32))
    } else {
        Rat::from_integer(n * ten.pow((-scale) as u32))
    };
    Some(value * rat(sign))
}

/// Renders a rational as an exact decimal string when the denominator divides
/// 10^12, otherwise as `"p/q"`.
pub fn format_rat(r: &Rat) -> String {
    match to_decimal_string(r, 12) {
        Some(s) => s,
        None => format!("{}/{}", r.numer(), r.denom()),
    }
}

/// Exact decimal rendering with at most `max_digits` fractional digits, if one exists.
pub fn to_decimal_string(r: &Rat, max_digits: u32) -> Option<String> {
    let scale = BigInt::from(10).pow(max_digits);
    let scaled = r * Rat::from_integer(scale.clone());
    if !scaled.is_integer() {
        return None;
    }
    let mut n = scaled.to_integer();
    let neg = n.is_negative();
    if neg {
        n = -n;
    }
    let (int, rem) = num_integer::Integer::div_rem(&n, &scale);
    let mut out = String::new();
    if neg {
        out.push('-');
    }
    out.push_str(&int.to_string());
    if !rem.is_zero() {
        let frac = format!("{:0>width$}", rem.to_string(), width = max_digits as usize);
        let frac = frac.trim_end_matches('0');
        out.push('.');
        out.push_str(frac);
    }
    Some(out)
}

/// JSON encoding: a plain number when exactly decimal, otherwise a `"p/q"` string.
pub fn rat_to_json(r: &Rat) -> serde_json::Value {
    match to_decimal_string(r, 12) {
        Some(s) => serde_json::Value::Number(
            serde_json::from_str::<serde_json::Number>(&s).expect("decimal literal"),
        ),
        None => serde_json::Value::String(format!("{}/{}", r.numer(), r.denom())),
    }
}

/// Decodes a JSON number (read back exactly via its literal text) or a `"p/q"` string.
pub fn json_to_rat(v: &serde_json::Value) -> Result<Rat, String> {
    match v {
        serde_json::Value::Number(n) => {
            parse_rat(&n.to_string()).ok_or_else(|| format!("unreadable number {}", n))
        }
        serde_json::Value::String(s) => parse_rat(s).ok_or_else(|| format!("unreadable number {:?}", s)),
        other => Err(format!("expected a number, found {}", other)),
    }
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    r.numer().to_f64().unwrap_or(f64::NAN) / r.denom().to_f64().unwrap_or(f64::NAN)
}

pub fn min_rat(a: Rat, b: Rat) -> Rat {
    if a <= b {
        a
    } else {
        b
    }
}

pub fn max_rat(a: Rat, b: Rat) -> Rat {
    if a >= b {
        a
    } else {
        b
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_decimals_exactly() {
        assert_eq!(parse_rat("1.05").unwrap(), ratio(21, 20));
        assert_eq!(parse_rat("-3e-2").unwrap(), ratio(-3, 100));
        assert_eq!(parse_rat("21/20").unwrap(), ratio(21, 20));
        assert_eq!(parse_rat("0.000000000001").unwrap(), Rat::new(1.into(), BigInt::from(10).pow(12)));
        assert!(parse_rat("abc").is_none());
        assert!(parse_rat("1/0").is_none());
    }

    #[test]
    fn decimal_round_trip() {
        for s in ["0.5", "100", "-2.25", "0.000001"] {
            let r = parse_rat(s).unwrap();
            assert_eq!(parse_rat(&format_rat(&r)).unwrap(), r);
        }
        // one third has no finite decimal expansion
        assert_eq!(format_rat(&ratio(1, 3)), "1/3");
        assert_eq!(parse_rat(&format_rat(&ratio(1, 3))).unwrap(), ratio(1, 3));
    }

    #[test]
    fn json_round_trip_preserves_value() {
        for r in [ratio(21, 20), ratio(1, 3), rat(7), ratio(-5, 8)] {
            let v = rat_to_json(&r);
            assert_eq!(json_to_rat(&v).unwrap(), r);
        }
    }
}
