//! Exact rational values and their heights.
//!
//! Every set element, hull endpoint and height in this crate is an
//! arbitrary-precision reduced fraction. `BigRational` already stores the
//! reduced form with a positive denominator, which is exactly the invariant
//! the rest of the crate relies on.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision reduced fraction.
pub type ExactRational = BigRational;

/// Height of a rational: the denominator of its reduced form.
/// Integers (including 0) have height 1.
pub fn height(r: &ExactRational) -> BigInt {
    r.denom().clone()
}

pub fn rational_from_i64(n: i64, d: i64) -> ExactRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rational_int(n: i64) -> ExactRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Parses "p/q" or an integer literal. Decimals are rejected: callers that
/// want exact decimal conversion should use [`parse_point`].
pub fn parse_rational(s: &str) -> Result<ExactRational> {
    let s = s.trim();
    if s.contains('.') {
        return Err(Error::Parse(format!(
            "decimal literal {s:?} rejected; pass an exact fraction like 3/10"
        )));
    }
    if let Some((num, den)) = s.split_once('/') {
        let n: BigInt = num
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad numerator in {s:?}")))?;
        let d: BigInt = den
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad denominator in {s:?}")))?;
        if d.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        Ok(BigRational::new(n, d))
    } else {
        let n: BigInt = s
            .parse()
            .map_err(|_| Error::Parse(format!("bad integer {s:?}")))?;
        Ok(BigRational::from_integer(n))
    }
}

/// Parses a point file entry: either an exact fraction/integer or a decimal
/// literal, converted exactly (0.25 becomes 1/4).
pub fn parse_point(s: &str) -> Result<ExactRational> {
    let s = s.trim();
    if !s.contains('.') {
        return parse_rational(s);
    }
    let (sign, body) = match s.strip_prefix('-') {
        Some(rest) => (-1i64, rest),
        None => (1i64, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int_part, frac_part) = body
        .split_once('.')
        .ok_or_else(|| Error::Parse(format!("bad decimal {s:?}")))?;
    if frac_part.is_empty() || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
        return Err(Error::Parse(format!("bad decimal {s:?}")));
    }
    let int_part = if int_part.is_empty() { "0" } else { int_part };
    if !int_part.bytes().all(|b| b.is_ascii_digit()) {
        return Err(Error::Parse(format!("bad decimal {s:?}")));
    }
    let digits: BigInt = format!("{int_part}{frac_part}")
        .parse()
        .map_err(|_| Error::Parse(format!("bad decimal {s:?}")))?;
    let den = BigInt::from(10u32).pow(frac_part.len() as u32);
    Ok(BigRational::new(BigInt::from(sign) * digits, den))
}

/// Formats as "p/q", or just "p" for integers.
pub fn format_rational(r: &ExactRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Decimal rendering with the requested number of fractional digits,
/// truncated toward zero. Used for plot-ready output only.
pub fn to_decimal(r: &ExactRational, digits: usize) -> String {
    let sign = if r.is_negative() { "-" } else { "" };
    let a = r.abs();
    let scale = BigInt::from(10u32).pow(digits as u32);
    let scaled = (a.numer() * &scale) / a.denom();
    let int_part = &scaled / &scale;
    let frac_part = &scaled % &scale;
    if digits == 0 {
        format!("{sign}{int_part}")
    } else {
        format!("{sign}{int_part}.{frac_part:0>width$}", width = digits)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format_round_trip() {
        let r = parse_rational("6/8").unwrap();
        assert_eq!(format_rational(&r), "3/4");
        assert_eq!(height(&r), BigInt::from(4));
        let n = parse_rational("-5").unwrap();
        assert_eq!(height(&n), BigInt::from(1));
        assert_eq!(format_rational(&n), "-5");
    }

    #[test]
    fn decimals_rejected_on_flags_but_exact_in_point_files() {
        assert!(parse_rational("0.3").is_err());
        let p = parse_point("0.25").unwrap();
        assert_eq!(p, rational_from_i64(1, 4));
        let m = parse_point("-1.5").unwrap();
        assert_eq!(m, rational_from_i64(-3, 2));
        assert_eq!(parse_point("2/3").unwrap(), rational_from_i64(2, 3));
    }

    #[test]
    fn decimal_rendering_truncates() {
        assert_eq!(to_decimal(&rational_from_i64(1, 3), 5), "0.33333");
        assert_eq!(to_decimal(&rational_from_i64(-1, 8), 3), "-0.125");
        assert_eq!(to_decimal(&rational_int(7), 2), "7.00");
    }
}
