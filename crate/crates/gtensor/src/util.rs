//! Exact rational scalars and small parsing/formatting helpers shared by the
//! other modules.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};

use crate::{Error, Result};

/// Exact rational scalar used throughout the crate.
pub type Rat = BigRational;

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    r.numer().to_f64().unwrap_or(f64::NAN) / r.denom().to_f64().unwrap_or(f64::NAN)
}

/// Parses `p/q`, a plain integer, or a decimal literal into an exact rational.
pub fn parse_rat(s: &str) -> Result<Rat> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let numer: BigInt = n
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad numerator in {s:?}")))?;
        let denom: BigInt = d
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad denominator in {s:?}")))?;
        if denom.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(Rat::new(numer, denom));
    }
    if let Some((int_part, frac_part)) = s.split_once('.') {
        let sign = if int_part.trim_start().starts_with('-') { -1 } else { 1 };
        let int: BigInt = if int_part.is_empty() || int_part == "-" {
            BigInt::zero()
        } else {
            int_part
                .parse()
                .map_err(|_| Error::Parse(format!("bad decimal {s:?}")))?
        };
        if frac_part.is_empty() || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
            return Err(Error::Parse(format!("bad decimal {s:?}")));
        }
        let frac: BigInt = frac_part
            .parse()
            .map_err(|_| Error::Parse(format!("bad decimal {s:?}")))?;
        let scale = BigInt::from(10u32).pow(frac_part.len() as u32);
        let abs = Rat::from_integer(int.abs()) + Rat::new(frac, scale);
        return Ok(if sign < 0 { -abs } else { abs });
    }
    let n: BigInt = s
        .parse()
        .map_err(|_| Error::Parse(format!("bad rational {s:?}")))?;
    Ok(Rat::from_integer(n))
}

/// Formats a rational as `p/q` (or `p` for integers).
pub fn fmt_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Formats a rational as `p/q` always including the denominator.
pub fn fmt_rat_slash(r: &Rat) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Rounds a positive rational UP to two decimals; the result stays a valid
/// upper bound. Returns the value in hundredths.
pub fn ceil_hundredths(r: &Rat) -> BigInt {
    let scaled = r * Rat::from_integer(BigInt::from(100));
    let (num, den) = (scaled.numer().clone(), scaled.denom().clone());
    // truncating division is already the ceiling for exact and negative
    // values; positive remainders round up
    let q = num.clone() / den.clone();
    if &q * &den == num || num.is_negative() {
        q
    } else {
        q + BigInt::one()
    }
}

/// Renders `ceil_hundredths` output as a fixed two-decimal string.
pub fn fmt_hundredths(h: &BigInt) -> String {
    let whole = h / BigInt::from(100);
    let frac = (h % BigInt::from(100)).abs();
    format!("{whole}.{:02}", frac.to_u32().unwrap_or(0))
}

/// Least common multiple of two positive big integers.
pub fn lcm_big(a: &BigInt, b: &BigInt) -> BigInt {
    num::Integer::lcm(a, b)
}

/// Mixed-radix decode: digit `j` (0-based, least significant first) of
/// `index` in base `base` with `len` digits.
pub fn digits(index: usize, base: usize, len: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(len);
    let mut x = index;
    for _ in 0..len {
        out.push(x % base);
        x /= base;
    }
    out
}

/// Mixed-radix encode, inverse of [`digits`].
pub fn undigits(digits: &[usize], base: usize) -> usize {
    let mut out = 0usize;
    for &d in digits.iter().rev() {
        out = out * base + d;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format() {
        assert_eq!(fmt_rat(&parse_rat("3/4").unwrap()), "3/4");
        assert_eq!(fmt_rat(&parse_rat("7").unwrap()), "7");
        assert_eq!(parse_rat("2.046681").unwrap(), rat(2046681, 1000000));
        assert_eq!(parse_rat("-0.5").unwrap(), rat(-1, 2));
        assert!(parse_rat("x").is_err());
        assert!(parse_rat("1/0").is_err());
    }

    #[test]
    fn ceiling_to_hundredths_rounds_up() {
        // 11/3 = 3.666… rounds up to 3.67; exact values stay put.
        assert_eq!(fmt_hundredths(&ceil_hundredths(&rat(11, 3))), "3.67");
        assert_eq!(fmt_hundredths(&ceil_hundredths(&rat(5, 2))), "2.50");
        assert_eq!(fmt_hundredths(&ceil_hundredths(&rat(2, 1))), "2.00");
        assert_eq!(
            fmt_hundredths(&ceil_hundredths(&parse_rat("2.296681").unwrap())),
            "2.30"
        );
    }

    #[test]
    fn digit_round_trip() {
        for idx in 0..81 {
            assert_eq!(undigits(&digits(idx, 3, 4), 3), idx);
        }
    }
}
