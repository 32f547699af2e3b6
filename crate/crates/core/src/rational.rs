// SPDX-License-Identifier: Apache-2.0

//! Exact rational helpers shared by the parsers and the waveform writers.

use num_rational::Ratio;
use num_traits::{Signed, Zero};

pub type Rational = Ratio<i64>;

/// Parses `p/q`, an integer, or a decimal with at most six fractional digits.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let text = text.trim();
    if text.is_empty() {
        return None;
    }
    if let Some((num, den)) = text.split_once('/') {
        let num: i64 = num.trim().parse().ok()?;
        let den: i64 = den.trim().parse().ok()?;
        if den == 0 {
            return None;
        }
        return Some(Rational::new(num, den));
    }
    let (neg, body) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if frac_part.len() > 6 || (int_part.is_empty() && frac_part.is_empty()) {
        return None;
    }
    if !int_part.chars().all(|c| c.is_ascii_digit()) || !frac_part.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    let int_val: i64 = if int_part.is_empty() { 0 } else { int_part.parse().ok()? };
    let scale = 10i64.pow(frac_part.len() as u32);
    let frac_val: i64 = if frac_part.is_empty() { 0 } else { frac_part.parse().ok()? };
    let value = Rational::new(int_val.checked_mul(scale)?.checked_add(frac_val)?, scale);
    Some(if neg { -value } else { value })
}

/// Canonical `p/q` form (`p` alone when the denominator is 1).
pub fn format_rational(value: &Rational) -> String {
    value.to_string()
}

/// Fixed-point rendering with `places` decimals, rounding half to even.
pub fn format_fixed(value: &Rational, places: u32) -> String {
    let scale = 10i128.pow(places);
    let numer = *value.numer() as i128 * scale;
    let denom = *value.denom() as i128;
    let negative = (numer < 0) != (denom < 0) && numer != 0;
    let (n, d) = (numer.abs(), denom.abs());
    let mut q = n / d;
    let r = n % d;
    if 2 * r > d || (2 * r == d && q % 2 == 1) {
        q += 1;
    }
    let int_part = q / scale;
    let frac_part = q % scale;
    let sign = if negative && q != 0 { "-" } else { "" };
    if places == 0 {
        format!("{sign}{int_part}")
    } else {
        format!("{sign}{int_part}.{frac_part:0width$}", width = places as usize)
    }
}

pub fn abs_diff(a: &Rational, b: &Rational) -> Rational {
    let d = a - b;
    if d.is_negative() {
        -d
    } else if d.is_zero() {
        Rational::zero()
    } else {
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(parse_rational("3/10"), Some(Rational::new(3, 10)));
        assert_eq!(parse_rational("0.3"), Some(Rational::new(3, 10)));
        assert_eq!(parse_rational("0.020000"), Some(Rational::new(1, 50)));
        assert_eq!(parse_rational("1"), Some(Rational::from_integer(1)));
        assert_eq!(parse_rational("0.1234567"), None);
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("abc"), None);
    }

    #[test]
    fn fixed_rounds_half_even() {
        assert_eq!(format_fixed(&Rational::new(20, 41), 6), "0.487805");
        assert_eq!(format_fixed(&Rational::new(1, 8), 2), "0.12");
        assert_eq!(format_fixed(&Rational::new(3, 8), 2), "0.38");
        assert_eq!(format_fixed(&Rational::new(27, 40), 3), "0.675");
        assert_eq!(format_fixed(&Rational::new(675, 10), 1), "67.5");
        assert_eq!(format_fixed(&Rational::from_integer(0), 6), "0.000000");
        assert_eq!(format_fixed(&Rational::new(-1, 4), 1), "-0.2");
    }
}
