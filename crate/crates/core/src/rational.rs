//! Arbitrary-precision rationals and their textual form.
//!
//! Values are `num_rational::BigRational`, which keeps the denominator positive
//! and the fraction reduced after every operation.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = num_rational::BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Parses `"7"`, `"-3/4"` or a plain decimal such as `"0.125"` exactly.
pub fn parse(text: &str) -> Result<Rational> {
    let s = text.trim();
    let bad = || Error::Parse(format!("`{text}` is not a rational number"));
    if s.is_empty() {
        return Err(bad());
    }
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(Error::Parse(format!("`{text}` has a zero denominator")));
        }
        return Ok(Rational::new(n, d));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        let negative = whole.starts_with('-');
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let digits = format!("{}{}", whole.trim_start_matches(['-', '+']), frac);
        let mut n: BigInt = digits.parse().map_err(|_| bad())?;
        if negative {
            n = -n;
        }
        let d = num_traits::pow(BigInt::from(10), frac.len());
        return Ok(Rational::new(n, d));
    }
    let n: BigInt = s.parse().map_err(|_| bad())?;
    Ok(Rational::from_integer(n))
}

/// `"n"` for integers, `"n/d"` otherwise.
pub fn format(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Nearest double. Falls back to a scaled division when numerator or
/// denominator overflow `f64` on their own.
pub fn to_f64(r: &Rational) -> f64 {
    if let Some(v) = r.to_f64() {
        if v.is_finite() {
            return v;
        }
    }
    let shift = r.numer().bits().max(r.denom().bits()).saturating_sub(1000);
    let n = (r.numer() >> shift).to_f64().unwrap_or(f64::NAN);
    let d = (r.denom() >> shift).to_f64().unwrap_or(f64::NAN);
    n / d
}

/// Double-double split `hi + lo` of a rational, accurate to ~2^-106 relative.
pub fn to_f64_pair(r: &Rational) -> (f64, f64) {
    let hi = to_f64(r);
    if !hi.is_finite() || hi == 0.0 {
        return (hi, 0.0);
    }
    let rest = r - Rational::from_float(hi).unwrap_or_else(Rational::zero);
    (hi, to_f64(&rest))
}

pub fn is_positive(r: &Rational) -> bool {
    r.is_positive()
}

pub fn one() -> Rational {
    Rational::one()
}

pub fn zero() -> Rational {
    Rational::zero()
}

/// Binomial coefficient as an exact rational.
pub fn binomial(n: u64, k: u64) -> Rational {
    if k > n {
        return zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    Rational::from_integer(acc)
}

pub(crate) mod serde_str {
    use super::Rational;
    use serde::Serializer;

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::format(r))
    }
}

pub(crate) mod serde_str_opt {
    use super::Rational;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
        match r {
            Some(r) => s.serialize_some(&super::format(r)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rational>, D::Error> {
        let text = Option::<String>::deserialize(d)?;
        text.map(|t| super::parse(&t).map_err(serde::de::Error::custom))
            .transpose()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_the_three_forms() {
        assert_eq!(parse("7").unwrap(), int(7));
        assert_eq!(parse("-3/4").unwrap(), ratio(-3, 4));
        assert_eq!(parse("6/8").unwrap(), ratio(3, 4));
        assert_eq!(parse("0.125").unwrap(), ratio(1, 8));
        assert_eq!(parse("-1.5").unwrap(), ratio(-3, 2));
        assert!(parse("1/0").is_err());
        assert!(parse("abc").is_err());
        assert!(parse("").is_err());
    }

    #[test]
    fn reduced_with_positive_denominator() {
        let r = parse("4/-6").unwrap();
        assert_eq!(format(&r), "-2/3");
        assert!(r.denom().is_positive());
    }

    #[test]
    fn huge_values_convert() {
        let big = Rational::from_integer(num_traits::pow(BigInt::from(3), 900));
        let small = Rational::from_integer(num_traits::pow(BigInt::from(3), 899));
        assert!((to_f64(&(big / small)) - 3.0).abs() < 1e-15);
    }

    #[test]
    fn pair_split_is_tighter_than_hi() {
        let third = ratio(1, 3);
        let (hi, lo) = to_f64_pair(&third);
        assert_eq!(hi, 1.0 / 3.0);
        assert!(lo != 0.0 && lo.abs() < 1e-16);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), int(10));
        assert_eq!(binomial(4, 0), int(1));
        assert_eq!(binomial(3, 4), int(0));
    }
}
