//! Exact univariate polynomials over ℚ with floating-point evaluation.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::numeric::{ComplexDD, DoubleDouble};
use crate::rational::{self, Rational};

/// Degree of a polynomial; the zero polynomial has degree `MinusInfinity`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Degree {
    MinusInfinity,
    Finite(usize),
}

impl Degree {
    pub fn finite(self) -> Option<usize> {
        match self {
            Degree::MinusInfinity => None,
            Degree::Finite(d) => Some(d),
        }
    }
}

impl fmt::Display for Degree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Degree::MinusInfinity => f.write_str("-inf"),
            Degree::Finite(d) => write!(f, "{d}"),
        }
    }
}

/// Coefficients low-to-high, never with a trailing zero.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Polynomial {
    coeffs: Vec<Rational>,
}

impl Polynomial {
    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    /// The identity polynomial `x`.
    pub fn x() -> Self {
        Self::from_coeffs(vec![Rational::zero(), Rational::one()])
    }

    pub fn constant(c: Rational) -> Self {
        Self::from_coeffs(vec![c])
    }

    pub fn monomial(c: Rational, power: usize) -> Self {
        let mut coeffs = vec![Rational::zero(); power];
        coeffs.push(c);
        Self::from_coeffs(coeffs)
    }

    pub fn from_coeffs(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn from_i64s(coeffs: &[i64]) -> Self {
        Self::from_coeffs(coeffs.iter().map(|&c| rational::int(c)).collect())
    }

    /// Parses the list-of-strings form, e.g. `["1","0","3","0","1"]`.
    pub fn parse_coeffs<S: AsRef<str>>(coeffs: &[S]) -> crate::Result<Self> {
        coeffs
            .iter()
            .map(|c| rational::parse(c.as_ref()))
            .collect::<crate::Result<Vec<_>>>()
            .map(Self::from_coeffs)
    }

    pub fn coeff_strings(&self) -> Vec<String> {
        self.coeffs.iter().map(rational::format).collect()
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    /// Coefficient of `x^power` (zero beyond the degree).
    pub fn coeff(&self, power: usize) -> Rational {
        self.coeffs.get(power).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Degree {
        match self.coeffs.len() {
            0 => Degree::MinusInfinity,
            n => Degree::Finite(n - 1),
        }
    }

    pub fn leading(&self) -> Option<&Rational> {
        self.coeffs.last()
    }

    /// Constant polynomials (including zero) return their value.
    pub fn as_constant(&self) -> Option<Rational> {
        match self.coeffs.len() {
            0 => Some(Rational::zero()),
            1 => Some(self.coeffs[0].clone()),
            _ => None,
        }
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self::from_coeffs(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn pow(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        Self::from_coeffs(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * rational::int(k as i64))
                .collect(),
        )
    }

    /// Antiderivative with zero constant term.
    pub fn antiderivative(&self) -> Self {
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(Rational::zero());
        for (k, c) in self.coeffs.iter().enumerate() {
            coeffs.push(c / rational::int(k as i64 + 1));
        }
        Self::from_coeffs(coeffs)
    }

    /// `self(inner(x))`.
    pub fn compose(&self, inner: &Polynomial) -> Self {
        let mut acc = Self::zero();
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * inner) + &Self::constant(c.clone());
        }
        acc
    }

    /// `p(-x)`: flips the sign of odd-power coefficients.
    pub fn reflect(&self) -> Self {
        Self::from_coeffs(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| if k % 2 == 1 { -c } else { c.clone() })
                .collect(),
        )
    }

    /// Only odd powers appear (the zero polynomial is both odd and even).
    pub fn is_odd(&self) -> bool {
        self.coeffs.iter().step_by(2).all(Zero::is_zero)
    }

    pub fn is_even(&self) -> bool {
        self.coeffs.iter().skip(1).step_by(2).all(Zero::is_zero)
    }

    /// Exact `∫_{-a}^{a} p(x) dx`.
    pub fn integrate_symmetric(&self, a: &Rational) -> Rational {
        let anti = self.antiderivative();
        anti.eval_rational(a) - anti.eval_rational(&-a)
    }

    pub fn integrate(&self, lo: &Rational, hi: &Rational) -> Rational {
        let anti = self.antiderivative();
        anti.eval_rational(hi) - anti.eval_rational(lo)
    }

    pub fn eval_rational(&self, x: &Rational) -> Rational {
        self.coeffs.iter().rev().fold(Rational::zero(), |acc, c| acc * x + c)
    }

    /// Exact evaluation at the Gaussian rational `re + i·im`.
    pub fn eval_gaussian(&self, re: &Rational, im: &Rational) -> (Rational, Rational) {
        let Some(n) = self.coeffs.len().checked_sub(1) else {
            return (Rational::zero(), Rational::zero());
        };
        // Integer Horner over common denominators, reduced once at the end.
        let den = re.denom().lcm(im.denom());
        let scale = self.coeffs.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let a = re.numer() * (&den / re.denom());
        let b = im.numer() * (&den / im.denom());
        let coeff = |c: &Rational| c.numer() * (&scale / c.denom());
        let mut den_pow = BigInt::one();
        let mut acc = (coeff(&self.coeffs[n]), BigInt::zero());
        for c in self.coeffs[..n].iter().rev() {
            den_pow *= &den;
            let r = &acc.0 * &a - &acc.1 * &b + coeff(c) * &den_pow;
            let i = &acc.0 * &b + &acc.1 * &a;
            acc = (r, i);
        }
        let total = scale * den_pow;
        (Rational::new(acc.0, total.clone()), Rational::new(acc.1, total))
    }

    pub fn to_f64_coeffs(&self) -> Vec<f64> {
        self.coeffs.iter().map(rational::to_f64).collect()
    }

    /// Horner evaluation in double precision.
    pub fn eval_f64(&self, x: f64) -> f64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * x + rational::to_f64(c))
    }

    /// Horner evaluation at a complex point in double precision.
    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + rational::to_f64(c))
    }

    /// Compensated Horner: coefficients and running value carried in
    /// double-double, so the result is accurate as if computed in ~106-bit
    /// arithmetic before the final rounding. Used for residuals near roots.
    pub fn eval_complex_compensated(&self, z: Complex64) -> Complex64 {
        let zz = ComplexDD::from(z);
        let mut acc = ComplexDD::default();
        for c in self.coeffs.iter().rev() {
            let (hi, lo) = rational::to_f64_pair(c);
            let coeff = ComplexDD::new(DoubleDouble::new(hi, lo), DoubleDouble::ZERO);
            acc = acc * zz + coeff;
        }
        acc.to_complex()
    }

    /// Sign of the leading coefficient.
    pub fn leading_sign(&self) -> Ordering {
        match self.leading() {
            None => Ordering::Equal,
            Some(c) if c.is_positive() => Ordering::Greater,
            Some(_) => Ordering::Less,
        }
    }
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Polynomial({self})")
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let negative = c.is_negative();
            let mag = c.abs();
            if first {
                if negative {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if negative { " - " } else { " + " })?;
            }
            first = false;
            let unit = mag.is_one();
            let mag_text = if mag.is_integer() {
                mag.numer().to_string()
            } else {
                format!("({})", rational::format(&mag))
            };
            match k {
                0 => f.write_str(&mag_text)?,
                _ => {
                    if !unit {
                        f.write_str(&mag_text)?;
                    }
                    f.write_str("x")?;
                    if k > 1 {
                        write!(f, "^{k}")?;
                    }
                }
            }
        }
        Ok(())
    }
}

impl Serialize for Polynomial {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.coeff_strings().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Polynomial {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let coeffs = Vec::<String>::deserialize(d)?;
        Polynomial::parse_coeffs(&coeffs).map_err(serde::de::Error::custom)
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, o: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(o.coeffs.len());
        Polynomial::from_coeffs((0..n).map(|k| self.coeff(k) + o.coeff(k)).collect())
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, o: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(o.coeffs.len());
        Polynomial::from_coeffs((0..n).map(|k| self.coeff(k) - o.coeff(k)).collect())
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, o: &Polynomial) -> Polynomial {
        if self.is_zero() || o.is_zero() {
            return Polynomial::zero();
        }
        let mut out = vec![Rational::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::from_coeffs(out)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        Polynomial::from_coeffs(self.coeffs.iter().map(|c| -c).collect())
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Polynomial {
            type Output = Polynomial;
            fn $m(self, o: Polynomial) -> Polynomial {
                (&self).$m(&o)
            }
        }
        impl $tr<&Polynomial> for Polynomial {
            type Output = Polynomial;
            fn $m(self, o: &Polynomial) -> Polynomial {
                (&self).$m(o)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        -&self
    }
}

/// Sum of two polynomials.
pub fn poly_add(a: &Polynomial, b: &Polynomial) -> Polynomial {
    a + b
}

/// Product of two polynomials.
pub fn poly_mul(a: &Polynomial, b: &Polynomial) -> Polynomial {
    a * b
}

pub fn poly_eval_complex(p: &Polynomial, z: Complex64) -> Complex64 {
    p.eval_complex(z)
}

pub fn poly_derivative(p: &Polynomial) -> Polynomial {
    p.derivative()
}
