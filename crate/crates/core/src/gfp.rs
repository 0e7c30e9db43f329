//! Generalized Fibonacci polynomial (GFP) families.
//!
//! A family is the recurrence `G_n = d(x)·G_{n-1} + g(x)·G_{n-2}` together
//! with its initial values: `(0, 1)` for the Fibonacci type and
//! `(p0, p1(x))` with `d = α·p1`, `α = 2/p0` for the Lucas type. Terms can be
//! produced three ways: by the recurrence, by the closed binomial sums, and
//! numerically through the Binet form `a^n ± b^n`.

use std::fmt;

use num_complex::Complex64;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{Degree, Polynomial};
use crate::rational::{self, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GfpKind {
    #[serde(rename = "fibonacci")]
    FibonacciType,
    #[serde(rename = "lucas")]
    LucasType,
}

impl GfpKind {
    pub fn label(self) -> &'static str {
        match self {
            GfpKind::FibonacciType => "Fibonacci-type",
            GfpKind::LucasType => "Lucas-type",
        }
    }

    /// First subscript carrying a nonzero term.
    pub fn first_index(self) -> usize {
        match self {
            GfpKind::FibonacciType => 1,
            GfpKind::LucasType => 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct LucasInit {
    p0: Rational,
    p1: Polynomial,
}

/// One GFP sequence definition. Always valid once constructed.
#[derive(Clone, PartialEq, Eq)]
pub struct GfpFamily {
    kind: GfpKind,
    d: Polynomial,
    g: Polynomial,
    lucas: Option<LucasInit>,
    name: Option<String>,
}

impl GfpFamily {
    pub fn fibonacci_type(d: Polynomial, g: Polynomial) -> Result<Self> {
        Self::build(GfpKind::FibonacciType, d, g, None, true)
    }

    /// Lucas type with `p1 = d/α` implied by `p0`.
    pub fn lucas_type(d: Polynomial, g: Polynomial, p0: Rational) -> Result<Self> {
        let p1 = d.scale(&(&p0 / rational::int(2)));
        Self::lucas_type_with_p1(d, g, p0, p1)
    }

    /// Lucas type with an explicit `p1`, which must satisfy `d = (2/p0)·p1`.
    pub fn lucas_type_with_p1(d: Polynomial, g: Polynomial, p0: Rational, p1: Polynomial) -> Result<Self> {
        Self::build(GfpKind::LucasType, d, g, Some(LucasInit { p0, p1 }), true)
    }

    /// Like the typed constructors but without the `deg d > deg g` check.
    /// Only the Jacobsthal pair in the registry needs this.
    fn relaxed(kind: GfpKind, d: Polynomial, g: Polynomial, p0: Option<Rational>) -> Result<Self> {
        let lucas = p0.map(|p0| LucasInit {
            p1: d.scale(&(&p0 / rational::int(2))),
            p0,
        });
        Self::build(kind, d, g, lucas, false)
    }

    fn build(
        kind: GfpKind,
        d: Polynomial,
        g: Polynomial,
        lucas: Option<LucasInit>,
        check_degree: bool,
    ) -> Result<Self> {
        if d.is_zero() {
            return Err(Error::InvalidFamily("d(x) must be nonzero".into()));
        }
        if g.is_zero() {
            return Err(Error::InvalidFamily("g(x) must be nonzero".into()));
        }
        if check_degree && d.degree() <= g.degree() {
            return Err(Error::InvalidFamily(format!(
                "deg d = {} must exceed deg g = {}",
                d.degree(),
                g.degree()
            )));
        }
        match (kind, &lucas) {
            (GfpKind::FibonacciType, Some(_)) => {
                return Err(Error::InvalidFamily("Fibonacci-type families take no p0/p1".into()))
            }
            (GfpKind::LucasType, None) => return Err(Error::InvalidFamily("Lucas-type families need p0".into())),
            (GfpKind::LucasType, Some(init)) => {
                let allowed = [1, -1, 2, -2].map(rational::int);
                if !allowed.contains(&init.p0) {
                    return Err(Error::InvalidFamily(format!(
                        "p0 = {} is not one of ±1, ±2",
                        rational::format(&init.p0)
                    )));
                }
                let alpha = rational::int(2) / &init.p0;
                if init.p1.scale(&alpha) != d {
                    return Err(Error::InvalidFamily(format!(
                        "d = {d} is not α·p1 with α = {} and p1 = {}",
                        rational::format(&alpha),
                        init.p1
                    )));
                }
            }
            (GfpKind::FibonacciType, None) => {}
        }
        Ok(Self {
            kind,
            d,
            g,
            lucas,
            name: None,
        })
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn kind(&self) -> GfpKind {
        self.kind
    }

    pub fn d(&self) -> &Polynomial {
        &self.d
    }

    pub fn g(&self) -> &Polynomial {
        &self.g
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn display_name(&self) -> String {
        self.name
            .clone()
            .unwrap_or_else(|| format!("{} (d = {}, g = {})", self.kind.label(), self.d, self.g))
    }

    pub fn p0(&self) -> Option<&Rational> {
        self.lucas.as_ref().map(|l| &l.p0)
    }

    pub fn p1(&self) -> Option<&Polynomial> {
        self.lucas.as_ref().map(|l| &l.p1)
    }

    /// `α = 2/p0` for Lucas-type families.
    pub fn alpha(&self) -> Option<Rational> {
        self.p0().map(|p0| rational::int(2) / p0)
    }

    /// `Some(c)` when `g` is the constant `c`.
    pub fn constant_g(&self) -> Option<Rational> {
        self.g.as_constant()
    }

    pub fn initial_terms(&self) -> (Polynomial, Polynomial) {
        match &self.lucas {
            None => (Polynomial::zero(), Polynomial::one()),
            Some(init) => (Polynomial::constant(init.p0.clone()), init.p1.clone()),
        }
    }

    /// Exact term `G_n`.
    pub fn term(&self, n: usize) -> Polynomial {
        generate(self, n).terms.pop().expect("generate stores n+1 terms")
    }

    pub fn to_spec(&self) -> FamilySpec {
        FamilySpec {
            kind: self.kind,
            d: self.d.clone(),
            g: self.g.clone(),
            p0: self.p0().cloned(),
            p1: self.p1().cloned(),
            name: self.name.clone(),
        }
    }
}

impl fmt::Debug for GfpFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = f.debug_struct("GfpFamily");
        s.field("kind", &self.kind).field("d", &self.d).field("g", &self.g);
        if let Some(init) = &self.lucas {
            s.field("p0", &rational::format(&init.p0)).field("p1", &init.p1);
        }
        s.field("name", &self.name).finish()
    }
}

/// Serialized family description, e.g.
/// `{"kind":"lucas","d":["0","2"],"g":["-1"],"p0":"1","p1":["0","1"]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FamilySpec {
    pub kind: GfpKind,
    pub d: Polynomial,
    pub g: Polynomial,
    #[serde(default, with = "rational::serde_str_opt", skip_serializing_if = "Option::is_none")]
    pub p0: Option<Rational>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p1: Option<Polynomial>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

impl TryFrom<FamilySpec> for GfpFamily {
    type Error = Error;

    fn try_from(spec: FamilySpec) -> Result<Self> {
        let family = match spec.kind {
            GfpKind::FibonacciType => {
                if spec.p0.is_some() || spec.p1.is_some() {
                    return Err(Error::InvalidFamily("Fibonacci-type families take no p0/p1".into()));
                }
                GfpFamily::fibonacci_type(spec.d, spec.g)?
            }
            GfpKind::LucasType => {
                let p0 = spec
                    .p0
                    .ok_or_else(|| Error::InvalidFamily("Lucas-type families need p0".into()))?;
                match spec.p1 {
                    Some(p1) => GfpFamily::lucas_type_with_p1(spec.d, spec.g, p0, p1)?,
                    None => GfpFamily::lucas_type(spec.d, spec.g, p0)?,
                }
            }
        };
        Ok(match spec.name {
            Some(name) => family.named(name),
            None => family,
        })
    }
}

impl Serialize for GfpFamily {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_spec().serialize(s)
    }
}

impl<'de> Deserialize<'de> for GfpFamily {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let spec = FamilySpec::deserialize(d)?;
        // Registry families that skip the degree check round-trip by name.
        if let Some(name) = &spec.name {
            if let Some(known) = lookup(name) {
                if known.to_spec().d == spec.d && known.to_spec().g == spec.g && known.kind == spec.kind {
                    return Ok(known);
                }
            }
        }
        GfpFamily::try_from(spec).map_err(serde::de::Error::custom)
    }
}

// ---------------------------------------------------------------------------
// Registry

fn lin(c: i64, h: i64) -> Polynomial {
    Polynomial::from_i64s(&[h, c])
}

fn konst(c: i64) -> Polynomial {
    Polynomial::from_i64s(&[c])
}

fn fib(name: &str, d: Polynomial, g: Polynomial) -> GfpFamily {
    GfpFamily::fibonacci_type(d, g)
        .expect("registry entry is valid")
        .named(name)
}

fn luc(name: &str, d: Polynomial, g: Polynomial, p0: i64) -> GfpFamily {
    GfpFamily::lucas_type(d, g, rational::int(p0))
        .expect("registry entry is valid")
        .named(name)
}

/// The thirteen classic families.
pub fn registry_classic() -> Vec<GfpFamily> {
    vec![
        fib("Fibonacci", lin(1, 0), konst(1)),
        luc("Lucas", lin(1, 0), konst(1), 2),
        fib("Pell", lin(2, 0), konst(1)),
        luc("Pell-Lucas", lin(2, 0), konst(1), 2),
        luc("Pell-Lucas-prime", lin(2, 0), konst(1), 1),
        fib("Fermat", lin(3, 0), konst(-2)),
        luc("Fermat-Lucas", lin(3, 0), konst(-2), 2),
        fib("Chebyshev second kind", lin(2, 0), konst(-1)),
        luc("Chebyshev first kind", lin(2, 0), konst(-1), 1),
        fib("Morgan-Voyce B", lin(1, 2), konst(-1)),
        luc("Morgan-Voyce C", lin(1, 2), konst(-1), 2),
        fib("Vieta", lin(1, 0), konst(-1)),
        luc("Vieta-Lucas", lin(1, 0), konst(-1), 2),
    ]
}

/// The Jacobsthal pair: `d = 1`, `g = 2x`. Constructible, but `g` is not
/// constant so the orthogonality and random-walk machinery rejects it.
pub fn jacobsthal_pair() -> (GfpFamily, GfpFamily) {
    let d = konst(1);
    let g = lin(2, 0);
    let f = GfpFamily::relaxed(GfpKind::FibonacciType, d.clone(), g.clone(), None)
        .expect("valid")
        .named("Jacobsthal");
    let l = GfpFamily::relaxed(GfpKind::LucasType, d, g, Some(rational::int(2)))
        .expect("valid")
        .named("Jacobsthal-Lucas");
    (f, l)
}

/// Every registry family: the classic thirteen plus the Jacobsthal pair.
pub fn registry_all() -> Vec<GfpFamily> {
    let mut all = registry_classic();
    let (j, jl) = jacobsthal_pair();
    all.push(j);
    all.push(jl);
    all
}

fn name_key(name: &str) -> String {
    name.chars()
        .filter(char::is_ascii_alphanumeric)
        .map(|c| c.to_ascii_lowercase())
        .collect()
}

/// Case- and punctuation-insensitive lookup ("chebyshev-first-kind",
/// "Chebyshev first kind" and "chebyshev1" all match).
pub fn lookup(name: &str) -> Option<GfpFamily> {
    let key = name_key(name);
    let key = match key.as_str() {
        "chebyshev1" | "chebyshevt" => "chebyshevfirstkind".to_string(),
        "chebyshev2" | "chebyshevu" => "chebyshevsecondkind".to_string(),
        "morganvoyce" => "morganvoyceb".to_string(),
        "pelllucasprime" | "pelllucas1" => "pelllucasprime".to_string(),
        _ => key,
    };
    registry_all()
        .into_iter()
        .find(|f| f.name().map(name_key).as_deref() == Some(key.as_str()))
}

/// Conjugate pairings (Lucas-type name, Fibonacci-type name).
const CONJUGATE_PAIRS: [(&str, &str); 7] = [
    ("Lucas", "Fibonacci"),
    ("Pell-Lucas-prime", "Pell"),
    ("Fermat-Lucas", "Fermat"),
    ("Chebyshev first kind", "Chebyshev second kind"),
    ("Jacobsthal-Lucas", "Jacobsthal"),
    ("Morgan-Voyce C", "Morgan-Voyce B"),
    ("Vieta-Lucas", "Vieta"),
];

/// The equivalent family of the opposite type sharing `d` and `g`.
///
/// Named registry families use their classic partner. Otherwise a Lucas-type
/// partner takes `p0 = 2` (so `p1 = d`).
pub fn conjugate_of(f: &GfpFamily) -> GfpFamily {
    if let Some(name) = f.name() {
        let key = name_key(name);
        for (lucas, fibo) in CONJUGATE_PAIRS {
            let partner = match f.kind {
                GfpKind::LucasType if name_key(lucas) == key => fibo,
                GfpKind::FibonacciType if name_key(fibo) == key => lucas,
                _ => continue,
            };
            if let Some(p) = lookup(partner) {
                if p.d == f.d && p.g == f.g {
                    return p;
                }
            }
        }
    }
    let check_degree = f.d.degree() > f.g.degree();
    let (kind, p0) = match f.kind {
        GfpKind::FibonacciType => (GfpKind::LucasType, Some(rational::int(2))),
        GfpKind::LucasType => (GfpKind::FibonacciType, None),
    };
    let lucas = p0.map(|p0| LucasInit {
        p1: f.d.scale(&(&p0 / rational::int(2))),
        p0,
    });
    GfpFamily::build(kind, f.d.clone(), f.g.clone(), lucas, check_degree).expect("partner of a valid family is valid")
}

// ---------------------------------------------------------------------------
// Generation and closed forms

/// Terms `G_0 ..= G_{n_max}` of one family.
#[derive(Debug, Clone, PartialEq)]
pub struct GfpSequence {
    pub family: GfpFamily,
    pub terms: Vec<Polynomial>,
}

impl GfpSequence {
    pub fn term(&self, n: usize) -> Option<&Polynomial> {
        self.terms.get(n)
    }

    /// Re-checks `terms[n] = d·terms[n-1] + g·terms[n-2]` for every stored `n`.
    pub fn satisfies_recurrence(&self) -> bool {
        let (t0, t1) = self.family.initial_terms();
        let starts_ok = self.terms.first().is_none_or(|t| *t == t0) && self.terms.get(1).is_none_or(|t| *t == t1);
        starts_ok
            && self
                .terms
                .windows(3)
                .all(|w| w[2] == &(&self.family.d * &w[1]) + &(&self.family.g * &w[0]))
    }
}

/// Exact terms `0..=n_max` by the three-term recurrence.
pub fn generate(f: &GfpFamily, n_max: usize) -> GfpSequence {
    let (t0, t1) = f.initial_terms();
    let mut terms = Vec::with_capacity(n_max + 1);
    terms.push(t0);
    if n_max >= 1 {
        terms.push(t1);
    }
    for n in 2..=n_max {
        let next = &(&f.d * &terms[n - 1]) + &(&f.g * &terms[n - 2]);
        terms.push(next);
    }
    GfpSequence {
        family: f.clone(),
        terms,
    }
}

/// `Σ_{i=0}^{⌊(n-1)/2⌋} C(n-i-1, i) d^{n-2i-1} g^i` for Fibonacci-type families.
pub fn expand_fibonacci_type(f: &GfpFamily, n: usize) -> Result<Polynomial> {
    if f.kind != GfpKind::FibonacciType {
        return Err(Error::WrongKind {
            expected: "Fibonacci-type",
        });
    }
    if n == 0 {
        return Err(Error::HypothesisViolated("binomial expansion needs n >= 1".into()));
    }
    let mut acc = Polynomial::zero();
    for i in 0..=(n - 1) / 2 {
        let c = rational::binomial((n - i - 1) as u64, i as u64);
        let term = &f.d.pow((n - 2 * i - 1) as u32) * &f.g.pow(i as u32);
        acc = &acc + &term.scale(&c);
    }
    Ok(acc)
}

/// `(1/α) Σ_{i=0}^{⌊n/2⌋} n/(n-i) · C(n-i, i) d^{n-2i} g^i` for Lucas-type families.
pub fn expand_lucas_type(f: &GfpFamily, n: usize) -> Result<Polynomial> {
    let alpha = match (f.kind, f.alpha()) {
        (GfpKind::LucasType, Some(a)) => a,
        _ => return Err(Error::WrongKind { expected: "Lucas-type" }),
    };
    if n == 0 {
        return Err(Error::HypothesisViolated("binomial expansion needs n >= 1".into()));
    }
    let mut acc = Polynomial::zero();
    for i in 0..=n / 2 {
        let weight = rational::ratio(n as i64, (n - i) as i64) * rational::binomial((n - i) as u64, i as u64);
        let term = &f.d.pow((n - 2 * i) as u32) * &f.g.pow(i as u32);
        acc = &acc + &term.scale(&weight);
    }
    Ok(acc.scale(&(Rational::one() / alpha)))
}

// ---------------------------------------------------------------------------
// Binet form

/// `a`, `b` and the discriminant `d² + 4g` at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BinetParts {
    pub a_val: Complex64,
    pub b_val: Complex64,
    pub disc: Complex64,
}

impl BinetParts {
    /// Largest relative defect among `a + b = d`, `a·b = -g`, `(a - b)² = disc`.
    pub fn identity_defect(&self, d: Complex64, g: Complex64) -> f64 {
        let rel = |lhs: Complex64, rhs: Complex64| (lhs - rhs).norm() / (1.0 + rhs.norm());
        rel(self.a_val + self.b_val, d)
            .max(rel(self.a_val * self.b_val, -g))
            .max(rel((self.a_val - self.b_val).powi(2), self.disc))
    }
}

const DISC_FLOOR: f64 = 1e-14;

/// Principal-branch `a(x0)`, `b(x0)`. Both Binet forms are symmetric in
/// `(a, b)` so the branch does not affect any term.
pub fn binet_parts(f: &GfpFamily, x0: Complex64) -> Result<BinetParts> {
    let d = f.d.eval_complex(x0);
    let g = f.g.eval_complex(x0);
    let disc = d * d + 4.0 * g;
    if disc.norm() < DISC_FLOOR {
        return Err(Error::DegenerateDiscriminant(disc.norm()));
    }
    let root = disc.sqrt();
    Ok(BinetParts {
        a_val: (d + root) / 2.0,
        b_val: (d - root) / 2.0,
        disc,
    })
}

/// `G_n(x0)` via `(aⁿ - bⁿ)/(a - b)` or `(aⁿ + bⁿ)/α`.
pub fn binet_eval(f: &GfpFamily, n: usize, x0: Complex64) -> Result<Complex64> {
    let parts = binet_parts(f, x0)?;
    let e = i32::try_from(n).map_err(|_| Error::HypothesisViolated("n too large".into()))?;
    let an = parts.a_val.powi(e);
    let bn = parts.b_val.powi(e);
    Ok(match f.alpha() {
        None => (an - bn) / (parts.a_val - parts.b_val),
        Some(alpha) => (an + bn) / rational::to_f64(&alpha),
    })
}

// ---------------------------------------------------------------------------
// Parity under x -> -x

fn require_odd_even(f: &GfpFamily) -> Result<()> {
    if !f.d.is_odd() {
        return Err(Error::HypothesisViolated(format!(
            "d = {} is not an odd polynomial",
            f.d
        )));
    }
    if !f.g.is_even() {
        return Err(Error::HypothesisViolated(format!(
            "g = {} is not an even polynomial",
            f.g
        )));
    }
    Ok(())
}

/// Sign `s` with `G_n(-x) = s·G_n(x)`, if the term has definite parity.
pub fn reflection_sign(term: &Polynomial) -> Option<i8> {
    if term.is_even() {
        Some(1)
    } else if term.is_odd() {
        Some(-1)
    } else {
        None
    }
}

/// The sign predicted for `G_n(-x)/G_n(x)` when `d` is odd and `g` even:
/// `(-1)^{n+1}` for the Fibonacci type and `(-1)^n` for the Lucas type
/// (`L_0 = p0` is an even constant).
pub fn predicted_reflection_sign(kind: GfpKind, n: usize) -> i8 {
    let exponent = match kind {
        GfpKind::FibonacciType => n + 1,
        GfpKind::LucasType => n,
    };
    if exponent % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Checks `G_n(-x) = ±G_n(x)` exactly with the sign from
/// [`predicted_reflection_sign`].
pub fn parity_reflect_check(f: &GfpFamily, n: usize) -> Result<bool> {
    require_odd_even(f)?;
    let term = f.term(n);
    let sign = predicted_reflection_sign(f.kind, n);
    let reflected = term.reflect();
    Ok(if sign == 1 {
        reflected == term
    } else {
        reflected == -&term
    })
}

pub(crate) fn ensure_odd_even(f: &GfpFamily) -> Result<()> {
    require_odd_even(f)
}

/// Degree the recurrence produces when `deg d > deg g`: `(n-1)·deg d` for
/// Fibonacci type, `n·deg d` for Lucas type.
pub fn expected_degree(f: &GfpFamily, n: usize) -> Degree {
    let dd = f.d.degree().finite().unwrap_or(0);
    match f.kind {
        GfpKind::FibonacciType if n == 0 => Degree::MinusInfinity,
        GfpKind::FibonacciType => Degree::Finite((n - 1) * dd),
        GfpKind::LucasType => Degree::Finite(n * dd),
    }
}

impl GfpFamily {
    /// `true` when every coefficient of `g` is zero beyond the constant term
    /// and that constant is negative.
    pub fn has_negative_constant_g(&self) -> bool {
        self.constant_g().is_some_and(|c| c < Rational::zero())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};
    use proptest::prelude::*;

    fn p(c: &[i64]) -> Polynomial {
        Polynomial::from_i64s(c)
    }

    fn family(name: &str) -> GfpFamily {
        lookup(name).unwrap_or_else(|| panic!("{name} missing"))
    }

    /// Independent oracle: Σ_i C(n-1-i, i) x^{n-1-2i}, coefficients built
    /// directly without the recurrence.
    fn classical_fibonacci_by_binomials(n: usize) -> Polynomial {
        let mut coeffs = vec![0i64; n];
        for i in 0..=(n - 1) / 2 {
            let mut c = 1i64;
            for k in 0..i {
                c = c * (n - 1 - i - k) as i64 / (k as i64 + 1);
            }
            coeffs[n - 1 - 2 * i] = c;
        }
        p(&coeffs)
    }

    #[test]
    fn registry_has_the_thirteen_families() {
        let table = registry_classic();
        assert_eq!(table.len(), 13);
        let fermat = family("Fermat");
        assert_eq!(fermat.kind(), GfpKind::FibonacciType);
        assert_eq!(fermat.d(), &p(&[0, 3]));
        assert_eq!(fermat.g(), &p(&[-2]));

        let t = family("Chebyshev first kind");
        assert_eq!(t.kind(), GfpKind::LucasType);
        assert_eq!(t.p0(), Some(&int(1)));
        assert_eq!(t.p1(), Some(&p(&[0, 1])));
        assert_eq!(t.d(), &p(&[0, 2]));
        assert_eq!(t.g(), &p(&[-1]));

        let c = family("Morgan-Voyce C");
        assert_eq!(
            (c.p0(), c.p1(), c.d(), c.g()),
            (Some(&int(2)), Some(&p(&[2, 1])), &p(&[2, 1]), &p(&[-1]))
        );

        assert_eq!(family("Pell-Lucas").p0(), Some(&int(2)));
        assert_eq!(family("Pell-Lucas-prime").p0(), Some(&int(1)));
    }

    #[test]
    fn lookup_is_forgiving() {
        assert_eq!(family("chebyshev-first-kind").name(), Some("Chebyshev first kind"));
        assert_eq!(family("CHEBYSHEV1").name(), Some("Chebyshev first kind"));
        assert_eq!(family("pell_lucas_prime").name(), Some("Pell-Lucas-prime"));
        assert!(lookup("hermite").is_none());
    }

    #[test]
    fn conjugates_follow_the_pairing() {
        let luc = conjugate_of(&family("Fibonacci"));
        assert_eq!(luc.name(), Some("Lucas"));
        assert_eq!((luc.d(), luc.g()), (&p(&[0, 1]), &p(&[1])));
        assert_eq!(
            conjugate_of(&family("Chebyshev second kind")).name(),
            Some("Chebyshev first kind")
        );
        assert_eq!(conjugate_of(&family("Pell")).name(), Some("Pell-Lucas-prime"));
        for f in registry_all() {
            let back = conjugate_of(&conjugate_of(&f));
            assert_eq!((back.d(), back.g()), (f.d(), f.g()));
            assert_ne!(conjugate_of(&f).kind(), f.kind());
        }
    }

    #[test]
    fn unnamed_conjugate_uses_p0_two() {
        let f = GfpFamily::fibonacci_type(p(&[1, 5]), p(&[-3])).unwrap();
        let l = conjugate_of(&f);
        assert_eq!(l.p0(), Some(&int(2)));
        assert_eq!(l.p1(), Some(f.d()));
    }

    #[test]
    fn constructor_rejects_invalid_families() {
        assert!(GfpFamily::fibonacci_type(p(&[1]), p(&[0, 1])).is_err());
        assert!(GfpFamily::fibonacci_type(Polynomial::zero(), p(&[1])).is_err());
        assert!(GfpFamily::fibonacci_type(p(&[0, 1]), Polynomial::zero()).is_err());
        assert!(GfpFamily::lucas_type(p(&[0, 1]), p(&[1]), int(3)).is_err());
        assert!(GfpFamily::lucas_type_with_p1(p(&[0, 2]), p(&[-1]), int(2), p(&[0, 1])).is_err());
        assert!(GfpFamily::lucas_type_with_p1(p(&[0, 2]), p(&[-1]), int(1), p(&[0, 1])).is_ok());
    }

    #[test]
    fn generate_examples() {
        let fib = family("Fibonacci");
        assert_eq!(generate(&fib, 5).terms[5], classical_fibonacci_by_binomials(5));
        assert_eq!(generate(&fib, 5).terms[5], p(&[1, 0, 3, 0, 1]));
        assert_eq!(generate(&family("Lucas"), 0).terms[0], p(&[2]));
        // 3x·3x - 2·1
        assert_eq!(generate(&family("Fermat"), 3).terms[3], p(&[-2, 0, 9]));
    }

    #[test]
    fn expansions_match_hand_values() {
        let fib = family("Fibonacci");
        assert_eq!(expand_fibonacci_type(&fib, 1).unwrap(), p(&[1]));
        assert_eq!(expand_fibonacci_type(&fib, 2).unwrap(), *fib.d());
        assert_eq!(expand_fibonacci_type(&fib, 6).unwrap(), p(&[0, 3, 0, 4, 0, 1]));
        assert_eq!(expand_fibonacci_type(&fib, 6).unwrap(), generate(&fib, 6).terms[6]);

        let luc = family("Lucas");
        assert_eq!(expand_lucas_type(&luc, 1).unwrap(), p(&[0, 1]));
        assert_eq!(expand_lucas_type(&luc, 3).unwrap(), p(&[0, 3, 0, 1]));
        let t = family("Chebyshev first kind");
        assert_eq!(expand_lucas_type(&t, 2).unwrap(), p(&[-1, 0, 2]));
    }

    #[test]
    fn expansions_reject_wrong_kind_and_zero_index() {
        assert_eq!(
            expand_fibonacci_type(&family("Lucas"), 3),
            Err(Error::WrongKind {
                expected: "Fibonacci-type"
            })
        );
        assert_eq!(
            expand_lucas_type(&family("Fibonacci"), 3),
            Err(Error::WrongKind { expected: "Lucas-type" })
        );
        assert!(expand_fibonacci_type(&family("Fibonacci"), 0).is_err());
    }

    #[test]
    fn triple_identity_on_every_table_family() {
        for f in registry_classic() {
            let seq = generate(&f, 25);
            assert!(seq.satisfies_recurrence());
            for n in 1..=25 {
                let closed = match f.kind() {
                    GfpKind::FibonacciType => expand_fibonacci_type(&f, n).unwrap(),
                    GfpKind::LucasType => expand_lucas_type(&f, n).unwrap(),
                };
                assert_eq!(closed, seq.terms[n], "{} n={n}", f.display_name());
                assert_eq!(seq.terms[n].degree(), expected_degree(&f, n));
            }
        }
    }

    #[test]
    fn jacobsthal_is_generable() {
        let (j, jl) = jacobsthal_pair();
        // J_3 = 1 + 2x, j_2 = 1 + 4x
        assert_eq!(j.term(3), p(&[1, 2]));
        assert_eq!(jl.term(2), p(&[1, 4]));
        assert_eq!(expand_fibonacci_type(&j, 7).unwrap(), j.term(7));
        assert_eq!(expand_lucas_type(&jl, 7).unwrap(), jl.term(7));
    }

    #[test]
    fn binet_examples() {
        let fib = family("Fibonacci");
        let one = Complex64::new(1.0, 0.0);
        assert_eq!(
            binet_eval(&fib, 0, Complex64::new(0.3, 0.7)).unwrap(),
            Complex64::new(0.0, 0.0)
        );
        assert!((binet_eval(&fib, 1, Complex64::new(0.3, 0.7)).unwrap() - one).norm() < 1e-15);
        let f10 = binet_eval(&fib, 10, one).unwrap();
        assert!((f10 - Complex64::new(55.0, 0.0)).norm() < 1e-9 * 55.0);
        let l10 = binet_eval(&family("Lucas"), 10, one).unwrap();
        assert!((l10 - Complex64::new(123.0, 0.0)).norm() < 1e-9 * 123.0);
    }

    #[test]
    fn binet_rejects_vanishing_discriminant() {
        // Chebyshev: d² + 4g = 4x² - 4 vanishes at x = 1.
        let err = binet_eval(&family("Chebyshev second kind"), 3, Complex64::new(1.0, 0.0));
        assert!(matches!(err, Err(Error::DegenerateDiscriminant(_))));
    }

    #[test]
    fn binet_identities_hold() {
        for f in registry_classic() {
            let x0 = Complex64::new(0.37, -1.21);
            let parts = binet_parts(&f, x0).unwrap();
            let defect = parts.identity_defect(f.d().eval_complex(x0), f.g().eval_complex(x0));
            assert!(defect < 1e-10, "{}: {defect}", f.display_name());
        }
    }

    #[test]
    fn parity_examples() {
        let fib = family("Fibonacci");
        let pell = family("Pell");
        for n in 0..=20 {
            assert!(parity_reflect_check(&fib, n).unwrap());
            assert!(parity_reflect_check(&pell, n).unwrap());
        }
        assert!(matches!(
            parity_reflect_check(&family("Morgan-Voyce B"), 3),
            Err(Error::HypothesisViolated(_))
        ));
    }

    #[test]
    fn lucas_parity_sign_is_minus_one_to_the_n() {
        for name in [
            "Lucas",
            "Pell-Lucas",
            "Pell-Lucas-prime",
            "Chebyshev first kind",
            "Vieta-Lucas",
        ] {
            let f = family(name);
            for n in 0..=20 {
                assert!(parity_reflect_check(&f, n).unwrap(), "{name} n={n}");
                let observed = reflection_sign(&f.term(n)).unwrap();
                assert_eq!(observed, if n % 2 == 0 { 1 } else { -1 });
                // (-1)^{n+1} would be the wrong sign for every Lucas term
                assert_ne!(observed, if (n + 1) % 2 == 0 { 1 } else { -1 });
            }
        }
    }

    #[test]
    fn json_round_trip() {
        let t = family("Chebyshev first kind");
        let json = serde_json::to_string(&t).unwrap();
        assert_eq!(
            json,
            r#"{"kind":"lucas","d":["0","2"],"g":["-1"],"p0":"1","p1":["0","1"],"name":"Chebyshev first kind"}"#
        );
        let back: GfpFamily = serde_json::from_str(&json).unwrap();
        assert_eq!(back, t);
        let (j, _) = jacobsthal_pair();
        let back: GfpFamily = serde_json::from_str(&serde_json::to_string(&j).unwrap()).unwrap();
        assert_eq!(back, j);
        let custom: GfpFamily =
            serde_json::from_str(r#"{"kind":"lucas","d":["1/2","3"],"g":["-5"],"p0":"-2"}"#).unwrap();
        assert_eq!(custom.p1(), Some(&Polynomial::from_coeffs(vec![ratio(-1, 2), int(-3)])));
    }

    fn odd_poly() -> impl Strategy<Value = Polynomial> {
        (proptest::collection::vec(-4i64..=4, 1..3), 1i64..=4).prop_map(|(c, lead)| {
            let mut coeffs = vec![0i64; 2 * c.len() + 2];
            for (k, v) in c.iter().enumerate() {
                coeffs[2 * k + 1] = *v;
            }
            coeffs[2 * c.len() + 1] = lead;
            p(&coeffs)
        })
    }

    proptest! {
        #[test]
        fn reflection_identity_for_random_odd_d_even_g(
            d in odd_poly(), g0 in prop_oneof![-3i64..=-1, 1i64..=3], g2 in -2i64..=2, lucas in any::<bool>()
        ) {
            let dd = d.degree().finite().unwrap();
            let g = if dd > 2 { p(&[g0, 0, g2]) } else { p(&[g0]) };
            let f = if lucas {
                GfpFamily::lucas_type(d, g, int(2)).unwrap()
            } else {
                GfpFamily::fibonacci_type(d, g).unwrap()
            };
            for n in 0..=8 {
                prop_assert!(parity_reflect_check(&f, n).unwrap());
            }
        }
    }
}
