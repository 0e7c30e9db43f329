//! Orthogonality of GFPs with constant negative `g`.
//!
//! Write `g = -G` with `G > 0`. On an interval `[s1, s2]` where `d` runs
//! monotonically from `-2√G` to `2√G`, the substitution `u = d(x)/(2√G)`
//! turns Fibonacci-type terms into scaled second-kind Chebyshev polynomials
//! and Lucas-type terms into scaled first-kind ones. The weights
//!
//! * Fibonacci: `√(4G - d(x)²)·|d'(x)|`
//! * Lucas: `|d'(x)| / √(4G - d(x)²)`
//!
//! become the Chebyshev weights in `u`, so inner products reduce to
//! Gauss–Chebyshev sums.

use std::f64::consts::PI;

use num_complex::Complex64;
use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gfp::{self, GfpFamily, GfpKind};
use crate::par::{self, Execution};
use crate::poly::{Degree, Polynomial};
use crate::quadrature::{self, Rule};
use crate::rational::{self, Rational};
use crate::roots::all_roots_companion;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DensityKind {
    FibonacciWeight,
    LucasWeight,
}

impl DensityKind {
    /// The weight that matches a family kind.
    pub fn for_kind(kind: GfpKind) -> Self {
        match kind {
            GfpKind::FibonacciType => DensityKind::FibonacciWeight,
            GfpKind::LucasType => DensityKind::LucasWeight,
        }
    }
}

/// Weight for a family with `g = -G`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightSpec {
    pub family: GfpFamily,
    #[serde(with = "rational::serde_str")]
    pub big_g: Rational,
    /// `[s1, s2]` with `d(s1) = -2√G` and `d(s2) = 2√G`; `s1 > s2` when `d`
    /// is decreasing.
    pub support: [f64; 2],
    pub density_kind: DensityKind,
    /// Reciprocal of the raw mass, so `normalization·density` is a
    /// probability density.
    pub normalization: f64,
    /// Multiplier applied to the raw density by [`inner_product`].
    pub scale: f64,
}

impl WeightSpec {
    /// Interval endpoints in increasing order.
    pub fn interval(&self) -> (f64, f64) {
        let [a, b] = self.support;
        (a.min(b), a.max(b))
    }

    pub fn root_g(&self) -> f64 {
        rational::to_f64(&self.big_g).sqrt()
    }

    /// Same weight scaled to unit mass.
    pub fn normalized(&self) -> Self {
        Self {
            scale: self.normalization,
            ..self.clone()
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            scale: self.scale * factor,
            ..self.clone()
        }
    }

    /// Raw density at `x` (without `scale`); zero outside the support.
    pub fn density(&self, x: f64) -> f64 {
        let (lo, hi) = self.interval();
        if x <= lo || x >= hi {
            return 0.0;
        }
        let four_g = 4.0 * rational::to_f64(&self.big_g);
        let dx = self.family.d().eval_f64(x);
        let slope = self.family.d().derivative().eval_f64(x).abs();
        let gap = (four_g - dx * dx).max(0.0);
        match self.density_kind {
            DensityKind::FibonacciWeight => gap.sqrt() * slope,
            DensityKind::LucasWeight => slope / gap.sqrt(),
        }
    }

    /// Factor and rule turning `∫ f·density dx` into `factor·Σ w_k f(x(u_k))`.
    pub(crate) fn substituted_rule(&self, nodes: usize) -> (f64, Rule) {
        match self.density_kind {
            DensityKind::FibonacciWeight => (
                4.0 * rational::to_f64(&self.big_g),
                quadrature::chebyshev_second_kind(nodes),
            ),
            DensityKind::LucasWeight => (1.0, quadrature::chebyshev_first_kind(nodes)),
        }
    }

    /// Preimage `x(u)` of `d(x) = 2√G·u` on the support.
    pub fn preimage(&self, u: f64) -> f64 {
        let d = self.family.d();
        let target = 2.0 * self.root_g() * u;
        if d.degree() == Degree::Finite(1) {
            let h = rational::to_f64(&d.coeff(0));
            let c = rational::to_f64(&d.coeff(1));
            return (target - h) / c;
        }
        // bisection on the monotone branch, oriented so that d(lo) < target
        let [mut lo, mut hi] = self.support;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid == lo || mid == hi {
                break;
            }
            if d.eval_f64(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

/// Real root `v^(1/t)` for odd `t`.
fn odd_root(v: f64, t: usize) -> f64 {
    v.signum() * v.abs().powf(1.0 / t as f64)
}

/// Real roots of `p` from the companion oracle.
fn real_roots(p: &Polynomial) -> Vec<f64> {
    match all_roots_companion(p) {
        Ok(roots) => roots
            .into_iter()
            .filter(|z: &Complex64| z.im.abs() <= 1e-6 * (1.0 + z.re.abs()))
            .map(|z| z.re)
            .collect(),
        Err(_) => Vec::new(),
    }
}

/// Newton refinement of `d(x) = target` starting at `x`.
fn polish(d: &Polynomial, dp: &Polynomial, target: f64, mut x: f64) -> f64 {
    for _ in 0..60 {
        let slope = dp.eval_f64(x);
        if slope == 0.0 {
            break;
        }
        let step = (d.eval_f64(x) - target) / slope;
        x -= step;
        if step.abs() <= 1e-16 * x.abs().max(1e-300) {
            break;
        }
    }
    x
}

/// `d'` keeps one strict sign on the open interval between `a` and `b`.
fn monotone_between(dp: &Polynomial, critical: &[f64], a: f64, b: f64) -> bool {
    let (lo, hi) = (a.min(b), a.max(b));
    let mut cuts = vec![lo];
    cuts.extend(critical.iter().copied().filter(|&c| c > lo && c < hi));
    cuts.push(hi);
    cuts.sort_by(f64::total_cmp);
    let signs: Vec<f64> = cuts
        .windows(2)
        .map(|w| dp.eval_f64(0.5 * (w[0] + w[1])).signum())
        .collect();
    signs.iter().all(|&s| s != 0.0 && s == signs[0])
}

/// Support `[s1, s2]` with `d(s1) = -2√G`, `d(s2) = 2√G`.
fn solve_support(d: &Polynomial, big_g: &Rational) -> Result<[f64; 2]> {
    let deg = match d.degree() {
        Degree::Finite(k) if k >= 1 => k,
        _ => return Err(Error::NoRealSupport),
    };
    let r = rational::to_f64(big_g).sqrt() * 2.0;
    let h = rational::to_f64(&d.coeff(0));
    let c = rational::to_f64(&d.coeff(deg));
    let monomial_plus_constant = (1..deg).all(|k| d.coeff(k).is_zero());
    if monomial_plus_constant && deg % 2 == 1 {
        return Ok([odd_root((-r - h) / c, deg), odd_root((r - h) / c, deg)]);
    }

    let disc = d * d - Polynomial::constant(big_g * rational::int(4));
    let dp = d.derivative();
    let mut lows = Vec::new();
    let mut highs = Vec::new();
    for x in real_roots(&disc) {
        if d.eval_f64(x) < 0.0 {
            lows.push(polish(d, &dp, -r, x));
        } else {
            highs.push(polish(d, &dp, r, x));
        }
    }
    if lows.is_empty() || highs.is_empty() {
        return Err(Error::NoRealSupport);
    }
    let critical = real_roots(&dp);
    let mut pairs: Vec<(f64, f64)> = lows.iter().flat_map(|&a| highs.iter().map(move |&b| (a, b))).collect();
    pairs.sort_by(|p, q| {
        (p.0 - p.1)
            .abs()
            .total_cmp(&(q.0 - q.1).abs())
            .then(p.0.min(p.1).total_cmp(&q.0.min(q.1)))
    });
    pairs
        .iter()
        .find(|(a, b)| monotone_between(&dp, &critical, *a, *b))
        .map(|&(a, b)| [a, b])
        .ok_or_else(|| {
            let (a, b) = pairs[0];
            Error::NonMonotoneD(a.min(b), a.max(b))
        })
}

/// `G` from `g = -G`, or the reason there is none.
fn negated_constant_g(f: &GfpFamily) -> Result<Rational> {
    let g = f.constant_g().ok_or(Error::NonConstantG)?;
    if g.is_zero() {
        return Err(Error::DegenerateG);
    }
    if g.is_positive() {
        return Err(Error::PositiveG);
    }
    Ok(-g)
}

/// Weight matching the family kind.
pub fn build_weight(f: &GfpFamily) -> Result<WeightSpec> {
    build_weight_with_kind(f, DensityKind::for_kind(f.kind()))
}

/// Weight with an explicit density kind.
pub fn build_weight_with_kind(f: &GfpFamily, density_kind: DensityKind) -> Result<WeightSpec> {
    let big_g = negated_constant_g(f)?;
    let support = solve_support(f.d(), &big_g)?;
    let mut w = WeightSpec {
        family: f.clone(),
        big_g,
        support,
        density_kind,
        normalization: 1.0,
        scale: 1.0,
    };
    let (factor, rule) = w.substituted_rule(4);
    w.normalization = 1.0 / (factor * rule.apply(|_| 1.0));
    Ok(w)
}

const MAX_DOUBLED_NODES: usize = 1 << 12;

/// `∫ p·q·(scale·density) dx` over the support.
///
/// With linear `d` the substituted integrand is a polynomial in `u` and the
/// Chebyshev rule with `(deg p + deg q)/2 + 4` nodes is exact. Otherwise the
/// node count is doubled until two estimates agree to `1e-13` relative, with
/// adaptive Gauss–Kronrod in `u = cos θ` as a last resort.
pub fn inner_product(p: &Polynomial, q: &Polynomial, w: &WeightSpec) -> f64 {
    let deg = |r: &Polynomial| r.degree().finite().unwrap_or(0);
    let nodes = (deg(p) + deg(q)) / 2 + 4;
    let pf = p.to_f64_coeffs();
    let qf = q.to_f64_coeffs();
    let eval = |c: &[f64], x: f64| c.iter().rev().fold(0.0, |acc, &a| acc * x + a);
    let integrand = |u: f64| {
        let x = w.preimage(u);
        eval(&pf, x) * eval(&qf, x)
    };
    let estimate = |n: usize| {
        let (factor, rule) = w.substituted_rule(n);
        factor * rule.apply(integrand)
    };
    if w.family.d().degree() == Degree::Finite(1) {
        return w.scale * estimate(nodes);
    }
    let mut n = nodes;
    let mut previous = estimate(n);
    while n < MAX_DOUBLED_NODES {
        n *= 2;
        let current = estimate(n);
        if (current - previous).abs() <= 1e-13 * current.abs().max(1.0) {
            return w.scale * current;
        }
        previous = current;
    }
    let weight_in_theta = |t: f64| match w.density_kind {
        DensityKind::FibonacciWeight => 4.0 * rational::to_f64(&w.big_g) * t.sin().powi(2),
        DensityKind::LucasWeight => 1.0,
    };
    let r = quadrature::gauss_kronrod(|t| integrand(t.cos()) * weight_in_theta(t), 0.0, PI, 0.0, 1e-11, 10_000);
    w.scale * r.value
}

/// Inner products `⟨G_n, G_m⟩` of consecutive terms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GramMatrix {
    pub family: GfpFamily,
    pub size: usize,
    /// Term subscripts labelling rows and columns.
    pub indices: Vec<usize>,
    pub entries: Vec<Vec<f64>>,
    /// Largest change of an entry when the node count is doubled.
    pub quadrature_error_estimate: f64,
}

impl GramMatrix {
    pub fn max_off_diagonal(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.size {
            for j in 0..self.size {
                if i != j {
                    worst = worst.max(self.entries[i][j].abs());
                }
            }
        }
        worst
    }

    pub fn min_diagonal(&self) -> f64 {
        (0..self.size).map(|i| self.entries[i][i]).fold(f64::INFINITY, f64::min)
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.size).all(|i| (0..self.size).all(|j| self.entries[i][j] == self.entries[j][i]))
    }
}

/// Terms as functions of `D = d(x)`: `T_0, T_1` from the initial conditions
/// and `T_n = D·T_{n-1} - G·T_{n-2}`. Returns values for subscripts
/// `0..=n_max`.
fn terms_in_d(f: &GfpFamily, big_g: f64, big_d: f64, n_max: usize) -> Vec<f64> {
    let (t0, t1) = match f.alpha() {
        None => (0.0, 1.0),
        Some(alpha) => (
            rational::to_f64(f.p0().expect("lucas")),
            big_d / rational::to_f64(&alpha),
        ),
    };
    let mut out = vec![t0, t1];
    for n in 2..=n_max {
        out.push(big_d * out[n - 1] - big_g * out[n - 2]);
    }
    out.truncate(n_max + 1);
    out
}

fn gram_entries(f: &GfpFamily, w: &WeightSpec, indices: &[usize], nodes: usize, exec: Execution) -> Vec<Vec<f64>> {
    let n_max = *indices.last().unwrap_or(&0);
    let big_g = rational::to_f64(&w.big_g);
    let two_root_g = 2.0 * big_g.sqrt();
    let (factor, rule) = w.substituted_rule(nodes);
    // one row of term values per node; terms are polynomials in d
    let values: Vec<Vec<f64>> = rule
        .nodes
        .iter()
        .map(|&u| terms_in_d(f, big_g, two_root_g * u, n_max))
        .collect();
    let size = indices.len();
    let pairs: Vec<(usize, usize)> = (0..size).flat_map(|i| (i..size).map(move |j| (i, j))).collect();
    let upper = par::map_slice(&pairs, exec, |&(i, j)| {
        let (a, b) = (indices[i], indices[j]);
        let terms: Vec<f64> = values
            .iter()
            .zip(&rule.weights)
            .map(|(v, wk)| wk * v[a] * v[b])
            .collect();
        w.scale * factor * crate::numeric::pairwise_sum(&terms)
    });
    let mut entries = vec![vec![0.0; size]; size];
    for (&(i, j), v) in pairs.iter().zip(upper) {
        entries[i][j] = v;
        entries[j][i] = v;
    }
    entries
}

/// Gram matrix of terms `1..=n_max` (Fibonacci type) or `0..=n_max` (Lucas
/// type) under `w`.
pub fn gram(f: &GfpFamily, w: &WeightSpec, n_max: usize) -> Result<GramMatrix> {
    gram_with(f, w, n_max, Execution::default())
}

pub fn gram_with(f: &GfpFamily, w: &WeightSpec, n_max: usize, exec: Execution) -> Result<GramMatrix> {
    // the recurrence in D only needs g constant; reuse the weight's G check
    let big_g = negated_constant_g(f)?;
    if big_g != w.big_g {
        return Err(Error::HypothesisViolated("weight was built for a different G".into()));
    }
    let indices: Vec<usize> = (f.kind().first_index()..=n_max).collect();
    let nodes = n_max + 4;
    let entries = gram_entries(f, w, &indices, nodes, exec);
    let doubled = gram_entries(f, w, &indices, 2 * nodes, exec);
    let quadrature_error_estimate = entries
        .iter()
        .flatten()
        .zip(doubled.iter().flatten())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(GramMatrix {
        family: f.clone(),
        size: indices.len(),
        indices,
        entries,
        quadrature_error_estimate,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Criterion {
    /// `d` linear and `g` a positive constant: `F_p` has no real roots for
    /// odd primes `p`, which rules out any positive measure.
    LinearDPositiveG,
    /// A positive integral of two same-parity terms under an even weight.
    SameParityPositivity,
    /// The constructed weight makes every computed off-diagonal vanish.
    GramOffDiagonal,
    /// No criterion applies.
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict")]
pub enum Verdict {
    Orthogonal { weight: Box<WeightSpec> },
    NotOrthogonal { reason: String },
    Undecided { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrthoVerdict {
    pub family: GfpFamily,
    #[serde(flatten)]
    pub verdict: Verdict,
    pub criterion: Criterion,
    /// Largest off-diagonal Gram entry when a weight was built.
    pub max_off_diagonal: Option<f64>,
    /// Same-parity integral over `[-1, 1]` backing a negative verdict.
    pub same_parity_witness: Option<f64>,
}

impl OrthoVerdict {
    pub fn label(&self) -> &'static str {
        match self.verdict {
            Verdict::Orthogonal { .. } => "Orthogonal",
            Verdict::NotOrthogonal { .. } => "NotOrthogonal",
            Verdict::Undecided { .. } => "Undecided",
        }
    }
}

/// Classifies a family as orthogonal, not orthogonal or undecided.
pub fn classify(f: &GfpFamily, n_max: usize, tol: f64) -> OrthoVerdict {
    classify_with(f, n_max, tol, Execution::default())
}

pub fn classify_with(f: &GfpFamily, n_max: usize, tol: f64, exec: Execution) -> OrthoVerdict {
    let linear_d = f.d().degree() == Degree::Finite(1);
    let positive_g = f.constant_g().is_some_and(|g| g.is_positive());
    if linear_d && positive_g {
        let witness = parity_vanish_check(f, 1.0, 2, 4).ok().map(|c| c.integral);
        return OrthoVerdict {
            family: f.clone(),
            verdict: Verdict::NotOrthogonal {
                reason: "d is linear and g is a positive constant: odd-prime terms have no real roots".into(),
            },
            criterion: Criterion::LinearDPositiveG,
            max_off_diagonal: None,
            same_parity_witness: witness,
        };
    }
    let undecided = |reason: String| OrthoVerdict {
        family: f.clone(),
        verdict: Verdict::Undecided { reason },
        criterion: Criterion::None,
        max_off_diagonal: None,
        same_parity_witness: None,
    };
    let weight = match build_weight(f) {
        Ok(w) => w,
        Err(e) => return undecided(e.to_string()),
    };
    let matrix = match gram_with(f, &weight, n_max, exec) {
        Ok(m) => m,
        Err(e) => return undecided(e.to_string()),
    };
    let off = matrix.max_off_diagonal();
    if off <= tol {
        OrthoVerdict {
            family: f.clone(),
            verdict: Verdict::Orthogonal {
                weight: Box::new(weight),
            },
            criterion: Criterion::GramOffDiagonal,
            max_off_diagonal: Some(off),
            same_parity_witness: None,
        }
    } else {
        OrthoVerdict {
            max_off_diagonal: Some(off),
            ..undecided(format!("largest off-diagonal Gram entry {off:e} exceeds {tol:e}"))
        }
    }
}

/// Result of integrating `G_n·G_m` over `[-a, a]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParityCheck {
    pub integral: f64,
    /// `G_n·G_m` has only odd powers.
    pub product_is_odd: bool,
}

/// `∫_{-a}^{a} G_n·G_m dx` with the Lebesgue weight, computed exactly from
/// the antiderivative. For `d` odd and `g` even, terms of different parity
/// give an odd product and the integral is exactly zero.
pub fn parity_vanish_check(f: &GfpFamily, a: f64, n: usize, m: usize) -> Result<ParityCheck> {
    gfp::ensure_odd_even(f)?;
    let half_width = Rational::from_float(a)
        .filter(|r| r.is_positive())
        .ok_or_else(|| Error::HypothesisViolated(format!("interval half-width must be positive, got {a}")))?;
    let product = f.term(n) * f.term(m);
    Ok(ParityCheck {
        integral: rational::to_f64(&product.integrate_symmetric(&half_width)),
        product_is_odd: product.is_odd(),
    })
}

/// Even polynomial weight on a symmetric interval `[-a, a]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EvenWeight {
    pub density: Polynomial,
    pub half_width: Rational,
}

impl Default for EvenWeight {
    fn default() -> Self {
        Self {
            density: Polynomial::one(),
            half_width: rational::one(),
        }
    }
}

impl EvenWeight {
    pub fn new(density: Polynomial, half_width: Rational) -> Result<Self> {
        if !density.is_even() {
            return Err(Error::HypothesisViolated("weight polynomial must be even".into()));
        }
        if !half_width.is_positive() {
            return Err(Error::HypothesisViolated("interval half-width must be positive".into()));
        }
        Ok(Self { density, half_width })
    }

    pub fn inner(&self, p: &Polynomial, q: &Polynomial) -> Rational {
        (p * q * &self.density).integrate_symmetric(&self.half_width)
    }
}

/// Terms split by subscript parity with exact Gram blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplementSplit {
    pub even_indices: Vec<usize>,
    pub odd_indices: Vec<usize>,
    pub even_basis: Vec<Polynomial>,
    pub odd_basis: Vec<Polynomial>,
    /// `cross_gram[i][j] = ⟨even_basis[i], odd_basis[j]⟩`.
    pub cross_gram: Vec<Vec<Rational>>,
    pub even_gram: Vec<Vec<Rational>>,
    pub odd_gram: Vec<Vec<Rational>>,
}

impl ComplementSplit {
    pub fn cross_is_zero(&self) -> bool {
        self.cross_gram.iter().flatten().all(Zero::is_zero)
    }
}

fn exact_gram(w: &EvenWeight, rows: &[Polynomial], cols: &[Polynomial]) -> Vec<Vec<Rational>> {
    rows.iter()
        .map(|p| cols.iter().map(|q| w.inner(p, q)).collect())
        .collect()
}

/// Splits terms up to `n_max` into even and odd subscripts. For `d` odd and
/// `g` even the two spans are orthogonal complements under any even weight,
/// so the cross block is exactly zero.
pub fn complement_split(f: &GfpFamily, n_max: usize, weight: &EvenWeight) -> Result<ComplementSplit> {
    gfp::ensure_odd_even(f)?;
    let indices = f.kind().first_index()..=n_max;
    let (even_indices, odd_indices): (Vec<usize>, Vec<usize>) = indices.partition(|n| n % 2 == 0);
    let even_basis: Vec<Polynomial> = even_indices.iter().map(|&n| f.term(n)).collect();
    let odd_basis: Vec<Polynomial> = odd_indices.iter().map(|&n| f.term(n)).collect();
    Ok(ComplementSplit {
        cross_gram: exact_gram(weight, &even_basis, &odd_basis),
        even_gram: exact_gram(weight, &even_basis, &even_basis),
        odd_gram: exact_gram(weight, &odd_basis, &odd_basis),
        even_indices,
        odd_indices,
        even_basis,
        odd_basis,
    })
}
