//! Birth-and-death chains induced by Lucas-type GFPs.
//!
//! With `d = cx + h` and `g = -(c-1+h)`, the Lucas polynomials with `p0 = 2`
//! halved satisfy the three-term recurrence of a random walk with
//! level-independent rates beyond state 0. The continuous analogue uses
//! `d = cx + (k+4)/4`, `g = -k/4` with `c < 0`. All rates are exact
//! rationals.

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gfp::GfpFamily;
use crate::poly::Polynomial;
use crate::rational::{self, int, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ChainKind {
    /// Discrete walk with `q0 = 0`.
    ReflectingDiscrete,
    /// Discrete walk leaking `q0 > 0` from state 0 to an absorbing state.
    AbsorbingDiscrete,
    Continuous,
}

/// Rates shared by discrete walks and continuous generators. For a discrete
/// walk `up`/`down` are probabilities, for a generator they are rates.
pub trait BirthDeath {
    /// `p_n` or `λ_n`.
    fn up(&self, n: usize) -> Rational;
    /// `q_n` or `μ_n`; at `n = 0` the leak to the absorbing state.
    fn down(&self, n: usize) -> Rational;
    /// `r_n` or `β_n`.
    fn diag(&self, n: usize) -> Rational;
    fn chain_kind(&self) -> ChainKind;
    /// Lucas-type family whose halved terms are the chain polynomials.
    fn lucas_family(&self) -> GfpFamily;
}

/// Discrete-time walk on `{0, 1, 2, ...}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscreteChain {
    #[serde(with = "rational::serde_str")]
    pub c: Rational,
    #[serde(with = "rational::serde_str")]
    pub h: Rational,
    #[serde(with = "rational::serde_str")]
    pub p0: Rational,
    #[serde(with = "rational::serde_str")]
    pub r0: Rational,
    /// Absorption probability from state 0.
    #[serde(with = "rational::serde_str")]
    pub q0: Rational,
    #[serde(with = "rational::serde_str")]
    pub p: Rational,
    #[serde(with = "rational::serde_str")]
    pub r: Rational,
    #[serde(with = "rational::serde_str")]
    pub q: Rational,
}

impl DiscreteChain {
    /// `(q_n, r_n, p_n)`.
    pub fn row(&self, n: usize) -> (Rational, Rational, Rational) {
        if n == 0 {
            (self.q0.clone(), self.r0.clone(), self.p0.clone())
        } else {
            (self.q.clone(), self.r.clone(), self.p.clone())
        }
    }

    pub fn hold(&self, n: usize) -> Rational {
        self.row(n).1
    }

    /// Sum of the in-chain entries of row `n`.
    pub fn row_sum(&self, n: usize) -> Rational {
        let (q, r, p) = self.row(n);
        if n == 0 {
            r + p
        } else {
            q + r + p
        }
    }

    /// `G = c - 1 + h`.
    pub fn big_g(&self) -> Rational {
        &self.c - rational::one() + &self.h
    }

    /// First `size` rows and columns, exact.
    pub fn matrix_exact(&self, size: usize) -> Vec<Vec<Rational>> {
        let mut m = vec![vec![Rational::zero(); size]; size];
        for (n, row) in m.iter_mut().enumerate() {
            let (q, r, p) = self.row(n);
            if n > 0 {
                row[n - 1] = q;
            }
            row[n] = r;
            if n + 1 < size {
                row[n + 1] = p;
            }
        }
        m
    }

    /// Truncated transition matrix in floating point.
    pub fn matrix(&self, size: usize) -> Vec<Vec<f64>> {
        self.matrix_exact(size)
            .iter()
            .map(|row| row.iter().map(rational::to_f64).collect())
            .collect()
    }
}

impl BirthDeath for DiscreteChain {
    fn up(&self, n: usize) -> Rational {
        self.row(n).2
    }

    fn down(&self, n: usize) -> Rational {
        self.row(n).0
    }

    fn diag(&self, n: usize) -> Rational {
        self.row(n).1
    }

    fn chain_kind(&self) -> ChainKind {
        if self.q0.is_zero() {
            ChainKind::ReflectingDiscrete
        } else {
            ChainKind::AbsorbingDiscrete
        }
    }

    fn lucas_family(&self) -> GfpFamily {
        let d = Polynomial::from_coeffs(vec![self.h.clone(), self.c.clone()]);
        let g = Polynomial::constant(-self.big_g());
        GfpFamily::lucas_type(d, g, int(2)).expect("valid Lucas family")
    }
}

/// Walk induced by `d = cx + h`, `g = -(c-1+h)`.
///
/// `p = 1/c`, `r = -h/c`, `q = (c-1+h)/c` for `n >= 1`; state 0 moves up
/// with `p0 = 2/c`, holds with `r0 = -h/c` and leaks `q0 = (c-2+h)/c`.
/// Requires `h <= 0`, `c > 1 - h` and `q0 >= 0`.
pub fn walk_from_lucas(c: &Rational, h: &Rational) -> Result<DiscreteChain> {
    let one = rational::one();
    if h.is_positive() {
        return Err(Error::HypothesisViolated(format!(
            "h <= 0 fails (h = {})",
            rational::format(h)
        )));
    }
    if c <= &(&one - h) {
        return Err(Error::HypothesisViolated(format!(
            "c > 1 - h fails (c = {}, 1 - h = {})",
            rational::format(c),
            rational::format(&(&one - h))
        )));
    }
    let big_g = c - &one + h;
    let q0 = (c - int(2) + h) / c;
    if q0.is_negative() {
        return Err(Error::HypothesisViolated(format!(
            "p0 + r0 <= 1 fails (needs c - 1 + h >= 1, got {})",
            rational::format(&big_g)
        )));
    }
    Ok(DiscreteChain {
        c: c.clone(),
        h: h.clone(),
        p0: int(2) / c,
        r0: -h / c,
        q0,
        p: &one / c,
        r: -h / c,
        q: big_g / c,
    })
}

/// Continuous-time birth-and-death generator.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContinuousGenerator {
    #[serde(with = "rational::serde_str")]
    pub c: Rational,
    #[serde(with = "rational::serde_str")]
    pub k: Rational,
    #[serde(with = "rational::serde_str")]
    pub lambda0: Rational,
    #[serde(with = "rational::serde_str")]
    pub lambda: Rational,
    /// Killing rate at state 0.
    #[serde(with = "rational::serde_str")]
    pub mu0: Rational,
    #[serde(with = "rational::serde_str")]
    pub mu: Rational,
    #[serde(with = "rational::serde_str")]
    pub beta0: Rational,
    #[serde(with = "rational::serde_str")]
    pub beta: Rational,
}

impl ContinuousGenerator {
    /// `(μ_n, β_n, λ_n)`.
    pub fn row(&self, n: usize) -> (Rational, Rational, Rational) {
        if n == 0 {
            (self.mu0.clone(), self.beta0.clone(), self.lambda0.clone())
        } else {
            (self.mu.clone(), self.beta.clone(), self.lambda.clone())
        }
    }

    /// Sum of the in-chain entries of row `n` (`-μ_0` at state 0).
    pub fn row_sum(&self, n: usize) -> Rational {
        let (mu, beta, lambda) = self.row(n);
        if n == 0 {
            beta + lambda
        } else {
            mu + beta + lambda
        }
    }

    pub fn is_conservative(&self) -> bool {
        self.mu0.is_zero()
    }

    pub fn matrix_exact(&self, size: usize) -> Vec<Vec<Rational>> {
        let mut m = vec![vec![Rational::zero(); size]; size];
        for (n, row) in m.iter_mut().enumerate() {
            let (mu, beta, lambda) = self.row(n);
            if n > 0 {
                row[n - 1] = mu;
            }
            row[n] = beta;
            if n + 1 < size {
                row[n + 1] = lambda;
            }
        }
        m
    }

    /// Truncated generator matrix in floating point.
    pub fn matrix(&self, size: usize) -> Vec<Vec<f64>> {
        self.matrix_exact(size)
            .iter()
            .map(|row| row.iter().map(rational::to_f64).collect())
            .collect()
    }
}

impl BirthDeath for ContinuousGenerator {
    fn up(&self, n: usize) -> Rational {
        self.row(n).2
    }

    fn down(&self, n: usize) -> Rational {
        self.row(n).0
    }

    fn diag(&self, n: usize) -> Rational {
        self.row(n).1
    }

    fn chain_kind(&self) -> ChainKind {
        ChainKind::Continuous
    }

    fn lucas_family(&self) -> GfpFamily {
        let d = Polynomial::from_coeffs(vec![(&self.k + int(4)) / int(4), self.c.clone()]);
        let g = Polynomial::constant(-&self.k / int(4));
        GfpFamily::lucas_type(d, g, int(2)).expect("valid Lucas family")
    }
}

/// Generator induced by `d = cx + (k+4)/4`, `g = -k/4`.
///
/// `λ0 = -2/c`, `λ = -1/c`, `μ = -k/(4c)`, `β = β0 = (4+k)/(4c)`. Row 0 then
/// sums to `(k-4)/(4c)`, so `k > 4` gives a killing rate `μ0 = (4-k)/(4c)`,
/// `k = 4` is conservative, and `k < 4` is not a generator.
pub fn generator_from_lucas(c: &Rational, k: &Rational) -> Result<ContinuousGenerator> {
    if !c.is_negative() {
        return Err(Error::HypothesisViolated(format!(
            "c < 0 fails (c = {})",
            rational::format(c)
        )));
    }
    if !k.is_positive() {
        return Err(Error::HypothesisViolated(format!(
            "k > 0 fails (k = {})",
            rational::format(k)
        )));
    }
    if k < &int(4) {
        return Err(Error::GeneratorAxiomViolation(format!(
            "row 0 sums to (k - 4)/(4c) = {} > 0 for k = {}",
            rational::format(&((k - int(4)) / (c * int(4)))),
            rational::format(k)
        )));
    }
    let four_c = c * int(4);
    let beta = (k + int(4)) / &four_c;
    Ok(ContinuousGenerator {
        c: c.clone(),
        k: k.clone(),
        lambda0: int(-2) / c,
        lambda: int(-1) / c,
        mu0: (int(4) - k) / &four_c,
        mu: -k / &four_c,
        beta0: beta.clone(),
        beta,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind")]
pub enum Convergence {
    Convergent {
        #[serde(with = "rational::serde_str")]
        limit: Rational,
    },
    Divergent,
}

/// `π_0 = 1`, `π_j = up(0)…up(j-1) / down(1)…down(j)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PotentialCoefficients {
    #[serde(serialize_with = "serialize_rationals")]
    pub pi: Vec<Rational>,
    #[serde(with = "rational::serde_str")]
    pub sum_partial: Rational,
    /// Ratio `π_{j+1}/π_j` for `j >= 1`.
    #[serde(with = "rational::serde_str")]
    pub tail_ratio: Rational,
    pub convergence: Convergence,
}

fn serialize_rationals<S: serde::Serializer>(v: &[Rational], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(rational::format))
}

/// Potential coefficients through `π_{n_max}` with the exact series sum. The
/// rates are level independent beyond state 0, so the tail is geometric.
pub fn potential_coefficients(chain: &impl BirthDeath, n_max: usize) -> PotentialCoefficients {
    let mut pi = vec![rational::one()];
    for j in 1..=n_max {
        let next = &pi[j - 1] * chain.up(j - 1) / chain.down(j);
        pi.push(next);
    }
    let sum_partial = pi.iter().fold(Rational::zero(), |acc, v| acc + v);
    let tail_ratio = chain.up(1) / chain.down(1);
    let first = chain.up(0) / chain.down(1);
    let convergence = if tail_ratio < rational::one() {
        Convergence::Convergent {
            limit: rational::one() + first / (rational::one() - &tail_ratio),
        }
    } else {
        Convergence::Divergent
    };
    PotentialCoefficients {
        pi,
        sum_partial,
        tail_ratio,
        convergence,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Ergodicity {
    Ergodic,
    NotErgodic,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErgodicityVerdict {
    pub chain_kind: ChainKind,
    pub verdict: Ergodicity,
    /// `Σ π_n`, absent when the series diverges.
    pub series_value: Option<f64>,
    #[serde(with = "rational::serde_str_opt")]
    pub series_exact: Option<Rational>,
    #[serde(with = "rational::serde_str")]
    pub tail_ratio: Rational,
    /// Whether the parameters lie in the narrower sufficient window
    /// `c - 1 + h > 2` (discrete) or `k > 8` (continuous).
    pub strict_window: bool,
}

fn verdict_from(chain: &impl BirthDeath, strict_window: bool) -> ErgodicityVerdict {
    let pc = potential_coefficients(chain, 1);
    let (verdict, series_exact) = match pc.convergence {
        Convergence::Convergent { limit } => (Ergodicity::Ergodic, Some(limit)),
        Convergence::Divergent => (Ergodicity::NotErgodic, None),
    };
    ErgodicityVerdict {
        chain_kind: chain.chain_kind(),
        verdict,
        series_value: series_exact.as_ref().map(rational::to_f64),
        series_exact,
        tail_ratio: pc.tail_ratio,
        strict_window,
    }
}

/// Ergodic iff `Σ π_n < ∞`, decided from the geometric tail.
pub fn ergodicity_discrete(chain: &DiscreteChain) -> ErgodicityVerdict {
    verdict_from(chain, chain.big_g() > int(2))
}

pub fn ergodicity_continuous(gen: &ContinuousGenerator) -> ErgodicityVerdict {
    verdict_from(gen, gen.k > int(8))
}

/// Decomposition `p_n, q_n, r_n` of a random-walk polynomial sequence;
/// `q[0]` is the leak from state 0.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RwDecomposition {
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub r: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "result")]
pub enum RwVerdict {
    IsRandomWalkSequence(RwDecomposition),
    NotRandomWalkSequence { reason: String },
}

const RW_SLACK: f64 = 1e-14;

fn level_independent(alpha: &[f64], beta: &[f64]) -> bool {
    let same = |v: &[f64]| {
        v.windows(2)
            .all(|w| (w[0] - w[1]).abs() <= RW_SLACK * w[0].abs().max(1.0))
    };
    same(alpha.get(1..).unwrap_or(&[])) && same(beta.get(1..).unwrap_or(&[]))
}

fn closed_form(alpha: &[f64], beta: &[f64]) -> Option<RwDecomposition> {
    let a = *alpha.get(1).unwrap_or(&alpha[0]);
    let b = *beta.get(1).unwrap_or(&beta[0]);
    let s = 1.0 - a;
    let mut disc = s * s - 4.0 * b;
    // a double root computed with rounding error in either direction
    if disc.abs() <= 8.0 * f64::EPSILON * s * s {
        disc = 0.0;
    }
    if disc < 0.0 {
        return None;
    }
    let root = disc.sqrt();
    let (big, small) = (0.5 * (s + root), 0.5 * (s - root));
    let n = alpha.len();
    [(big, small), (small, big)].into_iter().find_map(|(q, p)| {
        if p <= 0.0 || q <= 0.0 {
            return None;
        }
        let p0 = beta[0] / q;
        let r0 = alpha[0];
        if p0 <= 0.0 || p0 + r0 > 1.0 + RW_SLACK {
            return None;
        }
        let mut pv = vec![p; n];
        let mut qv = vec![q; n];
        let mut rv = vec![a; n];
        pv[0] = p0;
        qv[0] = (1.0 - p0 - r0).max(0.0);
        rv[0] = r0;
        Some(RwDecomposition { p: pv, q: qv, r: rv })
    })
}

fn greedy(alpha: &[f64], beta: &[f64]) -> std::result::Result<RwDecomposition, String> {
    let n = alpha.len();
    let mut p = vec![0.0; n];
    let mut q = vec![0.0; n];
    p[0] = 1.0 - alpha[0];
    for m in 1..n {
        if p[m - 1] <= 0.0 {
            return Err(format!("p_{} > 0 fails", m - 1));
        }
        q[m] = beta[m - 1] / p[m - 1];
        p[m] = 1.0 - alpha[m] - q[m];
    }
    if p[n - 1] <= 0.0 {
        return Err(format!("p_{} > 0 fails", n - 1));
    }
    Ok(RwDecomposition {
        p,
        q,
        r: alpha.to_vec(),
    })
}

/// Whether the monic sequence `x·P_n = P_{n+1} + α_n P_n + β_n P_{n-1}` is a
/// random-walk polynomial sequence. `alpha[n] = α_n` and `beta[n] = β_{n+1}`
/// for `n = 0..N`; the decomposition satisfies `r_n = α_n`,
/// `p_n·q_{n+1} = β_{n+1}` and `p_n + q_n + r_n = 1`.
pub fn rw_polynomial_test(alpha: &[f64], beta: &[f64]) -> RwVerdict {
    let fail = |reason: String| RwVerdict::NotRandomWalkSequence { reason };
    if alpha.is_empty() || beta.len() < alpha.len().saturating_sub(1) {
        return fail("need α_0..α_N and β_1..β_N".into());
    }
    if let Some(n) = alpha.iter().position(|a| a.is_nan() || *a < 0.0) {
        return fail(format!("α_n ≥ 0 fails at n = {n}"));
    }
    if let Some(n) = alpha.iter().position(|a| *a >= 1.0) {
        return fail(format!("α_n < 1 fails at n = {n}"));
    }
    if let Some(n) = beta.iter().position(|b| b.is_nan() || *b <= 0.0) {
        return fail(format!("β_n > 0 fails at n = {}", n + 1));
    }
    let beta = &beta[..alpha.len().max(1).min(beta.len())];
    if level_independent(alpha, beta) {
        if let Some(d) = closed_form(alpha, beta) {
            return RwVerdict::IsRandomWalkSequence(d);
        }
        let a = *alpha.get(1).unwrap_or(&alpha[0]);
        let b = *beta.get(1).unwrap_or(&beta[0]);
        if (1.0 - a).powi(2) < 4.0 * b {
            return fail("(1 - α)² ≥ 4β fails".into());
        }
    }
    match greedy(alpha, beta) {
        Ok(d) => RwVerdict::IsRandomWalkSequence(d),
        Err(reason) => fail(reason),
    }
}

/// Monic recurrence coefficients of a discrete walk: `α_n = r_n` and
/// `β_{n+1} = p_n·q_{n+1}`, for `n < len`.
pub fn monic_coefficients(chain: &DiscreteChain, len: usize) -> (Vec<f64>, Vec<f64>) {
    let alpha = (0..len).map(|n| rational::to_f64(&chain.hold(n))).collect();
    let beta = (0..len)
        .map(|n| rational::to_f64(&(chain.up(n) * chain.down(n + 1))))
        .collect();
    (alpha, beta)
}

impl DiscreteChain {
    /// Whether every interior row sums to one (always true by construction;
    /// checked exactly).
    pub fn is_stochastic_interior(&self, rows: usize) -> bool {
        (1..rows).all(|n| self.row_sum(n).is_one())
    }
}
