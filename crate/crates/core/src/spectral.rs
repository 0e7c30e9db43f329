//! Karlin–McGregor representation of the induced chains and three
//! independent oracles for it.
//!
//! The chain polynomials `Q_j` are the halved Lucas terms, orthogonal under
//! the normalized first-kind weight `μ` of the underlying family, with
//! `∫ Q_j² dμ = 1/π_j`. Transition probabilities are
//!
//! * discrete: `P_ij(n) = π_j ∫ xⁿ Q_i Q_j dμ`
//! * continuous: `P_ij(t) = π_j ∫ e^{-xt} Q_i Q_j dμ`
//!
//! The oracles are a truncated matrix power, a truncated matrix exponential
//! and a seeded Monte Carlo simulation.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::markov::{BirthDeath, ChainKind, ContinuousGenerator, DiscreteChain};
use crate::numeric::pairwise_sum;
use crate::ortho::{self, WeightSpec};
use crate::par::{self, Execution};
use crate::poly::Polynomial;
use crate::rational::{self, Rational};

/// Slack for support containment checks.
const SUPPORT_SLACK: f64 = 1e-12;
/// Moments cached by [`spectral_measure`].
const MOMENTS: usize = 20;

/// Exact chain polynomials `Q_0..=Q_{n_max}`.
///
/// Discrete: `x·Q_j = q_j Q_{j-1} + r_j Q_j + p_j Q_{j+1}`.
/// Continuous: `-x·Q_j = μ_j Q_{j-1} + β_j Q_j + λ_j Q_{j+1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkPolynomials {
    pub chain_kind: ChainKind,
    pub q: Vec<Polynomial>,
}

impl WalkPolynomials {
    pub fn n_max(&self) -> usize {
        self.q.len() - 1
    }
}

/// `+1` for the discrete recurrence, `-1` for the continuous one.
fn spectral_sign(kind: ChainKind) -> i64 {
    if kind == ChainKind::Continuous {
        -1
    } else {
        1
    }
}

pub fn walk_polys(chain: &impl BirthDeath, n_max: usize) -> Result<WalkPolynomials> {
    if n_max < 1 {
        return Err(Error::HypothesisViolated("n_max >= 1 fails".into()));
    }
    let kind = chain.chain_kind();
    let sx = Polynomial::from_i64s(&[0, spectral_sign(kind)]);
    let mut q = vec![Polynomial::one()];
    let mut prev = Polynomial::zero();
    for j in 0..n_max {
        let cur = q[j].clone();
        let next = ((&sx - &Polynomial::constant(chain.diag(j))) * &cur - prev.scale(&chain.down(j)))
            .scale(&(rational::one() / chain.up(j)));
        prev = cur;
        q.push(next);
    }
    Ok(WalkPolynomials { chain_kind: kind, q })
}

/// Level-0 and interior rates in floating point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
struct Rates {
    up: [f64; 2],
    down: [f64; 2],
    diag: [f64; 2],
    sign: f64,
}

impl Rates {
    fn of(chain: &impl BirthDeath) -> Self {
        let f = |r: Rational| rational::to_f64(&r);
        Rates {
            up: [f(chain.up(0)), f(chain.up(1))],
            down: [f(chain.down(0)), f(chain.down(1))],
            diag: [f(chain.diag(0)), f(chain.diag(1))],
            sign: spectral_sign(chain.chain_kind()) as f64,
        }
    }

    /// `Q_0(x)..=Q_m(x)` by the recurrence (stable on the support, unlike
    /// Horner on the expanded coefficients).
    fn values(&self, x: f64, m: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(m + 1);
        out.push(1.0);
        let mut prev = 0.0;
        for j in 0..m {
            let l = usize::from(j > 0);
            let cur = out[j];
            let next = ((self.sign * x - self.diag[l]) * cur - self.down[l] * prev) / self.up[l];
            prev = cur;
            out.push(next);
        }
        out
    }
}

/// Probability measure of the Karlin–McGregor representation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralMeasure {
    pub chain_kind: ChainKind,
    /// Lucas weight of the underlying family, scaled to unit mass.
    pub weight: WeightSpec,
    /// Support interval, increasing.
    pub support: [f64; 2],
    /// `∫ x^k dμ` for `k = 0..=2·20`.
    pub moments: Vec<f64>,
    #[serde(skip)]
    pi_first: Rational,
    #[serde(skip)]
    pi_ratio: Rational,
    #[serde(skip)]
    rates: Rates,
}

/// Measure for a chain built by [`crate::markov::walk_from_lucas`] or
/// [`crate::markov::generator_from_lucas`]. Discrete supports must lie in
/// `[-1, 1]`, continuous ones in `[0, ∞)`.
pub fn spectral_measure(chain: &impl BirthDeath) -> Result<SpectralMeasure> {
    let kind = chain.chain_kind();
    let weight = ortho::build_weight(&chain.lucas_family())?.normalized();
    let (lo, hi) = weight.interval();
    if kind == ChainKind::Continuous {
        if lo < -SUPPORT_SLACK {
            return Err(Error::SupportViolation {
                lo,
                hi,
                allowed: "[0, inf)",
            });
        }
    } else if lo < -1.0 - SUPPORT_SLACK || hi > 1.0 + SUPPORT_SLACK {
        return Err(Error::SupportViolation {
            lo,
            hi,
            allowed: "[-1, 1]",
        });
    }
    let mut measure = SpectralMeasure {
        chain_kind: kind,
        weight,
        support: [lo, hi],
        moments: Vec::new(),
        pi_first: chain.up(0) / chain.down(1),
        pi_ratio: chain.up(1) / chain.down(1),
        rates: Rates::of(chain),
    };
    measure.moments = (0..=2 * MOMENTS)
        .map(|k| measure.integrate(MOMENTS + 4, |x| x.powi(k as i32)))
        .collect();
    Ok(measure)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Horizon {
    Steps(usize),
    Time(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Method {
    KarlinMcGregor,
    MatrixPower,
    MatrixExponential,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransitionResult {
    pub i: usize,
    pub j: usize,
    pub horizon: Horizon,
    pub value: f64,
    pub method: Method,
    /// Standard error of a Monte Carlo estimate.
    pub error_bar: Option<f64>,
}

const MAX_NODES: usize = 1 << 13;

impl SpectralMeasure {
    /// `∫ f dμ` with an `nodes`-point first-kind rule in `u`.
    pub fn integrate(&self, nodes: usize, f: impl Fn(f64) -> f64) -> f64 {
        let (factor, rule) = self.weight.substituted_rule(nodes);
        self.weight.scale * factor * rule.apply(|u| f(self.weight.preimage(u)))
    }

    /// `π_j` as an exact rational.
    pub fn potential_exact(&self, j: usize) -> Rational {
        if j == 0 {
            rational::one()
        } else {
            &self.pi_first * self.pi_ratio.pow(j as i32 - 1)
        }
    }

    pub fn potential(&self, j: usize) -> f64 {
        rational::to_f64(&self.potential_exact(j))
    }

    /// `Q_0(x)..=Q_m(x)`.
    pub fn polynomial_values(&self, x: f64, m: usize) -> Vec<f64> {
        self.rates.values(x, m)
    }

    pub fn total_mass(&self) -> f64 {
        self.moments[0]
    }

    /// `∫ Q_j² dμ`, which equals `1/π_j`.
    pub fn norm_sq(&self, j: usize) -> f64 {
        self.integrate(j + 8, |x| self.rates.values(x, j)[j].powi(2))
    }

    /// `P_ij(n)`; the integrand is a polynomial of degree `n + i + j`, so
    /// `⌈(n+i+j)/2⌉ + 8` nodes integrate it exactly.
    pub fn km_discrete(&self, i: usize, j: usize, n: usize) -> Result<TransitionResult> {
        if self.chain_kind == ChainKind::Continuous {
            return Err(Error::HypothesisViolated(
                "discrete transition on a continuous measure".into(),
            ));
        }
        let m = i.max(j);
        let nodes = (n + i + j).div_ceil(2) + 8;
        let integral = self.integrate(nodes, |x| {
            let q = self.rates.values(x, m);
            x.powi(n as i32) * q[i] * q[j]
        });
        Ok(TransitionResult {
            i,
            j,
            horizon: Horizon::Steps(n),
            value: self.potential(j) * integral,
            method: Method::KarlinMcGregor,
            error_bar: None,
        })
    }

    /// `P_ij(t)`; the node count is doubled until two estimates agree to
    /// `1e-14`.
    pub fn km_continuous(&self, i: usize, j: usize, t: f64) -> Result<TransitionResult> {
        if self.chain_kind != ChainKind::Continuous {
            return Err(Error::HypothesisViolated(
                "continuous transition on a discrete measure".into(),
            ));
        }
        if t.is_nan() || t < 0.0 {
            return Err(Error::HypothesisViolated(format!("t >= 0 fails (t = {t})")));
        }
        let m = i.max(j);
        let estimate = |nodes: usize| {
            self.integrate(nodes, |x| {
                let q = self.rates.values(x, m);
                (-x * t).exp() * q[i] * q[j]
            })
        };
        let mut nodes = (i + j).div_ceil(2) + 16;
        let mut previous = estimate(nodes);
        loop {
            nodes *= 2;
            let current = estimate(nodes);
            if (current - previous).abs() <= 1e-14 || nodes >= MAX_NODES {
                return Ok(TransitionResult {
                    i,
                    j,
                    horizon: Horizon::Time(t),
                    value: self.potential(j) * current,
                    method: Method::KarlinMcGregor,
                    error_bar: None,
                });
            }
            previous = current;
        }
    }

    /// `P_ij(n)` for `i, j <= max_state`, rows computed in parallel.
    pub fn km_table(&self, max_state: usize, n: usize, exec: Execution) -> Result<Vec<Vec<f64>>> {
        let rows = par::map_range(max_state + 1, exec, |i| {
            (0..=max_state)
                .map(|j| self.km_discrete(i, j, n).map(|r| r.value))
                .collect::<Result<Vec<f64>>>()
        });
        rows.into_iter().collect()
    }

    /// `P_ij(t)` for `i, j <= max_state`.
    pub fn km_table_continuous(&self, max_state: usize, t: f64, exec: Execution) -> Result<Vec<Vec<f64>>> {
        let rows = par::map_range(max_state + 1, exec, |i| {
            (0..=max_state)
                .map(|j| self.km_continuous(i, j, t).map(|r| r.value))
                .collect::<Result<Vec<f64>>>()
        });
        rows.into_iter().collect()
    }
}

pub fn km_discrete(chain: &DiscreteChain, i: usize, j: usize, n: usize) -> Result<TransitionResult> {
    spectral_measure(chain)?.km_discrete(i, j, n)
}

pub fn km_continuous(gen: &ContinuousGenerator, i: usize, j: usize, t: f64) -> Result<TransitionResult> {
    spectral_measure(gen)?.km_continuous(i, j, t)
}

/// `n`-th power of the `size × size` truncated transition matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerOracle {
    pub size: usize,
    pub steps: usize,
    pub matrix: Vec<Vec<f64>>,
}

impl PowerOracle {
    /// Entry `(i, j)`, available when `max(i, j) + n < size` so that no path
    /// from `i` touches the truncation boundary.
    pub fn entry(&self, i: usize, j: usize) -> Result<f64> {
        if i.max(j) + self.steps >= self.size {
            return Err(Error::TruncationTooSmall {
                size: self.size,
                steps: self.steps,
                state: i.max(j),
            });
        }
        Ok(self.matrix[i][j])
    }

    pub fn result(&self, i: usize, j: usize) -> Result<TransitionResult> {
        Ok(TransitionResult {
            i,
            j,
            horizon: Horizon::Steps(self.steps),
            value: self.entry(i, j)?,
            method: Method::MatrixPower,
            error_bar: None,
        })
    }

    /// Sum of row `i` (mass still inside the chain).
    pub fn row_sum(&self, i: usize) -> f64 {
        pairwise_sum(&self.matrix[i])
    }
}

/// `M·P` for a tridiagonal `P` given by its three diagonals.
fn times_tridiagonal(m: &[Vec<f64>], sub: &[f64], diag: &[f64], sup: &[f64], exec: Execution) -> Vec<Vec<f64>> {
    let size = m.len();
    par::map_slice(m, exec, |row| {
        (0..size)
            .map(|b| {
                let mut v = row[b] * diag[b];
                if b > 0 {
                    v += row[b - 1] * sup[b - 1];
                }
                if b + 1 < size {
                    v += row[b + 1] * sub[b + 1];
                }
                v
            })
            .collect()
    })
}

/// Powers `P^0..=P^{n_max}` of the truncation.
pub fn power_sequence(chain: &DiscreteChain, size: usize, n_max: usize, exec: Execution) -> Result<Vec<PowerOracle>> {
    if size == 0 {
        return Err(Error::TruncationTooSmall {
            size,
            steps: n_max,
            state: 0,
        });
    }
    let f = |r: Rational| rational::to_f64(&r);
    // sub[b] = P[b][b-1], sup[b] = P[b][b+1]
    let sub: Vec<f64> = (0..size).map(|b| f(chain.down(b))).collect();
    let diag: Vec<f64> = (0..size).map(|b| f(chain.diag(b))).collect();
    let sup: Vec<f64> = (0..size).map(|b| f(chain.up(b))).collect();
    let mut current: Vec<Vec<f64>> = (0..size)
        .map(|a| (0..size).map(|b| if a == b { 1.0 } else { 0.0 }).collect())
        .collect();
    let mut out = vec![PowerOracle {
        size,
        steps: 0,
        matrix: current.clone(),
    }];
    for steps in 1..=n_max {
        current = times_tridiagonal(&current, &sub, &diag, &sup, exec);
        out.push(PowerOracle {
            size,
            steps,
            matrix: current.clone(),
        });
    }
    Ok(out)
}

pub fn power_oracle(chain: &DiscreteChain, size: usize, n: usize) -> Result<PowerOracle> {
    let mut seq = power_sequence(chain, size, n, Execution::default())?;
    Ok(seq.pop().expect("non-empty"))
}

/// `exp(tA)` of the `size × size` truncated generator.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpOracle {
    pub size: usize,
    pub t: f64,
    pub matrix: DMatrix<f64>,
}

impl ExpOracle {
    /// Entry `(i, j)`, available for states in the lower half of the
    /// truncation where boundary effects are negligible.
    pub fn entry(&self, i: usize, j: usize) -> Result<f64> {
        if 2 * i.max(j) >= self.size {
            return Err(Error::TruncationTooSmall {
                size: self.size,
                steps: self.t.ceil() as usize,
                state: i.max(j),
            });
        }
        Ok(self.matrix[(i, j)])
    }

    pub fn result(&self, i: usize, j: usize) -> Result<TransitionResult> {
        Ok(TransitionResult {
            i,
            j,
            horizon: Horizon::Time(self.t),
            value: self.entry(i, j)?,
            method: Method::MatrixExponential,
            error_bar: None,
        })
    }
}

/// Scaling-and-squaring Padé exponential of the truncated generator.
pub fn exp_oracle(gen: &ContinuousGenerator, size: usize, t: f64) -> Result<ExpOracle> {
    if size == 0 {
        return Err(Error::TruncationTooSmall {
            size,
            steps: t.ceil() as usize,
            state: 0,
        });
    }
    let rows = gen.matrix(size);
    let a = DMatrix::from_fn(size, size, |i, j| rows[i][j] * t);
    Ok(ExpOracle {
        size,
        t,
        matrix: a.exp(),
    })
}

/// Trials per independently seeded block.
pub const MC_BLOCK: usize = 1 << 14;

/// Empirical distribution after `steps` steps from `start`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McResult {
    pub start: usize,
    pub steps: usize,
    pub trials: u64,
    pub seed: u64,
    /// Visits to states `0..=start+steps` at the final step.
    pub counts: Vec<u64>,
    pub absorbed: u64,
}

impl McResult {
    pub fn frequency(&self, j: usize) -> f64 {
        self.counts.get(j).copied().unwrap_or(0) as f64 / self.trials as f64
    }

    /// `√(p(1-p)/trials)` at the empirical frequency.
    pub fn standard_error(&self, j: usize) -> f64 {
        let p = self.frequency(j);
        (p * (1.0 - p) / self.trials as f64).sqrt()
    }

    pub fn absorbed_frequency(&self) -> f64 {
        self.absorbed as f64 / self.trials as f64
    }

    pub fn absorbed_standard_error(&self) -> f64 {
        let p = self.absorbed_frequency();
        (p * (1.0 - p) / self.trials as f64).sqrt()
    }

    pub fn result(&self, j: usize) -> TransitionResult {
        TransitionResult {
            i: self.start,
            j,
            horizon: Horizon::Steps(self.steps),
            value: self.frequency(j),
            method: Method::MonteCarlo,
            error_bar: Some(self.standard_error(j)),
        }
    }
}

/// Cumulative thresholds `(up, up + hold)` computed exactly, so a row whose
/// probabilities sum to one never leaks through rounding.
fn thresholds(chain: &DiscreteChain, n: usize) -> (f64, f64) {
    let (_, r, p) = chain.row(n);
    (rational::to_f64(&p), rational::to_f64(&(p + r)))
}

/// Seeded simulation. Trials are split into blocks of [`MC_BLOCK`]; block
/// `b` draws from ChaCha8 seeded with `seed` on stream `b`, and block
/// histograms are added as integers, so the result does not depend on the
/// execution mode or thread count.
pub fn mc_simulate(chain: &DiscreteChain, start: usize, steps: usize, trials: u64, seed: u64) -> Result<McResult> {
    mc_simulate_with(chain, start, steps, trials, seed, Execution::default())
}

pub fn mc_simulate_with(
    chain: &DiscreteChain,
    start: usize,
    steps: usize,
    trials: u64,
    seed: u64,
    exec: Execution,
) -> Result<McResult> {
    if trials == 0 {
        return Err(Error::HypothesisViolated("trials >= 1 fails".into()));
    }
    let states = start + steps + 1;
    let level0 = thresholds(chain, 0);
    let interior = thresholds(chain, 1);
    let blocks = trials.div_ceil(MC_BLOCK as u64) as usize;
    let histograms = par::map_range(blocks, exec, |b| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(b as u64);
        let in_block = (trials - (b * MC_BLOCK) as u64).min(MC_BLOCK as u64);
        let mut counts = vec![0u64; states + 1];
        for _ in 0..in_block {
            let mut state = Some(start);
            for _ in 0..steps {
                let Some(s) = state else { break };
                let (up, stay) = if s == 0 { level0 } else { interior };
                let u: f64 = rng.random();
                state = if u < up {
                    Some(s + 1)
                } else if u < stay {
                    Some(s)
                } else if s == 0 {
                    None
                } else {
                    Some(s - 1)
                };
            }
            match state {
                Some(s) => counts[s] += 1,
                None => counts[states] += 1,
            }
        }
        counts
    });
    let mut total = vec![0u64; states + 1];
    for h in histograms {
        for (t, c) in total.iter_mut().zip(h) {
            *t += c;
        }
    }
    let absorbed = total.pop().unwrap_or(0);
    Ok(McResult {
        start,
        steps,
        trials,
        seed,
        counts: total,
        absorbed,
    })
}

impl SpectralMeasure {
    /// Largest deviation of `π_j ∫ Q_j² dμ` from one over `j <= m`.
    pub fn orthonormality_defect(&self, m: usize) -> f64 {
        (0..=m)
            .map(|j| (self.potential(j) * self.norm_sq(j) - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

impl WalkPolynomials {
    /// `Q_j(x)` exactly.
    pub fn eval_exact(&self, j: usize, x: &Rational) -> Rational {
        self.q[j].eval_rational(x)
    }

    /// Whether every `Q_j(1)` equals one exactly.
    pub fn fixed_at_one(&self) -> bool {
        let one = rational::one();
        self.q.iter().all(|p| p.eval_rational(&one) == one)
    }
}
