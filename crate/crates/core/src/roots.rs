//! Roots of GFPs.
//!
//! The classical Fibonacci and Lucas polynomials have closed-form root
//! lattices `2i·cos(jπ/n)` and `2i·cos((2j+1)π/(2n))`. A point `r` with
//! `d(r)/√g(r)` equal to a lattice value is a root of the corresponding GFP
//! term, which transfers the lattice to any family. The companion-matrix
//! solver is an independent route used to check the transfer.

use std::f64::consts::PI;

use num_complex::Complex64;
use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gfp::{GfpFamily, GfpKind};
use crate::linalg::hessenberg_eigenvalues;
use crate::par::{self, Execution};
use crate::poly::{Degree, Polynomial};
use crate::rational;

/// Default bound on `|G_n(r)|` for accepted roots.
pub const DEFAULT_RESIDUAL_TOLERANCE: f64 = 1e-8;
/// Candidates closer than this are the same root.
pub const DEDUP_DISTANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LatticeKind {
    FibonacciLattice,
    LucasLattice,
}

/// Purely imaginary root lattice of a classical Fibonacci or Lucas polynomial.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RootLattice {
    pub n: usize,
    pub kind: LatticeKind,
    pub values: Vec<Complex64>,
}

/// `2·cos(num·π/den)` written as `2·sin((den - 2·num)π/(2den))`, which is
/// exactly zero at the midpoint and accurate near it.
fn two_cos_pi_ratio(num: f64, den: f64) -> f64 {
    2.0 * ((den - 2.0 * num) * PI / (2.0 * den)).sin()
}

/// `γ_j = 2i·cos(jπ/n)`, `j = 1..n-1`: the roots of `F_n(x)`.
pub fn classical_fibonacci_roots(n: usize) -> Result<RootLattice> {
    if n < 2 {
        return Err(Error::HypothesisViolated("Fibonacci lattice needs n >= 2".into()));
    }
    let values = (1..n)
        .map(|j| Complex64::new(0.0, two_cos_pi_ratio(j as f64, n as f64)))
        .collect();
    Ok(RootLattice {
        n,
        kind: LatticeKind::FibonacciLattice,
        values,
    })
}

/// `τ_j = 2i·cos((2j+1)π/(2n))`, `j = 0..n-1`: the roots of `L_n(x)`.
pub fn classical_lucas_roots(n: usize) -> Result<RootLattice> {
    if n < 1 {
        return Err(Error::HypothesisViolated("Lucas lattice needs n >= 1".into()));
    }
    let values = (0..n)
        .map(|j| Complex64::new(0.0, two_cos_pi_ratio((2 * j + 1) as f64, (2 * n) as f64)))
        .collect();
    Ok(RootLattice {
        n,
        kind: LatticeKind::LucasLattice,
        values,
    })
}

/// Roots of one GFP term with their residuals `|G_n(r)|`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RootSet {
    pub family: GfpFamily,
    pub n: usize,
    pub roots: Vec<Complex64>,
    pub residuals: Vec<f64>,
    pub residual_tolerance: f64,
}

/// Residual `|p(z)|` by compensated Horner.
pub fn residual(p: &Polynomial, z: Complex64) -> f64 {
    p.eval_complex_compensated(z).norm()
}

/// Roots of `G_n` by lattice transfer.
///
/// For every lattice value `λ` the squared condition `d(r)² = λ²·g(r)` is
/// solved; candidates with `g(r) ≠ 0` are kept when `|G_n(r)|` is within
/// `residual_tolerance`, which settles the branch of `√g` without tracking it.
/// Lattice values are processed independently and merged in sorted order.
pub fn gfp_roots(f: &GfpFamily, n: usize, residual_tolerance: f64) -> Result<RootSet> {
    gfp_roots_with(f, n, residual_tolerance, Execution::default())
}

pub fn gfp_roots_with(f: &GfpFamily, n: usize, residual_tolerance: f64, exec: Execution) -> Result<RootSet> {
    let lattice = match f.kind() {
        GfpKind::FibonacciType => classical_fibonacci_roots(n)?,
        GfpKind::LucasType => classical_lucas_roots(n)?,
    };
    if lattice.values.is_empty() {
        return Err(Error::NoRootsFound);
    }
    let term = f.term(n);
    let g_const = f.constant_g().map(|c| rational::to_f64(&c));
    let d = f.d().to_f64_coeffs();
    let d_sq = (f.d() * f.d()).to_f64_coeffs();
    let g = f.g().to_f64_coeffs();

    let per_value: Vec<Vec<Complex64>> = par::map_slice(&lattice.values, exec, |&lambda| {
        match g_const {
            // d(r) = ±λ·√g: a polynomial equation of degree deg d
            Some(gc) => {
                let shift = lambda * Complex64::new(gc, 0.0).sqrt();
                let mut out = Vec::new();
                for s in [shift, -shift] {
                    let mut coeffs: Vec<Complex64> = d.iter().map(|&c| c.into()).collect();
                    coeffs[0] -= s;
                    out.extend(solve_complex(&coeffs));
                }
                out
            }
            // d(r)² - λ²·g(r) = 0
            None => {
                let l2 = lambda * lambda;
                let len = d_sq.len().max(g.len());
                let coeffs: Vec<Complex64> = (0..len)
                    .map(|k| {
                        let a = d_sq.get(k).copied().unwrap_or(0.0);
                        let b = g.get(k).copied().unwrap_or(0.0);
                        Complex64::new(a, 0.0) - l2 * b
                    })
                    .collect();
                solve_complex(&coeffs)
            }
        }
    });

    let mut candidates = 0usize;
    let mut g_zero = 0usize;
    let mut kept: Vec<(Complex64, f64)> = Vec::new();
    for r in per_value.into_iter().flatten() {
        candidates += 1;
        let g_at = f.g().eval_complex(r);
        let g_scale: f64 = g
            .iter()
            .enumerate()
            .map(|(k, c)| c.abs() * r.norm().powi(k as i32))
            .sum();
        if g_at.norm() <= 1e-14 * g_scale.max(1e-300) {
            g_zero += 1;
            continue;
        }
        let res = residual(&term, r);
        if res <= residual_tolerance && !kept.iter().any(|(k, _)| (k - r).norm() < DEDUP_DISTANCE) {
            kept.push((r, res));
        }
    }
    if candidates > 0 && g_zero == candidates {
        return Err(Error::DegenerateG);
    }
    kept.sort_by(|a, b| a.0.re.total_cmp(&b.0.re).then(a.0.im.total_cmp(&b.0.im)));
    let (roots, residuals) = kept.into_iter().unzip();
    Ok(RootSet {
        family: f.clone(),
        n,
        roots,
        residuals,
        residual_tolerance,
    })
}

// ---------------------------------------------------------------------------
// Complex-coefficient solver for the transfer equations

/// All roots of `Σ c_k z^k` (complex coefficients, low-to-high).
/// Closed form through degree two, Aberth–Ehrlich iteration above.
pub fn solve_complex(coeffs: &[Complex64]) -> Vec<Complex64> {
    let mut c: Vec<Complex64> = coeffs.to_vec();
    while c.last().is_some_and(|z| z.is_zero()) {
        c.pop();
    }
    let mut zeros = 0;
    while c.len() > 1 && c[0].is_zero() {
        c.remove(0);
        zeros += 1;
    }
    let mut roots = vec![Complex64::zero(); zeros];
    match c.len() {
        0 | 1 => {}
        2 => roots.push(-c[0] / c[1]),
        3 => {
            let (a, b, cc) = (c[2], c[1], c[0]);
            let disc = (b * b - 4.0 * a * cc).sqrt();
            // pick the sign that avoids cancellation
            let q = if (b.conj() * disc).re >= 0.0 {
                -0.5 * (b + disc)
            } else {
                -0.5 * (b - disc)
            };
            if q.is_zero() {
                roots.extend([Complex64::zero(), Complex64::zero()]);
            } else {
                roots.extend([q / a, cc / q]);
            }
        }
        _ => roots.extend(aberth(&c)),
    }
    roots
}

fn horner_with_derivative(c: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::zero();
    let mut dp = Complex64::zero();
    for &a in c.iter().rev() {
        dp = dp * z + p;
        p = p * z + a;
    }
    (p, dp)
}

fn aberth(c: &[Complex64]) -> Vec<Complex64> {
    let deg = c.len() - 1;
    let lead = c[deg];
    // Cauchy-type radius for the initial circle
    let radius = c[..deg]
        .iter()
        .enumerate()
        .map(|(k, a)| (a / lead).norm().powf(1.0 / (deg - k) as f64))
        .fold(0.0, f64::max)
        .max(1e-3);
    let mut z: Vec<Complex64> = (0..deg)
        .map(|k| Complex64::from_polar(radius, 2.0 * PI * k as f64 / deg as f64 + 0.4))
        .collect();
    for _ in 0..500 {
        let mut converged = true;
        for i in 0..deg {
            let (p, dp) = horner_with_derivative(c, z[i]);
            if p.is_zero() {
                continue;
            }
            let ratio = p / dp;
            let repulsion: Complex64 = (0..deg)
                .filter(|&j| j != i)
                .map(|j| Complex64::new(1.0, 0.0) / (z[i] - z[j]))
                .sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            z[i] -= step;
            if step.norm() > 1e-15 * z[i].norm().max(1e-15) {
                converged = false;
            }
        }
        if converged {
            break;
        }
    }
    z
}

// ---------------------------------------------------------------------------
// Companion-matrix oracle

/// Parlett–Reinsch balancing with radix 2 (powers of two keep it exact).
fn balance(m: &mut [Vec<f64>]) {
    let n = m.len();
    let radix = 2.0f64;
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += m[j][i].abs();
                    r += m[i][j].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut cc = c;
            let mut g = r / radix;
            while cc < g {
                f *= radix;
                cc *= radix * radix;
            }
            g = r * radix;
            while cc > g {
                f /= radix;
                cc /= radix * radix;
            }
            if (cc + r / f) < 0.95 * s * f {
                done = false;
                for j in 0..n {
                    m[i][j] /= f;
                }
                for j in 0..n {
                    m[j][i] *= f;
                }
            }
        }
    }
}

fn newton_polish(p: &Polynomial, dp: &Polynomial, z: Complex64) -> Complex64 {
    let mut best = z;
    let mut best_res = residual(p, z);
    let mut cur = z;
    for _ in 0..3 {
        let d = dp.eval_complex_compensated(cur);
        if d.norm() == 0.0 {
            break;
        }
        cur -= p.eval_complex_compensated(cur) / d;
        let res = residual(p, cur);
        if res < best_res {
            best = cur;
            best_res = res;
        } else {
            break;
        }
    }
    best
}

/// All complex roots of `p` from the eigenvalues of the balanced companion
/// matrix of the monic-normalized polynomial, each refined by Newton steps.
/// Roots are sorted by `(re, im)`.
pub fn all_roots_companion(p: &Polynomial) -> Result<Vec<Complex64>> {
    let deg = match p.degree() {
        Degree::MinusInfinity => return Err(Error::ZeroPolynomial),
        Degree::Finite(d) => d,
    };
    let low = p.coeffs().iter().take_while(|c| c.is_zero()).count();
    let mut roots = vec![Complex64::zero(); low];
    let reduced = Polynomial::from_coeffs(p.coeffs()[low..].to_vec());
    let m = deg - low;
    if m > 0 {
        let lead = reduced.leading().expect("nonzero").clone();
        let monic: Vec<f64> = reduced
            .coeffs()
            .iter()
            .map(|c| rational::to_f64(&(c / &lead)))
            .collect();
        let mut comp = vec![vec![0.0; m]; m];
        for i in 1..m {
            comp[i][i - 1] = 1.0;
        }
        for i in 0..m {
            comp[i][m - 1] = -monic[i];
        }
        balance(&mut comp);
        let eig = hessenberg_eigenvalues(&mut comp)?;
        let dp = reduced.derivative();
        roots.extend(eig.iter().map(|&z| newton_polish(&reduced, &dp, z)));
    }
    roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(roots)
}

/// Greedy nearest-neighbour matching; returns the largest matched distance,
/// or `None` when the sets differ in size.
pub fn match_distance(a: &[Complex64], b: &[Complex64]) -> Option<f64> {
    if a.len() != b.len() {
        return None;
    }
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for x in a {
        let (idx, dist) = b
            .iter()
            .enumerate()
            .filter(|(i, _)| !used[*i])
            .map(|(i, y)| (i, (x - y).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))?;
        used[idx] = true;
        worst = worst.max(dist);
    }
    Some(worst)
}

/// Smallest `|Im r|` over the roots of `F_p`, used as a witness that every
/// root is non-real.
pub fn min_abs_imag(roots: &[Complex64]) -> f64 {
    roots.iter().map(|z| z.im.abs()).fold(f64::INFINITY, f64::min)
}

impl RootSet {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }
}
