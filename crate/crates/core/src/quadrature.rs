//! Quadrature rules.
//!
//! The Chebyshev rules integrate against `1/√(1-u²)` (first kind) and
//! `√(1-u²)` (second kind) on `[-1, 1]` and are exact for polynomials of
//! degree `<= 2N - 1`. The adaptive Gauss–Kronrod rule is a general-purpose
//! fallback and serves as an independent check in tests.

use std::f64::consts::PI;

use crate::numeric::pairwise_sum;

/// Nodes and weights of an `N`-point rule.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `Σ w_k f(u_k)` summed pairwise in node order.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> f64 {
        let terms: Vec<f64> = self.nodes.iter().zip(&self.weights).map(|(&u, &w)| w * f(u)).collect();
        pairwise_sum(&terms)
    }
}

/// `u_k = cos((2k-1)π/(2N))`, `w_k = π/N`, for `∫ f(u)/√(1-u²) du`.
pub fn chebyshev_first_kind(n: usize) -> Rule {
    let n = n.max(1);
    // cos((2k-1)π/2N) = sin((N - 2k + 1)π/2N) keeps the middle node at exactly 0
    let nodes = (1..=n)
        .map(|k| ((n as f64 - 2.0 * k as f64 + 1.0) * PI / (2.0 * n as f64)).sin())
        .collect();
    Rule {
        nodes,
        weights: vec![PI / n as f64; n],
    }
}

/// `u_k = cos(kπ/(N+1))`, `w_k = π/(N+1)·sin²(kπ/(N+1))`, for
/// `∫ f(u)·√(1-u²) du`.
pub fn chebyshev_second_kind(n: usize) -> Rule {
    let n = n.max(1);
    let m = (n + 1) as f64;
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for k in 1..=n {
        let theta = k as f64 * PI / m;
        nodes.push(((m - 2.0 * k as f64) * PI / (2.0 * m)).sin());
        weights.push(PI / m * theta.sin().powi(2));
    }
    Rule { nodes, weights }
}

// 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK qk15).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn kronrod15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error_estimate: f64,
    pub intervals: usize,
}

/// Globally adaptive Gauss–Kronrod (G7/K15): bisects the interval with the
/// largest error estimate until the total estimate is below
/// `max(abs_tol, rel_tol·|value|)` or `max_intervals` is reached.
pub fn gauss_kronrod(
    f: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_intervals: usize,
) -> Integral {
    let (v, e) = kronrod15(&f, a, b);
    let mut pieces = vec![(a, b, v, e)];
    loop {
        let value: f64 = pieces.iter().map(|p| p.2).sum();
        let error: f64 = pieces.iter().map(|p| p.3).sum();
        if error <= abs_tol.max(rel_tol * value.abs()) || pieces.len() >= max_intervals {
            return Integral {
                value,
                error_estimate: error,
                intervals: pieces.len(),
            };
        }
        let worst = pieces
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .map(|(i, _)| i)
            .expect("at least one interval");
        let (lo, hi, _, _) = pieces.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            // interval exhausted at machine resolution
            let value: f64 = pieces.iter().map(|p| p.2).sum::<f64>() + kronrod15(&f, lo, hi).0;
            return Integral {
                value,
                error_estimate: error,
                intervals: pieces.len() + 1,
            };
        }
        let (v1, e1) = kronrod15(&f, lo, mid);
        let (v2, e2) = kronrod15(&f, mid, hi);
        pieces.push((lo, mid, v1, e1));
        pieces.push((mid, hi, v2, e2));
    }
}
