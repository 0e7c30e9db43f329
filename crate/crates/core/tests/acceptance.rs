//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

#![allow(clippy::needless_range_loop)]

use std::time::{Duration, Instant};

use gfp_core::gfp::{self, binet_eval, expand_fibonacci_type, expand_lucas_type, registry_classic, GfpKind};
use gfp_core::markov::{self, ergodicity_discrete, potential_coefficients, walk_from_lucas, Convergence, Ergodicity};
use gfp_core::ortho::{self, EvenWeight, Verdict};
use gfp_core::par::Execution;
use gfp_core::poly::Polynomial;
use gfp_core::rational::{self, int, ratio, Rational};
use gfp_core::roots::{all_roots_companion, gfp_roots, match_distance};
use gfp_core::spectral::{self, exp_oracle, mc_simulate, power_sequence, spectral_measure, walk_polys};
use gfp_core::Complex64;
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

struct Entry {
    id: u32,
    title: &'static str,
    limit_secs: Option<u64>,
    run: fn() -> Check,
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Exact value of `p` at the complex point `z` (coordinates taken exactly).
fn exact_eval(p: &Polynomial, z: Complex64) -> Complex64 {
    let re = Rational::from_float(z.re).expect("finite");
    let im = Rational::from_float(z.im).expect("finite");
    let (a, b) = p.eval_gaussian(&re, &im);
    Complex64::new(rational::to_f64(&a), rational::to_f64(&b))
}

/// Random complex point away from the zeros of `d² + 4g`, where the closed
/// form degenerates.
fn sample_point(rng: &mut ChaCha8Rng, family: &gfp::GfpFamily) -> Complex64 {
    loop {
        let re = rng.random_range(-2.0..2.0);
        let im = rng.random_range(0.3..2.0) * if rng.random::<bool>() { 1.0 } else { -1.0 };
        let z = Complex64::new(re, im);
        let d = family.d().eval_complex(z);
        let disc = d * d + 4.0 * family.g().eval_complex(z);
        if disc.norm() > 0.25 {
            return z;
        }
    }
}

fn criterion_1() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_601);
    let mut worst: f64 = 0.0;
    let mut checked = 0usize;
    for f in registry_classic() {
        let seq = gfp::generate(&f, 25);
        let points: Vec<Complex64> = (0..20).map(|_| sample_point(&mut rng, &f)).collect();
        let first = f.kind().first_index();
        let g0 = match f.kind() {
            GfpKind::FibonacciType => Polynomial::zero(),
            GfpKind::LucasType => Polynomial::constant(f.p0().cloned().unwrap_or_default()),
        };
        ensure(first > 0 || seq.term(0) == Some(&g0), || {
            format!("{}: wrong G_0", f.display_name())
        })?;
        for n in first.max(1)..=25 {
            let term = seq.term(n).ok_or("missing term")?.clone();
            let expanded = match f.kind() {
                GfpKind::FibonacciType => expand_fibonacci_type(&f, n),
                GfpKind::LucasType => expand_lucas_type(&f, n),
            }
            .map_err(|e| e.to_string())?;
            ensure(term == expanded, || {
                format!("{} n={n}: recurrence and expansion differ", f.display_name())
            })?;
            for &z in &points {
                let exact = exact_eval(&term, z);
                let binet = binet_eval(&f, n, z).map_err(|e| e.to_string())?;
                let rel = (binet - exact).norm() / exact.norm();
                worst = worst.max(rel);
                checked += 1;
                ensure(rel <= 1e-9, || {
                    format!("{} n={n} z={z}: relative error {rel:e}", f.display_name())
                })?;
            }
        }
        ensure(seq.satisfies_recurrence(), || {
            format!("{}: recurrence check failed", f.display_name())
        })?;
    }
    Ok(format!("{checked} Binet evaluations, worst relative error {worst:.2e}"))
}

fn criterion_2() -> Check {
    let mut worst_residual: f64 = 0.0;
    let mut worst_match: f64 = 0.0;
    let mut cases = 0;
    for f in registry_classic().into_iter().filter(|f| f.constant_g().is_some()) {
        for n in f.kind().first_index().max(2)..=15 {
            let set = gfp_roots(&f, n, 1e-8).map_err(|e| e.to_string())?;
            let term = f.term(n);
            let oracle = all_roots_companion(&term).map_err(|e| e.to_string())?;
            let dist = match_distance(&set.roots, &oracle).ok_or_else(|| {
                format!(
                    "{} n={n}: {} roots vs {} from the companion matrix",
                    f.display_name(),
                    set.roots.len(),
                    oracle.len()
                )
            })?;
            for r in &set.roots {
                worst_residual = worst_residual.max(term.eval_complex_compensated(*r).norm());
            }
            worst_match = worst_match.max(dist);
            cases += 1;
            ensure(dist <= 1e-8, || {
                format!("{} n={n}: match distance {dist:e}", f.display_name())
            })?;
            ensure(worst_residual <= 1e-8, || {
                format!("{} n={n}: residual {worst_residual:e}", f.display_name())
            })?;
        }
        // Lucas type at n = 1
        if f.kind() == GfpKind::LucasType {
            let set = gfp_roots(&f, 1, 1e-8).map_err(|e| e.to_string())?;
            let oracle = all_roots_companion(&f.term(1)).map_err(|e| e.to_string())?;
            ensure(match_distance(&set.roots, &oracle).is_some_and(|d| d <= 1e-8), || {
                format!("{} n=1", f.display_name())
            })?;
        }
    }
    Ok(format!(
        "{cases} root sets, max residual {worst_residual:.2e}, max match distance {worst_match:.2e}"
    ))
}

fn criterion_3() -> Check {
    let not_orthogonal = ["Fibonacci", "Lucas", "Pell", "Pell-Lucas", "Pell-Lucas-prime"];
    let mut worst: f64 = 0.0;
    for f in registry_classic() {
        let name = f.name().unwrap_or_default().to_string();
        let v = ortho::classify(&f, 10, 1e-8);
        if not_orthogonal.contains(&name.as_str()) {
            ensure(v.criterion == ortho::Criterion::LinearDPositiveG, || {
                format!("{name}: {:?}", v.criterion)
            })?;
            ensure(matches!(v.verdict, Verdict::NotOrthogonal { .. }), || {
                format!("{name}: {}", v.label())
            })?;
        } else {
            ensure(matches!(v.verdict, Verdict::Orthogonal { .. }), || {
                format!("{name}: {}", v.label())
            })?;
            let off = v.max_off_diagonal.unwrap_or(f64::INFINITY);
            worst = worst.max(off);
            ensure(off < 1e-8, || format!("{name}: off-diagonal {off:e}"))?;
        }
    }
    Ok(format!("5 NotOrthogonal, 8 Orthogonal, max off-diagonal {worst:.2e}"))
}

fn criterion_4() -> Check {
    let weights = [
        EvenWeight::default(),
        EvenWeight::new(Polynomial::from_i64s(&[1, 0, 1]), int(2)).map_err(|e| e.to_string())?,
    ];
    let mut families = 0;
    let mut positive_checked = 0;
    for f in registry_classic()
        .into_iter()
        .filter(|f| f.d().is_odd() && f.g().is_even())
    {
        families += 1;
        let positive_g = f.constant_g().is_some_and(|g| g.is_positive());
        for w in &weights {
            let split = ortho::complement_split(&f, 8, w).map_err(|e| e.to_string())?;
            ensure(split.cross_is_zero(), || {
                format!("{}: cross block nonzero", f.display_name())
            })?;
            for &n in &split.even_indices {
                for &m in &split.odd_indices {
                    let check = ortho::parity_vanish_check(&f, 1.0, n, m).map_err(|e| e.to_string())?;
                    ensure(check.product_is_odd && check.integral == 0.0, || {
                        format!("{} ({n},{m}): product not odd", f.display_name())
                    })?;
                }
            }
            if positive_g {
                for block in [&split.even_gram, &split.odd_gram] {
                    for v in block.iter().flatten() {
                        positive_checked += 1;
                        ensure(v.is_positive(), || {
                            format!("{}: same-parity entry {v}", f.display_name())
                        })?;
                    }
                }
            }
        }
    }
    Ok(format!(
        "{families} odd-d/even-g families with exactly zero cross blocks; {positive_checked} same-parity entries positive for constant g > 0"
    ))
}

fn criterion_5() -> Check {
    let chain = walk_from_lucas(&int(16), &int(-14)).map_err(|e| e.to_string())?;
    let m = chain.matrix_exact(4);
    let z = Rational::zero;
    let expected = vec![
        vec![ratio(14, 16), ratio(2, 16), z(), z()],
        vec![ratio(1, 16), ratio(14, 16), ratio(1, 16), z()],
        vec![z(), ratio(1, 16), ratio(14, 16), ratio(1, 16)],
        vec![z(), z(), ratio(1, 16), ratio(14, 16)],
    ];
    ensure(m == expected, || "c=16, h=-14 matrix differs".into())?;
    for c in 2..=30 {
        let chain = walk_from_lucas(&int(c), &int(2 - c)).map_err(|e| e.to_string())?;
        let pc = potential_coefficients(&chain, 30);
        ensure(pc.pi[1..].iter().all(|v| *v == int(2)), || format!("c={c}: π_n != 2"))?;
        ensure(pc.convergence == Convergence::Divergent, || {
            format!("c={c}: series converges")
        })?;
        ensure(ergodicity_discrete(&chain).verdict == Ergodicity::NotErgodic, || {
            format!("c={c}: ergodic")
        })?;
    }
    let chain = walk_from_lucas(&int(8), &int(-3)).map_err(|e| e.to_string())?;
    let pc = potential_coefficients(&chain, 20);
    ensure(pc.convergence == Convergence::Convergent { limit: ratio(5, 3) }, || {
        format!("{:?}", pc.convergence)
    })?;
    let v = ergodicity_discrete(&chain);
    ensure(v.verdict == Ergodicity::Ergodic, || "c=8, h=-3 not ergodic".into())?;
    Ok("matrix exact, π_n = 2 for c = 2..30, Σπ = 5/3 for c - 1 + h = 4".into())
}

fn criterion_6() -> Check {
    let mut worst_discrete: f64 = 0.0;
    for (c, h) in [(2, 0), (16, -14)] {
        let chain = walk_from_lucas(&int(c), &int(h)).map_err(|e| e.to_string())?;
        let measure = spectral_measure(&chain).map_err(|e| e.to_string())?;
        let powers = power_sequence(&chain, 200, 20, Execution::default()).map_err(|e| e.to_string())?;
        for (n, power) in powers.iter().enumerate() {
            let km = measure
                .km_table(10, n, Execution::default())
                .map_err(|e| e.to_string())?;
            for i in 0..=10 {
                for j in 0..=10 {
                    let diff = (km[i][j] - power.entry(i, j).map_err(|e| e.to_string())?).abs();
                    worst_discrete = worst_discrete.max(diff);
                }
            }
        }
    }
    ensure(worst_discrete <= 1e-8, || {
        format!("discrete max difference {worst_discrete:e}")
    })?;

    let gen = markov::generator_from_lucas(&int(-2), &int(4)).map_err(|e| e.to_string())?;
    let measure = spectral_measure(&gen).map_err(|e| e.to_string())?;
    let mut worst_continuous: f64 = 0.0;
    for t in [0.1, 0.5, 1.0, 2.0] {
        let oracle = exp_oracle(&gen, 300, t).map_err(|e| e.to_string())?;
        let km = measure
            .km_table_continuous(10, t, Execution::default())
            .map_err(|e| e.to_string())?;
        for i in 0..=10 {
            for j in 0..=10 {
                let diff = (km[i][j] - oracle.entry(i, j).map_err(|e| e.to_string())?).abs();
                worst_continuous = worst_continuous.max(diff);
            }
        }
    }
    ensure(worst_continuous <= 1e-6, || {
        format!("continuous max difference {worst_continuous:e}")
    })?;
    Ok(format!(
        "discrete max |KM - P^n| {worst_discrete:.2e}, continuous max |KM - exp(tA)| {worst_continuous:.2e}"
    ))
}

fn criterion_7() -> Check {
    let mut report = Vec::new();
    for (c, h) in [(2, 0), (16, -14)] {
        let chain = walk_from_lucas(&int(c), &int(h)).map_err(|e| e.to_string())?;
        let km = spectral::km_discrete(&chain, 0, 0, 10)
            .map_err(|e| e.to_string())?
            .value;
        let mc = mc_simulate(&chain, 0, 10, 1_000_000, 42).map_err(|e| e.to_string())?;
        let z = (mc.frequency(0) - km).abs() / mc.standard_error(0);
        report.push(format!("c={c},h={h}: {z:.2} SE"));
        ensure(z <= 4.0, || {
            format!("c={c}, h={h}: empirical {} vs KM {km} ({z:.2} SE)", mc.frequency(0))
        })?;
    }
    Ok(report.join(", "))
}

fn criterion_8() -> Check {
    let mut worst: f64 = 0.0;
    let mut stochastic_chains = 0;
    for (c, h) in [(2, 0), (3, -1), (16, -14), (25, -23), (8, -3), (3, 0)] {
        let chain = walk_from_lucas(&int(c), &int(h)).map_err(|e| e.to_string())?;
        let polys = walk_polys(&chain, 10).map_err(|e| e.to_string())?;
        let stochastic = (0..=10).all(|n| chain.row_sum(n) == rational::one());
        ensure(polys.fixed_at_one() == stochastic, || {
            format!("c={c}, h={h}: Q_j(1) = 1 is {}", !stochastic)
        })?;
        stochastic_chains += usize::from(stochastic);
        let m = spectral_measure(&chain).map_err(|e| e.to_string())?;
        worst = worst.max(m.orthonormality_defect(10));
    }
    let gen = markov::generator_from_lucas(&int(-1), &int(8)).map_err(|e| e.to_string())?;
    worst = worst.max(
        spectral_measure(&gen)
            .map_err(|e| e.to_string())?
            .orthonormality_defect(10),
    );
    ensure(worst < 1e-9, || format!("orthonormality defect {worst:e}"))?;
    Ok(format!(
        "Q_j(1) = 1 exactly for j <= 10 on {stochastic_chains} stochastic chains; max |π_j ∫Q_j² dμ - 1| = {worst:.2e}"
    ))
}

fn main() {
    let entry = |id, title, limit_secs, run| Entry {
        id,
        title,
        limit_secs,
        run,
    };
    let criteria = [
        entry(1, "triple representation identity", Some(10), criterion_1),
        entry(2, "root transfer vs companion matrix", Some(30), criterion_2),
        entry(3, "orthogonality verdict table", Some(60), criterion_3),
        entry(4, "parity structure", None, criterion_4),
        entry(5, "walk construction and potentials", None, criterion_5),
        entry(
            6,
            "Karlin-McGregor vs matrix power and exponential",
            Some(120),
            criterion_6,
        ),
        entry(7, "Monte Carlo vs Karlin-McGregor", Some(120), criterion_7),
        entry(8, "walk polynomials and measure normalization", None, criterion_8),
    ];
    let mut failures = 0;
    for Entry {
        id,
        title,
        limit_secs: limit,
        run,
    } in criteria
    {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let over = limit.is_some_and(|s| elapsed > Duration::from_secs(s));
        let budget = limit.map(|s| format!(" / {s} s")).unwrap_or_default();
        match outcome {
            Ok(detail) if !over => println!("PASS {id}: {title} ({detail}; {:.2} s{budget})", elapsed.as_secs_f64()),
            Ok(detail) => {
                failures += 1;
                println!(
                    "FAIL {id}: {title} (runtime {:.2} s exceeds {budget}; {detail})",
                    elapsed.as_secs_f64()
                );
            }
            Err(reason) => {
                failures += 1;
                println!("FAIL {id}: {title} ({reason}; {:.2} s)", elapsed.as_secs_f64());
            }
        }
    }
    if failures > 0 {
        std::process::exit(1);
    }
}
