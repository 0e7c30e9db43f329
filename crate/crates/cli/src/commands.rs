use std::fs;

use gfp_core::gfp::{self, GfpFamily, GfpKind};
use gfp_core::markov::{
    ergodicity_continuous, ergodicity_discrete, generator_from_lucas, potential_coefficients, walk_from_lucas,
    BirthDeath, ContinuousGenerator, DiscreteChain, ErgodicityVerdict,
};
use gfp_core::ortho::{self, Verdict};
use gfp_core::rational::{self, Rational};
use gfp_core::roots::gfp_roots;
use gfp_core::spectral::{self, exp_oracle, mc_simulate, power_oracle, TransitionResult};
use gfp_core::Complex64;
use serde_json::{json, Value};

use crate::output::{real, Report, Table};
use crate::{ChainArgs, Command, Failure, FamilyArgs, Oracle};

/// Default truncation of the matrix-power oracle.
const POWER_SIZE: usize = 200;
/// Default truncation of the matrix-exponential oracle.
const EXP_SIZE: usize = 300;

pub fn run(command: Command) -> Result<Report, Failure> {
    match command {
        Command::Generate { family, n } => generate(&load_family(&family)?, n),
        Command::Expand { family, n } => expand(&load_family(&family)?, n),
        Command::Binet { family, n, x, im } => binet(&load_family(&family)?, n, Complex64::new(x, im)),
        Command::Roots { family, n, tol } => roots(&load_family(&family)?, n, tol),
        Command::Classify { family, n, tol } => Ok(classify(&load_family(&family)?, n, tol)),
        Command::Gram { family, n } => gram(&load_family(&family)?, n),
        Command::Walk { c, h, rows } => {
            let chain = walk_from_lucas(&c, &h)?;
            Ok(chain_report(
                serde_json::to_value(&chain).map_err(internal)?,
                &chain,
                ergodicity_discrete(&chain),
                rows,
            ))
        }
        Command::Generator { c, k, rows } => {
            let gen = generator_from_lucas(&c, &k)?;
            Ok(chain_report(
                serde_json::to_value(&gen).map_err(internal)?,
                &gen,
                ergodicity_continuous(&gen),
                rows,
            ))
        }
        Command::Km {
            chain,
            i,
            j,
            n,
            t,
            oracle,
            trials,
            seed,
        } => km(&chain, i, j, n, t, oracle, trials, seed),
        Command::Simulate {
            c,
            h,
            start,
            steps,
            trials,
            seed,
        } => simulate(&c, &h, start, steps, trials, seed),
        Command::Ergodicity { chain } => ergodicity(&chain),
        Command::Registry { all } => Ok(registry(all)),
    }
}

fn internal(e: impl std::fmt::Display) -> Failure {
    Failure::Internal(e.to_string())
}

fn load_family(args: &FamilyArgs) -> Result<GfpFamily, Failure> {
    let (text, source) = match (&args.family, &args.family_file) {
        (Some(text), _) => (text.clone(), "--family"),
        (None, Some(path)) => (
            fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?,
            "--family-file",
        ),
        (None, None) => return Err(Failure::Usage("one of --family or --family-file is required".into())),
    };
    let trimmed = text.trim();
    if trimmed.starts_with('{') {
        serde_json::from_str(trimmed).map_err(|e| Failure::Usage(format!("invalid family JSON in {source}: {e}")))
    } else if source == "--family-file" {
        Err(Failure::Usage("--family-file must hold a JSON family".into()))
    } else {
        gfp::lookup(trimmed).ok_or_else(|| Failure::Core(gfp_core::Error::UnknownFamily(trimmed.to_string())))
    }
}

fn family_json(f: &GfpFamily) -> Value {
    serde_json::to_value(f).unwrap_or(Value::Null)
}

fn complex_json(z: Complex64) -> Value {
    json!({ "re": z.re, "im": z.im })
}

fn generate(f: &GfpFamily, n: usize) -> Result<Report, Failure> {
    let seq = gfp::generate(f, n);
    let mut table = Table::new(["n", "degree", "term"]);
    let mut terms = Vec::new();
    for (i, term) in seq.terms.iter().enumerate() {
        table.push([i.to_string(), term.degree().to_string(), term.to_string()]);
        terms.push(json!({ "n": i, "coeffs": term }));
    }
    Ok(Report::json(json!({ "family": family_json(f), "terms": terms }), table))
}

fn expand(f: &GfpFamily, n: usize) -> Result<Report, Failure> {
    let recurrence = f.term(n);
    let expansion = match f.kind() {
        GfpKind::FibonacciType => gfp::expand_fibonacci_type(f, n)?,
        GfpKind::LucasType => gfp::expand_lucas_type(f, n)?,
    };
    let identical = recurrence == expansion;
    let mut table = Table::new(["representation", "term"]);
    table.push(["recurrence".to_string(), recurrence.to_string()]);
    table.push(["expansion".to_string(), expansion.to_string()]);
    table.push(["identical".to_string(), identical.to_string()]);
    Ok(Report::json(
        json!({ "family": family_json(f), "n": n, "recurrence": recurrence, "expansion": expansion, "identical": identical }),
        table,
    ))
}

fn binet(f: &GfpFamily, n: usize, z: Complex64) -> Result<Report, Failure> {
    let value = gfp::binet_eval(f, n, z)?;
    let to_exact =
        |v: f64| Rational::from_float(v).ok_or_else(|| Failure::Usage(format!("point coordinate {v} is not finite")));
    let (re, im) = f.term(n).eval_gaussian(&to_exact(z.re)?, &to_exact(z.im)?);
    let exact = Complex64::new(rational::to_f64(&re), rational::to_f64(&im));
    let relative_error = if exact.norm() > 0.0 {
        (value - exact).norm() / exact.norm()
    } else {
        value.norm()
    };
    let mut table = Table::new(["evaluation", "re", "im"]);
    table.push(["closed form".to_string(), real(value.re), real(value.im)]);
    table.push(["exact".to_string(), real(exact.re), real(exact.im)]);
    Ok(Report::json(
        json!({
            "family": family_json(f),
            "n": n,
            "x": complex_json(z),
            "binet": complex_json(value),
            "exact": complex_json(exact),
            "relative_error": relative_error,
        }),
        table,
    ))
}

fn roots(f: &GfpFamily, n: usize, tol: f64) -> Result<Report, Failure> {
    let set = gfp_roots(f, n, tol)?;
    // + 0.0 maps -0.0 to 0.0 so the sort key is not split on the sign of zero
    let mut pairs: Vec<(Complex64, f64)> = set
        .roots
        .iter()
        .map(|z| Complex64::new(z.re + 0.0, z.im + 0.0))
        .zip(set.residuals.iter().copied())
        .collect();
    pairs.sort_by(|a, b| a.0.re.total_cmp(&b.0.re).then(a.0.im.total_cmp(&b.0.im)));
    let mut table = Table::new(["re", "im", "residual"]);
    let mut list = Vec::new();
    for (z, r) in &pairs {
        table.push([real(z.re), real(z.im), real(*r)]);
        list.push(json!({ "re": z.re, "im": z.im, "residual": r }));
    }
    Ok(Report::json(
        json!({ "family": family_json(f), "n": n, "residual_tolerance": set.residual_tolerance, "roots": list }),
        table,
    ))
}

fn classify(f: &GfpFamily, n: usize, tol: f64) -> Report {
    let v = ortho::classify(f, n, tol);
    let mut table = Table::new(["family", "verdict", "criterion", "detail"]);
    let detail = match &v.verdict {
        Verdict::Orthogonal { weight } => format!(
            "support [{}, {}], max off-diagonal {:e}",
            weight.support[0],
            weight.support[1],
            v.max_off_diagonal.unwrap_or(f64::NAN)
        ),
        Verdict::NotOrthogonal { reason } | Verdict::Undecided { reason } => reason.clone(),
    };
    table.push([
        f.display_name(),
        v.label().to_string(),
        format!("{:?}", v.criterion),
        detail,
    ]);
    Report::json(serde_json::to_value(&v).unwrap_or(Value::Null), table)
}

fn gram(f: &GfpFamily, n: usize) -> Result<Report, Failure> {
    let w = ortho::build_weight(f)?;
    let g = ortho::gram(f, &w, n)?;
    let mut table = Table::new(std::iter::once("n".to_string()).chain(g.indices.iter().map(|i| i.to_string())));
    for (i, row) in g.indices.iter().zip(&g.entries) {
        table.push(std::iter::once(i.to_string()).chain(row.iter().map(|v| real(*v))));
    }
    Ok(Report::csv(
        json!({ "gram": g, "weight": w, "max_off_diagonal": g.max_off_diagonal() }),
        table,
    ))
}

fn chain_report(chain_json: Value, chain: &impl BirthDeath, verdict: ErgodicityVerdict, rows: usize) -> Report {
    let pc = potential_coefficients(chain, rows.saturating_sub(1));
    let mut table = Table::new(["state", "down", "hold", "up", "pi"]);
    let mut matrix = Vec::new();
    for s in 0..rows {
        table.push([
            s.to_string(),
            rational::format(&chain.down(s)),
            rational::format(&chain.diag(s)),
            rational::format(&chain.up(s)),
            rational::format(&pc.pi[s]),
        ]);
        let mut row = vec!["0".to_string(); rows];
        if s > 0 {
            row[s - 1] = rational::format(&chain.down(s));
        }
        row[s] = rational::format(&chain.diag(s));
        if s + 1 < rows {
            row[s + 1] = rational::format(&chain.up(s));
        }
        matrix.push(row);
    }
    Report::json(
        json!({
            "chain": chain_json,
            "matrix": matrix,
            "potentials": pc,
            "ergodicity": verdict,
        }),
        table,
    )
}

fn results_report(results: Vec<TransitionResult>) -> Result<Report, Failure> {
    let mut table = Table::new(["method", "i", "j", "horizon", "value", "error_bar"]);
    for r in &results {
        let horizon = match r.horizon {
            spectral::Horizon::Steps(n) => format!("n={n}"),
            spectral::Horizon::Time(t) => format!("t={t}"),
        };
        let err = r.error_bar.map(real).unwrap_or_default();
        table.push([
            format!("{:?}", r.method),
            r.i.to_string(),
            r.j.to_string(),
            horizon,
            real(r.value),
            err,
        ]);
    }
    Ok(Report::json(serde_json::to_value(&results).map_err(internal)?, table))
}

enum Chain {
    Discrete(DiscreteChain),
    Continuous(ContinuousGenerator),
}

fn build_chain(args: &ChainArgs) -> Result<Chain, Failure> {
    match (&args.h, &args.k) {
        (Some(h), None) => Ok(Chain::Discrete(walk_from_lucas(&args.c, h)?)),
        (None, Some(k)) => Ok(Chain::Continuous(generator_from_lucas(&args.c, k)?)),
        _ => Err(Failure::Usage(
            "exactly one of --h (discrete) or --k (continuous) is required".into(),
        )),
    }
}

#[allow(clippy::too_many_arguments)]
fn km(
    args: &ChainArgs,
    i: usize,
    j: usize,
    n: Option<usize>,
    t: Option<f64>,
    oracle: Option<Oracle>,
    trials: u64,
    seed: u64,
) -> Result<Report, Failure> {
    let mut results = Vec::new();
    match build_chain(args)? {
        Chain::Discrete(chain) => {
            let n = n.ok_or_else(|| Failure::Usage("--n is required for a discrete walk".into()))?;
            results.push(spectral::km_discrete(&chain, i, j, n)?);
            match oracle {
                None => {}
                Some(Oracle::Power) => {
                    let size = POWER_SIZE.max(i.max(j) + n + 1);
                    results.push(power_oracle(&chain, size, n)?.result(i, j)?);
                }
                Some(Oracle::Mc) => results.push(mc_simulate(&chain, i, n, trials, seed)?.result(j)),
                Some(Oracle::Exp) => {
                    return Err(Failure::Usage("--oracle exp needs a continuous generator (--k)".into()))
                }
            }
        }
        Chain::Continuous(gen) => {
            let t = t.ok_or_else(|| Failure::Usage("--t is required for a continuous generator".into()))?;
            if !(t.is_finite() && t >= 0.0) {
                return Err(Failure::Usage(format!(
                    "--t must be a finite nonnegative time, got {t}"
                )));
            }
            results.push(spectral::km_continuous(&gen, i, j, t)?);
            match oracle {
                None => {}
                Some(Oracle::Exp) => {
                    let size = EXP_SIZE.max(2 * i.max(j) + 1);
                    results.push(exp_oracle(&gen, size, t)?.result(i, j)?);
                }
                Some(other) => {
                    return Err(Failure::Usage(format!(
                        "--oracle {} needs a discrete walk (--h)",
                        if other == Oracle::Mc { "mc" } else { "power" }
                    )))
                }
            }
        }
    }
    results_report(results)
}

fn simulate(c: &Rational, h: &Rational, start: usize, steps: usize, trials: u64, seed: u64) -> Result<Report, Failure> {
    let chain = walk_from_lucas(c, h)?;
    let mc = mc_simulate(&chain, start, steps, trials, seed)?;
    let measure = spectral::spectral_measure(&chain)?;
    let mut table = Table::new(["state", "count", "frequency", "standard_error", "predicted"]);
    for (s, &count) in mc.counts.iter().enumerate() {
        let exact = measure.km_discrete(start, s, steps)?.value;
        table.push([
            s.to_string(),
            count.to_string(),
            real(mc.frequency(s)),
            real(mc.standard_error(s)),
            real(exact),
        ]);
    }
    let absorbed = absorbed_mass(&chain, start, steps);
    table.push([
        "absorbed".to_string(),
        mc.absorbed.to_string(),
        real(mc.absorbed_frequency()),
        real(mc.absorbed_standard_error()),
        real(rational::to_f64(&absorbed)),
    ]);
    Ok(Report::csv(serde_json::to_value(&mc).map_err(internal)?, table))
}

/// Exact probability of leaving through state 0 within `steps` steps.
fn absorbed_mass(chain: &DiscreteChain, start: usize, steps: usize) -> Rational {
    let mut dist = vec![rational::zero(); start + steps + 2];
    dist[start] = rational::one();
    let mut lost = rational::zero();
    for _ in 0..steps {
        let mut next = vec![rational::zero(); dist.len()];
        for (s, mass) in dist.iter().enumerate().filter(|(_, m)| **m != rational::zero()) {
            let (down, hold, up) = chain.row(s);
            if s == 0 {
                lost += mass * down;
            } else {
                next[s - 1] += mass * down;
            }
            next[s] += mass * hold;
            next[s + 1] += mass * up;
        }
        dist = next;
    }
    lost
}

fn ergodicity(args: &ChainArgs) -> Result<Report, Failure> {
    let verdict = match build_chain(args)? {
        Chain::Discrete(chain) => ergodicity_discrete(&chain),
        Chain::Continuous(gen) => ergodicity_continuous(&gen),
    };
    let mut table = Table::new(["chain_kind", "verdict", "series", "tail_ratio", "strict_window"]);
    table.push([
        format!("{:?}", verdict.chain_kind),
        format!("{:?}", verdict.verdict),
        verdict
            .series_exact
            .as_ref()
            .map(rational::format)
            .unwrap_or_else(|| "divergent".into()),
        rational::format(&verdict.tail_ratio),
        verdict.strict_window.to_string(),
    ]);
    Ok(Report::json(serde_json::to_value(&verdict).map_err(internal)?, table))
}

fn registry(all: bool) -> Report {
    let families = if all {
        gfp::registry_all()
    } else {
        gfp::registry_classic()
    };
    let mut table = Table::new(["name", "kind", "d", "g", "p0", "partner"]);
    for f in &families {
        table.push([
            f.display_name(),
            f.kind().label().to_string(),
            f.d().to_string(),
            f.g().to_string(),
            f.p0().map(rational::format).unwrap_or_default(),
            gfp::conjugate_of(f).display_name(),
        ]);
    }
    Report::json(Value::Array(families.iter().map(family_json).collect()), table)
}
