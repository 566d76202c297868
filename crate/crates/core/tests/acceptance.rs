//! Acceptance run: one pass/fail line per criterion, nonzero exit on any failure.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use odd_core::bessel::STABILITY_TOL;
use odd_core::lab::{spectral_invariance_report, DecayKind, DecayModel};
use odd_core::smoothness::AnyNorm;
use odd_core::verify::{Corpus, Suite, SuiteReport, VerifyConfig};
use odd_core::NormSpec;

const SEED: u64 = 20;
const CORPUS_SIZE: usize = 100;
const HALF_WIDTH: usize = 64;

const IDENTITY_RESIDUAL: f64 = 1e-10;
const IDENTITY_BUDGET: Duration = Duration::from_secs(30);
const T_COUNT: f64 = 32.0;

const INVARIANCE_ORDERS: [f64; 2] = [2.0, 3.0];
const INVARIANCE_WINDOWS: [usize; 3] = [64, 128, 256];
const INVARIANCE_LAMBDA: f64 = 2.0;
const EXPONENT_SLACK: f64 = 0.25;
const NORM_VARIATION: f64 = 0.10;
const INVARIANCE_BUDGET: Duration = Duration::from_secs(120);

const MAX_CONSTANT: f64 = 20.0;
const MAX_DRIFT: f64 = 0.10;
const EXACTNESS: f64 = 1e-12;
const QUADRATURE_SPREAD: f64 = 0.005;

struct Outcome {
    passed: bool,
    summary: String,
}

impl Outcome {
    fn error(e: impl std::fmt::Display) -> Self {
        Self { passed: false, summary: format!("error: {e}") }
    }
}

/// Values of every stat whose key ends with `suffix`.
fn stats_with<'a>(r: &'a SuiteReport, suffix: &'a str) -> impl Iterator<Item = (&'a String, f64)> + 'a {
    r.stats.iter().filter(move |(k, _)| k.ends_with(suffix)).map(|(k, v)| (k, *v))
}

fn max_stat(r: &SuiteReport, suffix: &str) -> f64 {
    stats_with(r, suffix).map(|x| x.1).fold(f64::NEG_INFINITY, |a, b| if b.is_nan() { f64::NAN } else { a.max(b) })
}

fn run(corpus: &Corpus, suite: Suite) -> Result<SuiteReport, String> {
    odd_core::verify::run_suite(corpus, suite).map_err(|e| format!("{suite}: {e}"))
}

/// Interval criteria: every `:C` stat at most `MAX_CONSTANT`, every `:drift` below `MAX_DRIFT`.
fn interval(corpus: &Corpus, suite: Suite) -> Outcome {
    let r = match run(corpus, suite) {
        Ok(r) => r,
        Err(e) => return Outcome::error(e),
    };
    let c = max_stat(&r, ":C");
    let drift = max_stat(&r, ":drift");
    let intervals: Vec<String> = stats_with(&r, ":C").map(|(k, v)| format!("{} C={v:.3}", k.trim_end_matches(":C"))).collect();
    Outcome {
        passed: r.passed && c <= MAX_CONSTANT && drift < MAX_DRIFT,
        summary: format!("max C={c:.3} (<= {MAX_CONSTANT}), max drift={drift:.4} (< {MAX_DRIFT}); {}", intervals.join("; ")),
    }
}

fn criterion_1(corpus: &Corpus) -> Outcome {
    let start = Instant::now();
    let (l, q) = match (run(corpus, Suite::Leibniz), run(corpus, Suite::Quotient)) {
        (Ok(l), Ok(q)) => (l, q),
        (Err(e), _) | (_, Err(e)) => return Outcome::error(e),
    };
    let elapsed = start.elapsed();
    let lr = l.stats["max_residual"];
    let qr = q.stats["max_residual"];
    let t = l.stats["t_samples"];
    Outcome {
        passed: lr < IDENTITY_RESIDUAL && qr < IDENTITY_RESIDUAL && t == T_COUNT && elapsed < IDENTITY_BUDGET,
        summary: format!(
            "leibniz residual {lr:.2e}, quotient residual {qr:.2e} (< {IDENTITY_RESIDUAL:e}), {t} t-values, {:.1}s (< {}s)",
            elapsed.as_secs_f64(),
            IDENTITY_BUDGET.as_secs()
        ),
    }
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let mut passed = true;
    let mut parts = Vec::new();
    for r in INVARIANCE_ORDERS {
        let model = DecayModel::new(DecayKind::DeterministicEnvelope, r, 1.0, SEED).expect("valid model");
        let norms = [AnyNorm::Base(NormSpec::jaffard(r))];
        let report = match spectral_invariance_report(&model, 1, &INVARIANCE_WINDOWS, INVARIANCE_LAMBDA, &norms) {
            Ok(rep) => rep,
            Err(e) => return Outcome::error(e),
        };
        let exps: Vec<f64> = report.cells.iter().map(|c| c.profile_b_inv.exponent).collect();
        let min_exp = exps.iter().copied().fold(f64::INFINITY, f64::min);
        let n = report.cells.len();
        let (a, b) = (report.cells[n - 2].norms[0].b_inv, report.cells[n - 1].norms[0].b_inv);
        let change = (b - a).abs() / a;
        passed &= min_exp >= r - EXPONENT_SLACK && change < NORM_VARIATION;
        parts.push(format!(
            "r={r}: inverse exponents {} (>= {}), jaffard(B^-1) {a:.4} -> {b:.4} change {:.2}%",
            exps.iter().map(|e| format!("{e:.3}")).collect::<Vec<_>>().join("/"),
            r - EXPONENT_SLACK,
            100.0 * change
        ));
    }
    let elapsed = start.elapsed();
    passed &= elapsed < INVARIANCE_BUDGET;
    Outcome {
        passed,
        summary: format!("{}; {:.1}s (< {}s)", parts.join("; "), elapsed.as_secs_f64(), INVARIANCE_BUDGET.as_secs()),
    }
}

fn criterion_6(corpus: &Corpus) -> Outcome {
    let r = match run(corpus, Suite::BesselExactness) {
        Ok(r) => r,
        Err(e) => return Outcome::error(e),
    };
    let exact = max_stat(&r, ":max_relative_error");
    let semigroup = r.stats["semigroup_max_relative_error"];
    Outcome {
        passed: r.passed && exact <= EXACTNESS && semigroup <= EXACTNESS,
        summary: format!(
            "max relative error {exact:.2e} over r in {{0.5, 1, 1.9}}, semigroup {semigroup:.2e} (<= {EXACTNESS:e})"
        ),
    }
}

fn criterion_7(corpus: &Corpus) -> Outcome {
    let r = match run(corpus, Suite::Embedding) {
        Ok(r) => r,
        Err(e) => return Outcome::error(e),
    };
    let c = max_stat(&r, ":C");
    let drift = max_stat(&r, ":drift");
    let lower = r.stats["bessel/besov_1:C"];
    let upper = r.stats["besov_inf/bessel:C"];
    let hyper = r.stats["hypersingular/bessel:C"];
    Outcome {
        passed: r.passed && c <= MAX_CONSTANT && drift < MAX_DRIFT && STABILITY_TOL <= QUADRATURE_SPREAD,
        summary: format!(
            "bessel <= {lower:.3} besov_1, besov_inf <= {upper:.3} bessel, hypersingular/bessel in [1/{hyper:.3}, {hyper:.3}], \
             max drift {drift:.4}, quadrature spread < {STABILITY_TOL}"
        ),
    }
}

fn criterion_8(corpus: &Corpus) -> Outcome {
    let (s, i) = match (run(corpus, Suite::Solidity), run(corpus, Suite::Isometry)) {
        (Ok(s), Ok(i)) => (s, i),
        (Err(e), _) | (_, Err(e)) => return Outcome::error(e),
    };
    let excess = max_stat(&s, ":max(|A'|-|B|)");
    let abs = max_stat(&s, ":abs_invariance");
    let iso = max_stat(&i, ":max_relative_change");
    let specs = stats_with(&s, ":max(|A'|-|B|)").count();
    Outcome {
        passed: s.passed && i.passed && excess <= 0.0 && abs <= EXACTNESS && iso <= EXACTNESS,
        summary: format!(
            "{specs} solid specs: max(|A'| - |B|) = {excess:.3e} (<= 0), ||A|| vs |||A||| {abs:.2e}, \
             modulation change {iso:.2e} (<= {EXACTNESS:e})"
        ),
    }
}

fn criterion_9(corpus: &Corpus) -> Outcome {
    let r = match run(corpus, Suite::Bernstein) {
        Ok(r) => r,
        Err(e) => return Outcome::error(e),
    };
    let worst = max_stat(&r, ":ratio/2piN");
    Outcome {
        passed: r.passed && worst <= 1.0,
        summary: format!("max ratio / (2 pi N) = {worst:.4} (<= 1) for N in {{4, 8, 16}}"),
    }
}

type Check<'a> = Box<dyn Fn() -> Outcome + 'a>;

fn main() -> ExitCode {
    let cfg = VerifyConfig { seed: SEED, corpus_size: CORPUS_SIZE, half_width: HALF_WIDTH, dim: 1 };
    let corpus = Corpus::new(cfg).expect("acceptance corpus");
    let criteria: [(&str, Check); 9] = [
        ("1 leibniz/quotient identities", Box::new(|| criterion_1(&corpus))),
        ("2 jaffard spectral invariance", Box::new(criterion_2)),
        ("3 besov evaluator equivalence", Box::new(|| interval(&corpus, Suite::LpEquivalence))),
        ("4 jackson-bernstein", Box::new(|| interval(&corpus, Suite::JacksonBernstein))),
        ("5 reiteration", Box::new(|| interval(&corpus, Suite::Reiteration))),
        ("6 bessel multiplier exactness", Box::new(|| criterion_6(&corpus))),
        ("7 embedding chain", Box::new(|| criterion_7(&corpus))),
        ("8 solidity and isometry", Box::new(|| criterion_8(&corpus))),
        ("9 bernstein inequality", Box::new(|| criterion_9(&corpus))),
    ];
    let mut failed = 0;
    for (name, check) in criteria.iter() {
        let start = Instant::now();
        let out = check();
        failed += usize::from(!out.passed);
        println!(
            "criterion {name}: {} [{:.1}s] {}",
            if out.passed { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64(),
            out.summary
        );
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
