use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::Path;

use odd_core::approx::{approx_errors, approx_norms_from_errors, ApproxSpaceSpec};
use odd_core::bessel::{bessel_norm, embedding_check, hypersingular_norm, HypersingularQuadrature};
use odd_core::io::{read_dense_csv_file, read_matrix, write_approx_csv, write_matrix, write_multiplier_csv, write_plot_csv, write_report_csv};
use odd_core::lab::{decay_profile, generate, spectral_invariance_report, DecayKind, DecayModel, FitWindow};
use odd_core::smoothness::{AnyNorm, BesovMethod, BesovSpec, ModulusBesov, PhiLpBesov, SolidLpBesov};
use odd_core::verify::{run_suites, Suite, VerifyConfig};
use odd_core::{Complex64, Error, LatticeMatrix, MatrixNorm, NormSpec, Result};
use serde_json::{json, Value};

use crate::{ApproxArgs, BesovArgs, BesselArgs, Format, GenArgs, InputArgs, NormArgs, ProfileArgs, ReportArgs, VerifyArgs};

fn load(input: &InputArgs) -> Result<LatticeMatrix> {
    let path = &input.input;
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        read_dense_csv_file(path, input.csv_half_width)
    } else {
        if input.csv_half_width.is_some() {
            return Err(Error::InvalidParameter("--csv-W only applies to dense CSV input".into()));
        }
        read_matrix(path)
    }
}

fn print_json(v: &Value) -> Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, v)?;
    writeln!(out)?;
    Ok(())
}

fn resolved<T: serde::Serialize>(command: &str, args: &T, threads: usize) -> Result<Value> {
    Ok(json!({ "command": command, "args": serde_json::to_value(args)?, "threads": threads }))
}

pub fn gen(a: &GenArgs) -> Result<bool> {
    let kind: DecayKind = a.model.parse()?;
    let model = DecayModel::new(kind, a.r, a.c, a.seed)?;
    let m = generate(&model, a.dim, a.half_width)?;
    let echo = json!({
        "model": kind.to_string(),
        "r": model.r,
        "c": model.c,
        "seed": model.seed,
        "dim": a.dim,
        "W": a.half_width,
        "diagonals": m.num_diagonals(),
        "envelope": "c (1 + |m|_2)^-r",
    });
    match &a.out {
        Some(path) => {
            write_matrix(path, &m)?;
            print_json(&echo)?;
        }
        None => {
            println!("{}", odd_core::io::matrix_to_json(&m)?);
            eprintln!("{echo}");
        }
    }
    Ok(true)
}

enum Evaluator {
    Norm(AnyNorm),
    Approx(ApproxSpaceSpec),
}

fn evaluator(spec: &str) -> Result<Evaluator> {
    if spec.trim_start().starts_with("approx:") {
        Ok(Evaluator::Approx(spec.parse()?))
    } else {
        Ok(Evaluator::Norm(spec.parse()?))
    }
}

pub fn norm(a: &NormArgs) -> Result<bool> {
    // parse every spec before touching the matrix so bad specs fail fast
    let evals = a.spec.iter().map(|s| evaluator(s)).collect::<Result<Vec<_>>>()?;
    let m = load(&a.input)?;
    let rows: Vec<(String, f64)> = evals
        .iter()
        .map(|e| match e {
            Evaluator::Norm(n) => (n.to_string(), n.norm(&m)),
            Evaluator::Approx(s) => {
                let errors = approx_errors(&m, &s.base);
                (s.to_string(), approx_norms_from_errors(&errors, s.r, s.p).get(s.form))
            }
        })
        .collect();
    if let Some(v) = rows.iter().find(|(_, v)| !v.is_finite()) {
        return Err(Error::NonConvergence(format!("`{}` evaluated to {}", v.0, v.1)));
    }
    match a.format {
        None => {
            for (s, v) in &rows {
                println!("{s}\t{v}");
            }
        }
        Some(Format::Json) => print_json(&json!(rows
            .iter()
            .map(|(s, v)| json!({ "spec": s, "value": v }))
            .collect::<Vec<_>>()))?,
        Some(Format::Csv) => {
            let mut w = csv::Writer::from_writer(io::stdout().lock());
            w.write_record(["spec", "value"]).map_err(csv_err)?;
            for (s, v) in &rows {
                w.write_record([s.clone(), v.to_string()]).map_err(csv_err)?;
            }
            w.flush()?;
        }
    }
    Ok(true)
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(io::Error::other(e))
}

pub fn besov(a: &BesovArgs) -> Result<bool> {
    let spec: BesovSpec = a.spec.parse()?;
    let m = load(&a.input)?;
    let one = |_: &odd_core::LatticeIndex| Complex64::new(1.0, 0.0);
    let base = spec.base();
    let (label, sequence): (&str, Vec<(i64, f64)>) = match spec.method() {
        BesovMethod::ModulusDyadic { levels, grid } => {
            let ev = ModulusBesov::new(base, spec.r(), spec.p())
                .with_order(spec.order())
                .with_levels(*levels)
                .with_grid(*grid);
            let seq = ev.dyadic_moduli(&m, &one).into_iter().map(|(l, w)| (l as i64, w)).collect();
            ("level", seq)
        }
        BesovMethod::SolidLp => {
            let ev = SolidLpBesov { base, r: spec.r(), p: spec.p() };
            ("block", ev.weighted_blocks(&m, &one).into_iter().map(|(k, v)| (k as i64, v)).collect())
        }
        BesovMethod::PhiLp => {
            let ev = PhiLpBesov { base, r: spec.r(), p: spec.p(), partition: None };
            ("block", ev.weighted_blocks(&m, &one).into_iter().map(|(k, v)| (k as i64, v)).collect())
        }
    };
    let value = spec.norm(&m);
    match a.format {
        Format::Json => print_json(&json!({
            "spec": spec.to_string(),
            "W": m.half_width(),
            "value": value,
            "index": label,
            "sequence": sequence,
        }))?,
        Format::Csv => {
            let mut w = csv::Writer::from_writer(io::stdout().lock());
            w.write_record(["spec", label, "weighted"]).map_err(csv_err)?;
            for (k, v) in &sequence {
                w.write_record([spec.to_string(), k.to_string(), v.to_string()]).map_err(csv_err)?;
            }
            w.flush()?;
        }
    }
    Ok(true)
}

pub fn approx(a: &ApproxArgs) -> Result<bool> {
    let base: NormSpec = a.base.parse()?;
    let spaces = a.space.iter().map(|s| s.parse::<ApproxSpaceSpec>()).collect::<Result<Vec<_>>>()?;
    if let Some(s) = spaces.iter().find(|s| s.base != base) {
        return Err(Error::InvalidParameter(format!("space `{s}` does not use base `{base}`")));
    }
    let m = load(&a.input)?;
    let errors = approx_errors(&m, &base);
    match a.format {
        Format::Json => {
            let norms: Vec<Value> = spaces
                .iter()
                .map(|s| {
                    let n = approx_norms_from_errors(&errors, s.r, s.p);
                    json!({ "spec": s.to_string(), "value": n.get(s.form), "integral_sum": n.integral_sum, "dyadic": n.dyadic })
                })
                .collect();
            print_json(&json!({ "base": base.to_string(), "W": m.half_width(), "errors": errors, "spaces": norms }))?;
        }
        Format::Csv => write_approx_csv(io::stdout().lock(), m.half_width(), &base.to_string(), &errors)?,
    }
    Ok(true)
}

pub fn bessel(a: &BesselArgs) -> Result<bool> {
    let base: NormSpec = a.base.parse()?;
    let m = load(&a.input)?;
    let value = bessel_norm(&m, a.r, &base)?;
    let mut out = json!({ "base": base.to_string(), "r": a.r, "W": m.half_width(), "bessel": value });
    let quad = || HypersingularQuadrature::new(m.dim(), a.r).map(|q| q.with_levels(a.levels));
    if a.embedding {
        let q = if a.r > 0.0 && a.r < 2.0 { Some(quad()?) } else { None };
        out["embedding"] = serde_json::to_value(embedding_check(&m, a.r, &base, q.as_ref())?)?;
        if let Some(q) = &q {
            out["hypersingular"] = serde_json::to_value(hypersingular_norm(&m, &base, q)?)?;
        }
    }
    if let Some(path) = &a.multipliers {
        let rows = quad()?.multiplier_table(&m, a.levels)?;
        write_multiplier_csv(BufWriter::new(File::create(path)?), &rows)?;
        out["multipliers"] = json!(path);
    }
    print_json(&out)?;
    Ok(true)
}

pub fn profile(a: &ProfileArgs) -> Result<bool> {
    let m = load(&a.input)?;
    let window = match (a.lo, a.hi) {
        (None, None) => None,
        (lo, hi) => {
            let d = FitWindow::for_half_width(m.half_width());
            Some(FitWindow { lo: lo.unwrap_or(d.lo), hi: hi.unwrap_or(d.hi) })
        }
    };
    let p = decay_profile(&m, window)?;
    match a.format {
        Format::Json => print_json(&json!({ "W": m.half_width(), "profile": p }))?,
        Format::Csv => {
            let name = a.input.input.display().to_string();
            write_plot_csv(io::stdout().lock(), &[(name, m.half_width(), &p)])?;
        }
    }
    Ok(true)
}

pub fn verify(a: &VerifyArgs, threads: usize) -> Result<bool> {
    let cfg = VerifyConfig { seed: a.seed, corpus_size: a.corpus, half_width: a.half_width, dim: a.dim };
    cfg.validate()?;
    let suites = if a.suite.is_empty() { Suite::ALL.to_vec() } else { a.suite.clone() };
    let reports = run_suites(cfg, &suites)?;
    let passed = reports.iter().all(|r| r.passed);
    for r in &reports {
        let headline: Vec<String> = r
            .stats
            .iter()
            .filter(|(k, _)| k.starts_with("max") || k.ends_with(":C") || k.ends_with(":drift"))
            .take(4)
            .map(|(k, v)| format!("{k}={v:.3e}"))
            .collect();
        eprintln!("{}: {} {}", r.suite, if r.passed { "pass" } else { "FAIL" }, headline.join(" "));
    }
    let doc = json!({
        "seed": a.seed,
        "config": resolved("verify", a, threads)?,
        "passed": passed,
        "suites": reports,
    });
    match &a.out {
        Some(path) => fs::write(path, serde_json::to_string_pretty(&doc)?)?,
        None => print_json(&doc)?,
    }
    Ok(passed)
}

pub fn report(a: &ReportArgs, threads: usize) -> Result<bool> {
    let kind: DecayKind = a.model.parse()?;
    let model = DecayModel::new(kind, a.r, a.c, a.seed)?;
    let specs: Vec<String> = if a.norm.is_empty() {
        vec![format!("jaffard:r={}", a.r), "op".into()]
    } else {
        a.norm.clone()
    };
    let norms = specs.iter().map(|s| s.parse::<AnyNorm>()).collect::<Result<Vec<_>>>()?;
    let rep = spectral_invariance_report(&model, a.dim, &a.half_widths, a.lambda, &norms)?;
    let doc = json!({
        "seed": a.seed,
        "config": resolved("report", a, threads)?,
        "report": rep,
    });
    write_dir(&a.out_dir, &doc, &rep)?;
    match a.format {
        Format::Json => print_json(&doc)?,
        Format::Csv => write_report_csv(io::stdout().lock(), std::slice::from_ref(&rep))?,
    }
    Ok(true)
}

fn write_dir(dir: &Path, doc: &Value, rep: &odd_core::lab::InvarianceReport) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("report.json"), serde_json::to_string_pretty(doc)?)?;
    write_report_csv(BufWriter::new(File::create(dir.join("report.csv"))?), std::slice::from_ref(rep))?;
    let profiles: Vec<(String, usize, &odd_core::lab::DecayProfile)> = rep
        .cells
        .iter()
        .flat_map(|c| [("B".to_string(), c.half_width, &c.profile_b), ("Binv".to_string(), c.half_width, &c.profile_b_inv)])
        .collect();
    write_plot_csv(BufWriter::new(File::create(dir.join("plot.csv"))?), &profiles)?;
    Ok(())
}
