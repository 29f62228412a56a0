//! Subcommand implementations. Each returns text, a JSON value and a verdict.

use std::fs;
use std::path::Path;

use exlab_core::expr::{parse_program, parse_witness, Point, Program, Witness};
use exlab_core::nt::{bump_fourier, bump_weight, kloosterman, tau_table, TauTable};
use exlab_core::optimize::{certify, maximin_optimize};
use exlab_core::rational::{decimal_string, to_f64, Rational};
use exlab_core::reproduce::{reproduce, ReproduceConfig, ORACLE_RELATIVE_TOL};
use exlab_core::sums::{
    c_pm, c_pm_poisson, e_bound_scan, e_pm, e_pm_chardetect, support, wilton_grid, wilton_scan, SumParams,
};
use serde_json::{json, Value};

use crate::{Command, ScanCommand};

/// Relative allowance for rounding on top of the Poisson tail bound.
const POISSON_ROUNDING: f64 = 1e-8;

const DIGITS: usize = 7;

pub struct Outcome {
    pub text: String,
    pub json: Value,
    pub passed: bool,
    pub warnings: Vec<String>,
}

impl Outcome {
    fn ok(text: String, json: Value) -> Self {
        Outcome { text, json, passed: true, warnings: Vec::new() }
    }
}

pub fn run(command: &Command) -> Result<Outcome, String> {
    match command {
        Command::Optimize { file, witness, branches } => optimize(file, *witness, *branches),
        Command::Certify { program, witness } => certify_witness(program, witness),
        Command::Tau { n } => tau(*n),
        Command::Lambda { n } => lambda(*n),
        Command::Kloosterman { m, n, q } => {
            let value = kloosterman(*m, *n, *q).map_err(|e| e.to_string())?;
            Ok(Outcome::ok(
                format!("S({m}, {n}; {q}) = {value}\n"),
                json!({ "m": m, "n": n, "q": q, "value": value }),
            ))
        }
        Command::Weight { x } => {
            let value = bump_weight(*x);
            Ok(Outcome::ok(format!("W({x}) = {value}\n"), json!({ "x": x, "value": value })))
        }
        Command::WeightFourier { y, tol } => weight_fourier(*y, *tol),
        Command::VerifyEpm { modulus, m, n } => {
            let p = SumParams::new(modulus.q, modulus.sign, *m, *n).map_err(|e| e.to_string())?;
            verify_epm(&p)
        }
        Command::VerifyPoisson { modulus, n1, n2, m, kcut, tol } => {
            let p = SumParams::factored(modulus.q, modulus.sign, *m, *n1, *n2).map_err(|e| e.to_string())?;
            verify_poisson(&p, *kcut, *tol)
        }
        Command::Wilton { nmax, grid } => wilton(*nmax, grid),
        Command::Scan(ScanCommand::EBound { q, total }) => scan_e_bound(*q, *total),
        Command::Reproduce(args) => {
            if !args.programs.is_dir() {
                return Err(format!("{}: no such directory", args.programs.display()));
            }
            let report = reproduce(&ReproduceConfig { programs: args.programs.clone(), seed: args.seed });
            Ok(Outcome {
                text: report.table(),
                json: serde_json::to_value(&report).map_err(|e| e.to_string())?,
                passed: report.passed,
                warnings: Vec::new(),
            })
        }
    }
}

fn read(path: &Path) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn load_program(path: &Path) -> Result<Program, String> {
    parse_program(&read(path)?).map_err(|e| format!("{}: {e}", path.display()))
}

fn load_witness(path: &Path) -> Result<Witness, String> {
    parse_witness(&read(path)?).map_err(|e| format!("{}: {e}", path.display()))
}

fn rational_json(value: &Rational) -> Value {
    json!(value.to_string())
}

fn point_json(point: &Point) -> Value {
    point.iter().map(|(k, v)| (k.clone(), rational_json(v))).collect::<serde_json::Map<_, _>>().into()
}

fn point_text(point: &Point) -> String {
    point.iter().map(|(k, v)| format!("  {k} = {v}\n")).collect()
}

fn optimize(file: &Path, show_witness: bool, show_branches: bool) -> Result<Outcome, String> {
    let program = load_program(file)?;
    let r = match maximin_optimize(&program) {
        Ok(r) => r,
        Err(e) => {
            return Ok(Outcome {
                text: format!("optimization failed: {e}\n"),
                json: json!({ "error": e.to_string() }),
                passed: false,
                warnings: Vec::new(),
            })
        }
    };
    let mut text = format!("optimum = {} ({})\n", r.optimum, decimal_string(&r.optimum, DIGITS));
    if !r.attained {
        text.push_str("supremum not attained\n");
    }
    if show_witness {
        text.push_str("witness:\n");
        text.push_str(&point_text(&r.witness));
    }
    if show_branches {
        text.push_str(&format!(
            "branches: {} total, {} solved, {} infeasible\n",
            r.branches_total, r.branches_solved, r.branches_infeasible
        ));
    }
    let json = json!({
        "optimum": rational_json(&r.optimum),
        "optimum_decimal": to_f64(&r.optimum),
        "attained": r.attained,
        "witness": point_json(&r.witness),
        "branches_total": r.branches_total.to_string(),
        "branches_solved": r.branches_solved,
        "branches_infeasible": r.branches_infeasible.to_string(),
    });
    Ok(Outcome { text, json, passed: true, warnings: r.warnings })
}

fn certify_witness(program_path: &Path, witness_path: &Path) -> Result<Outcome, String> {
    let program = load_program(program_path)?;
    let witness = load_witness(witness_path)?;
    let claimed = match &witness.claimed {
        Some(c) => c.clone(),
        None => maximin_optimize(&program).map_err(|e| e.to_string())?.optimum,
    };
    let c = certify(&program, &claimed, &witness.point).map_err(|e| format!("{}: {e}", witness_path.display()))?;
    let passed = c.feasible && c.attains;
    let mut text = format!(
        "value = {} ({}), claimed = {}\nfeasible: {}\nattains claim: {}\n",
        c.value,
        decimal_string(&c.value, DIGITS),
        c.claimed,
        c.feasible,
        c.attains
    );
    for &i in &c.violated {
        text.push_str(&format!("violated: {}\n", program.constraints()[i]));
    }
    let json = json!({
        "value": rational_json(&c.value),
        "value_decimal": to_f64(&c.value),
        "claimed": rational_json(&c.claimed),
        "feasible": c.feasible,
        "attains": c.attains,
        "violated": c.violated.iter().map(|&i| program.constraints()[i].to_string()).collect::<Vec<_>>(),
        "inferred": witness.inferred,
    });
    Ok(Outcome { text, json, passed, warnings: Vec::new() })
}

fn table_for(n: usize) -> Result<TauTable, String> {
    if n == 0 {
        return Err("n must be at least 1".into());
    }
    Ok(tau_table(n))
}

fn tau(n: usize) -> Result<Outcome, String> {
    let value = table_for(n)?.tau(n).to_string();
    Ok(Outcome::ok(format!("tau({n}) = {value}\n"), json!({ "n": n, "tau": value })))
}

fn lambda(n: usize) -> Result<Outcome, String> {
    let value = table_for(n)?.lambda(n);
    Ok(Outcome::ok(format!("lambda({n}) = {value}\n"), json!({ "n": n, "lambda": value })))
}

fn weight_fourier(y: f64, tol: f64) -> Result<Outcome, String> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(format!("tolerance must be positive, got {tol}"));
    }
    match bump_fourier(y, tol) {
        Ok(z) => Ok(Outcome::ok(
            format!("Fourier W({y}) = {:.15e} {} {:.15e}i\n", z.re, if z.im < 0.0 { '-' } else { '+' }, z.im.abs()),
            json!({ "y": y, "tol": tol, "re": z.re, "im": z.im }),
        )),
        Err(e) => Ok(Outcome {
            text: format!("{e}\n"),
            json: json!({ "y": y, "tol": tol, "error": e.to_string() }),
            passed: false,
            warnings: Vec::new(),
        }),
    }
}

fn sum_table(scale: f64) -> TauTable {
    tau_table((*support(scale).end() as usize).max(1))
}

fn verify_epm(p: &SumParams) -> Result<Outcome, String> {
    let table = sum_table(p.m);
    let buckets = e_pm(&table, p).map_err(|e| e.to_string())?;
    let detect = e_pm_chardetect(&table, p).map_err(|e| e.to_string())?;
    let (a, b) = (buckets.value, detect.value);
    let rel = if a == b { 0.0 } else { (a - b).abs() / a.abs().max(b.abs()) };
    let passed = rel <= ORACLE_RELATIVE_TOL;
    let text = format!(
        "E{}(M={}, N={}; q={})\nresidue buckets      = {a:.15e} ({} terms)\ncharacter detection  = {b:.15e}\nrelative difference  = {rel:.2e} ({})\n",
        p.sign.symbol(),
        p.m,
        p.n,
        p.q,
        buckets.terms,
        if passed { "PASS" } else { "FAIL" }
    );
    let json = json!({
        "params": p,
        "residue_buckets": buckets,
        "character_detection": detect,
        "relative_difference": rel,
        "tolerance": ORACLE_RELATIVE_TOL,
        "passed": passed,
    });
    Ok(Outcome { text, json, passed, warnings: Vec::new() })
}

fn verify_poisson(p: &SumParams, kcut: Option<u64>, tol: f64) -> Result<Outcome, String> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(format!("tolerance must be positive, got {tol}"));
    }
    let table = sum_table(p.m);
    let direct = c_pm(&table, p).map_err(|e| e.to_string())?;
    let poisson = c_pm_poisson(&table, p, kcut, tol).map_err(|e| e.to_string())?;
    let diff = (direct.value - poisson.report.value).abs();
    let allowed = poisson.tail + POISSON_ROUNDING * direct.value.abs().max(1.0);
    let passed = diff <= allowed;
    let text = format!(
        "C{}(N1={}, N2={}, M={}; q={})\ndirect     = {:.15e} ({} terms)\npoisson    = {:.15e} (K = {})\n  main {:.6e}, zero frequency {:.6e}, degenerate {:.6e}\ntail bound = {:.2e}\n|diff|     = {diff:.2e} ({})\n",
        p.sign.symbol(),
        p.n1.unwrap_or_default(),
        p.n2.unwrap_or_default(),
        p.m,
        p.q,
        direct.value,
        direct.terms,
        poisson.report.value,
        poisson.k_cut,
        poisson.main,
        poisson.zero_frequency,
        poisson.degenerate,
        poisson.tail,
        if passed { "PASS" } else { "FAIL" }
    );
    let mut warnings = Vec::new();
    if poisson.tail_exceeds_tol {
        warnings.push(format!("tail bound {:.2e} exceeds tolerance {tol:.2e} at K = {}", poisson.tail, poisson.k_cut));
    }
    let json = json!({
        "params": p,
        "direct": direct,
        "poisson": poisson,
        "difference": diff,
        "allowed": allowed,
        "passed": passed,
    });
    Ok(Outcome { text, json, passed, warnings })
}

fn wilton(nmax: usize, grid_spec: &str) -> Result<Outcome, String> {
    if nmax < 2 {
        return Err("--nmax must be at least 2".into());
    }
    let grid = if grid_spec == "default" {
        wilton_grid()
    } else {
        match grid_spec.parse::<usize>() {
            Ok(g) if g >= 1 => (0..g).map(|j| j as f64 / g as f64).collect(),
            _ => return Err(format!("--grid must be `default` or a positive integer, got {grid_spec:?}")),
        }
    };
    let mut n_list: Vec<usize> = std::iter::successors(Some(2usize), |n| n.checked_mul(2))
        .take_while(|&n| n <= nmax)
        .collect();
    if n_list.last() != Some(&nmax) {
        n_list.push(nmax);
    }
    let table = tau_table(nmax);
    let rows = wilton_scan(&table, &n_list, &grid).map_err(|e| e.to_string())?;
    let mut text = format!("{} grid points\n{:>10}  {:>10}  {:>10}\n", grid.len(), "N", "R(N)", "argmax");
    for r in &rows {
        text.push_str(&format!("{:>10}  {:>10.6}  {:>10.6}\n", r.n, r.ratio, r.argmax));
    }
    Ok(Outcome::ok(text, json!({ "grid_points": grid.len(), "rows": rows })))
}

fn scan_e_bound(q: u64, total: f64) -> Result<Outcome, String> {
    if !(total.is_finite() && total >= 4.0) {
        return Err(format!("--total must be at least 4, got {total}"));
    }
    let table = sum_table(total / 2.0);
    let rows = e_bound_scan(&table, q, total).map_err(|e| e.to_string())?;
    let mut text = format!("{:>8}  {:>8}  {:>4}  {:>12}  {:>12}  {:>8}\n", "M", "N", "sign", "|E|", "sqrt(MN)/q", "ratio");
    for r in &rows {
        text.push_str(&format!(
            "{:>8}  {:>8}  {:>4}  {:>12.4e}  {:>12.4e}  {:>8.3}\n",
            r.m,
            r.n,
            r.sign.symbol(),
            r.value,
            r.shape,
            r.value / r.shape
        ));
    }
    Ok(Outcome::ok(text, json!({ "q": q, "total": total, "rows": rows })))
}
