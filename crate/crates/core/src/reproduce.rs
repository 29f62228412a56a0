//! The end-to-end acceptance battery behind `exlab reproduce`.
//!
//! Each criterion yields one pass/fail row with human-readable details. Rows
//! carry no timings in their serialized form, so two runs with the same seed
//! serialize identically.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::expr::{parse_program, parse_witness, AffineExpr, BoundExpr, Program};
use crate::nt::{divisor_counts, primes_up_to, tau_table, weil_scan, TauTable};
use crate::optimize::{certify, maximin_optimize, OptimizeResult};
use crate::rational::rat;
use crate::sums::{
    c_pm, c_pm_poisson, e_pm, e_pm_chardetect, wilton_grid, wilton_scan, Sign, SumError, SumParams,
};

pub const DEFAULT_SEED: u64 = 1729;

/// Threshold for `R(2^14) / R(2^7)`, from the committed pilot run (0.95).
pub const WILTON_RATIO_THRESHOLD: f64 = 2.5;

/// The twelve-point Poisson grid: `q`, then `(N1, N2, M)`.
pub const POISSON_MODULI: [u64; 2] = [53, 101];
pub const POISSON_SCALES: [(f64, f64, f64); 3] = [(8.0, 16.0, 32.0), (4.0, 64.0, 16.0), (16.0, 16.0, 8.0)];
pub const POISSON_TAIL: f64 = 1e-8;

/// The twenty-tuple oracle grid: ten `(q, M, N)` choices, each with both signs.
pub const ORACLE_GRID: [(u64, f64, f64); 10] = [
    (5, 4.0, 4.0),
    (5, 8.0, 32.0),
    (5, 128.0, 4.0),
    (11, 8.0, 32.0),
    (11, 32.0, 8.0),
    (11, 128.0, 128.0),
    (23, 4.0, 8.0),
    (23, 32.0, 8.0),
    (23, 128.0, 32.0),
    (23, 8.0, 128.0),
];
pub const ORACLE_RELATIVE_TOL: f64 = 1e-12;

/// Bundled program, its witness file, the expected optimum and the decay
/// exponent `eta` it certifies (`eta = -optimum`).
pub struct ProgramCase {
    pub label: &'static str,
    pub program: &'static str,
    pub witness: &'static str,
    pub optimum: (i64, i64),
    pub eta: (i64, i64),
    pub mutated: bool,
}

pub const CASES: [ProgramCase; 3] = [
    ProgramCase {
        label: "maass",
        program: "in1_maass.opt",
        witness: "out1_maass.witness",
        optimum: (-5, 152),
        eta: (5, 152),
        mutated: true,
    },
    ProgramCase {
        label: "holomorphic",
        program: "in2_holomorphic.opt",
        witness: "out2_holomorphic.witness",
        optimum: (-1, 22),
        eta: (1, 22),
        mutated: true,
    },
    ProgramCase {
        label: "n>=m",
        program: "in3_ngeqm.opt",
        witness: "out3_ngeqm.witness",
        optimum: (-1, 20),
        eta: (1, 20),
        mutated: false,
    },
];

#[derive(Debug, Clone)]
pub struct ReproduceConfig {
    pub programs: PathBuf,
    pub seed: u64,
}

impl Default for ReproduceConfig {
    fn default() -> Self {
        ReproduceConfig { programs: PathBuf::from("programs"), seed: DEFAULT_SEED }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CriterionResult {
    pub id: String,
    pub title: String,
    pub passed: bool,
    pub details: Vec<String>,
    #[serde(skip)]
    pub elapsed: Duration,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReproduceReport {
    pub seed: u64,
    pub passed: bool,
    pub criteria: Vec<CriterionResult>,
}

struct Row {
    passed: bool,
    details: Vec<String>,
}

impl Row {
    fn new() -> Self {
        Row { passed: true, details: Vec::new() }
    }

    fn check(&mut self, ok: bool, detail: String) {
        self.passed &= ok;
        self.details.push(format!("{} {detail}", if ok { "ok:" } else { "FAIL:" }));
    }
}

fn timed(id: &str, title: &str, budget: Duration, f: impl FnOnce() -> Row) -> CriterionResult {
    let start = Instant::now();
    let mut row = f();
    let elapsed = start.elapsed();
    if elapsed > budget {
        row.check(false, format!("took {elapsed:.1?}, budget {budget:.0?}"));
    }
    CriterionResult { id: id.into(), title: title.into(), passed: row.passed, details: row.details, elapsed }
}

fn load_program(dir: &Path, name: &str) -> Result<Program, String> {
    let path = dir.join(name);
    let text = fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_program(&text).map_err(|e| format!("{}: {e}", path.display()))
}

/// The bound `(n1 - n2)/2`.
pub fn new_bound() -> BoundExpr {
    BoundExpr::Affine(AffineExpr::term("n1", rat(1, 2)).sub(&AffineExpr::term("n2", rat(1, 2))))
}

/// Removes the `(n1 - n2)/2` bound, if present.
pub fn without_new_bound(program: &Program) -> Option<Program> {
    let target = new_bound();
    let index = program.bounds().iter().position(|b| *b == target)?;
    program.without_bound(index)
}

type Solved = Result<(Program, OptimizeResult), String>;

fn solve(dir: &Path, case: &ProgramCase) -> (Solved, Duration) {
    let start = Instant::now();
    let solved = load_program(dir, case.program)
        .and_then(|p| maximin_optimize(&p).map(|r| (p, r)).map_err(|e| format!("{}: {e}", case.program)));
    (solved, start.elapsed())
}

fn optimizer_rows(dir: &Path) -> Vec<CriterionResult> {
    let start = Instant::now();
    let solved: Vec<(Solved, Duration)> = CASES.iter().map(|c| solve(dir, c)).collect();
    let solve_time = start.elapsed();

    let mut exact = Row::new();
    for (case, (s, t)) in CASES.iter().zip(&solved) {
        let expected = rat(case.optimum.0, case.optimum.1);
        match s {
            Ok((_, r)) => {
                exact.check(
                    r.optimum == expected && r.attained,
                    format!("{}: optimum {} (expected {expected}, attained {})", case.program, r.optimum, r.attained),
                );
                if *t >= Duration::from_secs(60) {
                    exact.check(false, format!("{}: took {t:.1?}, budget 60s", case.program));
                }
            }
            Err(e) => exact.check(false, e.clone()),
        }
    }
    let c1 = CriterionResult {
        id: "1".into(),
        title: "exact optimizer reproduction".into(),
        passed: exact.passed,
        details: exact.details,
        elapsed: solve_time,
    };

    let c2 = timed("2", "witness certification", Duration::from_secs(60), || {
        let mut row = Row::new();
        for (case, (s, _)) in CASES.iter().zip(&solved) {
            let Ok((program, _)) = s else {
                row.check(false, format!("{}: program unavailable", case.program));
                continue;
            };
            let path = dir.join(case.witness);
            let witness = match fs::read_to_string(&path) {
                Ok(text) => parse_witness(&text).map_err(|e| format!("{}: {e}", path.display())),
                Err(e) => Err(format!("{}: {e}", path.display())),
            };
            let witness = match witness {
                Ok(w) => w,
                Err(e) => {
                    row.check(false, e);
                    continue;
                }
            };
            let claimed = witness.claimed.clone().unwrap_or_else(|| rat(case.optimum.0, case.optimum.1));
            match certify(program, &claimed, &witness.point) {
                Ok(cert) => {
                    let inferred = if witness.inferred.is_empty() {
                        String::new()
                    } else {
                        format!(" (inferred: {})", witness.inferred.join(", "))
                    };
                    row.check(
                        cert.feasible && cert.attains && claimed == rat(case.optimum.0, case.optimum.1),
                        format!(
                            "{}: feasible {}, value {}, claimed {}{inferred}",
                            case.witness, cert.feasible, cert.value, cert.claimed
                        ),
                    );
                }
                Err(e) => row.check(false, format!("{}: {e}", case.witness)),
            }
        }
        row
    });

    let c3 = timed("3", "consistency of decay exponents", Duration::from_secs(1), || {
        let mut row = Row::new();
        for (case, (s, _)) in CASES.iter().zip(&solved) {
            let eta = rat(case.eta.0, case.eta.1);
            match s {
                Ok((_, r)) => {
                    let negated = -r.optimum.clone();
                    row.check(negated == eta, format!("{}: -optimum = {negated}, eta = {eta}", case.label));
                }
                Err(e) => row.check(false, e.clone()),
            }
        }
        row
    });

    let c4 = timed("4", "mutation sensitivity of (n1 - n2)/2", Duration::from_secs(120), || {
        let mut row = Row::new();
        for (case, (s, _)) in CASES.iter().zip(&solved).filter(|(c, _)| c.mutated) {
            let Ok((program, r)) = s else {
                row.check(false, format!("{}: program unavailable", case.program));
                continue;
            };
            let Some(mutated) = without_new_bound(program) else {
                row.check(false, format!("{}: bound (n1 - n2)/2 not found", case.program));
                continue;
            };
            match maximin_optimize(&mutated) {
                Ok(m) => row.check(
                    m.optimum > r.optimum,
                    format!("{}: without bound {}, with bound {}", case.program, m.optimum, r.optimum),
                ),
                Err(e) => row.check(false, format!("{}: {e}", case.program)),
            }
        }
        row
    });
    vec![c1, c2, c3, c4]
}

fn poisson_check(row: &mut Row, table: &TauTable, p: &SumParams) -> Result<(), SumError> {
    let direct = c_pm(table, p)?.value;
    let poisson = c_pm_poisson(table, p, None, POISSON_TAIL)?;
    let diff = (direct - poisson.report.value).abs();
    let tol = 1e-6f64.max(1e-6 * direct.abs());
    let (n1, n2) = (p.n1.unwrap_or(0.0), p.n2.unwrap_or(0.0));
    row.check(
        diff <= tol && poisson.tail < POISSON_TAIL,
        format!(
            "q={} N1={n1} N2={n2} M={} {}: |diff| = {diff:.2e}, K = {}, tail = {:.2e}",
            p.q,
            p.m,
            p.sign.symbol(),
            poisson.k_cut,
            poisson.tail
        ),
    );
    Ok(())
}

fn oracle_check(row: &mut Row, table: &TauTable, p: &SumParams) -> Result<(), SumError> {
    let a = e_pm(table, p)?.value;
    let b = e_pm_chardetect(table, p)?.value;
    let rel = if a == b { 0.0 } else { (a - b).abs() / a.abs().max(b.abs()) };
    row.check(
        rel <= ORACLE_RELATIVE_TOL,
        format!("q={} M={} N={} {}: E = {a:.6e}, relative diff {rel:.1e}", p.q, p.m, p.n, p.sign.symbol()),
    );
    Ok(())
}

fn record(row: &mut Row, outcome: Result<(), SumError>) {
    if let Err(e) = outcome {
        row.check(false, e.to_string());
    }
}

/// Coefficients of `q prod_{n < N} (1 - q^n)^24` up to `q^N`, by repeated
/// multiplication with each factor.
fn tau_by_product(n_max: usize) -> Vec<BigInt> {
    let mut poly = vec![BigInt::zero(); n_max];
    poly[0] = BigInt::from(1);
    for n in 1..n_max {
        for _ in 0..24 {
            for k in (n..n_max).rev() {
                let lower = poly[k - n].clone();
                poly[k] -= lower;
            }
        }
    }
    // shift by the leading q
    std::iter::once(BigInt::zero()).chain(poly).collect()
}

fn number_theory_row(table: &TauTable) -> Row {
    let mut row = Row::new();
    let n_max = 10_000;
    let oracle = tau_by_product(500);
    let mismatch = (1..=500).find(|&n| table.tau(n) != &oracle[n]);
    row.check(mismatch.is_none(), format!("tau(n) = product expansion for n <= 500 (first mismatch {mismatch:?})"));

    let mut worst: f64 = 0.0;
    for m in 2..=n_max / 2 {
        for n in 2..=n_max / m {
            worst = worst.max(table.hecke_residual(m, n).abs());
        }
    }
    row.check(worst <= 1e-10, format!("Hecke relation for mn <= {n_max}: max residual {worst:.1e}"));

    let d = divisor_counts(n_max);
    let deligne = (1..=n_max).filter(|&n| table.lambda(n).abs() > d[n] as f64).count();
    row.check(deligne == 0, format!("|lambda(n)| <= d(n) for n <= {n_max}: {deligne} violations"));

    let mut weil_ratio: f64 = 0.0;
    let mut max_imag: f64 = 0.0;
    let primes: Vec<u64> = primes_up_to(499).into_iter().filter(|&q| q > 2).collect();
    for &q in &primes {
        let scan = weil_scan(q).expect("odd prime");
        weil_ratio = weil_ratio.max(scan.max_abs / (2.0 * (q as f64).sqrt()));
        max_imag = max_imag.max(scan.max_imag);
    }
    row.check(
        weil_ratio <= 1.0 + 1e-12 && max_imag <= 1e-9,
        format!(
            "Weil bound over {} primes q <= 499: max |S|/(2 sqrt q) = {weil_ratio:.6}, max |Im S| = {max_imag:.1e}",
            primes.len()
        ),
    );
    row
}

fn spot_row(table: &TauTable, seed: u64) -> Row {
    let mut row = Row::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let primes: Vec<u64> = primes_up_to(101).into_iter().filter(|&q| q >= 11).collect();
    let scales = [2.0, 4.0, 8.0, 16.0, 32.0];
    let sign = |rng: &mut ChaCha8Rng| if rng.gen_bool(0.5) { Sign::Plus } else { Sign::Minus };
    for _ in 0..4 {
        let q = primes[rng.gen_range(0..primes.len())];
        let mut n1 = scales[rng.gen_range(0..scales.len())];
        let mut n2 = scales[rng.gen_range(0..scales.len())];
        if n1 > n2 {
            std::mem::swap(&mut n1, &mut n2);
        }
        let m = scales[rng.gen_range(0..scales.len())];
        let s = sign(&mut rng);
        let outcome = SumParams::factored(q, s, m, n1, n2).and_then(|p| poisson_check(&mut row, table, &p));
        record(&mut row, outcome);
    }
    for _ in 0..4 {
        let q = [5, 11, 23][rng.gen_range(0..3)];
        let m = scales[rng.gen_range(0..scales.len())] * 4.0;
        let n = scales[rng.gen_range(0..scales.len())] * 4.0;
        let s = sign(&mut rng);
        let outcome = SumParams::new(q, s, m, n).and_then(|p| oracle_check(&mut row, table, &p));
        record(&mut row, outcome);
    }
    row
}

pub fn reproduce(config: &ReproduceConfig) -> ReproduceReport {
    let mut criteria = optimizer_rows(&config.programs);
    let table = tau_table(1 << 14);

    criteria.push(timed("5", "Poisson identity", Duration::from_secs(300), || {
        let mut row = Row::new();
        for q in POISSON_MODULI {
            for (n1, n2, m) in POISSON_SCALES {
                for sign in [Sign::Plus, Sign::Minus] {
                    let outcome = SumParams::factored(q, sign, m, n1, n2).and_then(|p| poisson_check(&mut row, &table, &p));
                    record(&mut row, outcome);
                }
            }
        }
        row
    }));

    criteria.push(timed("6", "oracle equivalence", Duration::from_secs(60), || {
        let mut row = Row::new();
        for (q, m, n) in ORACLE_GRID {
            for sign in [Sign::Plus, Sign::Minus] {
                let outcome = SumParams::new(q, sign, m, n).and_then(|p| oracle_check(&mut row, &table, &p));
                record(&mut row, outcome);
            }
        }
        row
    }));

    criteria.push(timed("7", "number-theory invariants", Duration::from_secs(300), || number_theory_row(&table)));

    criteria.push(timed("8", "Wilton square-root cancellation", Duration::from_secs(60), || {
        let mut row = Row::new();
        match wilton_scan(&table, &[1 << 7, 1 << 14], &wilton_grid()) {
            Ok(rows) => {
                let ratio = rows[1].ratio / rows[0].ratio;
                row.check(
                    ratio <= WILTON_RATIO_THRESHOLD,
                    format!(
                        "R(2^7) = {:.4}, R(2^14) = {:.4}, ratio {ratio:.4} (threshold {WILTON_RATIO_THRESHOLD})",
                        rows[0].ratio, rows[1].ratio
                    ),
                );
            }
            Err(e) => row.check(false, e.to_string()),
        }
        row
    }));

    criteria.push(timed("spot", "seeded spot checks", Duration::from_secs(120), || spot_row(&table, config.seed)));

    let passed = criteria.iter().all(|c| c.passed);
    ReproduceReport { seed: config.seed, passed, criteria }
}

impl ReproduceReport {
    /// One `PASS`/`FAIL` line per criterion, then the failing details.
    pub fn table(&self) -> String {
        let mut out = String::new();
        for c in &self.criteria {
            let status = if c.passed { "PASS" } else { "FAIL" };
            out.push_str(&format!("{status}  {:>4}  {:<38} {:>8.2?}\n", c.id, c.title, c.elapsed));
            if !c.passed {
                for d in c.details.iter().filter(|d| d.starts_with("FAIL")) {
                    out.push_str(&format!("            {d}\n"));
                }
            }
        }
        out.push_str(&format!("seed {}: {}\n", self.seed, if self.passed { "all criteria pass" } else { "FAILED" }));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_expansion_small_coefficients() {
        let t = tau_by_product(8);
        let expected = [0i64, 1, -24, 252, -1472, 4830, -6048, -16744, 84480];
        for (n, e) in expected.iter().enumerate() {
            assert_eq!(t[n], BigInt::from(*e), "n = {n}");
        }
    }

    #[test]
    fn new_bound_is_located() {
        let p = parse_program("vars n1 n2\nconstraint 0 <= n1\nconstraint n1 <= n2\nconstraint n2 <= 1\nbound n1\nbound (n1 - n2)/2\n").unwrap();
        let m = without_new_bound(&p).unwrap();
        assert_eq!(m.bounds().len(), 1);
        assert!(without_new_bound(&m).is_none());
    }

    #[test]
    fn spot_checks_are_seeded() {
        let table = tau_table(300);
        let a = spot_row(&table, 7).details;
        let b = spot_row(&table, 7).details;
        assert_eq!(a, b);
        assert_ne!(a, spot_row(&table, 8).details);
    }
}
