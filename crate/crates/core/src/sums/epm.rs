use num_complex::Complex64;
use serde::Serialize;

use super::{check_table, support, unit_roots, Kahan, KahanComplex, Method, Sign, SumError, SumParams, SumReport};
use crate::nt::{bump_weight, divisor_counts, TauTable};

struct Weighted {
    m: Vec<(u64, f64)>,
    n: Vec<(u64, f64)>,
    d: Vec<u32>,
}

/// `lambda(m) W(m/M)` and `W(n/N)` on their supports.
fn weighted(table: &TauTable, p: &SumParams) -> Result<Weighted, SumError> {
    check_table(table, p.m)?;
    let m = support(p.m)
        .map(|m| (m, table.lambda(m as usize) * bump_weight(m as f64 / p.m)))
        .filter(|&(_, w)| w != 0.0)
        .collect();
    let n: Vec<(u64, f64)> = support(p.n)
        .map(|n| (n, bump_weight(n as f64 / p.n)))
        .filter(|&(_, w)| w != 0.0)
        .collect();
    let d = divisor_counts(*support(p.n).end() as usize);
    Ok(Weighted { m, n, d })
}

/// Diagonal `m = n` terms that satisfy `m = ±n (mod q)`.
fn diagonal(w: &Weighted, p: &SumParams) -> Kahan {
    let on_diagonal = |m: u64| match p.sign {
        Sign::Plus => true,
        Sign::Minus => (2 * m) % p.q == 0,
    };
    w.m.iter()
        .filter(|&&(m, _)| on_diagonal(m) && m as f64 > p.n / 2.0 && (m as f64) < 2.0 * p.n)
        .map(|&(m, lw)| lw * w.d[m as usize] as f64 * bump_weight(m as f64 / p.n))
        .sum()
}

/// `E±(M, N)`: the off-diagonal congruence sum minus its expected value,
/// normalized by `sqrt(MN)`. The `n` sum is bucketed by residue mod `q`.
pub fn e_pm(table: &TauTable, p: &SumParams) -> Result<SumReport, SumError> {
    let w = weighted(table, p)?;
    let q = p.q as usize;
    let mut buckets = vec![Kahan::default(); q];
    let mut counts = vec![0u64; q];
    let mut n_total = Kahan::default();
    for &(n, wn) in &w.n {
        let v = w.d[n as usize] as f64 * wn;
        buckets[n as usize % q].add(v);
        counts[n as usize % q] += 1;
        n_total.add(v);
    }
    let mut matched = Kahan::default();
    let mut m_total = Kahan::default();
    let mut pairs = 0u64;
    for &(m, lw) in &w.m {
        let r = p.sign.apply(m, p.q) as usize;
        matched.add(lw * buckets[r].value());
        m_total.add(lw);
        pairs += counts[r];
    }
    let diag = diagonal(&w, p);
    let diag_pairs = w
        .m
        .iter()
        .filter(|&&(m, _)| w.n.iter().any(|&(n, _)| n == m))
        .filter(|&&(m, _)| p.sign.apply(m, p.q) == m % p.q)
        .count() as u64;
    let s1 = matched.value() - diag.value();
    let s2 = m_total.value() * n_total.value() / p.q as f64;
    Ok(SumReport {
        value: (s1 - s2) / (p.m * p.n).sqrt(),
        terms: pairs - diag_pairs,
        method: Method::ResidueBuckets,
        error_estimate: None,
    })
}

/// `E±(M, N)` with the congruence written as `q^-1 sum_a e(a(m ∓ n)/q)`.
/// The `a = 0` character gives exactly the subtracted mean, so only the
/// diagonal is removed by hand.
pub fn e_pm_chardetect(table: &TauTable, p: &SumParams) -> Result<SumReport, SumError> {
    let w = weighted(table, p)?;
    let q = p.q;
    let roots = unit_roots(q);
    let mut total = KahanComplex::default();
    let mut a0 = 0.0;
    for a in 0..q {
        let mut sm = KahanComplex::default();
        for &(m, lw) in &w.m {
            sm.add(roots[(a * m % q) as usize] * lw);
        }
        let mut sn = KahanComplex::default();
        for &(n, wn) in &w.n {
            // e(∓ a n / q)
            let idx = p.sign.apply(q - a * n % q, q);
            sn.add(roots[idx as usize] * (w.d[n as usize] as f64 * wn));
        }
        let term: Complex64 = sm.value() * sn.value() / q as f64;
        if a == 0 {
            a0 = term.re;
        }
        total.add(term);
    }
    let s1_all = total.value().re;
    let diag = diagonal(&w, p).value();
    let s2 = a0;
    Ok(SumReport {
        value: (s1_all - diag - s2) / (p.m * p.n).sqrt(),
        terms: q * (w.m.len() + w.n.len()) as u64,
        method: Method::CharacterDetection,
        error_estimate: None,
    })
}

/// One point of the `scan e-bound` diagnostic: `|E±(M, N)|` beside the
/// trivial-bound shape `sqrt(MN)/q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EBoundRow {
    pub m: f64,
    pub n: f64,
    pub sign: Sign,
    pub value: f64,
    pub shape: f64,
}

/// `|E±|` on dyadic `M, N >= 2` with `MN <= total`, both signs.
pub fn e_bound_scan(table: &TauTable, q: u64, total: f64) -> Result<Vec<EBoundRow>, SumError> {
    let mut rows = Vec::new();
    let mut m = 2.0;
    while 2.0 * m <= total {
        let mut n = 2.0;
        while m * n <= total {
            for sign in [Sign::Plus, Sign::Minus] {
                let r = e_pm(table, &SumParams::new(q, sign, m, n)?)?;
                rows.push(EBoundRow { m, n, sign, value: r.value.abs(), shape: (m * n).sqrt() / q as f64 });
            }
            n *= 2.0;
        }
        m *= 2.0;
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nt::{divisor_count, tau_table};

    /// Literal double loop over the supports.
    fn brute(table: &TauTable, p: &SumParams) -> (f64, u64) {
        let (mut s1, mut s2, mut count) = (0.0, 0.0, 0);
        for m in 1..=(4 * p.m as u64 + 4) {
            for n in 1..=(4 * p.n as u64 + 4) {
                let t = table.lambda(m as usize)
                    * divisor_count(n) as f64
                    * bump_weight(m as f64 / p.m)
                    * bump_weight(n as f64 / p.n);
                let congruent = match p.sign {
                    Sign::Plus => (m + p.q * n - n) % p.q == 0,
                    Sign::Minus => (m + n) % p.q == 0,
                };
                if congruent && m != n {
                    s1 += t;
                    if t != 0.0 {
                        count += 1;
                    }
                }
                s2 += t;
            }
        }
        ((s1 - s2 / p.q as f64) / (p.m * p.n).sqrt(), count)
    }

    #[test]
    fn matches_brute_force() {
        let t = tau_table(600);
        for (q, m, n) in [(5, 4.0, 4.0), (11, 8.0, 32.0), (7, 10.0, 3.0)] {
            for sign in [Sign::Plus, Sign::Minus] {
                let p = SumParams::new(q, sign, m, n).unwrap();
                let (value, count) = brute(&t, &p);
                let fast = e_pm(&t, &p).unwrap();
                let chars = e_pm_chardetect(&t, &p).unwrap();
                assert!((fast.value - value).abs() < 1e-12, "{p:?}: {} vs {value}", fast.value);
                assert!((chars.value - value).abs() < 1e-12, "{p:?}: {} vs {value}", chars.value);
                assert_eq!(fast.terms, count);
            }
        }
    }

    #[test]
    fn empty_support_gives_zero() {
        let t = tau_table(100);
        let p = SumParams::new(5, Sign::Plus, 0.4, 8.0).unwrap();
        let r = e_pm(&t, &p).unwrap();
        assert_eq!((r.value, r.terms), (0.0, 0));
        assert_eq!(e_pm_chardetect(&t, &p).unwrap().value, 0.0);
    }

    #[test]
    fn no_congruent_pairs_below_modulus() {
        // supports lie in [1, 7], so m + n = 0 mod 23 never happens
        let t = tau_table(100);
        let p = SumParams::new(23, Sign::Minus, 4.0, 4.0).unwrap();
        let fast = e_pm(&t, &p).unwrap();
        assert_eq!(fast.terms, 0);
        let w = weighted(&t, &p).unwrap();
        let lm: f64 = w.m.iter().map(|x| x.1).sum();
        let ln: f64 = w.n.iter().map(|&(n, wn)| w.d[n as usize] as f64 * wn).sum();
        let minus_s2 = -lm * ln / 23.0 / 16.0_f64.sqrt();
        assert!((fast.value - minus_s2).abs() < 1e-14);
        assert!((e_pm_chardetect(&t, &p).unwrap().value - minus_s2).abs() < 1e-14);
    }

    #[test]
    fn table_too_small() {
        let t = tau_table(10);
        let p = SumParams::new(5, Sign::Plus, 8.0, 4.0).unwrap();
        assert_eq!(e_pm(&t, &p).unwrap_err(), SumError::TableTooSmall { needed: 15, have: 10 });
    }

    #[test]
    fn e_bound_scan_covers_budget() {
        let t = tau_table(200);
        let rows = e_bound_scan(&t, 11, 64.0).unwrap();
        assert!(rows.iter().all(|r| r.m * r.n <= 64.0 && r.value.is_finite()));
        // (M, N) in {2,4,8,16,32} with MN <= 64, both signs
        assert_eq!(rows.len(), 2 * (5 + 4 + 3 + 2 + 1));
    }
}
