use serde::Serialize;

use super::{check_table, support, unit_roots, Kahan, Method, SumError, SumParams, SumReport};
use crate::nt::{bump_weight, inverse_table, TauTable, TrapezoidTransform, DECAY_C4};

/// `(NM)^-1/2 sum_{n1 n2 = ±m (q)} lambda(m) W(n1/N1) W(n2/N2) W(m/M)`,
/// with the pairs `(n1, n2)` bucketed by `n1 n2 mod q`.
pub fn c_pm(table: &TauTable, p: &SumParams) -> Result<SumReport, SumError> {
    check_table(table, p.m)?;
    let (n1s, n2s) = p.factors();
    let q = p.q as usize;
    let mut buckets = vec![Kahan::default(); q];
    let mut counts = vec![0u64; q];
    for n1 in support(n1s) {
        let w1 = bump_weight(n1 as f64 / n1s);
        for n2 in support(n2s) {
            let r = (n1 * n2) as usize % q;
            buckets[r].add(w1 * bump_weight(n2 as f64 / n2s));
            counts[r] += 1;
        }
    }
    let mut acc = Kahan::default();
    let mut terms = 0;
    for m in support(p.m) {
        let r = p.sign.apply(m, p.q) as usize;
        acc.add(table.lambda(m as usize) * bump_weight(m as f64 / p.m) * buckets[r].value());
        terms += counts[r];
    }
    Ok(SumReport {
        value: acc.value() / (p.n * p.m).sqrt(),
        terms,
        method: Method::DirectTriple,
        error_estimate: None,
    })
}

/// Result of the Poisson-transformed evaluation of `C±`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PoissonReport {
    /// `value` is `main + degenerate`; `error_estimate` is the k-tail bound.
    pub report: SumReport,
    pub k_cut: u64,
    /// Terms with `q` not dividing `n1`.
    pub main: f64,
    /// Terms with `q | n1`.
    pub degenerate: f64,
    /// The `k = 0` part of `main`.
    pub zero_frequency: f64,
    pub tail: f64,
    pub tail_exceeds_tol: bool,
}

/// Prefactors multiplying the frequency sums, and the tail bound they give.
struct TailModel {
    main: f64,
    degenerate: f64,
    s: f64,
    n2: f64,
    q: u64,
}

impl TailModel {
    /// `sum_{|k| > K} C4 (1 + |k| s)^-4 <= 2 C4 / (3 s (1 + K s)^3)`, and the
    /// same over multiples of `q` for the degenerate piece.
    fn tail(&self, k: u64) -> f64 {
        let main = 2.0 * DECAY_C4 / (3.0 * self.s * (1.0 + k as f64 * self.s).powi(3));
        let j = (k / self.q + 1) as f64;
        let lead = 1.0 + j * self.n2;
        let degenerate = 2.0 * (DECAY_C4 / lead.powi(4) + DECAY_C4 / (3.0 * self.n2 * lead.powi(3)));
        self.main * main + self.degenerate * degenerate
    }

    /// Smallest cutoff whose tail bound is at most `tol`.
    fn cutoff(&self, tol: f64) -> u64 {
        let mut hi = 1u64;
        while self.tail(hi) > tol {
            hi *= 2;
        }
        let mut lo = hi / 2;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.tail(mid) > tol {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi.max(1)
    }
}

/// `C±` after Poisson summation in `n2` modulo `q`:
///
/// `N2/(q sqrt(NM)) sum_{q ∤ n1, m, |k| <= K} lambda(m) e(±m k n1^-1 / q) W(n1/N1) W^(k N2/q) W(m/M)`
///
/// plus the `q | n1` piece, where both character sums collapse and force
/// `q | m` and `q | k`. With `k_cut = None` the cutoff is the smallest one
/// whose tail bound, from the `C4` Fourier-decay envelope, is at most `tol`.
pub fn c_pm_poisson(
    table: &TauTable,
    p: &SumParams,
    k_cut: Option<u64>,
    tol: f64,
) -> Result<PoissonReport, SumError> {
    check_table(table, p.m)?;
    let (n1s, n2s) = p.factors();
    let q = p.q;
    let s = n2s / q as f64;
    let norm = (p.n * p.m).sqrt();

    let n1_terms: Vec<(u64, f64)> = support(n1s).map(|n| (n, bump_weight(n as f64 / n1s))).collect();
    let m_terms: Vec<(u64, f64)> = support(p.m)
        .map(|m| (m, table.lambda(m as usize) * bump_weight(m as f64 / p.m)))
        .collect();
    let coprime = |n: u64| n % q != 0;
    let w1_main: f64 = n1_terms.iter().filter(|t| coprime(t.0)).map(|t| t.1).sum();
    let w1_deg: f64 = n1_terms.iter().filter(|t| !coprime(t.0)).map(|t| t.1).sum();
    let l_all: f64 = m_terms.iter().map(|t| t.1.abs()).sum();
    let l_deg: f64 = m_terms.iter().filter(|t| !coprime(t.0)).map(|t| t.1.abs()).sum();
    let model = TailModel {
        main: n2s / (q as f64 * norm) * w1_main * l_all,
        degenerate: n2s / norm * w1_deg * l_deg,
        s,
        n2: n2s,
        q,
    };
    let k_cut = k_cut.unwrap_or_else(|| model.cutoff(tol)).max(1);
    let tail = model.tail(k_cut);

    let transform = TrapezoidTransform::new(k_cut as f64 * s);
    let w_hat: Vec<_> = (0..=k_cut).map(|k| transform.eval(k as f64 * s)).collect();
    let roots = unit_roots(q);
    // h[c] = sum_{|k| <= K} e(ck/q) W^(ks); the k and -k terms are conjugate
    let h: Vec<f64> = (0..q)
        .map(|c| {
            let mut acc = Kahan::default();
            for k in 1..=k_cut {
                acc.add((roots[(c * (k % q) % q) as usize] * w_hat[k as usize]).re);
            }
            w_hat[0].re + 2.0 * acc.value()
        })
        .collect();

    let inv = inverse_table(q);
    let pref = n2s / (q as f64 * norm);
    let mut main = Kahan::default();
    let mut zero = Kahan::default();
    for &(n1, w1) in n1_terms.iter().filter(|t| coprime(t.0)) {
        let n1_inv = inv[(n1 % q) as usize];
        for &(m, lw) in &m_terms {
            let c = p.sign.apply(m % q * n1_inv, q);
            main.add(w1 * lw * h[c as usize]);
            zero.add(w1 * lw * w_hat[0].re);
        }
    }

    let mut frequency_multiples = Kahan::default();
    for k in (q..=k_cut).step_by(q as usize) {
        frequency_multiples.add(w_hat[k as usize].re);
    }
    let g = w_hat[0].re + 2.0 * frequency_multiples.value();
    let degenerate = if w1_deg == 0.0 {
        0.0
    } else {
        let l: f64 = m_terms.iter().filter(|t| !coprime(t.0)).map(|t| t.1).sum();
        n2s / norm * w1_deg * l * g
    };

    let main = pref * main.value();
    let terms = n1_terms.len() as u64 * m_terms.len() as u64 * (2 * k_cut + 1);
    Ok(PoissonReport {
        report: SumReport {
            value: main + degenerate,
            terms,
            method: Method::Poisson,
            error_estimate: Some(tail),
        },
        k_cut,
        main,
        degenerate,
        zero_frequency: pref * zero.value(),
        tail,
        tail_exceeds_tol: tail > tol,
    })
}

/// `sum_m lambda(m) W(m/M)`.
pub fn smooth_lambda_sum(table: &TauTable, m_scale: f64) -> Result<f64, SumError> {
    check_table(table, m_scale)?;
    Ok(support(m_scale)
        .map(|m| table.lambda(m as usize) * bump_weight(m as f64 / m_scale))
        .sum::<Kahan>()
        .value())
}

/// `(M, |sum_m lambda(m) W(m/M)| / sqrt(M))` for `M = 2^e`.
pub fn voronoi_decay_scan(table: &TauTable, exponents: impl IntoIterator<Item = u32>) -> Result<Vec<(f64, f64)>, SumError> {
    exponents
        .into_iter()
        .map(|e| {
            let m = 2f64.powi(e as i32);
            Ok((m, smooth_lambda_sum(table, m)?.abs() / m.sqrt()))
        })
        .collect()
}
