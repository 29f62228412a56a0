use std::f64::consts::TAU;

use num_complex::Complex64;

use super::{check_odd_prime, inverse_table, NtError};

/// Largest imaginary part tolerated before a Kloosterman sum is declared
/// non-real.
const IMAG_TOL: f64 = 1e-9;

/// `S(m, n; q) = sum_{a=1}^{q-1} e((m a + n a^-1) / q)` by the direct O(q)
/// loop, as a complex number.
pub fn kloosterman_complex(m: i64, n: i64, q: u64) -> Result<Complex64, NtError> {
    check_odd_prime(q)?;
    let inv = inverse_table(q);
    let qi = q as i128;
    let mr = (m as i128).rem_euclid(qi) as u64;
    let nr = (n as i128).rem_euclid(qi) as u64;
    let mut re = 0.0;
    let mut im = 0.0;
    for a in 1..q {
        let phase = (mr * a % q + nr * inv[a as usize] % q) % q;
        let (s, c) = (TAU * phase as f64 / q as f64).sin_cos();
        re += c;
        im += s;
    }
    Ok(Complex64::new(re, im))
}

/// Real Kloosterman sum. The pairing `a <-> -a` makes the sum real; the
/// imaginary part is checked against a 1e-9 tolerance.
pub fn kloosterman(m: i64, n: i64, q: u64) -> Result<f64, NtError> {
    let s = kloosterman_complex(m, n, q)?;
    assert!(
        s.im.abs() <= IMAG_TOL,
        "Kloosterman sum S({m}, {n}; {q}) has imaginary part {}",
        s.im
    );
    Ok(s.re)
}

/// Extremes of `S(m, n; q)` over all `1 <= m, n <= q - 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeilScan {
    pub q: u64,
    pub max_abs: f64,
    pub max_imag: f64,
    pub pairs: u64,
}

/// Evaluates every `S(m, n; q)` with `1 <= m, n <= q - 1` by the direct loop
/// (table lookups instead of trigonometric calls).
pub fn weil_scan(q: u64) -> Result<WeilScan, NtError> {
    check_odd_prime(q)?;
    let qs = q as usize;
    let inv = inverse_table(q);
    let cos: Vec<f64> = (0..qs).map(|j| (TAU * j as f64 / q as f64).cos()).collect();
    let sin: Vec<f64> = (0..qs).map(|j| (TAU * j as f64 / q as f64).sin()).collect();
    let mut n_inv = vec![0usize; qs];
    let mut max_abs: f64 = 0.0;
    let mut max_imag: f64 = 0.0;
    for n in 1..qs {
        for a in 1..qs {
            n_inv[a] = n * inv[a] as usize % qs;
        }
        for m in 1..qs {
            let (mut re, mut im) = (0.0, 0.0);
            let mut ma = 0usize;
            for a in 1..qs {
                ma += m;
                if ma >= qs {
                    ma -= qs;
                }
                let mut idx = ma + n_inv[a];
                if idx >= qs {
                    idx -= qs;
                }
                re += cos[idx];
                im += sin[idx];
            }
            max_abs = max_abs.max(re.hypot(im));
            max_imag = max_imag.max(im.abs());
        }
    }
    Ok(WeilScan {
        q,
        max_abs,
        max_imag,
        pairs: ((qs - 1) * (qs - 1)) as u64,
    })
}
