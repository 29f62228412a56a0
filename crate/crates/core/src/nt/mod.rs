//! Number-theoretic kernels: divisor functions, modular inverses, Ramanujan
//! tau, Kloosterman sums and the smooth bump weight with its Fourier
//! transform.

mod kloosterman;
mod tau;
mod weight;

use thiserror::Error;

pub use kloosterman::{kloosterman, kloosterman_complex, weil_scan, WeilScan};
pub use tau::{tau_table, TauTable};
pub use weight::{
    bump_fourier, bump_weight, decay_envelope, TrapezoidTransform, DECAY_C2, DECAY_C4,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NtError {
    #[error("{a} is not invertible modulo {q}")]
    NotInvertible { a: i64, q: u64 },
    #[error("{0} is not an odd prime")]
    NotOddPrime(u64),
    #[error("quadrature for y = {y} did not converge: error estimate {estimate:e} > tolerance {tol:e}")]
    QuadratureNonConvergence { y: f64, estimate: f64, tol: f64 },
}

/// Number of positive divisors of `n`. Panics on `n == 0`.
pub fn divisor_count(n: u64) -> u64 {
    assert!(n >= 1, "divisor_count needs n >= 1");
    let mut n = n;
    let mut count = 1;
    let mut p = 2u64;
    while p * p <= n {
        let mut e = 0;
        while n % p == 0 {
            n /= p;
            e += 1;
        }
        count *= e + 1;
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        count *= 2;
    }
    count
}

/// `d(n)` for `0 <= n <= n_max` (index 0 holds 0).
pub fn divisor_counts(n_max: usize) -> Vec<u32> {
    let mut d = vec![0u32; n_max + 1];
    for k in 1..=n_max {
        for j in (k..=n_max).step_by(k) {
            d[j] += 1;
        }
    }
    d
}

/// `sigma_1(n)` for `0 <= n <= n_max` (index 0 holds 0).
pub fn divisor_sums(n_max: usize) -> Vec<u64> {
    let mut s = vec![0u64; n_max + 1];
    for k in 1..=n_max {
        for j in (k..=n_max).step_by(k) {
            s[j] += k as u64;
        }
    }
    s
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            return false;
        }
        p += 1;
    }
    true
}

pub fn primes_up_to(n: usize) -> Vec<u64> {
    let mut sieve = vec![true; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if sieve[i] {
            out.push(i as u64);
            for j in (i * i..=n).step_by(i) {
                sieve[j] = false;
            }
        }
    }
    out
}

pub(crate) fn check_odd_prime(q: u64) -> Result<(), NtError> {
    if q % 2 == 1 && is_prime(q) {
        Ok(())
    } else {
        Err(NtError::NotOddPrime(q))
    }
}

/// Inverse of `a` modulo `q`, in `[1, q - 1]`.
pub fn mod_inverse(a: i64, q: u64) -> Result<u64, NtError> {
    let qi = q as i128;
    let r = (a as i128).rem_euclid(qi);
    // extended Euclid on (r, q)
    let (mut old_r, mut cur_r) = (r, qi);
    let (mut old_s, mut cur_s) = (1i128, 0i128);
    while cur_r != 0 {
        let quot = old_r / cur_r;
        (old_r, cur_r) = (cur_r, old_r - quot * cur_r);
        (old_s, cur_s) = (cur_s, old_s - quot * cur_s);
    }
    if old_r != 1 || q < 2 {
        return Err(NtError::NotInvertible { a, q });
    }
    Ok(old_s.rem_euclid(qi) as u64)
}

/// Inverses of `1..q` modulo a prime `q` (index 0 holds 0), in O(q).
pub(crate) fn inverse_table(q: u64) -> Vec<u64> {
    let mut inv = vec![0u64; q as usize];
    if q > 1 {
        inv[1] = 1;
    }
    for a in 2..q {
        inv[a as usize] = (q - (q / a) * inv[(q % a) as usize] % q) % q;
    }
    inv
}
