use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

use super::divisor_sums;

/// Ramanujan's `tau(n)` for `1 <= n <= n_max` together with the normalized
/// Hecke eigenvalues `lambda(n) = tau(n) / n^(11/2)` of the discriminant form.
#[derive(Debug, Clone)]
pub struct TauTable {
    tau: Vec<BigInt>,
    lambda: Vec<f64>,
}

impl TauTable {
    pub fn n_max(&self) -> usize {
        self.tau.len() - 1
    }

    pub fn tau(&self, n: usize) -> &BigInt {
        assert!(n >= 1 && n <= self.n_max(), "tau({n}) outside table");
        &self.tau[n]
    }

    pub fn lambda(&self, n: usize) -> f64 {
        assert!(n >= 1 && n <= self.n_max(), "lambda({n}) outside table");
        self.lambda[n]
    }

    /// `lambda(0..=n_max)`, with a zero at index 0.
    pub fn lambdas(&self) -> &[f64] {
        &self.lambda
    }

    /// `lambda(m) lambda(n) - sum_{d | gcd(m, n)} lambda(mn / d^2)`; zero up
    /// to rounding for a Hecke eigenform. Needs `m * n <= n_max`.
    pub fn hecke_residual(&self, m: usize, n: usize) -> f64 {
        let g = m.gcd(&n);
        let rhs: f64 = (1..=g)
            .filter(|d| g % d == 0)
            .map(|d| self.lambda(m * n / (d * d)))
            .sum();
        self.lambda(m) * self.lambda(n) - rhs
    }
}

/// Coefficients of `q prod (1 - q^n)^24` from the logarithmic derivative:
/// `(n - 1) tau(n) = -24 sum_{k=1}^{n-1} sigma_1(k) tau(n - k)`.
///
/// Runs in `i128` and falls back to big integers on overflow.
pub fn tau_table(n_max: usize) -> TauTable {
    assert!(n_max >= 1, "tau_table needs n_max >= 1");
    let sigma = divisor_sums(n_max);
    let tau = tau_i128(n_max, &sigma)
        .map(|v| v.into_iter().map(BigInt::from).collect())
        .unwrap_or_else(|| tau_big(n_max, &sigma));
    let lambda = tau
        .iter()
        .enumerate()
        .map(|(n, t)| {
            if n == 0 {
                return 0.0;
            }
            let nf = n as f64;
            t.to_f64().expect("tau fits in f64 range") / (nf.powi(5) * nf.sqrt())
        })
        .collect();
    TauTable { tau, lambda }
}

fn tau_i128(n_max: usize, sigma: &[u64]) -> Option<Vec<i128>> {
    let mut a = vec![0i128; n_max + 1];
    a[1] = 1;
    for n in 2..=n_max {
        let mut acc: i128 = 0;
        for k in 1..n {
            acc = acc.checked_add((sigma[k] as i128).checked_mul(a[n - k])?)?;
        }
        let num = acc.checked_mul(-24)?;
        let den = (n - 1) as i128;
        debug_assert_eq!(num % den, 0);
        a[n] = num / den;
    }
    Some(a)
}

fn tau_big(n_max: usize, sigma: &[u64]) -> Vec<BigInt> {
    let mut a = vec![BigInt::zero(); n_max + 1];
    a[1] = BigInt::from(1);
    for n in 2..=n_max {
        let mut acc = BigInt::zero();
        for k in 1..n {
            acc += &a[n - k] * sigma[k];
        }
        a[n] = acc * -24 / BigInt::from(n - 1);
    }
    a
}
