//! Smoothed congruence sums of Hecke eigenvalues, their Poisson-transformed
//! forms and the brute-force oracles that check them.
//!
//! Every weight is the canonical bump `W`, and a scale `X` restricts the
//! summation variable to the integers of `(X/2, 2X)`.

mod cpm;
mod epm;
mod wilton;

use std::ops::RangeInclusive;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::nt::{check_odd_prime, NtError, TauTable};

pub use cpm::{c_pm, c_pm_poisson, smooth_lambda_sum, voronoi_decay_scan, PoissonReport};
pub use epm::{e_bound_scan, e_pm, e_pm_chardetect, EBoundRow};
pub use wilton::{wilton_grid, wilton_scan, wilton_sum, WiltonRow};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SumError {
    #[error("tau table covers n <= {have}, but this sum needs n <= {needed}")]
    TableTooSmall { needed: usize, have: usize },
    #[error("scale {name} = {value} must be positive and finite")]
    InvalidScale { name: &'static str, value: f64 },
    #[error("N1 = {n1} exceeds N2 = {n2}")]
    UnorderedFactors { n1: f64, n2: f64 },
    #[error(transparent)]
    Nt(#[from] NtError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Sign {
    /// `±r mod q`.
    pub fn apply(self, r: u64, q: u64) -> u64 {
        let r = r % q;
        match self {
            Sign::Plus => r,
            Sign::Minus => (q - r) % q,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }
}

impl std::str::FromStr for Sign {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "+" | "plus" => Ok(Sign::Plus),
            "-" | "minus" => Ok(Sign::Minus),
            other => Err(format!("sign must be + or -, got {other:?}")),
        }
    }
}

/// Modulus, sign and dyadic scales of one sum. `n1` and `n2` are set only
/// for the factored sums, and then `n = n1 * n2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SumParams {
    pub q: u64,
    pub sign: Sign,
    pub m: f64,
    pub n: f64,
    pub n1: Option<f64>,
    pub n2: Option<f64>,
}

impl SumParams {
    pub fn new(q: u64, sign: Sign, m: f64, n: f64) -> Result<Self, SumError> {
        check_odd_prime(q)?;
        check_scale("M", m)?;
        check_scale("N", n)?;
        Ok(SumParams { q, sign, m, n, n1: None, n2: None })
    }

    pub fn factored(q: u64, sign: Sign, m: f64, n1: f64, n2: f64) -> Result<Self, SumError> {
        check_odd_prime(q)?;
        check_scale("M", m)?;
        check_scale("N1", n1)?;
        check_scale("N2", n2)?;
        if n1 > n2 {
            return Err(SumError::UnorderedFactors { n1, n2 });
        }
        Ok(SumParams { q, sign, m, n: n1 * n2, n1: Some(n1), n2: Some(n2) })
    }

    pub(crate) fn factors(&self) -> (f64, f64) {
        match (self.n1, self.n2) {
            (Some(a), Some(b)) => (a, b),
            _ => panic!("sum needs factored scales N1, N2"),
        }
    }
}

fn check_scale(name: &'static str, value: f64) -> Result<(), SumError> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(SumError::InvalidScale { name, value })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ResidueBuckets,
    CharacterDetection,
    DirectTriple,
    Poisson,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SumReport {
    pub value: f64,
    /// Lattice points of the summation domain that carry a term.
    pub terms: u64,
    pub method: Method,
    pub error_estimate: Option<f64>,
}

/// Integers `n >= 1` with `W(n/X) != 0`, i.e. `X/2 < n < 2X`.
pub fn support(x: f64) -> RangeInclusive<u64> {
    let lo = (x / 2.0).floor() as u64 + 1;
    let hi = ((2.0 * x).ceil() as u64).saturating_sub(1);
    lo..=hi
}

/// `ceil(2X) - floor(X/2) - 1`, clamped at zero.
pub fn support_count(x: f64) -> u64 {
    let r = support(x);
    (r.end() + 1).saturating_sub(*r.start())
}

pub(crate) fn check_table(table: &TauTable, scale: f64) -> Result<(), SumError> {
    let needed = *support(scale).end() as usize;
    if needed > table.n_max() {
        return Err(SumError::TableTooSmall { needed, have: table.n_max() });
    }
    Ok(())
}

/// Compensated summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct Kahan {
    sum: f64,
    carry: f64,
}

impl Kahan {
    pub fn add(&mut self, x: f64) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}

impl std::iter::Sum<f64> for Kahan {
    fn sum<I: Iterator<Item = f64>>(iter: I) -> Self {
        let mut k = Kahan::default();
        iter.for_each(|x| k.add(x));
        k
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct KahanComplex {
    re: Kahan,
    im: Kahan,
}

impl KahanComplex {
    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

/// `e(j/q)` for `0 <= j < q`.
pub(crate) fn unit_roots(q: u64) -> Vec<Complex64> {
    (0..q)
        .map(|j| Complex64::from_polar(1.0, std::f64::consts::TAU * j as f64 / q as f64))
        .collect()
}
