use std::f64::consts::SQRT_2;

use num_complex::Complex64;
use serde::Serialize;

use super::{KahanComplex, SumError};
use crate::nt::TauTable;

fn phase(n: usize, alpha: f64) -> Complex64 {
    Complex64::from_polar(1.0, std::f64::consts::TAU * (n as f64 * alpha).fract())
}

/// `sum_{n <= N} lambda(n) e(n alpha)`.
pub fn wilton_sum(table: &TauTable, n: usize, alpha: f64) -> Result<Complex64, SumError> {
    if n > table.n_max() {
        return Err(SumError::TableTooSmall { needed: n, have: table.n_max() });
    }
    let mut acc = KahanComplex::default();
    for k in 1..=n {
        acc.add(phase(k, alpha) * table.lambda(k));
    }
    Ok(acc.value())
}

/// The 256-point frequency grid: `0`, every `a/q` with `1 <= a < q` for
/// `q` in {3, 5, 7, 101}, and 143 equispaced shifts of `sqrt(2) - 1`.
pub fn wilton_grid() -> Vec<f64> {
    let mut grid = vec![0.0];
    for q in [3u32, 5, 7, 101] {
        grid.extend((1..q).map(|a| a as f64 / q as f64));
    }
    let irrational = 256 - grid.len();
    grid.extend((0..irrational).map(|j| (j as f64 + SQRT_2 - 1.0) / irrational as f64));
    grid
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WiltonRow {
    pub n: usize,
    /// `max_alpha |wilton_sum(N, alpha)| / sqrt(N)`.
    pub ratio: f64,
    pub argmax: f64,
}

/// `R(N)` for every `N` in `n_list`, sharing one pass over `n` per frequency.
pub fn wilton_scan(table: &TauTable, n_list: &[usize], grid: &[f64]) -> Result<Vec<WiltonRow>, SumError> {
    let n_top = n_list.iter().copied().max().unwrap_or(0);
    if n_top > table.n_max() {
        return Err(SumError::TableTooSmall { needed: n_top, have: table.n_max() });
    }
    let mut rows: Vec<WiltonRow> = n_list.iter().map(|&n| WiltonRow { n, ratio: 0.0, argmax: 0.0 }).collect();
    for &alpha in grid {
        let mut acc = KahanComplex::default();
        let mut partial = vec![0.0; n_top + 1];
        for k in 1..=n_top {
            acc.add(phase(k, alpha) * table.lambda(k));
            partial[k] = acc.value().norm();
        }
        for row in &mut rows {
            let r = partial[row.n] / (row.n as f64).sqrt();
            if r > row.ratio {
                row.ratio = r;
                row.argmax = alpha;
            }
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nt::{divisor_count, tau_table};

    #[test]
    fn zero_frequency_is_plain_partial_sum() {
        let t = tau_table(10);
        let direct: f64 = (1..=10).map(|n| t.lambda(n)).sum();
        let s = wilton_sum(&t, 10, 0.0).unwrap();
        assert!((s.re - direct).abs() < 1e-14 && s.im == 0.0);
    }

    #[test]
    fn half_frequency_alternates() {
        let t = tau_table(400);
        let s = wilton_sum(&t, 400, 0.5).unwrap();
        let alternating: f64 = (1..=400).map(|n| if n % 2 == 0 { t.lambda(n) } else { -t.lambda(n) }).sum();
        assert!((s.re - alternating).abs() < 1e-10);
        assert!(s.im.abs() < 1e-10);
        let ceiling: f64 = (1..=400u64).map(|n| divisor_count(n) as f64).sum();
        assert!(s.norm() <= ceiling);
    }

    #[test]
    fn grid_layout() {
        let g = wilton_grid();
        assert_eq!(g.len(), 256);
        assert!(g.iter().all(|a| (0.0..1.0).contains(a)));
        assert!(g.contains(&(34.0 / 101.0)));
    }

    #[test]
    fn scan_agrees_with_single_sums() {
        let t = tau_table(256);
        let grid = [0.0, 0.25, 1.0 / 3.0, SQRT_2 - 1.0];
        let rows = wilton_scan(&t, &[64, 256], &grid).unwrap();
        for row in rows {
            let direct = grid
                .iter()
                .map(|&a| wilton_sum(&t, row.n, a).unwrap().norm() / (row.n as f64).sqrt())
                .fold(0.0, f64::max);
            assert!((row.ratio - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn table_too_small() {
        let t = tau_table(10);
        assert!(matches!(wilton_sum(&t, 11, 0.0), Err(SumError::TableTooSmall { .. })));
    }
}
