//! The canonical bump `W(x) = exp(16/9 - 1/((x - 1/2)(2 - x)))` on `(1/2, 2)`
//! and its Fourier transform `W^(y) = int W(x) e(-xy) dx`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::TAU;

use num_complex::Complex64;

use super::NtError;

/// `(x - 1/2)(2 - x)` peaks at `x = 5/4` with value 9/16, so this makes
/// `W(5/4) = 1` and `0 <= W <= 1`.
const NORMALIZATION: f64 = 16.0 / 9.0;

/// `sup_y |W^(y)| (1 + |y|)^2`, fitted on `0 <= y <= 200` (fit 1.22) and rounded up.
pub const DECAY_C2: f64 = 1.3;
/// `sup_y |W^(y)| (1 + |y|)^4`, fitted on `0 <= y <= 200` (fit 3.07) and rounded up.
pub const DECAY_C4: f64 = 3.3;

pub fn bump_weight(x: f64) -> f64 {
    if x <= 0.5 || x >= 2.0 {
        return 0.0;
    }
    (NORMALIZATION - 1.0 / ((x - 0.5) * (2.0 - x))).exp()
}

/// Upper envelope `min(C2 / (1+|y|)^2, C4 / (1+|y|)^4)` for `|W^(y)|`.
pub fn decay_envelope(y: f64) -> f64 {
    let s = 1.0 + y.abs();
    (DECAY_C2 / (s * s)).min(DECAY_C4 / (s * s * s * s))
}

// Gauss-Kronrod 7/15 nodes and weights on [-1, 1].
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

struct Panel {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gauss_kronrod(f: &impl Fn(f64) -> Complex64, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += pair * WGK[j];
        if j % 2 == 1 {
            gauss += pair * WG[j / 2];
        }
    }
    let value = kronrod * half;
    let error = ((kronrod - gauss) * half).norm();
    Panel { a, b, value, error }
}

const MAX_PANELS: usize = 200_000;

/// `W^(y)` by globally adaptive Gauss-Kronrod 7/15 quadrature over
/// `[1/2, 2]`, refined until the summed error estimate is at most `tol`.
pub fn bump_fourier(y: f64, tol: f64) -> Result<Complex64, NtError> {
    assert!(tol > 0.0, "tolerance must be positive");
    let f = |x: f64| {
        let (s, c) = (-TAU * y * x).sin_cos();
        Complex64::new(c, s) * bump_weight(x)
    };
    // start with roughly one panel per oscillation
    let initial = 1 + (1.5 * y.abs()) as usize;
    let width = 1.5 / initial as f64;
    let mut heap: BinaryHeap<Panel> = (0..initial)
        .map(|i| gauss_kronrod(&f, 0.5 + i as f64 * width, 0.5 + (i + 1) as f64 * width))
        .collect();
    let mut estimate: f64 = heap.iter().map(|p| p.error).sum();
    loop {
        if estimate <= tol {
            // resum to shed drift from the running total
            estimate = heap.iter().map(|p| p.error).sum();
            if estimate <= tol {
                return Ok(heap.iter().map(|p| p.value).sum());
            }
        }
        if heap.len() >= MAX_PANELS {
            estimate = heap.iter().map(|p| p.error).sum();
            return Err(NtError::QuadratureNonConvergence { y, estimate, tol });
        }
        let worst = heap.pop().expect("heap is non-empty");
        let mid = 0.5 * (worst.a + worst.b);
        let left = gauss_kronrod(&f, worst.a, mid);
        let right = gauss_kronrod(&f, mid, worst.b);
        estimate += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }
}

/// Frequencies aliased into a trapezoidal sample of `W^` lie at least this
/// far from every requested frequency.
const ALIAS_GAP: f64 = 150.0;

/// Trapezoidal evaluation of `W^(y)` for all `|y| <= y_max` on one fixed
/// grid. `W` vanishes to infinite order at both ends of its support, so the
/// only error is aliasing, `sum_{j != 0} W^(y + j/h)`, which the grid keeps
/// at least `ALIAS_GAP` away from `y`.
#[derive(Debug, Clone)]
pub struct TrapezoidTransform {
    step: f64,
    y_max: f64,
    nodes: Vec<(f64, f64)>,
}

impl TrapezoidTransform {
    pub fn new(y_max: f64) -> Self {
        let y_max = y_max.abs();
        let intervals = (1.5 * (y_max + ALIAS_GAP)).ceil() as usize;
        let step = 1.5 / intervals as f64;
        let nodes = (1..intervals)
            .map(|j| {
                let x = 0.5 + j as f64 * step;
                (x, bump_weight(x))
            })
            .filter(|(_, w)| *w > 0.0)
            .collect();
        TrapezoidTransform { step, y_max, nodes }
    }

    pub fn y_max(&self) -> f64 {
        self.y_max
    }

    pub fn eval(&self, y: f64) -> Complex64 {
        debug_assert!(y.abs() <= self.y_max * (1.0 + 1e-12) + 1e-12);
        let mut acc = Complex64::new(0.0, 0.0);
        for &(x, w) in &self.nodes {
            let (s, c) = (-TAU * (y * x).fract()).sin_cos();
            acc += Complex64::new(c, s) * w;
        }
        acc * self.step
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn support_and_normalization() {
        assert_eq!(bump_weight(0.5), 0.0);
        assert_eq!(bump_weight(2.0), 0.0);
        assert_eq!(bump_weight(0.1), 0.0);
        assert_eq!(bump_weight(3.0), 0.0);
        assert!((bump_weight(1.25) - 1.0).abs() < 1e-15);
        for i in 1..1000 {
            let w = bump_weight(0.5 + 1.5 * i as f64 / 1000.0);
            assert!((0.0..=1.0).contains(&w));
        }
    }

    #[test]
    fn zero_frequency_matches_riemann_oracle() {
        let n = 1_000_000;
        let h = 1.5 / n as f64;
        let oracle: f64 = (0..n).map(|i| bump_weight(0.5 + (i as f64 + 0.5) * h)).sum::<f64>() * h;
        let quad = bump_fourier(0.0, 1e-10).unwrap();
        assert!(oracle > 0.0);
        assert!((quad.re - oracle).abs() < 1e-10, "{} vs {oracle}", quad.re);
        assert!(quad.im.abs() < 1e-12);
    }

    #[test]
    fn conjugate_symmetry() {
        for y in [0.3, 2.0, 7.5] {
            let a = bump_fourier(y, 1e-12).unwrap();
            let b = bump_fourier(-y, 1e-12).unwrap();
            assert!((a - b.conj()).norm() < 1e-12);
        }
    }

    #[test]
    fn trapezoid_agrees_with_adaptive_quadrature() {
        let t = TrapezoidTransform::new(120.0);
        for y in [0.0, 0.3, 1.0, 5.0, 17.5, 40.0, -63.2, 100.0, 120.0] {
            let a = t.eval(y);
            let b = bump_fourier(y, 1e-13).unwrap();
            assert!((a - b).norm() < 1e-12, "y = {y}: {a} vs {b}");
        }
    }

    #[test]
    fn decay_constants_are_stable() {
        let t = TrapezoidTransform::new(200.0);
        let (mut c2, mut c4) = (0.0f64, 0.0f64);
        for i in 0..=20_000 {
            let y = i as f64 * 0.01;
            let a = t.eval(y).norm();
            c2 = c2.max(a * (1.0 + y).powi(2));
            c4 = c4.max(a * (1.0 + y).powi(4));
        }
        assert!(c2 <= DECAY_C2 && c2 > 0.9 * DECAY_C2, "refit C2 = {c2}");
        assert!(c4 <= DECAY_C4 && c4 > 0.9 * DECAY_C4, "refit C4 = {c4}");
        let far = TrapezoidTransform::new(800.0);
        for y in [250.0, 400.0, 800.0] {
            assert!(far.eval(y).norm() <= decay_envelope(y));
        }
    }

    #[test]
    fn tiny_tolerance_reports_non_convergence() {
        match bump_fourier(3.0, 1e-300) {
            Err(NtError::QuadratureNonConvergence { estimate, .. }) => assert!(estimate > 0.0),
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }
}
