use exlab_core::nt::{
    bump_fourier, decay_envelope, divisor_counts, kloosterman, kloosterman_complex, mod_inverse, primes_up_to,
    tau_table,
};
use std::sync::OnceLock;

use exlab_core::nt::TauTable;
use num_traits::ToPrimitive;
use proptest::prelude::*;

fn table() -> &'static TauTable {
    static TABLE: OnceLock<TauTable> = OnceLock::new();
    TABLE.get_or_init(|| tau_table(10_000))
}

#[test]
fn average_bound_at_powers_of_two() {
    let n_max = 1 << 14;
    let t = tau_table(n_max);
    let mut running = 0.0;
    let mut x = 1;
    for n in 1..=n_max {
        running += t.lambda(n).powi(2);
        if n == x {
            let xf = x as f64;
            assert!(running <= 4.0 * xf * (1.0 + xf.ln()), "x = {x}: {running}");
            x *= 2;
        }
    }
}

#[test]
fn ramanujan_bound_at_primes() {
    let t = tau_table(2000);
    for p in primes_up_to(2000) {
        let tau = t.tau(p as usize).to_f64().unwrap();
        assert!(tau.abs() <= 2.0 * (p as f64).powf(5.5));
    }
}

#[test]
fn lambda_bounded_by_divisor_count() {
    let t = tau_table(5000);
    let d = divisor_counts(5000);
    assert!((1..=5000).all(|n| t.lambda(n).abs() <= d[n] as f64));
}

#[test]
fn fourier_transform_within_envelope() {
    for y in [0.0, 0.5, 3.0, 10.0, 33.0, 90.0] {
        let w = bump_fourier(y, 1e-13).unwrap();
        assert!(w.norm() <= decay_envelope(y) + 1e-13, "y = {y}");
    }
}

proptest! {
    #[test]
    fn hecke_relation(m in 2usize..100, n in 2usize..100) {
        prop_assert!(table().hecke_residual(m, n).abs() <= 1e-10);
    }

    #[test]
    fn kloosterman_symmetric_real_and_weil_bounded(i in 0usize..40, m in 1i64..1000, n in 1i64..1000) {
        let q = primes_up_to(200)[i + 1];
        let a = kloosterman_complex(m, n, q).unwrap();
        let b = kloosterman_complex(n, m, q).unwrap();
        prop_assert!(a.im.abs() <= 1e-9 && b.im.abs() <= 1e-9);
        prop_assert!((a.re - b.re).abs() <= 1e-9);
        if (m * n) % q as i64 != 0 {
            prop_assert!(kloosterman(m, n, q).unwrap().abs() <= 2.0 * (q as f64).sqrt());
        }
    }

    #[test]
    fn inverse_is_inverse(a in -10_000i64..10_000, i in 0usize..40) {
        let q = primes_up_to(200)[i + 1];
        match mod_inverse(a, q) {
            Ok(inv) => prop_assert_eq!((a.rem_euclid(q as i64) as u64 * inv) % q, 1),
            Err(_) => prop_assert_eq!(a.rem_euclid(q as i64), 0),
        }
    }
}
