use exlab_core::nt::{bump_weight, tau_table};
use exlab_core::sums::{
    c_pm, c_pm_poisson, e_pm, e_pm_chardetect, support_count, voronoi_decay_scan, Sign, SumParams,
};
use proptest::prelude::*;

fn sign(plus: bool) -> Sign {
    if plus {
        Sign::Plus
    } else {
        Sign::Minus
    }
}

#[test]
fn smooth_lambda_sums_decay_as_scale_doubles() {
    let t = tau_table(1 << 13);
    let scan = voronoi_decay_scan(&t, 4..=12).unwrap();
    let first = scan[0].1;
    let last = scan[scan.len() - 1].1;
    assert!(last < 1e-6 * first, "{scan:?}");
}

#[test]
fn degenerate_piece_vanishes_below_half_modulus() {
    let t = tau_table(200);
    for q in [53, 101] {
        for (n1, n2, m) in [(8.0, 16.0, 32.0), (4.0, 64.0, 16.0), (16.0, 16.0, 8.0)] {
            let p = SumParams::factored(q, Sign::Plus, m, n1, n2).unwrap();
            assert!(n1 < q as f64 / 2.0 && m * n1 * n2 < q.pow(3) as f64 / 8.0);
            assert_eq!(c_pm_poisson(&t, &p, Some(32), 1.0).unwrap().degenerate, 0.0);
        }
    }
}

#[test]
fn short_cutoff_example() {
    let t = tau_table(100);
    let p = SumParams::factored(101, Sign::Plus, 32.0, 8.0, 16.0).unwrap();
    let direct = c_pm(&t, &p).unwrap().value;
    let r = c_pm_poisson(&t, &p, Some(64), 1e-8).unwrap();
    assert!((direct - r.report.value).abs() <= 1e-6 * (1.0 + direct.abs()));
    assert!(r.tail_exceeds_tol);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn support_counts_match_weights(x in 0.1f64..300.0) {
        let inside = (1..=700u64).filter(|&n| 2.0 * n as f64 > x && (n as f64) < 2.0 * x).count() as u64;
        prop_assert_eq!(support_count(x), inside);
        // a weight can underflow to zero right at the edge of its support
        let positive = (1..=700u64).filter(|&n| bump_weight(n as f64 / x) > 0.0).count() as u64;
        prop_assert!(positive <= inside && positive + 2 >= inside);
    }

    #[test]
    fn poisson_identity_on_random_scales(
        qi in 0usize..6,
        e1 in 0u32..4,
        e2 in 0u32..4,
        em in 1u32..6,
        plus: bool,
    ) {
        let q = [5u64, 7, 13, 31, 53, 97][qi];
        let (n1, n2) = (2f64.powi(e1.min(e2) as i32), 2f64.powi(e1.max(e2) as i32));
        let m = 2f64.powi(em as i32);
        let t = tau_table(200);
        let p = SumParams::factored(q, sign(plus), m, n1, n2).unwrap();
        let direct = c_pm(&t, &p).unwrap().value;
        let r = c_pm_poisson(&t, &p, None, 1e-9).unwrap();
        prop_assert!(r.tail <= 1e-9);
        prop_assert!((direct - r.report.value).abs() <= 1e-8, "{} vs {}", direct, r.report.value);
    }

    #[test]
    fn character_detection_agrees(qi in 0usize..4, em in 1u32..7, en in 1u32..7, plus: bool) {
        let q = [3u64, 5, 11, 23][qi];
        let t = tau_table(200);
        let p = SumParams::new(q, sign(plus), 2f64.powi(em as i32), 2f64.powi(en as i32)).unwrap();
        let a = e_pm(&t, &p).unwrap().value;
        let b = e_pm_chardetect(&t, &p).unwrap().value;
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1e-3));
    }
}
