use ellband_core::band::{check_sorted, expected_points, ExpectedMode, Verdict};
use ellband_core::distributions::{mad, median, robust_scale_qn, robust_scale_sn};
use ellband_core::ell_one_sided::{global_level_one_sided_exact, multinomial_oracle_one_sided};
use ellband_core::ell_two_sided::{
    bounds_from_eta_two_sided, global_level_two_sided, multinomial_oracle_two_sided,
};
use ellband_core::numerics::{beta_cdf, beta_quantile, log_binomial_pmf, BetaParams};
use proptest::prelude::*;

fn sorted_unit(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..1.0, n).prop_map(|mut v| {
        v.sort_by(f64::total_cmp);
        v
    })
}

/// Strictly increasing values in (0, 1).
fn increasing(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..1.0, n).prop_map(|w| {
        let total: f64 = w.iter().sum::<f64>() + 0.3;
        let mut acc = 0.0;
        w.iter()
            .map(|x| {
                acc += x;
                acc / total
            })
            .collect()
    })
}

/// A general two-sided band: increasing lower and upper sequences with lower < upper.
fn two_sided_band() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (1usize..=5)
        .prop_flat_map(|n| (sorted_unit(n), prop::collection::vec(0.01f64..0.6, n)))
        .prop_map(|(h, widths)| {
            let mut g: Vec<f64> = h
                .iter()
                .zip(&widths)
                .map(|(a, w)| (a + w).min(1.0))
                .collect();
            for i in 1..g.len() {
                if g[i] < g[i - 1] {
                    g[i] = g[i - 1];
                }
            }
            (h, g)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn recursion_matches_enumeration((h, g) in two_sided_band()) {
        prop_assume!(h.iter().zip(&g).all(|(a, b)| a < b));
        let r = global_level_two_sided(&h, &g).unwrap();
        let o = multinomial_oracle_two_sided(&h, &g).unwrap();
        prop_assert!((r - o).abs() <= 1e-12, "{} vs {}", r, o);
        prop_assert!((0.0..=1.0).contains(&r));
    }

    #[test]
    fn one_sided_matches_enumeration(h in (1usize..=6).prop_flat_map(increasing)) {
        let r = global_level_one_sided_exact(&h).unwrap();
        let o = multinomial_oracle_one_sided(&h).unwrap();
        prop_assert!((r - o).abs() <= 1e-12);
    }

    #[test]
    fn widening_never_raises_the_level((h, g) in two_sided_band(), shrink in 0.0f64..1.0) {
        prop_assume!(h.iter().zip(&g).all(|(a, b)| a < b));
        let wider: Vec<f64> = h.iter().map(|x| x * shrink).collect();
        let a = global_level_two_sided(&h, &g).unwrap();
        let b = global_level_two_sided(&wider, &g).unwrap();
        prop_assert!(b <= a + 1e-14);
    }

    #[test]
    fn beta_quantile_inverts_cdf(a in 0.5f64..50.0, b in 0.5f64..50.0, q in 1e-6f64..(1.0 - 1e-6)) {
        let p = BetaParams::new(a, b).unwrap();
        let x = beta_quantile(q, p).unwrap();
        let back = beta_cdf(x, p).unwrap();
        prop_assert!((back - q).abs() <= 1e-10, "{} vs {}", back, q);
    }

    #[test]
    fn binomial_pmf_normalizes(size in 0u64..200, p in 0.0f64..=1.0) {
        let total: f64 = (0..=size).map(|k| log_binomial_pmf(k, size, p).unwrap().exp()).sum();
        prop_assert!((total - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn ell_bounds_are_symmetric_and_ordered(n in 1usize..300, eta in 1e-5f64..0.5) {
        let b = bounds_from_eta_two_sided(n, eta).unwrap();
        for i in 0..n {
            prop_assert!(b.h[i] < b.g[i]);
            prop_assert!((b.g[i] - (1.0 - b.h[n - 1 - i])).abs() <= 1e-12);
        }
        prop_assert!(b.h.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn expected_points_are_increasing(n in 1usize..400) {
        for mode in [ExpectedMode::Median, ExpectedMode::MeanBlom, ExpectedMode::MeanUniform] {
            let e = expected_points(n, mode);
            prop_assert!(e.windows(2).all(|w| w[0] < w[1]));
            prop_assert!(e.iter().all(|&x| x > 0.0 && x < 1.0));
        }
    }

    #[test]
    fn scale_estimators_are_equivariant(x in prop::collection::vec(-100.0f64..100.0, 3..40), shift in -50.0f64..50.0, scale in 0.1f64..10.0) {
        prop_assume!(mad(&x).is_ok() && robust_scale_qn(&x).is_ok() && robust_scale_sn(&x).is_ok());
        let y: Vec<f64> = x.iter().map(|v| v * scale + shift).collect();
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * b.abs().max(1.0);
        prop_assert!(close(median(&y).unwrap(), median(&x).unwrap() * scale + shift));
        prop_assert!(close(mad(&y).unwrap(), mad(&x).unwrap() * scale));
        prop_assert!(close(robust_scale_qn(&y).unwrap(), robust_scale_qn(&x).unwrap() * scale));
        prop_assert!(close(robust_scale_sn(&y).unwrap(), robust_scale_sn(&x).unwrap() * scale));
    }

    #[test]
    fn check_agrees_with_pointwise_scan(x in sorted_unit(8), lo in sorted_unit(8), width in 0.05f64..0.6) {
        let hi: Vec<f64> = lo.iter().map(|v| v + width).collect();
        let first_exit = (0..8).find(|&i| !(x[i] > lo[i] && x[i] < hi[i]));
        match check_sorted(&x, &lo, &hi) {
            Verdict::Inside => prop_assert!(first_exit.is_none()),
            Verdict::Exited { index, .. } => prop_assert_eq!(Some(index - 1), first_exit),
        }
    }
}
