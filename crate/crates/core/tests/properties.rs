use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use pwsynth_core::analytic::{eval_sinc_kernel, LogComplex};
use pwsynth_core::hilbert::{conjugate_function, AnalyticFunction, PvConfig, SampledFunction, TailModel};
use pwsynth_core::sequences::{counting_function, delta_star, upper_density_estimate, DensityScan, ZeroSequence};
use pwsynth_core::PrecisionConfig;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn shifted_poisson(s: f64) -> AnalyticFunction<impl Fn(f64) -> f64 + Sync> {
    AnalyticFunction::new(move |t: f64| 1.0 / (1.0 + (t - s) * (t - s)), -1000.0, 1000.0)
        .with_tail(TailModel::symmetric(1.0, 2.0))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn kernel_is_hermitian_symmetric(lr in -6.0f64..6.0, li in -1.0f64..1.0, zr in -6.0f64..6.0, zi in -1.0f64..1.0) {
        let cfg = PrecisionConfig::double();
        let (l, z) = (c(lr, li), c(zr, zi));
        let a = eval_sinc_kernel(l, z, &cfg);
        let b = eval_sinc_kernel(z, l, &cfg).conj();
        prop_assert!((a - b).norm() <= 1e-12 * (1.0 + a.norm()));
    }

    #[test]
    fn kernel_is_kronecker_on_integers(n in -50i64..50, m in -50i64..50) {
        let v = eval_sinc_kernel(c(n as f64, 0.0), c(m as f64, 0.0), &PrecisionConfig::double());
        prop_assert_eq!(v, c(if n == m { 1.0 } else { 0.0 }, 0.0));
    }

    #[test]
    fn extended_kernel_matches_double(lr in -6.0f64..6.0, li in -1.0f64..1.0, zr in -6.0f64..6.0) {
        let (l, z) = (c(lr, li), c(zr + 0.013, 0.0));
        let a = eval_sinc_kernel(l, z, &PrecisionConfig::double());
        let b = eval_sinc_kernel(l, z, &PrecisionConfig::with_bits(128));
        prop_assert!((a - b).norm() <= 1e-12 * (1.0 + b.norm()));
    }

    #[test]
    fn log_complex_multiplication_round_trips(ar in -1e3f64..1e3, ai in -1e3f64..1e3, br in 0.1f64..1e3, bi in -1e3f64..1e3) {
        let (a, b) = (c(ar, ai), c(br, bi));
        prop_assume!(a.norm() > 1e-6);
        let p = LogComplex::from_complex(a).mul(&LogComplex::from_complex(b)).to_complex().unwrap();
        prop_assert!((p - a * b).norm() <= 1e-12 * (a * b).norm());
        let q = LogComplex::from_complex(a).div(&LogComplex::from_complex(b)).unwrap().to_complex().unwrap();
        prop_assert!((q - a / b).norm() <= 1e-12 * (a / b).norm());
    }

    #[test]
    fn density_is_translation_invariant(
        pts in prop::collection::vec(-200i32..200, 1..60),
        shift in -1000i32..1000,
        r in 1u32..50,
    ) {
        let xs: Vec<f64> = pts.iter().map(|&p| p as f64).collect();
        let seq = ZeroSequence::from_reals(&xs).unwrap();
        let moved = seq.translate(shift as f64);
        let r = r as f64;
        let scan = DensityScan { start: -300.0, end: 300.0, step: Some(1.0) };
        let scan_moved = DensityScan { start: -300.0 + shift as f64, end: 300.0 + shift as f64, step: Some(1.0) };
        let a = upper_density_estimate(&seq, r, &scan).unwrap();
        let b = upper_density_estimate(&moved, r, &scan_moved).unwrap();
        prop_assert_eq!(a.max_count, b.max_count);
    }

    #[test]
    fn counting_function_is_monotone(pts in prop::collection::vec(-100.0f64..100.0, 0..40), s in -150.0f64..150.0, d in 0.0f64..50.0) {
        let seq = ZeroSequence::from_reals(&pts).unwrap();
        prop_assert!(counting_function(&seq, s) <= counting_function(&seq, s + d));
    }

    #[test]
    fn delta_star_ignores_constant_shifts(
        vals in prop::collection::vec(-10.0f64..10.0, 30),
        shift in -100.0f64..100.0,
    ) {
        let grid: Vec<f64> = (0..30).map(|k| k as f64).collect();
        let g = SampledFunction::new(grid.clone(), vals.clone()).unwrap();
        let h = SampledFunction::new(grid, vals.iter().map(|v| v + shift).collect()).unwrap();
        let a = delta_star(&g, 0.0, 29.0).unwrap();
        let b = delta_star(&h, 0.0, 29.0).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + shift.abs()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn conjugate_of_shifted_poisson_kernel(s in -20.0f64..20.0, x in -30.0f64..30.0) {
        // The compensated kernel fixes u~ only up to a constant depending on
        // s, so compare increments.
        let u = shifted_poisson(s);
        let v = conjugate_function(&u, x, &PvConfig::default()).unwrap().value;
        let v0 = conjugate_function(&u, s, &PvConfig::default()).unwrap().value;
        let exact = (x - s) / (1.0 + (x - s) * (x - s));
        prop_assert!((v - v0 - exact).abs() < 1e-6, "{} vs {}", v - v0, exact);
    }

    #[test]
    fn conjugation_is_linear_and_odd_under_reflection(s in -10.0f64..10.0, a in -3.0f64..3.0, x in -15.0f64..15.0) {
        let pv = PvConfig::default();
        let u = shifted_poisson(s);
        let v = shifted_poisson(-2.0 * s + 1.0);
        let w = AnalyticFunction::new(
            move |t: f64| a / (1.0 + (t - s) * (t - s)) + 1.0 / (1.0 + (t + 2.0 * s - 1.0).powi(2)),
            -1000.0,
            1000.0,
        )
        .with_tail(TailModel::symmetric(a + 1.0, 2.0));
        let lhs = conjugate_function(&w, x, &pv).unwrap().value;
        let rhs = a * conjugate_function(&u, x, &pv).unwrap().value + conjugate_function(&v, x, &pv).unwrap().value;
        prop_assert!((lhs - rhs).abs() < 1e-8);
        // u(-t) has conjugate -u~(-x).
        let reflected = shifted_poisson(-s);
        let r = conjugate_function(&reflected, -x, &pv).unwrap().value;
        prop_assert!((r + conjugate_function(&u, x, &pv).unwrap().value).abs() < 1e-8);
    }
}

#[test]
fn conjugate_of_cosine_tail_free_bump() {
    // u = cos(pi t) on [-1/2, 1/2]: spot value against direct quadrature of
    // the principal value with the symmetric kernel 1/(x - t).
    let u = AnalyticFunction::new(|t: f64| if t.abs() <= 0.5 { (PI * t).cos() } else { 0.0 }, -10.0, 10.0)
        .with_breakpoints(vec![-0.5, 0.5]);
    let x = 2.0;
    let n = 200_000;
    let direct: f64 = (0..n)
        .map(|k| {
            let t = -0.5 + (k as f64 + 0.5) / n as f64;
            (PI * t).cos() / (x - t)
        })
        .sum::<f64>()
        / n as f64
        / PI;
    let v = conjugate_function(&u, x, &PvConfig::default()).unwrap();
    assert!((v.value - direct).abs() < 1e-8, "{} vs {direct}", v.value);
}
