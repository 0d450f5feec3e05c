//! Properties that span several modules.

use std::f64::consts::PI;

use dpfourier::analytic::{extract_coeffs_cauchy, InnerAnalytic};
use dpfourier::catalog;
use dpfourier::coeffs::{weighted_partial_sum, CoefficientSource, DpSeries, FcPair, Parity};
use dpfourier::recovery::{radial_limit, Ladder, RadialStatus, RecoveryOptions};
use dpfourier::series::{eval_sz, KPolicy, PolarPoint, TruncatedSeries, Truncation};
use proptest::prelude::*;

fn table(values: &[f64]) -> FcPair {
    FcPair::new(CoefficientSource::table(values.to_vec()).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    /// For a finite coefficient table the radial limit is the plain sum on
    /// the circle.
    #[test]
    fn abel_limit_of_a_polynomial_is_its_boundary_value(
        coeffs in prop::collection::vec(-1.0f64..1.0, 1..12),
        theta in -3.0f64..3.0,
    ) {
        let pair = table(&coeffs);
        let w = TruncatedSeries::new(pair.clone(), Truncation::Fixed(coeffs.len()));
        let r = radial_limit(&w, theta, &Ladder::default(), &RecoveryOptions::default()).unwrap();
        let exact = eval_sz(&pair, PolarPoint::on_circle(theta), coeffs.len()).value;
        prop_assert_eq!(r.status, RadialStatus::Converged);
        prop_assert!((r.estimate - exact).norm() < 1e-7, "{} vs {}", r.estimate, exact);
    }

    /// Cosine series are even and sine series odd, and so are their radial
    /// limits.
    #[test]
    fn recovered_parts_have_definite_parity(theta in 0.2f64..2.9) {
        let e = catalog::entry("sawtooth-2").unwrap();
        let w = e.series(KPolicy::default());
        let opts = RecoveryOptions::default();
        let plus = radial_limit(&w, theta, &Ladder::default(), &opts).unwrap().estimate;
        let minus = radial_limit(&w, -theta, &Ladder::default(), &opts).unwrap().estimate;
        prop_assert!((plus.re - minus.re).abs() < 1e-8);
        prop_assert!((plus.im + minus.im).abs() < 1e-8);
    }

    /// Extraction inverts evaluation: coefficients read back from the
    /// series' own values on a circle are the table.
    #[test]
    fn cauchy_extraction_inverts_series_evaluation(
        coeffs in prop::collection::vec(-2.0f64..2.0, 1..20),
        rho in 0.4f64..0.95,
    ) {
        let n = coeffs.len();
        let w = TruncatedSeries::new(table(&coeffs), Truncation::Fixed(n));
        let got = extract_coeffs_cauchy(&w, n, rho, 256).unwrap();
        let scale: f64 = coeffs.iter().map(|a| a.abs()).sum();
        for (k, (c, want)) in (1..).zip(got.iter().zip(&coeffs)) {
            // rounding in w is amplified by rho^-k
            let tol = 1e-14 * scale * rho.powi(-k) + 1e-15;
            prop_assert!((c.value - want).abs() < tol, "k={} {} vs {}", k, c.value, want);
        }
    }

    /// The real and imaginary parts of S_z are the weighted cosine and sine
    /// partial sums.
    #[test]
    fn power_series_splits_into_the_pair(
        coeffs in prop::collection::vec(-1.0f64..1.0, 1..40),
        rho in 0.0f64..1.0,
        theta in -PI..PI,
    ) {
        let src = std::sync::Arc::new(CoefficientSource::table(coeffs.clone()).unwrap());
        let pair = FcPair::new(src.clone());
        let z = eval_sz(&pair, PolarPoint::new(rho, theta), coeffs.len()).value;
        let cos = weighted_partial_sum(&DpSeries::new(src.clone(), Parity::Cosine), rho, theta, coeffs.len());
        let sin = weighted_partial_sum(&DpSeries::new(src, Parity::Sine), rho, theta, coeffs.len());
        prop_assert!((z.re - cos).abs() < 1e-12);
        prop_assert!((z.im - sin).abs() < 1e-12);
    }
}

#[test]
fn closed_forms_agree_with_their_series_inside_the_disk() {
    for name in ["sawtooth-1", "square", "sawtooth-2", "delta"] {
        let e = catalog::entry(name).unwrap();
        let closed = e.inner();
        let series = e.series(KPolicy::default());
        for &(rho, theta) in &[(0.3, 0.4), (0.8, -2.0), (0.95, 3.0)] {
            let p = PolarPoint::new(rho, theta);
            let d = (closed.eval(p) - series.eval(p)).norm();
            assert!(d < 1e-12, "{name} at {p:?}: {d:e}");
        }
    }
}
