//! The delta kernel `w_delta(z) = 1/(2 pi) - (1/pi) z / (z - z1)` and the
//! numerical checks built around it: the four delta properties,
//! orthogonality of the trigonometric system on circles, and the partial
//! completeness kernel.

use std::f64::consts::{FRAC_1_PI, PI};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::analytic::InnerAnalytic;
use crate::error::{Error, Result};
use crate::ext::{ComplexDd, Dd};
use crate::quadrature::{periodic_trapezoid, NodeOffset};
use crate::recovery::{radial_limit, richardson, Ladder, RadialStatus, RecoveryOptions};
use crate::series::{wrap_angle, PolarPoint};
use crate::sum::{CompensatedComplexSum, CompensatedSum};

const HALF_INV_PI: f64 = 0.5 * FRAC_1_PI;

/// `-(1/pi) z / (z - z1)` at `z = rho z1 e^{i dtheta}`, written with
/// `|1 - u|^2 = (1 - rho)^2 + 4 rho sin^2(dtheta / 2)` to avoid cancellation
/// near the pole.
pub(crate) fn delta_frame(rho: f64, dtheta: f64) -> Complex64 {
    let s = (0.5 * dtheta).sin();
    let h = 1.0 - rho;
    let d = h * h + 4.0 * rho * s * s;
    // rho - cos(dtheta) = 2 sin^2(dtheta/2) - (1 - rho)
    let re = -rho * (2.0 * s * s - h) / d;
    let im = rho * dtheta.sin() / d;
    Complex64::new(re, im) * FRAC_1_PI
}

pub(crate) fn delta_frame_extended(rho: Dd, unit: ComplexDd) -> ComplexDd {
    let u = unit.scale(rho);
    let ratio = u / (ComplexDd::ONE - u);
    ratio.scale(Dd::ONE / Dd::PI)
}

/// `w_delta` centred on `z1 = e^{i theta1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeltaKernel {
    pub theta1: f64,
}

impl DeltaKernel {
    pub fn new(theta1: f64) -> Self {
        DeltaKernel {
            theta1: wrap_angle(theta1),
        }
    }
}

impl InnerAnalytic for DeltaKernel {
    fn eval(&self, p: PolarPoint) -> Complex64 {
        delta_frame(p.rho, wrap_angle(p.theta - self.theta1)) + HALF_INV_PI
    }

    fn rotation(&self) -> f64 {
        self.theta1
    }

    fn has_extended(&self) -> bool {
        true
    }

    fn eval_frame_extended(&self, rho: Dd, unit: ComplexDd) -> Option<ComplexDd> {
        let offset = ComplexDd::new(Dd::ONE / Dd::PI.mul_f64(2.0), Dd::ZERO);
        Some(delta_frame_extended(rho, unit) + offset)
    }
}

/// Closed-form value of the kernel. Defined on the closed disk except at the
/// pole `z = z1`.
pub fn delta_eval(kern: &DeltaKernel, p: PolarPoint) -> Result<Complex64> {
    let dtheta = wrap_angle(p.theta - kern.theta1);
    if !(p.rho >= 0.0 && p.rho <= 1.0) {
        return Err(Error::RadiusOutOfRange {
            rho: p.rho,
            range: "[0, 1]",
        });
    }
    if p.rho == 1.0 && dtheta == 0.0 {
        return Err(Error::RadiusOutOfRange {
            rho: p.rho,
            range: "[0, 1) at the kernel centre",
        });
    }
    Ok(delta_frame(p.rho, dtheta) + HALF_INV_PI)
}

/// `int_{-pi}^{pi} Re w_delta(rho, theta) dtheta`, which equals 1 for every
/// `rho < 1`.
pub fn normalization_integral(kern: &DeltaKernel, rho: f64, nodes: usize) -> f64 {
    periodic_trapezoid(
        |phi| kern.eval(PolarPoint::new(rho, kern.theta1 + phi)).re,
        nodes,
        NodeOffset::Half,
    )
}

/// `int Re w_delta(rho, theta) gamma(e^{i theta}) dtheta`, which reproduces
/// `gamma(rho e^{i theta1})` for `gamma` analytic on the closed disk.
pub fn sifting_integral<G: InnerAnalytic + ?Sized>(
    kern: &DeltaKernel,
    rho: f64,
    gamma: &G,
    nodes: usize,
) -> Complex64 {
    let h = 2.0 * PI / nodes as f64;
    let mut acc = CompensatedComplexSum::new();
    for j in 0..nodes {
        let phi = -PI + (j as f64 + 0.5) * h;
        let weight = delta_frame(rho, phi).re + HALF_INV_PI;
        acc.add(gamma.eval(PolarPoint::new(1.0, kern.theta1 + phi)) * weight);
    }
    acc.value() * h
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PropertyCheck {
    pub max_residual: f64,
    pub passed: bool,
}

impl PropertyCheck {
    fn new(max_residual: f64, tol: f64) -> Self {
        PropertyCheck {
            max_residual,
            passed: max_residual <= tol,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeltaReport {
    /// Radial limit of `Re w_delta` away from `theta1` is zero.
    pub vanishing: PropertyCheck,
    /// `Re w_delta` grows without bound at `theta1`, like `1/(pi (1 - rho))`.
    pub divergence: PropertyCheck,
    /// Unit integral at every sampled radius.
    pub normalization: PropertyCheck,
    /// Sifting of the test function at every sampled radius.
    pub sifting: PropertyCheck,
}

impl DeltaReport {
    pub fn all_passed(&self) -> bool {
        self.vanishing.passed
            && self.divergence.passed
            && self.normalization.passed
            && self.sifting.passed
    }
}

pub const DELTA_TOL: f64 = 1e-8;

/// Offsets from `theta1` used for the vanishing property.
const AWAY_OFFSETS: [f64; 8] = [-3.0, -2.0, -1.0, -0.25, 0.25, 1.0, 2.0, 3.0];

/// Checks the four delta properties for `kern`, the normalization and
/// sifting integrals at each of `rhos` with an `N`-node half-offset
/// trapezoid rule.
pub fn delta_property_suite<G: InnerAnalytic + ?Sized>(
    kern: &DeltaKernel,
    rhos: &[f64],
    test_fn: &G,
    nodes: usize,
) -> Result<DeltaReport> {
    let ladder = Ladder::default();
    let opts = RecoveryOptions::default();

    let mut vanishing = 0.0f64;
    for off in AWAY_OFFSETS {
        let r = radial_limit(kern, kern.theta1 + off, &ladder, &opts)?;
        let residual = if r.status == RadialStatus::Converged {
            r.estimate.re.abs()
        } else {
            f64::INFINITY
        };
        vanishing = vanishing.max(residual);
    }

    let at_centre = radial_limit(kern, kern.theta1, &ladder, &opts)?;
    let growing = at_centre.samples.windows(2).all(|w| w[1].re > w[0].re);
    // (1 - rho) Re w_delta is linear in 1 - rho; its extrapolation is 1/pi
    let scaled: Vec<(f64, f64)> = at_centre
        .samples
        .iter()
        .map(|s| (1.0 - s.rho, (1.0 - s.rho) * s.re))
        .collect();
    let n = scaled.len();
    let limit = richardson(
        [scaled[n - 3].0, scaled[n - 2].0, scaled[n - 1].0],
        [scaled[n - 3].1, scaled[n - 2].1, scaled[n - 1].1],
    );
    let divergence = if growing {
        (limit * PI - 1.0).abs()
    } else {
        f64::INFINITY
    };

    let mut normalization = 0.0f64;
    let mut sifting = 0.0f64;
    for &rho in rhos {
        if !(rho > 0.0 && rho < 1.0) {
            return Err(Error::RadiusOutOfRange {
                rho,
                range: "(0, 1)",
            });
        }
        normalization = normalization.max((normalization_integral(kern, rho, nodes) - 1.0).abs());
        let expected = test_fn.eval(PolarPoint::new(rho, kern.theta1));
        sifting = sifting.max((sifting_integral(kern, rho, test_fn, nodes) - expected).norm());
    }

    Ok(DeltaReport {
        vanishing: PropertyCheck::new(vanishing, DELTA_TOL),
        divergence: PropertyCheck::new(divergence, DELTA_TOL),
        normalization: PropertyCheck::new(normalization, DELTA_TOL),
        sifting: PropertyCheck::new(sifting, DELTA_TOL),
    })
}

/// `(1/pi) int cos cos`, `(1/pi) int sin sin` and `(1/pi) int cos sin` for
/// every pair of modes up to `k_max`, row-major.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrthogonalityReport {
    pub k_max: usize,
    pub rho: f64,
    pub cc: Vec<f64>,
    pub ss: Vec<f64>,
    pub cs: Vec<f64>,
}

impl OrthogonalityReport {
    /// Values for modes `(k, k')`, both starting at 1.
    pub fn entry(&self, k: usize, k2: usize) -> (f64, f64, f64) {
        let i = (k - 1) * self.k_max + (k2 - 1);
        (self.cc[i], self.ss[i], self.cs[i])
    }

    /// Largest deviation from `(delta, delta, 0)`.
    pub fn max_deviation(&self) -> f64 {
        let mut worst = 0.0f64;
        for k in 1..=self.k_max {
            for k2 in 1..=self.k_max {
                let (cc, ss, cs) = self.entry(k, k2);
                let d = if k == k2 { 1.0 } else { 0.0 };
                worst = worst.max((cc - d).abs()).max((ss - d).abs()).max(cs.abs());
            }
        }
        worst
    }
}

/// Orthogonality integrals computed from the powers of `z` on the circle of
/// radius `rho`: with `A = mean z^k z^{-k'}` and `B = mean z^k z^{k'}`,
/// `cc = rho^{k'-k} Re A + rho^{-k-k'} Re B`, and similarly for `ss`, `cs`.
/// The `rho` factors cancel exactly, which is the point of the check.
pub fn orthogonality_matrix(k_max: usize, rho: f64, nodes: usize) -> Result<OrthogonalityReport> {
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(Error::RadiusOutOfRange {
            rho,
            range: "(0, 1]",
        });
    }
    let required = 8 * k_max;
    if nodes < required {
        return Err(Error::NyquistViolation {
            k: k_max,
            nodes,
            required,
        });
    }
    let thetas: Vec<f64> = (0..nodes)
        .map(|j| -PI + 2.0 * PI * j as f64 / nodes as f64)
        .collect();
    // powers[k][j] = z_j^k and inverse[k][j] = z_j^{-k}
    let powers: Vec<Vec<Complex64>> = (0..=k_max)
        .map(|k| {
            let r = rho.powi(k as i32);
            thetas
                .iter()
                .map(|t| Complex64::from_polar(r, k as f64 * t))
                .collect()
        })
        .collect();
    let inverse: Vec<Vec<Complex64>> = (0..=k_max)
        .map(|k| {
            let r = rho.powi(-(k as i32));
            thetas
                .iter()
                .map(|t| Complex64::from_polar(r, -(k as f64) * t))
                .collect()
        })
        .collect();

    let rows: Vec<Vec<(f64, f64, f64)>> = (1..=k_max)
        .into_par_iter()
        .map(|k| {
            (1..=k_max)
                .map(|k2| {
                    let mut a = CompensatedComplexSum::new();
                    let mut b = CompensatedComplexSum::new();
                    for j in 0..nodes {
                        a.add(powers[k][j] * inverse[k2][j]);
                        b.add(powers[k][j] * powers[k2][j]);
                    }
                    let a = a.value() / nodes as f64;
                    let b = b.value() / nodes as f64;
                    let fa = rho.powi(k2 as i32 - k as i32);
                    let fb = rho.powi(-((k + k2) as i32));
                    let cc = fa * a.re + fb * b.re;
                    let ss = fa * a.re - fb * b.re;
                    let cs = fb * b.im - fa * a.im;
                    (cc, ss, cs)
                })
                .collect()
        })
        .collect();

    let mut report = OrthogonalityReport {
        k_max,
        rho,
        cc: Vec::with_capacity(k_max * k_max),
        ss: Vec::with_capacity(k_max * k_max),
        cs: Vec::with_capacity(k_max * k_max),
    };
    for row in rows {
        for (cc, ss, cs) in row {
            report.cc.push(cc);
            report.ss.push(ss);
            report.cs.push(cs);
        }
    }
    Ok(report)
}

/// `1/(2 pi) + (1/pi) sum_{k<=K} rho^k [cos k theta cos k theta1 +
/// sin k theta sin k theta1]`.
pub fn completeness_partial_kernel(theta: f64, theta1: f64, k_trunc: usize, rho: f64) -> f64 {
    let mut acc = CompensatedSum::new();
    for k in 1..=k_trunc {
        let kf = k as f64;
        let (s, c) = (kf * theta).sin_cos();
        let (s1, c1) = (kf * theta1).sin_cos();
        let r = rho.powi(k as i32);
        acc.add(r * c * c1);
        acc.add(r * s * s1);
    }
    HALF_INV_PI + FRAC_1_PI * acc.value()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{extract_coeff_cauchy, Polynomial};
    use proptest::prelude::*;

    #[test]
    fn closed_form_values() {
        let k = DeltaKernel::new(0.0);
        let v = delta_eval(&k, PolarPoint::new(0.5, 0.0)).unwrap();
        assert!((v.re - 3.0 / (2.0 * PI)).abs() < 1e-15);
        let v = delta_eval(&k, PolarPoint::new(1.0, PI / 2.0)).unwrap();
        assert!(v.re.abs() < 1e-16);
        for dt in [0.3, 1.0, 2.5, -1.7] {
            let v = delta_eval(&k, PolarPoint::new(1.0, dt)).unwrap();
            let expected = (1.0 + dt.cos()) / dt.sin() / (2.0 * PI);
            assert!((v.im - expected).abs() < 1e-14);
        }
        assert!(delta_eval(&k, PolarPoint::new(1.0, 0.0)).is_err());
        assert!(delta_eval(&k, PolarPoint::new(1.2, 1.0)).is_err());
    }

    #[test]
    fn kernel_matches_textbook_form() {
        let k = DeltaKernel::new(0.7);
        for (rho, theta) in [(0.3, 0.1), (0.9, 2.0), (0.99, -1.0)] {
            let z = Complex64::from_polar(rho, theta);
            let z1 = Complex64::from_polar(1.0, 0.7);
            let w = HALF_INV_PI - FRAC_1_PI * z / (z - z1);
            assert!((k.eval(PolarPoint::new(rho, theta)) - w).norm() < 1e-13);
        }
    }

    #[test]
    fn taylor_coefficients_are_one_over_pi() {
        let k = DeltaKernel::new(-2.0);
        for n in [1, 5, 20] {
            let c = extract_coeff_cauchy(&k, n, 0.5, 4096).unwrap();
            assert!((c.value - FRAC_1_PI).abs() < 1e-12);
        }
    }

    #[test]
    fn suite_passes_for_polynomials() {
        let k = DeltaKernel::new(PI / 4.0);
        let r =
            delta_property_suite(&k, &[0.5, 0.9, 0.99], &Polynomial::monomial(2), 4096).unwrap();
        assert!(r.all_passed(), "{r:?}");
        let z2 = Polynomial::monomial(2);
        let i2 = sifting_integral(&k, 0.8, &z2, 4096);
        let expected = Complex64::from_polar(0.8, PI / 4.0).powu(2);
        assert!((i2 - expected).norm() < 1e-12);
        assert!(sifting_integral(&k, 0.8, &Polynomial::new(vec![0.0]), 4096).norm() == 0.0);
    }

    #[test]
    fn radius_weighted_variant_scales_with_rho() {
        // integrating over the circle of radius rho with the arc-length
        // weight gives rho, and sifting then lands on gamma(rho^2 z1)
        let k = DeltaKernel::new(0.4);
        let rho = 0.8;
        let n = 4096;
        let i1 = periodic_trapezoid(
            |phi| (delta_frame(rho, phi).re + HALF_INV_PI) * rho,
            n,
            NodeOffset::Half,
        );
        assert!((i1 - rho).abs() < 1e-12);
        let gamma = Polynomial::monomial(2);
        let h = 2.0 * PI / n as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..n {
            let phi = -PI + (j as f64 + 0.5) * h;
            let weight = delta_frame(rho, phi).re + HALF_INV_PI;
            acc += gamma.eval(PolarPoint::new(rho, k.theta1 + phi)) * weight;
        }
        let expected = Complex64::from_polar(rho * rho, k.theta1).powu(2);
        assert!((acc * h - expected).norm() < 1e-12);
    }

    #[test]
    fn orthogonality_examples() {
        let m = orthogonality_matrix(8, 1.0, 64).unwrap();
        let (cc, ss, cs) = m.entry(3, 3);
        assert!((cc - 1.0).abs() < 1e-14 && (ss - 1.0).abs() < 1e-14 && cs.abs() < 1e-14);
        let (cc, ss, cs) = m.entry(2, 5);
        assert!(cc.abs() < 1e-14 && ss.abs() < 1e-14 && cs.abs() < 1e-14);
        let half = orthogonality_matrix(8, 0.5, 64).unwrap();
        let (a, b) = (m.entry(1, 1), half.entry(1, 1));
        assert!((a.0 - b.0).abs() < 1e-14 && (a.1 - b.1).abs() < 1e-14);
        assert!(orthogonality_matrix(8, 0.5, 63).is_err());
        assert!(orthogonality_matrix(8, 1.5, 64).is_err());
    }

    #[test]
    fn completeness_kernel_examples() {
        assert_eq!(completeness_partial_kernel(0.3, 1.2, 0, 0.9), HALF_INV_PI);
        let v = completeness_partial_kernel(0.0, 0.0, 1000, 0.5);
        assert!((v - (HALF_INV_PI + FRAC_1_PI)).abs() < 1e-15);
        let k = DeltaKernel::new(0.2);
        let v = completeness_partial_kernel(0.2 + PI / 3.0, 0.2, 400, 0.9);
        let w = delta_eval(&k, PolarPoint::new(0.9, 0.2 + PI / 3.0)).unwrap();
        assert!((v - w.re).abs() < 1e-10);
    }

    #[test]
    fn rotated_kernel_is_real_on_its_ray() {
        let k = DeltaKernel::new(1.3);
        for chi in [-0.7, -0.3, 0.3, 0.7] {
            let p = PolarPoint::new(f64::abs(chi), if chi > 0.0 { 1.3 } else { 1.3 - PI });
            let v = k.eval(p) - HALF_INV_PI;
            assert!(v.im.abs() <= 1e-12, "{chi}: {}", v.im);
        }
    }

    proptest! {
        #[test]
        fn sifting_is_linear(
            a in -2.0f64..2.0, b in -2.0f64..2.0, c in -2.0f64..2.0,
            theta1 in -PI..PI, rho in 0.3f64..0.95,
        ) {
            let k = DeltaKernel::new(theta1);
            let n = 2048;
            let combo = Polynomial::new(vec![a, b, c]);
            let parts = [Polynomial::monomial(1), Polynomial::monomial(2), Polynomial::monomial(3)];
            let lhs = sifting_integral(&k, rho, &combo, n);
            let rhs = sifting_integral(&k, rho, &parts[0], n) * a
                + sifting_integral(&k, rho, &parts[1], n) * b
                + sifting_integral(&k, rho, &parts[2], n) * c;
            prop_assert!((lhs - rhs).norm() <= 1e-9);
        }

        #[test]
        fn partial_kernel_tail_bound(
            rho in 0.1f64..0.95, dtheta in -PI..PI, k_trunc in 1usize..300,
        ) {
            let k = DeltaKernel::new(0.0);
            let v = completeness_partial_kernel(dtheta, 0.0, k_trunc, rho);
            if let Ok(w) = delta_eval(&k, PolarPoint::new(rho, dtheta)) {
                let bound = rho.powi(k_trunc as i32 + 1) / (PI * (1.0 - rho));
                let slack = 16.0 * f64::EPSILON * (HALF_INV_PI + FRAC_1_PI * rho / (1.0 - rho));
                prop_assert!((v - w.re).abs() <= bound + slack);
            }
        }
    }
}
