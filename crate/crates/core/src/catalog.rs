//! Worked examples with known closed forms, used as oracles.
//!
//! | name         | coefficients                | `w(z)`                     |
//! |--------------|-----------------------------|----------------------------|
//! | `sawtooth-1` | `-(2/pi)(-1)^k/k`           | `(2/pi) ln(1+z)`           |
//! | `square`     | `4/(pi k)`, odd `k`         | `(2/pi) ln((1+z)/(1-z))`   |
//! | `sawtooth-2` | `-(4/pi)/k`, even `k`       | `(2/pi) ln(1-z^2)`         |
//! | `triangular` | `-(8/pi^2)/k^2`, odd `k`    | none; `z w' = -(2/pi) w_sq` |
//! | `riemann`    | `1/j^2` at `k = j^2`        | none                       |
//! | `delta`      | `1/pi`, centred on `theta1` | `-(1/pi) z/(z - z1)`       |

use std::f64::consts::{FRAC_1_PI, FRAC_2_PI, PI};
use std::sync::Arc;

use num_complex::Complex64;

use crate::analytic::InnerAnalytic;
use crate::coeffs::{CoefficientSource, FcPair, Rule};
use crate::error::{Error, Result};
use crate::ext::{ComplexDd, Dd};
use crate::kernels::{delta_frame, delta_frame_extended, DeltaKernel};
use crate::quadrature::tanh_sinh;
use crate::recovery::SingularityClass;
use crate::series::{wrap_angle, KPolicy, PolarPoint, TruncatedSeries, Truncation};

pub const NAMES: [&str; 6] = [
    "sawtooth-1",
    "square",
    "sawtooth-2",
    "triangular",
    "riemann",
    "delta",
];

/// `ln(1 + z)` with `1 + z = (1 - rho) + 2 rho cos^2(theta/2) + i rho sin(theta)`.
fn ln_one_plus(rho: f64, theta: f64) -> Complex64 {
    let c = (0.5 * theta).cos();
    let re = (1.0 - rho) + 2.0 * rho * c * c;
    let im = rho * theta.sin();
    Complex64::new(0.5 * (re * re + im * im).ln(), im.atan2(re))
}

/// `ln(1 - z)` with `1 - z = (1 - rho) + 2 rho sin^2(theta/2) - i rho sin(theta)`.
fn ln_one_minus(rho: f64, theta: f64) -> Complex64 {
    let s = (0.5 * theta).sin();
    let re = (1.0 - rho) + 2.0 * rho * s * s;
    let im = -rho * theta.sin();
    Complex64::new(0.5 * (re * re + im * im).ln(), im.atan2(re))
}

/// Closed-form inner analytic functions of the catalog.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClosedForm {
    SawtoothOne,
    Square,
    SawtoothTwo,
    /// `z w'(z)` for the triangular wave.
    TriangularLogDerivative,
    /// The delta kernel without its constant term.
    Delta {
        theta1: f64,
    },
}

impl ClosedForm {
    fn eval_frame(&self, rho: f64, phi: f64) -> Complex64 {
        match self {
            ClosedForm::SawtoothOne => ln_one_plus(rho, phi) * FRAC_2_PI,
            ClosedForm::Square => (ln_one_plus(rho, phi) - ln_one_minus(rho, phi)) * FRAC_2_PI,
            ClosedForm::SawtoothTwo => (ln_one_plus(rho, phi) + ln_one_minus(rho, phi)) * FRAC_2_PI,
            ClosedForm::TriangularLogDerivative => {
                (ln_one_plus(rho, phi) - ln_one_minus(rho, phi)) * (-FRAC_2_PI * FRAC_2_PI)
            }
            ClosedForm::Delta { .. } => delta_frame(rho, phi),
        }
    }
}

impl InnerAnalytic for ClosedForm {
    fn eval(&self, p: PolarPoint) -> Complex64 {
        self.eval_frame(p.rho, wrap_angle(p.theta - self.rotation()))
    }

    fn rotation(&self) -> f64 {
        match self {
            ClosedForm::Delta { theta1 } => *theta1,
            _ => 0.0,
        }
    }

    fn has_extended(&self) -> bool {
        true
    }

    fn eval_frame_extended(&self, rho: Dd, unit: ComplexDd) -> Option<ComplexDd> {
        let z = unit.scale(rho);
        let two_over_pi = Dd::from(2.0) / Dd::PI;
        let lp = || (ComplexDd::ONE + z).ln();
        let lm = || (ComplexDd::ONE - z).ln();
        Some(match self {
            ClosedForm::SawtoothOne => lp().scale(two_over_pi),
            ClosedForm::Square => (lp() - lm()).scale(two_over_pi),
            ClosedForm::SawtoothTwo => (lp() + lm()).scale(two_over_pi),
            ClosedForm::TriangularLogDerivative => {
                (lp() - lm()).scale(-(two_over_pi * two_over_pi))
            }
            ClosedForm::Delta { .. } => delta_frame_extended(rho, unit),
        })
    }
}

/// A boundary point with the class the probe is expected to find there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingularPoint {
    pub theta: f64,
    pub expected: SingularityClass,
}

pub type BoundaryFn = fn(f64) -> f64;

#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub coeffs: Arc<CoefficientSource>,
    pub w_closed: Option<ClosedForm>,
    /// `z w'(z)`, stored where `w` itself has no closed form.
    pub log_derivative: Option<ClosedForm>,
    /// Constant term of the full function (the coefficients start at `k = 1`).
    pub offset: f64,
    /// Limit of `Im w` on the circle, away from `singular_points`.
    pub boundary_imag: Option<BoundaryFn>,
    /// Limit of `Re w` on the circle, away from `singular_points`.
    pub boundary_real: Option<BoundaryFn>,
    pub singular_points: Vec<SingularPoint>,
}

fn sawtooth_one_imag(theta: f64) -> f64 {
    theta / PI
}

fn sawtooth_one_real(theta: f64) -> f64 {
    let c = (0.5 * theta).cos();
    FRAC_1_PI * (4.0 * c * c).ln()
}

fn square_imag(theta: f64) -> f64 {
    theta.signum()
}

fn square_real(theta: f64) -> f64 {
    // (1 + cos)/(1 - cos) = cot^2(theta/2)
    let t = (0.5 * theta).tan();
    FRAC_1_PI * (1.0 / (t * t)).ln()
}

fn sawtooth_two_imag(theta: f64) -> f64 {
    2.0 * theta / PI - theta.signum()
}

fn sawtooth_two_real(theta: f64) -> f64 {
    let s = theta.sin();
    FRAC_1_PI * (4.0 * s * s).ln()
}

fn triangular_real(theta: f64) -> f64 {
    2.0 * theta.abs() / PI - 1.0
}

fn delta_real(_dtheta: f64) -> f64 {
    0.0
}

fn delta_imag(dtheta: f64) -> f64 {
    0.5 * FRAC_1_PI * (1.0 + dtheta.cos()) / dtheta.sin()
}

fn points(thetas: &[f64], class: SingularityClass) -> Vec<SingularPoint> {
    thetas
        .iter()
        .map(|&theta| SingularPoint {
            theta,
            expected: class,
        })
        .collect()
}

/// Looks up an entry by its CLI name. `delta` is centred on `theta1 = 0`.
pub fn entry(name: &str) -> Result<CatalogEntry> {
    let rule = |r| Arc::new(CoefficientSource::rule(r));
    let e = match name {
        "sawtooth-1" => CatalogEntry {
            name: "sawtooth-1",
            coeffs: rule(Rule::SawtoothOne),
            w_closed: Some(ClosedForm::SawtoothOne),
            log_derivative: None,
            offset: 0.0,
            boundary_imag: Some(sawtooth_one_imag),
            boundary_real: Some(sawtooth_one_real),
            singular_points: points(&[-PI, PI], SingularityClass::BorderlineHard),
        },
        "square" => CatalogEntry {
            name: "square",
            coeffs: rule(Rule::Square),
            w_closed: Some(ClosedForm::Square),
            log_derivative: None,
            offset: 0.0,
            boundary_imag: Some(square_imag),
            boundary_real: Some(square_real),
            singular_points: points(&[-PI, 0.0, PI], SingularityClass::BorderlineHard),
        },
        "sawtooth-2" => CatalogEntry {
            name: "sawtooth-2",
            coeffs: rule(Rule::SawtoothTwo),
            w_closed: Some(ClosedForm::SawtoothTwo),
            log_derivative: None,
            offset: 0.0,
            boundary_imag: Some(sawtooth_two_imag),
            boundary_real: Some(sawtooth_two_real),
            singular_points: points(&[-PI, 0.0, PI], SingularityClass::BorderlineHard),
        },
        "triangular" => CatalogEntry {
            name: "triangular",
            coeffs: rule(Rule::Triangular),
            w_closed: None,
            log_derivative: Some(ClosedForm::TriangularLogDerivative),
            offset: 0.0,
            boundary_imag: None,
            boundary_real: Some(triangular_real),
            singular_points: points(&[-PI, 0.0, PI], SingularityClass::BorderlineSoft(0)),
        },
        "riemann" => CatalogEntry {
            name: "riemann",
            coeffs: rule(Rule::Riemann),
            w_closed: None,
            log_derivative: None,
            offset: 0.0,
            boundary_imag: None,
            boundary_real: None,
            singular_points: Vec::new(),
        },
        "delta" => return Ok(delta_entry(0.0)),
        other => return Err(Error::UnknownEntry(other.to_string())),
    };
    Ok(e)
}

/// The delta series centred on `theta1`. Boundary functions take the offset
/// `theta - theta1`.
pub fn delta_entry(theta1: f64) -> CatalogEntry {
    let theta1 = wrap_angle(theta1);
    CatalogEntry {
        name: "delta",
        coeffs: Arc::new(CoefficientSource::rule(Rule::Delta { theta1 })),
        w_closed: Some(ClosedForm::Delta { theta1 }),
        log_derivative: None,
        offset: 0.5 * FRAC_1_PI,
        boundary_imag: Some(delta_imag),
        boundary_real: Some(delta_real),
        singular_points: points(&[theta1], SingularityClass::HardPole(1)),
    }
}

impl CatalogEntry {
    pub fn pair(&self) -> FcPair {
        FcPair::new(Arc::clone(&self.coeffs))
    }

    /// The coefficient series with the default truncation policy and the
    /// entry's constant term.
    pub fn series(&self, policy: KPolicy) -> TruncatedSeries {
        TruncatedSeries::new(self.pair(), Truncation::Policy(policy)).with_offset(self.offset)
    }

    /// The full function, closed form where available.
    pub fn inner(&self) -> Box<dyn InnerAnalytic> {
        match self.w_closed {
            Some(ClosedForm::Delta { theta1 }) => Box::new(DeltaKernel::new(theta1)),
            Some(w) => Box::new(w),
            None => Box::new(self.series(KPolicy::default())),
        }
    }

    /// Angle relative to which the boundary functions are written.
    pub fn centre(&self) -> f64 {
        self.coeffs.rotation()
    }

    /// Distance from `theta` to the nearest singular point, on the circle.
    pub fn distance_to_singularity(&self, theta: f64) -> f64 {
        self.singular_points
            .iter()
            .map(|s| wrap_angle(theta - s.theta).abs())
            .fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct IdentityCheck {
    pub k: usize,
    pub numerical: f64,
    pub expected: f64,
    pub residual: f64,
}

/// Checks the integration formula attached to a catalog entry:
///
/// * `sawtooth-1`: `int ln[4 cos^2(t/2)] cos(kt) dt = -2 pi (-1)^k / k`
/// * `square`: `int ln[(1 + cos t)/(1 - cos t)] cos(kt) dt = 4 pi / k` (odd
///   `k`), `0` (even `k`)
/// * `sawtooth-2`: `int ln[4 sin^2 t] cos(kt) dt = -4 pi / k` (even `k`),
///   `0` (odd `k`)
/// * `delta`: `int [(1 + cos t)/sin t] sin(kt) dt = 2 pi`
///
/// All integrals run over `[-pi, pi]`. The integrands are even, so the rule
/// integrates over `[0, pi]` with tanh-sinh nodes that cluster at the
/// logarithmic end points without touching them. `nodes` is only used for the
/// resolution precondition `N >= 8k` shared with the other verifiers.
pub fn integration_identity_check(name: &str, k: usize, nodes: usize) -> Result<IdentityCheck> {
    if k == 0 {
        return Err(Error::InvalidArgument("mode index starts at 1".into()));
    }
    if nodes < 8 * k {
        return Err(Error::NyquistViolation {
            k,
            nodes,
            required: 8 * k,
        });
    }
    let kf = k as f64;
    let odd = k % 2 == 1;
    let half = |f: &dyn Fn(f64, f64, f64) -> f64| 2.0 * tanh_sinh(f, 0.0, PI, 1e-15, 12);
    let (numerical, expected) = match name {
        "sawtooth-1" => {
            // cos(t/2) = sin((pi - t)/2)
            let v = half(&|t, _, db| {
                let c = (0.5 * db).sin();
                (4.0 * c * c).ln() * (kf * t).cos()
            });
            let sign = if odd { -1.0 } else { 1.0 };
            (v, -2.0 * PI * sign / kf)
        }
        "square" => {
            // cot(t/2) = sin((pi - t)/2) / sin(t/2)
            let v = half(&|t, da, db| {
                let ratio = (0.5 * db).sin() / (0.5 * da).sin();
                2.0 * ratio.ln() * (kf * t).cos()
            });
            (v, if odd { 4.0 * PI / kf } else { 0.0 })
        }
        "sawtooth-2" => {
            let v = half(&|t, da, db| {
                let s = da.min(db).sin();
                (4.0 * s * s).ln() * (kf * t).cos()
            });
            (v, if odd { 0.0 } else { -4.0 * PI / kf })
        }
        "delta" => {
            // (1 + cos t)/sin t = cot(t/2)
            let v = half(&|_, da, db| {
                let cot = (0.5 * db).sin() / (0.5 * da).sin();
                cot * (kf * da).sin()
            });
            (v, 2.0 * PI)
        }
        "triangular" | "riemann" => {
            return Err(Error::InvalidArgument(format!(
                "entry `{name}` has no integration identity"
            )))
        }
        other => return Err(Error::UnknownEntry(other.to_string())),
    };
    Ok(IdentityCheck {
        k,
        numerical,
        expected,
        residual: (numerical - expected).abs(),
    })
}

/// Compares the theta-derivative of the truncated triangular series with
/// `-i (2/pi) w_square(z)`, which it equals because `dw/dtheta = i z w'(z)`.
/// Uses a fourth-order central difference with step `1e-3`.
pub fn triangular_derivative_check(rho: f64, theta: f64) -> Result<f64> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::RadiusOutOfRange {
            rho,
            range: "(0, 1)",
        });
    }
    let tri = entry("triangular")?.series(KPolicy::default());
    let d = 1e-3;
    let at = |t: f64| tri.eval(PolarPoint::new(rho, t));
    let derivative = (at(theta - 2.0 * d) - at(theta + 2.0 * d)
        + (at(theta + d) - at(theta - d)) * 8.0)
        / (12.0 * d);
    let w_sq = ClosedForm::Square.eval(PolarPoint::new(rho, theta));
    let expected = Complex64::new(0.0, -FRAC_2_PI) * w_sq;
    Ok((derivative - expected).norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::extract_coeffs_cauchy;

    #[test]
    fn lookup() {
        for name in NAMES {
            assert_eq!(entry(name).unwrap().name, name);
        }
        assert!(matches!(entry("sine"), Err(Error::UnknownEntry(_))));
        let sq = entry("square").unwrap();
        assert_eq!(sq.coeffs.coeff(3), 4.0 / (3.0 * PI));
        assert_eq!(sq.coeffs.coeff(4), 0.0);
        assert_eq!(
            entry("triangular").unwrap().coeffs.coeff(1),
            -8.0 / (PI * PI)
        );
    }

    #[test]
    fn closed_forms_match_their_coefficients() {
        for name in ["sawtooth-1", "square", "sawtooth-2", "delta"] {
            let e = entry(name).unwrap();
            let w = e.w_closed.unwrap();
            for rho in [0.5, 0.8] {
                for c in extract_coeffs_cauchy(&w, 32, rho, 4096).unwrap() {
                    let a = e.coeffs.coeff(c.k);
                    assert!((c.value - a).abs() < 1e-9, "{name} k={} rho={rho}", c.k);
                }
            }
        }
        let tri = entry("triangular").unwrap();
        let zw = tri.log_derivative.unwrap();
        for c in extract_coeffs_cauchy(&zw, 32, 0.5, 4096).unwrap() {
            let a = c.k as f64 * tri.coeffs.coeff(c.k);
            assert!((c.value - a).abs() < 1e-9);
        }
    }

    #[test]
    fn closed_forms_agree_with_complex_logs() {
        let one = Complex64::new(1.0, 0.0);
        for (rho, theta) in [(0.5, 0.3), (0.9, -2.9), (0.99, 1.7)] {
            let z = Complex64::from_polar(rho, theta);
            let p = PolarPoint::new(rho, theta);
            let sq = ((one + z) / (one - z)).ln() * FRAC_2_PI;
            assert!((ClosedForm::Square.eval(p) - sq).norm() < 1e-13);
            let s2 = (one - z * z).ln() * FRAC_2_PI;
            assert!((ClosedForm::SawtoothTwo.eval(p) - s2).norm() < 1e-13);
        }
    }

    #[test]
    fn boundary_functions_are_the_limits_of_the_closed_forms() {
        let rho = 1.0 - 1e-12;
        for name in ["sawtooth-1", "square", "sawtooth-2"] {
            let e = entry(name).unwrap();
            let w = e.w_closed.unwrap();
            for theta in [-2.5, -1.0, -0.2, 0.4, 1.5, 3.0] {
                let v = w.eval(PolarPoint::new(rho, theta));
                assert!(
                    (v.im - (e.boundary_imag.unwrap())(theta)).abs() < 1e-9,
                    "{name} {theta}"
                );
                assert!(
                    (v.re - (e.boundary_real.unwrap())(theta)).abs() < 1e-9,
                    "{name} {theta}"
                );
            }
        }
    }

    #[test]
    fn identity_examples() {
        let c = integration_identity_check("sawtooth-1", 1, 65536).unwrap();
        assert!((c.numerical - 2.0 * PI).abs() < 1e-6);
        let c = integration_identity_check("square", 2, 65536).unwrap();
        assert!(c.numerical.abs() < 1e-6);
        let c = integration_identity_check("delta", 7, 65536).unwrap();
        assert!((c.numerical - 2.0 * PI).abs() < 1e-6);
        assert!(integration_identity_check("square", 9, 64).is_err());
        assert!(integration_identity_check("riemann", 1, 64).is_err());
    }

    #[test]
    fn triangular_derivative_examples() {
        assert!(triangular_derivative_check(0.5, 1.0).unwrap() <= 1e-8);
        assert!(triangular_derivative_check(0.9, -2.0).unwrap() <= 1e-6);
        let tri = entry("triangular").unwrap().log_derivative.unwrap();
        // on the real axis z w' is real, so dw/dtheta = i z w' is imaginary
        let v = tri.eval(PolarPoint::new(0.5, 0.0));
        assert_eq!(v.im, 0.0);
    }

    #[test]
    fn riemann_uniform_convergence_bound() {
        let e = entry("riemann").unwrap();
        let pair = e.pair();
        for k in [1000usize, 10_000] {
            let tail: f64 = ((k as f64).sqrt().floor() as usize + 1..1_000_000)
                .map(|j| 1.0 / (j as f64 * j as f64))
                .sum();
            for i in 0..64 {
                let theta = -PI + 2.0 * PI * i as f64 / 64.0;
                let a = crate::series::eval_sv(&pair, theta, k).value;
                let b = crate::series::eval_sv(&pair, theta, 2 * k).value;
                assert!((a - b).norm() <= tail);
            }
        }
    }
}
