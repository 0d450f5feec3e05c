//! Taylor coefficients of inner analytic functions from circle quadrature.
//!
//! On the circle `|z| = rho` the trapezoid rule with `N` equispaced nodes
//! returns `a_k` up to aliased contributions of order `rho^N`, so for the
//! radii used here it is exact to rounding. The catch is the `rho^{-k}`
//! rescaling: it multiplies rounding noise by the same factor. Functions that
//! can evaluate themselves in double-double precision get a wider budget.

use std::f64::consts::{PI, TAU};
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ext::{ComplexDd, Dd};
use crate::series::PolarPoint;
use crate::sum::{CompensatedComplexSum, CompensatedSum};

/// A function analytic on the open unit disk, zero at the origin (up to a
/// constant term) and real on the ray through `e^{i rotation}`.
pub trait InnerAnalytic: Send + Sync {
    /// Value at `p`, with `p.theta` the absolute angle.
    fn eval(&self, p: PolarPoint) -> Complex64;

    /// Angle of the ray on which the function is real.
    fn rotation(&self) -> f64 {
        0.0
    }

    /// Whether `eval` can be trusted at this radius (series backends refuse
    /// radii whose truncation order exceeds their cap).
    fn reliable_at(&self, _rho: f64) -> bool {
        true
    }

    /// Whether [`InnerAnalytic::eval_frame_extended`] is implemented.
    fn has_extended(&self) -> bool {
        false
    }

    /// Double-double value at `rho * unit`, where `unit` is measured from the
    /// rotation angle.
    fn eval_frame_extended(&self, _rho: Dd, _unit: ComplexDd) -> Option<ComplexDd> {
        None
    }
}

impl<T: InnerAnalytic + ?Sized> InnerAnalytic for &T {
    fn eval(&self, p: PolarPoint) -> Complex64 {
        (**self).eval(p)
    }
    fn rotation(&self) -> f64 {
        (**self).rotation()
    }
    fn reliable_at(&self, rho: f64) -> bool {
        (**self).reliable_at(rho)
    }
    fn has_extended(&self) -> bool {
        (**self).has_extended()
    }
    fn eval_frame_extended(&self, rho: Dd, unit: ComplexDd) -> Option<ComplexDd> {
        (**self).eval_frame_extended(rho, unit)
    }
}

impl<T: InnerAnalytic + ?Sized> InnerAnalytic for Box<T> {
    fn eval(&self, p: PolarPoint) -> Complex64 {
        (**self).eval(p)
    }
    fn rotation(&self) -> f64 {
        (**self).rotation()
    }
    fn reliable_at(&self, rho: f64) -> bool {
        (**self).reliable_at(rho)
    }
    fn has_extended(&self) -> bool {
        (**self).has_extended()
    }
    fn eval_frame_extended(&self, rho: Dd, unit: ComplexDd) -> Option<ComplexDd> {
        (**self).eval_frame_extended(rho, unit)
    }
}

/// `sum_{k=1}^{d} a_k z^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    /// `coeffs[k - 1] = a_k`.
    pub coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Polynomial { coeffs }
    }

    /// `z^n`.
    pub fn monomial(n: usize) -> Self {
        let mut coeffs = vec![0.0; n];
        coeffs[n - 1] = 1.0;
        Polynomial { coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len()
    }

    pub fn eval_z(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for &a in self.coeffs.iter().rev() {
            acc = (acc + a) * z;
        }
        acc
    }
}

impl InnerAnalytic for Polynomial {
    fn eval(&self, p: PolarPoint) -> Complex64 {
        self.eval_z(p.z())
    }

    fn has_extended(&self) -> bool {
        true
    }

    fn eval_frame_extended(&self, rho: Dd, unit: ComplexDd) -> Option<ComplexDd> {
        let z = unit.scale(rho);
        let mut acc = ComplexDd::ZERO;
        for &a in self.coeffs.iter().rev() {
            acc = (acc + ComplexDd::new(Dd::from(a), Dd::ZERO)) * z;
        }
        Some(acc)
    }
}

/// Default node count for circle quadrature.
pub const DEFAULT_NODES: usize = 4096;
/// Largest `k ln(1/rho)` accepted when only double precision is available.
pub const AMPLIFICATION_LIMIT: f64 = 30.0;
/// Largest `k ln(1/rho)` accepted with a double-double evaluator.
pub const AMPLIFICATION_LIMIT_EXTENDED: f64 = 60.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Precision {
    Double,
    DoubleDouble,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CauchyCoefficient {
    pub k: usize,
    pub value: f64,
    /// Imaginary part of the quadrature; zero for a genuinely real series.
    pub residual_im: f64,
    pub precision: Precision,
}

fn check_radius(rho: f64) -> Result<()> {
    if rho > 0.0 && rho < 1.0 {
        Ok(())
    } else {
        Err(Error::RadiusOutOfRange {
            rho,
            range: "(0, 1)",
        })
    }
}

fn check_nyquist(k: usize, nodes: usize) -> Result<()> {
    let required = (8 * k).max(1);
    if nodes < required {
        Err(Error::NyquistViolation { k, nodes, required })
    } else {
        Ok(())
    }
}

/// Frame angle of node `j`: `-pi + 2 pi j / N`.
fn node_angle(j: usize, nodes: usize) -> f64 {
    -PI + TAU * j as f64 / nodes as f64
}

type RootTable = Arc<Vec<ComplexDd>>;

/// `omega^m = e^{2 pi i m / N}` for `m < N`, in double-double, cached by `N`.
fn roots_of_unity(nodes: usize) -> RootTable {
    static CACHE: OnceLock<Mutex<Vec<(usize, RootTable)>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(Vec::new()));
    if let Some((_, t)) = cache.lock().unwrap().iter().find(|(n, _)| *n == nodes) {
        return Arc::clone(t);
    }
    let table: Vec<ComplexDd> = (0..nodes)
        .map(|m| ComplexDd::cis(Dd::PI.mul_f64(2.0 * m as f64).div_f64(nodes as f64)))
        .collect();
    let table = Arc::new(table);
    let mut guard = cache.lock().unwrap();
    if guard.len() >= 8 {
        guard.remove(0);
    }
    guard.push((nodes, Arc::clone(&table)));
    table
}

/// Taylor coefficients `a_1..a_{k_max}` of `w` from one set of `N` samples on
/// the circle of radius `rho`.
pub fn extract_coeffs_cauchy<W: InnerAnalytic + ?Sized>(
    w: &W,
    k_max: usize,
    rho: f64,
    nodes: usize,
) -> Result<Vec<CauchyCoefficient>> {
    check_radius(rho)?;
    check_nyquist(k_max, nodes)?;
    let exponent = k_max as f64 * (1.0 / rho).ln();
    let limit = if w.has_extended() {
        AMPLIFICATION_LIMIT_EXTENDED
    } else {
        AMPLIFICATION_LIMIT
    };
    if exponent > limit {
        return Err(Error::AmplificationOverflow {
            k: k_max,
            rho,
            exponent,
            limit,
        });
    }
    if w.has_extended() {
        if let Some(out) = extract_extended(w, k_max, rho, nodes) {
            return Ok(out);
        }
    }
    if exponent > AMPLIFICATION_LIMIT {
        return Err(Error::AmplificationOverflow {
            k: k_max,
            rho,
            exponent,
            limit: AMPLIFICATION_LIMIT,
        });
    }
    Ok(extract_double(w, k_max, rho, nodes))
}

/// The single coefficient `a_k`.
pub fn extract_coeff_cauchy<W: InnerAnalytic + ?Sized>(
    w: &W,
    k: usize,
    rho: f64,
    nodes: usize,
) -> Result<CauchyCoefficient> {
    if k == 0 {
        return Err(Error::InvalidArgument(
            "coefficient index starts at 1".into(),
        ));
    }
    let all = extract_coeffs_cauchy(w, k, rho, nodes)?;
    Ok(all[k - 1])
}

fn extract_double<W: InnerAnalytic + ?Sized>(
    w: &W,
    k_max: usize,
    rho: f64,
    nodes: usize,
) -> Vec<CauchyCoefficient> {
    let rot = w.rotation();
    let samples: Vec<(f64, Complex64)> = (0..nodes)
        .map(|j| {
            let phi = node_angle(j, nodes);
            (phi, w.eval(PolarPoint::new(rho, phi + rot)))
        })
        .collect();
    (1..=k_max)
        .map(|k| {
            let mut acc = CompensatedComplexSum::new();
            for &(phi, v) in &samples {
                acc.add(v * Complex64::from_polar(1.0, -(k as f64) * phi));
            }
            let scaled = acc.value() * (rho.powi(-(k as i32)) / nodes as f64);
            CauchyCoefficient {
                k,
                value: scaled.re,
                residual_im: scaled.im,
                precision: Precision::Double,
            }
        })
        .collect()
}

fn extract_extended<W: InnerAnalytic + ?Sized>(
    w: &W,
    k_max: usize,
    rho: f64,
    nodes: usize,
) -> Option<Vec<CauchyCoefficient>> {
    let roots = roots_of_unity(nodes);
    let rho_dd = Dd::from(rho);
    // e^{i phi_j} = -omega^j for phi_j = -pi + 2 pi j / N
    let mut samples = Vec::with_capacity(nodes);
    for root in roots.iter() {
        samples.push(w.eval_frame_extended(rho_dd, -*root)?);
    }
    let inv_rho = Dd::ONE / rho_dd;
    let mut scale = Dd::ONE.div_f64(nodes as f64);
    let mut out = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        scale = scale * inv_rho;
        let mut acc = ComplexDd::ZERO;
        for (j, v) in samples.iter().enumerate() {
            // e^{-i k phi_j} = (-1)^k conj(omega^{k j mod N})
            let r = roots[(k * j) % nodes].conj();
            acc = acc + *v * r;
        }
        if k % 2 == 1 {
            acc = -acc;
        }
        let scaled = acc.scale(scale);
        out.push(CauchyCoefficient {
            k,
            value: scaled.re.to_f64(),
            residual_im: scaled.im.to_f64(),
            precision: Precision::DoubleDouble,
        });
    }
    Some(out)
}

/// The four real circle integrals of `f_c = Re w`, `f_s = Im w` against
/// `cos(k phi)` and `sin(k phi)`, `phi` measured from the rotation angle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CircleIntegrals {
    /// `int f_c cos`.
    pub fc_cos: f64,
    /// `int f_s sin`.
    pub fs_sin: f64,
    /// `int f_s cos`.
    pub fs_cos: f64,
    /// `int f_c sin`.
    pub fc_sin: f64,
}

pub fn circle_integrals<W: InnerAnalytic + ?Sized>(
    w: &W,
    k: usize,
    rho: f64,
    nodes: usize,
) -> Result<CircleIntegrals> {
    check_radius(rho)?;
    check_nyquist(k, nodes)?;
    let rot = w.rotation();
    let mut sums = [CompensatedSum::new(); 4];
    for j in 0..nodes {
        let phi = node_angle(j, nodes);
        let v = w.eval(PolarPoint::new(rho, phi + rot));
        let (s, c) = (k as f64 * phi).sin_cos();
        sums[0].add(v.re * c);
        sums[1].add(v.im * s);
        sums[2].add(v.im * c);
        sums[3].add(v.re * s);
    }
    let h = TAU / nodes as f64;
    Ok(CircleIntegrals {
        fc_cos: sums[0].value() * h,
        fs_sin: sums[1].value() * h,
        fs_cos: sums[2].value() * h,
        fc_sin: sums[3].value() * h,
    })
}

/// `(int f_s cos(k phi), int f_c sin(k phi))`; both vanish for inner
/// analytic functions.
pub fn parity_vanishing_check<W: InnerAnalytic + ?Sized>(
    w: &W,
    k: usize,
    rho: f64,
    nodes: usize,
) -> Result<(f64, f64)> {
    let i = circle_integrals(w, k, rho, nodes)?;
    Ok((i.fs_cos, i.fc_sin))
}

/// `|int f_c cos(k phi) - int f_s sin(k phi)|`, which vanishes because
/// `w z^{k-1}` integrates to zero around the circle.
pub fn cross_equality_check<W: InnerAnalytic + ?Sized>(
    w: &W,
    k: usize,
    rho: f64,
    nodes: usize,
) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidArgument("mode index starts at 1".into()));
    }
    let i = circle_integrals(w, k, rho, nodes)?;
    Ok((i.fc_cos - i.fs_sin).abs())
}
