//! Truncated evaluation of `S_z = sum a_k z^k` inside (and, for sampling,
//! outside) the unit disk.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::Serialize;

use crate::analytic::InnerAnalytic;
use crate::coeffs::{CoefficientSource, FcPair};
use crate::sum::CompensatedComplexSum;

/// `z = rho e^{i theta}` with theta kept in `[-pi, pi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PolarPoint {
    pub rho: f64,
    pub theta: f64,
}

impl PolarPoint {
    pub fn new(rho: f64, theta: f64) -> Self {
        PolarPoint {
            rho,
            theta: wrap_angle(theta),
        }
    }

    pub fn on_circle(theta: f64) -> Self {
        PolarPoint::new(1.0, theta)
    }

    pub fn z(&self) -> Complex64 {
        Complex64::from_polar(self.rho, self.theta)
    }
}

/// Maps an angle into `[-pi, pi]`; angles already inside are returned as is.
pub fn wrap_angle(theta: f64) -> f64 {
    if (-PI..=PI).contains(&theta) {
        theta
    } else {
        (theta - TAU * (theta / TAU).round()).clamp(-PI, PI)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalOptions {
    /// Magnitude beyond which a partial sum is treated as diverging.
    pub cap: f64,
    /// Relative spread allowed among the late partial sums for `settled`.
    pub settle_tol: f64,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            cap: 1e12,
            settle_tol: 1e-8,
        }
    }
}

/// Result of a truncated evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesValue {
    /// Last partial sum whose magnitude stayed within the cap.
    pub value: Complex64,
    /// Index of the last term included in `value`.
    pub terms: usize,
    /// A partial sum exceeded the cap (or stopped being finite).
    pub overflowed: bool,
    /// Partial sums over the second half of the range stayed within
    /// `settle_tol` of each other.
    pub settled: bool,
}

/// `e^{i k phi}` with the rounding of `k * phi` folded back in.
fn cis_multiple(k: usize, phi: f64) -> Complex64 {
    let kf = k as f64;
    let hi = kf * phi;
    let lo = kf.mul_add(phi, -hi);
    let (s, c) = hi.sin_cos();
    Complex64::new(c - s * lo, s + c * lo)
}

const RESYNC_INTERVAL: usize = 1024;

struct Spread {
    lo: Complex64,
    hi: Complex64,
    seen: bool,
}

impl Spread {
    fn new() -> Self {
        Spread {
            lo: Complex64::new(f64::INFINITY, f64::INFINITY),
            hi: Complex64::new(f64::NEG_INFINITY, f64::NEG_INFINITY),
            seen: false,
        }
    }

    fn push(&mut self, s: Complex64) {
        self.lo.re = self.lo.re.min(s.re);
        self.lo.im = self.lo.im.min(s.im);
        self.hi.re = self.hi.re.max(s.re);
        self.hi.im = self.hi.im.max(s.im);
        self.seen = true;
    }

    fn width(&self) -> f64 {
        if !self.seen {
            return 0.0;
        }
        (self.hi.re - self.lo.re).max(self.hi.im - self.lo.im)
    }
}

/// Truncated power series of a coefficient source at `rho e^{i theta}`.
///
/// Inside the closed disk the powers of `z` come from a running product that
/// is re-anchored to the exact polar form every 1024 terms; outside it each
/// term is formed in log space so that `a_k` and `rho^k` never overflow
/// separately.
pub fn eval_source(
    src: &CoefficientSource,
    p: PolarPoint,
    k_trunc: usize,
    opts: &EvalOptions,
) -> SeriesValue {
    let phi = p.theta - src.rotation();
    let rho = p.rho;
    let zero = Complex64::new(0.0, 0.0);
    if rho == 0.0 || k_trunc == 0 {
        return SeriesValue {
            value: zero,
            terms: 0,
            overflowed: false,
            settled: true,
        };
    }

    let cap_sqr = opts.cap * opts.cap;
    let half = k_trunc / 2;
    let mut acc = CompensatedComplexSum::new();
    let mut last = zero;
    let mut terms = 0;
    let mut overflowed = false;
    let mut spread = Spread::new();

    let z = Complex64::from_polar(rho, phi);
    let ln_rho = rho.ln();
    let mut power = Complex64::new(1.0, 0.0);
    let mut power_k = 0usize;
    let mut step = (1usize, z);
    let mut since_resync = 0usize;

    for (k, a) in src.support(k_trunc) {
        let term = if rho > 1.0 {
            let mag = (src.ln_abs(k) + k as f64 * ln_rho).exp();
            cis_multiple(k, phi) * (a.signum() * mag)
        } else {
            let gap = k - power_k;
            if since_resync >= RESYNC_INTERVAL {
                power = cis_multiple(k, phi) * rho.powi(k as i32);
                since_resync = 0;
            } else {
                if gap != step.0 {
                    step = (gap, z.powu(gap as u32));
                }
                power *= step.1;
            }
            since_resync += 1;
            power_k = k;
            power * a
        };
        acc.add(term);
        let s = acc.value();
        if s.norm_sqr().is_nan() || s.norm_sqr() > cap_sqr {
            overflowed = true;
            break;
        }
        last = s;
        terms = k;
        if k > half {
            spread.push(s);
        }
    }

    let settled = !overflowed && spread.width() <= opts.settle_tol * (1.0 + last.norm());
    SeriesValue {
        value: last,
        terms,
        overflowed,
        settled,
    }
}

/// `sum_{k<=K} a_k z^k`: the real part is the rho-weighted cosine partial
/// sum and the imaginary part the rho-weighted sine partial sum.
pub fn eval_sz(pair: &FcPair, p: PolarPoint, k_trunc: usize) -> SeriesValue {
    eval_source(pair.source(), p, k_trunc, &EvalOptions::default())
}

pub fn eval_sz_with(
    pair: &FcPair,
    p: PolarPoint,
    k_trunc: usize,
    opts: &EvalOptions,
) -> SeriesValue {
    eval_source(pair.source(), p, k_trunc, opts)
}

/// The same sum on the unit circle.
pub fn eval_sv(pair: &FcPair, theta: f64, k_trunc: usize) -> SeriesValue {
    eval_sz(pair, PolarPoint::on_circle(theta), k_trunc)
}

/// Truncation order as a function of the radius: `ceil(scale / (1 - rho))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KPolicy {
    pub scale: f64,
    pub cap: usize,
}

impl Default for KPolicy {
    fn default() -> Self {
        KPolicy {
            scale: 40.0,
            cap: 2_000_000,
        }
    }
}

impl KPolicy {
    /// `None` when the required order exceeds the cap or `rho >= 1`.
    pub fn order(&self, rho: f64) -> Option<usize> {
        if rho.is_nan() || rho >= 1.0 {
            return None;
        }
        let k = (self.scale / (1.0 - rho)).ceil();
        (k <= self.cap as f64).then(|| (k as usize).max(1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Truncation {
    Fixed(usize),
    Policy(KPolicy),
}

/// An FC pair viewed as an inner analytic function through its truncated
/// power series, plus an optional constant term.
#[derive(Debug, Clone)]
pub struct TruncatedSeries {
    pub pair: FcPair,
    pub truncation: Truncation,
    pub offset: f64,
    pub options: EvalOptions,
}

impl TruncatedSeries {
    pub fn new(pair: FcPair, truncation: Truncation) -> Self {
        TruncatedSeries {
            pair,
            truncation,
            offset: 0.0,
            options: EvalOptions::default(),
        }
    }

    pub fn with_offset(mut self, offset: f64) -> Self {
        self.offset = offset;
        self
    }

    pub fn order(&self, rho: f64) -> usize {
        match self.truncation {
            Truncation::Fixed(k) => k,
            Truncation::Policy(policy) => policy.order(rho).unwrap_or(policy.cap),
        }
    }

    pub fn evaluate(&self, p: PolarPoint) -> SeriesValue {
        let mut v = eval_sz_with(&self.pair, p, self.order(p.rho), &self.options);
        v.value += self.offset;
        v
    }
}

impl InnerAnalytic for TruncatedSeries {
    fn eval(&self, p: PolarPoint) -> Complex64 {
        self.evaluate(p).value
    }

    fn rotation(&self) -> f64 {
        self.pair.source().rotation()
    }

    fn reliable_at(&self, rho: f64) -> bool {
        match self.truncation {
            Truncation::Fixed(_) => true,
            Truncation::Policy(policy) => policy.order(rho).is_some(),
        }
    }
}
