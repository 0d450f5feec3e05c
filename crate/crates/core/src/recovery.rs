//! Boundary values from radial limits, and a probe for the kind of
//! singularity sitting at a boundary point.
//!
//! Both work on a ladder of radii approaching 1. Limits are extrapolated in
//! `h = 1 - rho` through the last three rungs; the probe looks at how `w` and
//! its radial derivative grow as `h -> 0`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::analytic::InnerAnalytic;
use crate::error::{Error, Result};
use crate::series::PolarPoint;

/// Increasing radii in `(0, 1)` ending within `1e-4` of the circle.
#[derive(Debug, Clone, PartialEq)]
pub struct Ladder {
    rhos: Vec<f64>,
}

impl Ladder {
    pub fn new(rhos: Vec<f64>) -> Result<Self> {
        if rhos.len() < 3 {
            return Err(Error::BadLadder(format!(
                "need at least 3 rungs, got {}",
                rhos.len()
            )));
        }
        if let Some(r) = rhos.iter().find(|r| !(**r > 0.0 && **r < 1.0)) {
            return Err(Error::BadLadder(format!("rung {r} is outside (0, 1)")));
        }
        if rhos.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::BadLadder("rungs must be strictly increasing".into()));
        }
        let last = rhos[rhos.len() - 1];
        if last < 1.0 - 1e-4 {
            return Err(Error::BadLadder(format!(
                "last rung {last} stops short of 1 - 1e-4"
            )));
        }
        Ok(Ladder { rhos })
    }

    /// `rho_j = 1 - 2^-j` for `j0 <= j <= j1`.
    pub fn geometric(j0: u32, j1: u32) -> Result<Self> {
        if j0 == 0 || j1 < j0 || j1 > 52 {
            return Err(Error::BadLadder(format!("bad exponent range {j0}..{j1}")));
        }
        Ladder::new((j0..=j1).map(|j| 1.0 - 2f64.powi(-(j as i32))).collect())
    }

    pub fn rhos(&self) -> &[f64] {
        &self.rhos
    }
}

impl Default for Ladder {
    fn default() -> Self {
        Ladder::geometric(4, 20).expect("default ladder is valid")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecoveryOptions {
    /// Relative agreement between successive extrapolations for `Converged`.
    pub tol: f64,
    /// Samples beyond this magnitude count as diverging.
    pub divergence_cap: f64,
}

impl Default for RecoveryOptions {
    fn default() -> Self {
        RecoveryOptions {
            tol: 1e-6,
            divergence_cap: 1e12,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RadialStatus {
    Converged,
    SoftSingularSuspect,
    HardDivergent,
}

impl std::fmt::Display for RadialStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            RadialStatus::Converged => "Converged",
            RadialStatus::SoftSingularSuspect => "SoftSingularSuspect",
            RadialStatus::HardDivergent => "HardDivergent",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadialSample {
    pub rho: f64,
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadialLimitResult {
    pub theta: f64,
    pub samples: Vec<RadialSample>,
    /// Extrapolated limit; a diverging component is reported as `+-inf`.
    pub estimate: Complex64,
    pub status: RadialStatus,
}

/// Value at `h = 0` of the quadratic through three `(h, v)` points.
pub(crate) fn richardson(h: [f64; 3], v: [f64; 3]) -> f64 {
    let mut acc = 0.0;
    for i in 0..3 {
        let mut weight = 1.0;
        for j in 0..3 {
            if i != j {
                weight *= h[j] / (h[j] - h[i]);
            }
        }
        acc += weight * v[i];
    }
    acc
}

fn extrapolate(hs: &[f64], vs: &[f64]) -> f64 {
    let n = hs.len();
    richardson(
        [hs[n - 3], hs[n - 2], hs[n - 1]],
        [vs[n - 3], vs[n - 2], vs[n - 1]],
    )
}

/// Growth that will not level off: a sample past the cap, or magnitudes
/// rising monotonically over the last rungs with increments that fail to
/// shrink (a pole doubles them per halving of `h`, a logarithm keeps them
/// constant, while a convergent approach halves them).
fn is_diverging(vs: &[f64], cap: f64) -> bool {
    if vs.iter().any(|v| !v.is_finite() || v.abs() > cap) {
        return true;
    }
    let tail = &vs[vs.len().saturating_sub(6)..];
    if tail.len() < 4 {
        return false;
    }
    if tail.windows(2).any(|w| w[1].abs() <= w[0].abs()) {
        return false;
    }
    let inc: Vec<f64> = tail.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    if inc.contains(&0.0) {
        return false;
    }
    let mean_log_ratio =
        inc.windows(2).map(|w| (w[1] / w[0]).ln()).sum::<f64>() / (inc.len() - 1) as f64;
    mean_log_ratio.exp() >= 0.85
}

fn usable_rungs<W: InnerAnalytic + ?Sized>(w: &W, ladder: &Ladder, min: usize) -> Result<Vec<f64>> {
    let rungs: Vec<f64> = ladder
        .rhos()
        .iter()
        .copied()
        .filter(|r| w.reliable_at(*r))
        .collect();
    if rungs.len() < min {
        return Err(Error::BadLadder(format!(
            "only {} rungs are within reach of the evaluator, need {min}",
            rungs.len()
        )));
    }
    Ok(rungs)
}

/// Limit of `w(rho e^{i theta})` as `rho -> 1` along the ladder.
///
/// Rungs at which `w` reports itself unreliable (a series whose truncation
/// order would exceed its cap) are skipped.
pub fn radial_limit<W: InnerAnalytic + ?Sized>(
    w: &W,
    theta: f64,
    ladder: &Ladder,
    opts: &RecoveryOptions,
) -> Result<RadialLimitResult> {
    let rungs = usable_rungs(w, ladder, 3)?;
    let samples: Vec<RadialSample> = rungs
        .iter()
        .map(|&rho| {
            let v = w.eval(PolarPoint::new(rho, theta));
            RadialSample {
                rho,
                re: v.re,
                im: v.im,
            }
        })
        .collect();

    let hs: Vec<f64> = rungs.iter().map(|r| 1.0 - r).collect();
    let re: Vec<f64> = samples.iter().map(|s| s.re).collect();
    let im: Vec<f64> = samples.iter().map(|s| s.im).collect();
    let n = samples.len();

    let div_re = is_diverging(&re, opts.divergence_cap);
    let div_im = is_diverging(&im, opts.divergence_cap);
    let status;
    let estimate;
    if div_re || div_im {
        let component = |diverging: bool, vs: &[f64]| {
            if diverging {
                vs[n - 1].signum() * f64::INFINITY
            } else {
                extrapolate(&hs, vs)
            }
        };
        status = RadialStatus::HardDivergent;
        estimate = Complex64::new(component(div_re, &re), component(div_im, &im));
    } else {
        let last = Complex64::new(extrapolate(&hs, &re), extrapolate(&hs, &im));
        let previous = if n >= 4 {
            Complex64::new(
                extrapolate(&hs[..n - 1], &re[..n - 1]),
                extrapolate(&hs[..n - 1], &im[..n - 1]),
            )
        } else {
            Complex64::new(re[n - 1], im[n - 1])
        };
        if (last - previous).norm() <= opts.tol * (1.0 + last.norm()) {
            status = RadialStatus::Converged;
            estimate = last;
        } else {
            status = RadialStatus::SoftSingularSuspect;
            estimate = Complex64::new(re[n - 1], im[n - 1]);
        }
    }

    Ok(RadialLimitResult {
        theta,
        samples,
        estimate,
        status,
    })
}

/// Radial limits over a grid of angles, in grid order.
pub fn recover_function<W: InnerAnalytic + ?Sized>(
    w: &W,
    grid: &[f64],
    ladder: &Ladder,
    opts: &RecoveryOptions,
) -> Result<Vec<RadialLimitResult>> {
    grid.par_iter()
        .map(|&theta| radial_limit(w, theta, ladder, opts))
        .collect()
}

/// `n` equispaced angles strictly inside `(-pi, pi)` (the end points are
/// dropped, so both ends of the period are excluded).
pub fn open_grid(n: usize) -> Vec<f64> {
    use std::f64::consts::PI;
    let step = 2.0 * PI / (n + 1) as f64;
    (1..=n).map(|i| -PI + i as f64 * step).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "class", content = "degree")]
pub enum SingularityClass {
    Regular,
    /// Bounded `w` whose derivative blows up; the degree of
    /// `(z - z1)^{n+1} ln(z - z1)` type behaviour.
    BorderlineSoft(u32),
    /// Logarithmic growth of `w`.
    BorderlineHard,
    /// `w ~ (z - z1)^{-n}`.
    HardPole(u32),
    Unresolved,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SingularityProbe {
    pub theta: f64,
    pub classification: SingularityClass,
    /// Fitted slope of `ln|w|` (hard cases) or `ln|w'|` (bounded cases)
    /// against `ln(1 - rho)`.
    pub growth_exponent: f64,
}

fn lsq_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Slope of `ln |dv / d ln h|` against `ln h`: `0` for logarithmic growth,
/// about `1` for a function with a finite derivative, negative for powers.
fn increment_exponent(log_h: &[f64], vs: &[Complex64]) -> f64 {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for i in 0..vs.len() - 1 {
        let rate = (vs[i + 1] - vs[i]).norm() / (log_h[i] - log_h[i + 1]).abs();
        if rate > 0.0 && rate.is_finite() {
            xs.push(0.5 * (log_h[i] + log_h[i + 1]));
            ys.push(rate.ln());
        }
    }
    if xs.len() < 3 {
        // increments vanish to rounding: nothing left to grow
        return f64::INFINITY;
    }
    lsq_slope(&xs, &ys)
}

/// Pole exponents are snapped to integers within this distance.
const SNAP: f64 = 0.25;

/// Classifies the boundary point `e^{i theta}` from the last eight rungs.
pub fn probe_singularity<W: InnerAnalytic + ?Sized>(
    w: &W,
    theta: f64,
    ladder: &Ladder,
) -> Result<SingularityProbe> {
    let rungs = usable_rungs(w, ladder, 4)?;
    let rungs = &rungs[rungs.len().saturating_sub(8)..];
    let log_h: Vec<f64> = rungs.iter().map(|r| (1.0 - r).ln()).collect();
    let values: Vec<Complex64> = rungs
        .iter()
        .map(|&r| w.eval(PolarPoint::new(r, theta)))
        .collect();

    let probe = |classification, growth_exponent| SingularityProbe {
        theta,
        classification,
        growth_exponent,
    };

    let log_mag: Vec<f64> = values.iter().map(|v| v.norm().ln()).collect();
    if log_mag.iter().all(|v| v.is_finite()) {
        let slope = lsq_slope(&log_h, &log_mag);
        if slope <= -1.0 + SNAP {
            let degree = (-slope).round();
            let class = if (-slope - degree).abs() <= SNAP {
                SingularityClass::HardPole(degree as u32)
            } else {
                SingularityClass::Unresolved
            };
            return Ok(probe(class, slope));
        }
    }

    let beta = increment_exponent(&log_h, &values);
    if beta.abs() <= SNAP {
        let slope = lsq_slope(&log_h, &log_mag);
        return Ok(probe(SingularityClass::BorderlineHard, slope));
    }
    if beta < 0.5 {
        return Ok(probe(SingularityClass::Unresolved, beta));
    }

    // bounded w: look at the radial derivative
    let derivs: Vec<Complex64> = rungs
        .iter()
        .map(|&r| {
            let delta = 0.1 * (1.0 - r);
            let up = w.eval(PolarPoint::new(r + delta, theta));
            let down = w.eval(PolarPoint::new(r - delta, theta));
            (up - down) / (2.0 * delta)
        })
        .collect();
    let log_dmag: Vec<f64> = derivs.iter().map(|d| d.norm().max(1e-300).ln()).collect();
    let deriv_slope = lsq_slope(&log_h, &log_dmag);
    let beta_deriv = increment_exponent(&log_h, &derivs);
    let class = if beta_deriv >= 0.5 {
        SingularityClass::Regular
    } else if beta_deriv <= SNAP {
        SingularityClass::BorderlineSoft(0)
    } else {
        SingularityClass::Unresolved
    };
    Ok(probe(class, deriv_slope))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    struct Closed<F: Fn(Complex64) -> Complex64 + Send + Sync>(F);

    impl<F: Fn(Complex64) -> Complex64 + Send + Sync> InnerAnalytic for Closed<F> {
        fn eval(&self, p: PolarPoint) -> Complex64 {
            (self.0)(p.z())
        }
    }

    fn one() -> Complex64 {
        Complex64::new(1.0, 0.0)
    }

    #[test]
    fn ladder_validation() {
        assert!(Ladder::new(vec![0.5, 0.9, 0.99999]).is_ok());
        assert!(Ladder::new(vec![0.5, 0.4, 0.99999]).is_err());
        assert!(Ladder::new(vec![0.5, 0.9, 0.999]).is_err());
        assert!(Ladder::new(vec![0.0, 0.9, 0.99999]).is_err());
        assert!(Ladder::new(vec![0.5, 0.9, 1.0]).is_err());
        assert_eq!(Ladder::default().rhos().len(), 17);
    }

    #[test]
    fn richardson_is_exact_on_quadratics() {
        let f = |h: f64| 2.0 - 3.0 * h + 5.0 * h * h;
        let hs = [0.1, 0.05, 0.025];
        assert!((richardson(hs, hs.map(f)) - 2.0).abs() < 1e-13);
    }

    #[test]
    fn smooth_boundary_values_converge() {
        let w = Closed(|z: Complex64| (one() + z).ln() * (2.0 / PI));
        let r = radial_limit(
            &w,
            PI / 2.0,
            &Ladder::default(),
            &RecoveryOptions::default(),
        )
        .unwrap();
        assert_eq!(r.status, RadialStatus::Converged);
        assert!((r.estimate.im - 0.5).abs() < 1e-10);
    }

    #[test]
    fn poles_and_logs_are_hard_divergent() {
        let pole = Closed(|z: Complex64| z / (one() - z));
        let r = radial_limit(&pole, 0.0, &Ladder::default(), &RecoveryOptions::default()).unwrap();
        assert_eq!(r.status, RadialStatus::HardDivergent);
        assert_eq!(r.estimate.re, f64::INFINITY);
        assert!(r.estimate.im.is_finite());

        let log = Closed(|z: Complex64| -(one() - z).ln());
        let r = radial_limit(&log, 0.0, &Ladder::default(), &RecoveryOptions::default()).unwrap();
        assert_eq!(r.status, RadialStatus::HardDivergent);
    }

    #[test]
    fn probe_taxonomy() {
        let ladder = Ladder::default();
        let pole2 = Closed(|z: Complex64| z / ((one() - z) * (one() - z)));
        let p = probe_singularity(&pole2, 0.0, &ladder).unwrap();
        assert_eq!(p.classification, SingularityClass::HardPole(2));
        assert!((p.growth_exponent + 2.0).abs() < 0.1);

        let log = Closed(|z: Complex64| (one() + z).ln());
        let p = probe_singularity(&log, PI, &ladder).unwrap();
        assert_eq!(p.classification, SingularityClass::BorderlineHard);

        let soft = Closed(|z: Complex64| (one() - z) * (one() - z).ln());
        let p = probe_singularity(&soft, 0.0, &ladder).unwrap();
        assert_eq!(p.classification, SingularityClass::BorderlineSoft(0));

        let p = probe_singularity(&log, 0.5, &ladder).unwrap();
        assert_eq!(p.classification, SingularityClass::Regular);
    }

    #[test]
    fn probe_json_shape() {
        let p = SingularityProbe {
            theta: 0.0,
            classification: SingularityClass::HardPole(1),
            growth_exponent: -1.0,
        };
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(
            s,
            r#"{"theta":0.0,"classification":{"class":"HardPole","degree":1},"growth_exponent":-1.0}"#
        );
    }

    #[test]
    fn open_grid_avoids_the_ends() {
        let g = open_grid(101);
        assert_eq!(g.len(), 101);
        assert!(g[0] > -PI && g[100] < PI);
        assert!((g[50]).abs() < 1e-15);
    }
}
