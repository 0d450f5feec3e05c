//! Screening tests for where a power series converges.
//!
//! * Sampling outside the circle: if `S_z` converges at some `|z| > 1`, the
//!   boundary series converge absolutely and uniformly.
//! * Sampling inside the circle: if `S_z` diverges at some `|z| < 1`, the
//!   boundary series diverge almost everywhere.
//! * A ratio test on the coefficients themselves, which can certify the
//!   first case but, by construction, never a singularity on the circle.
//! * A power-law fit to the coefficient tail.
//!
//! These are numerical screeners; a `BoundaryCase` or `Inconclusive` verdict
//! is an honest answer, not a failure.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::coeffs::{CoefficientSource, FcPair};
use crate::error::{Error, Result};
use crate::series::PolarPoint;
use crate::sum::CompensatedComplexSum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    StronglyConvergent,
    StronglyDivergent,
    BoundaryCase,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Witness {
    pub test_point: Option<PolarPoint>,
    /// Certified bound on the coefficient ratio (strongly convergent only).
    pub ratio_bound_q: Option<f64>,
    /// Fitted limit of `|a_{k+1} / a_k|` (per unit index step).
    pub ratio_estimate: Option<f64>,
    /// `|a_k|^{1/k}` at the last coefficient of the window.
    pub root_estimate: Option<f64>,
    /// `eps` with `|a_k| rho^k ~ A / k^{1 + eps}`.
    pub tail_exponent_eps: Option<f64>,
    /// First index after which `k |a_k| rho^k > 1` throughout.
    pub k_m: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub verdict: Verdict,
    pub witness: Witness,
}

impl ConvergenceReport {
    fn inconclusive() -> Self {
        ConvergenceReport {
            verdict: Verdict::Inconclusive,
            witness: Witness::default(),
        }
    }
}

/// Relative tolerance for a numerically Cauchy tail.
pub const CAUCHY_TOL: f64 = 1e-8;
/// Default largest truncation for the sampling tests.
pub const DEFAULT_K: usize = 1 << 20;
/// Partial sums are first compared from this order on.
const FIRST_CHECKPOINT: usize = 1 << 10;
/// Partial sums beyond this magnitude count as diverging.
const SUM_CAP: f64 = 1e12;

pub const INNER_RADII: [f64; 5] = [0.5, 0.75, 0.9, 0.95, 0.99];
pub const OUTER_RADII: [f64; 5] = [1.01, 1.05, 1.1, 1.5, 2.0];

pub fn default_thetas() -> Vec<f64> {
    vec![0.0, PI]
}

struct Sampling {
    /// `(K, S_K)` at `K0, 2 K0, 4 K0, ...`, and at the final order.
    checkpoints: Vec<(usize, Complex64)>,
    overflowed: bool,
    k_m: Option<usize>,
}

fn sample(src: &CoefficientSource, rho: f64, theta: f64, k_end: usize) -> Sampling {
    let phi = theta - src.rotation();
    let ln_rho = rho.ln();
    let mut next_checkpoint = FIRST_CHECKPOINT.min(k_end / 2).max(1);
    let mut checkpoints = Vec::new();
    let mut acc = CompensatedComplexSum::new();
    let mut overflowed = false;
    let mut k_m: Option<usize> = None;

    for (k, a) in src.support(k_end) {
        let log_term = src.ln_abs(k) + k as f64 * ln_rho;
        if (k as f64).ln() + log_term > 0.0 {
            k_m.get_or_insert(k);
        } else {
            k_m = None;
        }
        if overflowed {
            continue;
        }
        while k > next_checkpoint {
            checkpoints.push((next_checkpoint, acc.value()));
            next_checkpoint *= 2;
        }
        let term = Complex64::from_polar(a.signum() * log_term.exp(), k as f64 * phi);
        acc.add(term);
        if acc.value().norm().is_nan() || acc.value().norm() > SUM_CAP {
            overflowed = true;
        }
    }
    if !overflowed {
        while next_checkpoint < k_end {
            checkpoints.push((next_checkpoint, acc.value()));
            next_checkpoint *= 2;
        }
        checkpoints.push((k_end, acc.value()));
    }
    Sampling {
        checkpoints,
        overflowed,
        k_m,
    }
}

impl Sampling {
    /// Last doubling step is Cauchy in both components.
    fn is_cauchy(&self) -> bool {
        if self.overflowed || self.checkpoints.len() < 2 {
            return false;
        }
        let n = self.checkpoints.len();
        let (_, a) = self.checkpoints[n - 2];
        let (_, b) = self.checkpoints[n - 1];
        (b.re - a.re).abs() < CAUCHY_TOL * (1.0 + b.re.abs())
            && (b.im - a.im).abs() < CAUCHY_TOL * (1.0 + b.im.abs())
    }
}

fn effective_order(src: &CoefficientSource, k: usize) -> usize {
    k.min(src.cutoff()).max(2)
}

/// Convergence of both extended series `sum a_k rho^k cos(k theta)` and
/// `sum a_k rho^k sin(k theta)` at a radius beyond the circle.
pub fn strong_convergence_test(
    pair: &FcPair,
    rho_test: f64,
    thetas: &[f64],
    k: usize,
) -> Result<ConvergenceReport> {
    if !(rho_test > 1.0 && rho_test.is_finite()) {
        return Err(Error::RadiusOutOfRange {
            rho: rho_test,
            range: "(1, inf)",
        });
    }
    let src = pair.source();
    let k_end = effective_order(src, k);
    let all_cauchy = thetas
        .par_iter()
        .all(|&t| sample(src, rho_test, t, k_end).is_cauchy());
    if all_cauchy && !thetas.is_empty() {
        Ok(ConvergenceReport {
            verdict: Verdict::StronglyConvergent,
            witness: Witness {
                test_point: Some(PolarPoint::new(rho_test, thetas[0])),
                ..Witness::default()
            },
        })
    } else {
        Ok(ConvergenceReport::inconclusive())
    }
}

/// Divergence of either extended series at a radius inside the circle,
/// with terms that stay above `1/k` from some index `k_m` on.
pub fn strong_divergence_test(
    pair: &FcPair,
    rho_test: f64,
    thetas: &[f64],
    k: usize,
) -> Result<ConvergenceReport> {
    if !(rho_test > 0.0 && rho_test < 1.0) {
        return Err(Error::RadiusOutOfRange {
            rho: rho_test,
            range: "(0, 1)",
        });
    }
    let src = pair.source();
    let k_end = effective_order(src, k);
    let found = thetas.iter().find_map(|&t| {
        let s = sample(src, rho_test, t, k_end);
        match s.k_m {
            Some(k_m) if k_m <= k_end / 2 && !s.is_cauchy() => Some((t, k_m)),
            _ => None,
        }
    });
    Ok(match found {
        Some((theta, k_m)) => ConvergenceReport {
            verdict: Verdict::StronglyDivergent,
            witness: Witness {
                test_point: Some(PolarPoint::new(rho_test, theta)),
                k_m: Some(k_m),
                ..Witness::default()
            },
        },
        None => ConvergenceReport::inconclusive(),
    })
}

/// What to do with coefficient sequences that vanish infinitely often.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LacunaryPolicy {
    /// Use the nonzero subsequence, normalising each log-ratio by its index
    /// gap.
    #[default]
    Subsequence,
    /// Refuse: the plain ratio is undefined.
    Reject,
}

/// Ratio test on the coefficients (not the terms).
///
/// Over the last `window` nonzero coefficients with `k <= min(cutoff, 2^16)`
/// the per-step log-ratios `(ln|a_{k'}| - ln|a_k|) / (k' - k)` are fitted as
/// `c0 + c1 / k`, so that algebraic factors like `1/k` do not bias the limit.
/// With `m = max(3 sigma(c0), 1e-3)` the verdict is strongly convergent when
/// `c0 + m < 0` (witness `q = e^{c0 + m}`), strongly divergent when
/// `c0 - m > 0`, and a boundary case otherwise.
pub fn modified_ratio_test(
    src: &CoefficientSource,
    window: usize,
    policy: LacunaryPolicy,
) -> Result<ConvergenceReport> {
    let k_lim = src.cutoff().min(1 << 16);
    let support: Vec<usize> = src.support(k_lim).map(|(k, _)| k).collect();
    let lacunary =
        support.first().is_some_and(|&k| k != 1) || support.windows(2).any(|w| w[1] - w[0] != 1);
    if lacunary && policy == LacunaryPolicy::Reject {
        return Err(Error::LacunaryUndefined(
            "the sequence has zero coefficients inside the window".into(),
        ));
    }
    let tail = &support[support.len().saturating_sub(window + 1)..];
    let ratios = tail.len().saturating_sub(1);
    if ratios < 8 {
        return Err(Error::FitDegenerate { usable: ratios });
    }

    let mut xs = Vec::with_capacity(ratios);
    let mut ys = Vec::with_capacity(ratios);
    for w in tail.windows(2) {
        let (k0, k1) = (w[0], w[1]);
        xs.push(1.0 / k0 as f64);
        ys.push((src.ln_abs(k1) - src.ln_abs(k0)) / (k1 - k0) as f64);
    }
    let fit = linear_fit(&xs, &ys);
    let c0 = fit.intercept;
    let margin = (3.0 * fit.intercept_se).max(1e-3);

    let k_last = *tail.last().unwrap();
    let witness = Witness {
        ratio_estimate: Some(c0.exp()),
        root_estimate: Some((src.ln_abs(k_last) / k_last as f64).exp()),
        ..Witness::default()
    };
    let verdict = if c0 + margin < 0.0 {
        Verdict::StronglyConvergent
    } else if c0 - margin > 0.0 {
        Verdict::StronglyDivergent
    } else {
        Verdict::BoundaryCase
    };
    let witness = if verdict == Verdict::StronglyConvergent {
        Witness {
            ratio_bound_q: Some((c0 + margin).exp()),
            ..witness
        }
    } else {
        witness
    };
    Ok(ConvergenceReport { verdict, witness })
}

struct LinearFit {
    intercept: f64,
    slope: f64,
    intercept_se: f64,
}

fn linear_fit(xs: &[f64], ys: &[f64]) -> LinearFit {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let rss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - intercept - slope * x;
            r * r
        })
        .sum();
    let s2 = if xs.len() > 2 { rss / (n - 2.0) } else { 0.0 };
    let intercept_se = if sxx > 0.0 {
        (s2 * (1.0 / n + mx * mx / sxx)).sqrt()
    } else {
        s2.sqrt()
    };
    LinearFit {
        intercept,
        slope,
        intercept_se,
    }
}

/// Half-width of the undecided band around the exponent `-1`.
pub const TAIL_MARGIN: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailBound {
    /// `A` in `|a_k| rho1^k ~ A k^p`.
    pub amplitude: f64,
    /// `p`.
    pub exponent: f64,
    /// `Some(true)` for `p < -1 - margin`, `Some(false)` for
    /// `p >= -1 + margin`, `None` in between.
    pub absolutely_convergent: Option<bool>,
    pub margin: f64,
}

/// Least-squares fit of `ln(|a_k| rho1^k)` against `ln k` over the nonzero
/// coefficients with `K/2 <= k <= K`.
pub fn tail_power_bound(src: &CoefficientSource, rho1: f64, k_fit: usize) -> Result<TailBound> {
    if !(rho1 > 0.0 && rho1 <= 1.0) {
        return Err(Error::RadiusOutOfRange {
            rho: rho1,
            range: "(0, 1]",
        });
    }
    let ln_rho = rho1.ln();
    let (xs, ys): (Vec<f64>, Vec<f64>) = src
        .support(k_fit)
        .filter(|(k, _)| 2 * k >= k_fit)
        .map(|(k, _)| ((k as f64).ln(), src.ln_abs(k) + k as f64 * ln_rho))
        .filter(|(_, y)| y.is_finite())
        .unzip();
    if xs.len() < 8 {
        return Err(Error::FitDegenerate { usable: xs.len() });
    }
    let fit = linear_fit(&xs, &ys);
    let p = fit.slope;
    let absolutely_convergent = if p < -1.0 - TAIL_MARGIN {
        Some(true)
    } else if p >= -1.0 + TAIL_MARGIN {
        Some(false)
    } else {
        None
    };
    Ok(TailBound {
        amplitude: fit.intercept.exp(),
        exponent: p,
        absolutely_convergent,
        margin: TAIL_MARGIN,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassifyOptions {
    pub rho_in: Vec<f64>,
    pub rho_out: Vec<f64>,
    pub thetas: Vec<f64>,
    pub k: usize,
    pub window: usize,
    pub lacunary: LacunaryPolicy,
    pub tail_k: usize,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            rho_in: INNER_RADII.to_vec(),
            rho_out: OUTER_RADII.to_vec(),
            thetas: default_thetas(),
            k: DEFAULT_K,
            window: 64,
            lacunary: LacunaryPolicy::Subsequence,
            tail_k: 4096,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification {
    pub verdict: Verdict,
    /// Evidence from every classifier, merged.
    pub witness: Witness,
    pub strong_convergence: ConvergenceReport,
    pub strong_divergence: ConvergenceReport,
    pub modified_ratio: ConvergenceReport,
    pub tail: Option<TailBound>,
}

/// Runs all classifiers with their default parameters and combines them.
///
/// Sampling verdicts take precedence; a ratio-test boundary case is reported
/// when neither sampling test is decisive. Contradictory strong verdicts are
/// reported as inconclusive.
pub fn classify(pair: &FcPair, opts: &ClassifyOptions) -> Result<Classification> {
    let mut sc = ConvergenceReport::inconclusive();
    for &rho in &opts.rho_out {
        let r = strong_convergence_test(pair, rho, &opts.thetas, opts.k)?;
        if r.verdict == Verdict::StronglyConvergent {
            sc = r;
            break;
        }
    }
    let mut sd = ConvergenceReport::inconclusive();
    for &rho in &opts.rho_in {
        let r = strong_divergence_test(pair, rho, &opts.thetas, opts.k)?;
        if r.verdict == Verdict::StronglyDivergent {
            sd = r;
            break;
        }
    }
    let src = pair.source();
    let ratio = match modified_ratio_test(src, opts.window, opts.lacunary) {
        Ok(r) => r,
        Err(Error::FitDegenerate { .. }) | Err(Error::LacunaryUndefined(_)) => {
            ConvergenceReport::inconclusive()
        }
        Err(e) => return Err(e),
    };
    let tail = tail_power_bound(src, 1.0, opts.tail_k.min(src.cutoff())).ok();

    let convergent =
        sc.verdict == Verdict::StronglyConvergent || ratio.verdict == Verdict::StronglyConvergent;
    let divergent =
        sd.verdict == Verdict::StronglyDivergent || ratio.verdict == Verdict::StronglyDivergent;
    let verdict = match (convergent, divergent) {
        (true, false) => Verdict::StronglyConvergent,
        (false, true) => Verdict::StronglyDivergent,
        (true, true) => Verdict::Inconclusive,
        (false, false) if ratio.verdict == Verdict::BoundaryCase => Verdict::BoundaryCase,
        _ => Verdict::Inconclusive,
    };
    let witness = Witness {
        test_point: sc.witness.test_point.or(sd.witness.test_point),
        ratio_bound_q: ratio.witness.ratio_bound_q,
        ratio_estimate: ratio.witness.ratio_estimate,
        root_estimate: ratio.witness.root_estimate,
        tail_exponent_eps: tail.map(|t| -1.0 - t.exponent),
        k_m: sd.witness.k_m,
    };
    Ok(Classification {
        verdict,
        witness,
        strong_convergence: sc,
        strong_divergence: sd,
        modified_ratio: ratio,
        tail,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::coeffs::Rule;
    use proptest::prelude::*;

    fn geometric(r: f64) -> FcPair {
        FcPair::new(CoefficientSource::rule(Rule::Geometric {
            amplitude: 1.0,
            ratio: r,
        }))
    }

    fn table(f: impl Fn(usize) -> f64, n: usize) -> FcPair {
        FcPair::new(CoefficientSource::table((1..=n).map(f).collect()).unwrap())
    }

    fn factorial(k: usize) -> f64 {
        (1..=k).map(|i| i as f64).product()
    }

    #[test]
    fn strong_convergence_examples() {
        let th = default_thetas();
        let r = strong_convergence_test(&geometric(0.5), 1.5, &th, DEFAULT_K).unwrap();
        assert_eq!(r.verdict, Verdict::StronglyConvergent);
        assert!(r.witness.test_point.unwrap().rho > 1.0);

        let saw = FcPair::new(CoefficientSource::rule(Rule::SawtoothOne));
        let r = strong_convergence_test(&saw, 1.1, &th, DEFAULT_K).unwrap();
        assert_eq!(r.verdict, Verdict::Inconclusive);

        let entire = table(|k| 1.0 / factorial(k), 170);
        let r = strong_convergence_test(&entire, 2.0, &th, DEFAULT_K).unwrap();
        assert_eq!(r.verdict, Verdict::StronglyConvergent);
        assert!(strong_convergence_test(&entire, 0.5, &th, DEFAULT_K).is_err());
    }

    #[test]
    fn strong_divergence_examples() {
        let th = default_thetas();
        let r = strong_divergence_test(&geometric(3.0), 0.5, &th, DEFAULT_K).unwrap();
        assert_eq!(r.verdict, Verdict::StronglyDivergent);
        assert_eq!(r.witness.k_m, Some(1));
        assert!(r.witness.test_point.unwrap().rho < 1.0);

        let inv_sq = table(|k| 1.0 / (k * k) as f64, 1 << 16);
        let r = strong_divergence_test(&inv_sq, 0.99, &th, DEFAULT_K).unwrap();
        assert_eq!(r.verdict, Verdict::Inconclusive);

        let fact = table(|k| factorial(k) * 1e-3, 150);
        let r = strong_divergence_test(&fact, 0.1, &th, DEFAULT_K).unwrap();
        assert_eq!(r.verdict, Verdict::StronglyDivergent);
    }

    #[test]
    fn ratio_test_examples() {
        let src = CoefficientSource::rule(Rule::Geometric {
            amplitude: 1.0,
            ratio: 0.5,
        });
        let r = modified_ratio_test(&src, 64, LacunaryPolicy::Subsequence).unwrap();
        assert_eq!(r.verdict, Verdict::StronglyConvergent);
        assert!((r.witness.ratio_bound_q.unwrap() - 0.5).abs() < 1e-3);

        let saw = CoefficientSource::rule(Rule::SawtoothOne);
        let r = modified_ratio_test(&saw, 64, LacunaryPolicy::Subsequence).unwrap();
        assert_eq!(r.verdict, Verdict::BoundaryCase);

        let riemann = CoefficientSource::rule(Rule::Riemann);
        let r = modified_ratio_test(&riemann, 64, LacunaryPolicy::Subsequence).unwrap();
        assert_eq!(r.verdict, Verdict::BoundaryCase);
        assert!(matches!(
            modified_ratio_test(&riemann, 64, LacunaryPolicy::Reject),
            Err(Error::LacunaryUndefined(_))
        ));

        let short = CoefficientSource::table(vec![1.0, 0.5, 0.25]).unwrap();
        assert!(matches!(
            modified_ratio_test(&short, 64, LacunaryPolicy::Subsequence),
            Err(Error::FitDegenerate { usable: 2 })
        ));
    }

    #[test]
    fn ratio_test_handles_short_power_law_tables() {
        // the 1/k correction is fitted out rather than mistaken for q < 1
        let src = CoefficientSource::table((1..=200).map(|k| 1.0 / k as f64).collect()).unwrap();
        let r = modified_ratio_test(&src, 64, LacunaryPolicy::Subsequence).unwrap();
        assert_eq!(r.verdict, Verdict::BoundaryCase);
    }

    #[test]
    fn catalog_entries_sit_on_the_boundary() {
        for name in catalog::NAMES {
            let e = catalog::entry(name).unwrap();
            let r = modified_ratio_test(&e.coeffs, 64, LacunaryPolicy::Subsequence).unwrap();
            assert_eq!(r.verdict, Verdict::BoundaryCase, "{name}");
        }
    }

    #[test]
    fn tail_fit_examples() {
        let power = |p: f64| {
            CoefficientSource::rule(Rule::PowerLaw {
                amplitude: 1.0,
                exponent: p,
            })
        };
        let t = tail_power_bound(&power(-2.0), 1.0, 4096).unwrap();
        assert!((t.exponent + 2.0).abs() < 1e-9);
        assert_eq!(t.absolutely_convergent, Some(true));
        let t = tail_power_bound(&power(-1.0), 1.0, 4096).unwrap();
        assert!((t.exponent + 1.0).abs() < 1e-9);
        assert_eq!(t.absolutely_convergent, None);
        let t = tail_power_bound(&power(-1.0), 0.9, 4096).unwrap();
        assert_eq!(t.absolutely_convergent, Some(true));
        assert!(tail_power_bound(&power(-1.0), 1.0, 10).is_err());
    }

    #[test]
    fn report_json_keeps_field_order() {
        let r = ConvergenceReport {
            verdict: Verdict::StronglyConvergent,
            witness: Witness {
                ratio_bound_q: Some(0.5),
                ..Witness::default()
            },
        };
        let s = serde_json::to_string(&r).unwrap();
        assert!(s.starts_with(
            r#"{"verdict":"StronglyConvergent","witness":{"test_point":null,"ratio_bound_q":0.5"#
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn ratio_certificate_implies_sampled_convergence(
            r in 0.05f64..0.85,
            p in -3.0f64..3.0,
        ) {
            let src = CoefficientSource::table((1..=4000).map(|k| r.powi(k) * (k as f64).powf(p)).collect()).unwrap();
            let pair = FcPair::new(src.clone());
            let report = modified_ratio_test(&src, 64, LacunaryPolicy::Subsequence);
            if let Ok(report) = report {
                if report.verdict == Verdict::StronglyConvergent {
                    let q = report.witness.ratio_bound_q.unwrap();
                    let rho = (q + 1.0) / (2.0 * q);
                    let sc = strong_convergence_test(&pair, rho, &default_thetas(), DEFAULT_K).unwrap();
                    prop_assert_eq!(sc.verdict, Verdict::StronglyConvergent);
                }
            }
        }

        #[test]
        fn verdicts_are_exclusive(r in 0.3f64..3.0) {
            let c = classify(&geometric(r), &ClassifyOptions { k: 1 << 14, ..ClassifyOptions::default() }).unwrap();
            let sc = c.strong_convergence.verdict == Verdict::StronglyConvergent
                || c.modified_ratio.verdict == Verdict::StronglyConvergent;
            let sd = c.strong_divergence.verdict == Verdict::StronglyDivergent
                || c.modified_ratio.verdict == Verdict::StronglyDivergent;
            prop_assert!(!(sc && sd));
        }
    }
}
