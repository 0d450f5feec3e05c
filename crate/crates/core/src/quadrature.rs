//! One-dimensional quadrature rules used by the verifiers.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use crate::sum::CompensatedSum;

/// Node placement for the periodic trapezoid rule on `[-pi, pi)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeOffset {
    /// Nodes at `-pi + 2 pi j / N`.
    Aligned,
    /// Nodes shifted by half a spacing, so that neither `0` nor `pi` is
    /// sampled when `N` is even.
    Half,
}

/// Trapezoid rule for a `2 pi`-periodic integrand over one period.
pub fn periodic_trapezoid<F: Fn(f64) -> f64>(f: F, nodes: usize, offset: NodeOffset) -> f64 {
    let h = TAU / nodes as f64;
    let shift = match offset {
        NodeOffset::Aligned => 0.0,
        NodeOffset::Half => 0.5,
    };
    let acc: CompensatedSum = (0..nodes)
        .map(|j| f(-PI + (j as f64 + shift) * h))
        .collect();
    acc.value() * h
}

/// Tanh-sinh (double exponential) quadrature on `[a, b]`.
///
/// The integrand receives `(x, x - a, b - x)`; the two distances are formed
/// without cancellation, so integrands with endpoint singularities can be
/// evaluated accurately right up to the ends. The step is halved until two
/// successive levels agree to `tol` (relative) or `max_level` is reached.
pub fn tanh_sinh<F: Fn(f64, f64, f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    tol: f64,
    max_level: u32,
) -> f64 {
    const T_MAX: f64 = 3.5;
    let half = 0.5 * (b - a);

    let node = |t: f64| -> f64 {
        let u = FRAC_PI_2 * t.sinh();
        // 1 - tanh(u) and 1 + tanh(u) without cancellation
        let one_minus = 2.0 / (1.0 + (2.0 * u).exp());
        let one_plus = 2.0 / (1.0 + (-2.0 * u).exp());
        let cosh_u = u.cosh();
        let weight = FRAC_PI_2 * t.cosh() / (cosh_u * cosh_u);
        if weight == 0.0 || !weight.is_finite() {
            return 0.0;
        }
        let da = half * one_plus;
        let db = half * one_minus;
        let x = if da < db { a + da } else { b - db };
        let v = f(x, da, db);
        if v.is_finite() {
            weight * v
        } else {
            0.0
        }
    };

    let mut h = 0.5;
    let mut sum = CompensatedSum::new();
    sum.add(node(0.0));
    let mut t = h;
    while t <= T_MAX {
        sum.add(node(t));
        sum.add(node(-t));
        t += h;
    }
    let mut estimate = sum.value() * h * half;
    for _ in 1..=max_level {
        h *= 0.5;
        // only the new odd multiples of h
        let mut k = 1.0;
        while k * h <= T_MAX {
            sum.add(node(k * h));
            sum.add(node(-k * h));
            k += 2.0;
        }
        let next = sum.value() * h * half;
        let done = (next - estimate).abs() <= tol * next.abs().max(1.0);
        estimate = next;
        if done {
            break;
        }
    }
    estimate
}
