//! Double-double arithmetic (about 106 bits of significand).
//!
//! Only what the closed-form evaluators need when a Taylor coefficient is
//! pulled out of a small circle: the four operations, `exp`, `ln`,
//! `sin_cos` and `atan2`, plus a minimal complex type on top. `ln` and
//! `atan2` start from the `f64` result and take one Newton step, which
//! squares the relative error from ~1e-16 to ~1e-32.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// An unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Dd {
    hi: f64,
    lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };
    pub const PI: Dd = Dd {
        hi: std::f64::consts::PI,
        lo: 1.224_646_799_147_353_2e-16,
    };
    pub const FRAC_PI_2: Dd = Dd {
        hi: std::f64::consts::FRAC_PI_2,
        lo: 6.123_233_995_736_766e-17,
    };
    pub const LN_2: Dd = Dd {
        hi: std::f64::consts::LN_2,
        lo: 2.319_046_813_846_299_6e-17,
    };

    pub const fn from_parts(hi: f64, lo: f64) -> Self {
        Dd { hi, lo }
    }

    pub fn hi(self) -> f64 {
        self.hi
    }

    pub fn lo(self) -> f64 {
        self.lo
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn abs(self) -> Self {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    /// Multiplication by an exact power of two.
    pub fn scale_pow2(self, exp: i32) -> Self {
        let f = 2f64.powi(exp);
        Dd {
            hi: self.hi * f,
            lo: self.lo * f,
        }
    }

    pub fn mul_f64(self, b: f64) -> Self {
        let (p1, p2) = two_prod(self.hi, b);
        let (hi, lo) = quick_two_sum(p1, p2 + self.lo * b);
        Dd { hi, lo }
    }

    pub fn div_f64(self, b: f64) -> Self {
        self / Dd::from(b)
    }

    pub fn sqr(self) -> Self {
        self * self
    }

    pub fn powi(self, n: u32) -> Self {
        let mut base = self;
        let mut acc = Dd::ONE;
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc * base;
            }
            base = base.sqr();
            n >>= 1;
        }
        acc
    }

    pub fn exp(self) -> Self {
        if self.hi > 709.0 {
            return Dd::from(f64::INFINITY);
        }
        if self.hi < -745.0 {
            return Dd::ZERO;
        }
        let m = (self.hi / Self::LN_2.hi).round();
        let r = (self - Self::LN_2.mul_f64(m)).scale_pow2(-10);
        // expm1(r) by Taylor; |r| < 3.4e-4 so ten terms reach 1e-36
        let mut term = r;
        let mut e = r;
        for n in 2..=10 {
            term = (term * r).div_f64(n as f64);
            e = e + term;
        }
        // (1 + e)^2 - 1 = e (e + 2), applied once per halving of r
        for _ in 0..10 {
            e = e * (e + Dd::from(2.0));
        }
        (e + Dd::ONE).scale_pow2(m as i32)
    }

    /// Natural logarithm of a positive value.
    pub fn ln(self) -> Self {
        if self.hi <= 0.0 {
            return Dd::from(f64::NAN);
        }
        let y = Dd::from(self.hi.ln());
        y + self * (-y).exp() - Dd::ONE
    }

    pub fn sin_cos(self) -> (Self, Self) {
        let n = (self.hi / Self::FRAC_PI_2.hi).round();
        let r = self - Self::FRAC_PI_2.mul_f64(n);
        let r2 = r.sqr();

        let mut sin = r;
        let mut term = r;
        for i in 1..=14 {
            let d = (2 * i) as f64 * (2 * i + 1) as f64;
            term = -(term * r2).div_f64(d);
            sin = sin + term;
        }
        let mut cos = Dd::ONE;
        let mut term = Dd::ONE;
        for i in 1..=14 {
            let d = (2 * i - 1) as f64 * (2 * i) as f64;
            term = -(term * r2).div_f64(d);
            cos = cos + term;
        }

        match (n as i64).rem_euclid(4) {
            0 => (sin, cos),
            1 => (cos, -sin),
            2 => (-sin, -cos),
            _ => (-cos, sin),
        }
    }

    /// Quadrant-aware arctangent of `self / x`.
    pub fn atan2(self, x: Dd) -> Self {
        let y = self;
        let a0 = Dd::from(y.hi.atan2(x.hi));
        let (s, c) = a0.sin_cos();
        let delta = (y * c - x * s) / (x * c + y * s);
        a0 + delta
    }
}

impl From<f64> for Dd {
    fn from(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, b: Dd) -> Dd {
        let (s1, s2) = two_sum(self.hi, b.hi);
        let (t1, t2) = two_sum(self.lo, b.lo);
        let (s1, s2) = quick_two_sum(s1, s2 + t1);
        let (hi, lo) = quick_two_sum(s1, s2 + t2);
        Dd { hi, lo }
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, b: Dd) -> Dd {
        self + (-b)
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, b: Dd) -> Dd {
        let (p1, p2) = two_prod(self.hi, b.hi);
        let p2 = p2 + (self.hi * b.lo + self.lo * b.hi);
        let (hi, lo) = quick_two_sum(p1, p2);
        Dd { hi, lo }
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, b: Dd) -> Dd {
        let q1 = self.hi / b.hi;
        let r = self - b.mul_f64(q1);
        let q2 = r.hi / b.hi;
        let r = r - b.mul_f64(q2);
        let q3 = r.hi / b.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo } + Dd::from(q3)
    }
}

/// Complex number over [`Dd`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ComplexDd {
    pub re: Dd,
    pub im: Dd,
}

impl ComplexDd {
    pub const ZERO: ComplexDd = ComplexDd {
        re: Dd::ZERO,
        im: Dd::ZERO,
    };
    pub const ONE: ComplexDd = ComplexDd {
        re: Dd::ONE,
        im: Dd::ZERO,
    };

    pub fn new(re: Dd, im: Dd) -> Self {
        ComplexDd { re, im }
    }

    /// `e^{i angle}`.
    pub fn cis(angle: Dd) -> Self {
        let (s, c) = angle.sin_cos();
        ComplexDd { re: c, im: s }
    }

    pub fn scale(self, s: Dd) -> Self {
        ComplexDd {
            re: self.re * s,
            im: self.im * s,
        }
    }

    pub fn conj(self) -> Self {
        ComplexDd {
            re: self.re,
            im: -self.im,
        }
    }

    pub fn norm_sqr(self) -> Dd {
        self.re.sqr() + self.im.sqr()
    }

    /// Principal logarithm.
    pub fn ln(self) -> Self {
        ComplexDd {
            re: self.norm_sqr().ln().scale_pow2(-1),
            im: self.im.atan2(self.re),
        }
    }

    pub fn to_complex64(self) -> num_complex::Complex64 {
        num_complex::Complex64::new(self.re.to_f64(), self.im.to_f64())
    }
}

impl Add for ComplexDd {
    type Output = ComplexDd;
    fn add(self, b: ComplexDd) -> ComplexDd {
        ComplexDd {
            re: self.re + b.re,
            im: self.im + b.im,
        }
    }
}

impl Sub for ComplexDd {
    type Output = ComplexDd;
    fn sub(self, b: ComplexDd) -> ComplexDd {
        ComplexDd {
            re: self.re - b.re,
            im: self.im - b.im,
        }
    }
}

impl Neg for ComplexDd {
    type Output = ComplexDd;
    fn neg(self) -> ComplexDd {
        ComplexDd {
            re: -self.re,
            im: -self.im,
        }
    }
}

impl Mul for ComplexDd {
    type Output = ComplexDd;
    fn mul(self, b: ComplexDd) -> ComplexDd {
        ComplexDd {
            re: self.re * b.re - self.im * b.im,
            im: self.re * b.im + self.im * b.re,
        }
    }
}

impl Div for ComplexDd {
    type Output = ComplexDd;
    fn div(self, b: ComplexDd) -> ComplexDd {
        let d = b.norm_sqr();
        let n = self * b.conj();
        ComplexDd {
            re: n.re / d,
            im: n.im / d,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Dd, b: Dd, tol: f64) -> bool {
        (a - b).abs().to_f64() <= tol * b.abs().to_f64().max(1e-300)
    }

    // Reference values below were produced with 40-digit mpmath and split
    // into (hi, lo) pairs.
    #[test]
    fn ln_matches_high_precision_reference() {
        let reference = Dd::from_parts(2.623_642_644_674_910_6e-1, 2.663_362_835_347_756_6e-17);
        assert!(close(Dd::from(1.3).ln(), reference, 1e-30));
        assert!(close(Dd::from(2.0).ln(), Dd::LN_2, 1e-30));
        let reference = Dd::from_parts(-2.407_945_608_651_872_2, 2.157_178_658_222_474e-16);
        assert!(close(Dd::from(0.09).ln(), reference, 1e-30));
    }

    #[test]
    fn exp_matches_reference() {
        let e = Dd::from_parts(std::f64::consts::E, 1.445_646_891_729_250_2e-16);
        assert!(close(Dd::ONE.exp(), e, 1e-30));
        assert!(close(Dd::from(2.0).ln().exp(), Dd::from(2.0), 1e-30));
    }

    #[test]
    fn trig_matches_reference() {
        let (s, c) = Dd::from(0.7).sin_cos();
        let s_ref = Dd::from_parts(6.442_176_872_376_91e-1, 2.874_056_792_733_875_5e-18);
        let c_ref = Dd::from_parts(7.648_421_872_844_885e-1, -4.013_780_434_022_238e-17);
        assert!(close(s, s_ref, 1e-30));
        assert!(close(c, c_ref, 1e-30));

        let (s, c) = (Dd::PI.div_f64(6.0)).sin_cos();
        assert!(close(s, Dd::from(0.5), 1e-30));
        assert!(close(c.sqr(), Dd::from(0.75), 1e-30));

        // every quadrant
        for k in -8..=8 {
            let x = Dd::from(0.3 + k as f64);
            let (s, c) = x.sin_cos();
            assert!(close(s.sqr() + c.sqr(), Dd::ONE, 1e-30));
            assert!((s.to_f64() - (0.3 + k as f64).sin()).abs() < 1e-15);
        }
    }

    #[test]
    fn atan2_matches_reference() {
        let a_ref = Dd::from_parts(2.662_520_491_509_253e-1, 9.521_016_506_660_306e-18);
        assert!(close(Dd::from(0.3).atan2(Dd::from(1.1)), a_ref, 1e-30));
        let quarter = Dd::ONE.atan2(Dd::ONE);
        assert!(close(quarter.mul_f64(4.0), Dd::PI, 1e-30));
        let back = Dd::from(-1.0).atan2(Dd::from(-1.0));
        assert!(close(back, -Dd::PI.mul_f64(0.75), 1e-30));
    }

    #[test]
    fn division_is_inverse_of_multiplication() {
        let a = Dd::from(1.0) / Dd::from(3.0);
        assert!(close(a.mul_f64(3.0), Dd::ONE, 1e-31));
        let z = ComplexDd::new(Dd::from(0.3), Dd::from(-0.7));
        let w = ComplexDd::new(Dd::from(1.1), Dd::from(0.2));
        let back = (z / w) * w;
        assert!(close(back.re, z.re, 1e-30));
        assert!(close(back.im, z.im, 1e-30));
    }
}
