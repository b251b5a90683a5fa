//! Extended-precision reference values.
//!
//! A small double-double (`hi + lo`, ~106 significand bits) implementation of
//! the handful of functions needed to score protocol outputs: `exp`,
//! `sigmoid` and `tanh`. This module is deliberately independent of the
//! protocol code path, which evaluates its local exponentials in plain `f64`.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// An unevaluated sum `hi + lo` with `|lo| <= ulp(hi) / 2`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

const LN2: Dd = Dd {
    hi: std::f64::consts::LN_2,
    lo: 2.319_046_813_846_299_6e-17,
};

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
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

    pub const fn from_f64(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    /// Exact for integers up to 2^106 in magnitude.
    pub fn from_i128(x: i128) -> Self {
        let hi = x as f64;
        let rest = x - hi as i128;
        let (hi, lo) = quick_two_sum(hi, rest as f64);
        Dd { hi, lo }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    /// Multiply by `2^e`; exact barring overflow.
    pub fn ldexp(self, e: i32) -> Self {
        let f = 2f64.powi(e);
        Dd {
            hi: self.hi * f,
            lo: self.lo * f,
        }
    }

    pub fn is_sign_negative(self) -> bool {
        self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0)
    }

    /// Round to the nearest integer, ties to even.
    pub fn round_ties_even(self) -> i128 {
        let n = self.hi.round_ties_even();
        let t = self.hi - n;
        let n = n as i128;
        if t == 0.5 {
            if self.lo > 0.0 {
                n + 1
            } else {
                n
            }
        } else if t == -0.5 {
            if self.lo < 0.0 {
                n - 1
            } else {
                n
            }
        } else if t == 0.0 {
            // hi is an integer; lo alone may push past a half only if |lo| >= 0.5
            let m = self.lo.round_ties_even();
            let r = self.lo - m;
            let base = n + m as i128;
            if r == 0.5 || r == -0.5 {
                if base % 2 == 0 {
                    base
                } else if r > 0.0 {
                    base + 1
                } else {
                    base - 1
                }
            } else {
                base
            }
        } else {
            n
        }
    }

    /// Largest integer `<= self`.
    pub fn floor(self) -> i128 {
        let n = self.hi.floor();
        if n == self.hi {
            n as i128 + self.lo.floor() as i128
        } else {
            n as i128
        }
    }

    pub fn recip(self) -> Self {
        Dd::ONE / self
    }
}

impl From<f64> for Dd {
    fn from(x: f64) -> Self {
        Dd::from_f64(x)
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

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
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
        let (p, e) = two_prod(self.hi, b.hi);
        let e = e + (self.hi * b.lo + self.lo * b.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, b: Dd) -> Dd {
        let q1 = self.hi / b.hi;
        let r = self - b * Dd::from_f64(q1);
        let q2 = r.hi / b.hi;
        let r = r - b * Dd::from_f64(q2);
        let q3 = r.hi / b.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo } + Dd::from_f64(q3)
    }
}

/// `e^x` to roughly 100 bits of relative precision for `|x| < 700`.
pub fn exp(x: Dd) -> Dd {
    if x.hi == 0.0 && x.lo == 0.0 {
        return Dd::ONE;
    }
    let k = (x.hi / LN2.hi).round();
    let r = x - LN2 * Dd::from_f64(k);
    // shrink the argument, then square back up
    const SQUARINGS: i32 = 5;
    let r = r.ldexp(-SQUARINGS);
    let mut p = Dd::ONE;
    for i in (1..=16).rev() {
        p = Dd::ONE + r * p / Dd::from_f64(i as f64);
    }
    for _ in 0..SQUARINGS {
        p = p * p;
    }
    p.ldexp(k as i32)
}

pub fn sigmoid(x: Dd) -> Dd {
    if x.is_sign_negative() {
        let e = exp(x);
        e / (Dd::ONE + e)
    } else {
        (Dd::ONE + exp(-x)).recip()
    }
}

pub fn tanh(x: Dd) -> Dd {
    let neg = x.is_sign_negative();
    let a = if neg { -x } else { x };
    let e = exp(a.ldexp(1).neg());
    let t = (Dd::ONE - e) / (Dd::ONE + e);
    if neg {
        -t
    } else {
        t
    }
}
