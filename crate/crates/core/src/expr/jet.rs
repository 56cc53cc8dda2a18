//! Second-order forward-mode jets.
//!
//! A [`Jet2`] carries a value together with its first and second derivative
//! with respect to the radial variable. Arithmetic on jets applies the sum,
//! product, quotient and chain rules exactly, so any closed-form radial
//! function evaluated on `Jet2::var(r)` yields `(u(r), u'(r), u''(r))` to
//! round-off.

use std::ops::{Add, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// Value, first derivative and second derivative at a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Jet2 {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

impl Jet2 {
    #[inline]
    pub fn new(value: f64, d1: f64, d2: f64) -> Self {
        Self { value, d1, d2 }
    }

    #[inline]
    pub fn constant(value: f64) -> Self {
        Self {
            value,
            d1: 0.0,
            d2: 0.0,
        }
    }

    /// The independent variable seeded at `r`.
    #[inline]
    pub fn var(r: f64) -> Self {
        Self {
            value: r,
            d1: 1.0,
            d2: 0.0,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite() && self.d1.is_finite() && self.d2.is_finite()
    }

    /// Compose with a scalar function given its value and first two
    /// derivatives at `self.value`.
    #[inline]
    pub fn chain(self, f0: f64, f1: f64, f2: f64) -> Self {
        Self {
            value: f0,
            d1: f1 * self.d1,
            d2: f2 * self.d1 * self.d1 + f1 * self.d2,
        }
    }

    pub fn exp(self) -> Self {
        let e = self.value.exp();
        self.chain(e, e, e)
    }

    /// Natural logarithm; caller guarantees a positive value.
    pub fn ln(self) -> Self {
        let v = self.value;
        self.chain(v.ln(), 1.0 / v, -1.0 / (v * v))
    }

    pub fn sqrt(self) -> Self {
        let s = self.value.sqrt();
        self.chain(s, 0.5 / s, -0.25 / (s * self.value))
    }

    pub fn sinh(self) -> Self {
        let (s, c) = (self.value.sinh(), self.value.cosh());
        self.chain(s, c, s)
    }

    pub fn cosh(self) -> Self {
        let (s, c) = (self.value.sinh(), self.value.cosh());
        self.chain(c, s, c)
    }

    pub fn tanh(self) -> Self {
        let t = self.value.tanh();
        let sech2 = 1.0 - t * t;
        self.chain(t, sech2, -2.0 * t * sech2)
    }

    pub fn sin(self) -> Self {
        let (s, c) = self.value.sin_cos();
        self.chain(s, c, -s)
    }

    pub fn cos(self) -> Self {
        let (s, c) = self.value.sin_cos();
        self.chain(c, -s, -c)
    }

    /// `self^p` for a constant exponent. Returns `None` when the power or one
    /// of its derivatives is undefined at the current value.
    pub fn powf(self, p: f64) -> Option<Self> {
        let x = self.value;
        if p == 0.0 {
            return Some(Self::constant(1.0));
        }
        let is_int = p.fract() == 0.0 && p.abs() < 1e9;
        if x < 0.0 && !is_int {
            return None;
        }
        if x == 0.0 && p < 0.0 {
            return None;
        }
        let pw = |q: f64| -> f64 {
            if is_int {
                x.powi(q as i32)
            } else {
                x.powf(q)
            }
        };
        let f0 = pw(p);
        let f1 = p * pw(p - 1.0);
        let c2 = p * (p - 1.0);
        let f2 = if c2 == 0.0 { 0.0 } else { c2 * pw(p - 2.0) };
        // a vanishing coefficient must not be poisoned by 0 * inf
        let f1 = if self.d1 == 0.0 && self.d2 == 0.0 { 0.0 } else { f1 };
        let f2 = if self.d1 == 0.0 { 0.0 } else { f2 };
        let out = self.chain(f0, f1, f2);
        out.is_finite().then_some(out)
    }
}

impl Add for Jet2 {
    type Output = Self;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        Self::new(self.value + rhs.value, self.d1 + rhs.d1, self.d2 + rhs.d2)
    }
}

impl Sub for Jet2 {
    type Output = Self;
    #[inline]
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.value - rhs.value, self.d1 - rhs.d1, self.d2 - rhs.d2)
    }
}

impl Mul for Jet2 {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        Self::new(
            self.value * rhs.value,
            self.d1 * rhs.value + self.value * rhs.d1,
            self.d2 * rhs.value + 2.0 * self.d1 * rhs.d1 + self.value * rhs.d2,
        )
    }
}

impl Div for Jet2 {
    type Output = Self;
    #[inline]
    fn div(self, rhs: Self) -> Self {
        let q = self.value / rhs.value;
        let q1 = (self.d1 - q * rhs.d1) / rhs.value;
        let q2 = (self.d2 - 2.0 * q1 * rhs.d1 - q * rhs.d2) / rhs.value;
        Self::new(q, q1, q2)
    }
}

impl Neg for Jet2 {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.value, -self.d1, -self.d2)
    }
}

impl Mul<f64> for Jet2 {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: f64) -> Self {
        Self::new(self.value * rhs, self.d1 * rhs, self.d2 * rhs)
    }
}

impl Add<f64> for Jet2 {
    type Output = Self;
    #[inline]
    fn add(self, rhs: f64) -> Self {
        Self::new(self.value + rhs, self.d1, self.d2)
    }
}
