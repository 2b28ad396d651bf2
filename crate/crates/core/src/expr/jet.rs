//! Truncated Taylor-series arithmetic ("jets") up to order 5.
//!
//! A jet stores normalized Taylor coefficients `c[k] = f^(k)(t0) / k!` for
//! `k <= order`. Arithmetic propagates derivatives algebraically; the order of
//! a result is the minimum order of its operands.

use std::ops::{Add, Div, Mul, Neg, Sub};

pub const MAX_ORDER: usize = 5;
const N: usize = MAX_ORDER + 1;

const FACT: [f64; N] = [1.0, 1.0, 2.0, 6.0, 24.0, 120.0];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    c: [f64; N],
    order: usize,
}

impl Jet {
    pub fn constant(value: f64, order: usize) -> Self {
        let mut c = [0.0; N];
        c[0] = value;
        Jet { c, order: order.min(MAX_ORDER) }
    }

    /// The independent variable `t0 + dt`.
    pub fn variable(value: f64, order: usize) -> Self {
        let mut j = Jet::constant(value, order);
        if j.order >= 1 {
            j.c[1] = 1.0;
        }
        j
    }

    /// Builds a jet from normalized Taylor coefficients.
    pub fn from_taylor(coeffs: &[f64]) -> Self {
        assert!(!coeffs.is_empty() && coeffs.len() <= N);
        let mut c = [0.0; N];
        c[..coeffs.len()].copy_from_slice(coeffs);
        Jet { c, order: coeffs.len() - 1 }
    }

    /// Builds a jet from derivative values `f, f', f'', ...`.
    pub fn from_derivatives(derivs: &[f64]) -> Self {
        assert!(!derivs.is_empty() && derivs.len() <= N);
        let mut c = [0.0; N];
        for (k, d) in derivs.iter().enumerate() {
            c[k] = d / FACT[k];
        }
        Jet { c, order: derivs.len() - 1 }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// Normalized Taylor coefficient of `dt^k`.
    pub fn taylor(&self, k: usize) -> f64 {
        if k <= self.order {
            self.c[k]
        } else {
            0.0
        }
    }

    /// k-th derivative at the expansion point.
    pub fn derivative(&self, k: usize) -> f64 {
        assert!(k <= self.order, "derivative {k} beyond jet order {}", self.order);
        self.c[k] * FACT[k]
    }

    /// Value and derivatives `a0..a_order`; trailing entries are zero.
    pub fn derivatives(&self) -> [f64; N] {
        let mut out = [0.0; N];
        for k in 0..=self.order {
            out[k] = self.c[k] * FACT[k];
        }
        out
    }

    pub fn truncate(mut self, order: usize) -> Self {
        let order = order.min(self.order);
        for k in order + 1..N {
            self.c[k] = 0.0;
        }
        self.order = order;
        self
    }

    /// d/dt of the series; the order drops by one.
    pub fn differentiate(&self) -> Jet {
        assert!(self.order >= 1, "cannot differentiate an order-0 jet");
        let mut c = [0.0; N];
        for k in 0..self.order {
            c[k] = (k + 1) as f64 * self.c[k + 1];
        }
        Jet { c, order: self.order - 1 }
    }

    /// Antiderivative with the given constant term; the order rises by one.
    pub fn integrate(&self, constant: f64) -> Jet {
        let order = (self.order + 1).min(MAX_ORDER);
        let mut c = [0.0; N];
        c[0] = constant;
        for k in 1..=order {
            c[k] = self.c[k - 1] / k as f64;
        }
        Jet { c, order }
    }

    pub fn scale(&self, a: f64) -> Jet {
        let mut out = *self;
        for k in 0..=self.order {
            out.c[k] *= a;
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.c[..=self.order].iter().all(|x| x.is_finite())
    }

    fn with_order(order: usize) -> Jet {
        Jet { c: [0.0; N], order }
    }

    pub fn recip(&self) -> Jet {
        Jet::constant(1.0, self.order) / *self
    }

    pub fn exp(&self) -> Jet {
        let mut y = Jet::with_order(self.order);
        y.c[0] = self.c[0].exp();
        for k in 1..=self.order {
            let s: f64 = (1..=k).map(|j| j as f64 * self.c[j] * y.c[k - j]).sum();
            y.c[k] = s / k as f64;
        }
        y
    }

    /// Natural logarithm; requires a positive value.
    pub fn ln(&self) -> Jet {
        let a0 = self.c[0];
        let mut y = Jet::with_order(self.order);
        y.c[0] = a0.ln();
        for k in 1..=self.order {
            let s: f64 = (1..k).map(|j| j as f64 * y.c[j] * self.c[k - j]).sum();
            y.c[k] = (self.c[k] - s / k as f64) / a0;
        }
        y
    }

    fn sin_cos_impl(&self, hyperbolic: bool) -> (Jet, Jet) {
        let mut s = Jet::with_order(self.order);
        let mut c = Jet::with_order(self.order);
        let a0 = self.c[0];
        if hyperbolic {
            s.c[0] = a0.sinh();
            c.c[0] = a0.cosh();
        } else {
            s.c[0] = a0.sin();
            c.c[0] = a0.cos();
        }
        let sign = if hyperbolic { 1.0 } else { -1.0 };
        for k in 1..=self.order {
            let mut ss = 0.0;
            let mut cs = 0.0;
            for j in 1..=k {
                let ja = j as f64 * self.c[j];
                ss += ja * c.c[k - j];
                cs += ja * s.c[k - j];
            }
            s.c[k] = ss / k as f64;
            c.c[k] = sign * cs / k as f64;
        }
        (s, c)
    }

    pub fn sin_cos(&self) -> (Jet, Jet) {
        self.sin_cos_impl(false)
    }

    pub fn sinh_cosh(&self) -> (Jet, Jet) {
        self.sin_cos_impl(true)
    }

    pub fn sin(&self) -> Jet {
        self.sin_cos().0
    }

    pub fn cos(&self) -> Jet {
        self.sin_cos().1
    }

    pub fn sinh(&self) -> Jet {
        self.sinh_cosh().0
    }

    pub fn cosh(&self) -> Jet {
        self.sinh_cosh().1
    }

    pub fn tan(&self) -> Jet {
        let (s, c) = self.sin_cos();
        s / c
    }

    pub fn tanh(&self) -> Jet {
        let (s, c) = self.sinh_cosh();
        s / c
    }

    /// `self^r` for real `r`; requires a positive value unless the jet is order 0.
    pub fn powf(&self, r: f64) -> Jet {
        let a0 = self.c[0];
        let mut y = Jet::with_order(self.order);
        y.c[0] = a0.powf(r);
        for k in 1..=self.order {
            let s: f64 = (1..=k)
                .map(|j| (r * j as f64 - (k - j) as f64) * self.c[j] * y.c[k - j])
                .sum();
            y.c[k] = s / (k as f64 * a0);
        }
        y
    }

    /// Integer power by repeated squaring; valid for any value when `n >= 0`.
    pub fn powi(&self, n: i32) -> Jet {
        if n < 0 {
            return self.powi(-n).recip();
        }
        let mut result = Jet::constant(1.0, self.order);
        let mut base = *self;
        let mut e = n as u32;
        while e > 0 {
            if e & 1 == 1 {
                result = result * base;
            }
            base = base * base;
            e >>= 1;
        }
        result
    }

    pub fn sqrt(&self) -> Jet {
        if self.order == 0 {
            return Jet::constant(self.c[0].sqrt(), 0);
        }
        self.powf(0.5)
    }

    /// `|x|`, using the sign of the first nonzero coefficient.
    pub fn abs(&self) -> Jet {
        let lead = self.c[..=self.order].iter().find(|x| **x != 0.0).copied().unwrap_or(0.0);
        if lead < 0.0 {
            -*self
        } else {
            *self
        }
    }

    /// Substitutes `dt = inner(dσ)` where `inner` has zero constant term:
    /// returns the series of `self(t0 + inner(σ))` in σ.
    pub fn compose(&self, inner: &Jet) -> Jet {
        let order = self.order.min(inner.order);
        let mut shifted = inner.truncate(order);
        shifted.c[0] = 0.0;
        // Horner: c0 + t (c1 + t (c2 + ...))
        let mut acc = Jet::constant(self.c[order], order);
        for k in (0..order).rev() {
            acc = acc * shifted + Jet::constant(self.c[k], order);
        }
        acc
    }

    /// Series reversion. `self` must have `c0 == t0`-offset removed by the
    /// caller (only `c1..` are used) and `c1 != 0`. Returns `inv` with zero
    /// constant term such that `self(inv(y)) - self.c0 = y`.
    pub fn revert(&self) -> Jet {
        let a1 = self.c[1];
        let order = self.order;
        let mut higher = *self;
        higher.c[0] = 0.0;
        higher.c[1] = 0.0;
        let y = Jet::variable(0.0, order);
        let mut t = y.scale(1.0 / a1);
        // Each fixed-point sweep t = (y - sum_{k>=2} a_k t^k) / a1 gains one order.
        for _ in 1..order {
            t = (y - higher.compose(&t)).scale(1.0 / a1);
        }
        t
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        let order = self.order.min(o.order);
        let mut r = Jet::with_order(order);
        for k in 0..=order {
            r.c[k] = self.c[k] + o.c[k];
        }
        r
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        let order = self.order.min(o.order);
        let mut r = Jet::with_order(order);
        for k in 0..=order {
            r.c[k] = self.c[k] - o.c[k];
        }
        r
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        let order = self.order.min(o.order);
        let mut r = Jet::with_order(order);
        for k in 0..=order {
            r.c[k] = (0..=k).map(|j| self.c[j] * o.c[k - j]).sum();
        }
        r
    }
}

impl Div for Jet {
    type Output = Jet;
    fn div(self, o: Jet) -> Jet {
        let order = self.order.min(o.order);
        let mut q = Jet::with_order(order);
        let b0 = o.c[0];
        for k in 0..=order {
            let s: f64 = (1..=k).map(|j| o.c[j] * q.c[k - j]).sum();
            q.c[k] = (self.c[k] - s) / b0;
        }
        q
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(mut self, a: f64) -> Jet {
        self.c[0] += a;
        self
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, a: f64) -> Jet {
        self.scale(a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn polynomial_derivatives() {
        let u = Jet::variable(3.0, 5);
        let d = (u * u).derivatives();
        assert_eq!(d, [9.0, 6.0, 2.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn sinh_maclaurin() {
        let d = Jet::variable(0.0, 5).sinh().derivatives();
        assert_eq!(d, [0.0, 1.0, 0.0, 1.0, 0.0, 1.0]);
    }

    #[test]
    fn known_series() {
        let x = Jet::variable(0.0, 5);
        let e = x.exp();
        for k in 0..=5 {
            assert_relative_eq!(e.taylor(k), 1.0 / FACT[k], epsilon = 1e-15);
        }
        let l = (x + 1.0).ln();
        assert_relative_eq!(l.taylor(3), 1.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(l.taylor(4), -0.25, epsilon = 1e-15);
        let g = Jet::constant(1.0, 5) / (Jet::constant(1.0, 5) - x);
        for k in 0..=5 {
            assert_relative_eq!(g.taylor(k), 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn powf_matches_powi() {
        let x = Jet::variable(1.7, 5);
        let a = x.powf(3.0);
        let b = x.powi(3);
        for k in 0..=5 {
            assert_relative_eq!(a.taylor(k), b.taylor(k), epsilon = 1e-12);
        }
        let s = x.sqrt();
        let back = s * s;
        for k in 0..=5 {
            assert_relative_eq!(back.taylor(k), x.taylor(k), epsilon = 1e-14);
        }
    }

    #[test]
    fn compose_and_revert_round_trip() {
        // f(t) = 2t + 0.3t^2 - 0.1t^3 + 0.05 t^5
        let f = Jet::from_taylor(&[0.0, 2.0, 0.3, -0.1, 0.0, 0.05]);
        let g = f.revert();
        let id = f.compose(&g);
        assert_relative_eq!(id.taylor(1), 1.0, epsilon = 1e-14);
        for k in 2..=5 {
            assert!(id.taylor(k).abs() < 1e-13, "k={k}: {}", id.taylor(k));
        }
    }

    #[test]
    fn integrate_differentiate() {
        let x = Jet::variable(0.4, 4).sin();
        let back = x.integrate(2.0).differentiate();
        for k in 0..=4 {
            assert_relative_eq!(back.taylor(k), x.taylor(k), epsilon = 1e-15);
        }
    }
}
