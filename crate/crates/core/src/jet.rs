//! Truncated bivariate Taylor jets of total order at most 3.
//!
//! Coefficients are stored as Taylor coefficients, `c[i][j] =
//! (1/(i! j!)) d^{i+j} f / du^i dv^j`, in a dense triangular array. Partial
//! derivatives are available through [`Jet2::partial`].

use std::ops::{Add, Div, Mul, Neg, Sub};

pub const MAX_ORDER: usize = 3;
const LEN: usize = 10;

/// Monomial exponents in storage order.
pub const MONOMIALS: [(usize, usize); LEN] = [
    (0, 0),
    (1, 0),
    (0, 1),
    (2, 0),
    (1, 1),
    (0, 2),
    (3, 0),
    (2, 1),
    (1, 2),
    (0, 3),
];

#[inline]
pub const fn index(i: usize, j: usize) -> usize {
    let d = i + j;
    d * (d + 1) / 2 + j
}

#[inline]
const fn len(order: usize) -> usize {
    (order + 1) * (order + 2) / 2
}

const FACTORIAL: [f64; 4] = [1.0, 1.0, 2.0, 6.0];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet2 {
    order: usize,
    c: [f64; LEN],
}

impl Jet2 {
    pub fn constant(value: f64, order: usize) -> Jet2 {
        assert!(order <= MAX_ORDER, "jet order {order} exceeds {MAX_ORDER}");
        let mut c = [0.0; LEN];
        c[0] = value;
        Jet2 { order, c }
    }

    /// The coordinate function `u` expanded at `u = a`.
    pub fn var_u(a: f64, order: usize) -> Jet2 {
        let mut j = Jet2::constant(a, order);
        if order >= 1 {
            j.c[index(1, 0)] = 1.0;
        }
        j
    }

    pub fn var_v(b: f64, order: usize) -> Jet2 {
        let mut j = Jet2::constant(b, order);
        if order >= 1 {
            j.c[index(0, 1)] = 1.0;
        }
        j
    }

    pub fn from_coefficients(order: usize, coeffs: &[f64]) -> Jet2 {
        assert!(order <= MAX_ORDER && coeffs.len() == len(order));
        let mut c = [0.0; LEN];
        c[..coeffs.len()].copy_from_slice(coeffs);
        Jet2 { order, c }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// Taylor coefficient of `du^i dv^j`; zero beyond the jet order.
    pub fn coeff(&self, i: usize, j: usize) -> f64 {
        if i + j > self.order {
            0.0
        } else {
            self.c[index(i, j)]
        }
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.c[..len(self.order)]
    }

    /// Partial derivative `d^{i+j} f / du^i dv^j` at the base point.
    pub fn partial(&self, i: usize, j: usize) -> f64 {
        self.coeff(i, j) * FACTORIAL[i.min(3)] * FACTORIAL[j.min(3)]
    }

    pub fn du(&self) -> f64 {
        self.coeff(1, 0)
    }

    pub fn dv(&self) -> f64 {
        self.coeff(0, 1)
    }

    pub fn gradient(&self) -> [f64; 2] {
        [self.du(), self.dv()]
    }

    /// Hessian `[[f_uu, f_uv], [f_uv, f_vv]]`.
    pub fn hessian(&self) -> [[f64; 2]; 2] {
        let uv = self.partial(1, 1);
        [[self.partial(2, 0), uv], [uv, self.partial(0, 2)]]
    }

    pub fn truncate(&self, order: usize) -> Jet2 {
        let order = order.min(self.order);
        let mut c = [0.0; LEN];
        c[..len(order)].copy_from_slice(&self.c[..len(order)]);
        Jet2 { order, c }
    }

    /// Jet of `df/du`; one order lower.
    pub fn d_u(&self) -> Jet2 {
        self.shift(1, 0)
    }

    /// Jet of `df/dv`; one order lower.
    pub fn d_v(&self) -> Jet2 {
        self.shift(0, 1)
    }

    fn shift(&self, di: usize, dj: usize) -> Jet2 {
        assert!(self.order >= 1, "cannot differentiate an order-0 jet");
        let order = self.order - 1;
        let mut c = [0.0; LEN];
        for (k, &(i, j)) in MONOMIALS[..len(order)].iter().enumerate() {
            let factor = if di == 1 { (i + 1) as f64 } else { (j + 1) as f64 };
            c[k] = factor * self.c[index(i + di, j + dj)];
        }
        Jet2 { order, c }
    }

    pub fn scale(&self, s: f64) -> Jet2 {
        let mut out = *self;
        for x in &mut out.c[..len(self.order)] {
            *x *= s;
        }
        out
    }

    /// `F(self)` from the derivatives `F^(k)` at the base value, k = 0..=order.
    pub fn compose(&self, derivs: [f64; 4]) -> Jet2 {
        let mut delta = *self;
        delta.c[0] = 0.0;
        let mut out = Jet2::constant(derivs[0], self.order);
        let mut power = Jet2::constant(1.0, self.order);
        for (k, &d) in derivs.iter().enumerate().take(self.order + 1).skip(1) {
            power = power * delta;
            let w = d / FACTORIAL[k];
            for (o, p) in out.c[..len(self.order)].iter_mut().zip(&power.c[..len(self.order)]) {
                *o += w * p;
            }
        }
        out
    }

    pub fn recip(&self) -> Option<Jet2> {
        let x = self.value();
        if x == 0.0 {
            return None;
        }
        let r = 1.0 / x;
        Some(self.compose([r, -r * r, 2.0 * r * r * r, -6.0 * r * r * r * r]))
    }

    pub fn sqrt(&self) -> Option<Jet2> {
        let x = self.value();
        if x < 0.0 || (x == 0.0 && self.order > 0) {
            return None;
        }
        let s = x.sqrt();
        if self.order == 0 {
            return Some(Jet2::constant(s, 0));
        }
        Some(self.compose([s, 0.5 / s, -0.25 / (s * x), 0.375 / (s * x * x)]))
    }

    pub fn exp(&self) -> Jet2 {
        let e = self.value().exp();
        self.compose([e; 4])
    }

    pub fn ln(&self) -> Option<Jet2> {
        let x = self.value();
        if x <= 0.0 {
            return None;
        }
        Some(self.compose([x.ln(), 1.0 / x, -1.0 / (x * x), 2.0 / (x * x * x)]))
    }

    pub fn sin(&self) -> Jet2 {
        let (s, c) = self.value().sin_cos();
        self.compose([s, c, -s, -c])
    }

    pub fn cos(&self) -> Jet2 {
        let (s, c) = self.value().sin_cos();
        self.compose([c, -s, -c, s])
    }

    pub fn tan(&self) -> Option<Jet2> {
        let x = self.value();
        if x.cos() == 0.0 {
            return None;
        }
        let t = x.tan();
        let sec2 = 1.0 + t * t;
        Some(self.compose([t, sec2, 2.0 * t * sec2, sec2 * (2.0 + 6.0 * t * t)]))
    }

    pub fn atan(&self) -> Jet2 {
        let x = self.value();
        let q = 1.0 + x * x;
        self.compose([x.atan(), 1.0 / q, -2.0 * x / (q * q), (6.0 * x * x - 2.0) / (q * q * q)])
    }

    /// `|self|`; not differentiable where the base value is zero.
    pub fn abs(&self) -> Option<Jet2> {
        let x = self.value();
        if x == 0.0 && self.order > 0 {
            return None;
        }
        Some(if x < 0.0 { -*self } else { *self })
    }

    /// Integer power by repeated multiplication.
    pub fn powi(&self, n: i32) -> Option<Jet2> {
        if n < 0 {
            return self.powi(-n)?.recip();
        }
        let mut result = Jet2::constant(1.0, self.order);
        let mut base = *self;
        let mut e = n as u32;
        while e > 0 {
            if e & 1 == 1 {
                result = result * base;
            }
            e >>= 1;
            if e > 0 {
                base = base * base;
            }
        }
        Some(result)
    }

    /// Real power, defined for a positive base only.
    pub fn powf(&self, exponent: &Jet2) -> Option<Jet2> {
        if self.value() <= 0.0 {
            return None;
        }
        Some((self.ln()? * exponent).exp())
    }
}

impl Add for &Jet2 {
    type Output = Jet2;
    fn add(self, rhs: &Jet2) -> Jet2 {
        let order = self.order.min(rhs.order);
        let mut c = [0.0; LEN];
        let n = len(order);
        for ((o, a), b) in c[..n].iter_mut().zip(&self.c[..n]).zip(&rhs.c[..n]) {
            *o = a + b;
        }
        Jet2 { order, c }
    }
}

impl Sub for &Jet2 {
    type Output = Jet2;
    fn sub(self, rhs: &Jet2) -> Jet2 {
        let order = self.order.min(rhs.order);
        let mut c = [0.0; LEN];
        let n = len(order);
        for ((o, a), b) in c[..n].iter_mut().zip(&self.c[..n]).zip(&rhs.c[..n]) {
            *o = a - b;
        }
        Jet2 { order, c }
    }
}

impl Mul for &Jet2 {
    type Output = Jet2;
    fn mul(self, rhs: &Jet2) -> Jet2 {
        let order = self.order.min(rhs.order);
        let a = &self.c;
        let b = &rhs.c;
        let mut c = [0.0; LEN];
        c[0] = a[0] * b[0];
        if order >= 1 {
            c[1] = a[0] * b[1] + a[1] * b[0];
            c[2] = a[0] * b[2] + a[2] * b[0];
        }
        if order >= 2 {
            c[3] = a[0] * b[3] + a[1] * b[1] + a[3] * b[0];
            c[4] = a[0] * b[4] + a[1] * b[2] + a[2] * b[1] + a[4] * b[0];
            c[5] = a[0] * b[5] + a[2] * b[2] + a[5] * b[0];
        }
        if order >= 3 {
            c[6] = a[0] * b[6] + a[1] * b[3] + a[3] * b[1] + a[6] * b[0];
            c[7] = a[0] * b[7] + a[1] * b[4] + a[2] * b[3] + a[3] * b[2] + a[4] * b[1] + a[7] * b[0];
            c[8] = a[0] * b[8] + a[1] * b[5] + a[2] * b[4] + a[4] * b[2] + a[5] * b[1] + a[8] * b[0];
            c[9] = a[0] * b[9] + a[2] * b[5] + a[5] * b[2] + a[9] * b[0];
        }
        Jet2 { order, c }
    }
}

impl Neg for Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        self.scale(-1.0)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Jet2 {
            type Output = Jet2;
            fn $m(self, rhs: Jet2) -> Jet2 {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&Jet2> for Jet2 {
            type Output = Jet2;
            fn $m(self, rhs: &Jet2) -> Jet2 {
                (&self).$m(rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Div for &Jet2 {
    type Output = Jet2;
    /// Panics on a zero denominator; use [`Jet2::recip`] for a checked form.
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: &Jet2) -> Jet2 {
        self * &rhs.recip().expect("jet division by zero")
    }
}

impl Div for Jet2 {
    type Output = Jet2;
    #[allow(clippy::op_ref)]
    fn div(self, rhs: Jet2) -> Jet2 {
        &self / &rhs
    }
}

/// Determinant of three 3-vectors of jets.
pub fn det3(a: &[Jet2; 3], b: &[Jet2; 3], c: &[Jet2; 3]) -> Jet2 {
    let m0 = b[1] * c[2] - b[2] * c[1];
    let m1 = b[2] * c[0] - b[0] * c[2];
    let m2 = b[0] * c[1] - b[1] * c[0];
    a[0] * m0 + a[1] * m1 + a[2] * m2
}

pub fn dot3(a: &[Jet2; 3], b: &[Jet2; 3]) -> Jet2 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross3(a: &[Jet2; 3], b: &[Jet2; 3]) -> [Jet2; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * (1.0 + a.abs().max(b.abs()))
    }

    #[test]
    fn coordinate_jet() {
        let u = Jet2::var_u(0.3, 3);
        assert_eq!(u.value(), 0.3);
        assert_eq!(u.coeff(1, 0), 1.0);
        for &(i, j) in &MONOMIALS[2..] {
            assert_eq!(u.coeff(i, j), 0.0);
        }
    }

    #[test]
    fn product_is_leibniz() {
        // (u + 2v)(u - v) = u^2 + uv - 2v^2 at (1, 1)
        let u = Jet2::var_u(1.0, 3);
        let v = Jet2::var_v(1.0, 3);
        let a = u + v.scale(2.0);
        let b = u - v;
        let p = a * b;
        assert!(close(p.value(), 0.0));
        assert!(close(p.du(), 3.0)); // 2u + v
        assert!(close(p.dv(), -3.0)); // u - 4v
        assert!(close(p.partial(2, 0), 2.0));
        assert!(close(p.partial(1, 1), 1.0));
        assert!(close(p.partial(0, 2), -4.0));
        assert_eq!(p.coeff(3, 0), 0.0);
    }

    #[test]
    fn shift_lowers_order() {
        let u = Jet2::var_u(2.0, 3);
        let cube = u.powi(3).unwrap();
        let d = cube.d_u();
        assert_eq!(d.order(), 2);
        assert!(close(d.value(), 12.0));
        assert!(close(d.du(), 12.0));
        assert!(close(d.partial(2, 0), 6.0));
    }

    #[test]
    fn composition_matches_series() {
        // exp(u) at 0: coefficients 1, 1, 1/2, 1/6
        let e = Jet2::var_u(0.0, 3).exp();
        assert!(close(e.coeff(0, 0), 1.0));
        assert!(close(e.coeff(1, 0), 1.0));
        assert!(close(e.coeff(2, 0), 0.5));
        assert!(close(e.coeff(3, 0), 1.0 / 6.0));
    }

    #[test]
    fn domain_failures() {
        assert!(Jet2::constant(0.0, 1).recip().is_none());
        assert!(Jet2::constant(-1.0, 1).sqrt().is_none());
        assert!(Jet2::var_u(0.0, 1).sqrt().is_none());
        assert_eq!(Jet2::constant(0.0, 0).sqrt().unwrap().value(), 0.0);
        assert!(Jet2::constant(0.0, 2).ln().is_none());
        assert!(Jet2::var_u(0.0, 1).abs().is_none());
        assert!(Jet2::constant(-2.0, 1).powf(&Jet2::constant(0.5, 1)).is_none());
    }

    #[test]
    fn negative_integer_power() {
        let u = Jet2::var_u(2.0, 2);
        let p = u.powi(-2).unwrap();
        assert!(close(p.value(), 0.25));
        assert!(close(p.du(), -0.25));
        assert!(close(p.partial(2, 0), 6.0 / 16.0));
    }
}
