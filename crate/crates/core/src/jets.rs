//! Second-order forward-mode jets.
//!
//! A [`Jet2`] carries the value, gradient and Hessian of a scalar field at a
//! chart point. Arithmetic composes truncated second-order Taylor expansions,
//! so every curvature quantity downstream is exact up to rounding.

use std::ops::{Add, Mul, Neg, Sub};

use serde::Serialize;

use crate::error::{Error, Result};

/// Value, gradient and (symmetric, row-major) Hessian of a scalar field.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Jet2 {
    pub value: f64,
    pub gradient: Vec<f64>,
    pub hessian: Vec<f64>,
}

/// Returns one coordinate jet per entry of `point`: value `point[i]`,
/// gradient the i-th unit vector, zero Hessian.
pub fn seed(point: &[f64]) -> Vec<Jet2> {
    (0..point.len()).map(|i| Jet2::variable(point, i)).collect()
}

impl Jet2 {
    pub fn constant(dim: usize, value: f64) -> Self {
        Self {
            value,
            gradient: vec![0.0; dim],
            hessian: vec![0.0; dim * dim],
        }
    }

    pub fn variable(point: &[f64], i: usize) -> Self {
        let mut jet = Self::constant(point.len(), point[i]);
        jet.gradient[i] = 1.0;
        jet
    }

    pub fn dim(&self) -> usize {
        self.gradient.len()
    }

    #[inline]
    pub fn d(&self, i: usize) -> f64 {
        self.gradient[i]
    }

    #[inline]
    pub fn dd(&self, i: usize, j: usize) -> f64 {
        self.hessian[i * self.dim() + j]
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        Ok(())
    }

    /// Composition with a scalar function given its value and first two
    /// derivatives at `self.value`.
    fn chain(&self, f0: f64, f1: f64, f2: f64) -> Self {
        let d = self.dim();
        let gradient: Vec<f64> = self.gradient.iter().map(|g| f1 * g).collect();
        let mut hessian = vec![0.0; d * d];
        for i in 0..d {
            for j in i..d {
                let h = f1 * self.hessian[i * d + j] + f2 * self.gradient[i] * self.gradient[j];
                hessian[i * d + j] = h;
                hessian[j * d + i] = h;
            }
        }
        Self {
            value: f0,
            gradient,
            hessian,
        }
    }

    /// Composition with a function of two arguments, given its partial
    /// derivatives up to second order.
    #[allow(clippy::too_many_arguments)]
    fn chain2(a: &Self, b: &Self, f0: f64, fa: f64, fb: f64, faa: f64, fab: f64, fbb: f64) -> Self {
        let d = a.dim();
        let gradient: Vec<f64> = (0..d)
            .map(|i| fa * a.gradient[i] + fb * b.gradient[i])
            .collect();
        let mut hessian = vec![0.0; d * d];
        for i in 0..d {
            for j in i..d {
                let (ai, aj, bi, bj) = (a.gradient[i], a.gradient[j], b.gradient[i], b.gradient[j]);
                let h = fa * a.hessian[i * d + j]
                    + fb * b.hessian[i * d + j]
                    + faa * ai * aj
                    + fbb * bi * bj
                    + fab * (ai * bj + bi * aj);
                hessian[i * d + j] = h;
                hessian[j * d + i] = h;
            }
        }
        Self {
            value: f0,
            gradient,
            hessian,
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            value: c * self.value,
            gradient: self.gradient.iter().map(|g| c * g).collect(),
            hessian: self.hessian.iter().map(|h| c * h).collect(),
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(self.zip(other, |a, b| a + b))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(self.zip(other, |a, b| a - b))
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(Self::chain2(
            self,
            other,
            self.value * other.value,
            other.value,
            self.value,
            0.0,
            1.0,
            0.0,
        ))
    }

    fn zip(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        Self {
            value: f(self.value, other.value),
            gradient: self
                .gradient
                .iter()
                .zip(&other.gradient)
                .map(|(a, b)| f(*a, *b))
                .collect(),
            hessian: self
                .hessian
                .iter()
                .zip(&other.hessian)
                .map(|(a, b)| f(*a, *b))
                .collect(),
        }
    }

    pub fn recip(&self) -> Result<Self> {
        let x = self.value;
        if x == 0.0 {
            return Err(domain("div", x));
        }
        Ok(self.chain(1.0 / x, -1.0 / (x * x), 2.0 / (x * x * x)))
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let b = other.value;
        if b == 0.0 {
            return Err(domain("div", b));
        }
        let a = self.value;
        let q = a / b;
        // q(a, b) = a / b
        Ok(Self::chain2(
            self,
            other,
            q,
            1.0 / b,
            -q / b,
            0.0,
            -1.0 / (b * b),
            2.0 * q / (b * b),
        ))
    }

    pub fn exp(&self) -> Self {
        let e = self.value.exp();
        self.chain(e, e, e)
    }

    pub fn ln(&self) -> Result<Self> {
        let x = self.value;
        if x <= 0.0 {
            return Err(domain("ln", x));
        }
        Ok(self.chain(x.ln(), 1.0 / x, -1.0 / (x * x)))
    }

    pub fn sqrt(&self) -> Result<Self> {
        let x = self.value;
        if x <= 0.0 {
            return Err(domain("sqrt", x));
        }
        let s = x.sqrt();
        Ok(self.chain(s, 0.5 / s, -0.25 / (s * x)))
    }

    pub fn sin(&self) -> Self {
        let (s, c) = self.value.sin_cos();
        self.chain(s, c, -s)
    }

    pub fn cos(&self) -> Self {
        let (s, c) = self.value.sin_cos();
        self.chain(c, -s, -c)
    }

    pub fn atan(&self) -> Self {
        let x = self.value;
        let q = 1.0 / (1.0 + x * x);
        self.chain(x.atan(), q, -2.0 * x * q * q)
    }

    /// `atan2(self, x)`, the angle of the point `(x, self)`.
    pub fn atan2(&self, x: &Self) -> Result<Self> {
        self.check_dim(x)?;
        let (yv, xv) = (self.value, x.value);
        let r2 = xv * xv + yv * yv;
        if r2 == 0.0 {
            return Err(domain("atan2", 0.0));
        }
        let r4 = r2 * r2;
        Ok(Self::chain2(
            self,
            x,
            yv.atan2(xv),
            xv / r2,
            -yv / r2,
            -2.0 * xv * yv / r4,
            (yv * yv - xv * xv) / r4,
            2.0 * xv * yv / r4,
        ))
    }

    pub fn powi(&self, k: i32) -> Result<Self> {
        let x = self.value;
        if k < 0 && x == 0.0 {
            return Err(domain("pow_int", x));
        }
        let kf = f64::from(k);
        let f0 = x.powi(k);
        let f1 = if k == 0 { 0.0 } else { kf * x.powi(k - 1) };
        let f2 = if k == 0 || k == 1 {
            0.0
        } else {
            kf * (kf - 1.0) * x.powi(k - 2)
        };
        Ok(self.chain(f0, f1, f2))
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
            && self.gradient.iter().all(|v| v.is_finite())
            && self.hessian.iter().all(|v| v.is_finite())
    }
}

fn domain(op: &'static str, operand: f64) -> Error {
    Error::Domain {
        op,
        operand,
        point: None,
    }
}

impl Add for &Jet2 {
    type Output = Jet2;
    fn add(self, rhs: &Jet2) -> Jet2 {
        self.try_add(rhs).expect("jet dimension mismatch")
    }
}

impl Sub for &Jet2 {
    type Output = Jet2;
    fn sub(self, rhs: &Jet2) -> Jet2 {
        self.try_sub(rhs).expect("jet dimension mismatch")
    }
}

impl Mul for &Jet2 {
    type Output = Jet2;
    fn mul(self, rhs: &Jet2) -> Jet2 {
        self.try_mul(rhs).expect("jet dimension mismatch")
    }
}

impl Neg for &Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        self.scale(-1.0)
    }
}

/// Numeric carrier for field evaluation: plain values or jets.
pub trait FieldScalar: Clone {
    fn constant(dim: usize, c: f64) -> Self;
    fn coordinate(point: &[f64], i: usize) -> Self;
    fn value(&self) -> f64;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn div(&self, o: &Self) -> Result<Self>;
    fn exp(&self) -> Self;
    fn ln(&self) -> Result<Self>;
    fn sqrt(&self) -> Result<Self>;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn atan(&self) -> Self;
    fn atan2(&self, x: &Self) -> Result<Self>;
    fn powi(&self, k: i32) -> Result<Self>;
    fn finite(&self) -> bool;
}

impl FieldScalar for f64 {
    fn constant(_: usize, c: f64) -> Self {
        c
    }
    fn coordinate(point: &[f64], i: usize) -> Self {
        point[i]
    }
    fn value(&self) -> f64 {
        *self
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn div(&self, o: &Self) -> Result<Self> {
        if *o == 0.0 {
            return Err(domain("div", *o));
        }
        Ok(self / o)
    }
    fn exp(&self) -> Self {
        f64::exp(*self)
    }
    fn ln(&self) -> Result<Self> {
        if *self <= 0.0 {
            return Err(domain("ln", *self));
        }
        Ok(f64::ln(*self))
    }
    fn sqrt(&self) -> Result<Self> {
        if *self <= 0.0 {
            return Err(domain("sqrt", *self));
        }
        Ok(f64::sqrt(*self))
    }
    fn sin(&self) -> Self {
        f64::sin(*self)
    }
    fn cos(&self) -> Self {
        f64::cos(*self)
    }
    fn atan(&self) -> Self {
        f64::atan(*self)
    }
    fn atan2(&self, x: &Self) -> Result<Self> {
        if *self == 0.0 && *x == 0.0 {
            return Err(domain("atan2", 0.0));
        }
        Ok(f64::atan2(*self, *x))
    }
    fn powi(&self, k: i32) -> Result<Self> {
        if k < 0 && *self == 0.0 {
            return Err(domain("pow_int", 0.0));
        }
        Ok(f64::powi(*self, k))
    }
    fn finite(&self) -> bool {
        self.is_finite()
    }
}

impl FieldScalar for Jet2 {
    fn constant(dim: usize, c: f64) -> Self {
        Jet2::constant(dim, c)
    }
    fn coordinate(point: &[f64], i: usize) -> Self {
        Jet2::variable(point, i)
    }
    fn value(&self) -> f64 {
        self.value
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn div(&self, o: &Self) -> Result<Self> {
        self.checked_div(o)
    }
    fn exp(&self) -> Self {
        Jet2::exp(self)
    }
    fn ln(&self) -> Result<Self> {
        Jet2::ln(self)
    }
    fn sqrt(&self) -> Result<Self> {
        Jet2::sqrt(self)
    }
    fn sin(&self) -> Self {
        Jet2::sin(self)
    }
    fn cos(&self) -> Self {
        Jet2::cos(self)
    }
    fn atan(&self) -> Self {
        Jet2::atan(self)
    }
    fn atan2(&self, x: &Self) -> Result<Self> {
        Jet2::atan2(self, x)
    }
    fn powi(&self, k: i32) -> Result<Self> {
        Jet2::powi(self, k)
    }
    fn finite(&self) -> bool {
        self.is_finite()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn seed_one_dimensional() {
        let jets = seed(&[3.0]);
        assert_eq!(jets[0].value, 3.0);
        assert_eq!(jets[0].gradient, vec![1.0]);
        assert_eq!(jets[0].hessian, vec![0.0]);
    }

    #[test]
    fn seed_second_coordinate() {
        let jets = seed(&[1.0, 2.0]);
        assert_eq!(jets[1].value, 2.0);
        assert_eq!(jets[1].gradient, vec![0.0, 1.0]);
        assert!(jets[1].hessian.iter().all(|h| *h == 0.0));
    }

    #[test]
    fn square_via_product() {
        let t = &seed(&[3.0])[0];
        let sq = t * t;
        assert_eq!(sq.value, 9.0);
        assert_eq!(sq.gradient, vec![6.0]);
        assert_eq!(sq.hessian, vec![2.0]);
    }

    #[test]
    fn exp_at_zero() {
        let e = seed(&[0.0])[0].exp();
        assert_eq!((e.value, e.gradient[0], e.hessian[0]), (1.0, 1.0, 1.0));
    }

    #[test]
    fn ln_of_non_positive_is_domain_error() {
        let x = &seed(&[0.0])[0];
        assert!(matches!(x.ln(), Err(Error::Domain { op: "ln", .. })));
        assert!(matches!((-x).sqrt(), Err(Error::Domain { op: "sqrt", .. })));
        let one = Jet2::constant(1, 1.0);
        assert!(matches!(
            one.checked_div(x),
            Err(Error::Domain { op: "div", .. })
        ));
    }

    #[test]
    fn mismatched_dimensions_rejected() {
        let a = Jet2::constant(2, 1.0);
        let b = Jet2::constant(3, 1.0);
        assert_eq!(
            a.try_mul(&b),
            Err(Error::Dimension {
                expected: 2,
                got: 3
            })
        );
    }

    #[test]
    fn atan2_matches_atan_in_right_half_plane() {
        let p = [0.7, 1.9];
        let v = seed(&p);
        let a = v[1].atan2(&v[0]).unwrap();
        let b = v[1].checked_div(&v[0]).unwrap().atan();
        assert!((a.value - b.value).abs() < 1e-15);
        for (x, y) in a.gradient.iter().zip(&b.gradient) {
            assert!((x - y).abs() < 1e-14);
        }
        for (x, y) in a.hessian.iter().zip(&b.hessian) {
            assert!((x - y).abs() < 1e-13);
        }
    }

    fn jet_strategy(d: usize) -> impl Strategy<Value = Jet2> {
        (
            -3.0..3.0f64,
            prop::collection::vec(-3.0..3.0f64, d),
            prop::collection::vec(-3.0..3.0f64, d * d),
        )
            .prop_map(move |(value, gradient, raw)| {
                let mut hessian = vec![0.0; d * d];
                for i in 0..d {
                    for j in 0..d {
                        hessian[i * d + j] = 0.5 * (raw[i * d + j] + raw[j * d + i]);
                    }
                }
                Jet2 {
                    value,
                    gradient,
                    hessian,
                }
            })
    }

    proptest! {
        // Taylor coefficients of a product: (a0 + a1 + a2)(b0 + b1 + b2)
        // truncated at second order.
        #[test]
        fn product_matches_truncated_taylor(a in jet_strategy(3), b in jet_strategy(3)) {
            let p = &a * &b;
            prop_assert!((p.value - a.value * b.value).abs() <= 1e-12);
            for i in 0..3 {
                let g = a.value * b.gradient[i] + b.value * a.gradient[i];
                prop_assert!((p.gradient[i] - g).abs() <= 1e-12);
                for j in 0..3 {
                    let h = a.value * b.dd(i, j) + b.value * a.dd(i, j)
                        + a.gradient[i] * b.gradient[j] + a.gradient[j] * b.gradient[i];
                    prop_assert!((p.dd(i, j) - h).abs() <= 1e-12);
                }
            }
        }

        #[test]
        fn hessian_stays_exactly_symmetric(a in jet_strategy(4), b in jet_strategy(4)) {
            let c = a.checked_div(&b.exp()).unwrap().sin().atan2(&(&a * &b)).unwrap();
            for i in 0..4 {
                for j in 0..4 {
                    prop_assert_eq!(c.dd(i, j), c.dd(j, i));
                }
            }
        }
    }
}
