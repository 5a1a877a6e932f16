//! Extended-precision scalars for determinants whose size sits far below double resolution.
//!
//! Inputs are doubles taken as exact binary values; every later operation is
//! rounded to [`PRECISION_BITS`].

use std::ops::{Add, Mul, Neg, Sub};

use dashu_float::FBig;
use num_complex::Complex64;

use crate::linalg::LogDet;

/// Working precision in bits.
pub const PRECISION_BITS: usize = 448;

pub type Hp = FBig;

/// Exact value of a double, carried at the working precision.
pub fn hp(x: f64) -> Hp {
    FBig::try_from(x).expect("finite value").with_precision(PRECISION_BITS).value()
}

pub fn zero() -> Hp {
    hp(0.0)
}

fn is_zero(x: &Hp) -> bool {
    x.repr().is_zero()
}

fn abs(x: &Hp) -> Hp {
    if *x < zero() {
        -x.clone()
    } else {
        x.clone()
    }
}

/// `log|x|`, or −∞ for zero.
fn log_abs(x: &Hp) -> f64 {
    if is_zero(x) {
        return f64::NEG_INFINITY;
    }
    abs(x).ln().to_f64().value()
}

#[derive(Debug, Clone, PartialEq)]
pub struct HpComplex {
    pub re: Hp,
    pub im: Hp,
}

impl HpComplex {
    pub fn new(re: Hp, im: Hp) -> Self {
        Self { re, im }
    }

    pub fn real(re: Hp) -> Self {
        Self { re, im: zero() }
    }

    pub fn from_c64(z: Complex64) -> Self {
        Self { re: hp(z.re), im: hp(z.im) }
    }

    /// `z/|z|` for a double near the unit circle, exactly unimodular at the working precision.
    pub fn unit(z: Complex64) -> Self {
        let w = Self::from_c64(z);
        let r = w.norm_sqr().nth_root(2);
        Self { re: &w.re / &r, im: &w.im / &r }
    }

    pub fn norm_sqr(&self) -> Hp {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn conj(&self) -> Self {
        Self { re: self.re.clone(), im: -self.im.clone() }
    }

    /// `i·z`.
    pub fn times_i(&self) -> Self {
        Self { re: -self.im.clone(), im: self.re.clone() }
    }

    pub fn div(&self, other: &Self) -> Self {
        let d = other.norm_sqr();
        let n = self * &other.conj();
        Self { re: &n.re / &d, im: &n.im / &d }
    }

    pub fn scale(&self, s: &Hp) -> Self {
        Self { re: &self.re * s, im: &self.im * s }
    }

    pub fn powi(&self, k: i64) -> Self {
        let base = if k < 0 { Self::real(hp(1.0)).div(self) } else { self.clone() };
        let mut out = Self::real(hp(1.0));
        for _ in 0..k.unsigned_abs() {
            out = &out * &base;
        }
        out
    }

    pub fn to_c64(&self) -> Complex64 {
        Complex64::new(self.re.to_f64().value(), self.im.to_f64().value())
    }

    fn is_zero(&self) -> bool {
        is_zero(&self.re) && is_zero(&self.im)
    }
}

impl Add for &HpComplex {
    type Output = HpComplex;
    fn add(self, o: &HpComplex) -> HpComplex {
        HpComplex { re: &self.re + &o.re, im: &self.im + &o.im }
    }
}

impl Sub for &HpComplex {
    type Output = HpComplex;
    fn sub(self, o: &HpComplex) -> HpComplex {
        HpComplex { re: &self.re - &o.re, im: &self.im - &o.im }
    }
}

impl Mul for &HpComplex {
    type Output = HpComplex;
    fn mul(self, o: &HpComplex) -> HpComplex {
        HpComplex { re: &self.re * &o.re - &self.im * &o.im, im: &self.re * &o.im + &self.im * &o.re }
    }
}

impl Neg for &HpComplex {
    type Output = HpComplex;
    fn neg(self) -> HpComplex {
        HpComplex { re: -self.re.clone(), im: -self.im.clone() }
    }
}

/// Real determinant by elimination with partial pivoting.
pub fn det_real(mut m: Vec<Vec<Hp>>) -> LogDet {
    let n = m.len();
    let mut sign = 1.0;
    let mut log = 0.0;
    for k in 0..n {
        let p = (k..n).max_by(|&a, &b| abs(&m[a][k]).partial_cmp(&abs(&m[b][k])).unwrap()).unwrap();
        if is_zero(&m[p][k]) {
            return LogDet::zero();
        }
        if p != k {
            m.swap(p, k);
            sign = -sign;
        }
        let pivot = m[k][k].clone();
        if pivot < zero() {
            sign = -sign;
        }
        log += log_abs(&pivot);
        for i in k + 1..n {
            let f = &m[i][k] / &pivot;
            for j in k + 1..n {
                let v = &m[i][j] - &f * &m[k][j];
                m[i][j] = v;
            }
        }
    }
    LogDet { phase: Complex64::new(sign, 0.0), log_abs: log }
}

/// Complex determinant by elimination with partial pivoting.
pub fn det_complex(mut m: Vec<Vec<HpComplex>>) -> LogDet {
    let n = m.len();
    let mut phase = Complex64::new(1.0, 0.0);
    let mut log = 0.0;
    for k in 0..n {
        let p = (k..n)
            .max_by(|&a, &b| m[a][k].norm_sqr().partial_cmp(&m[b][k].norm_sqr()).unwrap())
            .unwrap();
        if m[p][k].is_zero() {
            return LogDet::zero();
        }
        if p != k {
            m.swap(p, k);
            phase = -phase;
        }
        let pivot = m[k][k].clone();
        let r2 = pivot.norm_sqr();
        let lr = log_abs(&r2) / 2.0;
        log += lr;
        // unit phase of the pivot, accurate in double
        let r = r2.nth_root(2);
        let u = Complex64::new((&pivot.re / &r).to_f64().value(), (&pivot.im / &r).to_f64().value());
        phase *= u / u.norm();
        for i in k + 1..n {
            let f = m[i][k].div(&pivot);
            for j in k + 1..n {
                let v = &m[i][j] - &(&f * &m[k][j]);
                m[i][j] = v;
            }
        }
    }
    LogDet { phase, log_abs: log }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use nalgebra::DMatrix;

    #[test]
    fn real_det_matches_double_on_easy_matrices() {
        let m = DMatrix::from_row_slice(3, 3, &[2.0, -1.0, 0.5, 1.0, 3.0, -2.0, 0.25, 1.0, 4.0]);
        let d = m.clone().lu().determinant();
        let rows = (0..3).map(|i| (0..3).map(|j| hp(m[(i, j)])).collect()).collect();
        let ld = det_real(rows);
        assert_abs_diff_eq!(ld.value().re, d, epsilon = 1e-12);
    }

    #[test]
    fn resolves_cancellation_below_double_precision() {
        // det [[1, 1], [1, 1 + 2^-80]] = 2^-80 exactly
        let tiny = 2f64.powi(-80);
        let rows = vec![vec![hp(1.0), hp(1.0)], vec![hp(1.0), hp(1.0) + hp(tiny)]];
        let ld = det_real(rows);
        assert_eq!(ld.phase.re, 1.0);
        assert_abs_diff_eq!(ld.log_abs, tiny.ln(), epsilon = 1e-12);
    }

    #[test]
    fn complex_det_and_unit_points() {
        let i = Complex64::i();
        let a = [Complex64::new(1.0, 2.0), i, Complex64::new(-0.5, 0.3), Complex64::new(2.0, -1.0)];
        let d = a[0] * a[3] - a[1] * a[2];
        let rows = vec![
            vec![HpComplex::from_c64(a[0]), HpComplex::from_c64(a[1])],
            vec![HpComplex::from_c64(a[2]), HpComplex::from_c64(a[3])],
        ];
        assert!((det_complex(rows).value() - d).norm() < 1e-13);
        let u = HpComplex::unit(Complex64::from_polar(1.0, 0.7));
        let err = (u.norm_sqr() - hp(1.0)).to_f64().value();
        assert!(err.abs() < 1e-120);
        let w = u.powi(-3);
        assert!((w.to_c64() - Complex64::from_polar(1.0, -2.1)).norm() < 1e-14);
    }
}
