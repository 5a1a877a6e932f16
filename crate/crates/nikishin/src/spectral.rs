//! Jacobi and Verblunsky coefficients, stripping, and the Aleksandrov flip.
//!
//! Jacobi coefficients are indexed from 1: `a[0]` holds a₁ and `b[0]` holds b₁,
//! with `x p_n = a_{n+1} p_{n+1} + b_{n+1} p_n + a_n p_{n−1}` for orthonormal p.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::measure::{CircleMeasure, RealMeasure, DEFAULT_CLEARANCE};

/// Deepest recurrence extracted from raw moments.
pub const MAX_MOMENT_DEPTH: usize = 12;
/// Size of the stripped truncation used for m-function evaluation.
pub const STRIPPED_SIZE: usize = 60;

#[derive(Debug, Clone, PartialEq)]
pub struct JacobiCoeffs {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl JacobiCoeffs {
    pub fn count(&self) -> usize {
        self.b.len()
    }

    /// Tridiagonal truncation of size `count`.
    pub fn matrix(&self) -> DMatrix<f64> {
        let n = self.count();
        DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                self.b[i]
            } else if i + 1 == j {
                self.a[i]
            } else if j + 1 == i {
                self.a[j]
            } else {
                0.0
            }
        })
    }

    /// Gauss rule of the truncation: eigenvalues and squared first components.
    pub fn gauss_rule(&self) -> (Vec<f64>, Vec<f64>) {
        let eig = SymmetricEigen::new(self.matrix());
        let mut pairs: Vec<(f64, f64)> = (0..self.count())
            .map(|i| (eig.eigenvalues[i], eig.eigenvectors[(0, i)].powi(2)))
            .collect();
        pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
        pairs.into_iter().unzip()
    }
}

/// Chebyshev algorithm on raw moments; returns N pairs (needs moments 0..=2N).
pub fn jacobi_from_moments(moments: &[f64], n: usize) -> Result<JacobiCoeffs> {
    if n == 0 {
        return Err(Error::TooShort);
    }
    if moments.len() < 2 * n + 1 {
        return Err(Error::OrderExceeded {
            requested: 2 * n as i64,
            available: moments.len() as i64 - 1,
        });
    }
    if moments[0] <= 0.0 {
        return Err(Error::LossOfPositivity(0));
    }
    let len = 2 * n + 1;
    let mut alpha = vec![0.0; n + 1];
    let mut beta = vec![0.0; n + 1];
    let mut prev = vec![0.0; len];
    let mut cur: Vec<f64> = moments[..len].to_vec();
    alpha[0] = moments[1] / moments[0];
    beta[0] = moments[0];
    for k in 1..=n {
        let mut next = vec![0.0; len];
        for l in k..(len - k) {
            next[l] = cur[l + 1] - alpha[k - 1] * cur[l] - beta[k - 1] * prev[l];
        }
        if !(next[k] > 0.0) {
            return Err(Error::LossOfPositivity(k));
        }
        beta[k] = next[k] / cur[k - 1];
        if k < n {
            alpha[k] = next[k + 1] / next[k] - cur[k] / cur[k - 1];
        }
        prev = cur;
        cur = next;
    }
    Ok(JacobiCoeffs {
        a: beta[1..=n].iter().map(|b| b.sqrt()).collect(),
        b: alpha[..n].to_vec(),
    })
}

/// Lanczos with full reorthogonalization on a discrete positive measure.
pub fn jacobi_from_quadrature(nodes: &[f64], weights: &[f64], n: usize) -> Result<JacobiCoeffs> {
    let m = nodes.len();
    if n == 0 || n >= m || weights.len() != m {
        return Err(Error::TooShort);
    }
    if weights.iter().any(|&w| w <= 0.0) {
        return Err(Error::LossOfPositivity(0));
    }
    let norm0 = weights.iter().sum::<f64>().sqrt();
    let mut basis: Vec<Vec<f64>> = vec![weights.iter().map(|w| w.sqrt() / norm0).collect()];
    let mut a = Vec::with_capacity(n);
    let mut b = Vec::with_capacity(n);
    for k in 0..n {
        let q = &basis[k];
        let mut v: Vec<f64> = q.iter().zip(nodes).map(|(qi, x)| qi * x).collect();
        b.push(dot(&v, q));
        for _ in 0..2 {
            for p in &basis {
                let c = dot(&v, p);
                v.iter_mut().zip(p).for_each(|(vi, pi)| *vi -= c * pi);
            }
        }
        let norm = dot(&v, &v).sqrt();
        if !(norm > 0.0) {
            return Err(Error::LossOfPositivity(k + 1));
        }
        a.push(norm);
        basis.push(v.into_iter().map(|x| x / norm).collect());
    }
    Ok(JacobiCoeffs { a, b })
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// Drops (a₁, b₁).
pub fn strip_jacobi(coeffs: &JacobiCoeffs) -> Result<JacobiCoeffs> {
    if coeffs.count() < 2 {
        return Err(Error::TooShort);
    }
    Ok(JacobiCoeffs { a: coeffs.a[1..].to_vec(), b: coeffs.b[1..].to_vec() })
}

/// Normalized moments `c_k = (J^k)₀₀` for k = 0..=K.
pub fn moments_from_jacobi(coeffs: &JacobiCoeffs, order: usize) -> Result<Vec<f64>> {
    let size = coeffs.count();
    if size < order / 2 + 1 {
        return Err(Error::TruncationTooSmall { size, order });
    }
    let j = coeffs.matrix();
    let mut v = nalgebra::DVector::zeros(size);
    v[0] = 1.0;
    let mut out = Vec::with_capacity(order + 1);
    for _ in 0..=order {
        out.push(v[0]);
        v = &j * v;
    }
    Ok(out)
}

/// First recurrence pair of |μ| plus the stripped truncation.
#[derive(Debug, Clone)]
pub struct Stripped {
    /// Signed total mass of μ.
    pub mass: f64,
    pub b1: f64,
    pub a1_squared: f64,
    pub rest: JacobiCoeffs,
}

impl Stripped {
    pub fn of(mu: &RealMeasure, size: usize) -> Result<Self> {
        let weights: Vec<f64> = mu.masses().iter().map(|m| m.abs()).collect();
        let n = (size + 1).min(mu.nodes().len() - 1);
        let full = jacobi_from_quadrature(mu.nodes(), &weights, n)?;
        Ok(Self { mass: mu.mass(), b1: full.b[0], a1_squared: full.a[0].powi(2), rest: strip_jacobi(&full)? })
    }

    /// m-function of the stripped probability measure.
    pub fn stripped_m(&self, z: Complex64, radius: f64) -> Complex64 {
        if z.norm() > 2.0 * radius {
            let order = 2 * (self.rest.count() - 1);
            let c = moments_from_jacobi(&self.rest, order).expect("size matches order");
            let w = 1.0 / z;
            let mut acc = Complex64::new(0.0, 0.0);
            for ck in c.iter().rev() {
                acc = acc * w + ck;
            }
            -acc * w
        } else {
            let (x, w) = self.rest.gauss_rule();
            x.iter().zip(&w).map(|(&x, &w)| w / (x - z)).sum()
        }
    }

    /// Right side of the stripping relation, `(b₁ − z − a₁² m₁(z))/c₀`.
    pub fn reciprocal_m(&self, z: Complex64, radius: f64) -> Complex64 {
        (self.b1 - z - self.a1_squared * self.stripped_m(z, radius)) / self.mass
    }
}

/// `|1/m_μ(z) − (b₁ − z − a₁² m_{μ⁽¹⁾}(z))/c₀|`.
pub fn stripping_residual(mu: &RealMeasure, z: Complex64) -> Result<f64> {
    if mu.support().distance(z) < DEFAULT_CLEARANCE {
        return Err(Error::TooCloseToSupport(format!("{z}")));
    }
    let s = Stripped::of(mu, STRIPPED_SIZE)?;
    let lhs = 1.0 / mu.m_function(0, z)?;
    Ok((lhs - s.reciprocal_m(z, mu.support().radius())).norm())
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerblunskyCoeffs {
    pub alpha: Vec<Complex64>,
}

impl VerblunskyCoeffs {
    pub fn count(&self) -> usize {
        self.alpha.len()
    }
}

fn poly_reversed_conj(p: &[Complex64]) -> Vec<Complex64> {
    p.iter().rev().map(|c| c.conj()).collect()
}

/// Szegő recursion through moment inner products; needs `c₀..c_N`.
///
/// Uses `Φ_{n+1} = zΦ_n − conj(α_n)Φ_n*`, so `α_n = −conj(Φ_{n+1}(0))`.
pub fn verblunsky_from_moments(moments: &[Complex64], n: usize) -> Result<VerblunskyCoeffs> {
    Ok(szego(moments, n)?.0)
}

/// Verblunsky coefficients together with the monic polynomials Φ₀..Φ_N.
pub fn szego(moments: &[Complex64], n: usize) -> Result<(VerblunskyCoeffs, Vec<Vec<Complex64>>)> {
    if moments.len() < n + 1 {
        return Err(Error::OrderExceeded { requested: n as i64, available: moments.len() as i64 - 1 });
    }
    let c0 = moments[0];
    let c: Vec<Complex64> = moments.iter().map(|m| m / c0).collect();
    let mut phi = vec![Complex64::new(1.0, 0.0)];
    let mut polys = vec![phi.clone()];
    let mut alpha = Vec::with_capacity(n);
    for k in 0..n {
        let star = poly_reversed_conj(&phi);
        let num: Complex64 = phi.iter().enumerate().map(|(i, p)| p * c[i + 1]).sum();
        let den: Complex64 = star.iter().enumerate().map(|(i, p)| p * c[i]).sum();
        let a_conj = num / den;
        let a = a_conj.conj();
        if a.norm() >= 1.0 || !a.norm().is_finite() {
            return Err(Error::ModulusViolation { index: k, modulus: a.norm() });
        }
        let mut next = vec![Complex64::new(0.0, 0.0); phi.len() + 1];
        for (i, p) in phi.iter().enumerate() {
            next[i + 1] += p;
        }
        for (i, s) in star.iter().enumerate() {
            next[i] -= a_conj * s;
        }
        alpha.push(a);
        phi = next;
        polys.push(phi.clone());
    }
    Ok((VerblunskyCoeffs { alpha }, polys))
}

pub fn aleksandrov_flip(coeffs: &VerblunskyCoeffs) -> VerblunskyCoeffs {
    VerblunskyCoeffs { alpha: coeffs.alpha.iter().map(|a| -a).collect() }
}

/// Truncated CMV matrix `L·M` with `Θ_k = [[conj α_k, ρ_k], [ρ_k, −α_k]]`.
pub fn cmv_matrix(alpha: &[Complex64], size: usize) -> DMatrix<Complex64> {
    let at = |k: usize| alpha.get(k).copied().unwrap_or_default();
    let theta_into = |m: &mut DMatrix<Complex64>, k: usize| {
        let a = at(k);
        let rho = Complex64::new((1.0 - a.norm_sqr()).sqrt(), 0.0);
        m[(k, k)] = a.conj();
        if k + 1 < size {
            m[(k, k + 1)] = rho;
            m[(k + 1, k)] = rho;
            m[(k + 1, k + 1)] = -a;
        }
    };
    let mut l = DMatrix::zeros(size, size);
    let mut m = DMatrix::zeros(size, size);
    m[(0, 0)] = Complex64::new(1.0, 0.0);
    for k in (0..size).step_by(2) {
        theta_into(&mut l, k);
    }
    for k in (1..size).step_by(2) {
        theta_into(&mut m, k);
    }
    l * m
}

/// Normalized moments `c₀..c_K` of the measure with the given coefficients.
pub fn moments_from_verblunsky(coeffs: &VerblunskyCoeffs, order: usize) -> Result<Vec<Complex64>> {
    if coeffs.count() < order {
        return Err(Error::TruncationTooSmall { size: coeffs.count(), order });
    }
    let size = order + 2;
    let c = cmv_matrix(&coeffs.alpha, size);
    let mut v = nalgebra::DVector::zeros(size);
    v[0] = Complex64::new(1.0, 0.0);
    let mut out = Vec::with_capacity(order + 1);
    for _ in 0..=order {
        out.push(v[0]);
        v = &c * v;
    }
    Ok(out)
}

/// Taylor coefficients of `F` from normalized moments: `1, 2c₋₁, 2c₋₂, …`.
pub fn caratheodory_series(moments: &[Complex64]) -> Vec<Complex64> {
    let c0 = moments[0];
    moments
        .iter()
        .enumerate()
        .map(|(k, c)| if k == 0 { Complex64::new(1.0, 0.0) } else { 2.0 * (c / c0).conj() })
        .collect()
}

/// Deviation of `F_μ · F_{flip μ}` from the constant series 1 through `order`.
pub fn reciprocal_f_check(mu: &CircleMeasure, order: usize) -> Result<f64> {
    let moments: Vec<Complex64> = (0..=order as i64).map(|k| mu.moment(k)).collect::<Result<_>>()?;
    let coeffs = verblunsky_from_moments(&moments, order)?;
    let flipped = moments_from_verblunsky(&aleksandrov_flip(&coeffs), order)?;
    let f = caratheodory_series(&moments);
    let g = caratheodory_series(&flipped);
    let mut worst = 0.0f64;
    for k in 0..=order {
        let s: Complex64 = (0..=k).map(|i| f[i] * g[k - i]).sum();
        let target = if k == 0 { 1.0 } else { 0.0 };
        worst = worst.max((s - target).norm());
    }
    Ok(worst)
}
