//! Generalized Hankel/Toeplitz matrices, normality verdicts, type II multiple
//! orthogonal polynomials, and the perturbation check for two-measure systems.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::index::{MultiIndex, Parity};
use crate::linalg::{det_exact, exact_relative_difference, log_det, rational, LogDet, OrthoBasis};
use crate::measure::{sqrt_branch, BranchCut, RealMeasure};
use crate::system::{check_f_nonvanishing, CircleSystem, NikishinSystem, RealSystem, F_GRID};

/// Above this relative singular value an index is NORMAL.
pub const NORMAL_BAND: f64 = 1e-10;
/// Below this relative singular value an index is SINGULAR.
pub const SINGULAR_BAND: f64 = 1e-12;
/// Largest `|n|` handled in double precision.
pub const MAX_TOTAL: usize = 12;
/// Relative residual accepted for orthogonality and roots.
pub const RESIDUAL_TOL: f64 = 1e-8;

fn check_index(system_r: usize, n: &MultiIndex) -> Result<()> {
    if n.r() != system_r {
        return Err(Error::WrongArity { expected: system_r, got: n.r() });
    }
    if n.is_zero() {
        return Err(Error::ZeroIndex);
    }
    if n.total() > MAX_TOTAL {
        return Err(Error::OrderExceeded { requested: n.total() as i64, available: MAX_TOTAL as i64 });
    }
    Ok(())
}

/// Block rows `(c⁽ʲ⁾_p, …, c⁽ʲ⁾_{p+|n|−1})`, `p < n_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralizedHankel {
    pub blocks: Vec<DMatrix<f64>>,
    pub assembled: DMatrix<f64>,
}

pub fn hankel_matrix(system: &NikishinSystem, n: &MultiIndex) -> Result<GeneralizedHankel> {
    hankel_for_measures(system.as_real()?.mus(), n)
}

/// Same layout for an arbitrary ordered list of measures.
pub fn hankel_for_measures(mus: &[Arc<RealMeasure>], n: &MultiIndex) -> Result<GeneralizedHankel> {
    check_index(mus.len(), n)?;
    let total = n.total();
    let mut blocks = Vec::with_capacity(n.r());
    for (mu, &nj) in mus.iter().zip(n.parts()) {
        let mut b = DMatrix::zeros(nj, total);
        for p in 0..nj {
            for q in 0..total {
                b[(p, q)] = mu.moment(p + q)?;
            }
        }
        blocks.push(b);
    }
    Ok(GeneralizedHankel { assembled: stack(&blocks, total), blocks })
}

fn stack<T: nalgebra::Scalar + num_traits::Zero>(blocks: &[DMatrix<T>], cols: usize) -> DMatrix<T> {
    let rows = blocks.iter().map(|b| b.nrows()).sum();
    let mut m = DMatrix::zeros(rows, cols);
    let mut at = 0;
    for b in blocks {
        m.view_mut((at, 0), (b.nrows(), cols)).copy_from(b);
        at += b.nrows();
    }
    m
}

/// Doubled moment subscript of Toeplitz entry `(p, q)` in block `j`.
fn toeplitz_subscript(total: usize, nj: usize, p: usize, q: usize) -> i64 {
    nj as i64 - total as i64 - 2 * p as i64 + 2 * q as i64
}

/// Block rows of `c⁽ʲ⁾` starting at subscript `−|n|/2 + n_j/2`, shifting left by one per row.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralizedToeplitz {
    pub blocks: Vec<DMatrix<Complex64>>,
    pub assembled: DMatrix<Complex64>,
    /// Set when components mix parities and half-integer moments were used.
    pub mixed_parity: bool,
}

/// Mixed parity is refused unless `explore` is set, in which case half-integer
/// subscripts are read on the system's branch.
pub fn toeplitz_matrix(system: &NikishinSystem, n: &MultiIndex, explore: bool) -> Result<GeneralizedToeplitz> {
    let sys = system.as_circle()?;
    check_index(sys.r(), n)?;
    let mixed = n.parity() == Parity::Mixed;
    if mixed && !explore {
        return Err(Error::MixedParity(n.parts().to_vec()));
    }
    let total = n.total();
    let mut blocks = Vec::with_capacity(n.r());
    for (mu, &nj) in sys.mus().iter().zip(n.parts()) {
        let mut b = DMatrix::zeros(nj, total);
        for p in 0..nj {
            for q in 0..total {
                b[(p, q)] = mu.half_moment(toeplitz_subscript(total, nj, p, q))?;
            }
        }
        blocks.push(b);
    }
    Ok(GeneralizedToeplitz { assembled: stack(&blocks, total), blocks, mixed_parity: mixed })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Normal,
    Singular,
    Inconclusive,
}

impl Verdict {
    pub fn from_scaled(scaled_min: f64) -> Self {
        if scaled_min > NORMAL_BAND {
            Verdict::Normal
        } else if scaled_min < SINGULAR_BAND {
            Verdict::Singular
        } else {
            Verdict::Inconclusive
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Normal => "NORMAL",
            Verdict::Singular => "SINGULAR",
            Verdict::Inconclusive => "INCONCLUSIVE",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormalityVerdict {
    /// Determinant divided by the product of the moment matrix's row norms.
    pub det: Complex64,
    /// Unscaled determinant in log form.
    pub det_raw: LogDet,
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub scaled_min: f64,
    pub verdict: Verdict,
    /// Relative orthogonality residual of the solved polynomial, when NORMAL.
    pub residual: Option<f64>,
}

/// Moment matrix expressed in orthonormal bases, ready for SVD and solving.
///
/// Columns use polynomials orthonormal for `ρ = Σ_j |μ_j|/‖μ_j‖`, rows those of each `|μ_j|`.
/// Both changes are triangular with positive diagonal, so `det M = det B / ∏ leads`.
struct Reduced {
    b: DMatrix<Complex64>,
    /// Right-hand side column for the degree-`|n|` basis polynomial.
    rhs: Vec<Complex64>,
    col_basis: OrthoBasis,
    log_leads: f64,
}

impl Reduced {
    fn svd_verdict(&self, row_norms: f64) -> NormalityVerdict {
        let sv = self.b.clone().singular_values();
        let sigma_max = sv.max();
        let sigma_min = sv.min();
        let scaled_min = if sigma_max > 0.0 { sigma_min / sigma_max } else { 0.0 };
        let det_raw = log_det(&self.b).scaled(self.log_leads);
        let det = det_raw.scaled(row_norms).value();
        NormalityVerdict {
            det,
            det_raw,
            sigma_min,
            sigma_max,
            scaled_min,
            verdict: Verdict::from_scaled(scaled_min),
            residual: None,
        }
    }

    /// Monomial coefficients (increasing degree, length `|n|+1`, monic) of the solution.
    fn solve(&self) -> Result<Vec<Complex64>> {
        let total = self.b.nrows();
        let top = self.col_basis.leads[total];
        let rhs = DMatrix::from_iterator(total, 1, self.rhs.iter().map(|v| -v / top));
        let a = self.b.clone().svd(true, true).solve(&rhs, 0.0).map_err(|_| Error::SingularSystem)?;
        let mut coeffs = vec![Complex64::new(0.0, 0.0); total + 1];
        for (k, c) in self.col_basis.coeffs[total].iter().enumerate() {
            coeffs[k] += c / top;
        }
        for q in 0..total {
            for (k, c) in self.col_basis.coeffs[q].iter().enumerate() {
                coeffs[k] += a[q] * c;
            }
        }
        coeffs[total] = Complex64::new(1.0, 0.0);
        Ok(coeffs)
    }
}

/// Column basis orthonormal for the normalised sum of the `|μ_j|`.
fn reference_basis(parts: &[(&[Complex64], &[f64])], degree: usize) -> OrthoBasis {
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    for (z, m) in parts {
        let mass: f64 = m.iter().map(|x| x.abs()).sum();
        nodes.extend_from_slice(z);
        weights.extend(m.iter().map(|x| x.abs() / mass));
    }
    OrthoBasis::new(&nodes, &weights, degree)
}

fn reduce_rl(mus: &[Arc<RealMeasure>], n: &MultiIndex) -> Reduced {
    let total = n.total();
    let nodes: Vec<Vec<Complex64>> =
        mus.iter().map(|mu| mu.nodes().iter().map(|&x| Complex64::new(x, 0.0)).collect()).collect();
    let parts: Vec<(&[Complex64], &[f64])> =
        nodes.iter().zip(mus).map(|(z, mu)| (z.as_slice(), mu.masses())).collect();
    let col_basis = reference_basis(&parts, total + 1);
    let mut b = DMatrix::zeros(total, total);
    let mut rhs = vec![Complex64::new(0.0, 0.0); total];
    let mut log_leads = col_basis.leads[..total].iter().map(|l| l.ln()).sum::<f64>();
    let mut row = 0;
    for ((z, m), &nj) in parts.iter().zip(n.parts()) {
        let sign = if m.iter().sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
        let abs: Vec<f64> = m.iter().map(|x| x.abs()).collect();
        let rows = OrthoBasis::new(z, &abs, nj);
        log_leads += rows.log_lead_product();
        for p in 0..nj {
            let integrand = |q: usize| -> Complex64 {
                (0..z.len()).map(|i| rows.values[p][i] * col_basis.values[q][i] * abs[i] * sign).sum()
            };
            for q in 0..total {
                b[(row, q)] = integrand(q);
            }
            rhs[row] = integrand(total);
            row += 1;
        }
    }
    Reduced { b, rhs, col_basis, log_leads }
}

fn reduce_uc(sys: &CircleSystem, n: &MultiIndex) -> Reduced {
    let total = n.total();
    let branch = sys.branch();
    let parts: Vec<(&[Complex64], &[f64])> = sys.mus().iter().map(|mu| (mu.points(), mu.masses())).collect();
    let col_basis = reference_basis(&parts, total + 1);
    let mut b = DMatrix::zeros(total, total);
    let mut rhs = vec![Complex64::new(0.0, 0.0); total];
    let mut log_leads = col_basis.leads[..total].iter().map(|l| l.ln()).sum::<f64>();
    let mut row = 0;
    for ((mu, (z, m)), &nj) in sys.mus().iter().zip(&parts).zip(n.parts()) {
        let sign = if m.iter().sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
        let abs: Vec<f64> = m.iter().map(|x| x.abs()).collect();
        let rows = OrthoBasis::new(z, &abs, nj);
        log_leads += rows.log_lead_product();
        let shift: Vec<Complex64> =
            mu.angles().iter().map(|&t| branch.half_power(t, nj as i64 - total as i64)).collect();
        for p in 0..nj {
            let integrand = |q: usize| -> Complex64 {
                (0..z.len())
                    .map(|i| rows.values[p][i].conj() * col_basis.values[q][i] * shift[i] * abs[i] * sign)
                    .sum()
            };
            for q in 0..total {
                b[(row, q)] = integrand(q);
            }
            rhs[row] = integrand(total);
            row += 1;
        }
    }
    Reduced { b, rhs, col_basis, log_leads }
}

fn log_row_norms<T: nalgebra::ComplexField<RealField = f64>>(m: &DMatrix<T>) -> f64 {
    m.row_iter().map(|r| r.norm().ln()).sum()
}

/// Normality of a real-line index through an SVD of the basis-changed moment matrix.
pub fn normality_rl(system: &NikishinSystem, n: &MultiIndex) -> Result<NormalityVerdict> {
    normality_for_measures(system.as_real()?.mus(), n)
}

/// Normality for an arbitrary ordered list of real measures.
pub fn normality_for_measures(mus: &[Arc<RealMeasure>], n: &MultiIndex) -> Result<NormalityVerdict> {
    let h = hankel_for_measures(mus, n)?;
    let reduced = reduce_rl(mus, n);
    let mut v = reduced.svd_verdict(log_row_norms(&h.assembled));
    if v.verdict == Verdict::Normal {
        let coeffs: Vec<f64> = reduced.solve()?.iter().map(|c| c.re).collect();
        v.residual = Some(residual_rl(mus, n, &coeffs)?);
    }
    Ok(v)
}

/// φ-normality of a circle index; mixed parity only with `explore`.
pub fn normality_uc(system: &NikishinSystem, n: &MultiIndex, explore: bool) -> Result<NormalityVerdict> {
    let t = toeplitz_matrix(system, n, explore)?;
    let sys = system.as_circle()?;
    let reduced = reduce_uc(sys, n);
    let mut v = reduced.svd_verdict(log_row_norms(&t.assembled));
    if v.verdict == Verdict::Normal {
        let coeffs = reduced.solve()?;
        v.residual = Some(residual_uc(sys, n, &coeffs)?);
    }
    Ok(v)
}

pub fn normality(system: &NikishinSystem, n: &MultiIndex, explore: bool) -> Result<NormalityVerdict> {
    match system {
        NikishinSystem::Real(_) => normality_rl(system, n),
        NikishinSystem::Circle(_) => normality_uc(system, n, explore),
    }
}

/// `max_{j,p} |∫ P x^p dμ_j|` relative to `max_{j,p} Σ_k |a_k c⁽ʲ⁾_{p+k}|`.
fn residual_rl(mus: &[Arc<RealMeasure>], n: &MultiIndex, coeffs: &[f64]) -> Result<f64> {
    let (mut worst, mut scale) = (0.0f64, 0.0f64);
    for (mu, &nj) in mus.iter().zip(n.parts()) {
        for p in 0..nj {
            let (mut s, mut a) = (0.0, 0.0);
            for (k, c) in coeffs.iter().enumerate() {
                let m = mu.moment(p + k)?;
                s += c * m;
                a += (c * m).abs();
            }
            worst = worst.max(s.abs());
            scale = scale.max(a);
        }
    }
    Ok(worst / scale)
}

/// Same for `∫ φ z^{−k} dμ_j` over `k = −n_j/2, …, n_j/2 − 1`.
fn residual_uc(sys: &CircleSystem, n: &MultiIndex, coeffs: &[Complex64]) -> Result<f64> {
    let total = n.total() as i64;
    let (mut worst, mut scale) = (0.0f64, 0.0f64);
    for (mu, &nj) in sys.mus().iter().zip(n.parts()) {
        let nj = nj as i64;
        for p in 0..nj {
            let doubled_k = 2 * p - nj;
            let mut s = Complex64::new(0.0, 0.0);
            let mut a = 0.0;
            for (q, c) in coeffs.iter().enumerate() {
                let m = mu.half_moment(2 * q as i64 - total - doubled_k)?;
                s += c * m;
                a += (c * m).norm();
            }
            worst = worst.max(s.norm());
            scale = scale.max(a);
        }
    }
    Ok(worst / scale)
}

/// Monic type II polynomial on the line, coefficients by increasing degree.
#[derive(Debug, Clone, PartialEq)]
pub struct TypeIIPolyRL {
    pub coeffs: Vec<f64>,
    pub residual: f64,
}

impl TypeIIPolyRL {
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, x: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * x + c)
    }
}

pub fn type2_poly_rl(system: &NikishinSystem, n: &MultiIndex) -> Result<TypeIIPolyRL> {
    hankel_matrix(system, n)?;
    let mus = system.as_real()?.mus();
    let reduced = reduce_rl(mus, n);
    if reduced.svd_verdict(0.0).verdict == Verdict::Singular {
        return Err(Error::SingularSystem);
    }
    let coeffs: Vec<f64> = reduced.solve()?.iter().map(|c| c.re).collect();
    let residual = residual_rl(mus, n, &coeffs)?;
    Ok(TypeIIPolyRL { coeffs, residual })
}

/// `φ(z) = Σ κ z^{h/2}` over doubled exponents `h = −|n|, −|n|+2, …, |n|`.
#[derive(Debug, Clone, PartialEq)]
pub struct LaurentPolyUC {
    pub half_offsets: Vec<i64>,
    pub coeffs: Vec<Complex64>,
    pub branch: BranchCut,
    pub residual: f64,
}

impl LaurentPolyUC {
    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        let odd = self.half_offsets[0].rem_euclid(2) == 1;
        let root = if odd { sqrt_branch(z, self.branch)? } else { Complex64::new(1.0, 0.0) };
        let mut s = Complex64::new(0.0, 0.0);
        for (&h, c) in self.half_offsets.iter().zip(&self.coeffs) {
            let k = if odd { (h - 1) / 2 } else { h / 2 };
            s += c * z.powi(k as i32) * root;
        }
        Ok(s)
    }

    /// Coefficients of `z^{|n|/2} φ(z)` as an ordinary polynomial.
    pub fn polynomial(&self) -> Vec<Complex64> {
        self.coeffs.clone()
    }
}

pub fn laurent_poly_uc(system: &NikishinSystem, n: &MultiIndex) -> Result<LaurentPolyUC> {
    toeplitz_matrix(system, n, false)?;
    let sys = system.as_circle()?;
    let reduced = reduce_uc(sys, n);
    if reduced.svd_verdict(0.0).verdict == Verdict::Singular {
        return Err(Error::SingularSystem);
    }
    let coeffs = reduced.solve()?;
    let residual = residual_uc(sys, n, &coeffs)?;
    let total = n.total() as i64;
    Ok(LaurentPolyUC {
        half_offsets: (0..=total).map(|q| 2 * q - total).collect(),
        coeffs,
        branch: sys.branch(),
        residual,
    })
}

/// Roots of a monic-by-construction polynomial (increasing-degree coefficients),
/// from companion eigenvalues polished by Newton steps, sorted by (re, im).
pub fn polynomial_roots(coeffs: &[Complex64]) -> Vec<Complex64> {
    let deg = coeffs.iter().rposition(|c| c.norm() > 0.0).unwrap_or(0);
    if deg == 0 {
        return Vec::new();
    }
    let lead = coeffs[deg];
    let mut comp = DMatrix::<Complex64>::zeros(deg, deg);
    for i in 1..deg {
        comp[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    for i in 0..deg {
        comp[(i, deg - 1)] = -coeffs[i] / lead;
    }
    let mut roots: Vec<Complex64> = comp.schur().eigenvalues().map(|v| v.iter().copied().collect()).unwrap_or_default();
    let eval = |x: Complex64| -> (Complex64, Complex64) {
        coeffs[..=deg].iter().rev().fold((Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)), |(p, d), &c| {
            (p * x + c, d * x + p)
        })
    };
    for r in roots.iter_mut() {
        for _ in 0..3 {
            let (p, d) = eval(*r);
            if d.norm() == 0.0 {
                break;
            }
            let step = p / d;
            let next = *r - step;
            if eval(next).0.norm() < p.norm() {
                *r = next;
            } else {
                break;
            }
        }
    }
    roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    roots
}

/// `|p(root)| / Σ |c_k| |root|^k`.
pub fn root_residual(coeffs: &[Complex64], root: Complex64) -> f64 {
    let p = coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * root + c);
    let scale: f64 = coeffs.iter().enumerate().map(|(k, c)| c.norm() * root.norm().powi(k as i32)).sum();
    p.norm() / scale
}

pub enum Polynomial<'a> {
    Real(&'a TypeIIPolyRL),
    Laurent(&'a LaurentPolyUC),
}

pub fn zeros(poly: Polynomial<'_>) -> Vec<Complex64> {
    match poly {
        Polynomial::Real(p) => {
            polynomial_roots(&p.coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect::<Vec<_>>())
        }
        Polynomial::Laurent(p) => polynomial_roots(&p.polynomial()),
    }
}

/// `c̃_m = c⁽¹⁾_m + Σ_j k_j c⁽²⁾_{m+j}` for `m < count`.
pub fn perturb_moments(mu1: &[f64], mu2: &[f64], kcoeffs: &[f64], count: usize) -> Result<Vec<f64>> {
    let need = count + kcoeffs.len().saturating_sub(1);
    if mu1.len() < count || mu2.len() < need {
        return Err(Error::OrderExceeded { requested: need as i64, available: mu2.len().min(mu1.len()) as i64 });
    }
    Ok((0..count).map(|m| mu1[m] + kcoeffs.iter().enumerate().map(|(j, k)| k * mu2[m + j]).sum::<f64>()).collect())
}

/// Exact counterpart of [`perturb_moments`], treating every double as its binary value.
pub fn perturb_moments_exact(mu1: &[f64], mu2: &[f64], kcoeffs: &[f64], count: usize) -> Result<Vec<BigRational>> {
    let need = count + kcoeffs.len().saturating_sub(1);
    if mu1.len() < count || mu2.len() < need {
        return Err(Error::OrderExceeded { requested: need as i64, available: mu2.len().min(mu1.len()) as i64 });
    }
    let k: Vec<BigRational> = kcoeffs.iter().map(|&x| rational(x)).collect();
    Ok((0..count)
        .map(|m| {
            k.iter().enumerate().fold(rational(mu1[m]), |acc, (j, kj)| acc + kj * rational(mu2[m + j]))
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationCheck {
    pub det: f64,
    pub det_perturbed: f64,
    pub relative_difference: f64,
}

fn exact_hankel(blocks: &[(&[BigRational], usize)], total: usize) -> Vec<Vec<BigRational>> {
    blocks.iter().flat_map(|(c, nj)| (0..*nj).map(move |p| c[p..p + total].to_vec())).collect()
}

/// Determinants of `H_n` for `(μ₁, μ₂)` and for `(μ₁ + k(x)μ₂, μ₂)`, both in exact arithmetic
/// on the stored moments.
pub fn perturbation_det_check(system: &NikishinSystem, n: &MultiIndex, kcoeffs: &[f64]) -> Result<PerturbationCheck> {
    let sys = system.as_real()?;
    check_index(sys.r(), n)?;
    if sys.r() != 2 {
        return Err(Error::WrongArity { expected: 2, got: sys.r() });
    }
    let s = kcoeffs.len().saturating_sub(1);
    let (n1, n2) = (n.parts()[0], n.parts()[1]);
    if n1 + s > n2 {
        return Err(Error::IndexConditionViolated { n1, n2, s });
    }
    unchecked_perturbation(sys, n, kcoeffs)
}

/// The same comparison without the index guard, for negative controls.
pub fn unchecked_perturbation(sys: &RealSystem, n: &MultiIndex, kcoeffs: &[f64]) -> Result<PerturbationCheck> {
    let total = n.total();
    let (n1, n2) = (n.parts()[0], n.parts()[1]);
    let len = total + n1.max(n2);
    let m1 = &sys.mus()[0].moments();
    let m2 = &sys.mus()[1].moments();
    let exact = |m: &[f64]| -> Vec<BigRational> { m[..len].iter().map(|&x| rational(x)).collect() };
    if m1.len() < len || m2.len() < len + kcoeffs.len() {
        return Err(Error::OrderExceeded { requested: (len + kcoeffs.len()) as i64, available: m2.len() as i64 });
    }
    let c1 = exact(m1);
    let c2 = exact(m2);
    let tilde = perturb_moments_exact(m1, m2, kcoeffs, len)?;
    let det = det_exact(&exact_hankel(&[(&c1, n1), (&c2, n2)], total));
    let det_perturbed = det_exact(&exact_hankel(&[(&tilde, n1), (&c2, n2)], total));
    Ok(PerturbationCheck {
        det: det.to_f64().unwrap_or(f64::NAN),
        det_perturbed: det_perturbed.to_f64().unwrap_or(f64::NAN),
        relative_difference: exact_relative_difference(&det, &det_perturbed),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScanMode {
    /// Only indices covered by a normality theorem.
    Theorem,
    /// Every index; on the circle, every same-parity index.
    FullGrid,
    /// Every index including mixed parity on the circle; nothing is asserted.
    ExploreMixedParity,
}

pub const LABEL_AT_REAL: &str = "AT-real-nonincreasing";
pub const LABEL_PERFECT_R2: &str = "perfect-r2-real";
pub const LABEL_AT_CIRCLE: &str = "AT-circle-same-parity";
pub const LABEL_CIRCLE_FLIP: &str = "r2-circle-flip";
pub const LABEL_MIXED: &str = "mixed-parity-convention";

#[derive(Debug, Clone, PartialEq)]
pub struct ScanRow {
    pub index: MultiIndex,
    /// Theorems whose hypothesis the index meets, or the exploratory flag.
    pub labels: Vec<&'static str>,
    pub outcome: std::result::Result<NormalityVerdict, Error>,
}

impl ScanRow {
    pub fn verdict(&self) -> Option<Verdict> {
        self.outcome.as_ref().ok().map(|v| v.verdict)
    }

    /// Whether a theorem covers this index.
    pub fn theorem_backed(&self) -> bool {
        self.labels.iter().any(|l| *l != LABEL_MIXED)
    }
}

/// Theorem labels applicable to `n` for this system.
pub fn theorem_labels(system: &NikishinSystem, n: &MultiIndex, f_nonvanishing: bool) -> Vec<&'static str> {
    let mut labels = Vec::new();
    match system {
        NikishinSystem::Real(s) => {
            if n.satisfies_nikishin_condition() {
                labels.push(LABEL_AT_REAL);
            }
            if s.r() == 2 {
                labels.push(LABEL_PERFECT_R2);
            }
        }
        NikishinSystem::Circle(s) => {
            if n.same_parity() && n.is_nonincreasing() {
                labels.push(LABEL_AT_CIRCLE);
            }
            if s.r() == 2 && n.same_parity() && f_nonvanishing {
                labels.push(LABEL_CIRCLE_FLIP);
            }
            if !n.same_parity() {
                labels.push(LABEL_MIXED);
            }
        }
    }
    labels
}

/// Verdict table over `indices`, sorted lexicographically.
pub fn scan(system: &NikishinSystem, indices: &[MultiIndex], mode: ScanMode) -> Vec<ScanRow> {
    let f_nonvanishing = match system {
        NikishinSystem::Circle(s) if s.r() == 2 => {
            check_f_nonvanishing(&s.sigmas()[1], &s.support(), F_GRID).nonvanishing
        }
        _ => false,
    };
    let is_circle = matches!(system, NikishinSystem::Circle(_));
    let mut chosen: Vec<(MultiIndex, Vec<&'static str>)> = indices
        .iter()
        .filter(|n| !n.is_zero() && n.total() <= MAX_TOTAL)
        .map(|n| (n.clone(), theorem_labels(system, n, f_nonvanishing)))
        .filter(|(n, labels)| match mode {
            ScanMode::Theorem => labels.iter().any(|l| *l != LABEL_MIXED),
            ScanMode::FullGrid => !is_circle || n.same_parity(),
            ScanMode::ExploreMixedParity => true,
        })
        .collect();
    chosen.sort_by(|a, b| a.0.cmp(&b.0));
    chosen.dedup_by(|a, b| a.0 == b.0);
    let explore = mode == ScanMode::ExploreMixedParity;
    chosen
        .into_par_iter()
        .map(|(index, labels)| {
            let outcome = normality(system, &index, explore);
            ScanRow { index, labels, outcome }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{CircleArc, CircleMeasure, Interval, RealMeasure, Sign, WeightKind, WeightSpec};
    use crate::system::{flip_r2_uc, BuildOptions};
    use approx::assert_abs_diff_eq;
    use num_traits::One;
    use proptest::prelude::*;

    fn real(lo: f64, hi: f64) -> RealMeasure {
        RealMeasure::new(Interval::new(lo, hi).unwrap(), WeightSpec::uniform(), 200).unwrap()
    }

    fn real_system(bounds: &[(f64, f64)]) -> NikishinSystem {
        let sigmas = bounds.iter().map(|&(a, b)| real(a, b)).collect();
        NikishinSystem::Real(RealSystem::build(sigmas, BuildOptions::default()).unwrap())
    }

    fn circle_with(arcs: &[(f64, f64)], weight: WeightSpec) -> NikishinSystem {
        let sigmas = arcs
            .iter()
            .map(|&(a, b)| {
                let arc = if b - a >= std::f64::consts::TAU { CircleArc::full() } else { CircleArc::new(a, b).unwrap() };
                CircleMeasure::new(arc, weight.clone(), 200, BranchCut::new(0.0)).unwrap()
            })
            .collect();
        NikishinSystem::Circle(CircleSystem::build(sigmas, None).unwrap())
    }

    fn circle_system(arcs: &[(f64, f64)]) -> NikishinSystem {
        circle_with(arcs, WeightSpec::uniform())
    }

    fn ix(s: &str) -> MultiIndex {
        s.parse().unwrap()
    }

    #[test]
    fn hankel_layout() {
        let s1 = real_system(&[(0.0, 1.0)]);
        let h = hankel_matrix(&s1, &ix("2")).unwrap();
        let expect = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 1.0 / 3.0]);
        assert!((h.assembled - expect).abs().max() < 1e-14);
        let v = normality_rl(&s1, &ix("2")).unwrap();
        assert_abs_diff_eq!(v.det_raw.value().re, 1.0 / 12.0, epsilon = 1e-13);
        let s2 = real_system(&[(0.0, 1.0), (2.0, 3.0)]);
        let h = hankel_matrix(&s2, &ix("1|1")).unwrap();
        let mus = s2.as_real().unwrap().mus();
        for q in 0..2 {
            assert_eq!(h.assembled[(0, q)], mus[0].moment(q).unwrap());
            assert_eq!(h.assembled[(1, q)], mus[1].moment(q).unwrap());
        }
        assert_eq!(hankel_matrix(&s2, &ix("0|0")), Err(Error::ZeroIndex));
    }

    #[test]
    fn toeplitz_layout() {
        let full = circle_system(&[(0.0, std::f64::consts::TAU)]);
        let t = toeplitz_matrix(&full, &ix("2"), false).unwrap();
        assert!((t.assembled - DMatrix::<Complex64>::identity(2, 2)).norm() < 1e-14);
        let cos = circle_with(
            &[(0.0, std::f64::consts::TAU)],
            WeightSpec::new(WeightKind::Cosine(1.0), Sign::Positive),
        );
        let t = toeplitz_matrix(&cos, &ix("2"), false).unwrap();
        // rows (c₀, c₁) and (c₋₁, c₀)
        assert!((t.assembled[(0, 1)] - t.assembled[(1, 0)].conj()).norm() < 1e-14);
        assert!((t.assembled[(0, 1)] - Complex64::new(0.5, 0.0)).norm() < 1e-12);
        // (1,1): subscripts −1/2 and +1/2 in each block
        assert_eq!(toeplitz_subscript(2, 1, 0, 0), -1);
        assert_eq!(toeplitz_subscript(2, 1, 0, 1), 1);
        let two = circle_system(&[(0.3, 1.3), (2.0, 3.0)]);
        assert!(matches!(toeplitz_matrix(&two, &ix("2|1"), false), Err(Error::MixedParity(_))));
        assert!(toeplitz_matrix(&two, &ix("2|1"), true).unwrap().mixed_parity);
    }

    #[test]
    fn classical_polynomials() {
        let s1 = real_system(&[(0.0, 1.0)]);
        let p = type2_poly_rl(&s1, &ix("1")).unwrap();
        assert_abs_diff_eq!(p.coeffs[0], -0.5, epsilon = 1e-13);
        let p = type2_poly_rl(&s1, &ix("2")).unwrap();
        for (c, e) in p.coeffs.iter().zip([1.0 / 6.0, -1.0, 1.0]) {
            assert_abs_diff_eq!(*c, e, epsilon = 1e-12);
        }
        let z = zeros(Polynomial::Real(&p));
        let d = 1.0 / 12f64.sqrt();
        assert_abs_diff_eq!(z[0].re, 0.5 - d, epsilon = 1e-12);
        assert_abs_diff_eq!(z[1].re, 0.5 + d, epsilon = 1e-12);
        let sym = real_system(&[(-1.0, 1.0)]);
        let p = type2_poly_rl(&sym, &ix("5")).unwrap();
        for k in (0..6).step_by(2) {
            assert!(p.coeffs[k].abs() < 1e-12);
        }
    }

    #[test]
    fn laurent_polynomials() {
        let full = circle_system(&[(0.0, std::f64::consts::TAU)]);
        let phi = laurent_poly_uc(&full, &ix("2")).unwrap();
        assert_eq!(phi.half_offsets, vec![-2, 0, 2]);
        assert!(phi.coeffs[0].norm() < 1e-13 && phi.coeffs[1].norm() < 1e-13);
        assert!(zeros(Polynomial::Laurent(&phi)).iter().all(|z| z.norm() < 1e-6));
        let cos = circle_with(
            &[(0.0, std::f64::consts::TAU)],
            WeightSpec::new(WeightKind::Cosine(1.0), Sign::Positive),
        );
        // c₀ = 1, c₁ = c₋₁ = 1/2, c₂ = 0: solve κ₋₁ c₀ + κ₀ c₁ = −c₂ and κ₋₁ c₋₁ + κ₀ c₀ = −c₁
        let phi = laurent_poly_uc(&cos, &ix("2")).unwrap();
        let det = 1.0 - 0.25;
        let km1 = (0.0 * 1.0 - (-0.5) * 0.5) / det;
        let k0 = (1.0 * (-0.5) - 0.5 * 0.0) / det;
        assert!((phi.coeffs[0] - Complex64::new(km1, 0.0)).norm() < 1e-10);
        assert!((phi.coeffs[1] - Complex64::new(k0, 0.0)).norm() < 1e-10);
        assert!(phi.residual < 1e-10);
    }

    #[test]
    fn odd_laurent_uses_the_branch() {
        let two = circle_system(&[(0.3, 1.3), (2.0, 3.0)]);
        let phi = laurent_poly_uc(&two, &ix("1|1")).unwrap();
        assert!(phi.residual < RESIDUAL_TOL);
        let z = Complex64::from_polar(1.0, 0.8);
        let root = sqrt_branch(z, phi.branch).unwrap();
        let direct: Complex64 = phi.coeffs.iter().zip(&phi.half_offsets).map(|(c, &h)| c * root.powi(h as i32)).sum();
        assert!((phi.eval(z).unwrap() - direct).norm() < 1e-12);
    }

    #[test]
    fn verdicts_for_small_systems() {
        let s1 = real_system(&[(0.0, 1.0)]);
        for n in 1..=8 {
            let v = normality_rl(&s1, &MultiIndex::new(vec![n]).unwrap()).unwrap();
            assert_eq!(v.verdict, Verdict::Normal, "n = {n}");
            assert!(v.residual.unwrap() < RESIDUAL_TOL);
        }
        let s2 = real_system(&[(0.0, 1.0), (2.0, 3.0)]);
        let v = normality_rl(&s2, &ix("2|2")).unwrap();
        assert_eq!(v.verdict, Verdict::Normal);
        assert!(v.residual.unwrap() < RESIDUAL_TOL);
        let c = circle_system(&[(0.3, 1.3), (2.0, 3.0)]);
        let v = normality_uc(&c, &ix("1|1"), false).unwrap();
        assert_eq!(v.verdict, Verdict::Normal);
        let full = circle_with(
            &[(0.0, std::f64::consts::TAU)],
            WeightSpec::new(WeightKind::Cosine(1.0), Sign::Positive),
        );
        for n in 1..=8 {
            assert_eq!(normality_uc(&full, &MultiIndex::new(vec![n]).unwrap(), false).unwrap().verdict, Verdict::Normal);
        }
    }

    #[test]
    fn determinant_matches_direct_evaluation() {
        let s2 = real_system(&[(0.0, 1.0), (2.0, 3.0)]);
        for n in ["1|1", "2|1", "2|2", "1|3"] {
            let n = ix(n);
            let h = hankel_matrix(&s2, &n).unwrap();
            let direct = h.assembled.clone().lu().determinant();
            let v = normality_rl(&s2, &n).unwrap();
            assert!((v.det_raw.value().re - direct).abs() <= 1e-7 * direct.abs(), "{n}");
        }
        let c = circle_system(&[(0.3, 1.3), (2.0, 3.0)]);
        for n in ["1|1", "2|2", "3|1"] {
            let n = ix(n);
            let t = toeplitz_matrix(&c, &n, false).unwrap();
            let direct = t.assembled.clone().lu().determinant();
            let v = normality_uc(&c, &n, false).unwrap();
            assert!((v.det_raw.value() - direct).norm() <= 1e-7 * direct.norm(), "{n}");
        }
    }

    #[test]
    fn permutation_changes_only_the_sign() {
        let a = real_system(&[(0.0, 1.0), (2.0, 3.0)]);
        let mus = a.as_real().unwrap().mus();
        let swapped = vec![mus[1].clone(), mus[0].clone()];
        for (n, m) in [("1|2", "2|1"), ("2|2", "2|2"), ("1|3", "3|1"), ("3|2", "2|3")] {
            let u = normality_for_measures(mus, &ix(n)).unwrap();
            let v = normality_for_measures(&swapped, &ix(m)).unwrap();
            assert_eq!(u.verdict, v.verdict);
            assert_abs_diff_eq!(u.det_raw.log_abs, v.det_raw.log_abs, epsilon = 1e-6);
            let (n1, n2) = (ix(n).parts()[0], ix(n).parts()[1]);
            let sign = if n1 * n2 % 2 == 1 { -1.0 } else { 1.0 };
            assert_abs_diff_eq!(u.det_raw.phase.re, sign * v.det_raw.phase.re, epsilon = 1e-9);
        }
    }

    #[test]
    fn perturbation_identity_and_guard() {
        let s = real_system(&[(0.0, 1.0), (2.0, 3.0)]);
        let c = perturbation_det_check(&s, &ix("1|2"), &[0.7]).unwrap();
        assert_eq!(c.relative_difference, 0.0);
        let c = perturbation_det_check(&s, &ix("1|3"), &[0.3, -0.8]).unwrap();
        assert_eq!(c.relative_difference, 0.0);
        assert_eq!(c.det, c.det_perturbed);
        assert!(matches!(
            perturbation_det_check(&s, &ix("3|1"), &[1.0]),
            Err(Error::IndexConditionViolated { n1: 3, n2: 1, s: 0 })
        ));
        // hypothesis violated: the determinants genuinely differ
        let bad = unchecked_perturbation(s.as_real().unwrap(), &ix("2|2"), &[0.5, 0.5]).unwrap();
        assert!(bad.relative_difference > 1e-6);
    }

    #[test]
    fn perturb_moments_rules() {
        let a = [1.0, 2.0, 3.0, 4.0];
        let b = [0.5, 0.25, 0.125, 0.0625];
        assert_eq!(perturb_moments(&a, &b, &[0.0, 0.0], 3).unwrap(), vec![1.0, 2.0, 3.0]);
        assert_eq!(perturb_moments(&a, &b, &[1.0], 4).unwrap(), vec![1.5, 2.25, 3.125, 4.0625]);
        assert!(matches!(perturb_moments(&a, &b, &[1.0, 1.0], 4), Err(Error::OrderExceeded { .. })));
        let e = perturb_moments_exact(&a, &b, &[1.0], 2).unwrap();
        assert_eq!(e[0], BigRational::new(3.into(), 2.into()));
        assert!(BigRational::one() < e[1]);
    }

    proptest! {
        #[test]
        fn perturbation_is_linear(k1 in proptest::collection::vec(-1.0f64..1.0, 3), k2 in proptest::collection::vec(-1.0f64..1.0, 3)) {
            let a: Vec<f64> = (0..10).map(|m| 1.0 / (m as f64 + 1.0)).collect();
            let b: Vec<f64> = (0..10).map(|m| 2f64.powi(-(m as i32))).collect();
            let sum: Vec<f64> = k1.iter().zip(&k2).map(|(x, y)| x + y).collect();
            let zero = vec![0.0; 10];
            let lhs = perturb_moments(&zero, &b, &sum, 6).unwrap();
            let r1 = perturb_moments(&zero, &b, &k1, 6).unwrap();
            let r2 = perturb_moments(&a, &b, &k2, 6).unwrap();
            for m in 0..6 {
                prop_assert!((lhs[m] - (r1[m] + r2[m] - a[m])).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn roots_of_simple_polynomials() {
        let r = polynomial_roots(&[Complex64::new(-0.5, 0.0), Complex64::new(1.0, 0.0)]);
        assert_abs_diff_eq!(r[0].re, 0.5, epsilon = 1e-15);
        let r = polynomial_roots(&[Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]);
        assert_eq!(r, vec![Complex64::new(0.0, 0.0)]);
        let s3 = real_system(&[(0.0, 1.0), (2.0, 3.0)]);
        let p = type2_poly_rl(&s3, &ix("3|2")).unwrap();
        let coeffs: Vec<Complex64> = p.coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect();
        for z in zeros(Polynomial::Real(&p)) {
            assert!(root_residual(&coeffs, z) < RESIDUAL_TOL);
        }
    }

    #[test]
    fn scan_modes_and_labels() {
        let s = real_system(&[(0.0, 1.0), (2.0, 3.0)]);
        let rows = scan(&s, &MultiIndex::all_up_to(2, 4), ScanMode::FullGrid);
        assert_eq!(rows.len(), 14);
        assert!(rows.windows(2).all(|w| w[0].index < w[1].index));
        assert!(rows.iter().all(|r| r.labels.contains(&LABEL_PERFECT_R2)));
        let c = circle_system(&[(0.3, 1.3), (2.0, 3.0)]);
        let all = MultiIndex::all_up_to(2, 4);
        let full = scan(&c, &all, ScanMode::FullGrid);
        assert!(full.iter().all(|r| r.index.same_parity()));
        let explore = scan(&c, &all, ScanMode::ExploreMixedParity);
        assert_eq!(explore.len(), all.len());
        assert!(explore.iter().filter(|r| !r.index.same_parity()).all(|r| r.labels == vec![LABEL_MIXED]));
        let theorem = scan(&c, &all, ScanMode::Theorem);
        assert!(theorem.iter().all(|r| r.theorem_backed()));
        let flipped = NikishinSystem::Circle(flip_r2_uc(c.as_circle().unwrap()).unwrap());
        assert!(scan(&flipped, &[ix("1|1")], ScanMode::Theorem)[0].verdict() == Some(Verdict::Normal));
    }
}
