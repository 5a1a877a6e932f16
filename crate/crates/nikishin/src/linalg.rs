//! Small dense helpers: determinants, orthonormal polynomial bases, exact elimination.

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

/// Determinant with its logarithmic magnitude kept separately from the phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogDet {
    /// Unit-modulus phase (±1 for real matrices), or 0 for a singular matrix.
    pub phase: Complex64,
    pub log_abs: f64,
}

impl LogDet {
    pub fn zero() -> Self {
        Self { phase: Complex64::new(0.0, 0.0), log_abs: f64::NEG_INFINITY }
    }

    pub fn value(&self) -> Complex64 {
        self.phase * self.log_abs.exp()
    }

    pub fn scaled(&self, log_factor: f64) -> Self {
        Self { phase: self.phase, log_abs: self.log_abs - log_factor }
    }
}

/// LU determinant of a complex matrix in log form.
pub fn log_det(m: &DMatrix<Complex64>) -> LogDet {
    let n = m.nrows();
    if n == 0 {
        return LogDet { phase: Complex64::new(1.0, 0.0), log_abs: 0.0 };
    }
    let lu = m.clone().lu();
    let u = lu.u();
    let mut phase = Complex64::new(if lu.p().determinant::<f64>() < 0.0 { -1.0 } else { 1.0 }, 0.0);
    let mut log_abs = 0.0;
    for i in 0..n {
        let d = u[(i, i)];
        let a = d.norm();
        if a == 0.0 {
            return LogDet::zero();
        }
        phase *= d / a;
        log_abs += a.ln();
    }
    LogDet { phase, log_abs }
}

/// Sum of the logs of the Euclidean row norms.
pub fn log_row_norms(m: &DMatrix<Complex64>) -> f64 {
    m.row_iter().map(|r| r.norm().ln()).sum()
}

pub fn det_real(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 1.0;
    }
    m.clone().lu().determinant()
}

/// Orthonormal polynomials of a positive discrete measure, built by Arnoldi.
#[derive(Debug, Clone)]
pub struct OrthoBasis {
    /// `values[q][i] = P_q(z_i)`.
    pub values: Vec<Vec<Complex64>>,
    /// Leading coefficient of each `P_q` (positive).
    pub leads: Vec<f64>,
    /// Monomial coefficients of each `P_q`, increasing degree.
    pub coeffs: Vec<Vec<Complex64>>,
    /// `z P_q = Σ_{i≤q+1} hess[q][i] P_i`.
    pub hess: Vec<Vec<Complex64>>,
}

impl OrthoBasis {
    /// First `n` orthonormal polynomials for weights `w` at nodes `z`.
    pub fn new(z: &[Complex64], w: &[f64], n: usize) -> Self {
        assert!(n <= z.len(), "more polynomials than nodes");
        let inner = |a: &[Complex64], b: &[Complex64]| -> Complex64 {
            a.iter().zip(b).zip(w).map(|((x, y), wi)| x * y.conj() * wi).sum()
        };
        let mut values: Vec<Vec<Complex64>> = Vec::with_capacity(n);
        let mut coeffs: Vec<Vec<Complex64>> = Vec::with_capacity(n);
        let mut leads = Vec::with_capacity(n);
        let mut hess = Vec::with_capacity(n);
        if n == 0 {
            return Self { values, leads, coeffs, hess };
        }
        let norm0 = w.iter().sum::<f64>().sqrt();
        values.push(vec![Complex64::new(1.0 / norm0, 0.0); z.len()]);
        coeffs.push(vec![Complex64::new(1.0 / norm0, 0.0)]);
        leads.push(1.0 / norm0);
        for q in 0..n - 1 {
            let mut v: Vec<Complex64> = values[q].iter().zip(z).map(|(p, zi)| p * zi).collect();
            let mut c: Vec<Complex64> = std::iter::once(Complex64::zero()).chain(coeffs[q].iter().copied()).collect();
            let mut col = vec![Complex64::zero(); q + 2];
            for _ in 0..2 {
                for i in 0..=q {
                    let h = inner(&v, &values[i]);
                    col[i] += h;
                    v.iter_mut().zip(&values[i]).for_each(|(a, b)| *a -= h * b);
                    c.iter_mut().zip(&coeffs[i]).for_each(|(a, b)| *a -= h * b);
                }
            }
            let h = inner(&v, &v).re.sqrt();
            col[q + 1] = Complex64::new(h, 0.0);
            hess.push(col);
            v.iter_mut().for_each(|a| *a /= h);
            c.iter_mut().for_each(|a| *a /= h);
            leads.push(leads[q] / h);
            values.push(v);
            coeffs.push(c);
        }
        Self { values, leads, coeffs, hess }
    }

    /// `P_0(z), …, P_{n−1}(z)` through the Arnoldi recurrence.
    pub fn eval(&self, z: Complex64) -> Vec<Complex64> {
        let n = self.len();
        let mut out = Vec::with_capacity(n);
        if n == 0 {
            return out;
        }
        out.push(Complex64::new(self.leads[0], 0.0));
        for q in 0..n - 1 {
            let col = &self.hess[q];
            let mut v = z * out[q];
            for i in 0..=q {
                v -= col[i] * out[i];
            }
            out.push(v / col[q + 1]);
        }
        out
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn log_lead_product(&self) -> f64 {
        self.leads.iter().map(|l| l.ln()).sum()
    }
}

/// Exact conversion of a finite double.
pub fn rational(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite value")
}

/// Determinant by fraction-free elimination over the integers.
pub fn det_exact(rows: &[Vec<BigRational>]) -> BigRational {
    let n = rows.len();
    if n == 0 {
        return BigRational::from_integer(1.into());
    }
    // clear denominators row by row, remembering the scale
    let mut scale = BigRational::from_integer(1.into());
    let mut m: Vec<Vec<BigInt>> = rows
        .iter()
        .map(|r| {
            let l = r.iter().fold(BigInt::from(1), |acc, x| num_integer::Integer::lcm(&acc, x.denom()));
            scale *= BigRational::from_integer(l.clone());
            r.iter().map(|x| (x * BigRational::from_integer(l.clone())).to_integer()).collect()
        })
        .collect();
    let mut sign = 1;
    let mut prev = BigInt::from(1);
    for k in 0..n {
        let Some(p) = (k..n).find(|&i| !m[i][k].is_zero()) else {
            return BigRational::zero();
        };
        if p != k {
            m.swap(p, k);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                m[i][j] = v / &prev;
            }
            m[i][k] = BigInt::zero();
        }
        prev = m[k][k].clone();
    }
    let det = BigRational::from_integer(m[n - 1][n - 1].clone()) / scale;
    if sign < 0 {
        -det
    } else {
        det
    }
}

/// Relative difference `|a − b| / max(|a|, |b|)` of two exact values, as a double.
pub fn exact_relative_difference(a: &BigRational, b: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    let den = if a.abs() > b.abs() { a.abs() } else { b.abs() };
    if den.is_zero() {
        return 0.0;
    }
    ((a - b).abs() / den).to_f64().unwrap_or(f64::INFINITY)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use num_traits::ToPrimitive;
    use proptest::prelude::*;

    #[test]
    fn exact_det_matches_hilbert() {
        // det of the 4×4 Hilbert matrix is 1/6048000
        let rows: Vec<Vec<BigRational>> = (0..4)
            .map(|i| (0..4).map(|j| BigRational::new(1.into(), (i + j + 1).into())).collect())
            .collect();
        assert_eq!(det_exact(&rows), BigRational::new(1.into(), 6048000.into()));
        let swapped = vec![rows[1].clone(), rows[0].clone(), rows[2].clone(), rows[3].clone()];
        assert_eq!(det_exact(&swapped), -BigRational::new(1.into(), 6048000.into()));
    }

    #[test]
    fn ortho_basis_is_orthonormal() {
        let z: Vec<Complex64> = (0..30).map(|k| Complex64::new(k as f64 / 29.0, 0.0)).collect();
        let w = vec![1.0 / 30.0; 30];
        let b = OrthoBasis::new(&z, &w, 8);
        for p in 0..8 {
            for q in 0..8 {
                let g: Complex64 = (0..30).map(|i| b.values[p][i] * b.values[q][i].conj() * w[i]).sum();
                assert_abs_diff_eq!(g.re, if p == q { 1.0 } else { 0.0 }, epsilon = 1e-12);
            }
            // coefficients reproduce the values and the leading term
            for (i, zi) in z.iter().enumerate() {
                let v: Complex64 = b.coeffs[p].iter().rev().fold(Complex64::zero(), |acc, c| acc * zi + c);
                assert!((v - b.values[p][i]).norm() < 1e-9 * b.leads[p].max(1.0));
            }
            assert_abs_diff_eq!(b.coeffs[p][p].re, b.leads[p], epsilon = 1e-9 * b.leads[p]);
        }
        let at = b.eval(z[7]);
        for p in 0..8 {
            assert!((at[p] - b.values[p][7]).norm() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn exact_det_agrees_with_lu(entries in proptest::collection::vec(-4.0f64..4.0, 16)) {
            let m = DMatrix::from_row_slice(4, 4, &entries);
            let rows: Vec<Vec<BigRational>> = (0..4).map(|i| (0..4).map(|j| rational(m[(i, j)])).collect()).collect();
            let exact = det_exact(&rows).to_f64().unwrap();
            let lu = det_real(&m);
            prop_assert!((exact - lu).abs() <= 1e-10 * (1.0 + exact.abs()));
        }

        #[test]
        fn log_det_matches_plain(entries in proptest::collection::vec(-2.0f64..2.0, 18)) {
            let m = DMatrix::from_fn(3, 3, |i, j| Complex64::new(entries[2 * (3 * i + j)], entries[2 * (3 * i + j) + 1]));
            let plain = m.clone().lu().determinant();
            let ld = log_det(&m).value();
            prop_assert!((plain - ld).norm() <= 1e-10 * (1.0 + plain.norm()));
        }
    }
}
