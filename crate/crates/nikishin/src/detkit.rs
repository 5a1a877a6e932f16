//! Determinants of weighted power families, the Andreief exchange identity,
//! the Cauchy–Vandermonde product formula, and the sign/phase invariants.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::index::MultiIndex;
use crate::linalg::{det_real, log_det, log_row_norms, LogDet};
use crate::measure::{BranchCut, CircleArc, CircleFactor, CircleMeasure, Interval, RealMeasure};
use crate::precise::{self, hp, zero, Hp, HpComplex};
use crate::system::NikishinSystem;

pub type RealFn = Box<dyn Fn(f64) -> f64 + Send + Sync>;
/// Function of the angle `θ` of `z = e^{iθ}`.
pub type CircleFn = Box<dyn Fn(f64) -> Complex64 + Send + Sync>;

/// Ordered list of functions with a label per entry.
pub struct FunctionFamily<F> {
    entries: Vec<F>,
    labels: Vec<String>,
}

pub type RealFamily = FunctionFamily<RealFn>;
pub type CircleFamily = FunctionFamily<CircleFn>;

impl<F> FunctionFamily<F> {
    pub fn new() -> Self {
        Self { entries: Vec::new(), labels: Vec::new() }
    }

    pub fn push(&mut self, label: impl Into<String>, f: F) {
        self.entries.push(f);
        self.labels.push(label.into());
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn entries(&self) -> &[F] {
        &self.entries
    }
}

impl<F> Default for FunctionFamily<F> {
    fn default() -> Self {
        Self::new()
    }
}

impl<F> std::fmt::Debug for FunctionFamily<F> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FunctionFamily").field("labels", &self.labels).finish()
    }
}

/// Strictly increasing points on the line.
#[derive(Debug, Clone, PartialEq)]
pub struct RealTuple {
    points: Vec<f64>,
}

impl RealTuple {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.windows(2).any(|w| w[0] >= w[1]) || points.iter().any(|x| !x.is_finite()) {
            return Err(Error::UnorderedTuple);
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }
}

/// Points on the circle with strictly increasing argument in the branch's range.
#[derive(Debug, Clone, PartialEq)]
pub struct CircleTuple {
    angles: Vec<f64>,
    branch: BranchCut,
}

impl CircleTuple {
    pub fn new(angles: Vec<f64>, branch: BranchCut) -> Result<Self> {
        let angles: Vec<f64> = angles.into_iter().map(|t| branch.unwrap_angle(t)).collect();
        if angles.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::UnorderedTuple);
        }
        Ok(Self { angles, branch })
    }

    /// Unwrapped angles in `[t0, t0 + 2π)`.
    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn points(&self) -> Vec<Complex64> {
        self.angles.iter().map(|&t| Complex64::from_polar(1.0, t)).collect()
    }

    pub fn branch(&self) -> BranchCut {
        self.branch
    }
}

fn check_size(family: usize, tuple: usize) -> Result<()> {
    if family != tuple {
        return Err(Error::SizeMismatch(format!("{family} functions, {tuple} points")));
    }
    Ok(())
}

/// `[f_j(x_k)]` for arbitrary (possibly unordered) points.
pub fn sampling_matrix_rl(family: &RealFamily, points: &[f64]) -> DMatrix<f64> {
    DMatrix::from_fn(family.len(), points.len(), |j, k| (family.entries[j])(points[k]))
}

pub fn sampling_matrix_uc(family: &CircleFamily, angles: &[f64]) -> DMatrix<Complex64> {
    DMatrix::from_fn(family.len(), angles.len(), |j, k| (family.entries[j])(angles[k]))
}

/// `det(f_j(x_k))`.
pub fn chebyshev_det_rl(family: &RealFamily, tuple: &RealTuple) -> Result<f64> {
    check_size(family.len(), tuple.points.len())?;
    Ok(det_real(&sampling_matrix_rl(family, &tuple.points)))
}

pub fn chebyshev_det_uc(family: &CircleFamily, tuple: &CircleTuple) -> Result<Complex64> {
    check_size(family.len(), tuple.angles.len())?;
    Ok(log_det(&sampling_matrix_uc(family, &tuple.angles)).value())
}

/// Determinant in log form together with the row-norm scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampledDet {
    pub det: LogDet,
    pub log_row_norms: f64,
}

impl SampledDet {
    fn of(m: &DMatrix<Complex64>) -> Self {
        Self { det: log_det(m), log_row_norms: log_row_norms(m) }
    }

    pub fn raw(&self) -> Complex64 {
        self.det.value()
    }

    /// `U / ∏ ‖row‖`, bounded by 1 in modulus.
    pub fn scaled(&self) -> Complex64 {
        self.det.scaled(self.log_row_norms).value()
    }
}

pub fn sampled_det_rl(family: &RealFamily, tuple: &RealTuple) -> Result<SampledDet> {
    check_size(family.len(), tuple.points.len())?;
    Ok(SampledDet::of(&sampling_matrix_rl(family, &tuple.points).map(|x| Complex64::new(x, 0.0))))
}

pub fn sampled_det_uc(family: &CircleFamily, tuple: &CircleTuple) -> Result<SampledDet> {
    check_size(family.len(), tuple.angles.len())?;
    Ok(SampledDet::of(&sampling_matrix_uc(family, &tuple.angles)))
}

fn check_arity(system: &NikishinSystem, n: &MultiIndex) -> Result<()> {
    if n.r() != system.r() {
        return Err(Error::WrongArity { expected: system.r(), got: n.r() });
    }
    Ok(())
}

/// `{w₁, x w₁, …, x^{n₁−1} w₁, …, x^{n_r−1} w_r}` where `w_j = dμ_j/dσ₁`.
pub fn at_family_rl(system: &NikishinSystem, n: &MultiIndex) -> Result<RealFamily> {
    let sys = system.as_real()?;
    check_arity(system, n)?;
    let mut family = RealFamily::new();
    for (j, &nj) in n.parts().iter().enumerate() {
        for p in 0..nj {
            let factor = sys.chain()[j].clone();
            let label = format!("x^{p}*w{}", j + 1);
            family.push(
                label,
                Box::new(move |x: f64| x.powi(p as i32) * factor.as_ref().map_or(1.0, |f| f.eval(x))) as RealFn,
            );
        }
    }
    Ok(family)
}

/// `{z^{−(n_j−1)/2 + i} w_j : i < n_j}` block by block, half powers on the system's branch.
pub fn at_family_uc(system: &NikishinSystem, n: &MultiIndex) -> Result<CircleFamily> {
    let sys = system.as_circle()?;
    check_arity(system, n)?;
    let branch = sys.branch();
    let mut family = CircleFamily::new();
    for (j, &nj) in n.parts().iter().enumerate() {
        for i in 0..nj {
            let doubled = 2 * i as i64 - (nj as i64 - 1);
            let factor = sys.chain()[j].clone();
            let label = format!("z^({doubled}/2)*w{}", j + 1);
            family.push(
                label,
                Box::new(move |theta: f64| {
                    let w = factor.as_ref().map_or(1.0, |f| f.eval(Complex64::from_polar(1.0, theta)).re);
                    branch.half_power(theta, doubled) * w
                }) as CircleFn,
            );
        }
    }
    Ok(family)
}

/// Evaluates `U` for the weighted power family of a real system at extended precision.
///
/// Each Cauchy factor is the finite sum over the atoms of its measure, taken exactly
/// from the stored doubles, so the sign is that of the discretized system itself.
pub struct RealAtSampler {
    blocks: Vec<(usize, Option<Vec<(Hp, Hp)>>)>,
}

impl RealAtSampler {
    pub fn new(system: &NikishinSystem, n: &MultiIndex) -> Result<Self> {
        let sys = system.as_real()?;
        check_arity(system, n)?;
        let blocks = n
            .parts()
            .iter()
            .zip(sys.chain())
            .map(|(&nj, factor)| {
                let atoms = factor.as_ref().map(|f| {
                    let nu = f.measure();
                    nu.nodes().iter().zip(nu.masses()).map(|(&t, &m)| (hp(t), hp(m))).collect()
                });
                (nj, atoms)
            })
            .collect();
        Ok(Self { blocks })
    }

    pub fn size(&self) -> usize {
        self.blocks.iter().map(|b| b.0).sum()
    }

    pub fn sample(&self, tuple: &RealTuple) -> Result<SampledDet> {
        check_size(self.size(), tuple.points.len())?;
        let xs: Vec<Hp> = tuple.points.iter().map(|&x| hp(x)).collect();
        let mut rows: Vec<Vec<Hp>> = Vec::with_capacity(xs.len());
        for (nj, atoms) in &self.blocks {
            let weights: Vec<Hp> = xs
                .iter()
                .map(|x| match atoms {
                    None => hp(1.0),
                    Some(atoms) => cauchy_sum(atoms, x),
                })
                .collect();
            let mut row = weights;
            for _ in 0..*nj {
                let next = row.iter().zip(&xs).map(|(v, x)| v * x).collect();
                rows.push(std::mem::replace(&mut row, next));
            }
        }
        let log_norms = rows
            .iter()
            .map(|r| r.iter().map(|v| v.to_f64().value().powi(2)).sum::<f64>().sqrt().ln())
            .sum();
        Ok(SampledDet { det: precise::det_real(rows), log_row_norms: log_norms })
    }
}

/// `Σ m/(t − x)` kept as one fraction; every denominator has the same sign off the support.
fn cauchy_sum(atoms: &[(Hp, Hp)], x: &Hp) -> Hp {
    let (num, den) = atoms.iter().fold((zero(), hp(1.0)), |(num, den), (t, m)| {
        let d = t - x;
        (num * &d + m * &den, den * d)
    });
    num / den
}

enum CircleWeight {
    /// `Re(i F)`.
    ICaratheodory(Vec<(HpComplex, Hp)>),
    /// `Re(−i / F)`.
    NegIReciprocal(Vec<(HpComplex, Hp)>),
}

impl CircleWeight {
    fn of(factor: &CircleFactor) -> Self {
        let atoms = |nu: &CircleMeasure| -> Vec<(HpComplex, Hp)> {
            nu.points().iter().zip(nu.masses()).map(|(&w, &m)| (HpComplex::unit(w), hp(m))).collect()
        };
        match factor {
            CircleFactor::ICaratheodory(nu) => CircleWeight::ICaratheodory(atoms(nu)),
            CircleFactor::NegIReciprocal(nu) => CircleWeight::NegIReciprocal(atoms(nu)),
        }
    }

    fn eval(&self, z: &HpComplex) -> Hp {
        // accumulated as one fraction to keep a single division
        let carath = |atoms: &[(HpComplex, Hp)]| -> HpComplex {
            let (num, den) =
                atoms.iter().fold((HpComplex::real(zero()), HpComplex::real(hp(1.0))), |(num, den), (w, m)| {
                    let d = w - z;
                    (&(&num * &d) + &(&(w + z) * &den).scale(m), &den * &d)
                });
            num.div(&den)
        };
        match self {
            CircleWeight::ICaratheodory(atoms) => -carath(atoms).im,
            CircleWeight::NegIReciprocal(atoms) => {
                let f = carath(atoms);
                -(&f.im / &f.norm_sqr())
            }
        }
    }
}

/// Circle counterpart of [`RealAtSampler`]. Points are `u²` with `u = e^{iθ/2}` on
/// the system's branch, renormalised to unit modulus at the working precision.
pub struct CircleAtSampler {
    blocks: Vec<(usize, Option<CircleWeight>)>,
}

impl CircleAtSampler {
    pub fn new(system: &NikishinSystem, n: &MultiIndex) -> Result<Self> {
        let sys = system.as_circle()?;
        check_arity(system, n)?;
        let blocks =
            n.parts().iter().zip(sys.chain()).map(|(&nj, f)| (nj, f.as_ref().map(CircleWeight::of))).collect();
        Ok(Self { blocks })
    }

    pub fn size(&self) -> usize {
        self.blocks.iter().map(|b| b.0).sum()
    }

    pub fn sample(&self, tuple: &CircleTuple) -> Result<SampledDet> {
        check_size(self.size(), tuple.angles.len())?;
        let halves: Vec<HpComplex> =
            tuple.angles.iter().map(|&t| HpComplex::unit(tuple.branch.half_power(t, 1))).collect();
        let zs: Vec<HpComplex> = halves.iter().map(|u| u * u).collect();
        let mut rows: Vec<Vec<HpComplex>> = Vec::with_capacity(zs.len());
        for (nj, weight) in &self.blocks {
            let mut row: Vec<HpComplex> = halves
                .iter()
                .zip(&zs)
                .map(|(u, z)| {
                    let w = weight.as_ref().map_or(hp(1.0), |w| w.eval(z));
                    u.powi(1 - *nj as i64).scale(&w)
                })
                .collect();
            for _ in 0..*nj {
                let next = row.iter().zip(&zs).map(|(v, z)| v * z).collect();
                rows.push(std::mem::replace(&mut row, next));
            }
        }
        let log_norms = rows
            .iter()
            .map(|r| r.iter().map(|v| v.to_c64().norm_sqr()).sum::<f64>().sqrt().ln())
            .sum();
        Ok(SampledDet { det: precise::det_complex(rows), log_row_norms: log_norms })
    }
}

/// Sorted uniform samples from the open interval.
pub fn random_real_tuple<R: Rng + ?Sized>(support: Interval, n: usize, rng: &mut R) -> RealTuple {
    loop {
        let mut pts: Vec<f64> = (0..n).map(|_| support.lo + support.len() * rng.random::<f64>()).collect();
        pts.sort_by(f64::total_cmp);
        if let Ok(t) = RealTuple::new(pts) {
            return t;
        }
    }
}

/// Uniform angles on the arc, ordered by their argument in the branch's range.
pub fn random_circle_tuple<R: Rng + ?Sized>(arc: CircleArc, branch: BranchCut, n: usize, rng: &mut R) -> CircleTuple {
    loop {
        let mut angles: Vec<f64> =
            (0..n).map(|_| branch.unwrap_angle(arc.alpha + arc.len() * rng.random::<f64>())).collect();
        angles.sort_by(f64::total_cmp);
        if let Ok(t) = CircleTuple::new(angles, branch) {
            return t;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignVerdict {
    ConstantSign,
    SignChange,
    /// Some sampled determinant was exactly zero.
    Vanishing,
}

impl std::fmt::Display for SignVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SignVerdict::ConstantSign => "CONSTANT_SIGN",
            SignVerdict::SignChange => "SIGN_CHANGE",
            SignVerdict::Vanishing => "VANISHING",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignReport {
    pub verdict: SignVerdict,
    pub positive: usize,
    pub negative: usize,
    pub zero: usize,
    /// Smallest `|U| / ∏ ‖row‖` seen.
    pub min_scaled_abs: f64,
    /// Whether the index satisfies the condition under which constancy is a theorem.
    pub theorem_applies: bool,
}

/// Samples `U` over random ordered tuples in the first support.
pub fn sign_check_rl<R: Rng + ?Sized>(
    system: &NikishinSystem,
    n: &MultiIndex,
    trials: usize,
    rng: &mut R,
) -> Result<SignReport> {
    let sampler = RealAtSampler::new(system, n)?;
    let support = system.as_real()?.support();
    let (mut positive, mut negative, mut zero) = (0, 0, 0);
    let mut min_scaled_abs = f64::INFINITY;
    for _ in 0..trials {
        let tuple = random_real_tuple(support, sampler.size(), rng);
        let s = sampler.sample(&tuple)?.scaled().re;
        min_scaled_abs = min_scaled_abs.min(s.abs());
        if s > 0.0 {
            positive += 1;
        } else if s < 0.0 {
            negative += 1;
        } else {
            zero += 1;
        }
    }
    let verdict = if zero > 0 {
        SignVerdict::Vanishing
    } else if positive > 0 && negative > 0 {
        SignVerdict::SignChange
    } else {
        SignVerdict::ConstantSign
    };
    Ok(SignReport {
        verdict,
        positive,
        negative,
        zero,
        min_scaled_abs,
        theorem_applies: n.satisfies_nikishin_condition(),
    })
}

/// Tolerance on the phase spread for confirming the invariant.
pub const PHASE_TOL: f64 = 1e-6;
/// Distance to a multiple of π/2 below which `l mod 4` is resolved.
pub const QUARTER_TOL: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseReport {
    pub phases: Vec<f64>,
    pub mean_phase: f64,
    pub max_deviation: f64,
    /// `l` with `U/|U| = i^l`, when the mean phase sits on a quarter turn.
    pub l_mod4: Option<u8>,
    pub same_parity: bool,
}

impl PhaseReport {
    pub fn from_phases(phases: Vec<f64>, same_parity: bool) -> Self {
        let (s, c) = phases.iter().fold((0.0, 0.0), |(s, c), p| (s + p.sin(), c + p.cos()));
        let mean_phase = s.atan2(c);
        let max_deviation = phases.iter().map(|p| wrap_angle(p - mean_phase).abs()).fold(0.0, f64::max);
        let quarters = mean_phase / FRAC_PI_2;
        let l_mod4 = ((quarters - quarters.round()).abs() * FRAC_PI_2 <= QUARTER_TOL)
            .then(|| (quarters.round() as i64).rem_euclid(4) as u8);
        Self { phases, mean_phase, max_deviation, l_mod4, same_parity }
    }

    pub fn confirmed(&self) -> bool {
        self.max_deviation <= PHASE_TOL && self.l_mod4.is_some()
    }
}

/// Angle reduced to `(−π, π]`.
pub fn wrap_angle(a: f64) -> f64 {
    let r = (a + PI).rem_euclid(2.0 * PI) - PI;
    if r == -PI {
        PI
    } else {
        r
    }
}

/// Phases of `U` over random ordered tuples on the first arc.
pub fn phase_check_uc<R: Rng + ?Sized>(
    system: &NikishinSystem,
    n: &MultiIndex,
    trials: usize,
    rng: &mut R,
) -> Result<PhaseReport> {
    let sampler = CircleAtSampler::new(system, n)?;
    let sys = system.as_circle()?;
    let mut phases = Vec::with_capacity(trials);
    for _ in 0..trials {
        let tuple = random_circle_tuple(sys.support(), sys.branch(), sampler.size(), rng);
        phases.push(sampler.sample(&tuple)?.scaled().arg());
    }
    Ok(PhaseReport::from_phases(phases, n.same_parity()))
}

/// `|(z_j − z_k) − i z_j^{1/2} z_k^{1/2} |z_j − z_k||` for `θ_j` after `θ_k` on the branch.
pub fn elementary_equality_deviation(branch: BranchCut, theta_j: f64, theta_k: f64) -> f64 {
    let zj = Complex64::from_polar(1.0, theta_j);
    let zk = Complex64::from_polar(1.0, theta_k);
    let lhs = zj - zk;
    let rhs = Complex64::i() * branch.half_power(theta_j, 1) * branch.half_power(theta_k, 1) * lhs.norm();
    (lhs - rhs).norm()
}

/// Finite positive or negative combination of point masses.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    atoms: Vec<(f64, f64)>,
}

impl DiscreteMeasure {
    pub fn new(atoms: Vec<(f64, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::SizeMismatch("discrete measure needs at least one atom".into()));
        }
        if atoms.iter().any(|(x, m)| !x.is_finite() || !m.is_finite() || *m == 0.0) {
            return Err(Error::NotSignDefinite("atoms need finite locations and nonzero masses".into()));
        }
        let positive = atoms[0].1 > 0.0;
        if atoms.iter().any(|(_, m)| (*m > 0.0) != positive) {
            return Err(Error::NotSignDefinite("atom masses change sign".into()));
        }
        Ok(Self { atoms })
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }
}

/// Measures integrated as weighted sums over points.
pub trait PointMasses {
    fn point_masses(&self) -> Vec<(f64, f64)>;
}

impl PointMasses for DiscreteMeasure {
    fn point_masses(&self) -> Vec<(f64, f64)> {
        self.atoms.clone()
    }
}

impl PointMasses for RealMeasure {
    fn point_masses(&self) -> Vec<(f64, f64)> {
        self.nodes().iter().copied().zip(self.masses().iter().copied()).collect()
    }
}

fn check_andreief_shapes(a: &DMatrix<f64>, f: &[RealFn], g: &[RealFn]) -> Result<()> {
    let (m, n) = (f.len(), g.len());
    if m > n {
        return Err(Error::ShapeMismatch(format!("{m} functions f but only {n} functions g")));
    }
    if a.nrows() != n - m || (a.nrows() > 0 && a.ncols() != n) {
        return Err(Error::ShapeMismatch(format!("A is {}x{}, expected {}x{n}", a.nrows(), a.ncols(), n - m)));
    }
    Ok(())
}

/// `det [A ; (∫ f_j g_k dμ)]`.
pub fn andreief_lhs(a: &DMatrix<f64>, f: &[RealFn], g: &[RealFn], mu: &impl PointMasses) -> Result<f64> {
    check_andreief_shapes(a, f, g)?;
    let n = g.len();
    let top = a.nrows();
    let pm = mu.point_masses();
    let m = DMatrix::from_fn(n, n, |j, k| {
        if j < top {
            a[(j, k)]
        } else {
            pm.iter().map(|&(x, w)| w * (f[j - top])(x) * (g[k])(x)).sum()
        }
    });
    Ok(det_real(&m))
}

/// Largest atom count and inner size accepted by [`andreief_rhs`].
pub const MAX_ATOMS: usize = 12;
pub const MAX_INNER: usize = 6;

/// `(1/M!) ∫ det[A ; g_k(y_j)] det(f_l(y_j)) dμ^M` as a sum over M-subsets of atoms.
pub fn andreief_rhs(a: &DMatrix<f64>, f: &[RealFn], g: &[RealFn], mu: &DiscreteMeasure) -> Result<f64> {
    check_andreief_shapes(a, f, g)?;
    let (m, n) = (f.len(), g.len());
    if mu.atoms.len() > MAX_ATOMS || m > MAX_INNER {
        return Err(Error::TooManyAtoms { atoms: mu.atoms.len(), m });
    }
    let top = a.nrows();
    // the integrand is symmetric and vanishes on repeated atoms, so the M! orderings collapse
    let mut total = 0.0;
    for subset in combinations(mu.atoms.len(), m) {
        let ys: Vec<(f64, f64)> = subset.iter().map(|&i| mu.atoms[i]).collect();
        let upper = DMatrix::from_fn(n, n, |j, k| if j < top { a[(j, k)] } else { (g[k])(ys[j - top].0) });
        let lower = DMatrix::from_fn(m, m, |l, j| (f[l])(ys[j].0));
        let weight: f64 = ys.iter().map(|y| y.1).product();
        total += weight * det_real(&upper) * det_real(&lower);
    }
    Ok(total)
}

/// Increasing `k`-subsets of `0..n` in lexicographic order.
fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

fn check_cauchy(t: &[f64], z: &[f64], n1: usize, n2: usize) -> Result<()> {
    if t.len() != n1 + n2 || z.len() != n2 {
        return Err(Error::SizeMismatch(format!(
            "expected {} points t and {n2} points z, got {} and {}",
            n1 + n2,
            t.len(),
            z.len()
        )));
    }
    if t.iter().any(|tk| z.contains(tk)) {
        return Err(Error::CoincidentPoints);
    }
    Ok(())
}

/// Rows `t^p` for `p < n1` followed by rows `1/(t − z_j)` for `j < n2`, sampled at the `t_k`.
pub fn cauchy_vandermonde_matrix(t: &[f64], z: &[f64], n1: usize, n2: usize) -> Result<DMatrix<f64>> {
    check_cauchy(t, z, n1, n2)?;
    Ok(DMatrix::from_fn(n1 + n2, n1 + n2, |row, k| {
        if row < n1 {
            t[k].powi(row as i32)
        } else {
            1.0 / (t[k] - z[row - n1])
        }
    }))
}

/// Product formula for the determinant of [`cauchy_vandermonde_matrix`].
pub fn cauchy_vandermonde_closed(t: &[f64], z: &[f64], n1: usize, n2: usize) -> Result<f64> {
    check_cauchy(t, z, n1, n2)?;
    let exponent = n1 * n2 + n2 * n2.saturating_sub(1) / 2;
    let mut v = if exponent % 2 == 0 { 1.0 } else { -1.0 };
    for k in 0..t.len() {
        for j in 0..k {
            v *= t[k] - t[j];
        }
    }
    for k in 0..z.len() {
        for j in 0..k {
            v *= z[k] - z[j];
        }
    }
    for tk in t {
        for zj in z {
            v /= tk - zj;
        }
    }
    Ok(v)
}

/// Relative Andreief mismatch `|lhs − rhs| / max(1, |lhs|)` on one random instance:
/// `N ≤ max_n` polynomial functions g, `M ≤ N` functions f, at most `max_atoms` atoms on [−1, 1].
pub fn andreief_trial<R: Rng + ?Sized>(max_n: usize, max_atoms: usize, rng: &mut R) -> Result<f64> {
    let n = rng.random_range(1..=max_n.clamp(1, MAX_INNER));
    let m = rng.random_range(1..=n);
    let atoms = rng.random_range(1..=max_atoms.clamp(1, MAX_ATOMS));
    let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    let mu = DiscreteMeasure::new(
        (0..atoms).map(|_| (rng.random_range(-1.0..1.0), sign * rng.random_range(0.1..1.0))).collect(),
    )?;
    let a = DMatrix::from_fn(n - m, n, |_, _| rng.random_range(-1.0..1.0));
    let mut family = |count: usize| -> Vec<RealFn> {
        (0..count)
            .map(|p| {
                let shift: f64 = rng.random_range(-0.5..0.5);
                Box::new(move |t: f64| (t + shift).powi(p as i32)) as RealFn
            })
            .collect()
    };
    let f = family(m);
    let g = family(n);
    let lhs = andreief_lhs(&a, &f, &g, &mu)?;
    let rhs = andreief_rhs(&a, &f, &g, &mu)?;
    Ok((lhs - rhs).abs() / lhs.abs().max(1.0))
}

fn separated_tuple<R: Rng + ?Sized>(support: Interval, n: usize, min_sep: f64, rng: &mut R) -> RealTuple {
    loop {
        let t = random_real_tuple(support, n, rng);
        if t.points().windows(2).all(|w| w[1] - w[0] >= min_sep) {
            return t;
        }
    }
}

/// Relative mismatch between the Cauchy–Vandermonde matrix determinant and its product formula
/// on one random instance with `|n| ≤ max_total`, points in [−1, 1], poles in [1.5, 3],
/// and all points at least `min_sep` apart.
pub fn cauchy_vandermonde_trial<R: Rng + ?Sized>(max_total: usize, min_sep: f64, rng: &mut R) -> Result<f64> {
    let total = rng.random_range(1..=max_total.max(1));
    let n2 = rng.random_range(0..=total);
    let n1 = total - n2;
    let t = separated_tuple(Interval::new(-1.0, 1.0)?, total, min_sep, rng);
    let z = separated_tuple(Interval::new(1.5, 3.0)?, n2, min_sep, rng);
    // the Cauchy rows sample a smooth kernel, so rounding the entries to doubles alone
    // costs digits; entries are formed from the exact points at the working precision
    cauchy_vandermonde_matrix(t.points(), z.points(), n1, n2)?;
    let one = hp(1.0);
    let rows = (0..total)
        .map(|row| {
            t.points()
                .iter()
                .map(|&tk| {
                    let tk = hp(tk);
                    if row < n1 {
                        (0..row).fold(one.clone(), |acc, _| acc * &tk)
                    } else {
                        &one / &(tk - hp(z.points()[row - n1]))
                    }
                })
                .collect()
        })
        .collect();
    let direct = precise::det_real(rows).value().re;
    let closed = cauchy_vandermonde_closed(t.points(), z.points(), n1, n2)?;
    Ok((direct - closed).abs() / closed.abs())
}
