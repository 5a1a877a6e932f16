//! Sign-definite measures on intervals and arcs, stored as quadrature atoms.
//!
//! Every measure is a finite list of nodes with signed masses. Moment tables
//! are built eagerly when the measure is constructed; later reads are lookups.

use std::f64::consts::{PI, TAU};
use std::num::NonZeroUsize;
use std::sync::Arc;

use gauss_quad::GaussLegendre;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Default Gauss-Legendre order per measure.
pub const DEFAULT_QUAD_ORDER: usize = 200;
/// Default minimal distance between an evaluation point and a support.
pub const DEFAULT_CLEARANCE: f64 = 1e-8;
/// Default eager moment depth: four times the largest scanned total degree.
pub const DEFAULT_MOMENT_DEPTH: usize = 48;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_finite() && hi.is_finite() && lo < hi {
            Ok(Self { lo, hi })
        } else {
            Err(Error::InvalidInterval { lo, hi })
        }
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn distance(&self, z: Complex64) -> f64 {
        let dx = if z.re < self.lo {
            self.lo - z.re
        } else if z.re > self.hi {
            z.re - self.hi
        } else {
            0.0
        };
        dx.hypot(z.im)
    }

    /// Signed gap between two intervals; negative when the interiors overlap.
    pub fn gap(&self, other: &Interval) -> f64 {
        (other.lo - self.hi).max(self.lo - other.hi)
    }

    /// Largest absolute coordinate, used as the support radius.
    pub fn radius(&self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }
}

/// Closed arc `{e^{iθ} : alpha ≤ θ ≤ beta}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircleArc {
    pub alpha: f64,
    pub beta: f64,
}

impl CircleArc {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        let len = beta - alpha;
        if alpha.is_finite() && beta.is_finite() && len > 0.0 && len <= TAU {
            Ok(Self { alpha, beta })
        } else {
            Err(Error::InvalidArc { alpha, beta })
        }
    }

    pub fn full() -> Self {
        Self { alpha: 0.0, beta: TAU }
    }

    pub fn len(&self) -> f64 {
        self.beta - self.alpha
    }

    pub fn is_full(&self) -> bool {
        self.len() >= TAU
    }

    /// Whether the angle lies on the closed arc (modulo 2π).
    pub fn contains_angle(&self, theta: f64) -> bool {
        (theta - self.alpha).rem_euclid(TAU) <= self.len() || self.is_full()
    }

    /// Whether the angle lies strictly inside the arc.
    pub fn interior_contains(&self, theta: f64) -> bool {
        if self.is_full() {
            return true;
        }
        let d = (theta - self.alpha).rem_euclid(TAU);
        d > 0.0 && d < self.len()
    }

    pub fn distance(&self, z: Complex64) -> f64 {
        let r = z.norm();
        if r > 0.0 && self.contains_angle(z.arg()) {
            return (r - 1.0).abs();
        }
        if self.is_full() {
            return (r - 1.0).abs();
        }
        let a = (z - Complex64::from_polar(1.0, self.alpha)).norm();
        let b = (z - Complex64::from_polar(1.0, self.beta)).norm();
        a.min(b)
    }

    /// Whether the interiors of two arcs intersect.
    pub fn interiors_overlap(&self, other: &CircleArc) -> bool {
        if self.is_full() || other.is_full() {
            return true;
        }
        // two arcs overlap iff one contains an interior point of the other near its start
        let eps: f64 = 1e-12;
        other.interior_contains(self.alpha + eps.min(self.len() / 2.0))
            || self.interior_contains(other.alpha + eps.min(other.len() / 2.0))
    }
}

/// Branch of the square root with argument taken in `[t0, t0 + 2π)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchCut {
    pub t0: f64,
}

impl BranchCut {
    pub fn new(t0: f64) -> Self {
        Self { t0 }
    }

    /// Angle of `theta` moved into `[t0, t0 + 2π)`.
    pub fn unwrap_angle(&self, theta: f64) -> f64 {
        let a = self.t0 + (theta - self.t0).rem_euclid(TAU);
        if a >= self.t0 + TAU {
            self.t0
        } else {
            a
        }
    }

    pub fn arg(&self, z: Complex64) -> f64 {
        self.unwrap_angle(z.arg())
    }

    /// `z^{h/2}` for unimodular `z = e^{iθ}`, using this branch.
    pub fn half_power(&self, theta: f64, doubled_exponent: i64) -> Complex64 {
        let a = self.unwrap_angle(theta);
        Complex64::from_polar(1.0, a * doubled_exponent as f64 / 2.0)
    }
}

pub fn sqrt_branch(z: Complex64, branch: BranchCut) -> Result<Complex64> {
    if z == Complex64::new(0.0, 0.0) {
        return Err(Error::ZeroArgument);
    }
    Ok(Complex64::from_polar(z.norm().sqrt(), branch.arg(z) / 2.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Positive,
    Negative,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Positive => 1.0,
            Sign::Negative => -1.0,
        }
    }

    pub fn of(x: f64) -> Self {
        if x < 0.0 {
            Sign::Negative
        } else {
            Sign::Positive
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum WeightKind {
    /// Density 1 in the support parameter (x, or θ against dθ/2π).
    Uniform,
    /// Polynomial density, coefficients in increasing degree.
    Polynomial(Vec<f64>),
    /// `1 + a·cos θ` against dθ/2π; on the line, `1 + a·cos x`.
    Cosine(f64),
    /// Equispaced samples over the support, linearly interpolated.
    Custom(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightSpec {
    pub kind: WeightKind,
    pub sign: Sign,
}

impl WeightSpec {
    pub fn uniform() -> Self {
        Self { kind: WeightKind::Uniform, sign: Sign::Positive }
    }

    pub fn new(kind: WeightKind, sign: Sign) -> Self {
        Self { kind, sign }
    }

    /// Unsigned density at parameter `t` of a support spanning `[lo, hi]`.
    pub fn density(&self, t: f64, lo: f64, hi: f64) -> f64 {
        match &self.kind {
            WeightKind::Uniform => 1.0,
            WeightKind::Polynomial(c) => c.iter().rev().fold(0.0, |acc, &a| acc * t + a),
            WeightKind::Cosine(a) => 1.0 + a * t.cos(),
            WeightKind::Custom(tab) => {
                if tab.len() == 1 {
                    return tab[0];
                }
                let s = ((t - lo) / (hi - lo)).clamp(0.0, 1.0) * (tab.len() - 1) as f64;
                let i = (s.floor() as usize).min(tab.len() - 2);
                let f = s - i as f64;
                tab[i] * (1.0 - f) + tab[i + 1] * f
            }
        }
    }
}

/// Parameter domain of a quadrature rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Support {
    Line(Interval),
    Circle(CircleArc),
}

impl From<Interval> for Support {
    fn from(i: Interval) -> Self {
        Support::Line(i)
    }
}

impl From<CircleArc> for Support {
    fn from(a: CircleArc) -> Self {
        Support::Circle(a)
    }
}

/// Nodes in the support parameter and positive weights with the density folded in.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub order: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

pub fn build_quadrature(support: Support, weight: &WeightSpec, order: usize) -> Result<QuadratureRule> {
    let order = NonZeroUsize::new(order)
        .ok_or_else(|| Error::UnsupportedWeight("quadrature order must be at least 1".into()))?;
    if let WeightKind::Custom(tab) = &weight.kind {
        if tab.len() < order.get() {
            return Err(Error::UnsupportedWeight(format!(
                "custom table has {} samples, order is {}",
                tab.len(),
                order
            )));
        }
    }
    if let WeightKind::Cosine(a) = &weight.kind {
        if a.abs() > 1.0 {
            return Err(Error::NotSignDefinite(format!("cosine amplitude {a}")));
        }
    }
    let (lo, hi, scale) = match support {
        Support::Line(i) => (i.lo, i.hi, 1.0),
        Support::Circle(a) => (a.alpha, a.beta, 1.0 / TAU),
    };
    let rule = GaussLegendre::new(order);
    let mut pairs: Vec<(f64, f64)> = rule.as_node_weight_pairs().to_vec();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let half = (hi - lo) / 2.0;
    let mid = (hi + lo) / 2.0;
    let mut nodes = Vec::with_capacity(pairs.len());
    let mut weights = Vec::with_capacity(pairs.len());
    for (x, w) in pairs {
        let t = mid + half * x;
        let d = weight.density(t, lo, hi);
        if !(d > 0.0 && d.is_finite()) {
            return Err(Error::NotSignDefinite(format!("density {d} at {t}")));
        }
        nodes.push(t);
        weights.push(w * half * d * scale);
    }
    Ok(QuadratureRule { order: order.get(), nodes, weights })
}

fn constant_sign(values: &[f64]) -> Option<Sign> {
    if values.iter().all(|&v| v > 0.0) {
        Some(Sign::Positive)
    } else if values.iter().all(|&v| v < 0.0) {
        Some(Sign::Negative)
    } else {
        None
    }
}

/// Radon-Nikodym factor multiplying a measure on the line.
#[derive(Debug, Clone)]
pub enum RealFactor {
    /// `x ↦ m_ν(x) = ∫ dν(t)/(t − x)`.
    Cauchy(Arc<RealMeasure>),
}

impl RealFactor {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            RealFactor::Cauchy(nu) => nu.nodes.iter().zip(&nu.masses).map(|(&t, &m)| m / (t - x)).sum(),
        }
    }

    pub fn measure(&self) -> &Arc<RealMeasure> {
        match self {
            RealFactor::Cauchy(nu) => nu,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RealMeasure {
    support: Interval,
    weight: Option<WeightSpec>,
    quad: QuadratureRule,
    factors: Vec<RealFactor>,
    nodes: Vec<f64>,
    masses: Vec<f64>,
    moments: Vec<f64>,
}

impl RealMeasure {
    /// Measure `sign · w(x) dx` on `support`, discretized with `order` Gauss nodes.
    pub fn new(support: Interval, weight: WeightSpec, order: usize) -> Result<Self> {
        Self::with_depth(support, weight, order, DEFAULT_MOMENT_DEPTH)
    }

    pub fn with_depth(support: Interval, weight: WeightSpec, order: usize, depth: usize) -> Result<Self> {
        let quad = build_quadrature(support.into(), &weight, order)?;
        let s = weight.sign.value();
        let masses = quad.weights.iter().map(|w| s * w).collect();
        Ok(Self::assemble(support, Some(weight), quad.clone(), Vec::new(), quad.nodes, masses, depth))
    }

    /// Discrete measure from explicit atoms; masses must share one sign.
    pub fn from_atoms(support: Interval, nodes: Vec<f64>, masses: Vec<f64>, depth: usize) -> Result<Self> {
        if nodes.len() != masses.len() || nodes.is_empty() {
            return Err(Error::SizeMismatch("atoms and masses".into()));
        }
        if constant_sign(&masses).is_none() {
            return Err(Error::NotSignDefinite("atom masses change sign".into()));
        }
        if let Some(x) = nodes.iter().find(|&&x| !support.contains(x)) {
            return Err(Error::SizeMismatch(format!("atom {x} outside support")));
        }
        let quad = QuadratureRule {
            order: nodes.len(),
            nodes: nodes.clone(),
            weights: masses.iter().map(|m| m.abs()).collect(),
        };
        Ok(Self::assemble(support, None, quad, Vec::new(), nodes, masses, depth))
    }

    fn assemble(
        support: Interval,
        weight: Option<WeightSpec>,
        quad: QuadratureRule,
        factors: Vec<RealFactor>,
        nodes: Vec<f64>,
        masses: Vec<f64>,
        depth: usize,
    ) -> Self {
        let mut moments = vec![0.0; depth + 1];
        for (&x, &m) in nodes.iter().zip(&masses) {
            let mut p = m;
            for c in moments.iter_mut() {
                *c += p;
                p *= x;
            }
        }
        Self { support, weight, quad, factors, nodes, masses, moments }
    }

    /// This measure multiplied by `factor`; the product must stay sign-definite.
    pub fn with_factor(&self, factor: RealFactor) -> Result<Self> {
        let masses: Vec<f64> = self.nodes.iter().zip(&self.masses).map(|(&x, &m)| m * factor.eval(x)).collect();
        if constant_sign(&masses).is_none() {
            return Err(Error::NotSignDefinite("factor changes sign on the support".into()));
        }
        let mut factors = self.factors.clone();
        factors.push(factor);
        Ok(Self::assemble(
            self.support,
            self.weight.clone(),
            self.quad.clone(),
            factors,
            self.nodes.clone(),
            masses,
            self.depth(),
        ))
    }

    /// Same atoms with masses multiplied by a constant.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if c == 0.0 || !c.is_finite() {
            return Err(Error::NotSignDefinite(format!("scale {c}")));
        }
        let masses = self.masses.iter().map(|m| m * c).collect();
        Ok(Self::assemble(
            self.support,
            self.weight.clone(),
            self.quad.clone(),
            self.factors.clone(),
            self.nodes.clone(),
            masses,
            self.depth(),
        ))
    }

    pub fn support(&self) -> Interval {
        self.support
    }

    pub fn weight(&self) -> Option<&WeightSpec> {
        self.weight.as_ref()
    }

    pub fn quadrature(&self) -> &QuadratureRule {
        &self.quad
    }

    pub fn factors(&self) -> &[RealFactor] {
        &self.factors
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn depth(&self) -> usize {
        self.moments.len() - 1
    }

    pub fn mass(&self) -> f64 {
        self.moments[0]
    }

    pub fn sign(&self) -> Sign {
        Sign::of(self.mass())
    }

    /// Product of the attached factors at `x` (1 when there are none).
    pub fn density_factor(&self, x: f64) -> f64 {
        self.factors.iter().map(|f| f.eval(x)).product()
    }

    pub fn moments(&self) -> &[f64] {
        &self.moments
    }

    pub fn moment(&self, k: usize) -> Result<f64> {
        self.moments.get(k).copied().ok_or(Error::OrderExceeded {
            requested: k as i64,
            available: self.depth() as i64,
        })
    }

    /// Moment computed directly from the atoms, without the table.
    pub fn moment_direct(&self, k: usize) -> f64 {
        self.nodes.iter().zip(&self.masses).map(|(&x, &m)| m * x.powi(k as i32)).sum()
    }

    /// `∫ t^j dμ(t)/(t − z)`.
    pub fn m_function(&self, j: usize, z: Complex64) -> Result<Complex64> {
        self.m_function_with_clearance(j, z, DEFAULT_CLEARANCE)
    }

    pub fn m_function_with_clearance(&self, j: usize, z: Complex64, clearance: f64) -> Result<Complex64> {
        if self.support.distance(z) < clearance {
            return Err(Error::TooCloseToSupport(format!("{z}")));
        }
        Ok(self
            .nodes
            .iter()
            .zip(&self.masses)
            .map(|(&t, &m)| m * t.powi(j as i32) / (t - z))
            .sum())
    }
}

/// Radon-Nikodym factor multiplying a measure on the circle.
#[derive(Debug, Clone)]
pub enum CircleFactor {
    /// `z ↦ i·F_ν(z)`.
    ICaratheodory(Arc<CircleMeasure>),
    /// `z ↦ −i/F_ν(z)`.
    NegIReciprocal(Arc<CircleMeasure>),
}

impl CircleFactor {
    pub fn eval(&self, z: Complex64) -> Complex64 {
        let i = Complex64::i();
        match self {
            CircleFactor::ICaratheodory(nu) => i * nu.caratheodory_raw(z),
            CircleFactor::NegIReciprocal(nu) => -i / nu.caratheodory_raw(z),
        }
    }

    pub fn measure(&self) -> &Arc<CircleMeasure> {
        match self {
            CircleFactor::ICaratheodory(nu) | CircleFactor::NegIReciprocal(nu) => nu,
        }
    }
}

/// Tolerance for accepting a circle factor value as real.
pub const REALNESS_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct CircleMeasure {
    support: CircleArc,
    weight: WeightSpec,
    quad: QuadratureRule,
    branch: BranchCut,
    factors: Vec<CircleFactor>,
    angles: Vec<f64>,
    points: Vec<Complex64>,
    masses: Vec<f64>,
    depth: usize,
    // c_{h/2} for h in -2·depth..=2·depth, stored at h + 2·depth
    half_moments: Vec<Complex64>,
}

impl CircleMeasure {
    /// Measure `sign · w(θ) dθ/2π` on `support`.
    pub fn new(support: CircleArc, weight: WeightSpec, order: usize, branch: BranchCut) -> Result<Self> {
        Self::with_depth(support, weight, order, branch, DEFAULT_MOMENT_DEPTH)
    }

    pub fn with_depth(
        support: CircleArc,
        weight: WeightSpec,
        order: usize,
        branch: BranchCut,
        depth: usize,
    ) -> Result<Self> {
        let quad = build_quadrature(support.into(), &weight, order)?;
        let s = weight.sign.value();
        let masses = quad.weights.iter().map(|w| s * w).collect();
        let angles = quad.nodes.clone();
        Ok(Self::assemble(support, weight, quad, branch, Vec::new(), angles, masses, depth))
    }

    #[allow(clippy::too_many_arguments)]
    fn assemble(
        support: CircleArc,
        weight: WeightSpec,
        quad: QuadratureRule,
        branch: BranchCut,
        factors: Vec<CircleFactor>,
        angles: Vec<f64>,
        masses: Vec<f64>,
        depth: usize,
    ) -> Self {
        let points = angles.iter().map(|&t| Complex64::from_polar(1.0, t)).collect();
        let span = 2 * depth as i64;
        let half_moments = (-span..=span)
            .map(|h| {
                angles
                    .iter()
                    .zip(&masses)
                    .map(|(&t, &m)| branch.half_power(t, h) * m)
                    .sum()
            })
            .collect();
        Self { support, weight, quad, branch, factors, angles, points, masses, depth, half_moments }
    }

    /// This measure multiplied by a real-valued factor.
    pub fn with_factor(&self, factor: CircleFactor) -> Result<Self> {
        let mut masses = Vec::with_capacity(self.masses.len());
        let mut worst = 0.0f64;
        for (&z, &m) in self.points.iter().zip(&self.masses) {
            let v = factor.eval(z);
            let rel = v.im.abs() / v.norm().max(1.0);
            worst = worst.max(rel);
            masses.push(m * v.re);
        }
        if worst > REALNESS_TOL {
            return Err(Error::NonRealFactor(worst));
        }
        if constant_sign(&masses).is_none() {
            return Err(Error::NotSignDefinite("factor changes sign on the arc".into()));
        }
        let mut factors = self.factors.clone();
        factors.push(factor);
        Ok(Self::assemble(
            self.support,
            self.weight.clone(),
            self.quad.clone(),
            self.branch,
            factors,
            self.angles.clone(),
            masses,
            self.depth,
        ))
    }

    /// Same measure with a different square-root branch.
    pub fn with_branch(&self, branch: BranchCut) -> Self {
        Self::assemble(
            self.support,
            self.weight.clone(),
            self.quad.clone(),
            branch,
            self.factors.clone(),
            self.angles.clone(),
            self.masses.clone(),
            self.depth,
        )
    }

    pub fn support(&self) -> CircleArc {
        self.support
    }

    pub fn weight(&self) -> &WeightSpec {
        &self.weight
    }

    pub fn quadrature(&self) -> &QuadratureRule {
        &self.quad
    }

    pub fn branch(&self) -> BranchCut {
        self.branch
    }

    pub fn factors(&self) -> &[CircleFactor] {
        &self.factors
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    pub fn sign(&self) -> Sign {
        Sign::of(self.mass())
    }

    /// Real product of the attached factors at `z`.
    pub fn density_factor(&self, z: Complex64) -> f64 {
        self.factors.iter().map(|f| f.eval(z).re).product()
    }

    /// `c_k = ∫ z^k dμ`.
    pub fn moment(&self, k: i64) -> Result<Complex64> {
        self.half_moment(2 * k)
    }

    /// `c_{h/2}`, with half-integer powers taken on this measure's branch.
    pub fn half_moment(&self, doubled: i64) -> Result<Complex64> {
        let span = 2 * self.depth as i64;
        if doubled.abs() > span {
            return Err(Error::OrderExceeded { requested: doubled, available: span });
        }
        Ok(self.half_moments[(doubled + span) as usize])
    }

    pub fn moment_direct(&self, k: i64) -> Complex64 {
        self.points.iter().zip(&self.masses).map(|(z, &m)| z.powi(k as i32) * m).sum()
    }

    fn caratheodory_raw(&self, z: Complex64) -> Complex64 {
        self.points.iter().zip(&self.masses).map(|(&w, &m)| (w + z) / (w - z) * m).sum()
    }

    /// `F(z) = ∫ (w + z)/(w − z) dμ(w)`.
    pub fn caratheodory(&self, z: Complex64) -> Result<Complex64> {
        self.caratheodory_with_clearance(z, DEFAULT_CLEARANCE)
    }

    pub fn caratheodory_with_clearance(&self, z: Complex64, clearance: f64) -> Result<Complex64> {
        if self.support.distance(z) < clearance {
            return Err(Error::TooCloseToSupport(format!("{z}")));
        }
        Ok(self.caratheodory_raw(z))
    }

    /// `m(z) = (c₀ − F(z))/(2z) = ∫ dμ(w)/(z − w)`.
    pub fn m_function(&self, z: Complex64) -> Result<Complex64> {
        if z == Complex64::new(0.0, 0.0) {
            return Err(Error::ZeroArgument);
        }
        let f = self.caratheodory(z)?;
        Ok((self.mass() - f) / (2.0 * z))
    }

    /// Direct quadrature of `∫ dμ(w)/(z − w)`.
    pub fn m_function_direct(&self, z: Complex64) -> Result<Complex64> {
        if self.support.distance(z) < DEFAULT_CLEARANCE {
            return Err(Error::TooCloseToSupport(format!("{z}")));
        }
        Ok(self.points.iter().zip(&self.masses).map(|(&w, &m)| m / (z - w)).sum())
    }
}

/// Uniform probability measure on the whole circle.
pub fn lebesgue_circle(order: usize, branch: BranchCut) -> Result<CircleMeasure> {
    CircleMeasure::new(CircleArc::full(), WeightSpec::uniform(), order, branch)
}

/// Principal branch with the cut on the negative real axis.
pub fn principal_branch() -> BranchCut {
    BranchCut::new(-PI)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn unit() -> RealMeasure {
        RealMeasure::new(Interval::new(0.0, 1.0).unwrap(), WeightSpec::uniform(), 200).unwrap()
    }

    #[test]
    fn uniform_moments_match_antiderivative() {
        let mu = unit();
        assert_abs_diff_eq!(mu.moment(0).unwrap(), 1.0, epsilon = 1e-14);
        for k in 0..20 {
            assert_abs_diff_eq!(mu.moment(k).unwrap(), 1.0 / (k as f64 + 1.0), epsilon = 1e-14);
        }
        let sym = RealMeasure::new(Interval::new(-1.0, 1.0).unwrap(), WeightSpec::uniform(), 50).unwrap();
        assert_abs_diff_eq!(sym.moment(1).unwrap(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn moment_beyond_table_is_rejected() {
        let mu = RealMeasure::with_depth(Interval::new(0.0, 1.0).unwrap(), WeightSpec::uniform(), 10, 4).unwrap();
        assert!(matches!(mu.moment(5), Err(Error::OrderExceeded { .. })));
        assert_abs_diff_eq!(mu.moment_direct(5), 1.0 / 6.0, epsilon = 1e-14);
    }

    #[test]
    fn circle_moments() {
        let leb = lebesgue_circle(200, principal_branch()).unwrap();
        assert_abs_diff_eq!(leb.moment(0).unwrap().re, 1.0, epsilon = 1e-14);
        assert!(leb.moment(2).unwrap().norm() < 1e-14);
        let cosine = CircleMeasure::new(
            CircleArc::full(),
            WeightSpec::new(WeightKind::Cosine(1.0), Sign::Positive),
            200,
            principal_branch(),
        )
        .unwrap();
        let c1 = cosine.moment(1).unwrap();
        assert_abs_diff_eq!(c1.re, 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(c1.im, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn m_function_log_oracle() {
        let mu = RealMeasure::new(Interval::new(2.0, 3.0).unwrap(), WeightSpec::uniform(), 200).unwrap();
        let m = mu.m_function(0, Complex64::new(0.0, 0.0)).unwrap();
        assert_abs_diff_eq!(m.re, (1.5f64).ln(), epsilon = 1e-14);
        assert!(mu.m_function(0, Complex64::new(-1e6, 0.0)).unwrap().norm() < 1e-3);
        let z = Complex64::new(0.3, 0.7);
        let a = mu.m_function(2, z.conj()).unwrap();
        let b = mu.m_function(2, z).unwrap().conj();
        assert!((a - b).norm() < 1e-15);
        assert!(matches!(
            mu.m_function(0, Complex64::new(2.5, 0.0)),
            Err(Error::TooCloseToSupport(_))
        ));
    }

    #[test]
    fn weighted_m_function_matches_closed_form() {
        // ∫_2^3 t dt/(t - z) = 1 + z ln((3 - z)/(2 - z))
        let mu = RealMeasure::new(Interval::new(2.0, 3.0).unwrap(), WeightSpec::uniform(), 200).unwrap();
        let z = Complex64::new(0.5, 0.0);
        let expected = 1.0 + 0.5 * (2.5f64 / 1.5).ln();
        assert_abs_diff_eq!(mu.m_function(1, z).unwrap().re, expected, epsilon = 1e-13);
    }

    #[test]
    fn caratheodory_properties() {
        let cosine = CircleMeasure::new(
            CircleArc::full(),
            WeightSpec::new(WeightKind::Cosine(1.0), Sign::Positive),
            200,
            principal_branch(),
        )
        .unwrap();
        assert_abs_diff_eq!(cosine.caratheodory(Complex64::new(0.0, 0.0)).unwrap().re, 1.0, epsilon = 1e-14);
        // truncated series 1 + 2 Σ c_{-k} z^k
        let z = Complex64::new(0.5, 0.0);
        let mut series = cosine.moment(0).unwrap();
        for k in 1..=40 {
            series += 2.0 * cosine.moment(-k).unwrap() * z.powi(k as i32);
        }
        assert!((cosine.caratheodory(z).unwrap() - series).norm() < 1e-12);

        let arc = CircleMeasure::new(CircleArc::new(2.0, 3.0).unwrap(), WeightSpec::uniform(), 200, principal_branch())
            .unwrap();
        for k in 0..50 {
            let z = Complex64::from_polar(1.0, 0.3 + k as f64 * 0.02);
            let v = Complex64::i() * arc.caratheodory(z).unwrap();
            assert!(v.im.abs() < 1e-10, "imag part {}", v.im);
        }
    }

    #[test]
    fn circle_m_function_two_ways() {
        let arc = CircleMeasure::new(CircleArc::new(0.3, 1.3).unwrap(), WeightSpec::uniform(), 200, principal_branch())
            .unwrap();
        let leb = lebesgue_circle(200, principal_branch()).unwrap();
        for z in [Complex64::new(2.0, 0.0), Complex64::new(0.2, -0.3), Complex64::new(-1.5, 1.0)] {
            for mu in [&arc, &leb] {
                let a = mu.m_function(z).unwrap();
                let b = mu.m_function_direct(z).unwrap();
                assert!((a - b).norm() < 1e-10);
            }
        }
        let big = Complex64::new(1e6, 0.0);
        assert_abs_diff_eq!((leb.m_function(big).unwrap() * big).re, 1.0, epsilon = 1e-6);
        assert!(matches!(leb.m_function(Complex64::new(0.0, 0.0)), Err(Error::ZeroArgument)));
    }

    #[test]
    fn sqrt_branch_examples() {
        let one = sqrt_branch(Complex64::new(1.0, 0.0), BranchCut::new(-PI)).unwrap();
        assert!((one - 1.0).norm() < 1e-15);
        let i = sqrt_branch(Complex64::new(-1.0, 0.0), BranchCut::new(0.0)).unwrap();
        assert!((i - Complex64::i()).norm() < 1e-15);
        assert!(sqrt_branch(Complex64::new(0.0, 0.0), BranchCut::new(0.0)).is_err());
    }

    #[test]
    fn quadrature_examples() {
        let i01 = Interval::new(0.0, 1.0).unwrap();
        let q = build_quadrature(i01.into(), &WeightSpec::uniform(), 5).unwrap();
        let x9: f64 = q.nodes.iter().zip(&q.weights).map(|(x, w)| w * x.powi(9)).sum();
        assert_abs_diff_eq!(x9, 0.1, epsilon = 1e-14);
        let q1 = build_quadrature(Interval::new(-1.0, 1.0).unwrap().into(), &WeightSpec::uniform(), 1).unwrap();
        assert_eq!(q1.nodes.len(), 1);
        assert_abs_diff_eq!(q1.nodes[0], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(q1.weights[0], 2.0, epsilon = 1e-15);
        let short = WeightSpec::new(WeightKind::Custom(vec![1.0, 2.0]), Sign::Positive);
        assert!(matches!(build_quadrature(i01.into(), &short, 3), Err(Error::UnsupportedWeight(_))));
        let bad = WeightSpec::new(WeightKind::Cosine(1.5), Sign::Positive);
        assert!(build_quadrature(CircleArc::full().into(), &bad, 10).is_err());
    }

    #[test]
    fn half_arc_first_moment_matches_adaptive_oracle() {
        // (1/2π)∫_0^π e^{iθ} dθ = i/π, checked against composite Simpson
        let mu = CircleMeasure::new(CircleArc::new(0.0, PI).unwrap(), WeightSpec::uniform(), 50, principal_branch())
            .unwrap();
        let c1 = mu.moment(1).unwrap();
        let n = 20000;
        let h = PI / n as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..=n {
            let w = if k == 0 || k == n {
                1.0
            } else if k % 2 == 1 {
                4.0
            } else {
                2.0
            };
            acc += Complex64::from_polar(1.0, k as f64 * h) * w;
        }
        acc *= h / 3.0 / TAU;
        assert!((c1 - acc).norm() < 1e-12);
        assert!((c1 - Complex64::new(0.0, 1.0 / PI)).norm() < 1e-14);
    }

    #[test]
    fn custom_weight_interpolates() {
        let w = WeightSpec::new(WeightKind::Custom(vec![1.0, 3.0, 5.0]), Sign::Positive);
        assert_abs_diff_eq!(w.density(0.25, 0.0, 1.0), 2.0, epsilon = 1e-15);
        let mu = RealMeasure::new(Interval::new(0.0, 1.0).unwrap(), w, 3).unwrap();
        assert_abs_diff_eq!(mu.mass(), 3.0, epsilon = 1e-12);
    }

    #[test]
    fn arc_overlap_and_distance() {
        let a = CircleArc::new(0.3, 1.3).unwrap();
        let b = CircleArc::new(2.0, 3.0).unwrap();
        assert!(!a.interiors_overlap(&b));
        assert!(a.interiors_overlap(&CircleArc::new(1.0, 2.0).unwrap()));
        assert!(!a.interiors_overlap(&CircleArc::new(1.3, 2.0).unwrap()));
        assert!(a.interiors_overlap(&CircleArc::new(0.3 + TAU - 0.1, 0.3 + TAU + 0.5).unwrap()));
        assert_abs_diff_eq!(a.distance(Complex64::from_polar(2.0, 1.0)), 1.0, epsilon = 1e-15);
    }

    proptest! {
        #[test]
        fn sqrt_squares_back(re in -10.0f64..10.0, im in -10.0f64..10.0, t0 in -7.0f64..7.0) {
            let z = Complex64::new(re, im);
            prop_assume!(z.norm() > 1e-6);
            let s = sqrt_branch(z, BranchCut::new(t0)).unwrap();
            prop_assert!((s * s - z).norm() <= 1e-14 * z.norm() * 4.0);
            let a = BranchCut::new(t0).arg(z);
            prop_assert!(a >= t0 && a < t0 + TAU);
        }

        #[test]
        fn circle_moments_conjugate_symmetric(alpha in -3.0f64..3.0, len in 0.1f64..6.0, k in 0i64..20) {
            let mu = CircleMeasure::new(CircleArc::new(alpha, alpha + len).unwrap(), WeightSpec::uniform(), 60, principal_branch()).unwrap();
            let a = mu.moment(-k).unwrap();
            let b = mu.moment(k).unwrap().conj();
            prop_assert!((a - b).norm() <= 1e-13);
        }

        #[test]
        fn hankel_positive(lo in -1.0f64..0.0, len in 1.0f64..2.0, n in 1usize..=8) {
            let mu = RealMeasure::new(Interval::new(lo, lo + len).unwrap(), WeightSpec::uniform(), 100).unwrap();
            let h = nalgebra::DMatrix::from_fn(n, n, |i, j| mu.moment(i + j).unwrap());
            let eig = h.symmetric_eigenvalues();
            prop_assert!(eig.min() > 0.0);
        }

        #[test]
        fn toeplitz_hermitian_positive(alpha in -3.0f64..3.0, len in 0.5f64..6.0, n in 1usize..=8) {
            let mu = CircleMeasure::new(CircleArc::new(alpha, alpha + len).unwrap(), WeightSpec::uniform(), 100, principal_branch()).unwrap();
            let t = nalgebra::DMatrix::from_fn(n, n, |i, j| mu.moment(j as i64 - i as i64).unwrap());
            prop_assert!((t.adjoint() - &t).norm() < 1e-14);
            let eig = t.symmetric_eigenvalues();
            prop_assert!(eig.min() > 0.0);
        }
    }
}
