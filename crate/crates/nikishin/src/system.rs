//! Nikishin systems on the line and on the circle, built from generator measures.

use std::f64::consts::TAU;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::measure::{BranchCut, CircleArc, CircleFactor, CircleMeasure, Interval, RealFactor, RealMeasure};
use crate::spectral::{Stripped, STRIPPED_SIZE};

/// Minimal gap between consecutive supports unless touching is allowed.
pub const MIN_GAP: f64 = 1e-6;
/// Threshold below which |F| counts as vanishing.
pub const F_THRESHOLD: f64 = 1e-6;
/// Grid used when a flip checks that F does not vanish.
pub const F_GRID: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BuildOptions {
    /// Caller asserts the brackets are finite even when supports touch.
    pub touching_ok: bool,
    pub min_gap: f64,
}

impl Default for BuildOptions {
    fn default() -> Self {
        Self { touching_ok: false, min_gap: MIN_GAP }
    }
}

fn check_pair(a: &Interval, b: &Interval, ids: (usize, usize), opts: &BuildOptions) -> Result<()> {
    let gap = a.gap(b);
    if gap < 0.0 {
        return Err(Error::OverlappingSupports(ids.0, ids.1));
    }
    if gap < opts.min_gap && !opts.touching_ok {
        return Err(Error::NonIntegrable { first: ids.0, second: ids.1, gap });
    }
    Ok(())
}

/// `⟨σ₁, σ₂⟩ = m_{σ₂}(x) dσ₁(x)`.
pub fn bracket_rl(sigma1: &RealMeasure, sigma2: Arc<RealMeasure>, opts: &BuildOptions) -> Result<RealMeasure> {
    check_pair(&sigma1.support(), &sigma2.support(), (1, 2), opts)?;
    sigma1.with_factor(RealFactor::Cauchy(sigma2))
}

/// `⟨σ₁, σ₂⟩ = i F_{σ₂}(z) dσ₁(z)`.
pub fn bracket_uc(sigma1: &CircleMeasure, sigma2: Arc<CircleMeasure>) -> Result<CircleMeasure> {
    if sigma1.support().interiors_overlap(&sigma2.support()) {
        return Err(Error::OverlappingSupports(1, 2));
    }
    sigma1.with_factor(CircleFactor::ICaratheodory(sigma2))
}

#[derive(Debug, Clone)]
pub struct RealSystem {
    sigmas: Vec<Arc<RealMeasure>>,
    mus: Vec<Arc<RealMeasure>>,
    chain: Vec<Option<RealFactor>>,
    opts: BuildOptions,
}

impl RealSystem {
    /// Builds `μ₁ = σ₁, μ₂ = ⟨σ₁,σ₂⟩, μ₃ = ⟨σ₁,⟨σ₂,σ₃⟩⟩, …`.
    pub fn build(sigmas: Vec<RealMeasure>, opts: BuildOptions) -> Result<Self> {
        if sigmas.is_empty() {
            return Err(Error::WrongArity { expected: 1, got: 0 });
        }
        for i in 0..sigmas.len() - 1 {
            check_pair(&sigmas[i].support(), &sigmas[i + 1].support(), (i + 1, i + 2), &opts)?;
        }
        let sigmas: Vec<Arc<RealMeasure>> = sigmas.into_iter().map(Arc::new).collect();
        let mut mus = vec![sigmas[0].clone()];
        let mut chain = vec![None];
        for j in 1..sigmas.len() {
            let mut inner = sigmas[j].clone();
            for i in (1..j).rev() {
                inner = Arc::new(sigmas[i].with_factor(RealFactor::Cauchy(inner))?);
            }
            let factor = RealFactor::Cauchy(inner);
            mus.push(Arc::new(sigmas[0].with_factor(factor.clone())?));
            chain.push(Some(factor));
        }
        Ok(Self { sigmas, mus, chain, opts })
    }

    fn from_parts(sigmas: Vec<Arc<RealMeasure>>, mus: Vec<Arc<RealMeasure>>, chain: Vec<Option<RealFactor>>, opts: BuildOptions) -> Self {
        Self { sigmas, mus, chain, opts }
    }

    pub fn r(&self) -> usize {
        self.mus.len()
    }

    pub fn sigmas(&self) -> &[Arc<RealMeasure>] {
        &self.sigmas
    }

    pub fn mus(&self) -> &[Arc<RealMeasure>] {
        &self.mus
    }

    pub fn chain(&self) -> &[Option<RealFactor>] {
        &self.chain
    }

    pub fn options(&self) -> BuildOptions {
        self.opts
    }

    /// First support Δ₁.
    pub fn support(&self) -> Interval {
        self.mus[0].support()
    }

    /// `dμ_j/dμ₁` at `x`, with `j` counted from 0.
    pub fn rn(&self, j: usize, x: f64) -> f64 {
        self.chain[j].as_ref().map_or(1.0, |f| f.eval(x))
    }
}

/// Flipped real system together with the polynomial linking the two first measures.
#[derive(Debug, Clone)]
pub struct RealFlip {
    pub system: RealSystem,
    /// Coefficients of `p` with `μ₁ = p·μ₂ + μ̃₁`, increasing degree.
    pub perturbation: Vec<f64>,
    pub stripped: Stripped,
}

/// `𝓝(σ₁,σ₂) ↦ 𝓝(μ₂, −(a₁²/c₀)σ₂⁽¹⁾)`, from `1/m_{σ₂} = (b₁ − x − a₁² m_{σ₂⁽¹⁾})/c₀`.
pub fn flip_r2_rl(system: &RealSystem) -> Result<RealFlip> {
    if system.r() != 2 {
        return Err(Error::WrongArity { expected: 2, got: system.r() });
    }
    let sigma2 = &system.sigmas[1];
    let stripped = Stripped::of(sigma2, STRIPPED_SIZE)?;
    let (nodes, weights) = stripped.rest.gauss_rule();
    let scale = -stripped.a1_squared / stripped.mass;
    let masses = weights.iter().map(|w| w * scale).collect();
    let nu = Arc::new(RealMeasure::from_atoms(sigma2.support(), nodes, masses, sigma2.depth())?);
    let mu2 = system.mus[1].clone();
    check_pair(&mu2.support(), &nu.support(), (1, 2), &system.opts)?;
    let factor = RealFactor::Cauchy(nu.clone());
    let mu1_tilde = Arc::new(mu2.with_factor(factor.clone())?);
    let perturbation = vec![stripped.b1 / stripped.mass, -1.0 / stripped.mass];
    let flipped = RealSystem::from_parts(vec![mu2.clone(), nu], vec![mu2, mu1_tilde], vec![None, Some(factor)], system.opts);
    Ok(RealFlip { system: flipped, perturbation, stripped })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FReport {
    pub min_abs: f64,
    pub nonvanishing: bool,
}

/// Minimum of |F_{σ₂}| over an equispaced grid of Γ₁ (endpoints included).
pub fn check_f_nonvanishing(sigma2: &CircleMeasure, gamma1: &CircleArc, gridsize: usize) -> FReport {
    let n = gridsize.max(2);
    let min_abs = (0..n)
        .map(|k| {
            let t = gamma1.alpha + gamma1.len() * k as f64 / (n - 1) as f64;
            let z = Complex64::from_polar(1.0, t);
            sigma2.points().iter().zip(sigma2.masses()).map(|(&w, &m)| (w + z) / (w - z) * m).sum::<Complex64>().norm()
        })
        .fold(f64::INFINITY, f64::min);
    FReport { min_abs, nonvanishing: min_abs > F_THRESHOLD }
}

/// Uncovered runs of the circle as (start angle, length), largest first.
pub fn uncovered_gaps(arcs: &[CircleArc]) -> Vec<(f64, f64)> {
    if arcs.iter().any(|a| a.is_full()) {
        return Vec::new();
    }
    let mut cuts: Vec<f64> = arcs.iter().flat_map(|a| [a.alpha.rem_euclid(TAU), a.beta.rem_euclid(TAU)]).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    let n = cuts.len();
    let segs: Vec<(f64, f64, bool)> = (0..n)
        .map(|i| {
            let start = cuts[i];
            let len = if i + 1 < n { cuts[i + 1] - start } else { cuts[0] + TAU - start };
            let mid = start + len / 2.0;
            (start, len, arcs.iter().any(|a| a.contains_angle(mid)))
        })
        .collect();
    // rotate so the list starts with a covered segment, then merge uncovered runs
    let Some(first_cov) = segs.iter().position(|s| s.2) else {
        return vec![(0.0, TAU)];
    };
    let mut gaps: Vec<(f64, f64)> = Vec::new();
    let mut open: Option<(f64, f64)> = None;
    for k in 0..n {
        let (start, len, covered) = segs[(first_cov + k) % n];
        if covered {
            if let Some(g) = open.take() {
                gaps.push(g);
            }
        } else {
            open = Some(match open {
                Some((s, l)) => (s, l + len),
                None => (start, len),
            });
        }
    }
    if let Some(g) = open {
        gaps.push(g);
    }
    gaps.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.total_cmp(&b.0)));
    gaps
}

/// Midpoint of the largest uncovered run.
pub fn auto_branch(arcs: &[CircleArc]) -> Result<BranchCut> {
    let gaps = uncovered_gaps(arcs);
    let &(start, len) = gaps.first().ok_or(Error::NoBranchGap)?;
    Ok(BranchCut::new(start + len / 2.0))
}

#[derive(Debug, Clone)]
pub struct CircleSystem {
    sigmas: Vec<Arc<CircleMeasure>>,
    mus: Vec<Arc<CircleMeasure>>,
    chain: Vec<Option<CircleFactor>>,
    branch: BranchCut,
    flipped: bool,
}

impl CircleSystem {
    /// Builds the circle system; `t0` defaults to the middle of the largest gap.
    pub fn build(sigmas: Vec<CircleMeasure>, t0: Option<f64>) -> Result<Self> {
        if sigmas.is_empty() {
            return Err(Error::WrongArity { expected: 1, got: 0 });
        }
        let arcs: Vec<CircleArc> = sigmas.iter().map(|s| s.support()).collect();
        for i in 0..arcs.len() - 1 {
            if arcs[i].interiors_overlap(&arcs[i + 1]) {
                return Err(Error::OverlappingSupports(i + 1, i + 2));
            }
        }
        let branch = match t0 {
            Some(t) => {
                if arcs.iter().any(|a| a.contains_angle(t)) {
                    return Err(Error::BranchInsideSupport(t));
                }
                BranchCut::new(t)
            }
            // a lone generator has no chain to cut, so a covering support keeps the principal branch
            None => match auto_branch(&arcs) {
                Err(Error::NoBranchGap) if arcs.len() == 1 => crate::measure::principal_branch(),
                other => other?,
            },
        };
        let sigmas: Vec<Arc<CircleMeasure>> = sigmas.into_iter().map(|s| Arc::new(s.with_branch(branch))).collect();
        let mut mus = vec![sigmas[0].clone()];
        let mut chain = vec![None];
        for j in 1..sigmas.len() {
            let mut inner = sigmas[j].clone();
            for i in (1..j).rev() {
                inner = Arc::new(sigmas[i].with_factor(CircleFactor::ICaratheodory(inner))?);
            }
            let factor = CircleFactor::ICaratheodory(inner);
            mus.push(Arc::new(sigmas[0].with_factor(factor.clone())?));
            chain.push(Some(factor));
        }
        Ok(Self { sigmas, mus, chain, branch, flipped: false })
    }

    pub fn r(&self) -> usize {
        self.mus.len()
    }

    /// Generators; for a flipped system these are `(μ₂, σ₂)` of the original.
    pub fn sigmas(&self) -> &[Arc<CircleMeasure>] {
        &self.sigmas
    }

    pub fn mus(&self) -> &[Arc<CircleMeasure>] {
        &self.mus
    }

    pub fn chain(&self) -> &[Option<CircleFactor>] {
        &self.chain
    }

    pub fn branch(&self) -> BranchCut {
        self.branch
    }

    pub fn is_flipped(&self) -> bool {
        self.flipped
    }

    pub fn support(&self) -> CircleArc {
        self.mus[0].support()
    }

    /// Real value of `dμ_j/dμ₁` at `z`, with `j` counted from 0.
    pub fn rn(&self, j: usize, z: Complex64) -> f64 {
        self.chain[j].as_ref().map_or(1.0, |f| f.eval(z).re)
    }
}

/// Tolerance for the flipped first measure reproducing the original one.
pub const FLIP_MATCH_TOL: f64 = 1e-10;

/// `𝓝(σ₁,σ₂) ↦ (μ₂, μ̃₁)` with `dμ̃₁ = −i/F_{σ₂} dμ₂`.
pub fn flip_r2_uc(system: &CircleSystem) -> Result<CircleSystem> {
    if system.r() != 2 {
        return Err(Error::WrongArity { expected: 2, got: system.r() });
    }
    let sigma2 = system.sigmas[1].clone();
    let report = check_f_nonvanishing(&sigma2, &system.support(), F_GRID);
    if !report.nonvanishing {
        return Err(Error::FVanishes(report.min_abs));
    }
    let mu2 = system.mus[1].clone();
    let factor = CircleFactor::NegIReciprocal(sigma2.clone());
    let mu1_tilde = Arc::new(mu2.with_factor(factor.clone())?);
    let worst = mu1_tilde
        .masses()
        .iter()
        .zip(system.mus[0].masses())
        .map(|(a, b)| (a - b).abs() / b.abs())
        .fold(0.0, f64::max);
    if worst > FLIP_MATCH_TOL {
        return Err(Error::FlipMismatch(worst));
    }
    Ok(CircleSystem {
        sigmas: vec![mu2.clone(), sigma2],
        mus: vec![mu2, mu1_tilde],
        chain: vec![None, Some(factor)],
        branch: system.branch,
        flipped: true,
    })
}

#[derive(Debug, Clone)]
pub enum NikishinSystem {
    Real(RealSystem),
    Circle(CircleSystem),
}

impl NikishinSystem {
    pub fn r(&self) -> usize {
        match self {
            NikishinSystem::Real(s) => s.r(),
            NikishinSystem::Circle(s) => s.r(),
        }
    }

    pub fn as_real(&self) -> Result<&RealSystem> {
        match self {
            NikishinSystem::Real(s) => Ok(s),
            NikishinSystem::Circle(_) => Err(Error::KindMismatch { expected: "real-line" }),
        }
    }

    pub fn as_circle(&self) -> Result<&CircleSystem> {
        match self {
            NikishinSystem::Circle(s) => Ok(s),
            NikishinSystem::Real(_) => Err(Error::KindMismatch { expected: "circle" }),
        }
    }
}
