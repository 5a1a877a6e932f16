//! Command-line front end: moments, normality scans, identity checks and zeros as CSV.

pub mod spec;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use nikishin::detkit::{
    andreief_trial, cauchy_vandermonde_trial, phase_check_uc, sign_check_rl, SignVerdict, PHASE_TOL,
};
use nikishin::index::MultiIndex;
use nikishin::mop::{
    laurent_poly_uc, normality, perturbation_det_check, scan, type2_poly_rl, zeros, Polynomial, ScanMode, Verdict,
    MAX_TOTAL,
};
use nikishin::spectral::stripping_residual;
use nikishin::system::{flip_r2_rl, flip_r2_uc, NikishinSystem};
use nikishin::Error;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::spec::SystemSpec;

pub const EXIT_OK: i32 = 0;
pub const EXIT_SCHEMA: i32 = 2;
pub const EXIT_BUILD: i32 = 3;
pub const EXIT_VERDICT: i32 = 4;
pub const EXIT_IDENTITY: i32 = 5;

#[derive(Debug, Parser)]
#[command(name = "nikishin", version, about = "Normality scans and determinant identities for Nikishin systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Moments c_k of the measure μ_j, k = 0..kmax.
    Moments {
        #[arg(long)]
        spec: PathBuf,
        /// Measure number, counted from 1.
        #[arg(long, default_value_t = 1)]
        j: usize,
        #[arg(long)]
        kmax: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Verdict table over all nonzero indices up to a total degree.
    NormalityScan {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long = "max-degree", default_value_t = 8)]
        max_degree: usize,
        #[arg(long, value_enum, default_value_t = Mode::Theorem)]
        mode: Mode,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Random or scanned check of one identity, with PASS/FAIL against its tolerance.
    IdentityCheck {
        #[arg(value_enum)]
        which: Identity,
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Largest total degree for sign and phase scans.
        #[arg(long = "max-degree", default_value_t = 4)]
        max_degree: usize,
        /// Restrict sign or phase checks to one index, e.g. `3|1`.
        #[arg(long)]
        index: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Zeros of the type II (line) or Laurent (circle) polynomial at a normal index.
    Zeros {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        index: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Theorem,
    FullGrid,
    ExploreMixedParity,
}

impl From<Mode> for ScanMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Theorem => ScanMode::Theorem,
            Mode::FullGrid => ScanMode::FullGrid,
            Mode::ExploreMixedParity => ScanMode::ExploreMixedParity,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Identity {
    Andreief,
    CauchyVandermonde,
    Stripping,
    Flip,
    Phase,
    Sign,
    Perturbation,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Build(String),
    Verdict(String),
    /// The report was written; only the exit status remains.
    Identity,
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => EXIT_SCHEMA,
            Failure::Build(_) => EXIT_BUILD,
            Failure::Verdict(_) => EXIT_VERDICT,
            Failure::Identity => EXIT_IDENTITY,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::ZeroIndex | Error::WrongArity { .. } | Error::MixedParity(_) | Error::KindMismatch { .. } => {
                Failure::Usage(e.to_string())
            }
            _ => Failure::Build(e.to_string()),
        }
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

/// Runs one invocation and returns its exit status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(stderr, "{text}");
                EXIT_SCHEMA
            } else {
                let _ = write!(stdout, "{text}");
                EXIT_OK
            };
        }
    };
    match dispatch(cli.command, stdout) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            match &f {
                Failure::Usage(m) | Failure::Build(m) | Failure::Verdict(m) => {
                    let _ = writeln!(stderr, "error: {m}");
                }
                Failure::Identity => {}
            }
            f.code()
        }
    }
}

fn dispatch(command: Command, stdout: &mut dyn Write) -> Outcome<()> {
    match command {
        Command::Moments { spec, j, kmax, out } => {
            let system = load(&spec)?;
            emit(out.as_deref(), stdout, &moments_csv(&system, j, kmax)?)
        }
        Command::NormalityScan { spec, max_degree, mode, out } => {
            if max_degree > MAX_TOTAL {
                return Err(Failure::Usage(format!("--max-degree {max_degree} exceeds {MAX_TOTAL}")));
            }
            let system = load(&spec)?;
            let (text, singular) = scan_csv(&system, max_degree, mode.into());
            emit(out.as_deref(), stdout, &text)?;
            if mode == Mode::Theorem && singular > 0 {
                return Err(Failure::Verdict(format!("{singular} theorem-covered indices are SINGULAR")));
            }
            Ok(())
        }
        Command::IdentityCheck { which, spec, trials, seed, max_degree, index, out } => {
            let system = spec.as_deref().map(load).transpose()?;
            let index = index.map(|s| s.parse::<MultiIndex>()).transpose()?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let report = identity(which, system.as_ref(), trials, max_degree, index, &mut rng)?;
            let mut text = format!("identity: {}\ntrials: {trials}\nseed: {seed}\n", name(which));
            for line in &report.lines {
                text.push_str(line);
                text.push('\n');
            }
            text.push_str(&format!(
                "max_deviation: {}\ntolerance: {}\nresult: {}\n",
                num(report.deviation),
                num(report.tolerance),
                if report.passed() { "PASS" } else { "FAIL" }
            ));
            emit(out.as_deref(), stdout, &text)?;
            if report.passed() {
                Ok(())
            } else {
                Err(Failure::Identity)
            }
        }
        Command::Zeros { spec, index, out } => {
            let system = load(&spec)?;
            let n: MultiIndex = index.parse()?;
            emit(out.as_deref(), stdout, &zeros_csv(&system, &n)?)
        }
    }
}

fn load(path: &Path) -> Outcome<NikishinSystem> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    let spec = SystemSpec::parse(&text).map_err(|e| Failure::Usage(e.to_string()))?;
    spec.build().map_err(|e| Failure::Build(e.to_string()))
}

fn emit(path: Option<&Path>, stdout: &mut dyn Write, text: &str) -> Outcome<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Usage(format!("{}: {e}", p.display()))),
        None => stdout.write_all(text.as_bytes()).map_err(|e| Failure::Usage(e.to_string())),
    }
}

/// Seventeen significant digits.
pub fn num(x: f64) -> String {
    // drop the sign of zero
    format!("{:.16e}", if x == 0.0 { 0.0 } else { x })
}

fn complex(z: Complex64) -> String {
    format!("{:.16e}{:+.16e}i", z.re, z.im)
}

fn moments_csv(system: &NikishinSystem, j: usize, kmax: usize) -> Outcome<String> {
    if j == 0 || j > system.r() {
        return Err(Failure::Usage(format!("measure number {j} is outside 1..={}", system.r())));
    }
    let mut text = String::from("k,re,im\n");
    for k in 0..=kmax {
        let c = match system {
            NikishinSystem::Real(s) => Complex64::new(s.mus()[j - 1].moment(k)?, 0.0),
            NikishinSystem::Circle(s) => s.mus()[j - 1].moment(k as i64)?,
        };
        text.push_str(&format!("{k},{},{}\n", num(c.re), num(c.im)));
    }
    Ok(text)
}

/// CSV table and the number of SINGULAR rows.
fn scan_csv(system: &NikishinSystem, max_degree: usize, mode: ScanMode) -> (String, usize) {
    let rows = scan(system, &MultiIndex::all_up_to(system.r(), max_degree), mode);
    let is_circle = matches!(system, NikishinSystem::Circle(_));
    let mut text = String::from("index,det,scaled_min,verdict,residual,theorem_labels\n");
    let mut singular = 0;
    for row in &rows {
        let labels = row.labels.join(";");
        match &row.outcome {
            Ok(v) => {
                log::debug!("{}: log|det H| = {}, phase {}", row.index, v.det_raw.log_abs, v.det_raw.phase);
                if v.verdict == Verdict::Singular {
                    singular += 1;
                }
                let det = if is_circle { complex(v.det) } else { num(v.det.re) };
                let residual = v.residual.map_or_else(|| "NA".to_string(), num);
                text.push_str(&format!(
                    "{},{det},{},{},{residual},{labels}\n",
                    row.index,
                    num(v.scaled_min),
                    v.verdict
                ));
            }
            Err(e) => {
                log::warn!("{}: {e}", row.index);
                text.push_str(&format!("{},NA,NA,ERROR,NA,{labels}\n", row.index));
            }
        }
    }
    (text, singular)
}

fn zeros_csv(system: &NikishinSystem, n: &MultiIndex) -> Outcome<String> {
    let v = normality(system, n, false)?;
    if v.verdict != Verdict::Normal {
        return Err(Failure::Verdict(format!("index {n} is {}, not NORMAL", v.verdict)));
    }
    let roots = match system {
        NikishinSystem::Real(_) => zeros(Polynomial::Real(&type2_poly_rl(system, n)?)),
        NikishinSystem::Circle(_) => zeros(Polynomial::Laurent(&laurent_poly_uc(system, n)?)),
    };
    let mut text = String::from("re,im\n");
    for z in roots {
        text.push_str(&format!("{},{}\n", num(z.re), num(z.im)));
    }
    Ok(text)
}

fn name(which: Identity) -> &'static str {
    match which {
        Identity::Andreief => "andreief",
        Identity::CauchyVandermonde => "cauchy-vandermonde",
        Identity::Stripping => "stripping",
        Identity::Flip => "flip",
        Identity::Phase => "phase",
        Identity::Sign => "sign",
        Identity::Perturbation => "perturbation",
    }
}

struct Report {
    deviation: f64,
    tolerance: f64,
    /// Theorem-backed items that failed outright, independent of the deviation.
    failures: usize,
    lines: Vec<String>,
}

impl Report {
    fn new(tolerance: f64) -> Self {
        Self { deviation: 0.0, tolerance, failures: 0, lines: Vec::new() }
    }

    fn record(&mut self, deviation: f64) {
        self.deviation = self.deviation.max(deviation);
    }

    fn passed(&self) -> bool {
        self.failures == 0 && self.deviation <= self.tolerance
    }
}

fn need(system: Option<&NikishinSystem>, which: Identity) -> Outcome<&NikishinSystem> {
    system.ok_or_else(|| Failure::Usage(format!("identity {} needs --spec", name(which))))
}

fn identity(
    which: Identity,
    system: Option<&NikishinSystem>,
    trials: usize,
    max_degree: usize,
    index: Option<MultiIndex>,
    rng: &mut ChaCha8Rng,
) -> Outcome<Report> {
    match which {
        Identity::Andreief => {
            let mut r = Report::new(1e-12);
            for _ in 0..trials {
                r.record(andreief_trial(6, 8, rng)?);
            }
            Ok(r)
        }
        Identity::CauchyVandermonde => {
            let mut r = Report::new(1e-10);
            for _ in 0..trials {
                r.record(cauchy_vandermonde_trial(8, 1e-3, rng)?);
            }
            Ok(r)
        }
        Identity::Stripping => {
            let sys = need(system, which)?.as_real()?;
            let sigma = &sys.sigmas()[0];
            let support = sigma.support();
            let mut r = Report::new(1e-9);
            let mut done = 0;
            while done < trials {
                let z = Complex64::new(
                    rng.random_range(support.lo - 2.0..support.hi + 2.0),
                    rng.random_range(-2.0..2.0),
                );
                if support.distance(z) < 0.5 {
                    continue;
                }
                r.record(stripping_residual(sigma, z)?);
                done += 1;
            }
            Ok(r)
        }
        Identity::Flip => flip_report(need(system, which)?),
        Identity::Sign => {
            let system = need(system, which)?;
            let indices = match index {
                Some(n) => vec![n],
                None => MultiIndex::all_up_to(system.r(), max_degree)
                    .into_iter()
                    .filter(|n| n.satisfies_nikishin_condition())
                    .collect(),
            };
            let mut r = Report::new(0.0);
            for n in indices {
                let s = sign_check_rl(system, &n, trials, rng)?;
                let minority = s.positive.min(s.negative) + s.zero;
                let deviation = minority as f64 / trials.max(1) as f64;
                let scope = if s.theorem_applies { "theorem" } else { "exploratory" };
                r.lines.push(format!(
                    "index {n}: {} ({} positive, {} negative, {} zero, min scaled |U| {}) [{scope}]",
                    s.verdict,
                    s.positive,
                    s.negative,
                    s.zero,
                    num(s.min_scaled_abs)
                ));
                if s.theorem_applies {
                    r.record(deviation);
                    if s.verdict != SignVerdict::ConstantSign {
                        r.failures += 1;
                    }
                }
            }
            Ok(r)
        }
        Identity::Phase => {
            let system = need(system, which)?;
            let indices = match index {
                Some(n) => vec![n],
                None => MultiIndex::all_up_to(system.r(), max_degree)
                    .into_iter()
                    .filter(|n| n.same_parity() && n.is_nonincreasing())
                    .collect(),
            };
            let mut r = Report::new(PHASE_TOL);
            for n in indices {
                let p = phase_check_uc(system, &n, trials, rng)?;
                let theorem = n.same_parity() && n.is_nonincreasing();
                let l = p.l_mod4.map_or_else(|| "none".to_string(), |l| l.to_string());
                r.lines.push(format!(
                    "index {n}: phase deviation {}, mean phase {}, l mod 4 = {l} [{}]",
                    num(p.max_deviation),
                    num(p.mean_phase),
                    if theorem { "theorem" } else { "exploratory" }
                ));
                if theorem {
                    r.record(p.max_deviation);
                    if !p.confirmed() {
                        r.failures += 1;
                    }
                }
            }
            Ok(r)
        }
        Identity::Perturbation => {
            let system = need(system, which)?;
            system.as_real()?;
            let mut r = Report::new(1e-10);
            for _ in 0..trials {
                let s = rng.random_range(0..=2usize);
                let n2 = rng.random_range(s.max(1)..=8 - s.min(1));
                let n1 = rng.random_range(0..=(n2 - s).min(8 - n2));
                let k: Vec<f64> = (0..=s).map(|_| rng.random_range(-1.0..1.0)).collect();
                let n = MultiIndex::new(vec![n1, n2])?;
                r.record(perturbation_det_check(system, &n, &k)?.relative_difference);
            }
            Ok(r)
        }
    }
}

/// Line: `μ₁ = p·μ₂ + μ̃₁` on moments. Circle: the flipped first measure reproduces `μ₁`.
fn flip_report(system: &NikishinSystem) -> Outcome<Report> {
    const ORDER: usize = 10;
    match system {
        NikishinSystem::Real(sys) => {
            let flip = flip_r2_rl(sys)?;
            let (mu1, mu2) = (&sys.mus()[0], &sys.mus()[1]);
            let tilde = &flip.system.mus()[1];
            let mut r = Report::new(1e-8);
            let scale = (0..=ORDER).map(|k| mu1.moment_direct(k).abs()).fold(0.0, f64::max);
            for k in 0..=ORDER {
                let mut oracle = mu1.moment(k)?;
                for (i, p) in flip.perturbation.iter().enumerate() {
                    oracle -= p * mu2.moment(k + i)?;
                }
                r.record((tilde.moment(k)? - oracle).abs() / scale);
            }
            r.lines.push(format!("perturbation polynomial: {:?}", flip.perturbation));
            Ok(r)
        }
        NikishinSystem::Circle(sys) => {
            let flip = flip_r2_uc(sys)?;
            let mut r = Report::new(1e-10);
            let scale = sys.mus()[0].moment(0)?.norm();
            for k in -(ORDER as i64)..=ORDER as i64 {
                r.record((flip.mus()[1].moment(k)? - sys.mus()[0].moment(k)?).norm() / scale);
            }
            Ok(r)
        }
    }
}
