//! Monte Carlo estimation of the asymptotic constant `C(a)` for `a > 0`.
//!
//! The truncated constant is
//!
//! ```text
//! C(a, Λ) = ∫_{R²} P(∃ (t, s) ∈ [0, Λ]³: B*(t) - (1, a) t + γ (B(s) - (1, a) s) > x) e^{x1 + a x2} dx
//! ```
//!
//! The `s` coordinates range independently of `t`, so the `s`-supremum only
//! contributes the constant `γ_i S_i` with `S_i = sup_{s ≤ Λ} (B_i(s) - a_i s)`.
//! For one sample path the exceedance set in `x` is the staircase
//! `∪_t (-∞, A1(t)) × (-∞, A2(t))`, and exchanging expectation and integral
//! turns `C(a, Λ)` into the mean of the closed-form integral of
//! `e^{x1 + a x2}` over that staircase. No quadrature in `x` is needed.

use std::cmp::Ordering;

use rand::Rng;

use crate::error::{check_tax, Result, RuinError};
use crate::paths::{check_grid, fill_brownian, open_unit, sup_bridged, SeedSpec};
use crate::reduce::{ordered_reduce, Moments};

/// Random streams owned by one frontier sample.
const SLOTS: u64 = 8;
const SLOT_FIELD: [u64; 2] = [0, 1];
const SLOT_SUP_NOISE: [u64; 2] = [2, 4];
const SLOT_SUP_BRIDGE: [u64; 2] = [3, 5];
const SLOT_SUP_EXACT: [u64; 2] = [6, 7];

/// Grid points per unit of `Λ` when none is given.
pub const DEFAULT_POINTS_PER_UNIT: usize = 2048;

/// How the `s`-suprema `S_i` are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SupMode {
    /// Bridge-refined grid supremum of an independent path on `[0, Λ]`.
    TruncatedSup,
    /// Exact exponential law of the supremum over `[0, ∞)`.
    ExactExponentialSup,
}

impl SupMode {
    pub fn as_str(self) -> &'static str {
        match self {
            SupMode::TruncatedSup => "truncated_sup",
            SupMode::ExactExponentialSup => "exact_exponential_sup",
        }
    }
}

impl std::str::FromStr for SupMode {
    type Err = RuinError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "truncated_sup" | "truncated" => Ok(SupMode::TruncatedSup),
            "exact_exponential_sup" | "exact" => Ok(SupMode::ExactExponentialSup),
            other => Err(RuinError::InvalidInput(format!("unknown sup mode {other:?}"))),
        }
    }
}

/// Parameters of the limiting field behind `C(a, Λ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrontierConfig {
    pub a: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub lambda: f64,
    pub n_grid: usize,
    pub mode: SupMode,
}

impl FrontierConfig {
    /// Uses the default grid of 2048 points per unit of `Λ`.
    pub fn new(a: f64, gamma: [f64; 2], lambda: f64, mode: SupMode) -> Self {
        FrontierConfig {
            a,
            gamma1: gamma[0],
            gamma2: gamma[1],
            lambda,
            n_grid: default_grid(lambda),
            mode,
        }
    }

    pub fn with_grid(self, n_grid: usize) -> Self {
        FrontierConfig { n_grid, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.a.is_finite()) {
            return Err(RuinError::WrongBranch(format!(
                "numerical constant needs a > 0, got {}",
                self.a
            )));
        }
        check_tax(self.gamma1)?;
        check_tax(self.gamma2)?;
        check_grid(self.n_grid, self.lambda)
    }

    fn drifts(&self) -> [f64; 2] {
        [1.0, self.a]
    }

    fn gammas(&self) -> [f64; 2] {
        [self.gamma1, self.gamma2]
    }
}

/// `ceil(2048 Λ)` grid intervals, at least one.
pub fn default_grid(lambda: f64) -> usize {
    ((DEFAULT_POINTS_PER_UNIT as f64 * lambda).ceil() as usize).max(1)
}

/// One draw of `A_i(t_k) = B*_i(t_k) - a_i t_k + γ_i S_i` on `[0, Λ]`, with
/// `a_1 = 1` and `a_2 = a`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontierSample {
    pub lambda: f64,
    pub n_grid: usize,
    pub a1: Vec<f64>,
    pub a2: Vec<f64>,
    /// The suprema `S_1`, `S_2`.
    pub sup: [f64; 2],
}

/// Mean and standard error of the per-path staircase integrals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n_paths: usize,
    pub lambda: f64,
    pub mode: SupMode,
}

fn exponential_sup<R: Rng + ?Sized>(beta: f64, rng: &mut R) -> f64 {
    -open_unit(rng).ln() / (2.0 * beta)
}

/// Draws `sup_{t ≥ 0} (B(t) - β t)`, which is exponential with mean `1/(2β)`.
pub fn sample_sup_drifted_exact(beta: f64, seed: SeedSpec) -> Result<f64> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(RuinError::Divergent(format!(
            "supremum of B(t) - {beta} t is infinite"
        )));
    }
    Ok(exponential_sup(beta, &mut seed.rng()))
}

/// Samples one frontier. `seed.stream_index` identifies the sample; its
/// random streams are `stream_index * 8 .. stream_index * 8 + 8`.
///
/// In truncated mode a sample with a larger `Λ` (same grid spacing) extends
/// the one with the smaller `Λ`: every path is a prefix of the longer one.
pub fn sample_frontier(cfg: &FrontierConfig, seed: SeedSpec) -> Result<FrontierSample> {
    cfg.validate()?;
    let stream = |slot| SeedSpec::for_path(seed.master_seed, seed.stream_index, SLOTS, slot).rng();
    let dt = cfg.lambda / cfg.n_grid as f64;
    let drifts = cfg.drifts();
    let gammas = cfg.gammas();

    let mut sup = [0.0; 2];
    let mut scratch = Vec::new();
    for i in 0..2 {
        if gammas[i] == 0.0 {
            continue;
        }
        sup[i] = match cfg.mode {
            SupMode::ExactExponentialSup => exponential_sup(drifts[i], &mut stream(SLOT_SUP_EXACT[i])),
            SupMode::TruncatedSup => {
                scratch.resize(cfg.n_grid + 1, 0.0);
                fill_brownian(&mut stream(SLOT_SUP_NOISE[i]), -drifts[i], dt, &mut scratch);
                sup_bridged(&scratch, dt, &mut stream(SLOT_SUP_BRIDGE[i]))
            }
        };
    }

    let mut field = [vec![0.0; cfg.n_grid + 1], vec![0.0; cfg.n_grid + 1]];
    for i in 0..2 {
        fill_brownian(&mut stream(SLOT_FIELD[i]), -drifts[i], dt, &mut field[i]);
        let shift = gammas[i] * sup[i];
        if shift != 0.0 {
            field[i].iter_mut().for_each(|v| *v += shift);
        }
    }
    let [a1, a2] = field;
    Ok(FrontierSample {
        lambda: cfg.lambda,
        n_grid: cfg.n_grid,
        a1,
        a2,
        sup,
    })
}

/// Non-dominated points of `(a1[k], a2[k])`, ordered by decreasing first
/// coordinate; the second coordinate is then strictly increasing.
pub fn pareto_frontier(a1: &[f64], a2: &[f64]) -> Result<Vec<(f64, f64)>> {
    if a1.is_empty() || a1.len() != a2.len() {
        return Err(RuinError::InvalidInput(format!(
            "staircase needs two nonempty arrays of equal length, got {} and {}",
            a1.len(),
            a2.len()
        )));
    }
    if a1.iter().chain(a2).any(|v| !v.is_finite()) {
        return Err(RuinError::InvalidInput("staircase values must be finite".into()));
    }
    // Anything left of the highest point or below the rightmost point is
    // dominated by it; dropping those first keeps the sort short.
    let argmax = |v: &[f64]| {
        v.iter()
            .enumerate()
            .fold(0, |best, (k, x)| if *x > v[best] { k } else { best })
    };
    let right = argmax(a1);
    let top = argmax(a2);
    let (min_first, min_second) = (a1[top], a2[right]);
    let mut pts: Vec<(f64, f64)> = a1
        .iter()
        .zip(a2)
        .map(|(&x, &y)| (x, y))
        .filter(|&(x, y)| x >= min_first && y >= min_second)
        .collect();
    pts.sort_by(|p, q| match q.0.total_cmp(&p.0) {
        Ordering::Equal => q.1.total_cmp(&p.1),
        ord => ord,
    });
    let mut frontier: Vec<(f64, f64)> = Vec::with_capacity(pts.len().min(64));
    for p in pts {
        match frontier.last() {
            Some(last) if p.1 <= last.1 => {}
            _ => frontier.push(p),
        }
    }
    Ok(frontier)
}

/// `∫ e^{x1 + a x2} dx` over `∪_k (-∞, a1[k]) × (-∞, a2[k])`.
///
/// With the frontier `(u_i, v_i)` sorted by decreasing `u`, the region is cut
/// into horizontal bands and the integral is
/// `(1/a) [e^{u_1 + a v_1} + Σ_{i≥2} e^{u_i} (e^{a v_i} - e^{a v_{i-1}})]`.
pub fn staircase_exp_integral(a1: &[f64], a2: &[f64], a: f64) -> Result<f64> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(RuinError::InvalidInput(format!(
            "weight exponent must be positive, got {a}"
        )));
    }
    let frontier = pareto_frontier(a1, a2)?;
    let (u0, v0) = frontier[0];
    let mut total = (u0 + a * v0).exp();
    for w in frontier.windows(2) {
        let (_, v_prev) = w[0];
        let (u, v) = w[1];
        // e^{u} (e^{a v} - e^{a v_prev}) without cancellation
        total += (u + a * v).exp() * -(a * (v_prev - v)).exp_m1();
    }
    Ok(total / a)
}

/// The staircase integral of one frontier sample.
pub fn path_integral(cfg: &FrontierConfig, seed: SeedSpec) -> Result<f64> {
    let s = sample_frontier(cfg, seed)?;
    staircase_exp_integral(&s.a1, &s.a2, cfg.a)
}

/// Estimates `C(a, Λ)` (or `C(a)` in exact mode with `Λ` large) from
/// `n_paths` independent frontiers. Path `p` uses stream index `p`, and the
/// result does not depend on `workers`.
pub fn estimate_constant(
    cfg: &FrontierConfig,
    n_paths: usize,
    seed: u64,
    workers: usize,
) -> Result<ConstantEstimate> {
    cfg.validate()?;
    if n_paths < 2 {
        return Err(RuinError::InvalidInput(format!(
            "need at least 2 paths for a standard error, got {n_paths}"
        )));
    }
    let moments = ordered_reduce(n_paths, workers, |range| {
        let mut m = Moments::default();
        for p in range {
            // validated above, so sampling cannot fail
            let v = path_integral(cfg, SeedSpec::new(seed, p as u64)).unwrap_or(f64::NAN);
            m.push(v);
        }
        m
    })?;
    Ok(ConstantEstimate {
        mean: moments.mean(),
        stderr: moments.stderr(),
        n_paths,
        lambda: cfg.lambda,
        mode: cfg.mode,
    })
}
