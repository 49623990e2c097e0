//! Monte Carlo estimators of the simultaneous ruin probability.
//!
//! Ruin means both coordinates exceed their barriers at the same grid time.
//! The tilted estimator adds a linear drift `μ_i t` to each Brownian motion
//! and reweights by `L = exp(-Σ μ_i W_i(T) - Σ μ_i² T / 2)`, where `W_i` is the
//! driftless noise actually simulated. The default drift points at the most
//! likely terminal value on the ruin set, which keeps the estimator's relative
//! error bounded in the regime where crude sampling sees no events at all.
//!
//! Path `p`, coordinate `i` draws its Gaussian increments from stream
//! `4p + 2i` and its bridge uniforms from stream `4p + 2i + 1`, so estimates
//! are reproducible bit for bit and independent of the worker count.

use rand::Rng;

use crate::closedform::{asymptotic_psi, asymptotic_tail_form, constant_nonpositive_a, AsymptoticApprox};
use crate::constant::{default_grid, estimate_constant, FrontierConfig, SupMode};
use crate::error::{check_finite, check_tax, Result, RuinError};
use crate::model::{Branch, CanonicalProblem, ModelParams};
use crate::paths::{
    check_grid, drift_in_place, fill_brownian, reflect_bridged, reflect, reflect_in_place, drifted,
    GridPath, SeedSpec, StreamRng,
};
use crate::reduce::{ordered_reduce, Moments};

pub const DEFAULT_GRID: usize = 4096;
pub const MIN_PATHS: usize = 100;
const STREAMS_PER_PATH: u64 = 4;
const Z95: f64 = 1.959_963_984_540_054;

/// The event `∃ t_k ∈ [0, T]: X_1(t_k) > u_1, X_2(t_k) > u_2` on a grid.
///
/// Unlike [`CanonicalProblem`] the barriers may have any sign and the horizon
/// is free, which is what self-similarity checks need.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RuinEvent {
    pub barriers: [f64; 2],
    pub c: [f64; 2],
    pub gamma: [f64; 2],
    pub horizon: f64,
}

impl RuinEvent {
    pub fn from_params(p: &ModelParams) -> Result<Self> {
        p.validate()?;
        Ok(RuinEvent {
            barriers: [p.u1, p.u2],
            c: [p.c1, p.c2],
            gamma: [p.gamma1, p.gamma2],
            horizon: p.horizon,
        })
    }

    pub fn validate(&self) -> Result<()> {
        for i in 0..2 {
            check_tax(self.gamma[i])?;
            check_finite("c", self.c[i])?;
            check_finite("barrier", self.barriers[i])?;
        }
        if self.horizon > 0.0 && self.horizon.is_finite() {
            Ok(())
        } else {
            Err(RuinError::InvalidHorizon(self.horizon))
        }
    }
}

impl From<&CanonicalProblem> for RuinEvent {
    fn from(p: &CanonicalProblem) -> Self {
        RuinEvent {
            barriers: p.barriers(),
            c: p.c(),
            gamma: p.gamma(),
            horizon: 1.0,
        }
    }
}

impl From<CanonicalProblem> for RuinEvent {
    fn from(p: CanonicalProblem) -> Self {
        RuinEvent::from(&p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EstimatorKind {
    Crude,
    Tilted,
}

impl EstimatorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EstimatorKind::Crude => "crude",
            EstimatorKind::Tilted => "tilted",
        }
    }
}

impl std::str::FromStr for EstimatorKind {
    type Err = RuinError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "crude" => Ok(EstimatorKind::Crude),
            "tilted" => Ok(EstimatorKind::Tilted),
            other => Err(RuinError::InvalidInput(format!("unknown estimator {other:?}"))),
        }
    }
}

/// A probability estimate with its 95% interval.
///
/// Crude estimates use the Wilson score interval; tilted ones a normal
/// interval around the weighted mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub p_hat: f64,
    pub stderr: f64,
    pub n_paths: usize,
    pub ci95_low: f64,
    pub ci95_high: f64,
    pub estimator: EstimatorKind,
    /// Effective sample size `(Σ w)² / Σ w²` of the nonzero contributions.
    pub ess: f64,
}

impl Estimate {
    fn from_moments(m: &Moments, estimator: EstimatorKind) -> Estimate {
        let n = m.count as f64;
        let p_hat = m.mean();
        let stderr = m.stderr();
        let (lo, hi) = match estimator {
            EstimatorKind::Crude => wilson_interval(p_hat, n),
            EstimatorKind::Tilted => (p_hat - Z95 * stderr, p_hat + Z95 * stderr),
        };
        Estimate {
            p_hat,
            stderr,
            n_paths: m.count as usize,
            ci95_low: lo,
            ci95_high: hi,
            estimator,
            ess: if m.sum_sq > 0.0 { m.sum * m.sum / m.sum_sq } else { 0.0 },
        }
    }
}

fn wilson_interval(p: f64, n: f64) -> (f64, f64) {
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).max(0.0).sqrt();
    let lo = (center - half).max(0.0).min(p);
    let hi = (center + half).min(1.0).max(p);
    (lo, hi)
}

/// Sampling controls shared by the estimators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McConfig {
    pub n_paths: usize,
    pub n_grid: usize,
    /// Refine the running infimum with Brownian-bridge minima.
    pub refine: bool,
    pub seed: u64,
    pub workers: usize,
}

impl McConfig {
    pub fn new(n_paths: usize, seed: u64) -> Self {
        McConfig {
            n_paths,
            n_grid: DEFAULT_GRID,
            refine: false,
            seed,
            workers: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_paths < MIN_PATHS {
            return Err(RuinError::InvalidInput(format!(
                "need at least {MIN_PATHS} paths, got {}",
                self.n_paths
            )));
        }
        check_grid(self.n_grid, 1.0)
    }
}

/// Tilting drift aimed at the dominant point: `μ_1 = (u_1 + c_1 T)/T` and, when
/// the second barrier is positive, `μ_2 = (u_2 + c_2 T)/T`; otherwise the
/// second coordinate is left alone because its event does not decay with `u`.
pub fn default_drift(event: &RuinEvent) -> [f64; 2] {
    let h = event.horizon;
    let first = (event.barriers[0] + event.c[0] * h) / h;
    let second = if event.barriers[1] > 0.0 {
        (event.barriers[1] + event.c[1] * h) / h
    } else {
        0.0
    };
    [first, second]
}

/// Whether two paths are ruined together on their common grid. The inputs are
/// the driftless Brownian paths `B_1`, `B_2`; premiums and reflection are
/// applied here. With `refine`, the infima of both coordinates use bridge
/// minima drawn from the supplied generator, first coordinate first.
pub fn ruin_indicator<R: Rng + ?Sized>(
    event: &RuinEvent,
    b1: &GridPath,
    b2: &GridPath,
    refine: Option<&mut R>,
) -> Result<bool> {
    event.validate()?;
    if !b1.same_grid(b2) || b1.horizon() != event.horizon {
        return Err(RuinError::InvalidInput(
            "paths must share the event's horizon and grid".into(),
        ));
    }
    let d1 = drifted(b1, event.c[0]);
    let d2 = drifted(b2, event.c[1]);
    let (x1, x2) = match refine {
        Some(rng) => (
            reflect_bridged(&d1, event.gamma[0], rng)?,
            reflect_bridged(&d2, event.gamma[1], rng)?,
        ),
        None => (reflect(&d1, event.gamma[0])?, reflect(&d2, event.gamma[1])?),
    };
    let [u1, u2] = event.barriers;
    Ok(x1
        .values()
        .iter()
        .zip(x2.values())
        .any(|(&a, &b)| a > u1 && b > u2))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Payoff {
    Ruin,
    One,
}

struct Scratch {
    x: Vec<f64>,
    hits: Vec<usize>,
}

/// Simulates `X_i` for one path into `out` and returns the noise endpoint.
fn simulate_coordinate(
    event: &RuinEvent,
    cfg: &McConfig,
    drift: f64,
    coord: usize,
    path: u64,
    out: &mut [f64],
) -> f64 {
    let dt = event.horizon / cfg.n_grid as f64;
    let slot = 2 * coord as u64;
    let mut rng = SeedSpec::for_path(cfg.seed, path, STREAMS_PER_PATH, slot).rng();
    let noise = fill_brownian(&mut rng, drift, dt, out);
    drift_in_place(out, event.c[coord], event.horizon);
    let gamma = event.gamma[coord];
    if cfg.refine {
        let mut bridge = SeedSpec::for_path(cfg.seed, path, STREAMS_PER_PATH, slot + 1).rng();
        reflect_in_place(out, gamma, dt, Some(&mut bridge));
    } else {
        reflect_in_place::<StreamRng>(out, gamma, dt, None);
    }
    noise
}

fn path_value(
    event: &RuinEvent,
    cfg: &McConfig,
    drift: [f64; 2],
    payoff: Payoff,
    path: u64,
    s: &mut Scratch,
) -> f64 {
    let [u1, u2] = event.barriers;
    let w1 = simulate_coordinate(event, cfg, drift[0], 0, path, &mut s.x);
    s.hits.clear();
    s.hits
        .extend(s.x.iter().enumerate().filter(|(_, &v)| v > u1).map(|(k, _)| k));
    if payoff == Payoff::Ruin && s.hits.is_empty() {
        return 0.0;
    }
    let w2 = simulate_coordinate(event, cfg, drift[1], 1, path, &mut s.x);
    let h = event.horizon;
    let ln_weight = -(drift[0] * w1 + 0.5 * drift[0] * drift[0] * h)
        - (drift[1] * w2 + 0.5 * drift[1] * drift[1] * h);
    let weight = ln_weight.exp();
    match payoff {
        Payoff::One => weight,
        Payoff::Ruin if s.hits.iter().any(|&k| s.x[k] > u2) => weight,
        Payoff::Ruin => 0.0,
    }
}

fn run(
    event: &RuinEvent,
    cfg: &McConfig,
    drift: [f64; 2],
    payoff: Payoff,
    estimator: EstimatorKind,
) -> Result<Estimate> {
    event.validate()?;
    cfg.validate()?;
    if drift.iter().any(|d| !d.is_finite()) {
        return Err(RuinError::InvalidInput(format!("drift must be finite, got {drift:?}")));
    }
    let moments = ordered_reduce(cfg.n_paths, cfg.workers, |range| {
        let mut s = Scratch {
            x: vec![0.0; cfg.n_grid + 1],
            hits: Vec::new(),
        };
        let mut m = Moments::default();
        for p in range {
            m.push(path_value(event, cfg, drift, payoff, p as u64, &mut s));
        }
        m
    })?;
    Ok(Estimate::from_moments(&moments, estimator))
}

/// Plain Monte Carlo: the fraction of ruined paths with a Wilson interval.
pub fn crude_mc(event: impl Into<RuinEvent>, cfg: &McConfig) -> Result<Estimate> {
    run(&event.into(), cfg, [0.0, 0.0], Payoff::Ruin, EstimatorKind::Crude)
}

/// Importance sampling with linear drift `drift` (default: [`default_drift`]).
/// A zero drift reproduces [`crude_mc`] exactly.
pub fn tilted_mc(event: impl Into<RuinEvent>, cfg: &McConfig, drift: Option<[f64; 2]>) -> Result<Estimate> {
    let event = event.into();
    let drift = drift.unwrap_or_else(|| default_drift(&event));
    run(&event, cfg, drift, Payoff::Ruin, EstimatorKind::Tilted)
}

/// Mean of the likelihood ratio alone, which must be 1 for any drift.
pub fn likelihood_mean(event: impl Into<RuinEvent>, cfg: &McConfig, drift: Option<[f64; 2]>) -> Result<Estimate> {
    let event = event.into();
    let drift = drift.unwrap_or_else(|| default_drift(&event));
    run(&event, cfg, drift, Payoff::One, EstimatorKind::Tilted)
}

/// Where the constant for `a > 0` comes from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConstantSource {
    Given(f64),
    Estimate {
        lambda: f64,
        n_grid: Option<usize>,
        mode: SupMode,
        n_paths: usize,
        seed: u64,
        workers: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompareConfig {
    pub estimator: EstimatorKind,
    /// Tilting drift override; `None` uses [`default_drift`] per row.
    pub drift: Option<[f64; 2]>,
    pub mc: McConfig,
    /// Required for `a > 0`; ignored for `a <= 0` where the closed form is used.
    pub constant: Option<ConstantSource>,
}

/// One line of the validation table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonRow {
    pub u: f64,
    pub mc: Estimate,
    /// Density form of the approximation.
    pub asym: f64,
    pub ln_asym: f64,
    /// `p_hat / asym`, NaN when the approximation underflows to 0.
    pub ratio: f64,
    pub constant: f64,
    pub branch: Branch,
    /// Tail form of the approximation.
    pub tail_form: f64,
    /// `asym / tail_form`, which tends to 1.
    pub form_ratio: f64,
}

fn ratio_from_logs(p: f64, ln_q: f64) -> f64 {
    if p > 0.0 {
        (p.ln() - ln_q).exp()
    } else if p == 0.0 && ln_q.is_finite() {
        0.0
    } else {
        f64::NAN
    }
}

/// Resolves `C(a)` for the template's branch.
pub fn resolve_constant(template: &CanonicalProblem, source: Option<&ConstantSource>) -> Result<f64> {
    if template.a <= 0.0 {
        return constant_nonpositive_a(template.a, template.gamma1, template.c2);
    }
    match source {
        None => Err(RuinError::InvalidInput(
            "a > 0 needs a constant or constant-estimation settings".into(),
        )),
        Some(ConstantSource::Given(c)) => Ok(*c),
        Some(&ConstantSource::Estimate {
            lambda,
            n_grid,
            mode,
            n_paths,
            seed,
            workers,
        }) => {
            let cfg = FrontierConfig::new(template.a, template.gamma(), lambda, mode)
                .with_grid(n_grid.unwrap_or_else(|| default_grid(lambda)));
            Ok(estimate_constant(&cfg, n_paths, seed, workers)?.mean)
        }
    }
}

/// Runs the configured estimator at every `u` (same seed, so rows are paired)
/// and sets it against the large-`u` approximation.
pub fn compare_asymptotic(
    template: &CanonicalProblem,
    u_list: &[f64],
    cfg: &CompareConfig,
) -> Result<Vec<ComparisonRow>> {
    if u_list.is_empty() {
        return Err(RuinError::InvalidInput("u list is empty".into()));
    }
    if u_list.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(RuinError::InvalidInput("u list must be strictly increasing".into()));
    }
    template.validate()?;
    let constant = resolve_constant(template, cfg.constant.as_ref())?;
    u_list
        .iter()
        .map(|&u| {
            let prob = template.with_u(u)?;
            let mc = match cfg.estimator {
                EstimatorKind::Crude => crude_mc(prob, &cfg.mc)?,
                EstimatorKind::Tilted => tilted_mc(prob, &cfg.mc, cfg.drift)?,
            };
            let asym: AsymptoticApprox = asymptotic_psi(&prob, constant)?;
            let tail = asymptotic_tail_form(&prob, constant)?;
            Ok(ComparisonRow {
                u,
                mc,
                asym: asym.value,
                ln_asym: asym.ln_value,
                ratio: ratio_from_logs(mc.p_hat, asym.ln_value),
                constant,
                branch: asym.branch,
                tail_form: tail.value,
                form_ratio: (asym.ln_value - tail.ln_value).exp(),
            })
        })
        .collect()
}
