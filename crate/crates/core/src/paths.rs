//! Grid simulation of Brownian paths and of the γ-reflected transform.
//!
//! Paths are sampled exactly in distribution at grid points. The running
//! infimum can optionally be refined between grid points by drawing the
//! minimum of the Brownian bridge joining consecutive values, which removes
//! most of the upward bias a grid minimum has.
//!
//! Randomness comes from ChaCha8 keyed by a master seed, with one 64-bit
//! stream per [`SeedSpec::stream_index`]. Streams are independent and
//! addressable, so any path can be regenerated without touching the others.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{check_tax, Result, RuinError};

pub type StreamRng = ChaCha8Rng;

/// Addresses one independent random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub stream_index: u64,
}

impl SeedSpec {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        SeedSpec {
            master_seed,
            stream_index,
        }
    }

    /// Stream `slot` of path `path` when every path owns `slots` streams.
    pub fn for_path(master_seed: u64, path: u64, slots: u64, slot: u64) -> Self {
        debug_assert!(slot < slots);
        SeedSpec::new(master_seed, path * slots + slot)
    }

    pub fn rng(&self) -> StreamRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_index);
        rng
    }
}

/// Uniform draw on `(0, 1]`, safe to take the logarithm of.
#[inline]
pub fn open_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    1.0 - rng.random::<f64>()
}

/// Process values on the grid `t_k = k * horizon / n_steps`, `k = 0..=n_steps`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPath {
    horizon: f64,
    values: Vec<f64>,
}

impl GridPath {
    pub fn new(horizon: f64, values: Vec<f64>) -> Result<Self> {
        check_grid(values.len().saturating_sub(1), horizon)?;
        if values[0] != 0.0 {
            return Err(RuinError::InvalidInput(format!(
                "path must start at 0, got {}",
                values[0]
            )));
        }
        Ok(GridPath { horizon, values })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn n_steps(&self) -> usize {
        self.values.len() - 1
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.n_steps() as f64
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn time(&self, k: usize) -> f64 {
        grid_time(self.horizon, self.n_steps(), k)
    }

    /// True when both paths share horizon and step count.
    pub fn same_grid(&self, other: &GridPath) -> bool {
        self.horizon == other.horizon && self.values.len() == other.values.len()
    }

    fn map_values(&self, values: Vec<f64>) -> GridPath {
        GridPath {
            horizon: self.horizon,
            values,
        }
    }
}

#[inline]
fn grid_time(horizon: f64, n_steps: usize, k: usize) -> f64 {
    horizon * k as f64 / n_steps as f64
}

pub(crate) fn check_grid(n_steps: usize, horizon: f64) -> Result<()> {
    if n_steps == 0 {
        return Err(RuinError::InvalidGrid("n_steps must be at least 1".into()));
    }
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(RuinError::InvalidGrid(format!(
            "horizon must be positive, got {horizon}"
        )));
    }
    Ok(())
}

/// Standard Brownian motion on a uniform grid.
pub fn sample_bm(n_steps: usize, horizon: f64, seed: SeedSpec) -> Result<GridPath> {
    check_grid(n_steps, horizon)?;
    let mut values = vec![0.0; n_steps + 1];
    fill_brownian(&mut seed.rng(), 0.0, horizon / n_steps as f64, &mut values);
    Ok(GridPath { horizon, values })
}

/// Fills `out` with a Brownian path with linear drift `drift` started at 0.
///
/// Returns the endpoint of the driftless part, which is what a likelihood
/// ratio for the drift needs.
pub fn fill_brownian<R: Rng + ?Sized>(rng: &mut R, drift: f64, dt: f64, out: &mut [f64]) -> f64 {
    let sd = dt.sqrt();
    let step = drift * dt;
    let mut level = 0.0;
    let mut noise = 0.0;
    out[0] = 0.0;
    for v in out[1..].iter_mut() {
        let dw = sd * rng.sample::<f64, _>(StandardNormal);
        noise += dw;
        level += step + dw;
        *v = level;
    }
    noise
}

/// `values[k] - c t_k`.
pub fn drifted(path: &GridPath, c: f64) -> GridPath {
    let mut values = path.values.clone();
    drift_in_place(&mut values, c, path.horizon);
    path.map_values(values)
}

pub fn drift_in_place(values: &mut [f64], c: f64, horizon: f64) {
    if c == 0.0 {
        return;
    }
    let n = values.len() - 1;
    for (k, v) in values.iter_mut().enumerate() {
        *v -= c * grid_time(horizon, n, k);
    }
}

/// Running minimum evaluated at grid points.
pub fn running_inf(path: &GridPath) -> GridPath {
    let mut values = path.values.clone();
    running_inf_in_place(&mut values);
    path.map_values(values)
}

pub fn running_inf_in_place(values: &mut [f64]) {
    let mut m = f64::INFINITY;
    for v in values.iter_mut() {
        m = m.min(*v);
        *v = m;
    }
}

/// Running minimum where each interval contributes the sampled minimum of the
/// Brownian bridge between its endpoints.
pub fn running_inf_bridged<R: Rng + ?Sized>(path: &GridPath, rng: &mut R) -> GridPath {
    let dt = path.dt();
    let v = &path.values;
    let mut out = Vec::with_capacity(v.len());
    let mut m = v[0];
    out.push(m);
    for w in v.windows(2) {
        m = m.min(bridge_min(w[0], w[1], dt, open_unit(rng)));
        out.push(m);
    }
    path.map_values(out)
}

/// `in[k] - γ inf_{j <= k} in[j]` for an already drifted path.
pub fn reflect(drifted_path: &GridPath, gamma: f64) -> Result<GridPath> {
    check_tax(gamma)?;
    let mut values = drifted_path.values.clone();
    reflect_in_place::<StreamRng>(&mut values, gamma, drifted_path.dt(), None);
    Ok(drifted_path.map_values(values))
}

/// As [`reflect`], with the infimum refined by Brownian-bridge minima.
pub fn reflect_bridged<R: Rng + ?Sized>(
    drifted_path: &GridPath,
    gamma: f64,
    rng: &mut R,
) -> Result<GridPath> {
    check_tax(gamma)?;
    let mut values = drifted_path.values.clone();
    reflect_in_place(&mut values, gamma, drifted_path.dt(), Some(rng));
    Ok(drifted_path.map_values(values))
}

/// In-place γ-reflection. With `bridge` set, the infimum includes one sampled
/// bridge minimum per interval. No random numbers are drawn when `gamma == 0`.
pub fn reflect_in_place<R: Rng + ?Sized>(
    values: &mut [f64],
    gamma: f64,
    dt: f64,
    bridge: Option<&mut R>,
) {
    if gamma == 0.0 {
        return;
    }
    let mut prev = values[0];
    let mut m = prev;
    values[0] = prev - gamma * m;
    match bridge {
        None => {
            for v in values[1..].iter_mut() {
                m = m.min(*v);
                *v -= gamma * m;
            }
        }
        Some(rng) => {
            for v in values[1..].iter_mut() {
                let y = *v;
                m = m.min(bridge_min(prev, y, dt, open_unit(rng)));
                prev = y;
                *v = y - gamma * m;
            }
        }
    }
}

/// Grid supremum with each interval contributing its sampled bridge maximum.
pub fn sup_bridged<R: Rng + ?Sized>(values: &[f64], dt: f64, rng: &mut R) -> f64 {
    let mut s = values[0];
    for w in values.windows(2) {
        s = s.max(-bridge_min(-w[0], -w[1], dt, open_unit(rng)));
    }
    s
}

/// Minimum of a Brownian bridge from `x` to `y` over an interval of length
/// `dt`, by inversion of `P(min < b) = exp(-2 (x - b)(y - b) / dt)`.
pub fn bridge_min_sample(x: f64, y: f64, dt: f64, unif: f64) -> Result<f64> {
    if !(dt > 0.0) {
        return Err(RuinError::InvalidGrid(format!(
            "bridge interval must be positive, got {dt}"
        )));
    }
    if !(unif > 0.0 && unif <= 1.0) {
        return Err(RuinError::InvalidInput(format!(
            "uniform draw must lie in (0, 1], got {unif}"
        )));
    }
    Ok(bridge_min(x, y, dt, unif))
}

#[inline]
fn bridge_min(x: f64, y: f64, dt: f64, unif: f64) -> f64 {
    let d = y - x;
    let m = 0.5 * (x + y - (d * d - 2.0 * dt * unif.ln()).sqrt());
    // rounding can push m a hair above the endpoints when the log term vanishes
    m.min(x).min(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn path(values: &[f64]) -> GridPath {
        GridPath::new(1.0, values.to_vec()).unwrap()
    }

    #[test]
    fn sample_starts_at_zero_and_is_reproducible() {
        for stream in 0..20 {
            let seed = SeedSpec::new(7, stream);
            let p = sample_bm(64, 1.0, seed).unwrap();
            assert_eq!(p.values()[0], 0.0);
            assert_eq!(p.values().len(), 65);
            assert_eq!(p, sample_bm(64, 1.0, seed).unwrap());
        }
        assert_ne!(
            sample_bm(8, 1.0, SeedSpec::new(7, 0)).unwrap(),
            sample_bm(8, 1.0, SeedSpec::new(7, 1)).unwrap()
        );
    }

    #[test]
    fn invalid_grids() {
        assert!(matches!(
            sample_bm(0, 1.0, SeedSpec::new(1, 0)),
            Err(RuinError::InvalidGrid(_))
        ));
        assert!(sample_bm(4, 0.0, SeedSpec::new(1, 0)).is_err());
        assert!(sample_bm(4, -2.0, SeedSpec::new(1, 0)).is_err());
        assert!(GridPath::new(1.0, vec![1.0, 2.0]).is_err());
        assert!(GridPath::new(1.0, vec![0.0]).is_err());
    }

    #[test]
    fn terminal_variance_matches_horizon() {
        let n = 100_000u64;
        let ends: Vec<f64> = (0..n)
            .map(|s| *sample_bm(16, 1.0, SeedSpec::new(11, s)).unwrap().values().last().unwrap())
            .collect();
        let mean = ends.iter().sum::<f64>() / n as f64;
        let var = ends.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let tol = 3.0 * (2.0 / n as f64).sqrt();
        assert!((var - 1.0).abs() < tol, "variance {var}");
    }

    #[test]
    fn drift_by_hand() {
        assert_eq!(drifted(&path(&[0.0, 1.0, 2.0]), 0.0).values(), &[0.0, 1.0, 2.0]);
        assert_eq!(drifted(&path(&[0.0, 1.0, 2.0]), 2.0).values(), &[0.0, 0.0, 0.0]);
        assert_eq!(drifted(&path(&[0.0, 0.0, 0.0]), -1.0).values(), &[0.0, 0.5, 1.0]);
    }

    #[test]
    fn running_inf_by_hand() {
        assert_eq!(running_inf(&path(&[0.0, -1.0, 0.5])).values(), &[0.0, -1.0, -1.0]);
        assert_eq!(running_inf(&path(&[0.0, 1.0, 2.0])).values(), &[0.0, 0.0, 0.0]);
        let mut constant = vec![3.0; 4];
        running_inf_in_place(&mut constant);
        assert_eq!(constant, vec![3.0; 4]);
    }

    #[test]
    fn reflect_by_hand() {
        let p = path(&[0.0, -1.0, 0.5]);
        assert_eq!(reflect(&p, 0.0).unwrap(), p);
        assert_eq!(reflect(&p, 1.0).unwrap().values(), &[0.0, 0.0, 1.5]);
        assert_eq!(reflect(&p, 0.5).unwrap().values(), &[0.0, -0.5, 1.0]);
        assert_eq!(reflect(&p, 2.0), Err(RuinError::InvalidTax(2.0)));
        assert!(reflect(&p, -0.5).is_err());
    }

    #[test]
    fn bridge_min_edge_cases() {
        assert_eq!(bridge_min_sample(0.3, -0.2, 0.5, 1.0).unwrap(), -0.2);
        let m = bridge_min_sample(0.0, 0.0, 1e-12, 0.5).unwrap();
        let expected = -(1e-12 * 2.0f64.ln() * 2.0).sqrt() / 2.0;
        assert!((m - expected).abs() < 1e-15);
        assert!(m.abs() < 1e-6);
        assert!(bridge_min_sample(0.0, 0.0, 0.0, 0.5).is_err());
        assert!(bridge_min_sample(0.0, 0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn bridge_min_tail_law() {
        let n = 100_000;
        let mut rng = SeedSpec::new(3, 0).rng();
        let below = (0..n)
            .filter(|_| bridge_min_sample(0.0, 0.0, 1.0, open_unit(&mut rng)).unwrap() < -0.5)
            .count();
        // P(min < b) = exp(-2 b^2 / dt) for a bridge pinned at 0 on both ends
        let p = (-2.0f64 * 0.25).exp();
        let frac = below as f64 / n as f64;
        let se = (p * (1.0 - p) / n as f64).sqrt();
        assert!((frac - p).abs() < 3.0 * se, "{frac} vs {p}");
    }

    #[test]
    fn bridged_inf_never_exceeds_grid_inf() {
        let b = sample_bm(256, 1.0, SeedSpec::new(5, 0)).unwrap();
        let grid = running_inf(&b);
        let fine = running_inf_bridged(&b, &mut SeedSpec::new(5, 1).rng());
        for (g, f) in grid.values().iter().zip(fine.values()) {
            assert!(f <= g);
        }
        assert!(fine.values()[256] < grid.values()[256]);
    }

    #[test]
    fn slice_pipeline_matches_path_pipeline() {
        let seed = SeedSpec::new(9, 4);
        let b = sample_bm(128, 2.0, seed).unwrap();
        let x = reflect_bridged(&drifted(&b, 0.7), 0.6, &mut SeedSpec::new(9, 5).rng()).unwrap();

        let mut buf = vec![0.0; 129];
        fill_brownian(&mut seed.rng(), 0.0, 2.0 / 128.0, &mut buf);
        drift_in_place(&mut buf, 0.7, 2.0);
        reflect_in_place(&mut buf, 0.6, 2.0 / 128.0, Some(&mut SeedSpec::new(9, 5).rng()));
        assert_eq!(x.values(), &buf[..]);
    }

    proptest! {
        #[test]
        fn workload_is_nonnegative(stream in 0u64..10_000, c in -3.0f64..3.0, bridged: bool) {
            let b = sample_bm(64, 1.0, SeedSpec::new(21, stream)).unwrap();
            let d = drifted(&b, c);
            let x = if bridged {
                reflect_bridged(&d, 1.0, &mut SeedSpec::new(22, stream).rng()).unwrap()
            } else {
                reflect(&d, 1.0).unwrap()
            };
            prop_assert!(x.values().iter().all(|&v| v >= 0.0));
        }

        #[test]
        fn running_inf_is_monotone_and_below(values in prop::collection::vec(-5.0f64..5.0, 1..50)) {
            let mut v = vec![0.0];
            v.extend(values);
            let p = path(&v);
            let m = running_inf(&p);
            prop_assert_eq!(m.values()[0], 0.0);
            for k in 0..v.len() {
                prop_assert!(m.values()[k] <= v[k]);
                if k > 0 {
                    prop_assert!(m.values()[k] <= m.values()[k - 1]);
                }
            }
        }

        #[test]
        fn bridge_min_below_endpoints(
            x in -10.0f64..10.0,
            y in -10.0f64..10.0,
            dt in 1e-9f64..10.0,
            unif in 1e-300f64..=1.0,
        ) {
            let m = bridge_min_sample(x, y, dt, unif).unwrap();
            prop_assert!(m <= x.min(y));
        }
    }
}
