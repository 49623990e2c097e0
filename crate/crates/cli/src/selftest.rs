//! Hand-checkable cases for every module, run by `taxruin selftest`.

use taxruin_core::closedform::{
    asymptotic_psi, bivariate_tail, normal_cdf, ruin_1d_finite, ruin_1d_infinite,
};
use taxruin_core::constant::staircase_exp_integral;
use taxruin_core::mc::{crude_mc, tilted_mc, McConfig, RuinEvent};
use taxruin_core::paths::{bridge_min_sample, drifted, reflect, running_inf, sample_bm, GridPath, SeedSpec};
use taxruin_core::{canonicalize, normalize_horizon, CanonicalProblem, ModelParams};

use crate::config::parse_config;

type Check = (&'static str, fn() -> bool);

fn close(x: f64, y: f64, tol: f64) -> bool {
    (x - y).abs() <= tol
}

fn path(values: &[f64]) -> GridPath {
    GridPath::new(1.0, values.to_vec()).expect("valid hand path")
}

fn same(p: &GridPath, expected: &[f64]) -> bool {
    p.values().len() == expected.len() && p.values().iter().zip(expected).all(|(a, b)| close(*a, *b, 1e-15))
}

fn params(u: [f64; 2], c: [f64; 2], gamma: [f64; 2]) -> ModelParams {
    ModelParams {
        c1: c[0],
        c2: c[1],
        gamma1: gamma[0],
        gamma2: gamma[1],
        horizon: 1.0,
        u1: u[0],
        u2: u[1],
    }
}

const CHECKS: &[Check] = &[
    ("model: unit horizon unchanged", || {
        let p = params([1.0, 1.0], [1.0, 1.0], [0.0, 0.0]);
        normalize_horizon(&p).ok() == Some(p)
    }),
    ("model: ratio without swap", || {
        canonicalize(&params([2.0, 1.0], [1.0, 2.0], [0.1, 0.2]))
            .is_ok_and(|q| (q.u, q.a, q.swapped) == (2.0, 0.5, false))
    }),
    ("model: swap relabels coordinates", || {
        canonicalize(&params([1.0, 2.0], [1.0, 2.0], [0.1, 0.2]))
            .is_ok_and(|q| (q.u, q.a, q.c1, q.gamma1, q.swapped) == (2.0, 0.5, 2.0, 0.2, true))
    }),
    ("model: negative ratio kept", || {
        canonicalize(&params([3.0, -1.5], [0.0, 0.0], [0.0, 0.0])).is_ok_and(|q| q.a == -0.5)
    }),
    ("paths: starts at zero and is reproducible", || {
        let a = sample_bm(64, 1.0, SeedSpec::new(9, 3));
        let b = sample_bm(64, 1.0, SeedSpec::new(9, 3));
        matches!((a, b), (Ok(a), Ok(b)) if a.values()[0] == 0.0 && a == b)
    }),
    ("paths: premium drift", || {
        same(&drifted(&path(&[0.0, 1.0, 2.0]), 2.0), &[0.0, 0.0, 0.0])
            && same(&drifted(&path(&[0.0, 0.0, 0.0]), -1.0), &[0.0, 0.5, 1.0])
    }),
    ("paths: running infimum", || {
        same(&running_inf(&path(&[0.0, -1.0, 0.5])), &[0.0, -1.0, -1.0])
            && same(&running_inf(&path(&[0.0, 1.0, 2.0])), &[0.0, 0.0, 0.0])
    }),
    ("paths: reflection", || {
        let p = path(&[0.0, -1.0, 0.5]);
        reflect(&p, 1.0).is_ok_and(|r| same(&r, &[0.0, 0.0, 1.5]))
            && reflect(&p, 0.5).is_ok_and(|r| same(&r, &[0.0, -0.5, 1.0]))
            && reflect(&p, 0.0).is_ok_and(|r| r == p)
    }),
    ("paths: bridge minimum at unif = 1", || {
        bridge_min_sample(0.3, -0.2, 0.01, 1.0).is_ok_and(|m| close(m, -0.2, 1e-15))
    }),
    ("closedform: normal symmetry", || {
        normal_cdf(0.0) == 0.5
            && [0.3, 1.7, 4.2].iter().all(|&x| close(normal_cdf(x), 1.0 - normal_cdf(-x), 1e-15))
    }),
    ("closedform: ruin from zero is certain", || {
        [-1.0, 0.0, 1.0].iter().all(|&c| ruin_1d_finite(0.0, c, 1.0).is_ok_and(|p| close(p, 1.0, 1e-12)))
    }),
    ("closedform: driftless reflection principle", || {
        ruin_1d_finite(1.0, 0.0, 1.0).is_ok_and(|p| close(p, 0.317310, 1e-6))
    }),
    ("closedform: infinite horizon", || {
        ruin_1d_infinite(0.5, 2.0).is_ok_and(|p| close(p, (-2.0f64).exp(), 1e-15))
    }),
    ("closedform: centred bivariate tail", || {
        close(bivariate_tail(1.0, 1.0, -1.0, -1.0), 0.25, 1e-15)
    }),
    ("closedform: density form with unit constant", || {
        CanonicalProblem::new(1.0, 1.0, [0.0, 0.0], [0.0, 0.0])
            .and_then(|p| asymptotic_psi(&p, 1.0))
            .is_ok_and(|a| close(a.value, 0.0585498, 1e-7))
    }),
    ("constant: single box", || {
        staircase_exp_integral(&[0.0], &[0.0], 1.0).is_ok_and(|v| close(v, 1.0, 1e-15))
    }),
    ("constant: dominated point ignored", || {
        staircase_exp_integral(&[1.0, 0.5], &[0.0, -1.0], 1.0).is_ok_and(|v| close(v, std::f64::consts::E, 1e-14))
    }),
    ("mc: negative barriers are ruined at once", || {
        let ev = RuinEvent::from_params(&params([-1.0, -0.5], [0.0, 0.0], [0.0, 0.0]));
        ev.and_then(|ev| crude_mc(ev, &McConfig { n_grid: 16, ..McConfig::new(200, 1) }))
            .is_ok_and(|e| e.p_hat == 1.0)
    }),
    ("mc: zero tilt equals crude", || {
        let cfg = McConfig { n_grid: 64, ..McConfig::new(500, 2) };
        let prob = CanonicalProblem::new(1.0, 0.5, [0.5, 0.5], [1.0, 1.0]).expect("valid problem");
        match (crude_mc(prob, &cfg), tilted_mc(prob, &cfg, Some([0.0, 0.0]))) {
            (Ok(c), Ok(t)) => c.p_hat == t.p_hat,
            _ => false,
        }
    }),
    ("cli: simulate arguments parse", || {
        parse_config(
            "taxruin simulate --u 3 --a 0.5 --c1 1 --c2 1 --gamma1 1 --gamma2 1 --n-paths 100000 --seed 42"
                .split_whitespace(),
        )
        .is_ok_and(|c| c.barriers == Some([3.0, 1.5]) && c.mc.n_paths == 100_000 && c.mc.seed == 42)
    }),
    ("cli: tax rate 2 rejected", || {
        parse_config("taxruin simulate --u 1 --a 1 --gamma1 2.0".split_whitespace()).is_err_and(|e| e.exit_code() == 1)
    }),
];

/// Runs every check; returns the report text and the number of failures.
pub fn report() -> (String, usize) {
    let mut text = String::new();
    let mut failures = 0;
    for (name, check) in CHECKS {
        let ok = check();
        failures += usize::from(!ok);
        text.push_str(&format!("{} {name}\n", if ok { "ok  " } else { "FAIL" }));
    }
    text.push_str(&format!("{} checks, {failures} failed\n", CHECKS.len()));
    (text, failures)
}

#[cfg(test)]
mod tests {
    #[test]
    fn all_checks_pass() {
        let (text, failures) = super::report();
        assert_eq!(failures, 0, "{text}");
    }
}
