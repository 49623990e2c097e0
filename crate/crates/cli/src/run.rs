//! Subcommand dispatch.

use std::time::Instant;

use taxruin_core::closedform::{asymptotic_psi, asymptotic_tail_form, constant_upper_bound};
use taxruin_core::constant::{default_grid, estimate_constant, FrontierConfig};
use taxruin_core::mc::{
    compare_asymptotic, crude_mc, resolve_constant, tilted_mc, CompareConfig, ConstantSource, EstimatorKind,
    RuinEvent,
};
use taxruin_core::{canonicalize, normalize_horizon, Branch, CanonicalProblem, ModelParams};

use crate::config::{Command, RunConfig};
use crate::output::{emit, render, Record};
use crate::{selftest, CliError, Result};

/// Runs the command and writes its output.
pub fn run(cfg: &RunConfig) -> Result<()> {
    let text = match cfg.command {
        Command::Simulate => render(&[simulate(cfg)?], cfg.format, false)?,
        Command::Constant => render(&[constant(cfg)?], cfg.format, false)?,
        Command::Asymptotic => render(&[asymptotic(cfg)?], cfg.format, false)?,
        Command::Compare => render(&compare(cfg)?, cfg.format, true)?,
        Command::Selftest => {
            let (report, failures) = selftest::report();
            emit(&report, cfg.output.as_deref())?;
            return if failures == 0 {
                Ok(())
            } else {
                Err(CliError::Failed(format!("{failures} self-test checks failed")))
            };
        }
    };
    emit(&text, cfg.output.as_deref())
}

/// Exit status for a finished run.
pub fn exit_code(result: &Result<()>) -> u8 {
    match result {
        Ok(()) => 0,
        Err(e) => e.exit_code(),
    }
}

fn simulate(cfg: &RunConfig) -> Result<Record> {
    let event = RuinEvent::from_params(&cfg.params()?)?;
    let start = Instant::now();
    let est = match cfg.estimator {
        EstimatorKind::Crude => crude_mc(event, &cfg.mc)?,
        EstimatorKind::Tilted => tilted_mc(event, &cfg.mc, cfg.drift)?,
    };
    let elapsed = start.elapsed().as_secs_f64();
    Ok(Record::default()
        .num("p_hat", est.p_hat)
        .num("stderr", est.stderr)
        .interval("ci95", est.ci95_low, est.ci95_high)
        .int("n_paths", est.n_paths as u64)
        .int("n_grid", cfg.mc.n_grid as u64)
        .int("seed", cfg.mc.seed)
        .text("estimator", est.estimator.as_str())
        .num("elapsed_s", elapsed))
}

/// Horizon-1, `a <= 1` form of the configured model with first barrier `u1`.
fn canonical_with_unit_barrier(cfg: &RunConfig) -> Result<CanonicalProblem> {
    let ratio = cfg.ratio.expect("validated");
    let params = ModelParams {
        c1: cfg.c[0],
        c2: cfg.c[1],
        gamma1: cfg.gamma[0],
        gamma2: cfg.gamma[1],
        horizon: cfg.horizon,
        u1: 1.0,
        u2: ratio,
    };
    Ok(canonicalize(&normalize_horizon(&params)?)?)
}

fn estimate_source(cfg: &RunConfig) -> ConstantSource {
    match cfg.constant {
        Some(c) => ConstantSource::Given(c),
        None => ConstantSource::Estimate {
            lambda: cfg.lambda,
            n_grid: cfg.const_grid,
            mode: cfg.mode,
            n_paths: cfg.const_paths,
            seed: cfg.mc.seed,
            workers: cfg.mc.workers,
        },
    }
}

fn constant(cfg: &RunConfig) -> Result<Record> {
    let prob = canonical_with_unit_barrier(cfg)?;
    let start = Instant::now();
    let record = Record::default()
        .num("a", prob.a)
        .num("gamma1", prob.gamma1)
        .num("gamma2", prob.gamma2)
        .flag("swapped", prob.swapped)
        .text("branch", prob.branch().as_str());
    if prob.branch() != Branch::Positive {
        let c = resolve_constant(&prob, None)?;
        return Ok(record
            .text("method", "closed_form")
            .num("constant", c)
            .num("stderr", 0.0)
            .num("upper_bound", f64::NAN)
            .int("n_paths", 0)
            .int("n_grid", 0)
            .num("lambda", f64::NAN)
            .text("mode", "")
            .int("seed", cfg.mc.seed)
            .num("elapsed_s", start.elapsed().as_secs_f64()));
    }
    let n_grid = cfg.const_grid.unwrap_or_else(|| default_grid(cfg.lambda));
    let fc = FrontierConfig::new(prob.a, prob.gamma(), cfg.lambda, cfg.mode).with_grid(n_grid);
    let est = estimate_constant(&fc, cfg.const_paths, cfg.mc.seed, cfg.mc.workers)?;
    Ok(record
        .text("method", "monte_carlo")
        .num("constant", est.mean)
        .num("stderr", est.stderr)
        .num("upper_bound", constant_upper_bound(prob.a, prob.gamma1, prob.gamma2)?)
        .int("n_paths", est.n_paths as u64)
        .int("n_grid", n_grid as u64)
        .num("lambda", cfg.lambda)
        .text("mode", cfg.mode.as_str())
        .int("seed", cfg.mc.seed)
        .num("elapsed_s", start.elapsed().as_secs_f64()))
}

fn asymptotic(cfg: &RunConfig) -> Result<Record> {
    let prob = canonicalize(&normalize_horizon(&cfg.params()?)?)?;
    let c = resolve_constant(&prob, Some(&estimate_source(cfg)))?;
    let approx = asymptotic_psi(&prob, c)?;
    let tail = asymptotic_tail_form(&prob, c)?;
    Ok(Record::default()
        .num("u", prob.u)
        .num("a", prob.a)
        .num("c1", prob.c1)
        .num("c2", prob.c2)
        .num("gamma1", prob.gamma1)
        .num("gamma2", prob.gamma2)
        .flag("swapped", prob.swapped)
        .text("branch", approx.branch.as_str())
        .num("constant", c)
        .num("asym", approx.value)
        .num("ln_asym", approx.ln_value)
        .num("tail_form", tail.value)
        .num("ln_tail_form", tail.ln_value))
}

fn compare(cfg: &RunConfig) -> Result<Vec<Record>> {
    let template = canonical_with_unit_barrier(cfg)?;
    // the template's u is the canonical image of an original first barrier of 1
    let scale = template.u;
    let scaled: Vec<f64> = cfg.u_list.iter().map(|u| u * scale).collect();
    let drift = cfg.drift.map(|[d1, d2]| if template.swapped { [d2, d1] } else { [d1, d2] });
    let compare_cfg = CompareConfig {
        estimator: cfg.estimator,
        drift,
        mc: cfg.mc,
        constant: Some(estimate_source(cfg)),
    };
    let rows = compare_asymptotic(&template, &scaled, &compare_cfg)?;
    Ok(cfg
        .u_list
        .iter()
        .zip(rows)
        .map(|(&u, row)| {
            Record::default()
                .num("u", u)
                .num("p_hat", row.mc.p_hat)
                .num("stderr", row.mc.stderr)
                .num("asym", row.asym)
                .num("ratio", row.ratio)
                .num("constant", row.constant)
                .text("branch", row.branch.as_str())
        })
        .collect())
}
