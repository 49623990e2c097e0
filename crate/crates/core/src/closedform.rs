//! Exact one-dimensional ruin formulas and the large-`u` approximations of the
//! simultaneous ruin probability.
//!
//! Gaussian tails are evaluated through the complementary error function and
//! products of tails are formed in log space. At desk-scale barriers
//! (`u ≈ 10`) the bivariate density already sits near `1e-45`, and it
//! underflows completely before `u ≈ 40`, so every approximant carries its
//! logarithm next to its value.

use std::f64::consts::SQRT_2;

use crate::error::{check_finite, check_tax, Result, RuinError};
use crate::model::{Branch, CanonicalProblem};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
const LN_2PI: f64 = 2.0 * LN_SQRT_2PI;

/// Standard normal distribution function.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

/// Standard normal survival function `1 - Φ(x)`, accurate in the upper tail.
pub fn normal_sf(x: f64) -> f64 {
    0.5 * libm::erfc(x / SQRT_2)
}

/// `ln(1 - Φ(x))`, finite for every finite `x`.
pub fn ln_normal_sf(x: f64) -> f64 {
    if x < 35.0 {
        normal_sf(x).ln()
    } else {
        mills_series_ln_sf(x)
    }
}

// Mills ratio series; the next term is below 1e-12 relative at x = 35
fn mills_series_ln_sf(x: f64) -> f64 {
    let r = 1.0 / (x * x);
    let series = 1.0 - r * (1.0 - 3.0 * r * (1.0 - 5.0 * r * (1.0 - 7.0 * r)));
    ln_gaussian_psi(x) + series.ln()
}

/// `ln Φ(x)`.
pub fn ln_normal_cdf(x: f64) -> f64 {
    ln_normal_sf(-x)
}

/// `ψ(x) = exp(-x²/2) / (√(2π) x)`, the leading term of the Gaussian tail.
pub fn gaussian_psi(x: f64) -> f64 {
    ln_gaussian_psi(x).exp()
}

fn ln_gaussian_psi(x: f64) -> f64 {
    -0.5 * x * x - LN_SQRT_2PI - x.ln()
}

/// Log density of two independent standard normals at `(x1, x2)`.
pub fn ln_bivariate_density(x1: f64, x2: f64) -> f64 {
    -0.5 * (x1 * x1 + x2 * x2) - LN_2PI
}

pub fn bivariate_density(x1: f64, x2: f64) -> f64 {
    ln_bivariate_density(x1, x2).exp()
}

/// `P(B_1(1) > u + c1, B_2(1) > a u + c2)` for independent components.
pub fn bivariate_tail(u: f64, a: f64, c1: f64, c2: f64) -> f64 {
    ln_bivariate_tail(u, a, c1, c2).exp()
}

pub fn ln_bivariate_tail(u: f64, a: f64, c1: f64, c2: f64) -> f64 {
    ln_normal_sf(u + c1) + ln_normal_sf(a * u + c2)
}

fn check_horizon(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(RuinError::InvalidHorizon(t))
    }
}

/// Finite-horizon ruin probability `P(sup_{[0,T]} (B(t) - c t) > u)`:
///
/// ```text
/// Φ(-u/√T - c√T) + exp(-2 c u) Φ(-u/√T + c√T)
/// ```
///
/// A negative `u` is ruined at time 0 and gives 1.
pub fn ruin_1d_finite(u: f64, c: f64, t: f64) -> Result<f64> {
    check_horizon(t)?;
    check_finite("u", u)?;
    check_finite("c", c)?;
    if u < 0.0 {
        return Ok(1.0);
    }
    let s = t.sqrt();
    let direct = normal_cdf(-u / s - c * s);
    let exponent = -2.0 * c * u;
    let reflected = if exponent < 700.0 {
        exponent.exp() * normal_cdf(-u / s + c * s)
    } else {
        (exponent + ln_normal_cdf(-u / s + c * s)).exp()
    };
    Ok((direct + reflected).clamp(0.0, 1.0))
}

/// Infinite-horizon ruin probability `exp(-2 c u)`. For `c <= 0` ruin is
/// certain, which is reported as [`RuinError::Divergent`].
pub fn ruin_1d_infinite(u: f64, c: f64) -> Result<f64> {
    check_finite("c", c)?;
    if c <= 0.0 {
        return Err(RuinError::Divergent(format!(
            "premium rate {c} <= 0 gives certain ruin on an infinite horizon"
        )));
    }
    if !(u >= 0.0 && u.is_finite()) {
        return Err(RuinError::InvalidBarrier(format!("u must be nonnegative, got {u}")));
    }
    Ok((-2.0 * c * u).exp())
}

fn reflected_argument(u: f64, c: f64, gamma: f64, t: f64) -> Result<f64> {
    check_tax(gamma)?;
    check_horizon(t)?;
    let level = u + c * t;
    if !(level > 0.0) {
        return Err(RuinError::OutOfRegime(format!(
            "u + cT = {level} must be positive"
        )));
    }
    Ok(level / t.sqrt())
}

/// Large-`u` approximation `4/(2-γ) ψ((u + cT)/√T)` of the one-dimensional
/// γ-reflected ruin probability.
pub fn ruin_1d_reflected_asym(u: f64, c: f64, gamma: f64, t: f64) -> Result<f64> {
    let x = reflected_argument(u, c, gamma, t)?;
    Ok(4.0 / (2.0 - gamma) * gaussian_psi(x))
}

/// The equivalent form `4/(2-γ) P(B(T) > u + cT)` with the exact Gaussian tail.
pub fn ruin_1d_reflected_tail(u: f64, c: f64, gamma: f64, t: f64) -> Result<f64> {
    let x = reflected_argument(u, c, gamma, t)?;
    Ok(4.0 / (2.0 - gamma) * normal_sf(x))
}

/// Closed-form constant for `a <= 0`:
/// `4/(2-γ1) √(2π) exp(c2²/2) Φ*(-c2)` with `Φ* ≡ 1` for `a < 0` and
/// `Φ* = Φ` at `a = 0`.
pub fn constant_nonpositive_a(a: f64, gamma1: f64, c2: f64) -> Result<f64> {
    ln_constant_nonpositive_a(a, gamma1, c2).map(f64::exp)
}

pub fn ln_constant_nonpositive_a(a: f64, gamma1: f64, c2: f64) -> Result<f64> {
    check_tax(gamma1)?;
    check_finite("c2", c2)?;
    let phi_star = match Branch::of(a) {
        Branch::Positive => {
            return Err(RuinError::WrongBranch(format!(
                "closed-form constant needs a <= 0, got {a}"
            )))
        }
        Branch::Zero => ln_normal_cdf(-c2),
        Branch::Negative => 0.0,
    };
    Ok((4.0 / (2.0 - gamma1)).ln() + LN_SQRT_2PI + 0.5 * c2 * c2 + phi_star)
}

/// Upper bound `16 / (a (2-γ1)(2-γ2))` on `C(a)` for `a > 0`.
pub fn constant_upper_bound(a: f64, gamma1: f64, gamma2: f64) -> Result<f64> {
    check_tax(gamma1)?;
    check_tax(gamma2)?;
    if !(a > 0.0) {
        return Err(RuinError::WrongBranch(format!(
            "upper bound applies to a > 0, got {a}"
        )));
    }
    Ok(16.0 / (a * (2.0 - gamma1) * (2.0 - gamma2)))
}

/// A large-`u` approximation of the simultaneous ruin probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticApprox {
    pub value: f64,
    pub ln_value: f64,
    pub branch: Branch,
    pub constant_used: f64,
}

impl AsymptoticApprox {
    fn from_ln(ln_value: f64, branch: Branch, constant_used: f64) -> Self {
        AsymptoticApprox {
            value: ln_value.exp(),
            ln_value,
            branch,
            constant_used,
        }
    }
}

fn check_constant(prob: &CanonicalProblem, c_a: f64) -> Result<()> {
    prob.validate()?;
    if !(c_a > 0.0 && c_a.is_finite()) {
        return Err(RuinError::InvalidInput(format!(
            "constant must be positive, got {c_a}"
        )));
    }
    if !(prob.u + prob.c1 > 0.0) {
        return Err(RuinError::OutOfRegime(format!(
            "u + c1 = {} must be positive",
            prob.u + prob.c1
        )));
    }
    if prob.a <= 0.0 {
        let exact = constant_nonpositive_a(prob.a, prob.gamma1, prob.c2)?;
        if ((c_a - exact) / exact).abs() > 1e-12 {
            return Err(RuinError::WrongBranch(format!(
                "constant {c_a} does not match the closed form {exact} for a = {}",
                prob.a
            )));
        }
    }
    Ok(())
}

/// Leading-order approximation of `ψ_γ(u, a u)`:
///
/// - `a > 0`: `C(a) u^{-2} φ(u + c1, a u + c2)`
/// - `a <= 0`: `C(a) u^{-1} φ(u + c1, c2)`
///
/// where `φ` is the standard bivariate normal density. For `a <= 0` the
/// supplied constant must agree with [`constant_nonpositive_a`].
pub fn asymptotic_psi(prob: &CanonicalProblem, c_a: f64) -> Result<AsymptoticApprox> {
    check_constant(prob, c_a)?;
    let u = prob.u;
    let branch = prob.branch();
    let ln_value = match branch {
        Branch::Positive => {
            c_a.ln() - 2.0 * u.ln() + ln_bivariate_density(u + prob.c1, prob.a * u + prob.c2)
        }
        Branch::Zero | Branch::Negative => {
            c_a.ln() - u.ln() + ln_bivariate_density(u + prob.c1, prob.c2)
        }
    };
    Ok(AsymptoticApprox::from_ln(ln_value, branch, c_a))
}

/// [`asymptotic_psi`] for `a <= 0` with the closed-form constant filled in.
pub fn asymptotic_psi_nonpositive(prob: &CanonicalProblem) -> Result<AsymptoticApprox> {
    let c_a = constant_nonpositive_a(prob.a, prob.gamma1, prob.c2)?;
    asymptotic_psi(prob, c_a)
}

/// The equivalent tail form of the approximation:
///
/// - `a > 0`: `a C(a) P(B(1) > (u, a u) + c)`
/// - `a <= 0`: `4/(2-γ1) P(B(1) > (u, a u) + c)`
pub fn asymptotic_tail_form(prob: &CanonicalProblem, c_a: f64) -> Result<AsymptoticApprox> {
    check_constant(prob, c_a)?;
    let branch = prob.branch();
    let ln_tail = ln_bivariate_tail(prob.u, prob.a, prob.c1, prob.c2);
    let ln_factor = match branch {
        Branch::Positive => (prob.a * c_a).ln(),
        Branch::Zero | Branch::Negative => (4.0 / (2.0 - prob.gamma1)).ln(),
    };
    Ok(AsymptoticApprox::from_ln(ln_factor + ln_tail, branch, c_a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    /// Composite Simpson rule for `∫_0^x φ`, independent of erfc.
    fn simpson_cdf(x: f64) -> f64 {
        let n = 20_000;
        let h = x / n as f64;
        let f = |t: f64| (-0.5 * t * t).exp() / (2.0 * PI).sqrt();
        let mut s = f(0.0) + f(x);
        for i in 1..n {
            s += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        0.5 + s * h / 3.0
    }

    #[test]
    fn cdf_against_quadrature() {
        assert_eq!(normal_cdf(0.0), 0.5);
        let oracle = simpson_cdf(1.0);
        assert!((oracle - 0.841_344_746_068_542_9).abs() < 1e-14);
        assert!((normal_cdf(1.0) - oracle).abs() < 1e-12);
        for x in [-3.7, -1.2, 0.4, 2.5, 5.0] {
            assert!((normal_cdf(x) - simpson_cdf(x)).abs() < 1e-12, "x = {x}");
        }
        for x in [0.3, 1.7, 4.2] {
            assert!((normal_cdf(x) - (1.0 - normal_cdf(-x))).abs() < 1e-15);
        }
    }

    #[test]
    fn log_tail_is_continuous_across_series_switch() {
        for x in [25.0, 30.0, 34.9] {
            let direct = normal_sf(x).ln();
            assert!((mills_series_ln_sf(x) - direct).abs() < 1e-10, "x = {x}");
        }
        assert!(ln_normal_sf(60.0).is_finite());
        assert!(ln_normal_sf(60.0) < -1800.0);
        assert!((ln_normal_cdf(0.0) - 0.5f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn finite_ruin_values() {
        for c in [-1.0, 0.0, 1.0] {
            for t in [0.5, 1.0, 2.0] {
                assert!((ruin_1d_finite(0.0, c, t).unwrap() - 1.0).abs() <= 1e-12);
            }
        }
        let reflection = ruin_1d_finite(1.0, 0.0, 1.0).unwrap();
        assert!((reflection - 2.0 * normal_cdf(-1.0)).abs() < 1e-15);
        assert!((reflection - 0.317_310_5).abs() < 1e-7);
        // Φ(-2) + e^{-2} Φ(0)
        let v = ruin_1d_finite(1.0, 1.0, 1.0).unwrap();
        assert!((v - 0.090_417_8).abs() < 1e-6, "{v}");
        assert_eq!(ruin_1d_finite(-0.5, 1.0, 1.0).unwrap(), 1.0);
        assert!(matches!(ruin_1d_finite(1.0, 1.0, 0.0), Err(RuinError::InvalidHorizon(_))));
    }

    #[test]
    fn finite_converges_to_infinite() {
        let limit = ruin_1d_infinite(1.0, 1.0).unwrap();
        assert!((limit - 0.135_335_283_236_612_7).abs() < 1e-15);
        assert!((ruin_1d_finite(1.0, 1.0, 10.0).unwrap() - limit).abs() < 1e-3);
        assert!((ruin_1d_finite(1.0, 1.0, 100.0).unwrap() - limit).abs() < 1e-8);
    }

    #[test]
    fn infinite_ruin() {
        assert_eq!(ruin_1d_infinite(0.0, 3.0).unwrap(), 1.0);
        assert_eq!(ruin_1d_infinite(0.5, 2.0).unwrap(), ruin_1d_infinite(1.0, 1.0).unwrap());
        assert!(matches!(ruin_1d_infinite(1.0, 0.0), Err(RuinError::Divergent(_))));
        assert!(matches!(ruin_1d_infinite(1.0, -1.0), Err(RuinError::Divergent(_))));
    }

    #[test]
    fn reflected_asymptotic() {
        let u = 2.5;
        let tax_free = ruin_1d_reflected_asym(u, 0.5, 0.0, 1.0).unwrap();
        assert!((tax_free - 2.0 * gaussian_psi(3.0)).abs() < 1e-18);
        // 4 ψ(5) = 4 e^{-12.5} / (5 √(2π))
        let v = ruin_1d_reflected_asym(4.0, 1.0, 1.0, 1.0).unwrap();
        let expected = 4.0 * (-12.5f64).exp() / (5.0 * (2.0 * PI).sqrt());
        assert!((v / expected - 1.0).abs() < 1e-14);
        assert!((v - 1.189_375_6e-6).abs() < 1e-12);
        let mut prev = 0.0;
        for g in [0.0, 0.5, 1.0, 1.5, 1.9, 1.99] {
            let v = ruin_1d_reflected_asym(3.0, 1.0, g, 1.0).unwrap();
            assert!(v > prev);
            prev = v;
        }
        assert!(matches!(
            ruin_1d_reflected_asym(1.0, -2.0, 1.0, 1.0),
            Err(RuinError::OutOfRegime(_))
        ));
        assert!(ruin_1d_reflected_asym(1.0, 1.0, 2.0, 1.0).is_err());
        let tail = ruin_1d_reflected_tail(4.0, 1.0, 1.0, 1.0).unwrap();
        assert!((tail - 4.0 * normal_sf(5.0)).abs() < 1e-20);
    }

    #[test]
    fn approximation_needs_barrier_above_premium() {
        let prob = CanonicalProblem::new(1.0, 0.5, [-2.0, 0.0], [1.0, 1.0]).unwrap();
        assert!(matches!(asymptotic_psi(&prob, 1.0), Err(RuinError::OutOfRegime(_))));
        assert!(matches!(asymptotic_tail_form(&prob, 1.0), Err(RuinError::OutOfRegime(_))));
    }

    #[test]
    fn bivariate_tail_values() {
        assert!((bivariate_tail(1.0, -1.0, -1.0, 1.0) - 0.25).abs() < 1e-15);
        let sf1 = 1.0 - normal_cdf(1.0);
        assert!((bivariate_tail(1.0, 1.0, 0.0, 0.0) - sf1 * sf1).abs() < 1e-15);
        assert!((bivariate_tail(1.0, 1.0, 0.0, 0.0) - 0.025_171_49).abs() < 1e-8);
        let v = bivariate_tail(1.0, -10.0, 0.0, 0.0);
        assert!((v / sf1 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn nonpositive_constants() {
        let root = (2.0 * PI).sqrt();
        let neg = constant_nonpositive_a(-0.5, 0.0, 0.0).unwrap();
        assert!((neg - 2.0 * root).abs() < 1e-13);
        assert!((neg - 5.013_257).abs() < 1e-6);
        let zero = constant_nonpositive_a(0.0, 0.0, 0.0).unwrap();
        assert!((zero - 2.506_628).abs() < 1e-6);
        let taxed = constant_nonpositive_a(-1.0, 1.0, 0.0).unwrap();
        assert!((taxed - 10.026_51).abs() < 1e-5);
        assert!(matches!(
            constant_nonpositive_a(0.1, 0.0, 0.0),
            Err(RuinError::WrongBranch(_))
        ));
    }

    #[test]
    fn upper_bounds() {
        assert_eq!(constant_upper_bound(1.0, 0.0, 0.0).unwrap(), 4.0);
        assert_eq!(constant_upper_bound(1.0, 1.0, 1.0).unwrap(), 16.0);
        assert_eq!(constant_upper_bound(0.5, 0.0, 0.0).unwrap(), 8.0);
        assert!(matches!(
            constant_upper_bound(0.0, 0.0, 0.0),
            Err(RuinError::WrongBranch(_))
        ));
    }

    #[test]
    fn density_arithmetic() {
        let prob = CanonicalProblem::new(1.0, 1.0, [0.0, 0.0], [0.0, 0.0]).unwrap();
        let approx = asymptotic_psi(&prob, 1.0).unwrap();
        assert!((approx.value - (-1.0f64).exp() / (2.0 * PI)).abs() < 1e-16);
        assert!((approx.value - 0.058_549_8).abs() < 1e-7);
        assert_eq!(approx.branch, Branch::Positive);
    }

    #[test]
    fn nonpositive_branch_checks_its_constant() {
        let prob = CanonicalProblem::new(4.0, -0.5, [1.0, 1.0], [1.0, 1.0]).unwrap();
        let exact = constant_nonpositive_a(-0.5, 1.0, 1.0).unwrap();
        assert!(asymptotic_psi(&prob, exact).is_ok());
        assert!(matches!(
            asymptotic_psi(&prob, exact * 1.01),
            Err(RuinError::WrongBranch(_))
        ));
        let auto = asymptotic_psi_nonpositive(&prob).unwrap();
        assert_eq!(auto.branch, Branch::Negative);
        // second density argument is c2 alone
        let direct = exact / 4.0 * bivariate_density(5.0, 1.0);
        assert!((auto.value / direct - 1.0).abs() < 1e-13);
    }

    /// Ratio of the density form to the tail form, evaluated in log space.
    fn form_ratio(u: f64, a: f64, c: [f64; 2], gamma: [f64; 2], c_a: f64) -> f64 {
        let prob = CanonicalProblem::new(u, a, c, gamma).unwrap();
        let lhs = asymptotic_psi(&prob, c_a).unwrap();
        let rhs = asymptotic_tail_form(&prob, c_a).unwrap();
        (lhs.ln_value - rhs.ln_value).exp()
    }

    #[test]
    fn negative_branch_forms_converge() {
        let c_a = constant_nonpositive_a(-0.5, 1.0, 1.0).unwrap();
        let ratio = |u: f64| form_ratio(u, -0.5, [1.0, 1.0], [1.0, 1.0], c_a);
        // With c1 = 1 the density form carries 1/u where the tail has
        // ~1/(u + 1), so the gap closes like 1/u: about 21% at u = 6.
        let r6 = ratio(6.0);
        assert!((r6 - 1.217_284).abs() < 1e-5, "{r6}");
        let mut prev = f64::INFINITY;
        for u in [6.0, 12.0, 24.0, 48.0, 96.0] {
            let gap = (ratio(u) - 1.0).abs();
            assert!(gap < prev);
            prev = gap;
        }
        assert!((ratio(48.0) - 1.0).abs() < 0.05);
        // only log space survives here
        let far = CanonicalProblem::new(96.0, -0.5, [1.0, 1.0], [1.0, 1.0]).unwrap();
        assert_eq!(asymptotic_psi(&far, c_a).unwrap().value, 0.0);
    }

    #[test]
    fn positive_branch_forms_converge() {
        for a in [0.25, 0.5, 1.0] {
            let r = form_ratio(8.0 / a, a, [0.0, 0.0], [1.0, 1.0], 3.0);
            assert!((r - 1.0).abs() < 0.05, "a = {a}: {r}");
        }
        let r8 = form_ratio(8.0, 1.0, [0.0, 0.0], [0.0, 0.0], 1.0);
        assert!((r8 - 1.0).abs() < 0.05, "{r8}");
        let mut prev = f64::INFINITY;
        for u in [2.0, 4.0, 8.0, 16.0] {
            let gap = form_ratio(u, 1.0, [0.0, 0.0], [0.0, 0.0], 1.0) - 1.0;
            assert!(gap > 0.0 && gap < prev);
            prev = gap;
        }
    }

    proptest! {
        #[test]
        fn finite_ruin_nonincreasing_in_u(
            c in -2.0f64..2.0,
            t in 0.1f64..5.0,
            u in 0.0f64..6.0,
            du in 0.0f64..2.0,
        ) {
            let lo = ruin_1d_finite(u, c, t).unwrap();
            let hi = ruin_1d_finite(u + du, c, t).unwrap();
            prop_assert!((0.0..=1.0).contains(&lo));
            prop_assert!(hi <= lo + 1e-15);
        }

        #[test]
        fn constant_monotone_in_tax(g in 0.0f64..1.98, dg in 0.0f64..0.01, c2 in -3.0f64..3.0) {
            let lo = constant_nonpositive_a(-1.0, g, c2).unwrap();
            let hi = constant_nonpositive_a(-1.0, g + dg, c2).unwrap();
            prop_assert!(hi >= lo);
            prop_assert!(constant_nonpositive_a(-1.0, g, c2).unwrap()
                >= constant_nonpositive_a(0.0, g, c2).unwrap());
        }
    }
}
