//! Problem parameterization.
//!
//! Every downstream computation works on horizon 1 with barrier ratio
//! `a <= 1`. [`normalize_horizon`] uses Brownian self-similarity to move any
//! horizon onto `[0, 1]`; [`canonicalize`] then relabels the coordinates so
//! that the larger barrier comes first.

use crate::error::{check_finite, check_tax, Result, RuinError};

/// A full problem instance: premium rates, tax rates, horizon and barriers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub c1: f64,
    pub c2: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub horizon: f64,
    pub u1: f64,
    pub u2: f64,
}

impl ModelParams {
    /// Parameters with horizon 1 and the second barrier given as `a * u`.
    pub fn with_ratio(u: f64, a: f64, c: [f64; 2], gamma: [f64; 2]) -> Self {
        ModelParams {
            c1: c[0],
            c2: c[1],
            gamma1: gamma[0],
            gamma2: gamma[1],
            horizon: 1.0,
            u1: u,
            u2: a * u,
        }
    }

    /// Checks tax rates, horizon and finiteness. Barriers may have any sign here.
    pub fn validate(&self) -> Result<()> {
        check_tax(self.gamma1)?;
        check_tax(self.gamma2)?;
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(RuinError::InvalidHorizon(self.horizon));
        }
        check_finite("c1", self.c1)?;
        check_finite("c2", self.c2)?;
        check_finite("u1", self.u1)?;
        check_finite("u2", self.u2)?;
        Ok(())
    }
}

/// Rescales the problem onto horizon 1.
///
/// `sup_{[0,T]} (B(t) - c t)` has the law of `√T sup_{[0,1]} (B(t) - c√T t)`,
/// so barriers shrink by `√T` and premiums grow by `√T`. Tax rates are
/// scale free.
pub fn normalize_horizon(p: &ModelParams) -> Result<ModelParams> {
    p.validate()?;
    if p.horizon == 1.0 {
        return Ok(*p);
    }
    let root = p.horizon.sqrt();
    Ok(ModelParams {
        c1: p.c1 * root,
        c2: p.c2 * root,
        horizon: 1.0,
        u1: p.u1 / root,
        u2: p.u2 / root,
        ..*p
    })
}

/// Which asymptotic regime a barrier ratio falls into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    Positive,
    Zero,
    Negative,
}

impl Branch {
    /// The sign of `a` decides the branch; `a == 0.0` exactly is its own case.
    pub fn of(a: f64) -> Branch {
        if a > 0.0 {
            Branch::Positive
        } else if a == 0.0 {
            Branch::Zero
        } else {
            Branch::Negative
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Branch::Positive => "a_positive",
            Branch::Zero => "a_zero",
            Branch::Negative => "a_negative",
        }
    }
}

/// Horizon-1 problem with barriers `(u, a u)`, `u > 0` and `a <= 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CanonicalProblem {
    pub u: f64,
    pub a: f64,
    pub c1: f64,
    pub c2: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    /// Set when the coordinates were exchanged relative to the input.
    pub swapped: bool,
}

impl CanonicalProblem {
    pub fn new(u: f64, a: f64, c: [f64; 2], gamma: [f64; 2]) -> Result<Self> {
        let prob = CanonicalProblem {
            u,
            a,
            c1: c[0],
            c2: c[1],
            gamma1: gamma[0],
            gamma2: gamma[1],
            swapped: false,
        };
        prob.validate()?;
        Ok(prob)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.u > 0.0 && self.u.is_finite()) {
            return Err(RuinError::InvalidBarrier(format!(
                "first barrier must be positive, got {}",
                self.u
            )));
        }
        if !(self.a <= 1.0) {
            return Err(RuinError::InvalidBarrier(format!(
                "barrier ratio must be at most 1, got {}",
                self.a
            )));
        }
        check_tax(self.gamma1)?;
        check_tax(self.gamma2)?;
        check_finite("c1", self.c1)?;
        check_finite("c2", self.c2)
    }

    /// Same model with a different first barrier.
    pub fn with_u(&self, u: f64) -> Result<Self> {
        let prob = CanonicalProblem { u, ..*self };
        prob.validate()?;
        Ok(prob)
    }

    pub fn branch(&self) -> Branch {
        Branch::of(self.a)
    }

    pub fn c(&self) -> [f64; 2] {
        [self.c1, self.c2]
    }

    pub fn gamma(&self) -> [f64; 2] {
        [self.gamma1, self.gamma2]
    }

    /// The barriers `(u, a u)`.
    pub fn barriers(&self) -> [f64; 2] {
        [self.u, self.a * self.u]
    }
}

/// Brings a horizon-1 instance into the `a <= 1` form, swapping coordinate
/// labels when the second barrier is the larger one.
pub fn canonicalize(p: &ModelParams) -> Result<CanonicalProblem> {
    p.validate()?;
    if p.horizon != 1.0 {
        return Err(RuinError::InvalidHorizon(p.horizon));
    }
    if !(p.u1 > 0.0) {
        return Err(RuinError::InvalidBarrier(format!(
            "u1 must be positive, got {}",
            p.u1
        )));
    }
    let ratio = p.u2 / p.u1;
    let prob = if ratio <= 1.0 {
        CanonicalProblem {
            u: p.u1,
            a: ratio,
            c1: p.c1,
            c2: p.c2,
            gamma1: p.gamma1,
            gamma2: p.gamma2,
            swapped: false,
        }
    } else {
        CanonicalProblem {
            u: p.u2,
            a: p.u1 / p.u2,
            c1: p.c2,
            c2: p.c1,
            gamma1: p.gamma2,
            gamma2: p.gamma1,
            swapped: true,
        }
    };
    prob.validate()?;
    Ok(prob)
}
