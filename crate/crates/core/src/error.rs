use thiserror::Error;

pub type Result<T> = std::result::Result<T, RuinError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RuinError {
    #[error("invalid horizon {0}: must be positive and finite")]
    InvalidHorizon(f64),
    #[error("invalid barrier: {0}")]
    InvalidBarrier(String),
    #[error("invalid tax rate {0}: must lie in [0, 2)")]
    InvalidTax(f64),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("divergent case: {0}")]
    Divergent(String),
    #[error("outside the asymptotic regime: {0}")]
    OutOfRegime(String),
    #[error("wrong branch: {0}")]
    WrongBranch(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl RuinError {
    /// True for errors caused by malformed parameters rather than by a
    /// formula being asked for outside its domain.
    pub fn is_parameter_error(&self) -> bool {
        matches!(
            self,
            RuinError::InvalidHorizon(_)
                | RuinError::InvalidBarrier(_)
                | RuinError::InvalidTax(_)
                | RuinError::InvalidGrid(_)
                | RuinError::InvalidInput(_)
        )
    }
}

pub(crate) fn check_tax(gamma: f64) -> Result<()> {
    if (0.0..2.0).contains(&gamma) {
        Ok(())
    } else {
        Err(RuinError::InvalidTax(gamma))
    }
}

pub(crate) fn check_finite(name: &str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(RuinError::InvalidInput(format!("{name} must be finite, got {x}")))
    }
}
