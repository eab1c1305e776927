//! Error type shared across the crate.

use std::fmt;

/// Everything that can go wrong while building a scenario or running it.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A parameter or state failed validation at construction time.
    /// `name` is the offending field, `message` states the violated constraint.
    InvalidParameter { name: &'static str, message: String },
    /// A control schedule's length does not match the time grid.
    ScheduleMismatch { expected: usize, actual: usize },
    /// An operation needed a controlled trajectory but got an uncontrolled one
    /// (or the other way round).
    MissingControls,
    /// The forward integration produced NaN or ±inf at the given step.
    NonFiniteState { step: usize },
    /// A compartment dropped below zero (beyond tolerance) at the given step.
    NegativeState {
        step: usize,
        component: &'static str,
        value: f64,
    },
    /// The conserved total population drifted beyond tolerance at the given step.
    ConservationViolated { step: usize, deviation: f64 },
    /// The objective evaluated to NaN or ±inf.
    NonFiniteObjective,
    /// A comparison needs at least two runs.
    TooFewRuns { count: usize },
}

impl Error {
    /// True for failures of the numerics themselves (as opposed to bad input).
    /// The CLI maps these to a distinct exit code.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonFiniteState { .. }
                | Error::NegativeState { .. }
                | Error::ConservationViolated { .. }
                | Error::NonFiniteObjective
        )
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParameter { name, message } => {
                write!(f, "invalid `{name}`: {message}")
            }
            Error::ScheduleMismatch { expected, actual } => {
                write!(
                    f,
                    "control schedule has {actual} entries, expected {expected} (one per step)"
                )
            }
            Error::MissingControls => {
                write!(f, "operation requires a trajectory with a control schedule")
            }
            Error::NonFiniteState { step } => {
                write!(f, "state became non-finite at step {step}")
            }
            Error::NegativeState {
                step,
                component,
                value,
            } => {
                write!(
                    f,
                    "compartment {component} became negative ({value:.3e}) at step {step}"
                )
            }
            Error::ConservationViolated { step, deviation } => {
                write!(
                    f,
                    "total population drifted by {deviation:.3e} at step {step}"
                )
            }
            Error::NonFiniteObjective => write!(f, "objective evaluated to a non-finite value"),
            Error::TooFewRuns { count } => {
                write!(f, "comparison needs at least two runs, got {count}")
            }
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;
