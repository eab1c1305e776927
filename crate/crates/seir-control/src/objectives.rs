//! Cost functionals the three strategies minimize.
//!
//! Each objective is an integral over the study window of a state burden
//! plus a quadratic control effort:
//!
//! ```text
//! strategy 1:  J = integral( I             + tau/2 * u^2 )
//! strategy 2:  J = integral( A1*E + A2*I   + nu/2  * u^2 )
//! strategy 3:  J = integral( kappa*I       + B1/2 * u1^2 + B2/2 * u2^2 )
//! ```
//!
//! On the uniform grid the state burden is integrated with the composite
//! trapezoid rule; the control term is piecewise constant per interval, so
//! its integral is exact:
//!
//! ```text
//! J = sum_k h * [ (g(x_k) + g(x_{k+1})) / 2 + c(u_k) ]
//! ```

use crate::error::{Error, Result};
use crate::grid::Trajectory;
use crate::model::{ControlValue, EpiState, Strategy};

/// Weights of the three cost functionals. Only the weights of the strategy
/// being solved matter; the rest are ignored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveWeights {
    /// Strategy 1 control effort weight.
    pub tau: f64,
    /// Strategy 2 exposed-burden weight.
    pub a1: f64,
    /// Strategy 2 infectious-burden weight.
    pub a2: f64,
    /// Strategy 2 control effort weight.
    pub nu: f64,
    /// Strategy 3 infectious-burden weight.
    pub kappa: f64,
    /// Strategy 3 treatment effort weight.
    pub b1: f64,
    /// Strategy 3 education effort weight.
    pub b2: f64,
}

impl Default for ObjectiveWeights {
    /// Unit weights, except that education effort (`b2`) is an order of
    /// magnitude cheaper than clinical treatment: a broadcast campaign
    /// scales to the whole susceptible population at low marginal cost. At
    /// equal weights the optimizer would barely use education and the
    /// two-control strategy would underperform plain vaccination.
    fn default() -> Self {
        Self {
            tau: 1.0,
            a1: 1.0,
            a2: 1.0,
            nu: 1.0,
            kappa: 1.0,
            b1: 1.0,
            b2: 0.05,
        }
    }
}

impl ObjectiveWeights {
    /// Checks that every weight the given strategy uses is positive and
    /// finite. The error names the offending weight.
    pub fn validate(&self, strategy: Strategy) -> Result<()> {
        let used: &[(&'static str, f64)] = match strategy {
            Strategy::Vaccination => &[("tau", self.tau)],
            Strategy::ExposedInfected => &[("a1", self.a1), ("a2", self.a2), ("nu", self.nu)],
            Strategy::TreatmentEducation => {
                &[("kappa", self.kappa), ("b1", self.b1), ("b2", self.b2)]
            }
        };
        for &(name, v) in used {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::InvalidParameter {
                    name,
                    message: format!("must be positive and finite, got {v}"),
                });
            }
        }
        Ok(())
    }
}

/// State burden `g(x)` of the strategy's objective.
pub fn state_cost(strategy: Strategy, state: &EpiState, w: &ObjectiveWeights) -> f64 {
    match strategy {
        Strategy::Vaccination => state.i,
        Strategy::ExposedInfected => w.a1 * state.e + w.a2 * state.i,
        Strategy::TreatmentEducation => w.kappa * state.i,
    }
}

/// Gradient of the state burden with respect to (S, E, I, R).
pub(crate) fn state_cost_grad(strategy: Strategy, w: &ObjectiveWeights) -> [f64; 4] {
    match strategy {
        Strategy::Vaccination => [0.0, 0.0, 1.0, 0.0],
        Strategy::ExposedInfected => [0.0, w.a1, w.a2, 0.0],
        Strategy::TreatmentEducation => [0.0, 0.0, w.kappa, 0.0],
    }
}

/// Control effort `c(u)` of the strategy's objective.
pub fn control_cost(strategy: Strategy, u: ControlValue, w: &ObjectiveWeights) -> f64 {
    match strategy {
        Strategy::Vaccination => 0.5 * w.tau * u.u1 * u.u1,
        Strategy::ExposedInfected => 0.5 * w.nu * u.u1 * u.u1,
        Strategy::TreatmentEducation => {
            0.5 * w.b1 * u.u1 * u.u1 + 0.5 * w.b2 * u.u2 * u.u2
        }
    }
}

/// Gradient of the control effort with respect to (u1, u2).
pub(crate) fn control_cost_grad(
    strategy: Strategy,
    u: ControlValue,
    w: &ObjectiveWeights,
) -> (f64, f64) {
    match strategy {
        Strategy::Vaccination => (w.tau * u.u1, 0.0),
        Strategy::ExposedInfected => (w.nu * u.u1, 0.0),
        Strategy::TreatmentEducation => (w.b1 * u.u1, w.b2 * u.u2),
    }
}

/// Evaluates the strategy's objective on a controlled trajectory.
///
/// Fails with [`Error::MissingControls`] on uncontrolled trajectories (pass
/// an explicit all-zero schedule to cost a do-nothing policy) and with
/// [`Error::NonFiniteObjective`] if the sum overflows.
pub fn cost(strategy: Strategy, traj: &Trajectory, w: &ObjectiveWeights) -> Result<f64> {
    let controls = traj.controls()?;
    let h = traj.grid.h();
    let mut total = 0.0;
    for (pair, &u) in traj.states.windows(2).zip(controls) {
        let g_left = state_cost(strategy, &pair[0], w);
        let g_right = state_cost(strategy, &pair[1], w);
        let c = control_cost(strategy, u, w);
        total += h * (0.5 * (g_left + g_right) + c);
    }
    if !total.is_finite() {
        return Err(Error::NonFiniteObjective);
    }
    Ok(total)
}

/// Strategy 1 objective: `integral(I + tau/2 u^2)`.
pub fn cost_strategy1(traj: &Trajectory, w: &ObjectiveWeights) -> Result<f64> {
    cost(Strategy::Vaccination, traj, w)
}

/// Strategy 2 objective: `integral(A1 E + A2 I + nu/2 u^2)`.
pub fn cost_strategy2(traj: &Trajectory, w: &ObjectiveWeights) -> Result<f64> {
    cost(Strategy::ExposedInfected, traj, w)
}

/// Strategy 3 objective: `integral(kappa I + B1/2 u1^2 + B2/2 u2^2)`.
pub fn cost_strategy3(traj: &Trajectory, w: &ObjectiveWeights) -> Result<f64> {
    cost(Strategy::TreatmentEducation, traj, w)
}
