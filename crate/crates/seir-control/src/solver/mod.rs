//! Optimal-control problem description and the two solvers that attack it.
//!
//! [`direct`] treats the discretized control vector as the unknown and runs
//! a projected-gradient descent with exact reverse-mode gradients. [`sweep`]
//! iterates the first-order optimality system (forward state, backward
//! costate, pointwise control update). The two routes share nothing beyond
//! the model dynamics, so agreement between them is a strong correctness
//! check — the test suite leans on exactly that.

use crate::error::{Error, Result};
use crate::grid::{TimeGrid, Trajectory};
use crate::model::{ControlValue, EpiState, ModelParams, Strategy};
use crate::objectives::ObjectiveWeights;

pub mod direct;
pub mod sweep;

/// Knobs of the direct (projected-gradient) solver.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectOptions {
    /// Gradient iterations before giving up.
    pub max_iterations: usize,
    /// Stop when the projected-gradient sup norm falls below this.
    pub gradient_tol: f64,
    /// Armijo sufficient-decrease constant.
    pub armijo_c: f64,
    /// Step shrink factor while backtracking.
    pub backtrack_factor: f64,
    /// Backtracking attempts per iteration before declaring a stall.
    pub max_backtracks: usize,
    /// Also try constant schedules 0, u_max/2, u_max and keep the best.
    pub multi_start: bool,
    /// Optional warm start; must match the grid's step count.
    pub initial_guess: Option<Vec<ControlValue>>,
}

impl Default for DirectOptions {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            gradient_tol: 1e-6,
            armijo_c: 1e-4,
            backtrack_factor: 0.5,
            max_backtracks: 60,
            multi_start: true,
            initial_guess: None,
        }
    }
}

/// Knobs of the forward-backward sweep solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepOptions {
    /// Sweeps before giving up.
    pub max_sweeps: usize,
    /// Stop when the control update sup norm falls below this.
    pub update_tol: f64,
    /// Relaxation weight on the control update, in (0, 1]; 1 is undamped.
    pub damping: f64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            max_sweeps: 2000,
            update_tol: 1e-6,
            damping: 0.5,
        }
    }
}

/// How a solve ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// Optimality tolerance reached.
    Converged,
    /// Iteration budget exhausted.
    MaxIterations,
    /// Line search could not make progress.
    Stalled,
}

/// Iteration trace of a solve.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRecord {
    /// Iterations (gradient steps or sweeps) actually performed.
    pub iterations: usize,
    pub termination: Termination,
    /// Objective after each iteration, starting with the initial guess.
    /// Non-increasing for the direct solver; the sweep may overshoot.
    pub objective_history: Vec<f64>,
    /// Per-iteration residual: projected-gradient sup norm (direct) or
    /// control-update sup norm (sweep).
    pub residual_history: Vec<f64>,
}

impl ConvergenceRecord {
    pub fn converged(&self) -> bool {
        self.termination == Termination::Converged
    }

    /// Last recorded residual, or infinity if nothing ran.
    pub fn final_residual(&self) -> f64 {
        self.residual_history.last().copied().unwrap_or(f64::INFINITY)
    }
}

/// A solved control problem: the schedule, the trajectory it induces, and
/// the objective value (always re-evaluated on that exact trajectory).
#[derive(Debug, Clone, PartialEq)]
pub struct OptimalSolution {
    pub strategy: Strategy,
    /// Piecewise-constant optimal schedule, one value per grid interval.
    pub controls: Vec<ControlValue>,
    /// Forward trajectory under `controls`.
    pub trajectory: Trajectory,
    /// Objective value of `trajectory` + `controls`.
    pub objective: f64,
    pub convergence: ConvergenceRecord,
}

/// Full description of one optimal-control problem.
#[derive(Debug, Clone, PartialEq)]
pub struct OcpSpec {
    pub strategy: Strategy,
    pub params: ModelParams,
    pub init: EpiState,
    pub weights: ObjectiveWeights,
    /// Upper bound on every control rate, in (0, 1].
    pub u_max: f64,
    pub grid: TimeGrid,
    pub direct: DirectOptions,
    pub sweep: SweepOptions,
}

impl OcpSpec {
    /// The built-in benchmark problem for a strategy: baseline epidemic,
    /// default weights, u_max = 0.9, 100 days at 1000 steps.
    pub fn baseline(strategy: Strategy) -> Self {
        Self {
            strategy,
            params: ModelParams::baseline(),
            init: EpiState::baseline(),
            weights: ObjectiveWeights::default(),
            u_max: 0.9,
            grid: TimeGrid::default(),
            direct: DirectOptions::default(),
            sweep: SweepOptions::default(),
        }
    }

    /// Checks the whole problem description; errors name the offending field.
    pub fn validate(&self) -> Result<()> {
        // Re-run the constructors so specs built via struct literals get the
        // same screening.
        ModelParams::new(self.params.beta, self.params.gamma, self.params.mu, self.params.t_end)?;
        TimeGrid::new(self.grid.t0, self.grid.t_end, self.grid.n_steps)?;
        self.init.validate()?;
        self.weights.validate(self.strategy)?;

        let total = self.init.total();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter {
                name: "s0",
                message: format!("initial fractions s0+e0+i0+r0 must sum to 1, got {total}"),
            });
        }
        if !self.u_max.is_finite() || self.u_max <= 0.0 || self.u_max > 1.0 {
            return Err(Error::InvalidParameter {
                name: "u_max",
                message: format!("must lie in (0, 1], got {}", self.u_max),
            });
        }
        if (self.grid.t_end - self.params.t_end).abs() > 1e-9 {
            return Err(Error::InvalidParameter {
                name: "t_end",
                message: format!(
                    "grid ends at {} but the model horizon is {}",
                    self.grid.t_end, self.params.t_end
                ),
            });
        }
        if let Some(guess) = &self.direct.initial_guess {
            if guess.len() != self.grid.n_steps {
                return Err(Error::ScheduleMismatch {
                    expected: self.grid.n_steps,
                    actual: guess.len(),
                });
            }
        }
        if self.direct.max_iterations == 0 || self.sweep.max_sweeps == 0 {
            return Err(Error::InvalidParameter {
                name: "max_iterations",
                message: "iteration budgets must be at least 1".into(),
            });
        }
        if self.sweep.damping <= 0.0 || self.sweep.damping > 1.0 {
            return Err(Error::InvalidParameter {
                name: "damping",
                message: format!("must lie in (0, 1], got {}", self.sweep.damping),
            });
        }
        Ok(())
    }

    /// Decision-vector length: one value per interval per control.
    pub(crate) fn decision_dim(&self) -> usize {
        self.grid.n_steps * self.strategy.control_dim()
    }
}

/// Clamps every control in the schedule into `[0, u_max]` componentwise.
/// Idempotent, and the identity on already-feasible schedules.
pub fn project_controls(schedule: &[ControlValue], u_max: f64) -> Vec<ControlValue> {
    schedule
        .iter()
        .map(|u| ControlValue {
            u1: u.u1.clamp(0.0, u_max),
            u2: u.u2.clamp(0.0, u_max),
        })
        .collect()
}

/// Schedule -> flat decision vector. Single-control strategies use one slot
/// per interval; the two-control strategy concatenates all u1 values, then
/// all u2 values.
pub(crate) fn schedule_to_vec(strategy: Strategy, schedule: &[ControlValue]) -> Vec<f64> {
    let n = schedule.len();
    match strategy.control_dim() {
        1 => schedule.iter().map(|u| u.u1).collect(),
        _ => {
            let mut v = Vec::with_capacity(2 * n);
            v.extend(schedule.iter().map(|u| u.u1));
            v.extend(schedule.iter().map(|u| u.u2));
            v
        }
    }
}

/// Flat decision vector -> schedule; inverse of [`schedule_to_vec`].
pub(crate) fn vec_to_schedule(strategy: Strategy, n_steps: usize, v: &[f64]) -> Vec<ControlValue> {
    match strategy.control_dim() {
        1 => v.iter().map(|&u| ControlValue::single(u)).collect(),
        _ => (0..n_steps)
            .map(|k| ControlValue::pair(v[k], v[n_steps + k]))
            .collect(),
    }
}
