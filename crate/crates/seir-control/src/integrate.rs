//! Fixed-step integration: classic RK4 forward for the epidemic, and the
//! matching backward pass for the costate (adjoint) system.
//!
//! Controls are held constant over each grid interval, so the forward system
//! is smooth within every step and RK4 keeps its full order. The integrator
//! refuses to return garbage: any step that produces a non-finite value,
//! drives a compartment meaningfully negative, or leaks population beyond
//! tolerance aborts with the step index.

use crate::error::{Error, Result};
use crate::grid::{TimeGrid, Trajectory};
use crate::model::{
    vjp_state, ControlValue, EpiState, ModelParams, Strategy, VectorField, STATE_TOLERANCE,
};
use crate::objectives::{state_cost_grad, ObjectiveWeights};
use crate::vec4::axpy;

/// Conservation drift allowed per step; a trajectory of `n` steps may
/// accumulate `n` times this before the run is declared broken. Roundoff on
/// healthy runs sits around 1e-15 total, so tripping this means blowup.
const CONSERVATION_TOLERANCE_PER_STEP: f64 = 1e-9;

/// One classic RK4 step of size `h` with the control frozen at `u`.
fn rk4_step(
    field: VectorField,
    params: &ModelParams,
    x: [f64; 4],
    u: ControlValue,
    h: f64,
) -> [f64; 4] {
    let f = |y: [f64; 4]| field.eval(&EpiState::from_array(y), params, u).as_array();
    let k1 = f(x);
    let k2 = f(axpy(0.5 * h, k1, x));
    let k3 = f(axpy(0.5 * h, k2, x));
    let k4 = f(axpy(h, k3, x));
    let mut out = x;
    out = axpy(h / 6.0, k1, out);
    out = axpy(h / 3.0, k2, out);
    out = axpy(h / 3.0, k3, out);
    out = axpy(h / 6.0, k4, out);
    out
}

fn check_state(x: [f64; 4], step: usize, total0: f64, cons_tol: f64) -> Result<()> {
    for (component, v) in [("s", x[0]), ("e", x[1]), ("i", x[2]), ("r", x[3])] {
        if !v.is_finite() {
            return Err(Error::NonFiniteState { step });
        }
        if v < -STATE_TOLERANCE {
            return Err(Error::NegativeState {
                step,
                component,
                value: v,
            });
        }
    }
    let deviation = (x[0] + x[1] + x[2] + x[3] - total0).abs();
    if deviation > cons_tol {
        return Err(Error::ConservationViolated { step, deviation });
    }
    Ok(())
}

/// Integrates the epidemic forward over the grid.
///
/// Controlled fields require a schedule of exactly `grid.n_steps` values
/// (`controls[k]` held on interval k); the uncontrolled field requires
/// `None`. The returned trajectory stores the schedule it was driven with.
pub fn integrate(
    field: VectorField,
    params: &ModelParams,
    init: EpiState,
    controls: Option<&[ControlValue]>,
    grid: TimeGrid,
) -> Result<Trajectory> {
    init.validate()?;
    let schedule: Option<&[ControlValue]> = match (field.is_controlled(), controls) {
        (true, Some(c)) => {
            if c.len() != grid.n_steps {
                return Err(Error::ScheduleMismatch {
                    expected: grid.n_steps,
                    actual: c.len(),
                });
            }
            Some(c)
        }
        (true, None) => return Err(Error::MissingControls),
        (false, Some(c)) => {
            return Err(Error::ScheduleMismatch {
                expected: 0,
                actual: c.len(),
            })
        }
        (false, None) => None,
    };

    let h = grid.h();
    let total0 = init.total();
    let cons_tol = CONSERVATION_TOLERANCE_PER_STEP * grid.n_steps as f64;
    let mut states = Vec::with_capacity(grid.n_nodes());
    let mut x = init.as_array();
    states.push(init);
    for k in 0..grid.n_steps {
        let u = schedule.map_or(ControlValue::ZERO, |c| c[k]);
        x = rk4_step(field, params, x, u, h);
        // Step k produces the state at node k+1; report failures against the
        // step that computed them.
        check_state(x, k, total0, cons_tol)?;
        states.push(EpiState::from_array(x));
    }
    Trajectory::new(grid, states, schedule.map(|c| c.to_vec()))
}

/// Costate (adjoint) values at one grid node. `s` is the shadow price of an
/// extra susceptible, and so on: the sensitivity of the remaining cost to a
/// unit perturbation of that compartment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdjointState {
    pub s: f64,
    pub e: f64,
    pub i: f64,
    pub r: f64,
}

impl AdjointState {
    pub const ZERO: Self = Self {
        s: 0.0,
        e: 0.0,
        i: 0.0,
        r: 0.0,
    };

    pub fn as_array(&self) -> [f64; 4] {
        [self.s, self.e, self.i, self.r]
    }

    pub fn from_array(x: [f64; 4]) -> Self {
        Self {
            s: x[0],
            e: x[1],
            i: x[2],
            r: x[3],
        }
    }
}

/// Costates at every node of a grid, aligned with a forward [`Trajectory`].
#[derive(Debug, Clone, PartialEq)]
pub struct AdjointTrajectory {
    pub grid: TimeGrid,
    /// `grid.n_nodes()` costates, `states[k]` at `grid.time(k)`.
    pub states: Vec<AdjointState>,
}

impl AdjointTrajectory {
    pub fn final_state(&self) -> &AdjointState {
        &self.states[self.states.len() - 1]
    }
}

/// Integrates the costate system backward along a controlled trajectory:
///
/// ```text
/// lambda' = -dg/dx - (df/dx)^T lambda,    lambda(t_end) = 0
/// ```
///
/// where `g` is the strategy's state burden and `f` its vector field. The
/// terminal condition is imposed exactly. Each backward RK4 step evaluates
/// the forward state at the interval's endpoints and midpoint (the midpoint
/// as the average of the two nodes, a second-order interpolation that does
/// not degrade the costate accuracy the sweep solver needs).
///
/// Weights are taken as given; callers validate them. In particular a zero
/// state burden legitimately yields `lambda == 0` everywhere.
pub fn integrate_adjoint_backward(
    strategy: Strategy,
    params: &ModelParams,
    forward: &Trajectory,
    weights: &ObjectiveWeights,
) -> Result<AdjointTrajectory> {
    let controls = forward.controls()?;
    let field = strategy.field();
    let grid = forward.grid;
    let h = grid.h();
    let grad_g = state_cost_grad(strategy, weights);

    // lambda' = -(grad_g + J^T lambda), with J evaluated at (x, u_k).
    let rhs = |lam: [f64; 4], x: &EpiState, u: ControlValue| -> [f64; 4] {
        let jt = vjp_state(field, x, params, u, lam);
        [
            -(grad_g[0] + jt[0]),
            -(grad_g[1] + jt[1]),
            -(grad_g[2] + jt[2]),
            -(grad_g[3] + jt[3]),
        ]
    };

    let n = grid.n_steps;
    let mut states = vec![AdjointState::ZERO; n + 1];
    let mut lam = AdjointState::ZERO.as_array(); // exact transversality
    for k in (0..n).rev() {
        let u = controls[k];
        let x_right = &forward.states[k + 1];
        let x_left = &forward.states[k];
        let xr = x_right.as_array();
        let xl = x_left.as_array();
        let x_mid = EpiState::from_array([
            0.5 * (xl[0] + xr[0]),
            0.5 * (xl[1] + xr[1]),
            0.5 * (xl[2] + xr[2]),
            0.5 * (xl[3] + xr[3]),
        ]);

        // RK4 from t_{k+1} down to t_k (step -h).
        let k1 = rhs(lam, x_right, u);
        let k2 = rhs(axpy(-0.5 * h, k1, lam), &x_mid, u);
        let k3 = rhs(axpy(-0.5 * h, k2, lam), &x_mid, u);
        let k4 = rhs(axpy(-h, k3, lam), x_left, u);
        lam = axpy(-h / 6.0, k1, lam);
        lam = axpy(-h / 3.0, k2, lam);
        lam = axpy(-h / 3.0, k3, lam);
        lam = axpy(-h / 6.0, k4, lam);

        if lam.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteState { step: k });
        }
        states[k] = AdjointState::from_array(lam);
    }
    Ok(AdjointTrajectory { grid, states })
}
