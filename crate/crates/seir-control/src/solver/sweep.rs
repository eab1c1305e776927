//! Forward-backward sweep solver.
//!
//! Iterates the first-order optimality system directly: integrate the state
//! forward under the current schedule, integrate the costate backward along
//! it, then update each interval's control to the minimizer of the
//! (quadratic-in-u) Hamiltonian at the interval-averaged state and costate,
//! clamped into `[0, u_max]`. A relaxation factor damps the update, which is
//! what makes the fixed-point iteration contract on this model family.
//!
//! The sweep never sees the direct solver's gradient machinery, so the two
//! solvers converging to the same schedule is a meaningful cross-check
//! rather than a tautology.

use crate::error::Result;
use crate::integrate::{integrate, integrate_adjoint_backward, AdjointState};
use crate::model::{ControlValue, EpiState, Strategy};
use crate::objectives::{cost, ObjectiveWeights};
use crate::solver::{ConvergenceRecord, OcpSpec, OptimalSolution, Termination};

/// Pointwise minimizer of the Hamiltonian over the control box.
///
/// The Hamiltonian is quadratic in the control with positive curvature, so
/// the minimizer is its vertex clamped into `[0, u_max]`:
///
/// ```text
/// strategy 1:  u  = clamp( (lambda_s - lambda_r) * S / tau )
/// strategy 2:  u  = clamp( (lambda_s - lambda_r) * S / nu )
/// strategy 3:  u1 = clamp( (lambda_i - lambda_r) * I / B1 )
///              u2 = clamp( (lambda_s - lambda_r) * S / B2 )
/// ```
pub fn control_stationarity(
    strategy: Strategy,
    state: &EpiState,
    adjoint: &AdjointState,
    weights: &ObjectiveWeights,
    u_max: f64,
) -> ControlValue {
    let clamp = |v: f64| v.clamp(0.0, u_max);
    let vaccination_gain = (adjoint.s - adjoint.r) * state.s;
    match strategy {
        Strategy::Vaccination => ControlValue::single(clamp(vaccination_gain / weights.tau)),
        Strategy::ExposedInfected => ControlValue::single(clamp(vaccination_gain / weights.nu)),
        Strategy::TreatmentEducation => ControlValue::pair(
            clamp((adjoint.i - adjoint.r) * state.i / weights.b1),
            clamp(vaccination_gain / weights.b2),
        ),
    }
}

/// Solves the problem by forward-backward sweeping from the all-zero
/// schedule.
///
/// Like the direct solver, exhausting the sweep budget yields a result
/// flagged `Termination::MaxIterations` rather than an error.
pub fn solve_fbsm(spec: &OcpSpec) -> Result<OptimalSolution> {
    spec.validate()?;
    let field = spec.strategy.field();
    let n = spec.grid.n_steps;
    let opts = spec.sweep;
    let omega = opts.damping;

    let mut u = vec![ControlValue::ZERO; n];
    let mut objective_history = Vec::new();
    let mut residual_history = Vec::new();
    let mut termination = Termination::MaxIterations;

    for _ in 0..opts.max_sweeps {
        let traj = integrate(field, &spec.params, spec.init, Some(&u), spec.grid)?;
        let adj = integrate_adjoint_backward(spec.strategy, &spec.params, &traj, &spec.weights)?;
        objective_history.push(cost(spec.strategy, &traj, &spec.weights)?);

        let mut max_change = 0.0f64;
        let mut next = Vec::with_capacity(n);
        for (k, cur) in u.iter().enumerate() {
            // Controls live on intervals; evaluate the optimality condition
            // at the interval midpoint (averaged nodes on both sides).
            let xl = traj.states[k].as_array();
            let xr = traj.states[k + 1].as_array();
            let x_mid = EpiState::from_array([
                0.5 * (xl[0] + xr[0]),
                0.5 * (xl[1] + xr[1]),
                0.5 * (xl[2] + xr[2]),
                0.5 * (xl[3] + xr[3]),
            ]);
            let ll = adj.states[k].as_array();
            let lr = adj.states[k + 1].as_array();
            let l_mid = AdjointState::from_array([
                0.5 * (ll[0] + lr[0]),
                0.5 * (ll[1] + lr[1]),
                0.5 * (ll[2] + lr[2]),
                0.5 * (ll[3] + lr[3]),
            ]);
            let star = control_stationarity(spec.strategy, &x_mid, &l_mid, &spec.weights, spec.u_max);
            let damped = ControlValue {
                u1: (1.0 - omega) * cur.u1 + omega * star.u1,
                u2: (1.0 - omega) * cur.u2 + omega * star.u2,
            };
            max_change = max_change
                .max((damped.u1 - cur.u1).abs())
                .max((damped.u2 - cur.u2).abs());
            next.push(damped);
        }
        residual_history.push(max_change);
        u = next;
        if max_change <= opts.update_tol {
            termination = Termination::Converged;
            break;
        }
    }

    // The schedule moved after the last stored trajectory; re-integrate so
    // the reported (controls, trajectory, objective) triple is consistent.
    let trajectory = integrate(field, &spec.params, spec.init, Some(&u), spec.grid)?;
    let objective = cost(spec.strategy, &trajectory, &spec.weights)?;
    objective_history.push(objective);

    Ok(OptimalSolution {
        strategy: spec.strategy,
        controls: u,
        trajectory,
        objective,
        convergence: ConvergenceRecord {
            iterations: residual_history.len(),
            termination,
            objective_history,
            residual_history,
        },
    })
}
