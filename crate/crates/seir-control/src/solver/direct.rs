//! Direct solver: project the problem onto the piecewise-constant control
//! vector and run a projected-gradient descent.
//!
//! The gradient is exact reverse-mode differentiation of the actual
//! discretization — the RK4 step and the trapezoid quadrature — not a
//! discretization of the continuous adjoint equation. The distinction
//! matters: the exact gradient matches finite differences to roundoff on any
//! grid, so the optimizer never fights an inconsistent gradient near the
//! optimum, and coarse-grid gradient checks stay meaningful.
//!
//! Steps use a Barzilai-Borwein length, safeguarded by Armijo backtracking
//! along the projection arc, which keeps the objective sequence monotone.

use crate::error::{Error, Result};
use crate::grid::Trajectory;
use crate::integrate::integrate;
use crate::model::{vjp_control, vjp_state, ControlValue, EpiState};
use crate::objectives::{control_cost_grad, cost, state_cost_grad};
use crate::solver::{
    schedule_to_vec, vec_to_schedule, ConvergenceRecord, OcpSpec, OptimalSolution, Termination,
};
use crate::vec4::{add, axpy};

/// Gradient of the discrete objective with respect to the flat decision
/// vector, evaluated at `schedule` (see
/// [`project_controls`](crate::solver::project_controls) for feasibility;
/// the gradient itself is defined for any schedule the dynamics can
/// integrate). Layout matches the decision vector: one slot per interval,
/// with the two-control strategy concatenating all u1 then all u2.
pub fn objective_gradient(spec: &OcpSpec, schedule: &[ControlValue]) -> Result<Vec<f64>> {
    if schedule.len() != spec.grid.n_steps {
        return Err(Error::ScheduleMismatch {
            expected: spec.grid.n_steps,
            actual: schedule.len(),
        });
    }
    let traj = integrate(
        spec.strategy.field(),
        &spec.params,
        spec.init,
        Some(schedule),
        spec.grid,
    )?;
    Ok(gradient_from_trajectory(spec, &traj))
}

/// Reverse-mode pass over an already-integrated trajectory.
///
/// Walks the steps backward, re-deriving each RK4 stage from the stored node
/// state (bit-identical to the forward pass) and pulling the cost adjoint
/// back through the stage algebra. `xbar` carries dJ/d(node state); each
/// interval contributes its trapezoid weights to the adjacent nodes and its
/// exact `h * dc/du` term to the control slot.
pub(crate) fn gradient_from_trajectory(spec: &OcpSpec, traj: &Trajectory) -> Vec<f64> {
    let controls = traj
        .controls
        .as_ref()
        .expect("gradient needs a controlled trajectory");
    let strategy = spec.strategy;
    let field = strategy.field();
    let params = &spec.params;
    let n = traj.n_steps();
    let h = traj.grid.h();
    let grad_g = state_cost_grad(strategy, &spec.weights);
    let two = strategy.control_dim() == 2;

    let f = |y: [f64; 4], u: ControlValue| {
        field.eval(&EpiState::from_array(y), params, u).as_array()
    };

    let mut grad = vec![0.0; spec.decision_dim()];
    let mut xbar = [0.0; 4];
    for k in (0..n).rev() {
        // Right node of interval k takes half the interval's state burden.
        xbar = axpy(0.5 * h, grad_g, xbar);

        // Recompute the forward stages of step k.
        let u = controls[k];
        let x = traj.states[k].as_array();
        let k1 = f(x, u);
        let a2 = axpy(0.5 * h, k1, x);
        let k2 = f(a2, u);
        let a3 = axpy(0.5 * h, k2, x);
        let k3 = f(a3, u);
        let a4 = axpy(h, k3, x);

        // Reverse through x_{k+1} = x + h/6 k1 + h/3 k2 + h/3 k3 + h/6 k4,
        // a4 = x + h k3, a3 = x + h/2 k2, a2 = x + h/2 k1.
        let kb4 = [
            h / 6.0 * xbar[0],
            h / 6.0 * xbar[1],
            h / 6.0 * xbar[2],
            h / 6.0 * xbar[3],
        ];
        let ab4 = vjp_state(field, &EpiState::from_array(a4), params, u, kb4);

        let mut kb3 = [
            h / 3.0 * xbar[0],
            h / 3.0 * xbar[1],
            h / 3.0 * xbar[2],
            h / 3.0 * xbar[3],
        ];
        kb3 = axpy(h, ab4, kb3);
        let ab3 = vjp_state(field, &EpiState::from_array(a3), params, u, kb3);

        let mut kb2 = [
            h / 3.0 * xbar[0],
            h / 3.0 * xbar[1],
            h / 3.0 * xbar[2],
            h / 3.0 * xbar[3],
        ];
        kb2 = axpy(0.5 * h, ab3, kb2);
        let ab2 = vjp_state(field, &EpiState::from_array(a2), params, u, kb2);

        let mut kb1 = [
            h / 6.0 * xbar[0],
            h / 6.0 * xbar[1],
            h / 6.0 * xbar[2],
            h / 6.0 * xbar[3],
        ];
        kb1 = axpy(0.5 * h, ab2, kb1);
        let ab1 = vjp_state(field, &EpiState::from_array(x), params, u, kb1);

        // Control contributions from every stage, plus the exact quadrature
        // term of the control effort.
        let (dc1, dc2) = control_cost_grad(strategy, u, &spec.weights);
        let mut u1bar = h * dc1;
        let mut u2bar = h * dc2;
        for (stage_x, kb) in [(x, kb1), (a2, kb2), (a3, kb3), (a4, kb4)] {
            let (g1, g2) = vjp_control(field, &EpiState::from_array(stage_x), kb);
            u1bar += g1;
            u2bar += g2;
        }
        grad[k] = u1bar;
        if two {
            grad[n + k] = u2bar;
        }

        // Pull xbar back to node k: identity path plus all stage paths, then
        // the left-node half of the interval's state burden.
        xbar = add(xbar, add(add(ab1, ab2), add(ab3, ab4)));
        xbar = axpy(0.5 * h, grad_g, xbar);
    }
    grad
}

fn project_vec(v: &[f64], u_max: f64) -> Vec<f64> {
    v.iter().map(|x| x.clamp(0.0, u_max)).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solves the problem by projected-gradient descent, optionally from several
/// constant starting schedules, keeping the best result.
///
/// The returned solution reports `Termination::MaxIterations` or `Stalled`
/// instead of erroring when optimality is not reached; callers decide how
/// strict to be. Errors are reserved for problems that cannot be evaluated
/// at all (invalid spec, non-integrable initial guess).
pub fn solve_direct(spec: &OcpSpec) -> Result<OptimalSolution> {
    spec.validate()?;
    let dim = spec.decision_dim();

    let mut starts: Vec<Vec<f64>> = Vec::new();
    if let Some(guess) = &spec.direct.initial_guess {
        starts.push(project_vec(&schedule_to_vec(spec.strategy, guess), spec.u_max));
    }
    if spec.direct.multi_start || starts.is_empty() {
        for level in [0.0, 0.5 * spec.u_max, spec.u_max] {
            starts.push(vec![level; dim]);
        }
    }

    let mut best: Option<OptimalSolution> = None;
    let mut first_err: Option<Error> = None;
    for u0 in starts {
        match descend(spec, u0) {
            Ok(sol) => {
                let better = best
                    .as_ref()
                    .is_none_or(|b| sol.objective < b.objective);
                if better {
                    best = Some(sol);
                }
            }
            Err(e) => first_err = first_err.or(Some(e)),
        }
    }
    best.ok_or_else(|| first_err.unwrap_or(Error::NonFiniteObjective))
}

/// One projected-gradient descent from a feasible flat vector.
fn descend(spec: &OcpSpec, u0: Vec<f64>) -> Result<OptimalSolution> {
    let field = spec.strategy.field();
    let n = spec.grid.n_steps;
    let opts = &spec.direct;

    let run = |v: &[f64]| -> Result<(Trajectory, f64)> {
        let schedule = vec_to_schedule(spec.strategy, n, v);
        let traj = integrate(field, &spec.params, spec.init, Some(&schedule), spec.grid)?;
        let j = cost(spec.strategy, &traj, &spec.weights)?;
        Ok((traj, j))
    };

    let mut u = u0;
    let (mut traj, mut j) = run(&u)?;
    let mut objective_history = vec![j];
    let mut residual_history = Vec::new();
    let mut prev: Option<(Vec<f64>, Vec<f64>)> = None; // (u, gradient) of last accepted iterate
    let mut termination = Termination::MaxIterations;

    for _ in 0..opts.max_iterations {
        let g = gradient_from_trajectory(spec, &traj);

        // Projected-gradient residual: how far a unit step can actually move.
        let pg = u
            .iter()
            .zip(&g)
            .map(|(&ui, &gi)| (ui - (ui - gi).clamp(0.0, spec.u_max)).abs())
            .fold(0.0, f64::max);
        residual_history.push(pg);
        if pg <= opts.gradient_tol {
            termination = Termination::Converged;
            break;
        }

        // Barzilai-Borwein step length from the last accepted move.
        let mut step = 1.0;
        if let Some((pu, pg_)) = &prev {
            let mut ss = 0.0;
            let mut sy = 0.0;
            for i in 0..u.len() {
                let s = u[i] - pu[i];
                let y = g[i] - pg_[i];
                ss += s * s;
                sy += s * y;
            }
            if sy > 1e-16 {
                step = (ss / sy).clamp(1e-8, 1e8);
            }
        }

        // Armijo backtracking along the projection arc.
        let mut accepted = None;
        let mut a = step;
        for _ in 0..opts.max_backtracks {
            let ut = project_vec(&u.iter().zip(&g).map(|(&ui, &gi)| ui - a * gi).collect::<Vec<_>>(), spec.u_max);
            let d: Vec<f64> = ut.iter().zip(&u).map(|(t, c)| t - c).collect();
            if d.iter().all(|x| *x == 0.0) {
                // The arc has collapsed onto the current point.
                break;
            }
            let gd = dot(&g, &d);
            match run(&ut) {
                Ok((t, jt)) if jt <= j + opts.armijo_c * gd => {
                    accepted = Some((ut, t, jt));
                    break;
                }
                // Worse objective or a blown-up trial integration: shrink.
                Ok(_) | Err(_) => {}
            }
            a *= opts.backtrack_factor;
        }

        match accepted {
            Some((ut, t, jt)) => {
                prev = Some((u, g));
                u = ut;
                traj = t;
                j = jt;
                objective_history.push(j);
            }
            None => {
                termination = Termination::Stalled;
                break;
            }
        }
    }

    Ok(OptimalSolution {
        strategy: spec.strategy,
        controls: vec_to_schedule(spec.strategy, n, &u),
        trajectory: traj,
        objective: j,
        convergence: ConvergenceRecord {
            iterations: residual_history.len(),
            termination,
            objective_history,
            residual_history,
        },
    })
}
