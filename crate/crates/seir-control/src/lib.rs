//! Simulation and optimal control of an SEIR epidemic.
//!
//! The crate models an outbreak through susceptible/exposed/infectious/
//! recovered population fractions and asks how to steer it with bounded,
//! costed interventions: vaccination, treatment, and education campaigns.
//! Three ready-made strategies pair an intervention with the cost functional
//! it should minimize; see [`Strategy`] and [`ObjectiveWeights`].
//!
//! The pipeline is deliberately boring and checkable:
//!
//! * [`integrate`] — fixed-step RK4 over a uniform grid with piecewise-
//!   constant controls, refusing to return non-finite or unphysical states;
//! * [`cost`] — trapezoid quadrature of the running cost (exact on the
//!   piecewise-constant control term);
//! * [`solve_direct`] — projected-gradient descent with exact reverse-mode
//!   gradients of the discretization;
//! * [`solve_fbsm`] — forward-backward sweep on the optimality system, an
//!   independent route to the same optimum, useful as a cross-check;
//! * [`summarize`] / [`compare`] — outbreak metrics (peaks, durations,
//!   endpoints) and cross-strategy rankings.
//!
//! ```
//! use seir_control::{solve_direct, summarize, OcpSpec, Strategy, DEFAULT_THRESHOLD};
//!
//! let spec = OcpSpec::baseline(Strategy::Vaccination);
//! let sol = solve_direct(&spec).unwrap();
//! assert!(sol.convergence.converged());
//! let m = summarize(&sol.trajectory, DEFAULT_THRESHOLD).unwrap();
//! assert!(m.final_state.r > 0.9); // vaccination ends the outbreak
//! ```

pub mod error;
pub mod grid;
pub mod integrate;
pub mod metrics;
pub mod model;
pub mod objectives;
pub mod solver;

mod vec4;

pub use error::{Error, Result};
pub use grid::{TimeGrid, Trajectory};
pub use integrate::{integrate, integrate_adjoint_backward, AdjointState, AdjointTrajectory};
pub use metrics::{
    compare, summarize, ComparisonMetric, ComparisonReport, ComparisonRow, PairwiseOrdering,
    Peak, Period, SummaryMetrics, DEFAULT_THRESHOLD,
};
pub use model::{
    rhs_two_controls, rhs_uncontrolled, rhs_vaccination, ControlValue, EpiDerivative, EpiState,
    ModelParams, Strategy, VectorField,
};
pub use objectives::{
    control_cost, cost, cost_strategy1, cost_strategy2, cost_strategy3, state_cost,
    ObjectiveWeights,
};
pub use solver::direct::{objective_gradient, solve_direct};
pub use solver::sweep::{control_stationarity, solve_fbsm};
pub use solver::{
    project_controls, ConvergenceRecord, DirectOptions, OcpSpec, OptimalSolution, SweepOptions,
    Termination,
};
