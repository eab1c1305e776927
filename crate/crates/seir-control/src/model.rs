//! Compartmental model: states, parameters, control strategies, and the
//! right-hand sides of the governing ODE systems.
//!
//! The population is split into susceptible (S), exposed (E), infectious (I),
//! and recovered/removed (R) fractions, normalized so S+E+I+R = 1. The
//! uncontrolled dynamics are
//!
//! ```text
//! S' = -beta*S*I
//! E' =  beta*S*I - gamma*E
//! I' =  gamma*E  - mu*I
//! R' =  mu*I
//! ```
//!
//! Controls enter as additional transfer rates out of S (vaccination or an
//! education campaign, moving S directly to R) and out of I (treatment,
//! moving I to R). Every variant keeps the total population constant: each
//! term leaves one compartment and enters another.

use crate::error::{Error, Result};

/// Transmission, incubation, and recovery rates plus the time horizon.
///
/// Rates are per day; the horizon `t_end` is in days.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Transmission rate: S -> E flow is `beta * S * I`.
    pub beta: f64,
    /// Incubation rate: E -> I flow is `gamma * E`.
    pub gamma: f64,
    /// Recovery/removal rate: I -> R flow is `mu * I`.
    pub mu: f64,
    /// Length of the study window in days.
    pub t_end: f64,
}

impl ModelParams {
    /// Validates that all rates are positive and finite and the horizon is
    /// positive. The error names the offending field.
    pub fn new(beta: f64, gamma: f64, mu: f64, t_end: f64) -> Result<Self> {
        let check = |name: &'static str, v: f64| -> Result<()> {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::InvalidParameter {
                    name,
                    message: format!("must be positive and finite, got {v}"),
                });
            }
            Ok(())
        };
        check("beta", beta)?;
        check("gamma", gamma)?;
        check("mu", mu)?;
        check("t_end", t_end)?;
        Ok(Self {
            beta,
            gamma,
            mu,
            t_end,
        })
    }

    /// The built-in benchmark scenario: beta = 0.2, gamma = 0.1887, mu = 0.1
    /// over a 100-day window.
    pub fn baseline() -> Self {
        Self {
            beta: 0.2,
            gamma: 0.1887,
            mu: 0.1,
            t_end: 100.0,
        }
    }
}

/// Population fractions in each compartment at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpiState {
    /// Susceptible fraction.
    pub s: f64,
    /// Exposed (infected, not yet infectious) fraction.
    pub e: f64,
    /// Infectious fraction.
    pub i: f64,
    /// Recovered/removed fraction (includes vaccinated and treated).
    pub r: f64,
}

/// Fractions may undershoot zero by at most this much before the state is
/// treated as invalid. RK4 on these dynamics stays far inside the bound.
pub const STATE_TOLERANCE: f64 = 1e-9;

impl EpiState {
    pub fn new(s: f64, e: f64, i: f64, r: f64) -> Self {
        Self { s, e, i, r }
    }

    /// Initial condition of the built-in benchmark scenario.
    pub fn baseline() -> Self {
        Self::new(0.88, 0.07, 0.05, 0.0)
    }

    /// Total population; constant along any trajectory of the model.
    pub fn total(&self) -> f64 {
        self.s + self.e + self.i + self.r
    }

    /// Checks that every component is finite and nonnegative within
    /// [`STATE_TOLERANCE`]. The error names the offending component.
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("s", self.s), ("e", self.e), ("i", self.i), ("r", self.r)] {
            if !v.is_finite() {
                return Err(Error::InvalidParameter {
                    name,
                    message: format!("must be finite, got {v}"),
                });
            }
            if v < -STATE_TOLERANCE {
                return Err(Error::InvalidParameter {
                    name,
                    message: format!("must be nonnegative, got {v}"),
                });
            }
        }
        Ok(())
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.s, self.e, self.i, self.r]
    }

    pub fn from_array(x: [f64; 4]) -> Self {
        Self::new(x[0], x[1], x[2], x[3])
    }
}

/// Time derivative of an [`EpiState`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpiDerivative {
    pub ds: f64,
    pub de: f64,
    pub di: f64,
    pub dr: f64,
}

impl EpiDerivative {
    /// Sum of all components; identically zero for every field in this model
    /// (each flow leaves one compartment and enters another).
    pub fn sum(&self) -> f64 {
        self.ds + self.de + self.di + self.dr
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.ds, self.de, self.di, self.dr]
    }
}

/// Control effort(s) applied over one time step.
///
/// For the single-control strategies only `u1` is meaningful and `u2` is
/// kept at zero. For the two-control strategy `u1` is the treatment rate
/// (I -> R) and `u2` the education rate (S -> R).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ControlValue {
    pub u1: f64,
    pub u2: f64,
}

impl ControlValue {
    pub const ZERO: Self = Self { u1: 0.0, u2: 0.0 };

    pub fn single(u: f64) -> Self {
        Self { u1: u, u2: 0.0 }
    }

    pub fn pair(u1: f64, u2: f64) -> Self {
        Self { u1, u2 }
    }
}

/// The three intervention strategies the crate can optimize.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    /// Strategy 1: vaccination at rate u (S -> R), minimizing the infectious
    /// burden `integral(I + tau/2 u^2)`.
    Vaccination,
    /// Strategy 2: vaccination at rate u (S -> R), minimizing exposed and
    /// infectious burden `integral(A1 E + A2 I + nu/2 u^2)`.
    ExposedInfected,
    /// Strategy 3: treatment at rate u1 (I -> R) plus an education campaign
    /// at rate u2 (S -> R), minimizing `integral(kappa I + B1/2 u1^2 + B2/2 u2^2)`.
    TreatmentEducation,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [
        Strategy::Vaccination,
        Strategy::ExposedInfected,
        Strategy::TreatmentEducation,
    ];

    /// 1-based index used in configuration files and output labels.
    pub fn index(&self) -> u8 {
        match self {
            Strategy::Vaccination => 1,
            Strategy::ExposedInfected => 2,
            Strategy::TreatmentEducation => 3,
        }
    }

    pub fn from_index(index: u8) -> Result<Self> {
        match index {
            1 => Ok(Strategy::Vaccination),
            2 => Ok(Strategy::ExposedInfected),
            3 => Ok(Strategy::TreatmentEducation),
            _ => Err(Error::InvalidParameter {
                name: "strategy",
                message: format!("must be 1, 2, or 3, got {index}"),
            }),
        }
    }

    /// The controlled vector field this strategy steers.
    pub fn field(&self) -> VectorField {
        match self {
            Strategy::Vaccination | Strategy::ExposedInfected => VectorField::Vaccination,
            Strategy::TreatmentEducation => VectorField::TwoControls,
        }
    }

    /// Number of independent control functions (1 or 2).
    pub fn control_dim(&self) -> usize {
        match self {
            Strategy::TreatmentEducation => 2,
            _ => 1,
        }
    }

    /// Label used in reports and file names, e.g. "strategy-1".
    pub fn label(&self) -> &'static str {
        match self {
            Strategy::Vaccination => "strategy-1",
            Strategy::ExposedInfected => "strategy-2",
            Strategy::TreatmentEducation => "strategy-3",
        }
    }
}

/// Which right-hand side to integrate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VectorField {
    /// Free epidemic, no intervention.
    Uncontrolled,
    /// Vaccination moves susceptibles straight to R at rate `u1`.
    Vaccination,
    /// Treatment moves infectious to R at rate `u1`; education moves
    /// susceptibles to R at rate `u2`.
    TwoControls,
}

impl VectorField {
    /// Evaluates the right-hand side. `u` is ignored by `Uncontrolled`.
    pub fn eval(&self, state: &EpiState, params: &ModelParams, u: ControlValue) -> EpiDerivative {
        match self {
            VectorField::Uncontrolled => rhs_uncontrolled(state, params),
            VectorField::Vaccination => rhs_vaccination(state, params, u.u1),
            VectorField::TwoControls => rhs_two_controls(state, params, u.u1, u.u2),
        }
    }

    /// Whether this field consumes a control schedule.
    pub fn is_controlled(&self) -> bool {
        !matches!(self, VectorField::Uncontrolled)
    }
}

/// Free epidemic dynamics.
pub fn rhs_uncontrolled(state: &EpiState, params: &ModelParams) -> EpiDerivative {
    let infection = params.beta * state.s * state.i;
    let incubation = params.gamma * state.e;
    let recovery = params.mu * state.i;
    EpiDerivative {
        ds: -infection,
        de: infection - incubation,
        di: incubation - recovery,
        dr: recovery,
    }
}

/// Epidemic with vaccination at rate `u` (S -> R).
pub fn rhs_vaccination(state: &EpiState, params: &ModelParams, u: f64) -> EpiDerivative {
    let infection = params.beta * state.s * state.i;
    let incubation = params.gamma * state.e;
    let recovery = params.mu * state.i;
    let vaccination = u * state.s;
    EpiDerivative {
        ds: -infection - vaccination,
        de: infection - incubation,
        di: incubation - recovery,
        dr: recovery + vaccination,
    }
}

/// Epidemic with treatment at rate `u1` (I -> R) and education at rate `u2`
/// (S -> R).
pub fn rhs_two_controls(
    state: &EpiState,
    params: &ModelParams,
    u1: f64,
    u2: f64,
) -> EpiDerivative {
    let infection = params.beta * state.s * state.i;
    let incubation = params.gamma * state.e;
    let recovery = params.mu * state.i;
    let treatment = u1 * state.i;
    let education = u2 * state.s;
    EpiDerivative {
        ds: -infection - education,
        de: infection - incubation,
        di: incubation - recovery - treatment,
        dr: recovery + treatment + education,
    }
}

// ---------------------------------------------------------------------------
// Jacobian-transpose products. The adjoint equations and the reverse-mode
// gradient both need w |-> (df/dx)^T w and w |-> (df/du)^T w; writing them
// once here keeps the two solvers differentiating the same dynamics.
// ---------------------------------------------------------------------------

/// `(df/dx)^T w` for the field at `(state, u)`.
pub(crate) fn vjp_state(
    field: VectorField,
    state: &EpiState,
    params: &ModelParams,
    u: ControlValue,
    w: [f64; 4],
) -> [f64; 4] {
    let [ws, we, wi, wr] = w;
    let bi = params.beta * state.i;
    let bs = params.beta * state.s;
    match field {
        VectorField::Uncontrolled | VectorField::Vaccination => {
            let u1 = if field.is_controlled() { u.u1 } else { 0.0 };
            [
                (-bi - u1) * ws + bi * we + u1 * wr,
                params.gamma * (wi - we),
                bs * (we - ws) + params.mu * (wr - wi),
                0.0,
            ]
        }
        VectorField::TwoControls => [
            (-bi - u.u2) * ws + bi * we + u.u2 * wr,
            params.gamma * (wi - we),
            bs * (we - ws) + (params.mu + u.u1) * (wr - wi),
            0.0,
        ],
    }
}

/// `((df/du1)^T w, (df/du2)^T w)` for the field at `state`. The second slot
/// is zero for single-control fields.
pub(crate) fn vjp_control(
    field: VectorField,
    state: &EpiState,
    w: [f64; 4],
) -> (f64, f64) {
    let [ws, _, wi, wr] = w;
    match field {
        VectorField::Uncontrolled => (0.0, 0.0),
        VectorField::Vaccination => (state.s * (wr - ws), 0.0),
        VectorField::TwoControls => (state.i * (wr - wi), state.s * (wr - ws)),
    }
}
