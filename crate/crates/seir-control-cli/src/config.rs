//! Flat `key = value` scenario files.
//!
//! Missing keys fall back to the benchmark scenario, so a config file only
//! needs to state what it changes. Lines starting with `#` (and anything
//! after an inline `#`) are comments.

use std::collections::HashSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use seir_control::{ModelParams, ObjectiveWeights, OcpSpec, EpiState, Strategy, TimeGrid};

use crate::error::CliError;

/// Which optimizer(s) an `optimize`/`compare` run should use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SolverChoice {
    /// Projected-gradient descent on the discretized problem.
    Direct,
    /// Forward-backward sweep on the optimality system.
    Sweep,
    /// Run both and report how well they agree.
    Both,
}

impl FromStr for SolverChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "direct" => Ok(SolverChoice::Direct),
            "sweep" => Ok(SolverChoice::Sweep),
            "both" => Ok(SolverChoice::Both),
            other => Err(format!("expected `direct`, `sweep`, or `both`, got `{other}`")),
        }
    }
}

impl fmt::Display for SolverChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            SolverChoice::Direct => "direct",
            SolverChoice::Sweep => "sweep",
            SolverChoice::Both => "both",
        };
        f.write_str(name)
    }
}

/// One complete scenario: model, initial condition, grid, objective
/// weights, control bound, solver selection, and reporting knobs.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub beta: f64,
    pub gamma: f64,
    pub mu: f64,
    pub t_end: f64,
    pub n_steps: usize,
    pub s0: f64,
    pub e0: f64,
    pub i0: f64,
    pub r0: f64,
    pub strategy: u8,
    pub tau: f64,
    pub a1: f64,
    pub a2: f64,
    pub nu: f64,
    pub kappa: f64,
    pub b1: f64,
    pub b2: f64,
    pub u_max: f64,
    pub solver: SolverChoice,
    pub threshold: f64,
    pub out_dir: String,
}

impl Default for ScenarioConfig {
    /// The benchmark scenario (what `--preset paper` selects).
    fn default() -> Self {
        let params = ModelParams::baseline();
        let init = EpiState::baseline();
        let weights = ObjectiveWeights::default();
        ScenarioConfig {
            beta: params.beta,
            gamma: params.gamma,
            mu: params.mu,
            t_end: params.t_end,
            n_steps: 1000,
            s0: init.s,
            e0: init.e,
            i0: init.i,
            r0: init.r,
            strategy: 1,
            tau: weights.tau,
            a1: weights.a1,
            a2: weights.a2,
            nu: weights.nu,
            kappa: weights.kappa,
            b1: weights.b1,
            b2: weights.b2,
            u_max: 0.9,
            solver: SolverChoice::Direct,
            threshold: 0.01,
            out_dir: "out".to_string(),
        }
    }
}

impl ScenarioConfig {
    /// Reads a config file, overlaying its keys on the benchmark defaults.
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::Usage(format!("cannot read config `{}`: {e}", path.display()))
        })?;
        let mut config = ScenarioConfig::default();
        let mut seen = HashSet::new();
        for (index, raw_line) in text.lines().enumerate() {
            let line_no = index + 1;
            let at = |msg: String| CliError::Usage(format!("{}:{line_no}: {msg}", path.display()));
            let line = match raw_line.find('#') {
                Some(pos) => &raw_line[..pos],
                None => raw_line,
            };
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(at(format!("expected `key = value`, got `{line}`")));
            };
            let key = key.trim();
            let value = value.trim();
            if !seen.insert(key.to_string()) {
                return Err(at(format!("duplicate key `{key}`")));
            }
            config.set(key, value).map_err(at)?;
        }
        Ok(config)
    }

    /// Applies one `key = value` pair. Errors describe the offending
    /// key and value but carry no location; `from_file` adds that.
    fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        fn num(key: &str, value: &str) -> Result<f64, String> {
            value
                .parse()
                .map_err(|_| format!("invalid value for `{key}`: `{value}` is not a number"))
        }
        match key {
            "beta" => self.beta = num(key, value)?,
            "gamma" => self.gamma = num(key, value)?,
            "mu" => self.mu = num(key, value)?,
            "t_end" => self.t_end = num(key, value)?,
            "n_steps" => {
                self.n_steps = value.parse().map_err(|_| {
                    format!("invalid value for `n_steps`: `{value}` is not a positive integer")
                })?
            }
            "s0" => self.s0 = num(key, value)?,
            "e0" => self.e0 = num(key, value)?,
            "i0" => self.i0 = num(key, value)?,
            "r0" => self.r0 = num(key, value)?,
            "strategy" => {
                self.strategy = value.parse().map_err(|_| {
                    format!("invalid value for `strategy`: `{value}` is not 1, 2, or 3")
                })?
            }
            "tau" => self.tau = num(key, value)?,
            "a1" => self.a1 = num(key, value)?,
            "a2" => self.a2 = num(key, value)?,
            "nu" => self.nu = num(key, value)?,
            "kappa" => self.kappa = num(key, value)?,
            "b1" => self.b1 = num(key, value)?,
            "b2" => self.b2 = num(key, value)?,
            "u_max" => self.u_max = num(key, value)?,
            "solver" => {
                self.solver = value
                    .parse()
                    .map_err(|e| format!("invalid value for `solver`: {e}"))?
            }
            "threshold" => self.threshold = num(key, value)?,
            "out_dir" => self.out_dir = value.to_string(),
            other => return Err(format!("unknown key `{other}`")),
        }
        Ok(())
    }

    pub fn strategy(&self) -> Result<Strategy, CliError> {
        Strategy::from_index(self.strategy).map_err(CliError::from)
    }

    pub fn initial_state(&self) -> EpiState {
        EpiState { s: self.s0, e: self.e0, i: self.i0, r: self.r0 }
    }

    pub fn weights(&self) -> ObjectiveWeights {
        ObjectiveWeights {
            tau: self.tau,
            a1: self.a1,
            a2: self.a2,
            nu: self.nu,
            kappa: self.kappa,
            b1: self.b1,
            b2: self.b2,
        }
    }

    /// Builds and fully validates the optimal-control problem for
    /// `strategy`, which need not be the configured one (`compare`
    /// solves all of them from a single scenario).
    pub fn to_ocp_spec(&self, strategy: Strategy) -> Result<OcpSpec, CliError> {
        if !(self.threshold.is_finite() && self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(CliError::Usage(format!(
                "invalid value for `threshold`: {} is not inside (0, 1)",
                self.threshold
            )));
        }
        let params = ModelParams::new(self.beta, self.gamma, self.mu, self.t_end)?;
        let grid = TimeGrid::from_horizon(self.t_end, self.n_steps)?;
        let spec = OcpSpec {
            strategy,
            params,
            init: self.initial_state(),
            weights: self.weights(),
            u_max: self.u_max,
            grid,
            ..OcpSpec::baseline(strategy)
        };
        spec.validate()?;
        Ok(spec)
    }

    /// The configured problem, using the configured strategy.
    pub fn configured_spec(&self) -> Result<OcpSpec, CliError> {
        self.to_ocp_spec(self.strategy()?)
    }
}
