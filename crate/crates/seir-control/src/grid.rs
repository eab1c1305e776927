//! Uniform time grid and the sampled trajectories that live on it.

use crate::error::{Error, Result};
use crate::model::{ControlValue, EpiState};

/// Uniform grid of `n_steps + 1` nodes covering `[t0, t_end]`.
///
/// Controls are piecewise constant on the `n_steps` intervals; states are
/// sampled at the nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub t0: f64,
    pub t_end: f64,
    pub n_steps: usize,
}

impl TimeGrid {
    pub fn new(t0: f64, t_end: f64, n_steps: usize) -> Result<Self> {
        if !t0.is_finite() || !t_end.is_finite() || t_end <= t0 {
            return Err(Error::InvalidParameter {
                name: "t_end",
                message: format!("grid needs finite t_end > t0, got [{t0}, {t_end}]"),
            });
        }
        if n_steps == 0 {
            return Err(Error::InvalidParameter {
                name: "n_steps",
                message: "must be at least 1".into(),
            });
        }
        Ok(Self { t0, t_end, n_steps })
    }

    /// Grid starting at t = 0, the common case.
    pub fn from_horizon(t_end: f64, n_steps: usize) -> Result<Self> {
        Self::new(0.0, t_end, n_steps)
    }

    /// Step size `(t_end - t0) / n_steps`.
    pub fn h(&self) -> f64 {
        (self.t_end - self.t0) / self.n_steps as f64
    }

    /// Time of node `k` (0 ..= n_steps).
    pub fn time(&self, k: usize) -> f64 {
        if k == self.n_steps {
            // Land exactly on the endpoint regardless of rounding in h().
            self.t_end
        } else {
            self.t0 + k as f64 * self.h()
        }
    }

    /// Number of nodes, `n_steps + 1`.
    pub fn n_nodes(&self) -> usize {
        self.n_steps + 1
    }

    /// All node times in order.
    pub fn times(&self) -> Vec<f64> {
        (0..self.n_nodes()).map(|k| self.time(k)).collect()
    }
}

impl Default for TimeGrid {
    /// 100 days at 1000 steps (h = 0.1), the benchmark resolution.
    fn default() -> Self {
        Self {
            t0: 0.0,
            t_end: 100.0,
            n_steps: 1000,
        }
    }
}

/// States at every grid node, plus the control schedule that produced them
/// (absent for uncontrolled runs).
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub grid: TimeGrid,
    /// `grid.n_nodes()` states, `states[k]` at `grid.time(k)`.
    pub states: Vec<EpiState>,
    /// `grid.n_steps` controls; `controls[k]` is held on `[time(k), time(k+1))`.
    pub controls: Option<Vec<ControlValue>>,
}

impl Trajectory {
    /// Builds a trajectory, checking that the vector lengths match the grid.
    pub fn new(
        grid: TimeGrid,
        states: Vec<EpiState>,
        controls: Option<Vec<ControlValue>>,
    ) -> Result<Self> {
        if states.len() != grid.n_nodes() {
            return Err(Error::ScheduleMismatch {
                expected: grid.n_nodes(),
                actual: states.len(),
            });
        }
        if let Some(c) = &controls {
            if c.len() != grid.n_steps {
                return Err(Error::ScheduleMismatch {
                    expected: grid.n_steps,
                    actual: c.len(),
                });
            }
        }
        Ok(Self {
            grid,
            states,
            controls,
        })
    }

    pub fn n_steps(&self) -> usize {
        self.grid.n_steps
    }

    pub fn initial_state(&self) -> &EpiState {
        &self.states[0]
    }

    pub fn final_state(&self) -> &EpiState {
        &self.states[self.states.len() - 1]
    }

    pub fn is_controlled(&self) -> bool {
        self.controls.is_some()
    }

    /// Control schedule, or an error for uncontrolled runs.
    pub fn controls(&self) -> Result<&[ControlValue]> {
        self.controls.as_deref().ok_or(Error::MissingControls)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_rejects_degenerate_windows() {
        assert!(TimeGrid::new(0.0, 0.0, 10).is_err());
        assert!(TimeGrid::new(5.0, 1.0, 10).is_err());
        assert!(TimeGrid::new(0.0, 10.0, 0).is_err());
        assert!(TimeGrid::new(0.0, f64::INFINITY, 10).is_err());
    }

    #[test]
    fn node_times_span_the_window_exactly() {
        let g = TimeGrid::from_horizon(100.0, 1000).unwrap();
        assert_eq!(g.h(), 0.1);
        assert_eq!(g.time(0), 0.0);
        assert_eq!(g.time(1000), 100.0);
        assert_eq!(g.n_nodes(), 1001);
        // Interior nodes are t0 + k*h.
        assert!((g.time(500) - 50.0).abs() < 1e-12);
    }

    #[test]
    fn trajectory_checks_vector_lengths() {
        let g = TimeGrid::from_horizon(1.0, 2).unwrap();
        let x = EpiState::baseline();
        assert!(Trajectory::new(g, vec![x; 3], None).is_ok());
        assert!(Trajectory::new(g, vec![x; 2], None).is_err());
        let ok = Trajectory::new(g, vec![x; 3], Some(vec![ControlValue::ZERO; 2]));
        assert!(ok.is_ok());
        let bad = Trajectory::new(g, vec![x; 3], Some(vec![ControlValue::ZERO; 3]));
        assert!(bad.is_err());
    }
}
