//! Outbreak summary statistics and multi-run comparison.
//!
//! Everything here is computed on the discrete trajectory as sampled — peaks
//! are grid argmaxes, durations are grid times — so the numbers match what a
//! reader sees in the exported trajectory files, with no hidden
//! interpolation.

use crate::error::{Error, Result};
use crate::grid::Trajectory;
use crate::model::EpiState;
use std::cmp::Ordering;

/// Default epidemiological-relevance threshold: a compartment below 1% of
/// the population no longer counts as an active outbreak.
pub const DEFAULT_THRESHOLD: f64 = 0.01;

/// Largest sampled value of a curve and the first grid time attaining it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub time: f64,
    pub value: f64,
}

/// How long a curve stays at or above a threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Period {
    /// Last grid time (measured from the window start) at which the curve
    /// is still >= the threshold; 0 if it never is.
    pub days: f64,
    /// Whether the curve actually fell below the threshold before the end
    /// of the window. `false` means the outbreak outlived the study window.
    pub reached: bool,
}

impl Period {
    /// Key for comparing durations across runs: an unfinished outbreak
    /// counts as unboundedly long.
    pub fn comparison_key(&self) -> f64 {
        if self.reached {
            self.days
        } else {
            f64::INFINITY
        }
    }
}

/// Summary of one run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummaryMetrics {
    pub peak_infected: Peak,
    pub peak_exposed: Peak,
    pub final_state: EpiState,
    /// Duration the infectious fraction stays >= the threshold.
    pub infection_period: Period,
    /// Duration the exposed fraction stays >= the threshold.
    pub exposure_period: Period,
    /// Objective value, for optimized runs.
    pub objective: Option<f64>,
}

impl SummaryMetrics {
    pub fn with_objective(mut self, objective: f64) -> Self {
        self.objective = Some(objective);
        self
    }
}

fn peak_of(traj: &Trajectory, pick: impl Fn(&EpiState) -> f64) -> Peak {
    let mut best = Peak {
        time: traj.grid.time(0),
        value: pick(&traj.states[0]),
    };
    for (k, x) in traj.states.iter().enumerate().skip(1) {
        let v = pick(x);
        // Strict comparison: ties keep the earliest time.
        if v > best.value {
            best = Peak {
                time: traj.grid.time(k),
                value: v,
            };
        }
    }
    best
}

fn period_of(traj: &Trajectory, threshold: f64, pick: impl Fn(&EpiState) -> f64) -> Period {
    let t0 = traj.grid.t0;
    let mut last_above: Option<usize> = None;
    for (k, x) in traj.states.iter().enumerate() {
        if pick(x) >= threshold {
            last_above = Some(k);
        }
    }
    match last_above {
        None => Period {
            days: 0.0,
            reached: true,
        },
        Some(k) => {
            let days = traj.grid.time(k) - t0;
            Period {
                days,
                reached: k < traj.grid.n_steps,
            }
        }
    }
}

/// Computes the outbreak summary of a trajectory at the given relevance
/// threshold (fraction of population, in (0, 1)).
pub fn summarize(traj: &Trajectory, threshold: f64) -> Result<SummaryMetrics> {
    if !threshold.is_finite() || threshold <= 0.0 || threshold >= 1.0 {
        return Err(Error::InvalidParameter {
            name: "threshold",
            message: format!("must lie in (0, 1), got {threshold}"),
        });
    }
    Ok(SummaryMetrics {
        peak_infected: peak_of(traj, |x| x.i),
        peak_exposed: peak_of(traj, |x| x.e),
        final_state: *traj.final_state(),
        infection_period: period_of(traj, threshold, |x| x.i),
        exposure_period: period_of(traj, threshold, |x| x.e),
        objective: None,
    })
}

/// Metrics on which runs are ranked against each other.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComparisonMetric {
    PeakInfected,
    InfectionPeriod,
    FinalRecovered,
}

impl ComparisonMetric {
    pub const ALL: [ComparisonMetric; 3] = [
        ComparisonMetric::PeakInfected,
        ComparisonMetric::InfectionPeriod,
        ComparisonMetric::FinalRecovered,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ComparisonMetric::PeakInfected => "peak-infected",
            ComparisonMetric::InfectionPeriod => "infection-period",
            ComparisonMetric::FinalRecovered => "final-recovered",
        }
    }

    /// Scalar this metric compares.
    pub fn value_of(&self, m: &SummaryMetrics) -> f64 {
        match self {
            ComparisonMetric::PeakInfected => m.peak_infected.value,
            ComparisonMetric::InfectionPeriod => m.infection_period.comparison_key(),
            ComparisonMetric::FinalRecovered => m.final_state.r,
        }
    }

    /// Whether a smaller value is the desirable outcome.
    pub fn lower_is_better(&self) -> bool {
        !matches!(self, ComparisonMetric::FinalRecovered)
    }
}

/// One labeled run inside a comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub label: String,
    pub metrics: SummaryMetrics,
}

/// Relative standing of one pair of runs on one metric.
#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseOrdering {
    pub metric: ComparisonMetric,
    pub a: String,
    pub b: String,
    /// Ordering of the metric values (a vs b); `Equal` marks a tie.
    pub relation: Ordering,
}

/// Cross-run comparison: the per-run metrics plus every pairwise ordering
/// on every comparison metric.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub rows: Vec<ComparisonRow>,
    pub orderings: Vec<PairwiseOrdering>,
}

impl ComparisonReport {
    /// Ordering of the given pair on the given metric, if both labels exist.
    pub fn relation(&self, metric: ComparisonMetric, a: &str, b: &str) -> Option<Ordering> {
        self.orderings
            .iter()
            .find(|o| o.metric == metric && o.a == a && o.b == b)
            .map(|o| o.relation)
    }
}

/// Builds the comparison report for two or more labeled runs.
pub fn compare(runs: &[(String, SummaryMetrics)]) -> Result<ComparisonReport> {
    if runs.len() < 2 {
        return Err(Error::TooFewRuns { count: runs.len() });
    }
    let rows: Vec<ComparisonRow> = runs
        .iter()
        .map(|(label, metrics)| ComparisonRow {
            label: label.clone(),
            metrics: *metrics,
        })
        .collect();

    let mut orderings = Vec::new();
    for metric in ComparisonMetric::ALL {
        for i in 0..runs.len() {
            for j in (i + 1)..runs.len() {
                let va = metric.value_of(&runs[i].1);
                let vb = metric.value_of(&runs[j].1);
                // Values are finite or +inf (unfinished outbreaks), so a
                // total order exists.
                let relation = va.partial_cmp(&vb).unwrap_or(Ordering::Equal);
                orderings.push(PairwiseOrdering {
                    metric,
                    a: runs[i].0.clone(),
                    b: runs[j].0.clone(),
                    relation,
                });
            }
        }
    }
    Ok(ComparisonReport { rows, orderings })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::TimeGrid;

    /// Trajectory with prescribed infectious/exposed samples (other
    /// compartments filled to keep totals at 1).
    fn synthetic(i: &[f64], e: &[f64]) -> Trajectory {
        assert_eq!(i.len(), e.len());
        let n = i.len() - 1;
        let grid = TimeGrid::from_horizon(n as f64, n).unwrap();
        let states = i
            .iter()
            .zip(e)
            .map(|(&iv, &ev)| EpiState::new(1.0 - iv - ev, ev, iv, 0.0))
            .collect();
        Trajectory::new(grid, states, None).unwrap()
    }

    #[test]
    fn peak_takes_the_first_of_tied_maxima() {
        let traj = synthetic(
            &[0.05, 0.30, 0.30, 0.10, 0.02],
            &[0.01, 0.01, 0.01, 0.01, 0.01],
        );
        let m = summarize(&traj, 0.01).unwrap();
        assert_eq!(m.peak_infected.value, 0.30);
        assert_eq!(m.peak_infected.time, 1.0, "tie must resolve to the earlier time");
    }

    #[test]
    fn period_is_the_last_time_at_or_above_threshold() {
        let i = [0.05, 0.20, 0.009, 0.009, 0.02, 0.005, 0.001];
        let e = [0.0; 7];
        let m = summarize(&synthetic(&i, &e), 0.01).unwrap();
        // Last sample >= 0.01 is at t = 4, and the curve does end below the
        // threshold inside the window.
        assert_eq!(m.infection_period.days, 4.0);
        assert!(m.infection_period.reached);
        // The exposed curve never reaches the threshold at all.
        assert_eq!(m.exposure_period.days, 0.0);
        assert!(m.exposure_period.reached);
    }

    #[test]
    fn outbreak_still_active_at_the_end_is_flagged_not_reached() {
        // Sitting exactly at the threshold all the way to the horizon.
        let i = [0.01; 6];
        let e = [0.0; 6];
        let m = summarize(&synthetic(&i, &e), 0.01).unwrap();
        assert_eq!(m.infection_period.days, 5.0); // the full window
        assert!(!m.infection_period.reached);
        assert_eq!(m.infection_period.comparison_key(), f64::INFINITY);
    }

    #[test]
    fn threshold_is_validated() {
        let traj = synthetic(&[0.05, 0.02], &[0.0, 0.0]);
        assert!(summarize(&traj, 0.0).is_err());
        assert!(summarize(&traj, 1.0).is_err());
        assert!(summarize(&traj, f64::NAN).is_err());
        let err = summarize(&traj, -0.5).unwrap_err();
        assert!(err.to_string().contains("threshold"));
    }

    #[test]
    fn comparison_needs_two_runs_and_reports_ties() {
        let m = summarize(&synthetic(&[0.05, 0.02, 0.005], &[0.0; 3]), 0.01).unwrap();
        assert_eq!(
            compare(&[("only".to_string(), m)]).unwrap_err(),
            Error::TooFewRuns { count: 1 }
        );

        // Identical runs tie on every metric.
        let report = compare(&[("a".to_string(), m), ("b".to_string(), m)]).unwrap();
        assert_eq!(report.orderings.len(), 3);
        for o in &report.orderings {
            assert_eq!(o.relation, Ordering::Equal, "{:?} should tie", o.metric);
        }
    }

    #[test]
    fn comparison_orders_distinct_runs() {
        let mild = summarize(&synthetic(&[0.05, 0.02, 0.005, 0.001], &[0.0; 4]), 0.01).unwrap();
        let severe =
            summarize(&synthetic(&[0.05, 0.30, 0.20, 0.10], &[0.0; 4]), 0.01).unwrap();
        let report = compare(&[("mild".into(), mild), ("severe".into(), severe)]).unwrap();

        assert_eq!(
            report.relation(ComparisonMetric::PeakInfected, "mild", "severe"),
            Some(Ordering::Less)
        );
        // mild ends below threshold (finite period), severe is still raging.
        assert_eq!(
            report.relation(ComparisonMetric::InfectionPeriod, "mild", "severe"),
            Some(Ordering::Less)
        );
    }
}
