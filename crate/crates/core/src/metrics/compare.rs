use serde::{Deserialize, Serialize};

use super::ScenarioSummary;
use crate::analytic::AnalyticPoint;

pub const DEFAULT_THRESHOLD: f64 = 0.15;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricComparison {
    pub metric: String,
    pub analytic: Option<f64>,
    pub sim: Option<f64>,
    /// `(sim - analytic) / analytic`; absent when either side is missing or
    /// the analytic value is zero.
    pub relative_error: Option<f64>,
    pub flagged: bool,
}

impl MetricComparison {
    pub fn new(metric: &str, analytic: Option<f64>, sim: Option<f64>, threshold: f64) -> Self {
        let relative_error = match (analytic, sim) {
            (Some(a), Some(s)) if a != 0.0 => Some((s - a) / a),
            _ => None,
        };
        MetricComparison {
            metric: metric.into(),
            analytic,
            sim,
            relative_error,
            flagged: relative_error.is_some_and(|e| e.abs() > threshold),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub threshold: f64,
    pub metrics: Vec<MetricComparison>,
}

impl ComparisonReport {
    pub fn any_flagged(&self) -> bool {
        self.metrics.iter().any(|m| m.flagged)
    }

    pub fn get(&self, metric: &str) -> Option<&MetricComparison> {
        self.metrics.iter().find(|m| m.metric == metric)
    }
}

/// Relative error of the simulated mean latency and mean aggregate throughput
/// against the model.
pub fn compare_engines(analytic: &AnalyticPoint, sim: &ScenarioSummary, threshold: f64) -> ComparisonReport {
    ComparisonReport {
        threshold,
        metrics: vec![
            MetricComparison::new("latency_ms", analytic.latency_ms, sim.latency_ms.mean(), threshold),
            MetricComparison::new(
                "ax_throughput_mbps",
                (analytic.solution.n_ax > 0).then_some(analytic.ax_throughput_mbps),
                sim.ax_throughput_mbps.mean(),
                threshold,
            ),
        ],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_values_have_no_error() {
        let m = MetricComparison::new("x", Some(3.0), Some(3.0), DEFAULT_THRESHOLD);
        assert_eq!(m.relative_error, Some(0.0));
        assert!(!m.flagged);
    }

    #[test]
    fn ten_percent_is_not_flagged() {
        let m = MetricComparison::new("latency_ms", Some(8.0), Some(8.8), DEFAULT_THRESHOLD);
        assert!((m.relative_error.unwrap() - 0.10).abs() < 1e-12);
        assert!(!m.flagged);
        let m = MetricComparison::new("latency_ms", Some(8.0), Some(9.3), DEFAULT_THRESHOLD);
        assert!(m.flagged);
    }

    #[test]
    fn missing_side_is_never_flagged() {
        let m = MetricComparison::new("x", None, Some(1.0), DEFAULT_THRESHOLD);
        assert_eq!(m.relative_error, None);
        assert!(!m.flagged);
    }
}
