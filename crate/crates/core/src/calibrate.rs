//! Choice of the data rate that puts the one-sensing-AP, one-legacy-AP
//! baseline on its reference latency and throughput.
//!
//! Frame-time constants stay fixed. With the TXOP limit binding, the rate
//! mostly moves throughput and barely moves latency, so a one-dimensional
//! grid is enough.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{RunMode, ScenarioConfig};
use crate::error::{Error, Result};
use crate::metrics::{summarize, BinRule, RunMetrics};
use crate::sim;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CalibrationTarget {
    pub median_latency_ms: f64,
    pub throughput_mbps: f64,
    /// Accepted relative deviation on both figures.
    pub tolerance: f64,
}

impl Default for CalibrationTarget {
    fn default() -> Self {
        CalibrationTarget {
            median_latency_ms: 8.0,
            throughput_mbps: 56.0,
            tolerance: 0.2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationPoint {
    pub rate: f64,
    pub ax_mpdus: u32,
    pub median_latency_ms: Option<f64>,
    pub throughput_mbps: f64,
    pub latency_deviation: f64,
    pub throughput_deviation: f64,
    /// Euclidean norm of the two relative deviations.
    pub score: f64,
}

impl CalibrationPoint {
    pub fn within(&self, target: &CalibrationTarget) -> bool {
        self.latency_deviation.abs() <= target.tolerance && self.throughput_deviation.abs() <= target.tolerance
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub target: CalibrationTarget,
    pub points: Vec<CalibrationPoint>,
    pub best: CalibrationPoint,
}

impl CalibrationReport {
    pub fn within_tolerance(&self) -> bool {
        self.best.within(&self.target)
    }
}

/// Default rate grid in Mbit/s.
pub fn default_rates() -> Vec<f64> {
    (40..=90).map(f64::from).collect()
}

/// The baseline scenario: `base` reduced to one AP of each technology.
pub fn baseline(base: &ScenarioConfig) -> ScenarioConfig {
    let mut c = base.clone();
    c.population.n_bf = 1;
    c.population.n_ax = 1;
    c.mode = RunMode::Sim;
    c.bandwidth_mhz = None;
    c
}

/// Simulates the baseline at every rate over the seeds of `base` and keeps
/// the rate with the smallest combined deviation; ties go to the lower rate.
pub fn calibrate_rate(base: &ScenarioConfig, rates: &[f64], target: &CalibrationTarget) -> Result<CalibrationReport> {
    if rates.is_empty() {
        return Err(Error::invalid("rates", "empty rate grid"));
    }
    let seeds = base.seeds.resolve();
    let configs = rates
        .iter()
        .map(|&rate| {
            let mut c = baseline(base);
            c.timing.rate = rate;
            c.validate()?;
            Ok(c)
        })
        .collect::<Result<Vec<_>>>()?;

    let points = configs
        .par_iter()
        .map(|c| {
            let runs = seeds
                .par_iter()
                .map(|&s| sim::run(c, s))
                .collect::<Result<Vec<RunMetrics>>>()?;
            let summary = summarize(&runs, BinRule::Count(1));
            let median = summary.latency_ms.median();
            let throughput = summary.ax_throughput_mbps.mean().unwrap_or(0.0);
            let latency_deviation = median.map_or(f64::INFINITY, |m| m / target.median_latency_ms - 1.0);
            let throughput_deviation = throughput / target.throughput_mbps - 1.0;
            Ok(CalibrationPoint {
                rate: c.timing.rate,
                ax_mpdus: c.durations()?.ax_mpdus,
                median_latency_ms: median,
                throughput_mbps: throughput,
                latency_deviation,
                throughput_deviation,
                score: latency_deviation.hypot(throughput_deviation),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let best = *points
        .iter()
        .min_by(|a, b| a.score.total_cmp(&b.score))
        .expect("non-empty grid");
    Ok(CalibrationReport {
        target: *target,
        points,
        best,
    })
}
