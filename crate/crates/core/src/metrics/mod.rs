//! Aggregation of per-seed runs into reporting quantities.

mod compare;
mod run;
mod summary;

pub use compare::{compare_engines, ComparisonReport, MetricComparison, DEFAULT_THRESHOLD};
pub use run::{BackoffStats, RunMetrics, Tally};
pub use summary::{
    failure_rate, quantile_sorted, summarize, BinRule, DistributionSummary, FailureRate, HistogramBin, Quantiles,
    ScenarioSummary, SeedSummary, DEFAULT_BINS,
};
