use serde::{Deserialize, Serialize};

use super::RunMetrics;

pub const DEFAULT_BINS: usize = 64;

/// How histogram bins are laid out over the sample range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BinRule {
    /// Equal-width bins between the smallest and largest sample.
    Count(usize),
    /// Width `2 IQR / n^(1/3)`; falls back to the default count when the
    /// interquartile range is zero.
    FreedmanDiaconis,
}

impl Default for BinRule {
    fn default() -> Self {
        BinRule::Count(DEFAULT_BINS)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub lo: f64,
    pub hi: f64,
    pub count: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quantiles {
    pub mean: f64,
    pub median: f64,
    pub p5: f64,
    pub p25: f64,
    pub p75: f64,
    pub p95: f64,
}

/// Location, spread and histogram of a pooled sample. `stats` is absent for
/// an empty sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionSummary {
    pub n_samples: usize,
    pub stats: Option<Quantiles>,
    pub histogram: Vec<HistogramBin>,
}

/// Linear-interpolation quantile of sorted data (`h = (n - 1) p`).
pub fn quantile_sorted(sorted: &[f64], p: f64) -> Option<f64> {
    let last = sorted.len().checked_sub(1)?;
    let h = last as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(last);
    Some(sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo]))
}

impl DistributionSummary {
    /// Summary of `samples` in any order; NaNs are ignored.
    pub fn from_samples(samples: &[f64], rule: BinRule) -> Self {
        let mut sorted: Vec<f64> = samples.iter().copied().filter(|v| !v.is_nan()).collect();
        sorted.sort_by(f64::total_cmp);
        Self::from_sorted(&sorted, rule)
    }

    fn from_sorted(sorted: &[f64], rule: BinRule) -> Self {
        let n = sorted.len();
        let q = |p| quantile_sorted(sorted, p);
        let stats = (n > 0).then(|| Quantiles {
            // summing in sorted order keeps the mean independent of input order
            mean: sorted.iter().sum::<f64>() / n as f64,
            median: q(0.5).unwrap_or_default(),
            p5: q(0.05).unwrap_or_default(),
            p25: q(0.25).unwrap_or_default(),
            p75: q(0.75).unwrap_or_default(),
            p95: q(0.95).unwrap_or_default(),
        });
        DistributionSummary {
            n_samples: n,
            histogram: histogram(sorted, rule, stats.as_ref()),
            stats,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.n_samples == 0
    }

    pub fn mean(&self) -> Option<f64> {
        self.stats.map(|s| s.mean)
    }

    pub fn median(&self) -> Option<f64> {
        self.stats.map(|s| s.median)
    }
}

fn histogram(sorted: &[f64], rule: BinRule, stats: Option<&Quantiles>) -> Vec<HistogramBin> {
    let (Some(&lo), Some(&hi), Some(stats)) = (sorted.first(), sorted.last(), stats) else {
        return Vec::new();
    };
    let n = sorted.len();
    if hi <= lo {
        return vec![HistogramBin {
            lo,
            hi,
            count: n as u64,
        }];
    }
    let bins = match rule {
        BinRule::Count(k) => k.max(1),
        BinRule::FreedmanDiaconis => {
            let width = 2.0 * (stats.p75 - stats.p25) / (n as f64).cbrt();
            if width > 0.0 {
                (((hi - lo) / width).ceil() as usize).clamp(1, 10_000)
            } else {
                DEFAULT_BINS
            }
        }
    };
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0u64; bins];
    for &v in sorted {
        let k = (((v - lo) / width) as usize).min(bins - 1);
        counts[k] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(k, count)| HistogramBin {
            lo: lo + k as f64 * width,
            hi: if k + 1 == bins { hi } else { lo + (k + 1) as f64 * width },
            count,
        })
        .collect()
}

/// Share of sensing attempts that were dropped, in percent. `percent` is
/// absent when no attempt reached a verdict.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FailureRate {
    pub dropped: u64,
    pub attempted: u64,
    pub percent: Option<f64>,
}

impl FailureRate {
    pub fn is_undefined(&self) -> bool {
        self.percent.is_none()
    }
}

pub fn failure_rate(runs: &[RunMetrics]) -> FailureRate {
    let dropped = runs.iter().map(|r| r.dropped_count).sum();
    let attempted = runs.iter().map(|r| r.attempted_count).sum();
    FailureRate {
        dropped,
        attempted,
        percent: (attempted > 0).then(|| 100.0 * dropped as f64 / attempted as f64),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeedSummary {
    pub seed: u64,
    pub latency_mean_ms: Option<f64>,
    pub latency_median_ms: Option<f64>,
    pub ax_throughput_mbps: f64,
    pub failure_percent: Option<f64>,
}

/// Pooled statistics of one scenario over all its seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSummary {
    pub n_runs: usize,
    /// Completed sensing latencies pooled across seeds, in ms.
    pub latency_ms: DistributionSummary,
    /// Aggregate legacy throughput of each run, in Mbit/s.
    pub ax_throughput_mbps: DistributionSummary,
    pub failure: FailureRate,
    /// Per-seed figures, ordered by seed.
    pub per_seed: Vec<SeedSummary>,
}

/// Pools every run of one scenario. The result does not depend on the order
/// of `runs`.
pub fn summarize(runs: &[RunMetrics], rule: BinRule) -> ScenarioSummary {
    let latencies: Vec<f64> = runs
        .iter()
        .flat_map(|r| r.latency_samples.iter().map(|us| us / 1e3))
        .collect();
    let throughput: Vec<f64> = runs.iter().map(|r| r.ax_throughput_bps() / 1e6).collect();
    let mut per_seed: Vec<SeedSummary> = runs
        .iter()
        .map(|r| {
            let lat = DistributionSummary::from_samples(
                &r.latency_samples.iter().map(|us| us / 1e3).collect::<Vec<_>>(),
                BinRule::Count(1),
            );
            SeedSummary {
                seed: r.seed,
                latency_mean_ms: lat.mean(),
                latency_median_ms: lat.median(),
                ax_throughput_mbps: r.ax_throughput_bps() / 1e6,
                failure_percent: failure_rate(std::slice::from_ref(r)).percent,
            }
        })
        .collect();
    per_seed.sort_by(|a, b| {
        a.seed
            .cmp(&b.seed)
            .then(a.ax_throughput_mbps.total_cmp(&b.ax_throughput_mbps))
    });
    ScenarioSummary {
        n_runs: runs.len(),
        latency_ms: DistributionSummary::from_samples(&latencies, rule),
        ax_throughput_mbps: DistributionSummary::from_samples(&throughput, rule),
        failure: failure_rate(runs),
        per_seed,
    }
}
