use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::sim::{OutcomeKind, SensingRecord};

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Tally {
    pub count: u64,
    /// Channel time in µs.
    pub span: f64,
}

/// Time a sensing AP spent in backoff against the number of counter decrements.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct BackoffStats {
    pub time: f64,
    pub decrements: u64,
}

impl BackoffStats {
    /// Mean channel time per backoff decrement.
    pub fn mean_slot(&self) -> Option<f64> {
        (self.decrements > 0).then(|| self.time / self.decrements as f64)
    }
}

/// Everything measured in one simulation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub seed: u64,
    pub duration_us: f64,
    /// Completed sensing latencies in µs.
    pub latency_samples: Vec<f64>,
    pub dropped_count: u64,
    /// Requests that reached a verdict, completed or dropped.
    pub attempted_count: u64,
    /// Requests issued, including any still open when the run ended.
    pub request_count: u64,
    /// Delivered MSDU bits per second of each legacy AP.
    pub per_ap_goodput: Vec<f64>,
    pub channel_tally: BTreeMap<OutcomeKind, Tally>,
    pub records: Vec<SensingRecord>,
    /// Pooled over every sensing AP.
    pub backoff: BackoffStats,
}

impl RunMetrics {
    pub fn ax_throughput_bps(&self) -> f64 {
        self.per_ap_goodput.iter().sum()
    }

    pub fn tally(&self, kind: OutcomeKind) -> Tally {
        self.channel_tally.get(&kind).copied().unwrap_or_default()
    }

    pub fn event_count(&self) -> u64 {
        self.channel_tally.values().map(|t| t.count).sum()
    }

    pub fn total_span(&self) -> f64 {
        self.channel_tally.values().map(|t| t.span).sum()
    }

    /// Fraction of channel events of the given kinds.
    pub fn event_frequency(&self, pred: impl Fn(OutcomeKind) -> bool) -> f64 {
        let n: u64 = self
            .channel_tally
            .iter()
            .filter(|(k, _)| pred(**k))
            .map(|(_, t)| t.count)
            .sum();
        n as f64 / self.event_count().max(1) as f64
    }

    pub fn idle_fraction(&self) -> f64 {
        self.tally(OutcomeKind::Idle).span / self.total_span()
    }

    pub fn busy_fraction(&self) -> f64 {
        let busy: f64 = self
            .channel_tally
            .iter()
            .filter(|(k, _)| !k.is_idle())
            .map(|(_, t)| t.span)
            .sum();
        busy / self.total_span()
    }
}
