//! Closed-form coexistence model (attempt-probability fixed point, legacy
//! throughput, sensing delay) and the transient model of aligned request batches.

mod delay;
mod fixed_point;
mod options;
mod residency;
mod throughput;
mod transient;
mod unsaturated;

use serde::{Deserialize, Serialize};

pub use delay::{
    busy_success_probability, delay_at, mean_backoff_slot, saturated_sensing_delay, sensing_delay, BackoffSlot,
    DelayBreakdown, SaturatedDelay, StageTerm,
};
pub use fixed_point::{attempt_probability, solve_population, FixedPointSolution};
pub use options::{AnalyticOptions, BatchModel, BusySuccessForm, DecrementModel, FreezeModel, ResidencyModel};
pub use residency::{collision_transitions, mean_window, q_pmf, slot_residency, OthersView, SlotResidency};
pub use throughput::{ax_throughput, mean_event_time, AxThroughput, EventWeights};
pub use transient::{transient_batch, TransientBatch};
pub use unsaturated::{unsaturated_ax_throughput, unsaturated_sensing_delay, MixtureTerm, UnsaturatedDelay};

use crate::config::{ArrivalMode, PeriodicPhase, ScenarioConfig};
use crate::error::Result;

/// Model output for one scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticPoint {
    /// Fixed point with every sensing AP contending.
    pub solution: FixedPointSolution,
    /// Mean sensing latency in milliseconds; absent without sensing APs.
    pub latency_ms: Option<f64>,
    /// Aggregate legacy MSDU throughput in Mbit/s.
    pub ax_throughput_mbps: f64,
    pub ax_normalized: f64,
    /// Probability a sensing AP is idle; 0 unless the unsaturated model is used.
    pub p0: f64,
    /// Share of sensing requests superseded before their session starts;
    /// only the batch model predicts it.
    pub drop_probability: Option<f64>,
    pub saturated: Option<DelayBreakdown>,
    pub unsaturated: Option<UnsaturatedDelay>,
    pub batch: Option<TransientBatch>,
}

pub fn solve_fixed_point(config: &ScenarioConfig) -> Result<FixedPointSolution> {
    solve_population(&config.population, &config.analytic)
}

pub fn evaluate(config: &ScenarioConfig) -> Result<AnalyticPoint> {
    let dur = config.durations()?;
    let pop = &config.population;
    let opts = &config.analytic;
    let solution = solve_population(pop, opts)?;
    let mut point = AnalyticPoint {
        solution,
        latency_ms: None,
        ax_throughput_mbps: 0.0,
        ax_normalized: 0.0,
        p0: 0.0,
        drop_probability: None,
        saturated: None,
        unsaturated: None,
        batch: None,
    };
    let aligned_batch = match config.arrival {
        ArrivalMode::Periodic { interval_ms } => {
            (config.phase == PeriodicPhase::Aligned && opts.batch == BatchModel::Transient).then_some(interval_ms * 1e3)
        }
        _ => None,
    };
    let throughput = match (config.arrival.rate_per_us(), aligned_batch, pop.n_bf) {
        (_, _, 0) | (None, _, _) => ax_throughput(&solution, &dur, &config.traffic),
        (Some(_), Some(interval), _) => {
            let b = transient_batch(pop, &dur, &config.traffic, interval)?;
            point.latency_ms = Some(b.latency / 1e3);
            point.drop_probability = Some(b.drop_probability);
            point.batch = Some(b);
            AxThroughput {
                normalized: b.ax_normalized,
                aggregate_bps: b.ax_throughput_bps,
            }
        }
        (Some(lambda), None, _) => {
            let u = unsaturated_sensing_delay(pop, &dur, lambda, opts)?;
            point.p0 = u.p0;
            point.latency_ms = Some(u.e_t / 1e3);
            let t = unsaturated_ax_throughput(pop, &dur, &config.traffic, u.p0, opts)?;
            point.unsaturated = Some(u);
            t
        }
    };
    if pop.n_bf > 0 {
        let d = delay_at(&solution, pop, &dur, opts)?;
        if matches!(config.arrival, ArrivalMode::Continuous) {
            // back-to-back requests start right after the previous session, no residual wait
            point.latency_ms = Some(d.latency(false) / 1e3);
        }
        point.saturated = Some(d);
    }
    point.ax_throughput_mbps = throughput.aggregate_bps / 1e6;
    point.ax_normalized = throughput.normalized;
    Ok(point)
}
