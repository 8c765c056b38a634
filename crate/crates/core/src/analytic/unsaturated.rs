//! Sensing delay and legacy throughput when sensing requests arrive at a
//! finite rate, so the other sensing APs are only intermittently contending.

use serde::{Deserialize, Serialize};

use super::delay::sensing_delay;
use super::fixed_point::solve_population;
use super::options::AnalyticOptions;
use super::residency::binomial;
use super::throughput::{ax_throughput, AxThroughput};
use crate::error::{Error, Result};
use crate::model::{AxTrafficProfile, DurationTable, PopulationMix};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixtureTerm {
    /// Number of other sensing APs with a pending request.
    pub active_others: u32,
    pub weight: f64,
    pub delay: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnsaturatedDelay {
    /// Mean latency from request to end of the reporting phase, microseconds.
    pub e_t: f64,
    /// Probability that a sensing AP has no pending request.
    pub p0: f64,
    /// Offered load `lambda * E[T]`.
    pub utilization: f64,
    /// `|P0 - (1 - lambda E[T])|` at the returned point.
    pub residual: f64,
    pub mixture: Vec<MixtureTerm>,
}

fn binomial_weights(n: u32, p_active: f64) -> Vec<f64> {
    (0..=n)
        .map(|k| binomial(n, k) * p_active.powi(k as i32) * (1.0 - p_active).powi((n - k) as i32))
        .collect()
}

/// Saturated delay of the tagged AP with `k` other sensing APs contending, for `k = 0..n_bf`.
fn conditional_delays(pop: &PopulationMix, dur: &DurationTable, opts: &AnalyticOptions) -> Result<Vec<f64>> {
    (0..pop.n_bf)
        .map(|k| {
            let sub = PopulationMix { n_bf: k + 1, ..*pop };
            let d = sensing_delay(&sub, dur, opts)?;
            Ok(d.latency(opts.arrival_residual))
        })
        .collect()
}

fn mixture_mean(delays: &[f64], p0: f64) -> f64 {
    let others = delays.len() as u32 - 1;
    binomial_weights(others, 1.0 - p0)
        .iter()
        .zip(delays)
        .map(|(w, t)| w * t)
        .sum()
}

/// Solves `P0 = 1 - lambda E[T](P0)` where `E[T]` mixes the conditional
/// saturated delays over the number of busy peers. `lambda` is in requests per
/// microsecond.
pub fn unsaturated_sensing_delay(
    pop: &PopulationMix,
    dur: &DurationTable,
    lambda: f64,
    opts: &AnalyticOptions,
) -> Result<UnsaturatedDelay> {
    if pop.n_bf == 0 {
        return Err(Error::invalid("population.n_bf", "no sensing AP to evaluate"));
    }
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::invalid("arrival", "request rate must be > 0"));
    }
    let delays = conditional_delays(pop, dur, opts)?;
    // h(p0) = p0 - (1 - lambda E(p0)) is increasing in p0 since E falls as peers idle
    let h = |p0: f64| p0 - 1.0 + lambda * mixture_mean(&delays, p0);
    let all_busy = mixture_mean(&delays, 0.0);
    if h(0.0) >= 0.0 {
        return Err(Error::Unstable {
            lambda,
            service_rate: 1.0 / all_busy,
        });
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut iterations = 0;
    while hi - lo > 1e-14 && iterations < 200 {
        let mid = 0.5 * (lo + hi);
        if h(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    let p0 = 0.5 * (lo + hi);
    let e_t = mixture_mean(&delays, p0);
    let weights = binomial_weights(pop.n_bf - 1, 1.0 - p0);
    let mixture = weights
        .iter()
        .zip(&delays)
        .enumerate()
        .map(|(k, (&weight, &delay))| MixtureTerm {
            active_others: k as u32,
            weight,
            delay,
        })
        .collect();
    log::debug!("unsaturated fixed point p0 = {p0:.6} after {iterations} bisections");
    Ok(UnsaturatedDelay {
        e_t,
        p0,
        utilization: lambda * e_t,
        residual: h(p0).abs(),
        mixture,
    })
}

/// Legacy throughput averaged over the number of sensing APs that are
/// contending, each independently busy with probability `1 - p0`.
pub fn unsaturated_ax_throughput(
    pop: &PopulationMix,
    dur: &DurationTable,
    traffic: &AxTrafficProfile,
    p0: f64,
    opts: &AnalyticOptions,
) -> Result<AxThroughput> {
    let weights = binomial_weights(pop.n_bf, 1.0 - p0);
    let mut acc = AxThroughput {
        normalized: 0.0,
        aggregate_bps: 0.0,
    };
    for (m, w) in weights.into_iter().enumerate() {
        if w == 0.0 || (m == 0 && pop.n_ax == 0) {
            continue;
        }
        let sub = PopulationMix { n_bf: m as u32, ..*pop };
        let sol = solve_population(&sub, opts)?;
        let t = ax_throughput(&sol, dur, traffic);
        acc.normalized += w * t.normalized;
        acc.aggregate_bps += w * t.aggregate_bps;
    }
    Ok(acc)
}
