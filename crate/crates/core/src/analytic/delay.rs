//! Saturated access delay of a tagged sensing AP.

use serde::{Deserialize, Serialize};

use super::fixed_point::{solve_population, FixedPointSolution};
use super::options::{AnalyticOptions, BusySuccessForm, DecrementModel};
use super::residency::{mean_window, slot_residency, OthersView, SlotResidency};
use crate::error::{Error, Result};
use crate::model::{DurationTable, EdcaClass, PopulationMix};

/// Average time between backoff decrements of the tagged sensing AP.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BackoffSlot {
    pub f: f64,
    pub f_b: f64,
    pub f_t: f64,
    pub cw_bar: f64,
    pub p_i: f64,
    pub p_s: f64,
    pub p_c: f64,
    pub p_d: f64,
}

/// Probability that another AP's successful transmission occupies a backoff slot.
pub fn busy_success_probability(sol: &FixedPointSolution, form: BusySuccessForm) -> f64 {
    let (tb, ta) = (sol.tau_bf, sol.tau_ax);
    let others_bf = sol.n_bf.saturating_sub(1) as i32;
    let n_ax = sol.n_ax as i32;
    let from_bf = if others_bf >= 1 {
        others_bf as f64 * tb * (1.0 - tb).powi(others_bf - 1) * (1.0 - ta).powi(n_ax)
    } else {
        0.0
    };
    let mut from_ax = if n_ax >= 1 {
        n_ax as f64 * ta * (1.0 - ta).powi(n_ax - 1)
    } else {
        0.0
    };
    if form == BusySuccessForm::Corrected {
        from_ax *= (1.0 - tb).powi(others_bf);
    }
    from_bf + from_ax
}

pub fn mean_backoff_slot(
    sol: &FixedPointSolution,
    res: &SlotResidency,
    edca_bf: &EdcaClass,
    opts: &AnalyticOptions,
) -> Result<BackoffSlot> {
    let p_i = 1.0 - sol.p_bf;
    let p_s = busy_success_probability(sol, opts.busy_success).min(1.0 - p_i);
    let p_c = (1.0 - p_s - p_i).max(0.0);
    let p_d = match opts.decrement {
        DecrementModel::Unity => 1.0,
        DecrementModel::IdleProbability => p_i,
    };
    if p_d <= 0.0 {
        return Err(Error::SingularModel {
            message: "backoff decrement probability is zero".into(),
        });
    }
    let per_slot = p_i * res.d_i + p_s * res.d_s + p_c * res.d_c;
    let f_b = per_slot / p_d;
    let cw_bar = mean_window(sol.p_bf, edca_bf);
    let f_t = (cw_bar - 1.0) * per_slot / cw_bar;
    let f = (1.0 - sol.tau_bf) * f_b + sol.tau_bf * f_t;
    Ok(BackoffSlot {
        f,
        f_b,
        f_t,
        cw_bar,
        p_i,
        p_s,
        p_c,
        p_d,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StageTerm {
    pub stage: u32,
    /// Probability that access succeeds exactly at this attempt.
    pub p_success: f64,
    /// Mean delay when access succeeds at this attempt.
    pub delay: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaturatedDelay {
    pub mean: f64,
    pub stages: Vec<StageTerm>,
}

/// Mean delay from the start of contention to the end of the reporting phase,
/// conditioned on access within `L + 1` attempts.
pub fn saturated_sensing_delay(
    p_coll: f64,
    dur: &DurationTable,
    mean_slot: f64,
    edca_bf: &EdcaClass,
) -> SaturatedDelay {
    let mut stages = Vec::with_capacity(edca_bf.retry_limit as usize + 1);
    let mut backoff = 0.0;
    let mut total = 0.0;
    let mut mass = 0.0;
    for i in 0..=edca_bf.retry_limit {
        backoff += (edca_bf.window(i) as f64 - 1.0) / 2.0 * mean_slot;
        let delay = dur.t_cfp() + i as f64 * dur.t_c_bf + backoff;
        let p_success = (1.0 - p_coll) * p_coll.powi(i as i32);
        total += p_success * delay;
        mass += p_success;
        stages.push(StageTerm {
            stage: i,
            p_success,
            delay,
        });
    }
    let mean = if mass > 0.0 {
        total / mass
    } else {
        // certain collision: every stage equally reached; report the last one
        stages.last().map(|s| s.delay).unwrap_or(0.0)
    };
    SaturatedDelay { mean, stages }
}

/// Full saturated delay evaluation of one population mix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DelayBreakdown {
    pub solution: FixedPointSolution,
    pub residency: SlotResidency,
    pub backoff: BackoffSlot,
    pub access: SaturatedDelay,
    /// Mean remaining busy time found by a request arriving at a random instant.
    pub arrival_residual: f64,
}

impl DelayBreakdown {
    /// Access delay plus, when requested, the residual busy time at arrival.
    pub fn latency(&self, include_residual: bool) -> f64 {
        self.access.mean + if include_residual { self.arrival_residual } else { 0.0 }
    }
}

pub fn sensing_delay(pop: &PopulationMix, dur: &DurationTable, opts: &AnalyticOptions) -> Result<DelayBreakdown> {
    if pop.n_bf == 0 {
        return Err(Error::invalid("population.n_bf", "no sensing AP to evaluate"));
    }
    let solution = solve_population(pop, opts)?;
    delay_at(&solution, pop, dur, opts)
}

pub fn delay_at(
    solution: &FixedPointSolution,
    pop: &PopulationMix,
    dur: &DurationTable,
    opts: &AnalyticOptions,
) -> Result<DelayBreakdown> {
    let residency = slot_residency(solution, dur, pop, opts)?;
    let backoff = mean_backoff_slot(solution, &residency, &pop.edca_bf, opts)?;
    let access = saturated_sensing_delay(solution.p_bf, dur, backoff.f, &pop.edca_bf);
    Ok(DelayBreakdown {
        solution: *solution,
        residency,
        backoff,
        access,
        arrival_residual: OthersView::new(solution).residual_span(dur),
    })
}
