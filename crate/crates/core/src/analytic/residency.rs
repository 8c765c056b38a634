//! How long the tagged sensing AP spends in a backoff slot, split by the
//! channel state at the start of that slot.

use serde::{Deserialize, Serialize};

use super::fixed_point::FixedPointSolution;
use super::options::{AnalyticOptions, ResidencyModel};
use super::throughput::EventWeights;
use crate::error::{Error, Result};
use crate::model::{DurationTable, EdcaClass, PopulationMix};

pub(crate) fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Joint probability that exactly `n_ax` legacy and `n_bf` sensing APs
/// transmit in the same slot.
pub fn q_pmf(sol: &FixedPointSolution, n_ax: u32, n_bf: u32) -> f64 {
    let term =
        |n: u32, k: u32, tau: f64| binomial(n, k) * tau.powi(k as i32) * (1.0 - tau).powi(n.saturating_sub(k) as i32);
    term(sol.n_ax, n_ax, sol.tau_ax) * term(sol.n_bf, n_bf, sol.tau_bf)
}

/// Average backoff window over all stages, weighted by the stage at which
/// the frame finally gets through.
pub fn mean_window(p_coll: f64, edca: &EdcaClass) -> f64 {
    let stages = edca.retry_limit + 1;
    let norm = 1.0 - p_coll.powi(stages as i32);
    if norm <= 1e-300 {
        return edca.windows().map(f64::from).sum::<f64>() / stages as f64;
    }
    let mut acc = 0.0;
    let mut weight = 1.0 - p_coll;
    for w in edca.windows() {
        acc += weight * w as f64;
        weight *= p_coll;
    }
    acc / norm
}

/// Slot events produced by every AP except one tagged sensing AP.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OthersView {
    pub idle: f64,
    pub success_ax: f64,
    pub success_bf: f64,
    pub collision_ax: f64,
    pub collision_bf: f64,
    pub collision_cross: f64,
}

impl OthersView {
    pub fn new(sol: &FixedPointSolution) -> Self {
        let others_bf = sol.n_bf.saturating_sub(1) as i32;
        let n_ax = sol.n_ax as i32;
        let (tb, ta) = (sol.tau_bf, sol.tau_ax);
        let silent_bf = (1.0 - tb).powi(others_bf);
        let silent_ax = (1.0 - ta).powi(n_ax);
        let one_bf = if others_bf > 0 {
            others_bf as f64 * tb * (1.0 - tb).powi(others_bf - 1)
        } else {
            0.0
        };
        let one_ax = if n_ax > 0 {
            n_ax as f64 * ta * (1.0 - ta).powi(n_ax - 1)
        } else {
            0.0
        };
        OthersView {
            idle: silent_bf * silent_ax,
            success_ax: one_ax * silent_bf,
            success_bf: one_bf * silent_ax,
            collision_ax: (1.0 - silent_ax - one_ax).max(0.0) * silent_bf,
            collision_bf: (1.0 - silent_bf - one_bf).max(0.0) * silent_ax,
            collision_cross: (1.0 - silent_ax) * (1.0 - silent_bf),
        }
    }

    pub fn success(&self) -> f64 {
        self.success_ax + self.success_bf
    }

    pub fn collision(&self) -> f64 {
        self.collision_ax + self.collision_bf + self.collision_cross
    }

    pub fn mean_success_span(&self, dur: &DurationTable) -> Option<f64> {
        let p = self.success();
        (p > 0.0).then(|| (self.success_ax * dur.t_s_ax + self.success_bf * dur.t_s_bf) / p)
    }

    pub fn mean_collision_span(&self, dur: &DurationTable) -> Option<f64> {
        let p = self.collision();
        (p > 0.0).then(|| {
            (self.collision_ax * dur.t_c_ax + self.collision_bf * dur.t_c_bf + self.collision_cross * dur.t_c_cross) / p
        })
    }

    /// Mean remaining duration of the event in progress at a random instant.
    pub fn residual_span(&self, dur: &DurationTable) -> f64 {
        let terms = [
            (self.idle, dur.sigma),
            (self.success_ax, dur.t_s_ax),
            (self.success_bf, dur.t_s_bf),
            (self.collision_ax, dur.t_c_ax),
            (self.collision_bf, dur.t_c_bf),
            (self.collision_cross, dur.t_c_cross),
        ];
        let first: f64 = terms.iter().map(|(p, t)| p * t).sum();
        let second: f64 = terms.iter().map(|(p, t)| p * t * t).sum();
        if first > 0.0 {
            second / (2.0 * first)
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlotResidency {
    pub d_i: f64,
    pub d_s: f64,
    pub d_c: f64,
    /// Expected collision time per slot.
    pub gamma: f64,
    pub p_ci: f64,
    pub p_cs: f64,
    pub p_cc: f64,
    /// No collision-to-idle or collision-to-success transition exists.
    pub degenerate: bool,
}

/// Collision-to-idle and collision-to-success transition probabilities from
/// the joint colliding-AP distribution.
pub fn collision_transitions(sol: &FixedPointSolution, cw_bf: f64, cw_ax: f64) -> (f64, f64) {
    let stay_bf = 1.0 - 1.0 / cw_bf;
    let stay_ax = 1.0 - 1.0 / cw_ax;
    let mut p_ci = 0.0;
    let mut p_cs = 0.0;
    for n_bf in 2..sol.n_bf {
        for n_ax in 0..=sol.n_ax {
            let q = q_pmf(sol, n_ax, n_bf);
            p_ci += q * stay_ax.powi(n_ax as i32) * stay_bf.powi(n_bf as i32);
            p_cs += q * n_bf as f64 * (1.0 / cw_bf) * stay_bf.powi(n_bf as i32 - 1) * stay_ax.powi(n_ax as i32);
        }
    }
    for k in 1..=sol.n_ax {
        p_cs += q_pmf(sol, 1, k) * (1.0 / cw_bf) * stay_ax.powi(k as i32);
    }
    (p_ci, p_cs)
}

pub fn slot_residency(
    sol: &FixedPointSolution,
    dur: &DurationTable,
    pop: &PopulationMix,
    opts: &AnalyticOptions,
) -> Result<SlotResidency> {
    let weights = EventWeights::new(sol);
    let gamma = weights.collision_time(dur);
    let cw_bf = mean_window(sol.p_bf, &pop.edca_bf);
    let cw_ax = mean_window(sol.p_ax, &pop.edca_ax);
    let (p_ci, p_cs) = collision_transitions(sol, cw_bf, cw_ax);
    let mut p_cc = 1.0 - p_ci - p_cs;
    if !(-1e-12..=1.0 + 1e-12).contains(&p_cc) {
        return Err(Error::ModelInconsistency {
            message: format!("collision-to-collision probability {p_cc} outside [0, 1]"),
        });
    }
    p_cc = p_cc.clamp(0.0, 1.0);
    let degenerate = p_ci + p_cs <= 0.0;
    let d_i = dur.sigma;

    let (d_s, d_c) = match opts.residency {
        ResidencyModel::ChainBased => {
            let p_ss = 1.0 / pop.edca_bf.cw_min as f64;
            let d_s = d_i
                + (weights.success_ax * dur.t_s_ax + weights.success_bf * dur.t_s_bf)
                    / (1.0 - p_ss).max(f64::MIN_POSITIVE);
            let chain: f64 = (0..=pop.edca_bf.retry_limit)
                .map(|i| i as f64 * p_cc.powi(i as i32))
                .sum();
            let mut d_c = chain * gamma;
            if !degenerate {
                d_c += p_cs / (1.0 - p_cc) * d_s + p_ci / (1.0 - p_cc) * d_i;
            }
            (d_s, d_c)
        }
        ResidencyModel::Conditional => {
            let others = OthersView::new(sol);
            let deferral = pop.edca_bf.extra_aifs_slots() as f64 * dur.sigma;
            let d_s = others.mean_success_span(dur).unwrap_or(0.0) + deferral;
            let d_c = others.mean_collision_span(dur).unwrap_or(0.0) + deferral;
            (d_s, d_c)
        }
    };

    Ok(SlotResidency {
        d_i,
        d_s,
        d_c,
        gamma,
        p_ci,
        p_cs,
        p_cc,
        degenerate,
    })
}
