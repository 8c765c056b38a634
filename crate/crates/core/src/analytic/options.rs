use serde::{Deserialize, Serialize};

/// How the freezing probability of a backoff counter is tied to the fixed point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FreezeModel {
    /// The counter freezes whenever any other AP transmits, i.e. `P_f = P`.
    Collision,
    /// Counters never freeze (plain slotted backoff).
    None,
}

impl FreezeModel {
    pub fn apply(self, p_coll: f64) -> f64 {
        match self {
            FreezeModel::Collision => p_coll,
            FreezeModel::None => 0.0,
        }
    }
}

/// Backoff decrement probability `P_d` that normalizes `F_b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecrementModel {
    Unity,
    /// `P_d = P_i`, the probability that no other AP transmits.
    IdleProbability,
}

/// Probability that a backoff slot of the tagged sensing AP is taken by a
/// successful transmission of some other AP.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BusySuccessForm {
    /// Legacy term without the `(1 - tau_bf)^(N_bf - 1)` factor.
    Unconditioned,
    /// Exactly one other AP transmits, all the rest are silent.
    Corrected,
}

/// How the time spent per busy backoff slot is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResidencyModel {
    /// Geometric success residency and consecutive-collision chain built from
    /// the joint colliding-AP distribution.
    ChainBased,
    /// Busy residencies are the mean success / collision spans produced by the
    /// other APs, conditioned on that event.
    Conditional,
}

/// Latency model used when every sensing AP receives its periodic request at
/// the same instant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BatchModel {
    /// Tick-level transient of one synchronized batch, conditioned on the
    /// session starting before the next request.
    Transient,
    /// Stationary unsaturated queue, as for Poisson requests.
    Unsaturated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalyticOptions {
    pub freeze: FreezeModel,
    pub decrement: DecrementModel,
    pub busy_success: BusySuccessForm,
    pub residency: ResidencyModel,
    /// Add the mean remaining busy time found by a request that arrives at a
    /// random instant (periodic and Poisson sensing only).
    pub arrival_residual: bool,
    pub batch: BatchModel,
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl AnalyticOptions {
    /// The plain closed forms: unit decrement, unconditioned busy success,
    /// chain residency and the stationary queue.
    pub fn literal() -> Self {
        AnalyticOptions {
            decrement: DecrementModel::Unity,
            busy_success: BusySuccessForm::Unconditioned,
            residency: ResidencyModel::ChainBased,
            arrival_residual: false,
            batch: BatchModel::Unsaturated,
            ..Self::default()
        }
    }
}

impl Default for AnalyticOptions {
    fn default() -> Self {
        AnalyticOptions {
            freeze: FreezeModel::Collision,
            decrement: DecrementModel::IdleProbability,
            busy_success: BusySuccessForm::Corrected,
            residency: ResidencyModel::Conditional,
            arrival_residual: true,
            batch: BatchModel::Transient,
            tolerance: 1e-9,
            max_iterations: 100_000,
        }
    }
}
