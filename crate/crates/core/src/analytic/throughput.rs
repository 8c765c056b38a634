use serde::{Deserialize, Serialize};

use super::fixed_point::FixedPointSolution;
use crate::model::{AxTrafficProfile, DurationTable};

/// The nine disjoint slot events of the two-population channel, each with its
/// probability and duration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventWeights {
    pub idle: f64,
    pub success_ax: f64,
    pub success_bf: f64,
    pub collision_ax: f64,
    pub collision_bf: f64,
    /// Cross-technology combinations: (ax outcome, bf outcome) =
    /// (success, success), (success, collision), (collision, success), (collision, collision).
    pub cross: [f64; 4],
}

impl EventWeights {
    pub fn new(sol: &FixedPointSolution) -> Self {
        let (ta, sa) = (sol.p_t_ax, sol.p_s_ax);
        let (tb, sb) = (sol.p_t_bf, sol.p_s_bf);
        EventWeights {
            idle: (1.0 - ta) * (1.0 - tb),
            success_ax: ta * sa * (1.0 - tb),
            success_bf: tb * sb * (1.0 - ta),
            collision_ax: ta * (1.0 - sa) * (1.0 - tb),
            collision_bf: tb * (1.0 - sb) * (1.0 - ta),
            cross: [
                ta * sa * tb * sb,
                ta * sa * tb * (1.0 - sb),
                ta * (1.0 - sa) * tb * sb,
                ta * (1.0 - sa) * tb * (1.0 - sb),
            ],
        }
    }

    pub fn total(&self) -> f64 {
        self.idle
            + self.success_ax
            + self.success_bf
            + self.collision_ax
            + self.collision_bf
            + self.cross.iter().sum::<f64>()
    }

    pub fn success(&self) -> f64 {
        self.success_ax + self.success_bf
    }

    /// Every slot with two or more transmitters.
    pub fn collision(&self) -> f64 {
        self.collision_ax + self.collision_bf + self.cross.iter().sum::<f64>()
    }

    /// Expected collision time per slot (`Gamma`).
    pub fn collision_time(&self, dur: &DurationTable) -> f64 {
        self.collision_ax * dur.t_c_ax + self.collision_bf * dur.t_c_bf + dur.t_c_cross * self.cross.iter().sum::<f64>()
    }

    /// `(probability, duration)` of each of the nine events.
    pub fn terms(&self, dur: &DurationTable) -> [(f64, f64); 9] {
        [
            (self.idle, dur.sigma),
            (self.success_ax, dur.t_s_ax),
            (self.success_bf, dur.t_s_bf),
            (self.collision_ax, dur.t_c_ax),
            (self.collision_bf, dur.t_c_bf),
            (self.cross[0], dur.t_c_cross),
            (self.cross[1], dur.t_c_cross),
            (self.cross[2], dur.t_c_cross),
            (self.cross[3], dur.t_c_cross),
        ]
    }
}

/// Mean duration `T_m` of one channel event.
pub fn mean_event_time(sol: &FixedPointSolution, dur: &DurationTable) -> f64 {
    let w = EventWeights::new(sol);
    w.idle * dur.sigma
        + w.success_ax * dur.t_s_ax
        + w.success_bf * dur.t_s_bf
        + w.collision_ax * dur.t_c_ax
        + w.collision_bf * dur.t_c_bf
        + dur.t_c_cross * w.cross.iter().sum::<f64>()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxThroughput {
    /// Fraction of channel time carrying successful A-MPDUs.
    pub normalized: f64,
    /// Delivered MSDU payload of all legacy APs together, bits per second.
    pub aggregate_bps: f64,
}

pub fn ax_throughput(sol: &FixedPointSolution, dur: &DurationTable, traffic: &AxTrafficProfile) -> AxThroughput {
    let t_m = mean_event_time(sol, dur);
    let p_deliver = sol.p_t_ax * sol.p_s_ax * (1.0 - sol.p_t_bf);
    let payload_bits = dur.ax_mpdus as f64 * traffic.msdu_bits;
    AxThroughput {
        normalized: p_deliver * dur.t_f_ax / t_m,
        aggregate_bps: p_deliver * payload_bits / t_m * 1e6,
    }
}
