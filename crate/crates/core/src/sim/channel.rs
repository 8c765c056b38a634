use serde::{Deserialize, Serialize};

use super::ap::ApState;
use crate::model::{DurationTable, Technology};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeKind {
    Idle,
    SuccessAx,
    SuccessBf,
    CollisionAx,
    CollisionBf,
    /// At least one AP of each technology.
    CollisionCross,
}

impl OutcomeKind {
    pub const ALL: [OutcomeKind; 6] = [
        OutcomeKind::Idle,
        OutcomeKind::SuccessAx,
        OutcomeKind::SuccessBf,
        OutcomeKind::CollisionAx,
        OutcomeKind::CollisionBf,
        OutcomeKind::CollisionCross,
    ];

    pub fn name(self) -> &'static str {
        match self {
            OutcomeKind::Idle => "idle",
            OutcomeKind::SuccessAx => "success_ax",
            OutcomeKind::SuccessBf => "success_bf",
            OutcomeKind::CollisionAx => "collision_ax",
            OutcomeKind::CollisionBf => "collision_bf",
            OutcomeKind::CollisionCross => "collision_cross",
        }
    }

    pub fn is_idle(self) -> bool {
        self == OutcomeKind::Idle
    }

    pub fn is_success(self) -> bool {
        matches!(self, OutcomeKind::SuccessAx | OutcomeKind::SuccessBf)
    }

    pub fn is_collision(self) -> bool {
        matches!(
            self,
            OutcomeKind::CollisionAx | OutcomeKind::CollisionBf | OutcomeKind::CollisionCross
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelOutcome {
    pub kind: OutcomeKind,
    /// Indices of the transmitting APs.
    pub transmitters: Vec<usize>,
    pub span: f64,
}

/// Resolves one slot from the set of APs whose counters have expired.
pub fn arbitrate_slot(states: &[ApState], dur: &DurationTable) -> ChannelOutcome {
    let transmitters: Vec<usize> = states.iter().filter(|s| s.is_ready()).map(|s| s.id).collect();
    let (kind, span) = classify(states, &transmitters, dur);
    ChannelOutcome {
        kind,
        transmitters,
        span,
    }
}

pub(crate) fn classify(states: &[ApState], transmitters: &[usize], dur: &DurationTable) -> (OutcomeKind, f64) {
    let techs = || transmitters.iter().map(|&i| states[i].technology);
    match transmitters.len() {
        0 => (OutcomeKind::Idle, dur.sigma),
        1 => match states[transmitters[0]].technology {
            Technology::Ax => (OutcomeKind::SuccessAx, dur.t_s_ax),
            Technology::Bf => (OutcomeKind::SuccessBf, dur.t_s_bf),
        },
        _ => {
            let any_ax = techs().any(|t| t == Technology::Ax);
            let any_bf = techs().any(|t| t == Technology::Bf);
            let span = techs().map(|t| dur.collision(t)).fold(0.0, f64::max);
            let kind = match (any_ax, any_bf) {
                (true, true) => OutcomeKind::CollisionCross,
                (true, false) => OutcomeKind::CollisionAx,
                _ => OutcomeKind::CollisionBf,
            };
            (kind, span)
        }
    }
}
