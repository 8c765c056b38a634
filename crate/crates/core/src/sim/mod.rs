//! Slot-level simulator of the shared channel.

mod ap;
mod arrivals;
mod channel;
mod engine;

pub use ap::{ApState, AttemptResult, Pending};
pub use arrivals::{sensing_arrivals, ArrivalStream};
pub use channel::{arbitrate_slot, ChannelOutcome, OutcomeKind};
pub use engine::{run, SensingOutcome, SensingRecord, Simulator};
