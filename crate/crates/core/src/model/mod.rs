//! Protocol parameters shared by both engines and the duration calculus that
//! turns them into MAC-event durations. All times are microseconds and all
//! rates are bits per microsecond (numerically equal to Mbit/s).

mod durations;
mod edca;
mod params;

pub use durations::{
    ax_frame_duration, cfp_duration, csi_report_size, event_durations, reporting_duration, AxFrame, DurationTable,
};
pub use edca::{AccessCategory, EdcaClass, DIFS_AIFSN};
pub use params::{AxTrafficProfile, MacTiming, PopulationMix, SensingProfile, Technology};
