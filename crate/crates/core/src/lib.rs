//! Coexistence of trigger-based WLAN sensing with legacy data traffic: a
//! closed-form model and a slot-level simulator of the shared channel.

pub mod analytic;
pub mod calibrate;
pub mod campaign;
pub mod config;
pub mod error;
pub mod metrics;
pub mod model;
pub mod sim;

pub use config::{load_config, ArrivalMode, PeriodicPhase, RunMode, ScenarioConfig, Seeds, SimOptions};
pub use error::{Error, ErrorCategory, Result};
