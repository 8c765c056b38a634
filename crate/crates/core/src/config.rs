//! Scenario description, JSON loading and validation.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analytic::AnalyticOptions;
use crate::error::{Error, Result};
use crate::model::{event_durations, AxTrafficProfile, DurationTable, MacTiming, PopulationMix, SensingProfile};

/// How sensing requests reach each sensing AP.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum ArrivalMode {
    /// A new request as soon as the previous session completes.
    Continuous,
    Periodic {
        interval_ms: f64,
    },
    Poisson {
        rate_hz: f64,
    },
}

impl ArrivalMode {
    /// Request rate in requests per microsecond; `None` for continuous sensing.
    pub fn rate_per_us(&self) -> Option<f64> {
        match *self {
            ArrivalMode::Continuous => None,
            ArrivalMode::Periodic { interval_ms } => Some(1.0 / (interval_ms * 1e3)),
            ArrivalMode::Poisson { rate_hz } => Some(rate_hz * 1e-6),
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            ArrivalMode::Continuous => Ok(()),
            ArrivalMode::Periodic { interval_ms } if !(interval_ms.is_finite() && interval_ms > 0.0) => {
                Err(Error::invalid("arrival.interval_ms", "must be > 0"))
            }
            ArrivalMode::Poisson { rate_hz } if !(rate_hz.is_finite() && rate_hz > 0.0) => {
                Err(Error::invalid("arrival.rate_hz", "must be > 0"))
            }
            _ => Ok(()),
        }
    }
}

impl Default for ArrivalMode {
    fn default() -> Self {
        ArrivalMode::Periodic { interval_ms: 100.0 }
    }
}

/// Simulator behaviour that has more than one reasonable reading.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimOptions {
    /// A request that supersedes a pending one starts over at backoff stage 0
    /// with a fresh counter. When false it inherits the pending backoff state.
    pub drop_resets_backoff: bool,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions {
            drop_resets_backoff: true,
        }
    }
}

/// Where each sensing AP's periodic schedule starts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PeriodicPhase {
    /// Every AP requests at `k * interval`.
    #[default]
    Aligned,
    /// Each AP draws its own offset uniformly in `[0, interval)`.
    Staggered,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunMode {
    Analytic,
    Sim,
    #[default]
    Both,
}

impl RunMode {
    pub fn runs_sim(self) -> bool {
        matches!(self, RunMode::Sim | RunMode::Both)
    }

    pub fn runs_analytic(self) -> bool {
        matches!(self, RunMode::Analytic | RunMode::Both)
    }
}

/// Either a seed count (seeds `0..n`) or an explicit list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Seeds {
    Count(u64),
    List(Vec<u64>),
}

impl Seeds {
    pub fn resolve(&self) -> Vec<u64> {
        match self {
            Seeds::Count(n) => (0..*n).collect(),
            Seeds::List(v) => v.clone(),
        }
    }
}

impl Default for Seeds {
    fn default() -> Self {
        Seeds::Count(50)
    }
}

/// Named channel-width presets. They set the data rate and the number of
/// reported CSI subcarriers, nothing else.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bandwidth {
    pub mhz: u32,
    pub data_subcarriers: u32,
    pub csi_subcarriers: u32,
}

impl Bandwidth {
    pub const PRESETS: [Bandwidth; 4] = [
        Bandwidth {
            mhz: 20,
            data_subcarriers: 234,
            csi_subcarriers: 242,
        },
        Bandwidth {
            mhz: 40,
            data_subcarriers: 468,
            csi_subcarriers: 484,
        },
        Bandwidth {
            mhz: 80,
            data_subcarriers: 980,
            csi_subcarriers: 996,
        },
        Bandwidth {
            mhz: 160,
            data_subcarriers: 1960,
            csi_subcarriers: 1992,
        },
    ];

    pub fn from_mhz(mhz: u32) -> Option<Bandwidth> {
        Self::PRESETS.iter().copied().find(|b| b.mhz == mhz)
    }

    /// Data rate scaled from the calibrated 20 MHz baseline by data subcarriers.
    pub fn rate(&self) -> f64 {
        MacTiming::BASELINE_RATE * self.data_subcarriers as f64 / 234.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub population: PopulationMix,
    pub timing: MacTiming,
    pub traffic: AxTrafficProfile,
    pub sensing: SensingProfile,
    pub arrival: ArrivalMode,
    pub phase: PeriodicPhase,
    /// Applies a [`Bandwidth`] preset over `timing.rate` and `sensing.n_sc`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bandwidth_mhz: Option<u32>,
    pub duration_s: f64,
    pub seeds: Seeds,
    pub mode: RunMode,
    pub analytic: AnalyticOptions,
    pub sim: SimOptions,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            name: "scenario".into(),
            population: PopulationMix::default(),
            timing: MacTiming::default(),
            traffic: AxTrafficProfile::default(),
            sensing: SensingProfile::default(),
            arrival: ArrivalMode::default(),
            phase: PeriodicPhase::default(),
            bandwidth_mhz: None,
            duration_s: 10.0,
            seeds: Seeds::default(),
            mode: RunMode::default(),
            analytic: AnalyticOptions::default(),
            sim: SimOptions::default(),
        }
    }
}

impl ScenarioConfig {
    /// Parses a JSON scenario, fills defaults, applies presets and validates.
    pub fn from_json(text: &str) -> Result<Self> {
        let mut cfg: ScenarioConfig = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        cfg.apply_bandwidth()?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn apply_bandwidth(&mut self) -> Result<()> {
        if let Some(mhz) = self.bandwidth_mhz {
            let bw = Bandwidth::from_mhz(mhz)
                .ok_or_else(|| Error::invalid("bandwidth_mhz", format!("no preset for {mhz} MHz (20, 40, 80, 160)")))?;
            self.timing.rate = bw.rate();
            self.sensing.n_sc = bw.csi_subcarriers;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.population.validate("population")?;
        self.timing.validate("timing")?;
        self.traffic.validate("traffic")?;
        self.sensing.validate("sensing")?;
        if self.sensing.participants > self.population.stas_per_bf {
            return Err(Error::invalid(
                "sensing.participants",
                format!(
                    "{} participants but only {} STAs per sensing AP",
                    self.sensing.participants, self.population.stas_per_bf
                ),
            ));
        }
        self.arrival.validate()?;
        if !(self.duration_s.is_finite() && self.duration_s > 0.0) {
            return Err(Error::invalid("duration_s", "must be > 0"));
        }
        if self.mode.runs_sim() && self.seeds.resolve().is_empty() {
            return Err(Error::invalid("seeds", "at least one seed is required to simulate"));
        }
        if self.analytic.tolerance.is_nan() || self.analytic.tolerance <= 0.0 {
            return Err(Error::invalid("analytic.tolerance", "must be > 0"));
        }
        // surfaces TXOP / single-MPDU problems at load time
        self.durations().map(|_| ())
    }

    pub fn durations(&self) -> Result<DurationTable> {
        event_durations(&self.timing, &self.traffic, &self.sensing)
    }

    pub fn duration_us(&self) -> f64 {
        self.duration_s * 1e6
    }
}

pub fn load_config(path: &Path) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    ScenarioConfig::from_json(&text)
}
