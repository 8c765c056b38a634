use serde::{Deserialize, Serialize};

use super::edca::{AccessCategory, EdcaClass};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Technology {
    /// Sensing AP running trigger-based sounding sessions.
    Bf,
    /// Legacy AP with saturated downlink data.
    Ax,
}

/// MAC timing constants. Times in microseconds, rates in bits per microsecond.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MacTiming {
    pub sigma: f64,
    pub sifs: f64,
    pub difs: f64,
    pub phy_header: f64,
    pub ack_bits: f64,
    /// Data rate `R`.
    pub rate: f64,
    /// Control-frame rate `R_min` used for the ACK.
    pub rate_min: f64,
    pub txop_limit: f64,
}

impl MacTiming {
    /// Data rate of the calibrated 20 MHz baseline.
    pub const BASELINE_RATE: f64 = 60.0;

    pub fn validate(&self, path: &str) -> Result<()> {
        let fields = [
            ("sigma", self.sigma),
            ("sifs", self.sifs),
            ("difs", self.difs),
            ("phy_header", self.phy_header),
            ("ack_bits", self.ack_bits),
            ("rate", self.rate),
            ("rate_min", self.rate_min),
            ("txop_limit", self.txop_limit),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(format!("{path}.{name}"), "must be finite and > 0"));
            }
        }
        Ok(())
    }
}

impl Default for MacTiming {
    fn default() -> Self {
        MacTiming {
            sigma: 9.0,
            sifs: 16.0,
            difs: 34.0,
            phy_header: 20.0,
            ack_bits: 112.0,
            rate: Self::BASELINE_RATE,
            rate_min: 6.0,
            txop_limit: 5484.0,
        }
    }
}

/// Parameters of one trigger-based sensing session.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SensingProfile {
    pub n_tx: u32,
    pub n_rx: u32,
    pub n_sc: u32,
    /// Quantization bits per CSI value.
    pub n_b: u32,
    /// Participating STAs `N`.
    pub participants: u32,
    pub t_polling: f64,
    pub t_cts: f64,
    pub t_ndpa: f64,
    pub t_ndp: f64,
    /// Charge one PHY header per CSI report frame.
    pub report_phy_header: bool,
    /// Add the uplink (TF) sounding phase, `N * (T_TF + SIFS + T_NDP)`.
    pub uplink_sounding: bool,
    pub t_tf: f64,
}

impl SensingProfile {
    /// Airtime of each polling / CTS / NDPA / NDP frame: a 20 us preamble plus
    /// a short control body at the 6 Mbit/s control rate.
    pub const BASELINE_FRAME_TIME: f64 = 60.0;

    pub fn validate(&self, path: &str) -> Result<()> {
        let counts = [
            ("n_tx", self.n_tx),
            ("n_rx", self.n_rx),
            ("n_sc", self.n_sc),
            ("n_b", self.n_b),
            ("participants", self.participants),
        ];
        for (name, v) in counts {
            if v < 1 {
                return Err(Error::invalid(format!("{path}.{name}"), "must be >= 1"));
            }
        }
        let times = [
            ("t_polling", self.t_polling),
            ("t_cts", self.t_cts),
            ("t_ndpa", self.t_ndpa),
            ("t_ndp", self.t_ndp),
            ("t_tf", self.t_tf),
        ];
        for (name, v) in times {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid(format!("{path}.{name}"), "must be finite and >= 0"));
            }
        }
        Ok(())
    }
}

impl Default for SensingProfile {
    fn default() -> Self {
        let t = Self::BASELINE_FRAME_TIME;
        SensingProfile {
            n_tx: 1,
            n_rx: 1,
            n_sc: 242,
            n_b: 8,
            participants: 2,
            t_polling: t,
            t_cts: t,
            t_ndpa: t,
            t_ndp: t,
            report_phy_header: true,
            uplink_sounding: false,
            t_tf: t,
        }
    }
}

/// Downlink A-MPDU traffic of a legacy AP.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AxTrafficProfile {
    pub msdu_bits: f64,
    pub mac_header_bits: f64,
    pub ampdu_count: u32,
}

impl AxTrafficProfile {
    pub fn validate(&self, path: &str) -> Result<()> {
        if !(self.msdu_bits.is_finite() && self.msdu_bits > 0.0) {
            return Err(Error::invalid(format!("{path}.msdu_bits"), "must be > 0"));
        }
        if !(self.mac_header_bits.is_finite() && self.mac_header_bits > 0.0) {
            return Err(Error::invalid(format!("{path}.mac_header_bits"), "must be > 0"));
        }
        if self.ampdu_count < 1 {
            return Err(Error::invalid(format!("{path}.ampdu_count"), "must be >= 1"));
        }
        Ok(())
    }

    pub fn mpdu_bits(&self) -> f64 {
        self.msdu_bits + self.mac_header_bits
    }
}

impl Default for AxTrafficProfile {
    fn default() -> Self {
        AxTrafficProfile {
            msdu_bits: 1474.0 * 8.0,
            mac_header_bits: 36.0 * 8.0,
            ampdu_count: 64,
        }
    }
}

/// How many APs of each technology share the channel and how they contend.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PopulationMix {
    pub n_bf: u32,
    pub n_ax: u32,
    pub stas_per_bf: u32,
    pub stas_per_ax: u32,
    pub edca_bf: EdcaClass,
    pub edca_ax: EdcaClass,
}

impl PopulationMix {
    pub fn validate(&self, path: &str) -> Result<()> {
        if self.n_bf + self.n_ax < 1 {
            return Err(Error::invalid(format!("{path}.n_bf"), "n_bf + n_ax must be >= 1"));
        }
        if self.stas_per_bf < 1 {
            return Err(Error::invalid(format!("{path}.stas_per_bf"), "must be >= 1"));
        }
        if self.stas_per_ax < 1 {
            return Err(Error::invalid(format!("{path}.stas_per_ax"), "must be >= 1"));
        }
        self.edca_bf.validate(&format!("{path}.edca_bf"))?;
        self.edca_ax.validate(&format!("{path}.edca_ax"))
    }

    pub fn count(&self, tech: Technology) -> u32 {
        match tech {
            Technology::Bf => self.n_bf,
            Technology::Ax => self.n_ax,
        }
    }

    pub fn edca(&self, tech: Technology) -> &EdcaClass {
        match tech {
            Technology::Bf => &self.edca_bf,
            Technology::Ax => &self.edca_ax,
        }
    }
}

impl Default for PopulationMix {
    fn default() -> Self {
        PopulationMix {
            n_bf: 1,
            n_ax: 1,
            stas_per_bf: 2,
            stas_per_ax: 2,
            edca_bf: AccessCategory::Be.class(),
            edca_ax: AccessCategory::Be.class(),
        }
    }
}
