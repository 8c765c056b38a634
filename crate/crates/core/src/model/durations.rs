use serde::{Deserialize, Serialize};

use super::params::{AxTrafficProfile, MacTiming, SensingProfile, Technology};
use crate::error::{Error, Result};

/// Durations of every MAC event the channel can be in, in microseconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DurationTable {
    /// A-MPDU airtime including the PHY header.
    pub t_f_ax: f64,
    /// Contention-free period of one sensing session.
    pub t_f_bf: f64,
    pub t_s_ax: f64,
    pub t_s_bf: f64,
    pub t_c_ax: f64,
    pub t_c_bf: f64,
    /// Collision between the two technologies, `max(t_c_ax, t_c_bf)`.
    pub t_c_cross: f64,
    pub sigma: f64,
    /// MPDUs actually carried per A-MPDU after TXOP clipping.
    pub ax_mpdus: u32,
}

impl DurationTable {
    pub fn success(&self, tech: Technology) -> f64 {
        match tech {
            Technology::Ax => self.t_s_ax,
            Technology::Bf => self.t_s_bf,
        }
    }

    pub fn collision(&self, tech: Technology) -> f64 {
        match tech {
            Technology::Ax => self.t_c_ax,
            Technology::Bf => self.t_c_bf,
        }
    }

    pub fn t_cfp(&self) -> f64 {
        self.t_f_bf
    }
}

/// Size in octets of one CSI report.
///
/// The per-subcarrier term is rounded up to whole octets.
pub fn csi_report_size(n_tx: u32, n_rx: u32, n_b: u32, n_sc: u32) -> Result<u64> {
    for (name, v) in [("n_tx", n_tx), ("n_rx", n_rx), ("n_b", n_b), ("n_sc", n_sc)] {
        if v == 0 {
            return Err(Error::invalid(name, "must be >= 1"));
        }
    }
    let pairs = n_tx as u64 * n_rx as u64;
    // ceil(1.5 * pairs)
    let header = (3 * pairs).div_ceil(2);
    let body = (pairs * n_b as u64 * n_sc as u64).div_ceil(4);
    Ok(header + body + 2 * n_tx as u64)
}

/// Airtime of one CSI report frame. `phy_header` is added once per frame when given.
pub fn reporting_duration(csi_octets: u64, rate: f64, phy_header: Option<f64>) -> Result<f64> {
    if !(rate.is_finite() && rate > 0.0) {
        return Err(Error::invalid("rate", "must be > 0"));
    }
    Ok(8.0 * csi_octets as f64 / rate + phy_header.unwrap_or(0.0))
}

/// Length of the contention-free period of one sensing session:
/// polling, downlink sounding for each participant, then one report each.
pub fn cfp_duration(profile: &SensingProfile, timing: &MacTiming, rate: f64) -> Result<f64> {
    let octets = csi_report_size(profile.n_tx, profile.n_rx, profile.n_b, profile.n_sc)?;
    let header = profile.report_phy_header.then_some(timing.phy_header);
    let t_report = reporting_duration(octets, rate, header)?;
    let n = profile.participants as f64;
    let sifs = timing.sifs;

    let polling = profile.t_polling + sifs + profile.t_cts + sifs;
    let mut sounding = n * (profile.t_ndpa + sifs + profile.t_ndp);
    if profile.uplink_sounding {
        sounding += n * (profile.t_tf + sifs + profile.t_ndp);
    }
    let reporting = sifs + n * t_report;
    Ok(polling + sounding + reporting)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxFrame {
    pub duration: f64,
    pub mpdus: u32,
}

/// Airtime of one A-MPDU, with the MPDU count reduced until it fits the TXOP.
pub fn ax_frame_duration(traffic: &AxTrafficProfile, timing: &MacTiming) -> Result<AxFrame> {
    let mpdu_time = traffic.mpdu_bits() / timing.rate;
    let budget = timing.txop_limit - timing.phy_header;
    if mpdu_time > budget {
        return Err(Error::invalid(
            "traffic.msdu_bits",
            format!(
                "a single MPDU ({mpdu_time:.1} us) does not fit the TXOP limit ({} us)",
                timing.txop_limit
            ),
        ));
    }
    let fitting = ((budget / mpdu_time) * (1.0 + 1e-12)).floor() as u64;
    let mpdus = (traffic.ampdu_count as u64).min(fitting) as u32;
    Ok(AxFrame {
        duration: timing.phy_header + mpdus as f64 * mpdu_time,
        mpdus,
    })
}

/// Success and collision durations of both technologies.
pub fn event_durations(
    timing: &MacTiming,
    traffic: &AxTrafficProfile,
    sensing: &SensingProfile,
) -> Result<DurationTable> {
    let frame = ax_frame_duration(traffic, timing)?;
    let t_cfp = cfp_duration(sensing, timing, timing.rate)?;
    let t_s_ax = frame.duration + timing.difs + timing.sifs + timing.phy_header + timing.ack_bits / timing.rate_min;
    let t_c_ax = frame.duration + timing.difs;
    let t_s_bf = t_cfp + timing.difs;
    let t_c_bf = t_cfp + timing.difs;
    Ok(DurationTable {
        t_f_ax: frame.duration,
        t_f_bf: t_cfp,
        t_s_ax,
        t_s_bf,
        t_c_ax,
        t_c_bf,
        t_c_cross: t_c_ax.max(t_c_bf),
        sigma: timing.sigma,
        ax_mpdus: frame.mpdus,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_profile(participants: u32) -> SensingProfile {
        SensingProfile {
            participants,
            t_polling: 100.0,
            t_cts: 100.0,
            t_ndpa: 100.0,
            t_ndp: 100.0,
            ..SensingProfile::default()
        }
    }

    #[test]
    fn csi_size_hand_values() {
        assert_eq!(csi_report_size(1, 1, 8, 242).unwrap(), 488);
        assert_eq!(csi_report_size(4, 2, 8, 242).unwrap(), 3892);
        // 1.5 * 3 = 4.5 rounds up; 3 * 4 * 1 / 4 = 3
        assert_eq!(csi_report_size(3, 1, 4, 1).unwrap(), 5 + 3 + 6);
        // fractional body rounds up: 1*1*1*1/4 -> 1
        assert_eq!(csi_report_size(1, 1, 1, 1).unwrap(), 2 + 1 + 2);
    }

    #[test]
    fn csi_size_rejects_zero() {
        assert!(matches!(
            csi_report_size(1, 1, 0, 242),
            Err(Error::InvalidParameter { .. })
        ));
        assert!(csi_report_size(0, 1, 8, 242).is_err());
    }

    #[test]
    fn reporting_duration_values() {
        let d = reporting_duration(488, 50.0, Some(20.0)).unwrap();
        assert!((d - 98.08).abs() < 1e-9);
        let d = reporting_duration(3892, 50.0, Some(20.0)).unwrap();
        assert!((d - 642.72).abs() < 1e-9);
        assert_eq!(reporting_duration(0, 50.0, Some(20.0)).unwrap(), 20.0);
        assert!(reporting_duration(10, 0.0, None).is_err());
        assert!(reporting_duration(10, -3.0, None).is_err());
    }

    #[test]
    fn cfp_hand_value() {
        let timing = MacTiming::default();
        let t = cfp_duration(&unit_profile(1), &timing, 50.0).unwrap();
        assert!((t - 562.08).abs() < 1e-9, "{t}");
    }

    #[test]
    fn cfp_linear_in_participants() {
        let timing = MacTiming::default();
        let t1 = cfp_duration(&unit_profile(1), &timing, 50.0).unwrap();
        let t2 = cfp_duration(&unit_profile(2), &timing, 50.0).unwrap();
        let t3 = cfp_duration(&unit_profile(3), &timing, 50.0).unwrap();
        let step = 100.0 + 16.0 + 100.0 + 98.08;
        assert!((t2 - t1 - step).abs() < 1e-9);
        assert!((t3 - t2 - step).abs() < 1e-9);
    }

    #[test]
    fn cfp_grows_with_tx_antennas() {
        let timing = MacTiming::default();
        let mut p = unit_profile(1);
        p.n_rx = 2;
        let mut prev = 0.0;
        for n_tx in 1..=4 {
            p.n_tx = n_tx;
            let t = cfp_duration(&p, &timing, 50.0).unwrap();
            assert!(t > prev);
            prev = t;
        }
    }

    #[test]
    fn uplink_sounding_extension() {
        let timing = MacTiming::default();
        let mut p = unit_profile(2);
        let base = cfp_duration(&p, &timing, 50.0).unwrap();
        p.uplink_sounding = true;
        p.t_tf = 50.0;
        let ext = cfp_duration(&p, &timing, 50.0).unwrap();
        assert!((ext - base - 2.0 * (50.0 + 16.0 + 100.0)).abs() < 1e-9);
    }

    #[test]
    fn ax_frame_unclipped() {
        let timing = MacTiming {
            rate: 160.0,
            ..MacTiming::default()
        };
        let f = ax_frame_duration(&AxTrafficProfile::default(), &timing).unwrap();
        // 64 * 12080 bits / 160 = 4832 us of payload airtime
        assert_eq!(f.mpdus, 64);
        assert!((f.duration - 4852.0).abs() < 1e-9);
    }

    #[test]
    fn ax_frame_clipped_to_txop() {
        let timing = MacTiming {
            rate: 60.0,
            ..MacTiming::default()
        };
        let f = ax_frame_duration(&AxTrafficProfile::default(), &timing).unwrap();
        // (5484 - 20) * 60 / 12080 = 27.14
        assert_eq!(f.mpdus, 27);
        assert!(f.duration <= timing.txop_limit);
        let one_more = 20.0 + 28.0 * 12080.0 / 60.0;
        assert!(one_more > timing.txop_limit);
    }

    #[test]
    fn ax_frame_single_mpdu_and_rejection() {
        let timing = MacTiming {
            rate: 100.0,
            ..MacTiming::default()
        };
        let traffic = AxTrafficProfile {
            ampdu_count: 1,
            ..AxTrafficProfile::default()
        };
        let f = ax_frame_duration(&traffic, &timing).unwrap();
        assert!((f.duration - (20.0 + 120.8)).abs() < 1e-9);
        let slow = MacTiming {
            rate: 1.0,
            ..MacTiming::default()
        };
        assert!(ax_frame_duration(&traffic, &slow).is_err());
    }

    #[test]
    fn success_and_collision_durations() {
        let timing = MacTiming {
            rate: 160.0,
            ..MacTiming::default()
        };
        let d = event_durations(&timing, &AxTrafficProfile::default(), &unit_profile(1)).unwrap();
        let ack = 112.0 / 6.0;
        assert!((d.t_s_ax - (4852.0 + 34.0 + 16.0 + 20.0 + ack)).abs() < 1e-9);
        assert!((d.t_c_ax - (4852.0 + 34.0)).abs() < 1e-9);
        assert_eq!(d.t_c_bf, d.t_f_bf + 34.0);
        assert_eq!(d.t_s_bf, d.t_c_bf);
        assert_eq!(d.t_c_cross, d.t_c_ax.max(d.t_c_bf));
        assert!(d.t_s_ax >= d.t_f_ax && d.t_s_bf >= d.t_f_bf);
    }

    #[test]
    fn durations_deterministic() {
        let timing = MacTiming::default();
        let a = event_durations(&timing, &AxTrafficProfile::default(), &SensingProfile::default()).unwrap();
        let b = event_durations(&timing, &AxTrafficProfile::default(), &SensingProfile::default()).unwrap();
        assert_eq!(a, b);
    }
}
