use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// AIFSN that corresponds to a plain DIFS (SIFS + 2 slots). The event
/// durations already contain one DIFS, so only the AIFSN in excess of this
/// value shows up as extra idle deferral slots.
pub const DIFS_AIFSN: u32 = 2;

/// Contention parameters of one access category.
///
/// `cw_min` is the stage-0 window size `W_0`; the stage-`j` window is
/// `min(2^j * cw_min, cw_max)` and backoff counters are drawn from
/// `[0, W_j - 1]`. `retry_limit` is the highest backoff stage `L`, so a frame
/// gets `L + 1` attempts.
/// In configuration files a class is either an access-category name
/// (`"BE"`) or an explicit object.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "EdcaRepr")]
pub struct EdcaClass {
    pub cw_min: u32,
    pub cw_max: u32,
    pub aifs: u32,
    #[serde(default = "default_retry_limit")]
    pub retry_limit: u32,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum EdcaRepr {
    Named(String),
    Explicit(ExplicitEdca),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ExplicitEdca {
    cw_min: u32,
    cw_max: u32,
    aifs: u32,
    #[serde(default = "default_retry_limit")]
    retry_limit: u32,
}

impl TryFrom<EdcaRepr> for EdcaClass {
    type Error = String;

    fn try_from(repr: EdcaRepr) -> std::result::Result<Self, String> {
        match repr {
            EdcaRepr::Named(name) => AccessCategory::parse(&name)
                .map(AccessCategory::class)
                .ok_or_else(|| format!("unknown access category `{name}`")),
            EdcaRepr::Explicit(e) => Ok(EdcaClass {
                cw_min: e.cw_min,
                cw_max: e.cw_max,
                aifs: e.aifs,
                retry_limit: e.retry_limit,
            }),
        }
    }
}

fn default_retry_limit() -> u32 {
    EdcaClass::DEFAULT_RETRY_LIMIT
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum AccessCategory {
    Bk,
    Be,
    Vi,
    Vo,
    /// Legacy DCF access: best-effort windows with a plain DIFS.
    Dcf,
}

impl AccessCategory {
    pub const EDCA: [AccessCategory; 4] = [
        AccessCategory::Bk,
        AccessCategory::Be,
        AccessCategory::Vi,
        AccessCategory::Vo,
    ];

    pub fn class(self) -> EdcaClass {
        let (cw_min, cw_max, aifs) = match self {
            AccessCategory::Bk => (15, 1023, 7),
            AccessCategory::Be => (15, 1023, 3),
            AccessCategory::Vi => (7, 15, 2),
            AccessCategory::Vo => (3, 7, 2),
            AccessCategory::Dcf => (15, 1023, DIFS_AIFSN),
        };
        EdcaClass {
            cw_min,
            cw_max,
            aifs,
            retry_limit: EdcaClass::DEFAULT_RETRY_LIMIT,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            AccessCategory::Bk => "BK",
            AccessCategory::Be => "BE",
            AccessCategory::Vi => "VI",
            AccessCategory::Vo => "VO",
            AccessCategory::Dcf => "DCF",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_uppercase().as_str() {
            "BK" => Some(AccessCategory::Bk),
            "BE" => Some(AccessCategory::Be),
            "VI" => Some(AccessCategory::Vi),
            "VO" => Some(AccessCategory::Vo),
            "DCF" => Some(AccessCategory::Dcf),
            _ => None,
        }
    }
}

impl EdcaClass {
    /// Seven transmission attempts per frame.
    pub const DEFAULT_RETRY_LIMIT: u32 = 6;

    /// Window size of backoff stage `stage`.
    pub fn window(&self, stage: u32) -> u32 {
        let doubled = (self.cw_min as u64) << stage.min(40);
        doubled.min(self.cw_max as u64) as u32
    }

    pub fn windows(&self) -> impl Iterator<Item = u32> + '_ {
        (0..=self.retry_limit).map(|j| self.window(j))
    }

    /// Idle slots an AP waits after a busy medium before its counter resumes,
    /// beyond the DIFS already folded into event durations.
    pub fn extra_aifs_slots(&self) -> u32 {
        self.aifs.saturating_sub(DIFS_AIFSN)
    }

    pub fn validate(&self, path: &str) -> Result<()> {
        if self.cw_min < 1 {
            return Err(Error::invalid(format!("{path}.cw_min"), "must be >= 1"));
        }
        if self.cw_max < self.cw_min {
            return Err(Error::invalid(
                format!("{path}.cw_max"),
                format!("must be >= cw_min ({})", self.cw_min),
            ));
        }
        if self.retry_limit > 30 {
            return Err(Error::invalid(format!("{path}.retry_limit"), "must be <= 30"));
        }
        Ok(())
    }
}

impl Default for EdcaClass {
    fn default() -> Self {
        AccessCategory::Be.class()
    }
}
