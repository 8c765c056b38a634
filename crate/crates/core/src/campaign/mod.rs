//! Parameter sweeps over scenario configurations, run across seeds on a
//! worker pool and collected in a fixed order.

mod emit;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use emit::{emit, histogram_rows, summary_rows, HistogramRow, OutputFormat, SummaryRow};

use crate::analytic::{self, AnalyticPoint};
use crate::config::{ArrivalMode, ScenarioConfig};
use crate::error::{Error, Result};
use crate::metrics::{compare_engines, summarize, BinRule, ComparisonReport, RunMetrics, ScenarioSummary};
use crate::model::AccessCategory;
use crate::sim;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    NBf,
    NAx,
    /// Periodic request interval in ms.
    Interval,
    /// Access category of the sensing APs.
    EdcaClass,
    /// Sensing antenna array `TxR` (or `N` for `NxN`).
    Antenna,
    /// Data rate in Mbit/s.
    Rate,
    /// Channel-width preset in MHz.
    Bandwidth,
}

impl SweepAxis {
    pub const ALL: [SweepAxis; 7] = [
        SweepAxis::NBf,
        SweepAxis::NAx,
        SweepAxis::Interval,
        SweepAxis::EdcaClass,
        SweepAxis::Antenna,
        SweepAxis::Rate,
        SweepAxis::Bandwidth,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::NBf => "n_bf",
            SweepAxis::NAx => "n_ax",
            SweepAxis::Interval => "interval",
            SweepAxis::EdcaClass => "edca_class",
            SweepAxis::Antenna => "antenna",
            SweepAxis::Rate => "rate",
            SweepAxis::Bandwidth => "bandwidth",
        }
    }

    /// Sets this axis of `cfg` to `value`.
    pub fn apply(self, cfg: &mut ScenarioConfig, value: &str) -> Result<()> {
        let bad = |what: &str| Error::sweep(format!("{}: `{value}` is not {what}", self.name()));
        let count = || value.parse::<u32>().map_err(|_| bad("a non-negative integer"));
        let real = || {
            value
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite() && *v > 0.0)
                .ok_or_else(|| bad("a positive number"))
        };
        match self {
            SweepAxis::NBf => cfg.population.n_bf = count()?,
            SweepAxis::NAx => cfg.population.n_ax = count()?,
            SweepAxis::Interval => cfg.arrival = ArrivalMode::Periodic { interval_ms: real()? },
            SweepAxis::EdcaClass => {
                let ac = AccessCategory::parse(value).ok_or_else(|| bad("an access category (BK, BE, VI, VO, DCF)"))?;
                cfg.population.edca_bf = ac.class();
            }
            SweepAxis::Antenna => {
                let (tx, rx) = match value.split_once(['x', 'X']) {
                    Some((a, b)) => (a.trim().parse::<u32>(), b.trim().parse::<u32>()),
                    None => (value.parse::<u32>(), value.parse::<u32>()),
                };
                match (tx, rx) {
                    (Ok(tx), Ok(rx)) if tx > 0 && rx > 0 => {
                        cfg.sensing.n_tx = tx;
                        cfg.sensing.n_rx = rx;
                    }
                    _ => return Err(bad("an antenna array such as 4x4")),
                }
            }
            SweepAxis::Rate => {
                cfg.timing.rate = real()?;
                cfg.bandwidth_mhz = None;
            }
            SweepAxis::Bandwidth => {
                cfg.bandwidth_mhz = Some(count()?);
                cfg.apply_bandwidth().map_err(|e| Error::sweep(e.to_string()))?;
            }
        }
        Ok(())
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|a| a.name() == s.trim()).ok_or_else(|| {
            let names: Vec<_> = Self::ALL.iter().map(|a| a.name()).collect();
            Error::sweep(format!("unknown axis `{s}` (expected one of {})", names.join(", ")))
        })
    }
}

/// One sweep axis and its values, as written on the command line:
/// `n_bf=1..9` or `edca_class=BK,BE,VI,VO`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sweep {
    pub axis: SweepAxis,
    pub values: Vec<String>,
}

impl Sweep {
    pub fn new<I, T>(axis: SweepAxis, values: I) -> Self
    where
        I: IntoIterator<Item = T>,
        T: ToString,
    {
        Sweep {
            axis,
            values: values.into_iter().map(|v| v.to_string()).collect(),
        }
    }
}

impl FromStr for Sweep {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (axis, list) = s
            .split_once('=')
            .ok_or_else(|| Error::sweep(format!("`{s}` is not of the form AXIS=v1,v2,...")))?;
        let axis: SweepAxis = axis.parse()?;
        let mut values = Vec::new();
        for item in list.split(',').map(str::trim).filter(|v| !v.is_empty()) {
            match item.split_once("..") {
                Some((a, b)) => {
                    let (a, b) = a
                        .parse::<u32>()
                        .ok()
                        .zip(b.trim_start_matches('=').parse::<u32>().ok())
                        .filter(|(a, b)| a <= b)
                        .ok_or_else(|| Error::sweep(format!("{axis}: bad range `{item}`")))?;
                    values.extend((a..=b).map(|v| v.to_string()));
                }
                None => values.push(item.to_string()),
            }
        }
        if values.is_empty() {
            return Err(Error::sweep(format!("{axis}: empty value list")));
        }
        Ok(Sweep { axis, values })
    }
}

/// Cartesian product of the sweeps over `base`; the first sweep varies slowest.
/// Every point is validated.
pub fn expand(base: &ScenarioConfig, sweeps: &[Sweep]) -> Result<Vec<ScenarioConfig>> {
    let mut points = vec![base.clone()];
    for sweep in sweeps {
        if sweep.values.is_empty() {
            return Err(Error::sweep(format!("{}: empty value list", sweep.axis)));
        }
        let mut next = Vec::with_capacity(points.len() * sweep.values.len());
        for p in &points {
            for v in &sweep.values {
                let mut c = p.clone();
                sweep.axis.apply(&mut c, v)?;
                c.name = format!("{} {}={}", c.name, sweep.axis, v);
                next.push(c);
            }
        }
        points = next;
    }
    for p in &points {
        p.validate()?;
    }
    Ok(points)
}

/// Standard scenario grids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// 1..9 sensing APs next to one legacy AP.
    BfSweep,
    /// 1..9 legacy APs next to one sensing AP.
    AxSweep,
    /// Failure grid: 1..5 sensing APs by five request intervals.
    FailureGrid,
    Edca,
    Antenna,
    Bandwidth,
}

impl Preset {
    pub const ALL: [Preset; 6] = [
        Preset::BfSweep,
        Preset::AxSweep,
        Preset::FailureGrid,
        Preset::Edca,
        Preset::Antenna,
        Preset::Bandwidth,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::BfSweep => "bf-sweep",
            Preset::AxSweep => "ax-sweep",
            Preset::FailureGrid => "failure-grid",
            Preset::Edca => "edca",
            Preset::Antenna => "antenna",
            Preset::Bandwidth => "bandwidth",
        }
    }

    pub fn sweeps(self) -> Vec<Sweep> {
        match self {
            Preset::BfSweep => vec![Sweep::new(SweepAxis::NBf, 1..=9)],
            Preset::AxSweep => vec![Sweep::new(SweepAxis::NAx, 1..=9)],
            Preset::FailureGrid => vec![
                Sweep::new(SweepAxis::NBf, 1..=5),
                Sweep::new(SweepAxis::Interval, [10, 50, 100, 500, 1000]),
            ],
            Preset::Edca => vec![Sweep::new(SweepAxis::EdcaClass, ["BK", "BE", "VI", "VO"])],
            Preset::Antenna => vec![Sweep::new(SweepAxis::Antenna, ["1x1", "2x2", "4x4", "8x8", "16x16"])],
            Preset::Bandwidth => vec![Sweep::new(SweepAxis::Bandwidth, [20, 40, 80, 160])],
        }
    }

    /// The grid over `base`, which is first reduced to one AP of each kind.
    pub fn scenarios(self, base: &ScenarioConfig) -> Result<Vec<ScenarioConfig>> {
        let mut b = base.clone();
        b.name = self.name().into();
        b.population.n_bf = 1;
        b.population.n_ax = 1;
        expand(&b, &self.sweeps())
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|p| p.name() == s.trim()).ok_or_else(|| {
            let names: Vec<_> = Self::ALL.iter().map(|p| p.name()).collect();
            Error::sweep(format!("unknown preset `{s}` (expected one of {})", names.join(", ")))
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CampaignOptions {
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
    pub bins: BinRule,
    /// Relative-error threshold of the engine comparison.
    pub threshold: f64,
}

impl Default for CampaignOptions {
    fn default() -> Self {
        CampaignOptions {
            threads: None,
            bins: BinRule::default(),
            threshold: crate::metrics::DEFAULT_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioResult {
    pub id: String,
    pub config: ScenarioConfig,
    pub analytic: Option<AnalyticPoint>,
    /// Why the model produced no point, e.g. an unstable sensing load.
    pub analytic_error: Option<Error>,
    pub sim: Option<ScenarioSummary>,
    pub comparison: Option<ComparisonReport>,
}

/// File-safe identifier `<index>_<name>`, unique within a campaign.
pub fn scenario_id(index: usize, name: &str) -> String {
    let mut slug = String::with_capacity(name.len());
    for c in name.chars() {
        if c.is_ascii_alphanumeric() || c == '_' || c == '.' {
            slug.push(c.to_ascii_lowercase());
        } else if !slug.ends_with('-') {
            slug.push('-');
        }
    }
    format!("{index:03}_{}", slug.trim_matches('-'))
}

/// Every seed of one scenario, in seed order.
pub fn simulate(config: &ScenarioConfig) -> Result<Vec<RunMetrics>> {
    let simulator = sim::Simulator::new(config)?;
    Ok(config.seeds.resolve().par_iter().map(|&s| simulator.run(s)).collect())
}

/// Runs the model and/or the simulator for every scenario, as each config's
/// `mode` asks. Output order follows `configs` and does not depend on the
/// number of workers.
pub fn run_campaign(configs: &[ScenarioConfig], opts: &CampaignOptions) -> Result<Vec<ScenarioResult>> {
    match opts.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::invalid("threads", e.to_string()))?
            .install(|| run_all(configs, opts)),
        None => run_all(configs, opts),
    }
}

fn run_all(configs: &[ScenarioConfig], opts: &CampaignOptions) -> Result<Vec<ScenarioResult>> {
    for c in configs {
        c.validate()?;
    }
    let simulators = configs
        .iter()
        .map(|c| c.mode.runs_sim().then(|| sim::Simulator::new(c)).transpose())
        .collect::<Result<Vec<_>>>()?;
    let jobs: Vec<(usize, u64)> = configs
        .iter()
        .enumerate()
        .filter(|(i, _)| simulators[*i].is_some())
        .flat_map(|(i, c)| c.seeds.resolve().into_iter().map(move |s| (i, s)))
        .collect();
    let runs: Vec<RunMetrics> = jobs
        .par_iter()
        .map(|&(i, s)| simulators[i].as_ref().expect("simulated scenario").run(s))
        .collect();
    let analytic: Vec<Option<Result<AnalyticPoint>>> = configs
        .par_iter()
        .map(|c| c.mode.runs_analytic().then(|| analytic::evaluate(c)))
        .collect();

    let mut per_scenario: Vec<Vec<RunMetrics>> = vec![Vec::new(); configs.len()];
    for (&(i, _), run) in jobs.iter().zip(runs) {
        per_scenario[i].push(run);
    }
    Ok(configs
        .iter()
        .zip(per_scenario)
        .zip(analytic)
        .enumerate()
        .map(|(i, ((config, runs), model))| {
            let sim = simulators[i].is_some().then(|| summarize(&runs, opts.bins));
            let (analytic, analytic_error) = match model {
                Some(Ok(p)) => (Some(p), None),
                Some(Err(e)) => (None, Some(e)),
                None => (None, None),
            };
            let comparison = match (&analytic, &sim) {
                (Some(a), Some(s)) => Some(compare_engines(a, s, opts.threshold)),
                _ => None,
            };
            ScenarioResult {
                id: scenario_id(i, &config.name),
                config: config.clone(),
                analytic,
                analytic_error,
                sim,
                comparison,
            }
        })
        .collect())
}
