use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::ScenarioResult;
use crate::error::{Error, Result};
use crate::metrics::{DistributionSummary, HistogramBin};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.extension())
    }
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => Err(Error::invalid("format", format!("unknown format `{s}` (csv, json)"))),
        }
    }
}

/// One row of the summary table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub scenario_id: String,
    pub metric: String,
    pub mean: Option<f64>,
    pub median: Option<f64>,
    pub p5: Option<f64>,
    pub p25: Option<f64>,
    pub p75: Option<f64>,
    pub p95: Option<f64>,
    pub n: Option<u64>,
}

impl SummaryRow {
    fn scalar(id: &str, metric: &str, value: f64, n: Option<u64>) -> Self {
        SummaryRow {
            scenario_id: id.into(),
            metric: metric.into(),
            mean: Some(value),
            median: None,
            p5: None,
            p25: None,
            p75: None,
            p95: None,
            n,
        }
    }

    fn distribution(id: &str, metric: &str, d: &DistributionSummary) -> Self {
        let q = d.stats;
        SummaryRow {
            scenario_id: id.into(),
            metric: metric.into(),
            mean: q.map(|q| q.mean),
            median: q.map(|q| q.median),
            p5: q.map(|q| q.p5),
            p25: q.map(|q| q.p25),
            p75: q.map(|q| q.p75),
            p95: q.map(|q| q.p95),
            n: Some(d.n_samples as u64),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramRow {
    pub scenario_id: String,
    pub bin_lo: f64,
    pub bin_hi: f64,
    pub count: u64,
}

/// Summary rows of one scenario: simulated distributions first, then the
/// model's point values.
pub fn summary_rows(r: &ScenarioResult) -> Vec<SummaryRow> {
    let id = r.id.as_str();
    let mut rows = Vec::new();
    if let Some(s) = &r.sim {
        rows.push(SummaryRow::distribution(id, "latency_ms", &s.latency_ms));
        rows.push(SummaryRow::distribution(
            id,
            "ax_throughput_mbps",
            &s.ax_throughput_mbps,
        ));
        let mut failure = SummaryRow::scalar(id, "failure_pct", f64::NAN, Some(s.failure.attempted));
        failure.mean = s.failure.percent;
        rows.push(failure);
    }
    if let Some(a) = &r.analytic {
        if let Some(l) = a.latency_ms {
            rows.push(SummaryRow::scalar(id, "analytic_latency_ms", l, None));
        }
        rows.push(SummaryRow::scalar(
            id,
            "analytic_ax_throughput_mbps",
            a.ax_throughput_mbps,
            None,
        ));
        if let Some(d) = a.drop_probability {
            rows.push(SummaryRow::scalar(id, "analytic_failure_pct", 100.0 * d, None));
        }
    }
    rows
}

/// Latency histogram of one scenario.
pub fn histogram_rows(r: &ScenarioResult) -> Vec<HistogramRow> {
    let bins: &[HistogramBin] = r.sim.as_ref().map_or(&[], |s| &s.latency_ms.histogram);
    bins.iter()
        .map(|b| HistogramRow {
            scenario_id: r.id.clone(),
            bin_lo: b.lo,
            bin_hi: b.hi,
            count: b.count,
        })
        .collect()
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T], header: &[&str]) -> Result<()> {
    let io = |e: csv::Error| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    };
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(io)?;
    w.write_record(header).map_err(io)?;
    for row in rows {
        w.serialize(row).map_err(io)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

const SUMMARY_HEADER: [&str; 9] = [
    "scenario_id",
    "metric",
    "mean",
    "median",
    "p5",
    "p25",
    "p75",
    "p95",
    "n",
];
const HISTOGRAM_HEADER: [&str; 4] = ["scenario_id", "bin_lo", "bin_hi", "count"];

/// Writes `scenario_<id>.<format>` for every result and format. CSV output
/// also produces campaign-wide `summary.csv` and `histograms.csv`. Returns the
/// written paths in order.
pub fn emit(results: &[ScenarioResult], formats: &[OutputFormat], out_dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut written = Vec::new();
    let mut formats = formats.to_vec();
    formats.dedup();
    for r in results {
        for &f in &formats {
            let path = out_dir.join(format!("scenario_{}.{}", r.id, f.extension()));
            match f {
                OutputFormat::Csv => write_csv(&path, &summary_rows(r), &SUMMARY_HEADER)?,
                OutputFormat::Json => {
                    let mut text = serde_json::to_string_pretty(r).expect("results serialize");
                    text.push('\n');
                    fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
                }
            }
            written.push(path);
        }
    }
    if formats.contains(&OutputFormat::Csv) {
        let summary: Vec<SummaryRow> = results.iter().flat_map(summary_rows).collect();
        let path = out_dir.join("summary.csv");
        write_csv(&path, &summary, &SUMMARY_HEADER)?;
        written.push(path);
        let hist: Vec<HistogramRow> = results.iter().flat_map(histogram_rows).collect();
        let path = out_dir.join("histograms.csv");
        write_csv(&path, &hist, &HISTOGRAM_HEADER)?;
        written.push(path);
    }
    Ok(written)
}
