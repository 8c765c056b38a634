//! Python bindings. Scenarios go in and results come out as JSON text, so the
//! Python side needs nothing beyond `json.loads`.

use coexist::campaign::{expand, run_campaign, simulate, CampaignOptions, Preset, Sweep};
use coexist::metrics::{summarize, BinRule};
use coexist::{ErrorCategory, ScenarioConfig};
use pyo3::exceptions::{PyArithmeticError, PyOSError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

fn to_py(e: coexist::Error) -> PyErr {
    let msg = e.to_string();
    match e.category() {
        ErrorCategory::Validation => PyValueError::new_err(msg),
        ErrorCategory::Numerical => PyArithmeticError::new_err(msg),
        ErrorCategory::Io => PyOSError::new_err(msg),
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("results serialize")
}

fn parse(config: Option<&str>) -> PyResult<ScenarioConfig> {
    match config {
        Some(text) => ScenarioConfig::from_json(text).map_err(to_py),
        None => Ok(ScenarioConfig::default()),
    }
}

fn campaign(py: Python<'_>, configs: Vec<ScenarioConfig>, threads: Option<usize>) -> PyResult<String> {
    let opts = CampaignOptions {
        threads,
        ..CampaignOptions::default()
    };
    let results = py.detach(|| run_campaign(&configs, &opts)).map_err(to_py)?;
    Ok(to_json(&results))
}

/// The fully defaulted scenario as JSON.
#[pyfunction]
fn default_config() -> String {
    ScenarioConfig::default().to_json()
}

/// Analytic operating point of one scenario.
#[pyfunction]
fn evaluate(py: Python<'_>, config: &str) -> PyResult<String> {
    let cfg = parse(Some(config))?;
    let point = py.detach(|| coexist::analytic::evaluate(&cfg)).map_err(to_py)?;
    Ok(to_json(&point))
}

/// Simulates every seed of one scenario and returns the pooled summary.
#[pyfunction]
fn simulate_summary(py: Python<'_>, config: &str) -> PyResult<String> {
    let cfg = parse(Some(config))?;
    let runs = py.detach(|| simulate(&cfg)).map_err(to_py)?;
    Ok(to_json(&summarize(&runs, BinRule::default())))
}

/// Runs a scenario, or the grid spanned by `sweeps` such as `"n_bf=1..9"`,
/// in the mode set by the config.
#[pyfunction]
#[pyo3(signature = (config=None, sweeps=Vec::new(), threads=None))]
fn run(py: Python<'_>, config: Option<&str>, sweeps: Vec<String>, threads: Option<usize>) -> PyResult<String> {
    let base = parse(config)?;
    let sweeps = sweeps
        .iter()
        .map(|s| s.parse::<Sweep>())
        .collect::<coexist::Result<Vec<_>>>()
        .map_err(to_py)?;
    let configs = expand(&base, &sweeps).map_err(to_py)?;
    campaign(py, configs, threads)
}

/// Runs a named scenario grid such as `"bf-sweep"` over `config`.
#[pyfunction]
#[pyo3(signature = (name, config=None, threads=None))]
fn preset(py: Python<'_>, name: &str, config: Option<&str>, threads: Option<usize>) -> PyResult<String> {
    let preset: Preset = name.parse().map_err(to_py)?;
    let configs = preset.scenarios(&parse(config)?).map_err(to_py)?;
    campaign(py, configs, threads)
}

#[pymodule]
fn coexist_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(default_config, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_summary, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(preset, m)?)?;
    Ok(())
}
