use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use coexist::calibrate::{calibrate_rate, default_rates, CalibrationTarget};
use coexist::campaign::{emit, expand, run_campaign, CampaignOptions, OutputFormat, Preset, ScenarioResult, Sweep};
use coexist::{load_config, ErrorCategory, RunMode, ScenarioConfig, Seeds};

#[derive(Parser)]
#[command(
    name = "coexctl",
    version,
    about = "Sensing / legacy Wi-Fi coexistence: model, simulator and campaigns"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario, or a sweep over it.
    Run(RunArgs),
    /// Run a standard scenario grid.
    Preset {
        #[arg(value_parser = parse_preset)]
        name: Preset,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Pick the data rate that matches the one-plus-one baseline.
    Calibrate {
        #[command(flatten)]
        common: Common,
        /// Candidate rates in Mbit/s, e.g. `40..90` or `50,60,70`.
        #[arg(long)]
        rates: Option<String>,
        /// Write the report as JSON to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the fully defaulted scenario configuration.
    Schema,
}

#[derive(Args, Clone)]
struct Common {
    /// Scenario JSON file; omitted fields take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Seed count `N` (seeds 0..N), a list `1,5,9` or a range `0..9`.
    #[arg(long)]
    seeds: Option<String>,
    /// Worker threads.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args, Clone)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    /// Sweep axis and values, e.g. `n_bf=1..9`; repeat for a grid.
    #[arg(long = "sweep", value_parser = parse_sweep)]
    sweeps: Vec<Sweep>,
    /// Output directory; nothing is written without it.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated output formats.
    #[arg(long, value_delimiter = ',', default_value = "csv,json", value_parser = parse_format)]
    format: Vec<OutputFormat>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Analytic,
    Sim,
    Both,
}

impl From<Mode> for RunMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Analytic => RunMode::Analytic,
            Mode::Sim => RunMode::Sim,
            Mode::Both => RunMode::Both,
        }
    }
}

fn parse_sweep(s: &str) -> Result<Sweep, String> {
    s.parse().map_err(|e: coexist::Error| e.to_string())
}

fn parse_preset(s: &str) -> Result<Preset, String> {
    s.parse().map_err(|e: coexist::Error| e.to_string())
}

fn parse_format(s: &str) -> Result<OutputFormat, String> {
    s.parse().map_err(|e: coexist::Error| e.to_string())
}

fn parse_list(s: &str) -> anyhow::Result<Vec<f64>> {
    let mut out = Vec::new();
    for item in s.split(',').map(str::trim).filter(|v| !v.is_empty()) {
        match item.split_once("..") {
            Some((a, b)) => {
                let (a, b): (u64, u64) = (a.parse()?, b.trim_start_matches('=').parse()?);
                anyhow::ensure!(a <= b, "empty range `{item}`");
                out.extend((a..=b).map(|v| v as f64));
            }
            None => out.push(item.parse()?),
        }
    }
    anyhow::ensure!(!out.is_empty(), "empty list");
    Ok(out)
}

fn parse_seeds(s: &str) -> anyhow::Result<Seeds> {
    if let Ok(n) = s.trim().parse::<u64>() {
        return Ok(Seeds::Count(n));
    }
    let values = parse_list(s).with_context(|| format!("bad seed list `{s}`"))?;
    Ok(Seeds::List(values.into_iter().map(|v| v as u64).collect()))
}

/// Marks a failure with the exit code of its category.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl From<coexist::Error> for Failure {
    fn from(e: coexist::Error) -> Self {
        let code = match e.category() {
            ErrorCategory::Validation => 2,
            ErrorCategory::Numerical => 3,
            ErrorCategory::Io => 4,
        };
        Failure { code, error: e.into() }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        Failure { code: 2, error }
    }
}

fn base_config(common: &Common) -> Result<ScenarioConfig, Failure> {
    let mut cfg = match &common.config {
        Some(path) => load_config(path)?,
        None => ScenarioConfig::default(),
    };
    if let Some(s) = &common.seeds {
        cfg.seeds = parse_seeds(s)?;
    }
    Ok(cfg)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |v| format!("{v:.2}"))
}

fn results_table(results: &[ScenarioResult]) -> String {
    let mut t = String::new();
    let _ = writeln!(
        t,
        "{:<32} {:>9} {:>9} {:>9} {:>8} {:>9} {:>9} {:>8}",
        "scenario", "lat_med", "lat_mean", "thr_mbps", "fail_%", "an_lat", "an_thr", "flag"
    );
    for r in results {
        let s = r.sim.as_ref();
        let a = r.analytic.as_ref();
        let flag = match (&r.comparison, &r.analytic_error) {
            (_, Some(_)) => "error",
            (Some(c), _) if c.any_flagged() => "diverge",
            (Some(_), _) => "ok",
            _ => "-",
        };
        let _ = writeln!(
            t,
            "{:<32} {:>9} {:>9} {:>9} {:>8} {:>9} {:>9} {:>8}",
            r.id,
            fmt_opt(s.and_then(|s| s.latency_ms.median())),
            fmt_opt(s.and_then(|s| s.latency_ms.mean())),
            fmt_opt(s.and_then(|s| s.ax_throughput_mbps.mean())),
            fmt_opt(s.and_then(|s| s.failure.percent)),
            fmt_opt(a.and_then(|a| a.latency_ms)),
            fmt_opt(a.map(|a| a.ax_throughput_mbps)),
            flag,
        );
    }
    t
}

/// Writes to stdout; a closed pipe is not an error worth reporting.
fn emit_stdout(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn run(configs: Vec<ScenarioConfig>, args: &RunArgs) -> Result<(), Failure> {
    let configs: Vec<ScenarioConfig> = configs
        .into_iter()
        .map(|mut c| {
            if let Some(m) = args.mode {
                c.mode = m.into();
            }
            c
        })
        .collect();
    log::info!("running {} scenario(s)", configs.len());
    let opts = CampaignOptions {
        threads: args.common.threads,
        ..CampaignOptions::default()
    };
    let results = run_campaign(&configs, &opts)?;
    emit_stdout(&results_table(&results));
    if let Some(dir) = &args.out {
        let files = emit(&results, &args.format, dir)?;
        log::info!("wrote {} file(s) to {}", files.len(), dir.display());
    }
    let failed: Vec<_> = results
        .iter()
        .filter_map(|r| r.analytic_error.as_ref().map(|e| (&r.id, e)))
        .collect();
    for (id, e) in &failed {
        eprintln!("warning: {id}: model produced no point: {e}");
    }
    match failed.first() {
        Some((_, e)) => Err((*e).clone().into()),
        None => Ok(()),
    }
}

fn execute(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Run(args) => {
            let base = base_config(&args.common)?;
            let configs = expand(&base, &args.sweeps)?;
            run(configs, &args)
        }
        Command::Preset { name, run: args } => {
            let mut base = base_config(&args.common)?;
            // on a preset, single-valued sweeps pin a base field
            for s in &args.sweeps {
                let [value] = s.values.as_slice() else {
                    return Err(anyhow::anyhow!("preset overrides take one value, got `{}`", s.axis).into());
                };
                s.axis.apply(&mut base, value)?;
            }
            let configs = name.scenarios(&base)?;
            run(configs, &args)
        }
        Command::Calibrate { common, rates, out } => {
            let base = base_config(&common)?;
            let rates = match rates {
                Some(r) => parse_list(&r).context("bad --rates")?,
                None => default_rates(),
            };
            let target = CalibrationTarget::default();
            let pool = rayon_pool(common.threads)?;
            let report = pool.install(|| calibrate_rate(&base, &rates, &target))?;
            let mut t = String::new();
            let _ = writeln!(
                t,
                "{:>8} {:>6} {:>10} {:>10} {:>8}",
                "rate", "mpdus", "lat_med", "thr_mbps", "score"
            );
            for p in &report.points {
                let _ = writeln!(
                    t,
                    "{:>8.2} {:>6} {:>10} {:>10.2} {:>8.3}",
                    p.rate,
                    p.ax_mpdus,
                    fmt_opt(p.median_latency_ms),
                    p.throughput_mbps,
                    p.score
                );
            }
            let verdict = if report.within_tolerance() { "within" } else { "outside" };
            let _ = writeln!(t, "best rate {:.2} Mbit/s ({verdict} tolerance)", report.best.rate);
            emit_stdout(&t);
            if let Some(path) = out {
                let text = serde_json::to_string_pretty(&report).expect("report serializes");
                std::fs::write(&path, text + "\n").map_err(|e| Failure {
                    code: 4,
                    error: anyhow::Error::new(e).context(format!("writing {}", path.display())),
                })?;
            }
            Ok(())
        }
        Command::Schema => {
            emit_stdout(&(ScenarioConfig::default().to_json() + "\n"));
            Ok(())
        }
    }
}

fn rayon_pool(threads: Option<usize>) -> anyhow::Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        b = b.num_threads(n);
    }
    b.build().context("building worker pool")
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("COEX_LOG", "warn")).init();
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
