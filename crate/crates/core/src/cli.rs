//! Command-line front end: `simulate`, `estimate` and `plotdata`.
//!
//! Exit codes: 0 success, 2 usage or configuration error, 3 input data error,
//! 4 estimation error (positivity, singular design, domain), 5 I/O error,
//! 6 replication failures under `--strict`.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::analysis::{analyze, AnalysisConfig};
use crate::datamodel::{read_panel_csv, write_panel_csv, ExposureGroup, FeatureMap, PanelDataset};
use crate::error::{Error, Result};
use crate::estimators::{AttComparison, Contrast, Estimator};
use crate::report::{write_estimates_csv, Metadata, ReportDocument};
use crate::simulation::{
    generate_panel, run_monte_carlo_with_truth, true_estimands, write_results_csv, DgpKind,
    Scenario, ScenarioSpec, SimulationConfig, DEFAULT_ORACLE_N,
};

pub const THREADS_ENV: &str = "SPILLOVER_DID_THREADS";

/// Seed used when neither a flag nor a config file supplies one.
pub const DEFAULT_SEED: u64 = 2024;

#[derive(Debug, Parser)]
#[command(
    name = "spillover-did",
    version,
    about = "Difference-in-differences under spatial spillover"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run Monte Carlo studies on the built-in data-generating processes.
    Simulate(SimulateArgs),
    /// Estimate effects on a panel CSV.
    Estimate(EstimateArgs),
    /// Per-group mean outcome series for plotting.
    Plotdata(PlotdataArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ScenarioArg {
    A,
    B,
    C,
}

impl From<ScenarioArg> for Scenario {
    fn from(s: ScenarioArg) -> Self {
        match s {
            ScenarioArg::A => Scenario::A,
            ScenarioArg::B => Scenario::B,
            ScenarioArg::C => Scenario::C,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum DgpArg {
    TwoPeriod,
    MultiPeriod,
}

impl From<DgpArg> for DgpKind {
    fn from(d: DgpArg) -> Self {
        match d {
            DgpArg::TwoPeriod => DgpKind::TwoPeriod,
            DgpArg::MultiPeriod => DgpKind::MultiPeriod,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum AttComparisonArg {
    IsolatedControl,
    #[value(alias = "paper-literal")]
    NeighborControl,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Nuisance specification scenario(s): a, b or c.
    #[arg(long, value_enum, value_delimiter = ',')]
    pub scenario: Vec<ScenarioArg>,
    /// Units per replication; a comma-separated list runs several sizes.
    #[arg(long, value_delimiter = ',')]
    pub n: Vec<usize>,
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub dgp: Option<DgpArg>,
    #[arg(long)]
    pub theta01: Option<f64>,
    #[arg(long)]
    pub theta10: Option<f64>,
    /// Number of pre (and post) periods; must match the chosen design.
    #[arg(long)]
    pub periods: Option<usize>,
    /// Output directory for `simulate.json` and `simulate_<scenario>.csv`.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Comma-separated estimands (Delta, ATT, ATN, Offset, AOTT).
    #[arg(long, value_delimiter = ',')]
    pub estimands: Vec<String>,
    /// Comma-separated estimators (IPW, Reg, DR).
    #[arg(long, value_delimiter = ',')]
    pub estimators: Vec<String>,
    /// TOML file with any of: scenario, n, reps, seed, dgp, theta01, theta10, T.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Write the first replication's dataset of the first cell to this CSV.
    #[arg(long)]
    pub dump_data: Option<PathBuf>,
    /// Worker threads (0 = automatic). Overrides SPILLOVER_DID_THREADS.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Draws used to compute the true estimand values.
    #[arg(long, default_value_t = DEFAULT_ORACLE_N)]
    pub oracle_n: usize,
    /// Exit nonzero when any replication fails.
    #[arg(long)]
    pub strict: bool,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// Panel CSV: unit_id, group, x1..xq, then y_tm{T-1}..y_t0, y_t1..y_tT.
    #[arg(long)]
    pub input: PathBuf,
    /// Propensity terms, e.g. "1 + x1 + x2". Defaults to all covariates linearly.
    #[arg(long)]
    pub ps_map: Option<String>,
    /// Outcome-difference terms. Defaults to all covariates linearly.
    #[arg(long)]
    pub om_map: Option<String>,
    #[arg(long, value_delimiter = ',', default_value = "AOTT")]
    pub estimands: Vec<String>,
    #[arg(long, value_delimiter = ',', default_value = "DR")]
    pub estimators: Vec<String>,
    /// ATT(rho) for each listed share of treated neighbours.
    #[arg(long, value_delimiter = ',')]
    pub rho: Vec<f64>,
    /// Expected number of pre (and post) periods.
    #[arg(long)]
    pub periods: Option<usize>,
    /// Output directory for `estimate.json` and `estimates.csv`; JSON goes
    /// to stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "isolated-control")]
    pub att_comparison: AttComparisonArg,
    /// Lower bound on predicted propensities (off by default).
    #[arg(long)]
    pub ps_floor: Option<f64>,
}

#[derive(Debug, Args)]
pub struct PlotdataArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Output CSV; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Maps an error to the process exit code.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) => 2,
        Error::Data { .. } | Error::Structure(_) | Error::Specification(_) | Error::Csv(_) => 3,
        Error::Positivity(_) | Error::Singular(_) | Error::Domain(_) => 4,
        Error::Io(_) | Error::Json(_) => 5,
    }
}

/// Parses `args` (program name first), runs the command and returns the exit
/// code. Messages go to stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let outcome = match cli.command {
        Command::Simulate(a) => cmd_simulate(&a),
        Command::Estimate(a) => cmd_estimate(&a).map(|()| 0),
        Command::Plotdata(a) => cmd_plotdata(&a).map(|()| 0),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn parse_list<T: std::str::FromStr<Err = Error>>(items: &[String]) -> Result<Vec<T>> {
    items.iter().map(|s| s.parse()).collect()
}

fn thread_count(flag: Option<usize>) -> Result<usize> {
    if let Some(t) = flag {
        return Ok(t);
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) if !v.trim().is_empty() => v.trim().parse().map_err(|_| {
            Error::Config(format!(
                "{THREADS_ENV} must be a non-negative integer, got {v:?}"
            ))
        }),
        _ => Ok(0),
    }
}

#[derive(Debug, Serialize)]
struct SimulateEcho {
    scenarios: Vec<String>,
    n: Vec<usize>,
    reps: usize,
    seed: u64,
    dgp: DgpKind,
    theta01: f64,
    theta10: f64,
    #[serde(rename = "T")]
    periods: usize,
    estimands: Vec<Contrast>,
    estimators: Vec<Estimator>,
    oracle_n: usize,
}

pub fn cmd_simulate(a: &SimulateArgs) -> Result<i32> {
    let file = match &a.config {
        Some(path) => SimulationConfig::load(path)?,
        None => SimulationConfig::default(),
    };
    let scenarios: Vec<Scenario> = if !a.scenario.is_empty() {
        a.scenario.iter().map(|&s| s.into()).collect()
    } else if let Some(s) = &file.scenario {
        s.split(',').map(str::parse).collect::<Result<_>>()?
    } else {
        vec![Scenario::A]
    };
    let sizes: Vec<usize> = if !a.n.is_empty() {
        a.n.clone()
    } else {
        vec![file.n.unwrap_or(2000)]
    };
    let reps = a.reps.or(file.reps).unwrap_or(1000);
    let seed = a.seed.or(file.seed).unwrap_or(DEFAULT_SEED);
    let kind: DgpKind = a
        .dgp
        .map(Into::into)
        .or(file.dgp)
        .unwrap_or(DgpKind::TwoPeriod);
    let dgp = kind.params(
        a.theta01.or(file.theta01),
        a.theta10.or(file.theta10),
        a.periods.or(file.periods),
    )?;
    let contrasts: Vec<Contrast> = if a.estimands.is_empty() {
        vec![Contrast::Aott]
    } else {
        parse_list(&a.estimands)?
    };
    let estimators: Vec<Estimator> = if a.estimators.is_empty() {
        vec![Estimator::Dr]
    } else {
        parse_list(&a.estimators)?
    };
    let threads = thread_count(a.threads)?;
    if sizes.contains(&0) || reps == 0 {
        return Err(Error::Config("--n and --reps must be positive".into()));
    }
    if a.oracle_n < 2 {
        return Err(Error::Config("--oracle-n must be at least 2".into()));
    }

    let echo = SimulateEcho {
        scenarios: scenarios.iter().map(|s| s.label().to_string()).collect(),
        n: sizes.clone(),
        reps,
        seed,
        dgp: kind,
        theta01: dgp.theta01,
        theta10: dgp.theta10,
        periods: dgp.periods,
        estimands: contrasts.clone(),
        estimators: estimators.clone(),
        oracle_n: a.oracle_n,
    };

    if let Some(path) = &a.dump_data {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(0);
        write_panel_csv(&generate_panel(&dgp, sizes[0], &mut rng)?, path)?;
    }

    let truths = true_estimands(&dgp, a.oracle_n, seed)?;
    let mut reports = Vec::new();
    for &scenario in &scenarios {
        for &n in &sizes {
            let mut spec = ScenarioSpec::new(scenario, dgp.clone(), n, reps, seed);
            spec.contrasts = contrasts.clone();
            spec.estimators = estimators.clone();
            spec.oracle_n = a.oracle_n;
            spec.threads = threads;
            reports.push(run_monte_carlo_with_truth(&spec, &truths)?);
        }
    }

    fs::create_dir_all(&a.out)?;
    for &scenario in &scenarios {
        let rows: Vec<_> = reports
            .iter()
            .filter(|r| r.spec.scenario == scenario)
            .flat_map(|r| r.results.iter().cloned())
            .collect();
        let path = a.out.join(format!("simulate_{scenario}.csv"));
        let mut w = std::io::BufWriter::new(fs::File::create(&path)?);
        write_results_csv(&rows, &mut w)?;
        w.flush()?;
    }
    let failed: usize = reports.iter().map(|r| r.failures.len()).sum();
    let doc = ReportDocument::for_simulation(
        Metadata::new("simulate", serde_json::to_value(&echo)?),
        reports,
    );
    doc.write_to_path(a.out.join("simulate.json"))?;
    if failed > 0 {
        eprintln!("warning: {failed} replication(s) failed; see simulate.json");
        if a.strict {
            return Ok(6);
        }
    }
    Ok(0)
}

pub fn cmd_estimate(a: &EstimateArgs) -> Result<()> {
    let d = read_panel_csv(&a.input)?;
    if let Some(t) = a.periods {
        if t != d.periods() {
            return Err(Error::Structure(format!(
                "--periods {t} expects {} outcome columns, the file has {}",
                2 * t,
                d.time_points().len()
            )));
        }
    }
    let q = d.n_covariates();
    let map = |text: &Option<String>| -> Result<FeatureMap> {
        match text {
            Some(t) => FeatureMap::parse(t),
            None => Ok(FeatureMap::linear(q)),
        }
    };
    let cfg = AnalysisConfig {
        ps_map: map(&a.ps_map)?,
        om_map: map(&a.om_map)?,
        contrasts: parse_list(&a.estimands)?,
        estimators: parse_list(&a.estimators)?,
        rhos: a.rho.clone(),
        att_comparison: match a.att_comparison {
            AttComparisonArg::IsolatedControl => AttComparison::IsolatedControl,
            AttComparisonArg::NeighborControl => AttComparison::NeighborControl,
        },
        ps_floor: a.ps_floor,
    };
    if let Some(eps) = cfg.ps_floor {
        if !(eps > 0.0 && eps < 1.0 / 3.0) {
            return Err(Error::Config(format!(
                "--ps-floor must lie in (0, 1/3), got {eps}"
            )));
        }
    }
    let out = analyze(&d, &cfg)?;
    let echo = json!({
        "input": a.input.file_name().map(|s| s.to_string_lossy().into_owned()),
        "n_units": d.n_units(),
        "T": d.periods(),
        "ps_map": cfg.ps_map,
        "om_map": cfg.om_map,
        "estimands": cfg.contrasts,
        "estimators": cfg.estimators,
        "rho": cfg.rhos,
        "att_comparison": cfg.att_comparison,
        "ps_floor": cfg.ps_floor,
    });
    let doc = ReportDocument::for_analysis(Metadata::new("estimate", echo), &out);
    for w in &out.warnings {
        eprintln!("warning: {w}");
    }
    match &a.out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            doc.write_to_path(dir.join("estimate.json"))?;
            let mut w = std::io::BufWriter::new(fs::File::create(dir.join("estimates.csv"))?);
            write_estimates_csv(&doc.estimates, &mut w)?;
            w.flush()?;
        }
        None => doc.to_writer(std::io::stdout().lock())?,
    }
    Ok(())
}

/// Mean outcome and its standard error per time point and group.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesPoint {
    pub t: i32,
    pub group: ExposureGroup,
    pub mean: f64,
    /// Sample standard deviation over `sqrt(count)`; NaN for a single unit.
    pub se: f64,
}

pub fn group_mean_series(d: &PanelDataset) -> Vec<SeriesPoint> {
    let mut out = Vec::new();
    for (k, &t) in d.time_points().iter().enumerate() {
        for group in ExposureGroup::ALL {
            let ys: Vec<f64> = d
                .units()
                .iter()
                .filter(|u| u.group == group)
                .map(|u| u.outcomes[k])
                .collect();
            if ys.is_empty() {
                continue;
            }
            let m = ys.len() as f64;
            let mean = ys.iter().sum::<f64>() / m;
            let se = if ys.len() > 1 {
                (ys.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / (m - 1.0) / m).sqrt()
            } else {
                f64::NAN
            };
            out.push(SeriesPoint { t, group, mean, se });
        }
    }
    out
}

pub fn write_series_csv(series: &[SeriesPoint], writer: impl Write) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["t", "group", "mean", "se"])?;
    for p in series {
        wtr.write_record([
            p.t.to_string(),
            p.group.code().to_string(),
            p.mean.to_string(),
            p.se.to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn cmd_plotdata(a: &PlotdataArgs) -> Result<()> {
    let d = read_panel_csv(&a.input)?;
    let series = group_mean_series(&d);
    match &a.out {
        Some(path) => write_series(path, &series),
        None => write_series_csv(&series, std::io::stdout().lock()),
    }
}

fn write_series(path: &Path, series: &[SeriesPoint]) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    let mut w = std::io::BufWriter::new(fs::File::create(path)?);
    write_series_csv(series, &mut w)?;
    w.flush()?;
    Ok(())
}
