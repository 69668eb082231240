//! Command-line front end: `spectrum`, `report` and `selftest`.
//!
//! Exit codes: 0 success, 1 self-test failure, 2 bad arguments or config,
//! 3 I/O failure, 4 a request the model cannot answer.

pub mod config;
pub mod output;
pub mod selftest;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::error::TransportError;
use crate::model::{ModelParams, Regime};
use crate::oracle::{solve_full_system, solve_reduced_system, solve_transfer_matrix};
use crate::scattering::scatter;
use crate::spectrum::{band_report, find_band_edges, sweep, BandReport, Spectrum};
use config::{Case, OutputFormat, RunConfig};
use output::{Panel, SpectrumRow};

/// Relative error injected into t by `--inject-fault`.
const INJECTED_FAULT: f64 = 1e-6;

/// Grid points per case compared against the oracles in `report`.
const REPORT_ORACLE_SAMPLES: usize = 101;

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Config(String),
    Io(String),
    Domain(String),
    SelftestFailed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::SelftestFailed(_) => 1,
            CliError::Config(_) => 2,
            CliError::Io(_) => 3,
            CliError::Domain(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Domain(m) => write!(f, "domain error: {m}"),
            CliError::SelftestFailed(m) => write!(f, "self-test failed: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<TransportError> for CliError {
    fn from(e: TransportError) -> Self {
        match e {
            TransportError::InvalidParameter { .. } => CliError::Config(e.to_string()),
            other => CliError::Domain(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "cavity-transport", version, about = "Single-photon transmission through an atom-doped cavity array")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Output file; overrides `output` in the config. Defaults to stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,

    #[arg(long, value_enum, global = true)]
    pub format: Option<OutputFormat>,

    /// Seed for the self-test draws.
    #[arg(long, default_value_t = 0, global = true)]
    pub seed: u64,

    /// Number of self-test draws to compare.
    #[arg(long, default_value_t = 1000, global = true)]
    pub draws: usize,

    #[arg(long, hide = true, global = true)]
    pub inject_fault: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sweep R and T over the configured detuning grid.
    Spectrum,
    /// Band edges, half-widths and gap attenuation as JSON.
    Report,
    /// Compare the closed forms against the brute-force solvers on random draws.
    Selftest,
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
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
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Spectrum => cmd_spectrum(cli),
        Command::Report => cmd_report(cli),
        Command::Selftest => cmd_selftest(cli),
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let path = cli
        .config
        .as_deref()
        .ok_or_else(|| CliError::Config("--config is required for this command".into()))?;
    RunConfig::load(path)
}

fn write_stdout(bytes: &[u8]) -> Result<(), CliError> {
    let mut out = std::io::stdout().lock();
    out.write_all(bytes)
        .and_then(|_| out.flush())
        .map_err(|e| CliError::Io(format!("stdout: {e}")))
}

#[derive(Serialize)]
struct SpectrumJson<'a> {
    n_cells: usize,
    delta_omega: f64,
    v: f64,
    g: f64,
    omega0: f64,
    rows: &'a [SpectrumRow],
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "n/a".to_string(), |v| format!("{v:.6}"))
}

fn summarize(case: &Case, spectrum: &Spectrum) -> String {
    let scattering: Vec<f64> =
        spectrum.points.iter().filter(|p| p.regime.is_scattering()).map(|p| p.big_t).collect();
    let min_t = scattering.iter().copied().fold(f64::INFINITY, f64::min);
    let max_t = scattering.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let edges = match find_band_edges(&spectrum.params) {
        Ok(e) => {
            let (lo, hi) = match (e.central_band, e.outer) {
                (true, Some(outer)) => outer,
                _ => (e.lower, e.upper),
            };
            format!("[{}, {}]", fmt_opt(Some(lo - spectrum.params.omega0())), fmt_opt(Some(hi - spectrum.params.omega0())))
        }
        Err(_) => "none".to_string(),
    };
    format!("{}: min T {min_t:.6e}, max T {max_t:.6e}, gap edges {edges}", case.label())
}

fn cmd_spectrum(cli: &Cli) -> Result<(), CliError> {
    let config = load_config(cli)?;
    let format = cli.format.unwrap_or(config.format);
    let base = cli.output.clone().or_else(|| config.output.clone());
    let cases = config.cases();
    if base.is_none() && cases.len() > 1 {
        return Err(CliError::Config("output: several cases need an output file".into()));
    }
    let grid = config.grid_points();

    let mut written = Vec::new();
    for case in &cases {
        let params = case.params()?;
        let spectrum = sweep(&params, &grid)?;
        if spectrum.points.iter().all(|p| p.regime == Regime::LeadBandEdge) {
            return Err(CliError::Domain(format!(
                "{}: every grid point lies outside the lead band",
                case.label()
            )));
        }
        let rows = output::rows(&spectrum);
        // The data owns stdout when no file is given, so the summary moves to stderr.
        match &base {
            Some(base) => {
                let path = case.output_path(base);
                match format {
                    OutputFormat::Csv => output::write_csv(&path, &rows)?,
                    OutputFormat::Json => output::write_json(&path, &json_doc(&params, &rows))?,
                }
                println!("{}", summarize(case, &spectrum));
                written.push((case.clone(), path));
            }
            None => {
                eprintln!("{}", summarize(case, &spectrum));
                match format {
                    OutputFormat::Csv => {
                        let mut buf = Vec::new();
                        output::write_csv_to(&mut buf, &rows).map_err(|e| CliError::Io(e.to_string()))?;
                        write_stdout(&buf)?;
                    }
                    OutputFormat::Json => {
                        let text = serde_json::to_string_pretty(&json_doc(&params, &rows))
                            .map_err(|e| CliError::Io(e.to_string()))?;
                        write_stdout(format!("{text}\n").as_bytes())?;
                    }
                }
            }
        }
    }

    if config.emit_plot_script {
        let Some(base) = &base else {
            return Err(CliError::Config("emit_plot_script: needs an output file".into()));
        };
        if format != OutputFormat::Csv {
            return Err(CliError::Config("emit_plot_script: needs csv output".into()));
        }
        let script_path = base.with_extension("gp");
        let image = base.with_extension("png");
        let script = output::plot_script(&image, &panels(&config, &written));
        output::write_text(&script_path, &script)?;
    }
    Ok(())
}

fn json_doc<'a>(params: &ModelParams, rows: &'a [SpectrumRow]) -> SpectrumJson<'a> {
    SpectrumJson {
        n_cells: params.n_cells(),
        delta_omega: params.delta_omega(),
        v: params.v(),
        g: params.g(),
        omega0: params.omega0(),
        rows,
    }
}

/// One panel per N when several detunings share it, otherwise one panel per case.
fn panels(config: &RunConfig, written: &[(Case, PathBuf)]) -> Vec<Panel> {
    if config.delta_omegas.len() > 1 && config.n_cells.len() > 1 {
        return config
            .n_cells
            .iter()
            .map(|&n| Panel {
                title: format!("N = {n}"),
                curves: written
                    .iter()
                    .filter(|(c, _)| c.n_cells == n)
                    .map(|(c, p)| (p.clone(), format!("delta_omega = {}", c.delta_omega)))
                    .collect(),
            })
            .collect();
    }
    written
        .iter()
        .map(|(c, p)| Panel { title: c.label(), curves: vec![(p.clone(), c.label())] })
        .collect()
}

/// Per-case entry of the `report` output.
#[derive(Debug, Clone, Serialize)]
pub struct CaseReport {
    pub n_cells: usize,
    pub delta_omega: f64,
    pub v: f64,
    pub g: f64,
    pub gamma: f64,
    pub omega0: f64,
    pub probe: f64,
    /// "ok" or "no_gap".
    pub gap_status: &'static str,
    #[serde(flatten)]
    pub band: BandReport,
    pub central_band_edges: Option<(f64, f64)>,
    /// Largest |edge − nominal| over 2γ.
    pub gap_edge_relative_error: Option<f64>,
    pub dicke_ratio: Option<f64>,
    pub slope_over_minus_two_kappa: Option<f64>,
    /// Largest |Δr|, |Δt| between the closed form and the three solvers on the grid.
    pub oracle_max_deviation: Option<f64>,
}

fn oracle_deviation(params: &ModelParams, grid: &[f64]) -> Option<f64> {
    let stride = (grid.len() / REPORT_ORACLE_SAMPLES).max(1);
    grid.iter()
        .step_by(stride)
        .filter_map(|&s| {
            let e = params.omega0() + s;
            let a = scatter(e, params).ok().filter(|a| a.regime != Regime::AtomPole)?;
            let full = solve_full_system(e, params).ok()?;
            let reduced = solve_reduced_system(e, params).ok()?;
            let tm = solve_transfer_matrix(e, params).ok()?;
            let dev = [(full.r, full.t), (reduced.r, reduced.t), (tm.r, tm.t)]
                .iter()
                .map(|(r, t)| (a.r - r).norm().max((a.t - t).norm()))
                .fold(0.0, f64::max);
            Some(dev)
        })
        .reduce(f64::max)
}

pub fn case_report(config: &RunConfig, case: &Case) -> Result<CaseReport, CliError> {
    let params = case.params()?;
    let probe_energy = params.omega0() + config.probe;
    let n_range: Vec<usize> = (config.attenuation_n.0..=config.attenuation_n.1).collect();
    let band = band_report(&params, probe_energy, &n_range);
    let gamma = params.gamma();
    let edges = find_band_edges(&params).ok();
    let central_band_edges = edges.filter(|e| e.central_band).map(|e| (e.lower, e.upper));
    let gap_edge_relative_error = band.gap_edges.filter(|_| gamma > 0.0).map(|(lo, hi)| {
        let (nlo, nhi) = band.nominal_gap;
        (lo - nlo).abs().max((hi - nhi).abs()) / (2.0 * gamma)
    });
    let dicke_ratio = band.dicke_halfwidth.filter(|_| band.dicke_nominal > 0.0).map(|w| w / band.dicke_nominal);
    let slope_over_minus_two_kappa = band.attenuation_slope.zip(band.kappa_reference).map(|(s, k)| s / (-2.0 * k));
    Ok(CaseReport {
        n_cells: params.n_cells(),
        delta_omega: params.delta_omega(),
        v: params.v(),
        g: params.g(),
        gamma,
        omega0: params.omega0(),
        probe: config.probe,
        gap_status: if band.gap_edges.is_some() { "ok" } else { "no_gap" },
        central_band_edges,
        gap_edge_relative_error,
        dicke_ratio,
        slope_over_minus_two_kappa,
        oracle_max_deviation: oracle_deviation(&params, &config.grid_points()),
        band,
    })
}

fn cmd_report(cli: &Cli) -> Result<(), CliError> {
    if cli.format == Some(OutputFormat::Csv) {
        return Err(CliError::Config("format: report is only available as json".into()));
    }
    let config = load_config(cli)?;
    let reports = config
        .cases()
        .iter()
        .map(|case| case_report(&config, case))
        .collect::<Result<Vec<_>, _>>()?;
    let doc = serde_json::json!({ "v_over_gamma": config.v_over_gamma, "cases": reports });
    // `output` in the config names the spectrum files, so only --output applies here.
    match cli.output.clone() {
        Some(path) => {
            output::write_json(&path, &doc)?;
            for r in &reports {
                println!(
                    "N={} delta_omega={}: gap {}, gap edges {:?}",
                    r.n_cells, r.delta_omega, r.gap_status, r.band.gap_edges
                );
            }
            Ok(())
        }
        None => {
            let text = serde_json::to_string_pretty(&doc).map_err(|e| CliError::Io(e.to_string()))?;
            write_stdout(format!("{text}\n").as_bytes())
        }
    }
}

fn cmd_selftest(cli: &Cli) -> Result<(), CliError> {
    if cli.draws == 0 {
        return Err(CliError::Config("draws: must be at least 1".into()));
    }
    let fault = if cli.inject_fault { INJECTED_FAULT } else { 0.0 };
    let summary = selftest::run(cli.seed, cli.draws, fault)?;
    let text = serde_json::to_string_pretty(&summary).map_err(|e| CliError::Io(e.to_string()))?;
    match &cli.output {
        Some(path) => output::write_text(path, &format!("{text}\n"))?,
        None => write_stdout(format!("{text}\n").as_bytes())?,
    }
    match summary.first_failure {
        None => {
            eprintln!(
                "selftest: {} draws passed (seed {}, {} singular draws skipped)",
                summary.checked, summary.seed, summary.skipped
            );
            Ok(())
        }
        Some(check) => Err(CliError::SelftestFailed(format!(
            "draw {} (N={}, g={:e}, delta_omega/gamma={:e}, omega0={:e}, E={:e}): oracle {:e}, unitarity {:e}, closed form {:e}",
            check.draw.index,
            check.draw.n_cells,
            check.draw.g,
            check.draw.delta_omega_over_gamma,
            check.draw.omega0,
            check.draw.energy,
            check.oracle_deviation,
            check.unitarity_deviation,
            check.closed_form_deviation
        ))),
    }
}
