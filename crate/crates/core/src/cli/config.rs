//! Run configuration: a flat TOML file with energies in units of γ.
//!
//! ```toml
//! v_over_gamma = 10.0        # mandatory
//! delta_omega = [1.0, 0.5]   # scalar or list
//! n_cells = [1, 7]           # scalar or list
//! grid_min = -6.0
//! grid_max = 6.0
//! grid_count = 2001
//! ```
//!
//! The reference unit is γ = g²/2v with the default coupling g = √(2 v/γ).
//! Setting `g` explicitly keeps every other energy in those reference units.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::CliError;
use crate::model::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    fn into_vec(self) -> Vec<T> {
        match self {
            OneOrMany::One(x) => vec![x],
            OneOrMany::Many(xs) => xs,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    v_over_gamma: f64,
    g: Option<f64>,
    #[serde(default)]
    omega_c: f64,
    #[serde(default)]
    omega0: f64,
    delta_omega: Option<OneOrMany<f64>>,
    n_cells: Option<OneOrMany<usize>>,
    grid_min: Option<f64>,
    grid_max: Option<f64>,
    grid_count: Option<usize>,
    probe: Option<f64>,
    attenuation_n_min: Option<usize>,
    attenuation_n_max: Option<usize>,
    format: Option<OutputFormat>,
    output: Option<PathBuf>,
    #[serde(default)]
    emit_plot_script: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub v_over_gamma: f64,
    pub g: f64,
    pub omega_c: f64,
    pub omega0: f64,
    pub delta_omegas: Vec<f64>,
    pub n_cells: Vec<usize>,
    pub grid: GridSpec,
    pub probe: f64,
    pub attenuation_n: (usize, usize),
    pub format: OutputFormat,
    pub output: Option<PathBuf>,
    pub emit_plot_script: bool,
}

fn invalid(field: &str, reason: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{field}: {reason}"))
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;

        if !(raw.v_over_gamma > 0.0 && raw.v_over_gamma.is_finite()) {
            return Err(invalid("v_over_gamma", format!("must be positive, got {}", raw.v_over_gamma)));
        }
        let g = raw.g.unwrap_or_else(|| (2.0 * raw.v_over_gamma).sqrt());
        if !(g >= 0.0 && g.is_finite()) {
            return Err(invalid("g", format!("must be non-negative, got {g}")));
        }
        for (field, value) in [("omega_c", raw.omega_c), ("omega0", raw.omega0)] {
            if !value.is_finite() {
                return Err(invalid(field, "must be finite"));
            }
        }

        let delta_omegas = raw.delta_omega.map_or(vec![0.0], OneOrMany::into_vec);
        if delta_omegas.is_empty() || delta_omegas.iter().any(|d| !(*d >= 0.0 && d.is_finite())) {
            return Err(invalid("delta_omega", "needs one or more non-negative values"));
        }
        let n_cells = raw.n_cells.map_or(vec![1], OneOrMany::into_vec);
        if n_cells.is_empty() || n_cells.contains(&0) {
            return Err(invalid("n_cells", "needs one or more values ≥ 1"));
        }

        let grid = GridSpec {
            min: raw.grid_min.unwrap_or(-6.0),
            max: raw.grid_max.unwrap_or(6.0),
            count: raw.grid_count.unwrap_or(2001),
        };
        if grid.count < 2 {
            return Err(invalid("grid", format!("grid_count must be at least 2, got {}", grid.count)));
        }
        if !(grid.min < grid.max) || !grid.min.is_finite() || !grid.max.is_finite() {
            return Err(invalid(
                "grid",
                format!("grid_min ({}) must be below grid_max ({})", grid.min, grid.max),
            ));
        }

        let probe = raw.probe.unwrap_or(1.0);
        if !probe.is_finite() {
            return Err(invalid("probe", "must be finite"));
        }
        let attenuation_n = (raw.attenuation_n_min.unwrap_or(5), raw.attenuation_n_max.unwrap_or(20));
        if attenuation_n.0 == 0 || attenuation_n.0 >= attenuation_n.1 {
            return Err(invalid(
                "attenuation_n_min",
                format!("need 1 ≤ min < max, got {}..{}", attenuation_n.0, attenuation_n.1),
            ));
        }

        let config = Self {
            v_over_gamma: raw.v_over_gamma,
            g,
            omega_c: raw.omega_c,
            omega0: raw.omega0,
            delta_omegas,
            n_cells,
            grid,
            probe,
            attenuation_n,
            format: raw.format.unwrap_or(OutputFormat::Csv),
            output: raw.output,
            emit_plot_script: raw.emit_plot_script,
        };
        // Surface model-level violations as config errors too.
        for case in config.cases() {
            case.params()?;
        }
        Ok(config)
    }

    /// Every (Δω, N) combination, Δω-major.
    pub fn cases(&self) -> Vec<Case> {
        let multiple = self.delta_omegas.len() * self.n_cells.len() > 1;
        self.delta_omegas
            .iter()
            .flat_map(|&delta_omega| {
                self.n_cells.iter().map(move |&n_cells| (delta_omega, n_cells))
            })
            .map(|(delta_omega, n_cells)| Case { config: self.clone(), delta_omega, n_cells, multiple })
            .collect()
    }

    pub fn grid_points(&self) -> Vec<f64> {
        crate::spectrum::uniform_grid(self.grid.min, self.grid.max, self.grid.count)
    }
}

/// One (Δω, N) combination of a [`RunConfig`].
#[derive(Debug, Clone)]
pub struct Case {
    config: RunConfig,
    pub delta_omega: f64,
    pub n_cells: usize,
    multiple: bool,
}

impl Case {
    pub fn params(&self) -> Result<ModelParams, CliError> {
        let c = &self.config;
        ModelParams::new(c.omega_c, c.v_over_gamma, c.g, c.omega0, self.delta_omega, self.n_cells)
            .map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn label(&self) -> String {
        format!("N={} delta_omega={}", self.n_cells, self.delta_omega)
    }

    /// `base` itself for a single case, otherwise `<stem>_N<n>_dw<Δω>.<ext>`.
    pub fn output_path(&self, base: &Path) -> PathBuf {
        if !self.multiple {
            return base.to_path_buf();
        }
        let stem = base.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
        let mut name = format!("{stem}_N{}_dw{}", self.n_cells, self.delta_omega);
        if let Some(ext) = base.extension().and_then(|e| e.to_str()) {
            name.push('.');
            name.push_str(ext);
        }
        base.with_file_name(name)
    }
}
