//! CSV/JSON writers and the gnuplot script emitter.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::CliError;
use crate::model::Regime;
use crate::spectrum::Spectrum;

pub const CSV_HEADER: [&str; 4] = ["omega_minus_omega0_over_gamma", "T", "R", "regime"];

/// One CSV row as written to disk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectrumRow {
    pub omega_minus_omega0_over_gamma: f64,
    #[serde(rename = "T")]
    pub big_t: f64,
    #[serde(rename = "R")]
    pub big_r: f64,
    pub regime: Regime,
}

impl SpectrumRow {
    /// Bitwise equality, so NaN rows outside the lead band compare equal.
    pub fn same_bits(&self, other: &Self) -> bool {
        self.omega_minus_omega0_over_gamma.to_bits() == other.omega_minus_omega0_over_gamma.to_bits()
            && self.big_t.to_bits() == other.big_t.to_bits()
            && self.big_r.to_bits() == other.big_r.to_bits()
            && self.regime == other.regime
    }
}

/// Rows of a spectrum whose detunings are already in the reporting unit.
pub fn rows(spectrum: &Spectrum) -> Vec<SpectrumRow> {
    spectrum
        .points
        .iter()
        .map(|p| SpectrumRow {
            omega_minus_omega0_over_gamma: p.detuning,
            big_t: p.big_t,
            big_r: p.big_r,
            regime: p.regime,
        })
        .collect()
}

/// 17 significant digits, enough to round-trip any f64.
pub fn format_f64(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else {
        format!("{x:.16e}")
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)
            .map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |e| CliError::Io(format!("write to {} failed: {e}", path.display()))
}

pub fn write_csv(path: &Path, rows: &[SpectrumRow]) -> Result<(), CliError> {
    let file = create(path)?;
    write_csv_to(file, rows).map_err(|e| CliError::Io(format!("write to {} failed: {e}", path.display())))
}

/// Header plus one LF-terminated record per row.
pub fn write_csv_to<W: Write>(sink: W, rows: &[SpectrumRow]) -> Result<(), csv::Error> {
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(sink);
    writer.write_record(CSV_HEADER)?;
    for row in rows {
        writer.write_record([
            format_f64(row.omega_minus_omega0_over_gamma),
            format_f64(row.big_t),
            format_f64(row.big_r),
            row.regime.as_str().to_string(),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

pub fn read_csv(path: &Path) -> Result<Vec<SpectrumRow>, CliError> {
    let bad = |msg: String| CliError::Io(format!("{}: {msg}", path.display()));
    let mut reader = csv::Reader::from_path(path).map_err(|e| bad(e.to_string()))?;
    let header = reader.headers().map_err(|e| bad(e.to_string()))?.clone();
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(bad(format!("unexpected header {header:?}")));
    }
    reader
        .records()
        .map(|record| {
            let record = record.map_err(|e| bad(e.to_string()))?;
            let num = |i: usize| -> Result<f64, CliError> {
                record[i].parse::<f64>().map_err(|e| bad(format!("column {i}: {e}")))
            };
            Ok(SpectrumRow {
                omega_minus_omega0_over_gamma: num(0)?,
                big_t: num(1)?,
                big_r: num(2)?,
                regime: record[3].parse().map_err(bad)?,
            })
        })
        .collect()
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut file = create(path)?;
    serde_json::to_writer_pretty(&mut file, value)
        .map_err(|e| CliError::Io(format!("write to {} failed: {e}", path.display())))?;
    file.write_all(b"\n").map_err(io_err(path))?;
    file.flush().map_err(io_err(path))
}

/// A panel of the plot: the files drawn together and their legend titles.
pub struct Panel {
    pub title: String,
    pub curves: Vec<(PathBuf, String)>,
}

/// Gnuplot script with one panel per entry, stacked vertically or on a 2×2 grid.
///
/// A panel with a single curve draws T (solid blue) and R (dashed red);
/// panels with several curves draw T only, one line per file.
pub fn plot_script(image: &Path, panels: &[Panel]) -> String {
    let (rows, cols) = match panels.len() {
        4 => (2, 2),
        n => (n.max(1), 1),
    };
    let file_name = |p: &Path| {
        p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()
    };
    let mut s = String::new();
    s.push_str("set terminal pngcairo size 1000,800\n");
    s.push_str(&format!("set output '{}'\n", file_name(image)));
    s.push_str("set datafile separator ','\n");
    s.push_str("set key autotitle columnhead\n");
    s.push_str("set xlabel '(Omega - omega_0)/gamma'\n");
    s.push_str("set yrange [0:1.05]\n");
    s.push_str(&format!("set multiplot layout {rows},{cols}\n"));
    let dash_types = [1, 2, 3, 4, 5];
    for panel in panels {
        s.push_str(&format!("set title '{}'\n", panel.title));
        let plots: Vec<String> = if panel.curves.len() == 1 {
            let f = file_name(&panel.curves[0].0);
            vec![
                format!("'{f}' using 1:2 with lines lw 2 lc rgb 'blue' title 'T'"),
                format!("'{f}' using 1:3 with lines lw 2 dt 2 lc rgb 'red' title 'R'"),
            ]
        } else {
            panel
                .curves
                .iter()
                .enumerate()
                .map(|(i, (path, label))| {
                    format!(
                        "'{}' using 1:2 with lines lw 2 dt {} title '{}'",
                        file_name(path),
                        dash_types[i % dash_types.len()],
                        label
                    )
                })
                .collect()
        };
        s.push_str(&format!("plot {}\n", plots.join(", \\\n     ")));
    }
    s.push_str("unset multiplot\n");
    s
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    let mut file = create(path)?;
    file.write_all(text.as_bytes()).map_err(io_err(path))?;
    file.flush().map_err(io_err(path))
}
