//! End-to-end checks of the command-line front end.

use std::path::Path;
use std::process::{Command, Output};

use cavity_transport::cli::output::{read_csv, write_csv};
use cavity_transport::Regime;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cavity-transport"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("run.toml");
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn help_and_bad_arguments() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["spectrum", "--no-such-flag"]).status.code(), Some(2));
    assert_eq!(run(&[]).status.code(), Some(2));
}

#[test]
fn missing_config_is_a_config_error() {
    assert_eq!(run(&["spectrum"]).status.code(), Some(2));
    let out = run(&["spectrum", "--config", "/nonexistent/run.toml"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn empty_grid_is_rejected_by_name() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "v_over_gamma = 10.0\ngrid_min = 2.0\ngrid_max = -2.0\n");
    let out = run(&["spectrum", "--config", &config]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("grid"));
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "v_over_gamma = 10.0\nspacing = 3\n");
    assert_eq!(run(&["spectrum", "--config", &config]).status.code(), Some(2));
}

#[test]
fn grid_outside_lead_band_is_a_domain_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "v_over_gamma = 1.0\ngrid_min = 3.0\ngrid_max = 5.0\ngrid_count = 11\n");
    assert_eq!(run(&["spectrum", "--config", &config]).status.code(), Some(4));
}

#[test]
fn spectrum_csv_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "v_over_gamma = 1.0\ndelta_omega = 0.5\nn_cells = 3\ngrid_min = -2.5\ngrid_max = 2.5\ngrid_count = 101\n",
    );
    let csv = dir.path().join("s.csv");
    let out = run(&["spectrum", "--config", &config, "--output", csv.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("omega_minus_omega0_over_gamma,T,R,regime\n"));
    assert!(!text.contains('\r'));

    let rows = read_csv(&csv).unwrap();
    assert_eq!(rows.len(), 101);
    // |s| > 2v lies outside the lead band.
    assert!(rows.iter().any(|r| r.regime == Regime::LeadBandEdge && r.big_t.is_nan()));
    assert!(rows.iter().any(|r| r.regime == Regime::Propagating));

    let again = dir.path().join("again.csv");
    write_csv(&again, &rows).unwrap();
    assert_eq!(std::fs::read_to_string(&again).unwrap(), text);
    let back = read_csv(&again).unwrap();
    assert!(rows.iter().zip(&back).all(|(a, b)| a.same_bits(b)));
}

#[test]
fn spectrum_to_stdout_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "v_over_gamma = 10.0\ngrid_count = 11\n");
    let out = run(&["spectrum", "--config", &config]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&out.stdout).lines().count(), 12);

    let out = run(&["spectrum", "--config", &config, "--format", "json"]);
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["rows"].as_array().unwrap().len(), 11);
}

#[test]
fn multiple_cases_need_an_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "v_over_gamma = 10.0\nn_cells = [1, 2]\ngrid_count = 11\n");
    assert_eq!(run(&["spectrum", "--config", &config]).status.code(), Some(2));
    let base = dir.path().join("out").join("f.csv");
    let out = run(&["spectrum", "--config", &config, "--output", base.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(dir.path().join("out/f_N1_dw0.csv").exists());
    assert!(dir.path().join("out/f_N2_dw0.csv").exists());
}

#[test]
fn plot_script_is_emitted() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "v_over_gamma = 10.0\nn_cells = [1, 3]\ngrid_count = 11\nemit_plot_script = true\n");
    let base = dir.path().join("fig.csv");
    assert_eq!(run(&["spectrum", "--config", &config, "--output", base.to_str().unwrap()]).status.code(), Some(0));
    let script = std::fs::read_to_string(dir.path().join("fig.gp")).unwrap();
    assert!(script.contains("fig_N3_dw0.csv"));
}

#[test]
fn report_is_json_only() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "v_over_gamma = 10.0\ndelta_omega = [0.0, 0.5]\nn_cells = 3\ngrid_count = 101\n");
    assert_eq!(run(&["report", "--config", &config, "--format", "csv"]).status.code(), Some(2));

    let out = run(&["report", "--config", &config]);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let cases = doc["cases"].as_array().unwrap();
    assert_eq!(cases.len(), 2);
    assert_eq!(cases[0]["gap_status"], "ok");
    assert!(cases[0]["dicke_ratio"].is_null());
    assert!(cases[1]["dicke_ratio"].as_f64().unwrap() > 0.0);
    let slope_ratio = cases[0]["slope_over_minus_two_kappa"].as_f64().unwrap();
    assert!((slope_ratio - 1.0).abs() < 0.01);
    assert!(cases[1]["oracle_max_deviation"].as_f64().unwrap() < 1e-10);
}

#[test]
fn uncoupled_report_has_no_gap() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "v_over_gamma = 10.0\ng = 0.0\ngrid_count = 11\n");
    let out = run(&["report", "--config", &config]);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["cases"][0]["gap_status"], "no_gap");
}

#[test]
fn selftest_is_seeded() {
    let a = run(&["selftest", "--seed", "9", "--draws", "50"]);
    let b = run(&["selftest", "--seed", "9", "--draws", "50"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let c = run(&["selftest", "--seed", "10", "--draws", "50"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn injected_fault_fails_selftest() {
    let out = run(&["selftest", "--draws", "20", "--inject-fault"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("draw 0"));
}
