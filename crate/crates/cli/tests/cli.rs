use std::f64::consts::FRAC_PI_3;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const PI_3: &str = "1.0471975511965976";

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_lenscoupled"));
    cmd.env_remove("LENSCOUPLED_QUAD_TOL");
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn lenscoupled")
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(str::to_string).collect();
    let rows = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

fn write_config(dir: &TempDir, name: &str, body: &str) -> String {
    let path = dir.path().join(name);
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn psf_at_focus_reports_closed_form_integral() {
    let json: Value = serde_json::from_str(&ok(&["psf", "--theta-max", PI_3])).unwrap();
    let i1 = json["I1"]["re"].as_f64().unwrap();
    assert!((i1 - 0.791_666_7).abs() < 1e-6, "I1 = {i1}");
    assert_eq!(json["I3"]["re"].as_f64(), Some(0.0));
    let g = &json["g_bar"];
    for row in 0..3 {
        for col in 0..3 {
            assert!(g[row][col]["re"].is_f64() && g[row][col]["im"].is_f64());
        }
    }
    // At the focus the tensor is i·diag(I1, I1, 2 I4).
    assert!((g[0][0]["im"].as_f64().unwrap() - i1).abs() < 1e-15);
}

#[test]
fn malformed_flag_is_usage_error() {
    assert_eq!(code(&run(&["psf", "--theta-max", "abc"])), 2);
    assert_eq!(code(&run(&["psf", "--ri", "1,2"])), 2);
    assert_eq!(code(&run(&["no-such-command"])), 2);
    assert_eq!(code(&run(&["gamma-sweep", "--theta-min", "2", "--theta-max", "1"])), 2);
    assert_eq!(code(&run(&["psf", "--theta-max", "2.0"])), 2);
}

#[test]
fn unwritable_output_is_io_error() {
    let dir = TempDir::new().unwrap();
    // A directory cannot be overwritten as a file.
    let target = dir.path().to_str().unwrap();
    let out = run(&["psf", "--out", target]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("I/O error"));
    let missing = dir.path().join("absent/out.json");
    assert_eq!(code(&run(&["psf", "--out", missing.to_str().unwrap()])), 1);
}

#[test]
fn gamma_sweep_matches_closed_forms() {
    let one = |axis: &str| {
        let (header, rows) = csv_rows(&ok(&[
            "gamma-sweep", "--orientation", axis, "--theta-min", PI_3, "--theta-max", PI_3,
            "--steps", "1",
        ]));
        assert_eq!(header, ["theta_max", "gamma12_over_gamma"]);
        assert_eq!(rows.len(), 1);
        assert!((rows[0][0] - FRAC_PI_3).abs() < 1e-10);
        rows[0][1]
    };
    assert!((one("x") - 0.59375).abs() < 1e-5);
    assert!((one("z") - 0.3125).abs() < 1e-5);
}

#[test]
fn gamma_sweep_rows_ascend() {
    let (_, rows) = csv_rows(&ok(&["gamma-sweep", "--steps", "25"]));
    assert_eq!(rows.len(), 25);
    assert!(rows.windows(2).all(|w| w[1][0] > w[0][0]));
    assert!(rows.windows(2).all(|w| w[1][1] >= w[0][1]));
}

#[test]
fn coupling_map_shape_and_origin() {
    let text = ok(&["coupling-map", "--resolution", "11", "--extent", "1.5"]);
    let (header, rows) = csv_rows(&text);
    assert_eq!(header, ["x", "z", "J_over_hGamma", "Gamma12_over_Gamma"]);
    assert_eq!(rows.len(), 121);

    let origin = rows.iter().find(|r| r[0] == 0.0 && r[1] == 0.0).unwrap();
    let psf: Value = serde_json::from_str(&ok(&["psf"])).unwrap();
    let gxx_re = psf["g_bar"][0][0]["re"].as_f64().unwrap();
    let gxx_im = psf["g_bar"][0][0]["im"].as_f64().unwrap();
    assert!((origin[2] - 0.375 * gxx_re).abs() < 1e-9);
    assert!((origin[3] - 0.75 * gxx_im).abs() < 1e-9);

    let (header, rows) = csv_rows(&ok(&["coupling-map", "--plane", "xy", "--resolution", "4"]));
    assert_eq!(header, ["x", "y", "J_over_hGamma", "Gamma12_over_Gamma"]);
    assert_eq!(rows.len(), 16);
    assert_eq!(code(&run(&["coupling-map", "--resolution", "1"])), 2);
}

#[test]
fn coupling_map_on_axis_landmark() {
    let (_, rows) = csv_rows(&ok(&[
        "coupling-map", "--extent", "1.2", "--resolution", "121",
    ]));
    let axis: Vec<&Vec<f64>> = rows.iter().filter(|r| r[0] == 0.0 && r[1] > 0.5).collect();
    let peak = axis
        .windows(3)
        .filter(|w| w[1][2] > w[0][2] && w[1][2] > w[2][2])
        .map(|w| w[1][1])
        .min_by(|a, b| (a - 0.92).abs().total_cmp(&(b - 0.92).abs()))
        .expect("on-axis coupling maximum");
    assert!((peak - 0.92).abs() <= 0.05, "peak at {peak}");
}

#[test]
fn outputs_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        ok(&["coupling-map", "--resolution", "15", "--out", p.to_str().unwrap()]);
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn spectrum_columns() {
    let (header, rows) = csv_rows(&ok(&["spectrum", "--delta-steps", "61"]));
    assert_eq!(
        header,
        ["delta_over_Gamma", "n1_over_s2", "n1_over_s2_nocoupling", "xi_over_s2"]
    );
    assert_eq!(rows.len(), 61);
    assert!(rows.iter().all(|r| (r[2] - 1.0).abs() < 1e-12));
    let center = rows.iter().find(|r| r[0] == 0.0).unwrap();
    assert!(center[1] < 1.0);
    // delta grid is symmetric; the coupled curve is not.
    let (first, last) = (&rows[5], &rows[55]);
    assert!((first[0] + last[0]).abs() < 1e-12);
    assert!((first[1] - last[1]).abs() > 1e-3);
}

#[test]
fn spectrum_from_position_and_conflicts() {
    let (_, rows) = csv_rows(&ok(&["spectrum", "--z", "0.93", "--delta-steps", "3"]));
    assert_eq!(rows.len(), 3);
    assert_eq!(code(&run(&["spectrum", "--z", "0.9", "--j12", "0.3"])), 2);
    assert_eq!(code(&run(&["spectrum", "--saturation", "0.5"])), 2);
}

fn trap_summary(dir: &TempDir, name: &str, extra: &[&str]) -> (String, Value) {
    let out = dir.path().join(name);
    let mut args = vec!["trap", "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    ok(&args);
    let csv = std::fs::read_to_string(&out).unwrap();
    let summary = std::fs::read_to_string(out.with_extension("summary.json")).unwrap();
    (csv, serde_json::from_str(&summary).unwrap())
}

#[test]
fn trap_outputs() {
    let dir = TempDir::new().unwrap();
    let (csv, summary) = trap_summary(&dir, "n1.csv", &[]);
    let (header, rows) = csv_rows(&csv);
    assert_eq!(header, ["z_over_lambda", "U_dd_J", "U_g_J", "U_total_J", "heating_W"]);
    assert_eq!(rows.len(), 1301);
    for r in &rows {
        // Fields carry eleven significant digits.
        let scale = r[1].abs().max(r[2].abs()).max(r[3].abs());
        assert!((r[1] + r[2] - r[3]).abs() <= 1e-9 * scale);
        assert!(r[4] >= 0.0);
    }
    for key in ["z_min", "depth_over_Er", "Gamma_tot_over_Gamma", "t_trap_s", "t_trap_over_Gamma_inv"] {
        assert!(summary[key].is_f64(), "missing {key}");
    }
    let t = summary["t_trap_s"].as_f64().unwrap();
    assert!(t <= summary["t_trap_bound_s"].as_f64().unwrap());
    let z_min = summary["z_min"].as_f64().unwrap();
    assert!((z_min / 852e-9 - summary["z_min_over_lambda"].as_f64().unwrap()).abs() < 1e-12);
}

#[test]
fn trap_depth_scales_with_driven_atoms() {
    let dir = TempDir::new().unwrap();
    let (_, one) = trap_summary(&dir, "n1.csv", &[]);
    let (_, hundred) = trap_summary(&dir, "n100.csv", &["--n-driven", "100"]);
    let ratio = hundred["depth_over_Er"].as_f64().unwrap() / one["depth_over_Er"].as_f64().unwrap();
    assert!((ratio / 100.0 - 1.0).abs() < 0.01, "ratio {ratio}");
}

#[test]
fn trap_lambda_units_match_metres() {
    let dir = TempDir::new().unwrap();
    let (a, _) = trap_summary(
        &dir,
        "m.csv",
        &["--z-min", "4.26e-7", "--z-max", "1.278e-6", "--z-steps", "101"],
    );
    let (b, _) = trap_summary(
        &dir,
        "l.csv",
        &["--lambda-units", "--z-min", "0.5", "--z-max", "1.5", "--z-steps", "101"],
    );
    let (ra, rb) = (csv_rows(&a).1, csv_rows(&b).1);
    for (x, y) in ra.iter().zip(&rb) {
        assert!((x[0] - y[0]).abs() < 1e-9);
    }
}

#[test]
fn config_values_and_flag_precedence() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "run.json",
        r#"{"schema": 1, "gamma_sweep": {"orientation": "z", "steps": 3, "theta_min": 0.5, "theta_max": 1.0}}"#,
    );
    let (_, rows) = csv_rows(&ok(&["gamma-sweep", "--config", &cfg]));
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0][0], 0.5);
    let (_, rows) = csv_rows(&ok(&["gamma-sweep", "--config", &cfg, "--steps", "5"]));
    assert_eq!(rows.len(), 5);
}

#[test]
fn config_rejections() {
    let dir = TempDir::new().unwrap();
    let unknown = write_config(&dir, "u.json", r#"{"schema": 1, "psf": {"radius": 1}}"#);
    assert_eq!(code(&run(&["psf", "--config", &unknown])), 2);
    let future = write_config(&dir, "f.json", r#"{"schema": 2}"#);
    assert_eq!(code(&run(&["psf", "--config", &future])), 2);
    let missing = dir.path().join("missing.json");
    assert_eq!(code(&run(&["psf", "--config", missing.to_str().unwrap()])), 1);
}

#[test]
fn config_species_preset() {
    let dir = TempDir::new().unwrap();
    // Cesium constants under another label.
    let cfg = write_config(
        &dir,
        "species.json",
        r#"{"schema": 1, "species": [{"label": "cs-copy", "dipole_moment": 2.69e-29,
            "lambda0": 852e-9, "gamma": 32861059.0, "mass": 2.2085e-25}]}"#,
    );
    let out = dir.path().join("t.csv");
    let run_trap = |species: &str| {
        bin()
            .args(["trap", "--config", &cfg, "--species", species, "--z-steps", "201"])
            .args(["--out", out.to_str().unwrap()])
            .output()
            .unwrap()
    };
    assert!(run_trap("cs-copy").status.success());
    let summary: Value =
        serde_json::from_str(&std::fs::read_to_string(out.with_extension("summary.json")).unwrap())
            .unwrap();
    assert_eq!(summary["species"], "cs-copy");
    assert_eq!(code(&run_trap("Rb87")), 2);
}

#[test]
fn quadrature_tolerance_from_environment() {
    let loose = bin()
        .args(["psf", "--ri", "0.2,0.1,0.3"])
        .env("LENSCOUPLED_QUAD_TOL", "1e-6")
        .output()
        .unwrap();
    assert!(loose.status.success());
    let tight: Value = serde_json::from_str(&ok(&["psf", "--ri", "0.2,0.1,0.3"])).unwrap();
    let loose: Value = serde_json::from_slice(&loose.stdout).unwrap();
    let (a, b) = (
        tight["I1"]["re"].as_f64().unwrap(),
        loose["I1"]["re"].as_f64().unwrap(),
    );
    assert!((a - b).abs() < 1e-5);

    let bad = bin()
        .args(["psf"])
        .env("LENSCOUPLED_QUAD_TOL", "tight")
        .output()
        .unwrap();
    assert_eq!(code(&bad), 2);
}

#[test]
fn help_exits_cleanly() {
    let out = run(&["--help"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8_lossy(&out.stdout);
    for sub in ["psf", "gamma-sweep", "coupling-map", "spectrum", "trap"] {
        assert!(text.contains(sub));
    }
    assert!(Path::new(env!("CARGO_BIN_EXE_lenscoupled")).exists());
}
