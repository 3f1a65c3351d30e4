mod common;

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use biphoton::measures::{compute_measures, Measures};
use biphoton::mle::{mle_fit, MleOptions};
use biphoton::tomography::TomographyInput;
use biphoton_cli::io;
use common::data;
use serde_json::Value;

fn biphoton(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_biphoton"))
        .args(args)
        .output()
        .unwrap()
}

fn json_ok(args: &[&str]) -> Value {
    let out = biphoton(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli");
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn tomo_on_the_table() {
    let v = json_ok(&["tomo", s(&data("tomography.csv"))]);
    let re = &v["mle"]["rho"]["re"];
    let im = &v["mle"]["rho"]["im"];
    assert!((re[0][0].as_f64().unwrap() - 0.487).abs() < 0.01);
    assert!((re[0][3].as_f64().unwrap() - 0.285).abs() < 0.01);
    assert!((im[0][3].as_f64().unwrap() - 0.134).abs() < 0.01);
    assert_eq!(v["mle"]["converged"], true);
    assert_eq!(v["mle"]["physicality"]["psd"], true);
    assert_eq!(v["linear"]["physicality"]["psd"], false);
    assert!(v["n_norm"].as_f64().unwrap() > 0.0);
}

#[test]
fn malformed_row_exits_with_parse_code() {
    let path = scratch("bad.csv");
    let text = std::fs::read_to_string(data("tomography.csv")).unwrap();
    let broken: Vec<String> = text
        .lines()
        .enumerate()
        .map(|(i, l)| {
            if i == 4 {
                l.replacen(",0.3,", ",x,", 1)
            } else {
                l.to_string()
            }
        })
        .collect();
    std::fs::write(&path, broken.join("\n")).unwrap();
    let out = biphoton(&["tomo", s(&path)]);
    assert_eq!(out.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "parse");
    let msg = err["message"].as_str().unwrap();
    assert!(msg.contains("row 5") && msg.contains("t_s"), "{msg}");
}

#[test]
fn iteration_cap_exits_with_convergence_code() {
    let out = biphoton(&["tomo", s(&data("tomography.csv")), "--max-iter", "5"]);
    assert_eq!(out.status.code(), Some(4));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "no_convergence");
}

#[test]
fn impossible_phase_exits_with_domain_code() {
    let path = scratch("pump.csv");
    std::fs::write(
        &path,
        "theta_a,theta_b,n_a,n_b,n_c,dn_c,t_s,tau_s\n\
         0,0,0,0,40,0,1,0\n90,90,0,0,40,0,1,0\n45,45,0,0,60,0,1,0\n0,90,0,0,0.2,0,1,0\n90,0,0,0,0.2,0,1,0\n",
    )
    .unwrap();
    let out = biphoton(&["calibrate", "--pump", s(&path)]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cos phi_m"));
}

#[test]
fn calibrate_the_visibility_table() {
    let v = json_ok(&["calibrate", "--pump", s(&data("visibility.csv"))]);
    let p = &v["pump"];
    assert!((p["d_background"].as_f64().unwrap() - 0.275).abs() < 1e-9);
    assert!((p["n0"].as_f64().unwrap() - 73.73).abs() < 1e-9);
    assert!((p["theta_p"].as_f64().unwrap() - 45.25).abs() < 0.005);
    assert!((p["phi_m"].as_f64().unwrap() - 37.63).abs() < 0.005);
}

#[test]
fn missing_combination_is_named() {
    let path = scratch("short_bell.csv");
    let text = std::fs::read_to_string(data("bell_table.csv")).unwrap();
    let kept: Vec<&str> = text
        .lines()
        .filter(|l| !l.starts_with("45,22.5,"))
        .collect();
    std::fs::write(&path, kept.join("\n")).unwrap();
    let out = biphoton(&["bell", s(&path)]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("(45, 22.5)"));
}

#[test]
fn bell_table_and_subtraction() {
    let net = json_ok(&["bell", s(&data("bell_table.csv"))]);
    let raw = json_ok(&[
        "bell",
        s(&data("bell_table.csv")),
        "--no-subtract-accidentals",
    ]);
    let (sn, sr) = (
        net["s_value"].as_f64().unwrap(),
        raw["s_value"].as_f64().unwrap(),
    );
    assert!(sr > 2.0 && sn > 2.0);
    assert!(sn >= sr);
    assert_eq!(net["accidentals"].as_array().unwrap().len(), 16);
    assert_eq!(net["e_values"].as_array().unwrap().len(), 4);
}

#[test]
fn swapped_layout_changes_s() {
    let canonical = json_ok(&["bell", s(&data("bell_table.csv"))]);
    let other = json_ok(&[
        "bell",
        s(&data("bell_table.csv")),
        "--layout",
        "45,90,-22.5,22.5",
    ]);
    assert!(canonical["s_value"] != other["s_value"]);
    let bad = biphoton(&["bell", s(&data("bell_table.csv")), "--layout", "1,2,3"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn visibility_flag() {
    let v = json_ok(&["bell", "--visibility", s(&data("visibility.csv"))]);
    let vis = v["visibilities"].as_array().unwrap();
    assert_eq!(vis[0]["basis"], "HV");
    assert_eq!(vis[1]["basis"], "DA");
    assert!((vis[0]["visibility"].as_f64().unwrap() - 0.985).abs() < 0.001);
    assert!((vis[1]["visibility"].as_f64().unwrap() - 0.8771).abs() < 0.001);
}

#[test]
fn simulated_hidden_variable_scan_gives_two() {
    let path = scratch("hvt.csv");
    let out = biphoton(&[
        "simulate",
        "--table",
        "bell",
        "--model",
        "hvt",
        "-o",
        s(&path),
    ]);
    assert!(out.status.success());
    let v = json_ok(&["bell", s(&path), "--no-subtract-accidentals"]);
    assert!((v["s_value"].as_f64().unwrap() - 2.0).abs() < 1e-9);
}

#[test]
fn simulation_is_deterministic_per_seed() {
    let args = |seed: &str, out: &Path| {
        let o = biphoton(&[
            "simulate",
            "--theta-p",
            "45.25",
            "--phi",
            "37.62",
            "--n-flux",
            "74",
            "--t-s",
            "0.3",
            "--tau-s",
            "7.1e-9",
            "--singles-a",
            "3000",
            "--singles-b",
            "3800",
            "--noise",
            "poisson",
            "--seed",
            seed,
            "-o",
            s(out),
        ]);
        assert!(o.status.success());
        std::fs::read(out).unwrap()
    };
    let a = args("5", &scratch("sim_a.csv"));
    let b = args("5", &scratch("sim_b.csv"));
    let c = args("6", &scratch("sim_c.csv"));
    assert_eq!(a, b);
    assert_ne!(a, c);
    let records = io::read_tomography(&scratch("sim_a.csv")).unwrap();
    assert_eq!(records.len(), 16);
}

#[test]
fn simulated_bell_state_round_trips_through_tomo() {
    let path = scratch("bell_tomo.csv");
    let out = biphoton(&[
        "simulate",
        "--state",
        "phi-plus",
        "--n-flux",
        "1e6",
        "-o",
        s(&path),
    ]);
    assert!(out.status.success());
    let v = json_ok(&["tomo", s(&path)]);
    let re = &v["mle"]["rho"]["re"];
    for (i, j, want) in [
        (0, 0, 0.5),
        (0, 3, 0.5),
        (3, 3, 0.5),
        (1, 1, 0.0),
        (0, 1, 0.0),
    ] {
        assert!(
            (re[i][j].as_f64().unwrap() - want).abs() < 1e-4,
            "({i},{j})"
        );
    }
    assert!((v["n_norm"].as_f64().unwrap() - 1e6).abs() < 1e-3);
}

#[test]
fn serialized_rho_gives_identical_measures() {
    let input =
        TomographyInput::new(io::read_tomography(&data("tomography.csv")).unwrap(), true).unwrap();
    let fit = mle_fit(&input, &MleOptions::default()).unwrap();
    let direct = compute_measures(&fit.rho).unwrap();
    let path = scratch("rho.txt");
    std::fs::write(&path, io::format_matrix(fit.rho.matrix())).unwrap();
    let v = json_ok(&["measures", "--rho", s(&path)]);
    for (name, x) in Measures::NAMES.iter().zip(direct.to_array()) {
        assert!((v[*name].as_f64().unwrap() - x).abs() < 1e-12, "{name}");
        assert!(v.get(format!("{name}_std")).is_none());
    }

    let out = scratch("tomo_rho.txt");
    json_ok(&["tomo", s(&data("tomography.csv")), "--rho-out", s(&out)]);
    let again = json_ok(&["measures", "--rho", s(&out)]);
    assert_eq!(again, v);
}

#[test]
fn measures_with_and_without_uncertainty() {
    let plain = json_ok(&[
        "measures",
        "--input",
        s(&data("tomography.csv")),
        "--mc-trials",
        "0",
    ]);
    assert!(plain.get("concurrence").is_some());
    assert!(plain.get("concurrence_std").is_none());
    let mc = json_ok(&[
        "measures",
        "--input",
        s(&data("tomography.csv")),
        "--mc-trials",
        "6",
        "--seed",
        "3",
    ]);
    assert!(mc["concurrence_std"].as_f64().unwrap() > 0.0);
    assert_eq!(
        mc["trials_used"].as_u64().unwrap() + mc["trials_dropped"].as_u64().unwrap(),
        6
    );
    let again = json_ok(&[
        "measures",
        "--input",
        s(&data("tomography.csv")),
        "--mc-trials",
        "6",
        "--seed",
        "3",
    ]);
    assert_eq!(mc, again);
    let one = biphoton(&[
        "measures",
        "--input",
        s(&data("tomography.csv")),
        "--mc-trials",
        "1",
    ]);
    assert_eq!(one.status.code(), Some(3));
}

#[test]
fn bell_state_measures_pattern() {
    let path = scratch("bell_rho.txt");
    std::fs::write(
        &path,
        "0.5 0 0 0.5\n0 0 0 0\n0 0 0 0\n0.5 0 0 0.5\n\n0 0 0 0\n0 0 0 0\n0 0 0 0\n0 0 0 0\n",
    )
    .unwrap();
    let v = json_ok(&["measures", "--rho", s(&path)]);
    assert!(v["von_neumann"].as_f64().unwrap().abs() < 1e-12);
    assert!(v["linear_entropy"].as_f64().unwrap().abs() < 1e-12);
    for name in ["concurrence", "tangle", "eof", "log_negativity"] {
        assert!((v[name].as_f64().unwrap() - 1.0).abs() < 1e-12, "{name}");
    }
    assert!((v["renyi2_a"].as_f64().unwrap() - std::f64::consts::LN_2).abs() < 1e-12);
}

#[test]
fn simulated_power_scan_is_fitted() {
    let path = scratch("power.csv");
    let out = biphoton(&[
        "simulate",
        "--table",
        "power",
        "--slope",
        "1.8",
        "--intercept",
        "0.3",
        "--t-s",
        "20",
        "--noise",
        "poisson",
        "--seed",
        "2",
        "-o",
        s(&path),
    ]);
    assert!(out.status.success());
    let v = json_ok(&["calibrate", "--power", s(&path)]);
    let fit = &v["power"];
    let slope = fit["slope_alpha"].as_f64().unwrap();
    let stderr = fit["slope_stderr"].as_f64().unwrap();
    assert!((slope - 1.8).abs() < 3.0 * stderr, "{slope} ± {stderr}");
    assert!(v.get("pump").is_none());
}

#[test]
fn usage_errors() {
    assert_eq!(biphoton(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(biphoton(&["measures"]).status.code(), Some(2));
    assert_eq!(
        biphoton(&["tomo", "/nonexistent.csv"]).status.code(),
        Some(2)
    );
    assert_eq!(
        biphoton(&["simulate", "--table", "tomo", "--model", "hvt"])
            .status
            .code(),
        Some(2)
    );
}
