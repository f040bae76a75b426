//! End-to-end behavior of the `proca-lab` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn scenario(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("proca-lab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn lab(args: &[&str], scenario_file: &Path, out: &Path, env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_proca-lab"));
    cmd.args(&args[..1]).arg("--scenario").arg(scenario_file).arg("--out").arg(out).args(&args[1..]);
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn report(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(str::to_owned).collect();
    (header, lines.map(|l| l.split(',').map(str::to_owned).collect()).collect())
}

#[test]
fn bundled_small_scenario_passes_quickly() {
    let out = tmp("small.json");
    let start = std::time::Instant::now();
    let o = lab(&["run"], &scenario("flat_1p1_small.json"), &out, &[]);
    assert!(start.elapsed().as_secs() < 30);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&out);
    assert_eq!(r["schema_version"], 1);
    assert_eq!(r["all_pass"], true);
    let checks = r["checks"].as_array().unwrap();
    assert!(checks.len() > 40);
    for c in checks {
        for key in ["check_id", "paper_anchor", "residual", "threshold", "pass"] {
            assert!(c.get(key).is_some(), "missing {key} in {c}");
        }
    }
    for suite in ["complex", "spectral", "cauchy", "green", "moller", "states"] {
        assert!(checks.iter().any(|c| c["suite"] == suite), "{suite}");
    }
    assert_eq!(r["sign_audit"]["negative_check"], "green.sigma-bridge-opposite");
}

#[test]
fn inadmissible_datum_fails_energy_equality() {
    let out = tmp("inadmissible.json");
    let o = lab(&["run"], &scenario("inadmissible_energy.json"), &out, &[]);
    assert_eq!(o.status.code(), Some(1));
    let r = report(&out);
    assert_eq!(r["all_pass"], false);
    let failed: Vec<_> =
        r["checks"].as_array().unwrap().iter().filter(|c| c["pass"] == false).map(|c| c["check_id"].clone()).collect();
    assert_eq!(failed, vec![serde_json::json!("cauchy.datum-energy-equality")]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("datum-energy-equality"));
}

#[test]
fn malformed_scenarios_exit_two() {
    let bad = tmp("bad.json");
    std::fs::write(&bad, "{\"name\": \"x\", ").unwrap();
    assert_eq!(lab(&["run"], &bad, &tmp("bad-out.json"), &[]).status.code(), Some(2));
    std::fs::write(&bad, r#"{"name": "x", "mass_sq": 1.0, "suites": ["nonsense"]}"#).unwrap();
    assert_eq!(lab(&["run"], &bad, &tmp("bad-out.json"), &[]).status.code(), Some(2));
    // A suite without its inputs is rejected before anything runs.
    std::fs::write(&bad, r#"{"name": "x", "mass_sq": 1.0, "suites": ["green"]}"#).unwrap();
    assert_eq!(lab(&["run"], &bad, &tmp("bad-out.json"), &[]).status.code(), Some(2));
    assert_eq!(lab(&["run"], &tmp("does-not-exist.json"), &tmp("bad-out.json"), &[]).status.code(), Some(2));
    let o = lab(&["run", "--tolerance-scale", "-1"], &scenario("flat_1p1_small.json"), &tmp("bad-out.json"), &[]);
    assert_eq!(o.status.code(), Some(2));
    let o = lab(&["run"], &scenario("flat_1p1_small.json"), &tmp("bad-out.json"), &[("PROCA_LAB_THREADS", "zero")]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn repeated_seed_gives_identical_bytes() {
    let a = tmp("det-a.json");
    let b = tmp("det-b.json");
    lab(&["run"], &scenario("flat_1p1_small.json"), &a, &[("PROCA_LAB_THREADS", "1")]);
    lab(&["run"], &scenario("flat_1p1_small.json"), &b, &[("PROCA_LAB_THREADS", "3")]);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn overrides_select_suites_seed_and_scale() {
    let out = tmp("override.json");
    let o = lab(
        &["run", "--suite", "complex,spectral", "--seed", "99", "--tolerance-scale", "2"],
        &scenario("flat_1p1_small.json"),
        &out,
        &[],
    );
    assert_eq!(o.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["seed"], 99);
    assert_eq!(r["tolerance_scale"], 2.0);
    assert_eq!(r["suites"], serde_json::json!(["complex", "spectral"]));
    let adj = r["checks"].as_array().unwrap().iter().find(|c| c["check_id"] == "complex.adjointness").unwrap();
    assert_eq!(adj["threshold"], 2e-12);

    // A different seed changes the random batteries.
    let other = tmp("override-seed.json");
    lab(&["run", "--suite", "spectral", "--seed", "100"], &scenario("flat_1p1_small.json"), &other, &[]);
    let first = tmp("override-seed-99.json");
    lab(&["run", "--suite", "spectral", "--seed", "99"], &scenario("flat_1p1_small.json"), &first, &[]);
    assert_ne!(report(&other)["checks"], report(&first)["checks"]);
}

#[test]
fn verify_subcommands_restrict_suites() {
    for (cmd, suite) in [("moller-verify", "moller"), ("state-verify", "states")] {
        let out = tmp(&format!("{cmd}.json"));
        assert_eq!(lab(&[cmd], &scenario("flat_1p1_small.json"), &out, &[]).status.code(), Some(0));
        let r = report(&out);
        assert_eq!(r["suites"], serde_json::json!([suite]));
    }
}

#[test]
fn spectrum_dump_on_circle_four() {
    let sc = tmp("circle4.json");
    std::fs::write(
        &sc,
        r#"{"name": "c4", "mass_sq": 1.0, "suites": ["complex"],
            "meshes": [{"dim": 1, "sizes": [4], "spacing": 1.0, "metric": "constant"}]}"#,
    )
    .unwrap();
    let out = tmp("spectrum.csv");
    let o = lab(&["dump", "spectrum"], &sc, &out, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = read_csv(&out);
    assert_eq!(header, ["index", "eigenvalue"]);
    let values: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    assert_eq!(values.len(), 4);
    for (v, e) in values.iter().zip([0.0, 2.0, 2.0, 4.0]) {
        assert!((v - e).abs() < 1e-12, "{values:?}");
    }
}

#[test]
fn impulse_dump_is_cone_shaped() {
    let out = tmp("impulse.csv");
    assert_eq!(lab(&["dump", "impulse"], &scenario("flat_1p1_small.json"), &out, &[]).status.code(), Some(0));
    let (header, rows) = read_csv(&out);
    assert_eq!(header, ["t", "position", "component", "value"]);
    // Source at t = 12 (slice 24 of dt 0.5), x = 0.5 on a circle of 16 unit cells.
    // The stencil reaches one cell per step, so the lattice cone has speed 2 here.
    let mut support = 0;
    for r in &rows {
        let t: f64 = r[0].parse().unwrap();
        let x: f64 = r[1].parse().unwrap();
        let v: f64 = r[3].parse().unwrap();
        let d = (x - 0.5).abs();
        let d = d.min(16.0 - d);
        if v != 0.0 {
            assert!(t >= 12.0 - 1e-9, "response before the source at t={t}");
            assert!(d <= 2.0 * (t - 12.0) + 1.0 + 1e-9, "outside the lattice cone at t={t} x={x}");
            support += 1;
        }
    }
    assert!(support > 50);
}

#[test]
fn frequency_dump_peaks_at_mode_frequency() {
    let out = tmp("frequency.csv");
    assert_eq!(lab(&["dump", "frequency"], &scenario("flat_1p1_small.json"), &out, &[]).status.code(), Some(0));
    let (header, rows) = read_csv(&out);
    assert_eq!(header, ["frequency", "magnitude"]);
    let data: Vec<(f64, f64)> = rows.iter().map(|r| (r[0].parse().unwrap(), r[1].parse().unwrap())).collect();
    let bin = data[1].0 - data[0].0;
    let peak = data.iter().max_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
    assert!((peak.0 - 3f64.sqrt()).abs() <= 0.5 * bin, "peak at {}", peak.0);
}

#[test]
fn unknown_artifact_is_rejected() {
    let o = lab(&["dump", "hologram"], &scenario("flat_1p1_small.json"), &tmp("x.csv"), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown artifact"));
}
