use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn mmq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mmq")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json_of(o: &Output) -> Value {
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_str(&stdout(o)).unwrap()
}

#[test]
fn eval_dispatches_by_region() {
    let v = json_of(&mmq(&["eval", "--x", "0.5", "--eta", "0", "--eps", "1e-3", "--D", "1"]));
    assert_eq!(v["tag"], "region1");
    for key in ["nu", "phase_1", "phase_13", "amplitude", "value_log10", "diagnostics", "config"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["config"]["thresholds"]["corner_mu"], 8.0);

    let v = json_of(&mmq(&["eval", "--x", "0", "--eta", "1", "--eps", "1e-3", "--D", "1"]));
    assert_eq!(v["tag"], "corner");
    assert!(v["amplitude"].as_f64().unwrap() > 0.0);

    let v = json_of(&mmq(&["eval", "--x", "0.05", "--eta", "2", "--eps", "1e-3", "--D", "1", "--layer", "region2"]));
    assert_eq!(v["tag"], "region2");
}

#[test]
fn eval_raw_value_when_representable() {
    let v = json_of(&mmq(&["eval", "--x", "0.01", "--eta", "0", "--eps", "0.1", "--raw"]));
    let lg = v["value_log10"].as_f64().unwrap();
    let raw = v["value"].as_f64().unwrap();
    assert!((raw.log10() - lg).abs() < 1e-12);
    let v = json_of(&mmq(&["eval", "--x", "0.5", "--eta", "3", "--eps", "1e-4", "--raw"]));
    assert!(v["value"].is_null());
}

#[test]
fn domain_errors_exit_nonzero_with_reason() {
    let o = mmq(&["eval", "--x", "-1", "--eta", "0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("x must be finite and >= 0"));
    let o = mmq(&["eval", "--x", "0.1", "--eta", "0", "--D", "0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("D must be positive"));
    let o = mmq(&["eval", "--x", "0.1", "--eta", "0", "--layer", "nowhere"]);
    assert_eq!(o.status.code(), Some(2));
}

fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap()
}

#[test]
fn marginal_file_is_deterministic_and_decreasing() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    for p in [&a, &b] {
        let o = mmq(&["marginal", "--eps", "1e-2", "--D", "1", "--x-max", "3", "--n", "300", "--out", p.to_str().unwrap()]);
        assert!(o.status.success());
    }
    let text = read(&a);
    assert_eq!(text, read(&b));
    assert!(dir.path().join("a.csv.meta.json").exists());
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "x,E,psi1,delta,M_log10,M_smallx_log10,M_largex_log10");
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|c| c.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 301);
    assert!(rows.windows(2).all(|w| w[1][4] < w[0][4]));
    for r in rows.iter().filter(|r| r[0] <= 0.05) {
        assert!((10f64.powf(r[5] - r[4]) - 1.0).abs() < 0.02, "{r:?}");
    }
    assert!(!text.contains('\r'));
}

#[test]
fn marginal_raw_adds_a_column() {
    let o = mmq(&["marginal", "--n", "2", "--raw"]);
    let s = stdout(&o);
    assert!(s.lines().next().unwrap().ends_with(",M"));
    let first: Vec<f64> = s.lines().nth(1).unwrap().split(',').map(|c| c.parse().unwrap()).collect();
    assert!((first[7] - 100.0).abs() < 1e-9, "{first:?}");
}

#[test]
fn caustics_write_two_curves_and_a_cusp() {
    for d in ["1", "2"] {
        let dir = tempfile::tempdir().unwrap();
        let o = mmq(&["caustics", "--D", d, "--n", "50", "--out-dir", dir.path().to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        for f in ["caustic_plus.csv", "caustic_minus.csv"] {
            let t = read(&dir.path().join(f));
            assert_eq!(t.lines().next().unwrap(), "t,s0,x_ca,eta_ca");
            assert_eq!(t.lines().count(), 51);
        }
        let cusp: Value = serde_json::from_str(&read(&dir.path().join("cusp.json"))).unwrap();
        let (xc, ec) = (cusp["cusp"]["x_c"].as_f64().unwrap(), cusp["cusp"]["eta_c"].as_f64().unwrap());
        assert!(xc > 0.0 && ec < 0.0);
        assert!(cusp["eta_star"].as_f64().unwrap() < ec);
        // Both curves start at the cusp end point.
        let minus = read(&dir.path().join("caustic_minus.csv"));
        let first: Vec<f64> = minus.lines().nth(1).unwrap().split(',').map(|c| c.parse().unwrap()).collect();
        assert!((first[2] - xc).abs() < 1e-12 && (first[3] - ec).abs() < 1e-12);
    }
}

#[test]
fn config_file_fills_in_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# marginal run\neps = 0.05\nx_max = 1\nn = 4\n").unwrap();
    let o = mmq(&["--config", cfg.to_str().unwrap(), "marginal"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o).lines().count(), 6);
    let o = mmq(&["--config", cfg.to_str().unwrap(), "marginal", "--n", "2"]);
    assert_eq!(stdout(&o).lines().count(), 4);
    let last: f64 = stdout(&o).lines().last().unwrap().split(',').next().unwrap().parse().unwrap();
    assert_eq!(last, 1.0);

    std::fs::write(&cfg, "eps 0.05\n").unwrap();
    let o = mmq(&["--config", cfg.to_str().unwrap(), "marginal"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("run.cfg:1"));
}

#[test]
fn grid_and_rays_tables() {
    let o = mmq(&["grid", "--nx", "3", "--neta", "4", "--eps", "1e-3"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert_eq!(s.lines().next().unwrap(), "x,eta,region,log10_F,status");
    assert_eq!(s.lines().count(), 13);
    let v = json_of(&mmq(&["grid", "--nx", "2", "--neta", "2", "--format", "json"]));
    assert_eq!(v["points"].as_array().unwrap().len(), 4);

    let o = mmq(&["rays", "--region", "1", "--starts", "0.5", "--n", "11", "--t-max", "1"]);
    let s = stdout(&o);
    assert_eq!(s.lines().count(), 12);
    let o = mmq(&["rays", "--region", "2", "--starts", "0.5"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn check_suite_reports_and_sets_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let js = dir.path().join("r.json");
    let o = mmq(&["check", "--suite", "eikonal", "--D", "1", "--n", "200", "--json", js.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).starts_with("suite eikonal: PASS"));
    let v: Value = serde_json::from_str(&read(&js)).unwrap();
    assert_eq!(v["passed"], true);
    assert!(!v["lines"].as_array().unwrap().is_empty());

    let v = json_of(&mmq(&["check", "--suite", "roundtrip", "--D", "2", "--n", "100", "--format", "json"]));
    assert_eq!(v["suite"], "roundtrip");
}

#[test]
fn oracle_command_reports_comparison() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("grid.csv");
    let m = dir.path().join("m.csv");
    let v = json_of(&mmq(&[
        "oracle", "--nx", "60", "--neta", "80", "--grid-out", g.to_str().unwrap(), "--marginal-out", m.to_str().unwrap(),
    ]));
    assert!(v["comparison"]["m_median_rel"].as_f64().unwrap() < 0.5);
    assert!(v["residual_interior"].as_f64().unwrap() < 1e-8);
    assert_eq!(read(&g).lines().count(), 60 * 80 + 1);
    assert_eq!(read(&m).lines().next().unwrap(), "x,M_grid,M_asymptotic");
    let o = mmq(&["oracle", "--scheme", "spectral"]);
    assert_eq!(o.status.code(), Some(2));
}
