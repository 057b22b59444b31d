use std::path::Path;
use std::process::{Command, Output};

fn herglotz(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_herglotz")).args(args).output().expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = herglotz(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn code(args: &[&str]) -> i32 {
    herglotz(args).status.code().expect("exit code")
}

/// Rows of a CSV text as maps from header to cell.
fn records(text: &str) -> Vec<std::collections::HashMap<String, String>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = r.headers().unwrap().iter().map(String::from).collect();
    r.records()
        .map(|rec| header.iter().cloned().zip(rec.unwrap().iter().map(String::from)).collect())
        .collect()
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

#[test]
fn preset_list_names_every_preset() {
    let names: Vec<String> = stdout(&["preset", "list"])
        .lines()
        .map(|l| l.split_whitespace().next().unwrap().to_string())
        .collect();
    assert_eq!(names, ["example39", "capasso", "morphogen", "rabies-fig3", "rabies-vaccine"]);
}

#[test]
fn eigs_example39_first_upper_mode() {
    let rows = records(&stdout(&["eigs", "--preset", "example39", "--nx", "100"]));
    let row = rows.iter().find(|r| r["j"] == "1" && r["k"] == "1").expect("row (1, 1)");
    let lambda = num(&row["lambda"]);
    assert!((lambda - 4.88).abs() <= 0.02, "lambda = {lambda}");
}

#[test]
fn eigs_csv_layout() {
    let text = stdout(&["eigs", "--preset", "example39", "--nx", "40"]);
    assert_eq!(
        text.lines().next().unwrap(),
        "j,k,lambda,imag_magnitude,residual,equation_residual,sign_changes,near_pole"
    );
    let rows = records(&text);
    // two unknown blocks of 39 interior values
    assert_eq!(rows.len(), 78);
    for r in &rows {
        // at most 12 significant digits
        let digits = r["lambda"].trim_start_matches('-').replace('.', "").trim_start_matches('0').len();
        assert!(digits <= 12, "{}", r["lambda"]);
    }
}

#[test]
fn wkb_example39_fourth_lower_mode() {
    let rows = records(&stdout(&["wkb", "--preset", "example39", "--j", "0", "--k", "3"]));
    let lambda = num(&rows[0]["lambda"]);
    assert!((lambda - 1.956).abs() <= 0.005, "lambda = {lambda}");
}

#[test]
fn wkb_accumulation_constant() {
    let rows = records(&stdout(&["wkb-accum", "--preset", "example39", "--pole", "1"]));
    // ((1/π)∫₀^π √(0.2 + cos²x) dx)² by composite Simpson on 2000 panels
    let n = 2000;
    let h = std::f64::consts::PI / n as f64;
    let f = |x: f64| (0.2 + x.cos().powi(2)).sqrt();
    let s: f64 = (0..=n)
        .map(|i| {
            let w = if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
            w * f(i as f64 * h)
        })
        .sum::<f64>()
        * h
        / 3.0;
    let c = (s / std::f64::consts::PI).powi(2);
    assert!((num(&rows[0]["constant"]) - c).abs() < 1e-9);
}

#[test]
fn shoot_agrees_with_linearization() {
    let lin = records(&stdout(&["eigs", "--preset", "example39", "--nx", "400"]));
    for (j, k) in [("0", "2"), ("1", "0"), ("1", "3")] {
        let s = records(&stdout(&["shoot", "--preset", "example39", "--j", j, "--k", k]));
        let l = lin.iter().find(|r| r["j"] == j && r["sign_changes"] == k).unwrap();
        let (a, b) = (num(&s[0]["lambda"]), num(&l["lambda"]));
        assert!((a - b).abs() / b.abs() < 1e-3, "({j}, {k}): {a} vs {b}");
    }
}

#[test]
fn vaccine_sweep_at_reported_threshold_has_stable_row() {
    let rows = records(&stdout(&["rabies", "vaccine-sweep", "--c0", "0.44"]));
    assert!(rows.iter().any(|r| r["stable"] == "true"), "no stable strategy at c0 = 0.44");
}

#[test]
fn vaccine_sweep_layout_and_stability_above_threshold() {
    let text = stdout(&["rabies", "vaccine-sweep", "--c0", "0.6", "--step", "0.05"]);
    assert_eq!(text.lines().next().unwrap(), "c0,a0,L,lambda0,stable");
    let rows = records(&text);
    assert!(rows.iter().any(|r| r["stable"] == "true"));
    for r in &rows {
        assert_eq!(r["stable"] == "true", num(&r["lambda0"]) < 0.0);
        assert!(num(&r["a0"]) + num(&r["L"]) <= 1.0 + 1e-9);
    }
}

#[test]
fn sweep_is_byte_identical_across_runs_and_thread_counts() {
    let args = ["rabies", "vaccine-sweep", "--c0", "0.7", "--step", "0.05", "--format", "json"];
    let a = herglotz(&args).stdout;
    let b = Command::new(env!("CARGO_BIN_EXE_herglotz")).args(args).env("HERGLOTZ_THREADS", "3").output().unwrap().stdout;
    assert!(!a.is_empty());
    assert_eq!(a, b);
    assert_eq!(herglotz(&args).stdout, a);
}

#[test]
fn eigs_is_deterministic() {
    let args = ["eigs", "--preset", "rabies-vaccine", "--nx", "50"];
    assert_eq!(herglotz(&args).stdout, herglotz(&args).stdout);
}

fn write_eigs_json(dir: &Path, preset: &str) -> std::path::PathBuf {
    let path = dir.join(format!("{preset}.json"));
    stdout(&["eigs", "--preset", preset, "--nx", "50", "--format", "json", "--out", path.to_str().unwrap()]);
    path
}

#[test]
fn json_round_trip_reproduces_residuals() {
    let dir = tempfile::tempdir().unwrap();
    for preset in ["example39", "rabies-fig3"] {
        let path = write_eigs_json(dir.path(), preset);
        let rows = records(&stdout(&["verify", "--input", path.to_str().unwrap()]));
        assert_eq!(rows.len(), 98);
        for r in rows {
            assert!(num(&r["residual_diff"]) <= 1e-12 && num(&r["equation_residual_diff"]) <= 1e-12);
        }
    }
}

#[test]
fn verify_flags_tampered_residuals() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_eigs_json(dir.path(), "example39");
    let mut doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    doc["pairs"][3]["equation_residual"] = serde_json::json!(0.5);
    std::fs::write(&path, serde_json::to_string(&doc).unwrap()).unwrap();
    assert_eq!(code(&["verify", "--input", path.to_str().unwrap()]), 3);
}

#[test]
fn problem_file_matches_preset() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.json");
    std::fs::write(&path, stdout(&["preset", "show", "example39"])).unwrap();
    let from_file = stdout(&["eigs", "--problem", path.to_str().unwrap(), "--nx", "30"]);
    assert_eq!(from_file, stdout(&["eigs", "--preset", "example39", "--nx", "30"]));
}

#[test]
fn eigenfunction_dump_has_one_row_per_node() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("u.csv");
    stdout(&["eigs", "--preset", "example39", "--nx", "20", "--eigenfunctions", path.to_str().unwrap()]);
    let rows = records(&std::fs::read_to_string(&path).unwrap());
    assert_eq!(rows.len(), 38 * 19);
    let top = rows.iter().filter(|r| r["j"] == "0" && r["k"] == "0").map(|r| num(&r["u"]).abs()).fold(0.0, f64::max);
    assert_eq!(top, 1.0);
}

#[test]
fn check_herglotz_quadratic_against_partial_fractions() {
    // λ − (c₁/(λ − r₁) + c₂/(λ − r₂)) with r₁ = 1, r₂ = −1
    let form = |c1: f64, c2: f64| format!("{},{},0,-1", c1 + c2, -(c1 * -1.0 + c2 * 1.0));
    let holds = |c1, c2| {
        let rows = records(&stdout(&["check-herglotz", "--quadratic", &form(c1, c2)]));
        rows.iter().find(|r| r["check"] == "partial_fractions").unwrap()["holds"] == "true"
    };
    assert!(holds(0.5, 2.0));
    assert!(!holds(-0.5, 2.0));
    assert!(!holds(1.0, -0.1));
}

#[test]
fn check_herglotz_problem_reports_failing_coefficient() {
    let fields = ["--field", "d=0.5", "--field", "a11=1", "--field", "a22=0.5", "--field", "gprime=1"];
    let mut args = vec!["check-herglotz", "--preset", "capasso", "--field", "a12=-2"];
    args.extend(fields);
    let rows = records(&stdout(&args));
    assert_eq!(rows[0]["holds"], "false");
    assert!(rows[0]["detail"].starts_with("W1("));
    args[4] = "a12=2";
    assert_eq!(records(&stdout(&args))[0]["holds"], "true");
}

#[test]
fn rabies_r0_matches_closed_form() {
    let rows = records(&stdout(&["rabies", "r0", "--preset", "rabies-fig3"]));
    // R0 = σKβ / ((σ + a)(α + a)) for constant coefficients
    let exact = 0.0357 * 0.98 * 0.2192 / ((0.0357 + 0.0027) * (0.2 + 0.0027));
    assert!((num(&rows[0]["r0"]) - exact).abs() / exact < 1e-6);
    assert_eq!(rows[0]["consistent"], "true");
}

#[test]
fn heterogeneity_accepts_negative_values() {
    let rows = records(&stdout(&["rabies", "heterogeneity", "--kind", "beta_c1", "--values", "-0.5,0,0.5"]));
    assert_eq!(rows.len(), 3);
    let r0: Vec<f64> = rows.iter().map(|r| num(&r["r0"])).collect();
    assert!(r0[1] < r0[0] && r0[1] < r0[2]);
}

#[test]
fn exit_codes() {
    assert_eq!(code(&["--help"]), 0);
    assert_eq!(code(&["--version"]), 0);
    assert_eq!(code(&["frobnicate"]), 1);
    assert_eq!(code(&["eigs", "--preset", "example39", "--bogus"]), 1);
    assert_eq!(code(&["eigs"]), 1);
    assert_eq!(code(&["eigs", "--preset", "example39", "--problem", "x.json"]), 1);
    assert_eq!(code(&["eigs", "--preset", "nonexistent"]), 2);
    assert_eq!(code(&["eigs", "--preset", "capasso"]), 2);
    assert_eq!(code(&["eigs", "--preset", "example39", "--nx", "2"]), 2);
    assert_eq!(code(&["wkb-accum", "--preset", "example39", "--pole", "2"]), 2);
    assert_eq!(code(&["rabies", "heterogeneity", "--kind", "gamma"]), 2);
    assert_eq!(code(&["rabies", "r0", "--preset", "example39"]), 2);
}

#[test]
fn missing_preset_field_names_the_field() {
    let out = herglotz(&["eigs", "--preset", "morphogen", "--field", "abar=0.3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--field"));
}
