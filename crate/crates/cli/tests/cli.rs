use std::process::{Command, Output};

fn homog(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_homog"))
        .args(args)
        .current_dir(concat!(env!("CARGO_MANIFEST_DIR"), "/../.."))
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn scalar_g0(o: &Output) -> f64 {
    let line = stdout(o).lines().find(|l| l.starts_with("g0:")).unwrap().to_string();
    line.trim_start_matches("g0: [").trim_end_matches(']').parse().unwrap()
}

#[test]
fn cell_prints_root_three() {
    let o = homog(&["cell", "--model", "scalar-1d-sine"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!((scalar_g0(&o) - 3f64.sqrt()).abs() < 1e-7);
}

#[test]
fn cell_of_constant_model_is_the_constant() {
    let o = homog(&["cell", "--model", "constant"]);
    assert_eq!(code(&o), 0);
    assert!((scalar_g0(&o) - 2.0).abs() < 1e-12);
    let res = stdout(&o).lines().find(|l| l.starts_with("residuals:")).unwrap().to_string();
    let first: f64 = res.split_whitespace().nth(1).unwrap().parse().unwrap();
    assert!(first <= 1e-14, "{res}");
}

#[test]
fn cell_of_laminate_is_diagonal() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cell.json");
    let o = homog(&["cell", "--model", "laminate-13", "--out", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let line = stdout(&o).lines().find(|l| l.starts_with("g0:")).unwrap().to_string();
    let entries: Vec<f64> = line
        .trim_start_matches("g0: [")
        .trim_end_matches(']')
        .split([';', ','])
        .map(|s| s.trim().split(['+', 'i']).next().unwrap().parse::<f64>().unwrap_or(0.0))
        .collect();
    assert!((entries[0] - 1.5).abs() < 1e-6 && (entries[3] - 2.0).abs() < 1e-6, "{line}");
    assert!(entries[1].abs() < 1e-10 && entries[2].abs() < 1e-10);
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    assert!(json.get("g0").is_some());
}

#[test]
fn effective_prints_json() {
    let o = homog(&["effective", "--model", "scalar-1d-sine"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v.get("lambda_shift").is_some());
}

fn csv_column(text: &str, name: &str) -> Vec<f64> {
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let i = header.iter().position(|h| *h == name).unwrap();
    lines.map(|l| l.split(',').nth(i).unwrap().parse().unwrap_or(f64::NAN)).collect()
}

#[test]
fn solve_on_constant_model_is_exact() {
    let o = homog(&["solve", "--model", "constant", "--eps", "1/8", "--zeta-re", "-1"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(csv_column(&stdout(&o), "err_l2")[0] <= 1e-10);
}

#[test]
fn solve_error_decreases_with_epsilon() {
    let coarse = homog(&["solve", "--model", "scalar-1d-sine", "--eps", "1/16"]);
    let fine = homog(&["solve", "--model", "scalar-1d-sine", "--eps", "1/32"]);
    let e16 = csv_column(&stdout(&coarse), "err_l2")[0];
    let e32 = csv_column(&stdout(&fine), "err_l2")[0];
    assert!(e32 < e16, "{e32} vs {e16}");
}

#[test]
fn solve_writes_fields() {
    let dir = tempfile::tempdir().unwrap();
    let o = homog(&[
        "solve", "--model", "scalar-1d-sine", "--eps", "1/8", "--boundary-layer", "--out", dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    for f in ["u_eps.json", "u0.json", "v_eps.json", "w_eps.json"] {
        assert!(dir.path().join(f).is_file(), "{f}");
    }
}

#[test]
fn positive_real_zeta_is_a_config_error() {
    let o = homog(&["solve", "--model", "scalar-1d-sine", "--eps", "1/8", "--zeta-re", "4"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("inadmissible"));
}

#[test]
fn bad_inputs_are_config_errors() {
    assert_eq!(code(&homog(&["cell", "--model", "no-such-model"])), 1);
    assert_eq!(code(&homog(&["sweep", "--model", "constant", "--ratio", "8"])), 1);
    assert_eq!(code(&homog(&["sweep", "--model", "constant", "--eps", "0.3"])), 1);
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"modle": "constant"}"#).unwrap();
    assert_eq!(code(&homog(&["cell", "--config", cfg.to_str().unwrap()])), 1);
}

#[test]
fn rho_flat_mode_rejects_zeta_above_the_floor() {
    let o = homog(&["solve", "--model", "scalar-1d-sine", "--eps", "1/8", "--mode", "rho-flat", "--zeta-re", "50"]);
    assert_eq!(code(&o), 1);
    let o = homog(&["solve", "--model", "scalar-1d-sine", "--eps", "1/8", "--mode", "rho-flat", "--zeta-re", "1"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn sweep_is_byte_identical_and_canonical() {
    let args = ["sweep", "--model", "scalar-1d-sine", "--zeta-re", "-1,-4", "--zeta-im", "0,1", "--jobs", "2"];
    let a = homog(&args);
    let b = homog(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let eps = csv_column(&stdout(&a), "epsilon");
    assert_eq!(eps.len(), 8);
    assert!(eps.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn config_file_and_flags_combine() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"model": "scalar-1d-sine", "eps_grid": [0.125, 0.0625], "seed": 3}"#).unwrap();
    let o = homog(&["sweep", "--config", cfg.to_str().unwrap(), "--eps", "1/8"]);
    assert_eq!(code(&o), 0);
    assert_eq!(csv_column(&stdout(&o), "epsilon"), vec![0.125]);
}

#[test]
fn verify_reference_one_dimensional_run_passes() {
    let o = homog(&["verify", "--model", "scalar-1d-sine", "--boundary-layer"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("PASS L2 slope"));
}

#[test]
fn verify_without_corrector_fails_criteria() {
    let o = homog(&["verify", "--model", "scalar-1d-sine", "--no-corrector"]);
    assert_eq!(code(&o), 3, "{}", stdout(&o));
    assert!(stdout(&o).contains("FAIL H1 corrector slope"));
}

#[test]
fn verify_needs_four_epsilon_points() {
    let o = homog(&["verify", "--model", "scalar-1d-sine", "--eps", "1/8,1/16"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn report_reads_a_sweep_table() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("rows.csv");
    let json = dir.path().join("report.json");
    let o = homog(&["sweep", "--model", "scalar-1d-sine", "--out", csv.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let o = homog(&["report", csv.to_str().unwrap(), "--out", json.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(json).unwrap()).unwrap();
    assert_eq!(v["passed"], serde_json::Value::Bool(true));
}
