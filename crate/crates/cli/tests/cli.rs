use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_levy-moduli"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).trim().to_string()
}

#[test]
fn help_on_every_subcommand() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    for (sub, flag) in [
        ("sigma", "--beta"),
        ("constants", "--theorem"),
        ("simulate", "--epsilon"),
        ("oracle", "--m"),
        ("check", "--condition"),
        ("verify", "--replicas"),
    ] {
        let o = run(&[sub, "--help"]);
        assert_eq!(o.status.code(), Some(0), "{sub}");
        assert!(stdout(&o).contains(flag), "{sub} help lacks {flag}");
        assert!(stdout(&o).contains("--precision"), "{sub} help lacks --precision");
    }
}

#[test]
fn sigma_stable_closed_form() {
    let o = run(&["sigma", "--family", "stable", "--beta", "1.5", "--h", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "1.59577");
    let o = run(&["--precision", "3", "sigma", "--family", "brownian-half", "--h", "0.1,1"]);
    assert_eq!(stdout(&o), "h,value\n0.1,0.2\n1,2");
}

#[test]
fn brownian_constant() {
    let o = run(&["constants", "--p", "2", "--theorem", "brownian"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "4");
    let o = run(&["constants", "--p", "1", "--theorem", "brownian", "--precision", "10"]);
    assert_eq!(stdout(&o), "1.595769122");
    assert_eq!(run(&["constants", "--p", "2", "--theorem", "stable"]).status.code(), Some(2));
}

#[test]
fn oracle_values() {
    let o = run(&["oracle", "--family", "stable", "--beta", "2", "--m", "2"]);
    assert_eq!(stdout(&o), "0.5");
    let o = run(&["oracle", "--family", "brownian-half", "--x", "0.3", "--m", "2"]);
    assert_eq!(stdout(&o), "0.60412");
    let o = run(&["oracle", "--family", "brownian-half", "--x", "0.2", "--y", "0.2"]);
    assert_eq!(stdout(&o), "0");
    assert_eq!(run(&["oracle", "--family", "stable", "--beta", "1.5", "--m", "4", "--x", "0.1"]).status.code(), Some(2));
}

#[test]
fn check_conditions() {
    let o = run(&["check", "--condition", "lambda", "--beta", "1.5", "--gamma", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).ends_with("Λ_γ: holds"));
    let o = run(&["check", "--condition", "concavity", "--power", "h^1.5"]);
    assert!(stdout(&o).starts_with("concave = false"));
}

#[test]
fn simulate_csv() {
    let o = run(&["simulate", "--family", "stable", "--beta", "1.5", "--n", "100", "--seed", "3"]);
    let text = stdout(&o);
    assert!(text.starts_with("t,x\n0,0\n"));
    assert_eq!(text.lines().count(), 102);
    assert_eq!(stdout(&run(&["simulate", "--family", "stable", "--beta", "1.5", "--n", "100", "--seed", "3"])), text);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("lt.csv");
    let o = run(&["simulate", "--family", "brownian-half", "--output", "local-time", "--n", "4096", "-o", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(&path).unwrap();
    assert!(csv.starts_with("x,ell\n"));
    let eps = 0.0625;
    let mass: f64 = csv.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse::<f64>().unwrap() * eps).sum();
    assert!((mass - 1.0).abs() < 1e-9, "{mass}");
}

#[test]
fn verify_gaussian_mean_report() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("report.json");
    let csv = dir.path().join("report.csv");
    let o = run(&[
        "verify",
        "gaussian-mean",
        "--r",
        "0.5",
        "--p",
        "2",
        "--replicas",
        "2000",
        "--seed",
        "7",
        "--json",
        json.to_str().unwrap(),
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rep: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(rep["verdict"], "pass");
    let rows = rep["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r["target"] == 1.0));
    assert_eq!(rep["config"]["seed"], "7");
    assert_eq!(std::fs::read_to_string(&csv).unwrap().lines().count(), 4);

    let o = run(&["verify", "--replay", json.to_str().unwrap(), "--json", dir.path().join("again.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stderr).contains("rows identical"));
}

#[test]
fn config_file_and_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.cfg");
    std::fs::write(&cfg, "# smoke\nr = 1.5\np = 1\nreplicas = 50\nseed = 3\n").unwrap();
    let o = run(&["verify", "gaussian-mean", "--config", cfg.to_str().unwrap(), "--p", "2"]);
    let rep: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(rep["config"]["r"], "1.5");
    assert_eq!(rep["config"]["p"], "2");
    assert_eq!(rep["config"]["replicas"], "50");
}

#[test]
fn exit_codes() {
    // verdict failure
    let o = run(&["verify", "gaussian-convergence", "--r", "0.5", "--replicas", "50", "--std-ratio", "100"]);
    assert_eq!(o.status.code(), Some(1));
    // usage errors
    assert_eq!(run(&["verify", "gaussian-mean", "--bogus", "1"]).status.code(), Some(2));
    assert_eq!(run(&["verify", "no-such-kind"]).status.code(), Some(2));
    assert_eq!(run(&["verify", "gaussian-mean", "--replicas", "0"]).status.code(), Some(2));
    assert_eq!(run(&["sigma", "--family", "stable", "--beta", "0.8", "--h", "1"]).status.code(), Some(2));
    assert_eq!(run(&["sigma", "--family", "tabulated", "--h", "1"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
}
