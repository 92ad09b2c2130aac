use std::process::{Command, Output};

fn sle_rho(args: &[&str], out_dir: &std::path::Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sle-rho"))
        .args(args)
        .env("SLE_RHO_OUT", out_dir)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn value(text: &str, name: &str) -> Option<String> {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{name}=")))
        .map(|v| v.split_whitespace().next().unwrap_or("").to_string())
}

#[test]
fn exponent_queries() {
    let dir = tempfile::tempdir().unwrap();
    let o = sle_rho(&["exponent", "--kappa", "8/3", "--rho", "0", "--alpha", "5/8"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert_eq!(value(&s, "bar_rho").as_deref(), Some("2"));
    assert_eq!(value(&s, "bar_sigma").as_deref(), Some("0.75"));
    assert_eq!(value(&s, "bar_eta").as_deref(), Some("0.625"));

    let o = sle_rho(&["exponent", "--eta", "1", "--beta", "1", "--two-sided"], dir.path());
    assert_eq!(value(&stdout(&o), "tau").as_deref(), Some("3"));

    let o = sle_rho(&["exponent", "--n", "1", "--m", "1"], dir.path());
    let s = stdout(&o);
    assert!(s.contains("bm_hiding=2.82287565553 (=(3+√7)/2)"), "{s}");
}

#[test]
fn exit_codes_follow_error_kinds() {
    let dir = tempfile::tempdir().unwrap();
    let code = |args: &[&str]| sle_rho(args, dir.path()).status.code();
    assert_eq!(code(&["exponent", "--kappa", "0"]), Some(2));
    assert_eq!(code(&["exponent", "--kappa", "8/3", "--rho", "-3"]), Some(2));
    assert_eq!(code(&["exponent", "--kappa", "8/3", "--frobnicate"]), Some(3));
    assert_eq!(code(&["verify-reweighting", "--kappa", "2", "--rho", "0", "--alpha", "1", "--functional", "max:1"]), Some(3));
    assert_eq!(code(&["no-such-command"]), Some(3));
    assert_eq!(code(&["selftest"]), Some(0));
}

#[test]
fn help_lists_every_command_and_flag() {
    let dir = tempfile::tempdir().unwrap();
    let top = stdout(&sle_rho(&["--help"], dir.path()));
    for cmd in [
        "exponent",
        "simulate",
        "verify-identity",
        "verify-restriction",
        "verify-martingale",
        "verify-reweighting",
        "estimate-decay",
        "brownian-hiding",
        "selftest",
    ] {
        assert!(top.contains(cmd), "{cmd} missing from --help");
        let sub = stdout(&sle_rho(&[cmd, "--help"], dir.path()));
        // every flag line carries a description
        for line in sub.lines().filter(|l| l.trim_start().starts_with("--")) {
            assert!(line.trim().split("  ").filter(|p| !p.is_empty()).count() >= 2, "{cmd}: bare flag {line}");
        }
    }
}

#[test]
fn non_integer_path_counts_warn() {
    let dir = tempfile::tempdir().unwrap();
    let o = sle_rho(&["exponent", "--n", "1/2", "--m", "1"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));
}

#[test]
fn seeded_runs_are_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = [
        "verify-reweighting", "--kappa", "8/3", "--rho", "0", "--alpha", "5/8",
        "--functional", "indicator:1", "--n-paths", "600", "--dt", "1e-2", "--seed", "42",
    ];
    assert_eq!(sle_rho(&args, a.path()).status.code(), Some(0));
    assert_eq!(sle_rho(&args, b.path()).status.code(), Some(0));
    let read = |d: &tempfile::TempDir, f: &str| std::fs::read(d.path().join(f)).unwrap();
    assert_eq!(read(&a, "reweighting.csv"), read(&b, "reweighting.csv"));
    assert_eq!(read(&a, "reweighting.json"), read(&b, "reweighting.json"));

    let c = tempfile::tempdir().unwrap();
    let mut other = args.to_vec();
    *other.last_mut().unwrap() = "43";
    sle_rho(&other, c.path());
    assert_ne!(read(&a, "reweighting.csv"), read(&c, "reweighting.csv"));
}

#[test]
fn config_file_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"n_paths": 300, "dt": 0.01, "t_end": 1.0, "seed": 5}"#).unwrap();
    let cfg_arg = cfg.to_str().unwrap();
    let o = sle_rho(
        &["verify-identity", "--kappa", "2", "--rho", "0", "--alpha", "1", "--config", cfg_arg, "--n-paths", "256"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("identity.json")).unwrap()).unwrap();
    assert_eq!(summary["config"]["n_paths"], 256);
    assert_eq!(summary["config"]["seed"], 5);
    assert_eq!(summary["config_hash"].as_str().map(str::len), Some(16));
    let csv = std::fs::read_to_string(dir.path().join("identity.csv")).unwrap();
    assert!(csv.starts_with("experiment,kappa,rho,alpha,a,estimate,stderr,n,seed,config_hash\n"));

    std::fs::write(&cfg, r#"{"n_paths": 0}"#).unwrap();
    let o = sle_rho(&["verify-identity", "--kappa", "2", "--rho", "0", "--alpha", "1", "--config", cfg_arg], dir.path());
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn simulate_writes_driving_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let o = sle_rho(&["simulate", "--kappa", "8/3", "--rho", "2", "--a", "0.5", "--dt", "1e-2", "--seed", "3"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert_eq!(value(&s, "steps").as_deref(), Some("100"));
    assert_eq!(value(&s, "simple").as_deref(), Some("true"));
    let driving = std::fs::read_to_string(dir.path().join("driving.csv")).unwrap();
    let trace = std::fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    assert_eq!(driving.lines().count(), 102);
    assert_eq!(trace.lines().next(), Some("t,re,im"));
}
