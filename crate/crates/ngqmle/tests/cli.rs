use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ngqmle::io::read_returns;
use ngqmle::report::{fit_report, FitRequest};
use ngqmle_core::estimators::FitOptions;
use ngqmle_core::selection::CandidateGrid;
use ngqmle_core::volatility::{simulate, GarchOrder, GarchParams};
use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ngqmle"))
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn json_stdout(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn fit_matches_library() {
    let path = fixture("garch11_t5.csv");
    let out = run(&["fit", "-i", path.to_str().unwrap(), "--likelihood", "t:4", "--aggregate"]);
    let cli = json_stdout(&out);

    let req = FitRequest {
        order: GarchOrder::new(1, 1).unwrap(),
        likelihood: Some("t:4".parse().unwrap()),
        select: false,
        grid: CandidateGrid::default(),
        aggregate: true,
        unscaled: false,
        options: FitOptions::default(),
    };
    let lib = serde_json::to_value(fit_report(&read_returns(&path).unwrap(), &req).unwrap()).unwrap();
    assert_eq!(cli["report"], lib);
    let eta = cli["report"]["two_step"]["eta_hat"]["eta"].as_f64().unwrap();
    assert!(eta > 0.9 && eta < 1.2, "{eta}");
}

#[test]
fn simulate_is_reproducible_and_matches_library() {
    let params = r#"{"sigma":0.5,"a":[0.35],"b":[0.3]}"#;
    let args = ["simulate", "--params", params, "--innovation", "t:5", "-T", "1500", "--seed", "11"];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(text.starts_with("# {"));
    let parsed = ngqmle::io::parse_returns(text.as_bytes()).unwrap();
    let theta = GarchParams::new(0.5, vec![0.35], vec![0.3]).unwrap();
    assert_eq!(parsed, simulate(&theta, &"t:5".parse().unwrap(), 1500, 500, 11).unwrap());
    assert_eq!(parsed, read_returns(&fixture("garch11_t5.csv")).unwrap());
}

#[test]
fn select_reads_stdin() {
    use std::io::Write;
    let data = std::fs::read(fixture("garch11_t5.csv")).unwrap();
    let mut child = bin()
        .args(["fit", "-i", "-", "--select", "--grid-t", "3,5,9", "--grid-gg", "0.6,1"])
        .stdin(std::process::Stdio::piped())
        .stdout(std::process::Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(&data).unwrap();
    let v = json_stdout(&child.wait_with_output().unwrap());
    let table = v["report"]["selection"]["table"].as_array().unwrap();
    assert_eq!(table.len(), 6);
    assert!(v["report"]["two_step"].is_object());
}

#[test]
fn tables_gaussian_row_is_zero() {
    let out = run(&["tables", "mu", "--likelihoods", "gaussian,t:4", "--innovations", "t:5,gg:1"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[1].ends_with(",0.000,0.000"), "{}", rows[1]);
    let m = ngqmle_core::asymptotics::mu(&"t:4".parse().unwrap(), &"t:5".parse().unwrap()).unwrap();
    assert!(rows[2].starts_with(&format!("t(4),{m:.3},")), "{}", rows[2]);
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["fit"]).status.code(), Some(1));
    assert_eq!(run(&["fit", "-i", "/nonexistent.csv"]).status.code(), Some(1));
    assert_eq!(run(&["tables", "eta", "--likelihoods", "t:1", "--innovations", "t:5"]).status.code(), Some(1));

    let dir = std::env::temp_dir().join(format!("ngqmle-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let flat = dir.join("flat.csv");
    std::fs::write(&flat, "return\n".to_string() + &"0\n".repeat(200)).unwrap();
    let out = run(&["fit", "-i", flat.to_str().unwrap(), "--likelihood", "t:4"]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["kind"], "numerical");
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn mc_is_thread_count_invariant() {
    let dir = std::env::temp_dir().join(format!("ngqmle-mc-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let config = dir.join("mc.json");
    std::fs::write(
        &config,
        r#"{
            "true_params": {"sigma": 0.5, "a": [0.35], "b": [0.3]},
            "innovation": {"family": "student_t", "shape": 7.0},
            "T": 500,
            "replications": 6,
            "estimators": [{"kind": "gaussian"}, {"kind": "two_step", "likelihood": {"family": "student_t", "shape": 4.0}}],
            "master_seed": 3
        }"#,
    )
    .unwrap();
    let ratios = dir.join("ratios.csv");
    let one = run(&["mc", "-c", config.to_str().unwrap(), "--threads", "1"]);
    let three = run(&[
        "mc",
        "-c",
        config.to_str().unwrap(),
        "--threads",
        "3",
        "--pairs",
        "gaussian/two_step[t(4)]",
        "--ratios",
        ratios.to_str().unwrap(),
    ]);
    let (a, b) = (json_stdout(&one), json_stdout(&three));
    assert_eq!(a["report"], b["report"]);
    assert_eq!(a["report"]["checksums"].as_array().unwrap().len(), 6);
    let csv = std::fs::read_to_string(&ratios).unwrap();
    assert!(csv.starts_with("numerator,denominator,n,"), "{csv}");
    std::fs::remove_dir_all(&dir).unwrap();
}
