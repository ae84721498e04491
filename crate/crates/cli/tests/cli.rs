use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/fixture")
}

fn novrec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_novrec"))
        .args(args)
        .output()
        .expect("novrec runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn stats_prints_json() {
    let out = novrec(&["stats", "--data-dir", s(&fixture())]);
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["user_count"], 40);
    assert_eq!(v["rating_histogram"].as_array().unwrap().len(), 5);
}

#[test]
fn missing_data_dir_is_a_runtime_error() {
    let out = novrec(&["stats", "--data-dir", "/nonexistent/ml-1m"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("not found"));
}

#[test]
fn missing_required_flag_is_a_validation_error() {
    let out = novrec(&["stats"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn malformed_ratings_are_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    for f in ["users.dat", "movies.dat"] {
        fs::copy(fixture().join(f), dir.path().join(f)).unwrap();
    }
    fs::write(dir.path().join("ratings.dat"), "1::2::9::100\n").unwrap();
    let out = novrec(&["stats", "--data-dir", s(dir.path())]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("ratings.dat:1"));
}

#[test]
fn train_then_eval_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("m.bin");
    let trace = dir.path().join("trace.csv");
    let out = novrec(&[
        "train",
        "--data-dir",
        s(&fixture()),
        "--users",
        "3",
        "--epochs",
        "2",
        "--lr",
        "0",
        "--out",
        s(&model),
        "--trace-out",
        s(&trace),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let lines: Vec<String> = fs::read_to_string(&trace)
        .unwrap()
        .lines()
        .map(String::from)
        .collect();
    assert_eq!(lines[0], "epoch,mean_loss");
    assert_eq!(lines.len(), 3);

    let csv = dir.path().join("eval.csv");
    let out = novrec(&[
        "eval",
        "--model",
        s(&model),
        "--data-dir",
        s(&fixture()),
        "--users",
        "1,2,3",
        "--exclude-seen",
        "--out",
        s(&csv),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("mean nDCG@all"));
    assert_eq!(fs::read_to_string(&csv).unwrap().lines().count(), 4);
}

#[test]
fn lr_zero_model_equals_initialization() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.bin");
    let b = dir.path().join("b.bin");
    for (p, epochs) in [(&a, "1"), (&b, "4")] {
        let out = novrec(&[
            "train",
            "--data-dir",
            s(&fixture()),
            "--users",
            "2",
            "--lr",
            "0",
            "--epochs",
            epochs,
            "--tol",
            "0",
            "--out",
            s(p),
        ]);
        assert_eq!(code(&out), 0);
    }
    assert_eq!(fs::read(a).unwrap().len(), fs::read(&b).unwrap().len());
    // Same parameters; only the recorded epoch budget differs in the header.
    let strip = |p: &Path| {
        let bytes = fs::read(p).unwrap();
        let len = u64::from_le_bytes(bytes[12..20].try_into().unwrap()) as usize;
        bytes[20 + len..].to_vec()
    };
    assert_eq!(strip(&dir.path().join("a.bin")), strip(&b));
}

#[test]
fn missing_model_file_fails() {
    let dir = tempfile::tempdir().unwrap();
    let out = novrec(&[
        "eval",
        "--model",
        "/nonexistent/model.bin",
        "--data-dir",
        s(&fixture()),
        "--out",
        s(&dir.path().join("e.csv")),
    ]);
    assert_eq!(code(&out), 2);
}

#[test]
fn corrupt_model_file_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("bad.bin");
    fs::write(&model, b"definitely not a model").unwrap();
    let out = novrec(&[
        "eval",
        "--model",
        s(&model),
        "--data-dir",
        s(&fixture()),
        "--out",
        s(&dir.path().join("e.csv")),
    ]);
    assert_ne!(code(&out), 0);
    assert!(!dir.path().join("e.csv").exists());
}

#[test]
fn unknown_user_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = novrec(&[
        "uni",
        "--data-dir",
        s(&fixture()),
        "--users",
        "1,999",
        "--out",
        s(&dir.path().join("u.csv")),
    ]);
    assert_eq!(code(&out), 1);
}

#[test]
fn sweep_step_zero_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = novrec(&[
        "sweep-k",
        "--data-dir",
        s(&fixture()),
        "--k-min",
        "2",
        "--k-max",
        "4",
        "--step",
        "0",
        "--out",
        s(&dir.path().join("s.csv")),
    ]);
    assert_eq!(code(&out), 1);
}

#[test]
fn single_point_sweep_grid() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("s.csv");
    let out = novrec(&[
        "sweep-k",
        "--data-dir",
        s(&fixture()),
        "--users",
        "2",
        "--k-min",
        "2",
        "--k-max",
        "2",
        "--epochs",
        "2",
        "--out",
        s(&csv),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let body = fs::read_to_string(&csv).unwrap();
    assert_eq!(body.lines().count(), 3);
    assert!(body.lines().skip(1).all(|l| l.starts_with("2,")));
}

#[test]
fn uni_defaults_cover_five_users() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("u.csv");
    let out = novrec(&[
        "uni",
        "--data-dir",
        s(&fixture()),
        "--max-steps",
        "10",
        "--out",
        s(&csv),
    ]);
    assert_eq!(code(&out), 0);
    assert_eq!(
        fs::read_to_string(&csv).unwrap().lines().count(),
        1 + 5 * 10
    );
}

#[test]
fn config_file_fills_flags_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    let csv = dir.path().join("u.csv");
    fs::write(
        &cfg,
        format!(
            "# uni run\ndata_dir = {}\nusers = 3\nmax-steps = 4\nk = 7\n",
            s(&fixture())
        ),
    )
    .unwrap();
    let out = novrec(&[
        "--config",
        s(&cfg),
        "uni",
        "--max-steps",
        "2",
        "--out",
        s(&csv),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(fs::read_to_string(&csv).unwrap().lines().count(), 1 + 3 * 2);

    fs::write(&cfg, "lr = fast\n").unwrap();
    let out = novrec(&[
        "--config",
        s(&cfg),
        "train",
        "--data-dir",
        s(&fixture()),
        "--out",
        s(&dir.path().join("m.bin")),
    ]);
    assert_eq!(code(&out), 1);
}

#[test]
fn grad_check_pass_and_fail() {
    let out = novrec(&["grad-check", "--configs", "3"]);
    assert_eq!(code(&out), 0);
    let out = novrec(&["grad-check", "--configs", "3", "--tol", "1e-12"]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL"));
}
