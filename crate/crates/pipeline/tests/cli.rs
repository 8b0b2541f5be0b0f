use std::process::Command;

fn sehs() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sehs"))
}

#[test]
fn power_budget_prints_reference_totals() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("power.csv");
    let out = sehs().args(["power-budget", "--out"]).arg(&csv).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("accelerometer-continuous") && text.contains("4.729 J"), "{text}");
    assert!(text.contains("peh-continuous") && text.contains("0.067 J"), "{text}");
    assert_eq!(csv::Reader::from_path(&csv).unwrap().records().count(), 6);
}

#[test]
fn custom_budget_accepts_negative_sensing_power() {
    let out = sehs()
        .args(["power-budget", "--p-sensing", "-4", "--t-sleep", "300"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8(out.stdout).unwrap().contains("0.068 J"));
}

#[test]
fn invalid_config_exits_with_config_code() {
    let dir = tempfile::tempdir().unwrap();
    let mut text = sehs::presets::preset("desk").unwrap().to_toml();
    text = text.replace("healthy = 120", "healthy = 20");
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, text).unwrap();
    let out = sehs()
        .args(["simulate", "--config"])
        .arg(&path)
        .arg("--run")
        .arg(dir.path().join("run"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(sehs::exit::CONFIG));
}

#[test]
fn unknown_preset_exits_with_config_code() {
    let dir = tempfile::tempdir().unwrap();
    let out = sehs()
        .args(["run-all", "--preset", "nope", "--run"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(sehs::exit::CONFIG));
}

#[test]
fn missing_run_directory_is_a_failure() {
    let dir = tempfile::tempdir().unwrap();
    let out = sehs().args(["dataset", "--run"]).arg(dir.path().join("none")).output().unwrap();
    assert_eq!(out.status.code(), Some(sehs::exit::FAILURE));
}

#[test]
fn presets_are_listed_and_printable() {
    let out = sehs().arg("presets").output().unwrap();
    let names = String::from_utf8(out.stdout).unwrap();
    assert!(names.lines().any(|l| l == "desk-quarter-dqn1"));
    let out = sehs().args(["presets", "full"]).output().unwrap();
    let cfg = sehs::ExperimentConfig::from_toml(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(cfg.design.lengths.len(), 36);
    assert_eq!(cfg.dataset.healthy, 500);
}
