use std::path::Path;
use std::process::{Command, Output};

fn cli(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_copresence"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("COPRESENCE_SEED")
        .env_remove("COPRESENCE_RUNS")
        .env_remove("COPRESENCE_CONFIG")
        .output()
        .unwrap()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn three_runs_with_manifests() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    assert!(cli(&["simulate", "--runs", "3", "--seed", "7"], &out).status.success());
    let mut derived = Vec::new();
    for k in 1..=3 {
        let dir = out.join(format!("run-{k}"));
        assert!(dir.join("detections.jsonl").is_file());
        assert!(dir.join("intervals.json").is_file());
        let m = json(&dir.join("manifest.json"));
        assert_eq!(m["seed"], 7);
        assert_eq!(m["run"], k);
        assert_eq!(m["config_sha256"].as_str().unwrap().len(), 64);
        derived.push(m["derived_seed"].as_u64().unwrap());
    }
    derived.dedup();
    assert_eq!(derived.len(), 3);
}

#[test]
fn missing_zones_file_exits_2_without_output() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    let o = cli(&["all", "--zones", "/definitely/not/here.json"], &out);
    assert_eq!(o.status.code(), Some(2));
    assert!(!String::from_utf8_lossy(&o.stderr).is_empty());
    assert!(!out.exists());
}

#[test]
fn staged_commands_match_all() {
    let tmp = tempfile::tempdir().unwrap();
    let (staged, whole) = (tmp.path().join("s"), tmp.path().join("w"));
    for cmd in ["simulate", "run", "eval", "render"] {
        let o = cli(&[cmd], &staged);
        assert!(o.status.success(), "{cmd}: {}", String::from_utf8_lossy(&o.stderr));
    }
    assert!(cli(&["all"], &whole).status.success());
    for f in [
        "run-1/verdicts.csv",
        "run-1/ambulatogram_raw.csv",
        "run-1/ambulatogram_filtered.csv",
        "run-1/ambulatogram_reference.csv",
        "run-1/ambulatogram_filtered.svg",
        "report.csv",
    ] {
        assert_eq!(std::fs::read(staged.join(f)).unwrap(), std::fs::read(whole.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn default_stream_removes_both_kinds_and_reports_counters() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    let o = cli(&["all"], &out);
    assert!(o.status.success());
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("100%"), "{stdout}");
    let r = json(&out.join("run-1/run_report.json"));
    assert!(r["pipeline"]["removed_static"].as_u64().unwrap() >= 1);
    assert!(r["pipeline"]["removed_acceleration"].as_u64().unwrap() >= 1);
    assert_eq!(r["topic"]["late_dropped"], 0);
    let csv = std::fs::read_to_string(out.join("report.csv")).unwrap();
    assert!(csv.lines().any(|l| l.starts_with("pooled,filtered,") && l.split(',').nth(3) == Some("1")));
}

#[test]
fn empty_stream_gives_empty_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let stream = tmp.path().join("empty.jsonl");
    std::fs::write(&stream, "").unwrap();
    let out = tmp.path().join("o");
    let o = cli(&["run", "--stream", stream.to_str().unwrap()], &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let verdicts = std::fs::read_to_string(out.join("verdicts.csv")).unwrap();
    assert_eq!(verdicts.lines().count(), 1);
    let raw = std::fs::read_to_string(out.join("ambulatogram_raw.csv")).unwrap();
    assert!(raw.lines().skip(1).all(|l| l.ends_with(",0")));
}

#[test]
fn strict_aborts_on_malformed_lines() {
    let tmp = tempfile::tempdir().unwrap();
    let stream = tmp.path().join("bad.jsonl");
    std::fs::write(&stream, "{\"sensor\":\"kinect1\"}\n").unwrap();
    let out = tmp.path().join("o");
    assert!(cli(&["run", "--stream", stream.to_str().unwrap()], &out).status.success());
    assert_eq!(json(&out.join("run_report.json"))["stream_lines_malformed"], 1);
    let o = cli(&["run", "--strict", "--stream", stream.to_str().unwrap()], &tmp.path().join("o2"));
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bin_width_mismatch_in_eval_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    assert!(cli(&["all"], &out).status.success());
    let cfg = tmp.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"pipeline": {"bin_width": 7.0}}"#).unwrap();
    let o = cli(&["eval", "--config", cfg.to_str().unwrap()], &out);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn flags_beat_environment_beat_file() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"seed": 1, "runs": 2}"#).unwrap();
    let show = |env_seed: Option<&str>, flag: Option<&str>| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_copresence"));
        c.args(["config", "--config", cfg.to_str().unwrap()]).env_remove("COPRESENCE_SEED").env_remove("COPRESENCE_RUNS");
        if let Some(s) = env_seed {
            c.env("COPRESENCE_SEED", s);
        }
        if let Some(s) = flag {
            c.args(["--seed", s]);
        }
        let v: serde_json::Value = serde_json::from_slice(&c.output().unwrap().stdout).unwrap();
        (v["seed"].as_u64().unwrap(), v["runs"].as_u64().unwrap())
    };
    assert_eq!(show(None, None), (1, 2));
    assert_eq!(show(Some("5"), None), (5, 2));
    assert_eq!(show(Some("5"), Some("9")), (9, 2));
}
