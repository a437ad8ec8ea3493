use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use navsim::formats::model;
use navsim_core::nn::ModelParams;

fn navsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_navsim")).args(args).env_remove("NAVSIM_CONFIG").output().unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn gen_map_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    for format in ["pgm", "json"] {
        let a = dir.path().join(format!("a.{format}"));
        let b = dir.path().join(format!("b.{format}"));
        for out in [&a, &b] {
            let o = navsim(&["gen-map", "--seed", "7", "--format", format, "--out", path(out)]);
            assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        }
        assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    }
    let json: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join("a.json")).unwrap()).unwrap();
    assert_eq!(json["width"], 31);
    assert_eq!(json["cells"].as_array().unwrap().len(), 31);
}

#[test]
fn gradcheck_passes() {
    let o = navsim(&["gradcheck", "--seed", "1", "--frames", "1", "--per-group", "4"]);
    assert!(o.status.success());
    let out = String::from_utf8(o.stdout).unwrap();
    let line = out.lines().find(|l| l.starts_with("max relative error")).unwrap();
    let value: f64 = line.split_whitespace().nth(3).unwrap().parse().unwrap();
    assert!(value <= 1e-4, "{line}");
}

#[test]
fn zero_model_never_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("zero.mmn1");
    let report = dir.path().join("report.json");
    model::save(&ModelParams::zeros(), &m).unwrap();
    let o = navsim(&["eval", "--model", path(&m), "--episodes", "5", "--seed", "3", "--out", path(&report)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r: serde_json::Value = serde_json::from_slice(&fs::read(&report).unwrap()).unwrap();
    assert_eq!(r["accuracy"], 0.0);
    assert_eq!(r["n_episodes"], 5);
    let episodes = r["episodes"].as_array().unwrap();
    assert!(episodes.iter().all(|e| e["status"] == "collision"));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.starts_with("Map | Accuracy | Average Time\nzero | 0% |"));
}

#[test]
fn exit_codes() {
    let o = navsim(&["gen-map", "--seed", "1", "--bogus"]);
    assert_eq!(o.status.code(), Some(2));
    let o = navsim(&["train", "--dataset", "/nonexistent/d.ild1", "--model-out", "/tmp/never.mmn1"]);
    assert_eq!(o.status.code(), Some(1));
    let stderr = String::from_utf8(o.stderr).unwrap();
    assert_eq!(stderr.lines().count(), 1, "{stderr}");
    assert!(stderr.starts_with("error:"));
}

#[test]
fn config_file_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"world": {"generator": "cave"}, "width": 21, "height": 17}"#).unwrap();
    let out = dir.path().join("m.json");
    let o = Command::new(env!("CARGO_BIN_EXE_navsim"))
        .args(["gen-map", "--seed", "2", "--format", "json", "--out", path(&out)])
        .env("NAVSIM_CONFIG", &cfg)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let json: serde_json::Value = serde_json::from_slice(&fs::read(&out).unwrap()).unwrap();
    assert_eq!((json["width"].as_u64(), json["height"].as_u64()), (Some(21), Some(17)));

    let o = navsim(&["--config", path(&cfg), "gen-map", "--seed", "2", "--width", "15", "--format", "json", "--out", path(&out)]);
    assert!(o.status.success());
    let json: serde_json::Value = serde_json::from_slice(&fs::read(&out).unwrap()).unwrap();
    assert_eq!(json["width"].as_u64(), Some(15));

    fs::write(&cfg, r#"{"world": {"width": 2}}"#).unwrap();
    let o = navsim(&["--config", path(&cfg), "gen-map", "--out", path(&out)]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn record_train_eval_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"world": {"width": 11, "height": 11, "min_goal_distance": 4, "max_steps": 300}}"#).unwrap();
    let data = dir.path().join("d.ild1");
    let m = dir.path().join("m.mmn1");
    let c = path(&cfg);
    let o = navsim(&["--config", c, "record-expert", "--maps", "2", "--seed", "4", "--out", path(&data)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let o = navsim(&["--config", c, "train", "--dataset", path(&data), "--model-out", path(&m), "--epochs", "1", "--seed", "1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let o = navsim(&["--config", c, "train", "--dataset", path(&data), "--model-in", path(&m), "--model-out", path(&m), "--epochs", "1"]);
    assert!(o.status.success());
    let o = navsim(&["--config", c, "eval", "--model", path(&m), "--episodes", "2", "--max-steps", "50"]);
    assert!(o.status.success());
    assert!(String::from_utf8(o.stdout).unwrap().lines().nth(1).unwrap().starts_with("m | "));
}
