use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn gptd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gptd"))
        .args(args)
        .env_remove("GPTD_SEED")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// Real two-level states `a2 = (sqrt(1-x), sqrt(x))` against `|0>`, same for B.
fn write_states(dir: &Path, name: &str, x: f64, y: f64) -> PathBuf {
    let path = dir.join(name);
    let text = format!(
        r#"{{"dA":2,"dB":2,"a1":[[1,0],[0,0]],"b1":[[1,0],[0,0]],"a2":[[{},0],[{},0]],"b2":[[{},0],[{},0]]}}"#,
        x.sqrt(),
        (1.0 - x).sqrt(),
        y.sqrt(),
        (1.0 - y).sqrt()
    );
    std::fs::write(&path, text).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn discriminate_exit_codes() {
    let dir = TempDir::new().unwrap();
    let orth = write_states(dir.path(), "orth.json", 0.0, 0.7);
    assert_eq!(code(&gptd(&["discriminate", s(&orth), "--class", "ms", "--s", "0"])), 0);
    let half = write_states(dir.path(), "half.json", 0.5, 0.5);
    assert_eq!(code(&gptd(&["discriminate", s(&half), "--class", "ms", "--s", "0.25"])), 2);
    let small = write_states(dir.path(), "small.json", 0.04, 0.04);
    assert_eq!(code(&gptd(&["discriminate", s(&small), "--class", "mks", "--t", "0.25"])), 0);
}

#[test]
fn discriminate_output_is_stable_json() {
    let dir = TempDir::new().unwrap();
    let states = write_states(dir.path(), "st.json", 0.2, 0.3);
    let out = dir.path().join("r.json");
    let run = || gptd(&["discriminate", s(&states), "--class", "mks", "--t", "1", "--out", s(&out)]);
    assert_eq!(code(&run()), 0);
    let first = std::fs::read(&out).unwrap();
    assert_eq!(code(&run()), 0);
    assert_eq!(first, std::fs::read(&out).unwrap());
    let v: serde_json::Value = serde_json::from_slice(&first).unwrap();
    assert_eq!(v["metadata"]["command"], "discriminate");
    assert_eq!(v["result"]["guaranteed"], true);
    assert_eq!(v["result"]["class"]["class"], "mks");
    assert!((v["result"]["class"]["s"].as_f64().unwrap() - 0.5).abs() < 1e-15);
}

#[test]
fn verify_round_trips_discriminate_output() {
    let dir = TempDir::new().unwrap();
    let states = write_states(dir.path(), "half.json", 0.5, 0.5);
    let out = dir.path().join("m.json");
    assert_eq!(
        code(&gptd(&["discriminate", s(&states), "--class", "ms", "--s", "0.5", "--out", s(&out)])),
        0
    );
    let ok = gptd(&["verify", "--measurement", s(&out), "--states", s(&states), "--class", "ms", "--s", "0.5"]);
    assert_eq!(code(&ok), 0, "{}", stdout(&ok));
    assert!(stdout(&ok).contains("overall: pass"));
    let strict = gptd(&["verify", "--measurement", s(&out), "--states", s(&states), "--class", "ms", "--s", "0.4"]);
    assert_eq!(code(&strict), 4);
    assert!(stdout(&strict).contains("(ii) cone: FAIL"));

    // The bare certificate is accepted too.
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    let cert = dir.path().join("cert.json");
    std::fs::write(&cert, v["result"]["certificate"].to_string()).unwrap();
    let bare = gptd(&["verify", "--measurement", s(&cert), "--states", s(&states), "--class", "ms", "--s", "0.5"]);
    assert_eq!(code(&bare), 0);

    let text = std::fs::read_to_string(&out).unwrap();
    let truncated = dir.path().join("t.json");
    std::fs::write(&truncated, &text[..text.len() / 2]).unwrap();
    let bad = gptd(&["verify", "--measurement", s(&truncated), "--states", s(&states), "--class", "ms", "--s", "0.5"]);
    assert_eq!(code(&bad), 1);
}

#[test]
fn verify_rejects_wrong_states() {
    let dir = TempDir::new().unwrap();
    let states = write_states(dir.path(), "a.json", 0.5, 0.5);
    let other = write_states(dir.path(), "b.json", 0.3, 0.5);
    let out = dir.path().join("m.json");
    gptd(&["discriminate", s(&states), "--class", "ms", "--s", "0.5", "--out", s(&out)]);
    let r = gptd(&["verify", "--measurement", s(&out), "--states", s(&other), "--class", "ms", "--s", "0.5"]);
    assert_eq!(code(&r), 4);
    assert!(stdout(&r).contains("(iii) zero-error: FAIL"));
}

#[test]
fn min_copies_output() {
    let r = gptd(&["min-copies", "--overlap", "0.5", "--class", "ms", "--s", "0.5"]);
    assert_eq!(code(&r), 0);
    assert_eq!(stdout(&r), "n=1, total=2\n");
    assert_eq!(code(&gptd(&["min-copies", "--overlap", "0.5", "--class", "ms", "--s", "0"])), 3);
    let r = gptd(&["min-copies", "--overlap", "0.9", "--class", "mks", "--t", "0.25"]);
    assert_eq!(stdout(&r), "n=11, total=22\n");
    assert_eq!(code(&gptd(&["min-copies", "--overlap", "1", "--class", "ms", "--s", "0.5"])), 1);
    let capped = gptd(&["min-copies", "--overlap", "0.9", "--class", "ms", "--s", "0.25", "--cap", "5"]);
    assert_eq!(code(&capped), 1);
}

#[test]
fn region_csv() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("r.csv");
    assert_eq!(
        code(&gptd(&["region", "--class", "ms", "--s", "0.5", "--grid", "3", "--out", s(&out)])),
        0
    );
    assert_eq!(
        std::fs::read_to_string(&out).unwrap(),
        "x,y_boundary,class,param\n0,1,ms,0.5\n0.5,0.5,ms,0.5\n1,0,ms,0.5\n"
    );
    let r = gptd(&["region", "--class", "ms", "--s", "0", "--grid", "3"]);
    assert_eq!(stdout(&r), "x,y_boundary,class,param\n0,1,ms,0\n0.5,0,ms,0\n1,0,ms,0\n");
    let r = gptd(&["region", "--class", "mks", "--t", "0.25", "--grid", "2"]);
    assert!(stdout(&r).lines().nth(1).unwrap().ends_with(",mks,0.4"));
    assert_eq!(code(&gptd(&["region", "--class", "ms", "--s", "0.5", "--grid", "1"])), 1);
    let missing = dir.path().join("no/such/dir/r.csv");
    assert_eq!(code(&gptd(&["region", "--class", "ms", "--s", "0.5", "--out", s(&missing)])), 1);
}

#[test]
fn class_flags_are_checked() {
    let dir = TempDir::new().unwrap();
    let states = write_states(dir.path(), "st.json", 0.2, 0.2);
    assert_eq!(code(&gptd(&["discriminate", s(&states), "--class", "ms", "--t", "0.5"])), 1);
    assert_eq!(code(&gptd(&["discriminate", s(&states), "--class", "mks", "--s", "0.5"])), 1);
    assert_eq!(code(&gptd(&["discriminate", s(&states), "--class", "ms", "--s", "0.7"])), 1);
    assert_eq!(code(&gptd(&["discriminate", s(&states), "--class", "ms"])), 1);
    assert_eq!(code(&gptd(&["nonsense"])), 1);
}

#[test]
fn audit_contract() {
    let a = gptd(&["audit", "--count", "1", "--seed", "7"]);
    let b = gptd(&["audit", "--count", "1", "--seed", "7"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(stdout(&a).lines().count(), 1);
    assert_eq!(code(&gptd(&["audit", "--count", "0"])), 1);
    let via_env = Command::new(env!("CARGO_BIN_EXE_gptd"))
        .args(["audit", "--count", "1"])
        .env("GPTD_SEED", "7")
        .output()
        .unwrap();
    assert_eq!(via_env.stdout, a.stdout);
}
