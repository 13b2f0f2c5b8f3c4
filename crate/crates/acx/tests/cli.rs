use std::path::Path;
use std::process::Command;

use serde_json::Value;

const ALL: &[&[&str]] = &[
    &["solve-stationary", "--v", "0.6,0.8i"],
    &["check-structure"],
    &["lift-verify"],
    &["variations", "--v", "0.6,0.8i"],
    &["ma-report", "--u", "log_tau0"],
    &["ma-report", "--u", "tau0"],
    &["green-check"],
    &["example58"],
];

fn acx(dir: &Path, config: Option<&str>, args: &[&str], threads: Option<&str>) -> (i32, String) {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_acx"));
    cmd.arg("--out").arg(dir.join("out"));
    if let Some(text) = config {
        let p = dir.join("config.json");
        std::fs::write(&p, text).unwrap();
        cmd.arg("--config").arg(p);
    }
    cmd.args(args);
    match threads {
        Some(t) => cmd.env("ACX_THREADS", t),
        None => cmd.env_remove("ACX_THREADS"),
    };
    let out = cmd.output().unwrap();
    (out.status.code().unwrap(), String::from_utf8_lossy(&out.stderr).into_owned())
}

fn report(dir: &Path, command: &str) -> Value {
    let text = std::fs::read_to_string(dir.join("out").join(format!("{command}.json"))).unwrap();
    serde_json::from_str(&text).unwrap()
}

#[test]
fn standard_run_passes_and_writes_reports() {
    for args in ALL {
        let dir = tempfile::tempdir().unwrap();
        let (code, err) = acx(dir.path(), None, args, Some("2"));
        let r = report(dir.path(), args[0]);
        assert_eq!(r["schema"], 1);
        assert_eq!(r["command"], args[0]);
        assert_eq!(r["config_hash"].as_str().unwrap().len(), 64);
        let checks = r["checks"].as_array().unwrap();
        assert!(!checks.is_empty());
        assert!(checks.iter().all(|c| c["tag"].as_str().is_some_and(|t| !t.is_empty())));
        let want = if checks.iter().all(|c| c["pass"] == true) { 0 } else { 1 };
        assert_eq!(code, want, "{args:?}: {err}");
        // The shell example is not plurisubharmonic, which the report must flag.
        assert_eq!(code == 1, args[0] == "example58", "{args:?}");
        for entry in std::fs::read_dir(dir.path().join("out")).unwrap() {
            let p = entry.unwrap().path();
            if p.extension().is_some_and(|e| e == "csv") {
                let text = std::fs::read_to_string(&p).unwrap();
                let header = text.lines().next().unwrap();
                assert!(header.ends_with("quantity,value,tolerance,pass"), "{}: {header}", p.display());
                assert!(text.lines().count() > 1);
            }
        }
    }
}

#[test]
fn floats_carry_seventeen_significant_digits() {
    let dir = tempfile::tempdir().unwrap();
    acx(dir.path(), None, &["check-structure"], None);
    let text = std::fs::read_to_string(dir.path().join("out/check-structure.json")).unwrap();
    let r: Value = serde_json::from_str(&text).unwrap();
    let v = r["checks"][0]["value"].as_f64().unwrap();
    assert_eq!(r["checks"][0]["value"].to_string().parse::<f64>().unwrap(), v);
    let digits = |s: &str| s.chars().take_while(|c| *c != 'e').filter(|c| c.is_ascii_digit()).collect::<String>().trim_start_matches('0').len();
    let csv = std::fs::read_dir(dir.path().join("out"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .find(|p| p.extension().is_some_and(|e| e == "csv"))
        .unwrap();
    let text = std::fs::read_to_string(csv).unwrap();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    let value = row[row.len() - 3];
    assert!(digits(value) == 17 || value.parse::<f64>().unwrap() == 0.0, "{value}");
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let (code, err) = acx(dir.path(), Some("{\"structure\":{\"family\":\"bump\",\"epsilon\":3.0}}"), &["check-structure"], None);
    assert_eq!(code, 2);
    let e: Value = serde_json::from_str(err.lines().next().unwrap()).unwrap();
    assert_eq!(e["error"]["kind"], "config");
    assert_eq!(report(dir.path(), "check-structure")["status"], "error");
    let (code, _) = acx(dir.path(), Some("{\"bogus\": 1}"), &["check-structure"], None);
    assert_eq!(code, 2);
    let (code, _) = acx(dir.path(), None, &["check-structure"], Some("0"));
    assert_eq!(code, 2);
    let (code, _) = acx(dir.path(), None, &["solve-stationary", "--v", "1,2,3"], None);
    assert_eq!(code, 2);
    let (code, _) = acx(dir.path(), None, &["solve-stationary", "--v", "0,0"], None);
    assert_eq!(code, 2);
}

#[test]
fn degenerate_disk_is_an_assembly_error() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _) = acx(dir.path(), Some("{\"structure\":{\"family\":\"radial_h\"}}"), &["solve-stationary", "--v", "1,0"], None);
    assert_eq!(code, 2);
}

#[test]
fn deformed_structure_fails_checks() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _) = acx(dir.path(), Some("{\"structure\":{\"family\":\"radial_h\"}}"), &["green-check"], None);
    assert_eq!(code, 1);
    let r = report(dir.path(), "green-check");
    assert_eq!(r["status"], "fail");
    assert!(r["checks"].as_array().unwrap().iter().any(|c| c["pass"] == false && c["tag"] == "green-function"));
}

#[test]
fn config_hash_tracks_content() {
    let dir = tempfile::tempdir().unwrap();
    acx(dir.path(), Some("{\"seed\": 3}"), &["check-structure"], None);
    let a = report(dir.path(), "check-structure")["config_hash"].clone();
    acx(dir.path(), Some("{\"seed\": 3}"), &["check-structure"], None);
    let b = report(dir.path(), "check-structure")["config_hash"].clone();
    acx(dir.path(), Some("{\"seed\": 4}"), &["check-structure"], None);
    let c = report(dir.path(), "check-structure")["config_hash"].clone();
    assert_eq!(a, b);
    assert_ne!(a, c);
}
