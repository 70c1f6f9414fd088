use std::path::{Path, PathBuf};
use std::process::Command;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn doxa(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_doxa")).args(args).output().expect("binary runs");
    (out.status.code().expect("exit code"), String::from_utf8(out.stdout).expect("utf-8 report"))
}

fn path(name: &str) -> String {
    fixture(name).to_string_lossy().into_owned()
}

fn value<'a>(report: &'a str, key: &str) -> Option<&'a str> {
    report.lines().find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix(": ")))
}

#[test]
fn validate_shipped_bundles() {
    for b in ["running.bundle", "perm.bundle", "coarse.bundle", "pu.bundle", "accel_rain.bundle", "accel_dry.bundle"] {
        let (code, out) = doxa(&["validate", &path(b)]);
        assert_eq!(code, 0, "{b}: {out}");
        assert_eq!(value(&out, "verdict"), Some("yes"));
    }
}

#[test]
fn validate_reports_dangling_and_missing() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.bundle");
    std::fs::write(&empty, "# nothing\n").unwrap();
    let (code, out) = doxa(&["validate", &empty.to_string_lossy()]);
    assert_eq!(code, 3);
    assert!(out.contains("missing `world` entry") && out.contains("missing `goals` entry"), "{out}");

    for f in ["design.world", "goals.txt", "beliefs.cat", "kappa_prime.kb", "ws.world", "wh.world"] {
        std::fs::copy(fixture(f), dir.path().join(f)).unwrap();
    }
    std::fs::write(dir.path().join("bad.form"), "observe xe ye undef bp rp\nrule .* -> B77\n").unwrap();
    std::fs::write(
        dir.path().join("bad.bundle"),
        "world design.world\ngoals goals.txt\nknowledge kappa_prime.kb\ncatalog beliefs.cat\nformation bad.form\n",
    )
    .unwrap();
    let (code, out) = doxa(&["validate", &dir.path().join("bad.bundle").to_string_lossy()]);
    assert_eq!(code, 1, "{out}");
    assert!(out.contains("B77"), "{out}");

    std::fs::write(dir.path().join("broken.bundle"), "world design.world\ngoals nowhere.txt\n").unwrap();
    let (code, out) = doxa(&["validate", &dir.path().join("broken.bundle").to_string_lossy()]);
    assert_eq!(code, 3);
    assert!(out.contains("nowhere.txt"), "{out}");
}

#[test]
fn synth_autonomous_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let (code, out) =
        doxa(&["analyze", "synth-autonomous", &path("running.bundle"), "--out", &out_dir.to_string_lossy()]);
    assert_eq!(code, 0, "{out}");
    assert_eq!(value(&out, "consistent"), Some("yes"));
    let formation = std::fs::read_to_string(out_dir.join("formation.txt")).unwrap();
    doxa::io::parse_formation(&formation).unwrap();
    let strategy = std::fs::read_to_string(out_dir.join("strategy.txt")).unwrap();
    doxa::io::parse_strategy(&strategy).unwrap();
    assert_eq!(std::fs::read_to_string(out_dir.join("report.txt")).unwrap(), out);
}

#[test]
fn conserve_autonomous_fails_with_witness() {
    let (code, out) = doxa(&["analyze", "conserve-autonomous", &path("perm.bundle")]);
    assert_eq!(code, 1, "{out}");
    assert!(value(&out, "witness-stem").unwrap().contains("s4"), "{out}");
}

#[test]
fn simulate_runs_scripts() {
    let (code, out) = doxa(&["analyze", "simulate", &path("running.bundle"), "--env", "slow"]);
    assert_eq!(code, 0, "{out}");
    assert_eq!(value(&out, "violations"), Some("none"));
    let (code, out) = doxa(&["analyze", "simulate", &path("running.bundle"), "--env", "hasty.env"]);
    assert_eq!(code, 0, "{out}");
    let (code, _) = doxa(&["analyze", "simulate", &path("running.bundle")]);
    assert_eq!(code, 3);
}

#[test]
fn relevance_of_observations() {
    let (code, out) =
        doxa(&["analyze", "relevance", &path("accel_dry.bundle"), "--observe", "v,t", "--pool", "pos,v,t"]);
    assert_eq!(code, 1, "{out}");
    assert_eq!(value(&out, "weakly-relevant"), Some("yes"));
    assert_eq!(value(&out, "alternative"), Some("O={pos,t} B={Bhi,Blo} |K|=7"));
    let (code, out) = doxa(&["analyze", "weak-relevance", &path("accel_rain.bundle"), "--lattice", "frontier"]);
    assert_eq!(code, 1, "{out}");
}

#[test]
fn reports_are_deterministic() {
    for q in ["dominance", "best-actions", "conserve-doxastic", "weak-relevance"] {
        let a = doxa(&["analyze", q, &path("running.bundle")]);
        let b = doxa(&["analyze", q, &path("running.bundle")]);
        assert_eq!(a, b, "{q}");
    }
}

#[test]
fn convert_emits_json() {
    let (code, out) = doxa(&["convert", &path("coarse.bundle")]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["formation"]["rules"].as_array().unwrap().len(), 4);
}

#[test]
fn unknown_question_is_rejected() {
    let out = Command::new(env!("CARGO_BIN_EXE_doxa")).args(["analyze", "nope", "x"]).output().unwrap();
    assert!(!out.status.success());
}
