//! End-to-end runs of the command-line front end.

use std::path::{Path, PathBuf};

use serde_json::Value;

fn rule(name: &str) -> String {
    format!("{}/rules/{name}.rule", env!("CARGO_MANIFEST_DIR"))
}

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("tilespec").chain(args.iter().copied());
    let code = tilespec::cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn run_json(args: &[&str]) -> Value {
    let mut full = vec!["--json"];
    full.extend_from_slice(args);
    let (code, out, err) = run(&full);
    assert_eq!(code, 0, "{err}");
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["schema"], "1.0.0");
    v
}

fn write_rule(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("r.rule");
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn validate_shipped_rules() {
    for entry in std::fs::read_dir(format!("{}/rules", env!("CARGO_MANIFEST_DIR"))).unwrap() {
        let path = entry.unwrap().path();
        let (code, out, err) = run(&["validate", path.to_str().unwrap()]);
        assert_eq!(code, 0, "{}: {out}{err}", path.display());
        assert!(out.ends_with(": ok\n"), "{out}");
    }
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let syntax = write_rule(dir.path(), "rule x\nkind nonsense\n");
    assert_eq!(run(&["validate", syntax.to_str().unwrap()]).0, 2);
    let collide = write_rule(
        dir.path(),
        "rule c\nkind fusion\ndim 1\nalphabet a\nlevel 1\nsuper a:\nplace a at 0\nplace a at 0\n",
    );
    assert_eq!(run(&["validate", collide.to_str().unwrap()]).0, 3);
    let missing = dir.path().join("absent.rule");
    assert_eq!(run(&["validate", missing.to_str().unwrap()]).0, 1);
    assert_eq!(run(&["no-such-command"]).0, 2);
    assert_eq!(run(&["grow"]).0, 2);
    // sequence statistics need a one-dimensional word rule
    assert_eq!(run(&["words", &rule("tm2d")]).0, 3);
    assert_eq!(run(&["--help"]).0, 0);
}

#[test]
fn grow_text() {
    let (code, out, _) = run(&["grow", &rule("tm2d"), "--level", "1"]);
    assert_eq!(code, 0);
    assert_eq!(out, "0 1\n1 0\n");
    let (_, out, _) = run(&["grow", &rule("tm2d"), "--level", "2"]);
    assert_eq!(out, "0 1 1 0\n1 0 0 1\n1 0 0 1\n0 1 1 0\n");
}

#[test]
fn words_and_matrix() {
    let (_, out, _) = run(&["words", &rule("fib"), "--length", "2"]);
    assert_eq!(out, "aa\nab\nba\ncomplexity(2) = 3\n");
    let (_, out, _) = run(&["matrix", &rule("abb")]);
    assert_eq!(out, "1 3\n2 0\nprimitive: primitive\n");
}

#[test]
fn frequencies_json() {
    let v = run_json(&["freq", &rule("abb")]);
    assert_eq!(v["frequencies"], serde_json::json!([0.6, 0.4]));
    assert_eq!(v["matrix"], serde_json::json!([[1, 3], [2, 0]]));
}

#[test]
fn analyze_fibonacci() {
    let v = run_json(&["analyze", &rule("fib")]);
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    assert!((v["perron_root"].as_f64().unwrap() - phi).abs() < 1e-12);
    assert_eq!(v["classification"], "pisot");
    assert_eq!(v["weak_mixing"], "not_weakly_mixing");
    assert_eq!(v["kind"], "inflation");
}

#[test]
fn diffract_period_two() {
    let (code, out, _) = run(&["diffract", &rule("period2"), "--weights", "a=1,b=-1", "--xi", "0.5"]);
    assert_eq!(code, 0);
    assert_eq!(out, "xi_1,intensity,window\n0.5,1.0,256\n0.5,1.0,512\n0.5,1.0,1024\n");
    assert_eq!(run(&["diffract", &rule("period2"), "--xi", "0.5,0.5"]).0, 2);
    assert_eq!(run(&["diffract", &rule("period2"), "--xi", "0.5", "--windows", "512,256,1024"]).0, 2);
}

#[test]
fn autocorrelation_is_symmetric() {
    let (code, out, _) = run(&["autocorr", &rule("tm"), "--weights", "0=1,1=-1", "--window", "64", "--max-offset", "2"]);
    assert_eq!(code, 0);
    assert_eq!(out, "z,re,im\n-2.0,-0.3125,0.0\n-1.0,-0.34375,0.0\n0.0,1.0,0.0\n1.0,-0.34375,0.0\n2.0,-0.3125,0.0\n");
}

#[test]
fn image_writes_pgm_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("tm.pgm");
    let args = [
        "--out",
        out.to_str().unwrap(),
        "image",
        &rule("tm2d"),
        "--weights",
        "0=1,1=-1",
        "--level",
        "4",
        "--grid",
        "32",
    ];
    let (code, stdout, err) = run(&args);
    assert_eq!(code, 0, "{err}");
    assert!(stdout.is_empty());
    let pgm = std::fs::read(&out).unwrap();
    assert!(pgm.starts_with(b"P5\n32 32\n255\n"));
    assert_eq!(pgm.len(), "P5\n32 32\n255\n".len() + 32 * 32);
    let csv = std::fs::read_to_string(out.with_extension("csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("xi_1,xi_2,intensity,window"));
    assert_eq!(csv.lines().count(), 1 + 32 * 32);
    // byte-identical on a rerun
    assert_eq!(run(&args).0, 0);
    assert_eq!(std::fs::read(&out).unwrap(), pgm);
    // image output has to go to a file
    assert_eq!(run(&args[2..]).0, 2);
}

#[test]
fn out_replaces_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("freq.json");
    std::fs::write(&out, "stale").unwrap();
    let (code, stdout, _) = run(&["--json", "--out", out.to_str().unwrap(), "freq", &rule("fib")]);
    assert_eq!(code, 0);
    assert!(stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["schema"], "1.0.0");
}
