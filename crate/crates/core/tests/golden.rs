//! Pinned CLI output for every shipped rule. Regenerate with
//! `TILESPEC_UPDATE_GOLDEN=1 cargo test --test golden`.

use std::path::PathBuf;

fn run(args: &[&str]) -> Vec<u8> {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("tilespec").chain(args.iter().copied());
    let code = tilespec::cli::run(argv, &mut out, &mut err);
    assert_eq!(code, 0, "{args:?}: {}", String::from_utf8_lossy(&err));
    out
}

fn check(name: &str, actual: &[u8]) -> Result<(), String> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    if std::env::var_os("TILESPEC_UPDATE_GOLDEN").is_some() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, actual).unwrap();
        return Ok(());
    }
    let expected = std::fs::read(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    if expected == actual {
        Ok(())
    } else {
        Err(format!("{name} differs from {}", path.display()))
    }
}

#[test]
fn shipped_rules_match_golden_output() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("rules");
    let mut rules: Vec<PathBuf> = std::fs::read_dir(&dir).unwrap().map(|e| e.unwrap().path()).collect();
    rules.sort();
    let mut failures = Vec::new();
    for path in &rules {
        let stem = path.file_stem().unwrap().to_str().unwrap();
        let p = path.to_str().unwrap();
        let cases = [
            (format!("{stem}.analyze.json"), run(&["--json", "analyze", p])),
            (format!("{stem}.grow.txt"), run(&["grow", p, "--level", "3"])),
            (format!("{stem}.canonical.rule"), {
                let text = std::fs::read_to_string(path).unwrap();
                tilespec::rulespec::parse_rule_file(&text).unwrap().to_canonical_string().into_bytes()
            }),
        ];
        for (name, bytes) in cases {
            if let Err(e) = check(&name, &bytes) {
                failures.push(e);
            }
        }
    }
    assert!(failures.is_empty(), "{failures:#?}");
}
