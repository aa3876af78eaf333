use std::ffi::{CStr, CString};
use std::process::Command;
use std::ptr;

use tilespec_ffi::*;

const FIB: &str = "rule fib\nkind symbolic\ndim 1\nalphabet a b\nmap a -> a b\nmap b -> a\n";
const TM: &str = "rule tm\nkind symbolic\ndim 1\nalphabet 0 1\nmap 0 -> 0 1\nmap 1 -> 1 0\n";

fn parse(text: &str) -> *mut TsRule {
    let c = CString::new(text).unwrap();
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { ts_rule_parse(c.as_ptr(), &mut h) }, TsStatus::Ok);
    assert!(!h.is_null());
    h
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(ts_last_error()) }.to_string_lossy().into_owned()
}

#[test]
fn parse_and_query() {
    let h = parse(FIB);
    let mut m = 0usize;
    assert_eq!(unsafe { ts_rule_alphabet_len(h, &mut m) }, TsStatus::Ok);
    assert_eq!(m, 2);
    let (mut ok, mut n) = (false, 99usize);
    assert_eq!(unsafe { ts_rule_validate(h, &mut ok, &mut n) }, TsStatus::Ok);
    assert!(ok);
    assert_eq!(n, 0);
    let mut theta = 0.0;
    assert_eq!(unsafe { ts_perron_root(h, &mut theta) }, TsStatus::Ok);
    assert!((theta - (1.0 + 5f64.sqrt()) / 2.0).abs() < 1e-12);
    unsafe { ts_rule_free(h) };
}

#[test]
fn superword_two_call() {
    let h = parse(TM);
    let mut len = 0usize;
    assert_eq!(unsafe { ts_superword(h, 0, 3, ptr::null_mut(), 0, &mut len) }, TsStatus::Ok);
    assert_eq!(len, 8);
    let mut small = vec![0u32; 4];
    assert_eq!(unsafe { ts_superword(h, 0, 3, small.as_mut_ptr(), 4, &mut len) }, TsStatus::BufferTooSmall);
    assert!(last_error().contains("need 8"));
    let mut buf = vec![0u32; len];
    assert_eq!(unsafe { ts_superword(h, 0, 3, buf.as_mut_ptr(), len, &mut len) }, TsStatus::Ok);
    assert_eq!(buf, vec![0, 1, 1, 0, 1, 0, 0, 1]);
    assert_eq!(last_error(), "");
    unsafe { ts_rule_free(h) };
}

#[test]
fn frequencies_and_report() {
    let h = parse(TM);
    let mut f = [0.0f64; 2];
    let mut len = 0;
    assert_eq!(unsafe { ts_letter_frequencies(h, f.as_mut_ptr(), 2, &mut len) }, TsStatus::Ok);
    assert_eq!(f, [0.5, 0.5]);
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { ts_spectral_report_json(h, &mut s) }, TsStatus::Ok);
    let json: serde_json::Value = serde_json::from_str(unsafe { CStr::from_ptr(s) }.to_str().unwrap()).unwrap();
    assert_eq!(json["schema"], "1.0.0");
    assert_eq!(json["classification"], "integer");
    unsafe { ts_string_free(s) };
    unsafe { ts_rule_free(h) };
}

#[test]
fn errors_are_reported() {
    let bad = CString::new("rule x\nkind nope\n").unwrap();
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { ts_rule_parse(bad.as_ptr(), &mut h) }, TsStatus::ParseError);
    assert!(h.is_null());
    assert!(last_error().contains("line 2"));
    assert_eq!(unsafe { ts_rule_parse(ptr::null(), &mut h) }, TsStatus::NullPointer);
    let mut m = 0;
    assert_eq!(unsafe { ts_rule_alphabet_len(ptr::null(), &mut m) }, TsStatus::NullPointer);
    let h = parse(FIB);
    let mut len = 0;
    assert_eq!(unsafe { ts_superword(h, 7, 1, ptr::null_mut(), 0, &mut len) }, TsStatus::SemanticError);
    assert_eq!(unsafe { ts_superword(h, 0, 200, ptr::null_mut(), 0, &mut len) }, TsStatus::RuntimeError);
    unsafe { ts_rule_free(h) };
    unsafe { ts_rule_free(ptr::null_mut()) };
    unsafe { ts_string_free(ptr::null_mut()) };
}

#[test]
fn invalid_utf8() {
    let bytes = [0xffu8, 0xfe, 0];
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { ts_rule_parse(bytes.as_ptr().cast(), &mut h) }, TsStatus::InvalidUtf8);
}

/// Compiles `tests/smoke.c` against the generated header and static library.
#[test]
fn c_program_links_and_runs() {
    let Ok(cc) = which_cc() else {
        eprintln!("no C compiler found, skipping");
        return;
    };
    let root = std::path::Path::new(env!("CARGO_MANIFEST_DIR"));
    let exe = std::env::current_exe().unwrap();
    let target_dir = exe.parent().unwrap().parent().unwrap();
    let lib = target_dir.join("libtilespec_ffi.a");
    assert!(lib.exists(), "static library missing at {}", lib.display());
    let out = std::path::PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("smoke");
    let status = Command::new(&cc)
        .arg(root.join("tests/smoke.c"))
        .arg("-I")
        .arg(root.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let run = Command::new(&out).output().unwrap();
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    assert_eq!(String::from_utf8_lossy(&run.stdout), "len 8: 0 1 1 0 1 0 0 1\nschema 1.0.0\n");
}

fn which_cc() -> Result<String, ()> {
    for cc in ["cc", "gcc", "clang"] {
        if Command::new(cc).arg("--version").output().is_ok_and(|o| o.status.success()) {
            return Ok(cc.to_string());
        }
    }
    Err(())
}
