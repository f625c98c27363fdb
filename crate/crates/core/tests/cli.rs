use std::path::PathBuf;
use std::process::{Command, Output};

fn problems() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../problems")
}

fn ivopt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ivopt")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn descend_then_check_passes_elu() {
    let ex = problems().join("example31.ivp");
    let ex = ex.to_str().unwrap();
    let o = ivopt(&["descend", "--problem", ex, "--point", "2,2", "--eps", "0.1,0.1"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let result = out.lines().find_map(|l| l.strip_prefix("result: (")).unwrap().trim_end_matches(')').replace(' ', "");
    let o = ivopt(&["check", "--problem", ex, "--kind", "elu", "--eps", "0.1,0.1", "--point", &result]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let o = ivopt(&["check", "--problem", ex, "--kind", "wlu", "--point", &result]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn input_errors_exit_two_on_stderr() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.ivp");
    std::fs::write(&bad, "[problem]\nn = 1\n[objective]\nlower = \"x1 +* 2\"\nupper = \"x1\"\n").unwrap();
    let o = ivopt(&["check", "--problem", bad.to_str().unwrap(), "--kind", "lu", "--point", "0", "--samples", "grid:0,1,4"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("parse error at line 4, column"), "{err}");
    assert!(o.stdout.is_empty());

    let quad = problems().join("quad1d.ivp");
    let quad = quad.to_str().unwrap();
    for args in [
        vec!["check", "--problem", "/nonexistent.ivp", "--kind", "lu", "--point", "1"],
        vec!["check", "--problem", quad, "--kind", "lu", "--point", "1,2"],
        vec!["check", "--problem", quad, "--kind", "lu", "--point", "1", "--samples", "grid:1,0,4"],
        vec!["descend", "--problem", quad, "--point", "1", "--eps", "0,0"],
        vec!["ekeland", "--problem", quad, "--point", "1", "--eps", "0,1"],
        vec!["scalarize", "--problem", quad, "--mu-l", "1.5"],
        vec!["frobnicate"],
    ] {
        assert_eq!(ivopt(&args).status.code(), Some(2), "{args:?}");
    }
    assert_eq!(ivopt(&["--help"]).status.code(), Some(0));
}

#[test]
fn out_flag_writes_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.txt");
    let quad = problems().join("quad1d.ivp");
    let o = ivopt(&["oracle", "--problem", quad.to_str().unwrap(), "--point", "1", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.contains("\"(1)\",1,1,1,1,1,1"), "{text}");
    assert!(text.contains("result: CONSISTENT"));
}

#[test]
fn frontier_csv_shape() {
    let quad = problems().join("quad1d.ivp");
    let o = ivopt(&["frontier", "--problem", quad.to_str().unwrap(), "--weights", "10"]);
    assert_eq!(o.status.code(), Some(0));
    let csv = stdout(&o);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "muL,x1,fL,fU,gap");
    assert_eq!(lines.len(), 12);
    assert!(lines[1].starts_with("0,1,1,2,"));
    assert!(lines[11].starts_with("1,1,1,2,"));
}

#[test]
fn kkt_reports_assumption_flags() {
    let quad = problems().join("quad1d.ivp");
    let quad = quad.to_str().unwrap();
    let out = stdout(&ivopt(&["kkt", "--problem", quad, "--point", "1", "--assume-slater"]));
    assert!(out.contains("Slater: assumed"));
    assert!(out.contains("closedness condition: not asserted"));
    let out = stdout(&ivopt(&["kkt", "--problem", quad, "--point", "1"]));
    assert!(out.contains("Slater: witness"), "{out}");
    let ex = problems().join("example31.ivp");
    let o = ivopt(&["kkt", "--problem", ex.to_str().unwrap(), "--point", "1,1"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("not applicable: expression is not certified convex"), "{err}");
}
