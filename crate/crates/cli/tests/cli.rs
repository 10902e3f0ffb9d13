//! End-to-end runs of the command-line driver.

use std::fs;
use std::path::Path;
use std::process::Command;

fn relhyp(args: &[&str], out: &Path) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_relhyp")).args(args).arg("--out-dir").arg(out).output().expect("runs")
}

fn read_tree(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v = Vec::new();
    for e in fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.is_dir() {
            v.extend(read_tree(&p));
        } else {
            v.push((p.strip_prefix(dir).unwrap().display().to_string(), fs::read(&p).unwrap()));
        }
    }
    v.sort();
    v
}

#[test]
fn reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["horoball", "--base", "cycle:8", "--depth", "4", "--seed", "5"];
    let ra = relhyp(&args, a.path());
    let rb = relhyp(&args, b.path());
    assert!(ra.status.success(), "{}", String::from_utf8_lossy(&ra.stderr));
    assert_eq!(ra.stdout, rb.stdout);
    let (ta, tb) = (read_tree(a.path()), read_tree(b.path()));
    assert!(!ta.is_empty());
    assert_eq!(ta, tb);
}

#[test]
fn horoball_dump_lists_edges() {
    let d = tempfile::tempdir().unwrap();
    let r = relhyp(&["horoball", "--base", "path:3", "--depth", "1", "--dump"], d.path());
    assert!(r.status.success());
    let text = String::from_utf8(r.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "base 3");
    assert!(lines.contains(&"base 0 1"));
    assert!(lines.iter().any(|l| l.ends_with("vertical")));
    assert!(lines.iter().any(|l| l.ends_with("horizontal")));
}

#[test]
fn spherical_filling_reports_finite_order() {
    let d = tempfile::tempdir().unwrap();
    let r = relhyp(&["fill", "--slopes", "2,3,5"], d.path());
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let text = String::from_utf8(r.stdout).unwrap();
    assert!(text.contains("finite, order 60"), "{text}");
    let summary = fs::read_to_string(d.path().join("fill").join("summary.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&summary).unwrap();
    assert_eq!(v["passed"], true);
}

#[test]
fn bad_input_exits_with_error_code() {
    let d = tempfile::tempdir().unwrap();
    let r = relhyp(&["horoball", "--base", "torus:3"], d.path());
    assert_eq!(r.status.code(), Some(2));
}
