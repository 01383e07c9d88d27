use std::path::PathBuf;
use std::process::{Command, Output};

fn padyn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_padyn"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn spec_path(name: &str) -> String {
    let mut p = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    p.push("../../specs");
    p.push(name);
    p.to_string_lossy().into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn check_odometer_passes() {
    let o = padyn(&["check", &spec_path("odometer.tf"), "--max-level", "6"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.matches("verdict: pass-up-to-6").count(), 3, "{text}");
}

#[test]
fn check_doubling_fails_at_one() {
    let o = padyn(&["check", &spec_path("doubling.tf"), "--max-level", "4"]);
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    assert!(text.contains("certificate: bijective"));
    assert!(text.contains("rung.1: fail collision"));
    assert!(text.contains("verdict: fail-at-1"));
}

#[test]
fn malformed_spec_exits_two_with_position() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.tf");
    std::fs::write(&path, "p=3 k=1; f0 = x0 xor 1\n").unwrap();
    let o = padyn(&["check", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains(":1:18:"), "{}", stderr(&o));

    std::fs::write(&path, "p=2 k=1; f0 = x0 >> 1\n").unwrap();
    let o = padyn(&["check", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));

    let o = padyn(&["check", "does-not-exist.tf"]);
    assert_eq!(o.status.code(), Some(2));
    let o = padyn(&["check", "fixture:nope"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn oversized_state_space_exits_three() {
    let o = padyn(&[
        "check",
        "fixture:interleaved-odometer-2-3",
        "--max-level",
        "9",
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("2^24"));
}

#[test]
fn convert_identity_and_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("g.tbl");
    let o = padyn(&[
        "convert",
        "fixture:interleaved-odometer-2-2",
        "--target",
        &spec_path("odometer.tf"),
        "--max-level",
        "4",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("permutation: P: 1 2 3 4"));
    assert!(text.contains("verdict: pass"));

    // The lift of the identity twist is x + 1 at every level.
    let tables = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = tables.lines().collect();
    assert_eq!(lines.len(), 16);
    for (level, pair) in lines.chunks(2).enumerate() {
        assert_eq!(pair[0], format!("2 1 {}", level + 1));
        let size = 1u64 << (level + 1);
        let images: Vec<u64> = pair[1]
            .split_whitespace()
            .map(|w| w.parse().unwrap())
            .collect();
        let expected: Vec<u64> = (0..size).map(|i| (i + 1) % size).collect();
        assert_eq!(images, expected);
    }

    let o = padyn(&["check", &format!("table:{}", out.display())]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn convert_nontrivial_twist() {
    let o = padyn(&[
        "convert",
        "fixture:interleaved-odometer-2-2",
        "--target",
        &spec_path("plus-three.tf"),
        "--max-level",
        "4",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("permutation: P: 3 4 1 2"));
}

#[test]
fn convert_reports_joint_failure() {
    let o = padyn(&[
        "convert",
        &spec_path("swap-shift.tf"),
        "--target",
        &spec_path("odometer.tf"),
        "--max-level",
        "3",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("check.transfer.2: F mod p^2 fail, G mod p^4 fail, agree"));
    assert!(text.contains("ergodic: F fail-at-2, G fail-at-4"));
}

#[test]
fn convert_precondition_failure() {
    let o = padyn(&[
        "convert",
        "fixture:coordinate-shift-2-2-2",
        "--target",
        &spec_path("odometer.tf"),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("verdict: fail-at-1"));
    assert!(stderr(&o).contains("transitive modulo p"));
}

#[test]
fn orbit_listing() {
    let o = padyn(&[
        "orbit",
        &spec_path("odometer.tf"),
        "--level",
        "2",
        "--steps",
        "4",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let expected = "0 2^2:00 base=2^2:00 j=0\n\
                    1 2^2:01 base=2^2:00 j=1\n\
                    2 2^2:10 base=2^2:00 j=2\n\
                    3 2^2:11 base=2^2:00 j=3\n";
    assert_eq!(stdout(&o), expected);
}

#[test]
fn full_orbit_lists_every_state_once() {
    let o = padyn(&[
        "orbit",
        "fixture:interleaved-affine-2-2",
        "--level",
        "3",
        "--steps",
        "64",
    ]);
    let text = stdout(&o);
    let mut states: Vec<&str> = text.lines().map(|l| l.split(' ').nth(1).unwrap()).collect();
    assert_eq!(states.len(), 64);
    states.sort();
    states.dedup();
    assert_eq!(states.len(), 64);
}

#[test]
fn orbit_from_nonzero_residue() {
    let o = padyn(&[
        "orbit",
        &spec_path("odometer.tf"),
        "--start",
        "2^4:0111",
        "--level",
        "4",
        "--steps",
        "2",
        "--twist-k",
        "2",
    ]);
    assert_eq!(
        stdout(&o),
        "0 2^4:0111 base=2^4:0100 j=3\n1 2^4:1000 base=2^4:1000 j=0\n"
    );
}

#[test]
fn keystream_balance() {
    let o = padyn(&[
        "keystream",
        &spec_path("odometer.tf"),
        "--level",
        "3",
        "--out-digits",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("0\n1\n0\n1\n"));
    assert!(text.contains("counts.x0: 0=4 1=4"));
    assert!(text.contains("balanced: yes"));

    let o = padyn(&[
        "keystream",
        "fixture:interleaved-odometer-2-2",
        "--level",
        "2",
        "--out-digits",
        "2",
    ]);
    let text = stdout(&o);
    assert!(text.contains("period: 16"));
    assert!(text.contains("counts.x0: 00=4 01=4 10=4 11=4"));
    assert!(text.contains("counts.x1: 00=4 01=4 10=4 11=4"));

    let o = padyn(&[
        "keystream",
        &spec_path("plus-two.tf"),
        "--level",
        "3",
        "--words",
        "0",
    ]);
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    assert!(text.contains("cycle: 4"));
    assert!(text.contains("balanced: no"));
}

#[test]
fn reports_are_deterministic() {
    let args = [
        "convert",
        "fixture:interleaved-affine-2-2",
        "--target",
        "fixture:affine-2",
        "--max-level",
        "4",
    ];
    assert_eq!(padyn(&args).stdout, padyn(&args).stdout);
}
