//! Drives the compiled binary.

use std::process::{Command, Output};

fn commlab(args: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_commlab"))
        .args(args.split_whitespace())
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn run_reports_output_and_bits() {
    let o = commlab("run pp-canonical --m 2 --n 2 --x 1,2 --y 2,1");
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "OUTPUT 1\nBITS 4\n");

    let o = commlab("run ossi-canonical --m 1 --n 2 --x 1,1 --y 1,0 --c 2");
    assert_eq!(stdout(&o), "OUTPUT 0\nBITS 2\n");
}

#[test]
fn run_shows_transcript() {
    let o = commlab("run pp-via-ossi --m 2 --n 2 --x 1,2 --y 2,2 --show-transcript");
    assert_eq!(
        stdout(&o),
        "OUTPUT 0\nBITS 9\nBidders 5 01000\nBidders 4 0101\nTOTAL 9 OUTPUT 0 BY Website\n"
    );
}

#[test]
fn bad_input_is_a_usage_error() {
    let o = commlab("run pp-canonical --m 2 --n 2 --x 5,0 --y 0,1");
    assert_eq!(o.status.code(), Some(2));
    assert!(o.stdout.is_empty());
    assert!(!o.stderr.is_empty());
    assert_eq!(commlab("").status.code(), Some(2));
}

#[test]
fn bounds_emits_csv_and_json() {
    let o = commlab("bounds --m 2 --n 2");
    let text = stdout(&o);
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("m,n,multiset_count,"));
    assert_eq!(lines.next(), Some("2,2,10,3.321928,0.000000,4,5,4.000000"));

    let o = commlab("bounds --m 1..2 --n 1..2 --format json");
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 4);
}

#[test]
fn verify_passes_small_and_guards_large() {
    let o = commlab("verify --m 2 --n 2");
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).ends_with("ALL 7 CHECKS PASSED\n"));

    let o = commlab("verify --m 8 --n 8");
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("guard exceeded"));
}

#[test]
fn foolset_summary() {
    let o = commlab("foolset --m 1 --n 2");
    assert_eq!(stdout(&o), "k=3\nlog2k=1.584963\nceil_log2k=2\nPASS\n");
}
