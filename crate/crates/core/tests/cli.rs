//! The `qdual` binary: exit codes, report contents, JSON round trips and
//! reproducibility.

use std::process::{Command, Output};

use qdual::cli::{AnalyzeReport, CharactersReport, FindReport, MemberReport, ScanReport};

fn qdual(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qdual")).args(args).output().expect("spawn qdual")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8")
}

#[test]
fn analyze_text_ends_with_order() {
    let o = qdual(&["analyze", "--family", "5,1,5,-1"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().last(), Some("dual group order: 40"));
    assert!(text.contains("sharp 60 | g1 300 | g2 300"));
}

#[test]
fn analyze_json_round_trips() {
    let o = qdual(&["--json", "analyze", "--family", "3,1,5,2", "--criteria", "100"]);
    assert_eq!(o.status.code(), Some(0));
    let report: AnalyzeReport = serde_json::from_str(&stdout(&o)).expect("one JSON object");
    assert_eq!(report.dual.order, 2);
    assert_eq!(report.criteria.as_ref().map(|t| t.moduli), Some((3, 1)));
    let again: AnalyzeReport = serde_json::from_str(&serde_json::to_string(&report).unwrap()).unwrap();
    assert_eq!(again, report);
}

#[test]
fn member_exit_codes() {
    let member = qdual(&["member", "--family", "5,1,5,-1", "--target", "26", "--target2", "26"]);
    assert_eq!(member.status.code(), Some(0));
    let non = qdual(&["member", "--family", "5,1,5,-1", "--target", "2", "--target2", "2"]);
    assert_eq!(non.status.code(), Some(1));
    let forbidden = qdual(&["--json", "member", "--family", "5,1,5,-1", "--target", "5", "--target2", "1"]);
    assert_eq!(forbidden.status.code(), Some(1));
    let report: MemberReport = serde_json::from_str(&stdout(&forbidden)).unwrap();
    assert_eq!(report.verdict.forbidden_primes, vec![(1, 5)]);
}

#[test]
fn member_single_mode_fraction() {
    let o = qdual(&["member", "--family", "5,1,5,-1", "--target", "11/9"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(qdual(&["analyze", "--family", "0,1,1,1"]).status.code(), Some(2));
    assert_eq!(qdual(&["analyze", "--family", "5,1"]).status.code(), Some(2));
    assert_eq!(qdual(&["member", "--family", "5,1,5,-1", "--target", "4/2"]).status.code(), Some(2));
    assert_eq!(qdual(&["member", "--family", "5,1,5,-1", "--target", "-3"]).status.code(), Some(2));
    assert_eq!(qdual(&["frobnicate"]).status.code(), Some(2));
    // Proportional numerator and denominator.
    assert_eq!(qdual(&["analyze", "--family", "2,1,4,2"]).status.code(), Some(2));
}

#[test]
fn find_prints_verified_certificate() {
    let o = qdual(&["find", "--family", "5,1,5,-1", "--target", "26", "--target2", "26"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("31 +1\n52 -1\n75 -1\n3271 +1\n"), "{text}");
    assert!(text.contains("product: 26 ⊗ 26"));
    assert!(text.contains("verified: true"));
}

#[test]
fn find_exhausted_exits_four() {
    let o = qdual(&["--json", "find", "--family", "5,1,5,-1", "--target", "2", "--target2", "2", "--nmax", "200", "--max-terms", "4", "--node-budget", "200000"]);
    assert_eq!(o.status.code(), Some(4));
    let report: FindReport = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(report.certificate.is_none() && report.error.is_some());
    assert_eq!(report.rows + report.dropped, 190);
}

#[test]
fn eta_and_characters_tables() {
    let o = qdual(&["eta", "--family", "5,1,5,-1", "--prime", "3", "--exponent", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).lines().nth(1).unwrap().contains("all_equal"));
    assert_eq!(qdual(&["eta", "--family", "5,1,5,-1", "--prime", "4"]).status.code(), Some(2));

    let o = qdual(&["--json", "characters", "--modulus", "12"]);
    let report: CharactersReport = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report.characters.len(), 4);
    assert_eq!(report.characters.iter().filter(|c| c.primitive).count(), 1);
}

#[test]
fn runs_are_reproducible() {
    let args = ["--json", "scan-lemma6", "--seed", "11", "--count", "40", "--bound", "9", "--max-modulus", "50"];
    let a = qdual(&args);
    let mut single_thread = vec!["--threads", "1"];
    single_thread.extend_from_slice(&args);
    let b = qdual(&single_thread);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(stdout(&a), stdout(&b));
    let report: ScanReport = serde_json::from_str(&stdout(&a)).unwrap();
    assert_eq!(report.violations, 0);

    let find = ["--json", "find", "--family", "3,1,5,2", "--target", "34/37", "--target2", "57/62", "--nmax", "300", "--prime-bound", "1000"];
    let first = qdual(&find);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(stdout(&first), stdout(&qdual(&find)));
}
