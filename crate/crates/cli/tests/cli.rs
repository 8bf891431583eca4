//! End-to-end tests of the command-line surface: flags, output shape, exit
//! codes and determinism.

use std::path::Path;
use std::process::{Command, Output};

fn gabplp(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gabplp"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn objective_of(out: &Output) -> f64 {
    let text = stdout(out);
    let line = text.lines().next().expect("objective line");
    let value = line.strip_prefix("objective ").expect("objective prefix");
    value.parse().unwrap()
}

#[test]
fn solve_toy_all_methods_agree() {
    let dir = tempfile::tempdir().unwrap();
    for method in ["barrier", "primal-dual", "affine"] {
        let out = gabplp(&["solve", "--toy", "--method", method], dir.path());
        assert!(out.status.success(), "{method}: {:?}", out);
        let objective = objective_of(&out);
        assert!(
            (objective - 1.25).abs() < 1e-4,
            "{method}: objective {objective}"
        );
        // Two variable lines follow the objective.
        assert_eq!(stdout(&out).lines().count(), 3);
        assert!(stdout(&out).lines().nth(1).unwrap().starts_with("x1 "));
    }
}

#[test]
fn solve_accepts_all_linsolve_modes() {
    let dir = tempfile::tempdir().unwrap();
    for linsolve in ["gabp-normal", "gabp-augmented", "dense"] {
        let out = gabplp(&["solve", "--toy", "--linsolve", linsolve], dir.path());
        assert!(out.status.success(), "{linsolve}: {:?}", out);
        assert!((objective_of(&out) - 1.25).abs() < 1e-4);
    }
}

#[test]
fn solve_from_file_and_trace_output() {
    let dir = tempfile::tempdir().unwrap();
    let lp_path = dir.path().join("p.lp");
    std::fs::write(&lp_path, "max x + y\nst x + 2 y <= 4\nst 3 x + y <= 6\n").unwrap();
    let out = gabplp(
        &[
            "solve",
            lp_path.to_str().unwrap(),
            "--method",
            "affine",
            "--trace",
            "trace.jsonl",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{out:?}");
    // Optimum at the intersection of the two constraints: (8/5, 6/5).
    assert!((objective_of(&out) - 2.8).abs() < 1e-4);

    let trace_text = std::fs::read_to_string(dir.path().join("trace.jsonl")).unwrap();
    let trace = gabp_lp::io::read_trace(&trace_text).unwrap();
    assert!(!trace.records.is_empty());
    for pair in trace.records.windows(2) {
        assert!(pair[1].obj <= pair[0].obj + 1e-10);
    }
}

#[test]
fn missing_file_is_a_parse_failure() {
    let dir = tempfile::tempdir().unwrap();
    let out = gabplp(&["solve", "missing.lp"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.starts_with("parse:"), "{err}");
}

#[test]
fn malformed_file_reports_position_and_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let lp_path = dir.path().join("bad.lp");
    std::fs::write(&lp_path, "st x <= 1\n").unwrap();
    let out = gabplp(&["solve", lp_path.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("line 1"), "{err}");
}

#[test]
fn infeasible_problem_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let lp_path = dir.path().join("inf.lp");
    std::fs::write(&lp_path, "min x\nst x <= -1\n").unwrap();
    let out = gabplp(&["solve", lp_path.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.starts_with("solve:"), "{err}");
}

#[test]
fn unbounded_problem_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let lp_path = dir.path().join("unb.lp");
    std::fs::write(&lp_path, "max x + y\nst x - y <= 1\n").unwrap();
    let out = gabplp(&["solve", lp_path.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(1), "{out:?}");
}

#[test]
fn bound_reports_rate_and_rounds() {
    let dir = tempfile::tempdir().unwrap();
    let m_path = dir.path().join("m.csv");
    std::fs::write(&m_path, "2,1\n1,2\n").unwrap();
    let out = gabplp(
        &["bound", m_path.to_str().unwrap(), "--eps", "1e-6"],
        dir.path(),
    );
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("dominant true"));
    assert!(text.contains("gamma 5.0000000000000000e-1"));
    assert!(text.contains("rounds 20"));
    assert!(text.contains("walk_summable true"));
}

#[test]
fn bound_identity_converges_in_one_round() {
    let dir = tempfile::tempdir().unwrap();
    let m_path = dir.path().join("i.csv");
    std::fs::write(&m_path, "1,0\n0,1\n").unwrap();
    let out = gabplp(&["bound", m_path.to_str().unwrap()], dir.path());
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("gamma 0.0000000000000000e0"));
    assert!(text.contains("rounds 1"));
}

#[test]
fn bound_non_dominant_has_no_bound() {
    let dir = tempfile::tempdir().unwrap();
    let m_path = dir.path().join("ones.csv");
    std::fs::write(&m_path, "1,1\n1,1\n").unwrap();
    let out = gabplp(&["bound", m_path.to_str().unwrap()], dir.path());
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("dominant false"));
    assert!(text.contains("gamma not-dominant"));
    assert!(text.contains("rounds unbounded"));
    assert!(text.contains("rho 1.0000000000000000e0"));
    assert!(text.contains("walk_summable false"));
}

#[test]
fn bound_rejects_asymmetric_and_ragged_input() {
    let dir = tempfile::tempdir().unwrap();
    let asym = dir.path().join("a.csv");
    std::fs::write(&asym, "1,0.5\n0.2,1\n").unwrap();
    assert_eq!(
        gabplp(&["bound", asym.to_str().unwrap()], dir.path())
            .status
            .code(),
        Some(2)
    );
    let ragged = dir.path().join("r.csv");
    std::fs::write(&ragged, "1,2\n3,4,5\n").unwrap();
    assert_eq!(
        gabplp(&["bound", ragged.to_str().unwrap()], dir.path())
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn check_toy_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = gabplp(&["check", "--toy"], dir.path());
    assert!(out.status.success(), "{out:?}");
    assert!(stdout(&out).contains("verdict ok"));
}

#[test]
fn check_random_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["check", "--random", "10", "4", "20", "--seed", "7"];
    let first = gabplp(&args, dir.path());
    let second = gabplp(&args, dir.path());
    assert!(first.status.success(), "{first:?}");
    assert_eq!(first.stdout, second.stdout);
    assert!(stdout(&first).contains("verdict ok"));
}

#[test]
fn solve_output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = gabplp(&["solve", "--toy", "--method", "barrier"], dir.path());
    let b = gabplp(&["solve", "--toy", "--method", "barrier"], dir.path());
    assert_eq!(a.stdout, b.stdout);
}
