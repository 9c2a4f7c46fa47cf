use std::process::Command;

use syncorr::cli::run;
use syncorr::point::{CorrPoint3, MarginalVec};
use syncorr::realize::{verify_realization, Realization};
use syncorr::record::Record;

fn call(args: &[&str]) -> (i32, String, String) {
    call_with_input(args, "")
}

fn call_with_input(args: &[&str], input: &str) -> (i32, String, String) {
    let mut argv = vec!["syncorr"];
    argv.extend_from_slice(args);
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(argv, &mut input.as_bytes(), &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

#[test]
fn member_inside_and_outside() {
    let (code, out, _) = call(&["member", "-r", "0.5,0.5,0.5", "-p", "0.25,0.25,0.25"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("certificate verdict=member"));

    let (code, out, _) = call(&["member", "-r", "0.5,0.5,0.5", "-p", "0,0,0"]);
    assert_eq!(code, 2);
    let rec = Record::parse(out.lines().next().unwrap()).unwrap();
    assert_eq!(rec.get("verdict").unwrap(), "non-member");
    let dir = rec.get_vec("direction").unwrap();
    let s = -1.0 / 3f64.sqrt();
    assert!(dir.iter().all(|v| (v - s).abs() < 1e-12));
}

#[test]
fn negative_coordinates_parse() {
    let (code, _, err) = call(&["member", "-r", "0.5,0.5,0.5", "-p", "-0.1,0,0"]);
    assert_eq!(code, 2, "{err}");
}

#[test]
fn two_exp_prints_interval() {
    let (code, out, _) = call(&["two-exp", "-r", "0.5,0.5"]);
    assert_eq!(code, 0);
    assert_eq!(out, "[0,0.5]\n");
}

#[test]
fn usage_errors_exit_one() {
    for args in [
        &["member", "-r", "0.5,0.5", "-p", "0,0,0"][..],
        &["member", "-r", "1.5,0.5,0.5", "-p", "0,0,0"],
        &["member", "-r", "0.5,0.5,0.5"],
        &["member", "-r", "0.5,0.5,0.5", "-p", "0,0,0", "--eps", "-1"],
        &["sample", "-d", "3", "-n", "1,1,1", "-N", "5"],
        &["sample", "-d", "3", "-n", "1,1,4", "-N", "5", "--seed", "1"],
        &["check", "--prop", "typeI", "--n", "3", "--d", "5", "--seed", "1"],
        &["check", "--prop", "typeII", "--n", "1", "--d", "5", "--seed", "1"],
        &["reduce", "--pair", "1,1"],
        &["frobnicate"],
        &[],
    ] {
        let (code, out, err) = call(args);
        assert_eq!(code, 1, "{args:?}");
        assert!(out.is_empty(), "{args:?}");
        assert!(err.contains("Usage") || err.contains("usage"), "{args:?}: {err}");
    }
}

#[test]
fn help_goes_to_stdout() {
    let (code, out, _) = call(&["member", "--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("Usage"));
}

#[test]
fn realize_passes_verification() {
    for (r, p) in [
        ("0.5,0.5,0.5", "0.25,0.25,0.25"),
        ("0.3,0.8,0.6", "0.2,0.25,0.45"),
        ("0.9,0.2,0.6", "0.15,0.55,0.1"),
        ("0.2,0.3,0.4", "0,0,0.1"),
    ] {
        let (code, out, _) = call(&["member", "-r", r, "-p", p]);
        assert_eq!(code, 0);
        let (code, out2, err) = call(&["realize", "-r", r, "-p", p]);
        assert_eq!(code, 0, "{err}");
        assert!(out2.starts_with(&out));
        let lines: Vec<_> = out2.lines().collect();
        let real_line = lines.iter().find(|l| l.starts_with("realization")).unwrap();
        let real = Realization::from_record(&Record::parse(real_line).unwrap()).unwrap();
        let rv = MarginalVec(syncorr::record::parse_vec3(r).unwrap());
        let pv = CorrPoint3(syncorr::record::parse_vec3(p).unwrap());
        assert!(verify_realization(&real, &rv, &pv, 1e-9).passed());
        assert!(lines.last().unwrap().starts_with("verification passed=true"));
    }
}

#[test]
fn realize_of_non_member_exits_two() {
    let (code, out, _) = call(&["realize", "-r", "0.5,0.5,0.5", "-p", "0,0,0"]);
    assert_eq!(code, 2);
    assert!(!out.contains("realization"));
}

#[test]
fn identical_arguments_give_identical_output() {
    let runs = [
        &["sample", "-d", "5", "-n", "1,2,2", "-N", "50", "--seed", "9"][..],
        &["sample", "-d", "3", "-n", "1,1,1", "-N", "5", "--seed", "9", "--triples"],
        &["check", "--prop", "typeII", "--n", "1", "--k", "1", "--d", "5", "--trials", "300", "--seed", "4"],
        &["check", "--prop", "two-exp", "--n1", "2", "--n2", "1", "--d", "3", "--trials", "300", "--seed", "4"],
        &["tensor", "-r", "0.2,0.4,0.6", "-p", "0.1,0.1,0.3", "--human"],
    ];
    for args in runs {
        let a = call(args);
        let b = call(args);
        assert_eq!(a, b, "{args:?}");
        assert_eq!(a.0, 0, "{args:?}: {}", a.2);
    }
    let a = call(runs[0]).1;
    let c = call(&["sample", "-d", "5", "-n", "1,2,2", "-N", "50", "--seed", "10"]).1;
    assert_ne!(a, c);
}

#[test]
fn sample_streams_one_line_per_trial() {
    let (_, out, _) = call(&["sample", "-d", "4", "-n", "1,2,3", "-N", "20", "--seed", "2"]);
    let lines: Vec<_> = out.lines().collect();
    assert_eq!(lines.len(), 20);
    for (i, l) in lines.iter().enumerate() {
        let rec = Record::parse(l).unwrap();
        assert_eq!(rec.get_usize("trial").unwrap(), i);
        assert_eq!(rec.get_vec("w").unwrap().len(), 3);
    }
}

#[test]
fn reduce_reads_sampled_triples() {
    let (_, triples, _) = call(&[
        "sample", "-d", "4", "-n", "1,1,2", "-N", "3", "--seed", "5", "--triples",
    ]);
    let (code, out, err) = call_with_input(&["reduce", "--pair", "1,2"], &triples);
    assert_eq!(code, 0, "{err}");
    let steps: Vec<_> = out
        .lines()
        .filter(|l| l.starts_with("reduction_step"))
        .map(|l| Record::parse(l).unwrap())
        .collect();
    assert_eq!(steps.len(), 3);
    for s in &steps {
        assert!(s.get_f64("residual").unwrap() < 1e-12);
    }
    assert_eq!(out.lines().filter(|l| l.starts_with("ranked_triple")).count(), 6);

    let (code, out, _) = call_with_input(&["reduce", "--all"], &triples);
    assert_eq!(code, 0);
    for l in out.lines().filter(|l| l.starts_with("reduction ")) {
        assert!(Record::parse(l).unwrap().get_f64("residual").unwrap() < 1e-10);
    }

    let (_, full, _) = call(&[
        "sample", "-d", "4", "-n", "2,2,2", "-N", "1", "--seed", "5", "--triples",
    ]);
    let (code, out, err) = call_with_input(&["reduce", "--pair", "1,2"], &full);
    assert_eq!(code, 1);
    assert!(out.is_empty() && err.contains("not below"));
}

#[test]
fn tensor_has_36_entries() {
    let (code, out, _) = call(&["tensor", "-r", "0.5,0.5,0.5", "-p", "0.25,0.25,0.25"]);
    assert_eq!(code, 0);
    let entries: Vec<_> = out.lines().filter(|l| l.starts_with("entry")).collect();
    assert_eq!(entries.len(), 36);
    let total: f64 = entries
        .iter()
        .map(|l| Record::parse(l).unwrap().get_f64("value").unwrap())
        .sum();
    assert!((total - 9.0).abs() < 1e-12);
}

#[test]
fn mesh_writes_points_and_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.xyz");
    let p = path.to_str().unwrap();
    let (code, _, err) = call(&["mesh", "-r", "0.5,0.5,0.5", "--res", "100", "-o", p, "--seed", "3"]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(std::fs::read_to_string(&path).unwrap().lines().count(), 100);
    let meta = std::fs::read_to_string(dir.path().join("m.xyz.meta")).unwrap();
    assert!(meta.contains("resolution=100") && meta.contains("seed=3"));
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_syncorr");
    let status = |args: &[&str]| Command::new(bin).args(args).output().unwrap();
    let out = status(&["member", "-r", "0.5,0.5,0.5", "-p", "0.25,0.25,0.25"]);
    assert_eq!(out.status.code(), Some(0));
    let out = status(&["member", "-r", "0.5,0.5,0.5", "-p", "0,0,0"]);
    assert_eq!(out.status.code(), Some(2));
    let out = status(&["member", "-r", "oops"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());
    let out = status(&["two-exp", "-r", "0.5,0.5"]);
    assert_eq!(String::from_utf8_lossy(&out.stdout), "[0,0.5]\n");
}
