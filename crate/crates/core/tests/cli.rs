use std::path::Path;
use std::process::{Command, Output};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use bscomp::combiner::{efficiency, PhaseAlphabet};
use bscomp::harness::{format_ccm, CSV_HEADER};
use bscomp::numerics::{ComplexMatrix, C64};
use bscomp::solvers::{bb_bc, BbOptions};

fn bscomp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bscomp")).args(args).output().unwrap()
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

fn small_run() -> Vec<&'static str> {
    vec![
        "--antennas",
        "16",
        "--beams",
        "6",
        "--rf-chains",
        "2,4",
        "--bits",
        "1",
        "--samples",
        "64",
        "--trials",
        "2",
    ]
}

fn write_ccm(dir: &Path, l: usize) -> (std::path::PathBuf, ComplexMatrix) {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let g = ComplexMatrix::from_fn(l, l, |_, _| {
        C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
    });
    let mut r = g.mul(&g.adjoint());
    r.symmetrize();
    let path = dir.join("r.txt");
    std::fs::write(&path, format_ccm(&r)).unwrap();
    (path, r)
}

#[test]
fn simulate_writes_csv_to_stdout() {
    let mut args = vec!["simulate", "--scheme", "none,optimal,sgbc"];
    args.extend(small_run());
    let out = bscomp(&args);
    assert!(out.status.success(), "{}", text(&out.stderr));
    let csv = text(&out.stdout);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some(CSV_HEADER));
    // 2 trials x (none + optimal + sgbc) x 2 values of K
    assert_eq!(lines.count(), 12);
}

#[test]
fn json_report_parses() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.json");
    let mut args = vec![
        "simulate",
        "--scheme",
        "sgbc",
        "--format",
        "json",
        "--out",
        path.to_str().unwrap(),
    ];
    args.extend(small_run());
    let out = bscomp(&args);
    assert!(out.status.success(), "{}", text(&out.stderr));
    let value: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    let rows = value.as_array().unwrap();
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[0]["scheme"], "sgbc");
    assert_eq!(rows[0]["L"], 6);
}

#[test]
fn config_file_and_flags_combine() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(
        &cfg,
        "# small\nantennas = 16\nbeams = 6\nsamples = 64\ntrials = 1\nrf_chains = 3\n",
    )
    .unwrap();
    let out = bscomp(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--scheme",
        "none",
        "--seed",
        "5",
    ]);
    assert!(out.status.success(), "{}", text(&out.stderr));
    let csv = text(&out.stdout);
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(&row[2..7], &["none", "16", "6", "3", "0"]);
}

#[test]
fn config_errors_exit_with_one() {
    for args in [
        vec!["simulate", "--rf-chains", "40"],
        vec!["simulate", "--scheme", "magic"],
        vec!["simulate", "--format", "xml"],
        vec!["simulate", "--bogus-flag"],
    ] {
        let out = bscomp(&args);
        assert_eq!(out.status.code(), Some(1), "{args:?}: {}", text(&out.stderr));
        assert!(!out.stderr.is_empty());
    }
    assert_eq!(bscomp(&["--help"]).status.code(), Some(0));
}

#[test]
fn solve_prints_indices_and_efficiency() {
    let dir = tempfile::tempdir().unwrap();
    let (path, r) = write_ccm(dir.path(), 6);
    let out = bscomp(&["solve", path.to_str().unwrap(), "--rf-chains", "2", "--bits", "2"]);
    assert!(out.status.success(), "{}", text(&out.stderr));
    let stdout = text(&out.stdout);
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines.len(), 3);
    let alphabet = PhaseAlphabet::new(2).unwrap();
    let (comb, _) = bb_bc(&r, 2, &alphabet, &BbOptions::default()).unwrap();
    for (line, expected) in lines.iter().zip(comb.indices()) {
        let got: Vec<usize> = line.split_whitespace().map(|t| t.parse().unwrap()).collect();
        assert_eq!(&got, expected);
    }
    let eta: f64 = lines[2].strip_prefix("eta ").unwrap().parse().unwrap();
    let expected = efficiency(&comb.matrix(), &r, r.trace_re()).unwrap();
    assert_eq!(eta, expected);
}

#[test]
fn solve_failures_use_the_documented_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.txt");
    let out = bscomp(&["solve", missing.to_str().unwrap(), "--rf-chains", "1", "--bits", "1"]);
    assert_eq!(out.status.code(), Some(2));

    let bad = dir.path().join("bad.txt");
    std::fs::write(&bad, "2\n1+0i 2+0i\n").unwrap();
    let out = bscomp(&["solve", bad.to_str().unwrap(), "--rf-chains", "1", "--bits", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(text(&out.stderr).contains("line 2"));

    let (path, _) = write_ccm(dir.path(), 4);
    let out = bscomp(&["solve", path.to_str().unwrap(), "--rf-chains", "5", "--bits", "1"]);
    assert_eq!(out.status.code(), Some(2), "{}", text(&out.stderr));
    let out = bscomp(&["solve", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn sweep_covers_the_grid() {
    let out = bscomp(&[
        "sweep",
        "--antennas",
        "16,32",
        "--beams",
        "4",
        "--rf-chains",
        "2",
        "--scheme",
        "none",
        "--samples",
        "32",
        "--trials",
        "1",
    ]);
    assert!(out.status.success(), "{}", text(&out.stderr));
    let csv = text(&out.stdout);
    let m: Vec<&str> = csv.lines().skip(1).map(|l| l.split(',').nth(3).unwrap()).collect();
    assert_eq!(m, vec!["16", "32"]);
}

#[test]
fn selftest_passes() {
    let out = bscomp(&["selftest"]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stdout));
    let stdout = text(&out.stdout);
    assert_eq!(stdout.lines().filter(|l| l.starts_with("PASS")).count(), 5);
}
