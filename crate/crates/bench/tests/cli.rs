use std::process::Command;

fn bench() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bench"))
}

#[test]
fn selftest_passes_and_detects_faults() {
    let ok = bench().arg("selftest").output().unwrap();
    assert_eq!(
        ok.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&ok.stdout)
    );
    let stdout = String::from_utf8_lossy(&ok.stdout);
    assert!(stdout.lines().all(|l| l.starts_with("PASS")));

    let bad = bench()
        .args(["selftest", "--wrong-prefactor"])
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stdout).contains("FAIL splitting order l=2"));
}

#[test]
fn adr_sweep_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("adr.csv");
    let out = bench()
        .args([
            "adr",
            "--dims",
            "6,7,8",
            "--methods",
            "etd2rk",
            "--steps",
            "4,8,16",
            "--loop-time",
            "--out",
        ])
        .arg(&path)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let mut rdr = csv::Reader::from_path(&path).unwrap();
    let header: Vec<String> = rdr.headers().unwrap().iter().map(str::to_string).collect();
    assert_eq!(
        header,
        [
            "problem",
            "method",
            "steps",
            "tau",
            "error",
            "order",
            "wallclock_s",
            "loop_s"
        ]
    );
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 3);
    assert_eq!(&rows[0][5], "");
    let order: f64 = rows[2][5].parse().unwrap();
    assert!(order > 1.5, "order {order}");
}

#[test]
fn invalid_arguments_exit_with_error() {
    let out = bench()
        .args(["adr", "--methods", "rosenbrock-euler"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bench().args(["adr", "--dims", "4,5"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}
