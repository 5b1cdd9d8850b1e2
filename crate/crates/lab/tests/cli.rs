use std::path::Path;
use std::process::Command;

fn nevlab() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nevlab"))
}

fn scenario(name: &str) -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

#[test]
fn invalid_schedule_exits_with_input_code() {
    let dir = tempfile::tempdir().unwrap();
    let out = nevlab().arg("run").arg(scenario("invalid_ratio.json")).arg("--out").arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("schedule.ratio"), "{err}");
}

#[test]
fn parse_errors_carry_position() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.json");
    std::fs::write(&p, "{\n  \"function\": {\"family\": \"identity\"},\n  \"schedule\": {\"r0\": 1, \"ratio\": 2, \"count\": 3},\n  \"tasks\": [\"jensen\"],\n  \"bogus\": 1\n}\n").unwrap();
    let out = nevlab().arg("run").arg(&p).arg("--out").arg(dir.path().join("o")).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 5"), "{err}");
}

#[test]
fn run_writes_tables_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = nevlab().arg("run").arg(scenario("identity_equality.json")).arg("--out").arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    for f in ["characteristic.csv", "jensen.csv", "smt21.csv", "smt21_remainder.csv", "summary.json"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let head = std::fs::read_to_string(dir.path().join("smt21.csv")).unwrap();
    assert_eq!(head.lines().next().unwrap(), "r,m,N,T,N_target_1,N_g,lhs,rhs,remainder_total,slack,certified");
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["exit_code"], 0);
    assert_eq!(summary["tasks"].as_array().unwrap().len(), 3);

    let plot = dir.path().join("t.dat");
    let st = nevlab()
        .args(["plot"])
        .arg(dir.path().join("characteristic.csv"))
        .args(["--x", "r", "--y", "T", "--log-x", "--out"])
        .arg(&plot)
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(0));
    let text = std::fs::read_to_string(&plot).unwrap();
    assert_eq!(text.lines().next(), Some("# log(r) T"));
    assert_eq!(text.lines().count(), 9);
    // T(r, z) = log r for r > 1.
    let st = nevlab()
        .args(["plot"])
        .arg(dir.path().join("characteristic.csv"))
        .args(["--x", "r", "--y", "T", "--out"])
        .arg(&plot)
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(0));
    for line in std::fs::read_to_string(&plot).unwrap().lines().skip(1) {
        let v: Vec<f64> = line.split(' ').map(|x| x.parse().unwrap()).collect();
        assert!((v[1] - v[0].ln()).abs() < 1e-10, "{line}");
    }
    let st = nevlab()
        .args(["plot"])
        .arg(dir.path().join("characteristic.csv"))
        .args(["--x", "r", "--y", "missing", "--out"])
        .arg(&plot)
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(1));
}

#[test]
fn listing_is_stable_and_help_succeeds() {
    let a = nevlab().arg("list-families").output().unwrap();
    let b = nevlab().arg("list-families").output().unwrap();
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8_lossy(&a.stdout);
    for key in ["jacobi-sn", "q-scale", "shift", "synthetic-valiron"] {
        assert!(text.contains(key), "{key}");
    }
    assert_eq!(nevlab().arg("--help").status().unwrap().code(), Some(0));
    assert_eq!(nevlab().arg("frobnicate").status().unwrap().code(), Some(1));
}
