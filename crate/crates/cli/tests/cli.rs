use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn krein(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_krein"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("run krein")
}

fn krein_bare(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_krein")).args(args).output().expect("run krein")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn solve_wave_matches_sech() {
    let dir = tempfile::tempdir().unwrap();
    let o = krein(&["solve-wave", "--model", "fkdv", "--s", "2", "--p", "2", "--c", "1"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("profile.csv")).unwrap();
    let mut worst = 0.0f64;
    for line in csv.lines().skip(1) {
        let (x, u) = line.split_once(',').unwrap();
        let (x, u): (f64, f64) = (x.parse().unwrap(), u.parse().unwrap());
        worst = worst.max((u - 2f64.sqrt() / x.cosh()).abs());
    }
    assert!(worst < 1e-8, "{worst:e}");
    let meta: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join("profile.json")).unwrap()).unwrap();
    assert_eq!(meta["model"], "FKDV");
    assert_eq!(meta["p"], 2.0);
}

#[test]
fn solve_wave_outside_window() {
    let dir = tempfile::tempdir().unwrap();
    let o = krein(&["solve-wave", "--model", "fkdv", "--s", "0.5", "--p", "3"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("p_max"), "{}", stderr(&o));
}

#[test]
fn usage_errors_exit_64() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(krein(&["solve-wave", "--model", "fkdv", "--s", "2"], dir.path()).status.code(), Some(64));
    assert_eq!(krein_bare(&["index", "--s", "2", "--p", "2", "--bogus"]).status.code(), Some(64));
    assert_eq!(krein_bare(&["frobnicate"]).status.code(), Some(64));
    assert_eq!(krein(&["index", "--model", "schrodinger", "--p", "2"], dir.path()).status.code(), Some(64));
    assert_eq!(krein_bare(&["--help"]).status.code(), Some(0));
}

#[test]
fn index_lines() {
    let dir = tempfile::tempdir().unwrap();
    let o = krein(&["index", "--s", "2", "--p", "5", "--c", "1"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("K_Ham=1 verdict=UNSTABLE"), "{}", stdout(&o));
    let r: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join("result.json")).unwrap()).unwrap();
    assert_eq!(r["k_r"], 1);
    assert_eq!(r["K_direct"], 1);

    let o = krein(&["index", "--s", "2", "--p", "2", "--c", "1"], dir.path());
    assert!(stdout(&o).contains("K_Ham=0 verdict=STABLE"), "{}", stdout(&o));
    let row = fs::read_to_string(dir.path().join("result.csv")).unwrap();
    assert_eq!(row.lines().count(), 2);

    let o = krein(&["index", "--s", "1", "--p", "2", "--c", "1"], dir.path());
    assert!(stdout(&o).contains("verdict=DEGENERATE"), "{}", stdout(&o));
}

#[test]
fn sweep_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let o = krein(
        &["sweep", "--s", "2", "--axis", "p", "--start", "3.5", "--end", "4.5", "--step", "0.1"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("flip in (3.9, 4.1)"), "{}", stdout(&o));
    let csv = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 12);
    assert!(csv.starts_with("s,p,c,model,n_L,slope,K_formula,k_r,k_c,k_i_minus,verdict,status\n"));

    let o = krein(&["sweep", "--s", "2", "--axis", "p", "--start", "3", "--end", "3", "--step", "0.1"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);

    let o = krein(
        &["sweep", "--s", "2", "--p", "3", "--axis", "c", "--start", "0.5", "--end", "2.5", "--steps", "3"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let ks: Vec<&str> = csv.lines().skip(1).map(|l| l.split(',').nth(6).unwrap()).collect();
    assert_eq!(ks, vec!["0", "0", "0"]);
}

#[test]
fn sweep_marks_failed_points() {
    let dir = tempfile::tempdir().unwrap();
    let o = krein(
        &["sweep", "--s", "0.5", "--axis", "p", "--start", "1.5", "--end", "2.5", "--steps", "2", "--n", "256"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(1));
    let csv = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let last = csv.lines().last().unwrap();
    assert!(last.contains("error: p = 2.5"), "{last}");
}

#[test]
fn spectrum_rows() {
    let dir = tempfile::tempdir().unwrap();
    let o = krein(&["spectrum", "--s", "2", "--p", "5"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("spectrum.csv")).unwrap();
    assert_eq!(csv.lines().filter(|l| l.contains(",REAL_POS,")).count(), 1);

    let o = krein(&["spectrum", "--s", "2", "--p", "2"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("spectrum.csv")).unwrap();
    assert!(!csv.contains("REAL_POS"));
    assert!(!csv.contains("IMAG_NEG_SIG"));

    let o = krein(&["spectrum", "--model", "schrodinger", "--format", "json"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join("spectrum.json")).unwrap()).unwrap();
    assert_eq!(v["k_r"], 1);
}

#[test]
fn spectrum_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["spectrum", "--s", "1.5", "--p", "2", "--n", "256", "--half-length", "30"];
    assert_eq!(krein(&args, a.path()).status.code(), Some(0));
    assert_eq!(krein(&args, b.path()).status.code(), Some(0));
    let x = fs::read(a.path().join("spectrum.csv")).unwrap();
    let y = fs::read(b.path().join("spectrum.csv")).unwrap();
    assert!(!x.is_empty());
    assert_eq!(x, y);
}

#[test]
fn config_file_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(&cfg, r#"{"model": "FKDV", "s": 2, "p": 2, "c": 1, "format": "JSON"}"#).unwrap();
    let o = krein(&["index", "--config", cfg.to_str().unwrap(), "--p", "5"], dir.path());
    assert!(stdout(&o).contains("K_Ham=1 verdict=UNSTABLE"), "{}", stdout(&o));
    assert!(!dir.path().join("result.csv").exists());
    fs::write(&cfg, r#"{"s": 2, "p": 2, "colour": "red"}"#).unwrap();
    let o = krein(&["index", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(64));
}

#[test]
fn dump_operator_files() {
    let dir = tempfile::tempdir().unwrap();
    let o = krein(&["dump-operator", "--s", "2", "--p", "2", "--n", "64", "--half-length", "10"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(fs::metadata(dir.path().join("operator.bin")).unwrap().len(), 64 * 64 * 8);
    let h: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join("operator.json")).unwrap()).unwrap();
    assert_eq!(h["order"], 64);
    let o = krein(
        &["dump-operator", "--model", "schrodinger", "--n", "32", "--operator", "sandwich", "--eps", "0.1"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn self_check_cases() {
    let o = krein_bare(&["self-check", "gkdv-p2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).lines().all(|l| l.starts_with("PASS")));
    assert_eq!(krein_bare(&["self-check", "schrodinger-sech2"]).status.code(), Some(0));
    assert_eq!(krein_bare(&["self-check", "nope"]).status.code(), Some(64));
}
