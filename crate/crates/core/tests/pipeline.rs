use std::fs;

use krein_core::export::{read_matrix, spectrum_csv, sweep_csv, write_json, write_matrix, SWEEP_HEADER};
use krein_core::spectra::EigenClass;
use krein_core::verdicts::{
    bbm_verdict, classified_spectrum, kdv_verdict, self_check, stability_matrix, sweep, Axis, KreinIndexResult,
    Numerics, SweepSpec, Verdict, SELF_CHECK_CASES,
};
use krein_core::waves::Model;
use krein_core::Error;

fn gkdv() -> Numerics {
    Numerics::for_order(2.0)
}

#[test]
fn self_checks_pass() {
    for case in SELF_CHECK_CASES {
        let report = self_check(case).unwrap();
        for e in &report.entries {
            assert!(e.passed, "{case}: {} ({})", e.name, e.detail);
        }
    }
    assert!(matches!(self_check("nope"), Err(Error::InvalidParameter(_))));
}

#[test]
fn result_json_round_trip() {
    let r = kdv_verdict(2.0, 5.0, 1.0, &gkdv()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    write_json(&path, &r).unwrap();
    let back: KreinIndexResult = serde_json::from_slice(&fs::read(&path).unwrap()).unwrap();
    assert_eq!(back.k_formula, r.k_formula);
    assert_eq!(back.verdict, Verdict::Unstable);
    assert_eq!(back.slope, r.slope);
}

#[test]
fn unstable_spectrum_has_one_real_pair() {
    let n = gkdv();
    let (a, kind) = stability_matrix(Model::Fkdv, 2.0, 5.0, 1.0, &n).unwrap();
    let k = classified_spectrum(&a, kind, &n).unwrap();
    let pos: Vec<_> = k.eigenvalues.iter().filter(|e| e.class == EigenClass::RealPos).collect();
    assert_eq!(pos.len(), 1);
    assert!(pos[0].im.abs() <= k.im_tol);
    let csv = spectrum_csv(&k);
    assert!(csv.starts_with("re,im,class,krein_form_value\n"));
    assert_eq!(csv.matches("REAL_POS").count(), 1);
    assert_eq!(csv.matches("REAL_NEG").count(), 1);

    let (a, kind) = stability_matrix(Model::Fkdv, 2.0, 2.0, 1.0, &n).unwrap();
    let k = classified_spectrum(&a, kind, &n).unwrap();
    assert_eq!((k.k_r, k.k_c, k.k_i_minus), (0, 0, 0));
    assert!(k.eigenvalues.iter().all(|e| e.class != EigenClass::ImagNegSig));
}

#[test]
fn speed_sweep_keeps_the_index() {
    let spec = SweepSpec {
        axis: Axis::C,
        start: 0.5,
        end: 3.0,
        steps: 6,
        s: 2.0,
        p: 4.5,
        c: 1.0,
        model: Model::Fkdv,
    };
    let report = sweep(&spec, None);
    let ks: Vec<_> = report.points.iter().map(|p| p.result.as_ref().unwrap().k_formula).collect();
    assert!(ks.iter().all(|&k| k == 1), "{ks:?}");
    assert!(report.flips.is_empty());
    let csv = sweep_csv(&report);
    assert_eq!(csv.lines().next(), Some(SWEEP_HEADER));
    assert_eq!(csv.lines().count(), 7);
}

#[test]
fn failed_points_are_marked() {
    let spec = SweepSpec {
        axis: Axis::P,
        start: 3.0,
        end: 4.0,
        steps: 2,
        s: 0.5,
        p: 0.0,
        c: 1.0,
        model: Model::Fkdv,
    };
    let report = sweep(&spec, Some(&gkdv()));
    assert!(report.points.iter().all(|p| p.result.is_err()));
    let csv = sweep_csv(&report);
    assert!(csv.lines().skip(1).all(|l| l.contains("error: p = ")), "{csv}");
}

#[test]
fn bbm_pipeline() {
    let r = bbm_verdict(2.0, 4.0, 2.0, &Numerics::for_model(Model::Fbbm, 2.0)).unwrap();
    assert_eq!((r.n_l, r.k_formula, r.k_direct, r.verdict), (1, 0, 0, Verdict::Stable));
    assert!(r.slope > 0.0 && r.d < 0.0);
    assert_eq!(r.model, Model::Fbbm);
}

#[test]
fn operator_dump_round_trip() {
    let n = Numerics {
        n: 64,
        half_length: 10.0,
        ..gkdv()
    };
    let (a, _) = stability_matrix(Model::Fkdv, 2.0, 2.0, 1.0, &n).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let (bin, json) = write_matrix(dir.path(), "op", &a).unwrap();
    let (h, rows) = read_matrix(&bin, &json).unwrap();
    assert_eq!(h.order, 64);
    for i in [0, 7, 63] {
        for j in [0, 5, 63] {
            assert_eq!(rows[i][j], a.get(i, j));
        }
    }
}
