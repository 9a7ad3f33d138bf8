use std::ffi::{CStr, CString};
use std::ptr;

use canodual_ffi::*;

const EX1: &str = include_str!("../../core/fixtures/ex1.json");
const EX7: &str = include_str!("../../core/fixtures/ex7.json");

fn load(json: &str) -> *mut CdInstance {
    let text = CString::new(json).unwrap();
    let mut inst = ptr::null_mut();
    assert_eq!(unsafe { cd_instance_from_json(text.as_ptr(), &mut inst) }, CdStatus::Ok);
    assert!(!inst.is_null());
    inst
}

fn last_error() -> String {
    let p = cd_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn solve_round_trip() {
    unsafe {
        let inst = load(EX1);
        let mut n = 0;
        assert_eq!(cd_instance_dim(inst, &mut n), CdStatus::Ok);
        assert_eq!(n, 5);

        let cfg = cd_solver_config_default();
        let mut report = ptr::null_mut();
        assert_eq!(cd_solve(inst, &cfg, &mut report), CdStatus::Ok);

        let mut cert = CdCertificate::Failed;
        assert_eq!(cd_report_certificate(report, &mut cert), CdStatus::Ok);
        assert_eq!(cert, CdCertificate::GlobalOptimal);

        let mut value = 0.0;
        cd_report_dual_value(report, &mut value);
        assert!((value + 75.875).abs() < 1e-9);
        cd_report_primal_value(report, &mut value);
        assert!((value + 75.875).abs() < 1e-9);
        cd_report_lambda_min(report, &mut value);
        assert!((value - 5.0).abs() < 1e-9);
        cd_report_gap(report, &mut value);
        assert!(value.abs() < 1e-8);
        cd_report_sigma0(report, &mut value);
        assert!((value + 3.5).abs() < 1e-9);

        let mut x = [0.0; 5];
        assert_eq!(cd_report_copy_x(report, x.as_mut_ptr(), 5), CdStatus::Ok);
        assert_eq!(x, [-1., -1., 1., 1., -1.]);
        let mut v = [0.0; 5];
        assert_eq!(cd_report_copy_v(report, v.as_mut_ptr(), 5), CdStatus::Ok);
        assert_eq!(v, [1.0; 5]);
        let mut s1 = [0.0; 5];
        cd_report_copy_sigma1(report, s1.as_mut_ptr(), 5);
        for (got, want) in s1.iter().zip([7., 12., 6.25, 9., 5.]) {
            assert!((got - want).abs() < 1e-6);
        }

        let mut short = [0.0; 3];
        assert_eq!(cd_report_copy_sigma2(report, short.as_mut_ptr(), 3), CdStatus::BufferTooSmall);
        assert!(last_error().contains("5 needed"));

        let mut json = ptr::null_mut();
        assert_eq!(cd_report_to_json(report, &mut json), CdStatus::Ok);
        let text = CStr::from_ptr(json).to_str().unwrap().to_owned();
        cd_string_free(json);
        let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(parsed["certificate"], "GlobalOptimal");

        cd_report_free(report);
        cd_instance_free(inst);
    }
}

#[test]
fn dense_constructor_matches_json() {
    let parsed: serde_json::Value = serde_json::from_str(EX7).unwrap();
    let vecf = |k: &str| -> Vec<f64> {
        parsed[k].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect()
    };
    let flat = |k: &str| -> Vec<f64> {
        parsed[k]["dense"]
            .as_array()
            .unwrap()
            .iter()
            .flat_map(|r| r.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()))
            .collect()
    };
    let (c, f) = (vecf("c"), vecf("f"));
    let alpha = parsed["alpha"].as_f64().unwrap();
    let (ea, eb) = (flat("A"), flat("B"));
    unsafe {
        let mut inst = ptr::null_mut();
        let status = cd_instance_new(3, ea.as_ptr(), eb.as_ptr(), alpha, c.as_ptr(), f.as_ptr(), &mut inst);
        assert_eq!(status, CdStatus::Ok, "{}", last_error());
        let reference = load(EX7);
        let (x, v) = ([1.0; 3], [1.0; 3]);
        let (mut p, mut q) = (0.0, 0.0);
        assert_eq!(cd_evaluate_primal(inst, x.as_ptr(), v.as_ptr(), &mut p), CdStatus::Ok);
        assert_eq!(cd_evaluate_primal(reference, x.as_ptr(), v.as_ptr(), &mut q), CdStatus::Ok);
        assert_eq!(p, q);
        assert!((p + 33.875).abs() < 1e-12);
        cd_instance_free(inst);
        cd_instance_free(reference);

        let mut bad = ptr::null_mut();
        let status = cd_instance_new(3, ea.as_ptr(), eb.as_ptr(), -1.0, c.as_ptr(), f.as_ptr(), &mut bad);
        assert_eq!(status, CdStatus::InvalidInstance);
        assert!(bad.is_null());
        assert!(last_error().contains("alpha"));
    }
}

#[test]
fn oracle_and_closed_form() {
    unsafe {
        let inst = load(EX1);
        let (mut x, mut v, mut value) = ([0.0; 5], [0.0; 5], 0.0);
        let cfg = cd_oracle_config_default();
        assert_eq!(cd_oracle_solve(inst, &cfg, x.as_mut_ptr(), v.as_mut_ptr(), 5, &mut value), CdStatus::Ok);
        assert!((value + 75.875).abs() < 1e-4);
        assert_eq!(v, [1.0; 5]);

        assert_eq!(cd_decoupled_solve(inst, x.as_mut_ptr(), v.as_mut_ptr(), 5, &mut value), CdStatus::Ok);
        assert_eq!(x, [-1., -1., 1., 1., -1.]);
        assert!((value + 75.875).abs() < 1e-12);
        cd_instance_free(inst);

        let dense = load(EX7);
        assert_eq!(
            cd_decoupled_solve(dense, x.as_mut_ptr(), v.as_mut_ptr(), 5, &mut value),
            CdStatus::NotDiagonal
        );
        cd_instance_free(dense);
    }
}

#[test]
fn error_codes() {
    unsafe {
        let mut inst = ptr::null_mut();
        let bad = CString::new("{ not json").unwrap();
        assert_eq!(cd_instance_from_json(bad.as_ptr(), &mut inst), CdStatus::Parse);
        assert!(last_error().contains("line 1"));
        assert_eq!(cd_instance_from_json(ptr::null(), &mut inst), CdStatus::NullPointer);
        assert_eq!(cd_instance_from_json(bad.as_ptr(), ptr::null_mut()), CdStatus::NullPointer);

        let mut n = 0;
        assert_eq!(cd_instance_dim(ptr::null(), &mut n), CdStatus::NullPointer);
        let mut report = ptr::null_mut();
        assert_eq!(cd_solve(ptr::null(), ptr::null(), &mut report), CdStatus::NullPointer);

        let inst = load(EX1);
        let mut cfg = cd_solver_config_default();
        cfg.barrier_shrink = 2.0;
        assert_eq!(cd_solve(inst, &cfg, &mut report), CdStatus::InvalidArgument);
        assert!(report.is_null());
        assert_eq!(cd_solve(inst, ptr::null(), &mut report), CdStatus::Ok);
        assert!(cd_last_error_message().is_null());
        cd_report_free(report);
        cd_instance_free(inst);

        cd_instance_free(ptr::null_mut());
        cd_report_free(ptr::null_mut());
        cd_string_free(ptr::null_mut());
    }
}

#[test]
fn header_declares_every_entry_point() {
    let header = include_str!("../include/canodual.h");
    for name in [
        "cd_last_error_message",
        "cd_string_free",
        "cd_solver_config_default",
        "cd_oracle_config_default",
        "cd_instance_from_json",
        "cd_instance_new",
        "cd_instance_dim",
        "cd_instance_free",
        "cd_evaluate_primal",
        "cd_solve",
        "cd_report_free",
        "cd_report_certificate",
        "cd_report_dual_value",
        "cd_report_primal_value",
        "cd_report_gap",
        "cd_report_lambda_min",
        "cd_report_sigma0",
        "cd_report_copy_sigma1",
        "cd_report_copy_sigma2",
        "cd_report_copy_x",
        "cd_report_copy_v",
        "cd_report_to_json",
        "cd_oracle_solve",
        "cd_decoupled_solve",
    ] {
        assert!(header.contains(&format!("{name}(")), "{name} missing from header");
    }
    assert!(header.contains("CD_STATUS_PANIC = 99"));
}

#[test]
fn c_program_links_against_static_library() {
    use std::path::PathBuf;
    use std::process::Command;

    if Command::new("cc").arg("--version").output().is_err() {
        eprintln!("cc not available; skipping");
        return;
    }
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let profile_dir = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf();
    let lib = profile_dir.join("libcanodual_ffi.a");
    if !lib.exists() {
        eprintln!("static library not built; skipping");
        return;
    }
    let exe = profile_dir.join("canodual_c_smoke");
    let status = Command::new("cc")
        .arg(manifest.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success(), "C compilation failed");
    let out = Command::new(&exe)
        .arg(manifest.join("../core/fixtures/ex1.json"))
        .output()
        .unwrap();
    assert!(out.status.success(), "smoke program exited with {:?}", out.status.code());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "0 -75.875000 -1.0 1.0");
}
