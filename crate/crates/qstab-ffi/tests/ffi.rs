//! Exercises the C ABI through the exported symbols, the way a foreign
//! caller would (modulo Rust doing the calling).

use qstab_ffi::*;
use std::ffi::{CStr, CString};
use std::ptr;

fn paper_trajectory(h: f64) -> *mut QstabTrajectory {
    let mut traj: *mut QstabTrajectory = ptr::null_mut();
    let status = unsafe { qstab_trajectory_paper_example(h, &mut traj) };
    assert_eq!(status, QstabStatus::Ok);
    assert!(!traj.is_null());
    traj
}

#[test]
fn version_is_a_c_string() {
    let v = unsafe { CStr::from_ptr(qstab_version()) };
    assert!(!v.to_str().unwrap().is_empty());
}

#[test]
fn trajectory_info_roundtrip() {
    let traj = paper_trajectory(1e-3);
    let (mut n, mut m, mut samples) = (0, 0, 0);
    let (mut step, mut horizon) = (0.0, 0.0);
    let status = unsafe {
        qstab_trajectory_info(traj, &mut n, &mut m, &mut samples, &mut step, &mut horizon)
    };
    assert_eq!(status, QstabStatus::Ok);
    assert_eq!((n, m, samples), (1, 1, 1001));
    assert!((step - 1e-3).abs() < 1e-15);
    assert!((horizon - 1.0).abs() < 1e-15);
    unsafe { qstab_trajectory_free(traj) };
}

#[test]
fn analyze_continuous_returns_certificate() {
    let traj = paper_trajectory(1e-3);
    let mut cert: *mut QstabCertificate = ptr::null_mut();
    let status = unsafe {
        qstab_analyze(traj, QstabMode::Continuous, ptr::null(), 0.0, 0.0, &mut cert)
    };
    assert_eq!(status, QstabStatus::Ok);
    assert!(!cert.is_null());
    unsafe {
        assert_eq!(qstab_certificate_state_dim(cert), 1);
        assert_eq!(qstab_certificate_input_dim(cert), 1);
        assert_eq!(qstab_certificate_theorem(cert), 0);
        let beta = qstab_certificate_beta(cert);
        assert!(beta > 0.0, "beta = {beta}");
        let mut p = [0.0_f64];
        let mut k = [0.0_f64];
        assert_eq!(qstab_certificate_p(cert, p.as_mut_ptr(), 1), QstabStatus::Ok);
        assert_eq!(qstab_certificate_k(cert, k.as_mut_ptr(), 1), QstabStatus::Ok);
        assert!(p[0] > 0.0);
        // synthesized gain must stabilize the true plant
        assert!(-1.0 + 0.1 * k[0] < 0.0);
        qstab_certificate_free(cert);
        qstab_trajectory_free(traj);
    }
}

#[test]
fn analyze_sampled_verdicts_and_sufficiency() {
    let traj = paper_trajectory(1.0 / 1024.0);
    let mut cert: *mut QstabCertificate = ptr::null_mut();

    let coarse = unsafe {
        qstab_analyze(traj, QstabMode::Sampled, ptr::null(), 0.125, 0.0, &mut cert)
    };
    assert_eq!(coarse, QstabStatus::NotInformative);
    assert!(cert.is_null());

    let fine = unsafe {
        qstab_analyze(traj, QstabMode::Sampled, ptr::null(), 1.0 / 64.0, 0.0, &mut cert)
    };
    assert_eq!(fine, QstabStatus::Ok);
    unsafe { qstab_certificate_free(cert) };
    cert = ptr::null_mut();

    let sufficient = unsafe {
        qstab_analyze(
            traj,
            QstabMode::SampledSufficient,
            ptr::null(),
            1.0 / 64.0,
            16.0,
            &mut cert,
        )
    };
    assert_eq!(sufficient, QstabStatus::Ok);
    unsafe {
        assert_eq!(qstab_certificate_theorem(cert), 2);
        assert!(qstab_certificate_beta(cert) > 0.125);
        qstab_certificate_free(cert);
    }
    cert = ptr::null_mut();

    // the coarse stepsize cannot clear the 0.5 margin floor
    let insufficient = unsafe {
        qstab_analyze(traj, QstabMode::SampledSufficient, ptr::null(), 0.0625, 16.0, &mut cert)
    };
    assert_eq!(insufficient, QstabStatus::Insufficient);
    assert!(cert.is_null());

    unsafe { qstab_trajectory_free(traj) };
}

#[test]
fn membership_through_the_abi() {
    let traj = paper_trajectory(1e-3);
    let a = [-1.0_f64];
    let b = [0.1_f64];
    let mut inside = false;
    let status = unsafe {
        qstab_membership(traj, ptr::null(), 0.0, a.as_ptr(), b.as_ptr(), &mut inside)
    };
    assert_eq!(status, QstabStatus::Ok);
    assert!(inside, "true system must be consistent with its own data");

    let far = [4.35_f64];
    let bfar = [-3.0_f64];
    let status = unsafe {
        qstab_membership(traj, ptr::null(), 0.125, far.as_ptr(), bfar.as_ptr(), &mut inside)
    };
    assert_eq!(status, QstabStatus::Ok);
    assert!(!inside, "(4.35, -3) is inconsistent with the sampled data");
    unsafe { qstab_trajectory_free(traj) };
}

#[test]
fn csv_loading_and_error_reporting() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    std::fs::write(&path, "t,x1,u1\n0,0,1\n0.5,0.25,1\n1,1,1\n").unwrap();
    let cpath = CString::new(path.to_str().unwrap()).unwrap();
    let mut traj: *mut QstabTrajectory = ptr::null_mut();
    let status = unsafe { qstab_trajectory_from_csv(cpath.as_ptr(), &mut traj) };
    assert_eq!(status, QstabStatus::Ok);
    unsafe { qstab_trajectory_free(traj) };

    let missing = CString::new("/definitely/not/here.csv").unwrap();
    let mut traj2: *mut QstabTrajectory = ptr::null_mut();
    let status = unsafe { qstab_trajectory_from_csv(missing.as_ptr(), &mut traj2) };
    assert_eq!(status, QstabStatus::IoError);
    assert!(traj2.is_null());
    let err = unsafe { qstab_last_error() };
    assert!(!err.is_null());
    let msg = unsafe { CStr::from_ptr(err) }.to_str().unwrap().to_owned();
    assert!(msg.contains("here.csv"), "{msg}");
    unsafe { qstab_string_free(err) };
}

#[test]
fn null_arguments_are_rejected() {
    let mut cert: *mut QstabCertificate = ptr::null_mut();
    let status = unsafe {
        qstab_analyze(ptr::null(), QstabMode::Continuous, ptr::null(), 0.0, 0.0, &mut cert)
    };
    assert_eq!(status, QstabStatus::InvalidArgument);
    let status = unsafe { qstab_trajectory_paper_example(1e-3, ptr::null_mut()) };
    assert_eq!(status, QstabStatus::InvalidArgument);
    unsafe {
        assert_eq!(qstab_certificate_state_dim(ptr::null()), -1);
        assert!(qstab_certificate_beta(ptr::null()).is_nan());
    }
}

#[test]
fn undersized_buffers_are_rejected() {
    let traj = paper_trajectory(1e-3);
    let mut cert: *mut QstabCertificate = ptr::null_mut();
    let status = unsafe {
        qstab_analyze(traj, QstabMode::Continuous, ptr::null(), 0.0, 0.0, &mut cert)
    };
    assert_eq!(status, QstabStatus::Ok);
    unsafe {
        let mut buf = [0.0_f64; 0];
        assert_eq!(
            qstab_certificate_p(cert, buf.as_mut_ptr(), 0),
            QstabStatus::InvalidArgument
        );
        qstab_certificate_free(cert);
        qstab_trajectory_free(traj);
    }
}

#[test]
fn generated_header_exists_and_exports_the_surface() {
    let header = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("include/qstab.h");
    let text = std::fs::read_to_string(&header).expect("header generated at build time");
    for symbol in [
        "QSTAB_H",
        "qstab_version",
        "qstab_trajectory_from_csv",
        "qstab_trajectory_paper_example",
        "qstab_analyze",
        "qstab_certificate_k",
        "qstab_membership",
        "qstab_last_error",
        "QstabStatus",
        "QstabMode",
    ] {
        assert!(text.contains(symbol), "header is missing {symbol}");
    }
}
