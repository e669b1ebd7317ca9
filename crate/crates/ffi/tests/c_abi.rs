use std::ffi::CStr;
use std::path::Path;
use std::process::Command;
use std::ptr;

use omega_index_ffi::*;

fn last_error() -> String {
    let p = omega_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn harmonic(lambda: f64, dim: usize) -> *mut OmegaPair {
    let mut pair = ptr::null_mut();
    assert_eq!(unsafe { omega_pair_harmonic(lambda, dim, &mut pair) }, OmegaStatus::Ok);
    assert!(!pair.is_null());
    pair
}

#[test]
fn oscillator_index_through_the_abi() {
    let pair = harmonic(0.01, 120);
    assert_eq!(unsafe { omega_pair_dim(pair) }, 120);
    let cuts = [70usize, 80, 90];
    let mut summary = OmegaSummary {
        omega: 0,
        epsilon: 0.0,
        defect: 0.0,
        theorem_bound: 0.0,
        orientation: OmegaOrientation::Default,
    };
    let status = unsafe {
        omega_compute(pair, cuts.as_ptr(), cuts.len(), OmegaOrientation::Default, 0.05, &mut summary)
    };
    assert_eq!(status, OmegaStatus::Ok, "{}", last_error());
    assert_eq!(summary.omega, 1);
    assert_eq!(summary.orientation, OmegaOrientation::Conjugate);
    assert!((summary.epsilon - 0.02).abs() < 1e-12);
    unsafe { omega_pair_free(pair) };
}

#[test]
fn commuting_grid_has_index_zero() {
    let mut pair = ptr::null_mut();
    assert_eq!(unsafe { omega_pair_commuting_grid(6, 1.0, &mut pair) }, OmegaStatus::Ok);
    let cuts = [10usize, 20];
    let mut summary = OmegaSummary {
        omega: 99,
        epsilon: 1.0,
        defect: 1.0,
        theorem_bound: 1.0,
        orientation: OmegaOrientation::Default,
    };
    let status = unsafe {
        omega_compute(pair, cuts.as_ptr(), cuts.len(), OmegaOrientation::Literal, 0.05, &mut summary)
    };
    assert_eq!(status, OmegaStatus::Ok, "{}", last_error());
    assert_eq!(summary.omega, 0);
    assert_eq!(summary.epsilon, 0.0);
    unsafe { omega_pair_free(pair) };
}

#[test]
fn domain_errors_map_to_codes() {
    let pair = harmonic(0.1, 40);
    let cuts = [10usize];
    let mut summary = OmegaSummary {
        omega: 0,
        epsilon: 0.0,
        defect: 0.0,
        theorem_bound: 0.0,
        orientation: OmegaOrientation::Default,
    };
    let status =
        unsafe { omega_compute(pair, cuts.as_ptr(), 1, OmegaOrientation::Literal, 0.05, &mut summary) };
    assert_eq!(status, OmegaStatus::InadmissibleCommutator);
    assert!(last_error().contains("0.2"), "{}", last_error());

    let mut scaled = ptr::null_mut();
    let mut s = 0.0;
    assert_eq!(unsafe { omega_pair_scale_admissible(pair, 0.02, &mut scaled, &mut s) }, OmegaStatus::Ok);
    assert!(s > 0.0 && s < 1.0);
    unsafe {
        omega_pair_free(scaled);
        omega_pair_free(pair);
    }

    let mut bound = 0.0;
    assert_eq!(unsafe { omega_theorem_bound(1.5, &mut bound) }, OmegaStatus::InvalidParameter);
    assert_eq!(unsafe { omega_theorem_bound(0.2, &mut bound) }, OmegaStatus::Ok);
    assert!((bound - 1.125).abs() < 1e-12);
}

#[test]
fn null_and_invalid_inputs() {
    assert_eq!(unsafe { omega_pair_harmonic(0.01, 40, ptr::null_mut()) }, OmegaStatus::NullPointer);
    assert_eq!(last_error(), "out is null");
    let mut pair = ptr::null_mut();
    assert_eq!(unsafe { omega_pair_harmonic(-1.0, 40, &mut pair) }, OmegaStatus::InvalidParameter);
    assert!(pair.is_null());
    assert_eq!(unsafe { omega_pair_dim(ptr::null()) }, 0);
    unsafe { omega_pair_free(ptr::null_mut()) };
}

#[test]
fn raw_arrays_are_validated() {
    // 2x2: A = diag(1, 2), B = [[0, 1], [1, 0]].
    let a = [1.0, 0.0, 0.0, 2.0];
    let b = [0.0, 1.0, 1.0, 0.0];
    let mut pair = ptr::null_mut();
    let status = unsafe {
        omega_pair_from_row_major(a.as_ptr(), ptr::null(), b.as_ptr(), ptr::null(), 2, 0, &mut pair)
    };
    assert_eq!(status, OmegaStatus::Ok, "{}", last_error());
    assert_eq!(unsafe { omega_pair_dim(pair) }, 2);
    unsafe { omega_pair_free(pair) };

    let skew = [0.0, 1.0, -1.0, 0.0];
    let status = unsafe {
        omega_pair_from_row_major(skew.as_ptr(), ptr::null(), b.as_ptr(), ptr::null(), 2, 0, &mut pair)
    };
    assert_eq!(status, OmegaStatus::NonHermitianInput);

    let nan = [f64::NAN, 0.0, 0.0, 1.0];
    let status = unsafe {
        omega_pair_from_row_major(nan.as_ptr(), ptr::null(), b.as_ptr(), ptr::null(), 2, 0, &mut pair)
    };
    assert_eq!(status, OmegaStatus::NonFinite);
}

#[test]
fn spectrum_size_query_then_fill() {
    let pair = harmonic(0.01, 120);
    let mut len = 0usize;
    let status =
        unsafe { omega_corner_spectrum(pair, 80, OmegaOrientation::Conjugate, ptr::null_mut(), 0, &mut len) };
    assert_eq!(status, OmegaStatus::BufferTooSmall);
    assert_eq!(len, 160);
    let mut values = vec![0.0; len];
    let status = unsafe {
        omega_corner_spectrum(pair, 80, OmegaOrientation::Conjugate, values.as_mut_ptr(), values.len(), &mut len)
    };
    assert_eq!(status, OmegaStatus::Ok);
    assert!(values.windows(2).all(|w| w[0] <= w[1]));
    assert_eq!(values.iter().filter(|&&v| v > 0.5).count(), 81);

    let status = unsafe {
        omega_corner_spectrum(pair, 500, OmegaOrientation::Conjugate, values.as_mut_ptr(), values.len(), &mut len)
    };
    assert_eq!(status, OmegaStatus::CutTooLarge);
    unsafe { omega_pair_free(pair) };
}

#[test]
fn version_is_the_crate_version() {
    let v = unsafe { CStr::from_ptr(omega_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

fn header() -> String {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/omega_index.h");
    std::fs::read_to_string(path).expect("header generated by build.rs")
}

#[test]
fn header_declares_every_export() {
    let h = header();
    for name in [
        "omega_last_error_message",
        "omega_version",
        "omega_pair_harmonic",
        "omega_pair_commuting_grid",
        "omega_pair_from_row_major",
        "omega_pair_free",
        "omega_pair_dim",
        "omega_pair_scale_admissible",
        "omega_compute",
        "omega_corner_spectrum",
        "omega_theorem_bound",
        "typedef struct OmegaPair OmegaPair;",
        "OMEGA_STATUS_GAP_VIOLATION = 13",
        "OMEGA_ORIENTATION_DEFAULT = 2",
    ] {
        assert!(h.contains(name), "header lacks {name}");
    }
}

#[test]
fn header_compiles_as_c() {
    let Ok(cc) = Command::new("cc").arg("--version").output() else { return };
    if !cc.status.success() {
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(
        &src,
        "#include \"omega_index.h\"\nint main(void) { OmegaPair *p = 0; return omega_pair_harmonic(0.01, 8, &p) == OMEGA_STATUS_OK ? 0 : 1; }\n",
    )
    .unwrap();
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let out = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(&include)
        .arg(&src)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
