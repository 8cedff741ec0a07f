use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use knnrate_ffi::*;

fn last_error() -> String {
    let p = knnrate_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn index_round_trip_with_ties() {
    let coords = [1.0, 0.0, 0.0, 1.0, -1.0, 0.0, 0.0, -1.0, 3.0, 3.0];
    let mut index = ptr::null_mut();
    unsafe {
        assert_eq!(
            knnrate_index_new(coords.as_ptr(), 5, 2, &mut index),
            KnnrateStatus::Ok
        );
        let mut radius = 0.0;
        let mut count = 0;
        let mut small = [0usize; 2];
        let s = knnrate_index_knn(
            index,
            [0.0, 0.0].as_ptr(),
            1,
            &mut radius,
            small.as_mut_ptr(),
            2,
            &mut count,
        );
        assert_eq!(s, KnnrateStatus::BufferTooSmall);
        assert_eq!(count, 4);
        let mut buf = [0usize; 8];
        let s = knnrate_index_knn(
            index,
            [0.0, 0.0].as_ptr(),
            1,
            &mut radius,
            buf.as_mut_ptr(),
            8,
            &mut count,
        );
        assert_eq!(s, KnnrateStatus::Ok);
        assert!(knnrate_last_error().is_null());
        assert_eq!((radius, &buf[..count]), (1.0, &[0, 1, 2, 3][..]));
        let s = knnrate_index_range(
            index,
            [3.0, 3.0].as_ptr(),
            0.5,
            buf.as_mut_ptr(),
            8,
            &mut count,
        );
        assert_eq!((s, &buf[..count]), (KnnrateStatus::Ok, &[4][..]));
        let s = knnrate_index_knn(
            index,
            [0.0, 0.0].as_ptr(),
            9,
            &mut radius,
            buf.as_mut_ptr(),
            8,
            &mut count,
        );
        assert_eq!(s, KnnrateStatus::InvalidK);
        assert!(last_error().contains('9'));
        knnrate_index_free(index);
        knnrate_index_free(ptr::null_mut());
    }
}

#[test]
fn regressor_predicts_and_estimates() {
    let x = [0.0, 1.0, 2.0, 3.0, 4.0];
    let y = [0.0, 2.0, 8.0, 2.0, 0.0];
    let mut reg = ptr::null_mut();
    unsafe {
        assert_eq!(
            knnrate_regressor_new(x.as_ptr(), y.as_ptr(), 5, 1, 2, &mut reg),
            KnnrateStatus::Ok
        );
        let mut out = [0.0; 2];
        assert_eq!(
            knnrate_regressor_predict(reg, [2.0, 0.2].as_ptr(), 2, out.as_mut_ptr()),
            KnnrateStatus::Ok
        );
        assert_eq!(out, [4.0, 1.0]);
        let mut r = 0.0;
        assert_eq!(
            knnrate_regressor_radius(reg, [2.0].as_ptr(), &mut r),
            KnnrateStatus::Ok
        );
        assert_eq!(r, 1.0);
        let (mut idx, mut val) = (0, 0.0);
        assert_eq!(
            knnrate_regressor_argmax(reg, &mut idx, &mut val),
            KnnrateStatus::Ok
        );
        assert_eq!((idx, val), (2, 4.0));
        let mut members = [0usize; 5];
        let mut count = 0;
        let s = knnrate_regressor_level_set(reg, 3.0, 0.0, members.as_mut_ptr(), 5, &mut count);
        assert_eq!((s, &members[..count]), (KnnrateStatus::Ok, &[1, 2, 3][..]));
        knnrate_regressor_free(reg);
    }
}

#[test]
fn invalid_inputs_map_to_status_codes() {
    let mut reg = ptr::null_mut();
    unsafe {
        let s = knnrate_regressor_new(ptr::null(), ptr::null(), 3, 1, 1, &mut reg);
        assert_eq!(s, KnnrateStatus::NullPointer);
        let x = [0.0, f64::NAN];
        let s = knnrate_regressor_new(x.as_ptr(), [1.0, 2.0].as_ptr(), 2, 1, 1, &mut reg);
        assert_eq!(s, KnnrateStatus::NonFinite);
        let s = knnrate_regressor_new(x.as_ptr(), [1.0].as_ptr(), 0, 1, 1, &mut reg);
        assert_eq!(s, KnnrateStatus::EmptyInput);
        assert!(reg.is_null());
        let mut d = 0.0;
        let s = knnrate_hausdorff([0.0, 1.0].as_ptr(), 2, [0.0, 3.0].as_ptr(), 2, 1, &mut d);
        assert_eq!((s, d), (KnnrateStatus::Ok, 2.0));
    }
}

#[test]
fn bounds_through_the_c_struct() {
    let mut p = knnrate_bound_params_init(1);
    p.sigma = 1.0;
    p.delta = 0.1;
    let mut v = 0.0;
    unsafe {
        assert_eq!(knnrate_variance_term(&p, 10, 4, &mut v), KnnrateStatus::Ok);
        assert!((v - 2.3018074).abs() < 1e-6);
        assert_eq!(
            knnrate_radius_bound(&p, 1000, 100, &mut v),
            KnnrateStatus::MissingParameter
        );
        assert!(last_error().contains("gamma"));
        p.gamma = 1.0;
        p.p0 = 1.0;
        assert_eq!(
            knnrate_radius_bound(&p, 1000, 100, &mut v),
            KnnrateStatus::Ok
        );
        assert!((v - 0.1).abs() < 1e-15);
        p.delta = 2.0;
        assert_eq!(
            knnrate_variance_term(&p, 10, 4, &mut v),
            KnnrateStatus::InvalidArgument
        );
        let mut c = 0u64;
        assert_eq!(knnrate_set_count_bound(12, 2, &mut c), KnnrateStatus::Ok);
        assert_eq!(c, 288);
        assert_eq!(
            knnrate_set_count_bound(1 << 40, 2, &mut c),
            KnnrateStatus::Overflow
        );
    }
    assert_eq!(knnrate_optimal_k(32768, 1.0, 1, KnnrateKMode::Maxima), 4096);
}

#[test]
fn experiment_from_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("s.cfg");
    std::fs::write(
        &cfg,
        "experiment = setcount\nseeds = 2\nn.ladder = 3, 4\ndensity.kind = uniform-box\ndensity.dim = 2\nsetcount.k = 1, 2\nsetcount.grid = 50\n",
    )
    .unwrap();
    let out = dir.path().join("s.csv");
    let c = |p: &Path| CString::new(p.to_str().unwrap()).unwrap();
    let kind = CString::new("setcount").unwrap();
    let s = unsafe { knnrate_run_experiment(c(&cfg).as_ptr(), kind.as_ptr(), c(&out).as_ptr()) };
    assert_eq!(s, KnnrateStatus::Ok);
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 1 + 2 * 2 * 2);
    let bad = CString::new("nope").unwrap();
    let s = unsafe { knnrate_run_experiment(c(&cfg).as_ptr(), bad.as_ptr(), c(&out).as_ptr()) };
    assert_eq!(s, KnnrateStatus::Config);
}

#[test]
fn header_compiles_as_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/knnrate.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for name in [
        "knnrate_index_new",
        "knnrate_regressor_predict",
        "knnrate_holder_bound",
        "KNNRATE_STATUS_OK",
    ] {
        assert!(text.contains(name), "{name} missing from header");
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(
        &src,
        "#include \"knnrate.h\"\nint main(void) {\n  KnnrateBoundParams p = knnrate_bound_params_init(1);\n  double v;\n  return knnrate_variance_term(&p, 10, 4, &v) == KNNRATE_STATUS_OK;\n}\n",
    )
    .unwrap();
    let status = match Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(header.parent().unwrap())
        .arg(&src)
        .status()
    {
        Ok(s) => s,
        Err(_) => return,
    };
    assert!(status.success());
}
