use std::ffi::CStr;
use std::process::Command;
use std::ptr;

use ratiokit_ffi::*;

fn golden() -> *mut RkParams {
    let xs = [2.0, 0.0, 3.0, 0.0];
    let ys = [0.5, 0.0, 4.0, 0.0];
    let mut h = ptr::null_mut();
    let s = unsafe { rk_params_new(1, 1, 1, xs.as_ptr(), ys.as_ptr(), &mut h) };
    assert_eq!(s, RkStatus::Ok);
    assert!(!h.is_null());
    h
}

fn last_error() -> String {
    let p = rk_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn eval_and_estimate() {
    let h = golden();
    let mut v = RkValue::default();
    assert_eq!(unsafe { rk_eval_thm1(h, &mut v) }, RkStatus::Ok);
    assert!((v.re - 6.0 / 7.0).abs() < 1e-12 && v.im == 0.0);
    assert_eq!(v.confluent, 0);
    assert!(rk_last_error().is_null());
    let mut a = RkEstimate::default();
    let mut b = RkEstimate::default();
    assert_eq!(unsafe { rk_mc_estimate(h, 20_000, 7, &mut a) }, RkStatus::Ok);
    assert_eq!(unsafe { rk_mc_estimate(h, 20_000, 7, &mut b) }, RkStatus::Ok);
    assert_eq!(a, b);
    assert!((a.mean_re - 6.0 / 7.0).abs() <= 4.0 * a.stderr);
    unsafe { rk_params_free(h) };
    unsafe { rk_params_free(ptr::null_mut()) };
}

#[test]
fn limits_and_extended() {
    let mut v = RkValue::default();
    let xs = [0.3, 0.0, 0.7, 0.0];
    assert_eq!(unsafe { rk_eval_compact(1, 1, 2, xs.as_ptr(), &mut v) }, RkStatus::Ok);
    assert!((v.re - 0.79).abs() < 1e-12);
    let ys = [0.5, 0.0, 2.0, 0.0];
    assert_eq!(unsafe { rk_eval_stable(1, 1, 3, ys.as_ptr(), &mut v) }, RkStatus::Ok);
    assert!((v.re - 1.0 / 6.0).abs() < 1e-12);
    let mut e = ptr::null_mut();
    assert_eq!(
        unsafe { rk_extended_params_new(0, 0, 1, 1, 3, ptr::null(), ys.as_ptr(), &mut e) },
        RkStatus::Ok
    );
    assert_eq!(unsafe { rk_eval_cor12(e, &mut v) }, RkStatus::Ok);
    assert!((v.re - 4.0 / 3.0).abs() < 1e-12);
    let mut est = RkEstimate::default();
    assert_eq!(unsafe { rk_mc_estimate_extended(e, 50_000, 3, &mut est) }, RkStatus::Ok);
    assert!((est.mean_re - 4.0 / 3.0).abs() <= 4.0 * est.stderr);
    unsafe { rk_extended_params_free(e) };
}

#[test]
fn error_codes() {
    let xs = [2.0, 0.0, 3.0, 0.0];
    let ys = [1.5, 0.0, 4.0, 0.0];
    let mut h = ptr::null_mut();
    let s = unsafe { rk_params_new(1, 1, 1, xs.as_ptr(), ys.as_ptr(), &mut h) };
    assert_eq!(s, RkStatus::DomainViolation);
    assert!(h.is_null());
    assert!(last_error().contains("index 1"));
    let name = unsafe { CStr::from_ptr(rk_status_name(s)) };
    assert_eq!(name.to_str().unwrap(), "domain violation");
    assert_eq!(
        unsafe { rk_params_new(1, 1, 1, ptr::null(), ys.as_ptr(), &mut h) },
        RkStatus::NullPointer
    );
    assert_eq!(
        unsafe { rk_eval_thm1(ptr::null(), ptr::null_mut()) },
        RkStatus::NullPointer
    );
    let g = golden();
    assert_eq!(unsafe { rk_eval_thm1(g, ptr::null_mut()) }, RkStatus::NullPointer);
    assert_eq!(
        unsafe { rk_mc_estimate(g, 1, 0, &mut RkEstimate::default()) },
        RkStatus::Value
    );
    unsafe { rk_params_free(g) };
    let mut v = RkValue::default();
    assert_eq!(
        unsafe { rk_eval_stable(2, 1, 1, [0.3, 0.0, 0.5, 0.0, 2.0, 0.0].as_ptr(), &mut v) },
        RkStatus::DomainViolation
    );
    let version = unsafe { CStr::from_ptr(rk_version()) };
    assert_eq!(version.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_compiles_as_c() {
    let dir = env!("CARGO_MANIFEST_DIR");
    let header = std::fs::read_to_string(format!("{dir}/include/ratiokit.h")).unwrap();
    for sym in [
        "rk_params_new",
        "rk_eval_thm1",
        "rk_mc_estimate",
        "rk_last_error",
        "RK_STATUS_DOMAIN_VIOLATION",
    ] {
        assert!(header.contains(sym), "{sym} missing from header");
    }
    let Ok(cc) = which_cc() else { return };
    let tmp = tempfile::tempdir().unwrap();
    let src = tmp.path().join("smoke.c");
    std::fs::write(
        &src,
        "#include \"ratiokit.h\"\n\
         int main(void) {\n\
           double xs[4] = {2, 0, 3, 0}, ys[4] = {0.5, 0, 4, 0};\n\
           RkParams *h = NULL; RkValue v;\n\
           if (rk_params_new(1, 1, 1, xs, ys, &h) != RK_STATUS_OK) return 1;\n\
           RkStatus s = rk_eval_thm1(h, &v);\n\
           rk_params_free(h);\n\
           return s == RK_STATUS_OK ? 0 : 1;\n\
         }\n",
    )
    .unwrap();
    let out = Command::new(cc)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(format!("{dir}/include"))
        .arg(&src)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

fn which_cc() -> Result<&'static str, ()> {
    ["cc", "gcc", "clang"]
        .into_iter()
        .find(|c| {
            Command::new(c)
                .arg("--version")
                .output()
                .is_ok_and(|o| o.status.success())
        })
        .ok_or(())
}
