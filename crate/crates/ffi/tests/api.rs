use std::ffi::{CStr, CString};
use std::ptr;

use ldproj_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(ldproj_last_error_message()) }.to_string_lossy().into_owned()
}

#[test]
fn sampler_round_trip() {
    let q = CString::new("scaled_norm").unwrap();
    let m = CString::new("direct").unwrap();
    let mut s: *mut LdprojSampler = ptr::null_mut();
    unsafe {
        assert_eq!(ldproj_sampler_new(q.as_ptr(), 20, 5, 1.5, m.as_ptr(), 3, &mut s), LdprojStatus::Ok);
        let mut a = vec![0.0; 1000];
        let mut b = vec![0.0; 1000];
        assert_eq!(ldproj_sampler_fill(s, a.len(), 1, a.as_mut_ptr()), LdprojStatus::Ok);
        assert_eq!(ldproj_sampler_fill(s, b.len(), 4, b.as_mut_ptr()), LdprojStatus::Ok);
        assert_eq!(a, b);
        assert!(a.iter().all(|v| v.is_finite() && *v >= 0.0));

        let mut hits = 0u64;
        assert_eq!(ldproj_sampler_count_hits(s, 1000, 0.0, f64::INFINITY, 1, &mut hits), LdprojStatus::Ok);
        assert_eq!(hits, 1000);

        assert_eq!(ldproj_sampler_set_seed(s, 4), LdprojStatus::Ok);
        assert_eq!(ldproj_sampler_fill(s, b.len(), 1, b.as_mut_ptr()), LdprojStatus::Ok);
        assert_ne!(a, b);
        ldproj_sampler_free(s);
        ldproj_sampler_free(ptr::null_mut());
    }
}

#[test]
fn errors_carry_codes_and_messages() {
    let q = CString::new("scaled_norm").unwrap();
    let mut s: *mut LdprojSampler = ptr::null_mut();
    unsafe {
        assert_eq!(ldproj_sampler_new(q.as_ptr(), 20, 5, 0.5, ptr::null(), 0, &mut s), LdprojStatus::Domain);
        assert!(last_error().contains("p must be >= 1"), "{}", last_error());
        assert!(s.is_null());
        assert_eq!(ldproj_sampler_new(q.as_ptr(), 20, 20, 2.0, ptr::null(), 0, &mut s), LdprojStatus::Precondition);
        assert_eq!(ldproj_sampler_new(ptr::null(), 20, 5, 2.0, ptr::null(), 0, &mut s), LdprojStatus::NullPointer);
        assert!(last_error().contains("quantity"));

        let bad = [0xffu8, 0];
        let mut out = 0.0;
        assert_eq!(ldproj_rate(bad.as_ptr().cast(), f64::NAN, f64::NAN, 0.5, &mut out), LdprojStatus::InvalidString);

        // A success clears the message.
        assert_eq!(ldproj_moment_m(2.0, &mut out), LdprojStatus::Ok);
        assert_eq!(last_error(), "");
        assert!((out - 1.0).abs() < 1e-12);
    }
}

#[test]
fn rates_and_curves() {
    let name = CString::new("rate_V").unwrap();
    let mut v = 0.0;
    unsafe {
        assert_eq!(ldproj_rate(name.as_ptr(), f64::NAN, 0.0, 0.6, &mut v), LdprojStatus::Ok);
        assert!((v + 0.5 * (1.0 - 0.36_f64).ln()).abs() < 1e-12);
        // rate_V needs lambda.
        assert_eq!(ldproj_rate(name.as_ptr(), f64::NAN, f64::NAN, 0.6, &mut v), LdprojStatus::Domain);

        let w = CString::new("rate_W").unwrap();
        let ys = [0.5, 1.0, 1.5];
        let mut c: *mut LdprojRateCurve = ptr::null_mut();
        assert_eq!(ldproj_rate_curve_new(w.as_ptr(), 2.0, f64::NAN, ys.as_ptr(), ys.len(), &mut c), LdprojStatus::Ok);
        assert_eq!(ldproj_rate_curve_len(c), 3);
        let (mut y, mut val) = (0.0, 0.0);
        assert_eq!(ldproj_rate_curve_get(c, 1, &mut y, &mut val), LdprojStatus::Ok);
        assert_eq!((y, val), (1.0, 0.0));
        assert_eq!(ldproj_rate_curve_get(c, 0, &mut y, &mut val), LdprojStatus::Ok);
        assert_eq!(val, f64::INFINITY);
        assert_eq!(ldproj_rate_curve_get(c, 3, &mut y, &mut val), LdprojStatus::Domain);
        ldproj_rate_curve_free(c);
    }
}

#[test]
fn oracles_and_statistics() {
    let (mut p, mut lo, mut hi) = (0.0, 0.0, 0.0);
    unsafe {
        assert_eq!(ldproj_exact_v_interval_probability(4, 2, 0.0, 0.7, &mut p), LdprojStatus::Ok);
        assert!((p - 0.49).abs() < 1e-14);
        assert_eq!(ldproj_exact_v1_interval_probability(10, 3, 0.0, 1.0, &mut p), LdprojStatus::Ok);
        assert!((p - 1.0).abs() < 1e-12);
        assert_eq!(ldproj_clopper_pearson(0, 100, 0.99, &mut lo, &mut hi), LdprojStatus::Ok);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 0.06);

        let a = [1.0, 2.0, 3.0];
        let (mut d, mut pv) = (0.0, 0.0);
        assert_eq!(ldproj_ks_two_sample(a.as_ptr(), 3, a.as_ptr(), 3, &mut d, &mut pv), LdprojStatus::Ok);
        assert_eq!((d, pv), (0.0, 1.0));
        assert_eq!(ldproj_ks_two_sample(a.as_ptr(), 0, a.as_ptr(), 3, &mut d, &mut pv), LdprojStatus::Domain);
    }
    let v = unsafe { CStr::from_ptr(ldproj_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
