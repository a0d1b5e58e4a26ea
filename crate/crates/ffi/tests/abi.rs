use std::ffi::{CStr, CString};
use std::ptr;

use farsplit_ffi::*;

const SCENE: &str = r#"{
  "version": 1, "k": 1.0, "grid_size": 256,
  "components": [
    { "center": [24.0, -4.0], "radius": 5.0, "generator": { "type": "modal" } },
    { "center": [-22.0, 23.0], "radius": 6.0, "generator": { "type": "modal" } }
  ],
  "omega": [[1.5707963267948966, 2.0943951023931957]],
  "noise": { "level": 0.0, "seed": 7 }
}"#;

fn last_error() -> String {
    let p = fs_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

unsafe fn scene() -> *mut FsScene {
    let json = CString::new(SCENE).unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(fs_scene_from_json(json.as_ptr(), &mut s), FsStatus::Ok);
    s
}

#[test]
fn scalar_functions() {
    unsafe {
        let mut v = 0.0;
        assert_eq!(fs_squared_singular_value(0, 1.0, &mut v), FsStatus::Ok);
        assert!(v > 0.0);
        assert_eq!(fs_squared_singular_value(0, -1.0, &mut v), FsStatus::Domain);
        assert!(!last_error().is_empty());

        let (mut n, mut found) = (0u64, 0i32);
        assert_eq!(fs_picard_threshold(10.0, 1e-6, &mut n, &mut found), FsStatus::Ok);
        assert_eq!(found, 1);
        assert!(n >= 10);
    }
}

#[test]
fn null_pointers_are_reported() {
    unsafe {
        assert_eq!(fs_squared_singular_value(1, 1.0, ptr::null_mut()), FsStatus::NullPointer);
        assert!(last_error().contains("out_value"));
        let mut size = 0;
        assert_eq!(fs_farfield_size(ptr::null(), &mut size), FsStatus::NullPointer);
        assert_eq!(fs_scene_from_json(ptr::null(), &mut ptr::null_mut()), FsStatus::NullPointer);
        fs_farfield_free(ptr::null_mut());
        fs_scene_free(ptr::null_mut());
        fs_solution_free(ptr::null_mut());
        fs_string_free(ptr::null_mut());
    }
}

#[test]
fn farfield_round_trip() {
    unsafe {
        let re: Vec<f64> = (0..16).map(|j| (j as f64).cos()).collect();
        let im: Vec<f64> = (0..16).map(|j| (j as f64).sin()).collect();
        let mut f = ptr::null_mut();
        assert_eq!(fs_farfield_from_samples(16, re.as_ptr(), im.as_ptr(), &mut f), FsStatus::Ok);
        let mut size = 0;
        assert_eq!(fs_farfield_size(f, &mut size), FsStatus::Ok);
        assert_eq!(size, 16);
        let (mut r2, mut i2) = (vec![0.0; 16], vec![0.0; 16]);
        assert_eq!(fs_farfield_samples(f, r2.as_mut_ptr(), i2.as_mut_ptr(), 16), FsStatus::Ok);
        assert_eq!(r2, re);
        assert_eq!(i2, im);
        assert_eq!(
            fs_farfield_coeffs(f, r2.as_mut_ptr(), i2.as_mut_ptr(), 8),
            FsStatus::LengthMismatch
        );
        fs_farfield_free(f);

        let mut g = ptr::null_mut();
        assert_eq!(fs_farfield_from_samples(3, re.as_ptr(), im.as_ptr(), &mut g), FsStatus::Domain);
    }
}

#[test]
fn bad_scene_json() {
    unsafe {
        let json = CString::new("{ not json").unwrap();
        let mut s = ptr::null_mut();
        assert_eq!(fs_scene_from_json(json.as_ptr(), &mut s), FsStatus::Parse);
        assert!(s.is_null());
    }
}

#[test]
fn least_squares_split() {
    unsafe {
        let s = scene();
        let mut gamma = ptr::null_mut();
        assert_eq!(fs_scene_gamma(s, &mut gamma), FsStatus::Ok);
        let mut sol = ptr::null_mut();
        assert_eq!(fs_split_ls(s, gamma, &mut sol), FsStatus::Ok);

        let mut count = 0;
        assert_eq!(fs_solution_component_count(sol, &mut count), FsStatus::Ok);
        assert_eq!(count, 2);
        let mut order = 0;
        assert_eq!(fs_solution_order(sol, 1, &mut order), FsStatus::Ok);
        let len = 2 * order + 1;
        let (mut re, mut im) = (vec![0.0; len], vec![0.0; len]);
        assert_eq!(fs_solution_coefficients(sol, 1, re.as_mut_ptr(), im.as_mut_ptr(), len), FsStatus::Ok);
        assert!(re.iter().chain(&im).any(|v| *v != 0.0));
        assert_eq!(fs_solution_order(sol, 5, &mut order), FsStatus::Precondition);

        let (mut res, mut cond) = (0.0, 0.0);
        assert_eq!(fs_solution_diagnostics(sol, &mut res, &mut cond), FsStatus::Ok);
        assert!(res < 1e-8, "residual {res}");
        assert!(cond.is_finite() && cond >= 1.0);

        let mut restored = ptr::null_mut();
        assert_eq!(fs_solution_restored(sol, &mut restored), FsStatus::Ok);
        fs_farfield_free(restored);

        let mut json = ptr::null_mut();
        assert_eq!(fs_solution_to_json(sol, &mut json), FsStatus::Ok);
        let text = CStr::from_ptr(json).to_str().unwrap().to_owned();
        fs_string_free(json);
        assert!(farsplit::split_ls::SplitSolution::from_json(&text).is_ok());

        fs_solution_free(sol);
        fs_farfield_free(gamma);
        fs_scene_free(s);
    }
}

#[test]
fn l1_split() {
    unsafe {
        let s = scene();
        let mut gamma = ptr::null_mut();
        assert_eq!(fs_scene_gamma(s, &mut gamma), FsStatus::Ok);
        let mut sol = ptr::null_mut();
        assert_eq!(fs_split_l1(s, gamma, 1e-6, 500, 1e-10, 1, 0, &mut sol), FsStatus::Ok);
        let mut count = 0;
        assert_eq!(fs_solution_component_count(sol, &mut count), FsStatus::Ok);
        assert_eq!(count, 2);
        let (mut res, mut cond) = (0.0, 0.0);
        assert_eq!(fs_solution_diagnostics(sol, &mut res, &mut cond), FsStatus::Ok);
        assert!(res.is_finite());
        fs_solution_free(sol);

        assert_eq!(fs_split_l1(s, gamma, -1.0, 10, 1e-10, 0, 0, &mut sol), FsStatus::Domain);
        fs_farfield_free(gamma);
        fs_scene_free(s);
    }
}

#[test]
fn bound_evaluation() {
    unsafe {
        let name = CString::new("LS_two").unwrap();
        let geometry = CString::new(r#"{"k":1.0,"centers":[[0.0,0.0],[1000.0,0.0]],"orders":[2,2]}"#).unwrap();
        let (mut c, mut rhs, mut ok) = (0.0, 0.0, 0);
        assert_eq!(
            fs_evaluate_bound(name.as_ptr(), geometry.as_ptr(), 0.5, 0, &mut c, &mut rhs, &mut ok),
            FsStatus::Ok
        );
        assert_eq!(ok, 1);
        assert!(c >= 1.0 && rhs.is_finite());

        let bogus = CString::new("no_such_theorem").unwrap();
        assert_eq!(
            fs_evaluate_bound(bogus.as_ptr(), geometry.as_ptr(), 0.5, 0, &mut c, &mut rhs, &mut ok),
            FsStatus::Parse
        );
    }
}
