//! Exercises the exported functions through their Rust signatures.

use std::ffi::{CStr, CString};
use std::ptr;

use lqg_landscape_ffi::*;

/// Doyle's plant: double integrator with heavy state weighting.
unsafe fn doyle() -> *mut LqgPlant {
    let a = [1.0, 1.0, 0.0, 1.0];
    let b = [0.0, 1.0];
    let c = [1.0, 0.0];
    let w = [5.0, 5.0, 5.0, 5.0];
    let q = [5.0, 5.0, 5.0, 5.0];
    let one = [1.0];
    let mut plant = ptr::null_mut();
    let st = lqg_plant_new(2, 1, 1, a.as_ptr(), b.as_ptr(), c.as_ptr(), w.as_ptr(), one.as_ptr(), q.as_ptr(), one.as_ptr(), false, &mut plant);
    assert_eq!(st, LqgStatus::Ok);
    plant
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(lqg_last_error_message()).to_string_lossy().into_owned() }
}

#[test]
fn riccati_controller_round_trips_through_handles() {
    unsafe {
        let plant = doyle();
        let mut k = ptr::null_mut();
        let mut j = 0.0;
        assert_eq!(lqg_riccati_controller(plant, &mut k, &mut j), LqgStatus::Ok);
        assert!((j - 750.0).abs() < 1e-6);

        let (mut q, mut m, mut p) = (0, 0, 0);
        assert_eq!(lqg_controller_dims(k, &mut q, &mut m, &mut p), LqgStatus::Ok);
        assert_eq!((q, m, p), (2, 1, 1));
        let (mut a_k, mut b_k, mut c_k) = ([0.0; 4], [0.0; 2], [0.0; 2]);
        assert_eq!(lqg_controller_get(k, a_k.as_mut_ptr(), b_k.as_mut_ptr(), c_k.as_mut_ptr()), LqgStatus::Ok);
        let want_a = [-4.0, 1.0, -10.0, -4.0];
        for (got, want) in a_k.iter().zip(want_a) {
            assert!((got - want).abs() < 1e-8, "{a_k:?}");
        }
        for (got, want) in b_k.iter().zip([5.0, 5.0]) {
            assert!((got - want).abs() < 1e-8);
        }
        for (got, want) in c_k.iter().zip([-5.0, -5.0]) {
            assert!((got - want).abs() < 1e-8);
        }

        let mut rebuilt = ptr::null_mut();
        assert_eq!(lqg_controller_new(2, 1, 1, a_k.as_ptr(), b_k.as_ptr(), c_k.as_ptr(), &mut rebuilt), LqgStatus::Ok);
        let mut j2 = 0.0;
        assert_eq!(lqg_cost(plant, rebuilt, &mut j2), LqgStatus::Ok);
        assert!((j2 - j).abs() < 1e-9 * j);

        let mut verdict = LqgVerdict::Inconclusive;
        assert_eq!(lqg_analyze_stationary(plant, rebuilt, 1e-6, &mut verdict), LqgStatus::Ok);
        assert_eq!(verdict, LqgVerdict::GlobalOptimum);

        let (mut ga, mut gb, mut gc, mut norm) = ([1.0; 4], [1.0; 2], [1.0; 2], 1.0);
        assert_eq!(lqg_gradient(plant, rebuilt, ga.as_mut_ptr(), gb.as_mut_ptr(), gc.as_mut_ptr(), &mut norm), LqgStatus::Ok);
        assert!(norm < 1e-6, "{norm}");

        lqg_controller_free(rebuilt);
        lqg_controller_free(k);
        lqg_plant_free(plant);
    }
}

#[test]
fn destabilizing_controller_is_a_numerical_failure() {
    unsafe {
        let one = [1.0];
        let mut plant = ptr::null_mut();
        assert_eq!(
            lqg_plant_new(1, 1, 1, one.as_ptr(), one.as_ptr(), one.as_ptr(), one.as_ptr(), one.as_ptr(), one.as_ptr(), one.as_ptr(), false, &mut plant),
            LqgStatus::Ok
        );
        let zero = [0.0];
        let mut k = ptr::null_mut();
        assert_eq!(lqg_controller_new(1, 1, 1, zero.as_ptr(), zero.as_ptr(), zero.as_ptr(), &mut k), LqgStatus::Ok);
        let (mut stable, mut margin) = (true, 0.0);
        assert_eq!(lqg_is_stabilizing(plant, k, &mut stable, &mut margin), LqgStatus::Ok);
        assert!(!stable && margin > 0.0);
        let mut j = 0.0;
        assert_eq!(lqg_cost(plant, k, &mut j), LqgStatus::Numerical);
        assert!(last_error().contains("does not stabilize"), "{}", last_error());
        lqg_controller_free(k);
        lqg_plant_free(plant);
    }
}

#[test]
fn component_signs_of_the_scalar_example_differ() {
    unsafe {
        let one = [1.0];
        let mut plant = ptr::null_mut();
        assert_eq!(
            lqg_plant_new(1, 1, 1, one.as_ptr(), one.as_ptr(), one.as_ptr(), one.as_ptr(), one.as_ptr(), one.as_ptr(), one.as_ptr(), false, &mut plant),
            LqgStatus::Ok
        );
        let mut signs = Vec::new();
        for (b, c) in [(2.0, -2.0), (-2.0, 2.0)] {
            let mut k = ptr::null_mut();
            assert_eq!(lqg_controller_new(1, 1, 1, [-2.0].as_ptr(), [b].as_ptr(), [c].as_ptr(), &mut k), LqgStatus::Ok);
            let mut s = 0;
            assert_eq!(lqg_component_sign(plant, k, &mut s), LqgStatus::Ok);
            signs.push(s);
            lqg_controller_free(k);
        }
        assert_eq!(signs[0], -signs[1]);
        lqg_plant_free(plant);
    }
}

#[test]
fn invalid_inputs_report_validation_and_null_errors() {
    unsafe {
        let json = CString::new(r#"{"domain":"continuous","A":1,"B":1,"C":1,"W":1,"V":-1,"Q":1,"R":1}"#).unwrap();
        let mut plant = ptr::null_mut();
        assert_eq!(lqg_plant_from_json(json.as_ptr(), &mut plant), LqgStatus::Validation);
        assert!(plant.is_null());
        assert!(last_error().contains("V not positive definite"), "{}", last_error());

        assert_eq!(lqg_plant_from_json(ptr::null(), &mut plant), LqgStatus::NullPointer);
        let mut j = 0.0;
        assert_eq!(lqg_cost(ptr::null(), ptr::null(), &mut j), LqgStatus::NullPointer);

        let good = CString::new(r#"{"domain":"discrete","A":1.1,"B":1,"C":1,"W":1,"V":1,"Q":1,"R":1}"#).unwrap();
        assert_eq!(lqg_plant_from_json(good.as_ptr(), &mut plant), LqgStatus::Ok);
        let (mut n, mut m, mut p) = (0, 0, 0);
        assert_eq!(lqg_plant_dims(plant, &mut n, &mut m, &mut p), LqgStatus::Ok);
        assert_eq!((n, m, p), (1, 1, 1));
        assert_eq!(last_error(), "");
        lqg_plant_free(plant);
    }
}

#[test]
fn status_strings_are_static_and_distinct() {
    let all = [
        LqgStatus::Ok,
        LqgStatus::NullPointer,
        LqgStatus::Validation,
        LqgStatus::Numerical,
        LqgStatus::NoPathFound,
        LqgStatus::Panic,
    ];
    let texts: Vec<String> = all
        .iter()
        .map(|s| unsafe { CStr::from_ptr(lqg_status_string(*s)).to_string_lossy().into_owned() })
        .collect();
    for (i, a) in texts.iter().enumerate() {
        assert!(texts[i + 1..].iter().all(|b| b != a));
    }
}
