use std::ffi::{CStr, CString};
use std::ptr;

use gridmesh::scenario::bundled_case;
use gridmesh_ffi::*;

fn scenario(horizon: usize) -> *mut GmScenario {
    let json = CString::new(bundled_case(1).unwrap().truncated(horizon).to_json()).unwrap();
    let mut handle = ptr::null_mut();
    let status = unsafe { gm_scenario_parse(json.as_ptr(), &mut handle) };
    assert_eq!(status, GmStatus::Ok);
    assert!(!handle.is_null());
    handle
}

#[test]
fn centralized_and_decentralized_through_the_abi() {
    let s = scenario(4);
    unsafe {
        let count = gm_scenario_num_microgrids(s);
        assert_eq!(count, 4);

        let mut cem = ptr::null_mut();
        assert_eq!(gm_solve_cem(s, &mut cem), GmStatus::Ok);
        let total = gm_result_objective(cem);
        let mut sum = 0.0;
        for i in 0..count {
            let mut v = f64::NAN;
            assert_eq!(gm_result_microgrid_objective(cem, i, &mut v), GmStatus::Ok);
            sum += v;
        }
        assert!((sum - total).abs() <= 1e-6 * total.abs().max(1.0));
        let mut v = 0.0;
        assert_eq!(gm_result_microgrid_objective(cem, count, &mut v), GmStatus::OutOfRange);
        assert!(!gm_last_error().is_null());
        let ledger = CStr::from_ptr(gm_result_ledger_csv(cem)).to_str().unwrap();
        assert!(ledger.starts_with("t,microgrid,counterparty,import,export\n"));

        let mut cfg = gm_admm_config_default();
        cfg.k_s = 5;
        cfg.max_iters = 40;
        let mut dem = ptr::null_mut();
        let status = gm_solve_dem(s, &cfg, &mut dem);
        assert!(matches!(status, GmStatus::Ok | GmStatus::NotConverged), "{status:?}");
        assert!(!dem.is_null());
        let iterations = gm_result_iterations(dem);
        assert!(iterations >= 1 && iterations <= 40);
        assert!(gm_result_epsilon(dem).is_finite());
        let trace = CStr::from_ptr(gm_result_trace_csv(dem)).to_str().unwrap();
        assert_eq!(trace.lines().count(), iterations + 1);
        // Centralized results carry no trace.
        assert!(gm_result_trace_csv(cem).is_null());

        gm_result_free(dem);
        gm_result_free(cem);
        gm_scenario_free(s);
    }
}

#[test]
fn malformed_input_reports_a_message() {
    let bad = CString::new("{\"microgrids\": 3}").unwrap();
    let mut handle = ptr::null_mut();
    unsafe {
        assert_eq!(gm_scenario_parse(bad.as_ptr(), &mut handle), GmStatus::InvalidInput);
        assert!(handle.is_null());
        let msg = CStr::from_ptr(gm_last_error()).to_str().unwrap();
        assert!(!msg.is_empty());

        let missing = CString::new("/nonexistent/scenario.json").unwrap();
        assert_eq!(gm_scenario_load(missing.as_ptr(), &mut handle), GmStatus::InvalidInput);

        let mut cfg = gm_admm_config_default();
        cfg.rho = -1.0;
        let s = scenario(2);
        let mut out = ptr::null_mut();
        assert_eq!(gm_solve_dem(s, &cfg, &mut out), GmStatus::InvalidInput);
        assert!(out.is_null());
        gm_scenario_free(s);
    }
}
