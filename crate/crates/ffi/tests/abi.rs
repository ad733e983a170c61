use std::ffi::{CStr, CString};
use std::process::Command;
use std::ptr;

use cavitylab_ffi::*;

const K2_MWIS: &str = r#"{"num_actions":2,"nodes":[{"id":0,"potential":[0,2]},{"id":1,"potential":[0,3]}],"edges":[{"u":0,"v":1,"table":[[0,0],[0,"-inf"]]}]}"#;

fn load(json: &str) -> *mut CavNetwork {
    let mut net = ptr::null_mut();
    let status = unsafe { cav_network_from_json(json.as_ptr(), json.len(), &mut net) };
    assert_eq!(status, CavStatus::Ok);
    net
}

#[test]
fn round_trip_and_metadata() {
    let net = load(K2_MWIS);
    unsafe {
        assert_eq!(cav_network_num_nodes(net), 2);
        assert_eq!(cav_network_num_actions(net), 2);
        let mut text = ptr::null_mut();
        assert_eq!(cav_network_to_json(net, &mut text), CavStatus::Ok);
        assert_eq!(CStr::from_ptr(text).to_str().unwrap(), K2_MWIS.replace("[0,2]", "[0.0,2.0]").replace("[0,3]", "[0.0,3.0]").replace("[[0,0],[0,", "[[0.0,0.0],[0.0,"));
        cav_string_free(text);
        cav_network_free(net);
        assert_eq!(cav_network_num_nodes(ptr::null()), 0);
    }
}

#[test]
fn solve_and_ce() {
    let net = load(K2_MWIS);
    unsafe {
        let (mut opt, mut argmax, mut unique) = (0.0, [9usize; 2], false);
        assert_eq!(cav_solve_brute(net, &mut opt, argmax.as_mut_ptr(), 2, &mut unique), CavStatus::Ok);
        assert_eq!((opt, argmax, unique), (3.0, [0, 1], true));

        let (mut est, mut dec) = ([0.0; 2], 9usize);
        let gap = CString::new("gap").unwrap();
        assert_eq!(cav_ce_vector(net, 1, 2, gap.as_ptr(), est.as_mut_ptr(), 2, &mut dec), CavStatus::Ok);
        assert_eq!((est, dec), ([0.0, 1.0], 1));
        assert_eq!(cav_ce_vector(net, 1, -1, ptr::null(), est.as_mut_ptr(), 2, &mut dec), CavStatus::Ok);
        assert_eq!(est, [0.0, 1.0]);

        let (mut decisions, mut total) = ([9usize; 2], 0.0);
        assert_eq!(cav_ce_decide_all(net, 2, ptr::null(), decisions.as_mut_ptr(), 2, &mut total), CavStatus::Ok);
        assert_eq!((decisions, total), ([0, 1], 3.0));

        let (mut chosen, mut w) = ([false; 2], 0.0);
        assert_eq!(cav_mwis_two_phase(net, 0.1, 2, 1, chosen.as_mut_ptr(), 2, &mut w), CavStatus::Ok);
        assert_eq!((chosen, w), ([false, true], 3.0));
        cav_network_free(net);
    }
}

#[test]
fn errors_are_reported() {
    unsafe {
        let bad = "{\"num_actions\":2,";
        let mut net = ptr::null_mut();
        assert_eq!(cav_network_from_json(bad.as_ptr(), bad.len(), &mut net), CavStatus::ParseError);
        assert!(net.is_null());
        assert!(!cav_last_error_message().is_null());

        let net = load(K2_MWIS);
        let mut small = [0usize; 1];
        let (mut opt, mut unique) = (0.0, false);
        assert_eq!(cav_solve_brute(net, &mut opt, small.as_mut_ptr(), 1, &mut unique), CavStatus::BufferTooSmall);
        let (mut est, mut dec) = ([0.0; 2], 0usize);
        let junk = CString::new("nonsense").unwrap();
        assert_eq!(cav_ce_vector(net, 0, 1, junk.as_ptr(), est.as_mut_ptr(), 2, &mut dec), CavStatus::InvalidParams);
        let msg = CStr::from_ptr(cav_last_error_message()).to_str().unwrap();
        assert!(msg.contains("bc"), "{msg}");
        assert_eq!(cav_ce_vector(ptr::null(), 0, 1, ptr::null(), est.as_mut_ptr(), 2, &mut dec), CavStatus::NullPointer);
        let (mut chosen, mut w) = ([false; 2], 0.0);
        assert_eq!(cav_mwis_two_phase(net, 0.1, 3, 1, chosen.as_mut_ptr(), 2, &mut w), CavStatus::InvalidParams);
        cav_network_free(net);
        assert_eq!(cav_suggested_depth(0.15), 4262);
        assert_eq!(cav_suggested_depth(2.0), 0);
    }
}

#[test]
fn header_compiles_as_c() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/cavitylab.h");
    let text = std::fs::read_to_string(header).unwrap();
    for name in ["cav_network_from_json", "cav_ce_vector", "cav_mwis_two_phase", "CAV_STATUS_OK", "CavNetwork"] {
        assert!(text.contains(name), "header lacks {name}");
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("probe.c");
    std::fs::write(&src, format!("#include \"{header}\"\nint main(void) {{ return CAV_STATUS_OK; }}\n")).unwrap();
    match Command::new("cc").arg("-fsyntax-only").arg("-Wall").arg("-Werror").arg(&src).status() {
        Ok(status) => assert!(status.success(), "header does not compile"),
        Err(_) => eprintln!("no C compiler available, skipping syntax check"),
    }
}
