use std::ffi::{c_char, CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use branchspace_ffi::*;

const SIXTREE: &str = include_str!("../../core/data/sixtree.graph");
const TWOVAL: &str = include_str!("../../core/data/twoval.graph");
const CYCLIC: &str = include_str!("../../core/data/cyclic.graph");

fn parse(text: &str) -> *mut BsGraph {
    let c = CString::new(text).unwrap();
    let mut g = ptr::null_mut();
    assert_eq!(unsafe { bs_graph_parse(c.as_ptr(), &mut g) }, BsStatus::Ok);
    assert!(!g.is_null());
    g
}

fn take(s: *mut c_char) -> String {
    let out = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_owned();
    unsafe { bs_string_free(s) };
    out
}

fn last_error() -> String {
    let p = bs_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn basic_queries() {
    let g = parse(SIXTREE);
    let mut n = 0usize;
    let mut tree = false;
    let mut s = ptr::null_mut();
    unsafe {
        assert_eq!(bs_graph_vertex_count(g, &mut n), BsStatus::Ok);
        assert_eq!(bs_graph_is_arborescent(g, &mut tree), BsStatus::Ok);
        assert_eq!(bs_graph_det_s(g, &mut s), BsStatus::Ok);
    }
    assert_eq!((n, tree), (6, true));
    assert_eq!(take(s), "4");
    let (c, d) = (CString::new("c").unwrap(), CString::new("d").unwrap());
    assert_eq!(unsafe { bs_graph_dual_pairing(g, c.as_ptr(), d.as_ptr(), &mut s) }, BsStatus::Ok);
    assert_eq!(take(s), "-7/4");
    assert_eq!(unsafe { bs_graph_detprod_json(g, &mut s) }, BsStatus::Ok);
    let v: serde_json::Value = serde_json::from_str(&take(s)).unwrap();
    assert_eq!(v["p"][0][0], "28");
    unsafe { bs_graph_free(g) };
}

#[test]
fn branch_functions() {
    let g = parse(TWOVAL);
    let l = CString::new("L").unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { bs_graph_ultrametric_json(g, l.as_ptr(), &mut s) }, BsStatus::Ok);
    let v: serde_json::Value = serde_json::from_str(&take(s)).unwrap();
    assert_eq!(v["classification"], "ultrametric");
    assert_eq!(v["dist"][1][4], "6/1");
    assert_eq!(unsafe { bs_graph_tree_dot(g, l.as_ptr(), &mut s) }, BsStatus::Ok);
    assert!(take(s).starts_with("digraph end_tree {"));
    let (a, b) = (CString::new("A").unwrap(), CString::new("B").unwrap());
    assert_eq!(unsafe { bs_graph_mumford(g, a.as_ptr(), b.as_ptr(), &mut s) }, BsStatus::Ok);
    assert_eq!(take(s), "6/1");
    assert_eq!(unsafe { bs_graph_mumford(g, a.as_ptr(), a.as_ptr(), &mut s) }, BsStatus::Input);
    unsafe { bs_graph_free(g) };
}

#[test]
fn error_codes() {
    let bad = CString::new("vertex a 0\n").unwrap();
    let mut g = ptr::null_mut();
    assert_eq!(unsafe { bs_graph_parse(bad.as_ptr(), &mut g) }, BsStatus::Input);
    assert!(g.is_null());
    assert!(last_error().contains("nonnegative weight"));

    assert_eq!(unsafe { bs_graph_parse(ptr::null(), &mut g) }, BsStatus::NullPointer);
    let invalid = [0xffu8, 0];
    assert_eq!(unsafe { bs_graph_parse(invalid.as_ptr().cast(), &mut g) }, BsStatus::InvalidUtf8);

    let g = parse(CYCLIC);
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { bs_graph_detprod_json(g, &mut s) }, BsStatus::Hypothesis);
    assert_eq!(last_error(), "determinant products defined only for trees");
    let l = CString::new("L").unwrap();
    assert_eq!(unsafe { bs_graph_tree_dot(g, l.as_ptr(), &mut s) }, BsStatus::Hypothesis);
    assert_eq!(unsafe { bs_graph_det_s(g, ptr::null_mut()) }, BsStatus::NullPointer);
    assert_eq!(unsafe { bs_graph_det_s(ptr::null(), &mut s) }, BsStatus::NullPointer);
    unsafe {
        bs_graph_free(g);
        bs_graph_free(ptr::null_mut());
        bs_string_free(ptr::null_mut());
    }
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(bs_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_is_valid_c() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let header = dir.join("include").join("branchspace.h");
    let text = std::fs::read_to_string(&header).expect("header generated by build.rs");
    for name in ["bs_graph_parse", "bs_graph_free", "bs_string_free", "bs_last_error", "BS_STATUS_HYPOTHESIS = 3"] {
        assert!(text.contains(name), "{name} missing from header");
    }
    let Ok(status) = Command::new("cc").args(["-fsyntax-only", "-std=c99", "-Wall", "-Werror", "-x", "c"]).arg(&header).status()
    else {
        eprintln!("no C compiler; skipping syntax check");
        return;
    };
    assert!(status.success());
}
