//! C interface to `branchspace`.
//!
//! Graphs are opaque [`BsGraph`] handles created by [`bs_graph_parse`] and
//! released with [`bs_graph_free`]. Every fallible call returns a
//! [`BsStatus`] and writes its result through an out-pointer. Strings
//! returned through `char **` are owned by the caller and must be released
//! with [`bs_string_free`]. After a failure, [`bs_last_error`] describes it.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::OnceLock;

use branchspace::detprod::build_table;
use branchspace::dualgraph::{parse_graph, WeightedDualGraph};
use branchspace::exactalg::rat_json;
use branchspace::lattice::{build_lattice, IntersectionLattice};
use branchspace::treekit;
use branchspace::ultra;
use branchspace::{Error, ErrorKind};

/// Status codes. The nonzero library codes match the CLI exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BsStatus {
    Ok = 0,
    /// Malformed or invalid input.
    Input = 2,
    /// Valid input outside the hypotheses of the computation.
    Hypothesis = 3,
    /// Two independent computations disagreed.
    CrossCheck = 4,
    NullPointer = 10,
    InvalidUtf8 = 11,
    Panic = 12,
}

/// A parsed graph. The intersection lattice is computed on first use.
pub struct BsGraph {
    graph: WeightedDualGraph,
    lattice: OnceLock<Result<IntersectionLattice, Error>>,
}

impl BsGraph {
    fn lattice(&self) -> Result<&IntersectionLattice, Error> {
        self.lattice.get_or_init(|| build_lattice(&self.graph)).as_ref().map_err(Clone::clone)
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(BsStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e.kind() {
            ErrorKind::Input => BsStatus::Input,
            ErrorKind::Hypothesis => BsStatus::Hypothesis,
            ErrorKind::CrossCheck => BsStatus::CrossCheck,
        };
        Failure(status, e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> BsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => BsStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            BsStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(BsStatus::NullPointer, format!("`{what}` is null"))
}

/// # Safety
/// `p` is null or points to a NUL-terminated string.
unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Failure(BsStatus::InvalidUtf8, format!("`{what}` is not UTF-8")))
}

/// # Safety
/// `g` is null or a live handle from [`bs_graph_parse`].
unsafe fn read_graph<'a>(g: *const BsGraph) -> Result<&'a BsGraph, Failure> {
    g.as_ref().ok_or_else(|| null("graph"))
}

/// # Safety
/// `out` is null or valid for a write.
unsafe fn write_out<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("out"));
    }
    out.write(value);
    Ok(())
}

/// # Safety
/// `out` is null or valid for a write.
unsafe fn write_string(out: *mut *mut c_char, s: String) -> Result<(), Failure> {
    let c = CString::new(s).map_err(|_| Failure(BsStatus::Input, "result contains a NUL byte".into()))?;
    if out.is_null() {
        return Err(null("out"));
    }
    out.write(c.into_raw());
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn bs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failed call on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn bs_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parses a graph file. On success `*out` receives a new handle.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn bs_graph_parse(text: *const c_char, out: *mut *mut BsGraph) -> BsStatus {
    guard(|| {
        let text = read_str(text, "text")?;
        let graph = parse_graph(text)?;
        let handle = Box::new(BsGraph { graph, lattice: OnceLock::new() });
        write_out(out, Box::into_raw(handle))
    })
}

/// Releases a handle. NULL is ignored.
///
/// # Safety
/// `g` must be NULL or a handle from [`bs_graph_parse`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bs_graph_free(g: *mut BsGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must be NULL or a string from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bs_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `g` must be a live handle and `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn bs_graph_vertex_count(g: *const BsGraph, out: *mut usize) -> BsStatus {
    guard(|| write_out(out, read_graph(g)?.graph.len()))
}

/// # Safety
/// `g` must be a live handle and `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn bs_graph_is_arborescent(g: *const BsGraph, out: *mut bool) -> BsStatus {
    guard(|| write_out(out, read_graph(g)?.graph.is_arborescent()))
}

/// `det(S)` as a decimal string. Fails with `Input` unless the form is
/// negative definite.
///
/// # Safety
/// `g` must be a live handle and `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn bs_graph_det_s(g: *const BsGraph, out: *mut *mut c_char) -> BsStatus {
    guard(|| {
        let lat = read_graph(g)?.lattice()?;
        write_string(out, lat.det_s().to_string())
    })
}

/// `E_u*·E_v*` as `"p/q"`.
///
/// # Safety
/// `g` must be a live handle, `u` and `v` NUL-terminated strings and `out`
/// valid for a write.
#[no_mangle]
pub unsafe extern "C" fn bs_graph_dual_pairing(
    g: *const BsGraph,
    u: *const c_char,
    v: *const c_char,
    out: *mut *mut c_char,
) -> BsStatus {
    guard(|| {
        let (u, v) = (read_str(u, "u")?, read_str(v, "v")?);
        let lat = read_graph(g)?.lattice()?;
        write_string(out, rat_json(&lat.dual_pairing(u, v)?))
    })
}

/// Intersection number `A·B` of two distinct branches as `"p/q"`.
///
/// # Safety
/// As [`bs_graph_dual_pairing`].
#[no_mangle]
pub unsafe extern "C" fn bs_graph_mumford(
    g: *const BsGraph,
    a: *const c_char,
    b: *const c_char,
    out: *mut *mut c_char,
) -> BsStatus {
    guard(|| {
        let (a, b) = (read_str(a, "a")?, read_str(b, "b")?);
        let lat = read_graph(g)?.lattice()?;
        write_string(out, rat_json(&lat.mumford_intersection(a, b)?))
    })
}

fn others(g: &WeightedDualGraph, base: &str) -> Result<Vec<String>, Failure> {
    g.branch(base)?;
    let fam: Vec<String> = g.branch_names().into_iter().filter(|b| b != base).collect();
    if fam.is_empty() {
        return Err(Error::EmptyFamily.into());
    }
    Ok(fam)
}

/// `U_L` over all branches other than `base`, as JSON
/// `{"labels": [...], "dist": [["p/q", ...], ...], "classification": ...}`.
///
/// # Safety
/// `g` must be a live handle, `base` a NUL-terminated string and `out`
/// valid for a write.
#[no_mangle]
pub unsafe extern "C" fn bs_graph_ultrametric_json(
    g: *const BsGraph,
    base: *const c_char,
    out: *mut *mut c_char,
) -> BsStatus {
    guard(|| {
        let base = read_str(base, "base")?;
        let h = read_graph(g)?;
        let fam = others(&h.graph, base)?;
        let u = ultra::ultrametric_ul(h.lattice()?, base, &fam)?;
        let mut v = u.to_json();
        v["classification"] = ultra::classify(&u).name().into();
        write_string(out, v.to_string())
    })
}

/// Determinant products of a tree as JSON `{"labels", "detS", "p"}`,
/// checked against the adjugate.
///
/// # Safety
/// `g` must be a live handle and `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn bs_graph_detprod_json(g: *const BsGraph, out: *mut *mut c_char) -> BsStatus {
    guard(|| {
        let t = build_table(&read_graph(g)?.graph, true)?;
        write_string(out, t.to_json().to_string())
    })
}

/// Graphviz rendering of the end-rooted tree of `U_L` over all branches
/// other than `base`. Fails with `Hypothesis` when `U_L` is not an
/// ultrametric.
///
/// # Safety
/// As [`bs_graph_ultrametric_json`].
#[no_mangle]
pub unsafe extern "C" fn bs_graph_tree_dot(
    g: *const BsGraph,
    base: *const c_char,
    out: *mut *mut c_char,
) -> BsStatus {
    guard(|| {
        let base = read_str(base, "base")?;
        let h = read_graph(g)?;
        let fam = others(&h.graph, base)?;
        let u = ultra::ultrametric_ul(h.lattice()?, base, &fam)?;
        if let Some(w) = ultra::verify_ultrametric(&u) {
            return Err(Error::NotUltrametric(format!("fails on ({}, {}, {})", w[0], w[1], w[2])).into());
        }
        let (h, diam) = treekit::closed_balls(&u)?;
        let (_, end) = treekit::hierarchy_to_trees(&h, &diam)?;
        write_string(out, end.to_dot("end_tree"))
    })
}
