//! C ABI over cavitylab. Networks are opaque handles created from instance
//! JSON; every fallible call returns a `CavStatus` and leaves a message for
//! `cav_last_error_message` on failure.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use cavitylab::cavity::{ce_decide_all, ce_vector, BoundaryCondition, Depth};
use cavitylab::exact::solve_brute;
use cavitylab::models::decode_mwis;
use cavitylab::mwis::{run_two_phase, suggested_depth};
use cavitylab::network::{load_instance, save_instance};
use cavitylab::{DecisionNetwork, Error, SubnetworkView};

/// Opaque decision network.
pub struct CavNetwork {
    inner: DecisionNetwork,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CavStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ParseError = 3,
    InvalidNetwork = 4,
    Infeasible = 5,
    InfeasibleReference = 6,
    RefusedTooLarge = 7,
    InvalidParams = 8,
    EncodeError = 9,
    BufferTooSmall = 10,
    Internal = 11,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("interior nuls were removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: CavStatus, message: impl Into<String>) -> CavStatus {
    set_error(message.into());
    status
}

fn from_error(e: Error) -> CavStatus {
    let status = match e {
        Error::Parse { .. } => CavStatus::ParseError,
        Error::InvalidNetwork(_) | Error::InvalidView(_) | Error::InvalidAssignment(_) => CavStatus::InvalidNetwork,
        Error::Infeasible => CavStatus::Infeasible,
        Error::InfeasibleReference | Error::UndefinedDifference => CavStatus::InfeasibleReference,
        Error::RefusedTooLarge { .. } => CavStatus::RefusedTooLarge,
        Error::InvalidParams { .. } | Error::InvalidDepth(_) | Error::UnsupportedCorrelation(_) => {
            CavStatus::InvalidParams
        }
        Error::Encode(_) => CavStatus::EncodeError,
        Error::NotATree | Error::Invariant(_) => CavStatus::Internal,
    };
    fail(status, e.to_string())
}

fn guard(f: impl FnOnce() -> CavStatus) -> CavStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => fail(CavStatus::Internal, "panic inside cavitylab"),
    }
}

unsafe fn network<'a>(net: *const CavNetwork) -> Result<&'a DecisionNetwork, CavStatus> {
    // SAFETY: the caller passes a handle from cav_network_from_json or null.
    unsafe { net.as_ref() }
        .map(|n| &n.inner)
        .ok_or_else(|| fail(CavStatus::NullPointer, "network handle is null"))
}

/// Message of the last failure on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn cav_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parses instance JSON into a new handle stored in `*out`.
///
/// # Safety
/// `bytes` must point to `len` readable bytes and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cav_network_from_json(bytes: *const u8, len: usize, out: *mut *mut CavNetwork) -> CavStatus {
    guard(|| {
        if bytes.is_null() || out.is_null() {
            return fail(CavStatus::NullPointer, "bytes and out must be non-null");
        }
        // SAFETY: checked non-null; the caller guarantees `len` bytes.
        let data = unsafe { slice::from_raw_parts(bytes, len) };
        match load_instance(data) {
            Ok(inner) => {
                // SAFETY: checked non-null.
                unsafe { *out = Box::into_raw(Box::new(CavNetwork { inner })) };
                CavStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `net` must come from `cav_network_from_json` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn cav_network_free(net: *mut CavNetwork) {
    if !net.is_null() {
        // SAFETY: ownership returns to Rust exactly once.
        drop(unsafe { Box::from_raw(net) });
    }
}

/// Node count, or 0 for a null handle.
///
/// # Safety
/// `net` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn cav_network_num_nodes(net: *const CavNetwork) -> usize {
    // SAFETY: forwarded caller contract.
    unsafe { net.as_ref() }.map_or(0, |n| n.inner.num_nodes())
}

/// Action count T, or 0 for a null handle.
///
/// # Safety
/// `net` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn cav_network_num_actions(net: *const CavNetwork) -> usize {
    // SAFETY: forwarded caller contract.
    unsafe { net.as_ref() }.map_or(0, |n| n.inner.num_actions())
}

/// Serializes to a NUL-terminated instance JSON string owned by the caller;
/// release it with `cav_string_free`.
///
/// # Safety
/// `net` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cav_network_to_json(net: *const CavNetwork, out: *mut *mut c_char) -> CavStatus {
    guard(|| {
        // SAFETY: forwarded caller contract.
        let net = match unsafe { network(net) } {
            Ok(n) => n,
            Err(s) => return s,
        };
        if out.is_null() {
            return fail(CavStatus::NullPointer, "out must be non-null");
        }
        let text = CString::new(save_instance(net)).expect("JSON has no interior nul");
        // SAFETY: checked non-null.
        unsafe { *out = text.into_raw() };
        CavStatus::Ok
    })
}

/// # Safety
/// `s` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn cav_string_free(s: *mut c_char) {
    if !s.is_null() {
        // SAFETY: the string was produced by CString::into_raw.
        drop(unsafe { CString::from_raw(s) });
    }
}

/// Exact optimum by enumeration. `argmax` receives `argmax_len` entries and
/// must hold one per node; `optimum` is written on success.
///
/// # Safety
/// Pointers must be valid for the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn cav_solve_brute(
    net: *const CavNetwork,
    optimum: *mut f64,
    argmax: *mut usize,
    argmax_len: usize,
    unique: *mut bool,
) -> CavStatus {
    guard(|| {
        // SAFETY: forwarded caller contract.
        let net = match unsafe { network(net) } {
            Ok(n) => n,
            Err(s) => return s,
        };
        if optimum.is_null() || argmax.is_null() || unique.is_null() {
            return fail(CavStatus::NullPointer, "optimum, argmax and unique must be non-null");
        }
        if argmax_len < net.num_nodes() {
            return fail(CavStatus::BufferTooSmall, format!("argmax needs {} entries", net.num_nodes()));
        }
        match solve_brute(net) {
            Ok(s) => {
                // SAFETY: checked non-null and long enough.
                unsafe {
                    *optimum = s.optimum.value();
                    slice::from_raw_parts_mut(argmax, argmax_len)[..s.argmax.len()].copy_from_slice(&s.argmax);
                    *unique = s.unique;
                }
                CavStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

fn parse_bc(bc: *const c_char) -> Result<BoundaryCondition, CavStatus> {
    if bc.is_null() {
        return Ok(BoundaryCondition::Zero);
    }
    // SAFETY: the caller passes a NUL-terminated string.
    let text = unsafe { CStr::from_ptr(bc) }
        .to_str()
        .map_err(|_| fail(CavStatus::InvalidArgument, "boundary condition is not UTF-8"))?;
    text.parse().map_err(from_error)
}

fn depth_of(depth: i64) -> Depth {
    if depth < 0 {
        Depth::Full
    } else {
        Depth::Bounded(depth as usize)
    }
}

/// CE estimates B(x) for every action of `node` at `depth` (negative for the
/// full expansion). `bc` is `zero`, `gap`, `const:C`, `uniform:LO:HI:SEED`
/// or null for zero. `estimates` receives T values and `decision` the
/// smallest maximizing action.
///
/// # Safety
/// Pointers must be valid; `estimates` must hold `estimates_len` values.
#[no_mangle]
pub unsafe extern "C" fn cav_ce_vector(
    net: *const CavNetwork,
    node: usize,
    depth: i64,
    bc: *const c_char,
    estimates: *mut f64,
    estimates_len: usize,
    decision: *mut usize,
) -> CavStatus {
    guard(|| {
        // SAFETY: forwarded caller contract.
        let net = match unsafe { network(net) } {
            Ok(n) => n,
            Err(s) => return s,
        };
        if estimates.is_null() || decision.is_null() {
            return fail(CavStatus::NullPointer, "estimates and decision must be non-null");
        }
        if estimates_len < net.num_actions() {
            return fail(CavStatus::BufferTooSmall, format!("estimates needs {} entries", net.num_actions()));
        }
        let bc = match parse_bc(bc) {
            Ok(b) => b,
            Err(s) => return s,
        };
        match ce_vector(&SubnetworkView::new(net), node, depth_of(depth), &bc) {
            Ok(r) => {
                // SAFETY: checked non-null and long enough.
                unsafe {
                    let out = slice::from_raw_parts_mut(estimates, estimates_len);
                    for (o, e) in out.iter_mut().zip(&r.estimates) {
                        *o = e.value();
                    }
                    *decision = r.decision;
                }
                CavStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// CE decisions for every node. `total` receives F(decisions), which is
/// -inf when a hard constraint is violated. Returns the status of the first
/// failing node, with its decision left at 0.
///
/// # Safety
/// `decisions` must hold `len` entries and `total` be writable.
#[no_mangle]
pub unsafe extern "C" fn cav_ce_decide_all(
    net: *const CavNetwork,
    depth: i64,
    bc: *const c_char,
    decisions: *mut usize,
    len: usize,
    total: *mut f64,
) -> CavStatus {
    guard(|| {
        // SAFETY: forwarded caller contract.
        let net = match unsafe { network(net) } {
            Ok(n) => n,
            Err(s) => return s,
        };
        if decisions.is_null() || total.is_null() {
            return fail(CavStatus::NullPointer, "decisions and total must be non-null");
        }
        if len < net.num_nodes() {
            return fail(CavStatus::BufferTooSmall, format!("decisions needs {} entries", net.num_nodes()));
        }
        let bc = match parse_bc(bc) {
            Ok(b) => b,
            Err(s) => return s,
        };
        let d = ce_decide_all(net, depth_of(depth), &bc);
        let value = net.evaluate(&d.decisions).expect("decisions are in range");
        // SAFETY: checked non-null and long enough.
        unsafe {
            slice::from_raw_parts_mut(decisions, len)[..d.decisions.len()].copy_from_slice(&d.decisions);
            *total = value.value();
        }
        match d.results.into_iter().find_map(Result::err) {
            Some(e) => from_error(e),
            None => CavStatus::Ok,
        }
    })
}

/// Two-phase MWIS algorithm on a network that encodes an MWIS instance.
/// `chosen` receives one flag per node; `depth` 0 selects the suggested
/// depth for `epsilon`.
///
/// # Safety
/// `chosen` must hold `len` entries and `weight` be writable.
#[no_mangle]
pub unsafe extern "C" fn cav_mwis_two_phase(
    net: *const CavNetwork,
    epsilon: f64,
    depth: usize,
    seed: u64,
    chosen: *mut bool,
    len: usize,
    weight: *mut f64,
) -> CavStatus {
    guard(|| {
        // SAFETY: forwarded caller contract.
        let net = match unsafe { network(net) } {
            Ok(n) => n,
            Err(s) => return s,
        };
        if chosen.is_null() || weight.is_null() {
            return fail(CavStatus::NullPointer, "chosen and weight must be non-null");
        }
        if len < net.num_nodes() {
            return fail(CavStatus::BufferTooSmall, format!("chosen needs {} entries", net.num_nodes()));
        }
        let graph = match decode_mwis(net) {
            Ok(g) => g,
            Err(e) => return from_error(e),
        };
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return fail(CavStatus::InvalidParams, format!("epsilon must lie in (0, 1), got {epsilon}"));
        }
        let r = if depth == 0 { suggested_depth(epsilon) } else { depth };
        match run_two_phase(&graph, epsilon, r, seed) {
            Ok(run) => {
                // SAFETY: checked non-null and long enough.
                unsafe {
                    let flags = slice::from_raw_parts_mut(chosen, len);
                    flags.fill(false);
                    for &v in &run.chosen_set {
                        flags[v] = true;
                    }
                    *weight = run.weight;
                }
                CavStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Suggested even depth for `epsilon`, or 0 outside (0, 1).
#[no_mangle]
pub extern "C" fn cav_suggested_depth(epsilon: f64) -> usize {
    if epsilon > 0.0 && epsilon < 1.0 {
        suggested_depth(epsilon)
    } else {
        0
    }
}
