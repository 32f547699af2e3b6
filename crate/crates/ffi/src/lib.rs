// SPDX-License-Identifier: Apache-2.0

//! C interface to the crosstalk workbench.
//!
//! Objects are opaque handles created by `xt_*` constructors and released by
//! the matching `*_free`. Every call returns an [`XtStatus`]; on failure the
//! message is available from [`xt_last_error`] on the same thread. Strings
//! returned through `char **` are owned by the caller and released with
//! [`xt_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use crosstalk::gatelib::{builtin_library, TemplateSet};
use crosstalk::mapper::{map_network, MapOptions, Style};
use crosstalk::metrics::{transistor_count, CostModel};
use crosstalk::netlist::{parse_blif, parse_xtn, serialize_xtn, validate, CrosstalkNetlist, LogicNetwork};
use crosstalk::polymorph::{apply_key, Key};
use crosstalk::sim::{self, verify_equivalence, write_vcd, Stimulus, Strategy, DEFAULT_RANDOM_VECTORS};

/// Result of every call. Values 1 to 4 match the command-line exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XtStatus {
    Ok = 0,
    Parse = 1,
    Semantic = 2,
    VerifyFailed = 3,
    Io = 4,
    NullPointer = 5,
    InvalidUtf8 = 6,
    Panic = 7,
}

/// Mapping decomposition style.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XtStyle {
    NandNand = 0,
    AndOr = 1,
}

/// Gate template library.
pub struct XtLibrary {
    inner: TemplateSet,
}

/// Technology-independent network read from BLIF.
pub struct XtNetwork {
    inner: LogicNetwork,
}

/// Mapped crosstalk netlist.
pub struct XtNetlist {
    inner: CrosstalkNetlist,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

type Outcome = Result<(), (XtStatus, String)>;

fn guard(f: impl FnOnce() -> Outcome) -> XtStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => XtStatus::Ok,
        Ok(Err((status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            XtStatus::Panic
        }
    }
}

fn null(what: &str) -> (XtStatus, String) {
    (XtStatus::NullPointer, format!("{what} is null"))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, (XtStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|e| (XtStatus::InvalidUtf8, format!("{what}: {e}")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, (XtStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn put<T>(out: *mut T, value: T, what: &str) -> Outcome {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

fn boxed<T>(value: T) -> *mut T {
    Box::into_raw(Box::new(value))
}

fn owned_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).expect("interior nul removed").into_raw()
}

fn semantic(e: impl std::fmt::Display) -> (XtStatus, String) {
    (XtStatus::Semantic, e.to_string())
}

fn parse(e: impl std::fmt::Display) -> (XtStatus, String) {
    (XtStatus::Parse, e.to_string())
}

/// Message for the last failed call on this thread, or null. Valid until the
/// next call on the same thread.
#[no_mangle]
pub extern "C" fn xt_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn xt_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// The builtin template library.
///
/// # Safety
/// `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn xt_library_builtin(out: *mut *mut XtLibrary) -> XtStatus {
    guard(|| put(out, boxed(XtLibrary { inner: builtin_library() }), "out"))
}

/// Library from its JSON form.
///
/// # Safety
/// `json` must be a nul-terminated string; `out` valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn xt_library_from_json(json: *const c_char, out: *mut *mut XtLibrary) -> XtStatus {
    guard(|| {
        let inner = TemplateSet::from_json(text(json, "json")?).map_err(parse)?;
        put(out, boxed(XtLibrary { inner }), "out")
    })
}

/// # Safety
/// `lib` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn xt_library_free(lib: *mut XtLibrary) {
    if !lib.is_null() {
        drop(Box::from_raw(lib));
    }
}

/// Parses a BLIF network.
///
/// # Safety
/// `blif` must be a nul-terminated string; `out` valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn xt_network_parse_blif(blif: *const c_char, out: *mut *mut XtNetwork) -> XtStatus {
    guard(|| {
        let inner = parse_blif(text(blif, "blif")?).map_err(parse)?;
        put(out, boxed(XtNetwork { inner }), "out")
    })
}

/// # Safety
/// `network` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn xt_network_free(network: *mut XtNetwork) {
    if !network.is_null() {
        drop(Box::from_raw(network));
    }
}

/// Parses and validates a `.xtn` netlist.
///
/// # Safety
/// `lib` must be a live handle, `xtn` a nul-terminated string and `out`
/// valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn xt_netlist_parse(lib: *const XtLibrary, xtn: *const c_char, out: *mut *mut XtNetlist) -> XtStatus {
    guard(|| {
        let lib = &handle(lib, "lib")?.inner;
        let inner = parse_xtn(text(xtn, "xtn")?, lib).map_err(parse)?;
        let diags = validate(&inner, lib);
        if diags.has_errors() {
            return Err(semantic(diags));
        }
        put(out, boxed(XtNetlist { inner }), "out")
    })
}

/// The netlist in `.xtn` form.
///
/// # Safety
/// `netlist` must be a live handle and `out` valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn xt_netlist_serialize(netlist: *const XtNetlist, out: *mut *mut c_char) -> XtStatus {
    guard(|| {
        let n = &handle(netlist, "netlist")?.inner;
        put(out, owned_string(serialize_xtn(n)), "out")
    })
}

/// # Safety
/// `netlist` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn xt_netlist_free(netlist: *mut XtNetlist) {
    if !netlist.is_null() {
        drop(Box::from_raw(netlist));
    }
}

/// Maps `network` onto `lib`. `transistors` may be null.
///
/// # Safety
/// Handles must be live; `out` valid for a pointer write; `transistors`
/// null or valid for a write.
#[no_mangle]
pub unsafe extern "C" fn xt_map(
    network: *const XtNetwork,
    lib: *const XtLibrary,
    style: XtStyle,
    fanout_limit: u32,
    use_composites: bool,
    out: *mut *mut XtNetlist,
    transistors: *mut u32,
) -> XtStatus {
    guard(|| {
        let network = &handle(network, "network")?.inner;
        let lib = &handle(lib, "lib")?.inner;
        let options = MapOptions {
            style: match style {
                XtStyle::NandNand => Style::NandNand,
                XtStyle::AndOr => Style::AndOr,
            },
            fanout_limit: fanout_limit as usize,
            use_composites,
            polymorphic_cells: Vec::new(),
        };
        let (inner, report, _) = map_network(network, lib, &options).map_err(semantic)?;
        if !transistors.is_null() {
            transistors.write(report.total);
        }
        put(out, boxed(XtNetlist { inner }), "out")
    })
}

/// Transistor count under the default cost model.
///
/// # Safety
/// Handles must be live and `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn xt_transistor_count(netlist: *const XtNetlist, lib: *const XtLibrary, out: *mut u32) -> XtStatus {
    guard(|| {
        let n = &handle(netlist, "netlist")?.inner;
        let lib = &handle(lib, "lib")?.inner;
        put(out, transistor_count(n, lib, &CostModel::default()).total, "out")
    })
}

/// Equivalence check against `reference`: exhaustive up to 16 inputs, else
/// 10000 vectors drawn from `seed`. Returns `XT_STATUS_VERIFY_FAILED` on a
/// mismatch. `vectors` may be null.
///
/// # Safety
/// Handles must be live; `vectors` null or valid for a write.
#[no_mangle]
pub unsafe extern "C" fn xt_verify(
    netlist: *const XtNetlist,
    lib: *const XtLibrary,
    reference: *const XtNetwork,
    seed: u64,
    vectors: *mut u64,
) -> XtStatus {
    guard(|| {
        let n = &handle(netlist, "netlist")?.inner;
        let lib = &handle(lib, "lib")?.inner;
        let reference = &handle(reference, "reference")?.inner;
        let strategy = Strategy::Auto { count: DEFAULT_RANDOM_VECTORS, seed };
        let report = verify_equivalence(n, lib, reference, strategy).map_err(semantic)?;
        if !vectors.is_null() {
            vectors.write(report.vectors as u64);
        }
        match report.mismatches.first() {
            None => Ok(()),
            Some(m) => Err((XtStatus::VerifyFailed, m.describe(&report))),
        }
    })
}

/// Simulates under a stimulus text and returns the VCD dump. `settle` of 0
/// selects the default settle time.
///
/// # Safety
/// Handles must be live, `stimulus` a nul-terminated string and `out` valid
/// for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn xt_simulate_vcd(
    netlist: *const XtNetlist,
    lib: *const XtLibrary,
    stimulus: *const c_char,
    settle: u32,
    out: *mut *mut c_char,
) -> XtStatus {
    guard(|| {
        let n = &handle(netlist, "netlist")?.inner;
        let lib = &handle(lib, "lib")?.inner;
        let stim = Stimulus::parse(text(stimulus, "stimulus")?).map_err(parse)?;
        let settle = (settle > 0).then_some(settle as usize);
        let trace = sim::run(n, lib, &stim, settle).map_err(semantic)?;
        let mut buf = Vec::new();
        write_vcd(&trace, &mut buf).map_err(|e| (XtStatus::Io, e.to_string()))?;
        put(out, owned_string(String::from_utf8(buf).expect("VCD is ASCII")), "out")
    })
}

/// Binds the free controls, in netlist order, to the hex key.
///
/// # Safety
/// `netlist` must be live, `hex` a nul-terminated string and `out` valid for
/// a pointer write.
#[no_mangle]
pub unsafe extern "C" fn xt_apply_key(netlist: *const XtNetlist, hex: *const c_char, out: *mut *mut XtNetlist) -> XtStatus {
    guard(|| {
        let n = &handle(netlist, "netlist")?.inner;
        let controls = n.free_controls().into_iter().map(String::from).collect();
        let key = Key::from_hex(controls, text(hex, "hex")?).map_err(semantic)?;
        let inner = apply_key(n, &key).map_err(semantic)?;
        put(out, boxed(XtNetlist { inner }), "out")
    })
}
