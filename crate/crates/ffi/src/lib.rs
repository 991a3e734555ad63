//! C ABI for qgraph.
//!
//! Objects are opaque handles created by `qg_*_new` and released by the
//! matching `qg_*_free`. Every fallible call returns a [`QgStatus`]; on a
//! non-zero status [`qg_last_error`] describes the failure on the calling
//! thread. Results are written through out-pointers.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use qgraph::graph::edge_index;
use qgraph::hamiltonian::{energy, Ensemble, ModelKind, ModelParams};
use qgraph::mc::{Chain, ChainConfig, StartState};
use qgraph::symmetry::{automorphism_count, canonical_form};
use qgraph::{Error, GraphState};

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QgStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Refused = 3,
    Overflow = 4,
    Internal = 5,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QgModelKind {
    Free = 0,
    Ising = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QgEnsemble {
    Labeled = 0,
    Unlabeled = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QgStart {
    Hot = 0,
    Cold = 1,
    Auto = 2,
}

/// Graph state over the edge slots of K_n.
pub struct QgGraph(GraphState);

/// Hamiltonian parameters.
pub struct QgModel(ModelParams);

/// Metropolis chain.
pub struct QgChain(Chain);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> QgStatus {
    match e {
        Error::Refused(_) => QgStatus::Refused,
        Error::Context { source, .. } => status_of(source),
        Error::Io(_) => QgStatus::Internal,
        _ => QgStatus::InvalidArgument,
    }
}

enum Fail {
    Null,
    Overflow(String),
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Fail {
        Fail::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> QgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => QgStatus::Ok,
        Ok(Err(Fail::Null)) => {
            set_error("null pointer argument".into());
            QgStatus::NullPointer
        }
        Ok(Err(Fail::Overflow(msg))) => {
            set_error(msg);
            QgStatus::Overflow
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            QgStatus::Internal
        }
    }
}

unsafe fn get<'a, T>(p: *const T) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null)
}

unsafe fn get_mut<'a, T>(p: *mut T) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or(Fail::Null)
}

unsafe fn put<T>(out: *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail::Null);
    }
    out.write(value);
    Ok(())
}

fn boxed<T>(value: T) -> *mut T {
    Box::into_raw(Box::new(value))
}

unsafe fn release<T>(p: *mut T) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Message for the last failed call on this thread. Valid until the next
/// failing call on the same thread; never null.
#[no_mangle]
pub extern "C" fn qg_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version, static storage.
#[no_mangle]
pub extern "C" fn qg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Empty graph on n vertices.
///
/// # Safety
/// `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn qg_graph_new(n: usize, out: *mut *mut QgGraph) -> QgStatus {
    guard(|| {
        let g = GraphState::empty(n)?;
        put(out, boxed(QgGraph(g)))
    })
}

/// Graph from `len` slot levels in lexicographic pair order.
///
/// # Safety
/// `levels` must point to `len` bytes; `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn qg_graph_from_levels(n: usize, levels: *const u8, len: usize, out: *mut *mut QgGraph) -> QgStatus {
    guard(|| {
        if levels.is_null() {
            return Err(Fail::Null);
        }
        let levels = std::slice::from_raw_parts(levels, len);
        let g = GraphState::from_levels(n, levels)?;
        put(out, boxed(QgGraph(g)))
    })
}

/// # Safety
/// `g` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qg_graph_free(g: *mut QgGraph) {
    release(g)
}

/// # Safety
/// `g` must be a live handle; `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn qg_graph_clone(g: *const QgGraph, out: *mut *mut QgGraph) -> QgStatus {
    guard(|| {
        let g = get(g)?;
        put(out, boxed(QgGraph(g.0.clone())))
    })
}

/// # Safety
/// `g` must be a live handle; `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn qg_graph_vertex_count(g: *const QgGraph, out: *mut usize) -> QgStatus {
    guard(|| put(out, get(g)?.0.n()))
}

/// Number of slots at level 1.
///
/// # Safety
/// `g` must be a live handle; `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn qg_graph_n1(g: *const QgGraph, out: *mut usize) -> QgStatus {
    guard(|| put(out, get(g)?.0.n1()))
}

/// # Safety
/// `g` must be a live handle; `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn qg_graph_has_edge(g: *const QgGraph, i: usize, j: usize, out: *mut bool) -> QgStatus {
    guard(|| {
        let g = &get(g)?.0;
        edge_index(i, j, g.n())?;
        put(out, g.has_edge(i, j))
    })
}

/// Toggles the level of slot {i, j}.
///
/// # Safety
/// `g` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn qg_graph_flip(g: *mut QgGraph, i: usize, j: usize) -> QgStatus {
    guard(|| {
        let g = &mut get_mut(g)?.0;
        let e = edge_index(i, j, g.n())?;
        g.flip_in_place(e)?;
        Ok(())
    })
}

/// |Γ|; `Overflow` when it does not fit in 64 bits.
///
/// # Safety
/// `g` must be a live handle; `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn qg_graph_automorphism_count(g: *const QgGraph, out: *mut u64) -> QgStatus {
    guard(|| {
        let count = automorphism_count(&get(g)?.0);
        let count = u64::try_from(count).map_err(|_| Fail::Overflow(format!("|Aut| = {count} exceeds 64 bits")))?;
        put(out, count)
    })
}

/// Canonical representative of the isomorphism class, as a new handle.
///
/// # Safety
/// `g` must be a live handle; `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn qg_graph_canonical(g: *const QgGraph, out: *mut *mut QgGraph) -> QgStatus {
    guard(|| {
        let c = canonical_form(&get(g)?.0);
        put(out, boxed(QgGraph(c)))
    })
}

/// Whether two graphs hold the same levels.
///
/// # Safety
/// `a` and `b` must be live handles; `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn qg_graph_equal(a: *const QgGraph, b: *const QgGraph, out: *mut bool) -> QgStatus {
    guard(|| put(out, get(a)?.0 == get(b)?.0))
}

/// Model parameters; pass NaN for `j` to use the default coupling.
///
/// # Safety
/// `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn qg_model_new(kind: QgModelKind, n: usize, e0: f64, e1: f64, j: f64, out: *mut *mut QgModel) -> QgStatus {
    guard(|| {
        let kind = match kind {
            QgModelKind::Free => ModelKind::Free,
            QgModelKind::Ising => ModelKind::Ising,
        };
        let j = if j.is_nan() { None } else { Some(j) };
        let p = ModelParams::new(kind, n, e0, e1, j)?;
        put(out, boxed(QgModel(p)))
    })
}

/// # Safety
/// `m` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qg_model_free(m: *mut QgModel) {
    release(m)
}

/// Coupling in use.
///
/// # Safety
/// `m` must be a live handle; `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn qg_model_coupling(m: *const QgModel, out: *mut f64) -> QgStatus {
    guard(|| put(out, get(m)?.0.j))
}

/// # Safety
/// `m` and `g` must be live handles; `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn qg_energy(m: *const QgModel, g: *const QgGraph, out: *mut f64) -> QgStatus {
    guard(|| {
        let e = energy(&get(g)?.0, &get(m)?.0)?;
        put(out, e)
    })
}

/// Chain at inverse temperature `beta` on stream `stream` of `seed`.
///
/// # Safety
/// `m` must be a live handle; `out` valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn qg_chain_new(
    m: *const QgModel,
    beta: f64,
    ensemble: QgEnsemble,
    seed: u64,
    stream: u64,
    start: QgStart,
    out: *mut *mut QgChain,
) -> QgStatus {
    guard(|| {
        let ensemble = match ensemble {
            QgEnsemble::Labeled => Ensemble::Labeled,
            QgEnsemble::Unlabeled => Ensemble::Unlabeled,
        };
        let mut cfg = ChainConfig::new(get(m)?.0, beta, ensemble, seed);
        cfg.stream = stream;
        cfg.start = match start {
            QgStart::Hot => StartState::Hot,
            QgStart::Cold => StartState::Cold,
            QgStart::Auto => StartState::Auto,
        };
        let chain = Chain::from_config(&cfg)?;
        put(out, boxed(QgChain(chain)))
    })
}

/// # Safety
/// `c` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qg_chain_free(c: *mut QgChain) {
    release(c)
}

/// Runs `count` sweeps of C(n,2) proposals each.
///
/// # Safety
/// `c` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn qg_chain_sweep(c: *mut QgChain, count: u64) -> QgStatus {
    guard(|| {
        let c = &mut get_mut(c)?.0;
        for _ in 0..count {
            c.sweep();
        }
        Ok(())
    })
}

/// # Safety
/// `c` must be a live handle; `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn qg_chain_energy(c: *const QgChain, out: *mut f64) -> QgStatus {
    guard(|| put(out, get(c)?.0.energy()))
}

/// # Safety
/// `c` must be a live handle; `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn qg_chain_acceptance_rate(c: *const QgChain, out: *mut f64) -> QgStatus {
    guard(|| put(out, get(c)?.0.acceptance_rate()))
}

/// Copy of the current state as a new graph handle.
///
/// # Safety
/// `c` must be a live handle; `out` valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn qg_chain_state(c: *const QgChain, out: *mut *mut QgGraph) -> QgStatus {
    guard(|| {
        let g = get(c)?.0.state().clone();
        put(out, boxed(QgGraph(g)))
    })
}
