//! C ABI for `cyclopair`.
//!
//! Every fallible function returns a [`CyclopairStatus`] and writes results
//! through out-pointers. On failure a description is available from
//! [`cyclopair_last_error`] on the same thread until the next call. Panics
//! never cross the boundary; they surface as `CYCLOPAIR_STATUS_PANIC`.
//!
//! Strings returned by this library must be released with
//! [`cyclopair_string_free`], pairing handles with [`cyclopair_pairing_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use cyclopair::bernoulli::{bernoulli_mod, irregular_pairs, iwasawa_coeffs, IrregularPair};
use cyclopair::galois::{galois_relation, greenberg_criterion, shipped_attestation};
use cyclopair::ihara::{
    commutator_ratio, cross_check_pairing, derivation_to_galois, DerivationRelation, LambdaTable,
};
use cyclopair::relations::{
    check_degenerate_candidate, check_vanishing_at_p_minus_r, solve_pairing_mod_p2,
    solve_pairing_with, PairingVector,
};
use cyclopair::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CyclopairStatus {
    Ok = 0,
    NullPointer = 1,
    NotOddPrime = 2,
    NotIrregular = 3,
    BoundExceeded = 4,
    Pole = 5,
    TriviallyZero = 6,
    IntegralityFailure = 7,
    BufferTooSmall = 8,
    InvalidArgument = 9,
    Panic = 10,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> CyclopairStatus {
    match e {
        Error::NotOddPrime(_) | Error::ModulusNotPrime(_) | Error::ModulusNotSquareOfPrime(_) => {
            CyclopairStatus::NotOddPrime
        }
        Error::NotIrregular { .. } => CyclopairStatus::NotIrregular,
        Error::BoundExceeded { .. } => CyclopairStatus::BoundExceeded,
        Error::PoleAtIndex { .. } => CyclopairStatus::Pole,
        Error::TriviallyZero { .. } => CyclopairStatus::TriviallyZero,
        Error::IntegralityFailure { .. } => CyclopairStatus::IntegralityFailure,
        _ => CyclopairStatus::InvalidArgument,
    }
}

fn guard(f: impl FnOnce() -> Result<(), CyclopairStatus>) -> CyclopairStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CyclopairStatus::Ok,
        Ok(Err(s)) => s,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_string());
            set_error(format!("internal panic: {msg}"));
            CyclopairStatus::Panic
        }
    }
}

trait OrStatus<T> {
    fn or_status(self) -> Result<T, CyclopairStatus>;
}

impl<T> OrStatus<T> for cyclopair::Result<T> {
    fn or_status(self) -> Result<T, CyclopairStatus> {
        self.map_err(|e| {
            set_error(e.to_string());
            status_of(&e)
        })
    }
}

fn null_pointer(what: &str) -> CyclopairStatus {
    set_error(format!("{what} is null"));
    CyclopairStatus::NullPointer
}

unsafe fn write<T>(out: *mut T, value: T) -> Result<(), CyclopairStatus> {
    if out.is_null() {
        return Err(null_pointer("output pointer"));
    }
    out.write(value);
    Ok(())
}

fn to_c_string(s: String) -> *mut c_char {
    CString::new(s).expect("JSON has no nul bytes").into_raw()
}

/// Message for the last failed call on this thread, or null. Owned by the
/// library; valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn cyclopair_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed already.
#[no_mangle]
pub unsafe extern "C" fn cyclopair_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// `B_k mod p^precision`, precision 1 or 2.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cyclopair_bernoulli_mod(
    k: u64,
    p: u64,
    precision: u32,
    out: *mut u64,
) -> CyclopairStatus {
    guard(|| write(out, bernoulli_mod(k, p, precision).or_status()?.value()))
}

/// Whether `(p, r)` is an irregular pair; an invalid `p` is an error.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cyclopair_is_irregular(p: u64, r: u64, out: *mut bool) -> CyclopairStatus {
    guard(|| match IrregularPair::new(p, r) {
        Ok(_) => write(out, true),
        Err(Error::NotIrregular { .. }) => write(out, false),
        Err(e) => Err::<(), _>(e).or_status(),
    })
}

/// Writes the irregular indices of `p` into `buf` (up to `capacity`) and
/// their count into `len`. Returns `BUFFER_TOO_SMALL` when `capacity` is
/// short; `len` is set either way.
///
/// # Safety
/// `buf` must be valid for `capacity` writes (or null when `capacity` is 0);
/// `len` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cyclopair_irregular_indices(
    p: u64,
    buf: *mut u64,
    capacity: usize,
    len: *mut usize,
) -> CyclopairStatus {
    guard(|| {
        let pairs = irregular_pairs(p).or_status()?;
        write(len, pairs.len())?;
        if pairs.len() > capacity {
            set_error(format!("{} indices, capacity {capacity}", pairs.len()));
            return Err(CyclopairStatus::BufferTooSmall);
        }
        if pairs.is_empty() {
            return Ok(());
        }
        if buf.is_null() {
            return Err(null_pointer("buffer"));
        }
        for (n, pair) in pairs.iter().enumerate() {
            buf.add(n).write(pair.r());
        }
        Ok(())
    })
}

/// Solved pairing vector for one irregular pair.
pub struct CyclopairPairing {
    vector: PairingVector,
}

/// Solves the mod-`p` system for `(p, r)`. On success `*out` owns a handle
/// to release with [`cyclopair_pairing_free`].
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cyclopair_pairing_solve(
    p: u64,
    r: u64,
    include_odd_a: bool,
    out: *mut *mut CyclopairPairing,
) -> CyclopairStatus {
    guard(|| {
        if out.is_null() {
            return Err(null_pointer("output pointer"));
        }
        let pair = IrregularPair::new(p, r).or_status()?;
        let vector = solve_pairing_with(&pair, include_odd_a).or_status()?;
        write(out, Box::into_raw(Box::new(CyclopairPairing { vector })))
    })
}

/// # Safety
/// `handle` must come from [`cyclopair_pairing_solve`] and not be used again.
#[no_mangle]
pub unsafe extern "C" fn cyclopair_pairing_free(handle: *mut CyclopairPairing) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Dimension of the solution space; 0 for a null handle.
///
/// # Safety
/// `handle` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cyclopair_pairing_kernel_dim(handle: *const CyclopairPairing) -> usize {
    handle.as_ref().map_or(0, |h| h.vector.kernel_dimension)
}

/// Number of entries, `(p-1)/2`; 0 for a null handle.
///
/// # Safety
/// `handle` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cyclopair_pairing_len(handle: *const CyclopairPairing) -> usize {
    handle.as_ref().map_or(0, |h| h.vector.values().len())
}

/// `e_{i,r}` in `[0, p)` for odd `i` in `[1, p-2]`.
///
/// # Safety
/// `handle` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cyclopair_pairing_entry(
    handle: *const CyclopairPairing,
    i: u64,
    out: *mut u64,
) -> CyclopairStatus {
    guard(|| {
        let h = handle_ref(handle)?;
        match h.vector.entry(i) {
            Some(e) => write(out, e.value()),
            None => {
                set_error(format!("index {i} is not odd in [1, p-2]"));
                Err(CyclopairStatus::InvalidArgument)
            }
        }
    })
}

/// Whether `e_{p-r,r} = 0`.
///
/// # Safety
/// `handle` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cyclopair_pairing_vanishes_at_p_minus_r(
    handle: *const CyclopairPairing,
    out: *mut bool,
) -> CyclopairStatus {
    guard(|| {
        write(
            out,
            check_vanishing_at_p_minus_r(&handle_ref(handle)?.vector),
        )
    })
}

/// JSON export `{"p", "r", "kernel_dim", "normalization", "entries"}`.
/// Release `*out` with [`cyclopair_string_free`].
///
/// # Safety
/// `handle` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cyclopair_pairing_to_json(
    handle: *const CyclopairPairing,
    out: *mut *mut c_char,
) -> CyclopairStatus {
    guard(|| {
        let h = handle_ref(handle)?;
        let json = serde_json::to_string(&h.vector.report()).expect("report serializes");
        write(out, to_c_string(json))
    })
}

unsafe fn handle_ref<'a>(
    handle: *const CyclopairPairing,
) -> Result<&'a CyclopairPairing, CyclopairStatus> {
    handle
        .as_ref()
        .ok_or_else(|| null_pointer("pairing handle"))
}

/// `f(0)/p` and `f'(0)` mod `p` for an irregular pair.
///
/// # Safety
/// Both out-pointers must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cyclopair_iwasawa_coeffs(
    p: u64,
    r: u64,
    f0_over_p: *mut u64,
    fprime0: *mut u64,
) -> CyclopairStatus {
    guard(|| {
        let pair = IrregularPair::new(p, r).or_status()?;
        let c = iwasawa_coeffs(pair).or_status()?;
        write(f0_over_p, c.f0_over_p.value())?;
        write(fprime0, c.fprime0.value())
    })
}

/// `e` such that the mod-`p^2` solution module has order `p^e`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cyclopair_mod_p2_order_exponent(
    p: u64,
    r: u64,
    out: *mut u32,
) -> CyclopairStatus {
    guard(|| {
        let pair = IrregularPair::new(p, r).or_status()?;
        write(
            out,
            solve_pairing_mod_p2(&pair).or_status()?.order_exponent(),
        )
    })
}

/// Galois relation report as JSON, with the Greenberg verdict.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cyclopair_galois_relation_json(
    p: u64,
    r: u64,
    out: *mut *mut c_char,
) -> CyclopairStatus {
    guard(|| {
        let pair = IrregularPair::new(p, r).or_status()?;
        let v = solve_pairing_with(&pair, false).or_status()?;
        let coeffs = iwasawa_coeffs(pair).or_status()?;
        let rel = galois_relation(&pair, &v, &coeffs).or_status()?;
        let verdict = greenberg_criterion(&rel, shipped_attestation(&pair).is_some());
        let json = serde_json::to_string(&rel.report(verdict)).expect("report serializes");
        write(out, to_c_string(json))
    })
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CyclopairDegeneracy {
    pub partner: u64,
    pub two_power_is_one: bool,
    pub partner_exponent_vanishes: bool,
    pub columns_vanish: bool,
    pub pair_irregular: bool,
    pub degeneracy_present: bool,
}

/// The `r = (p+3)/2` degeneracy test; needs `p = 1 mod 4`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cyclopair_degeneracy_check(
    p: u64,
    r: u64,
    out: *mut CyclopairDegeneracy,
) -> CyclopairStatus {
    guard(|| {
        let rep = check_degenerate_candidate(p, r).or_status()?;
        write(
            out,
            CyclopairDegeneracy {
                partner: rep.partner,
                two_power_is_one: rep.two_power_is_one,
                partner_exponent_vanishes: rep.partner_exponent_vanishes,
                columns_vanish: rep.columns_vanish,
                pair_irregular: rep.pair_irregular,
                degeneracy_present: rep.degeneracy_present,
            },
        )
    })
}

/// The weight-12 check: `rho` with `[s_3, s_9] = rho [s_5, s_7]` mod 691,
/// and whether the solved (691, 12) pairing is proportional.
///
/// # Safety
/// Both out-pointers must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cyclopair_ihara_check(
    ratio: *mut u64,
    pairing_consistent: *mut bool,
) -> CyclopairStatus {
    guard(|| {
        let g = derivation_to_galois(
            &DerivationRelation::weight_twelve(),
            &LambdaTable::standard(),
        )
        .or_status()?;
        write(ratio, commutator_ratio(&g).or_status()?.value())?;
        let pair = IrregularPair::new(691, 12).or_status()?;
        let v = solve_pairing_with(&pair, false).or_status()?;
        write(pairing_consistent, cross_check_pairing(&v, &g).or_status()?)
    })
}

/// Library version string, static.
#[no_mangle]
pub extern "C" fn cyclopair_version() -> *const c_char {
    const VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr().cast()
}
