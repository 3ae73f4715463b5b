//! C interface. Markets and price vectors are opaque handles; every call
//! returns an `MuStatus` and the message of the last failure on this thread
//! is available from `mu_last_error`. Rationals cross the boundary as
//! strings like `"7/2"`, released with `mu_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use multiunit::market::{optimal_welfare, Market};
use multiunit::pricing::{self, PricingError, SchemeId};
use multiunit::rational::{format_rational, parse_rational};
use multiunit::simulator::{self, PriceVector, PricesFile, SearchLimits, SimError};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MuStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    Invalid = 4,
    Limit = 5,
    Unsupported = 6,
    BufferTooSmall = 7,
    Panic = 8,
}

pub struct MuMarket(Market);

pub struct MuPrices(PriceVector);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl ToString) {
    let msg = CString::new(msg.to_string().replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

type Failure = (MuStatus, String);

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> MuStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => MuStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            MuStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err((MuStatus::NullArgument, format!("{what} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|e| (MuStatus::InvalidUtf8, format!("{what}: {e}")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| (MuStatus::NullArgument, format!("{what} is null")))
}

fn out_ptr<T>(p: *mut T, what: &str) -> Result<(), Failure> {
    if p.is_null() {
        Err((MuStatus::NullArgument, format!("{what} is null")))
    } else {
        Ok(())
    }
}

fn sim_failure(e: SimError) -> Failure {
    let status = match e {
        SimError::SizeLimit { .. } => MuStatus::Limit,
        _ => MuStatus::Invalid,
    };
    (status, e.to_string())
}

fn pricing_failure(e: PricingError) -> Failure {
    match e {
        PricingError::Sim(e) => sim_failure(e),
        PricingError::UnknownScheme(_) | PricingError::NotTwoIdentical => (MuStatus::Unsupported, e.to_string()),
        PricingError::Market(multiunit::market::MarketError::ClassViolation { .. }) => {
            (MuStatus::Unsupported, e.to_string())
        }
        _ => (MuStatus::Invalid, e.to_string()),
    }
}

fn c_string(s: String) -> *mut c_char {
    CString::new(s).expect("no interior nul").into_raw()
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn mu_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

#[no_mangle]
pub extern "C" fn mu_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// # Safety
/// `s` must be null or come from this library.
#[no_mangle]
pub unsafe extern "C" fn mu_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses `{"m": .., "agents": [{"values": [..]}, ..]}`.
///
/// # Safety
/// `json` must be a nul-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mu_market_from_json(json: *const c_char, out: *mut *mut MuMarket) -> MuStatus {
    guard(|| {
        out_ptr(out, "out")?;
        let market = Market::from_json(text(json, "json")?).map_err(|e| (MuStatus::Parse, e.to_string()))?;
        *out = Box::into_raw(Box::new(MuMarket(market)));
        Ok(())
    })
}

/// # Safety
/// `market` must be null or come from `mu_market_from_json`.
#[no_mangle]
pub unsafe extern "C" fn mu_market_free(market: *mut MuMarket) {
    if !market.is_null() {
        drop(Box::from_raw(market));
    }
}

/// # Safety
/// `market` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn mu_market_agents(market: *const MuMarket) -> usize {
    market.as_ref().map_or(0, |m| m.0.n())
}

/// # Safety
/// `market` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn mu_market_items(market: *const MuMarket) -> usize {
    market.as_ref().map_or(0, |m| m.0.m())
}

/// Parses `{"prices": [..]}` or `{"uniform": ".."}` for `m` items.
///
/// # Safety
/// `json` must be a nul-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mu_prices_from_json(json: *const c_char, m: usize, out: *mut *mut MuPrices) -> MuStatus {
    guard(|| {
        out_ptr(out, "out")?;
        let file: PricesFile =
            serde_json::from_str(text(json, "json")?).map_err(|e| (MuStatus::Parse, e.to_string()))?;
        let prices = file.resolve(m).map_err(sim_failure)?;
        *out = Box::into_raw(Box::new(MuPrices(prices)));
        Ok(())
    })
}

/// The same price, given as a rational string, on all `m` items.
///
/// # Safety
/// `price` must be a nul-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mu_prices_uniform(price: *const c_char, m: usize, out: *mut *mut MuPrices) -> MuStatus {
    guard(|| {
        out_ptr(out, "out")?;
        let p = parse_rational(text(price, "price")?).map_err(|e| (MuStatus::Parse, e.to_string()))?;
        if p < multiunit::rational::zero() {
            return Err((MuStatus::Invalid, format!("negative price {}", format_rational(&p))));
        }
        *out = Box::into_raw(Box::new(MuPrices(PriceVector::uniform(m, p))));
        Ok(())
    })
}

/// # Safety
/// `prices` must be null or come from this library.
#[no_mangle]
pub unsafe extern "C" fn mu_prices_free(prices: *mut MuPrices) {
    if !prices.is_null() {
        drop(Box::from_raw(prices));
    }
}

/// Optimal welfare as a string. If `allocation` is non-null it receives one
/// quantity per agent and must hold `mu_market_agents` entries.
///
/// # Safety
/// Pointers must be valid as described.
#[no_mangle]
pub unsafe extern "C" fn mu_opt(
    market: *const MuMarket,
    welfare: *mut *mut c_char,
    allocation: *mut usize,
    allocation_len: usize,
) -> MuStatus {
    guard(|| {
        let market = &handle(market, "market")?.0;
        out_ptr(welfare, "welfare")?;
        if !allocation.is_null() && allocation_len < market.n() {
            return Err((MuStatus::BufferTooSmall, format!("allocation needs {} entries", market.n())));
        }
        let (opt, alloc) = optimal_welfare(market);
        if !allocation.is_null() {
            std::slice::from_raw_parts_mut(allocation, market.n()).copy_from_slice(&alloc.quantities);
        }
        *welfare = c_string(format_rational(&opt));
        Ok(())
    })
}

/// Minimum welfare over arrival orders and utility-maximizing tie choices.
/// `order` receives the witness order when non-null and long enough.
///
/// # Safety
/// Pointers must be valid as described.
#[no_mangle]
pub unsafe extern "C" fn mu_worst_case(
    market: *const MuMarket,
    prices: *const MuPrices,
    welfare: *mut *mut c_char,
    order: *mut usize,
    order_len: usize,
) -> MuStatus {
    guard(|| {
        let market = &handle(market, "market")?.0;
        let prices = &handle(prices, "prices")?.0;
        out_ptr(welfare, "welfare")?;
        if !order.is_null() && order_len < market.n() {
            return Err((MuStatus::BufferTooSmall, format!("order needs {} entries", market.n())));
        }
        let result = simulator::worst_case_welfare_with(market, prices, SearchLimits::default()).map_err(sim_failure)?;
        if !order.is_null() {
            std::slice::from_raw_parts_mut(order, result.order.len()).copy_from_slice(&result.order);
        }
        *welfare = c_string(format_rational(&result.welfare));
        Ok(())
    })
}

/// Runs a named scheme (e.g. `"uniform-half"`) and writes its full result as
/// JSON. `order` (length `mu_market_agents`) is only read by `known-order`.
///
/// # Safety
/// Pointers must be valid as described.
#[no_mangle]
pub unsafe extern "C" fn mu_scheme(
    scheme: *const c_char,
    market: *const MuMarket,
    order: *const usize,
    result_json: *mut *mut c_char,
) -> MuStatus {
    guard(|| {
        let id: SchemeId = text(scheme, "scheme")?.parse().map_err(pricing_failure)?;
        let market = &handle(market, "market")?.0;
        out_ptr(result_json, "result_json")?;
        let order = (!order.is_null()).then(|| std::slice::from_raw_parts(order, market.n()));
        let result = pricing::run_scheme(id, market, order, SearchLimits::default()).map_err(pricing_failure)?;
        *result_json = c_string(serde_json::to_string(&result).expect("result serializes"));
        Ok(())
    })
}
