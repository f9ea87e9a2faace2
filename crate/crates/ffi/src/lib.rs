//! C ABI for the illiquid-spread pricing engine.
//!
//! Every function returns an [`IspStatus`]; results come back through out
//! pointers. On failure a message is kept per thread and can be fetched with
//! [`isp_last_error_message`]. Full solves are held behind the opaque
//! [`IspSolution`] handle, which the caller releases with
//! [`isp_solution_free`]. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use illiquid_spread::adi::SolveResult;
use illiquid_spread::grid::Grid;
use illiquid_spread::{
    build_grid, kirk_price, margrabe_price, mc_spread_price, solve_full, stability_bound, Error,
    ImpactParams, MarketParams, McConfig, SolverConfig, SpreadPayoff, Surface,
};

#[repr(i32)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IspStatus {
    Ok = 0,
    NullPointer = 1,
    Domain = 2,
    DimensionMismatch = 3,
    SingularPivot = 4,
    NonFinite = 5,
    Config = 6,
    Io = 7,
    BufferTooSmall = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct IspMarket {
    pub sigma1: f64,
    pub sigma2: f64,
    pub rho: f64,
    pub r: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct IspImpact {
    pub epsilon: f64,
    pub beta: f64,
    pub s_low: f64,
    pub s_high: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct IspGridSpec {
    pub x_max: f64,
    pub m: u32,
    pub l: u32,
    pub maturity: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct IspSpotPrices {
    pub v0: f64,
    pub excess: f64,
    pub combined: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct IspMcEstimate {
    pub price: f64,
    pub std_error: f64,
    pub samples: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct IspStability {
    pub a1: f64,
    pub c: f64,
    pub c_hat: f64,
    pub a_bound: f64,
    pub dt: f64,
    pub dt_max: f64,
    pub satisfied: bool,
}

/// Which `t₀` surface to copy out of a solution. Passed as a plain `int32_t`.
#[repr(i32)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IspSurfaceKind {
    V0 = 0,
    V1 = 1,
    Excess = 2,
    Combined = 3,
}

/// Opaque result of a full solve.
pub struct IspSolution {
    grid: Grid,
    result: SolveResult,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> IspStatus {
    match err {
        Error::Domain(_) => IspStatus::Domain,
        Error::DimensionMismatch { .. } => IspStatus::DimensionMismatch,
        Error::SingularPivot { .. } => IspStatus::SingularPivot,
        Error::NonFinite { .. } => IspStatus::NonFinite,
        Error::Config(_) => IspStatus::Config,
        Error::Csv(_) | Error::Io(_) => IspStatus::Io,
    }
}

struct Fail(IspStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(IspStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> IspStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => IspStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            IspStatus::Panic
        }
    }
}

/// # Safety
/// `p` is null or points to a valid `T`.
unsafe fn read<T: Copy>(p: *const T, what: &str) -> Result<T, Fail> {
    p.as_ref().copied().ok_or_else(|| null(what))
}

/// # Safety
/// `p` is null or valid for writes.
unsafe fn write<T>(p: *mut T, value: T, what: &str) -> Result<(), Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    p.write(value);
    Ok(())
}

fn market(m: IspMarket) -> Result<MarketParams, Fail> {
    Ok(MarketParams::new(m.sigma1, m.sigma2, m.rho, m.r)?)
}

fn grid(g: IspGridSpec) -> Result<Grid, Fail> {
    Ok(build_grid(g.x_max, g.m as usize, g.l as usize, g.maturity)?)
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length plus one, or 0 when
/// no error has been recorded.
///
/// # Safety
/// `buf` is null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn isp_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else { return 0 };
        let bytes = msg.as_bytes_with_nul();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len);
            ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
            *buf.add(n - 1) = 0;
        }
        bytes.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn isp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// # Safety
/// Pointers are null or valid.
#[no_mangle]
pub unsafe extern "C" fn isp_margrabe(
    s1: f64,
    s2: f64,
    params: *const IspMarket,
    maturity: f64,
    out: *mut f64,
) -> IspStatus {
    guard(|| {
        let p = market(read(params, "params")?)?;
        write(out, margrabe_price(s1, s2, &p, maturity)?, "out")
    })
}

/// # Safety
/// Pointers are null or valid.
#[no_mangle]
pub unsafe extern "C" fn isp_kirk(
    s1: f64,
    s2: f64,
    strike: f64,
    params: *const IspMarket,
    maturity: f64,
    out: *mut f64,
) -> IspStatus {
    guard(|| {
        let p = market(read(params, "params")?)?;
        write(out, kirk_price(s1, s2, strike, &p, maturity)?, "out")
    })
}

/// # Safety
/// Pointers are null or valid.
#[no_mangle]
pub unsafe extern "C" fn isp_mc_price(
    s1: f64,
    s2: f64,
    strike: f64,
    params: *const IspMarket,
    maturity: f64,
    n_paths: u64,
    seed: u64,
    antithetic: bool,
    out: *mut IspMcEstimate,
) -> IspStatus {
    guard(|| {
        let p = market(read(params, "params")?)?;
        let cfg = McConfig {
            n_paths: n_paths as usize,
            seed,
            antithetic,
        };
        let est = mc_spread_price(s1, s2, &SpreadPayoff::new(strike)?, &p, maturity, &cfg)?;
        let value = IspMcEstimate {
            price: est.price,
            std_error: est.std_error,
            samples: est.samples as u64,
        };
        write(out, value, "out")
    })
}

/// # Safety
/// Pointers are null or valid.
#[no_mangle]
pub unsafe extern "C" fn isp_stability(
    spec: *const IspGridSpec,
    params: *const IspMarket,
    out: *mut IspStability,
) -> IspStatus {
    guard(|| {
        let g = grid(read(spec, "spec")?)?;
        let p = market(read(params, "params")?)?;
        let s = stability_bound(&g, &p);
        let value = IspStability {
            a1: s.a1,
            c: s.c,
            c_hat: s.c_hat,
            a_bound: s.a_bound,
            dt: s.dt,
            dt_max: s.dt_max,
            satisfied: s.satisfied,
        };
        write(out, value, "out")
    })
}

/// Runs a full `V⁰ + εV¹` solve. On success `*out` owns a new handle.
///
/// # Safety
/// Pointers are null or valid.
#[no_mangle]
pub unsafe extern "C" fn isp_solution_new(
    params: *const IspMarket,
    impact: *const IspImpact,
    spec: *const IspGridSpec,
    strike: f64,
    out: *mut *mut IspSolution,
) -> IspStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let p = market(read(params, "params")?)?;
        let i = read(impact, "impact")?;
        let i = ImpactParams::new(i.epsilon, i.beta, i.s_low, i.s_high)?;
        let g = grid(read(spec, "spec")?)?;
        let result = solve_full(
            &g,
            &p,
            &i,
            &SpreadPayoff::new(strike)?,
            &SolverConfig::default(),
        )?;
        let handle = Box::new(IspSolution { grid: g, result });
        out.write(Box::into_raw(handle));
        Ok(())
    })
}

/// Releases a handle from [`isp_solution_new`]. Null is a no-op.
///
/// # Safety
/// `solution` is null or an unreleased handle.
#[no_mangle]
pub unsafe extern "C" fn isp_solution_free(solution: *mut IspSolution) {
    if !solution.is_null() {
        drop(Box::from_raw(solution));
    }
}

/// Bilinear prices at `(s1, s2)` on the `t₀` surfaces.
///
/// # Safety
/// Pointers are null or valid.
#[no_mangle]
pub unsafe extern "C" fn isp_solution_price_at(
    solution: *const IspSolution,
    s1: f64,
    s2: f64,
    out: *mut IspSpotPrices,
) -> IspStatus {
    guard(|| {
        let sol = solution.as_ref().ok_or_else(|| null("solution"))?;
        let p = sol.result.prices_at(&sol.grid, s1, s2)?;
        let value = IspSpotPrices {
            v0: p.v0,
            excess: p.excess,
            combined: p.combined,
        };
        write(out, value, "out")
    })
}

/// Surface shape: `rows = m + 1` (x nodes), `cols = n + 1` (y nodes).
///
/// # Safety
/// Pointers are null or valid.
#[no_mangle]
pub unsafe extern "C" fn isp_solution_dims(
    solution: *const IspSolution,
    rows: *mut usize,
    cols: *mut usize,
) -> IspStatus {
    guard(|| {
        let sol = solution.as_ref().ok_or_else(|| null("solution"))?;
        let (r, c) = sol.grid.shape();
        write(rows, r, "rows")?;
        write(cols, c, "cols")
    })
}

/// Copies a `t₀` surface in row-major order (`[m * cols + n]`) into `buf`,
/// which must hold `rows * cols` values.
///
/// # Safety
/// `buf` is null or valid for `len` writes; `solution` is null or valid.
#[no_mangle]
pub unsafe extern "C" fn isp_solution_copy_surface(
    solution: *const IspSolution,
    kind: i32,
    buf: *mut f64,
    len: usize,
) -> IspStatus {
    guard(|| {
        let sol = solution.as_ref().ok_or_else(|| null("solution"))?;
        if buf.is_null() {
            return Err(null("buf"));
        }
        let excess;
        let surface: &Surface = match kind {
            k if k == IspSurfaceKind::V0 as i32 => sol.result.v0_t0(),
            k if k == IspSurfaceKind::V1 as i32 => sol.result.v1_t0(),
            k if k == IspSurfaceKind::Excess as i32 => {
                excess = sol.result.excess_t0();
                &excess
            }
            k if k == IspSurfaceKind::Combined as i32 => &sol.result.combined_t0,
            k => return Err(Fail(IspStatus::Domain, format!("unknown surface kind {k}"))),
        };
        let values = surface.values();
        if len < values.len() {
            return Err(Fail(
                IspStatus::BufferTooSmall,
                format!("buffer holds {len} values, need {}", values.len()),
            ));
        }
        let dst = std::slice::from_raw_parts_mut(buf, values.len());
        for (d, s) in dst.iter_mut().zip(values.iter()) {
            *d = *s;
        }
        Ok(())
    })
}
