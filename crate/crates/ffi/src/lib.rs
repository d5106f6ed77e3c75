//! C interface to `hill_spectra`.
//!
//! Conventions:
//! - every fallible function returns an [`HsStatus`]; results go through
//!   out-pointers, which are written only on success;
//! - the message of the most recent failure on the calling thread is
//!   available from [`hs_last_error_message`];
//! - objects created by `hs_*_new` / `hs_trace_arc` are released with the
//!   matching `*_free` function, which accepts `NULL`;
//! - a solver configuration pointer may be `NULL` to request defaults.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use hill_spectra::floquet::labeled_eigenpair;
use hill_spectra::shooting::{integrate_fundamental, solve_characteristic};
use hill_spectra::singularity::{classify_spectrality, pairing_dn, SpectralityVerdict};
use hill_spectra::spectrum::{trace_arc, uniform_grid, ArcConfig, SpectralArc};
use hill_spectra::{BandIndex, Complex64, Error, PotentialCoeffs, QuasiMomentum, SolverConfig};

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    /// An iterative method (eigensolver, Newton, fixed point) did not converge.
    NonConvergence = 3,
    /// `|dF/dλ|` vanished: a possibly multiple eigenvalue.
    NearCritical = 4,
    /// The requested eigenvalue is not simple.
    NotSimple = 5,
    /// Integration failure, pole proximity or another numerical breakdown.
    Numerical = 6,
    IndexOutOfRange = 7,
    /// A Rust panic was caught at the boundary; this indicates a bug.
    Panic = 8,
}

/// Verdict of [`hs_classify`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HsVerdict {
    SingularAtInfinity = 0,
    AsymptoticallySpectral = 1,
    UndecidedNumerically = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HsComplex {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for HsComplex {
    fn from(z: Complex64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

impl From<HsComplex> for Complex64 {
    fn from(z: HsComplex) -> Self {
        Complex64::new(z.re, z.im)
    }
}

/// Numerical settings; obtain defaults from [`hs_solver_config_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HsSolverConfig {
    /// Fourier modes `-M..=M` are kept.
    pub truncation_half_width: usize,
    pub ode_tolerance: f64,
    pub newton_tolerance: f64,
    pub max_newton_iters: usize,
    pub eig_deflation_tol: f64,
}

impl From<SolverConfig> for HsSolverConfig {
    fn from(c: SolverConfig) -> Self {
        Self {
            truncation_half_width: c.truncation_half_width,
            ode_tolerance: c.ode_tolerance,
            newton_tolerance: c.newton_tolerance,
            max_newton_iters: c.max_newton_iters,
            eig_deflation_tol: c.eig_deflation_tol,
        }
    }
}

impl From<HsSolverConfig> for SolverConfig {
    fn from(c: HsSolverConfig) -> Self {
        Self {
            truncation_half_width: c.truncation_half_width,
            ode_tolerance: c.ode_tolerance,
            newton_tolerance: c.newton_tolerance,
            max_newton_iters: c.max_newton_iters,
            eig_deflation_tol: c.eig_deflation_tol,
        }
    }
}

/// Opaque potential `q(x) = a e^{-2πix} + b e^{2πix}`.
pub struct HsPotential(PotentialCoeffs);

/// Opaque traced spectral arc.
pub struct HsArc(SpectralArc);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs were replaced");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> HsStatus {
    match e {
        Error::InvalidInput(_) => HsStatus::InvalidInput,
        Error::EigenNonConvergence { .. } | Error::NewtonDivergence { .. } | Error::FixedPoint(_) => {
            HsStatus::NonConvergence
        }
        Error::NearCritical { .. } => HsStatus::NearCritical,
        Error::NotSimple { .. } => HsStatus::NotSimple,
        Error::Pairing { source, .. } => status_of(source),
        _ => HsStatus::Numerical,
    }
}

/// Runs `f`, translating errors and panics into status codes.
fn guard<F>(f: F) -> HsStatus
where
    F: FnOnce() -> Result<(), HsFailure>,
{
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => HsStatus::Ok,
        Ok(Err(HsFailure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("internal panic: {msg}"));
            HsStatus::Panic
        }
    }
}

struct HsFailure(HsStatus, String);

impl From<Error> for HsFailure {
    fn from(e: Error) -> Self {
        HsFailure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> HsFailure {
    HsFailure(HsStatus::NullPointer, format!("{what} must not be NULL"))
}

unsafe fn config(cfg: *const HsSolverConfig) -> SolverConfig {
    if cfg.is_null() {
        SolverConfig::default()
    } else {
        (*cfg).into()
    }
}

unsafe fn potential<'a>(pot: *const HsPotential) -> Result<&'a PotentialCoeffs, HsFailure> {
    pot.as_ref().map(|p| &p.0).ok_or_else(|| null("potential"))
}

unsafe fn write<T>(out: *mut T, value: T, what: &str) -> Result<(), HsFailure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn hs_version() -> *const c_char {
    static VERSION: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(s) => s,
        Err(_) => panic!("version string is NUL-terminated"),
    };
    VERSION.as_ptr()
}

/// Message of the last failure on this thread, or `NULL` if none. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn hs_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |s| s.as_ptr()))
}

#[no_mangle]
pub extern "C" fn hs_solver_config_default() -> HsSolverConfig {
    SolverConfig::default().into()
}

/// Creates the potential with coefficients `a` and `b`.
///
/// # Safety
/// `out` must be valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn hs_potential_new(a: HsComplex, b: HsComplex, out: *mut *mut HsPotential) -> HsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let p = PotentialCoeffs::new(a.into(), b.into())?;
        write(out, Box::into_raw(Box::new(HsPotential(p))), "out")
    })
}

/// # Safety
/// `pot` must be `NULL` or a pointer from [`hs_potential_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hs_potential_free(pot: *mut HsPotential) {
    if !pot.is_null() {
        drop(Box::from_raw(pot));
    }
}

/// Eigenvalue with band label `n` of the operator with quasi-momentum `t`.
///
/// # Safety
/// `pot` must be a live potential, `cfg` `NULL` or valid, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hs_floquet_eigenvalue(
    pot: *const HsPotential,
    t: f64,
    n: i32,
    cfg: *const HsSolverConfig,
    out: *mut HsComplex,
) -> HsStatus {
    guard(|| {
        let pot = potential(pot)?;
        let cfg = config(cfg);
        let (pair, _) = labeled_eigenpair(pot, QuasiMomentum::new(t)?, BandIndex(n), &cfg)?;
        write(out, pair.lambda.into(), "out")
    })
}

/// Hill discriminant `F(λ)` and its derivative `dF/dλ`.
///
/// # Safety
/// `pot` must be a live potential, `cfg` `NULL` or valid, outputs writable.
#[no_mangle]
pub unsafe extern "C" fn hs_discriminant(
    pot: *const HsPotential,
    lambda: HsComplex,
    cfg: *const HsSolverConfig,
    out_f: *mut HsComplex,
    out_df: *mut HsComplex,
) -> HsStatus {
    guard(|| {
        let pot = potential(pot)?;
        if out_f.is_null() || out_df.is_null() {
            return Err(null("output"));
        }
        let s = integrate_fundamental(pot, lambda.into(), &config(cfg))?;
        write(out_f, s.f.into(), "out_f")?;
        write(out_df, s.df.into(), "out_df")
    })
}

/// Root of `F(λ) = 2 cos t` by Newton's method from `seed`.
///
/// # Safety
/// `pot` must be a live potential, `cfg` `NULL` or valid, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hs_solve_characteristic(
    pot: *const HsPotential,
    t: f64,
    seed: HsComplex,
    cfg: *const HsSolverConfig,
    out: *mut HsComplex,
) -> HsStatus {
    guard(|| {
        let pot = potential(pot)?;
        let root = solve_characteristic(pot, QuasiMomentum::new(t)?, seed.into(), &config(cfg))?;
        write(out, root.lambda.into(), "out")
    })
}

/// Biorthogonal pairing `d_n(t)` of the normalized eigenfunctions of the
/// operator and its adjoint.
///
/// # Safety
/// `pot` must be a live potential, `cfg` `NULL` or valid, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hs_pairing(
    pot: *const HsPotential,
    n: i32,
    t: f64,
    cfg: *const HsSolverConfig,
    out: *mut HsComplex,
) -> HsStatus {
    guard(|| {
        let pot = potential(pot)?;
        let r = pairing_dn(n, pot, QuasiMomentum::new(t)?, &config(cfg))?;
        write(out, r.d.into(), "out")
    })
}

/// Asymptotic-spectrality verdict; `out_alpha` receives `arg(ab)/π` in
/// `[0, 2)`, or NaN when `ab = 0`.
///
/// # Safety
/// `pot` must be a live potential; outputs writable.
#[no_mangle]
pub unsafe extern "C" fn hs_classify(
    pot: *const HsPotential,
    q_cap: u64,
    rational_tol: f64,
    out_verdict: *mut HsVerdict,
    out_alpha: *mut f64,
) -> HsStatus {
    guard(|| {
        let pot = potential(pot)?;
        if out_verdict.is_null() || out_alpha.is_null() {
            return Err(null("output"));
        }
        let r = classify_spectrality(pot, q_cap, rational_tol)?;
        let verdict = match r.verdict {
            SpectralityVerdict::SingularAtInfinity => HsVerdict::SingularAtInfinity,
            SpectralityVerdict::AsymptoticallySpectral => HsVerdict::AsymptoticallySpectral,
            SpectralityVerdict::UndecidedNumerically => HsVerdict::UndecidedNumerically,
        };
        write(out_verdict, verdict, "out_verdict")?;
        write(out_alpha, r.alpha.unwrap_or(f64::NAN), "out_alpha")
    })
}

/// Traces the arc of label `n` on `grid_points` equally spaced values of
/// `t ∈ [0, π]`.
///
/// # Safety
/// `pot` must be a live potential, `cfg` `NULL` or valid, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hs_trace_arc(
    pot: *const HsPotential,
    n: i32,
    grid_points: usize,
    cfg: *const HsSolverConfig,
    out: *mut *mut HsArc,
) -> HsStatus {
    guard(|| {
        let pot = potential(pot)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let grid = uniform_grid(grid_points)?;
        let arc = trace_arc(n, pot, &grid, &config(cfg), &ArcConfig::default())?;
        write(out, Box::into_raw(Box::new(HsArc(arc))), "out")
    })
}

/// Number of samples in `arc` (0 for `NULL`).
///
/// # Safety
/// `arc` must be `NULL` or a live arc.
#[no_mangle]
pub unsafe extern "C" fn hs_arc_len(arc: *const HsArc) -> usize {
    arc.as_ref().map_or(0, |a| a.0.samples.len())
}

/// Sample `index` of `arc`: quasi-momentum, eigenvalue and `|dF/dλ|`.
///
/// # Safety
/// `arc` must be a live arc; outputs writable.
#[no_mangle]
pub unsafe extern "C" fn hs_arc_sample(
    arc: *const HsArc,
    index: usize,
    out_t: *mut f64,
    out_lambda: *mut HsComplex,
    out_abs_df: *mut f64,
) -> HsStatus {
    guard(|| {
        let arc = arc.as_ref().ok_or_else(|| null("arc"))?;
        if out_t.is_null() || out_lambda.is_null() || out_abs_df.is_null() {
            return Err(null("output"));
        }
        let s = arc.0.samples.get(index).ok_or_else(|| {
            HsFailure(
                HsStatus::IndexOutOfRange,
                format!("sample {index} out of range (arc has {})", arc.0.samples.len()),
            )
        })?;
        write(out_t, s.t, "out_t")?;
        write(out_lambda, s.lambda.into(), "out_lambda")?;
        write(out_abs_df, s.abs_df, "out_abs_df")
    })
}

/// # Safety
/// `arc` must be `NULL` or a pointer from [`hs_trace_arc`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hs_arc_free(arc: *mut HsArc) {
    if !arc.is_null() {
        drop(Box::from_raw(arc));
    }
}
