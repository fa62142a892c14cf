//! C ABI over `alv-core`.
//!
//! Models and pairs are opaque handles created by `alv_model_*` and
//! `alv_pair_*` and released with the matching `*_free`. Every fallible call
//! returns an `AlvStatus`; after a non-`Ok` status `alv_last_error` describes
//! the failure. Strings returned through out-parameters are freed with
//! `alv_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;

use alv_core::config::RunConfig;
use alv_core::constructions::{conformal_action, counterexample_pair, gauge_action, standard_pair};
use alv_core::criteria::{classify_pair, pair_invariants, reeb_criteria, Check, ContactFormPair, Tolerances, Verdict};
use alv_core::error::AlvError;
use alv_core::expr::Expr;
use alv_core::frame::{make_sl2_frame, make_sol_suspension, FrameManifold};
use alv_core::grid::DerivativeScheme;
use alv_core::registry::{model_defining_pair, ModelSpec, PairSpec};
use alv_core::report::cmd_verify;

/// Result codes of the C interface.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AlvStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    NotContact = 4,
    Degenerate = 5,
    PreconditionFailed = 6,
    Config = 7,
    Io = 8,
    Panic = 9,
}

impl From<&AlvError> for AlvStatus {
    fn from(e: &AlvError) -> Self {
        use AlvError::*;
        match e {
            InvalidParameter(_) | ShapeMismatch(_) | NonFinite(_) | EpsilonTooLarge { .. } => AlvStatus::InvalidArgument,
            Expression(_) | PairFile { .. } => AlvStatus::Parse,
            NonContact(_) => AlvStatus::NotContact,
            DegenerateGrid(_) | NearDegenerateVolume { .. } | DegenerateKernel(_) => AlvStatus::Degenerate,
            NotEigen { .. }
            | NotOriented(_)
            | NotSupporting(_)
            | OrientationMismatch(_)
            | NotAnosov(_)
            | NotVolumePreserving(_)
            | NonPositiveKappa(_)
            | NotInvariant(_)
            | NotLinearLiouville(_)
            | NotLiouville(_) => AlvStatus::PreconditionFailed,
            Config(_) => AlvStatus::Config,
            Io(_) => AlvStatus::Io,
        }
    }
}

/// Framed 3-manifold with its coframe defining pair.
pub struct AlvModel {
    model: Arc<FrameManifold>,
}

/// Pair of 1-forms with a volume form.
pub struct AlvPair {
    pair: ContactFormPair,
}

/// One criterion: strict margin, whether it holds and the verdict
/// (1 holds, 0 undecided, -1 fails).
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct AlvCheck {
    pub margin: f64,
    pub holds: bool,
    pub verdict: i32,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct AlvMarginSummary {
    pub contact_minus: AlvCheck,
    pub contact_plus: AlvCheck,
    pub liouville: AlvCheck,
    pub al: AlvCheck,
    pub lin_liouville: AlvCheck,
    pub lin_al: AlvCheck,
    pub balanced: AlvCheck,
    pub closed: AlvCheck,
}

/// Extremes of the Reeb pairings over the grid.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct AlvReebSummary {
    pub minus_on_plus_min: f64,
    pub minus_on_plus_max: f64,
    pub plus_on_minus_min: f64,
    pub plus_on_minus_max: f64,
    pub sum: AlvCheck,
    pub individual: AlvCheck,
    pub determinant_min: f64,
    pub determinant_max: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn guard(f: impl FnOnce() -> Result<(), (AlvStatus, String)>) -> AlvStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            AlvStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            AlvStatus::Panic
        }
    }
}

fn core<T>(r: alv_core::error::Result<T>) -> Result<T, (AlvStatus, String)> {
    r.map_err(|e| (AlvStatus::from(&e), e.to_string()))
}

fn null(what: &str) -> (AlvStatus, String) {
    (AlvStatus::NullPointer, format!("{what} is null"))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, (AlvStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (AlvStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn store<T>(out: *mut *mut T, value: T) -> Result<(), (AlvStatus, String)> {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn model_ref<'a>(m: *const AlvModel) -> Result<&'a AlvModel, (AlvStatus, String)> {
    m.as_ref().ok_or_else(|| null("model"))
}

unsafe fn pair_ref<'a>(p: *const AlvPair) -> Result<&'a AlvPair, (AlvStatus, String)> {
    p.as_ref().ok_or_else(|| null("pair"))
}

fn check(c: &Check) -> AlvCheck {
    AlvCheck {
        margin: c.margin,
        holds: c.holds,
        verdict: match c.verdict {
            Verdict::Holds => 1,
            Verdict::Undecided => 0,
            Verdict::Fails => -1,
        },
    }
}

/// Message of the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn alv_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn alv_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds a model from a registry spec such as `sol:catmap` or `sl2`.
///
/// # Safety
/// `spec` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn alv_model_from_spec(spec: *const c_char, grid: usize, out: *mut *mut AlvModel) -> AlvStatus {
    guard(|| {
        let spec: ModelSpec = core(text(spec, "spec")?.parse())?;
        let model = core(spec.build(grid, DerivativeScheme::Spectral))?;
        store(out, AlvModel { model })
    })
}

/// Suspension of a hyperbolic map with expansion exponent `kappa`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn alv_model_sol(kappa: f64, grid: usize, out: *mut *mut AlvModel) -> AlvStatus {
    guard(|| {
        let model = Arc::new(core(make_sol_suspension(kappa, grid))?);
        store(out, AlvModel { model })
    })
}

/// Constant-structure frame of the geodesic flow.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn alv_model_sl2(out: *mut *mut AlvModel) -> AlvStatus {
    guard(|| {
        store(
            out,
            AlvModel {
                model: Arc::new(make_sl2_frame()),
            },
        )
    })
}

/// Number of grid points of a model, 0 for a null handle.
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn alv_model_len(model: *const AlvModel) -> usize {
    model.as_ref().map_or(0, |m| m.model.grid().len())
}

/// # Safety
/// `model` must be null or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn alv_model_free(model: *mut AlvModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Standard pair of the model's coframe defining pair.
///
/// # Safety
/// `model` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn alv_pair_standard(model: *const AlvModel, out: *mut *mut AlvPair) -> AlvStatus {
    guard(|| {
        let m = model_ref(model)?;
        let pair = core(model_defining_pair(&m.model).and_then(|dp| standard_pair(&dp)))?;
        store(out, AlvPair { pair })
    })
}

/// Counterexample pair with parameter `a`.
///
/// # Safety
/// `model` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn alv_pair_counterexample(model: *const AlvModel, a: f64, out: *mut *mut AlvPair) -> AlvStatus {
    guard(|| {
        let m = model_ref(model)?;
        let pair = core(model_defining_pair(&m.model).and_then(|dp| counterexample_pair(a, &dp)))?;
        store(out, AlvPair { pair })
    })
}

/// Pair from a registry spec such as `standard+gauge:0.1*sin(2*pi*t)`.
///
/// # Safety
/// `model` must be a live handle, `spec` NUL-terminated and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn alv_pair_from_spec(model: *const AlvModel, spec: *const c_char, out: *mut *mut AlvPair) -> AlvStatus {
    guard(|| {
        let m = model_ref(model)?;
        let spec: PairSpec = core(text(spec, "spec")?.parse())?;
        let pair = core(spec.build(&m.model))?;
        store(out, AlvPair { pair })
    })
}

unsafe fn act(
    pair: *const AlvPair,
    sigma: *const c_char,
    out: *mut *mut AlvPair,
    f: fn(&alv_core::grid::ScalarField, &ContactFormPair) -> alv_core::error::Result<ContactFormPair>,
) -> AlvStatus {
    guard(|| {
        let p = pair_ref(pair)?;
        let expr = core(Expr::parse(text(sigma, "sigma")?))?;
        let field = core(expr.to_field(&p.pair.model))?;
        let moved = core(f(&field, &p.pair))?;
        store(out, AlvPair { pair: moved })
    })
}

/// `(e^{-sigma} alpha_-, e^{sigma} alpha_+)` for an expression `sigma`.
///
/// # Safety
/// `pair` must be a live handle, `sigma` NUL-terminated and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn alv_pair_gauge(pair: *const AlvPair, sigma: *const c_char, out: *mut *mut AlvPair) -> AlvStatus {
    act(pair, sigma, out, gauge_action)
}

/// `(e^{sigma} alpha_-, e^{sigma} alpha_+)` for an expression `sigma`.
///
/// # Safety
/// `pair` must be a live handle, `sigma` NUL-terminated and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn alv_pair_conformal(pair: *const AlvPair, sigma: *const c_char, out: *mut *mut AlvPair) -> AlvStatus {
    act(pair, sigma, out, conformal_action)
}

/// # Safety
/// `pair` must be null or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn alv_pair_free(pair: *mut AlvPair) {
    if !pair.is_null() {
        drop(Box::from_raw(pair));
    }
}

/// Margins of all criteria. Non-positive tolerances select the defaults.
///
/// # Safety
/// `pair` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn alv_pair_classify(pair: *const AlvPair, tau_pos: f64, tau_eq: f64, out: *mut AlvMarginSummary) -> AlvStatus {
    guard(|| {
        let p = pair_ref(pair)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let mut tol = Tolerances::default();
        if tau_pos > 0.0 {
            tol.tau_pos = tau_pos;
        }
        if tau_eq > 0.0 {
            tol.tau_eq = tau_eq;
        }
        let m = classify_pair(&core(pair_invariants(&p.pair))?, &tol);
        *out = AlvMarginSummary {
            contact_minus: check(&m.contact_minus),
            contact_plus: check(&m.contact_plus),
            liouville: check(&m.liouville),
            al: check(&m.al),
            lin_liouville: check(&m.lin_liouville),
            lin_al: check(&m.lin_al),
            balanced: check(&m.balanced),
            closed: check(&m.closed),
        };
        Ok(())
    })
}

/// Reeb pairings `alpha_-(R_+)`, `alpha_+(R_-)` and the frame determinant.
///
/// # Safety
/// `pair` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn alv_pair_reeb(pair: *const AlvPair, out: *mut AlvReebSummary) -> AlvStatus {
    guard(|| {
        let p = pair_ref(pair)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let rc = core(reeb_criteria(&p.pair, &Tolerances::default()))?;
        *out = AlvReebSummary {
            minus_on_plus_min: rc.data.minus_on_plus.min(),
            minus_on_plus_max: rc.data.minus_on_plus.max(),
            plus_on_minus_min: rc.data.plus_on_minus.min(),
            plus_on_minus_max: rc.data.plus_on_minus.max(),
            sum: check(&rc.sum),
            individual: check(&rc.individual),
            determinant_min: rc.determinant.min(),
            determinant_max: rc.determinant.max(),
        };
        Ok(())
    })
}

/// Runs the `verify` command for a TOML run configuration (empty for the
/// defaults) and returns the JSON report. `exit_code` receives 0 when every
/// check passed and 1 otherwise.
///
/// # Safety
/// `config_toml` must be NUL-terminated; `json` and `exit_code` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn alv_verify_json(config_toml: *const c_char, json: *mut *mut c_char, exit_code: *mut i32) -> AlvStatus {
    guard(|| {
        if json.is_null() || exit_code.is_null() {
            return Err(null("out"));
        }
        let config = core(RunConfig::from_toml(text(config_toml, "config")?))?;
        let doc = core(cmd_verify(&config))?;
        let s = CString::new(doc.to_json()).map_err(|e| (AlvStatus::Io, e.to_string()))?;
        *exit_code = doc.exit_code();
        *json = s.into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a string returned by this library and not freed before.
#[no_mangle]
pub unsafe extern "C" fn alv_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
