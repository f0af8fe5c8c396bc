//! C interface to `pwhs-core`.
//!
//! Fields, systems, region reports and trajectories are opaque handles owned
//! by the caller and released with the matching `*_free` function. Every
//! fallible call returns a [`PwhsStatus`]; on failure the message is kept in
//! a thread-local buffer readable with [`pwhs_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use pwhs_core::cycles::{self, Stability};
use pwhs_core::flow::{self, Mode, Termination};
use pwhs_core::switching::{self, Side};
use pwhs_core::{
    ComplexPoint, Error, FieldSpec, IntegratorOptions, PWSystem, RegionClass, RegionReport,
    SwitchingLine, Trajectory,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PwhsStatus {
    Ok = 0,
    NullPointer = 1,
    /// Bad input or parameters outside the admissible range.
    InvalidArgument = 2,
    /// The numerics failed (no return, singularity hit, no root, ...).
    NumericalFailure = 3,
    IndexOutOfRange = 4,
    Panic = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PwhsComplex {
    pub re: f64,
    pub im: f64,
}

impl From<PwhsComplex> for ComplexPoint {
    fn from(c: PwhsComplex) -> Self {
        ComplexPoint::new(c.re, c.im)
    }
}

impl From<ComplexPoint> for PwhsComplex {
    fn from(c: ComplexPoint) -> Self {
        PwhsComplex { re: c.re, im: c.im }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PwhsOrientation {
    /// `Re z = offset`
    Vertical = 0,
    /// `Im z = offset`
    Horizontal = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PwhsSide {
    Plus = 0,
    Minus = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PwhsRegionClass {
    Sewing = 0,
    SlidingAttract = 1,
    SlidingRepel = 2,
    Tangency = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PwhsMode {
    FreePlus = 0,
    FreeMinus = 1,
    Sliding = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PwhsTermination {
    TimeLimit = 0,
    Escape = 1,
    Singularity = 2,
    TangencyHit = 3,
    RepellingSliding = 4,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PwhsStability {
    Stable = 0,
    Unstable = 1,
    None = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PwhsOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub event_tol: f64,
    pub singularity_standoff: f64,
    pub t_max: f64,
}

impl From<PwhsOptions> for IntegratorOptions {
    fn from(o: PwhsOptions) -> Self {
        IntegratorOptions {
            rel_tol: o.rel_tol,
            abs_tol: o.abs_tol,
            max_step: o.max_step,
            event_tol: o.event_tol,
            singularity_standoff: o.singularity_standoff,
            t_max: o.t_max,
        }
    }
}

/// Return map of a linear/linear system across `Im z = 0`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PwhsPoincare {
    pub has_fixed_point: bool,
    pub fixed_point: f64,
    pub derivative: f64,
    pub stability: PwhsStability,
}

pub struct PwhsField(FieldSpec);
pub struct PwhsSystem(PWSystem);
pub struct PwhsRegions(RegionReport);
pub struct PwhsTrajectory(Trajectory);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> PwhsStatus {
    if e.is_validation() {
        PwhsStatus::InvalidArgument
    } else {
        PwhsStatus::NumericalFailure
    }
}

enum Fail {
    Core(Error),
    Status(PwhsStatus, &'static str),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Core(e)
    }
}

fn guard(body: impl FnOnce() -> Result<(), Fail>) -> PwhsStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            set_last_error(String::new());
            PwhsStatus::Ok
        }
        Ok(Err(Fail::Core(e))) => {
            set_last_error(format!("{}: {e}", e.kind()));
            status_of(&e)
        }
        Ok(Err(Fail::Status(s, msg))) => {
            set_last_error(msg.to_string());
            s
        }
        Err(_) => {
            set_last_error("internal panic".into());
            PwhsStatus::Panic
        }
    }
}

unsafe fn get<'a, T>(p: *const T) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Status(PwhsStatus::NullPointer, "null handle"))
}

unsafe fn put<T>(out: *mut T, v: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail::Status(PwhsStatus::NullPointer, "null output pointer"));
    }
    out.write(v);
    Ok(())
}

fn boxed<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

unsafe fn free<T>(p: *mut T) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

unsafe fn new_field(spec: FieldSpec, out: *mut *mut PwhsField) -> PwhsStatus {
    guard(|| {
        if out.is_null() {
            return Err(Fail::Status(PwhsStatus::NullPointer, "null output pointer"));
        }
        spec.validate()?;
        put(out, boxed(PwhsField(spec)))
    })
}

/// Message of the last failed call on this thread, or an empty string.
/// The pointer stays valid until the next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn pwhs_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

#[no_mangle]
pub extern "C" fn pwhs_options_default() -> PwhsOptions {
    let o = IntegratorOptions::default();
    PwhsOptions {
        rel_tol: o.rel_tol,
        abs_tol: o.abs_tol,
        max_step: o.max_step,
        event_tol: o.event_tol,
        singularity_standoff: o.singularity_standoff,
        t_max: o.t_max,
    }
}

/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pwhs_field_constant(value: PwhsComplex, out: *mut *mut PwhsField) -> PwhsStatus {
    new_field(FieldSpec::constant(value.into()), out)
}

/// `(a + ib)(z - center)`
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pwhs_field_linear(
    a: f64,
    b: f64,
    center: PwhsComplex,
    out: *mut *mut PwhsField,
) -> PwhsStatus {
    new_field(FieldSpec::linear(a, b, center.into()), out)
}

/// `i^m (z - center)^n`
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pwhs_field_power(
    n: u32,
    center: PwhsComplex,
    m: u32,
    out: *mut *mut PwhsField,
) -> PwhsStatus {
    new_field(FieldSpec::power(n, center.into(), m), out)
}

/// `i^m / (z - center)^n`
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pwhs_field_pole(
    n: u32,
    center: PwhsComplex,
    m: u32,
    out: *mut *mut PwhsField,
) -> PwhsStatus {
    new_field(FieldSpec::pole(n, center.into(), m), out)
}

/// `gamma (z - center)^n / (1 + (z - center)^(n-1))`
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pwhs_field_rational(
    gamma: f64,
    n: u32,
    center: PwhsComplex,
    out: *mut *mut PwhsField,
) -> PwhsStatus {
    new_field(FieldSpec::rational(gamma, n, center.into()), out)
}

/// `sum analytic[k] (z-c)^k + sum principal[k-1] (z-c)^-k`. Either array may
/// be null when its length is zero.
///
/// # Safety
/// Non-null arrays must hold at least the given number of elements.
#[no_mangle]
pub unsafe extern "C" fn pwhs_field_laurent(
    center: PwhsComplex,
    principal: *const PwhsComplex,
    n_principal: usize,
    analytic: *const PwhsComplex,
    n_analytic: usize,
    out: *mut *mut PwhsField,
) -> PwhsStatus {
    unsafe fn coeffs(p: *const PwhsComplex, n: usize) -> Option<Vec<ComplexPoint>> {
        match (p.is_null(), n) {
            (_, 0) => Some(Vec::new()),
            (true, _) => None,
            (false, n) => Some(std::slice::from_raw_parts(p, n).iter().map(|&c| c.into()).collect()),
        }
    }
    match (coeffs(principal, n_principal), coeffs(analytic, n_analytic)) {
        (Some(principal), Some(analytic)) => new_field(
            FieldSpec::Laurent { center: center.into(), principal, analytic },
            out,
        ),
        _ => guard(|| Err(Fail::Status(PwhsStatus::NullPointer, "null coefficient array"))),
    }
}

/// `z^m exp(z^-n)`
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pwhs_field_essential_exp(m: u32, n: u32, out: *mut *mut PwhsField) -> PwhsStatus {
    new_field(FieldSpec::EssentialExp { m, n }, out)
}

/// # Safety
/// `field` must come from a `pwhs_field_*` constructor and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn pwhs_field_eval(
    field: *const PwhsField,
    z: PwhsComplex,
    out: *mut PwhsComplex,
) -> PwhsStatus {
    guard(|| {
        let f = get(field)?;
        put(out, f.0.eval(z.into())?.into())
    })
}

/// # Safety
/// `field` must come from a `pwhs_field_*` constructor and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn pwhs_field_derivative(
    field: *const PwhsField,
    z: PwhsComplex,
    out: *mut PwhsComplex,
) -> PwhsStatus {
    guard(|| {
        let f = get(field)?;
        put(out, f.0.derivative(z.into())?.into())
    })
}

/// # Safety
/// `field` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pwhs_field_free(field: *mut PwhsField) {
    free(field)
}

/// Glue `plus` (the side the line normal points into) and `minus` along a
/// line. The fields are copied; the caller keeps ownership of both handles.
///
/// # Safety
/// Handles must be live and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn pwhs_system_new(
    plus: *const PwhsField,
    minus: *const PwhsField,
    orientation: PwhsOrientation,
    offset: f64,
    out: *mut *mut PwhsSystem,
) -> PwhsStatus {
    guard(|| {
        let (p, m) = (get(plus)?, get(minus)?);
        if out.is_null() {
            return Err(Fail::Status(PwhsStatus::NullPointer, "null output pointer"));
        }
        let line = match orientation {
            PwhsOrientation::Vertical => SwitchingLine::vertical(offset),
            PwhsOrientation::Horizontal => SwitchingLine::horizontal(offset),
        };
        let sys = PWSystem::new(p.0.clone(), m.0.clone(), line)?;
        put(out, boxed(PwhsSystem(sys)))
    })
}

/// # Safety
/// `sys` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pwhs_system_free(sys: *mut PwhsSystem) {
    free(sys)
}

fn region_class(c: RegionClass) -> PwhsRegionClass {
    match c {
        RegionClass::Sewing => PwhsRegionClass::Sewing,
        RegionClass::SlidingAttract => PwhsRegionClass::SlidingAttract,
        RegionClass::SlidingRepel => PwhsRegionClass::SlidingRepel,
        RegionClass::Tangency => PwhsRegionClass::Tangency,
    }
}

/// Class of the line point with parameter `s`.
///
/// # Safety
/// `sys` must be live and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn pwhs_classify_point(
    sys: *const PwhsSystem,
    s: f64,
    out: *mut PwhsRegionClass,
) -> PwhsStatus {
    guard(|| {
        let sys = get(sys)?;
        put(out, region_class(switching::classify_point(&sys.0, s)?))
    })
}

/// Partition `[lo, hi]` of the line into sewing, sliding and tangency parts.
///
/// # Safety
/// `sys` must be live and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn pwhs_classify_regions(
    sys: *const PwhsSystem,
    lo: f64,
    hi: f64,
    resolution: usize,
    out: *mut *mut PwhsRegions,
) -> PwhsStatus {
    guard(|| {
        let sys = get(sys)?;
        if out.is_null() {
            return Err(Fail::Status(PwhsStatus::NullPointer, "null output pointer"));
        }
        let rep = switching::classify_regions(&sys.0, lo, hi, resolution)?;
        put(out, boxed(PwhsRegions(rep)))
    })
}

/// # Safety
/// `regions` must be live.
#[no_mangle]
pub unsafe extern "C" fn pwhs_regions_len(regions: *const PwhsRegions) -> usize {
    regions.as_ref().map_or(0, |r| r.0.segments.len())
}

/// # Safety
/// `regions` must be live and the output pointers valid.
#[no_mangle]
pub unsafe extern "C" fn pwhs_regions_segment(
    regions: *const PwhsRegions,
    index: usize,
    lo: *mut f64,
    hi: *mut f64,
    class: *mut PwhsRegionClass,
) -> PwhsStatus {
    guard(|| {
        let r = get(regions)?;
        let seg = r
            .0
            .segments
            .get(index)
            .ok_or(Fail::Status(PwhsStatus::IndexOutOfRange, "segment index out of range"))?;
        put(lo, seg.lo)?;
        put(hi, seg.hi)?;
        put(class, region_class(seg.class))
    })
}

/// # Safety
/// `regions` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pwhs_regions_free(regions: *mut PwhsRegions) {
    free(regions)
}

unsafe fn options(opts: *const PwhsOptions) -> Result<IntegratorOptions, Fail> {
    let o: IntegratorOptions = match opts.as_ref() {
        Some(o) => (*o).into(),
        None => IntegratorOptions::default(),
    };
    o.validate()?;
    Ok(o)
}

/// Filippov orbit from `z0`. `opts` may be null for the defaults.
///
/// # Safety
/// `sys` must be live, `opts` null or valid, `out` valid.
#[no_mangle]
pub unsafe extern "C" fn pwhs_integrate(
    sys: *const PwhsSystem,
    z0: PwhsComplex,
    opts: *const PwhsOptions,
    out: *mut *mut PwhsTrajectory,
) -> PwhsStatus {
    guard(|| {
        let sys = get(sys)?;
        let o = options(opts)?;
        if out.is_null() {
            return Err(Fail::Status(PwhsStatus::NullPointer, "null output pointer"));
        }
        let tr = flow::integrate(&sys.0, z0.into(), &o)?;
        put(out, boxed(PwhsTrajectory(tr)))
    })
}

/// # Safety
/// `traj` must be live.
#[no_mangle]
pub unsafe extern "C" fn pwhs_trajectory_len(traj: *const PwhsTrajectory) -> usize {
    traj.as_ref().map_or(0, |t| t.0.samples.len())
}

/// # Safety
/// `traj` must be live and the output pointers valid.
#[no_mangle]
pub unsafe extern "C" fn pwhs_trajectory_sample(
    traj: *const PwhsTrajectory,
    index: usize,
    t: *mut f64,
    z: *mut PwhsComplex,
    mode: *mut PwhsMode,
) -> PwhsStatus {
    guard(|| {
        let tr = get(traj)?;
        let s = tr
            .0
            .samples
            .get(index)
            .ok_or(Fail::Status(PwhsStatus::IndexOutOfRange, "sample index out of range"))?;
        put(t, s.t)?;
        put(z, s.z.into())?;
        put(
            mode,
            match s.mode {
                Mode::FreePlus => PwhsMode::FreePlus,
                Mode::FreeMinus => PwhsMode::FreeMinus,
                Mode::Sliding => PwhsMode::Sliding,
            },
        )
    })
}

/// # Safety
/// `traj` must be live and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn pwhs_trajectory_termination(
    traj: *const PwhsTrajectory,
    out: *mut PwhsTermination,
) -> PwhsStatus {
    guard(|| {
        let tr = get(traj)?;
        put(
            out,
            match tr.0.termination {
                Termination::TimeLimit => PwhsTermination::TimeLimit,
                Termination::Escape => PwhsTermination::Escape,
                Termination::Singularity => PwhsTermination::Singularity,
                Termination::TangencyHit => PwhsTermination::TangencyHit,
                Termination::RepellingSliding => PwhsTermination::RepellingSliding,
            },
        )
    })
}

/// # Safety
/// `traj` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pwhs_trajectory_free(traj: *mut PwhsTrajectory) {
    free(traj)
}

/// Follow one field from the line point `s` into its side until it returns.
/// Writes the landing parameter and the transit time.
///
/// # Safety
/// `sys` must be live, `opts` null or valid, outputs valid.
#[no_mangle]
pub unsafe extern "C" fn pwhs_half_return(
    sys: *const PwhsSystem,
    side: PwhsSide,
    s: f64,
    opts: *const PwhsOptions,
    landing: *mut f64,
    time: *mut f64,
) -> PwhsStatus {
    guard(|| {
        let sys = get(sys)?;
        let o = options(opts)?;
        if landing.is_null() || time.is_null() {
            return Err(Fail::Status(PwhsStatus::NullPointer, "null output pointer"));
        }
        let side = match side {
            PwhsSide::Plus => Side::Plus,
            PwhsSide::Minus => Side::Minus,
        };
        let (land, t) = flow::half_return(&sys.0, side, s, &o)?;
        put(landing, land)?;
        put(time, t)
    })
}

/// Closed-form return map of `(a + ib)(z - x0)` above and `(c + id) z` below
/// `Im z = 0`.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn pwhs_linear_poincare(
    a: f64,
    b: f64,
    c: f64,
    d: f64,
    x0: f64,
    out: *mut PwhsPoincare,
) -> PwhsStatus {
    guard(|| {
        if out.is_null() {
            return Err(Fail::Status(PwhsStatus::NullPointer, "null output pointer"));
        }
        let p = cycles::linear_poincare(a, b, c, d, x0)?;
        put(
            out,
            PwhsPoincare {
                has_fixed_point: p.fixed_point.is_some(),
                fixed_point: p.fixed_point.unwrap_or(f64::NAN),
                derivative: p.derivative,
                stability: match p.stability {
                    Stability::Stable => PwhsStability::Stable,
                    Stability::Unstable => PwhsStability::Unstable,
                    Stability::None => PwhsStability::None,
                },
            },
        )
    })
}
