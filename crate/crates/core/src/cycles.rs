//! Poincaré return maps on the horizontal switching line, closed-form limit
//! cycles of the linear, power and pole families, numeric shooting, and
//! homoclinic loops built from invariant rays.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::complexfield::{ComplexPoint, FieldSpec};
use crate::error::{Error, Result};
use crate::flow::{
    half_return, half_return_leg, integrate_field, IntegratorOptions, LegEnd, Mode, Sample,
    Termination, Trajectory,
};
use crate::switching::{PWSystem, Side, SwitchingLine, CLASSIFY_TOL};

/// Closure tolerance for numerically verified cycles and loops.
pub const CLOSURE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stability {
    Stable,
    Unstable,
    None,
}

impl Stability {
    pub fn from_derivative(d: f64) -> Self {
        if d.abs() < 1.0 {
            Stability::Stable
        } else if d.abs() > 1.0 {
            Stability::Unstable
        } else {
            Stability::None
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            Stability::Stable => "stable",
            Stability::Unstable => "unstable",
            Stability::None => "none",
        }
    }
}

/// Return-map data. The fixed point is the parameter where the cycle
/// crosses the line upward.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PoincareResult {
    /// `(A, B)` of an affine map `s -> A s + B`, when known in closed form.
    pub affine: Option<(f64, f64)>,
    pub fixed_point: Option<f64>,
    pub derivative: f64,
    pub stability: Stability,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CycleResult {
    pub poincare: PoincareResult,
    pub system: PWSystem,
    pub orbit: Trajectory,
    pub period: f64,
    /// Distance between the numerically returned point and the start.
    pub closure: f64,
}

fn sgn(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

/// The system `(a+ib)(z - x0)` above `Im z = 0`, `(c+id) z` below.
pub fn linear_system(a: f64, b: f64, c: f64, d: f64, x0: f64) -> Result<PWSystem> {
    PWSystem::new(
        FieldSpec::linear(a, b, Complex64::new(x0, 0.0)),
        FieldSpec::linear(c, d, Complex64::new(0.0, 0.0)),
        SwitchingLine::horizontal(0.0),
    )
}

/// Closed-form return map of [`linear_system`].
///
/// Writing `E_b = exp(a pi/|b|)` and `E_d = exp(c pi/|d|)`, an upward crossing
/// at `s` returns to `E_d ((s - x0) E_b - x0)`.
pub fn linear_poincare(a: f64, b: f64, c: f64, d: f64, x0: f64) -> Result<PoincareResult> {
    if !(a.is_finite() && b.is_finite() && c.is_finite() && d.is_finite() && x0.is_finite()) {
        return Err(Error::InvalidArgument("parameters must be finite".into()));
    }
    if b * d * x0 == 0.0 {
        return Err(Error::DegenerateParameters(
            "b, d and x0 must be nonzero".into(),
        ));
    }
    if sgn(b) != sgn(d) {
        return Err(Error::MixedRotation);
    }
    let eb = (a * PI / b.abs()).exp();
    let ed = (c * PI / d.abs()).exp();
    let (aa, bb) = (ed * eb, -ed * x0 * (1.0 + eb));
    if a / b + c / d == 0.0 {
        return Ok(PoincareResult {
            affine: Some((aa, bb)),
            fixed_point: None,
            derivative: aa,
            stability: Stability::None,
        });
    }
    let s = bb / (1.0 - aa);
    let s1 = x0 - (s - x0) * eb;
    let admissible = b * (s - x0) > 0.0 && d * s1 < 0.0;
    Ok(PoincareResult {
        affine: Some((aa, bb)),
        fixed_point: admissible.then_some(s),
        derivative: aa,
        stability: if admissible {
            Stability::from_derivative(aa)
        } else {
            Stability::None
        },
    })
}

// Sign rows of the corollary tables; 2 in the x0 column stands for
// sgn(x0) = sgn(a/b + c/d).
const COROLLARY_ROWS: [[i8; 5]; 16] = [
    [1, 1, 1, 1, 1],
    [-1, 1, -1, 1, -1],
    [-1, -1, -1, -1, 1],
    [1, -1, 1, -1, -1],
    [1, 1, -1, 1, 2],
    [-1, 1, 1, 1, 2],
    [-1, -1, 1, -1, 2],
    [1, -1, -1, -1, 2],
    [0, 1, 1, 1, 1],
    [0, 1, -1, 1, -1],
    [0, -1, 1, -1, -1],
    [0, -1, -1, -1, 1],
    [1, 1, 0, 1, 1],
    [-1, 1, 0, 1, -1],
    [-1, -1, 0, -1, 1],
    [1, -1, 0, -1, -1],
];

/// Whether the sign pattern of `(a, b, c, d, x0)` matches a row of the
/// existence tables and `a/b + c/d != 0`.
pub fn corollary_table_check(a: f64, b: f64, c: f64, d: f64, x0: f64) -> bool {
    if b == 0.0 || d == 0.0 || x0 == 0.0 {
        return false;
    }
    let r = a / b + c / d;
    if r == 0.0 {
        return false;
    }
    let pat = [sgn(a), sgn(b), sgn(c), sgn(d), sgn(x0)];
    COROLLARY_ROWS.iter().any(|row| {
        row[..4] == pat[..4]
            && if row[4] == 2 {
                pat[4] == sgn(r)
            } else {
                row[4] == pat[4]
            }
    })
}

/// Upward-crossing return map: plus half then minus half.
pub fn return_map(sys: &PWSystem, s: f64, opts: &IntegratorOptions) -> Result<f64> {
    Ok(return_map_timed(sys, s, opts)?.0)
}

fn return_map_timed(sys: &PWSystem, s: f64, opts: &IntegratorOptions) -> Result<(f64, f64)> {
    let (s1, t1) = half_return(sys, Side::Plus, s, opts)?;
    let (s2, t2) = half_return(sys, Side::Minus, s1, opts)?;
    Ok((s2, t1 + t2))
}

fn displacement(sys: &PWSystem, s: f64, opts: &IntegratorOptions) -> Result<f64> {
    return_map(sys, s, opts)
        .map(|p| p - s)
        .map_err(|e| Error::IntegrationFailure(format!("return map at s={s}: {e}")))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShootingResult {
    pub fixed_point: f64,
    pub derivative: f64,
    pub stability: Stability,
}

/// Fixed point of the return map by bisection on the displacement.
pub fn shooting_fixed_point(
    sys: &PWSystem,
    bracket: (f64, f64),
    opts: &IntegratorOptions,
) -> Result<ShootingResult> {
    let (mut lo, mut hi) = if bracket.0 < bracket.1 {
        bracket
    } else {
        (bracket.1, bracket.0)
    };
    let mut dlo = displacement(sys, lo, opts)?;
    let dhi = displacement(sys, hi, opts)?;
    if dlo * dhi > 0.0 {
        return Err(Error::NoSignChange(lo, hi));
    }
    let mut w0 = if dlo == 0.0 { lo } else { hi };
    if dlo != 0.0 && dhi != 0.0 {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if hi - lo <= 1e-13 * mid.abs().max(1.0) || mid <= lo || mid >= hi {
                w0 = mid;
                break;
            }
            let dm = displacement(sys, mid, opts)?;
            w0 = mid;
            if dm == 0.0 {
                break;
            }
            if (dm > 0.0) == (dlo > 0.0) {
                lo = mid;
                dlo = dm;
            } else {
                hi = mid;
            }
        }
    }
    // the step scales with w0 so integration error stays small next to it
    let width = (bracket.1 - bracket.0).abs();
    let h = (1e-4 * w0.abs().max(1.0)).min(0.25 * width).max(1e-8);
    let derivative = (return_map(sys, w0 + h, opts)? - return_map(sys, w0 - h, opts)?) / (2.0 * h);
    // a sign change across a jump leaves a large residual; integration noise
    // grows with the orbit size and the expansion of the map
    let residual = displacement(sys, w0, opts)?;
    if residual.abs() > 1e-8 * w0.abs().max(1.0) * derivative.abs().max(1.0) {
        return Err(Error::IntegrationFailure(format!(
            "displacement {residual:e} at bisection limit"
        )));
    }
    Ok(ShootingResult {
        fixed_point: w0,
        derivative,
        stability: Stability::from_derivative(derivative),
    })
}

/// Stability read off two iterates at `w0 - delta` and `w0 + delta`.
pub fn stability_from_iterates(
    sys: &PWSystem,
    w0: f64,
    delta: f64,
    opts: &IntegratorOptions,
) -> Result<Stability> {
    let l = return_map(sys, w0 - delta, opts)?;
    let r = return_map(sys, w0 + delta, opts)?;
    let (dl, dr) = ((l - w0).abs(), (r - w0).abs());
    Ok(if dl < delta && dr < delta {
        Stability::Stable
    } else if dl > delta && dr > delta {
        Stability::Unstable
    } else {
        Stability::None
    })
}

/// Fixed points of the return map found by scanning `seeds` evenly spaced
/// start points in `(lo, hi)` for sign changes of the displacement.
pub fn scan_fixed_points(
    sys: &PWSystem,
    lo: f64,
    hi: f64,
    seeds: usize,
    opts: &IntegratorOptions,
) -> Result<Vec<f64>> {
    let xs: Vec<f64> = (0..seeds)
        .map(|j| lo + (hi - lo) * (j as f64 + 0.5) / seeds as f64)
        .collect();
    let ds: Vec<Option<f64>> = xs
        .par_iter()
        .map(|&s| displacement(sys, s, opts).ok())
        .collect();
    let brackets: Vec<(f64, f64)> = xs
        .windows(2)
        .zip(ds.windows(2))
        .filter_map(|(x, d)| match (d[0], d[1]) {
            (Some(a), Some(b)) if a * b <= 0.0 && !(a == 0.0 && b == 0.0) => Some((x[0], x[1])),
            _ => None,
        })
        .collect();
    brackets
        .par_iter()
        .map(|&br| shooting_fixed_point(sys, br, opts).map(|r| r.fixed_point))
        .collect::<Result<Vec<_>>>()
        .map(|mut v| {
            v.sort_by(f64::total_cmp);
            v.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
            v
        })
}

/// Integrate the cycle through the upward crossing `s_up` and package it.
pub fn cycle_orbit(
    sys: PWSystem,
    s_up: f64,
    poincare: PoincareResult,
    opts: &IntegratorOptions,
) -> Result<CycleResult> {
    let fail = |e: Error| Error::NoAdmissibleCycle(format!("orbit from s={s_up}: {e}"));
    let upper = half_return_leg(&sys, Side::Plus, s_up, opts).map_err(fail)?;
    let LegEnd::Event { t: t1, z: z1 } = upper.end else {
        return Err(Error::NoAdmissibleCycle(format!(
            "upper orbit from s={s_up} does not return"
        )));
    };
    let s1 = sys.line.param(z1);
    let lower = half_return_leg(&sys, Side::Minus, s1, opts).map_err(fail)?;
    let LegEnd::Event { t: t2, z: z2 } = lower.end else {
        return Err(Error::NoAdmissibleCycle(format!(
            "lower orbit from s={s1} does not return"
        )));
    };
    let closure = (z2 - sys.line.point(s_up)).norm();
    let mut samples: Vec<Sample> = upper
        .samples
        .iter()
        .map(|&(t, z)| Sample {
            t,
            z,
            mode: Mode::FreePlus,
        })
        .collect();
    samples.extend(lower.samples.iter().map(|&(t, z)| Sample {
        t: t + t1,
        z,
        mode: Mode::FreeMinus,
    }));
    // The junction appears twice; keep the later copy, which starts the lower half.
    samples.dedup_by(|later, earlier| {
        if later.t == earlier.t {
            *earlier = *later;
            true
        } else {
            false
        }
    });
    let orbit = Trajectory {
        samples,
        events: vec![crate::flow::Event {
            t: t1,
            kind: crate::flow::EventKind::Crossing,
        }],
        termination: Termination::TimeLimit,
    };
    Ok(CycleResult {
        poincare,
        system: sys,
        orbit,
        period: t1 + t2,
        closure,
    })
}

/// Numerically verified cycle for the linear system.
pub fn linear_cycle(
    a: f64,
    b: f64,
    c: f64,
    d: f64,
    x0: f64,
    opts: &IntegratorOptions,
) -> Result<CycleResult> {
    let p = linear_poincare(a, b, c, d, x0)?;
    let s = p.fixed_point.ok_or_else(|| {
        Error::NoAdmissibleCycle("closed-form fixed point missing or inadmissible".into())
    })?;
    let res = cycle_orbit(linear_system(a, b, c, d, x0)?, s, p, opts)?;
    if res.closure > CLOSURE_TOL {
        return Err(Error::NoAdmissibleCycle(format!(
            "numeric orbit misses closure by {:e}",
            res.closure
        )));
    }
    Ok(res)
}

fn cot(x: f64) -> f64 {
    x.cos() / x.sin()
}

fn check_parity(n: u32, m: u32) -> Result<()> {
    if m != n % 2 {
        return Err(Error::ConditionViolated(format!(
            "premultiplier exponent must be m = {} for n = {n}",
            n % 2
        )));
    }
    Ok(())
}

fn require(ok: bool, what: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::ConditionViolated(what.to_string()))
    }
}

/// `i^m (z + z0)^n` above `Im z = 0`, `(a+ib)(z - d)` below.
pub fn zn_system(n: u32, m: u32, a: f64, b: f64, d: f64, z0: ComplexPoint) -> Result<PWSystem> {
    PWSystem::new(
        FieldSpec::power(n, -z0, m),
        FieldSpec::linear(a, b, Complex64::new(d, 0.0)),
        SwitchingLine::horizontal(0.0),
    )
}

/// Cycle data for the power family before integration: system, upward
/// crossing, Poincaré data and the admissible segment between the
/// bounding invariant rays.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilyCycle {
    pub system: PWSystem,
    pub s_up: f64,
    pub poincare: PoincareResult,
    pub segment: (f64, f64),
}

/// Closed-form cycle of the power family, checking the table row.
pub fn zn_cycle_closed_form(
    n: u32,
    m: u32,
    a: f64,
    b: f64,
    d: f64,
    z0: ComplexPoint,
) -> Result<FamilyCycle> {
    if n < 2 {
        return Err(Error::InvalidArgument("power family needs n >= 2".into()));
    }
    check_parity(n, m)?;
    let (x0, y0) = (z0.re, z0.im);
    require(y0 > 0.0, "y0 > 0")?;
    let e = (a * PI / b).exp();
    let system = zn_system(n, m, a, b, d, z0)?;
    if n == 2 {
        require(a < 0.0 && b > 0.0, "a < 0 < b")?;
        require(d > -x0, "d > -x0")?;
        let w0 = (d + e * (d + 2.0 * x0)) / (1.0 - e);
        return Ok(FamilyCycle {
            system,
            s_up: w0,
            poincare: PoincareResult {
                affine: Some((e, d * (1.0 + e) + 2.0 * x0 * e)),
                fixed_point: Some(w0),
                derivative: e,
                stability: Stability::from_derivative(e),
            },
            segment: (-x0, -x0 + 10.0 * (w0 + x0).max(1.0)),
        });
    }
    require(x0 == 0.0, "x0 = 0")?;
    let w0 = d * (1.0 + e) / (1.0 - e);
    let factor = (a * PI / b.abs()).exp();
    let (s_up, segment) = match n % 4 {
        3 | 0 => {
            require(a < 0.0 && b < 0.0 && d < 0.0, "a, b, d < 0")?;
            let bound = cot(n as f64 * PI / (2.0 * (n as f64 - 1.0))) * y0;
            require(
                bound < -w0 && -w0 < 0.0,
                "cot(n pi/(2(n-1))) y0 < -d(1+e^(a pi/b))/(1-e^(a pi/b)) < 0",
            )?;
            (-w0, (bound, 0.0))
        }
        _ => {
            require(a < 0.0 && b > 0.0 && d > 0.0, "a < 0 < b, d > 0")?;
            let bound = cot((n as f64 - 2.0) * PI / (2.0 * (n as f64 - 1.0))) * y0;
            require(
                0.0 < w0 && w0 < bound,
                "0 < d(1+e^(a pi/b))/(1-e^(a pi/b)) < cot((n-2) pi/(2(n-1))) y0",
            )?;
            (w0, (0.0, bound))
        }
    };
    Ok(FamilyCycle {
        system,
        s_up,
        poincare: PoincareResult {
            affine: None,
            fixed_point: Some(s_up),
            derivative: factor,
            stability: Stability::from_derivative(factor),
        },
        segment,
    })
}

/// Verified stable cycle of `i^m (z+z0)^n` over `(a+ib)(z-d)`.
pub fn zn_cycle(
    n: u32,
    m: u32,
    a: f64,
    b: f64,
    d: f64,
    z0: ComplexPoint,
    opts: &IntegratorOptions,
) -> Result<CycleResult> {
    let fc = zn_cycle_closed_form(n, m, a, b, d, z0)?;
    verified(fc, opts)
}

fn verified(fc: FamilyCycle, opts: &IntegratorOptions) -> Result<CycleResult> {
    let res = cycle_orbit(fc.system, fc.s_up, fc.poincare, opts)?;
    if res.closure > CLOSURE_TOL {
        return Err(Error::NoAdmissibleCycle(format!(
            "numeric orbit misses closure by {:e}",
            res.closure
        )));
    }
    Ok(res)
}

/// `(a+ib)(z - d)` above `Im z = 0`, `i^m / (z + i y0)^n` below.
pub fn pole_system(n: u32, m: u32, a: f64, b: f64, d: f64, y0: f64) -> Result<PWSystem> {
    PWSystem::new(
        FieldSpec::linear(a, b, Complex64::new(d, 0.0)),
        FieldSpec::pole(n, Complex64::new(0.0, -y0), m),
        SwitchingLine::horizontal(0.0),
    )
}

pub fn pole_cycle_closed_form(
    n: u32,
    m: u32,
    a: f64,
    b: f64,
    d: f64,
    y0: f64,
) -> Result<FamilyCycle> {
    if n < 1 {
        return Err(Error::InvalidArgument("pole family needs n >= 1".into()));
    }
    check_parity(n, m)?;
    require(y0 > 0.0, "y0 > 0")?;
    let e = (a * PI / b).exp();
    let w0 = d * (1.0 + e) / (-1.0 + e);
    let nf = n as f64;
    let factor = (a * PI / b.abs()).exp();
    let (s_up, segment) = match n % 4 {
        2 | 3 => {
            require(a < 0.0 && b < 0.0 && d > 0.0, "a, b < 0 < d")?;
            let bound = cot(nf * PI / (2.0 * (nf + 1.0))) * y0;
            require(
                0.0 < w0 && w0 < bound,
                "0 < d(1+e^(a pi/b))/(-1+e^(a pi/b)) < cot(n pi/(2(n+1))) y0",
            )?;
            (-w0, (-bound, 0.0))
        }
        _ => {
            require(a < 0.0 && b > 0.0 && d < 0.0, "a < 0 < b, d < 0")?;
            let bound = cot((nf + 2.0) * PI / (2.0 * (nf + 1.0))) * y0;
            require(
                bound < -w0 && -w0 < 0.0,
                "cot((n+2) pi/(2(n+1))) y0 < -d(1+e^(a pi/b))/(-1+e^(a pi/b)) < 0",
            )?;
            (w0, (0.0, -bound))
        }
    };
    Ok(FamilyCycle {
        system: pole_system(n, m, a, b, d, y0)?,
        s_up,
        poincare: PoincareResult {
            affine: None,
            fixed_point: Some(s_up),
            derivative: factor,
            stability: Stability::from_derivative(factor),
        },
        segment,
    })
}

/// Verified stable cycle of `(a+ib)(z-d)` over `i^m/(z + i y0)^n`.
pub fn pole_cycle(
    n: u32,
    m: u32,
    a: f64,
    b: f64,
    d: f64,
    y0: f64,
    opts: &IntegratorOptions,
) -> Result<CycleResult> {
    verified(pole_cycle_closed_form(n, m, a, b, d, y0)?, opts)
}

/// Fixed points found by the seed scan over the admissible segment.
pub fn family_scan(fc: &FamilyCycle, seeds: usize, opts: &IntegratorOptions) -> Result<Vec<f64>> {
    scan_fixed_points(&fc.system, fc.segment.0, fc.segment.1, seeds, opts)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HomoclinicFamily {
    /// `i^m/(z + i y0)^n` below, `i b z` above.
    PoleFamily,
    /// `i^m (z + i y0)^n` below, `i b z` above.
    PowerFamily,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HomoclinicResult {
    pub family: HomoclinicFamily,
    pub system: PWSystem,
    /// Line parameters where the loop leaves and re-enters the lower half-plane.
    pub start: f64,
    pub end: f64,
    /// The upper arc is the half circle of this radius about the origin.
    pub arc_radius: f64,
    /// Angles about the lower field's center of the outgoing and incoming rays.
    pub ray_out: f64,
    pub ray_in: f64,
    /// Closed polyline: center, out-ray, arc, in-ray, center.
    pub orbit: Vec<ComplexPoint>,
    /// Largest numerical discrepancy found while checking the three pieces.
    pub closure: f64,
}

pub fn homoclinic_system(family: HomoclinicFamily, n: u32, m: u32, b: f64, y0: f64) -> Result<PWSystem> {
    let center = Complex64::new(0.0, -y0);
    let lower = match family {
        HomoclinicFamily::PoleFamily => FieldSpec::pole(n, center, m),
        HomoclinicFamily::PowerFamily => FieldSpec::power(n, center, m),
    };
    PWSystem::new(
        FieldSpec::linear(0.0, b, Complex64::new(0.0, 0.0)),
        lower,
        SwitchingLine::horizontal(0.0),
    )
}

/// Sign of `b` the family admits for `n`, from the radial flow direction on
/// the right-hand bounding ray.
pub fn homoclinic_b_sign(family: HomoclinicFamily, n: u32) -> i8 {
    let m = (n % 2) as i64;
    let n = n as i64;
    let quarter_turns = match family {
        HomoclinicFamily::PoleFamily => m - n,
        HomoclinicFamily::PowerFamily => m + n - 2,
    };
    // cos(q pi/2) for even q is (-1)^(q/2)
    if quarter_turns.rem_euclid(4) == 0 {
        1
    } else {
        -1
    }
}

/// Homoclinic loop through the lower field's center, built from two
/// invariant rays and the upper half circle.
pub fn homoclinic(
    n: u32,
    m: u32,
    b: f64,
    y0: f64,
    family: HomoclinicFamily,
    opts: &IntegratorOptions,
) -> Result<HomoclinicResult> {
    require(y0 > 0.0, "y0 > 0")?;
    if b == 0.0 || !b.is_finite() {
        return Err(Error::InvalidArgument("b must be nonzero".into()));
    }
    check_parity(n, m)?;
    let nf = n as f64;
    let theta_right = match family {
        HomoclinicFamily::PoleFamily => {
            require(n >= 1, "n >= 1")?;
            nf * PI / (2.0 * (nf + 1.0))
        }
        HomoclinicFamily::PowerFamily => {
            if n <= 2 {
                return Err(Error::TableRowMismatch("power family needs n > 2".into()));
            }
            (nf - 2.0) * PI / (2.0 * (nf - 1.0))
        }
    };
    let expected = homoclinic_b_sign(family, n);
    if sgn(b) != expected {
        return Err(Error::TableRowMismatch(format!(
            "n = {n} requires b {} 0",
            if expected > 0 { ">" } else { "<" }
        )));
    }
    let theta_left = PI - theta_right;
    let right = cot(theta_right) * y0;
    let left = cot(theta_left) * y0;
    let (start, end, ray_out, ray_in) = if b > 0.0 {
        (right, left, theta_right, theta_left)
    } else {
        (left, right, theta_left, theta_right)
    };
    let system = homoclinic_system(family, n, m, b, y0)?;
    let center = Complex64::new(0.0, -y0);
    let lower = system.minus.clone();
    let line = system.line;
    let mut closure: f64 = 0.0;

    // Upper arc.
    let arc = half_return_leg(&system, Side::Plus, start, opts)?;
    let LegEnd::Event { z: arc_end, .. } = arc.end else {
        return Err(Error::IntegrationFailure("upper arc does not return".into()));
    };
    closure = closure.max((arc_end - line.point(end)).norm());

    let ray_dist = |z: ComplexPoint, th: f64| {
        let w = z - center;
        (w.im * th.cos() - w.re * th.sin()).abs()
    };
    let field = |z: ComplexPoint| lower.eval(z);

    // Outgoing ray: from its midpoint forward to the line.
    let r_start = (line.point(start) - center).norm();
    let mid = center + Complex64::from_polar(0.5 * r_start, ray_out);
    let hit_line = |z: ComplexPoint| -line.signed_distance(z);
    let out = integrate_field(&field, &lower.exclusions(), Some(&hit_line), 0.0, mid, opts.t_max, opts)?;
    match out.end {
        LegEnd::Event { z, .. } => {
            closure = closure.max((line.point(line.param(z)) - line.point(start)).norm());
        }
        _ => return Err(Error::IntegrationFailure("outgoing ray does not reach the line".into())),
    }
    for &(_, z) in &out.samples {
        closure = closure.max(ray_dist(z, ray_out));
    }

    // Incoming ray: from the landing point until half way to the center.
    let r_end = (line.point(end) - center).norm();
    let halfway = |z: ComplexPoint| (z - center).norm() - 0.5 * r_end;
    let inward = integrate_field(
        &field,
        &lower.exclusions(),
        Some(&halfway),
        0.0,
        line.point(end),
        opts.t_max,
        opts,
    )?;
    match inward.end {
        LegEnd::Event { z, .. } => {
            let target = center + Complex64::from_polar(0.5 * r_end, ray_in);
            closure = closure.max((z - target).norm());
        }
        _ => return Err(Error::IntegrationFailure("incoming ray does not approach the center".into())),
    }
    for &(_, z) in &inward.samples {
        closure = closure.max(ray_dist(z, ray_in));
    }

    let pts = 32;
    let mut orbit: Vec<ComplexPoint> = (0..pts)
        .map(|j| center + (line.point(start) - center) * (j as f64 / pts as f64))
        .collect();
    orbit.extend(arc.samples.iter().map(|&(_, z)| z));
    orbit.extend((1..=pts).map(|j| line.point(end) + (center - line.point(end)) * (j as f64 / pts as f64)));

    Ok(HomoclinicResult {
        family,
        system,
        start,
        end,
        arc_radius: right.abs(),
        ray_out,
        ray_in,
        orbit,
        closure,
    })
}

/// Upper field `gamma (z - z0)^2 / (1 + z - z0)` over `i (z - c)`.
pub fn rational_example_system(gamma: f64, z0: ComplexPoint, c: f64) -> Result<PWSystem> {
    PWSystem::new(
        FieldSpec::rational(gamma, 2, z0),
        FieldSpec::linear(0.0, 1.0, Complex64::new(c, 0.0)),
        SwitchingLine::horizontal(0.0),
    )
}

/// Check that the plus field crosses upward at `s`.
pub fn upward_at(sys: &PWSystem, s: f64) -> Result<bool> {
    Ok(sys.line.normal(sys.plus.eval(sys.line.point(s))?) > CLASSIFY_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_poincare_figure_parameters() {
        let p = linear_poincare(-1.0, 1.0, -1.0, 1.0, -1.0).unwrap();
        let e = (-PI).exp();
        let w0 = -e * (1.0 + e) / (-1.0 + e * e);
        assert!((p.fixed_point.unwrap() - w0).abs() < 1e-15);
        assert_eq!(p.stability, Stability::Stable);
        assert!((p.derivative - (-2.0 * PI).exp()).abs() < 1e-15);
    }

    #[test]
    fn balanced_rotation_has_no_fixed_point() {
        let p = linear_poincare(1.0, 1.0, -1.0, 1.0, 1.0).unwrap();
        assert_eq!(p.fixed_point, None);
        assert_eq!(p.stability, Stability::None);
    }

    #[test]
    fn degenerate_and_mixed() {
        assert!(matches!(
            linear_poincare(1.0, 0.0, 1.0, 1.0, 1.0),
            Err(Error::DegenerateParameters(_))
        ));
        assert_eq!(linear_poincare(1.0, 1.0, 1.0, -1.0, 1.0), Err(Error::MixedRotation));
    }

    #[test]
    fn table_check_examples() {
        assert!(corollary_table_check(0.0, 1.0, 1.0, 1.0, 1.0));
        // (+,+,+,+,-) is not a row
        assert!(!corollary_table_check(1.0, 1.0, 1.0, 1.0, -1.0));
        assert!(!corollary_table_check(1.0, 0.0, 1.0, 1.0, 1.0));
        assert!(corollary_table_check(-1.0, 1.0, -1.0, 1.0, -1.0));
    }

    #[test]
    fn homoclinic_signs() {
        use HomoclinicFamily::*;
        assert_eq!(homoclinic_b_sign(PoleFamily, 1), 1);
        assert_eq!(homoclinic_b_sign(PoleFamily, 2), -1);
        assert_eq!(homoclinic_b_sign(PoleFamily, 3), -1);
        assert_eq!(homoclinic_b_sign(PoleFamily, 4), 1);
        assert_eq!(homoclinic_b_sign(PowerFamily, 3), -1);
        assert_eq!(homoclinic_b_sign(PowerFamily, 4), -1);
        assert_eq!(homoclinic_b_sign(PowerFamily, 5), 1);
        assert_eq!(homoclinic_b_sign(PowerFamily, 6), 1);
    }

    #[test]
    fn zn_main_condition_named() {
        let err = zn_cycle_closed_form(4, 0, -1.0, -1.0, -10.0, Complex64::new(0.0, 1.0)).unwrap_err();
        match err {
            Error::ConditionViolated(msg) => assert!(msg.contains("cot(n pi/(2(n-1)))")),
            other => panic!("unexpected {other:?}"),
        }
    }
}
