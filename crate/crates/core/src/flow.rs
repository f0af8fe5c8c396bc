//! Closed-form orbits (linear halves, polar first integrals, invariant rays)
//! and a Filippov integrator with event location on the switching line.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::complexfield::{ComplexPoint, FieldSpec};
use crate::error::{Error, Result};
use crate::switching::{classify_point, PWSystem, RegionClass, Side, CLASSIFY_TOL};

/// Orbits farther than this from the origin are reported as escaped.
pub const ESCAPE_RADIUS: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub event_tol: f64,
    pub singularity_standoff: f64,
    pub t_max: f64,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        IntegratorOptions {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_step: 0.05,
            event_tol: 1e-11,
            singularity_standoff: 1e-6,
            t_max: 1e3,
        }
    }
}

impl IntegratorOptions {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.rel_tol,
            self.abs_tol,
            self.max_step,
            self.event_tol,
            self.singularity_standoff,
            self.t_max,
        ];
        if all.iter().all(|x| x.is_finite() && *x > 0.0) {
            Ok(())
        } else {
            Err(Error::InvalidArgument(
                "integrator options must be positive and finite".into(),
            ))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Mode {
    FreePlus,
    FreeMinus,
    Sliding,
}

impl Mode {
    pub fn tag(self) -> &'static str {
        match self {
            Mode::FreePlus => "free_plus",
            Mode::FreeMinus => "free_minus",
            Mode::Sliding => "sliding",
        }
    }

    fn free(side: Side) -> Mode {
        match side {
            Side::Plus => Mode::FreePlus,
            Side::Minus => Mode::FreeMinus,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EventKind {
    Crossing,
    SlideEntry,
    SlideExit,
    TangencyHit,
    SingularityStop,
    Escape,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Termination {
    TimeLimit,
    Escape,
    Singularity,
    TangencyHit,
    /// Reached a repelling sliding segment, where forward continuation is not unique.
    RepellingSliding,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sample {
    pub t: f64,
    pub z: ComplexPoint,
    pub mode: Mode,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Event {
    pub t: f64,
    pub kind: EventKind,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub events: Vec<Event>,
    pub termination: Termination,
}

impl Trajectory {
    pub fn last(&self) -> &Sample {
        self.samples.last().expect("trajectory has at least one sample")
    }

    /// Long-format CSV rows `traj,t,x,y,mode`.
    pub fn write_csv<W: Write>(trajs: &[Trajectory], out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["traj", "t", "x", "y", "mode"])?;
        for (i, tr) in trajs.iter().enumerate() {
            for s in &tr.samples {
                w.write_record([
                    i.to_string(),
                    s.t.to_string(),
                    s.z.re.to_string(),
                    s.z.im.to_string(),
                    s.mode.tag().to_string(),
                ])?;
            }
        }
        w.flush()
    }
}

/// `(w - z0) e^{(a+ib)t} + z0`, the orbit of `(a+ib)(z - z0)` through `w`.
pub fn solve_linear(a: f64, b: f64, z0: ComplexPoint, w: ComplexPoint, t: f64) -> ComplexPoint {
    (w - z0) * Complex64::new(a, b).scale(t).exp() + z0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PolarKind {
    /// `z^n`
    PowerEven,
    /// `i z^n`
    PowerOddTimesI,
    /// `1/z^n`
    PoleEven,
    /// `i/z^n`
    PoleOddTimesI,
}

/// Radius of the orbit through angle `theta` about the center, on the level
/// set labelled by `c` of the polar first integral.
pub fn polar_orbit_radius(kind: PolarKind, n: u32, theta: f64, c: f64) -> Result<f64> {
    let n = n as f64;
    match kind {
        PolarKind::PowerEven => Ok(((n - 1.0) * theta).sin().abs().powf(1.0 / (n - 1.0)) * c.exp()),
        PolarKind::PowerOddTimesI => {
            Ok(((n - 1.0) * theta).cos().abs().powf(1.0 / (n - 1.0)) * c.exp())
        }
        PolarKind::PoleEven | PolarKind::PoleOddTimesI => {
            let trig = if kind == PolarKind::PoleEven {
                ((n + 1.0) * theta).sin()
            } else {
                ((n + 1.0) * theta).cos()
            };
            if trig.abs() < 1e-12 {
                return Err(Error::OrbitUnboundedAtAngle(theta));
            }
            Ok(c.exp() / trig.abs().powf(1.0 / (n + 1.0)))
        }
    }
}

/// Level `c` of the polar first integral through the point at `(r, theta)`.
pub fn polar_level(kind: PolarKind, n: u32, r: f64, theta: f64) -> f64 {
    let unit = polar_orbit_radius(kind, n, theta, 0.0).unwrap_or(f64::INFINITY);
    (r / unit).ln()
}

/// Angles in `[0, 2pi)` of the rays through the center that the flow preserves.
pub fn invariant_rays(f: &FieldSpec) -> Result<Vec<f64>> {
    let (count, odd) = match f {
        FieldSpec::Power { n, m, .. } => ((*n - 1) as usize, *m % 2 == 1),
        FieldSpec::Pole { n, m, .. } => ((*n + 1) as usize, *m % 2 == 1),
        _ => return Err(Error::UnsupportedVariant("invariant_rays")),
    };
    let step = PI / count as f64;
    Ok((0..2 * count)
        .map(|j| {
            if odd {
                (j as f64 + 0.5) * step
            } else {
                j as f64 * step
            }
        })
        .collect())
}

// Dormand-Prince 5(4) tableau.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

struct Step {
    z: ComplexPoint,
    k_end: ComplexPoint,
    err: ComplexPoint,
}

fn dp_step<F>(f: &F, z: ComplexPoint, k1: ComplexPoint, h: f64) -> Result<Step>
where
    F: Fn(ComplexPoint) -> Result<ComplexPoint>,
{
    let k2 = f(z + (k1 * A21).scale(h))?;
    let k3 = f(z + (k1 * A31 + k2 * A32).scale(h))?;
    let k4 = f(z + (k1 * A41 + k2 * A42 + k3 * A43).scale(h))?;
    let k5 = f(z + (k1 * A51 + k2 * A52 + k3 * A53 + k4 * A54).scale(h))?;
    let k6 = f(z + (k1 * A61 + k2 * A62 + k3 * A63 + k4 * A64 + k5 * A65).scale(h))?;
    let z_new = z + (k1 * B1 + k3 * B3 + k4 * B4 + k5 * B5 + k6 * B6).scale(h);
    let k7 = f(z_new)?;
    let err = (k1 * E1 + k3 * E3 + k4 * E4 + k5 * E5 + k6 * E6 + k7 * E7).scale(h);
    if !(z_new.re.is_finite() && z_new.im.is_finite()) {
        return Err(Error::NonFinite { re: z.re, im: z.im });
    }
    Ok(Step {
        z: z_new,
        k_end: k7,
        err,
    })
}

/// How an integration leg ended.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LegEnd {
    /// The event function changed sign; `z` is just past the zero.
    Event { t: f64, z: ComplexPoint },
    TimeLimit { t: f64, z: ComplexPoint },
    Escape { t: f64, z: ComplexPoint },
    Singular { t: f64, z: ComplexPoint },
}

#[derive(Debug, Clone)]
pub struct Leg {
    /// Accepted step points, starting with the initial point.
    pub samples: Vec<(f64, ComplexPoint)>,
    pub end: LegEnd,
}

/// Integrate `z' = field(z)` from `(t0, z0)` until `t_end`, escape, a
/// singularity, or the first step after which `event` becomes negative.
/// The event function should be nonnegative at the start.
pub fn integrate_field<F, G>(
    field: &F,
    exclusions: &[ComplexPoint],
    event: Option<&G>,
    t0: f64,
    z0: ComplexPoint,
    t_end: f64,
    opts: &IntegratorOptions,
) -> Result<Leg>
where
    F: Fn(ComplexPoint) -> Result<ComplexPoint>,
    G: Fn(ComplexPoint) -> f64,
{
    let near_singular = |z: ComplexPoint, r: f64| exclusions.iter().any(|c| (z - c).norm() < r);
    let mut samples = vec![(t0, z0)];
    let (mut t, mut z) = (t0, z0);
    if near_singular(z, opts.singularity_standoff) {
        return Ok(Leg {
            samples,
            end: LegEnd::Singular { t, z },
        });
    }
    let mut k1 = match field(z) {
        Ok(k) => k,
        Err(_) => {
            return Ok(Leg {
                samples,
                end: LegEnd::Singular { t, z },
            })
        }
    };
    let mut h = (1e-2 * (z.norm() + 1.0) / (k1.norm() + 1e-300)).min(opts.max_step);
    loop {
        if t >= t_end {
            return Ok(Leg {
                samples,
                end: LegEnd::TimeLimit { t, z },
            });
        }
        h = h.min(opts.max_step).min(t_end - t);
        if h < 1e-15 * t.abs().max(1.0) {
            if near_singular(z, 1e-3) {
                return Ok(Leg {
                    samples,
                    end: LegEnd::Singular { t, z },
                });
            }
            // finite-time blow-up: t runs out of resolution before the radius test fires
            if z.norm() > ESCAPE_RADIUS.sqrt() {
                return Ok(Leg {
                    samples,
                    end: LegEnd::Escape { t, z },
                });
            }
            return Err(Error::StepSizeUnderflow(t));
        }
        let step = match dp_step(field, z, k1, h) {
            Ok(s) => s,
            Err(_) => {
                h *= 0.25;
                continue;
            }
        };
        let sx = opts.abs_tol + opts.rel_tol * z.re.abs().max(step.z.re.abs());
        let sy = opts.abs_tol + opts.rel_tol * z.im.abs().max(step.z.im.abs());
        let err = (((step.err.re / sx).powi(2) + (step.err.im / sy).powi(2)) / 2.0).sqrt();
        if err > 1.0 {
            h *= (0.9 * err.powf(-0.2)).max(0.2);
            continue;
        }
        let grow = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };

        if let Some(g) = event {
            if g(step.z) < 0.0 {
                // Re-step from the start of the step with shrinking fractions.
                let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
                let mut z_hi = step.z;
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    let zm = dp_step(field, z, k1, mid * h)?.z;
                    let gm = g(zm);
                    if gm < 0.0 {
                        hi = mid;
                        z_hi = zm;
                    } else {
                        lo = mid;
                    }
                    if gm.abs() <= opts.event_tol && gm < 0.0 {
                        break;
                    }
                    if (hi - lo) * h < 1e-15 {
                        break;
                    }
                }
                let te = t + hi * h;
                if te > t {
                    samples.push((te, z_hi));
                }
                return Ok(Leg {
                    samples,
                    end: LegEnd::Event { t: te, z: z_hi },
                });
            }
        }

        t += h;
        z = step.z;
        k1 = step.k_end;
        samples.push((t, z));
        if z.norm() > ESCAPE_RADIUS {
            return Ok(Leg {
                samples,
                end: LegEnd::Escape { t, z },
            });
        }
        if near_singular(z, opts.singularity_standoff) {
            return Ok(Leg {
                samples,
                end: LegEnd::Singular { t, z },
            });
        }
        h *= grow;
    }
}

fn raw_sliding_speed(sys: &PWSystem, z: ComplexPoint) -> Result<f64> {
    let f1 = sys.plus.eval(z)?;
    let f2 = sys.minus.eval(z)?;
    let (u1, u2) = (sys.line.normal(f1), sys.line.normal(f2));
    let (v1, v2) = (sys.line.tangential(f1), sys.line.tangential(f2));
    if u1 == u2 {
        return Err(Error::DegenerateDenominator(sys.line.param(z)));
    }
    Ok((u1 * v2 - u2 * v1) / (u1 - u2))
}

fn initial_mode(sys: &PWSystem, z: ComplexPoint) -> Result<(Mode, ComplexPoint)> {
    let d = sys.line.signed_distance(z);
    if d.abs() > 1e-12 {
        return Ok((Mode::free(if d > 0.0 { Side::Plus } else { Side::Minus }), z));
    }
    let s = sys.line.param(z);
    let z = sys.line.point(s);
    let u1 = sys.line.normal(sys.plus.eval(z)?);
    let u2 = sys.line.normal(sys.minus.eval(z)?);
    let mode = match classify_point(sys, s)? {
        RegionClass::Sewing => Mode::free(if u1 > 0.0 { Side::Plus } else { Side::Minus }),
        RegionClass::SlidingAttract | RegionClass::SlidingRepel => Mode::Sliding,
        RegionClass::Tangency => {
            if u1.abs() <= CLASSIFY_TOL && u2.abs() <= CLASSIFY_TOL {
                return Err(Error::StartAtDoubleTangency);
            }
            if u2 < -CLASSIFY_TOL {
                Mode::FreeMinus
            } else if u1 >= -CLASSIFY_TOL {
                Mode::FreePlus
            } else {
                Mode::FreeMinus
            }
        }
    };
    Ok((mode, z))
}

/// Filippov orbit of `sys` from `z_init`.
pub fn integrate(sys: &PWSystem, z_init: ComplexPoint, opts: &IntegratorOptions) -> Result<Trajectory> {
    opts.validate()?;
    if !(z_init.re.is_finite() && z_init.im.is_finite()) {
        return Err(Error::InvalidArgument("initial point must be finite".into()));
    }
    let line = sys.line;
    let (mut mode, mut z) = initial_mode(sys, z_init)?;
    let mut t = 0.0;
    let mut samples = vec![Sample { t, z, mode }];
    let mut events = Vec::new();
    let mut stalls = 0;
    let exclusions: Vec<ComplexPoint> = sys
        .plus
        .exclusions()
        .into_iter()
        .chain(sys.minus.exclusions())
        .collect();

    let termination = loop {
        let t_start = t;
        let leg = match mode {
            Mode::FreePlus | Mode::FreeMinus => {
                let side = if mode == Mode::FreePlus { Side::Plus } else { Side::Minus };
                let field = |w: ComplexPoint| sys.field(side).eval(w);
                let g = |w: ComplexPoint| side.sign() * line.signed_distance(w);
                integrate_field(
                    &field,
                    &sys.field(side).exclusions(),
                    Some(&g),
                    t,
                    z,
                    opts.t_max,
                    opts,
                )?
            }
            Mode::Sliding => {
                let attracting = classify_point(sys, line.param(z))? != RegionClass::SlidingRepel;
                let field = |w: ComplexPoint| Ok(line.compose(0.0, raw_sliding_speed(sys, w)?));
                let g = |w: ComplexPoint| {
                    let u1 = sys.plus.eval(w).map(|f| line.normal(f)).unwrap_or(f64::NAN);
                    let u2 = sys.minus.eval(w).map(|f| line.normal(f)).unwrap_or(f64::NAN);
                    let v = if attracting { (-u1).min(u2) } else { u1.min(-u2) };
                    if v.is_nan() {
                        -1.0
                    } else {
                        v
                    }
                };
                integrate_field(&field, &exclusions, Some(&g), t, z, opts.t_max, opts)?
            }
        };
        for &(ts, zs) in leg.samples.iter().skip(1) {
            samples.push(Sample { t: ts, z: zs, mode });
        }
        match leg.end {
            LegEnd::TimeLimit { .. } => break Termination::TimeLimit,
            LegEnd::Escape { t: te, .. } => {
                events.push(Event {
                    t: te,
                    kind: EventKind::Escape,
                });
                break Termination::Escape;
            }
            LegEnd::Singular { t: te, .. } => {
                events.push(Event {
                    t: te,
                    kind: EventKind::SingularityStop,
                });
                break Termination::Singularity;
            }
            LegEnd::Event { t: te, z: ze } => {
                t = te;
                if te - t_start < 1e-12 {
                    stalls += 1;
                } else {
                    stalls = 0;
                }
                if stalls > 3 {
                    events.push(Event {
                        t,
                        kind: EventKind::TangencyHit,
                    });
                    break Termination::TangencyHit;
                }
                let s = line.param(ze);
                z = line.point(s);
                let u1 = line.normal(sys.plus.eval(z)?);
                let u2 = line.normal(sys.minus.eval(z)?);
                let (next, kind) = match mode {
                    Mode::Sliding => {
                        if u1.abs() <= CLASSIFY_TOL && u2.abs() <= CLASSIFY_TOL {
                            events.push(Event {
                                t,
                                kind: EventKind::TangencyHit,
                            });
                            break Termination::TangencyHit;
                        }
                        let side = if u1.abs() <= u2.abs() { Side::Plus } else { Side::Minus };
                        (Mode::free(side), EventKind::SlideExit)
                    }
                    Mode::FreePlus | Mode::FreeMinus => {
                        let side = if mode == Mode::FreePlus { Side::Plus } else { Side::Minus };
                        let (own, other) = match side {
                            Side::Plus => (u1, u2),
                            Side::Minus => (u2, u1),
                        };
                        match classify_point(sys, s)? {
                            RegionClass::Sewing => {
                                (Mode::free(side.opposite()), EventKind::Crossing)
                            }
                            RegionClass::SlidingAttract => (Mode::Sliding, EventKind::SlideEntry),
                            RegionClass::SlidingRepel => {
                                break Termination::RepellingSliding;
                            }
                            RegionClass::Tangency => {
                                if own.abs() <= CLASSIFY_TOL && other.abs() <= CLASSIFY_TOL {
                                    events.push(Event {
                                        t,
                                        kind: EventKind::TangencyHit,
                                    });
                                    break Termination::TangencyHit;
                                } else if own.abs() <= CLASSIFY_TOL {
                                    // Grazing a visible fold: stay on the same side.
                                    (mode, EventKind::Crossing)
                                } else {
                                    (Mode::free(side.opposite()), EventKind::Crossing)
                                }
                            }
                        }
                    }
                };
                if next == mode && kind == EventKind::Crossing {
                    // Graze: no mode change, so no event and no extra sample.
                    if let Some(last) = samples.last_mut() {
                        last.z = z;
                    }
                } else {
                    events.push(Event { t, kind });
                    match samples.last_mut() {
                        Some(last) if last.t == t => {
                            last.z = z;
                            last.mode = next;
                        }
                        _ => samples.push(Sample { t, z, mode: next }),
                    }
                }
                mode = next;
            }
        }
    };
    Ok(Trajectory {
        samples,
        events,
        termination,
    })
}

/// Integrate one field from the line point at `s_start` into its own side
/// until the orbit returns to the line. Returns the landing parameter and
/// the transit time.
pub fn half_return(
    sys: &PWSystem,
    side: Side,
    s_start: f64,
    opts: &IntegratorOptions,
) -> Result<(f64, f64)> {
    let leg = half_return_leg(sys, side, s_start, opts)?;
    match leg.end {
        LegEnd::Event { t, z } => Ok((sys.line.param(z), t)),
        LegEnd::TimeLimit { .. } => Err(Error::NoReturn("time limit reached".into())),
        LegEnd::Escape { .. } => Err(Error::NoReturn("orbit escaped".into())),
        LegEnd::Singular { z, .. } => Err(Error::HitSingularity { re: z.re, im: z.im }),
    }
}

/// Like [`half_return`] but keeps the samples of the arc.
pub fn half_return_leg(
    sys: &PWSystem,
    side: Side,
    s_start: f64,
    opts: &IntegratorOptions,
) -> Result<Leg> {
    opts.validate()?;
    let f = sys.field(side);
    let z0 = sys.line.point(s_start);
    if side.sign() * sys.line.normal(f.eval(z0)?) <= CLASSIFY_TOL {
        return Err(Error::PreconditionViolated(s_start));
    }
    let field = |w: ComplexPoint| f.eval(w);
    let g = |w: ComplexPoint| side.sign() * sys.line.signed_distance(w);
    let mut leg = integrate_field(&field, &f.exclusions(), Some(&g), 0.0, z0, opts.t_max, opts)?;
    if let LegEnd::Event { t, z } = leg.end {
        let z = sys.line.point(sys.line.param(z));
        if let Some(last) = leg.samples.last_mut() {
            last.1 = z;
        }
        leg.end = LegEnd::Event { t, z };
    }
    Ok(leg)
}
