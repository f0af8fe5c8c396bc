//! Smooth regularizations of a piecewise system, their holomorphy defect,
//! the slow-fast reduction, and the fold transition-map experiment.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::complexfield::{cr_residual, ComplexPoint, FieldSpec, PlanarField};
use crate::error::{Error, Result};
use crate::flow::{integrate_field, IntegratorOptions, LegEnd};
use crate::switching::{PWSystem, SwitchingLine};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransitionFunction {
    /// `t(3 - t^2)/2` on `[-1, 1]`, clamped outside.
    #[serde(rename = "poly_st")]
    PolyST,
    /// `15t/8 - 5t^3/4 + 3t^5/8` on `[-1, 1]`, clamped outside.
    #[serde(rename = "quintic_st")]
    QuinticST,
    Tanh,
    /// `2/pi arctan(t)`
    ArctanScaled,
}

impl TransitionFunction {
    pub fn value(self, t: f64) -> f64 {
        match self {
            TransitionFunction::PolyST | TransitionFunction::QuinticST if t >= 1.0 => 1.0,
            TransitionFunction::PolyST | TransitionFunction::QuinticST if t <= -1.0 => -1.0,
            TransitionFunction::PolyST => t * (3.0 - t * t) / 2.0,
            TransitionFunction::QuinticST => {
                let t2 = t * t;
                t * (15.0 / 8.0 + t2 * (-5.0 / 4.0 + t2 * 3.0 / 8.0))
            }
            TransitionFunction::Tanh => t.tanh(),
            TransitionFunction::ArctanScaled => std::f64::consts::FRAC_2_PI * t.atan(),
        }
    }

    pub fn derivative(self, t: f64) -> f64 {
        match self {
            TransitionFunction::PolyST | TransitionFunction::QuinticST if t.abs() >= 1.0 => 0.0,
            TransitionFunction::PolyST => 1.5 * (1.0 - t * t),
            TransitionFunction::QuinticST => {
                let s = 1.0 - t * t;
                15.0 / 8.0 * s * s
            }
            TransitionFunction::Tanh => 1.0 / t.cosh().powi(2),
            TransitionFunction::ArctanScaled => std::f64::consts::FRAC_2_PI / (1.0 + t * t),
        }
    }

    /// Number of derivatives vanishing at `t = +-1` for the compactly
    /// supported kinds; `None` for the analytic ones.
    pub fn smoothness(self) -> Option<u32> {
        match self {
            TransitionFunction::PolyST => Some(1),
            TransitionFunction::QuinticST => Some(2),
            TransitionFunction::Tanh | TransitionFunction::ArctanScaled => None,
        }
    }

    /// `n/(2n - 1)`, the upper bound on the section exponent.
    pub fn lambda_star(self) -> Option<f64> {
        self.smoothness().map(|n| n as f64 / (2.0 * n as f64 - 1.0))
    }

    fn saturates(self) -> bool {
        self.smoothness().is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularizedSystem {
    pub base: PWSystem,
    pub phi: TransitionFunction,
    pub eps: f64,
}

impl RegularizedSystem {
    pub fn new(base: PWSystem, phi: TransitionFunction, eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::InvalidArgument(format!("eps must be positive, got {eps}")));
        }
        base.validate()?;
        Ok(RegularizedSystem { base, phi, eps })
    }

    /// Weight of the plus field at `z`.
    pub fn weight(&self, z: ComplexPoint) -> f64 {
        (1.0 + self.phi.value(self.base.line.signed_distance(z) / self.eps)) / 2.0
    }

    pub fn exclusions(&self) -> Vec<ComplexPoint> {
        let mut v = self.base.plus.exclusions();
        v.extend(self.base.minus.exclusions());
        v
    }

    pub fn to_planar(&self) -> PlanarField {
        let r = self.clone();
        PlanarField::new(
            move |z| {
                let w = reg_field(&r, z)?;
                Ok((w.re, w.im))
            },
            self.exclusions(),
        )
    }
}

/// The blend `w f+ + (1 - w) f-` with `w = (1 + phi(d/eps))/2`, where `d` is
/// the signed distance to the line. Where the weight is exactly 0 or 1 only
/// the active field is evaluated.
pub fn reg_field(r: &RegularizedSystem, z: ComplexPoint) -> Result<ComplexPoint> {
    let w = r.weight(z);
    if w == 1.0 {
        return r.base.plus.eval(z);
    }
    if w == 0.0 {
        return r.base.minus.eval(z);
    }
    let fp = r.base.plus.eval(z)?;
    let fm = r.base.minus.eval(z)?;
    Ok(fp * w + fm * (1.0 - w))
}

/// Axis-aligned sampling box with `nx` by `ny` grid points, corners included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleBox {
    pub lo: ComplexPoint,
    pub hi: ComplexPoint,
    pub nx: usize,
    pub ny: usize,
}

impl SampleBox {
    /// The strip `|d| <= half_width` around the line, for line parameters in
    /// `[s_lo, s_hi]`.
    pub fn strip(line: &SwitchingLine, half_width: f64, s_lo: f64, s_hi: f64, n: usize) -> Self {
        let a = line.point(s_lo) + line.compose(-half_width, 0.0);
        let b = line.point(s_hi) + line.compose(half_width, 0.0);
        SampleBox {
            lo: Complex64::new(a.re.min(b.re), a.im.min(b.im)),
            hi: Complex64::new(a.re.max(b.re), a.im.max(b.im)),
            nx: n,
            ny: n,
        }
    }

    pub fn points(&self) -> Vec<ComplexPoint> {
        let lin = |a: f64, b: f64, k: usize, n: usize| {
            if n <= 1 {
                0.5 * (a + b)
            } else {
                a + (b - a) * k as f64 / (n - 1) as f64
            }
        };
        let mut out = Vec::with_capacity(self.nx * self.ny);
        for j in 0..self.ny {
            for i in 0..self.nx {
                out.push(Complex64::new(
                    lin(self.lo.re, self.hi.re, i, self.nx),
                    lin(self.lo.im, self.hi.im, j, self.ny),
                ));
            }
        }
        out
    }
}

/// Largest Cauchy-Riemann residual of the regularized field over the grid.
/// Grid points whose stencil touches a singularity are skipped.
pub fn holomorphy_defect(r: &RegularizedSystem, grid: &SampleBox) -> f64 {
    let pf = r.to_planar();
    let h = (1e-3 * r.eps).min(1e-4);
    grid.points()
        .par_iter()
        .filter_map(|&z| cr_residual(&pf, z, h).ok())
        .reduce(|| 0.0, f64::max)
}

/// Largest `|f+ - f-|` over `n` points of the line with parameters in `[s_lo, s_hi]`.
pub fn sigma_gap(sys: &PWSystem, s_lo: f64, s_hi: f64, n: usize) -> f64 {
    (0..n)
        .filter_map(|k| {
            let s = s_lo + (s_hi - s_lo) * k as f64 / (n.max(2) - 1) as f64;
            let z = sys.line.point(s);
            Some((sys.plus.eval(z).ok()? - sys.minus.eval(z).ok()?).norm())
        })
        .fold(0.0, f64::max)
}

/// The slow-fast form of a regularization: `x = eps xbar` in the normal
/// direction.
#[derive(Debug, Clone)]
pub struct SlowFast {
    pub base: PWSystem,
    pub phi: TransitionFunction,
}

pub fn slow_fast(r: &RegularizedSystem) -> SlowFast {
    SlowFast {
        base: r.base.clone(),
        phi: r.phi,
    }
}

impl SlowFast {
    fn components(&self, s: f64) -> Result<((f64, f64), (f64, f64))> {
        let z = self.base.line.point(s);
        let line = &self.base.line;
        let p = self.base.plus.eval(z)?;
        let m = self.base.minus.eval(z)?;
        Ok((
            (line.normal(p), line.tangential(p)),
            (line.normal(m), line.tangential(m)),
        ))
    }

    /// The point `xbar` of the critical manifold over line parameter `s`.
    pub fn critical_point(&self, s: f64) -> Result<f64> {
        let ((u1, _), (u2, _)) = self.components(s)?;
        let fast = |xb: f64| {
            let p = self.phi.value(xb);
            (1.0 + p) * u1 + (1.0 - p) * u2
        };
        if u1 == u2 {
            return Err(Error::NoCriticalPoint(s));
        }
        let target = (u1 + u2) / (u2 - u1);
        if !(target.abs() < 1.0) {
            return Err(Error::NoCriticalPoint(s));
        }
        let mut half = 1.0;
        if !self.phi.saturates() {
            while self.phi.value(half) <= target.abs() && half < 1e12 {
                half *= 2.0;
            }
        }
        let bracket = |lo: f64, hi: f64| fast(lo) * fast(hi) <= 0.0;
        let (mut lo, mut hi) = (-half, half);
        if !bracket(lo, hi) {
            let w = 2.0 * half / 32.0;
            let cell = (0..32)
                .map(|k| (-half + w * k as f64, -half + w * (k + 1) as f64))
                .find(|&(a, b)| bracket(a, b))
                .ok_or(Error::NoCriticalPoint(s))?;
            (lo, hi) = cell;
        }
        let flo = fast(lo);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let fm = fast(mid);
            if fm == 0.0 {
                return Ok(mid);
            }
            if (fm > 0.0) == (flo > 0.0) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Slow velocity along the line at the critical point over `s`.
    pub fn reduced_field(&self, s: f64) -> Result<f64> {
        let xb = self.critical_point(s)?;
        let ((_, v1), (_, v2)) = self.components(s)?;
        let p = self.phi.value(xb);
        Ok(((1.0 + p) * v1 + (1.0 - p) * v2) / 2.0)
    }
}

/// Plus fields with a visible fold against the constant field 1, with the
/// line `Re z = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "case", rename_all = "snake_case")]
pub enum TransitionCase {
    /// `(a+ib)(z - z0)` with `b < 0 < x0`.
    Linear { a: f64, b: f64, x0: f64, y0: f64 },
    /// `(z - z0)^2` with `x0 > 0`.
    Power { x0: f64, y0: f64 },
    /// `1/(z - z0)^2` with `x0 < 0`.
    Pole { x0: f64, y0: f64 },
    /// `(z - z0)^2/(1 + z - z0)` with `0 < x0 < 1`.
    Rational { x0: f64, y0: f64 },
}

impl TransitionCase {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            TransitionCase::Linear { b, x0, .. } => b < 0.0 && x0 > 0.0,
            TransitionCase::Power { x0, .. } => x0 > 0.0,
            TransitionCase::Pole { x0, .. } => x0 < 0.0,
            TransitionCase::Rational { x0, .. } => 0.0 < x0 && x0 < 1.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "transition case parameters out of range: {self:?}"
            )))
        }
    }

    pub fn plus_field(&self) -> FieldSpec {
        match *self {
            TransitionCase::Linear { a, b, x0, y0 } => FieldSpec::linear(a, b, Complex64::new(x0, y0)),
            TransitionCase::Power { x0, y0 } => FieldSpec::power(2, Complex64::new(x0, y0), 0),
            TransitionCase::Pole { x0, y0 } => FieldSpec::pole(2, Complex64::new(x0, y0), 0),
            TransitionCase::Rational { x0, y0 } => FieldSpec::rational(1.0, 2, Complex64::new(x0, y0)),
        }
    }

    pub fn system(&self) -> Result<PWSystem> {
        PWSystem::new(
            self.plus_field(),
            FieldSpec::constant(Complex64::new(1.0, 0.0)),
            SwitchingLine::vertical(0.0),
        )
    }

    /// Height of the visible fold on the line.
    pub fn fold(&self) -> f64 {
        match *self {
            TransitionCase::Linear { a, b, x0, y0 } => y0 - a / b * x0,
            TransitionCase::Power { x0, y0 } => y0 - x0,
            TransitionCase::Pole { x0, y0 } => y0 + x0,
            TransitionCase::Rational { x0, y0 } => {
                (-(x0 * x0 - x0.powi(4)).sqrt() + y0 + x0 * y0) / (1.0 + x0)
            }
        }
    }

    /// Curvature coefficient of the fold orbit, `x ~ alpha theta^2/2`.
    pub fn alpha(&self) -> f64 {
        match *self {
            TransitionCase::Linear { a, b, x0, .. } => b * b / ((a * a + b * b) * x0),
            TransitionCase::Power { x0, .. } => 1.0 / x0,
            TransitionCase::Pole { x0, .. } => -1.0 / x0,
            TransitionCase::Rational { x0, .. } => (1.0 + x0).powi(2) / x0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionExperiment {
    #[serde(flatten)]
    pub case: TransitionCase,
    #[serde(default = "default_phi")]
    pub phi: TransitionFunction,
    pub eps: Vec<f64>,
    pub theta: Vec<f64>,
    #[serde(default = "default_rho")]
    pub rho: f64,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
}

fn default_phi() -> TransitionFunction {
    TransitionFunction::QuinticST
}

fn default_rho() -> f64 {
    0.2
}

fn default_lambda() -> f64 {
    0.5
}

impl TransitionExperiment {
    pub fn new(case: TransitionCase, eps: Vec<f64>, theta: Vec<f64>) -> Self {
        TransitionExperiment {
            case,
            phi: default_phi(),
            eps,
            theta,
            rho: default_rho(),
            lambda: default_lambda(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.case.validate()?;
        let bad = |v: &[f64]| v.is_empty() || v.iter().any(|x| !(*x > 0.0 && x.is_finite()));
        if bad(&self.eps) || bad(&self.theta) || !(self.rho > 0.0) {
            return Err(Error::InvalidArgument(
                "eps and theta grids and rho must be positive".into(),
            ));
        }
        match self.phi.lambda_star() {
            Some(ls) if self.lambda > 0.0 && self.lambda < ls => Ok(()),
            Some(ls) => Err(Error::InvalidArgument(format!(
                "lambda must lie in (0, {ls})"
            ))),
            None => Err(Error::InvalidArgument(
                "the transition experiment needs a compactly supported transition function".into(),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransitionRow {
    pub eps: f64,
    pub theta: f64,
    pub x_theta: f64,
    pub fitted_alpha: f64,
    pub predicted_alpha: f64,
    pub rel_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransitionFit {
    pub eps: f64,
    pub fitted_alpha: f64,
    /// Coefficient of the `theta^3` nuisance term.
    pub cubic: f64,
    pub predicted_alpha: f64,
    pub rel_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransitionReport {
    pub rows: Vec<TransitionRow>,
    pub fits: Vec<TransitionFit>,
}

impl TransitionReport {
    pub fn fit_for(&self, eps: f64) -> Option<&TransitionFit> {
        self.fits.iter().find(|f| f.eps == eps)
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["eps", "theta", "x_theta", "fitted_alpha", "predicted_alpha", "rel_error"])?;
        for r in &self.rows {
            w.write_record(&[
                r.eps.to_string(),
                r.theta.to_string(),
                r.x_theta.to_string(),
                r.fitted_alpha.to_string(),
                r.predicted_alpha.to_string(),
                r.rel_error.to_string(),
            ])?;
        }
        w.flush()
    }
}

/// Landing abscissa on `y = fold + theta` of the regularized orbit entering
/// at `(2 eps, fold - rho)`.
pub fn transition_landing(
    case: &TransitionCase,
    phi: TransitionFunction,
    eps: f64,
    rho: f64,
    theta: f64,
    opts: &IntegratorOptions,
) -> Result<f64> {
    let r = RegularizedSystem::new(case.system()?, phi, eps)?;
    let p = case.fold();
    let exit = |z: ComplexPoint| p + theta - z.im;
    let field = |z: ComplexPoint| reg_field(&r, z);
    let leg = integrate_field(
        &field,
        &r.exclusions(),
        Some(&exit),
        0.0,
        Complex64::new(2.0 * eps, p - rho),
        opts.t_max,
        opts,
    )
    .map_err(|e| Error::IntegrationFailure(e.to_string()))?;
    match leg.end {
        LegEnd::Event { z, .. } => Ok(z.re),
        other => Err(Error::IntegrationFailure(format!(
            "orbit from the entry section never reached y = {}: {other:?}",
            p + theta
        ))),
    }
}

/// Least squares for `y = alpha t^2/2 + c t^3`.
fn fit_alpha(theta: &[f64], y: &[f64]) -> (f64, f64) {
    let (mut s11, mut s12, mut s22, mut b1, mut b2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (&t, &v) in theta.iter().zip(y) {
        let (g1, g2) = (t * t / 2.0, t * t * t);
        s11 += g1 * g1;
        s12 += g1 * g2;
        s22 += g2 * g2;
        b1 += g1 * v;
        b2 += g2 * v;
    }
    let det = s11 * s22 - s12 * s12;
    if theta.len() < 2 || det.abs() < 1e-300 {
        return (b1 / s11, 0.0);
    }
    ((b1 * s22 - b2 * s12) / det, (s11 * b2 - s12 * b1) / det)
}

pub fn transition_map_experiment(
    exp: &TransitionExperiment,
    opts: &IntegratorOptions,
) -> Result<TransitionReport> {
    exp.validate()?;
    opts.validate()?;
    let jobs: Vec<(usize, usize)> = (0..exp.eps.len())
        .flat_map(|i| (0..exp.theta.len()).map(move |j| (i, j)))
        .collect();
    let landings = jobs
        .par_iter()
        .map(|&(i, j)| transition_landing(&exp.case, exp.phi, exp.eps[i], exp.rho, exp.theta[j], opts))
        .collect::<Result<Vec<f64>>>()?;
    let predicted = exp.case.alpha();
    let mut rows = Vec::with_capacity(jobs.len());
    let mut fits = Vec::with_capacity(exp.eps.len());
    for (i, &eps) in exp.eps.iter().enumerate() {
        let xs = &landings[i * exp.theta.len()..(i + 1) * exp.theta.len()];
        let shifted: Vec<f64> = xs.iter().map(|x| x - eps).collect();
        let (alpha, cubic) = fit_alpha(&exp.theta, &shifted);
        let rel = ((alpha - predicted) / predicted).abs();
        fits.push(TransitionFit {
            eps,
            fitted_alpha: alpha,
            cubic,
            predicted_alpha: predicted,
            rel_error: rel,
        });
        rows.extend(exp.theta.iter().zip(xs).map(|(&theta, &x)| TransitionRow {
            eps,
            theta,
            x_theta: x,
            fitted_alpha: alpha,
            predicted_alpha: predicted,
            rel_error: rel,
        }));
    }
    Ok(TransitionReport { rows, fits })
}
