//! Holomorphic fields: normal forms, truncated Laurent series and the
//! essential-singularity example, with exact evaluation, derivatives, local
//! Taylor expansions and Cartesian (u, v) components.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series;

pub type ComplexPoint = Complex64;

/// Distance to a center below which evaluation refuses to proceed.
pub const SINGULAR_GUARD: f64 = 1e-12;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// One holomorphic field. `m` on `Power`/`Pole` selects the premultiplier `i^m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FieldSpec {
    Constant {
        value: ComplexPoint,
    },
    /// `coeff * (z - center)`
    Linear {
        coeff: ComplexPoint,
        center: ComplexPoint,
    },
    /// `i^m (z - center)^n`
    Power {
        n: u32,
        center: ComplexPoint,
        #[serde(default)]
        m: u32,
    },
    /// `i^m / (z - center)^n`
    Pole {
        n: u32,
        center: ComplexPoint,
        #[serde(default)]
        m: u32,
    },
    /// `gamma (z - center)^n / (1 + (z - center)^(n-1))`
    Rational {
        gamma: f64,
        n: u32,
        center: ComplexPoint,
    },
    /// `sum_k analytic[k] (z-c)^k + sum_k principal[k-1] (z-c)^-k`
    Laurent {
        center: ComplexPoint,
        #[serde(default)]
        principal: Vec<ComplexPoint>,
        #[serde(default)]
        analytic: Vec<ComplexPoint>,
    },
    /// `z^m exp(z^-n)`
    EssentialExp { m: u32, n: u32 },
}

impl FieldSpec {
    pub fn constant(value: ComplexPoint) -> Self {
        FieldSpec::Constant { value }
    }

    pub fn linear(a: f64, b: f64, center: ComplexPoint) -> Self {
        FieldSpec::Linear {
            coeff: Complex64::new(a, b),
            center,
        }
    }

    pub fn power(n: u32, center: ComplexPoint, m: u32) -> Self {
        FieldSpec::Power { n, center, m }
    }

    pub fn pole(n: u32, center: ComplexPoint, m: u32) -> Self {
        FieldSpec::Pole { n, center, m }
    }

    pub fn rational(gamma: f64, n: u32, center: ComplexPoint) -> Self {
        FieldSpec::Rational { gamma, n, center }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |z: &ComplexPoint| z.re.is_finite() && z.im.is_finite();
        let bad = |msg: &str| Err(Error::InvalidSpec(msg.to_string()));
        match self {
            FieldSpec::Constant { value } if !finite(value) => bad("constant must be finite"),
            FieldSpec::Linear { coeff, center } if !finite(coeff) || !finite(center) => {
                bad("linear parameters must be finite")
            }
            FieldSpec::Power { n, center, m } => {
                if *n < 2 {
                    bad("power needs n >= 2")
                } else if *m > 1 {
                    bad("premultiplier exponent m must be 0 or 1")
                } else if !finite(center) {
                    bad("center must be finite")
                } else {
                    Ok(())
                }
            }
            FieldSpec::Pole { n, center, m } => {
                if *n < 1 {
                    bad("pole needs n >= 1")
                } else if *m > 1 {
                    bad("premultiplier exponent m must be 0 or 1")
                } else if !finite(center) {
                    bad("center must be finite")
                } else {
                    Ok(())
                }
            }
            FieldSpec::Rational { gamma, n, center } => {
                if *gamma == 0.0 || !gamma.is_finite() {
                    bad("rational needs finite gamma != 0")
                } else if *n < 2 {
                    bad("rational needs n >= 2")
                } else if !finite(center) {
                    bad("center must be finite")
                } else {
                    Ok(())
                }
            }
            FieldSpec::Laurent {
                center,
                principal,
                analytic,
            } => {
                if !finite(center) || !principal.iter().chain(analytic).all(finite) {
                    bad("laurent coefficients must be finite")
                } else if principal.iter().chain(analytic).all(|c| *c == ZERO) {
                    bad("laurent needs a nonzero coefficient")
                } else {
                    Ok(())
                }
            }
            FieldSpec::EssentialExp { m, n } => {
                if *n < 1 || *m < n + 1 {
                    bad("essential example needs n >= 1 and m >= n + 1")
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    /// Points where the field is not defined.
    pub fn exclusions(&self) -> Vec<ComplexPoint> {
        match self {
            FieldSpec::Pole { center, .. } => vec![*center],
            FieldSpec::Laurent {
                center, principal, ..
            } if principal.iter().any(|c| *c != ZERO) => vec![*center],
            FieldSpec::EssentialExp { .. } => vec![ZERO],
            FieldSpec::Rational { n, center, .. } => {
                // (z - c)^(n-1) = -1
                let k = (*n - 1) as usize;
                (0..k)
                    .map(|j| {
                        let th = (2 * j + 1) as f64 * PI / k as f64;
                        center + Complex64::from_polar(1.0, th)
                    })
                    .collect()
            }
            _ => Vec::new(),
        }
    }

    fn premultiplier(m: u32) -> Complex64 {
        if m % 2 == 1 {
            I
        } else {
            Complex64::new(1.0, 0.0)
        }
    }

    fn guard(&self, z: ComplexPoint) -> Result<()> {
        let singular = match self {
            FieldSpec::Rational { n, center, .. } => {
                (1.0 + (z - center).powi(*n as i32 - 1)).norm() < SINGULAR_GUARD
            }
            _ => self
                .exclusions()
                .iter()
                .any(|c| (z - c).norm() < SINGULAR_GUARD),
        };
        if singular {
            Err(Error::EvaluationAtSingularity { re: z.re, im: z.im })
        } else {
            Ok(())
        }
    }

    /// F(z).
    pub fn eval(&self, z: ComplexPoint) -> Result<ComplexPoint> {
        self.guard(z)?;
        let w = match self {
            FieldSpec::Constant { value } => *value,
            FieldSpec::Linear { coeff, center } => coeff * (z - center),
            FieldSpec::Power { n, center, m } => {
                Self::premultiplier(*m) * (z - center).powi(*n as i32)
            }
            FieldSpec::Pole { n, center, m } => {
                Self::premultiplier(*m) * (z - center).powi(-(*n as i32))
            }
            FieldSpec::Rational { gamma, n, center } => {
                let p = z - center;
                *gamma * p.powi(*n as i32) / (1.0 + p.powi(*n as i32 - 1))
            }
            FieldSpec::Laurent {
                center,
                principal,
                analytic,
            } => {
                let p = z - center;
                let mut acc = ZERO;
                for (k, a) in analytic.iter().enumerate() {
                    acc += a * p.powi(k as i32);
                }
                for (k, b) in principal.iter().enumerate() {
                    acc += b * p.powi(-(k as i32 + 1));
                }
                acc
            }
            FieldSpec::EssentialExp { m, n } => z.powi(*m as i32) * z.powi(-(*n as i32)).exp(),
        };
        finite_or_signal(w, z)
    }

    /// F'(z).
    pub fn derivative(&self, z: ComplexPoint) -> Result<ComplexPoint> {
        self.guard(z)?;
        let d = match self {
            FieldSpec::Constant { .. } => ZERO,
            FieldSpec::Linear { coeff, .. } => *coeff,
            FieldSpec::Power { n, center, m } => {
                Self::premultiplier(*m) * (z - center).powi(*n as i32 - 1) * *n as f64
            }
            FieldSpec::Pole { n, center, m } => {
                -Self::premultiplier(*m) * (z - center).powi(-(*n as i32) - 1) * *n as f64
            }
            FieldSpec::Rational { gamma, n, center } => {
                // d/dp [p^n / (1 + p^(n-1))] = (n p^(n-1) + p^(2n-2)) / (1 + p^(n-1))^2
                let p = z - center;
                let n = *n as i32;
                let q = p.powi(n - 1);
                *gamma * (q * n as f64 + q * q) / ((1.0 + q) * (1.0 + q))
            }
            FieldSpec::Laurent {
                center,
                principal,
                analytic,
            } => {
                let p = z - center;
                let mut acc = ZERO;
                for (k, a) in analytic.iter().enumerate().skip(1) {
                    acc += a * p.powi(k as i32 - 1) * k as f64;
                }
                for (k, b) in principal.iter().enumerate() {
                    let k = k as i32 + 1;
                    acc -= b * p.powi(-k - 1) * k as f64;
                }
                acc
            }
            FieldSpec::EssentialExp { m, n } => {
                let (m, n) = (*m as i32, *n as i32);
                let e = z.powi(-n).exp();
                e * (z.powi(m - 1) * m as f64 - z.powi(m - n - 1) * n as f64)
            }
        };
        finite_or_signal(d, z)
    }

    /// Coefficients of `F(q + w)` in powers of `w`, up to `w^order`.
    pub fn taylor(&self, q: ComplexPoint, order: usize) -> Result<Vec<ComplexPoint>> {
        self.guard(q)?;
        let mut out = series::zeros(order + 1);
        match self {
            FieldSpec::Constant { value } => out[0] = *value,
            FieldSpec::Linear { coeff, center } => {
                out[0] = coeff * (q - center);
                if order >= 1 {
                    out[1] = *coeff;
                }
            }
            FieldSpec::Power { n, center, m } => {
                let s = series::shifted_power(q - center, *n as i64, order);
                series::add_scaled(&mut out, &s, Self::premultiplier(*m));
            }
            FieldSpec::Pole { n, center, m } => {
                let s = series::shifted_power(q - center, -(*n as i64), order);
                series::add_scaled(&mut out, &s, Self::premultiplier(*m));
            }
            FieldSpec::Rational { gamma, n, center } => {
                let p = q - center;
                let num = series::shifted_power(p, *n as i64, order);
                let mut den = series::shifted_power(p, *n as i64 - 1, order);
                den[0] += 1.0;
                let s = series::div(&num, &den, order);
                series::add_scaled(&mut out, &s, Complex64::new(*gamma, 0.0));
            }
            FieldSpec::Laurent {
                center,
                principal,
                analytic,
            } => {
                let p = q - center;
                for (k, a) in analytic.iter().enumerate() {
                    series::add_scaled(&mut out, &series::shifted_power(p, k as i64, order), *a);
                }
                for (k, b) in principal.iter().enumerate() {
                    let s = series::shifted_power(p, -(k as i64 + 1), order);
                    series::add_scaled(&mut out, &s, *b);
                }
            }
            FieldSpec::EssentialExp { m, n } => {
                let inner = series::shifted_power(q, -(*n as i64), order);
                let e = series::exp(&inner, order);
                let zm = series::shifted_power(q, *m as i64, order);
                out = series::mul(&zm, &e, order);
            }
        }
        for c in &out {
            finite_or_signal(*c, q)?;
        }
        Ok(out)
    }

    /// Cartesian components computed from real binomial expansions, independent
    /// of the complex-arithmetic path used by [`FieldSpec::eval`].
    pub fn to_planar(&self) -> PlanarField {
        let spec = self.clone();
        let exclusions = self.exclusions();
        PlanarField::new(
            move |z| {
                spec.guard(z)?;
                let uv = planar_components(&spec, z.re, z.im);
                if uv.0.is_finite() && uv.1.is_finite() {
                    Ok(uv)
                } else {
                    Err(Error::NonFinite { re: z.re, im: z.im })
                }
            },
            exclusions,
        )
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = |z: &ComplexPoint| format!("({}{:+}i)", z.re, z.im);
        let im = |m: &u32| if *m % 2 == 1 { "i*" } else { "" };
        match self {
            FieldSpec::Constant { value } => write!(f, "{}", c(value)),
            FieldSpec::Linear { coeff, center } => write!(f, "{}(z-{})", c(coeff), c(center)),
            FieldSpec::Power { n, center, m } => write!(f, "{}(z-{})^{}", im(m), c(center), n),
            FieldSpec::Pole { n, center, m } => write!(f, "{}(z-{})^-{}", im(m), c(center), n),
            FieldSpec::Rational { gamma, n, center } => write!(
                f,
                "{}(z-{})^{}/(1+(z-{})^{})",
                gamma,
                c(center),
                n,
                c(center),
                n - 1
            ),
            FieldSpec::Laurent {
                center,
                principal,
                analytic,
            } => write!(
                f,
                "laurent(center={}, {} principal, {} analytic)",
                c(center),
                principal.len(),
                analytic.len()
            ),
            FieldSpec::EssentialExp { m, n } => write!(f, "z^{} exp(z^-{})", m, n),
        }
    }
}

fn finite_or_signal(w: ComplexPoint, z: ComplexPoint) -> Result<ComplexPoint> {
    if w.re.is_finite() && w.im.is_finite() {
        Ok(w)
    } else {
        Err(Error::NonFinite { re: z.re, im: z.im })
    }
}

/// `(p_k, q_k)` with `(x + iy)^k = p_k + i q_k`, by the binomial sums.
pub fn pq(k: u32, x: f64, y: f64) -> (f64, f64) {
    let mut p = 0.0;
    let mut q = 0.0;
    for j in 0..=k {
        let term = series::binom(k as i64, j as usize) * x.powi((k - j) as i32) * y.powi(j as i32);
        match j % 4 {
            0 => p += term,
            1 => q += term,
            2 => p -= term,
            _ => q -= term,
        }
    }
    (p, q)
}

// u + iv of B (X + iY)^-k for B = c + id.
fn pole_term(c: f64, d: f64, k: u32, x: f64, y: f64) -> (f64, f64) {
    let (p, q) = pq(k, x, y);
    let r = (x * x + y * y).powi(k as i32);
    ((c * p + d * q) / r, (d * p - c * q) / r)
}

fn planar_components(spec: &FieldSpec, x: f64, y: f64) -> (f64, f64) {
    match spec {
        FieldSpec::Constant { value } => (value.re, value.im),
        FieldSpec::Linear { coeff, center } => {
            let (xx, yy) = (x - center.re, y - center.im);
            (coeff.re * xx - coeff.im * yy, coeff.im * xx + coeff.re * yy)
        }
        FieldSpec::Power { n, center, m } => {
            let (p, q) = pq(*n, x - center.re, y - center.im);
            if *m % 2 == 1 {
                (-q, p)
            } else {
                (p, q)
            }
        }
        FieldSpec::Pole { n, center, m } => {
            let (c, d) = if *m % 2 == 1 { (0.0, 1.0) } else { (1.0, 0.0) };
            pole_term(c, d, *n, x - center.re, y - center.im)
        }
        FieldSpec::Rational { gamma, n, center } => {
            let (xx, yy) = (x - center.re, y - center.im);
            let (np, nq) = pq(*n, xx, yy);
            let (dp, dq) = pq(*n - 1, xx, yy);
            let dp = dp + 1.0;
            let den = dp * dp + dq * dq;
            (
                gamma * (np * dp + nq * dq) / den,
                gamma * (nq * dp - np * dq) / den,
            )
        }
        FieldSpec::Laurent {
            center,
            principal,
            analytic,
        } => {
            let (xx, yy) = (x - center.re, y - center.im);
            let (mut u, mut v) = (0.0, 0.0);
            for (k, a) in analytic.iter().enumerate() {
                let (p, q) = pq(k as u32, xx, yy);
                u += a.re * p - a.im * q;
                v += a.im * p + a.re * q;
            }
            for (k, b) in principal.iter().enumerate() {
                let (pu, pv) = pole_term(b.re, b.im, k as u32 + 1, xx, yy);
                u += pu;
                v += pv;
            }
            (u, v)
        }
        FieldSpec::EssentialExp { m, n } => {
            let (pm, qm) = pq(*m, x, y);
            let (pn, qn) = pq(*n, x, y);
            let r = (x * x + y * y).powi(*n as i32);
            let g = (pn / r).exp();
            let (s, c) = (qn / r).sin_cos();
            (g * (pm * c + qm * s), g * (qm * c - pm * s))
        }
    }
}

type PlanarFn = dyn Fn(ComplexPoint) -> Result<(f64, f64)> + Send + Sync;

/// A planar vector field `(u, v)` with its domain-exclusion set. Not required
/// to be holomorphic.
#[derive(Clone)]
pub struct PlanarField {
    f: Arc<PlanarFn>,
    exclusions: Vec<ComplexPoint>,
}

impl fmt::Debug for PlanarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PlanarField")
            .field("exclusions", &self.exclusions)
            .finish_non_exhaustive()
    }
}

impl PlanarField {
    pub fn new<F>(f: F, exclusions: Vec<ComplexPoint>) -> Self
    where
        F: Fn(ComplexPoint) -> Result<(f64, f64)> + Send + Sync + 'static,
    {
        PlanarField {
            f: Arc::new(f),
            exclusions,
        }
    }

    pub fn eval(&self, z: ComplexPoint) -> Result<(f64, f64)> {
        (self.f)(z)
    }

    pub fn u(&self, z: ComplexPoint) -> Result<f64> {
        Ok(self.eval(z)?.0)
    }

    pub fn v(&self, z: ComplexPoint) -> Result<f64> {
        Ok(self.eval(z)?.1)
    }

    pub fn exclusions(&self) -> &[ComplexPoint] {
        &self.exclusions
    }
}

pub fn eval(f: &FieldSpec, z: ComplexPoint) -> Result<ComplexPoint> {
    f.eval(z)
}

pub fn eval_derivative(f: &FieldSpec, z: ComplexPoint) -> Result<ComplexPoint> {
    f.derivative(z)
}

pub fn to_planar(f: &FieldSpec) -> PlanarField {
    f.to_planar()
}

/// `max(|u_x - v_y|, |u_y + v_x|)` by central differences of step `h`.
pub fn cr_residual(pf: &PlanarField, z: ComplexPoint, h: f64) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::InvalidArgument("cr_residual needs h > 0".into()));
    }
    if pf
        .exclusions()
        .iter()
        .any(|c| (c.re - z.re).abs() <= h && (c.im - z.im).abs() <= h)
    {
        return Err(Error::StencilHitsSingularity);
    }
    let at = |dz: ComplexPoint| pf.eval(z + dz).map_err(|_| Error::StencilHitsSingularity);
    let (ue, ve) = at(Complex64::new(h, 0.0))?;
    let (uw, vw) = at(Complex64::new(-h, 0.0))?;
    let (un, vn) = at(Complex64::new(0.0, h))?;
    let (us, vs) = at(Complex64::new(0.0, -h))?;
    let (ux, vx) = ((ue - uw) / (2.0 * h), (ve - vw) / (2.0 * h));
    let (uy, vy) = ((un - us) / (2.0 * h), (vn - vs) / (2.0 * h));
    Ok((ux - vy).abs().max((uy + vx).abs()))
}
