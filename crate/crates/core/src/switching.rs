//! The switching line, Filippov region classification, the sliding field and
//! tangential singularities.

use std::fmt;
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::complexfield::{ComplexPoint, FieldSpec, SINGULAR_GUARD};
use crate::error::{Error, Result};
use crate::series;

/// Dead zone for sign decisions on normal components.
pub const CLASSIFY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    /// `Re z = offset`, normal direction +x, parameter y.
    Vertical,
    /// `Im z = offset`, normal direction +y, parameter x.
    Horizontal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwitchingLine {
    pub orientation: Orientation,
    #[serde(default)]
    pub offset: f64,
}

impl SwitchingLine {
    pub fn vertical(offset: f64) -> Self {
        SwitchingLine {
            orientation: Orientation::Vertical,
            offset,
        }
    }

    pub fn horizontal(offset: f64) -> Self {
        SwitchingLine {
            orientation: Orientation::Horizontal,
            offset,
        }
    }

    /// Point of the line at parameter `s`.
    pub fn point(&self, s: f64) -> ComplexPoint {
        match self.orientation {
            Orientation::Vertical => Complex64::new(self.offset, s),
            Orientation::Horizontal => Complex64::new(s, self.offset),
        }
    }

    /// Line parameter of the orthogonal projection of `z`.
    pub fn param(&self, z: ComplexPoint) -> f64 {
        self.tangential(z)
    }

    /// Signed distance from the line, positive on the plus side.
    pub fn signed_distance(&self, z: ComplexPoint) -> f64 {
        self.normal(z) - self.offset
    }

    /// Normal component of a vector.
    pub fn normal(&self, w: ComplexPoint) -> f64 {
        match self.orientation {
            Orientation::Vertical => w.re,
            Orientation::Horizontal => w.im,
        }
    }

    /// Tangential component of a vector, along increasing parameter.
    pub fn tangential(&self, w: ComplexPoint) -> f64 {
        match self.orientation {
            Orientation::Vertical => w.im,
            Orientation::Horizontal => w.re,
        }
    }

    /// Vector with the given normal and tangential components.
    pub fn compose(&self, normal: f64, tangential: f64) -> ComplexPoint {
        match self.orientation {
            Orientation::Vertical => Complex64::new(normal, tangential),
            Orientation::Horizontal => Complex64::new(tangential, normal),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.offset.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidSpec("switching line offset must be finite".into()))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Plus,
    Minus,
}

impl Side {
    pub fn sign(self) -> f64 {
        match self {
            Side::Plus => 1.0,
            Side::Minus => -1.0,
        }
    }

    pub fn opposite(self) -> Side {
        match self {
            Side::Plus => Side::Minus,
            Side::Minus => Side::Plus,
        }
    }
}

/// Two holomorphic fields glued along a switching line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PWSystem {
    pub plus: FieldSpec,
    pub minus: FieldSpec,
    pub line: SwitchingLine,
}

impl PWSystem {
    pub fn new(plus: FieldSpec, minus: FieldSpec, line: SwitchingLine) -> Result<Self> {
        let sys = PWSystem { plus, minus, line };
        sys.validate()?;
        Ok(sys)
    }

    pub fn validate(&self) -> Result<()> {
        self.plus.validate()?;
        self.minus.validate()?;
        self.line.validate()
    }

    pub fn field(&self, side: Side) -> &FieldSpec {
        match side {
            Side::Plus => &self.plus,
            Side::Minus => &self.minus,
        }
    }

    /// Exclusion points of either field lying on the line.
    pub fn singular_params(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self
            .plus
            .exclusions()
            .into_iter()
            .chain(self.minus.exclusions())
            .filter(|z| self.line.signed_distance(*z).abs() < SINGULAR_GUARD)
            .map(|z| self.line.param(z))
            .collect();
        out.sort_by(f64::total_cmp);
        out.dedup_by(|a, b| (*a - *b).abs() < SINGULAR_GUARD);
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionClass {
    Sewing,
    SlidingAttract,
    SlidingRepel,
    Tangency,
}

impl RegionClass {
    pub fn tag(self) -> &'static str {
        match self {
            RegionClass::Sewing => "sewing",
            RegionClass::SlidingAttract => "sliding_attract",
            RegionClass::SlidingRepel => "sliding_repel",
            RegionClass::Tangency => "tangency",
        }
    }
}

impl fmt::Display for RegionClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// Normal components `(plus, minus)` of the two fields at parameter `s`.
pub fn normal_components(sys: &PWSystem, s: f64) -> Result<(f64, f64)> {
    let p = sys.line.point(s);
    Ok((
        sys.line.normal(sys.plus.eval(p)?),
        sys.line.normal(sys.minus.eval(p)?),
    ))
}

fn class_of(plus: f64, minus: f64) -> RegionClass {
    if plus.abs() <= CLASSIFY_TOL || minus.abs() <= CLASSIFY_TOL {
        RegionClass::Tangency
    } else if plus * minus > 0.0 {
        RegionClass::Sewing
    } else if plus < 0.0 {
        RegionClass::SlidingAttract
    } else {
        RegionClass::SlidingRepel
    }
}

pub fn classify_point(sys: &PWSystem, s: f64) -> Result<RegionClass> {
    let (p, m) = normal_components(sys, s)?;
    Ok(class_of(p, m))
}

/// Tangential speed of the Filippov sliding field at `s`.
pub fn sliding_speed(sys: &PWSystem, s: f64) -> Result<f64> {
    let p = sys.line.point(s);
    let f1 = sys.plus.eval(p)?;
    let f2 = sys.minus.eval(p)?;
    let (u1, u2) = (sys.line.normal(f1), sys.line.normal(f2));
    let (v1, v2) = (sys.line.tangential(f1), sys.line.tangential(f2));
    match class_of(u1, u2) {
        RegionClass::SlidingAttract | RegionClass::SlidingRepel => {}
        _ => return Err(Error::NotInSlidingRegion(s)),
    }
    if (u1 - u2).abs() < CLASSIFY_TOL {
        return Err(Error::DegenerateDenominator(s));
    }
    Ok((u1 * v2 - u2 * v1) / (u1 - u2))
}

/// Filippov sliding vector at `s`, tangent to the line.
pub fn sliding_field(sys: &PWSystem, s: f64) -> Result<ComplexPoint> {
    Ok(sys.line.compose(0.0, sliding_speed(sys, s)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Segment {
    pub lo: f64,
    pub hi: f64,
    pub class: RegionClass,
}

/// Partition of a parameter interval of the line.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionReport {
    pub line: SwitchingLine,
    pub lo: f64,
    pub hi: f64,
    pub segments: Vec<Segment>,
    pub tangency_points: Vec<f64>,
    pub singular_points: Vec<f64>,
}

impl RegionReport {
    pub fn class_at(&self, s: f64) -> Option<RegionClass> {
        self.segments
            .iter()
            .find(|g| g.lo < s && s < g.hi)
            .map(|g| g.class)
    }

    /// Rows `lo,hi,class`; tangency and singular points appear as degenerate
    /// intervals tagged `tangency_point` / `singular_point`.
    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["lo", "hi", "class"])?;
        for g in &self.segments {
            w.write_record([g.lo.to_string(), g.hi.to_string(), g.class.tag().to_string()])?;
        }
        for t in &self.tangency_points {
            w.write_record([t.to_string(), t.to_string(), "tangency_point".to_string()])?;
        }
        for t in &self.singular_points {
            w.write_record([t.to_string(), t.to_string(), "singular_point".to_string()])?;
        }
        w.flush()
    }
}

fn bisect_root<F: Fn(f64) -> Result<f64>>(g: &F, mut a: f64, mut b: f64) -> Result<f64> {
    let mut ga = g(a)?;
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let gm = g(m)?;
        if gm == 0.0 {
            return Ok(m);
        }
        if (gm > 0.0) == (ga > 0.0) {
            a = m;
            ga = gm;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

fn dedup_sorted(v: &mut Vec<f64>, tol: f64) {
    v.sort_by(f64::total_cmp);
    v.dedup_by(|a, b| (*a - *b).abs() <= tol);
}

// Zeros of one component on [a, b] from samples. Returns None if the
// component vanishes identically there.
fn component_roots<F: Fn(f64) -> Result<f64>>(
    g: &F,
    a: f64,
    b: f64,
    n: usize,
) -> Result<Option<Vec<f64>>> {
    let xs: Vec<f64> = (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect();
    let ys = xs.iter().map(|&x| g(x)).collect::<Result<Vec<_>>>()?;
    if ys.iter().all(|y| y.abs() <= CLASSIFY_TOL) {
        return Ok(None);
    }
    let scale = (b - a).abs().max(1.0);
    let dg = |x: f64| -> Result<f64> {
        let h = 1e-6 * scale;
        Ok((g(x + h)? - g(x - h)?) / (2.0 * h))
    };
    let mut roots = Vec::new();
    for i in 0..n {
        let (y0, y1) = (ys[i], ys[i + 1]);
        if y0 == 0.0 {
            roots.push(xs[i]);
        } else if y0 * y1 < 0.0 {
            roots.push(bisect_root(g, xs[i], xs[i + 1])?);
        }
    }
    if ys[n] == 0.0 {
        roots.push(xs[n]);
    }
    // Even-order zeros show up as local minima of |g| without a sign change.
    for i in 1..n {
        let (l, c, r) = (ys[i - 1], ys[i], ys[i + 1]);
        if c != 0.0 && l * c > 0.0 && c * r > 0.0 && c.abs() < l.abs() && c.abs() <= r.abs() {
            let (dl, dr) = (dg(xs[i - 1])?, dg(xs[i + 1])?);
            if dl * dr < 0.0 {
                let x = bisect_root(&dg, xs[i - 1], xs[i + 1])?;
                if g(x)?.abs() <= CLASSIFY_TOL {
                    roots.push(x);
                }
            }
        }
    }
    dedup_sorted(&mut roots, 1e-10 * scale);
    Ok(Some(roots))
}

/// Partition `[lo, hi]` into sewing, sliding and tangency segments.
pub fn classify_regions(sys: &PWSystem, lo: f64, hi: f64, resolution: usize) -> Result<RegionReport> {
    if !(lo < hi) || resolution < 2 {
        return Err(Error::InvalidArgument(
            "classify_regions needs lo < hi and resolution >= 2".into(),
        ));
    }
    let singular: Vec<f64> = sys
        .singular_params()
        .into_iter()
        .filter(|s| *s > lo && *s < hi)
        .collect();
    let mut cuts = vec![lo];
    cuts.extend(&singular);
    cuts.push(hi);

    let mut segments: Vec<Segment> = Vec::new();
    let mut tangency_points = Vec::new();
    for w in cuts.windows(2) {
        let (mut a, mut b) = (w[0], w[1]);
        let pad = 1e-9 * (b - a).abs().max(1.0);
        if singular.contains(&a) {
            a += pad;
        }
        if singular.contains(&b) {
            b -= pad;
        }
        let n = ((resolution as f64 * (b - a) / (hi - lo)).ceil() as usize).max(16);
        let plus = |s: f64| Ok(sys.line.normal(sys.plus.eval(sys.line.point(s))?));
        let minus = |s: f64| Ok(sys.line.normal(sys.minus.eval(sys.line.point(s))?));
        let rp = component_roots(&plus, a, b, n)?;
        let rm = component_roots(&minus, a, b, n)?;
        let (lo_s, hi_s) = (w[0], w[1]);
        match (rp, rm) {
            (Some(rp), Some(rm)) => {
                let mut bounds: Vec<f64> = rp.into_iter().chain(rm).collect();
                dedup_sorted(&mut bounds, 1e-10 * (b - a).abs().max(1.0));
                let interior: Vec<f64> = bounds
                    .iter()
                    .copied()
                    .filter(|x| *x > lo_s && *x < hi_s)
                    .collect();
                tangency_points.extend(bounds.iter().copied().filter(|x| *x >= lo && *x <= hi));
                let mut edges = vec![lo_s];
                edges.extend(&interior);
                edges.push(hi_s);
                for e in edges.windows(2) {
                    if e[1] - e[0] <= 0.0 {
                        continue;
                    }
                    let mid = 0.5 * (e[0] + e[1]);
                    segments.push(Segment {
                        lo: e[0],
                        hi: e[1],
                        class: classify_point(sys, mid)?,
                    });
                }
            }
            (rp, rm) => {
                tangency_points.extend(rp.into_iter().chain(rm).flatten());
                segments.push(Segment {
                    lo: lo_s,
                    hi: hi_s,
                    class: RegionClass::Tangency,
                });
            }
        }
    }
    dedup_sorted(&mut tangency_points, 1e-10);

    // Merge equal neighbours unless a tangency or singular point separates them.
    let mut merged: Vec<Segment> = Vec::new();
    for g in segments {
        if let Some(last) = merged.last_mut() {
            let sep = tangency_points
                .iter()
                .chain(&singular)
                .any(|t| (*t - g.lo).abs() <= 1e-10);
            if last.class == g.class && !sep {
                last.hi = g.hi;
                continue;
            }
        }
        merged.push(g);
    }
    Ok(RegionReport {
        line: sys.line,
        lo,
        hi,
        segments: merged,
        tangency_points,
        singular_points: singular,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Visibility {
    Visible,
    Invisible,
    NotApplicable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Contact {
    /// Nonzero normal component: the orbit crosses transversally.
    Regular,
    Order { k: usize, visibility: Visibility },
}

impl Contact {
    pub fn order(&self) -> Option<usize> {
        match self {
            Contact::Regular => None,
            Contact::Order { k, .. } => Some(*k),
        }
    }
}

/// Contact order between the orbit of `f` through the line point at `s` and
/// the line. `side` fixes the visibility convention.
pub fn contact_multiplicity(
    f: &FieldSpec,
    line: &SwitchingLine,
    side: Side,
    s: f64,
    k_max: usize,
) -> Result<Contact> {
    if k_max < 2 {
        return Err(Error::InvalidArgument("k_max must be at least 2".into()));
    }
    let q = line.point(s);
    let local = f.taylor(q, k_max)?;
    if local[0].norm() == 0.0 {
        return Err(Error::EquilibriumOnLine);
    }
    let flow = series::flow_series(&local, k_max);
    if line.normal(flow[1]).abs() > CLASSIFY_TOL {
        return Ok(Contact::Regular);
    }
    let mut scale: f64 = flow[1].norm();
    for (k, a) in flow.iter().enumerate().skip(2) {
        scale = scale.max(a.norm());
        let h = line.normal(*a);
        if h.abs() > CLASSIFY_TOL * scale {
            let visibility = if k % 2 == 1 {
                Visibility::NotApplicable
            } else if (h > 0.0) == (side == Side::Plus) {
                Visibility::Visible
            } else {
                Visibility::Invisible
            };
            return Ok(Contact::Order { k, visibility });
        }
    }
    Err(Error::MultiplicityExceedsKMax(k_max))
}

/// Fold test: zero normal component, nonzero tangential component and
/// `Im F'(q) != 0`.
pub fn fold_predicate(f: &FieldSpec, line: &SwitchingLine, s: f64) -> Result<bool> {
    let q = line.point(s);
    let w = f.eval(q)?;
    let d = f.derivative(q)?;
    Ok(line.normal(w).abs() < CLASSIFY_TOL
        && line.tangential(w).abs() > CLASSIFY_TOL
        && d.im.abs() > CLASSIFY_TOL)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TangencySide {
    Plus,
    Minus,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Pairing {
    RegularFold,
    RegularHigherOrder,
    VisibleVisible,
    InvisibleInvisible,
    VisibleInvisible,
    InvisibleVisible,
    /// Two-sided contact with different or odd orders.
    Unpaired,
}

impl Pairing {
    pub fn label(self) -> &'static str {
        match self {
            Pairing::RegularFold => "regular-fold",
            Pairing::RegularHigherOrder => "regular-higher-order",
            Pairing::VisibleVisible => "visible-visible",
            Pairing::InvisibleInvisible => "invisible-invisible",
            Pairing::VisibleInvisible => "visible-invisible",
            Pairing::InvisibleVisible => "invisible-visible",
            Pairing::Unpaired => "unpaired",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TangencyReport {
    pub point: ComplexPoint,
    pub side: TangencySide,
    pub plus: Contact,
    pub minus: Contact,
    pub pairing: Pairing,
}

pub const DEFAULT_K_MAX: usize = 12;

pub fn classify_tangency(sys: &PWSystem, s: f64) -> Result<TangencyReport> {
    if classify_point(sys, s)? != RegionClass::Tangency {
        return Err(Error::NotATangency(s));
    }
    let plus = contact_multiplicity(&sys.plus, &sys.line, Side::Plus, s, DEFAULT_K_MAX)?;
    let minus = contact_multiplicity(&sys.minus, &sys.line, Side::Minus, s, DEFAULT_K_MAX)?;
    use Contact::{Order, Regular};
    use Visibility::{Invisible, Visible};
    let (side, pairing) = match (plus, minus) {
        (Order { k, .. }, Regular) => (
            TangencySide::Plus,
            if k == 2 {
                Pairing::RegularFold
            } else {
                Pairing::RegularHigherOrder
            },
        ),
        (Regular, Order { k, .. }) => (
            TangencySide::Minus,
            if k == 2 {
                Pairing::RegularFold
            } else {
                Pairing::RegularHigherOrder
            },
        ),
        (
            Order {
                k: kp,
                visibility: vp,
            },
            Order {
                k: km,
                visibility: vm,
            },
        ) => {
            let pairing = if kp != km || kp % 2 == 1 {
                Pairing::Unpaired
            } else {
                match (vp, vm) {
                    (Visible, Visible) => Pairing::VisibleVisible,
                    (Invisible, Invisible) => Pairing::InvisibleInvisible,
                    (Visible, Invisible) => Pairing::InvisibleVisible,
                    (Invisible, Visible) => Pairing::VisibleInvisible,
                    _ => Pairing::Unpaired,
                }
            };
            (TangencySide::Both, pairing)
        }
        (Regular, Regular) => return Err(Error::NotATangency(s)),
    };
    Ok(TangencyReport {
        point: sys.line.point(s),
        side,
        plus,
        minus,
        pairing,
    })
}
