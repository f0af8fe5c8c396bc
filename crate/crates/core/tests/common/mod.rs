#![allow(dead_code)]

use num_complex::Complex64;
use pwhs_core::switching::{classify_regions, RegionReport};
use pwhs_core::{FieldSpec, PWSystem, RegionClass, SwitchingLine};

pub const INF: f64 = f64::INFINITY;
pub const LO: f64 = -5.0;
pub const HI: f64 = 5.0;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// One row of a region table, instantiated.
pub struct CaseRow {
    pub name: String,
    pub sys: PWSystem,
    /// Table intervals; reversed or empty ones are dropped before comparing.
    pub expected: Vec<(f64, f64, RegionClass)>,
    /// Tangency points the table lists.
    pub tangencies: Vec<f64>,
}

use RegionClass::{Sewing as W, SlidingAttract as Ss, SlidingRepel as Su, Tangency as T};

fn vertical(plus: FieldSpec, minus: FieldSpec) -> PWSystem {
    PWSystem::new(plus, minus, SwitchingLine::vertical(0.0)).unwrap()
}

fn row(
    name: String,
    sys: PWSystem,
    expected: Vec<(f64, f64, RegionClass)>,
    tangencies: Vec<f64>,
) -> CaseRow {
    CaseRow {
        name,
        sys,
        expected,
        tangencies,
    }
}

/// Constant 1 on the left, `(a+ib)(z - z0)` on the right.
pub fn case1(a: f64, b: f64, x0: f64, y0: f64) -> PWSystem {
    vertical(
        FieldSpec::linear(a, b, c(x0, y0)),
        FieldSpec::constant(c(1.0, 0.0)),
    )
}

/// `(a+ib)(z - z0)` on the left, `(c+id)(z - z0)` on the right.
pub fn case2(a: f64, b: f64, cc: f64, d: f64, x0: f64, y0: f64) -> PWSystem {
    vertical(
        FieldSpec::linear(cc, d, c(x0, y0)),
        FieldSpec::linear(a, b, c(x0, y0)),
    )
}

/// `(a+ib)(z - z0)` on the left, `(z - z0)^2` on the right.
pub fn case3(a: f64, b: f64, x0: f64, y0: f64) -> PWSystem {
    vertical(
        FieldSpec::power(2, c(x0, y0), 0),
        FieldSpec::linear(a, b, c(x0, y0)),
    )
}

/// `(a+ib)(z - z0)` on the left, `1/(z - z0)` on the right.
pub fn case4(a: f64, b: f64, x0: f64, y0: f64) -> PWSystem {
    vertical(
        FieldSpec::pole(1, c(x0, y0), 0),
        FieldSpec::linear(a, b, c(x0, y0)),
    )
}

/// `(a+ib)(z - i y0)` on the left, `(z - i y0)^2/(1 + z - i y0)` on the right.
pub fn case5(a: f64, b: f64, y0: f64) -> PWSystem {
    vertical(
        FieldSpec::rational(1.0, 2, c(0.0, y0)),
        FieldSpec::linear(a, b, c(0.0, y0)),
    )
}

pub fn case_rows() -> Vec<CaseRow> {
    let mut rows = Vec::new();

    // Case 1
    for &(a, x0, ref exp) in &[
        (1.0, 0.0, vec![(-INF, INF, T)]),
        (1.0, 1.0, vec![(-INF, INF, Ss)]),
        (1.0, -1.0, vec![(-INF, INF, W)]),
        (-1.0, 0.0, vec![(-INF, INF, T)]),
        (-1.0, 1.0, vec![(-INF, INF, W)]),
        (-1.0, -1.0, vec![(-INF, INF, Ss)]),
    ] {
        rows.push(row(
            format!("case1 a={a} b=0 x0={x0}"),
            case1(a, 0.0, x0, 0.5),
            exp.clone(),
            vec![],
        ));
    }
    {
        let (a, b, x0, y0) = (1.0, 1.0, 2.0, 2.0);
        let ys = y0 - a / b * x0;
        rows.push(row(
            "case1 b>0".into(),
            case1(a, b, x0, y0),
            vec![(-INF, ys, W), (ys, INF, Ss)],
            vec![ys],
        ));
        let (a, b, x0, y0) = (0.5, -1.0, 1.0, 0.0);
        let ys = y0 - a / b * x0;
        rows.push(row(
            "case1 b<0".into(),
            case1(a, b, x0, y0),
            vec![(ys, INF, W), (-INF, ys, Ss)],
            vec![ys],
        ));
    }

    // Case 2
    let y0 = 0.3;
    rows.push(row(
        "case2 0+0+".into(),
        case2(0.0, 1.0, 0.0, 1.0, 1.0, y0),
        vec![(-INF, INF, W)],
        vec![y0],
    ));
    rows.push(row(
        "case2 0+0-".into(),
        case2(0.0, 1.0, 0.0, -1.0, 0.7, y0),
        vec![(-INF, y0, Ss), (y0, INF, Su)],
        vec![y0],
    ));
    rows.push(row(
        "case2 ++0- x0=0".into(),
        case2(1.0, 1.0, 0.0, -1.0, 0.0, y0),
        vec![(-INF, y0, Ss), (y0, INF, Su)],
        vec![y0],
    ));
    for x0 in [1.0, -1.0] {
        let ys = y0 - 1.0 * x0;
        let exp = if x0 > 0.0 {
            vec![(ys, y0, W), (-INF, ys, Ss), (y0, INF, Su)]
        } else {
            vec![(y0, ys, W), (-INF, y0, Ss), (ys, INF, Su)]
        };
        rows.push(row(
            format!("case2 ++0- x0={x0}"),
            case2(1.0, 1.0, 0.0, -1.0, x0, y0),
            exp,
            vec![y0, ys],
        ));
    }

    // Case 3, with a = 1 and |a/b| < 1
    let (a, y0): (f64, f64) = (1.0, 0.2);
    for (b, x0) in [(2.0, 0.0), (2.0, 1.0), (2.0, -1.0), (-2.0, 0.0), (-2.0, 1.0), (-2.0, -1.0)] {
        let ys = y0 - a / b * x0;
        let (ymin, ymax) = (ys.min(y0 - x0), ys.max(y0 - x0));
        let exp = match (b > 0.0, x0.partial_cmp(&0.0).unwrap()) {
            (true, std::cmp::Ordering::Equal) => vec![(y0, INF, W), (-INF, y0, Ss)],
            (true, std::cmp::Ordering::Greater) => vec![
                (ymin, ymax, W),
                (y0 + x0, INF, W),
                (-INF, ymin, Ss),
                (ymax, y0 + x0, Su),
            ],
            (true, std::cmp::Ordering::Less) => vec![
                (y0 + x0, ymin, W),
                (ymax, INF, W),
                (-INF, y0 + x0, Ss),
                (y0 - x0, ys, Ss),
                (ys, y0 - x0, Su),
            ],
            (false, std::cmp::Ordering::Equal) => vec![(-INF, y0, W), (y0, INF, Ss)],
            (false, std::cmp::Ordering::Greater) => vec![
                (-INF, ymin, W),
                (ymax, y0 + x0, W),
                (ys, y0 - x0, Ss),
                (y0 + x0, INF, Ss),
                (y0 - x0, ys, Su),
            ],
            (false, std::cmp::Ordering::Less) => vec![
                (-INF, y0 + x0, W),
                (ymin, ymax, W),
                (ymax, INF, Ss),
                (y0 + x0, ymin, Su),
            ],
        };
        rows.push(row(
            format!("case3 b={b} x0={x0}"),
            case3(a, b, x0, y0),
            exp,
            vec![],
        ));
    }
    for x0 in [1.0, -1.0] {
        let (lo, hi) = ((y0 + x0).min(y0 - x0), (y0 + x0).max(y0 - x0));
        let exp = if x0 > 0.0 {
            vec![(-INF, lo, W), (hi, INF, W), (lo, hi, Su)]
        } else {
            vec![(lo, hi, W), (-INF, lo, Ss), (hi, INF, Ss)]
        };
        rows.push(row(
            format!("case3 b=0 x0={x0}"),
            case3(a, 0.0, x0, y0),
            exp,
            vec![],
        ));
    }

    // Case 4, with a = 1
    rows.push(row(
        "case4 x0=0".into(),
        case4(a, 1.0, 0.0, y0),
        vec![(-INF, INF, T)],
        vec![],
    ));
    for (b, x0) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
        let ys = y0 - a / b * x0;
        let exp = match (b > 0.0, x0 > 0.0) {
            (true, true) => vec![(ys, INF, W), (-INF, ys, Ss)],
            (true, false) => vec![(-INF, ys, W), (ys, INF, Su)],
            (false, true) => vec![(-INF, ys, W), (ys, INF, Ss)],
            (false, false) => vec![(ys, INF, W), (-INF, ys, Su)],
        };
        rows.push(row(
            format!("case4 b={b} x0={x0}"),
            case4(a, b, x0, y0),
            exp,
            vec![ys],
        ));
    }

    // Case 5
    let y0 = 0.5;
    rows.push(row(
        "case5 b>0".into(),
        case5(1.0, 1.0, y0),
        vec![(y0, INF, W), (-INF, y0, Ss)],
        vec![y0],
    ));
    rows.push(row(
        "case5 b<0".into(),
        case5(1.0, -1.0, y0),
        vec![(-INF, y0, W), (y0, INF, Ss)],
        vec![y0],
    ));
    rows
}

/// Clip to `[lo, hi]`, drop empty intervals, sort and merge equal neighbours.
pub fn normalize(mut segs: Vec<(f64, f64, RegionClass)>, lo: f64, hi: f64) -> Vec<(f64, f64, RegionClass)> {
    segs = segs
        .into_iter()
        .map(|(a, b, k)| (a.max(lo), b.min(hi), k))
        .filter(|(a, b, _)| a < b)
        .collect();
    segs.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut out: Vec<(f64, f64, RegionClass)> = Vec::new();
    for s in segs {
        match out.last_mut() {
            Some(last) if last.2 == s.2 && (last.1 - s.0).abs() < 1e-12 => last.1 = s.1,
            _ => out.push(s),
        }
    }
    out
}

pub fn report_segments(r: &RegionReport) -> Vec<(f64, f64, RegionClass)> {
    normalize(
        r.segments.iter().map(|s| (s.lo, s.hi, s.class)).collect(),
        r.lo,
        r.hi,
    )
}

/// Compare a row against `classify_regions` on `[LO, HI]`.
pub fn check_row(row: &CaseRow, tol: f64) -> Result<(), String> {
    let report = classify_regions(&row.sys, LO, HI, 2000).map_err(|e| format!("{}: {e}", row.name))?;
    let got = report_segments(&report);
    let want = normalize(row.expected.clone(), LO, HI);
    if got.len() != want.len() {
        return Err(format!("{}: expected {want:?}, got {got:?}", row.name));
    }
    for (g, w) in got.iter().zip(&want) {
        if g.2 != w.2 || (g.0 - w.0).abs() > tol || (g.1 - w.1).abs() > tol {
            return Err(format!("{}: expected {want:?}, got {got:?}", row.name));
        }
    }
    for t in &row.tangencies {
        if !report.tangency_points.iter().any(|p| (p - t).abs() <= tol) {
            return Err(format!(
                "{}: tangency {t} missing from {:?}",
                row.name, report.tangency_points
            ));
        }
    }
    Ok(())
}

/// Five-tuple `(a, b, c, d, x0)` instantiating each row of the linear
/// cycle existence tables.
pub fn corollary_instances() -> Vec<[f64; 5]> {
    // For rows whose x0 sign follows a/b + c/d, use unequal magnitudes so the
    // sum is nonzero and pick x0 with its sign.
    let x = |a: f64, b: f64, c: f64, d: f64| (a / b + c / d).signum();
    let mut v = vec![
        [1.0, 1.0, 1.0, 1.0, 1.0],
        [-1.0, 1.0, -1.0, 1.0, -1.0],
        [-1.0, -1.0, -1.0, -1.0, 1.0],
        [1.0, -1.0, 1.0, -1.0, -1.0],
    ];
    for [a, b, c, d] in [
        [1.0, 1.0, -2.0, 1.0],
        [-1.0, 1.0, 2.0, 1.0],
        [-1.0, -1.0, 2.0, -1.0],
        [1.0, -1.0, -2.0, -1.0],
    ] {
        v.push([a, b, c, d, x(a, b, c, d)]);
    }
    v.extend([
        [0.0, 1.0, 1.0, 1.0, 1.0],
        [0.0, 1.0, -1.0, 1.0, -1.0],
        [0.0, -1.0, 1.0, -1.0, -1.0],
        [0.0, -1.0, -1.0, -1.0, 1.0],
        [1.0, 1.0, 0.0, 1.0, 1.0],
        [-1.0, 1.0, 0.0, 1.0, -1.0],
        [-1.0, -1.0, 0.0, -1.0, 1.0],
        [1.0, -1.0, 0.0, -1.0, -1.0],
    ]);
    v
}

/// `(n, m, a, b, d, x0, y0)` for the power-family cycle figures.
pub const ZN_FIGURES: [(&str, u32, u32, f64, f64, f64, f64, f64); 5] = [
    ("fig13", 2, 0, -1.0, 1.0, 1.0, 0.0, 1.0),
    ("fig14", 6, 0, -1.0, 1.0, 0.2, 0.0, 1.0),
    ("fig15", 4, 0, -1.0, -1.0, -0.5, 0.0, 1.0),
    ("fig16", 3, 1, -1.0, -1.0, -0.5, 0.0, 1.0),
    ("fig21", 5, 1, -1.0, 1.0, 0.3, 0.0, 1.0),
];

/// `(n, m, a, b, d, y0)` for the pole-family cycle figures.
pub const POLE_FIGURES: [(&str, u32, u32, f64, f64, f64, f64); 4] = [
    ("fig18", 2, 0, -1.0, -1.0, 0.5, 1.0),
    ("fig19", 4, 0, -1.0, 1.0, -0.2, 1.0),
    ("fig20", 1, 1, -1.0, 1.0, -0.5, 1.0),
    ("fig22", 3, 1, -1.0, -1.0, 0.3, 1.0),
];
