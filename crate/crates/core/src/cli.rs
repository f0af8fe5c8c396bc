//! Scenario files and the `pwhs` command-line front end.
//!
//! A scenario is a TOML document. The `[system]` table holds the two fields
//! and the line; one table per task holds that task's parameters; `[output]`
//! and `[options]` are optional. See the README for the full grammar.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Deserialize;

use crate::complexfield::ComplexPoint;
use crate::cycles::{self, HomoclinicFamily, HomoclinicResult, PoincareResult};
use crate::error::Error;
use crate::flow::{integrate, IntegratorOptions, Mode, Sample, Termination, Trajectory};
use crate::regularize::{transition_map_experiment, TransitionExperiment};
use crate::switching::{classify_regions, PWSystem, RegionClass, RegionReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Classify,
    Portrait,
    Cycle,
    Homoclinic,
    Regularize,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Classify => "classify",
            Task::Portrait => "portrait",
            Task::Cycle => "cycle",
            Task::Homoclinic => "homoclinic",
            Task::Regularize => "regularize",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Svg,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub task: Option<Task>,
    pub system: Option<PWSystem>,
    pub classify: Option<ClassifySpec>,
    pub portrait: Option<PortraitSpec>,
    pub cycle: Option<CycleSpec>,
    pub homoclinic: Option<HomoclinicSpec>,
    pub regularize: Option<TransitionExperiment>,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default)]
    pub options: IntegratorOptions,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifySpec {
    pub lo: f64,
    pub hi: f64,
    #[serde(default = "default_resolution")]
    pub resolution: usize,
}

fn default_resolution() -> usize {
    2000
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PortraitSpec {
    /// Initial points as `[x, y]` pairs.
    pub starts: Vec<[f64; 2]>,
    pub t_max: Option<f64>,
    /// Line parameter range for the region overlay.
    pub lo: Option<f64>,
    pub hi: Option<f64>,
    #[serde(default = "default_resolution")]
    pub resolution: usize,
    /// Overlay the limit cycle of a `[cycle]` table.
    #[serde(default)]
    pub with_cycle: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case", deny_unknown_fields)]
pub enum CycleSpec {
    Linear {
        a: f64,
        b: f64,
        c: f64,
        d: f64,
        x0: f64,
    },
    Zn {
        n: u32,
        m: Option<u32>,
        a: f64,
        b: f64,
        d: f64,
        #[serde(default)]
        x0: f64,
        y0: f64,
        scan_seeds: Option<usize>,
    },
    Pole {
        n: u32,
        m: Option<u32>,
        a: f64,
        b: f64,
        d: f64,
        y0: f64,
        scan_seeds: Option<usize>,
    },
    /// Shooting on the scenario's `[system]`.
    Shoot { bracket: [f64; 2] },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HomoclinicSpec {
    pub family: HomoclinicFamily,
    pub n: u32,
    pub m: Option<u32>,
    pub b: f64,
    pub y0: f64,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub path: Option<PathBuf>,
    pub format: Option<Format>,
}

#[derive(Debug)]
pub enum CliError {
    Parse(String),
    Core(Error),
    Io(io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Parse(_) => 2,
            CliError::Core(e) if e.is_validation() => 2,
            CliError::Core(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Parse(m) => write!(f, "InvalidSpec: {m}"),
            CliError::Core(e) => write!(f, "{}: {e}", e.kind()),
            CliError::Io(e) => write!(f, "IoFailure: {e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.into())
    }
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Core(Error::InvalidArgument(msg.into()))
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let sc: Scenario = toml::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
        if let Some(sys) = &sc.system {
            sys.validate()?;
        }
        sc.options.validate()?;
        Ok(sc)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)?;
        Self::parse(&text)
    }

    fn system(&self) -> Result<&PWSystem, CliError> {
        self.system
            .as_ref()
            .ok_or_else(|| invalid("scenario has no [system] table"))
    }
}

/// What a task produced: a summary for stdout and the artifact bytes.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub summary: String,
    pub artifact: Vec<u8>,
}

pub fn run_task(task: Task, sc: &Scenario, format: Format) -> Result<Outcome, CliError> {
    if let Some(t) = sc.task {
        if t != task {
            return Err(invalid(format!(
                "scenario declares task '{}' but '{}' was requested",
                t.name(),
                task.name()
            )));
        }
    }
    match task {
        Task::Classify => run_classify(sc, format),
        Task::Portrait => run_portrait(sc, format),
        Task::Cycle => run_cycle(sc, format),
        Task::Homoclinic => run_homoclinic(sc, format),
        Task::Regularize => run_regularize(sc, format),
    }
}

/// Load, run and write the artifact. Returns the summary and whether the
/// artifact went to stdout.
pub fn run(
    task: Task,
    scenario: &Path,
    out: Option<&Path>,
    format: Option<Format>,
) -> Result<(String, bool), CliError> {
    let sc = Scenario::load(scenario)?;
    let out = out.map(Path::to_path_buf).or_else(|| sc.output.path.clone());
    let format = format
        .or(sc.output.format)
        .or_else(|| {
            out.as_ref()
                .and_then(|p| p.extension())
                .filter(|e| *e == "svg")
                .map(|_| Format::Svg)
        })
        .unwrap_or_default();
    let outcome = run_task(task, &sc, format)?;
    match &out {
        Some(p) => fs::write(p, &outcome.artifact)?,
        None => io::stdout().write_all(&outcome.artifact)?,
    }
    Ok((outcome.summary, out.is_none()))
}

fn run_classify(sc: &Scenario, format: Format) -> Result<Outcome, CliError> {
    let sys = sc.system()?;
    let spec = sc
        .classify
        .as_ref()
        .ok_or_else(|| invalid("classify needs a [classify] table"))?;
    let report = classify_regions(sys, spec.lo, spec.hi, spec.resolution)?;
    let mut artifact = Vec::new();
    match format {
        Format::Csv => report.write_csv(&mut artifact)?,
        Format::Svg => export_portrait(&[], Some(&report), Format::Svg, &mut artifact)?,
    }
    let summary = report
        .segments
        .iter()
        .map(|s| format!("{} [{}, {}]", s.class, s.lo, s.hi))
        .collect::<Vec<_>>()
        .join("; ");
    Ok(Outcome { summary, artifact })
}

fn run_portrait(sc: &Scenario, format: Format) -> Result<Outcome, CliError> {
    let sys = sc.system()?;
    let spec = sc
        .portrait
        .as_ref()
        .ok_or_else(|| invalid("portrait needs a [portrait] table"))?;
    let mut opts = sc.options;
    if let Some(t) = spec.t_max {
        opts.t_max = t;
        opts.validate()?;
    }
    let mut trajs = spec
        .starts
        .par_iter()
        .map(|&[x, y]| integrate(sys, Complex64::new(x, y), &opts))
        .collect::<Result<Vec<_>, Error>>()?;
    let mut summary = format!("{} trajectories", trajs.len());
    if spec.with_cycle {
        let c = solve_cycle(sc)?;
        let _ = write!(summary, "; {}", cycle_summary(&c.poincare, c.period, c.closure));
        trajs.push(c.orbit);
    }
    let regions = match (spec.lo, spec.hi) {
        (Some(lo), Some(hi)) => Some(classify_regions(sys, lo, hi, spec.resolution)?),
        (None, None) => None,
        _ => return Err(invalid("portrait region range needs both lo and hi")),
    };
    let mut artifact = Vec::new();
    export_portrait(&trajs, regions.as_ref(), format, &mut artifact)?;
    Ok(Outcome { summary, artifact })
}

fn cycle_summary(p: &PoincareResult, period: f64, closure: f64) -> String {
    match p.fixed_point {
        Some(w0) => format!(
            "{} cycle: w0={w0} derivative={} period={period} closure={closure:e}",
            p.stability.tag(),
            p.derivative
        ),
        None => "no cycle".to_string(),
    }
}

fn solve_cycle(sc: &Scenario) -> Result<cycles::CycleResult, CliError> {
    let spec = sc
        .cycle
        .as_ref()
        .ok_or_else(|| invalid("cycle needs a [cycle] table"))?;
    let opts = &sc.options;
    let res = match *spec {
        CycleSpec::Linear { a, b, c, d, x0 } => cycles::linear_cycle(a, b, c, d, x0, opts)?,
        CycleSpec::Zn { n, m, a, b, d, x0, y0, .. } => {
            cycles::zn_cycle(n, m.unwrap_or(n % 2), a, b, d, Complex64::new(x0, y0), opts)?
        }
        CycleSpec::Pole { n, m, a, b, d, y0, .. } => {
            cycles::pole_cycle(n, m.unwrap_or(n % 2), a, b, d, y0, opts)?
        }
        CycleSpec::Shoot { bracket } => {
            let sys = sc.system()?;
            let r = cycles::shooting_fixed_point(sys, (bracket[0], bracket[1]), opts)?;
            let p = PoincareResult {
                affine: None,
                fixed_point: Some(r.fixed_point),
                derivative: r.derivative,
                stability: r.stability,
            };
            cycles::cycle_orbit(sys.clone(), r.fixed_point, p, opts)?
        }
    };
    Ok(res)
}

fn run_cycle(sc: &Scenario, format: Format) -> Result<Outcome, CliError> {
    let res = solve_cycle(sc)?;
    let mut summary = cycle_summary(&res.poincare, res.period, res.closure);
    let seeds = match sc.cycle {
        Some(CycleSpec::Zn { scan_seeds, .. }) | Some(CycleSpec::Pole { scan_seeds, .. }) => scan_seeds,
        _ => None,
    };
    if let Some(seeds) = seeds {
        let fc = match *sc.cycle.as_ref().expect("checked above") {
            CycleSpec::Zn { n, m, a, b, d, x0, y0, .. } => {
                cycles::zn_cycle_closed_form(n, m.unwrap_or(n % 2), a, b, d, Complex64::new(x0, y0))?
            }
            CycleSpec::Pole { n, m, a, b, d, y0, .. } => {
                cycles::pole_cycle_closed_form(n, m.unwrap_or(n % 2), a, b, d, y0)?
            }
            _ => unreachable!(),
        };
        let found = cycles::family_scan(&fc, seeds, &sc.options)?;
        let _ = write!(summary, " scan_fixed_points={}", found.len());
    }
    let mut artifact = Vec::new();
    export_portrait(
        std::slice::from_ref(&res.orbit),
        None,
        format,
        &mut artifact,
    )?;
    Ok(Outcome { summary, artifact })
}

/// The loop polyline as a trajectory with `t` the vertex index.
pub fn homoclinic_trajectory(h: &HomoclinicResult) -> Trajectory {
    let line = &h.system.line;
    Trajectory {
        samples: h
            .orbit
            .iter()
            .enumerate()
            .map(|(k, &z)| Sample {
                t: k as f64,
                z,
                mode: if line.signed_distance(z) > 0.0 {
                    Mode::FreePlus
                } else {
                    Mode::FreeMinus
                },
            })
            .collect(),
        events: Vec::new(),
        termination: Termination::TimeLimit,
    }
}

fn run_homoclinic(sc: &Scenario, format: Format) -> Result<Outcome, CliError> {
    let spec = sc
        .homoclinic
        .as_ref()
        .ok_or_else(|| invalid("homoclinic needs a [homoclinic] table"))?;
    let h = cycles::homoclinic(
        spec.n,
        spec.m.unwrap_or(spec.n % 2),
        spec.b,
        spec.y0,
        spec.family,
        &sc.options,
    )?;
    let summary = format!(
        "homoclinic loop: start={} end={} arc_radius={} closure={:e}",
        h.start, h.end, h.arc_radius, h.closure
    );
    let mut artifact = Vec::new();
    export_portrait(&[homoclinic_trajectory(&h)], None, format, &mut artifact)?;
    Ok(Outcome { summary, artifact })
}

fn run_regularize(sc: &Scenario, format: Format) -> Result<Outcome, CliError> {
    let exp = sc
        .regularize
        .as_ref()
        .ok_or_else(|| invalid("regularize needs a [regularize] table"))?;
    if format == Format::Svg {
        return Err(invalid("regularize writes csv only"));
    }
    let report = transition_map_experiment(exp, &sc.options)?;
    let summary = report
        .fits
        .iter()
        .map(|f| {
            format!(
                "eps={} fitted_alpha={} predicted_alpha={} rel_error={}",
                f.eps, f.fitted_alpha, f.predicted_alpha, f.rel_error
            )
        })
        .collect::<Vec<_>>()
        .join("\n");
    let mut artifact = Vec::new();
    report.write_csv(&mut artifact)?;
    Ok(Outcome { summary, artifact })
}

fn class_color(c: RegionClass) -> &'static str {
    match c {
        RegionClass::Sewing => "#2b6cb0",
        RegionClass::SlidingAttract => "#2f855a",
        RegionClass::SlidingRepel => "#c53030",
        RegionClass::Tangency => "#000000",
    }
}

/// Write trajectories and an optional region overlay.
///
/// CSV has one row per record: `record,index,t,x,y,label`, with `record`
/// one of `sample`, `segment_lo`, `segment_hi`, `tangency`, `singular`.
/// SVG uses a y-up frame fitted to the data with a 5% margin.
pub fn export_portrait<W: Write>(
    trajs: &[Trajectory],
    regions: Option<&RegionReport>,
    format: Format,
    out: W,
) -> Result<(), CliError> {
    if trajs.is_empty() && regions.is_none() {
        return Err(invalid("nothing to export"));
    }
    match format {
        Format::Csv => export_csv(trajs, regions, out),
        Format::Svg => export_svg(trajs, regions, out),
    }
}

fn export_csv<W: Write>(
    trajs: &[Trajectory],
    regions: Option<&RegionReport>,
    out: W,
) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["record", "index", "t", "x", "y", "label"])?;
    for (i, tr) in trajs.iter().enumerate() {
        for s in &tr.samples {
            w.write_record([
                "sample",
                &i.to_string(),
                &s.t.to_string(),
                &s.z.re.to_string(),
                &s.z.im.to_string(),
                s.mode.tag(),
            ])?;
        }
    }
    if let Some(r) = regions {
        let line = &r.line;
        for (i, seg) in r.segments.iter().enumerate() {
            for (rec, s) in [("segment_lo", seg.lo), ("segment_hi", seg.hi)] {
                let z = line.point(s);
                w.write_record([
                    rec,
                    &i.to_string(),
                    "",
                    &z.re.to_string(),
                    &z.im.to_string(),
                    seg.class.tag(),
                ])?;
            }
        }
        for (rec, pts) in [("tangency", &r.tangency_points), ("singular", &r.singular_points)] {
            for (i, &s) in pts.iter().enumerate() {
                let z = line.point(s);
                w.write_record([rec, &i.to_string(), "", &z.re.to_string(), &z.im.to_string(), ""])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn export_svg<W: Write>(
    trajs: &[Trajectory],
    regions: Option<&RegionReport>,
    mut out: W,
) -> Result<(), CliError> {
    let mut pts: Vec<ComplexPoint> = trajs
        .iter()
        .flat_map(|t| t.samples.iter().map(|s| s.z))
        .filter(|z| z.re.is_finite() && z.im.is_finite())
        .collect();
    if let Some(r) = regions {
        pts.push(r.line.point(r.lo));
        pts.push(r.line.point(r.hi));
    }
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for z in &pts {
        x0 = x0.min(z.re);
        x1 = x1.max(z.re);
        y0 = y0.min(z.im);
        y1 = y1.max(z.im);
    }
    if pts.is_empty() {
        (x0, x1, y0, y1) = (-1.0, 1.0, -1.0, 1.0);
    }
    let span = (x1 - x0).max(y1 - y0).max(1e-9);
    let m = 0.05 * span;
    let (x0, x1, y0, y1) = (x0 - m, x1 + m, y0 - m, y1 + m);
    let stroke = span / 400.0;
    // y-up: svg y = y1 + y0 - y
    let px = |z: ComplexPoint| format!("{:.6},{:.6}", z.re, y1 + y0 - z.im);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{:.6} {:.6} {:.6} {:.6}" width="800" height="{:.0}">"#,
        x0,
        y0,
        x1 - x0,
        y1 - y0,
        800.0 * (y1 - y0) / (x1 - x0)
    );
    let _ = writeln!(s, r#"<rect x="{x0:.6}" y="{y0:.6}" width="{:.6}" height="{:.6}" fill="white"/>"#, x1 - x0, y1 - y0);
    if let Some(r) = regions {
        for seg in &r.segments {
            let (a, b) = (r.line.point(seg.lo), r.line.point(seg.hi));
            let _ = writeln!(
                s,
                r#"<line x1="{:.6}" y1="{:.6}" x2="{:.6}" y2="{:.6}" stroke="{}" stroke-width="{:.6}" class="{}"/>"#,
                a.re,
                y1 + y0 - a.im,
                b.re,
                y1 + y0 - b.im,
                class_color(seg.class),
                3.0 * stroke,
                seg.class.tag()
            );
        }
        for &t in &r.tangency_points {
            let z = r.line.point(t);
            let _ = writeln!(
                s,
                r#"<circle cx="{:.6}" cy="{:.6}" r="{:.6}" fill="black"/>"#,
                z.re,
                y1 + y0 - z.im,
                4.0 * stroke
            );
        }
    }
    for tr in trajs {
        let poly = tr.samples.iter().map(|p| px(p.z)).collect::<Vec<_>>().join(" ");
        let _ = writeln!(
            s,
            r##"<polyline points="{poly}" fill="none" stroke="#333333" stroke-width="{stroke:.6}"/>"##
        );
    }
    s.push_str("</svg>\n");
    out.write_all(s.as_bytes())?;
    Ok(())
}

/// Number of worker threads from `PWHS_THREADS`, if set.
pub fn threads_from_env() -> Result<Option<usize>, CliError> {
    match std::env::var("PWHS_THREADS") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|n| *n > 0)
            .map(Some)
            .ok_or_else(|| invalid(format!("PWHS_THREADS must be a positive integer, got '{v}'"))),
        Err(_) => Ok(None),
    }
}
