use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use num_complex::Complex64;
use pwhs_core::cli::{export_portrait, Format, Scenario};
use pwhs_core::flow::{integrate, Trajectory};
use pwhs_core::{FieldSpec, IntegratorOptions, PWSystem, SwitchingLine};

fn scenarios() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios")
}

fn pwhs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pwhs"))
        .args(args)
        .env("PWHS_THREADS", "2")
        .output()
        .unwrap()
}

fn task_of(path: &Path) -> String {
    let sc = Scenario::load(path).unwrap();
    let text = std::fs::read_to_string(path).unwrap();
    assert!(sc.task.is_some(), "{} declares no task", path.display());
    text.lines()
        .find_map(|l| l.strip_prefix("task = "))
        .unwrap()
        .trim_matches('"')
        .to_string()
}

fn write_scenario(dir: &tempfile::TempDir, name: &str, body: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, body).unwrap();
    p
}

#[test]
fn every_scenario_regenerates() {
    let dir = tempfile::tempdir().unwrap();
    let mut paths: Vec<_> = std::fs::read_dir(scenarios())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "toml"))
        .collect();
    paths.sort();
    assert!(paths.len() >= 15);
    for p in paths {
        let task = task_of(&p);
        let out = dir.path().join(p.file_stem().unwrap());
        let o = pwhs(&[&task, p.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}: {}", p.display(), String::from_utf8_lossy(&o.stderr));
        assert!(std::fs::metadata(&out).unwrap().len() > 0);
        let summary = String::from_utf8(o.stdout).unwrap();
        if task == "cycle" {
            assert!(summary.contains("cycle: w0="), "{summary}");
            if summary.contains("scan_fixed_points") {
                assert!(summary.contains("scan_fixed_points=1"), "{summary}");
            }
        }
    }
}

#[test]
fn classify_matches_figure_legend() {
    let p = scenarios().join("fig02_classify.toml");
    let o = pwhs(&["classify", p.to_str().unwrap()]);
    assert!(o.status.success());
    let mut rdr = csv::Reader::from_reader(o.stdout.as_slice());
    let rows: Vec<(f64, f64, String)> = rdr
        .records()
        .map(|r| {
            let r = r.unwrap();
            (r[0].parse().unwrap(), r[1].parse().unwrap(), r[2].to_string())
        })
        .collect();
    let find = |class: &str| rows.iter().find(|r| r.2 == class).unwrap().clone();
    let sewing = find("sewing");
    let sliding = find("sliding_attract");
    let tangent = find("tangency_point");
    assert_eq!((sewing.0, sewing.1), (-5.0, 0.0));
    assert_eq!((sliding.0, sliding.1), (0.0, 5.0));
    assert_eq!(tangent.0, 0.0);
    // summary goes to stderr when the artifact is on stdout
    assert!(String::from_utf8_lossy(&o.stderr).contains("sewing"));
}

#[test]
fn output_is_deterministic() {
    for (task, file, format) in [
        ("classify", "fig02_classify.toml", "csv"),
        ("portrait", "fig17_pole_portrait.toml", "svg"),
        ("portrait", "fig17_pole_portrait.toml", "csv"),
        ("cycle", "fig13_zn_cycle.toml", "csv"),
    ] {
        let p = scenarios().join(file);
        let a = pwhs(&[task, p.to_str().unwrap(), "--format", format]);
        let b = pwhs(&[task, p.to_str().unwrap(), "--format", format]);
        assert!(a.status.success());
        assert!(!a.stdout.is_empty());
        assert_eq!(a.stdout, b.stdout, "{file} {format}");
    }
}

#[test]
fn portrait_cycle_closes() {
    let p = scenarios().join("fig17_pole_portrait.toml");
    let o = pwhs(&["portrait", p.to_str().unwrap(), "--format", "svg"]);
    assert!(o.status.success());
    let summary = String::from_utf8(o.stderr).unwrap();
    let closure: f64 = summary
        .split("closure=")
        .nth(1)
        .unwrap()
        .trim()
        .parse()
        .unwrap();
    assert!(closure <= 1e-6, "{summary}");
    let svg = String::from_utf8(o.stdout).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 4);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing_n = write_scenario(
        &dir,
        "missing_n.toml",
        r#"
[system.plus]
kind = "power"
center = [0.0, 0.0]
[system.minus]
kind = "constant"
value = [1.0, 0.0]
[system.line]
orientation = "vertical"
[classify]
lo = -1.0
hi = 1.0
"#,
    );
    assert_eq!(pwhs(&["classify", missing_n.to_str().unwrap()]).status.code(), Some(2));

    let unknown_key = write_scenario(&dir, "unknown.toml", "task = \"cycle\"\ncolour = 3\n");
    assert_eq!(pwhs(&["cycle", unknown_key.to_str().unwrap()]).status.code(), Some(2));

    let wrong_task = scenarios().join("fig13_zn_cycle.toml");
    assert_eq!(pwhs(&["classify", wrong_task.to_str().unwrap()]).status.code(), Some(2));

    let condition = write_scenario(
        &dir,
        "condition.toml",
        "[cycle]\nmethod = \"zn\"\nn = 6\na = -1.0\nb = 1.0\nd = 5.0\ny0 = 1.0\n",
    );
    let o = pwhs(&["cycle", condition.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("ConditionViolated"));

    // no sign change of the displacement over the bracket: numerical failure
    let no_root = write_scenario(
        &dir,
        "no_root.toml",
        &std::fs::read_to_string(scenarios().join("rational_cycle.toml"))
            .unwrap()
            .replace("bracket = [0.05, 0.13]", "bracket = [0.15, 0.2]"),
    );
    let o = pwhs(&["cycle", no_root.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("NoSignChange"));

    let nowhere = dir.path().join("absent.toml");
    assert_eq!(pwhs(&["cycle", nowhere.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn format_follows_extension() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("loop.svg");
    let p = scenarios().join("fig23_homoclinic.toml").to_str().unwrap().to_string();
    // the scenario asks for svg; an explicit flag wins
    let o = pwhs(&["homoclinic", &p, "--out", out.to_str().unwrap(), "--format", "csv"]);
    assert!(o.status.success());
    assert!(std::fs::read_to_string(&out).unwrap().starts_with("record,"));
    let o = pwhs(&["homoclinic", &p, "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(std::fs::read_to_string(&out).unwrap().starts_with("<svg"));
}

fn circle() -> Trajectory {
    let f = FieldSpec::linear(0.0, 1.0, Complex64::new(0.0, 0.0));
    let sys = PWSystem::new(f.clone(), f, SwitchingLine::horizontal(5.0)).unwrap();
    let opts = IntegratorOptions {
        t_max: 2.0 * std::f64::consts::PI,
        ..Default::default()
    };
    integrate(&sys, Complex64::new(1.0, 0.0), &opts).unwrap()
}

#[test]
fn single_orbit_svg() {
    let tr = circle();
    let mut buf = Vec::new();
    export_portrait(std::slice::from_ref(&tr), None, Format::Svg, &mut buf).unwrap();
    let svg = String::from_utf8(buf).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 1);
    assert!(svg.trim_end().ends_with("</svg>"));
    let first = tr.samples.first().unwrap().z;
    assert!((first - tr.last().z).norm() < 1e-8);
}

#[test]
fn portrait_csv_round_trip() {
    let tr = circle();
    let mut buf = Vec::new();
    export_portrait(std::slice::from_ref(&tr), None, Format::Csv, &mut buf).unwrap();
    let mut rdr = csv::Reader::from_reader(buf.as_slice());
    assert_eq!(rdr.headers().unwrap(), vec!["record", "index", "t", "x", "y", "label"]);
    let samples: Vec<(f64, f64, f64)> = rdr
        .records()
        .map(|r| r.unwrap())
        .filter(|r| &r[0] == "sample")
        .map(|r| (r[2].parse().unwrap(), r[3].parse().unwrap(), r[4].parse().unwrap()))
        .collect();
    assert_eq!(samples.len(), tr.samples.len());
    for (got, s) in samples.iter().zip(&tr.samples) {
        assert_eq!(*got, (s.t, s.z.re, s.z.im));
    }
}

#[test]
fn empty_export_is_rejected() {
    let mut buf = Vec::new();
    assert!(export_portrait(&[], None, Format::Svg, &mut buf).is_err());
}
