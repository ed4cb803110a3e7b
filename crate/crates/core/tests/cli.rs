use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use pmcurve::output::{parse_csv, EventRecord, CSV_HEADER};
use pmcurve::SingularEventKind;
use serde_json::Value;

const H1: &str = r#"{"kind":"constant","value":1.0}"#;
const H0: &str = r#"{"kind":"constant","value":0.0}"#;

fn pmcurve(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pmcurve"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn extend_sphere(dir: &Path, name: &str) -> Output {
    pmcurve(dir, &["extend", "--geometry", "rot", "--n", "3", "--H", H1, "--init", "0,1,1,0", "--window", "0,6.3", "--out", name])
}

fn events(path: &Path) -> Vec<EventRecord> {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("report on stdout")
}

#[test]
fn extend_writes_csv_events_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = extend_sphere(dir.path(), "sphere.csv");
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("sphere.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some(CSV_HEADER));
    let rows = parse_csv(&csv).unwrap();
    assert!(rows.len() > 600);
    // 17 significant digits
    let first_float = csv.lines().nth(2).unwrap().split(',').next().unwrap();
    assert_eq!(first_float.split('e').next().unwrap().replace(['.', '-'], "").len(), 17);

    let ev = events(&dir.path().join("sphere.events.json"));
    assert_eq!(ev.len(), 2);
    assert!(ev.iter().all(|e| e.kind == SingularEventKind::AxisContact));

    let manifest: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("sphere.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["deterministic"], true);
    assert_eq!(manifest["spec"]["geometry"]["type"], "rot");
}

#[test]
fn extend_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&extend_sphere(dir.path(), "a.csv")), 0);
    assert_eq!(code(&extend_sphere(dir.path(), "b.csv")), 0);
    assert_eq!(fs::read(dir.path().join("a.csv")).unwrap(), fs::read(dir.path().join("b.csv")).unwrap());
    assert_eq!(
        fs::read(dir.path().join("a.events.json")).unwrap(),
        fs::read(dir.path().join("b.events.json")).unwrap()
    );
}

#[test]
fn manifest_spec_replays_to_the_same_csv() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&extend_sphere(dir.path(), "sphere.csv")), 0);
    let manifest: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("sphere.manifest.json")).unwrap()).unwrap();
    let spec: pmcurve::RunSpec = serde_json::from_value(manifest["spec"].clone()).unwrap();
    let curve = pmcurve::extend(&spec).unwrap();
    assert_eq!(pmcurve::output::curve_to_csv(&curve), fs::read_to_string(dir.path().join("sphere.csv")).unwrap());
}

#[test]
fn extend_cone_reports_origin_contact() {
    let dir = tempfile::tempdir().unwrap();
    let out = pmcurve(
        dir.path(),
        &["extend", "--geometry", "lm", "--l", "1", "--m", "1", "--H", H0, "--init", "1,1,-0.70710678,-0.70710678", "--window", "0,4", "--out", "cone.csv"],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let ev = events(&dir.path().join("cone.events.json"));
    assert_eq!(ev.len(), 1);
    assert_eq!(ev[0].kind, SingularEventKind::OriginContact);
    assert!((ev[0].slope_sq - 0.5).abs() < 1e-6);
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing_h = pmcurve(dir.path(), &["extend", "--geometry", "rot", "--init", "0,1,1,0", "--window", "0,1", "--out", "x.csv"]);
    assert_eq!(code(&missing_h), 2);
    assert!(String::from_utf8_lossy(&missing_h.stderr).contains("--H"));
    let not_unit = pmcurve(dir.path(), &["extend", "--geometry", "rot", "--H", H1, "--init", "0,1,1,1", "--window", "0,1", "--out", "x.csv"]);
    assert_eq!(code(&not_unit), 2);
    let bad_json = pmcurve(dir.path(), &["extend", "--geometry", "rot", "--H", "{", "--init", "0,1,1,0", "--window", "0,1", "--out", "x.csv"]);
    assert_eq!(code(&bad_json), 2);
    let no_command = pmcurve(dir.path(), &[]);
    assert_eq!(code(&no_command), 2);
    assert_eq!(code(&pmcurve(dir.path(), &["--help"])), 0);
}

#[test]
fn solver_failures_exit_with_three() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("tight.json"), r#"{"norm_bound_M": 0.001}"#).unwrap();
    let out = pmcurve(
        dir.path(),
        &["extend", "--geometry", "rot", "--H", H1, "--init", "0,1,1,0", "--window", "0,3", "--out", "x.csv", "--config", "tight.json"],
    );
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn verify_bound_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = pmcurve(dir.path(), &["verify", "thm32", "--n", "3", "--H", H1, "--c", "4,8,16", "--s-range", "-2,2", "--out", "r.json"]);
    assert_eq!(code(&out), 0);
    let r: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(r["pass"], true);
    assert!(r["observed"]["max_ratio"].as_f64().unwrap() <= 1.0);
}

#[test]
fn verify_origin_slope_reports_target() {
    let dir = tempfile::tempdir().unwrap();
    let out = pmcurve(dir.path(), &["verify", "prop43", "--l", "1", "--m", "2"]);
    assert_eq!(code(&out), 0);
    let r = report(&out);
    assert!((r["bound_or_expected"]["slope_sq"].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-15);
    assert!((r["observed"]["slope_sq"].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-6);
}

#[test]
fn verify_scaling_fits_slope_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = pmcurve(dir.path(), &["verify", "thm33", "--K", "1", "--n", "4", "--c", "8,16,32,64"]);
    assert_eq!(code(&out), 0);
    let slope = report(&out)["observed"]["slope"].as_f64().unwrap();
    assert!((slope - 2.0).abs() < 0.1, "slope {slope}");
}

#[test]
fn verify_positivity_and_periods() {
    let dir = tempfile::tempdir().unwrap();
    let out = pmcurve(dir.path(), &["verify", "thm31"]);
    assert_eq!(code(&out), 0);
    assert_eq!(report(&out).as_array().unwrap().len(), 3);

    let out = pmcurve(dir.path(), &["verify", "periods", "--n", "3", "--H", H1, "--L", "3.141592653589793"]);
    assert_eq!(code(&out), 0);
    let d = &report(&out)["observed"]["diagnostics"];
    assert!((d["signed_area"].as_f64().unwrap() - std::f64::consts::FRAC_PI_4).abs() < 1e-8);
}

#[test]
fn failed_checks_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = pmcurve(dir.path(), &["verify", "periods", "--H", H0, "--L", "1"]);
    assert_eq!(code(&out), 1);
    assert_eq!(report(&out)["pass"], false);
}

fn points(svg: &str, class: &str) -> Vec<(f64, f64)> {
    let tag = format!(r#"class="{class}""#);
    let line = svg.lines().find(|l| l.contains(&tag)).unwrap();
    let raw = line.split(r#"points=""#).nth(1).unwrap().split('"').next().unwrap();
    raw.split(' ')
        .map(|p| {
            let (x, y) = p.split_once(',').unwrap();
            (x.parse().unwrap(), y.parse().unwrap())
        })
        .collect()
}

#[test]
fn plot_marks_events_and_overlays_the_limit_circle() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&extend_sphere(dir.path(), "sphere.csv")), 0);
    let out = pmcurve(dir.path(), &["plot", "--input", "sphere.csv", "--out", "sphere.svg", "--overlay-gamma-inf", "--H", H1, "--c", "1"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let svg = fs::read_to_string(dir.path().join("sphere.svg")).unwrap();
    assert_eq!(svg.matches(r#"class="event""#).count(), 2);

    // overlay radius 1/((n-1)H) = 1/2, profile half-width 1, measured in pixels
    let ov = points(&svg, "overlay");
    let (cx, cy) = ov.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let (cx, cy) = (cx / ov.len() as f64, cy / ov.len() as f64);
    let radii: Vec<f64> = ov.iter().map(|p| (p.0 - cx).hypot(p.1 - cy)).collect();
    let r = radii.iter().sum::<f64>() / radii.len() as f64;
    assert!(radii.iter().all(|q| (q - r).abs() < 0.02 * r));
    let xs: Vec<f64> = svg
        .lines()
        .filter(|l| l.contains(r#"class="segment""#))
        .flat_map(|l| {
            let raw = l.split(r#"points=""#).nth(1).unwrap().split('"').next().unwrap().to_string();
            raw.split(' ').map(|p| p.split_once(',').unwrap().0.parse::<f64>().unwrap()).collect::<Vec<_>>()
        })
        .collect();
    let half_width = (xs.iter().cloned().fold(f64::MIN, f64::max) - xs.iter().cloned().fold(f64::MAX, f64::min)) / 2.0;
    assert!((r / half_width - 0.5).abs() < 0.02, "ratio {}", r / half_width);
}

#[test]
fn plot_rejects_empty_csv() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("empty.csv"), "").unwrap();
    assert_eq!(code(&pmcurve(dir.path(), &["plot", "--input", "empty.csv", "--out", "e.svg"])), 2);
    fs::write(dir.path().join("header.csv"), format!("{CSV_HEADER}\n")).unwrap();
    assert_eq!(code(&pmcurve(dir.path(), &["plot", "--input", "header.csv", "--out", "e.svg"])), 2);
}
