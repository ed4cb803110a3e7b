//! Writes a CSV, an events file and an SVG for a sphere profile with the limit curve
//! overlaid. Output goes to the directory given as the first argument (default: temp dir).

use std::f64::consts::TAU;
use std::path::PathBuf;

use pmcurve::output::{curve_to_csv, event_records, parse_csv, render_svg};
use pmcurve::{extend, CurveState, EtaAccumulator, Geometry, HField, RunSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(std::env::temp_dir);
    let h = HField::constant(1.0);
    let mut spec = RunSpec::new(Geometry::Rot { n: 3 }, h.clone(), CurveState::new(0.0, 0.0, 1.0, 1.0, 0.0), (0.0, TAU));
    spec.sample_ds = 0.02;
    let curve = extend(&spec)?;

    let csv = curve_to_csv(&curve);
    let events = event_records(&curve);
    let acc = EtaAccumulator::new(h, 3);
    let overlay: Vec<(f64, f64)> = (0..=200)
        .map(|i| {
            let (x, y) = acc.gamma_infinity(TAU * i as f64 / 200.0);
            (x, y + 1.0)
        })
        .collect();
    let svg = render_svg(&parse_csv(&csv)?, &events, Some(&overlay));

    std::fs::write(dir.join("sphere.csv"), csv)?;
    std::fs::write(dir.join("sphere.events.json"), serde_json::to_string_pretty(&events)?)?;
    std::fs::write(dir.join("sphere.svg"), svg)?;
    println!("wrote sphere.csv, sphere.events.json, sphere.svg to {}", dir.display());
    Ok(())
}
