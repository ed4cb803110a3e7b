//! The cylinder of radius c is an equilibrium when H = (n-2) / ((n-1) c).

use pmcurve::{extend, CurveState, Geometry, HField, RunSpec};

fn main() -> pmcurve::Result<()> {
    let c = 2.0;
    for n in 3..=5 {
        let h = (n - 2) as f64 / ((n - 1) as f64 * c);
        let spec = RunSpec::new(
            Geometry::Rot { n },
            HField::constant(h),
            CurveState::new(0.0, 0.0, c, 1.0, 0.0),
            (0.0, 10.0),
        );
        let curve = extend(&spec)?;
        let drift = curve.samples().map(|p| (p.y - c).abs()).fold(0.0, f64::max);
        println!("n = {n}: H = {h:.6}, events = {}, max |y - c| = {drift:.2e}", curve.events.len());
    }
    Ok(())
}
