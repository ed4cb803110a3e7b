//! Unit sphere in R^3: H = 1 from (0, 1) heading right.
//!
//! The profile hits the axis at s = pi/2, gets continued through a singular chart,
//! reflects back into y > 0 and hits the axis again at 3pi/2.

use std::f64::consts::{PI, TAU};

use pmcurve::{extend, CurveState, Geometry, HField, RunSpec};

fn main() -> pmcurve::Result<()> {
    let mut spec = RunSpec::new(
        Geometry::Rot { n: 3 },
        HField::constant(1.0),
        CurveState::new(0.0, 0.0, 1.0, 1.0, 0.0),
        (0.0, TAU),
    );
    spec.sample_ds = 0.01;
    let curve = extend(&spec)?;

    for (ev, st) in curve.events.iter().zip(&curve.stitches) {
        println!(
            "{:?} at s = {:.10} (x = {:+.10}), chart width {:.3e}, {} Picard sweeps",
            ev.kind, ev.s_event, ev.contact_point.0, st.chart_width, st.picard_iterations
        );
    }
    println!("expected contacts at {:.10} and {:.10}", PI / 2.0, 3.0 * PI / 2.0);

    let dev = curve
        .samples()
        .map(|p| (p.x - p.s.sin()).hypot(p.y - p.s.cos().abs()))
        .fold(0.0, f64::max);
    println!("max deviation from (sin s, |cos s|): {dev:.3e}");
    Ok(())
}
