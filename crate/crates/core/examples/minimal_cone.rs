//! Minimal cones over S^l x S^m pass straight through the origin.
//!
//! An inbound ray with x'^2 = l/(l+m) reaches the origin, the origin chart takes over and
//! the curve leaves along the reflected ray. For large l + m the ray is strongly unstable
//! (deviations grow like a negative power of the distance to the origin), so a marched ray
//! turns away before reaching the origin band; the cases below stay with small l + m.

use pmcurve::cli::cone_ray;
use pmcurve::{extend, Geometry, HField, RunSpec};

fn main() -> pmcurve::Result<()> {
    for (l, m) in [(1, 1), (1, 2), (2, 1), (1, 3)] {
        let spec = RunSpec::new(
            Geometry::Product { l, m },
            HField::constant(0.0),
            cone_ray(l, m),
            (0.0, 2.0),
        );
        let curve = extend(&spec)?;
        let ev = &curve.events[0];
        let last = curve.samples().last().unwrap();
        let (dx, dy) = ray_direction(l, m);
        let off_line = (last.x * dy - last.y * dx).abs();
        println!(
            "(l, m) = ({l}, {m}): {:?} at s = {:.12}, slope^2 = {:.12} (target {:.12}), off-ray {off_line:.1e}",
            ev.kind,
            ev.s_event,
            ev.incoming_slope_sq,
            l as f64 / (l + m) as f64
        );
    }
    Ok(())
}

fn ray_direction(l: u32, m: u32) -> (f64, f64) {
    let t = (l + m) as f64;
    ((l as f64 / t).sqrt(), (m as f64 / t).sqrt())
}
