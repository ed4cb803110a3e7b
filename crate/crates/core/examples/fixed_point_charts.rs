//! Solving the three singular charts directly and inspecting the Picard iteration.

use pmcurve::chart::{solve_case_a, solve_case_b, solve_singular_rot, SingularChart};
use pmcurve::{HField, SingularEvent, SingularEventKind, SolverConfig};

fn report(name: &str, chart: &SingularChart) {
    let st = &chart.stats;
    println!(
        "{name:<28} Y = {:.4}  sweeps = {:>2}  contraction = {:.3}  residual = {:.1e}  |u/y| = {:.3}",
        chart.width, st.iterations, st.contraction, st.residual, st.norm
    );
}

fn main() -> pmcurve::Result<()> {
    let cfg = SolverConfig::default();
    let axis = SingularEvent {
        kind: SingularEventKind::AxisContact,
        s_event: 0.0,
        contact_point: (1.0, 0.0),
        incoming_slope_sq: 0.0,
    };
    let origin = SingularEvent {
        kind: SingularEventKind::OriginContact,
        s_event: 0.0,
        contact_point: (0.0, 0.0),
        incoming_slope_sq: 0.5,
    };

    for value in [0.0, 1.0, -2.0] {
        let h = HField::constant(value);
        println!("H = {value}");
        report("  rotational, n = 4", &solve_singular_rot(&h, 4, &axis, 1.0, &cfg)?);
        report("  axis, (l, m) = (2, 1)", &solve_case_a(&h, 2, 1, &axis, 1.0, &cfg)?);
        report("  origin, (l, m) = (1, 2)", &solve_case_b(&h, 1, 2, &origin, 1.0, &cfg)?);
    }

    // q(y) near the axis of a sphere chart: q = -y/sqrt(1-y^2) for the unit circle
    let chart = solve_singular_rot(&HField::constant(1.0), 3, &axis, 1.0, &cfg)?;
    let k = chart.match_index();
    println!(
        "sphere chart at y = {:.4}: q = {:.12}, circle gives {:.12}",
        chart.grid[k],
        chart.q[k],
        chart.grid[k] / (1.0 - chart.grid[k].powi(2)).sqrt()
    );
    Ok(())
}
