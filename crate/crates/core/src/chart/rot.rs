use crate::curve::{SingularEvent, SingularEventKind, SolverConfig};
use crate::error::{Result, SolverError};
use crate::hfield::{MeanCurvature, Scaled};
use crate::quadrature::{weighted_cumulative, ChartGrid};

use super::{axis_integrand, check_orientation, solve_chart, ChartCase, Continuation, PicardProblem, SingularChart};

/// `Phi(q)(y) = y^{2-n} int_0^y { -(n-2) q^3 + (n-1) H~ eta (1+q^2)^{3/2} } eta^{n-3} d eta`.
pub fn phi_apply(q: &[f64], h_tilde: &[f64], n: u32, grid: &ChartGrid) -> Vec<f64> {
    let nodes = grid.nodes();
    let nf = n as f64;
    let g: Vec<f64> = nodes
        .iter()
        .enumerate()
        .map(|(i, &eta)| axis_integrand(nf - 2.0, nf, q[i], h_tilde[i], eta))
        .collect();
    let w = weighted_cumulative(grid, &g, n - 3);
    nodes
        .iter()
        .zip(w)
        .map(|(&y, wi)| if y == 0.0 { 0.0 } else { wi / y.powi(n as i32 - 2) })
        .collect()
}

/// Solves the axis-contact chart of an `O(n-1)` curve through `event`.
///
/// `h` is the mean curvature of the curve being charted; the chart pulls it back as
/// `orientation * h(s(y))`.
pub fn solve_singular_rot(
    h: &dyn MeanCurvature,
    n: u32,
    event: &SingularEvent,
    orientation: f64,
    cfg: &SolverConfig,
) -> Result<SingularChart> {
    if n < 3 {
        return Err(SolverError::InvalidInput(format!("n must be >= 3, got {n}")));
    }
    if event.kind != SingularEventKind::AxisContact {
        return Err(SolverError::InvalidInput(format!(
            "rotational chart needs an axis contact, got {:?}",
            event.kind
        )));
    }
    let orientation = check_orientation(orientation)?;
    let apply = move |grid: &ChartGrid, u: &[f64], ht: &[f64]| Ok(phi_apply(u, ht, n, grid));
    let problem = PicardProblem {
        case: ChartCase::Rot { n },
        shift: 0.0,
        x_start: event.contact_point.0,
        b: event.s_event,
        x_b: event.contact_point.0,
        orientation,
        h,
        width_cap: f64::INFINITY,
        apply: &apply,
    };
    solve_chart(&problem, cfg).map_err(|e| e.at(event.s_event))
}

/// Continues an incoming axis chart past the contact.
///
/// The curve is extended into `y < 0` and reflected back; the reflected curve solves the
/// same equation with `-H`, so the outgoing chart is solved for `-h` with orientation `+1`.
/// The returned state sits at `y = Y/2` of the outgoing chart.
pub fn continue_through_axis(
    chart_incoming: &SingularChart,
    h: &dyn MeanCurvature,
    n: u32,
    cfg: &SolverConfig,
) -> Result<Continuation> {
    let event = SingularEvent {
        kind: SingularEventKind::AxisContact,
        s_event: chart_incoming.b,
        contact_point: (chart_incoming.x_b, 0.0),
        incoming_slope_sq: 0.0,
    };
    let reflected = Scaled { inner: h, sign: -1.0 };
    let chart = solve_singular_rot(&reflected, n, &event, 1.0, cfg)?;
    let state = chart.state_at_node(chart.match_index());
    Ok(Continuation { chart, state })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hfield::HField;

    fn event(b: f64, xb: f64) -> SingularEvent {
        SingularEvent {
            kind: SingularEventKind::AxisContact,
            s_event: b,
            contact_point: (xb, 0.0),
            incoming_slope_sq: 0.0,
        }
    }

    #[test]
    fn phi_of_zero_with_zero_h_is_zero() {
        let grid = ChartGrid::uniform(0.1, 32);
        let z = vec![0.0; grid.len()];
        assert!(phi_apply(&z, &z, 5, &grid).iter().all(|v| *v == 0.0));
    }

    #[test]
    fn phi_of_zero_with_constant_h_is_linear() {
        let grid = ChartGrid::uniform(0.1, 32);
        let z = vec![0.0; grid.len()];
        for n in 3..7 {
            let ht = vec![0.7; grid.len()];
            let out = phi_apply(&z, &ht, n, &grid);
            for (y, v) in grid.nodes().iter().zip(out) {
                assert!((v - 0.7 * y).abs() < 1e-15, "n={n}");
            }
        }
    }

    #[test]
    fn flat_disk_chart() {
        let cfg = SolverConfig::default();
        let h = HField::constant(0.0);
        let chart = solve_singular_rot(&h, 4, &event(0.0, 0.3), -1.0, &cfg).unwrap();
        assert!(chart.q.iter().all(|q| *q == 0.0));
        assert!(chart.x_of_y.iter().all(|x| *x == 0.3));
    }

    #[test]
    fn circle_chart_matches_unit_circle() {
        // x = sin s, y = cos s reaches (1, 0) at s = pi/2 moving downward
        let cfg = SolverConfig::default();
        let h = HField::constant(1.0);
        let b = std::f64::consts::FRAC_PI_2;
        let chart = solve_singular_rot(&h, 3, &event(b, 1.0), -1.0, &cfg).unwrap();
        assert!(chart.stats.residual <= cfg.picard_tol);
        assert!(chart.stats.contraction <= 0.9);
        for i in 1..chart.grid.len() {
            let st = chart.state_at_node(i);
            assert!((st.x - (1.0 - st.y * st.y).sqrt()).abs() < 1e-8);
            assert!((st.s - st.y.acos()).abs() < 1e-8);
            assert!((st.xp - st.s.cos()).abs() < 1e-8);
        }
        let out = continue_through_axis(&chart, &h, 3, &cfg).unwrap();
        // folded continuation: x = sin s, y = -cos s
        let st = out.state;
        assert!((st.x - st.s.sin()).abs() < 1e-8);
        assert!((st.y + st.s.cos()).abs() < 1e-8);
        assert!((st.xp - st.s.cos()).abs() < 1e-8);
        assert!((st.yp - st.s.sin()).abs() < 1e-8);
    }

    #[test]
    fn flat_disk_continues_as_mirror_line() {
        let cfg = SolverConfig::default();
        let h = HField::constant(0.0);
        let chart = solve_singular_rot(&h, 3, &event(0.0, 1.0), -1.0, &cfg).unwrap();
        let out = continue_through_axis(&chart, &h, 3, &cfg).unwrap();
        assert_eq!((out.state.xp, out.state.yp), (0.0, 1.0));
        assert_eq!(out.state.x, 1.0);
    }

    #[test]
    fn rejects_origin_events() {
        let mut ev = event(0.0, 0.0);
        ev.kind = SingularEventKind::OriginContact;
        let h = HField::constant(0.0);
        assert!(solve_singular_rot(&h, 3, &ev, -1.0, &SolverConfig::default()).is_err());
    }
}
