use crate::curve::{SingularEvent, SingularEventKind, SolverConfig};
use crate::error::{Result, SolverError};
use crate::hfield::{MeanCurvature, Scaled};
use crate::quadrature::{cumulative_trapezoid, weighted_cumulative, ChartGrid};

use super::{axis_integrand, check_orientation, solve_chart, ChartCase, Continuation, PicardProblem, SingularChart};

fn scale_back(grid: &ChartGrid, w: Vec<f64>, power: i32) -> Vec<f64> {
    grid.nodes()
        .iter()
        .zip(w)
        .map(|(&y, wi)| if y == 0.0 { 0.0 } else { wi / y.powi(power) })
        .collect()
}

/// `Psi(q)(y) = y^{-m} int_0^y { -m q^3 + (n-1) H~ eta (1+q^2)^{3/2}
///   + l eta (1+q^2) / (x0 + int_0^eta q) } eta^{m-1} d eta`, `n = l + m + 2`.
pub fn psi_apply(
    q: &[f64],
    h_tilde: &[f64],
    l: u32,
    m: u32,
    x0: f64,
    grid: &ChartGrid,
) -> Result<Vec<f64>> {
    if m < 1 {
        return Err(SolverError::InvalidInput("m must be >= 1".into()));
    }
    let nodes = grid.nodes();
    let nf = (l + m + 2) as f64;
    let running = cumulative_trapezoid(grid, q);
    let mut g = Vec::with_capacity(nodes.len());
    for (i, &eta) in nodes.iter().enumerate() {
        let mut gi = axis_integrand(m as f64, nf, q[i], h_tilde[i], eta);
        if l > 0 {
            let den = x0 + running[i];
            if den <= 0.0 || !den.is_finite() {
                return Err(SolverError::DenominatorVanished { y: eta, value: den });
            }
            gi += l as f64 * eta * (1.0 + q[i] * q[i]) / den;
        }
        g.push(gi);
    }
    let w = weighted_cumulative(grid, &g, m - 1);
    Ok(scale_back(grid, w, m as i32))
}

/// Limiting outgoing `x'` at the origin, `sqrt(l / (l + m))`.
pub fn origin_slope(l: u32, m: u32) -> f64 {
    (l as f64 / (l + m) as f64).sqrt()
}

/// `Theta(r)(y) = y^{-(l+m)} int_0^y (F1 + F2 + F3) eta^{l+m-1} d eta` with
/// `Q = 1 + (r + a)^2`, `a = sqrt(l/m)`, `mu = (sqrt(m)/eta) int_0^eta r`:
/// `F1 = -r^2 (m r + 2 sqrt(lm))`, `F2 = -sqrt(lm) Q mu / (mu + sqrt(l))`,
/// `F3 = (n-1) H~ Q^{3/2} eta`.
pub fn theta_apply(
    r: &[f64],
    h_tilde: &[f64],
    l: u32,
    m: u32,
    grid: &ChartGrid,
) -> Result<Vec<f64>> {
    if l < 1 || m < 1 {
        return Err(SolverError::InvalidInput("origin chart needs l, m >= 1".into()));
    }
    let nodes = grid.nodes();
    let (lf, mf) = (l as f64, m as f64);
    let nf = lf + mf + 2.0;
    let a = (lf / mf).sqrt();
    let slm = (lf * mf).sqrt();
    let running = cumulative_trapezoid(grid, r);
    let mut g = Vec::with_capacity(nodes.len());
    for (i, &eta) in nodes.iter().enumerate() {
        if eta == 0.0 {
            g.push(0.0);
            continue;
        }
        let ri = r[i];
        let qq = 1.0 + (ri + a) * (ri + a);
        let mean = mf.sqrt() * running[i] / eta;
        let den = mean + lf.sqrt();
        if den <= 0.0 || !den.is_finite() {
            return Err(SolverError::DenominatorVanished { y: eta, value: den });
        }
        let f1 = -ri * ri * (mf * ri + 2.0 * slm);
        let f2 = -slm * qq * mean / den;
        let f3 = (nf - 1.0) * h_tilde[i] * qq.powf(1.5) * eta;
        g.push(f1 + f2 + f3);
    }
    let w = weighted_cumulative(grid, &g, l + m - 1);
    Ok(scale_back(grid, w, (l + m) as i32))
}

/// Axis-contact chart of a product curve meeting `y = 0` at `x0 = event.contact_point.0 > 0`.
///
/// `l = 0` is accepted and reproduces the rotational chart for `n = m + 2`.
pub fn solve_case_a(
    h: &dyn MeanCurvature,
    l: u32,
    m: u32,
    event: &SingularEvent,
    orientation: f64,
    cfg: &SolverConfig,
) -> Result<SingularChart> {
    if event.kind != SingularEventKind::AxisContact {
        return Err(SolverError::InvalidInput(format!(
            "case (a) needs an axis contact, got {:?}",
            event.kind
        )));
    }
    let x0 = event.contact_point.0;
    if l > 0 && !(x0 > 0.0) {
        return Err(SolverError::InvalidInput(format!(
            "case (a) needs x0 > 0, got {x0}"
        )));
    }
    let orientation = check_orientation(orientation)?;
    let width_cap = if l > 0 {
        (x0 / cfg.norm_bound_m).sqrt()
    } else {
        f64::INFINITY
    };
    let apply = move |grid: &ChartGrid, u: &[f64], ht: &[f64]| psi_apply(u, ht, l, m, x0, grid);
    let problem = PicardProblem {
        case: ChartCase::AxisA { l, m, x0 },
        shift: 0.0,
        x_start: x0,
        b: event.s_event,
        x_b: x0,
        orientation,
        h,
        width_cap,
        apply: &apply,
    };
    solve_chart(&problem, cfg).map_err(|e| e.at(event.s_event))
}

/// Origin chart `q = sqrt(l/m) + r(y)`, `x(y) = int_0^y q`.
pub fn solve_case_b(
    h: &dyn MeanCurvature,
    l: u32,
    m: u32,
    event: &SingularEvent,
    orientation: f64,
    cfg: &SolverConfig,
) -> Result<SingularChart> {
    if event.kind != SingularEventKind::OriginContact {
        return Err(SolverError::InvalidInput(format!(
            "case (b) needs an origin contact, got {:?}",
            event.kind
        )));
    }
    if l < 1 || m < 1 {
        return Err(SolverError::InvalidInput("origin chart needs l, m >= 1".into()));
    }
    let orientation = check_orientation(orientation)?;
    let a = (l as f64 / m as f64).sqrt();
    let apply = move |grid: &ChartGrid, u: &[f64], ht: &[f64]| theta_apply(u, ht, l, m, grid);
    let problem = PicardProblem {
        case: ChartCase::OriginB { l, m },
        shift: a,
        x_start: 0.0,
        b: event.s_event,
        x_b: 0.0,
        orientation,
        h,
        // M Y < sqrt(l/m), with margin
        width_cap: 0.5 * a / cfg.norm_bound_m,
        apply: &apply,
    };
    solve_chart(&problem, cfg).map_err(|e| e.at(event.s_event))
}

/// Outgoing chart after a product-curve axis contact (reflection in `y`, hence `-h`).
pub fn continue_through_axis_lm(
    chart_incoming: &SingularChart,
    h: &dyn MeanCurvature,
    l: u32,
    m: u32,
    cfg: &SolverConfig,
) -> Result<Continuation> {
    let event = SingularEvent {
        kind: SingularEventKind::AxisContact,
        s_event: chart_incoming.b,
        contact_point: (chart_incoming.x_b, 0.0),
        incoming_slope_sq: 0.0,
    };
    let reflected = Scaled { inner: h, sign: -1.0 };
    let chart = solve_case_a(&reflected, l, m, &event, 1.0, cfg)?;
    let state = chart.state_at_node(chart.match_index());
    Ok(Continuation { chart, state })
}

/// Outgoing chart after an origin passage.
///
/// The continued curve is point-reflected into the positive quadrant, which leaves the
/// equation (and `h`) unchanged; the outgoing chart has `x' -> +sqrt(l/(l+m))`.
pub fn continue_through_origin(
    chart_incoming: &SingularChart,
    h: &dyn MeanCurvature,
    l: u32,
    m: u32,
    cfg: &SolverConfig,
) -> Result<Continuation> {
    let event = SingularEvent {
        kind: SingularEventKind::OriginContact,
        s_event: chart_incoming.b,
        contact_point: (0.0, 0.0),
        incoming_slope_sq: l as f64 / (l + m) as f64,
    };
    let chart = solve_case_b(h, l, m, &event, 1.0, cfg)?;
    let state = chart.state_at_node(chart.match_index());
    Ok(Continuation { chart, state })
}
