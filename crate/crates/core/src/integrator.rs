//! Dormand–Prince 5(4) integration of the arc-length system with singular-set monitors.

use serde::{Deserialize, Serialize};

use crate::curve::{CurveState, Geometry, SingularEvent, SingularEventKind, SolverConfig};
use crate::error::{Result, SolverError};
use crate::hfield::MeanCurvature;

/// Signed curvature `kappa` with `(x'', y'') = kappa (-y', x')`.
pub fn curvature(state: &CurveState, geometry: Geometry, h_val: f64) -> Result<f64> {
    let axis = || SolverError::DivisionByAxis {
        x: state.x,
        y: state.y,
    };
    match geometry {
        Geometry::Rot { n } => {
            if state.y <= 0.0 {
                return Err(axis());
            }
            let n = n as f64;
            Ok((n - 2.0) * state.xp / state.y - (n - 1.0) * h_val)
        }
        Geometry::Product { l, m } => {
            if state.x <= 0.0 || state.y <= 0.0 {
                return Err(axis());
            }
            let n = (l + m + 2) as f64;
            Ok(m as f64 * state.xp / state.y - l as f64 * state.yp / state.x - (n - 1.0) * h_val)
        }
    }
}

/// Right-hand side `(x', y', x'', y'')` of the first-order system.
pub fn derivative_field(
    state: &CurveState,
    geometry: Geometry,
    h: &dyn MeanCurvature,
) -> Result<[f64; 4]> {
    let k = curvature(state, geometry, h.eval(state.s))?;
    Ok([state.xp, state.yp, -k * state.yp, k * state.xp])
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

fn pack(st: &CurveState) -> [f64; 4] {
    [st.x, st.y, st.xp, st.yp]
}

/// One Dormand–Prince step of signed length `step`. Returns the (unnormalized) fifth-order
/// state and the scaled error norm; a norm `<= 1` means the step meets `tol`.
pub fn dp_step(
    state: &CurveState,
    step: f64,
    geometry: Geometry,
    h: &dyn MeanCurvature,
    tol: f64,
) -> Result<(CurveState, f64)> {
    let y0 = pack(state);
    let mut k = [[0.0; 4]; 7];
    for i in 0..7 {
        let mut yi = y0;
        for (j, kj) in k.iter().enumerate().take(i) {
            for c in 0..4 {
                yi[c] += step * A[i][j] * kj[c];
            }
        }
        let st = CurveState::new(state.s + C[i] * step, yi[0], yi[1], yi[2], yi[3]);
        k[i] = derivative_field(&st, geometry, h)?;
    }
    let mut y5 = y0;
    let mut err = 0.0f64;
    for c in 0..4 {
        let mut d5 = 0.0;
        let mut d4 = 0.0;
        for i in 0..7 {
            d5 += B5[i] * k[i][c];
            d4 += B4[i] * k[i][c];
        }
        y5[c] += step * d5;
        let scale = tol + tol * y0[c].abs().max(y5[c].abs());
        err = err.max((step * (d5 - d4)).abs() / scale);
    }
    if !err.is_finite() || y5.iter().any(|v| !v.is_finite()) {
        return Err(SolverError::StepSizeUnderflow { s: state.s, step });
    }
    Ok((
        CurveState::new(state.s + step, y5[0], y5[1], y5[2], y5[3]),
        err,
    ))
}

/// Threshold below which the origin monitor fires. Widened for lopsided `l/m` so that a
/// ray into the origin trips it before either axis monitor.
pub fn origin_threshold(geometry: Geometry, cfg: &SolverConfig) -> f64 {
    match geometry {
        Geometry::Rot { .. } => cfg.origin_eps,
        Geometry::Product { l, m } => {
            let ratio = (l as f64 / m as f64).max(m as f64 / l as f64);
            cfg.origin_eps.max(1.5 * cfg.axis_eps * (1.0 + ratio).sqrt())
        }
    }
}

/// Which singular set (if any) the state is inside the detection band of.
pub fn monitor(state: &CurveState, geometry: Geometry, cfg: &SolverConfig) -> Option<SingularEventKind> {
    match geometry {
        Geometry::Rot { .. } => (state.y < cfg.axis_eps).then_some(SingularEventKind::AxisContact),
        Geometry::Product { .. } => {
            let rho = state.x.hypot(state.y);
            if rho < origin_threshold(geometry, cfg) {
                Some(SingularEventKind::OriginContact)
            } else if state.y < cfg.axis_eps {
                Some(SingularEventKind::AxisContact)
            } else if state.x < cfg.axis_eps {
                Some(SingularEventKind::YAxisContact)
            } else {
                None
            }
        }
    }
}

fn monitor_value(
    state: &CurveState,
    kind: SingularEventKind,
    geometry: Geometry,
    cfg: &SolverConfig,
) -> f64 {
    match kind {
        SingularEventKind::AxisContact => state.y - cfg.axis_eps,
        SingularEventKind::YAxisContact => state.x - cfg.axis_eps,
        SingularEventKind::OriginContact => {
            let r = origin_threshold(geometry, cfg);
            state.x * state.x + state.y * state.y - r * r
        }
    }
}

/// Outcome of the event monitor for one integration run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventDetection {
    pub triggered: bool,
    pub kind: Option<SingularEventKind>,
    /// Arc lengths of the last state outside and the first state inside the band.
    pub s_bracket: (f64, f64),
    /// Last accepted state outside the band (the left bracket end).
    pub left: CurveState,
}

/// Optional output grid `s = origin + k * ds`; when set, steps are clipped so that every
/// grid point is hit exactly and only grid points (plus the run end) are recorded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleGrid {
    pub origin: f64,
    pub ds: f64,
}

impl SampleGrid {
    /// First grid point strictly beyond `s` in direction `dir`.
    pub fn next_after(&self, s: f64, dir: f64) -> f64 {
        let t = (s - self.origin) / self.ds;
        let slack = 1e-9;
        let k = if dir > 0.0 {
            (t + slack).floor() + 1.0
        } else {
            (t - slack).ceil() - 1.0
        };
        self.origin + k * self.ds
    }

    pub fn contains(&self, s: f64) -> bool {
        let t = (s - self.origin) / self.ds;
        (t - t.round()).abs() < 1e-9
    }
}

/// Integrates from `start` toward `s_limit` (either direction) recording every accepted step,
/// stopping early when a singular-set monitor fires.
pub fn integrate_until_event(
    start: CurveState,
    geometry: Geometry,
    h: &dyn MeanCurvature,
    s_limit: f64,
    cfg: &SolverConfig,
) -> Result<(Vec<CurveState>, EventDetection)> {
    integrate_sampled(start, geometry, h, s_limit, cfg, None)
}

/// As [`integrate_until_event`], optionally recording only on an output grid.
pub fn integrate_sampled(
    start: CurveState,
    geometry: Geometry,
    h: &dyn MeanCurvature,
    s_limit: f64,
    cfg: &SolverConfig,
    grid: Option<SampleGrid>,
) -> Result<(Vec<CurveState>, EventDetection)> {
    let mut samples = vec![start];
    let mut state = start;
    let quiet = EventDetection {
        triggered: false,
        kind: None,
        s_bracket: (s_limit, s_limit),
        left: start,
    };
    let dir = (s_limit - start.s).signum();
    if s_limit == start.s {
        return Ok((samples, quiet));
    }
    let mut h_abs = cfg.rk_max_step.min(0.01);
    let mut prev_err = 1.0f64;
    loop {
        let remaining = (s_limit - state.s) * dir;
        if remaining <= 1e-14 * (1.0 + state.s.abs()) {
            break;
        }
        let mut target = state.s + dir * h_abs.min(remaining);
        let mut on_grid = false;
        if let Some(g) = grid {
            let next = g.next_after(state.s, dir);
            if (next - target) * dir <= 0.0 {
                target = next;
                on_grid = true;
            }
        }
        let ends_run = (s_limit - target) * dir <= 1e-14 * (1.0 + state.s.abs());
        if ends_run {
            target = s_limit;
        }
        let step = target - state.s;
        let floor = 1e-12 * state.s.abs().max(1.0);
        if step.abs() < floor && !ends_run && !on_grid {
            return Err(SolverError::StepSizeUnderflow { s: state.s, step }.at(state.s));
        }
        match dp_step(&state, step, geometry, h, cfg.rk_tol) {
            Ok((next, err)) if err <= 1.0 => {
                let mut next = next.renormalized();
                next.s = target;
                let factor = if err == 0.0 {
                    5.0
                } else {
                    (0.9 * err.powf(-0.7 / 5.0) * prev_err.powf(0.4 / 5.0)).clamp(0.2, 5.0)
                };
                prev_err = err.max(1e-4);
                if !(on_grid && step.abs() < h_abs) {
                    h_abs = (step.abs() * factor).min(cfg.rk_max_step);
                }
                if let Some(kind) = monitor(&next, geometry, cfg) {
                    let det = EventDetection {
                        triggered: true,
                        kind: Some(kind),
                        s_bracket: (state.s, next.s),
                        left: state,
                    };
                    return Ok((samples, det));
                }
                state = next;
                if grid.is_none() || on_grid || ends_run {
                    samples.push(state);
                }
            }
            Ok((_, err)) => {
                let factor = (0.9 * err.powf(-0.2)).clamp(0.1, 0.5);
                h_abs = step.abs() * factor;
                if h_abs < floor {
                    return Err(SolverError::StepSizeUnderflow { s: state.s, step: h_abs }.at(state.s));
                }
            }
            Err(_) => {
                h_abs = step.abs() * 0.5;
                if h_abs < floor {
                    return Err(SolverError::StepSizeUnderflow { s: state.s, step: h_abs }.at(state.s));
                }
            }
        }
    }
    let mut det = quiet;
    det.left = state;
    Ok((samples, det))
}

/// A located event together with the state where the arc-length chart stopped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefinedEvent {
    pub event: SingularEvent,
    /// State on the detection threshold (in the caller's frame).
    pub crossing: CurveState,
}

/// Tolerance on the observed limiting slope.
pub const SLOPE_LIMIT_TOL: f64 = 0.05;

/// Bisects the monitored coordinate inside `detection.s_bracket` and extrapolates to the
/// contact point.
pub fn refine_event(
    tail: &[CurveState],
    detection: &EventDetection,
    geometry: Geometry,
    h: &dyn MeanCurvature,
    cfg: &SolverConfig,
) -> Result<SingularEvent> {
    refine_event_detailed(tail, detection, geometry, h, cfg).map(|r| r.event)
}

pub fn refine_event_detailed(
    _tail: &[CurveState],
    detection: &EventDetection,
    geometry: Geometry,
    h: &dyn MeanCurvature,
    cfg: &SolverConfig,
) -> Result<RefinedEvent> {
    let kind = match (detection.triggered, detection.kind) {
        (true, Some(k)) => k,
        _ => {
            return Err(SolverError::InvalidInput(
                "refine_event needs a triggered detection".into(),
            ))
        }
    };
    let left = detection.left;
    let (mut lo, mut hi) = detection.s_bracket;
    let dir = (hi - lo).signum();
    let advance = |s: f64| -> Result<CurveState> {
        let (mut st, _) = dp_step(&left, s - left.s, geometry, h, cfg.rk_tol)?;
        st.s = s;
        Ok(st.renormalized())
    };
    let tol = cfg.rk_tol * (1.0 + left.s.abs());
    while (hi - lo).abs() > tol {
        let mid = 0.5 * (lo + hi);
        let inside = match advance(mid) {
            Ok(st) => monitor_value(&st, kind, geometry, cfg) < 0.0,
            Err(_) => true,
        };
        if inside {
            hi = mid;
        } else {
            lo = mid;
        }
        if mid == lo && mid == hi {
            break;
        }
    }
    let crossing = advance(lo)?;
    let (event, observed, expected) = match kind {
        SingularEventKind::AxisContact => {
            let q = crossing.xp / crossing.yp;
            let b = crossing.s + dir * crossing.y * (1.0 + q * q / 6.0);
            let xb = crossing.x - q * crossing.y / 2.0;
            let ev = SingularEvent {
                kind,
                s_event: b,
                contact_point: (xb, 0.0),
                incoming_slope_sq: crossing.xp * crossing.xp,
            };
            (ev, crossing.xp * crossing.xp, 0.0)
        }
        SingularEventKind::YAxisContact => {
            let q = crossing.yp / crossing.xp;
            let b = crossing.s + dir * crossing.x * (1.0 + q * q / 6.0);
            let yb = crossing.y - q * crossing.x / 2.0;
            let ev = SingularEvent {
                kind,
                s_event: b,
                contact_point: (0.0, yb),
                incoming_slope_sq: crossing.yp * crossing.yp,
            };
            (ev, crossing.yp * crossing.yp, 0.0)
        }
        SingularEventKind::OriginContact => {
            let (l, m) = match geometry {
                Geometry::Product { l, m } => (l as f64, m as f64),
                Geometry::Rot { .. } => {
                    return Err(SolverError::InvalidInput(
                        "origin contact is only defined for product geometry".into(),
                    ))
                }
            };
            let rho = crossing.x.hypot(crossing.y);
            let ev = SingularEvent {
                kind,
                s_event: crossing.s + dir * rho,
                contact_point: (0.0, 0.0),
                incoming_slope_sq: crossing.xp * crossing.xp,
            };
            (ev, crossing.xp * crossing.xp, l / (l + m))
        }
    };
    if (observed - expected).abs() > SLOPE_LIMIT_TOL {
        return Err(SolverError::LimitMismatch {
            kind,
            observed,
            expected,
            tolerance: SLOPE_LIMIT_TOL,
        }
        .at(crossing.s));
    }
    Ok(RefinedEvent { event, crossing })
}
