//! Global extension of generating curves through axis and origin contacts.
//!
//! The march works in the folded frame: samples always lie in `y > 0` (and `x > 0` for
//! product geometry). Each contact reflects the continuation back into that quadrant,
//! which flips the sign of `H` in the equation for axis contacts and keeps it for origin
//! passages. Segments record the fold signs so signed coordinates can be recovered.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chart::{
    continue_through_axis, continue_through_axis_lm, continue_through_origin, solve_case_a,
    solve_case_b, solve_singular_rot, Continuation, SingularChart,
};
use crate::curve::{
    ChartKind, CurveState, Geometry, ProfileCurve, Segment, SingularEvent, SingularEventKind,
    SolverConfig, StitchReport,
};
use crate::error::{Result, SolverError};
use crate::hfield::{HField, MeanCurvature, Scaled};
use crate::integrator::{dp_step, integrate_sampled, refine_event_detailed, SampleGrid};

/// Everything needed to reproduce one extension run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSpec {
    pub geometry: Geometry,
    pub h: HField,
    pub initial: CurveState,
    pub s_window: (f64, f64),
    #[serde(default)]
    pub cfg: SolverConfig,
    /// Output spacing in arc length; `0` records every accepted step and chart node.
    #[serde(default)]
    pub sample_ds: f64,
}

impl RunSpec {
    pub fn new(geometry: Geometry, h: HField, initial: CurveState, s_window: (f64, f64)) -> Self {
        RunSpec {
            geometry,
            h,
            initial,
            s_window,
            cfg: SolverConfig::default(),
            sample_ds: 0.0,
        }
    }

    /// The normalized family member through `(0, c)` with horizontal tangent.
    pub fn through_height(&self, c: f64) -> Self {
        RunSpec {
            initial: CurveState::new(0.0, 0.0, c, 1.0, 0.0),
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.geometry.validate()?;
        self.cfg.validate()?;
        let st = &self.initial;
        if st.speed_defect() > 1e-6 {
            return Err(SolverError::InvalidInput(format!(
                "initial tangent is not unit length (|t|^2 - 1 = {:e})",
                st.speed_defect()
            )));
        }
        let admissible = match self.geometry {
            Geometry::Rot { .. } => st.y > 0.0,
            Geometry::Product { .. } => st.x > 0.0 && st.y > 0.0,
        };
        if !admissible {
            return Err(SolverError::InvalidInput(format!(
                "initial point ({}, {}) is not strictly admissible",
                st.x, st.y
            )));
        }
        let (a, b) = self.s_window;
        if !(a <= st.s && st.s <= b) || !a.is_finite() || !b.is_finite() {
            return Err(SolverError::InvalidInput(format!(
                "window [{a}, {b}] must contain the initial arc length {}",
                st.s
            )));
        }
        if !(self.sample_ds >= 0.0 && self.sample_ds.is_finite()) {
            return Err(SolverError::InvalidInput("sample_ds must be >= 0".into()));
        }
        Ok(())
    }
}

struct March {
    segments: Vec<Segment>,
    events: Vec<SingularEvent>,
    stitches: Vec<StitchReport>,
}

/// Mapping between the physical folded frame and the frame a chart is solved in.
#[derive(Clone, Copy)]
struct Frame {
    swapped: bool,
}

impl Frame {
    fn apply(&self, st: CurveState) -> CurveState {
        if self.swapped {
            CurveState::new(st.s, st.y, st.x, st.yp, st.xp)
        } else {
            st
        }
    }

    fn geometry(&self, g: Geometry) -> Geometry {
        match (self.swapped, g) {
            (true, Geometry::Product { l, m }) => Geometry::Product { l: m, m: l },
            _ => g,
        }
    }
}

struct EventCharts {
    incoming: SingularChart,
    outgoing: Continuation,
    event: SingularEvent,
    stitch: StitchReport,
    frame: Frame,
}

fn solve_axis_chart(
    geometry: Geometry,
    h: &dyn MeanCurvature,
    event: &SingularEvent,
    orientation: f64,
    cfg: &SolverConfig,
) -> Result<SingularChart> {
    match geometry {
        Geometry::Rot { n } => solve_singular_rot(h, n, event, orientation, cfg),
        Geometry::Product { l, m } => solve_case_a(h, l, m, event, orientation, cfg),
    }
}

/// Solves the incoming chart through `crossing`, re-anchoring the contact so the chart
/// passes through the crossing state, then the outgoing chart.
fn chart_event(
    geometry: Geometry,
    h: &dyn MeanCurvature,
    crossing: CurveState,
    event: SingularEvent,
    cfg: &SolverConfig,
) -> Result<EventCharts> {
    let frame = Frame {
        swapped: event.kind == SingularEventKind::YAxisContact,
    };
    // swapping x and y turns the equation for H into the one for -H
    let sigma = if frame.swapped { -1.0 } else { 1.0 };
    let frame_h = Scaled { inner: h, sign: sigma };
    let fgeo = frame.geometry(geometry);
    let fcross = frame.apply(crossing);
    let mut fevent = match event.kind {
        SingularEventKind::YAxisContact => SingularEvent {
            kind: SingularEventKind::AxisContact,
            contact_point: (event.contact_point.1, 0.0),
            ..event
        },
        _ => event,
    };
    let is_origin = event.kind == SingularEventKind::OriginContact;
    let solve_in = |ev: &SingularEvent| -> Result<SingularChart> {
        if is_origin {
            match fgeo {
                Geometry::Product { l, m } => solve_case_b(&frame_h, l, m, ev, -1.0, cfg),
                Geometry::Rot { .. } => unreachable!("origin events only arise for product geometry"),
            }
        } else {
            solve_axis_chart(fgeo, &frame_h, ev, -1.0, cfg)
        }
    };
    let mut shift = 0.0f64;
    let mut incoming = solve_in(&fevent)?;
    for _ in 0..4 {
        if fcross.y > incoming.width {
            return Err(SolverError::ChartWidthUnderflow {
                width: incoming.width,
                cause: format!("chart does not reach the detection band (y = {})", fcross.y),
            }
            .at(crossing.s));
        }
        let p = incoming.state_at_y(fcross.y);
        let ds = fcross.s - p.s;
        let dx = if is_origin { 0.0 } else { fcross.x - p.x };
        if ds.abs() < 1e-14 * (1.0 + fcross.s.abs()) && dx.abs() < 1e-14 {
            break;
        }
        shift += ds.hypot(dx);
        fevent.s_event += ds;
        fevent.contact_point.0 += dx;
        incoming = solve_in(&fevent)?;
    }
    let p = incoming.state_at_y(fcross.y);
    let stitch = StitchReport {
        position_jump: (p.x - fcross.x).hypot(p.s - fcross.s),
        tangent_jump: p.tangent_distance(&fcross),
        anchor_shift: shift,
        chart_width: incoming.width,
        picard_iterations: incoming.stats.iterations,
        contraction: incoming.stats.contraction,
    };
    let outgoing = match (is_origin, fgeo) {
        (true, Geometry::Product { l, m }) => continue_through_origin(&incoming, &frame_h, l, m, cfg)?,
        (false, Geometry::Product { l, m }) => continue_through_axis_lm(&incoming, &frame_h, l, m, cfg)?,
        (false, Geometry::Rot { n }) => continue_through_axis(&incoming, &frame_h, n, cfg)?,
        (true, Geometry::Rot { .. }) => unreachable!("origin events only arise for product geometry"),
    };
    let restart_y = outgoing.state.y;
    let band = 2.0 * cfg.axis_eps;
    if restart_y <= band || (is_origin && outgoing.state.x <= band) {
        return Err(SolverError::ChartWidthUnderflow {
            width: outgoing.chart.width,
            cause: "chart too narrow to restart outside the detection band".into(),
        }
        .at(crossing.s));
    }
    let event = SingularEvent {
        s_event: fevent.s_event,
        contact_point: match event.kind {
            SingularEventKind::AxisContact => (fevent.contact_point.0, 0.0),
            SingularEventKind::YAxisContact => (0.0, fevent.contact_point.0),
            SingularEventKind::OriginContact => (0.0, 0.0),
        },
        ..event
    };
    Ok(EventCharts {
        incoming,
        outgoing,
        event,
        stitch,
        frame,
    })
}

fn grid_points(grid: SampleGrid, lo: f64, hi: f64, include_hi: bool) -> Vec<f64> {
    let mut out = Vec::new();
    let mut s = grid.next_after(lo, 1.0);
    while s < hi || (include_hi && s <= hi + 1e-12 * (1.0 + hi.abs())) {
        out.push(s);
        s = grid.next_after(s, 1.0);
    }
    out
}

/// Chart samples with `s` in `(lo, hi]` in increasing `s`.
fn chart_samples(
    chart: &SingularChart,
    frame: Frame,
    lo: f64,
    hi: f64,
    grid: Option<SampleGrid>,
) -> Vec<CurveState> {
    let mut out: Vec<CurveState> = match grid {
        Some(g) => grid_points(g, lo, hi, true)
            .into_iter()
            .filter_map(|s| chart.state_at_s(s))
            .collect(),
        None => {
            let mut v: Vec<CurveState> = (0..chart.grid.len())
                .map(|i| chart.state_at_node(i))
                .filter(|p| p.s > lo && p.s <= hi)
                .collect();
            v.sort_by(|a, b| a.s.total_cmp(&b.s));
            v
        }
    };
    for p in out.iter_mut() {
        *p = frame.apply(*p);
    }
    out
}

fn push_unique(samples: &mut Vec<CurveState>, p: CurveState) {
    if samples
        .last()
        .is_none_or(|last| p.s > last.s + 1e-12 * (1.0 + p.s.abs()))
    {
        samples.push(p);
    }
}

/// Marches forward from `start` (already in the folded frame) up to `s_end`.
fn march(
    geometry: Geometry,
    h: &dyn MeanCurvature,
    start: CurveState,
    s_end: f64,
    cfg: &SolverConfig,
    grid: Option<SampleGrid>,
) -> Result<March> {
    let mut out = March {
        segments: Vec::new(),
        events: Vec::new(),
        stitches: Vec::new(),
    };
    let mut fold = (1.0f64, 1.0f64);
    let mut state = start;
    let mut first = true;
    loop {
        let hs = fold.0 * fold.1;
        let heff = Scaled { inner: h, sign: hs };
        let (mut samples, det) =
            integrate_sampled(state, geometry, &heff, s_end, cfg, grid).map_err(|e| e.at(state.s))?;
        if grid.is_some() && !first {
            samples.remove(0);
        }
        first = false;
        if !det.triggered {
            out.segments.push(Segment {
                samples,
                chart: ChartKind::ArcLength,
                fold,
            });
            return Ok(out);
        }
        let refined = refine_event_detailed(&samples, &det, geometry, &heff, cfg)?;
        if let Some(grid) = grid {
            // grid points between the last accepted step and the crossing
            for s in grid_points(grid, det.left.s, refined.crossing.s, true) {
                let (mut p, _) = dp_step(&det.left, s - det.left.s, geometry, &heff, cfg.rk_tol)?;
                p.s = s;
                push_unique(&mut samples, p.renormalized());
            }
        }
        if let Some(prev) = out.events.last() {
            let spacing = refined.event.s_event - prev.s_event;
            if spacing < 10.0 * cfg.axis_eps {
                return Err(SolverError::EventAccumulation {
                    s: refined.event.s_event,
                    spacing,
                });
            }
        }
        let charts = chart_event(geometry, &heff, refined.crossing, refined.event, cfg)?;
        let b = charts.event.s_event;
        let restart = charts.frame.apply(charts.outgoing.state);

        let mut incoming = chart_samples(&charts.incoming, charts.frame, refined.crossing.s, b.min(s_end), grid);
        if b <= s_end {
            let mut contact = charts.frame.apply(charts.incoming.state_at_node(0));
            contact.s = b;
            push_unique(&mut incoming, contact);
        } else if let Some(p) = charts.incoming.state_at_s(s_end) {
            push_unique(&mut incoming, charts.frame.apply(p));
        }
        let new_fold = match charts.event.kind {
            SingularEventKind::AxisContact => (fold.0, -fold.1),
            SingularEventKind::YAxisContact => (-fold.0, fold.1),
            SingularEventKind::OriginContact => (-fold.0, -fold.1),
        };
        out.segments.push(Segment {
            samples,
            chart: ChartKind::ArcLength,
            fold,
        });
        out.segments.push(Segment {
            samples: incoming,
            chart: ChartKind::YParametrized,
            fold,
        });
        if b > s_end {
            return Ok(out);
        }
        out.events.push(charts.event);
        out.stitches.push(charts.stitch);
        fold = new_fold;

        let out_chart = &charts.outgoing.chart;
        let stop = restart.s >= s_end;
        let mut outgoing = if grid.is_some() {
            chart_samples(out_chart, charts.frame, b, restart.s.min(s_end), grid)
        } else {
            let mut v = chart_samples(out_chart, charts.frame, b, restart.s.min(s_end), None);
            // the restart state opens the next arc-length segment
            v.retain(|p| p.s < restart.s);
            v
        };
        if stop {
            if let Some(p) = out_chart.state_at_s(s_end) {
                push_unique(&mut outgoing, charts.frame.apply(p));
            }
        }
        out.segments.push(Segment {
            samples: outgoing,
            chart: ChartKind::YParametrized,
            fold,
        });
        if stop {
            return Ok(out);
        }
        state = restart;
    }
}

struct Reversed<'a> {
    inner: &'a dyn MeanCurvature,
}

impl MeanCurvature for Reversed<'_> {
    fn eval(&self, s: f64) -> f64 {
        -self.inner.eval(-s)
    }
}

fn reverse_state(p: CurveState) -> CurveState {
    CurveState::new(-p.s, p.x, p.y, -p.xp, -p.yp)
}

/// Extends the generating curve over `spec.s_window`.
pub fn extend(spec: &RunSpec) -> Result<ProfileCurve> {
    spec.validate()?;
    let cfg = &spec.cfg;
    let s0 = spec.initial.s;
    let grid = (spec.sample_ds > 0.0).then_some(SampleGrid {
        origin: s0,
        ds: spec.sample_ds,
    });
    let forward = march(spec.geometry, &spec.h, spec.initial, spec.s_window.1, cfg, grid)?;

    let mut segments = Vec::new();
    let mut events = Vec::new();
    let mut stitches = Vec::new();
    if spec.s_window.0 < s0 {
        // the reversed curve solves the same equation with H_rev(t) = -H(-t)
        let rev_h = Reversed { inner: &spec.h };
        let rev_grid = grid.map(|g| SampleGrid { origin: -g.origin, ds: g.ds });
        let back = march(
            spec.geometry,
            &rev_h,
            reverse_state(spec.initial),
            -spec.s_window.0,
            cfg,
            rev_grid,
        )?;
        for seg in back.segments.into_iter().rev() {
            let mut samples: Vec<CurveState> = seg.samples.into_iter().rev().map(reverse_state).collect();
            samples.retain(|p| p.s < s0);
            if !samples.is_empty() {
                segments.push(Segment { samples, ..seg });
            }
        }
        events.extend(back.events.into_iter().rev().map(|e| SingularEvent {
            s_event: -e.s_event,
            ..e
        }));
        stitches.extend(back.stitches.into_iter().rev());
    }
    segments.extend(forward.segments.into_iter().filter(|s| !s.samples.is_empty()));
    events.extend(forward.events);
    stitches.extend(forward.stitches);
    Ok(ProfileCurve {
        segments,
        events,
        stitches,
        geometry: spec.geometry,
        h: spec.h.clone(),
        initial: spec.initial,
    })
}

/// Runs [`extend`] for the family member through `(0, c)` for every `c`, in parallel.
pub fn sweep(template: &RunSpec, c_values: &[f64]) -> Vec<(f64, Result<ProfileCurve>)> {
    c_values
        .par_iter()
        .map(|&c| (c, extend(&template.through_height(c))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    #[test]
    fn sphere_chain_has_two_contacts() {
        let spec = RunSpec::new(
            Geometry::Rot { n: 3 },
            HField::constant(1.0),
            CurveState::new(0.0, 0.0, 1.0, 1.0, 0.0),
            (0.0, 2.0 * PI),
        );
        let curve = extend(&spec).unwrap();
        assert_eq!(curve.events.len(), 2);
        assert!((curve.events[0].s_event - PI / 2.0).abs() < 1e-4);
        assert!((curve.events[1].s_event - 1.5 * PI).abs() < 1e-4);
        let mut prev = f64::NEG_INFINITY;
        for p in curve.samples() {
            assert!(p.s > prev);
            prev = p.s;
            assert!((p.x - p.s.sin()).abs() < 1e-6, "s={} dx={}", p.s, p.x - p.s.sin());
            assert!((p.y - p.s.cos().abs()).abs() < 1e-6);
        }
    }

    #[test]
    fn cone_chain_through_origin() {
        let spec = RunSpec::new(
            Geometry::Product { l: 1, m: 1 },
            HField::constant(0.0),
            CurveState::new(0.0, 1.0, 1.0, -FRAC_1_SQRT_2, -FRAC_1_SQRT_2),
            (0.0, 4.0),
        );
        let curve = extend(&spec).unwrap();
        assert_eq!(curve.events.len(), 1);
        assert_eq!(curve.events[0].kind, SingularEventKind::OriginContact);
        let b = curve.events[0].s_event;
        assert!((b - 2f64.sqrt()).abs() < 1e-6);
        for p in curve.samples().filter(|p| p.s > b) {
            assert!((p.x - p.y).abs() < 1e-10);
            assert!((p.xp - FRAC_1_SQRT_2).abs() < 1e-10);
        }
    }

    #[test]
    fn backward_window_mirrors_even_h() {
        let mut spec = RunSpec::new(
            Geometry::Rot { n: 3 },
            HField::polynomial(vec![0.5, 0.0, 0.1]),
            CurveState::new(0.0, 0.0, 1.5, 1.0, 0.0),
            (-2.0, 2.0),
        );
        spec.sample_ds = 0.1;
        let curve = extend(&spec).unwrap();
        let pts: Vec<CurveState> = curve.samples().copied().collect();
        assert_eq!(pts.len(), 41);
        for k in 0..=20 {
            let (a, b) = (pts[20 - k], pts[20 + k]);
            assert!((a.s + b.s).abs() < 1e-12);
            assert!((a.x + b.x).abs() < 100.0 * spec.cfg.rk_tol);
            assert!((a.y - b.y).abs() < 100.0 * spec.cfg.rk_tol);
        }
    }

    #[test]
    fn rejects_inadmissible_start() {
        let spec = RunSpec::new(
            Geometry::Product { l: 1, m: 1 },
            HField::constant(0.0),
            CurveState::new(0.0, -1.0, 1.0, 1.0, 0.0),
            (0.0, 1.0),
        );
        assert!(matches!(extend(&spec), Err(SolverError::InvalidInput(_))));
    }

    #[test]
    fn empty_sweep() {
        let spec = RunSpec::new(
            Geometry::Rot { n: 3 },
            HField::constant(1.0),
            CurveState::new(0.0, 0.0, 1.0, 1.0, 0.0),
            (0.0, 1.0),
        );
        assert!(sweep(&spec, &[]).is_empty());
    }
}
