//! Shared domain types and pointwise residuals of the generating-curve equations.
//!
//! Conventions: `(x(s), y(s))` is parametrized by arc length. For `O(n-1)`-type
//! hypersurfaces the orbit radius is `y`; for `O(l+1) x O(m+1)`-type the orbit radii are
//! `x` (sphere `S^l`) and `y` (sphere `S^m`).

use serde::{Deserialize, Serialize};

use crate::error::{Result, SolverError};
use crate::hfield::HField;

/// Symmetry type of the hypersurface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Geometry {
    /// `O(n-1)`-type rotational hypersurface in `R^n`.
    Rot { n: u32 },
    /// `O(l+1) x O(m+1)`-type hypersurface in `R^(l+m+2)`.
    Product { l: u32, m: u32 },
}

impl Geometry {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Geometry::Rot { n } if n < 3 => Err(SolverError::InvalidInput(format!(
                "rotational geometry needs n >= 3, got {n}"
            ))),
            Geometry::Product { l, m } if l < 1 || m < 1 => Err(SolverError::InvalidInput(
                format!("product geometry needs l, m >= 1, got l={l}, m={m}"),
            )),
            _ => Ok(()),
        }
    }

    /// Dimension `n` of the ambient Euclidean space.
    pub fn ambient_dim(&self) -> u32 {
        match *self {
            Geometry::Rot { n } => n,
            Geometry::Product { l, m } => l + m + 2,
        }
    }
}

/// One point of the arc-length parametrized generating curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveState {
    pub s: f64,
    pub x: f64,
    pub y: f64,
    pub xp: f64,
    pub yp: f64,
}

impl CurveState {
    pub fn new(s: f64, x: f64, y: f64, xp: f64, yp: f64) -> Self {
        CurveState { s, x, y, xp, yp }
    }

    pub fn speed_defect(&self) -> f64 {
        (self.xp * self.xp + self.yp * self.yp - 1.0).abs()
    }

    /// Projects the tangent back onto the unit circle.
    pub fn renormalized(mut self) -> Self {
        let norm = self.xp.hypot(self.yp);
        self.xp /= norm;
        self.yp /= norm;
        self
    }

    pub fn position_distance(&self, other: &CurveState) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn tangent_distance(&self, other: &CurveState) -> f64 {
        (self.xp - other.xp).hypot(self.yp - other.yp)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SingularEventKind {
    /// `y -> 0`
    AxisContact,
    /// `x -> 0` with `y` bounded away from zero (product geometry only)
    YAxisContact,
    /// `(x, y) -> (0, 0)` (product geometry only)
    OriginContact,
}

/// A located contact of the curve with a singular set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingularEvent {
    pub kind: SingularEventKind,
    pub s_event: f64,
    pub contact_point: (f64, f64),
    /// Observed `x'^2` (`y'^2` for y-axis contact) where the arc-length chart stopped.
    pub incoming_slope_sq: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChartKind {
    ArcLength,
    YParametrized,
}

impl ChartKind {
    pub fn label(&self) -> &'static str {
        match self {
            ChartKind::ArcLength => "arc-length",
            ChartKind::YParametrized => "y-parametrized",
        }
    }
}

/// A run of samples produced by one chart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub samples: Vec<CurveState>,
    pub chart: ChartKind,
    /// Signs `(fx, fy)` with signed coordinates `(fx * x, fy * y)`; samples are stored folded
    /// into the admissible quadrant.
    pub fold: (f64, f64),
}

/// Diagnostics recorded when a singular chart is stitched into the curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StitchReport {
    /// Position gap between the last arc-length sample and the incoming chart.
    pub position_jump: f64,
    /// Tangent gap at the same point.
    pub tangent_jump: f64,
    /// Total correction applied to the extrapolated contact `(b, x_b)` while re-anchoring.
    pub anchor_shift: f64,
    pub chart_width: f64,
    pub picard_iterations: usize,
    pub contraction: f64,
}

/// A globally extended generating curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileCurve {
    pub segments: Vec<Segment>,
    pub events: Vec<SingularEvent>,
    pub stitches: Vec<StitchReport>,
    pub geometry: Geometry,
    pub h: HField,
    pub initial: CurveState,
}

impl ProfileCurve {
    /// All samples in increasing arc length.
    pub fn samples(&self) -> impl Iterator<Item = &CurveState> + '_ {
        self.segments.iter().flat_map(|seg| seg.samples.iter())
    }

    /// Samples tagged with their segment index and chart.
    pub fn tagged_samples(&self) -> impl Iterator<Item = (usize, ChartKind, &CurveState)> + '_ {
        self.segments
            .iter()
            .enumerate()
            .flat_map(|(i, seg)| seg.samples.iter().map(move |p| (i, seg.chart, p)))
    }

    /// Samples in signed (unfolded) coordinates.
    pub fn signed_samples(&self) -> Vec<CurveState> {
        self.segments
            .iter()
            .flat_map(|seg| {
                let (fx, fy) = seg.fold;
                seg.samples.iter().map(move |p| CurveState {
                    s: p.s,
                    x: fx * p.x,
                    y: fy * p.y,
                    xp: fx * p.xp,
                    yp: fy * p.yp,
                })
            })
            .collect()
    }

    pub fn s_range(&self) -> Option<(f64, f64)> {
        let first = self.samples().next()?;
        let last = self.samples().last()?;
        Some((first.s, last.s))
    }

    pub fn min_y(&self) -> f64 {
        self.samples().map(|p| p.y).fold(f64::INFINITY, f64::min)
    }

    /// State at arc length `s`: an exact sample when one sits at `s`, otherwise cubic
    /// Hermite interpolation of the position with a renormalized interpolated tangent.
    pub fn state_at(&self, s: f64) -> Option<CurveState> {
        let pts: Vec<&CurveState> = self.samples().collect();
        let (first, last) = (pts.first()?, pts.last()?);
        let tol = 1e-12 * (1.0 + s.abs());
        if s < first.s - tol || s > last.s + tol {
            return None;
        }
        let idx = pts.partition_point(|p| p.s < s - tol);
        if idx < pts.len() && (pts[idx].s - s).abs() <= tol {
            return Some(*pts[idx]);
        }
        let (a, b) = (pts[idx.max(1) - 1], pts[idx.min(pts.len() - 1)]);
        let h = b.s - a.s;
        if h <= 0.0 {
            return Some(*a);
        }
        let t = (s - a.s) / h;
        let (h00, h10, h01, h11) = (
            2.0 * t.powi(3) - 3.0 * t * t + 1.0,
            t.powi(3) - 2.0 * t * t + t,
            -2.0 * t.powi(3) + 3.0 * t * t,
            t.powi(3) - t * t,
        );
        let x = h00 * a.x + h10 * h * a.xp + h01 * b.x + h11 * h * b.xp;
        let y = h00 * a.y + h10 * h * a.yp + h01 * b.y + h11 * h * b.yp;
        // derivative of the Hermite cubic for the tangent
        let (d00, d10, d01, d11) = (
            (6.0 * t * t - 6.0 * t) / h,
            3.0 * t * t - 4.0 * t + 1.0,
            (-6.0 * t * t + 6.0 * t) / h,
            3.0 * t * t - 2.0 * t,
        );
        let xp = d00 * a.x + d10 * a.xp + d01 * b.x + d11 * b.xp;
        let yp = d00 * a.y + d10 * a.yp + d01 * b.y + d11 * b.yp;
        Some(CurveState::new(s, x, y, xp, yp).renormalized())
    }
}

/// Numerical knobs shared by the integrator, the singular charts and the engine.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub rk_tol: f64,
    pub rk_max_step: f64,
    pub axis_eps: f64,
    pub origin_eps: f64,
    pub picard_tol: f64,
    pub picard_max_iter: usize,
    #[serde(rename = "chart_Y_init")]
    pub chart_y_init: f64,
    #[serde(rename = "chart_Y_shrink")]
    pub chart_y_shrink: f64,
    #[serde(rename = "norm_bound_M")]
    pub norm_bound_m: f64,
    pub stitch_tol: f64,
    /// Uniform chart grid node count on `(0, Y]`.
    pub chart_nodes: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            rk_tol: 1e-10,
            rk_max_step: 0.05,
            axis_eps: 1e-3,
            origin_eps: 2e-3,
            picard_tol: 1e-10,
            picard_max_iter: 200,
            chart_y_init: 0.05,
            chart_y_shrink: 0.5,
            norm_bound_m: 10.0,
            stitch_tol: 1e-6,
            chart_nodes: 256,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("rk_tol", self.rk_tol),
            ("rk_max_step", self.rk_max_step),
            ("axis_eps", self.axis_eps),
            ("origin_eps", self.origin_eps),
            ("picard_tol", self.picard_tol),
            ("chart_Y_init", self.chart_y_init),
            ("norm_bound_M", self.norm_bound_m),
            ("stitch_tol", self.stitch_tol),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(SolverError::InvalidInput(format!("{name} must be > 0, got {v}")));
            }
        }
        if !(self.chart_y_shrink > 0.0 && self.chart_y_shrink < 1.0) {
            return Err(SolverError::InvalidInput(format!(
                "chart_Y_shrink must lie in (0, 1), got {}",
                self.chart_y_shrink
            )));
        }
        if self.picard_max_iter == 0 || self.chart_nodes < 4 {
            return Err(SolverError::InvalidInput(
                "picard_max_iter must be >= 1 and chart_nodes >= 4".into(),
            ));
        }
        Ok(())
    }
}

/// Second derivatives `(x'', y'')` passed to the residuals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondDerivs {
    pub xpp: f64,
    pub ypp: f64,
}

/// Residual of the `O(n-1)` equation
/// `(n-1) H = (n-2) x'/y + x'' y' - x' y''`; zero on solutions.
pub fn residual_rot(state: &CurveState, d2: SecondDerivs, n: u32, h_val: f64) -> Result<f64> {
    if state.y == 0.0 {
        return Err(SolverError::DivisionByAxis {
            x: state.x,
            y: state.y,
        });
    }
    let n = n as f64;
    Ok((n - 1.0) * h_val
        - (n - 2.0) * state.xp / state.y
        - (d2.xpp * state.yp - state.xp * d2.ypp))
}

/// Residual of the `O(l+1) x O(m+1)` equation
/// `l y'/x - m x'/y - (x'' y' - x' y'') + (n-1) H = 0`, `n = l + m + 2`.
pub fn residual_lm(
    state: &CurveState,
    d2: SecondDerivs,
    l: u32,
    m: u32,
    h_val: f64,
) -> Result<f64> {
    if state.x == 0.0 || state.y == 0.0 {
        return Err(SolverError::DivisionByAxis {
            x: state.x,
            y: state.y,
        });
    }
    let n = (l + m + 2) as f64;
    Ok(l as f64 * state.yp / state.x - m as f64 * state.xp / state.y
        - (d2.xpp * state.yp - state.xp * d2.ypp)
        + (n - 1.0) * h_val)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};

    #[test]
    fn cylinder_residual_vanishes() {
        for n in 3..8u32 {
            let c = 1.7;
            let st = CurveState::new(0.3, 0.3, c, 1.0, 0.0);
            let h = (n as f64 - 2.0) / ((n as f64 - 1.0) * c);
            let r = residual_rot(&st, SecondDerivs { xpp: 0.0, ypp: 0.0 }, n, h).unwrap();
            assert!(r.abs() < 1e-15, "n={n} r={r}");
        }
    }

    #[test]
    fn unit_circle_rot_residual_vanishes() {
        let s = FRAC_PI_4;
        let st = CurveState::new(s, s.sin(), s.cos(), s.cos(), -s.sin());
        let d2 = SecondDerivs { xpp: -s.sin(), ypp: -s.cos() };
        let r = residual_rot(&st, d2, 3, 1.0).unwrap();
        assert!(r.abs() < 1e-15);
    }

    #[test]
    fn perturbed_cylinder_matches_independent_formula() {
        let (n, c) = (4u32, 2.0);
        let yp: f64 = 0.1;
        let xp = (1.0 - yp * yp).sqrt();
        let st = CurveState::new(0.0, 0.0, c, xp, yp);
        let h = (n as f64 - 2.0) / ((n as f64 - 1.0) * c);
        let r = residual_rot(&st, SecondDerivs { xpp: 0.0, ypp: 0.0 }, n, h).unwrap();
        let expected = 3.0 * h - 2.0 * xp / c;
        assert!(r != 0.0);
        assert!((r - expected).abs() <= 1e-13 * expected.abs());
    }

    #[test]
    fn rot_residual_rejects_axis() {
        let st = CurveState::new(0.0, 1.0, 0.0, 0.0, 1.0);
        assert!(matches!(
            residual_rot(&st, SecondDerivs { xpp: 0.0, ypp: 0.0 }, 3, 1.0),
            Err(SolverError::DivisionByAxis { .. })
        ));
    }

    #[test]
    fn minimal_cone_lm_residual_vanishes() {
        let st = CurveState::new(1.0, FRAC_1_SQRT_2, FRAC_1_SQRT_2, FRAC_1_SQRT_2, FRAC_1_SQRT_2);
        let r = residual_lm(&st, SecondDerivs { xpp: 0.0, ypp: 0.0 }, 1, 1, 0.0).unwrap();
        assert!(r.abs() < 1e-15);
    }

    #[test]
    fn lm_sphere_residual() {
        let s = FRAC_PI_4;
        let st = CurveState::new(s, s.cos(), s.sin(), -s.sin(), s.cos());
        let d2 = SecondDerivs { xpp: -s.cos(), ypp: -s.sin() };
        let r = residual_lm(&st, d2, 1, 1, -1.0).unwrap();
        assert!(r.abs() < 1e-14);
        // (l+m+1)/R + (n-1)h with h = 0
        let r0 = residual_lm(&st, d2, 1, 1, 0.0).unwrap();
        assert!((r0 - 3.0).abs() < 1e-14, "{r0}");
    }

    #[test]
    fn lm_residual_rejects_axes() {
        let d2 = SecondDerivs { xpp: 0.0, ypp: 0.0 };
        assert!(residual_lm(&CurveState::new(0.0, 0.0, 1.0, 0.0, 1.0), d2, 1, 1, 0.0).is_err());
        assert!(residual_lm(&CurveState::new(0.0, 1.0, 0.0, 0.0, 1.0), d2, 1, 1, 0.0).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(SolverConfig::default().validate().is_ok());
        let bad = SolverConfig { chart_y_shrink: 1.0, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = SolverConfig { rk_tol: 0.0, ..Default::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn geometry_validation() {
        assert!(Geometry::Rot { n: 2 }.validate().is_err());
        assert!(Geometry::Product { l: 0, m: 2 }.validate().is_err());
        assert_eq!(Geometry::Product { l: 1, m: 2 }.ambient_dim(), 5);
    }

    proptest! {
        #[test]
        fn lm_with_l_zero_reduces_to_rot(
            n in 3u32..9,
            x in 0.1f64..5.0,
            y in 0.05f64..5.0,
            theta in 0.0f64..std::f64::consts::TAU,
            xpp in -3.0f64..3.0,
            ypp in -3.0f64..3.0,
            h in -2.0f64..2.0,
        ) {
            let st = CurveState::new(0.0, x, y, theta.cos(), theta.sin());
            let d2 = SecondDerivs { xpp, ypp };
            let a = residual_lm(&st, d2, 0, n - 2, h).unwrap();
            let b = residual_rot(&st, d2, n, h).unwrap();
            prop_assert!((a - b).abs() <= 1e-13 * (1.0 + a.abs().max(b.abs())));
        }

        #[test]
        fn residual_rot_matches_recomputation(
            n in 3u32..9,
            y in 0.05f64..5.0,
            theta in 0.0f64..std::f64::consts::TAU,
            xpp in -3.0f64..3.0,
            ypp in -3.0f64..3.0,
            h in -2.0f64..2.0,
        ) {
            let (xp, yp) = (theta.cos(), theta.sin());
            let st = CurveState::new(0.0, 0.0, y, xp, yp);
            let r = residual_rot(&st, SecondDerivs { xpp, ypp }, n, h).unwrap();
            // (x'' y' - x' y'') = (n-1) H - (n-2) x'/y on solutions
            let nf = n as f64;
            let lhs = (nf - 1.0) * h;
            let rhs = (nf - 2.0) * xp / y + xpp * yp - xp * ypp;
            prop_assert!((r - (lhs - rhs)).abs() <= 1e-13 * (1.0 + lhs.abs() + rhs.abs()));
        }
    }
}
