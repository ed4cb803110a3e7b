//! y-parametrized local solutions at singular contacts, obtained as fixed points of
//! Volterra-type integral operators on the weighted ball `sup |u(y)/y| <= M`.

use serde::{Deserialize, Serialize};

use crate::curve::{CurveState, SolverConfig};
use crate::error::{Result, SolverError};
use crate::hfield::MeanCurvature;
use crate::quadrature::{cumulative_trapezoid, lagrange_uniform, ChartGrid};

mod lm;
mod rot;

pub use lm::{
    continue_through_axis_lm, continue_through_origin, origin_slope, psi_apply, solve_case_a,
    solve_case_b, theta_apply,
};
pub use rot::{continue_through_axis, phi_apply, solve_singular_rot};

/// Smallest chart width tried before giving up.
pub const MIN_CHART_WIDTH: f64 = 1e-6;

/// Largest accepted ratio of successive Picard increments.
pub const MAX_CONTRACTION: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ChartCase {
    /// Axis contact of an `O(n-1)` curve.
    Rot { n: u32 },
    /// Axis contact of a product curve at `x = x0 > 0`.
    AxisA { l: u32, m: u32, x0: f64 },
    /// Passage of a product curve through the origin.
    OriginB { l: u32, m: u32 },
}

/// Convergence record of one chart solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PicardStats {
    pub iterations: usize,
    /// Largest ratio of successive increments above the noise floor.
    pub contraction: f64,
    /// `sup |u - T(u)| / y` at the returned iterate.
    pub residual: f64,
    /// `sup |u / y|`.
    pub norm: f64,
    /// Chart widths tried, in order; the last one was accepted.
    pub widths_tried: Vec<f64>,
    /// Increment history of the accepted width.
    pub increments: Vec<f64>,
}

/// A local chart `y -> (q(y), s(y), x(y))` on `[0, Y]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularChart {
    pub case: ChartCase,
    pub width: f64,
    pub grid: Vec<f64>,
    /// `q = dx/dy` at the nodes.
    pub q: Vec<f64>,
    /// Shifted unknown `r = q - sqrt(l/m)` (origin charts only).
    pub r: Option<Vec<f64>>,
    pub s_of_y: Vec<f64>,
    pub x_of_y: Vec<f64>,
    /// Sign of `dy/ds` along the chart.
    pub orientation: f64,
    /// Arc length at the contact.
    pub b: f64,
    /// Abscissa at the contact.
    pub x_b: f64,
    pub stats: PicardStats,
}

pub type SingularChartRot = SingularChart;
pub type SingularChartLM = SingularChart;

/// Outgoing chart plus the arc-length state where regular integration resumes.
#[derive(Debug, Clone, PartialEq)]
pub struct Continuation {
    pub chart: SingularChart,
    pub state: CurveState,
}

impl SingularChart {
    fn tangent(&self, q: f64) -> (f64, f64) {
        let d = (1.0 + q * q).sqrt();
        (self.orientation * q / d, self.orientation / d)
    }

    pub fn state_at_node(&self, i: usize) -> CurveState {
        let (xp, yp) = self.tangent(self.q[i]);
        CurveState::new(self.s_of_y[i], self.x_of_y[i], self.grid[i], xp, yp)
    }

    /// Interpolated state at `y in [0, Y]`.
    pub fn state_at_y(&self, y: f64) -> CurveState {
        let q = lagrange_uniform(&self.grid, &self.q, y);
        let (xp, yp) = self.tangent(q);
        CurveState::new(
            lagrange_uniform(&self.grid, &self.s_of_y, y),
            lagrange_uniform(&self.grid, &self.x_of_y, y),
            y,
            xp,
            yp,
        )
    }

    /// Arc-length interval covered by the chart.
    pub fn s_range(&self) -> (f64, f64) {
        let (a, b) = (self.s_of_y[0], *self.s_of_y.last().unwrap());
        (a.min(b), a.max(b))
    }

    /// Inverts `s(y)`; `None` outside the chart.
    pub fn y_at_s(&self, s: f64) -> Option<f64> {
        let (lo, hi) = self.s_range();
        if s < lo || s > hi {
            return None;
        }
        let sig = self.orientation;
        // s increases with y when orientation > 0
        let i = self
            .s_of_y
            .partition_point(|&v| sig * v < sig * s)
            .clamp(1, self.grid.len() - 1);
        let (mut a, mut b) = (self.grid[i - 1], self.grid[i]);
        let f = |y: f64| sig * (lagrange_uniform(&self.grid, &self.s_of_y, y) - s);
        if f(a) > 0.0 {
            a = self.grid[i.saturating_sub(2)];
        }
        if f(b) < 0.0 {
            b = self.grid[(i + 1).min(self.grid.len() - 1)];
        }
        for _ in 0..80 {
            let mid = 0.5 * (a + b);
            if f(mid) < 0.0 {
                a = mid;
            } else {
                b = mid;
            }
        }
        Some(0.5 * (a + b))
    }

    pub fn state_at_s(&self, s: f64) -> Option<CurveState> {
        self.y_at_s(s).map(|y| {
            let mut st = self.state_at_y(y);
            st.s = s;
            st
        })
    }

    /// Node index of the matching point `Y/2`.
    pub fn match_index(&self) -> usize {
        (self.grid.len() - 1) / 2
    }
}

/// Operator data for the generic Picard driver.
pub(crate) struct PicardProblem<'a> {
    pub case: ChartCase,
    /// `q = shift + u`.
    pub shift: f64,
    /// `x(y) = x_start + int_0^y q`.
    pub x_start: f64,
    pub b: f64,
    pub x_b: f64,
    pub orientation: f64,
    pub h: &'a dyn MeanCurvature,
    pub width_cap: f64,
    pub apply: &'a dyn Fn(&ChartGrid, &[f64], &[f64]) -> Result<Vec<f64>>,
}

fn weighted_norm(grid: &ChartGrid, u: &[f64]) -> f64 {
    grid.nodes()
        .iter()
        .zip(u)
        .skip(1)
        .map(|(y, v)| (v / y).abs())
        .fold(0.0, f64::max)
}

fn arc_length(problem: &PicardProblem, grid: &ChartGrid, u: &[f64]) -> Vec<f64> {
    let speed: Vec<f64> = u
        .iter()
        .map(|v| {
            let q = problem.shift + v;
            (1.0 + q * q).sqrt()
        })
        .collect();
    cumulative_trapezoid(grid, &speed)
        .into_iter()
        .map(|c| problem.b + problem.orientation * c)
        .collect()
}

fn pulled_back_h(problem: &PicardProblem, s: &[f64]) -> Vec<f64> {
    s.iter()
        .map(|&si| problem.orientation * problem.h.eval(si))
        .collect()
}

struct Converged {
    u: Vec<f64>,
    s: Vec<f64>,
    iterations: usize,
    contraction: f64,
    residual: f64,
    norm: f64,
    increments: Vec<f64>,
}

fn iterate(problem: &PicardProblem, grid: &ChartGrid, cfg: &SolverConfig) -> Result<Converged> {
    let mut u = vec![0.0; grid.len()];
    let mut s = arc_length(problem, grid, &u);
    let mut increments = Vec::new();
    for it in 1..=cfg.picard_max_iter {
        let ht = pulled_back_h(problem, &s);
        let next = (problem.apply)(grid, &u, &ht)?;
        let diff: Vec<f64> = next.iter().zip(&u).map(|(a, b)| a - b).collect();
        let inc = weighted_norm(grid, &diff);
        if !inc.is_finite() {
            return Err(SolverError::NormBoundExceeded {
                norm: inc,
                bound: cfg.norm_bound_m,
            });
        }
        increments.push(inc);
        u = next;
        s = arc_length(problem, grid, &u);
        let norm = weighted_norm(grid, &u);
        if norm > 10.0 * cfg.norm_bound_m {
            return Err(SolverError::NormBoundExceeded {
                norm,
                bound: cfg.norm_bound_m,
            });
        }
        if inc < cfg.picard_tol {
            let ht = pulled_back_h(problem, &s);
            let image = (problem.apply)(grid, &u, &ht)?;
            let res: Vec<f64> = image.iter().zip(&u).map(|(a, b)| a - b).collect();
            let noise = 1e-13;
            let contraction = increments
                .windows(2)
                .filter(|w| w[0] > noise)
                .map(|w| w[1] / w[0])
                .fold(0.0, f64::max);
            return Ok(Converged {
                residual: weighted_norm(grid, &res),
                norm,
                u,
                s,
                iterations: it,
                contraction,
                increments,
            });
        }
    }
    Err(SolverError::InvalidInput(format!(
        "Picard iteration did not converge in {} sweeps (last increment {:e})",
        cfg.picard_max_iter,
        increments.last().copied().unwrap_or(f64::NAN)
    )))
}

/// Solves the chart, shrinking `Y` until the iteration converges inside the ball with a
/// contraction factor of at most [`MAX_CONTRACTION`].
pub(crate) fn solve_chart(problem: &PicardProblem, cfg: &SolverConfig) -> Result<SingularChart> {
    cfg.validate()?;
    let mut width = cfg.chart_y_init.min(problem.width_cap);
    let mut widths_tried = Vec::new();
    loop {
        if width < MIN_CHART_WIDTH {
            let cause = widths_tried
                .last()
                .map(|(_, c): &(f64, String)| c.clone())
                .unwrap_or_else(|| "width constraint".into());
            return Err(SolverError::ChartWidthUnderflow { width, cause });
        }
        let grid = ChartGrid::uniform(width, cfg.chart_nodes);
        let outcome = iterate(problem, &grid, cfg).and_then(|c| {
            if c.norm > cfg.norm_bound_m {
                Err(SolverError::NormBoundExceeded {
                    norm: c.norm,
                    bound: cfg.norm_bound_m,
                })
            } else if c.contraction > MAX_CONTRACTION {
                Err(SolverError::InvalidInput(format!(
                    "empirical contraction factor {} exceeds {MAX_CONTRACTION}",
                    c.contraction
                )))
            } else {
                Ok(c)
            }
        });
        match outcome {
            Ok(c) => {
                let mut tried: Vec<f64> = widths_tried.iter().map(|(w, _)| *w).collect();
                tried.push(width);
                let q: Vec<f64> = c.u.iter().map(|v| problem.shift + v).collect();
                let x_of_y: Vec<f64> = cumulative_trapezoid(&grid, &q)
                    .into_iter()
                    .map(|v| problem.x_start + v)
                    .collect();
                let r = (problem.shift != 0.0).then(|| c.u.clone());
                return Ok(SingularChart {
                    case: problem.case,
                    width,
                    grid: grid.nodes().to_vec(),
                    q,
                    r,
                    s_of_y: c.s,
                    x_of_y,
                    orientation: problem.orientation,
                    b: problem.b,
                    x_b: problem.x_b,
                    stats: PicardStats {
                        iterations: c.iterations,
                        contraction: c.contraction,
                        residual: c.residual,
                        norm: c.norm,
                        widths_tried: tried,
                        increments: c.increments,
                    },
                });
            }
            Err(e) => {
                widths_tried.push((width, e.to_string()));
                width *= cfg.chart_y_shrink;
            }
        }
    }
}

pub(crate) fn check_orientation(orientation: f64) -> Result<f64> {
    if orientation == 1.0 || orientation == -1.0 {
        Ok(orientation)
    } else {
        Err(SolverError::InvalidInput(format!(
            "orientation must be +1 or -1, got {orientation}"
        )))
    }
}

/// `-k q^3 + (n-1) h eta (1+q^2)^{3/2}`, the part shared by the axis-contact operators.
#[inline]
pub(crate) fn axis_integrand(k: f64, n: f64, q: f64, h: f64, eta: f64) -> f64 {
    -k * q * q * q + (n - 1.0) * h * eta * (1.0 + q * q).powf(1.5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::{SingularEvent, SingularEventKind};
    use crate::hfield::HField;

    fn axis_event(b: f64, xb: f64) -> SingularEvent {
        SingularEvent {
            kind: SingularEventKind::AxisContact,
            s_event: b,
            contact_point: (xb, 0.0),
            incoming_slope_sq: 0.0,
        }
    }

    #[test]
    fn chart_inversion_round_trips() {
        let cfg = SolverConfig::default();
        let h = HField::constant(1.0);
        let chart = solve_singular_rot(&h, 3, &axis_event(1.0, 1.0), -1.0, &cfg).unwrap();
        let (lo, hi) = chart.s_range();
        assert_eq!(hi, 1.0);
        for t in [0.1, 0.37, 0.5, 0.93] {
            let s = lo + t * (hi - lo);
            let st = chart.state_at_s(s).unwrap();
            let back = chart.state_at_y(st.y);
            assert!((back.s - s).abs() < 1e-13);
        }
        assert!(chart.state_at_s(hi + 1e-3).is_none());
    }

    #[test]
    fn width_underflow_reports_cause() {
        let cfg = SolverConfig {
            norm_bound_m: 1e-3,
            ..Default::default()
        };
        let h = HField::constant(5.0);
        let err = solve_singular_rot(&h, 3, &axis_event(0.0, 1.0), -1.0, &cfg)
            .unwrap_err()
            .root()
            .clone();
        match err {
            SolverError::ChartWidthUnderflow { cause, .. } => assert!(cause.contains("norm")),
            other => panic!("unexpected {other:?}"),
        }
    }
}
