//! Large-`c` behaviour of the normalized family `Gamma_c` through `(0, c)`.
//!
//! With `eta(s) = (n-1) int_0^s H`, the limit curve `Gamma_inf` has curvature `-(n-1) H`,
//! `(F_c, G_c) = (y y' / c, y x' / c)` tends to `(-sin eta, cos eta)`, and the first two
//! corrections in `eps = 1/c` are explicit integrals of `eta`.

use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::curve::{CurveState, Geometry, ProfileCurve, SolverConfig};
use crate::engine::{extend, RunSpec};
use crate::error::{Result, SolverError};
use crate::hfield::HField;
use crate::quadrature::integrate_adaptive;
use crate::report::CheckReport;

const PANEL: f64 = 0.125;
const QUAD_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Quantity {
    Eta,
    Cos,
    Sin,
    GxSin,
    GxCos,
}

const QUANTITIES: usize = 5;

#[derive(Debug, Default, Clone)]
struct Cumulative {
    /// Values at `k * PANEL` for `k = 0, 1, ...`.
    pos: Vec<f64>,
    /// Values at `-k * PANEL` for `k = 0, 1, ...`.
    neg: Vec<f64>,
}

/// Cached running integrals of `eta` and the quantities built from it.
///
/// Panel boundary values are computed once and shared between threads; evaluation between
/// boundaries is an adaptive Gauss–Kronrod integral over at most one panel.
#[derive(Debug)]
pub struct EtaAccumulator {
    h: HField,
    n: u32,
    cache: Mutex<Vec<Cumulative>>,
}

impl Clone for EtaAccumulator {
    fn clone(&self) -> Self {
        let cache = self.cache.lock().expect("cache poisoned").clone();
        EtaAccumulator {
            h: self.h.clone(),
            n: self.n,
            cache: Mutex::new(cache),
        }
    }
}

/// A pair `(F, G)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FGPair {
    pub f: f64,
    pub g: f64,
}

impl FGPair {
    pub fn new(f: f64, g: f64) -> Self {
        FGPair { f, g }
    }

    pub fn norm(&self) -> f64 {
        self.f.hypot(self.g)
    }

    fn scaled_add(self, k: f64, other: FGPair) -> FGPair {
        FGPair::new(self.f + k * other.f, self.g + k * other.g)
    }
}

impl EtaAccumulator {
    pub fn new(h: HField, n: u32) -> Self {
        let init = Cumulative {
            pos: vec![0.0],
            neg: vec![0.0],
        };
        EtaAccumulator {
            h,
            n,
            cache: Mutex::new(vec![init; QUANTITIES]),
        }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn h(&self) -> &HField {
        &self.h
    }

    fn integrand(&self, q: Quantity, t: f64) -> f64 {
        match q {
            Quantity::Eta => (self.n as f64 - 1.0) * self.h.eval(t),
            Quantity::Cos => self.eta(t).cos(),
            Quantity::Sin => self.eta(t).sin(),
            Quantity::GxSin => self.cumulative(Quantity::Cos, t) * self.eta(t).sin(),
            Quantity::GxCos => self.cumulative(Quantity::Cos, t) * self.eta(t).cos(),
        }
    }

    fn boundary(&self, q: Quantity, k: i64) -> f64 {
        let idx = k.unsigned_abs() as usize;
        let side = |c: &Cumulative| if k >= 0 { c.pos.clone() } else { c.neg.clone() };
        let known = {
            let cache = self.cache.lock().expect("cache poisoned");
            let v = side(&cache[q as usize]);
            if idx < v.len() {
                return v[idx];
            }
            v
        };
        // extend without holding the lock; integrands may need other quantities
        let sign = if k >= 0 { 1.0 } else { -1.0 };
        let mut vals = known;
        while vals.len() <= idx {
            let j = vals.len() as f64;
            let a = sign * (j - 1.0) * PANEL;
            let b = sign * j * PANEL;
            let inc = integrate_adaptive(|t| self.integrand(q, t), a, b, QUAD_TOL);
            vals.push(vals[vals.len() - 1] + inc);
        }
        let out = vals[idx];
        let mut cache = self.cache.lock().expect("cache poisoned");
        let slot = &mut cache[q as usize];
        let target = if k >= 0 { &mut slot.pos } else { &mut slot.neg };
        if target.len() < vals.len() {
            *target = vals;
        }
        out
    }

    fn cumulative(&self, q: Quantity, s: f64) -> f64 {
        let k = (s / PANEL).trunc() as i64;
        let a = k as f64 * PANEL;
        self.boundary(q, k) + integrate_adaptive(|t| self.integrand(q, t), a, s, QUAD_TOL)
    }

    /// `eta(s) = (n-1) int_0^s H`.
    pub fn eta(&self, s: f64) -> f64 {
        self.cumulative(Quantity::Eta, s)
    }

    /// `Gamma_inf(s) = (int_0^s cos eta, -int_0^s sin eta)`.
    pub fn gamma_infinity(&self, s: f64) -> (f64, f64) {
        (
            self.cumulative(Quantity::Cos, s),
            -self.cumulative(Quantity::Sin, s),
        )
    }

    /// `(F_inf, G_inf) = (-sin eta, cos eta)`.
    pub fn fg_infinity(&self, s: f64) -> FGPair {
        let e = self.eta(s);
        FGPair::new(-e.sin(), e.cos())
    }

    /// Rotation by `eta(s)`.
    fn rotate(&self, s: f64, v: (f64, f64)) -> FGPair {
        let (sn, cs) = self.eta(s).sin_cos();
        FGPair::new(v.0 * cs - v.1 * sn, v.0 * sn + v.1 * cs)
    }

    /// Coefficient of `eps^k` in the expansion of `(F_c, G_c)`, `k <= 2`.
    pub fn expansion_coeff(&self, k: usize, s: f64) -> Result<FGPair> {
        let n = self.n as f64;
        match k {
            0 => Ok(self.fg_infinity(s)),
            1 => {
                let (gx, gy) = self.gamma_infinity(s);
                Ok(self.rotate(s, ((n - 2.0) * gx, gy)))
            }
            2 => {
                let factor = (n - 2.0) * (n - 3.0);
                if factor == 0.0 {
                    return Ok(FGPair::new(0.0, 0.0));
                }
                let a = self.cumulative(Quantity::GxSin, s);
                let b = -self.cumulative(Quantity::GxCos, s);
                let r = self.rotate(s, (a, b));
                Ok(FGPair::new(factor * r.f, factor * r.g))
            }
            k => Err(SolverError::UnsupportedOrder(k)),
        }
    }

    /// Partial sum `sum_{k <= order} eps^k (F^(k), G^(k))`.
    pub fn expansion(&self, order: usize, eps: f64, s: f64) -> Result<FGPair> {
        let mut acc = FGPair::new(0.0, 0.0);
        let mut p = 1.0;
        for k in 0..=order {
            acc = acc.scaled_add(p, self.expansion_coeff(k, s)?);
            p *= eps;
        }
        Ok(acc)
    }
}

pub fn eta(acc: &EtaAccumulator, s: f64) -> f64 {
    acc.eta(s)
}

pub fn gamma_infinity(acc: &EtaAccumulator, s: f64) -> (f64, f64) {
    acc.gamma_infinity(s)
}

pub fn fg_infinity(acc: &EtaAccumulator, s: f64) -> FGPair {
    acc.fg_infinity(s)
}

pub fn expansion_coeff(acc: &EtaAccumulator, k: usize, s: f64) -> Result<FGPair> {
    acc.expansion_coeff(k, s)
}

/// `(F_c, G_c) = (y y' / c, y x' / c)` interpolated from the curve.
pub fn fg_from_curve(curve: &ProfileCurve, c: f64, s: f64) -> Result<FGPair> {
    let st = curve.state_at(s).ok_or_else(|| {
        SolverError::InvalidInput(format!("s = {s} lies outside the computed curve"))
    })?;
    Ok(FGPair::new(st.y * st.yp / c, st.y * st.xp / c))
}

/// Uniform samples of `[a, b]` with spacing close to `step`, endpoints included.
pub fn sample_range(range: (f64, f64), step: f64) -> Vec<f64> {
    let (a, b) = range;
    let k = ((b - a) / step).round().max(1.0) as usize;
    (0..=k).map(|i| a + (b - a) * i as f64 / k as f64).collect()
}

/// Relative slack on top of the proof bound for the discretized curves.
pub const BOUND_SLACK: f64 = 1e-3;

/// Checks `F~^2 + G~^2 <= 2 (n-2)^2 s^2 / c^2` along a family of curves.
pub fn check_convergence_bound(
    family: &[(f64, ProfileCurve)],
    acc: &EtaAccumulator,
    s_range: (f64, f64),
    step: f64,
) -> Result<CheckReport> {
    let n = acc.n() as f64;
    let grid = sample_range(s_range, step);
    let limits: Vec<FGPair> = grid.iter().map(|&s| acc.fg_infinity(s)).collect();
    let mut max_ratio = 0.0f64;
    let mut per_c = Vec::new();
    let mut pass = true;
    for (c, curve) in family {
        let mut sup_dev = 0.0f64;
        let mut worst = 0.0f64;
        for (s, lim) in grid.iter().zip(&limits) {
            let fg = fg_from_curve(curve, *c, *s)?;
            let dev2 = (fg.f - lim.f).powi(2) + (fg.g - lim.g).powi(2);
            sup_dev = sup_dev.max(dev2.sqrt());
            let bound = 2.0 * (n - 2.0).powi(2) * s * s / (c * c);
            let ratio = if bound > 0.0 {
                dev2 / bound
            } else if dev2 <= 1e-24 {
                0.0
            } else {
                f64::INFINITY
            };
            worst = worst.max(ratio);
            if !ratio.is_finite() || dev2 > bound * (1.0 + BOUND_SLACK) {
                pass = false;
            }
        }
        max_ratio = max_ratio.max(worst);
        per_c.push(json!({"c": c, "max_ratio": worst, "sup_deviation": sup_dev}));
    }
    let mut notes = Vec::new();
    if max_ratio > 1.0 {
        notes.push(format!(
            "max ratio {max_ratio} exceeds 1; the integrated bound constant is under scrutiny"
        ));
    }
    Ok(CheckReport {
        check: "convergence_bound".into(),
        params: json!({"n": acc.n(), "s_range": [s_range.0, s_range.1], "step": step,
                       "c": family.iter().map(|(c, _)| *c).collect::<Vec<_>>()}),
        observed: json!({"max_ratio": max_ratio, "per_c": per_c}),
        bound_or_expected: json!({"bound": "2 (n-2)^2 s^2 / c^2", "slack": BOUND_SLACK}),
        pass,
        notes,
    })
}

/// Least-squares slope of `ys` against `xs`.
pub fn fitted_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Remainders below this are treated as exact.
pub const REMAINDER_NOISE_FLOOR: f64 = 1e-9;

/// Fits the decay rate of `E_K(c) = sup_s |(F_c, G_c) - sum_{k<=K} eps^k (F^(k), G^(k))|`.
pub fn check_expansion_scaling(
    family: &[(f64, ProfileCurve)],
    acc: &EtaAccumulator,
    order: usize,
    s_range: (f64, f64),
    step: f64,
) -> Result<CheckReport> {
    if order > 2 {
        return Err(SolverError::UnsupportedOrder(order));
    }
    if family.len() < 4 {
        return Err(SolverError::InvalidInput(
            "scaling fit needs at least 4 values of c".into(),
        ));
    }
    let grid = sample_range(s_range, step);
    let coeffs: Vec<Vec<FGPair>> = grid
        .iter()
        .map(|&s| (0..=order).map(|k| acc.expansion_coeff(k, s)).collect())
        .collect::<Result<_>>()?;
    let mut log_eps = Vec::new();
    let mut log_err = Vec::new();
    let mut remainders = Vec::new();
    for (c, curve) in family {
        let eps = 1.0 / c;
        let mut sup = 0.0f64;
        for (s, cs) in grid.iter().zip(&coeffs) {
            let fg = fg_from_curve(curve, *c, *s)?;
            let mut approx = FGPair::new(0.0, 0.0);
            let mut p = 1.0;
            for co in cs {
                approx = approx.scaled_add(p, *co);
                p *= eps;
            }
            sup = sup.max((fg.f - approx.f).hypot(fg.g - approx.g));
        }
        remainders.push(json!({"c": c, "remainder": sup}));
        log_eps.push(eps.ln());
        log_err.push(sup.max(f64::MIN_POSITIVE).ln());
    }
    let required = order as f64 + 1.0 - 0.25;
    let at_floor = log_err.iter().all(|&l| l.exp() < REMAINDER_NOISE_FLOOR);
    let slope = fitted_slope(&log_eps, &log_err);
    let mut notes = Vec::new();
    let pass = if at_floor {
        notes.push(format!(
            "all remainders below {REMAINDER_NOISE_FLOOR:e}: the truncated expansion is exact for these data and the slope is not meaningful"
        ));
        true
    } else {
        slope >= required
    };
    Ok(CheckReport {
        check: "expansion_scaling".into(),
        params: json!({"n": acc.n(), "K": order, "s_range": [s_range.0, s_range.1], "step": step}),
        observed: json!({"slope": slope, "remainders": remainders}),
        bound_or_expected: json!({"min_slope": required}),
        pass,
        notes,
    })
}

/// `sup_s |Gamma_c'(s) - Gamma_inf'(s)|` for one family member.
pub fn tangent_deviation(
    curve: &ProfileCurve,
    acc: &EtaAccumulator,
    s_range: (f64, f64),
    step: f64,
) -> Result<f64> {
    let mut sup = 0.0f64;
    for s in sample_range(s_range, step) {
        let st = curve
            .state_at(s)
            .ok_or_else(|| SolverError::InvalidInput(format!("s = {s} outside the curve")))?;
        let e = acc.eta(s);
        sup = sup.max((st.xp - e.cos()).hypot(st.yp + e.sin()));
    }
    Ok(sup)
}

/// Which monotonicity hypothesis `H` satisfies on a span, by central differences.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Monotonicity {
    /// `H' >= 0` on `s > 0` and `H' <= 0` on `s < 0`.
    pub increasing_away: bool,
    /// `H' <= 0` on `s > 0` and `H' >= 0` on `s < 0`.
    pub decreasing_away: bool,
}

pub fn sample_monotonicity(h: &HField, s_span: (f64, f64), samples: usize) -> Monotonicity {
    let mut inc = true;
    let mut dec = true;
    let step = 1e-5 * (1.0 + s_span.0.abs().max(s_span.1.abs()));
    let tol = 1e-9;
    for i in 0..=samples {
        let s = s_span.0 + (s_span.1 - s_span.0) * i as f64 / samples as f64;
        if s == 0.0 {
            continue;
        }
        let d = h.derivative(s, step) * s.signum();
        if d < -tol {
            inc = false;
        }
        if d > tol {
            dec = false;
        }
    }
    Monotonicity {
        increasing_away: inc,
        decreasing_away: dec,
    }
}

/// Runs the normalized curve through `(0, c)` and reports `min y` on `s_span`.
///
/// Positivity is predicted when `H` increases away from `0` and `c > 1/H(0)`, or when it
/// decreases away from `0` and `0 < c < 1/H(0)`.
pub fn check_positivity(
    h: &HField,
    c: f64,
    n: u32,
    s_span: (f64, f64),
    cfg: &SolverConfig,
) -> Result<CheckReport> {
    let spec = RunSpec {
        geometry: Geometry::Rot { n },
        h: h.clone(),
        initial: CurveState::new(0.0, 0.0, c, 1.0, 0.0),
        s_window: s_span,
        cfg: *cfg,
        sample_ds: 0.0,
    };
    let curve = extend(&spec)?;
    let min_y = if curve.events.is_empty() { curve.min_y() } else { 0.0 };
    let mono = sample_monotonicity(h, s_span, 4000);
    let h0 = h.eval(0.0);
    let theorem = mono.increasing_away && h0 > 0.0 && c > 1.0 / h0;
    let remark = mono.decreasing_away && h0 > 0.0 && c > 0.0 && c < 1.0 / h0;
    let predicted = theorem || remark;
    let mut notes = Vec::new();
    if !predicted {
        notes.push("monotonicity/threshold hypotheses not met on the sampled span; no prediction".into());
    }
    notes.push("monotonicity is sampled by central differences, not verified almost everywhere".into());
    Ok(CheckReport {
        check: "positivity".into(),
        params: json!({"n": n, "c": c, "s_span": [s_span.0, s_span.1], "H": h}),
        observed: json!({"min_y": min_y, "events": curve.events.len(),
                         "increasing_away": mono.increasing_away,
                         "decreasing_away": mono.decreasing_away}),
        bound_or_expected: json!({"predicted_positive": predicted,
                                  "hypothesis": if theorem { "c > 1/H(0), H increasing away from 0" }
                                                else if remark { "0 < c < 1/H(0), H decreasing away from 0" }
                                                else { "none" }}),
        pass: !predicted || min_y > 0.0,
        notes,
    })
}

/// Integrals entering the closedness conditions of a periodic limit curve over `[0, L]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodDiagnostics {
    #[serde(rename = "L")]
    pub l: f64,
    pub int_cos: f64,
    pub int_sin: f64,
    /// `int_0^L sin eta(u) int_0^u cos eta dt du`.
    pub double_int: f64,
    /// `|int_0^L x_inf y_inf' du|`.
    pub signed_area: f64,
}

pub fn period_diagnostics(acc: &EtaAccumulator, l: f64) -> PeriodDiagnostics {
    let double_int = acc.cumulative(Quantity::GxSin, l);
    // x_inf = int cos eta and y_inf' = -sin eta
    let area = -double_int;
    PeriodDiagnostics {
        l,
        int_cos: acc.cumulative(Quantity::Cos, l),
        int_sin: acc.cumulative(Quantity::Sin, l),
        double_int,
        signed_area: area.abs(),
    }
}
