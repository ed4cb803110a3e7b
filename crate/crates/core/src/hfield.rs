//! Prescribed mean curvature functions `H(s)` of arc length.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SolverError};

/// Anything that can be evaluated as a mean curvature function of arc length.
///
/// Implemented by [`HField`] and by plain closures, so tests and charts can pass
/// reparametrized or sign-flipped views without allocating new fields.
pub trait MeanCurvature: Send + Sync {
    fn eval(&self, s: f64) -> f64;
}

impl<F> MeanCurvature for F
where
    F: Fn(f64) -> f64 + Send + Sync,
{
    fn eval(&self, s: f64) -> f64 {
        self(s)
    }
}

/// `sign * h(s)`.
pub(crate) struct Scaled<'a> {
    pub inner: &'a dyn MeanCurvature,
    pub sign: f64,
}

impl MeanCurvature for Scaled<'_> {
    fn eval(&self, s: f64) -> f64 {
        self.sign * self.inner.eval(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Interpolation {
    Linear,
    Cubic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Extrapolation {
    Clamp,
    Periodic,
}

#[derive(Serialize, Deserialize)]
struct TableRepr {
    samples: Vec<[f64; 2]>,
    interp: Interpolation,
    extrap: Extrapolation,
}

/// Tabulated `H`, interpolated linearly or by a natural cubic spline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TableRepr", into = "TableRepr")]
pub struct TableField {
    s: Vec<f64>,
    h: Vec<f64>,
    interp: Interpolation,
    extrap: Extrapolation,
    // spline second derivatives (cubic only)
    m2: Vec<f64>,
}

impl TryFrom<TableRepr> for TableField {
    type Error = SolverError;

    fn try_from(repr: TableRepr) -> Result<Self> {
        let (s, h): (Vec<f64>, Vec<f64>) = repr.samples.iter().map(|p| (p[0], p[1])).unzip();
        TableField::new(s, h, repr.interp, repr.extrap)
    }
}

impl From<TableField> for TableRepr {
    fn from(t: TableField) -> Self {
        TableRepr {
            samples: t.s.iter().zip(&t.h).map(|(&s, &h)| [s, h]).collect(),
            interp: t.interp,
            extrap: t.extrap,
        }
    }
}

impl TableField {
    pub fn new(
        s: Vec<f64>,
        h: Vec<f64>,
        interp: Interpolation,
        extrap: Extrapolation,
    ) -> Result<Self> {
        if s.len() != h.len() || s.len() < 2 {
            return Err(SolverError::InvalidInput(
                "table needs at least two (s, h) samples".into(),
            ));
        }
        if s.iter().chain(&h).any(|v| !v.is_finite()) {
            return Err(SolverError::InvalidInput("table samples must be finite".into()));
        }
        if s.windows(2).any(|w| w[1] <= w[0]) {
            return Err(SolverError::InvalidInput(
                "table abscissae must be strictly increasing".into(),
            ));
        }
        let m2 = match interp {
            Interpolation::Linear => Vec::new(),
            Interpolation::Cubic => natural_spline_moments(&s, &h),
        };
        Ok(TableField {
            s,
            h,
            interp,
            extrap,
            m2,
        })
    }

    pub fn samples(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.s.iter().copied().zip(self.h.iter().copied())
    }

    pub fn interpolation(&self) -> Interpolation {
        self.interp
    }

    pub fn extrapolation(&self) -> Extrapolation {
        self.extrap
    }

    fn eval(&self, s: f64) -> f64 {
        let n = self.s.len();
        let (lo, hi) = (self.s[0], self.s[n - 1]);
        let s = match self.extrap {
            Extrapolation::Clamp => s.clamp(lo, hi),
            Extrapolation::Periodic => {
                let period = hi - lo;
                lo + (s - lo).rem_euclid(period)
            }
        };
        // panel index j with s in [s_j, s_{j+1}]
        let j = match self.s.binary_search_by(|v| v.total_cmp(&s)) {
            Ok(i) => i.min(n - 2),
            Err(i) => i.saturating_sub(1).min(n - 2),
        };
        let (a, b) = (self.s[j], self.s[j + 1]);
        let w = b - a;
        let t = (s - a) / w;
        match self.interp {
            Interpolation::Linear => self.h[j] * (1.0 - t) + self.h[j + 1] * t,
            Interpolation::Cubic => {
                let u = 1.0 - t;
                u * self.h[j]
                    + t * self.h[j + 1]
                    + w * w / 6.0 * ((u * u * u - u) * self.m2[j] + (t * t * t - t) * self.m2[j + 1])
            }
        }
    }
}

/// Second derivatives of the natural cubic spline through `(s, h)`.
fn natural_spline_moments(s: &[f64], h: &[f64]) -> Vec<f64> {
    let n = s.len();
    let mut m = vec![0.0; n];
    if n < 3 {
        return m;
    }
    // tridiagonal system for interior moments (Thomas algorithm)
    let k = n - 2;
    let mut diag = vec![0.0; k];
    let mut upper = vec![0.0; k];
    let mut rhs = vec![0.0; k];
    for i in 1..n - 1 {
        let h0 = s[i] - s[i - 1];
        let h1 = s[i + 1] - s[i];
        diag[i - 1] = (h0 + h1) / 3.0;
        upper[i - 1] = h1 / 6.0;
        rhs[i - 1] = (h[i + 1] - h[i]) / h1 - (h[i] - h[i - 1]) / h0;
    }
    for i in 1..k {
        let lower = (s[i + 1] - s[i]) / 6.0;
        let f = lower / diag[i - 1];
        diag[i] -= f * upper[i - 1];
        rhs[i] -= f * rhs[i - 1];
    }
    m[k] = rhs[k - 1] / diag[k - 1];
    for i in (0..k - 1).rev() {
        m[i + 1] = (rhs[i] - upper[i] * m[i + 2]) / diag[i];
    }
    m
}

/// The prescribed mean curvature `H(s)`.
///
/// Serialized as a tagged JSON object, e.g. `{"kind":"constant","value":1.0}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum HField {
    Constant {
        value: f64,
    },
    /// `sum_k coeffs[k] s^k`
    Polynomial {
        coeffs: Vec<f64>,
    },
    /// `a0 + sum_k cos[k-1] cos(k w s) + sin[k-1] sin(k w s)`
    Fourier {
        a0: f64,
        #[serde(rename = "cos", default)]
        cos_coeffs: Vec<f64>,
        #[serde(rename = "sin", default)]
        sin_coeffs: Vec<f64>,
        #[serde(rename = "freq")]
        frequency: f64,
    },
    Table(TableField),
}

impl HField {
    pub fn constant(value: f64) -> Self {
        HField::Constant { value }
    }

    pub fn polynomial(coeffs: Vec<f64>) -> Self {
        HField::Polynomial { coeffs }
    }

    pub fn table(
        samples: &[(f64, f64)],
        interp: Interpolation,
        extrap: Extrapolation,
    ) -> Result<Self> {
        let (s, h) = samples.iter().copied().unzip();
        Ok(HField::Table(TableField::new(s, h, interp, extrap)?))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| SolverError::InvalidInput(format!("H field: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("HField serializes")
    }

    pub fn eval(&self, s: f64) -> f64 {
        match self {
            HField::Constant { value } => *value,
            HField::Polynomial { coeffs } => coeffs.iter().rev().fold(0.0, |acc, c| acc * s + c),
            HField::Fourier {
                a0,
                cos_coeffs,
                sin_coeffs,
                frequency,
            } => {
                let mut v = *a0;
                for (k, c) in cos_coeffs.iter().enumerate() {
                    v += c * ((k + 1) as f64 * frequency * s).cos();
                }
                for (k, c) in sin_coeffs.iter().enumerate() {
                    v += c * ((k + 1) as f64 * frequency * s).sin();
                }
                v
            }
            HField::Table(t) => t.eval(s),
        }
    }

    /// Central-difference derivative.
    pub fn derivative(&self, s: f64, step: f64) -> f64 {
        (self.eval(s + step) - self.eval(s - step)) / (2.0 * step)
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, HField::Constant { .. })
    }
}

impl MeanCurvature for HField {
    fn eval(&self, s: f64) -> f64 {
        HField::eval(self, s)
    }
}

pub fn eval_h(h: &HField, s: f64) -> f64 {
    h.eval(s)
}

/// Samples `H(s + period) - H(s)` over `[lo, hi]` and reports the largest gap.
pub fn periodicity_defect(h: &HField, period: f64, lo: f64, hi: f64, samples: usize) -> f64 {
    let samples = samples.max(2);
    (0..samples)
        .map(|i| {
            let s = lo + (hi - lo) * i as f64 / (samples - 1) as f64;
            (h.eval(s + period) - h.eval(s)).abs()
        })
        .fold(0.0, f64::max)
}
