//! Quadrature on uniform chart grids and adaptive Gauss–Kronrod on intervals.

/// Uniform grid `y_i = i * Y / N`, `i = 0..=N`, on `[0, Y]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartGrid {
    width: f64,
    nodes: Vec<f64>,
}

impl ChartGrid {
    pub fn uniform(width: f64, panels: usize) -> Self {
        assert!(width > 0.0 && panels >= 1, "grid needs positive width and panels");
        let h = width / panels as f64;
        let mut nodes: Vec<f64> = (0..=panels).map(|i| i as f64 * h).collect();
        nodes[panels] = width;
        ChartGrid { width, nodes }
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn panels(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

fn binomial(k: u32, j: u32) -> f64 {
    (0..j).fold(1.0, |acc, i| acc * (k - i) as f64 / (i + 1) as f64)
}

/// Weights `(w_left, w_right)` with
/// `int_a^{a+h} eta^k g(eta) d eta = w_left g(a) + w_right g(a+h)` for linear `g`.
///
/// Expanding `eta^k` around `a` keeps every term positive, so small `a` loses nothing
/// to cancellation.
pub fn panel_weights(k: u32, a: f64, h: f64) -> (f64, f64) {
    let mut left = 0.0;
    let mut right = 0.0;
    let mut hp = h;
    for j in 0..=k {
        let c = binomial(k, j) * a.powi((k - j) as i32) * hp;
        let jf = j as f64;
        left += c / ((jf + 1.0) * (jf + 2.0));
        right += c / (jf + 2.0);
        hp *= h;
    }
    (left, right)
}

/// Running integrals `int_0^{y_i} g(eta) eta^k d eta` with `g` piecewise linear on the grid.
pub fn weighted_cumulative(grid: &ChartGrid, g: &[f64], k: u32) -> Vec<f64> {
    let nodes = grid.nodes();
    assert_eq!(nodes.len(), g.len());
    let mut out = vec![0.0; nodes.len()];
    for i in 1..nodes.len() {
        let (wl, wr) = panel_weights(k, nodes[i - 1], nodes[i] - nodes[i - 1]);
        out[i] = out[i - 1] + wl * g[i - 1] + wr * g[i];
    }
    out
}

/// Running trapezoid integrals `int_0^{y_i} f`.
pub fn cumulative_trapezoid(grid: &ChartGrid, f: &[f64]) -> Vec<f64> {
    let nodes = grid.nodes();
    assert_eq!(nodes.len(), f.len());
    let mut out = vec![0.0; nodes.len()];
    for i in 1..nodes.len() {
        out[i] = out[i - 1] + 0.5 * (nodes[i] - nodes[i - 1]) * (f[i - 1] + f[i]);
    }
    out
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One 15-point Kronrod estimate with the embedded 7-point Gauss error estimate.
pub fn gauss_kronrod_15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let hl = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let x = hl * XGK[j];
        let sum = f(c - x) + f(c + x);
        kron += WGK[j] * sum;
        if j % 2 == 1 {
            gauss += WG[j / 2] * sum;
        }
    }
    (kron * hl, ((kron - gauss) * hl).abs())
}

/// Adaptive Gauss–Kronrod integration of `f` over `[a, b]` (either orientation).
pub fn integrate_adaptive<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let mut total = 0.0;
    let mut stack = vec![(a, b, tol, 0u32)];
    while let Some((lo, hi, t, depth)) = stack.pop() {
        let (val, err) = gauss_kronrod_15(&f, lo, hi);
        if err <= t.max(1e-15 * val.abs()) || depth >= 40 {
            total += val;
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((mid, hi, 0.5 * t, depth + 1));
            stack.push((lo, mid, 0.5 * t, depth + 1));
        }
    }
    total
}

/// Four-point Lagrange interpolation of tabulated `values` on a uniform grid at `y`.
pub(crate) fn lagrange_uniform(nodes: &[f64], values: &[f64], y: f64) -> f64 {
    let n = nodes.len();
    if n < 4 {
        let i = nodes.partition_point(|&v| v < y).clamp(1, n - 1);
        let t = (y - nodes[i - 1]) / (nodes[i] - nodes[i - 1]);
        return values[i - 1] + t * (values[i] - values[i - 1]);
    }
    let i = nodes.partition_point(|&v| v < y).clamp(1, n - 1);
    let start = (i as isize - 2).clamp(0, n as isize - 4) as usize;
    let mut acc = 0.0;
    for j in start..start + 4 {
        let mut w = 1.0;
        for k in start..start + 4 {
            if k != j {
                w *= (y - nodes[k]) / (nodes[j] - nodes[k]);
            }
        }
        acc += w * values[j];
    }
    acc
}
