//! Small numerical utilities shared by the solver modules: trapezoid
//! quadrature, monotone linear interpolation, and a tridiagonal solver.

/// Trapezoid rule on a uniform grid with spacing `dx`.
pub fn trapezoid_uniform(values: &[f64], dx: f64) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let interior: f64 = values[1..values.len() - 1].iter().sum();
    dx * (0.5 * (values[0] + values[values.len() - 1]) + interior)
}

/// Trapezoid rule on an arbitrary sorted grid.
pub fn trapezoid(xs: &[f64], values: &[f64]) -> f64 {
    assert_eq!(xs.len(), values.len());
    xs.windows(2)
        .zip(values.windows(2))
        .map(|(x, v)| 0.5 * (x[1] - x[0]) * (v[0] + v[1]))
        .sum()
}

/// Cumulative trapezoid with `out[0] = 0`.
pub fn cumulative_trapezoid_uniform(values: &[f64], dx: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    out.push(0.0);
    for pair in values.windows(2) {
        acc += 0.5 * dx * (pair[0] + pair[1]);
        out.push(acc);
    }
    out
}

/// Linear interpolation on a sorted abscissa list, with constant
/// extrapolation beyond the ends.
pub fn interp_linear(xs: &[f64], values: &[f64], x: f64) -> f64 {
    debug_assert_eq!(xs.len(), values.len());
    debug_assert!(!xs.is_empty());
    if x <= xs[0] {
        return values[0];
    }
    if x >= xs[xs.len() - 1] {
        return values[values.len() - 1];
    }
    let idx = match xs.partition_point(|&v| v <= x) {
        0 => 1,
        i => i,
    };
    let (x0, x1) = (xs[idx - 1], xs[idx]);
    let (v0, v1) = (values[idx - 1], values[idx]);
    if x1 == x0 {
        return 0.5 * (v0 + v1);
    }
    let s = (x - x0) / (x1 - x0);
    v0 + s * (v1 - v0)
}

/// Uniform-grid description `x_i = x0 + i*dx`, shared by sampled fields.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformGrid {
    pub x0: f64,
    pub dx: f64,
    pub n: usize,
}

impl UniformGrid {
    /// Grid covering `[a, b]` with `n` nodes (n ≥ 2).
    pub fn covering(a: f64, b: f64, n: usize) -> Self {
        assert!(n >= 2 && b > a);
        UniformGrid { x0: a, dx: (b - a) / (n - 1) as f64, n }
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x0 + self.dx * i as f64
    }

    pub fn last(&self) -> f64 {
        self.x(self.n - 1)
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }

    /// Fractional index of `x`, clamped to the grid.
    pub fn frac_index(&self, x: f64) -> f64 {
        ((x - self.x0) / self.dx).clamp(0.0, (self.n - 1) as f64)
    }

    /// Linear interpolation of nodal `values` at `x` (constant beyond ends).
    pub fn interp(&self, values: &[f64], x: f64) -> f64 {
        debug_assert_eq!(values.len(), self.n);
        let f = self.frac_index(x);
        let i = (f as usize).min(self.n - 2);
        let s = f - i as f64;
        values[i] * (1.0 - s) + values[i + 1] * s
    }
}

/// Solves a tridiagonal system (Thomas algorithm). `lower`/`upper` have
/// length `n-1`; `diag` and `rhs` length `n`. Overwrites nothing.
pub fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    assert!(n >= 1 && lower.len() == n - 1 && upper.len() == n - 1 && rhs.len() == n);
    let mut c = vec![0.0; n - 1];
    let mut d = vec![0.0; n];
    let mut denom = diag[0];
    d[0] = rhs[0] / denom;
    for i in 1..n {
        c[i - 1] = upper[i - 1] / denom;
        denom = diag[i] - lower[i - 1] * c[i - 1];
        d[i] = (rhs[i] - lower[i - 1] * d[i - 1]) / denom;
    }
    for i in (0..n - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    d
}
