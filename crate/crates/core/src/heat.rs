//! One-dimensional heat kernel machinery: the kernel and its derivative,
//! exact-in-time integrated kernel weights, windowed discrete convolutions,
//! the Duhamel representation of the velocity, and the flux map whose fixed
//! point couples the parabolic and hyperbolic halves of the model.
//!
//! ## Quadrature design
//!
//! Spatial convolutions are direct windowed sums against *point masses*
//! (segment integrals of the source), truncated where the kernel mass drops
//! below ~1e−15 (8 standard deviations). Time integrals `∫₀ᵗ K(·,t−s) ⋆ f(·,s) ds`
//! use a geometrically graded partition of the kernel age `τ = t−s` and the
//! closed forms
//!
//! ```text
//! ∫₀ᵀ H(ξ,τ) dτ  = √(T/π)·e^{−ξ²/4T} − (|ξ|/2)·erfc(|ξ|/(2√T))
//! ∫₀ᵀ Hₓ(ξ,τ) dτ = −sign(ξ)/2 · erfc(|ξ|/(2√T))
//! ```
//!
//! so the `τ → 0` endpoint (where the kernel degenerates to a delta) is
//! integrated exactly rather than resolved by the mesh. Sources are treated
//! as constant on each `τ`-interval (midpoint sampling), which is where the
//! grading near `τ = 0` earns its keep.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::initial::InitialData;
use crate::num::{interp_linear, trapezoid, trapezoid_uniform, UniformGrid};

/// Heat kernel `H(x,t) = exp(−x²/4t)/√(4πt)`. Requires `t > 0`.
pub fn kernel(x: f64, t: f64) -> f64 {
    assert!(t > 0.0, "heat kernel requires t > 0, got {t}");
    (-x * x / (4.0 * t)).exp() / (4.0 * std::f64::consts::PI * t).sqrt()
}

/// Spatial derivative `H_x(x,t) = −x/(2t)·H(x,t)`. Requires `t > 0`.
pub fn kernel_dx(x: f64, t: f64) -> f64 {
    assert!(t > 0.0, "heat kernel requires t > 0, got {t}");
    -x / (2.0 * t) * kernel(x, t)
}

/// `∫₀ᵀ H(ξ,τ) dτ`, closed form.
pub fn kernel_time_integral(xi: f64, t: f64) -> f64 {
    assert!(t > 0.0);
    let ax = xi.abs();
    let root = t.sqrt();
    (t / std::f64::consts::PI).sqrt() * (-xi * xi / (4.0 * t)).exp()
        - 0.5 * ax * erfc(ax / (2.0 * root))
}

/// `∫₀ᵀ H_ξ(ξ,τ) dτ = −sign(ξ)/2·erfc(|ξ|/(2√T))`, closed form.
pub fn kernel_dx_time_integral(xi: f64, t: f64) -> f64 {
    assert!(t > 0.0);
    if xi == 0.0 {
        return 0.0;
    }
    -0.5 * xi.signum() * erfc(xi.abs() / (2.0 * t.sqrt()))
}

/// Quadrature policy for kernel convolutions.
#[derive(Debug, Clone, Copy)]
pub struct HeatQuadrature {
    /// Kernel truncation radius in standard deviations (`σ = √(2τ)`);
    /// 8σ leaves relative truncated mass below 1e−14.
    pub trunc_stddevs: f64,
    /// Kernel ages below this are dropped from time integrals (the omitted
    /// sliver contributes `≤ tau_floor · sup|source|`).
    pub tau_floor: f64,
    /// Resolution of tabulated kernel weights.
    pub table_points: usize,
    /// Grading ratio of the kernel-age partition (successive interval
    /// boundaries grow geometrically away from `τ = 0`).
    pub grading_ratio: f64,
}

impl Default for HeatQuadrature {
    fn default() -> Self {
        HeatQuadrature { trunc_stddevs: 8.0, tau_floor: 1e-6, table_points: 4096, grading_ratio: 1.6 }
    }
}

impl HeatQuadrature {
    /// Truncation cutoff for kernel age `tau`.
    pub fn cutoff(&self, tau: f64) -> f64 {
        self.trunc_stddevs * (2.0 * tau).sqrt()
    }

    /// Geometric partition of `[tau_floor, t]` used for time integrals.
    pub fn tau_partition(&self, t: f64) -> Vec<f64> {
        let mut bounds = vec![self.tau_floor.min(t)];
        let mut tau = self.tau_floor;
        while tau < t {
            tau *= self.grading_ratio;
            bounds.push(tau.min(t));
            if *bounds.last().unwrap() >= t {
                break;
            }
        }
        if bounds.len() == 1 {
            bounds.push(t);
        }
        bounds
    }
}

/// Which kernel a tabulated weight refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    /// `H` itself (even in ξ).
    Value,
    /// `H_ξ` (odd in ξ).
    Derivative,
}

/// Tabulated kernel weight `W(ξ)` on `[0, cutoff]`, exploiting even/odd
/// symmetry; `W ≡ 0` beyond the cutoff.
#[derive(Debug, Clone)]
pub struct KernelTable {
    kind: KernelKind,
    cutoff: f64,
    dxi: f64,
    vals: Vec<f64>,
}

impl KernelTable {
    /// Weight `W(ξ) = ∫_{τa}^{τb} K(ξ,τ) dτ` for the chosen kernel.
    pub fn time_integrated(kind: KernelKind, tau_a: f64, tau_b: f64, quad: &HeatQuadrature) -> Self {
        assert!(tau_b > tau_a && tau_a >= 0.0);
        let cutoff = quad.cutoff(tau_b);
        let n = quad.table_points;
        let dxi = cutoff / n as f64;
        let vals = (0..=n)
            .map(|i| {
                let xi = i as f64 * dxi;
                match kind {
                    KernelKind::Value => {
                        let hi = kernel_time_integral(xi, tau_b);
                        let lo = if tau_a > 0.0 { kernel_time_integral(xi, tau_a) } else { 0.0 };
                        hi - lo
                    }
                    KernelKind::Derivative => {
                        let hi = kernel_dx_time_integral(xi, tau_b);
                        let lo = if tau_a > 0.0 { kernel_dx_time_integral(xi, tau_a) } else { 0.0 };
                        hi - lo
                    }
                }
            })
            .collect();
        KernelTable { kind, cutoff, dxi, vals }
    }

    /// Instantaneous kernel `K(ξ, t)` table.
    pub fn instantaneous(kind: KernelKind, t: f64, quad: &HeatQuadrature) -> Self {
        assert!(t > 0.0);
        let cutoff = quad.cutoff(t);
        let n = quad.table_points;
        let dxi = cutoff / n as f64;
        let vals = (0..=n)
            .map(|i| {
                let xi = i as f64 * dxi;
                match kind {
                    KernelKind::Value => kernel(xi, t),
                    KernelKind::Derivative => kernel_dx(xi, t),
                }
            })
            .collect();
        KernelTable { kind, cutoff, dxi, vals }
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    /// Linear-interpolated lookup with symmetry extension.
    #[inline]
    pub fn eval(&self, xi: f64) -> f64 {
        let a = xi.abs();
        if a >= self.cutoff {
            return 0.0;
        }
        let f = a / self.dxi;
        let i = f as usize;
        let s = f - i as f64;
        let v = self.vals[i] * (1.0 - s) + self.vals[i + 1] * s;
        match self.kind {
            KernelKind::Value => v,
            KernelKind::Derivative => {
                if xi < 0.0 {
                    -v
                } else {
                    v
                }
            }
        }
    }
}

/// A source reduced to point masses: `mass[k]` sits at `x[k]` (ascending).
/// Segment integrals of a density collapse to this form, which is what the
/// windowed convolutions consume.
#[derive(Debug, Clone, Default)]
pub struct MassCurve {
    pub x: Vec<f64>,
    pub mass: Vec<f64>,
}

impl MassCurve {
    /// Point masses for a density sampled on a uniform grid (trapezoid
    /// weights: `dx`, halved at the ends).
    pub fn from_uniform_density(grid: &UniformGrid, density: &[f64]) -> Self {
        assert_eq!(density.len(), grid.n);
        let mut mass = Vec::with_capacity(grid.n);
        for (i, &d) in density.iter().enumerate() {
            let w = if i == 0 || i == grid.n - 1 { 0.5 * grid.dx } else { grid.dx };
            mass.push(d * w);
        }
        MassCurve { x: grid.xs(), mass }
    }

    /// Point masses for a density sampled on an arbitrary ascending grid.
    pub fn from_density(xs: &[f64], density: &[f64]) -> Self {
        assert_eq!(xs.len(), density.len());
        let n = xs.len();
        let mut mass = vec![0.0; n];
        for i in 0..n {
            let left = if i > 0 { xs[i] - xs[i - 1] } else { 0.0 };
            let right = if i + 1 < n { xs[i + 1] - xs[i] } else { 0.0 };
            mass[i] = density[i] * 0.5 * (left + right);
        }
        MassCurve { x: xs.to_vec(), mass }
    }

    pub fn total(&self) -> f64 {
        self.mass.iter().sum()
    }
}

/// Windowed convolution `out[j] = Σ_k W(out_x[j] − x_k)·mass_k`.
pub fn convolve_masses(table: &KernelTable, src: &MassCurve, out_xs: &[f64]) -> Vec<f64> {
    let cutoff = table.cutoff();
    out_xs
        .par_iter()
        .map(|&x| {
            let lo = src.x.partition_point(|&y| y < x - cutoff);
            let hi = src.x.partition_point(|&y| y <= x + cutoff);
            let mut acc = 0.0;
            for k in lo..hi {
                acc += table.eval(x - src.x[k]) * src.mass[k];
            }
            acc
        })
        .collect()
}

/// Direct (untabulated) windowed convolution with the instantaneous kernel;
/// used where tabulation error would dominate (initial-data terms).
pub fn convolve_exact(kind: KernelKind, t: f64, quad: &HeatQuadrature, src: &MassCurve, out_xs: &[f64]) -> Vec<f64> {
    let cutoff = quad.cutoff(t);
    out_xs
        .par_iter()
        .map(|&x| {
            let lo = src.x.partition_point(|&y| y < x - cutoff);
            let hi = src.x.partition_point(|&y| y <= x + cutoff);
            let mut acc = 0.0;
            for k in lo..hi {
                let xi = x - src.x[k];
                acc += match kind {
                    KernelKind::Value => kernel(xi, t),
                    KernelKind::Derivative => kernel_dx(xi, t),
                } * src.mass[k];
            }
            acc
        })
        .collect()
}

/// `∫_{tau_floor}^{t} K(·,τ) ⋆ source(t−τ) dτ` with exact kernel-age weights
/// and midpoint source sampling on a graded partition.
///
/// `source_at(s)` returns the source reduced to point masses at time `s`.
pub fn heat_time_integral(
    kind: KernelKind,
    t: f64,
    quad: &HeatQuadrature,
    out_xs: &[f64],
    mut source_at: impl FnMut(f64) -> MassCurve,
) -> Vec<f64> {
    let mut out = vec![0.0; out_xs.len()];
    if t <= quad.tau_floor {
        return out;
    }
    let bounds = quad.tau_partition(t);
    for pair in bounds.windows(2) {
        let (tau_a, tau_b) = (pair[0], pair[1]);
        if tau_b <= tau_a {
            continue;
        }
        let table = KernelTable::time_integrated(kind, tau_a, tau_b, quad);
        let s_mid = t - 0.5 * (tau_a + tau_b);
        let src = source_at(s_mid.max(0.0));
        let part = convolve_masses(&table, &src, out_xs);
        for (o, p) in out.iter_mut().zip(part) {
            *o += p;
        }
    }
    out
}

/// Space–time field on a uniform x-grid and a list of time levels.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeField {
    pub grid: UniformGrid,
    pub times: Vec<f64>,
    /// `rows[n][i]` = value at `(x_i, times[n])`.
    pub rows: Vec<Vec<f64>>,
}

impl TimeField {
    pub fn zeros(grid: UniformGrid, times: Vec<f64>) -> Self {
        let rows = vec![vec![0.0; grid.n]; times.len()];
        TimeField { grid, times, rows }
    }

    pub fn sup_norm(&self) -> f64 {
        self.rows.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Discrete `L²` norm over space–time (trapezoid in both directions).
    pub fn l2_norm(&self) -> f64 {
        let row_l2sq: Vec<f64> = self
            .rows
            .iter()
            .map(|row| {
                let sq: Vec<f64> = row.iter().map(|v| v * v).collect();
                trapezoid_uniform(&sq, self.grid.dx)
            })
            .collect();
        trapezoid(&self.times, &row_l2sq).max(0.0).sqrt()
    }

    /// Row values linearly interpolated in time.
    pub fn row_at_time(&self, s: f64) -> Vec<f64> {
        let n = self.times.len();
        if s <= self.times[0] {
            return self.rows[0].clone();
        }
        if s >= self.times[n - 1] {
            return self.rows[n - 1].clone();
        }
        let idx = self.times.partition_point(|&v| v <= s);
        let (t0, t1) = (self.times[idx - 1], self.times[idx]);
        let w = (s - t0) / (t1 - t0);
        self.rows[idx - 1]
            .iter()
            .zip(&self.rows[idx])
            .map(|(a, b)| a * (1.0 - w) + b * w)
            .collect()
    }

    /// Bilinear value at `(x, t)`.
    pub fn at(&self, x: f64, t: f64) -> f64 {
        let n = self.times.len();
        let (idx, w) = if t <= self.times[0] {
            (1, 0.0)
        } else if t >= self.times[n - 1] {
            (n - 1, 1.0)
        } else {
            let idx = self.times.partition_point(|&v| v <= t);
            let (t0, t1) = (self.times[idx - 1], self.times[idx]);
            (idx, (t - t0) / (t1 - t0))
        };
        let lo = self.grid.interp(&self.rows[idx - 1], x);
        let hi = self.grid.interp(&self.rows[idx], x);
        lo * (1.0 - w) + hi * w
    }
}

/// Flux density `J(x,t)` samples with an optionally finer initial row
/// (`J(·,0) = u₀′ + θ₁` can be much sharper than the evolved rows) and the
/// Hölder exponent at which its norm is tracked.
#[derive(Debug, Clone)]
pub struct FluxField {
    pub field: TimeField,
    /// Finely sampled initial row `(xs, values)`; used for `t` below the
    /// first stored level and for sup-norm reporting.
    pub fine_row0: Option<(Vec<f64>, Vec<f64>)>,
    /// Hölder exponent for norm tracking, in `(0, 1/4)`.
    pub alpha: f64,
}

impl FluxField {
    pub fn zeros(grid: UniformGrid, times: Vec<f64>, alpha: f64) -> Self {
        FluxField { field: TimeField::zeros(grid, times), fine_row0: None, alpha }
    }

    /// Value at `(x,t)`; below the first time level the initial row is
    /// blended linearly against level 1 using the fine samples if present.
    pub fn eval(&self, x: f64, t: f64) -> f64 {
        if let Some((xs, vals)) = &self.fine_row0 {
            let t1 = if self.field.times.len() > 1 { self.field.times[1] } else { f64::INFINITY };
            if t <= self.field.times[0] {
                return interp_linear(xs, vals, x);
            }
            if t < t1 {
                let w = (t - self.field.times[0]) / (t1 - self.field.times[0]);
                let row0 = interp_linear(xs, vals, x);
                let row1 = self.field.grid.interp(&self.field.rows[1], x);
                return row0 * (1.0 - w) + row1 * w;
            }
        }
        self.field.at(x, t)
    }

    /// Sup norm over stored rows and the fine initial row.
    pub fn sup_norm(&self) -> f64 {
        let mut m = self.field.sup_norm();
        if let Some((_, vals)) = &self.fine_row0 {
            m = vals.iter().fold(m, |acc, v| acc.max(v.abs()));
        }
        m
    }
}

/// Norm summary of a flux field: sup, space–time `L²`, and empirical Hölder
/// constants (overall, x-direction, t-direction) at exponent `alpha`.
#[derive(Debug, Clone, Serialize)]
pub struct NormReport {
    pub sup: f64,
    pub l2: f64,
    pub holder: f64,
    pub holder_x: f64,
    pub holder_t: f64,
    pub alpha: f64,
}

impl NormReport {
    /// Combined norm `J̄(T)` = max of the three components, used by the
    /// dilation-bound certificate.
    pub fn combined(&self) -> f64 {
        self.sup.max(self.l2).max(self.holder)
    }
}

/// Estimates sup, `L²`, and Hölder-`α` constants of a flux field by seeded
/// random pair sampling (at most `max_pairs` pairs; deterministic per seed).
pub fn norm_report(flux: &FluxField, alpha: f64, seed: u64, max_pairs: usize) -> NormReport {
    assert!(alpha > 0.0 && alpha < 0.25, "Hölder exponent must lie in (0, 1/4)");
    let field = &flux.field;
    let (nt, nx) = (field.times.len(), field.grid.n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut holder: f64 = 0.0;
    let mut holder_x: f64 = 0.0;
    let mut holder_t: f64 = 0.0;
    let total_nodes = nt * nx;
    let pairs = max_pairs.min(total_nodes.saturating_mul(4)).max(16);
    for _ in 0..pairs {
        let (i1, n1) = (rng.gen_range(0..nx), rng.gen_range(0..nt));
        let (i2, n2) = (rng.gen_range(0..nx), rng.gen_range(0..nt));
        if i1 == i2 && n1 == n2 {
            continue;
        }
        let dv = (field.rows[n1][i1] - field.rows[n2][i2]).abs();
        let dx = field.grid.x(i1) - field.grid.x(i2);
        let dt = field.times[n1] - field.times[n2];
        let dist = (dx * dx + dt * dt).sqrt();
        holder = holder.max(dv / dist.powf(alpha));
        // Directional estimates from the same draws, projected onto rows and
        // columns.
        if n1 != n2 {
            let dvt = (field.rows[n1][i1] - field.rows[n2][i1]).abs();
            holder_t = holder_t.max(dvt / dt.abs().powf(alpha));
        }
        if i1 != i2 {
            let dvx = (field.rows[n1][i1] - field.rows[n1][i2]).abs();
            holder_x = holder_x.max(dvx / dx.abs().powf(alpha));
        }
    }
    NormReport { sup: flux.sup_norm(), l2: field.l2_norm(), holder, holder_x, holder_t, alpha }
}

/// Duhamel representation of the velocity on the grid of `data`:
/// `u(·,t) = H(t)⋆u₀ + ∫₀ᵗ H_ξ(t−s) ⋆ θ_t(·,s) ds`,
/// evaluated at the time levels of `theta_t`.
pub fn duhamel_velocity(
    data: &InitialData,
    theta_t: &TimeField,
    quad: &HeatQuadrature,
) -> Result<TimeField> {
    if theta_t.grid != data.grid {
        return Err(Error::GridMismatch(
            "theta_t field grid differs from initial-data grid".into(),
        ));
    }
    let out_xs = data.grid.xs();
    let u0_mass = MassCurve::from_uniform_density(&data.grid, &data.u0);
    let mut out = TimeField::zeros(data.grid, theta_t.times.clone());
    for (n, &t) in theta_t.times.iter().enumerate() {
        if t <= 0.0 {
            out.rows[n] = data.u0.clone();
            continue;
        }
        let mut row = convolve_exact(KernelKind::Value, t, quad, &u0_mass, &out_xs);
        let correction = heat_time_integral(KernelKind::Derivative, t, quad, &out_xs, |s| {
            MassCurve::from_uniform_density(&theta_t.grid, &theta_t.row_at_time(s))
        });
        for (r, c) in row.iter_mut().zip(correction) {
            *r += c;
        }
        out.rows[n] = row;
    }
    Ok(out)
}

/// Uniform-grid flux map
/// `M(J) = H(t)⋆(u₀′+θ₁) + ∫₀ᵗ H ⋆ [2θ_s + c′(θ)c(θ)θ_y²] − ∫₀ᵗ H_ξ ⋆ [c²(θ)θ_y − u]`,
/// with all fields sampled on the grid of `data`. Used for verification and
/// smooth runs; the coupled solver feeds the same integrals from
/// characteristic-plane level curves instead.
pub fn flux_map(
    data: &InitialData,
    theta: &TimeField,
    theta_t: &TimeField,
    theta_x: &TimeField,
    u_field: &TimeField,
    params: &crate::model::LeslieParams,
    quad: &HeatQuadrature,
    out_times: &[f64],
) -> Result<TimeField> {
    for f in [theta, theta_t, theta_x, u_field] {
        if f.grid != data.grid {
            return Err(Error::GridMismatch("flux_map fields must share the data grid".into()));
        }
    }
    let out_xs = data.grid.xs();
    let row0 = MassCurve::from_uniform_density(&data.grid, &data.flux_initial());
    let mut out = TimeField::zeros(data.grid, out_times.to_vec());
    for (n, &t) in out_times.iter().enumerate() {
        if t <= 0.0 {
            out.rows[n] = data.flux_initial();
            continue;
        }
        let mut row = convolve_exact(KernelKind::Value, t, quad, &row0, &out_xs);
        let src_a = |s: f64| {
            let th = theta.row_at_time(s);
            let tht = theta_t.row_at_time(s);
            let thx = theta_x.row_at_time(s);
            let dens: Vec<f64> = (0..th.len())
                .map(|i| {
                    let (c, cp) = params.wave_speed(th[i]);
                    2.0 * tht[i] + cp * c * thx[i] * thx[i]
                })
                .collect();
            MassCurve::from_uniform_density(&theta.grid, &dens)
        };
        let src_b = |s: f64| {
            let th = theta.row_at_time(s);
            let thx = theta_x.row_at_time(s);
            let u = u_field.row_at_time(s);
            let dens: Vec<f64> = (0..th.len())
                .map(|i| {
                    let (c, _) = params.wave_speed(th[i]);
                    c * c * thx[i] - u[i]
                })
                .collect();
            MassCurve::from_uniform_density(&theta.grid, &dens)
        };
        let part_a = heat_time_integral(KernelKind::Value, t, quad, &out_xs, src_a);
        let part_b = heat_time_integral(KernelKind::Derivative, t, quad, &out_xs, src_b);
        for i in 0..row.len() {
            row[i] += part_a[i] - part_b[i];
        }
        out.rows[n] = row;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn kernel_value_at_origin() {
        assert_abs_diff_eq!(kernel(0.0, 1.0), 0.2820948, epsilon = 1e-7);
    }

    #[test]
    #[should_panic(expected = "t > 0")]
    fn kernel_rejects_nonpositive_time() {
        kernel(0.0, 0.0);
    }

    #[test]
    fn kernel_mass_is_one() {
        for t in [0.1_f64, 1.0, 10.0] {
            let sigma = (2.0 * t).sqrt();
            let n = 40_001;
            let span = 10.0 * sigma;
            let dx = 2.0 * span / (n - 1) as f64;
            let vals: Vec<f64> = (0..n).map(|i| kernel(-span + i as f64 * dx, t)).collect();
            assert_abs_diff_eq!(trapezoid_uniform(&vals, dx), 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn kernel_dx_matches_difference_quotient() {
        let h = 1e-6;
        for (x, t) in [(0.3, 0.7), (-1.2, 0.25), (2.0, 3.0)] {
            let numeric = (kernel(x + h, t) - kernel(x - h, t)) / (2.0 * h);
            assert_abs_diff_eq!(kernel_dx(x, t), numeric, epsilon = 1e-6);
        }
    }

    #[test]
    fn time_integrated_kernels_match_quadrature() {
        // Oracle: fine graded quadrature of ∫₀ᵀ K(ξ,τ)dτ.
        let t = 0.37;
        for xi in [0.0, 0.05, 0.4, -0.8] {
            let m = 400_000;
            let mut acc_h = 0.0;
            let mut acc_hx = 0.0;
            for j in 0..m {
                // square-root-stretched nodes resolve the τ→0 endpoint
                let a = t * ((j as f64 + 0.5) / m as f64).powi(2);
                let b_edge = t * ((j as f64 + 1.0) / m as f64).powi(2);
                let a_edge = t * (j as f64 / m as f64).powi(2);
                let w = b_edge - a_edge;
                acc_h += kernel(xi, a) * w;
                acc_hx += kernel_dx(xi, a) * w;
            }
            assert_abs_diff_eq!(kernel_time_integral(xi, t), acc_h, epsilon = 2e-6);
            assert_abs_diff_eq!(kernel_dx_time_integral(xi, t), acc_hx, epsilon = 2e-5);
        }
    }

    #[test]
    fn semigroup_identity() {
        // (H(·,t1) ⋆ H(·,t2))(x) = H(x, t1+t2) within 1e−8.
        let (t1, t2) = (0.3, 0.5);
        let grid = UniformGrid::covering(-14.0, 14.0, 8193);
        let h1: Vec<f64> = grid.xs().iter().map(|&x| kernel(x, t1)).collect();
        let src = MassCurve::from_uniform_density(&grid, &h1);
        let quad = HeatQuadrature::default();
        let out_xs = [-2.0, -0.5, 0.0, 0.7, 1.9];
        let conv = convolve_exact(KernelKind::Value, t2, &quad, &src, &out_xs);
        for (&x, &v) in out_xs.iter().zip(&conv) {
            assert_abs_diff_eq!(v, kernel(x, t1 + t2), epsilon = 1e-8);
        }
    }

    #[test]
    fn tabulated_weights_conserve_interval_mass() {
        // ∫ W dξ over the line = τb − τa for the H-kernel weight.
        let quad = HeatQuadrature::default();
        let table = KernelTable::time_integrated(KernelKind::Value, 0.01, 0.21, &quad);
        let n = 200_001;
        let span = table.cutoff();
        let dx = 2.0 * span / (n - 1) as f64;
        let vals: Vec<f64> = (0..n).map(|i| table.eval(-span + i as f64 * dx)).collect();
        assert_abs_diff_eq!(trapezoid_uniform(&vals, dx), 0.2, epsilon = 1e-5);
    }

    #[test]
    fn heat_time_integral_of_constant_source() {
        // With K = H and a source ≡ 1 on a wide interval, the integral is
        // t − tau_floor (kernel mass × duration) in the interior.
        let quad = HeatQuadrature::default();
        let grid = UniformGrid::covering(-20.0, 20.0, 4001);
        let t = 0.5;
        let out = heat_time_integral(KernelKind::Value, t, &quad, &[0.0, 0.3], |_s| {
            MassCurve::from_uniform_density(&grid, &vec![1.0; grid.n])
        });
        for v in out {
            assert_abs_diff_eq!(v, t - quad.tau_floor, epsilon = 2e-4);
        }
    }

    #[test]
    fn norm_report_on_simple_fields() {
        let grid = UniformGrid::covering(-3.0, 3.0, 61);
        let times: Vec<f64> = (0..11).map(|n| n as f64 * 0.1).collect();
        let mut flux = FluxField::zeros(grid, times.clone(), 0.2);
        let zero_report = norm_report(&flux, 0.2, 7, 10_000);
        assert_eq!(zero_report.sup, 0.0);
        assert_eq!(zero_report.l2, 0.0);
        assert_eq!(zero_report.holder, 0.0);

        // J = sin(x), constant in t: sup = sin at grid extreme, t-Hölder 0.
        for row in flux.field.rows.iter_mut() {
            for (i, v) in row.iter_mut().enumerate() {
                *v = (grid.x(i)).sin();
            }
        }
        let report = norm_report(&flux, 0.2, 7, 50_000);
        assert_abs_diff_eq!(report.sup, 1.0, epsilon = 1e-2);
        assert_eq!(report.holder_t, 0.0);
        // Brute-force pairwise x-direction maximum on the coarse grid.
        let mut brute: f64 = 0.0;
        for i in 0..grid.n {
            for j in 0..grid.n {
                if i != j {
                    let dv = ((grid.x(i)).sin() - (grid.x(j)).sin()).abs();
                    brute = brute.max(dv / (grid.x(i) - grid.x(j)).abs().powf(0.2));
                }
            }
        }
        assert!(report.holder_x <= brute + 1e-12);
        assert!(report.holder_x > 0.5 * brute);
    }

    #[test]
    fn duhamel_velocity_pure_heat_and_shifted_kernel() {
        use crate::num::UniformGrid;
        let grid = UniformGrid::covering(-12.0, 12.0, 4097);
        let t0 = 0.25;
        let data = InitialData::from_functions(
            grid,
            0.0,
            (-12.0, 12.0),
            false,
            |x| kernel(x, t0),
            |_| 0.0,
            |_| 0.0,
            |x| kernel_dx(x, t0),
            |_| 0.0,
        );
        let times = vec![0.0, 0.2, 0.5];
        let theta_t = TimeField::zeros(grid, times.clone());
        let quad = HeatQuadrature::default();
        let u = duhamel_velocity(&data, &theta_t, &quad).unwrap();
        // u(x,t) = H(x, t0 + t) within 1e−6, sup norm non-increasing.
        let mut sups = Vec::new();
        for (n, &t) in times.iter().enumerate() {
            let tt = t0 + t;
            for i in (0..grid.n).step_by(53) {
                assert_abs_diff_eq!(u.rows[n][i], kernel(grid.x(i), tt), epsilon = 1e-6);
            }
            sups.push(u.rows[n].iter().fold(0.0_f64, |m, v| m.max(v.abs())));
        }
        assert!(sups[0] >= sups[1] && sups[1] >= sups[2]);
    }

    #[test]
    fn duhamel_velocity_is_sup_contraction() {
        // Heat averaging: for two initial conditions with θ_t ≡ 0 the output
        // gap never exceeds the input gap.
        let grid = UniformGrid::covering(-10.0, 10.0, 2049);
        let make = |f: fn(f64) -> f64| {
            InitialData::from_functions(grid, 0.0, (-10.0, 10.0), false, f, |_| 0.0, |_| 0.0, |_| 0.0, |_| 0.0)
        };
        let d1 = make(|x| (-x * x).exp());
        let d2 = make(|x| 0.3 * (-((x - 1.0) * (x - 1.0))).exp());
        let times = vec![0.0, 0.3];
        let theta_t = TimeField::zeros(grid, times);
        let quad = HeatQuadrature::default();
        let u1 = duhamel_velocity(&d1, &theta_t, &quad).unwrap();
        let u2 = duhamel_velocity(&d2, &theta_t, &quad).unwrap();
        let gap0: f64 = (0..grid.n).map(|i| (d1.u0[i] - d2.u0[i]).abs()).fold(0.0, f64::max);
        let gap1: f64 = (0..grid.n).map(|i| (u1.rows[1][i] - u2.rows[1][i]).abs()).fold(0.0, f64::max);
        assert!(gap1 <= gap0 * (1.0 + 1e-9), "gap grew: {gap0} -> {gap1}");
    }

    #[test]
    fn flux_map_constant_theta_cases() {
        let grid = UniformGrid::covering(-12.0, 12.0, 4097);
        let quad = HeatQuadrature::default();
        let params = crate::model::LeslieParams::special();
        let times = vec![0.0, 0.25, 0.5];
        // θ ≡ const, u₀ ≡ 0, θ₁ ≡ 0 → M(J) ≡ 0.
        let zero_data = InitialData::from_functions(
            grid, 0.7, (-1.0, 1.0), true,
            |_| 0.0, |_| 0.7, |_| 0.0, |_| 0.0, |_| 0.0,
        );
        let th = {
            let mut f = TimeField::zeros(grid, times.clone());
            for row in f.rows.iter_mut() {
                row.iter_mut().for_each(|v| *v = 0.7);
            }
            f
        };
        let zf = TimeField::zeros(grid, times.clone());
        let m = flux_map(&zero_data, &th, &zf, &zf, &zf, &params, &quad, &times).unwrap();
        assert!(m.sup_norm() < 1e-12);

        // u₀′+θ₁ Gaussian (θ₁ carries it), θ ≡ const → heat-evolved Gaussian.
        let t0 = 0.25;
        let gauss_data = InitialData::from_functions(
            grid, 0.7, (-12.0, 12.0), false,
            |_| 0.0, |_| 0.7, |x| kernel(x, t0), |_| 0.0, |_| 0.0,
        );
        let m2 = flux_map(&gauss_data, &th, &zf, &zf, &zf, &params, &quad, &times).unwrap();
        for (n, &t) in times.iter().enumerate() {
            for i in (0..grid.n).step_by(101) {
                let expect = if t <= 0.0 { kernel(grid.x(i), t0) } else { kernel(grid.x(i), t0 + t) };
                assert_abs_diff_eq!(m2.rows[n][i], expect, epsilon = 1e-6);
            }
        }
    }
}
