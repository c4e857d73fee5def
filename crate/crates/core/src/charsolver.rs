//! Characteristic-coordinate solver for the damped quasilinear wave part of
//! the model, with a prescribed flux forcing `J(x,t)`.
//!
//! The wave equation for the director angle,
//!
//! ```text
//! θ_tt + γ₁θ_t = c(θ)(c(θ)θ_x)_x − (h/g)(J − hθ_t),
//! ```
//!
//! is rewritten in characteristic coordinates `(X,Y)` that label backward /
//! forward characteristics. With the Riemann variables `R = θ_t + cθ_x`,
//! `S = θ_t − cθ_x` compactified onto the circle via `w = 2 arctan R`,
//! `z = 2 arctan S`, and the dilation weights `p = (1+R²)/X_x`,
//! `q = −(1+S²)/Y_x`, the system becomes *semilinear* with smooth bounded
//! right-hand sides — gradient blow-up of `θ` corresponds merely to `w` or
//! `z` passing through `±π`, so the solver marches straight through the
//! singularity.
//!
//! The initial line `t = 0` maps to a monotone curve `Γ₀` in the `(X,Y)`
//! plane carrying boundary data (`p̄ = q̄ = 1`); the solver fills the
//! rectangle on the future side of `Γ₀` with a second-order (Heun)
//! predictor–corrector marching scheme, integrating `ln p`, `ln q` so the
//! dilation weights stay positive by construction. The physical coordinates
//! `(x,t)` are carried along as two extra unknowns; each has two admissible
//! update routes (step in `X` or in `Y`), whose discrepancy is recorded
//! per node as a mixed-partial consistency residual.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::heat::{FluxField, MassCurve};
use crate::initial::InitialData;
use crate::model::LeslieParams;
use crate::num::interp_linear;

/// A node is flagged singular when `1 + cos w` or `1 + cos z` drops below
/// this tolerance (`|tan(w/2)|` then exceeds ≈ 44.7).
pub const BLOWUP_TOL: f64 = 1e-3;

/// Pointwise cap applied to `tan(w/2)`, `tan(z/2)` when recovering `θ_t`,
/// `θ_x` at flagged nodes (the tangent at the flag tolerance).
pub fn tan_cap() -> f64 {
    ((2.0 - BLOWUP_TOL) / BLOWUP_TOL).sqrt()
}

fn wrap_angle(v: f64) -> f64 {
    // maps to [-π, π)
    (v + PI).rem_euclid(2.0 * PI) - PI
}

/// Interpolates an angle linearly along the shortest arc.
fn lerp_angle(a: f64, b: f64, s: f64) -> f64 {
    let d = wrap_angle(b - a);
    wrap_angle(a + s * d)
}

/// The image of the initial line in the `(X,Y)` plane with its boundary
/// data, sampled at the initial-data grid nodes.
#[derive(Debug, Clone)]
pub struct Gamma0 {
    /// Physical positions (ascending).
    pub x: Vec<f64>,
    /// `X(x) = ∫₀ˣ (1+R²(y,0)) dy` (strictly increasing).
    pub big_x: Vec<f64>,
    /// `Y(x) = ∫ₓ⁰ (1+S²(y,0)) dy` (strictly decreasing).
    pub big_y: Vec<f64>,
    pub theta: Vec<f64>,
    /// `w̄ = 2 arctan R(x,0)`.
    pub w: Vec<f64>,
    /// `z̄ = 2 arctan S(x,0)`.
    pub z: Vec<f64>,
}

/// Boundary values at a point of `Γ₀` (where `p̄ = q̄ = 1`, `t = 0`).
#[derive(Debug, Clone, Copy)]
pub struct BoundaryPoint {
    pub x: f64,
    pub big_x: f64,
    pub big_y: f64,
    pub theta: f64,
    pub w: f64,
    pub z: f64,
}

impl Gamma0 {
    pub fn x_range(&self) -> (f64, f64) {
        (self.big_x[0], *self.big_x.last().unwrap())
    }

    pub fn y_range(&self) -> (f64, f64) {
        (*self.big_y.last().unwrap(), self.big_y[0])
    }

    /// Euclidean distance between the two ends of `Γ₀` (the vertices of the
    /// computational domain that lie on the initial line).
    pub fn d_span(&self) -> f64 {
        let (x0, x1) = self.x_range();
        let (y0, y1) = self.y_range();
        ((x1 - x0).powi(2) + (y1 - y0).powi(2)).sqrt()
    }

    /// Largest `|X(x) + Y(x)|` along the curve (bounded by four times the
    /// total initial energy).
    pub fn max_abs_x_plus_y(&self) -> f64 {
        self.big_x
            .iter()
            .zip(&self.big_y)
            .map(|(a, b)| (a + b).abs())
            .fold(0.0, f64::max)
    }

    /// `Y` coordinate of the curve at coordinate `X` (linear interpolation).
    pub fn y_at_x(&self, bx: f64) -> f64 {
        interp_linear(&self.big_x, &self.big_y, bx)
    }

    /// `X` coordinate of the curve at coordinate `Y`.
    pub fn x_at_y(&self, by: f64) -> f64 {
        // big_y is descending; search on the reversed view.
        let n = self.big_y.len();
        if by >= self.big_y[0] {
            return self.big_x[0];
        }
        if by <= self.big_y[n - 1] {
            return self.big_x[n - 1];
        }
        let idx = self.big_y.partition_point(|&v| v > by);
        let (y0, y1) = (self.big_y[idx - 1], self.big_y[idx]);
        let s = if y1 == y0 { 0.5 } else { (by - y0) / (y1 - y0) };
        self.big_x[idx - 1] + s * (self.big_x[idx] - self.big_x[idx - 1])
    }

    fn boundary_interp(&self, idx: usize, s: f64) -> BoundaryPoint {
        let lin = |v: &Vec<f64>| v[idx - 1] + s * (v[idx] - v[idx - 1]);
        BoundaryPoint {
            x: lin(&self.x),
            big_x: lin(&self.big_x),
            big_y: lin(&self.big_y),
            theta: lin(&self.theta),
            w: lerp_angle(self.w[idx - 1], self.w[idx], s),
            z: lerp_angle(self.z[idx - 1], self.z[idx], s),
        }
    }

    /// Boundary data at curve coordinate `X = bx`.
    pub fn at_big_x(&self, bx: f64) -> BoundaryPoint {
        let n = self.big_x.len();
        let bx = bx.clamp(self.big_x[0], self.big_x[n - 1]);
        let idx = self.big_x.partition_point(|&v| v <= bx).clamp(1, n - 1);
        let (a, b) = (self.big_x[idx - 1], self.big_x[idx]);
        let s = if b == a { 0.5 } else { (bx - a) / (b - a) };
        self.boundary_interp(idx, s)
    }

    /// Boundary data at curve coordinate `Y = by`.
    pub fn at_big_y(&self, by: f64) -> BoundaryPoint {
        let n = self.big_y.len();
        let by = by.clamp(self.big_y[n - 1], self.big_y[0]);
        let idx = self.big_y.partition_point(|&v| v > by).clamp(1, n - 1);
        let (a, b) = (self.big_y[idx - 1], self.big_y[idx]);
        let s = if b == a { 0.5 } else { (by - a) / (b - a) };
        self.boundary_interp(idx, s)
    }
}

/// Builds `Γ₀` from initial data: coordinates by cumulative trapezoid of
/// `1+R²` and `1+S²` anchored at `x = 0`, boundary angles from the Riemann
/// variables.
pub fn build_gamma0(data: &InitialData, params: &LeslieParams) -> Result<Gamma0> {
    let (r0, s0) = data.riemann_initial(params);
    let n = data.grid.n;
    let dx = data.grid.dx;
    let mut big_x = Vec::with_capacity(n);
    let mut big_y = Vec::with_capacity(n);
    let mut accx = 0.0;
    let mut accy = 0.0;
    big_x.push(0.0);
    big_y.push(0.0);
    for i in 1..n {
        let fx0 = 1.0 + r0[i - 1] * r0[i - 1];
        let fx1 = 1.0 + r0[i] * r0[i];
        accx += 0.5 * dx * (fx0 + fx1);
        big_x.push(accx);
        let fy0 = 1.0 + s0[i - 1] * s0[i - 1];
        let fy1 = 1.0 + s0[i] * s0[i];
        accy -= 0.5 * dx * (fy0 + fy1);
        big_y.push(accy);
    }
    // anchor the integrals at x = 0
    let i0 = data.grid.frac_index(0.0).round() as usize;
    let (x_shift, y_shift) = (big_x[i0], big_y[i0]);
    for v in big_x.iter_mut() {
        *v -= x_shift;
    }
    for v in big_y.iter_mut() {
        *v -= y_shift;
    }
    for win in big_x.windows(2) {
        if win[1] <= win[0] {
            return Err(Error::Solver("gamma0: X(x) not strictly increasing".into()));
        }
    }
    for win in big_y.windows(2) {
        if win[1] >= win[0] {
            return Err(Error::Solver("gamma0: Y(x) not strictly decreasing".into()));
        }
    }
    Ok(Gamma0 {
        x: data.grid.xs(),
        big_x,
        big_y,
        theta: data.theta0.clone(),
        w: r0.iter().map(|r| 2.0 * r.atan()).collect(),
        z: s0.iter().map(|s| 2.0 * s.atan()).collect(),
    })
}

/// Source of the flux forcing during characteristic marching.
pub enum FluxSource<'a> {
    /// `J ≡ 0` (decoupled wave equation).
    Zero,
    /// Sampled field with bilinear interpolation.
    Field(&'a FluxField),
    /// Analytic closure (used by verification oracles).
    Function(&'a (dyn Fn(f64, f64) -> f64 + Sync)),
}

impl FluxSource<'_> {
    #[inline]
    pub fn eval(&self, x: f64, t: f64) -> f64 {
        match self {
            FluxSource::Zero => 0.0,
            FluxSource::Field(f) => f.eval(x, t.max(0.0)),
            FluxSource::Function(f) => f(x, t.max(0.0)),
        }
    }
}

/// Per-node unknowns of the semilinear system.
#[derive(Debug, Clone, Copy)]
struct Node {
    theta: f64,
    w: f64,
    z: f64,
    p: f64,
    q: f64,
    x: f64,
    t: f64,
    j: f64,
}

/// Right-hand sides for a step in the `X` direction.
struct DerivX {
    z: f64,
    ln_q: f64,
    theta: f64,
    x: f64,
    t: f64,
}

/// Right-hand sides for a step in the `Y` direction.
struct DerivY {
    w: f64,
    ln_p: f64,
    theta: f64,
    x: f64,
    t: f64,
}

/// Shared trigonometric pieces of the right-hand sides.
struct Trig {
    sw: f64,
    sz: f64,
    cw2: f64,
    cz2: f64,
    c: f64,
    cp: f64,
    damp: f64,
    jfac: f64,
}

fn trig(params: &LeslieParams, n: &Node) -> Trig {
    let (c, cp) = params.wave_speed(n.theta);
    let g = params.g_coeff(n.theta);
    let h = params.h_coeff(n.theta);
    Trig {
        sw: n.w.sin(),
        sz: n.z.sin(),
        cw2: 0.5 * (1.0 + n.w.cos()),
        cz2: 0.5 * (1.0 + n.z.cos()),
        c,
        cp,
        damp: h * h / g - params.gamma1,
        jfac: h / g,
    }
}

fn rhs_x(params: &LeslieParams, n: &Node) -> DerivX {
    let t = trig(params, n);
    let z_bracket = t.cp / (4.0 * t.c * t.c) * (t.cw2 - t.cz2)
        + t.damp / (4.0 * t.c) * (t.sw * t.cz2 + t.sz * t.cw2)
        - t.jfac / t.c * n.j * t.cz2 * t.cw2;
    let q_bracket = t.cp / (8.0 * t.c * t.c) * (t.sw - t.sz)
        + t.damp / (2.0 * t.c) * (0.25 * t.sw * t.sz + (1.0 - t.cz2) * t.cw2)
        - t.jfac / (2.0 * t.c) * n.j * t.sz * t.cw2;
    DerivX {
        z: n.p * z_bracket,
        ln_q: n.p * q_bracket,
        theta: t.sw / (4.0 * t.c) * n.p,
        x: 0.5 * t.cw2 * n.p,
        t: 0.5 * t.cw2 * n.p / t.c,
    }
}

fn rhs_y(params: &LeslieParams, n: &Node) -> DerivY {
    let t = trig(params, n);
    let w_bracket = t.cp / (4.0 * t.c * t.c) * (t.cz2 - t.cw2)
        + t.damp / (4.0 * t.c) * (t.sw * t.cz2 + t.sz * t.cw2)
        - t.jfac / t.c * n.j * t.cz2 * t.cw2;
    let p_bracket = t.cp / (8.0 * t.c * t.c) * (t.sz - t.sw)
        + t.damp / (2.0 * t.c) * (0.25 * t.sw * t.sz + (1.0 - t.cw2) * t.cz2)
        - t.jfac / (2.0 * t.c) * n.j * t.sw * t.cz2;
    DerivY {
        w: n.q * w_bracket,
        ln_p: n.q * p_bracket,
        theta: t.sz / (4.0 * t.c) * n.q,
        x: -0.5 * t.cz2 * n.q,
        t: 0.5 * t.cz2 * n.q / t.c,
    }
}

/// Magnitudes of the `ln p` / `ln q` brackets (the `B` of `p_Y = B p q`),
/// used by the dilation-bound certificate.
fn pq_bracket_sup(params: &LeslieParams, n: &Node) -> f64 {
    let t = trig(params, n);
    let bp = t.cp / (8.0 * t.c * t.c) * (t.sz - t.sw)
        + t.damp / (2.0 * t.c) * (0.25 * t.sw * t.sz + (1.0 - t.cw2) * t.cz2)
        - t.jfac / (2.0 * t.c) * n.j * t.sw * t.cz2;
    let bq = t.cp / (8.0 * t.c * t.c) * (t.sw - t.sz)
        + t.damp / (2.0 * t.c) * (0.25 * t.sw * t.sz + (1.0 - t.cz2) * t.cw2)
        - t.jfac / (2.0 * t.c) * n.j * t.sz * t.cw2;
    bp.abs().max(bq.abs())
}

/// Solved state on the rectangular `(X,Y)` lattice.
#[derive(Debug, Clone)]
pub struct CharState {
    pub nx: usize,
    pub ny: usize,
    pub x_axis0: f64,
    pub y_axis0: f64,
    pub dx: f64,
    pub dy: f64,
    pub theta: Vec<f64>,
    pub w: Vec<f64>,
    pub z: Vec<f64>,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub x: Vec<f64>,
    pub t: Vec<f64>,
    /// Flux value used at each node.
    pub j: Vec<f64>,
    /// Mixed-partial consistency residual of `x` (gap between the two
    /// update routes) and of `t`.
    pub res_x: Vec<f64>,
    pub res_t: Vec<f64>,
    /// Node on the future side of `Γ₀` and below the time cap.
    pub valid: Vec<bool>,
    pub gamma0: Gamma0,
}

impl CharState {
    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn big_x_of(&self, i: usize) -> f64 {
        self.x_axis0 + self.dx * i as f64
    }

    pub fn big_y_of(&self, j: usize) -> f64 {
        self.y_axis0 + self.dy * j as f64
    }

    /// Smallest `1+cos z` and `1+cos w` over valid nodes.
    pub fn min_one_plus_cos(&self) -> (f64, f64) {
        let mut mw = f64::INFINITY;
        let mut mz = f64::INFINITY;
        for k in 0..self.valid.len() {
            if self.valid[k] {
                mw = mw.min(1.0 + self.w[k].cos());
                mz = mz.min(1.0 + self.z[k].cos());
            }
        }
        (mw, mz)
    }

    /// Extrema of the dilation weights over valid nodes.
    pub fn pq_extrema(&self) -> (f64, f64, f64, f64) {
        let mut mnp = f64::INFINITY;
        let mut mxp: f64 = 0.0;
        let mut mnq = f64::INFINITY;
        let mut mxq: f64 = 0.0;
        for k in 0..self.valid.len() {
            if self.valid[k] {
                mnp = mnp.min(self.p[k]);
                mxp = mxp.max(self.p[k]);
                mnq = mnq.min(self.q[k]);
                mxq = mxq.max(self.q[k]);
            }
        }
        (mnp, mxp, mnq, mxq)
    }

    /// Largest magnitude of the `ln p`/`ln q` brackets over valid nodes.
    pub fn sup_pq_bracket(&self, params: &LeslieParams) -> f64 {
        let mut sup: f64 = 0.0;
        for k in 0..self.valid.len() {
            if self.valid[k] {
                let n = Node {
                    theta: self.theta[k],
                    w: self.w[k],
                    z: self.z[k],
                    p: self.p[k],
                    q: self.q[k],
                    x: self.x[k],
                    t: self.t[k],
                    j: self.j[k],
                };
                sup = sup.max(pq_bracket_sup(params, &n));
            }
        }
        sup
    }

    /// Largest consistency residuals (mixed-partial discrepancies).
    pub fn max_residuals(&self) -> (f64, f64) {
        let rx = self.res_x.iter().cloned().fold(0.0, f64::max);
        let rt = self.res_t.iter().cloned().fold(0.0, f64::max);
        (rx, rt)
    }

    /// RMS consistency residuals over valid nodes.
    pub fn rms_residuals(&self) -> (f64, f64) {
        let mut sx = 0.0;
        let mut st = 0.0;
        let mut count = 0usize;
        for k in 0..self.valid.len() {
            if self.valid[k] {
                sx += self.res_x[k] * self.res_x[k];
                st += self.res_t[k] * self.res_t[k];
                count += 1;
            }
        }
        if count == 0 {
            (0.0, 0.0)
        } else {
            ((sx / count as f64).sqrt(), (st / count as f64).sqrt())
        }
    }

    /// Checks `x` monotone in `X` along every row where `1+cos w` is above
    /// the blow-up tolerance; returns the worst backward jump.
    pub fn x_monotonicity_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for j in 0..self.ny {
            for i in 1..self.nx {
                let (k0, k1) = (self.idx(i - 1, j), self.idx(i, j));
                if self.valid[k0]
                    && self.valid[k1]
                    && 1.0 + self.w[k0].cos() > BLOWUP_TOL
                    && 1.0 + self.w[k1].cos() > BLOWUP_TOL
                {
                    worst = worst.max(self.x[k0] - self.x[k1]);
                }
            }
        }
        worst
    }
}

/// Integrates the semilinear system on an `nx × ny` lattice spanning the
/// coordinate ranges of `Γ₀`, marching away from the curve. Nodes whose
/// physical time exceeds `t_cap` are left unfilled.
pub fn integrate_semilinear(
    gamma0: &Gamma0,
    flux: &FluxSource,
    params: &LeslieParams,
    nx: usize,
    ny: usize,
    t_cap: f64,
) -> Result<CharState> {
    assert!(nx >= 8 && ny >= 8);
    let (bx0, bx1) = gamma0.x_range();
    let (by0, by1) = gamma0.y_range();
    let dx = (bx1 - bx0) / (nx - 1) as f64;
    let dy = (by1 - by0) / (ny - 1) as f64;
    let size = nx * ny;
    let mut st = CharState {
        nx,
        ny,
        x_axis0: bx0,
        y_axis0: by0,
        dx,
        dy,
        theta: vec![0.0; size],
        w: vec![0.0; size],
        z: vec![0.0; size],
        p: vec![1.0; size],
        q: vec![1.0; size],
        x: vec![0.0; size],
        t: vec![-1.0; size],
        j: vec![0.0; size],
        res_x: vec![0.0; size],
        res_t: vec![0.0; size],
        valid: vec![false; size],
        gamma0: gamma0.clone(),
    };

    let node_at = |st: &CharState, k: usize| Node {
        theta: st.theta[k],
        w: st.w[k],
        z: st.z[k],
        p: st.p[k],
        q: st.q[k],
        x: st.x[k],
        t: st.t[k],
        j: st.j[k],
    };
    let boundary_node = |bp: &BoundaryPoint, flux: &FluxSource| Node {
        theta: bp.theta,
        w: bp.w,
        z: bp.z,
        p: 1.0,
        q: 1.0,
        x: bp.x,
        t: 0.0,
        j: flux.eval(bp.x, 0.0),
    };

    for j in 0..ny {
        let by = st.big_y_of(j);
        for i in 0..nx {
            let bx = st.big_x_of(i);
            // Future side of Γ₀?
            let y_curve = gamma0.y_at_x(bx);
            if by < y_curve - 1e-14 {
                continue; // past side
            }
            // X-direction source: previous lattice node, or the Γ₀ crossing
            // on this row when the predecessor sits on the past side. A
            // predecessor that is invalid for any other reason (beyond the
            // time cap) makes this node unreachable.
            let source_a = if i > 0 && st.valid[st.idx(i - 1, j)] {
                Some((node_at(&st, st.idx(i - 1, j)), dx))
            } else {
                let xc = gamma0.x_at_y(by);
                if i == 0 || st.big_x_of(i - 1) <= xc + 1e-9 * dx {
                    let xc = xc.clamp(bx - dx, bx);
                    let bp = gamma0.at_big_x(xc);
                    Some((boundary_node(&bp, flux), bx - xc))
                } else {
                    None
                }
            };
            // Y-direction source.
            let source_b = if j > 0 && st.valid[st.idx(i, j - 1)] {
                Some((node_at(&st, st.idx(i, j - 1)), dy))
            } else {
                let yc = y_curve;
                if j == 0 || st.big_y_of(j - 1) <= yc + 1e-9 * dy {
                    let yc = yc.clamp(by - dy, by);
                    let bp = gamma0.at_big_y(yc);
                    Some((boundary_node(&bp, flux), by - yc))
                } else {
                    None
                }
            };
            let (Some((node_a, h_a)), Some((node_b, h_b))) = (source_a, source_b) else {
                continue;
            };
            if node_a.t > t_cap && node_b.t > t_cap {
                continue; // beyond the requested time horizon
            }
            let k = st.idx(i, j);
            if h_a <= 1e-13 && h_b <= 1e-13 {
                // Node sits on Γ₀ (a corner); copy boundary data.
                let bp = gamma0.at_big_x(bx);
                st.theta[k] = bp.theta;
                st.w[k] = bp.w;
                st.z[k] = bp.z;
                st.p[k] = 1.0;
                st.q[k] = 1.0;
                st.x[k] = bp.x;
                st.t[k] = 0.0;
                st.j[k] = flux.eval(bp.x, 0.0);
                st.valid[k] = true;
                continue;
            }

            // Predictor.
            let da = rhs_x(params, &node_a);
            let db = rhs_y(params, &node_b);
            let theta_pred = 0.5 * (node_a.theta + h_a * da.theta + node_b.theta + h_b * db.theta);
            let x_pred = 0.5 * (node_a.x + h_a * da.x + node_b.x + h_b * db.x);
            let t_pred = (0.5 * (node_a.t + h_a * da.t + node_b.t + h_b * db.t)).max(0.0);
            let pred = Node {
                theta: theta_pred,
                w: wrap_angle(node_b.w + h_b * db.w),
                z: wrap_angle(node_a.z + h_a * da.z),
                p: (node_b.p.ln() + h_b * db.ln_p).exp(),
                q: (node_a.q.ln() + h_a * da.ln_q).exp(),
                x: x_pred,
                t: t_pred,
                j: flux.eval(x_pred, t_pred),
            };

            // Corrector (trapezoidal average of end-point slopes).
            let da2 = rhs_x(params, &pred);
            let db2 = rhs_y(params, &pred);
            let z_new = wrap_angle(node_a.z + 0.5 * h_a * (da.z + da2.z));
            let q_new = (node_a.q.ln() + 0.5 * h_a * (da.ln_q + da2.ln_q)).exp();
            let w_new = wrap_angle(node_b.w + 0.5 * h_b * (db.w + db2.w));
            let p_new = (node_b.p.ln() + 0.5 * h_b * (db.ln_p + db2.ln_p)).exp();
            let theta_a = node_a.theta + 0.5 * h_a * (da.theta + da2.theta);
            let theta_b = node_b.theta + 0.5 * h_b * (db.theta + db2.theta);
            let x_a = node_a.x + 0.5 * h_a * (da.x + da2.x);
            let x_b = node_b.x + 0.5 * h_b * (db.x + db2.x);
            let t_a = node_a.t + 0.5 * h_a * (da.t + da2.t);
            let t_b = node_b.t + 0.5 * h_b * (db.t + db2.t);
            let x_new = 0.5 * (x_a + x_b);
            let t_new = (0.5 * (t_a + t_b)).max(0.0);

            if !(z_new.is_finite()
                && w_new.is_finite()
                && p_new.is_finite()
                && q_new.is_finite()
                && theta_a.is_finite()
                && theta_b.is_finite()
                && x_new.is_finite()
                && t_new.is_finite())
            {
                return Err(Error::Solver(format!(
                    "non-finite state at lattice node ({i},{j}), X={bx:.6}, Y={by:.6}"
                )));
            }
            if !(1e-8..=1e8).contains(&p_new) || !(1e-8..=1e8).contains(&q_new) {
                return Err(Error::Solver(format!(
                    "dilation weight left (1e-8, 1e8) at node ({i},{j}): p={p_new:.3e}, q={q_new:.3e}"
                )));
            }

            st.theta[k] = 0.5 * (theta_a + theta_b);
            st.w[k] = w_new;
            st.z[k] = z_new;
            st.p[k] = p_new;
            st.q[k] = q_new;
            st.x[k] = x_new;
            st.t[k] = t_new;
            st.j[k] = flux.eval(x_new, t_new);
            st.res_x[k] = (x_a - x_b).abs();
            st.res_t[k] = (t_a - t_b).abs();
            st.valid[k] = true;
        }
    }
    Ok(st)
}

/// A point of a constant-time level curve, carrying both coordinate systems
/// and the full semilinear state.
#[derive(Debug, Clone, Copy)]
pub struct LevelPoint {
    pub x: f64,
    pub big_x: f64,
    pub big_y: f64,
    pub theta: f64,
    pub w: f64,
    pub z: f64,
    pub p: f64,
    pub q: f64,
}

impl LevelPoint {
    /// `R = tan(w/2)` capped at the blow-up tolerance.
    pub fn r_capped(&self) -> f64 {
        (self.w * 0.5).tan().clamp(-tan_cap(), tan_cap())
    }

    /// `S = tan(z/2)` capped at the blow-up tolerance.
    pub fn s_capped(&self) -> f64 {
        (self.z * 0.5).tan().clamp(-tan_cap(), tan_cap())
    }

    pub fn blown_w(&self) -> bool {
        1.0 + self.w.cos() < BLOWUP_TOL
    }

    pub fn blown_z(&self) -> bool {
        1.0 + self.z.cos() < BLOWUP_TOL
    }

    /// `θ_t = (R+S)/2` (capped at flagged nodes).
    pub fn theta_t(&self) -> f64 {
        0.5 * (self.r_capped() + self.s_capped())
    }

    /// `θ_x = (R−S)/(2c)` (capped at flagged nodes).
    pub fn theta_x(&self, params: &LeslieParams) -> f64 {
        let (c, _) = params.wave_speed(self.theta);
        0.5 * (self.r_capped() - self.s_capped()) / c
    }

    /// Raw (uncapped) `tan(z/2)`; may be enormous near blow-up.
    pub fn s_raw(&self) -> f64 {
        (self.z * 0.5).tan()
    }

    pub fn r_raw(&self) -> f64 {
        (self.w * 0.5).tan()
    }
}

/// Constant-time level curve through the lattice, ordered by increasing `X`
/// (equivalently increasing physical `x`).
#[derive(Debug, Clone)]
pub struct LevelCurve {
    pub tau: f64,
    pub points: Vec<LevelPoint>,
}

impl LevelCurve {
    /// Worst backward physical-x jump along the curve (fold indicator).
    pub fn x_fold_defect(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| w[0].x - w[1].x)
            .fold(0.0, f64::max)
    }
}

fn lerp_point(
    s: f64,
    (x0, bx0, by0): (f64, f64, f64),
    (x1, bx1, by1): (f64, f64, f64),
    f0: (f64, f64, f64, f64, f64),
    f1: (f64, f64, f64, f64, f64),
) -> LevelPoint {
    let lin = |a: f64, b: f64| a + s * (b - a);
    LevelPoint {
        x: lin(x0, x1),
        big_x: lin(bx0, bx1),
        big_y: lin(by0, by1),
        theta: lin(f0.0, f1.0),
        w: lerp_angle(f0.1, f1.1, s),
        z: lerp_angle(f0.2, f1.2, s),
        p: lin(f0.3, f1.3),
        q: lin(f0.4, f1.4),
    }
}

/// Extracts the level curve `t(X,Y) = τ` by collecting crossings of all
/// lattice edges (including the partial edges that start on `Γ₀`), then
/// ordering along the curve.
pub fn extract_level(state: &CharState, tau: f64) -> LevelCurve {
    let mut pts: Vec<LevelPoint> = Vec::new();
    let fields_at = |k: usize| {
        (
            state.theta[k],
            state.w[k],
            state.z[k],
            state.p[k],
            state.q[k],
        )
    };
    let coords_at = |state: &CharState, i: usize, j: usize, k: usize| {
        (state.x[k], state.big_x_of(i), state.big_y_of(j))
    };
    let boundary_fields = |bp: &BoundaryPoint| (bp.theta, bp.w, bp.z, 1.0, 1.0);

    for j in 0..state.ny {
        for i in 0..state.nx {
            let k = state.idx(i, j);
            if !state.valid[k] {
                continue;
            }
            let t_here = state.t[k];
            // Vertical edge to (i, j+1).
            if j + 1 < state.ny {
                let k1 = state.idx(i, j + 1);
                if state.valid[k1] {
                    let t_up = state.t[k1];
                    if t_here <= tau && tau < t_up {
                        let s = if t_up > t_here { (tau - t_here) / (t_up - t_here) } else { 0.5 };
                        pts.push(lerp_point(
                            s,
                            coords_at(state, i, j, k),
                            coords_at(state, i, j + 1, k1),
                            fields_at(k),
                            fields_at(k1),
                        ));
                    }
                }
            }
            // Horizontal edge to (i+1, j).
            if i + 1 < state.nx {
                let k1 = state.idx(i + 1, j);
                if state.valid[k1] {
                    let t_rt = state.t[k1];
                    if t_here <= tau && tau < t_rt {
                        let s = if t_rt > t_here { (tau - t_here) / (t_rt - t_here) } else { 0.5 };
                        pts.push(lerp_point(
                            s,
                            coords_at(state, i, j, k),
                            coords_at(state, i + 1, j, k1),
                            fields_at(k),
                            fields_at(k1),
                        ));
                    }
                }
            }
            // Partial edges from Γ₀ for nodes whose predecessor lies on the
            // past side of the curve (not merely beyond the time cap).
            if tau >= 0.0 && tau < t_here {
                let bx = state.big_x_of(i);
                let by = state.big_y_of(j);
                let y_curve = state.gamma0.y_at_x(bx);
                let from_curve_y = (j == 0
                    || (!state.valid[state.idx(i, j - 1)] && state.big_y_of(j - 1) < y_curve))
                    && by >= y_curve - 1e-9 * state.dy;
                if from_curve_y {
                    let yc = y_curve.clamp(by - state.dy, by);
                    let bp = state.gamma0.at_big_y(yc);
                    let s = if t_here > 0.0 { tau / t_here } else { 0.5 };
                    pts.push(lerp_point(
                        s,
                        (bp.x, bp.big_x, bp.big_y),
                        coords_at(state, i, j, k),
                        boundary_fields(&bp),
                        fields_at(k),
                    ));
                } else {
                    let x_curve = state.gamma0.x_at_y(by);
                    let from_curve_x = (i == 0
                        || (!state.valid[state.idx(i - 1, j)] && state.big_x_of(i - 1) < x_curve))
                        && bx >= x_curve - 1e-9 * state.dx;
                    if from_curve_x {
                        let xc = x_curve.clamp(bx - state.dx, bx);
                        let bp = state.gamma0.at_big_x(xc);
                        let s = if t_here > 0.0 { tau / t_here } else { 0.5 };
                        pts.push(lerp_point(
                            s,
                            (bp.x, bp.big_x, bp.big_y),
                            coords_at(state, i, j, k),
                            boundary_fields(&bp),
                            fields_at(k),
                        ));
                    }
                }
            }
        }
    }
    pts.sort_by(|a, b| {
        a.big_x
            .partial_cmp(&b.big_x)
            .unwrap()
            .then(b.big_y.partial_cmp(&a.big_y).unwrap())
    });
    LevelCurve { tau, points: pts }
}

/// Energy carried by a level curve:
/// `E(τ) = ∫ (1−cos w)/4 · p dX − (1−cos z)/4 · q dY`,
/// which equals `∫(θ_t² + c²θ_x²) dx` on smooth levels and stays finite
/// through blow-up (the integrand is bounded).
pub fn energy_on_level(level: &LevelCurve) -> f64 {
    let dens = |pt: &LevelPoint| {
        (
            0.25 * (1.0 - pt.w.cos()) * pt.p,
            0.25 * (1.0 - pt.z.cos()) * pt.q,
        )
    };
    level
        .points
        .windows(2)
        .map(|seg| {
            let (ax, ay) = dens(&seg[0]);
            let (bx, by) = dens(&seg[1]);
            let dx = seg[1].big_x - seg[0].big_x;
            let dy = seg[1].big_y - seg[0].big_y;
            0.5 * (ax + bx) * dx - 0.5 * (ay + by) * dy
        })
        .sum()
}

/// Physical line integrals along a level curve, written in the
/// characteristic-plane differential forms that stay bounded through
/// blow-up. For any density `f`, `f dy` restricted to the level curve can
/// be taken as `f·cos²(w/2)·p dX` or `−f·cos²(z/2)·q dY` (the two agree on
/// the curve); each term below picks the representation in which the
/// tangent factors cancel.
struct FormPoint {
    /// coefficient of `dX`
    fx: f64,
    /// coefficient of `dY`
    fy: f64,
}

fn accumulate_form(
    level: &LevelCurve,
    mut form: impl FnMut(&LevelPoint) -> FormPoint,
) -> MassCurve {
    let n = level.points.len();
    if n < 2 {
        return MassCurve::default();
    }
    let forms: Vec<FormPoint> = level.points.iter().map(&mut form).collect();
    let mut xs = Vec::with_capacity(n - 1);
    let mut mass = Vec::with_capacity(n - 1);
    for k in 0..n - 1 {
        let (a, b) = (&level.points[k], &level.points[k + 1]);
        let dx = b.big_x - a.big_x;
        let dy = b.big_y - a.big_y;
        xs.push(0.5 * (a.x + b.x));
        mass.push(
            0.5 * (forms[k].fx + forms[k + 1].fx) * dx + 0.5 * (forms[k].fy + forms[k + 1].fy) * dy,
        );
    }
    MassCurve { x: xs, mass }
}

/// `∫ … θ_t dy` masses: `θ_t dy = sin w·p/4 dX − sin z·q/4 dY`.
pub fn level_mass_theta_t(level: &LevelCurve) -> MassCurve {
    accumulate_form(level, |pt| FormPoint {
        fx: 0.25 * pt.w.sin() * pt.p,
        fy: -0.25 * pt.z.sin() * pt.q,
    })
}

/// Cross-term form `R·S dy`, choosing the representation containing the
/// smaller tangent factor so the coefficient stays bounded.
fn rs_form(pt: &LevelPoint) -> FormPoint {
    let cw2 = 0.5 * (1.0 + pt.w.cos());
    let cz2 = 0.5 * (1.0 + pt.z.cos());
    if cz2 <= cw2 {
        // use −R·sin(z)/2·q/2 dY (R is the milder factor)
        FormPoint { fx: 0.0, fy: -0.25 * pt.r_capped() * pt.z.sin() * pt.q }
    } else {
        FormPoint { fx: 0.25 * pt.s_capped() * pt.w.sin() * pt.p, fy: 0.0 }
    }
}

/// Masses of the heat-forcing density `2θ_t + c′(θ)c(θ)θ_y²`:
/// `θ_y² dy = [(1−cos w)/2·p dX − (1−cos z)/2·q dY − 2·(RS dy)]/(4c²)`.
pub fn level_mass_wave_source(level: &LevelCurve, params: &LeslieParams) -> MassCurve {
    accumulate_form(level, |pt| {
        let (c, cp) = params.wave_speed(pt.theta);
        let rs = rs_form(pt);
        let k = cp * c / (4.0 * c * c); // c′/(4c)
        FormPoint {
            fx: 0.5 * pt.w.sin() * pt.p + k * (0.5 * (1.0 - pt.w.cos()) * pt.p - 2.0 * rs.fx),
            fy: -0.5 * pt.z.sin() * pt.q + k * (-0.5 * (1.0 - pt.z.cos()) * pt.q - 2.0 * rs.fy),
        }
    })
}

/// Masses of the drift density `c²(θ)θ_y − u`:
/// `c²θ_y dy = c/2·(sin w·p/2 dX + sin z·q/2 dY)`; the bounded `u` term uses
/// the natural split `u·(x_X dX + x_Y dY)`.
pub fn level_mass_flux_drift(level: &LevelCurve, params: &LeslieParams, u_at: impl Fn(f64) -> f64) -> MassCurve {
    accumulate_form(level, |pt| {
        let (c, _) = params.wave_speed(pt.theta);
        let u = u_at(pt.x);
        let cw2 = 0.5 * (1.0 + pt.w.cos());
        let cz2 = 0.5 * (1.0 + pt.z.cos());
        FormPoint {
            fx: 0.25 * c * pt.w.sin() * pt.p - u * 0.5 * cw2 * pt.p,
            fy: 0.25 * c * pt.z.sin() * pt.q + u * 0.5 * cz2 * pt.q,
        }
    })
}

/// `∫ θ_t² dx` along the level, using
/// `θ_t² dy = [(1−cos w)/2·p dX − (1−cos z)/2·q dY + 2·(RS dy)]/4`.
pub fn level_integral_theta_t_sq(level: &LevelCurve) -> f64 {
    accumulate_form(level, |pt| {
        let rs = rs_form(pt);
        FormPoint {
            fx: 0.25 * (0.5 * (1.0 - pt.w.cos()) * pt.p + 2.0 * rs.fx),
            fy: 0.25 * (-0.5 * (1.0 - pt.z.cos()) * pt.q + 2.0 * rs.fy),
        }
    })
    .total()
}

/// Report of the dilation-weight certificate.
#[derive(Debug, Clone, serde::Serialize)]
pub struct PqReport {
    pub min_p: f64,
    pub max_p: f64,
    pub min_q: f64,
    pub max_q: f64,
    pub sup_bracket: f64,
    pub d_span: f64,
    pub certified_bound: f64,
    pub within_bound: bool,
}

/// Certifies the dilation-weight extrema against the a priori bound
/// `max(p,q) ≤ exp(sup|B| · (2D + J̄))`, where `B` is the bilinear bracket
/// of the `p`/`q` equations, `D` the span of `Γ₀`, and `J̄` the tracked
/// flux norm.
pub fn check_pq_bounds(state: &CharState, params: &LeslieParams, j_bar: f64) -> PqReport {
    let (min_p, max_p, min_q, max_q) = state.pq_extrema();
    let sup_bracket = state.sup_pq_bracket(params);
    let d_span = state.gamma0.d_span();
    let certified_bound = (sup_bracket * (2.0 * d_span + j_bar)).exp();
    PqReport {
        min_p,
        max_p,
        min_q,
        max_q,
        sup_bracket,
        d_span,
        certified_bound,
        within_bound: max_p.max(max_q) <= certified_bound && min_p.min(min_q) > 0.0,
    }
}

/// Resampled fields on a uniform physical grid at one time level.
#[derive(Debug, Clone)]
pub struct LevelFields {
    pub tau: f64,
    pub theta: Vec<f64>,
    pub theta_t: Vec<f64>,
    pub theta_x: Vec<f64>,
    pub blown: Vec<bool>,
}

/// Resamples a level curve onto the given uniform grid; beyond the curve
/// ends fields take their far-field values (`θ` end value, zero gradients).
pub fn resample_level(
    level: &LevelCurve,
    params: &LeslieParams,
    grid: &crate::num::UniformGrid,
) -> Result<LevelFields> {
    if level.points.len() < 2 {
        return Err(Error::Solver(format!(
            "level t={} has {} points; state does not cover it",
            level.tau,
            level.points.len()
        )));
    }
    let fold = level.x_fold_defect();
    if fold > 1e-6 * (grid.last() - grid.x0) {
        return Err(Error::Solver(format!(
            "level t={}: x not monotone along curve (fold {fold:.3e})",
            level.tau
        )));
    }
    let xs: Vec<f64> = level.points.iter().map(|p| p.x).collect();
    let theta_s: Vec<f64> = level.points.iter().map(|p| p.theta).collect();
    let tht_s: Vec<f64> = level.points.iter().map(|p| p.theta_t()).collect();
    let thx_s: Vec<f64> = level.points.iter().map(|p| p.theta_x(params)).collect();
    let mut theta = Vec::with_capacity(grid.n);
    let mut theta_t = Vec::with_capacity(grid.n);
    let mut theta_x = Vec::with_capacity(grid.n);
    let mut blown = Vec::with_capacity(grid.n);
    // Monotone x means interp_linear applies directly; blow-up flags are
    // marked if any curve sample within one grid cell is flagged.
    let mut flag_xs: Vec<f64> = Vec::new();
    for p in &level.points {
        if p.blown_w() || p.blown_z() {
            flag_xs.push(p.x);
        }
    }
    for i in 0..grid.n {
        let x = grid.x(i);
        theta.push(interp_linear(&xs, &theta_s, x));
        theta_t.push(interp_linear(&xs, &tht_s, x));
        theta_x.push(interp_linear(&xs, &thx_s, x));
        let near_flag = flag_xs
            .binary_search_by(|v| v.partial_cmp(&x).unwrap())
            .map(|_| true)
            .unwrap_or_else(|ins| {
                let mut near = false;
                if ins < flag_xs.len() {
                    near |= (flag_xs[ins] - x).abs() <= grid.dx;
                }
                if ins > 0 {
                    near |= (x - flag_xs[ins - 1]).abs() <= grid.dx;
                }
                near
            });
        blown.push(near_flag);
    }
    Ok(LevelFields { tau: level.tau, theta, theta_t, theta_x, blown })
}

/// Convenience wrapper: extracts and resamples several time levels.
pub fn invert_to_xt(
    state: &CharState,
    params: &LeslieParams,
    grid: &crate::num::UniformGrid,
    t_levels: &[f64],
) -> Result<Vec<LevelFields>> {
    t_levels
        .iter()
        .map(|&tau| resample_level(&extract_level(state, tau), params, grid))
        .collect()
}

/// Point of a constant-`Y` (forward-characteristic) trace.
#[derive(Debug, Clone, Copy)]
pub struct TracePoint {
    pub t: f64,
    pub x: f64,
    pub theta: f64,
    pub r: f64,
    pub s: f64,
    pub p: f64,
    pub q: f64,
    pub one_plus_cos_z: f64,
}

/// Extracts the lattice row closest to coordinate `Y = y_value` — a forward
/// characteristic in physical space — ordered by time.
pub fn trace_constant_y(state: &CharState, y_value: f64) -> Vec<TracePoint> {
    let jf = ((y_value - state.y_axis0) / state.dy).round().clamp(0.0, (state.ny - 1) as f64);
    let j = jf as usize;
    let mut out = Vec::new();
    for i in 0..state.nx {
        let k = state.idx(i, j);
        if !state.valid[k] {
            continue;
        }
        out.push(TracePoint {
            t: state.t[k],
            x: state.x[k],
            theta: state.theta[k],
            r: (state.w[k] * 0.5).tan(),
            s: (state.z[k] * 0.5).tan(),
            p: state.p[k],
            q: state.q[k],
            one_plus_cos_z: 1.0 + state.z[k].cos(),
        });
    }
    out
}

/// Initial wave energy computed directly from `Γ₀` boundary data — the
/// `t = 0` instance of [`energy_on_level`]'s integrand.
pub fn gamma0_wave_energy(gamma0: &Gamma0) -> f64 {
    let n = gamma0.x.len();
    let mut acc = 0.0;
    for k in 0..n - 1 {
        let f = |i: usize| {
            (
                0.25 * (1.0 - gamma0.w[i].cos()),
                0.25 * (1.0 - gamma0.z[i].cos()),
            )
        };
        let (ax, ay) = f(k);
        let (bx, by) = f(k + 1);
        let dx = gamma0.big_x[k + 1] - gamma0.big_x[k];
        let dy = gamma0.big_y[k + 1] - gamma0.big_y[k];
        acc += 0.5 * (ax + bx) * dx - 0.5 * (ay + by) * dy;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::initial::{build_blowup_data, initial_wave_energy, BlowupFamily, InitialData};
    use crate::num::UniformGrid;
    use approx::assert_abs_diff_eq;

    fn flat_data(grid: UniformGrid, theta_const: f64) -> InitialData {
        InitialData::from_functions(
            grid,
            theta_const,
            (0.0, 0.0),
            true,
            |_| 0.0,
            move |_| theta_const,
            |_| 0.0,
            |_| 0.0,
            |_| 0.0,
        )
    }

    #[test]
    fn gamma0_trivial_is_antidiagonal() {
        let p = LeslieParams::special();
        let grid = UniformGrid::covering(-2.0, 2.0, 401);
        let g = build_gamma0(&flat_data(grid, 0.3), &p).unwrap();
        for (i, &x) in g.x.iter().enumerate().step_by(37) {
            assert_abs_diff_eq!(g.big_x[i], x, epsilon = 1e-12);
            assert_abs_diff_eq!(g.big_y[i], -x, epsilon = 1e-12);
        }
    }

    #[test]
    fn gamma0_matches_refined_quadrature_and_energy_bound() {
        let p = LeslieParams::special();
        let fam = BlowupFamily::default_demo();
        let coarse = build_blowup_data(&p, &fam, 0.5, 128).unwrap();
        let fine = build_blowup_data(&p, &fam, 0.5, 1024).unwrap();
        let g_coarse = build_gamma0(&coarse, &p).unwrap();
        let g_fine = build_gamma0(&fine, &p).unwrap();
        // X(x) at the right end of the bump from both resolutions.
        let xc = interp_linear(&g_coarse.x, &g_coarse.big_x, fam.epsilon);
        let xf = interp_linear(&g_fine.x, &g_fine.big_x, fam.epsilon);
        assert!((xc - xf).abs() < 1e-8 * (1.0 + xf.abs()), "coarse {xc} fine {xf}");
        // |X + Y| ≤ 4·E(0).
        let e0 = crate::initial::initial_energy(&fine, &p);
        assert!(g_fine.max_abs_x_plus_y() <= 4.0 * e0 + 1e-10);
    }

    #[test]
    fn constant_state_is_preserved() {
        // c′(0.0)=0 would need K1=K3; instead pick θ̄ = π/2 where c′ = 0 too.
        let mut p = LeslieParams::special();
        p.k3 = 1.0; // isotropic: c ≡ 1, c′ ≡ 0
        let grid = UniformGrid::covering(-2.0, 2.0, 201);
        let g = build_gamma0(&flat_data(grid, 0.3), &p).unwrap();
        let st = integrate_semilinear(&g, &FluxSource::Zero, &p, 64, 64, 10.0).unwrap();
        for k in 0..st.valid.len() {
            if st.valid[k] {
                assert_abs_diff_eq!(st.theta[k], 0.3, epsilon = 1e-13);
                assert_abs_diff_eq!(st.w[k], 0.0, epsilon = 1e-13);
                assert_abs_diff_eq!(st.z[k], 0.0, epsilon = 1e-13);
                assert_abs_diff_eq!(st.p[k], 1.0, epsilon = 1e-13);
                assert_abs_diff_eq!(st.q[k], 1.0, epsilon = 1e-13);
            }
        }
        // Level sets of the constant state are flat in θ.
        let lvl = extract_level(&st, 0.5);
        assert!(lvl.points.len() > 10);
        for pt in &lvl.points {
            assert_abs_diff_eq!(pt.theta, 0.3, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(energy_on_level(&lvl), 0.0, epsilon = 1e-14);
        let report = check_pq_bounds(&st, &p, 0.0);
        assert!(report.within_bound);
        assert_abs_diff_eq!(report.max_p, 1.0, epsilon = 1e-13);
        assert!(report.certified_bound >= 1.0);
    }

    #[test]
    fn initial_level_energy_matches_quadrature() {
        let p = LeslieParams::special();
        let fam = BlowupFamily { epsilon: 0.05, theta_star: std::f64::consts::FRAC_PI_4, m: 4.0 };
        let data = build_blowup_data(&p, &fam, 0.25, 512).unwrap();
        let g = build_gamma0(&data, &p).unwrap();
        let wave = initial_wave_energy(&data, &p);
        let from_curve = gamma0_wave_energy(&g);
        assert!(
            (wave - from_curve).abs() <= 1e-4 * (1.0 + wave),
            "quadrature {wave} vs curve {from_curve}"
        );
    }

    #[test]
    fn smooth_run_keeps_consistency_small_and_pq_positive() {
        let p = LeslieParams::special();
        let fam = BlowupFamily { epsilon: 0.1, theta_star: std::f64::consts::FRAC_PI_4, m: 2.0 };
        let data = build_blowup_data(&p, &fam, 0.5, 64).unwrap();
        let g = build_gamma0(&data, &p).unwrap();
        let coarse = integrate_semilinear(&g, &FluxSource::Zero, &p, 128, 128, 0.6).unwrap();
        let fine = integrate_semilinear(&g, &FluxSource::Zero, &p, 256, 256, 0.6).unwrap();
        let (rxc, rtc) = coarse.rms_residuals();
        let (rxf, rtf) = fine.rms_residuals();
        assert!(rxf < rxc && rtf < rtc, "residuals must shrink: ({rxc},{rtc}) -> ({rxf},{rtf})");
        // First order or better.
        assert!(rxf <= 0.6 * rxc, "x-residual order too low: {rxc} -> {rxf}");
        let rep = check_pq_bounds(&fine, &p, 0.0);
        assert!(rep.min_p > 0.0 && rep.min_q > 0.0 && rep.within_bound, "{rep:?}");
        assert!(fine.x_monotonicity_defect() <= 0.0);
    }

    #[test]
    fn finite_propagation_speed() {
        let p = LeslieParams::special();
        let fam = BlowupFamily { epsilon: 0.1, theta_star: std::f64::consts::FRAC_PI_4, m: 2.0 };
        let data = build_blowup_data(&p, &fam, 0.5, 64).unwrap();
        let g = build_gamma0(&data, &p).unwrap();
        let st = integrate_semilinear(&g, &FluxSource::Zero, &p, 256, 256, 0.55).unwrap();
        let tau = 0.5;
        let lvl = extract_level(&st, tau);
        let max_speed = p.c_upper();
        let support = fam.epsilon + max_speed * tau + 0.1;
        for pt in &lvl.points {
            if pt.x.abs() > support {
                assert_abs_diff_eq!(pt.theta, fam.theta_star, epsilon = 1e-8);
            }
        }
    }
}
