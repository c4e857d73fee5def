//! Initial-data construction: general finite-energy data records and the
//! compressive bump family that seeds gradient blow-up.
//!
//! The blow-up family places a steep odd-symmetric bump of width `2ε` in the
//! director angle around a base angle `θ*` with `c′(θ*) > 0`, and chooses
//! the initial angular velocity and fluid velocity so that the
//! forward-moving Riemann variable `R = θ_t + cθ_x` starts `O(ε)` while the
//! backward-moving variable `S = θ_t − cθ_x` starts at `(−2c+ε)φ′(x/ε)` —
//! large and positive at the origin. When `−φ′(0)` clears the compressive
//! threshold `max{16 C_U/(c′(θ*) C_L), 2/C_L}`, the `S`-field undergoes a
//! Riccati-type breakdown in finite time while the total energy stays `O(ε)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::LeslieParams;
use crate::num::{trapezoid_uniform, UniformGrid};

/// Bump profile `φ(a) = −M·a·(1−a²)²` on `[−1,1]`, zero outside; returns
/// `(φ, φ′)`. `φ` is C¹ across `±1` and `φ′(0) = −M`.
pub fn bump_phi(m: f64, a: f64) -> (f64, f64) {
    if a.abs() >= 1.0 {
        return (0.0, 0.0);
    }
    let one_minus = 1.0 - a * a;
    let phi = -m * a * one_minus * one_minus;
    // d/da [ a (1-a²)² ] = (1-a²)(1-5a²)
    let dphi = -m * one_minus * (1.0 - 5.0 * a * a);
    (phi, dphi)
}

/// Parameters of the compressive bump family, plus the derived constants
/// used by the blow-up diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlowupFamily {
    /// Bump scale; requires `0 < ε < C_L`.
    pub epsilon: f64,
    /// Base angle; requires `c′(θ*) > 0`.
    pub theta_star: f64,
    /// Bump steepness `M = −φ′(0)`.
    pub m: f64,
}

impl BlowupFamily {
    /// Default demonstration member: `ε = 0.01`, `θ* = π/4`, `M = 40`
    /// (about 1.2× the compressive threshold for `K₁=1, K₃=4`).
    pub fn default_demo() -> Self {
        BlowupFamily { epsilon: 0.01, theta_star: std::f64::consts::FRAC_PI_4, m: 40.0 }
    }

    /// Compressive steepness threshold `max{16 C_U/(c′(θ*) C_L), 2/C_L}`
    /// that `M` must exceed for guaranteed breakdown.
    pub fn threshold_m(params: &LeslieParams, theta_star: f64) -> f64 {
        let (_, cp) = params.wave_speed(theta_star);
        let cl = params.c_lower();
        (16.0 * params.c_upper() / (cp * cl)).max(2.0 / cl)
    }

    /// Maximum slope of the bump profile, `C₂ = max|φ′| = M` for this shape.
    pub fn c2_max_slope(&self) -> f64 {
        self.m
    }

    /// Upper bound `k₀` on `∫₋₁¹ (φ′)² da`, evaluated by fine quadrature
    /// with 5% headroom (the bound is used as a strict inequality).
    pub fn k0_slope_energy(&self) -> f64 {
        1.05 * self.slope_energy_integral()
    }

    /// `∫₋₁¹ (φ′)² da` by fine trapezoid quadrature.
    pub fn slope_energy_integral(&self) -> f64 {
        let n = 20_001;
        let dx = 2.0 / (n - 1) as f64;
        let vals: Vec<f64> = (0..n)
            .map(|i| {
                let a = -1.0 + i as f64 * dx;
                let (_, dp) = bump_phi(self.m, a);
                dp * dp
            })
            .collect();
        trapezoid_uniform(&vals, dx)
    }
}

/// Sampled initial data `(u₀, θ₀, θ₁)` on a uniform truncated line, with
/// analytically known first derivatives and compact-support metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialData {
    pub grid: UniformGrid,
    pub u0: Vec<f64>,
    pub theta0: Vec<f64>,
    pub theta1: Vec<f64>,
    /// `u₀′` samples (analytic for constructed families, finite-difference
    /// for imported data).
    pub u0_x: Vec<f64>,
    /// `θ₀′` samples.
    pub theta0_x: Vec<f64>,
    /// Far-field director angle (`θ₀ → theta_far` at the grid ends).
    pub theta_far: f64,
    /// True when `u₀`, `θ₀ − theta_far`, `θ₁` all vanish outside
    /// `[support_lo, support_hi]`.
    pub tail_flag: bool,
    pub support_lo: f64,
    pub support_hi: f64,
}

impl InitialData {
    /// Builds data from closures for `(u₀, θ₀, θ₁, u₀′, θ₀′)`.
    pub fn from_functions(
        grid: UniformGrid,
        theta_far: f64,
        support: (f64, f64),
        tail_flag: bool,
        u0: impl Fn(f64) -> f64,
        theta0: impl Fn(f64) -> f64,
        theta1: impl Fn(f64) -> f64,
        u0_x: impl Fn(f64) -> f64,
        theta0_x: impl Fn(f64) -> f64,
    ) -> Self {
        let xs = grid.xs();
        InitialData {
            grid,
            u0: xs.iter().map(|&x| u0(x)).collect(),
            theta0: xs.iter().map(|&x| theta0(x)).collect(),
            theta1: xs.iter().map(|&x| theta1(x)).collect(),
            u0_x: xs.iter().map(|&x| u0_x(x)).collect(),
            theta0_x: xs.iter().map(|&x| theta0_x(x)).collect(),
            theta_far,
            tail_flag,
            support_lo: support.0,
            support_hi: support.1,
        }
    }

    /// Riemann variables at `t=0`: `R = θ₁ + cθ₀′`, `S = θ₁ − cθ₀′`.
    pub fn riemann_initial(&self, params: &LeslieParams) -> (Vec<f64>, Vec<f64>) {
        let mut r = Vec::with_capacity(self.grid.n);
        let mut s = Vec::with_capacity(self.grid.n);
        for i in 0..self.grid.n {
            let (c, _) = params.wave_speed(self.theta0[i]);
            r.push(self.theta1[i] + c * self.theta0_x[i]);
            s.push(self.theta1[i] - c * self.theta0_x[i]);
        }
        (r, s)
    }

    /// Initial flux-density row `J(·,0) = u₀′ + θ₁`.
    pub fn flux_initial(&self) -> Vec<f64> {
        self.u0_x.iter().zip(&self.theta1).map(|(a, b)| a + b).collect()
    }
}

/// Builds the compressive-bump initial data on a uniform grid.
///
/// - `θ₀(x) = θ* + ε φ(x/ε)`;
/// - `θ₁(x) = (−c(θ₀) + ε) θ₀′(x)`;
/// - `u₀(x) = ∫₋ε^x c(θ₀) θ₀′ da` on the bump, `0` outside (the integral
///   telescopes to an antiderivative of `c` evaluated at equal endpoint
///   angles, so continuity at `+ε` is automatic).
///
/// The grid spans `[−ε−2−2 C_U T_max, ε+2+2 C_U T_max]` so that, up to time
/// `T_max`, no wave reflected from the truncation boundary reaches the
/// region of interest. Spacing is `2ε / bump_nodes` with `bump_nodes ≥ 64`,
/// so the bump itself is always resolved, and `x = 0, ±ε` fall on nodes.
pub fn build_blowup_data(
    params: &LeslieParams,
    family: &BlowupFamily,
    t_max: f64,
    bump_nodes: usize,
) -> Result<InitialData> {
    let eps = family.epsilon;
    let (_, cp_star) = params.wave_speed(family.theta_star);
    if !(eps > 0.0 && eps < params.c_lower()) {
        return Err(Error::InvalidData(format!(
            "epsilon must lie in (0, C_L) = (0, {}); got {eps}",
            params.c_lower()
        )));
    }
    if cp_star <= 0.0 {
        return Err(Error::InvalidData(format!(
            "c'(theta_star) must be positive; got {cp_star} at theta_star = {}",
            family.theta_star
        )));
    }
    if family.m <= 0.0 {
        return Err(Error::InvalidData("bump steepness M must be positive".into()));
    }
    let bump_nodes = bump_nodes.max(64);
    // Even node count across [-eps, eps] keeps 0 and ±eps on grid nodes.
    let half = bump_nodes.div_ceil(2);
    let dx = eps / half as f64;
    let pad = 2.0 + 2.0 * params.c_upper() * t_max;
    let n_side = ((eps + pad) / dx).ceil() as usize;
    let grid = UniformGrid { x0: -(n_side as f64) * dx, dx, n: 2 * n_side + 1 };

    let theta0_of = |x: f64| family.theta_star + eps * bump_phi(family.m, x / eps).0;
    let theta0x_of = |x: f64| bump_phi(family.m, x / eps).1;
    let xs = grid.xs();
    let theta0: Vec<f64> = xs.iter().map(|&x| theta0_of(x)).collect();
    let theta0_x: Vec<f64> = xs.iter().map(|&x| theta0x_of(x)).collect();
    let theta1: Vec<f64> = xs
        .iter()
        .zip(&theta0)
        .zip(&theta0_x)
        .map(|((_, &th), &thx)| (-params.wave_speed(th).0 + eps) * thx)
        .collect();
    // u0' = c(theta0) theta0' everywhere (vanishes off the bump). Its
    // integral telescopes through the substitution s = theta0(x):
    // u0(x) = C(theta0(x)) − C(theta*) with C an antiderivative of c, so
    // evaluating C by quadrature *in the angle* makes u0 vanish identically
    // outside the bump (theta0 returns exactly to theta* at ±eps), with no
    // grid-resolution defect.
    let c_antideriv = |theta: f64| -> f64 {
        let m = 64;
        let h = (theta - family.theta_star) / m as f64;
        if h == 0.0 {
            return 0.0;
        }
        let mut acc = 0.0;
        for k in 0..m {
            let a = family.theta_star + k as f64 * h;
            let mid = a + 0.5 * h;
            let b = a + h;
            acc += h / 6.0
                * (params.wave_speed(a).0
                    + 4.0 * params.wave_speed(mid).0
                    + params.wave_speed(b).0);
        }
        acc
    };
    let u0_x: Vec<f64> = theta0.iter().zip(&theta0_x).map(|(&th, &thx)| params.wave_speed(th).0 * thx).collect();
    let u0: Vec<f64> = theta0.iter().map(|&th| c_antideriv(th)).collect();

    Ok(InitialData {
        grid,
        u0,
        theta0,
        theta1,
        u0_x,
        theta0_x,
        theta_far: family.theta_star,
        tail_flag: true,
        support_lo: -eps,
        support_hi: eps,
    })
}

/// Discrete total energy `𝓔(0) = ½∫(θ₁² + c²(θ₀)θ₀′² + u₀²) dx`.
pub fn initial_energy(data: &InitialData, params: &LeslieParams) -> f64 {
    let density: Vec<f64> = (0..data.grid.n)
        .map(|i| {
            let (c, _) = params.wave_speed(data.theta0[i]);
            let cthx = c * data.theta0_x[i];
            data.theta1[i] * data.theta1[i] + cthx * cthx + data.u0[i] * data.u0[i]
        })
        .collect();
    0.5 * trapezoid_uniform(&density, data.grid.dx)
}

/// Wave part of the energy, `E(0) = ∫(θ₁² + c²θ₀′²) dx`.
pub fn initial_wave_energy(data: &InitialData, params: &LeslieParams) -> f64 {
    let density: Vec<f64> = (0..data.grid.n)
        .map(|i| {
            let (c, _) = params.wave_speed(data.theta0[i]);
            let cthx = c * data.theta0_x[i];
            data.theta1[i] * data.theta1[i] + cthx * cthx
        })
        .collect();
    trapezoid_uniform(&density, data.grid.dx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn bump_endpoints_and_slope() {
        for m in [1.0, 40.0] {
            assert_eq!(bump_phi(m, 0.0).0, 0.0);
            assert_eq!(bump_phi(m, 1.0), (0.0, 0.0));
            assert_eq!(bump_phi(m, -1.0), (0.0, 0.0));
            assert_eq!(bump_phi(m, 2.5), (0.0, 0.0));
            assert_abs_diff_eq!(bump_phi(m, 0.0).1, -m, epsilon = 1e-14);
        }
        // C¹ matching across ±1: slope tends to zero from inside.
        assert!(bump_phi(40.0, 0.999999).1.abs() < 1e-3);
    }

    #[test]
    fn bump_slope_matches_difference_quotient() {
        let m = 7.0;
        let h = 1e-6;
        for a in [-0.9, -0.3, 0.0, 0.42, 0.8] {
            let numeric = (bump_phi(m, a + h).0 - bump_phi(m, a - h).0) / (2.0 * h);
            assert_abs_diff_eq!(bump_phi(m, a).1, numeric, epsilon = 1e-6);
        }
    }

    #[test]
    fn slope_energy_quadrature_matches_closed_form() {
        // ∫₋₁¹ (1-a²)²(1-5a²)² da = 2·(1/2·... ) evaluated exactly via
        // polynomial expansion: integrand = (1-a²)²(1-5a²)².
        // Expand: (1-a²)² = 1 - 2a² + a⁴; (1-5a²)² = 1 - 10a² + 25a⁴.
        // Product = 1 -12a² +46a⁴ -60a⁶ +25a⁸.
        // ∫₋₁¹ = 2(1 - 4 + 46/5 - 60/7 + 25/9) = 2·(...)
        let exact = 2.0 * (1.0 - 4.0 + 46.0 / 5.0 - 60.0 / 7.0 + 25.0 / 9.0);
        let fam = BlowupFamily { epsilon: 0.01, theta_star: FRAC_PI_4, m: 1.0 };
        assert_abs_diff_eq!(fam.slope_energy_integral(), exact, epsilon = 1e-9);
        let fam40 = BlowupFamily { epsilon: 0.01, theta_star: FRAC_PI_4, m: 40.0 };
        assert_abs_diff_eq!(fam40.slope_energy_integral(), 1600.0 * exact, epsilon = 1e-5);
    }

    #[test]
    fn threshold_for_demo_parameters() {
        let p = LeslieParams::special();
        let thr = BlowupFamily::threshold_m(&p, FRAC_PI_4);
        // 16·2/(0.94868·1) ≈ 33.73 dominates 2/1.
        assert_abs_diff_eq!(thr, 33.7310, epsilon = 1e-3);
        assert!(BlowupFamily::default_demo().m > thr);
    }

    #[test]
    fn blowup_data_matches_construction() {
        let p = LeslieParams::special();
        let fam = BlowupFamily::default_demo();
        let data = build_blowup_data(&p, &fam, 1.0, 64).unwrap();
        let eps = fam.epsilon;

        // Outside the bump everything is flat.
        let i_far = (data.grid.frac_index(-3.0 * eps)) as usize;
        assert_abs_diff_eq!(data.theta0[i_far], FRAC_PI_4, epsilon = 1e-15);
        assert_eq!(data.theta1[i_far], 0.0);
        assert_eq!(data.u0[i_far], 0.0);

        // S(0,0) = (−2c(θ*)+ε)·(−M) ≈ 126.09 clears the threshold 33.73.
        let (r, s) = data.riemann_initial(&p);
        let i0 = data.grid.frac_index(0.0).round() as usize;
        assert_abs_diff_eq!(data.grid.x(i0), 0.0, epsilon = 1e-12);
        let c_star = p.wave_speed(FRAC_PI_4).0;
        assert_abs_diff_eq!(s[i0], (-2.0 * c_star + eps) * (-fam.m), epsilon = 1e-10);
        assert_abs_diff_eq!(s[i0], 126.0911, epsilon = 1e-3);
        assert!(s[i0] > BlowupFamily::threshold_m(&p, FRAC_PI_4));

        // R(x,0) = ε φ′(x/ε).
        for (i, &x) in data.grid.xs().iter().enumerate().step_by(97) {
            assert_abs_diff_eq!(r[i], eps * bump_phi(fam.m, x / eps).1, epsilon = 1e-10);
        }
    }

    #[test]
    fn velocity_integral_telescopes() {
        let p = LeslieParams::special();
        let fam = BlowupFamily::default_demo();
        let data = build_blowup_data(&p, &fam, 1.0, 256).unwrap();
        // u0 at +eps and beyond is exactly zero; just inside it is small.
        let i_right = data.grid.frac_index(fam.epsilon).round() as usize;
        assert_eq!(data.u0[i_right], 0.0);
        assert_eq!(*data.u0.last().unwrap(), 0.0);
        let max_u: f64 = data.u0.iter().fold(0.0, |m, v| m.max(v.abs()));
        // scale: |u0| ≤ ∫ c|θ0'| ≤ C_U · M · 2ε ≈ 1.6
        assert!(max_u < 2.0 * p.c_upper() * fam.m * fam.epsilon);
    }

    #[test]
    fn energy_scales_linearly_in_epsilon() {
        let p = LeslieParams::special();
        let base = BlowupFamily::default_demo();
        let mut energies = Vec::new();
        for eps in [0.04, 0.02, 0.01] {
            let fam = BlowupFamily { epsilon: eps, ..base };
            let data = build_blowup_data(&p, &fam, 1.0, 128).unwrap();
            energies.push(initial_energy(&data, &p));
        }
        for pair in energies.windows(2) {
            let ratio = pair[1] / pair[0];
            assert!((0.4..=0.6).contains(&ratio), "ratio {ratio}");
        }
        // log-log slope vs epsilon within [0.8, 1.2]
        let slope = (energies[0] / energies[2]).ln() / (0.04_f64 / 0.01).ln();
        assert!((0.8..=1.2).contains(&slope), "slope {slope}");
    }

    #[test]
    fn gaussian_energy_matches_refined_quadrature() {
        // Richardson-style oracle: energy of a Gaussian angle perturbation
        // evaluated on successively refined grids converges; the coarse value
        // must sit within 1e-6 relative of the fine one.
        let p = LeslieParams::special();
        let make = |n: usize| {
            let grid = UniformGrid::covering(-10.0, 10.0, n);
            InitialData::from_functions(
                grid,
                FRAC_PI_4,
                (-10.0, 10.0),
                false,
                |_| 0.0,
                |x| FRAC_PI_4 + (-x * x).exp(),
                |_| 0.0,
                |_| 0.0,
                |x| -2.0 * x * (-x * x).exp(),
            )
        };
        let coarse = initial_energy(&make(8193), &p);
        let fine = initial_energy(&make(65537), &p);
        assert!(((coarse - fine) / fine).abs() < 1e-6, "coarse {coarse} fine {fine}");
    }

    #[test]
    fn rejects_inadmissible_family() {
        let p = LeslieParams::special();
        let mut fam = BlowupFamily::default_demo();
        fam.epsilon = 1.5; // >= C_L = 1
        assert!(build_blowup_data(&p, &fam, 1.0, 64).is_err());
        let mut fam2 = BlowupFamily::default_demo();
        fam2.theta_star = -FRAC_PI_4; // c'(θ*) < 0
        assert!(build_blowup_data(&p, &fam2, 1.0, 64).is_err());
    }
}
