//! Material parameters and scalar coefficient functions of the Poiseuille
//! reduction of the Ericksen–Leslie nematic model.
//!
//! The reduced system couples a velocity field `u(x,t)` to a director angle
//! `θ(x,t)` through three scalar coefficient functions of the angle:
//!
//! - `c(θ) = sqrt(K1 cos²θ + K3 sin²θ)` — the wave speed (elasticity),
//! - `g(θ)` — the effective shear viscosity,
//! - `h(θ)` — the velocity/director coupling strength,
//!
//! together with `b(θ) = g − h²/γ₁`, the residual viscosity after the
//! director back-reaction is subtracted. Strict positivity of `b` (and of
//! the residual damping `γ₁ − h²/g`) is what makes the coupled system
//! dissipative; both are consequences of the admissibility inequalities on
//! the Leslie viscosities enforced by [`LeslieParams::validate`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of sample points used for dense scans over the angle circle
/// (Lipschitz constant of `c`, positivity of `b`, …).
pub const DENSE_THETA_SAMPLES: usize = 4096;

/// Leslie viscosities, elastic constants, and bulk parameters of the
/// Poiseuille reduction.
///
/// `gamma1`, `gamma2` are stored explicitly but are determined by the
/// viscosities (`γ₁ = α₃ − α₂`, `γ₂ = α₆ − α₅`); [`LeslieParams::validate`]
/// rejects inconsistent overrides.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeslieParams {
    pub alpha1: f64,
    pub alpha2: f64,
    pub alpha3: f64,
    pub alpha4: f64,
    pub alpha5: f64,
    pub alpha6: f64,
    /// Rotational viscosity, `α₃ − α₂`.
    pub gamma1: f64,
    /// Torsion/slip coefficient, `α₆ − α₅`.
    pub gamma2: f64,
    /// Splay elastic constant, positive.
    pub k1: f64,
    /// Bend elastic constant, positive.
    pub k3: f64,
    /// Fluid density (1 in the demonstration case).
    pub rho: f64,
    /// Director inertia (1 in the demonstration case).
    pub nu: f64,
    /// Imposed pressure gradient (0 in the demonstration case).
    pub a: f64,
}

impl LeslieParams {
    /// The demonstration parameter set: `α₁=α₅=α₆=0, α₂=−1, α₃=α₄=1`, so
    /// `γ₁=2, γ₂=0` and `g ≡ h ≡ 1`, with anisotropic elasticity
    /// `K₁=1, K₃=4` so that `c′(π/4) > 0`.
    ///
    /// With these choices the velocity equation is an exactly
    /// constant-coefficient heat equation forced by `θ_t`, which is what the
    /// kernel-based coupling in [`crate::coupled`] requires.
    pub fn special() -> Self {
        LeslieParams {
            alpha1: 0.0,
            alpha2: -1.0,
            alpha3: 1.0,
            alpha4: 1.0,
            alpha5: 0.0,
            alpha6: 0.0,
            gamma1: 2.0,
            gamma2: 0.0,
            k1: 1.0,
            k3: 4.0,
            rho: 1.0,
            nu: 1.0,
            a: 0.0,
        }
    }

    /// Lower elastic bound `C_L = sqrt(min(K1,K3))`.
    pub fn c_lower(&self) -> f64 {
        self.k1.min(self.k3).sqrt()
    }

    /// Upper elastic bound `C_U = sqrt(max(K1,K3))`.
    pub fn c_upper(&self) -> f64 {
        self.k1.max(self.k3).sqrt()
    }

    /// Global Lipschitz constant of the wave speed, `C₁ = max |c′|`,
    /// evaluated by dense sampling of the angle circle.
    pub fn c1_lipschitz(&self) -> f64 {
        dense_theta_grid()
            .map(|theta| self.wave_speed(theta).1.abs())
            .fold(0.0, f64::max)
    }

    /// Checks every admissibility relation; returns the list of violated
    /// relations (empty iff the parameter set is admissible).
    pub fn validate(&self) -> Vec<String> {
        let mut violations = Vec::new();
        let mut check = |ok: bool, msg: &str| {
            if !ok {
                violations.push(msg.to_string());
            }
        };
        let tol = 1e-12
            * (1.0
                + [
                    self.alpha1, self.alpha2, self.alpha3, self.alpha4, self.alpha5, self.alpha6,
                ]
                .iter()
                .fold(0.0_f64, |m, a| m.max(a.abs())));

        check(
            (self.gamma1 - (self.alpha3 - self.alpha2)).abs() <= tol,
            "gamma1 = alpha3 - alpha2",
        );
        check(
            (self.gamma2 - (self.alpha6 - self.alpha5)).abs() <= tol,
            "gamma2 = alpha6 - alpha5",
        );
        // Parodi's relation.
        check(
            ((self.alpha2 + self.alpha3) - (self.alpha6 - self.alpha5)).abs() <= tol,
            "alpha2 + alpha3 = alpha6 - alpha5 (Parodi)",
        );
        check(self.alpha4 > 0.0, "alpha4 > 0");
        check(
            2.0 * self.alpha1 + 3.0 * self.alpha4 + 2.0 * self.alpha5 + 2.0 * self.alpha6 > 0.0,
            "2*alpha1 + 3*alpha4 + 2*alpha5 + 2*alpha6 > 0",
        );
        check(self.gamma1 > 0.0, "gamma1 > 0");
        check(
            2.0 * self.alpha4 + self.alpha5 + self.alpha6 > 0.0,
            "2*alpha4 + alpha5 + alpha6 > 0",
        );
        check(
            self.gamma1 * (2.0 * self.alpha4 + self.alpha5 + self.alpha6)
                > self.gamma2 * self.gamma2,
            "gamma1*(2*alpha4 + alpha5 + alpha6) > gamma2^2",
        );
        check(self.k1 > 0.0, "K1 > 0");
        check(self.k3 > 0.0, "K3 > 0");
        check(self.rho > 0.0, "rho > 0");
        check(self.nu > 0.0, "nu > 0");
        violations
    }

    /// Returns `Err` with the joined violation list when inadmissible.
    pub fn validated(self) -> Result<Self> {
        let violations = self.validate();
        if violations.is_empty() {
            Ok(self)
        } else {
            Err(Error::InvalidParams(violations.join("; ")))
        }
    }

    /// Wave speed and its derivative: `c = sqrt(K1 cos²θ + K3 sin²θ)`,
    /// `c′ = (K3 − K1) sinθ cosθ / c`.
    pub fn wave_speed(&self, theta: f64) -> (f64, f64) {
        let (s, c) = theta.sin_cos();
        let speed = (self.k1 * c * c + self.k3 * s * s).sqrt();
        (speed, (self.k3 - self.k1) * s * c / speed)
    }

    /// Effective shear viscosity
    /// `g(θ) = α₁ sin²θcos²θ + (α₅−α₂)/2 sin²θ + (α₃+α₆)/2 cos²θ + α₄/2`.
    pub fn g_coeff(&self, theta: f64) -> f64 {
        let (s, c) = theta.sin_cos();
        let (s2, c2) = (s * s, c * c);
        self.alpha1 * s2 * c2
            + 0.5 * (self.alpha5 - self.alpha2) * s2
            + 0.5 * (self.alpha3 + self.alpha6) * c2
            + 0.5 * self.alpha4
    }

    /// Velocity/director coupling `h(θ) = (γ₁ + γ₂ cos 2θ)/2`.
    pub fn h_coeff(&self, theta: f64) -> f64 {
        0.5 * (self.gamma1 + self.gamma2 * (2.0 * theta).cos())
    }

    /// Residual viscosity `b(θ) = g(θ) − h²(θ)/γ₁`, strictly positive for
    /// admissible parameters.
    pub fn b_coeff(&self, theta: f64) -> f64 {
        let h = self.h_coeff(theta);
        self.g_coeff(theta) - h * h / self.gamma1
    }

    /// Residual damping seen by the director equation after the velocity is
    /// eliminated: `γ₁ − h²/g = γ₁ b / g`, strictly positive.
    pub fn residual_damping(&self, theta: f64) -> f64 {
        let h = self.h_coeff(theta);
        self.gamma1 - h * h / self.g_coeff(theta)
    }

    /// True when `g ≡ h ≡ 1`, `γ₁ = 2`, `ρ = ν = 1`, `a = 0` — the regime in
    /// which the velocity equation is the constant-coefficient heat equation
    /// assumed by the kernel-based coupled solver.
    pub fn is_special_form(&self) -> bool {
        let tol = 1e-12;
        if (self.gamma1 - 2.0).abs() > tol
            || self.gamma2.abs() > tol
            || (self.rho - 1.0).abs() > tol
            || (self.nu - 1.0).abs() > tol
            || self.a.abs() > tol
        {
            return false;
        }
        dense_theta_grid().all(|theta| {
            (self.g_coeff(theta) - 1.0).abs() <= 1e-12 && (self.h_coeff(theta) - 1.0).abs() <= 1e-12
        })
    }

    /// Parses parameters from structured text with keys `alpha1..alpha6`,
    /// `K1`, `K3` (and optional `gamma1`/`gamma2` overrides that must be
    /// consistent, plus optional `rho`, `nu`, `a`). Missing keys default to
    /// the demonstration set.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let value: toml::Value = text
            .parse()
            .map_err(|e| Error::Config(format!("parameter file parse error: {e}")))?;
        let table = value
            .as_table()
            .ok_or_else(|| Error::Config("parameter file must be a table".into()))?;
        let mut params = LeslieParams::special();
        let get = |key: &str, slot: &mut f64| -> Result<bool> {
            match table.get(key) {
                None => Ok(false),
                Some(v) => {
                    *slot = v.as_float().or_else(|| v.as_integer().map(|i| i as f64)).ok_or_else(
                        || Error::Config(format!("key `{key}` must be a number")),
                    )?;
                    Ok(true)
                }
            }
        };
        get("alpha1", &mut params.alpha1)?;
        get("alpha2", &mut params.alpha2)?;
        get("alpha3", &mut params.alpha3)?;
        get("alpha4", &mut params.alpha4)?;
        get("alpha5", &mut params.alpha5)?;
        get("alpha6", &mut params.alpha6)?;
        get("K1", &mut params.k1)?;
        get("K3", &mut params.k3)?;
        get("rho", &mut params.rho)?;
        get("nu", &mut params.nu)?;
        get("a", &mut params.a)?;
        // gamma1/gamma2 are derived; explicit values are accepted only when
        // consistent with the viscosities.
        let derived_g1 = params.alpha3 - params.alpha2;
        let derived_g2 = params.alpha6 - params.alpha5;
        params.gamma1 = derived_g1;
        params.gamma2 = derived_g2;
        let mut override_g1 = derived_g1;
        if get("gamma1", &mut override_g1)? && (override_g1 - derived_g1).abs() > 1e-12 {
            return Err(Error::Config(format!(
                "gamma1 override {override_g1} inconsistent with alpha3 - alpha2 = {derived_g1}"
            )));
        }
        let mut override_g2 = derived_g2;
        if get("gamma2", &mut override_g2)? && (override_g2 - derived_g2).abs() > 1e-12 {
            return Err(Error::Config(format!(
                "gamma2 override {override_g2} inconsistent with alpha6 - alpha5 = {derived_g2}"
            )));
        }
        params.validated()
    }
}

/// Uniform sample of `[0, 2π)` with [`DENSE_THETA_SAMPLES`] points.
pub fn dense_theta_grid() -> impl Iterator<Item = f64> {
    let n = DENSE_THETA_SAMPLES;
    (0..n).map(move |i| 2.0 * std::f64::consts::PI * i as f64 / n as f64)
}
