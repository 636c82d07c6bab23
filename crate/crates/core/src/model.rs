//! Parameter containers, validation, and the linearization bridge from the
//! full nonlinear model to the linearized one.
//!
//! Two parameter sets exist. [`PhysicalParams`] holds the bare couplings of
//! the nonlinear three-mode model together with the cavity drive; it is the
//! input to the classical steady-state solver. [`LinearParams`] holds the
//! linearized coupling rates `g = g0·|c̄|`, `mu = mu0·|c̄|` around a steady
//! state with intracavity amplitude `c̄`; it is what the spectra and
//! covariance pipelines consume, and it may also be constructed directly when
//! the linearized rates are known.

use num_complex::Complex64;
use thiserror::Error;

/// Errors from parameter validation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    /// A decay rate or frequency that must be strictly positive is not.
    #[error("parameter `{name}` must be positive, got {value}")]
    NonPositiveRate { name: &'static str, value: f64 },
    /// A field is NaN or infinite.
    #[error("parameter `{name}` is not finite")]
    NonFiniteInput { name: &'static str },
}

/// Full nonlinear model inputs: bare couplings, rates, detunings, and drive.
///
/// Frequencies and rates may be given in any common unit; [`validate`]
/// rescales everything to `omega_m = 1`. Detunings are `Δ_i = ω_i − ω_L`
/// relative to the drive laser.
///
/// [`validate`]: PhysicalParams::validate
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    /// Mechanical frequency ω_m (the reference unit, > 0).
    pub omega_m: f64,
    /// Intrinsic mechanical linewidth γ_m (≥ 0).
    pub gamma_m: f64,
    /// Thermal bath occupation n̄ (≥ 0).
    pub nbar: f64,
    /// Cavity amplitude decay rate κ (> 0).
    pub kappa: f64,
    /// Dopant amplitude decay rate γ (> 0).
    pub gamma: f64,
    /// Cavity detuning Δ_c.
    pub delta_c: f64,
    /// Dopant detuning Δ_a.
    pub delta_a: f64,
    /// Bare radiation-pressure coupling g_0.
    pub g0: f64,
    /// Tavis–Cummings coupling λ.
    pub lambda: f64,
    /// Bare mechanically modulated coupling μ_0.
    pub mu0: f64,
    /// Drive amplitude η (≥ 0).
    pub eta: f64,
    /// Drive phase φ.
    pub phi: f64,
}

/// [`PhysicalParams`] that passed validation, normalized to `omega_m = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidatedParams(PhysicalParams);

impl PhysicalParams {
    /// Validate and normalize to `omega_m = 1` units.
    ///
    /// Every frequency-like field is divided by `omega_m`; `nbar` and `phi`
    /// are dimensionless and untouched. Rejects non-finite inputs, rates that
    /// must be positive, and negative `gamma_m`, `nbar`, `eta`.
    pub fn validate(self) -> Result<ValidatedParams, ModelError> {
        let fields = [
            ("omega_m", self.omega_m),
            ("gamma_m", self.gamma_m),
            ("nbar", self.nbar),
            ("kappa", self.kappa),
            ("gamma", self.gamma),
            ("delta_c", self.delta_c),
            ("delta_a", self.delta_a),
            ("g0", self.g0),
            ("lambda", self.lambda),
            ("mu0", self.mu0),
            ("eta", self.eta),
            ("phi", self.phi),
        ];
        for (name, value) in fields {
            if !value.is_finite() {
                return Err(ModelError::NonFiniteInput { name });
            }
        }
        for (name, value) in [
            ("omega_m", self.omega_m),
            ("kappa", self.kappa),
            ("gamma", self.gamma),
        ] {
            if value <= 0.0 {
                return Err(ModelError::NonPositiveRate { name, value });
            }
        }
        for (name, value) in [
            ("gamma_m", self.gamma_m),
            ("nbar", self.nbar),
            ("eta", self.eta),
        ] {
            if value < 0.0 {
                return Err(ModelError::NonPositiveRate { name, value });
            }
        }
        let w = self.omega_m;
        Ok(ValidatedParams(PhysicalParams {
            omega_m: 1.0,
            gamma_m: self.gamma_m / w,
            nbar: self.nbar,
            kappa: self.kappa / w,
            gamma: self.gamma / w,
            delta_c: self.delta_c / w,
            delta_a: self.delta_a / w,
            g0: self.g0 / w,
            lambda: self.lambda / w,
            mu0: self.mu0 / w,
            eta: self.eta / w,
            phi: self.phi,
        }))
    }
}

impl std::ops::Deref for ValidatedParams {
    type Target = PhysicalParams;

    fn deref(&self) -> &PhysicalParams {
        &self.0
    }
}

/// Linearized system parameters around a classical steady state.
///
/// All couplings are real: the drive phase is chosen such that `c̄ ∈ ℝ`, so
/// complexity lives only in the effective coupling [`g_tilde`]. `delta_c` and
/// `lambda` are understood as the shifted values that absorb the static
/// displacement `q̄` (see [`linearize`]).
///
/// [`g_tilde`]: LinearParams::g_tilde
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearParams {
    /// Linearized radiation-pressure coupling g = g_0·|c̄|.
    pub g: f64,
    /// Tavis–Cummings coupling λ (including the μ_0·q̄ shift).
    pub lambda: f64,
    /// Linearized dopant-mechanical coupling μ = μ_0·|c̄|.
    pub mu: f64,
    /// Cavity detuning Δ_c (including the g_0·q̄ shift).
    pub delta_c: f64,
    /// Dopant detuning Δ_a.
    pub delta_a: f64,
    /// Cavity amplitude decay rate κ.
    pub kappa: f64,
    /// Dopant amplitude decay rate γ.
    pub gamma: f64,
    /// Mechanical linewidth γ_m.
    pub gamma_m: f64,
    /// Thermal bath occupation n̄.
    pub nbar: f64,
    /// Mechanical frequency ω_m (1 in internal units).
    pub omega_m: f64,
}

impl LinearParams {
    /// Check finiteness and rate positivity, mirroring [`PhysicalParams::validate`].
    pub fn validated(self) -> Result<Self, ModelError> {
        let fields = [
            ("g", self.g),
            ("lambda", self.lambda),
            ("mu", self.mu),
            ("delta_c", self.delta_c),
            ("delta_a", self.delta_a),
            ("kappa", self.kappa),
            ("gamma", self.gamma),
            ("gamma_m", self.gamma_m),
            ("nbar", self.nbar),
            ("omega_m", self.omega_m),
        ];
        for (name, value) in fields {
            if !value.is_finite() {
                return Err(ModelError::NonFiniteInput { name });
            }
        }
        for (name, value) in [
            ("omega_m", self.omega_m),
            ("kappa", self.kappa),
            ("gamma", self.gamma),
        ] {
            if value <= 0.0 {
                return Err(ModelError::NonPositiveRate { name, value });
            }
        }
        for (name, value) in [("gamma_m", self.gamma_m), ("nbar", self.nbar)] {
            if value < 0.0 {
                return Err(ModelError::NonPositiveRate { name, value });
            }
        }
        Ok(self)
    }

    /// Effective optomechanical coupling g̃ = g − iλμ/(γ + iΔ_a).
    ///
    /// Recomputed from the stored fields, so the defining identity holds by
    /// construction.
    pub fn g_tilde(&self) -> Complex64 {
        let denom = Complex64::new(self.gamma, self.delta_a);
        Complex64::new(self.g, 0.0) - Complex64::i() * self.lambda * self.mu / denom
    }

    /// Dopant-cavity cooperativity C = λ²/(κγ).
    pub fn cooperativity(&self) -> f64 {
        self.lambda * self.lambda / (self.kappa * self.gamma)
    }
}

/// Linearize the nonlinear model around a classical steady state.
///
/// `cbar` is the intracavity amplitude and `qbar` the static mechanical
/// displacement of that steady state. The coupling rates become
/// `g = g0·|c̄|`, `mu = mu0·|c̄|` (the drive phase convention makes `c̄` real
/// non-negative, so only the modulus enters), while the static displacement
/// is absorbed into the detuning and exchange coupling: `Δ_c → Δ_c + g0·q̄`,
/// `λ → λ + μ0·q̄`.
pub fn linearize(p: &ValidatedParams, cbar: Complex64, qbar: f64) -> LinearParams {
    let amp = cbar.norm();
    LinearParams {
        g: p.g0 * amp,
        lambda: p.lambda + p.mu0 * qbar,
        mu: p.mu0 * amp,
        delta_c: p.delta_c + p.g0 * qbar,
        delta_a: p.delta_a,
        kappa: p.kappa,
        gamma: p.gamma,
        gamma_m: p.gamma_m,
        nbar: p.nbar,
        omega_m: p.omega_m,
    }
}

/// Cavity-design inputs for the cooperativity estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignInputs {
    /// Number of dopant emitters N.
    pub n_emitters: f64,
    /// Cavity finesse F.
    pub finesse: f64,
    /// Effective mode area S_eff (length²).
    pub mode_area: f64,
    /// Cavity wavelength λ_c (same length unit as `mode_area`).
    pub wavelength: f64,
}

impl DesignInputs {
    /// Collective cooperativity C = 3·N·F·(λ_c/2π)²/S_eff.
    ///
    /// Independent of the emitter species: the single-emitter dipole moment
    /// cancels between λ² and γ.
    pub fn cooperativity(&self) -> f64 {
        let reduced = self.wavelength / (2.0 * std::f64::consts::PI);
        3.0 * self.n_emitters * self.finesse * reduced * reduced / self.mode_area
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;

    fn base_physical() -> PhysicalParams {
        PhysicalParams {
            omega_m: 1.0,
            gamma_m: 1e-6,
            nbar: 1e3,
            kappa: 20.0,
            gamma: 0.8,
            delta_c: 0.0,
            delta_a: 0.0,
            g0: 0.025,
            lambda: 8.0,
            mu0: 0.001,
            eta: 10.0,
            phi: 0.0,
        }
    }

    #[test]
    fn rejects_zero_kappa() {
        let p = PhysicalParams {
            kappa: 0.0,
            ..base_physical()
        };
        assert_eq!(
            p.validate().unwrap_err(),
            ModelError::NonPositiveRate {
                name: "kappa",
                value: 0.0
            }
        );
    }

    #[test]
    fn rejects_non_finite() {
        let p = PhysicalParams {
            delta_a: f64::NAN,
            ..base_physical()
        };
        assert_eq!(
            p.validate().unwrap_err(),
            ModelError::NonFiniteInput { name: "delta_a" }
        );
    }

    #[test]
    fn normalizes_to_mechanical_units() {
        let p = PhysicalParams {
            omega_m: 2.0,
            kappa: 40.0,
            ..base_physical()
        };
        let v = p.validate().unwrap();
        assert_eq!(v.omega_m, 1.0);
        assert_eq!(v.kappa, 20.0);
    }

    #[test]
    fn accepts_reference_parameter_set() {
        // g/ω_m = 0.25 at c̄ = 10 with g0 = 0.025, plus κ = 20, γ = 0.8,
        // Q_m = 10⁶, n̄ = 10³.
        let v = base_physical().validate().unwrap();
        assert_eq!(v.kappa, 20.0);
        assert_eq!(v.gamma, 0.8);
        assert_eq!(v.gamma_m, 1e-6);
        assert_eq!(v.nbar, 1e3);
    }

    #[test]
    fn g_tilde_reduces_to_g_without_dopant_coupling() {
        let v = base_physical().validate().unwrap();
        for (lam, mu0) in [(0.0, 0.001), (8.0, 0.0)] {
            let p = PhysicalParams {
                lambda: lam,
                mu0,
                ..*v
            }
            .validate()
            .unwrap();
            let lin = linearize(&p, Complex64::new(10.0, 0.0), 0.0);
            assert_eq!(lin.g_tilde(), Complex64::new(lin.g, 0.0));
        }
    }

    #[test]
    fn g_tilde_on_resonant_dopant() {
        let p = PhysicalParams {
            delta_a: 0.0,
            ..base_physical()
        }
        .validate()
        .unwrap();
        let lin = linearize(&p, Complex64::new(10.0, 0.0), 0.0);
        // Δa = 0: g̃ = g − iλμ/γ
        let expected = Complex64::new(lin.g, -lin.lambda * lin.mu / lin.gamma);
        assert_relative_eq!(lin.g_tilde().re, expected.re, max_relative = 1e-14);
        assert_relative_eq!(lin.g_tilde().im, expected.im, max_relative = 1e-14);
    }

    #[test]
    fn linearize_reference_point() {
        // g0 = 0.025, c̄ = 10, λ = 8, μ0 = 0.001, γ = 0.8, Δa = 1:
        // g = 0.25, μ = 0.01, g̃ = 0.25 − i·0.08/(0.8 + i).
        // Hand evaluation: i·0.08/(0.8+i) = (0.08 + 0.064i)/1.64.
        let p = PhysicalParams {
            delta_a: 1.0,
            ..base_physical()
        }
        .validate()
        .unwrap();
        let lin = linearize(&p, Complex64::new(10.0, 0.0), 0.0);
        assert_eq!(lin.g, 0.25);
        assert_eq!(lin.mu, 0.01);
        let gt = lin.g_tilde();
        assert_abs_diff_eq!(gt.re, 0.25 - 0.08 / 1.64, epsilon = 1e-15);
        assert_abs_diff_eq!(gt.im, -0.064 / 1.64, epsilon = 1e-15);
    }

    #[test]
    fn linearize_absorbs_static_displacement() {
        let p = base_physical().validate().unwrap();
        let qbar = -0.3;
        let lin = linearize(&p, Complex64::new(4.0, 0.0), qbar);
        assert_relative_eq!(lin.delta_c, p.delta_c + p.g0 * qbar, max_relative = 1e-14);
        assert_relative_eq!(lin.lambda, p.lambda + p.mu0 * qbar, max_relative = 1e-14);
    }

    #[test]
    fn cooperativity_reference_values() {
        let p = base_physical().validate().unwrap();
        let lin = linearize(&p, Complex64::new(10.0, 0.0), 0.0);
        assert_eq!(lin.cooperativity(), 4.0);

        let zero = LinearParams { lambda: 0.0, ..lin };
        assert_eq!(zero.cooperativity(), 0.0);

        // λ² = κγ is the threshold C = 1.
        let thresh = LinearParams {
            lambda: (20.0f64 * 0.8).sqrt(),
            ..lin
        };
        assert_relative_eq!(thresh.cooperativity(), 1.0, max_relative = 1e-14);
    }

    #[test]
    fn design_cooperativity_estimate() {
        // N·F = 10⁶, S_eff = 50 µm × 50 µm, λ_c = 780 nm → C ≈ 18.49.
        let d = DesignInputs {
            n_emitters: 100.0,
            finesse: 1e4,
            mode_area: 50e-6 * 50e-6,
            wavelength: 780e-9,
        };
        assert_relative_eq!(d.cooperativity(), 18.4931, max_relative = 1e-4);

        let none = DesignInputs {
            n_emitters: 0.0,
            ..d
        };
        assert_eq!(none.cooperativity(), 0.0);

        let double = DesignInputs {
            n_emitters: 200.0,
            ..d
        };
        assert_relative_eq!(
            double.cooperativity(),
            2.0 * d.cooperativity(),
            max_relative = 1e-14
        );
    }

    proptest! {
        // Scaling c̄ by s scales g and μ by s and leaves λ untouched (q̄ = 0).
        #[test]
        fn linearize_is_homogeneous_in_cbar(
            amp in 0.01f64..100.0,
            scale in 0.1f64..10.0,
            phase in 0.0f64..std::f64::consts::TAU,
        ) {
            let p = base_physical().validate().unwrap();
            let cbar = Complex64::from_polar(amp, phase);
            let a = linearize(&p, cbar, 0.0);
            let b = linearize(&p, cbar * scale, 0.0);
            prop_assert!((b.g - scale * a.g).abs() <= 1e-12 * b.g.abs().max(1.0));
            prop_assert!((b.mu - scale * a.mu).abs() <= 1e-12 * b.mu.abs().max(1.0));
            prop_assert_eq!(a.lambda, b.lambda);
        }

        // |g̃| is continuous in Δa for γ > 0: small detuning steps make small
        // coupling steps.
        #[test]
        fn g_tilde_is_continuous_in_delta_a(da in -5.0f64..5.0, step in 1e-9f64..1e-6) {
            let p = base_physical().validate().unwrap();
            let lin = linearize(&p, Complex64::new(10.0, 0.0), 0.0);
            let at = LinearParams { delta_a: da, ..lin };
            let shifted = LinearParams { delta_a: da + step, ..lin };
            let diff = (at.g_tilde() - shifted.g_tilde()).norm();
            // |dg̃/dΔa| ≤ λμ/γ² for γ = 0.8.
            prop_assert!(diff <= 2.0 * lin.lambda * lin.mu / (0.8f64 * 0.8) * step);
        }

        // Cooperativity is a ratio of same-unit quantities: invariant under
        // the ω_m = 1 rescaling.
        #[test]
        fn cooperativity_invariant_under_rescaling(w in 0.1f64..10.0) {
            let base = base_physical();
            let scaled = PhysicalParams {
                omega_m: w,
                kappa: base.kappa * w,
                gamma: base.gamma * w,
                lambda: base.lambda * w,
                ..base
            };
            let a = linearize(&base.validate().unwrap(), Complex64::new(1.0, 0.0), 0.0);
            let b = linearize(&scaled.validate().unwrap(), Complex64::new(1.0, 0.0), 0.0);
            prop_assert!((a.cooperativity() - b.cooperativity()).abs() <= 1e-10 * a.cooperativity());
        }
    }
}
