//! Susceptibilities, Langevin force noise spectra, cooling rates, polariton
//! structure, and Fano-resonance approximations.
//!
//! The mechanical oscillator sees an extra Langevin force carried by the
//! cavity and dopant input noises. Its spectrum splits into the two bath
//! contributions, `S_F(ω) = S_κ(ω) + S_γ(ω)`, each of the form
//! `2·rate·|amplitude|²`. The asymmetry between the two mechanical sidebands
//! gives the cooling rate `Γ_cool = [S_F(ω_m) − S_F(−ω_m)]/2`: anti-Stokes
//! scattering at `+ω_m` cools, Stokes scattering at `−ω_m` heats.
//!
//! Interference between the direct cavity path and the dopant-mediated path
//! makes `S_κ` a Fano lineshape; the closed-form approximation valid for a
//! broad cavity (`κ ≫ ω_m`) under the polariton-sideband drive condition is
//! provided by [`fano_approximation`], and the exact closed forms for a
//! resonant drive (`Δ_c = Δ_a = 0`) by [`resonant_spectrum`] and
//! [`resonant_cooling_rate`].

use num_complex::Complex64;
use thiserror::Error;

use crate::model::LinearParams;

/// Guard band around Δ_a = ω_m inside which the polariton-sideband drive
/// condition diverges (the required cavity detuning becomes infinite).
pub const EPS_SING: f64 = 1e-6;

/// Errors from spectra evaluation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectraError {
    /// Δ_a is within [`EPS_SING`] of ω_m; the sideband drive condition has no
    /// finite solution there.
    #[error(
        "dopant detuning {delta_a} is within {eps} of omega_m; the sideband condition diverges"
    )]
    SingularDetuning { delta_a: f64, eps: f64 },
    /// An operation restricted to the resonant drive was called with nonzero
    /// detunings.
    #[error("operation requires delta_c = delta_a = 0, got ({delta_c}, {delta_a})")]
    DetuningNotZero { delta_c: f64, delta_a: f64 },
}

/// Which mode a susceptibility refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Cavity,
    Dopant,
}

/// One evaluation of the force noise spectra at frequency `omega`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumSample {
    /// Frequency (units of ω_m).
    pub omega: f64,
    /// Cavity-bath contribution S_κ(ω) ≥ 0.
    pub s_kappa: f64,
    /// Dopant-bath contribution S_γ(ω) ≥ 0.
    pub s_gamma: f64,
    /// Total force spectrum S_F = S_κ + S_γ.
    pub s_f: f64,
}

/// Bare susceptibility: 1/(κ − i(ω − Δ_c)) or 1/(γ − i(ω − Δ_a)).
pub fn chi_bare(mode: Mode, lin: &LinearParams, omega: f64) -> Complex64 {
    let (rate, detuning) = match mode {
        Mode::Cavity => (lin.kappa, lin.delta_c),
        Mode::Dopant => (lin.gamma, lin.delta_a),
    };
    1.0 / Complex64::new(rate, -(omega - detuning))
}

/// Dressed susceptibility: χ̃⁻¹ = χ⁻¹ + λ²·χ_other.
pub fn chi_dressed(mode: Mode, lin: &LinearParams, omega: f64) -> Complex64 {
    let own = chi_bare(mode, lin, omega);
    let other = match mode {
        Mode::Cavity => chi_bare(Mode::Dopant, lin, omega),
        Mode::Dopant => chi_bare(Mode::Cavity, lin, omega),
    };
    1.0 / (1.0 / own + lin.lambda * lin.lambda * other)
}

/// Force noise spectra at frequency `omega`:
/// S_κ = 2κ|g̃*χ̃_c − iλμ·χ̃_a·χ_c|², S_γ = 2γ|μχ̃_a − ig̃*λ·χ̃_c·χ_a|².
pub fn force_spectrum(lin: &LinearParams, omega: f64) -> SpectrumSample {
    let chi_c = chi_bare(Mode::Cavity, lin, omega);
    let chi_a = chi_bare(Mode::Dopant, lin, omega);
    let chi_ct = chi_dressed(Mode::Cavity, lin, omega);
    let chi_at = chi_dressed(Mode::Dopant, lin, omega);
    let gt_conj = lin.g_tilde().conj();
    let lam_mu = Complex64::i() * lin.lambda * lin.mu;
    let s_kappa = 2.0 * lin.kappa * (gt_conj * chi_ct - lam_mu * chi_at * chi_c).norm_sqr();
    let s_gamma = 2.0
        * lin.gamma
        * (lin.mu * chi_at - Complex64::i() * gt_conj * lin.lambda * chi_ct * chi_a).norm_sqr();
    SpectrumSample {
        omega,
        s_kappa,
        s_gamma,
        s_f: s_kappa + s_gamma,
    }
}

/// Cooling rate Γ_cool = [S_F(ω_m) − S_F(−ω_m)]/2; positive means net cooling.
pub fn cooling_rate(lin: &LinearParams) -> f64 {
    let anti_stokes = force_spectrum(lin, lin.omega_m).s_f;
    let stokes = force_spectrum(lin, -lin.omega_m).s_f;
    0.5 * (anti_stokes - stokes)
}

/// Polariton energies ω± = [Δ_a + Δ_c ± √((Δ_a − Δ_c)² + 4λ²)]/2,
/// returned as `(ω_+, ω_−)` with ω_+ ≥ ω_−.
pub fn polariton_energies(lin: &LinearParams) -> (f64, f64) {
    let sum = lin.delta_a + lin.delta_c;
    let diff = lin.delta_a - lin.delta_c;
    let split = (diff * diff + 4.0 * lin.lambda * lin.lambda).sqrt();
    (0.5 * (sum + split), 0.5 * (sum - split))
}

/// Cavity detuning that places one polariton on the lower mechanical
/// sideband: Δ_c = ω_m + λ²/(Δ_a − ω_m).
pub fn optimal_cavity_detuning(
    delta_a: f64,
    lambda: f64,
    omega_m: f64,
) -> Result<f64, SpectraError> {
    let eps = EPS_SING * omega_m;
    if (delta_a - omega_m).abs() <= eps {
        return Err(SpectraError::SingularDetuning { delta_a, eps });
    }
    Ok(omega_m + lambda * lambda / (delta_a - omega_m))
}

/// Leading-order (ω_m/κ) approximation of the noise spectra under the
/// polariton-sideband drive condition.
///
/// The cavity spectrum is a Fano lineshape `A(ω)/[Γ² + (ω − Δ)²]` with a
/// frequency-quadratic amplitude; the dopant spectrum is the Lorentzian
/// `B/[Γ² + (ω − Δ)²]` with the same polariton linewidth Γ and energy Δ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FanoApprox {
    /// Polariton linewidth Γ.
    pub gamma_eff: f64,
    /// Polariton energy Δ.
    pub delta_eff: f64,
    /// Lorentzian amplitude B of the dopant spectrum.
    pub b_amp: f64,
    /// Coefficients (a0, a1, a2) of A(ω) = a0 + a1·ω + a2·ω².
    pub a_coeffs: [f64; 3],
}

impl FanoApprox {
    /// Fano amplitude A(ω); non-negative for all real ω (sum of two squares).
    pub fn a_amplitude(&self, omega: f64) -> f64 {
        let [a0, a1, a2] = self.a_coeffs;
        a0 + a1 * omega + a2 * omega * omega
    }

    fn lorentzian(&self, omega: f64) -> f64 {
        let d = omega - self.delta_eff;
        self.gamma_eff * self.gamma_eff + d * d
    }

    /// Approximate cavity spectrum S_κ(ω) ≈ A(ω)/[Γ² + (ω − Δ)²].
    pub fn s_kappa(&self, omega: f64) -> f64 {
        self.a_amplitude(omega) / self.lorentzian(omega)
    }

    /// Approximate dopant spectrum S_γ(ω) ≈ B/[Γ² + (ω − Δ)²].
    pub fn s_gamma(&self, omega: f64) -> f64 {
        self.b_amp / self.lorentzian(omega)
    }
}

/// Build the Fano/Lorentzian approximation of the noise spectra.
///
/// The drive condition is enforced: the cavity detuning is recomputed from
/// `lin.delta_a`, so `lin.delta_c` is ignored. Accuracy degrades when the
/// cavity is not broad (κ ≫ ω_m is assumed but not enforced).
pub fn fano_approximation(lin: &LinearParams) -> Result<FanoApprox, SpectraError> {
    optimal_cavity_detuning(lin.delta_a, lin.lambda, lin.omega_m)?;
    let (g, lam, mu) = (lin.g, lin.lambda, lin.mu);
    let (kappa, gamma, da, wm) = (lin.kappa, lin.gamma, lin.delta_a, lin.omega_m);
    let d = da - wm;
    let d2 = d * d;
    let lam4 = lam.powi(4);
    let denom = lam4 + kappa * kappa * d2;
    let gamma_eff = (lam4 * gamma + kappa * (lam * lam + gamma * kappa) * d2) / denom;
    let delta_eff = (lam4 * wm + kappa * kappa * da * d2) / denom;

    // A(ω) = K·[(α + βω)² + g²γ²ω²] with α, β from expanding the interference
    // bracket {λμ(2Δa − ω) − g[γ² − Δa(ω − Δa)]}.
    let k_pref = 2.0 * kappa * d2 / ((gamma * gamma + da * da) * denom);
    let alpha = 2.0 * lam * mu * da - g * (gamma * gamma + da * da);
    let beta = g * da - lam * mu;
    let a_coeffs = [
        k_pref * alpha * alpha,
        k_pref * 2.0 * alpha * beta,
        k_pref * (beta * beta + g * g * gamma * gamma),
    ];

    let b1 = lam * lam * mu * gamma - (g * lam * gamma + mu * kappa * da) * d;
    let b2 = lam * lam * mu * (2.0 * da - wm) - (g * lam * da - mu * gamma * kappa) * d;
    let b_amp = 2.0 * gamma / (gamma * gamma + da * da) * (b1 * b1 + b2 * b2) / denom;

    Ok(FanoApprox {
        gamma_eff,
        delta_eff,
        b_amp,
        a_coeffs,
    })
}

/// Exact closed-form spectra for the resonant drive Δ_c = Δ_a = 0.
pub fn resonant_spectrum(lin: &LinearParams, omega: f64) -> Result<SpectrumSample, SpectraError> {
    require_resonant(lin)?;
    let (g, lam, mu) = (lin.g, lin.lambda, lin.mu);
    let (kappa, gamma) = (lin.kappa, lin.gamma);
    let w2 = omega * omega;
    let lgk = lam * lam + gamma * kappa;
    let denom = lgk * lgk + (gamma * gamma + kappa * kappa - 2.0 * lam * lam) * w2 + w2 * w2;
    let num_k = g * g * gamma * gamma * w2 + (g * gamma * gamma + lam * mu * omega).powi(2);
    let s_kappa = 2.0 * kappa / (gamma * gamma) * num_k / denom;
    let num_g = mu * mu * lgk * lgk + gamma * gamma * (g * lam + mu * omega).powi(2);
    let s_gamma = 2.0 / gamma * num_g / denom;
    Ok(SpectrumSample {
        omega,
        s_kappa,
        s_gamma,
        s_f: s_kappa + s_gamma,
    })
}

/// Closed-form cooling rate for the resonant drive:
/// Γ_cool = 4gλμ·ω_m(γ + κ)/[(λ² + γκ)² + (γ² + κ² − 2λ²)ω_m² + ω_m⁴].
///
/// The denominator is positive, so the sign is the sign of gλμ.
pub fn resonant_cooling_rate(lin: &LinearParams) -> Result<f64, SpectraError> {
    require_resonant(lin)?;
    let (g, lam, mu) = (lin.g, lin.lambda, lin.mu);
    let (kappa, gamma, wm) = (lin.kappa, lin.gamma, lin.omega_m);
    let wm2 = wm * wm;
    let lgk = lam * lam + gamma * kappa;
    let denom = lgk * lgk + (gamma * gamma + kappa * kappa - 2.0 * lam * lam) * wm2 + wm2 * wm2;
    Ok(4.0 * g * lam * mu * wm * (gamma + kappa) / denom)
}

fn require_resonant(lin: &LinearParams) -> Result<(), SpectraError> {
    if lin.delta_c != 0.0 || lin.delta_a != 0.0 {
        return Err(SpectraError::DetuningNotZero {
            delta_c: lin.delta_c,
            delta_a: lin.delta_a,
        });
    }
    Ok(())
}
