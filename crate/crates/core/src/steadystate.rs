//! Classical nonlinear steady states: branch enumeration, Kerr-type
//! bistability, and the inverse (drive-for-amplitude) problem.
//!
//! The classical amplitudes (c̄, ā, q̄) obey three coupled equations. The
//! dopant amplitude and mechanical displacement eliminate in closed form,
//! leaving one implicit equation η_φ = Z(|c̄|²)·c̄ with the impedance
//!
//! ```text
//! Z(x) = κ + iΔ_c + i·g0·q̄(x) + (λ + μ0·q̄(x))²/(γ + iΔ_a),
//! q̄(x) = −(g0 − 2λμ0Δ_a/D)·x / (ω_m − 2μ0²Δ_a·x/D),    D = γ² + Δ_a².
//! ```
//!
//! Clearing the rational denominators turns |Z(x)|²·x = η² into a real
//! polynomial of degree ≤ 5 in x = |c̄|²; every non-negative real root is a
//! branch. Roots are found by the companion-matrix eigenvalue method and
//! polished by Newton iteration on the full system, which guarantees that no
//! branch is missed — in particular all three branches of the dispersive Kerr
//! bistability (λ = μ0 = 0) and its dopant-shifted variants.

use nalgebra::{DMatrix, Matrix3, Vector3};
use num_complex::Complex64;
use thiserror::Error;

use crate::covariance;
use crate::model::{linearize, ValidatedParams};

/// Residual accepted on the steady-state equations (ω_m units, η ≲ 10³).
pub const RESIDUAL_TOL: f64 = 1e-10;
/// Relative distance below which two roots are considered the same branch.
pub const DEDUP_REL: f64 = 1e-8;
/// Guard band on the mechanical-response denominator ω_m − 2μ0²Δ_a·x/D.
pub const DEGENERATE_TOL: f64 = 1e-9;

const NEWTON_MAX_ITER: usize = 50;

/// Errors from the steady-state solver.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SteadyStateError {
    /// The root finder produced no converged branch.
    #[error("steady-state root finding did not converge")]
    NoConvergence,
    /// The mechanical-response denominator vanishes at the requested
    /// amplitude; the inversion is reported, not extrapolated.
    #[error("mechanical response denominator degenerate at |cbar|^2 = {x}")]
    DegenerateDenominator { x: f64 },
}

/// One classical steady-state branch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyBranch {
    /// Intracavity amplitude c̄.
    pub cbar: Complex64,
    /// Dopant amplitude ā = −i(λ + μ0·q̄)·c̄/(γ + iΔ_a).
    pub abar: Complex64,
    /// Static mechanical displacement q̄.
    pub qbar: f64,
    /// Max-norm residual of the three steady-state equations.
    pub residual: f64,
    /// The mechanical-response denominator is within [`DEGENERATE_TOL`] of
    /// zero at this root; amplitudes are not reconstructed (NaN).
    pub degenerate: bool,
}

/// Coefficient helpers shared by the forward and inverse problems.
struct Impedance {
    kappa: f64,
    delta_c: f64,
    delta_a: f64,
    gamma: f64,
    g0: f64,
    lambda: f64,
    mu0: f64,
    omega_m: f64,
    /// D = γ² + Δ_a².
    d: f64,
    /// den(x) = ω_m − d1·x.
    d1: f64,
    /// q̄ = −num_q·x/den(x).
    num_q: f64,
}

impl Impedance {
    fn new(p: &ValidatedParams) -> Self {
        let d = p.gamma * p.gamma + p.delta_a * p.delta_a;
        Impedance {
            kappa: p.kappa,
            delta_c: p.delta_c,
            delta_a: p.delta_a,
            gamma: p.gamma,
            g0: p.g0,
            lambda: p.lambda,
            mu0: p.mu0,
            omega_m: p.omega_m,
            d,
            d1: 2.0 * p.mu0 * p.mu0 * p.delta_a / d,
            num_q: p.g0 - 2.0 * p.lambda * p.mu0 * p.delta_a / d,
        }
    }

    fn den(&self, x: f64) -> f64 {
        self.omega_m - self.d1 * x
    }

    fn qbar(&self, x: f64) -> f64 {
        -self.num_q * x / self.den(x)
    }

    fn z_of_q(&self, qbar: f64) -> Complex64 {
        let lam_eff = self.lambda + self.mu0 * qbar;
        Complex64::new(self.kappa, self.delta_c + self.g0 * qbar)
            + lam_eff * lam_eff / Complex64::new(self.gamma, self.delta_a)
    }

    /// Real polynomial q(x) = x·|P(x)|² − η²·den(x)⁴ with
    /// P(x) = Z(x)·den(x)², ascending coefficients, degree ≤ 5.
    fn branch_polynomial(&self, eta: f64) -> Vec<f64> {
        let den = [
            Complex64::new(self.omega_m, 0.0),
            Complex64::new(-self.d1, 0.0),
        ];
        let den2 = poly_mul(&den, &den);
        // (κ + iΔc)·den²
        let mut p = scale(&den2, Complex64::new(self.kappa, self.delta_c));
        // −i·g0·num_q·x·den
        let lead = Complex64::new(0.0, -self.g0 * self.num_q);
        p = poly_add(&p, &poly_mul(&[Complex64::ZERO, lead], &den));
        // (λω_m − g0μ0·x)²·(γ − iΔa)/D
        let lam_poly = [
            Complex64::new(self.lambda * self.omega_m, 0.0),
            Complex64::new(-self.g0 * self.mu0, 0.0),
        ];
        let phase = Complex64::new(self.gamma, -self.delta_a) / self.d;
        p = poly_add(&p, &scale(&poly_mul(&lam_poly, &lam_poly), phase));

        let conj: Vec<Complex64> = p.iter().map(|c| c.conj()).collect();
        let abs2 = poly_mul(&p, &conj);
        let mut q: Vec<f64> = std::iter::once(0.0)
            .chain(abs2.iter().map(|c| c.re))
            .collect();
        let den4 = poly_mul(&den2, &den2);
        for (qc, dc) in q.iter_mut().zip(den4.iter()) {
            *qc -= eta * eta * dc.re;
        }
        q
    }
}

fn poly_mul(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::ZERO; a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        for (j, &bj) in b.iter().enumerate() {
            out[i + j] += ai * bj;
        }
    }
    out
}

fn poly_add(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::ZERO; a.len().max(b.len())];
    for (o, &ai) in out.iter_mut().zip(a.iter()) {
        *o += ai;
    }
    for (o, &bj) in out.iter_mut().zip(b.iter()) {
        *o += bj;
    }
    out
}

fn scale(a: &[Complex64], s: Complex64) -> Vec<Complex64> {
    a.iter().map(|&c| c * s).collect()
}

/// Near-real roots of a real-coefficient polynomial (ascending coefficients)
/// via the companion-matrix eigenvalue method.
///
/// The coefficients of the branch polynomial can span many decades (a tiny
/// leading term still matters at large |c̄|²), so the variable is rebalanced
/// geometrically before building the companion matrix. The filter is
/// deliberately loose: candidates are only seeds for the Newton polish, which
/// keeps nothing that fails the full nonlinear residual.
fn real_root_candidates(coeffs: &[f64]) -> Vec<f64> {
    let mut trimmed: Vec<f64> = coeffs.to_vec();
    while trimmed.len() > 1 && trimmed.last() == Some(&0.0) {
        trimmed.pop();
    }
    let n = trimmed.len() - 1;
    if n == 0 {
        return Vec::new();
    }
    let (c0, cn) = (trimmed[0].abs(), trimmed[n].abs());
    let scale = if c0 > 0.0 && cn > 0.0 {
        (c0 / cn).powf(1.0 / n as f64)
    } else {
        1.0
    };
    let balanced: Vec<f64> = trimmed
        .iter()
        .enumerate()
        .map(|(k, &c)| c * scale.powi(k as i32))
        .collect();
    let lead = balanced[n];
    let mut companion = DMatrix::<f64>::zeros(n, n);
    for i in 1..n {
        companion[(i, i - 1)] = 1.0;
    }
    for i in 0..n {
        companion[(i, n - 1)] = -balanced[i] / lead;
    }
    let eig = companion.complex_eigenvalues();
    eig.iter()
        .filter(|e| e.im.abs() <= 1e-4 * e.re.abs().max(1.0))
        .map(|e| e.re * scale)
        .collect()
}

/// Solve the classical steady state, returning every branch sorted by |c̄|.
///
/// Branches satisfy the full nonlinear equations to [`RESIDUAL_TOL`] after a
/// Newton polish. A root landing in the degenerate-denominator guard band is
/// returned flagged (with NaN amplitudes) rather than extrapolated.
pub fn solve_steady_state(p: &ValidatedParams) -> Result<Vec<SteadyBranch>, SteadyStateError> {
    if p.eta == 0.0 {
        return Ok(vec![SteadyBranch {
            cbar: Complex64::ZERO,
            abar: Complex64::ZERO,
            qbar: 0.0,
            residual: 0.0,
            degenerate: false,
        }]);
    }
    let imp = Impedance::new(p);
    let eta_phi = Complex64::from_polar(p.eta, -p.phi);
    let poly = imp.branch_polynomial(p.eta);
    let mut branches: Vec<SteadyBranch> = Vec::new();
    for x in real_root_candidates(&poly) {
        if x < -1e-9 {
            continue;
        }
        let x = x.max(0.0);
        if imp.den(x).abs() <= DEGENERATE_TOL {
            branches.push(SteadyBranch {
                cbar: Complex64::new(f64::NAN, f64::NAN),
                abar: Complex64::new(f64::NAN, f64::NAN),
                qbar: f64::NAN,
                residual: f64::NAN,
                degenerate: true,
            });
            continue;
        }
        let qbar = imp.qbar(x);
        let z = imp.z_of_q(qbar);
        if z.norm() == 0.0 {
            continue;
        }
        let cbar = eta_phi / z;
        if let Some(branch) = newton_polish(&imp, eta_phi, cbar, qbar) {
            branches.push(branch);
        }
    }
    // Deduplicate near-identical roots (relative amplitude distance).
    branches.sort_by(|a, b| a.cbar.norm().total_cmp(&b.cbar.norm()));
    branches.dedup_by(|b, a| {
        if a.degenerate || b.degenerate {
            return a.degenerate && b.degenerate;
        }
        let scale = a.cbar.norm().max(b.cbar.norm()).max(1e-300);
        (a.cbar - b.cbar).norm() <= DEDUP_REL * scale
            && (a.qbar - b.qbar).abs() <= DEDUP_REL * scale
    });
    if branches.is_empty() {
        return Err(SteadyStateError::NoConvergence);
    }
    Ok(branches)
}

/// Residuals of the three steady-state equations at (c̄, ā, q̄).
fn equation_residual(
    imp: &Impedance,
    eta_phi: Complex64,
    cbar: Complex64,
    abar: Complex64,
    qbar: f64,
) -> f64 {
    let lam_eff = imp.lambda + imp.mu0 * qbar;
    let f1 = -Complex64::new(imp.kappa, imp.delta_c) * cbar
        - Complex64::i() * lam_eff * abar
        - Complex64::i() * imp.g0 * cbar * qbar
        + eta_phi;
    let f2 = -Complex64::new(imp.gamma, imp.delta_a) * abar - Complex64::i() * lam_eff * cbar;
    let f3 =
        -imp.omega_m * qbar - 2.0 * imp.mu0 * (cbar * abar.conj()).re - imp.g0 * cbar.norm_sqr();
    f1.norm().max(f2.norm()).max(f3.abs())
}

fn abar_of(imp: &Impedance, cbar: Complex64, qbar: f64) -> Complex64 {
    -Complex64::i() * (imp.lambda + imp.mu0 * qbar) * cbar / Complex64::new(imp.gamma, imp.delta_a)
}

/// Newton iteration on (Re c̄, Im c̄, q̄) with ā eliminated in closed form.
fn newton_polish(
    imp: &Impedance,
    eta_phi: Complex64,
    mut cbar: Complex64,
    mut qbar: f64,
) -> Option<SteadyBranch> {
    for _ in 0..NEWTON_MAX_ITER {
        let lam_eff = imp.lambda + imp.mu0 * qbar;
        let z = imp.z_of_q(qbar);
        let f1 = eta_phi - z * cbar;
        // f3 with ā substituted: −ω_m·q̄ + w(q̄)|c̄|².
        let w = 2.0 * imp.mu0 * lam_eff * imp.delta_a / imp.d - imp.g0;
        let f3 = -imp.omega_m * qbar + w * cbar.norm_sqr();
        let f = Vector3::new(f1.re, f1.im, f3);
        if f.amax() <= 1e-16 {
            break;
        }
        let dz_dq = Complex64::new(0.0, imp.g0)
            + 2.0 * imp.mu0 * lam_eff / Complex64::new(imp.gamma, imp.delta_a);
        let df1_dq = -dz_dq * cbar;
        let dw_dq = 2.0 * imp.mu0 * imp.mu0 * imp.delta_a / imp.d;
        let jac = Matrix3::new(
            -z.re,
            z.im,
            df1_dq.re,
            -z.im,
            -z.re,
            df1_dq.im,
            2.0 * cbar.re * w,
            2.0 * cbar.im * w,
            -imp.omega_m + dw_dq * cbar.norm_sqr(),
        );
        let step = jac.lu().solve(&(-f))?;
        cbar += Complex64::new(step[0], step[1]);
        qbar += step[2];
        if step.amax() <= 1e-14 * cbar.norm().max(1.0) {
            break;
        }
    }
    let abar = abar_of(imp, cbar, qbar);
    let residual = equation_residual(imp, eta_phi, cbar, abar, qbar);
    (residual <= RESIDUAL_TOL * (1.0f64).max(eta_phi.norm())).then_some(SteadyBranch {
        cbar,
        abar,
        qbar,
        residual,
        degenerate: false,
    })
}

/// Drive amplitude and phase that sustain a given real intracavity amplitude:
/// η_φ = Z(c̄²)·c̄, returned as (η, φ) with η_φ = η·e^{−iφ}.
///
/// Exact inverse of [`solve_steady_state`] on the corresponding branch.
/// Panics if `cbar` is negative.
pub fn drive_for_amplitude(p: &ValidatedParams, cbar: f64) -> Result<(f64, f64), SteadyStateError> {
    assert!(cbar >= 0.0, "amplitude must be non-negative");
    let imp = Impedance::new(p);
    let x = cbar * cbar;
    if imp.den(x).abs() <= DEGENERATE_TOL {
        return Err(SteadyStateError::DegenerateDenominator { x });
    }
    let eta_phi = imp.z_of_q(imp.qbar(x)) * cbar;
    Ok((eta_phi.norm(), -eta_phi.arg()))
}

/// Count the branches whose linearization is dynamically stable.
///
/// More than one stable branch flags bistability. Degenerate branches are not
/// counted; eigenvalue failures count as unstable.
pub fn count_stable_branches(p: &ValidatedParams, branches: &[SteadyBranch]) -> usize {
    branches
        .iter()
        .filter(|b| !b.degenerate)
        .filter(|b| {
            let lin = linearize(p, b.cbar, b.qbar);
            let a = covariance::drift_matrix(&lin);
            covariance::dynamical_stability(&a)
                .map(|r| r.stable)
                .unwrap_or(false)
        })
        .count()
}
