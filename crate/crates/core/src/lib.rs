//! Simulation library for a hybrid optomechanical system: a partially
//! reflecting membrane doped with an ensemble of two-level emitters inside a
//! driven optical cavity.
//!
//! Three bosonic modes are tracked — the cavity field, the collective dopant
//! mode, and one mechanical vibration — coupled by radiation pressure (rate
//! `g`), a Tavis–Cummings exchange (rate `lambda`), and the mechanically
//! modulated part of that exchange (rate `mu`). Everything is expressed in
//! units of the mechanical frequency (`omega_m = 1` internally).
//!
//! The crate is organised along the computation pipeline:
//!
//! - [`model`]: parameter containers, validation, linearization, and
//!   cooperativity estimators;
//! - [`steadystate`]: classical nonlinear steady states, branch enumeration,
//!   and Kerr-type bistability;
//! - [`spectra`]: susceptibilities, Langevin force noise spectra, cooling
//!   rates, polaritons, and Fano-resonance approximations;
//! - [`covariance`]: drift/diffusion matrices, dynamical stability, Lyapunov
//!   steady-state covariances, and final phonon occupations;
//! - [`experiments`]: cooling-strategy configuration and parallel parameter
//!   sweeps (detuning maps, polariton line scans, resonant coupling maps).
//!
//! All types are plain values and all functions are pure; everything can be
//! evaluated concurrently without synchronization.

pub mod covariance;
pub mod experiments;
pub mod model;
pub mod spectra;
pub mod steadystate;

pub use model::{DesignInputs, LinearParams, PhysicalParams, ValidatedParams};
pub use spectra::SpectrumSample;
