//! Gaussian model of a microwave cavity coupled to a mechanical mode by
//! radiation pressure and to a magnon mode by a beam-splitter interaction.
//!
//! The pipeline mirrors the linear-systems treatment of the quantum Langevin
//! equations:
//!
//! 1. [`drift_matrix`], [`input_matrix`], [`output_matrix`] and
//!    [`feedthrough_matrix`] encode `d eta/dt = A eta + B eta_in` and
//!    `eta_out = C eta - D eta_in`.
//! 2. [`is_stable`] checks the spectrum of `A`.
//! 3. [`scattering`] solves `S = C (-i omega I - A)^{-1} B - D` and
//!    [`quadrature_scattering`] rotates it to quadratures.
//! 4. [`output_covariance`] propagates the thermal [`noise_matrix`] into the
//!    4×4 covariance of the two output fields, from which
//!    [`symplectic_eigenvalue_min`] and [`log_negativity`] follow.

mod dynamics;
mod gaussian;
mod matrices;
mod scattering;
mod stability;
mod sweep;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use dynamics::{mean_dynamics_decay_oracle, DecayOptions};
pub use gaussian::{
    log_negativity, log_negativity_with, partial_transpose_spectrum, symplectic_eigenvalue_min, CovarianceMatrix,
    EntanglementResult, LogBase,
};
pub use matrices::{
    drift_matrix, feedthrough_matrix, input_matrix, output_matrix, quadrature_unitary, rotation, DriftMatrix,
    FeedthroughMatrix, InputMatrix, OutputMatrix, C64,
};
pub use scattering::{
    entanglement, entanglement_with, noise_matrix, output_covariance, output_covariance_literal, quadrature_scattering,
    scattering, NoiseMatrix, QuadratureScattering, ScatteringMatrix, MAX_CONDITION,
};
pub use stability::{critical_coupling, critical_coupling_tol, eigenvalues, is_stable, CouplingAxis, Stability};
pub use sweep::{sweep, sweep_with, SweepAxis, SweepGrid, SweepParam, SweepRow, SweepStatus};

/// Mean thermal occupations of the five input baths.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Occupations {
    pub a_in: f64,
    pub a_ex: f64,
    pub b_in: f64,
    pub c_in: f64,
    pub c_ex: f64,
}

impl Occupations {
    pub fn as_array(&self) -> [f64; 5] {
        [self.a_in, self.a_ex, self.b_in, self.c_in, self.c_ex]
    }
}

/// Scalar parameters of the linearized tripartite model, all in rad/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TripartiteParams {
    /// Cavity detuning from its pump, `omega_a - omega_pa`.
    pub delta_a: f64,
    /// Magnon detuning from its pump, `omega_c - omega_pc`.
    pub delta_c: f64,
    pub omega_m: f64,
    pub g_b: f64,
    pub g_c: f64,
    pub kappa_a_in: f64,
    pub kappa_a_ex: f64,
    pub kappa_c_in: f64,
    pub kappa_c_ex: f64,
    pub gamma: f64,
    pub occupations: Occupations,
}

impl TripartiteParams {
    pub fn kappa_a(&self) -> f64 {
        self.kappa_a_in + self.kappa_a_ex
    }

    pub fn kappa_c(&self) -> f64 {
        self.kappa_c_in + self.kappa_c_ex
    }

    pub fn validate(&self) -> Result<()> {
        let rates = [
            ("kappa_a_in", self.kappa_a_in),
            ("kappa_a_ex", self.kappa_a_ex),
            ("kappa_c_in", self.kappa_c_in),
            ("kappa_c_ex", self.kappa_c_ex),
            ("gamma", self.gamma),
        ];
        for (name, v) in rates {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::domain(format!(
                    "{name} must be finite and non-negative, got {v}"
                )));
            }
        }
        for (name, v) in [
            ("delta_a", self.delta_a),
            ("delta_c", self.delta_c),
            ("omega_m", self.omega_m),
            ("g_b", self.g_b),
            ("g_c", self.g_c),
        ] {
            if !v.is_finite() {
                return Err(Error::domain(format!("{name} must be finite, got {v}")));
            }
        }
        if self.occupations.as_array().iter().any(|n| !(*n >= 0.0)) {
            return Err(Error::domain("bath occupations must be non-negative"));
        }
        Ok(())
    }

    /// Multiplies every rate, detuning and coupling by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            delta_a: self.delta_a * factor,
            delta_c: self.delta_c * factor,
            omega_m: self.omega_m * factor,
            g_b: self.g_b * factor,
            g_c: self.g_c * factor,
            kappa_a_in: self.kappa_a_in * factor,
            kappa_a_ex: self.kappa_a_ex * factor,
            kappa_c_in: self.kappa_c_in * factor,
            kappa_c_ex: self.kappa_c_ex * factor,
            gamma: self.gamma * factor,
            occupations: self.occupations,
        }
    }
}
