//! Physical constants, scalar parameter blocks and the elementary formulas
//! shared by every other module.
//!
//! All frequencies and rates are angular (rad/s). Conversion from ordinary
//! frequency happens at the I/O boundary (see [`crate::config`]).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// CODATA 2018 values. Both are exact or fixed by SI definition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    /// Reduced Planck constant, J·s.
    pub hbar: f64,
    /// Boltzmann constant, J/K.
    pub k_boltzmann: f64,
}

pub const CONSTANTS: PhysicalConstants = PhysicalConstants {
    hbar: 1.054_571_817e-34,
    k_boltzmann: 1.380_649e-23,
};

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = CONSTANTS.hbar;
/// Boltzmann constant, J/K.
pub const K_B: f64 = CONSTANTS.k_boltzmann;
/// Vacuum permittivity, F/m.
pub const EPSILON_0: f64 = 8.854_187_812_8e-12;

pub const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Converts an ordinary frequency in Hz to angular frequency.
#[inline]
pub fn hz_to_rad(f_hz: f64) -> f64 {
    TWO_PI * f_hz
}

/// Converts an angular frequency to ordinary frequency in Hz.
#[inline]
pub fn rad_to_hz(omega: f64) -> f64 {
    omega / TWO_PI
}

/// A one-sided cavity: resonance, intrinsic loss and coupling to the line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavityParams {
    pub omega_c: f64,
    pub kappa_in: f64,
    pub kappa_ex: f64,
}

impl CavityParams {
    pub fn new(omega_c: f64, kappa_in: f64, kappa_ex: f64) -> Result<Self> {
        if !(omega_c > 0.0) || !omega_c.is_finite() {
            return Err(Error::domain(format!("omega_c must be positive, got {omega_c}")));
        }
        if !(kappa_in >= 0.0) || !(kappa_ex >= 0.0) {
            return Err(Error::domain(format!(
                "damping rates must be non-negative, got kappa_in = {kappa_in}, kappa_ex = {kappa_ex}"
            )));
        }
        Ok(Self {
            omega_c,
            kappa_in,
            kappa_ex,
        })
    }

    /// Total linewidth.
    #[inline]
    pub fn kappa(&self) -> f64 {
        self.kappa_in + self.kappa_ex
    }
}

/// A single mechanical mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MechParams {
    pub omega_m: f64,
    pub gamma: f64,
    pub m_eff: f64,
    pub x_zpf: f64,
}

impl MechParams {
    /// Builds the mode and derives `x_zpf` from the mass and frequency.
    pub fn new(omega_m: f64, gamma: f64, m_eff: f64) -> Result<Self> {
        if !(gamma >= 0.0) {
            return Err(Error::domain(format!("gamma must be non-negative, got {gamma}")));
        }
        let x_zpf = zero_point_fluctuation(m_eff, omega_m)?;
        Ok(Self {
            omega_m,
            gamma,
            m_eff,
            x_zpf,
        })
    }

    /// Builds the mode with a supplied `x_zpf`, which must agree with the
    /// mass and frequency to 1e-9 relative.
    pub fn with_x_zpf(omega_m: f64, gamma: f64, m_eff: f64, x_zpf: f64) -> Result<Self> {
        let mode = Self::new(omega_m, gamma, m_eff)?;
        if ((x_zpf - mode.x_zpf) / mode.x_zpf).abs() > 1e-9 {
            return Err(Error::domain(format!(
                "supplied x_zpf = {x_zpf:e} m disagrees with sqrt(hbar/(2 m_eff omega_m)) = {:e} m",
                mode.x_zpf
            )));
        }
        Ok(mode)
    }
}

/// External pump tone.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PumpParams {
    pub omega_p: f64,
    /// Power arriving at the cavity port, W.
    pub power: f64,
}

impl PumpParams {
    pub fn new(omega_p: f64, power: f64) -> Result<Self> {
        if !(omega_p > 0.0) {
            return Err(Error::domain(format!("pump frequency must be positive, got {omega_p}")));
        }
        if !(power >= 0.0) {
            return Err(Error::domain(format!("pump power must be non-negative, got {power}")));
        }
        Ok(Self { omega_p, power })
    }

    /// Detuning `omega_c - omega_p`; positive means red-detuned.
    #[inline]
    pub fn detuning(&self, cavity: &CavityParams) -> f64 {
        cavity.omega_c - self.omega_p
    }
}

/// Single-photon coupling together with the intracavity photon number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingParams {
    pub g0: f64,
    pub n_cavity: f64,
}

impl CouplingParams {
    pub fn new(g0: f64, n_cavity: f64) -> Result<Self> {
        if !(n_cavity >= 0.0) {
            return Err(Error::domain(format!("n_cavity must be non-negative, got {n_cavity}")));
        }
        Ok(Self { g0, n_cavity })
    }

    /// Pump-enhanced coupling `g0 * sqrt(n_cavity)`.
    pub fn g(&self) -> f64 {
        self.g0 * self.n_cavity.sqrt()
    }
}

/// Bose-Einstein occupation of a mode at angular `frequency` in a bath at
/// `temperature` (K). Zero temperature returns exactly 0.
pub fn thermal_occupation(frequency: f64, temperature: f64) -> Result<f64> {
    if !(frequency > 0.0) {
        return Err(Error::domain(format!("frequency must be positive, got {frequency}")));
    }
    if !(temperature >= 0.0) {
        return Err(Error::domain(format!(
            "temperature must be non-negative, got {temperature}"
        )));
    }
    if temperature == 0.0 {
        return Ok(0.0);
    }
    let x = HBAR * frequency / (K_B * temperature);
    // expm1 keeps the high-temperature limit accurate; overflow gives 0.
    Ok(1.0 / x.exp_m1())
}

/// Ground-state position spread `sqrt(hbar / (2 m_eff omega_m))`.
pub fn zero_point_fluctuation(m_eff: f64, omega_m: f64) -> Result<f64> {
    if !(m_eff > 0.0) || !(omega_m > 0.0) {
        return Err(Error::domain(format!(
            "m_eff and omega_m must be positive, got m_eff = {m_eff:e}, omega_m = {omega_m:e}"
        )));
    }
    Ok((HBAR / (2.0 * m_eff * omega_m)).sqrt())
}

/// Steady-state intracavity photon number for a coherent drive at the pump
/// frequency: `kappa_ex (P / hbar omega_p) / ((omega_p - omega_c)^2 + kappa^2 / 4)`.
pub fn intracavity_photon_number(cavity: &CavityParams, pump: &PumpParams) -> Result<f64> {
    if !(pump.omega_p > 0.0) {
        return Err(Error::domain("pump frequency must be positive"));
    }
    let kappa = cavity.kappa();
    let detuning = pump.omega_p - cavity.omega_c;
    let denom = detuning * detuning + 0.25 * kappa * kappa;
    if denom == 0.0 {
        return Err(Error::domain("lossless cavity driven on resonance has no steady state"));
    }
    let photon_flux = pump.power / (HBAR * pump.omega_p);
    Ok(cavity.kappa_ex * photon_flux / denom)
}

/// Pump-enhanced coupling `g0 * sqrt(n_cavity)`.
pub fn enhanced_coupling(g0: f64, n_cavity: f64) -> Result<f64> {
    if !(n_cavity >= 0.0) {
        return Err(Error::domain(format!("n_cavity must be non-negative, got {n_cavity}")));
    }
    Ok(g0 * n_cavity.sqrt())
}

/// Which normalization of the cooperativity to report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CooperativityConvention {
    /// `2 g^2 / (kappa gamma)`, the resolved-sideband ratio `gamma_opt / gamma`.
    #[default]
    Full,
    /// `g^2 / (kappa gamma)`.
    Half,
}

/// Cooperativity `2 g^2 / (kappa gamma)`.
pub fn cooperativity(g: f64, kappa: f64, gamma: f64) -> Result<f64> {
    cooperativity_with(g, kappa, gamma, CooperativityConvention::Full)
}

pub fn cooperativity_with(g: f64, kappa: f64, gamma: f64, convention: CooperativityConvention) -> Result<f64> {
    if !(kappa > 0.0) || !(gamma > 0.0) {
        return Err(Error::domain(format!(
            "cooperativity needs positive damping rates, got kappa = {kappa:e}, gamma = {gamma:e}"
        )));
    }
    let base = g * g / (kappa * gamma);
    Ok(match convention {
        CooperativityConvention::Full => 2.0 * base,
        CooperativityConvention::Half => base,
    })
}
