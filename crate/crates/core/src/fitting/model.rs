use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::physics::{rad_to_hz, TWO_PI};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Reflection of a one-sided cavity seen through a line with gain `A`,
/// delay `tau`, phase offset `phi` and baseline tilt `delta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReflectionModelParams {
    pub amplitude: f64,
    /// Seconds.
    pub tau: f64,
    /// Radians.
    pub phi: f64,
    pub omega_c: f64,
    pub kappa_in: f64,
    pub kappa_ex: f64,
    pub delta: f64,
}

impl ReflectionModelParams {
    pub fn kappa(&self) -> f64 {
        self.kappa_in + self.kappa_ex
    }

    /// `tau omega_c + phi`: the prefactor phase at the cavity frequency.
    pub fn phase_at_resonance(&self) -> f64 {
        self.tau * self.omega_c + self.phi
    }
}

/// `A e^{-i(omega tau + phi)} * -(-i(omega - omega_c) + (kappa_in - kappa_ex)/2 + i delta)
/// / (-i(omega - omega_c) + (kappa_in + kappa_ex)/2)`.
pub fn reflection_model(omega: f64, p: &ReflectionModelParams) -> Complex64 {
    reflection_at_offset(omega - p.omega_c, p.phase_at_resonance(), p)
}

/// Same model on a grid in Hz. The detuning is formed from the difference
/// of two Hz values, which keeps it exact for GHz carriers.
pub fn reflection_model_hz(f_hz: f64, p: &ReflectionModelParams) -> Complex64 {
    let offset = TWO_PI * (f_hz - rad_to_hz(p.omega_c));
    reflection_at_offset(offset, p.phase_at_resonance(), p)
}

/// Model as a function of `d = omega - omega_c` with the prefactor phase
/// written `tau d + phase0`.
pub(crate) fn reflection_at_offset(d: f64, phase0: f64, p: &ReflectionModelParams) -> Complex64 {
    let prefactor = Complex64::from_polar(p.amplitude, -(p.tau * d + phase0));
    let detune = -I * d;
    let num = detune + 0.5 * (p.kappa_in - p.kappa_ex) + I * p.delta;
    let den = detune + 0.5 * (p.kappa_in + p.kappa_ex);
    -prefactor * num / den
}
