//! Frequency-domain response of a single cavity mode coupled to a single
//! mechanical mode: susceptibilities, bare and OMIT reflection, and the
//! optomechanical damping rate.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::physics::{CavityParams, MechParams};

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SusceptibilityKind {
    Cavity,
    CavityConjugate,
    Mechanical,
    MechanicalConjugate,
}

/// Free response `1 / (-i (omega - center) + halfwidth)` of a damped mode.
///
/// The conjugate kinds describe the creation-operator response and satisfy
/// `chi_conj(omega) = conj(chi(-omega))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Susceptibility {
    pub kind: SusceptibilityKind,
    pub center: f64,
    pub halfwidth: f64,
}

impl Susceptibility {
    pub fn new(kind: SusceptibilityKind, center: f64, halfwidth: f64) -> Result<Self> {
        if !(halfwidth >= 0.0) {
            return Err(Error::domain(format!(
                "halfwidth must be non-negative, got {halfwidth}"
            )));
        }
        Ok(Self {
            kind,
            center,
            halfwidth,
        })
    }

    /// Cavity response in the pump frame, centered on the detuning.
    pub fn cavity(detuning: f64, kappa: f64) -> Result<Self> {
        Self::new(SusceptibilityKind::Cavity, detuning, 0.5 * kappa)
    }

    pub fn cavity_conjugate(detuning: f64, kappa: f64) -> Result<Self> {
        Self::new(SusceptibilityKind::CavityConjugate, detuning, 0.5 * kappa)
    }

    pub fn mechanical(omega_m: f64, gamma: f64) -> Result<Self> {
        Self::new(SusceptibilityKind::Mechanical, omega_m, 0.5 * gamma)
    }

    pub fn mechanical_conjugate(omega_m: f64, gamma: f64) -> Result<Self> {
        Self::new(SusceptibilityKind::MechanicalConjugate, omega_m, 0.5 * gamma)
    }

    fn signed_center(&self) -> f64 {
        match self.kind {
            SusceptibilityKind::Cavity | SusceptibilityKind::Mechanical => self.center,
            SusceptibilityKind::CavityConjugate | SusceptibilityKind::MechanicalConjugate => -self.center,
        }
    }

    /// Inverse response `-i (omega - center) + halfwidth`.
    pub fn inverse(&self, omega: f64) -> Complex64 {
        Complex64::new(self.halfwidth, -(omega - self.signed_center()))
    }

    pub fn eval(&self, omega: f64) -> Complex64 {
        self.inverse(omega).inv()
    }
}

/// Reflection `<a_out>/<a_ex>` of a one-sided cavity probed at `omega`.
pub fn bare_reflection(omega: f64, cavity: &CavityParams) -> Result<Complex64> {
    let kappa = cavity.kappa();
    if kappa == 0.0 {
        return Err(Error::domain("kappa_in + kappa_ex = 0 puts a pole on the real axis"));
    }
    let detune = -I * (omega - cavity.omega_c);
    let num = detune + 0.5 * (cavity.kappa_in - cavity.kappa_ex);
    let den = detune + 0.5 * kappa;
    Ok(-num / den)
}

/// Cavity reflection in the presence of a mechanical mode under a
/// red-detuned beam-splitter interaction (OMIT).
///
/// `omega` is the probe frequency measured from the pump, `detuning` is
/// `omega_c - omega_p`. The rotating-wave form is only valid near `detuning
/// = omega_m` with `4 omega_m >> kappa`; see [`sideband_resolution`].
pub fn omit_reflection(omega: f64, cavity: &CavityParams, mech: &MechParams, g: f64, detuning: f64) -> Complex64 {
    let self_energy = g * g / Complex64::new(0.5 * mech.gamma, -(omega - mech.omega_m));
    let detune = -I * (omega - detuning);
    let num = detune + 0.5 * (cavity.kappa_in - cavity.kappa_ex) + self_energy;
    let den = detune + 0.5 * cavity.kappa() + self_energy;
    -num / den
}

/// Ratio `4 omega_m / kappa`; large values mean the sidebands are resolved.
pub fn sideband_resolution(omega_m: f64, kappa: f64) -> f64 {
    4.0 * omega_m / kappa
}

/// Interaction-induced correction to the inverse mechanical susceptibility,
/// `g^2 (chi_a(omega) - chi_a_conj(omega))`.
pub fn mechanical_self_energy(omega: f64, g: f64, detuning: f64, kappa: f64) -> Complex64 {
    let chi = Complex64::new(0.5 * kappa, -(omega - detuning)).inv();
    let chi_conj = Complex64::new(0.5 * kappa, -(omega + detuning)).inv();
    g * g * (chi - chi_conj)
}

/// Optomechanical damping rate evaluated at mechanical resonance.
///
/// Positive for red detuning (cooling), negative for blue (gain).
pub fn optomechanical_damping(detuning: f64, g: f64, kappa: f64, omega_m: f64) -> Result<f64> {
    if !(kappa > 0.0) {
        return Err(Error::domain(format!("kappa must be positive, got {kappa}")));
    }
    let q = 0.25 * kappa * kappa;
    let red = omega_m - detuning;
    let blue = omega_m + detuning;
    Ok(0.5 * g * g * kappa * (1.0 / (red * red + q) - 1.0 / (blue * blue + q)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResponseModel {
    Bare,
    Omit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumRequest {
    /// Strictly increasing probe grid, rad/s. For the OMIT model the grid is
    /// measured from the pump.
    pub omega_grid: Vec<f64>,
    pub cavity: CavityParams,
    pub mech: MechParams,
    pub g: f64,
    pub detuning: f64,
}

impl SpectrumRequest {
    pub fn validate(&self) -> Result<()> {
        if self.omega_grid.is_empty() {
            return Err(Error::domain("frequency grid is empty"));
        }
        if self.omega_grid.iter().any(|w| !w.is_finite()) {
            return Err(Error::domain("frequency grid contains non-finite values"));
        }
        if let Some(i) = self.omega_grid.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::domain(format!(
                "frequency grid must be strictly increasing (index {})",
                i + 1
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSpectrum {
    pub omega_grid: Vec<f64>,
    pub values: Vec<Complex64>,
}

/// Evaluates the chosen model elementwise over the request grid.
pub fn spectrum(request: &SpectrumRequest, model: ResponseModel) -> Result<ComplexSpectrum> {
    request.validate()?;
    let values = request
        .omega_grid
        .par_iter()
        .map(|&w| match model {
            ResponseModel::Bare => bare_reflection(w, &request.cavity),
            ResponseModel::Omit => Ok(omit_reflection(
                w,
                &request.cavity,
                &request.mech,
                request.g,
                request.detuning,
            )),
        })
        .collect::<Result<Vec<_>>>()?;
    if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::Computation("spectrum contains non-finite values".into()));
    }
    Ok(ComplexSpectrum {
        omega_grid: request.omega_grid.clone(),
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::physics::hz_to_rad;
    use proptest::prelude::*;

    fn table_cavity() -> CavityParams {
        CavityParams::new(hz_to_rad(10.29184e9), hz_to_rad(0.41e6), hz_to_rad(1.45e6)).unwrap()
    }

    fn mech() -> MechParams {
        MechParams::new(hz_to_rad(4e6), hz_to_rad(100.0), 2e-15).unwrap()
    }

    #[test]
    fn lossless_cavity_reflects_everything() {
        let cav = CavityParams::new(1e10, 0.0, 1e6).unwrap();
        for k in -50..=50 {
            let w = cav.omega_c + k as f64 * 1e5;
            let r = bare_reflection(w, &cav).unwrap();
            assert!((r.norm() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn bare_reflection_on_resonance() {
        let cav = table_cavity();
        let r = bare_reflection(cav.omega_c, &cav).unwrap();
        assert!((r.re - 0.559_139_784_946_236_6).abs() < 1e-14);
        assert!(r.im.abs() < 1e-14);
        let far = bare_reflection(cav.omega_c + 1e6 * cav.kappa(), &cav).unwrap();
        assert!((far + 1.0).norm() < 1e-5);
        let pole = CavityParams::new(1.0, 0.0, 0.0).unwrap();
        assert!(bare_reflection(1.0, &pole).is_err());
    }

    #[test]
    fn omit_reduces_to_bare_without_coupling() {
        let cav = table_cavity();
        let m = mech();
        let detuning = m.omega_m;
        let shifted = CavityParams {
            omega_c: detuning,
            ..cav
        };
        for k in -20..=20 {
            let w = detuning + k as f64 * 0.1 * cav.kappa();
            let a = omit_reflection(w, &cav, &m, 0.0, detuning);
            let b = bare_reflection(w, &shifted).unwrap();
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn omit_center_value_and_strong_coupling_limit() {
        let cav = table_cavity();
        let m = mech();
        let g = hz_to_rad(3e3);
        let r = omit_reflection(m.omega_m, &cav, &m, g, m.omega_m);
        let s = 2.0 * g * g / m.gamma;
        let expected = -(0.5 * (cav.kappa_in - cav.kappa_ex) + s) / (0.5 * cav.kappa() + s);
        assert!((r.re - expected).abs() < 1e-13 && r.im.abs() < 1e-13);
        let huge = omit_reflection(m.omega_m, &cav, &m, 1e12, m.omega_m);
        assert!((huge + 1.0).norm() < 1e-9);
    }

    #[test]
    fn damping_rate_limits() {
        let (g, kappa, om) = (hz_to_rad(10e3), hz_to_rad(0.4e6), hz_to_rad(4e6));
        assert_eq!(optomechanical_damping(0.0, g, kappa, om).unwrap(), 0.0);
        let red = optomechanical_damping(om, g, kappa, om).unwrap();
        let exact = 0.5 * g * g * kappa * (4.0 / (kappa * kappa) - 1.0 / (4.0 * om * om + 0.25 * kappa * kappa));
        assert!(((red - exact) / exact).abs() < 1e-14);
        assert!(red > 0.0);
        assert!(optomechanical_damping(-om, g, kappa, om).unwrap() < 0.0);
        // Closed form equals the real part of the self-energy.
        for d in [-1.3 * om, -om, 0.2 * om, om, 2.0 * om] {
            let a = optomechanical_damping(d, g, kappa, om).unwrap();
            let b = mechanical_self_energy(om, g, d, kappa).re;
            assert!((a - b).abs() <= 1e-12 * a.abs().max(1e-30), "{a} {b}");
        }
    }

    #[test]
    fn spectrum_matches_scalar_calls() {
        let cav = table_cavity();
        let k = cav.kappa();
        let grid: Vec<f64> = (0..2001)
            .map(|i| cav.omega_c - 10.0 * k + i as f64 * 0.01 * k)
            .collect();
        let req = SpectrumRequest {
            omega_grid: grid.clone(),
            cavity: cav,
            mech: mech(),
            g: 0.0,
            detuning: 0.0,
        };
        let spec = spectrum(&req, ResponseModel::Bare).unwrap();
        for idx in [0usize, 17, 999, 1500, 2000] {
            assert_eq!(spec.values[idx], bare_reflection(grid[idx], &cav).unwrap());
        }
        let single = SpectrumRequest {
            omega_grid: vec![grid[3]],
            ..req.clone()
        };
        assert_eq!(
            spectrum(&single, ResponseModel::Bare).unwrap().values[0],
            spec.values[3]
        );
        let bad = SpectrumRequest {
            omega_grid: vec![2.0, 1.0],
            ..req
        };
        assert!(spectrum(&bad, ResponseModel::Bare).is_err());
    }

    proptest! {
        #[test]
        fn bare_reflection_is_passive(ki in 0.0f64..5.0, ke in 0.01f64..5.0, w in -50.0f64..50.0) {
            let cav = CavityParams::new(10.0, ki, ke).unwrap();
            let r = bare_reflection(10.0 + w, &cav).unwrap();
            prop_assert!(r.norm() <= 1.0 + 1e-12);
        }

        #[test]
        fn omit_is_passive_on_red_sideband(
            ki in 0.0f64..2.0, ke in 0.01f64..2.0, gamma in 0.0f64..0.1,
            g in 0.0f64..1.0, w in -30.0f64..30.0,
        ) {
            let cav = CavityParams::new(100.0, ki, ke).unwrap();
            let m = MechParams { omega_m: 10.0, gamma, m_eff: 1.0, x_zpf: 1.0 };
            let r = omit_reflection(10.0 + w, &cav, &m, g, 10.0);
            prop_assert!(r.norm() <= 1.0 + 1e-9);
        }

        #[test]
        fn conjugate_susceptibility_mirrors(center in -10.0f64..10.0, hw in 0.0f64..3.0, w in -20.0f64..20.0) {
            let chi = Susceptibility::new(SusceptibilityKind::Cavity, center, hw).unwrap();
            let chi_c = Susceptibility::new(SusceptibilityKind::CavityConjugate, center, hw).unwrap();
            prop_assume!(chi.inverse(-w).norm() > 1e-9);
            let d = chi_c.eval(w) - chi.eval(-w).conj();
            prop_assert!(d.norm() <= 1e-12 * chi.eval(-w).norm());
        }

        #[test]
        fn damping_is_odd(d in -10.0f64..10.0, g in 0.0f64..1.0, kappa in 0.01f64..5.0, om in 0.1f64..5.0) {
            let a = optomechanical_damping(d, g, kappa, om).unwrap();
            let b = optomechanical_damping(-d, g, kappa, om).unwrap();
            prop_assert!((a + b).abs() <= 1e-12 * a.abs().max(1e-300));
        }
    }
}
