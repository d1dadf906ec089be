//! OMIT reflection in the lab frame and its fit with the cavity held fixed.

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::lm::{covariance, minimize, LeastSquares, LmOptions};
use super::model::ReflectionModelParams;
use super::reflect::FitResult;
use super::trace::ComplexTrace;
use crate::error::{Error, Result};
use crate::physics::{rad_to_hz, TWO_PI};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Mechanical side of the OMIT model. `detuning` is `omega_c - omega_p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OmitMechanics {
    pub g: f64,
    pub gamma: f64,
    pub omega_m: f64,
    pub detuning: f64,
}

impl OmitMechanics {
    /// Pump frequency implied by the cavity and the detuning, rad/s.
    pub fn pump(&self, cavity: &ReflectionModelParams) -> f64 {
        cavity.omega_c - self.detuning
    }
}

/// Which of the two degenerate frequencies the fit moves; the data only
/// constrain `omega_m - detuning`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OmitFree {
    #[default]
    MechanicalFrequency,
    Detuning,
}

fn omit_at_offset(d: f64, phase0: f64, c: &ReflectionModelParams, m: &OmitMechanics) -> Complex64 {
    // Probe measured from the pump is d + detuning.
    let sigma = m.g * m.g / Complex64::new(0.5 * m.gamma, -(d + m.detuning - m.omega_m));
    let prefactor = Complex64::from_polar(c.amplitude, -(c.tau * d + phase0));
    let detune = -I * d;
    let num = detune + 0.5 * (c.kappa_in - c.kappa_ex) + I * c.delta + sigma;
    let den = detune + 0.5 * (c.kappa_in + c.kappa_ex) + sigma;
    -prefactor * num / den
}

/// Lab-frame OMIT reflection at probe frequency `omega` (rad/s): the
/// cavity fit model with the mechanical self-energy
/// `g^2 / (-i(omega - omega_p - omega_m) + gamma/2)` added to numerator and
/// denominator.
pub fn omit_model(omega: f64, cavity: &ReflectionModelParams, mech: &OmitMechanics) -> Complex64 {
    omit_at_offset(omega - cavity.omega_c, cavity.phase_at_resonance(), cavity, mech)
}

/// [`omit_model`] on a grid in Hz, with the detuning formed from Hz values.
pub fn omit_model_hz(f_hz: f64, cavity: &ReflectionModelParams, mech: &OmitMechanics) -> Complex64 {
    let d = TWO_PI * (f_hz - rad_to_hz(cavity.omega_c));
    omit_at_offset(d, cavity.phase_at_resonance(), cavity, mech)
}

struct OmitProblem<'a> {
    offsets: Vec<f64>,
    y: Vec<Complex64>,
    cavity: &'a ReflectionModelParams,
    start: OmitMechanics,
    free: OmitFree,
    g_scale: f64,
    rate_scale: f64,
}

impl OmitProblem<'_> {
    fn decode(&self, x: &DVector<f64>) -> OmitMechanics {
        let mut m = self.start;
        m.g = x[0] * self.g_scale;
        m.gamma = self.rate_scale * x[1].exp();
        match self.free {
            OmitFree::MechanicalFrequency => m.omega_m = self.start.omega_m + x[2] * self.rate_scale,
            OmitFree::Detuning => m.detuning = self.start.detuning + x[2] * self.rate_scale,
        }
        m
    }
}

impl LeastSquares for OmitProblem<'_> {
    fn num_params(&self) -> usize {
        3
    }

    fn num_residuals(&self) -> usize {
        2 * self.offsets.len()
    }

    fn residuals(&self, x: &DVector<f64>, out: &mut DVector<f64>) {
        let m = self.decode(x);
        let phase0 = self.cavity.phase_at_resonance();
        for (k, (d, y)) in self.offsets.iter().zip(&self.y).enumerate() {
            let e = omit_at_offset(*d, phase0, self.cavity, &m) - y;
            out[2 * k] = e.re;
            out[2 * k + 1] = e.im;
        }
    }
}

fn smooth(v: &[f64], half: usize) -> Vec<f64> {
    let n = v.len();
    (0..n)
        .map(|k| {
            let (a, b) = (k.saturating_sub(half), (k + half + 1).min(n));
            v[a..b].iter().sum::<f64>() / (b - a) as f64
        })
        .collect()
}

/// Guesses `g`, `gamma` and `omega_m` by inverting the data for the
/// self-energy `Sigma = -(N0 + rho D0) / (1 + rho)` pointwise, where `rho`
/// is the trace with the line prefactor removed. `|Sigma|^2` is a Lorentzian
/// of full width `gamma` peaking at `2 g^2 / gamma`.
pub fn omit_initial_guess(
    trace: &ComplexTrace,
    cavity: &ReflectionModelParams,
    detuning: f64,
) -> Result<OmitMechanics> {
    let f_c = rad_to_hz(cavity.omega_c);
    let phase0 = cavity.phase_at_resonance();
    let sig: Vec<Complex64> = trace
        .f_hz
        .iter()
        .zip(trace.values())
        .map(|(f, y)| {
            let d = TWO_PI * (f - f_c);
            let rho = y / Complex64::from_polar(cavity.amplitude, -(cavity.tau * d + phase0));
            let n0 = -I * d + 0.5 * (cavity.kappa_in - cavity.kappa_ex) + I * cavity.delta;
            let d0 = -I * d + 0.5 * cavity.kappa();
            -(n0 + rho * d0) / (1.0 + rho)
        })
        .collect();
    let power: Vec<f64> = sig.iter().map(|s| s.norm_sqr()).collect();
    let sm = smooth(&power, trace.len() / 200);
    let k0 = (0..sm.len()).max_by(|&a, &b| sm[a].total_cmp(&sm[b])).unwrap();
    let half = 0.5 * sm[k0];
    let mut lo = k0;
    while lo > 0 && sm[lo] > half {
        lo -= 1;
    }
    let mut hi = k0;
    while hi + 1 < sm.len() && sm[hi] > half {
        hi += 1;
    }
    let df = (trace.f_hz[trace.len() - 1] - trace.f_hz[0]) / (trace.len() - 1) as f64;
    let gamma = (TWO_PI * (trace.f_hz[hi] - trace.f_hz[lo])).max(TWO_PI * 2.0 * df);
    let g = (0.5 * gamma * sm[k0].sqrt()).sqrt();
    // Peak sits where the probe hits omega_p + omega_m.
    let omega_m = TWO_PI * (trace.f_hz[k0] - f_c) + detuning;
    if !g.is_finite() || !gamma.is_finite() {
        return Err(Error::Guess("could not locate the mechanical feature".into()));
    }
    Ok(OmitMechanics {
        g,
        gamma,
        omega_m,
        detuning,
    })
}

/// Fits `g`, `gamma` and one of `omega_m` / `detuning` with the cavity
/// parameters fixed.
pub fn fit_omit(
    trace: &ComplexTrace,
    cavity: &ReflectionModelParams,
    detuning: f64,
    guess: Option<OmitMechanics>,
    free: OmitFree,
) -> Result<FitResult<OmitMechanics>> {
    trace.validate()?;
    let start = match guess {
        Some(g) => g,
        None => omit_initial_guess(trace, cavity, detuning)?,
    };
    if !(start.gamma > 0.0) {
        return Err(Error::domain("gamma guess must be positive"));
    }
    let f_c = rad_to_hz(cavity.omega_c);
    let rate_scale = start.gamma;
    let problem = OmitProblem {
        offsets: trace.f_hz.iter().map(|f| TWO_PI * (f - f_c)).collect(),
        y: trace.values(),
        cavity,
        start,
        free,
        g_scale: start.g.abs().max(rate_scale),
        rate_scale,
    };
    let x0 = DVector::from_vec(vec![start.g / problem.g_scale, 0.0, 0.0]);
    let report = minimize(&problem, x0, &LmOptions::default());
    let mut params = problem.decode(&report.x);
    params.g = params.g.abs();
    let cov = covariance(&report, problem.num_residuals());
    let sd = |v: f64| {
        if v.is_finite() {
            v.max(0.0).sqrt()
        } else {
            f64::INFINITY
        }
    };
    let moved = sd(cov[(2, 2)]) * rate_scale;
    let param_uncertainties = OmitMechanics {
        g: sd(cov[(0, 0)]) * problem.g_scale,
        gamma: sd(cov[(1, 1)]) * params.gamma,
        omega_m: if free == OmitFree::MechanicalFrequency {
            moved
        } else {
            0.0
        },
        detuning: if free == OmitFree::Detuning { moved } else { 0.0 },
    };
    Ok(FitResult {
        params,
        residual_norm: report.residual_norm,
        iterations: report.iterations,
        converged: report.converged,
        param_uncertainties,
        rank_deficient: report.rank_deficient,
        message: report.message,
    })
}
