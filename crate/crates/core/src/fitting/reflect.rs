//! Complex least-squares fit of the extended reflection model.
//!
//! The optimizer works on scaled coordinates around a reference frequency
//! `omega0` (the guessed resonance) and a rate scale `s` (the guessed
//! linewidth):
//!
//! | index | coordinate |
//! |---|---|
//! | 0 | `ln A` |
//! | 1 | `tau s` |
//! | 2 | `phi' = tau omega0 + phi` |
//! | 3 | `(omega_c - omega0) / s` |
//! | 4 | `ln(kappa_in / s)` |
//! | 5 | `ln(kappa_ex / s)` |
//! | 6 | `delta / s` |
//!
//! Detunings are formed as `2 pi (f - f0)` from Hz values, so a GHz carrier
//! costs no precision.

use nalgebra::{DMatrix, DVector, SMatrix};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::guess::{initial_guess, wrap_phase};
use super::lm::{covariance, minimize, LeastSquares, LmOptions, LmReport};
use super::model::ReflectionModelParams;
use super::trace::ComplexTrace;
use crate::error::{Error, Result};
use crate::physics::{hz_to_rad, rad_to_hz, TWO_PI};

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult<P> {
    pub params: P,
    /// Euclidean norm of the stacked real and imaginary residuals.
    pub residual_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    /// One-sigma estimates from `s^2 (J^T J)^{-1}`; infinite where the data
    /// carry no information.
    pub param_uncertainties: P,
    pub rank_deficient: bool,
    pub message: String,
}

pub(crate) struct Frame {
    pub f0_hz: f64,
    pub omega0: f64,
    pub scale: f64,
}

impl Frame {
    pub fn around(p: &ReflectionModelParams) -> Self {
        let f0_hz = rad_to_hz(p.omega_c);
        Self {
            f0_hz,
            omega0: hz_to_rad(f0_hz),
            scale: p.kappa(),
        }
    }

    pub fn offsets(&self, f_hz: &[f64]) -> Vec<f64> {
        f_hz.iter().map(|f| TWO_PI * (f - self.f0_hz)).collect()
    }

    pub fn encode(&self, p: &ReflectionModelParams) -> DVector<f64> {
        let s = self.scale;
        DVector::from_vec(vec![
            p.amplitude.ln(),
            p.tau * s,
            p.tau * self.omega0 + p.phi,
            (p.omega_c - self.omega0) / s,
            (p.kappa_in / s).max(1e-300).ln(),
            (p.kappa_ex / s).max(1e-300).ln(),
            p.delta / s,
        ])
    }

    pub fn decode(&self, x: &DVector<f64>) -> ReflectionModelParams {
        let s = self.scale;
        let tau = x[1] / s;
        ReflectionModelParams {
            amplitude: x[0].exp(),
            tau,
            phi: wrap_phase(x[2] - tau * self.omega0),
            omega_c: self.omega0 + x[3] * s,
            kappa_in: s * x[4].exp(),
            kappa_ex: s * x[5].exp(),
            delta: x[6] * s,
        }
    }

    /// d(physical) / d(scaled), row-major over the struct field order.
    pub fn transform(&self, p: &ReflectionModelParams) -> SMatrix<f64, 7, 7> {
        let s = self.scale;
        let mut t = SMatrix::<f64, 7, 7>::zeros();
        t[(0, 0)] = p.amplitude;
        t[(1, 1)] = 1.0 / s;
        t[(2, 2)] = 1.0;
        t[(2, 1)] = -self.omega0 / s;
        t[(3, 3)] = s;
        t[(4, 4)] = p.kappa_in;
        t[(5, 5)] = p.kappa_ex;
        t[(6, 6)] = s;
        t
    }
}

/// Value and scaled-coordinate gradient of the model at offset `x` from
/// `omega0`.
pub(crate) fn model_and_gradient(x: f64, c: &DVector<f64>, s: f64) -> (Complex64, [Complex64; 7]) {
    let a = c[0].exp();
    let tau = c[1] / s;
    let u = c[3] * s;
    let (ki, ke) = (s * c[4].exp(), s * c[5].exp());
    let delta = c[6] * s;
    let d = x - u;
    let p = Complex64::from_polar(a, -(tau * x + c[2]));
    let num = -I * d + 0.5 * (ki - ke) + I * delta;
    let den = -I * d + 0.5 * (ki + ke);
    let den2 = den * den;
    let m = -num / den;
    let r = p * m;
    let grad = [
        r,
        -I * x * r / s,
        -I * r,
        // dM/dd = i (D - N) / D^2 and dd/du = -1.
        -p * I * (den - num) / den2 * s,
        -p * (den - num) / (2.0 * den2) * ki,
        p * (den + num) / (2.0 * den2) * ke,
        -p * I / den * s,
    ];
    (r, grad)
}

pub(crate) struct ReflectionProblem {
    pub x: Vec<f64>,
    pub y: Vec<Complex64>,
    pub scale: f64,
}

impl LeastSquares for ReflectionProblem {
    fn num_params(&self) -> usize {
        7
    }

    fn num_residuals(&self) -> usize {
        2 * self.x.len()
    }

    fn residuals(&self, c: &DVector<f64>, out: &mut DVector<f64>) {
        for (k, (x, y)) in self.x.iter().zip(&self.y).enumerate() {
            let (r, _) = model_and_gradient(*x, c, self.scale);
            let e = r - y;
            out[2 * k] = e.re;
            out[2 * k + 1] = e.im;
        }
    }

    fn jacobian(&self, c: &DVector<f64>, out: &mut DMatrix<f64>) {
        for (k, x) in self.x.iter().enumerate() {
            let (_, g) = model_and_gradient(*x, c, self.scale);
            for (j, gj) in g.iter().enumerate() {
                out[(2 * k, j)] = gj.re;
                out[(2 * k + 1, j)] = gj.im;
            }
        }
    }
}

/// Fits all seven parameters to the real and imaginary parts jointly.
///
/// Without `guess` the starting point comes from [`initial_guess`].
/// Non-convergence is reported in the result, not as an error.
pub fn fit_reflection(
    trace: &ComplexTrace,
    guess: Option<ReflectionModelParams>,
) -> Result<FitResult<ReflectionModelParams>> {
    fit_reflection_with(trace, guess, &LmOptions::default())
}

pub fn fit_reflection_with(
    trace: &ComplexTrace,
    guess: Option<ReflectionModelParams>,
    opts: &LmOptions,
) -> Result<FitResult<ReflectionModelParams>> {
    trace.validate()?;
    let start = match guess {
        Some(g) => g,
        None => initial_guess(trace)?,
    };
    if !(start.amplitude > 0.0) || !(start.kappa() > 0.0) {
        return Err(Error::domain("guess needs A > 0 and kappa > 0"));
    }
    let frame = Frame::around(&start);
    let problem = ReflectionProblem {
        x: frame.offsets(&trace.f_hz),
        y: trace.values(),
        scale: frame.scale,
    };
    let report = minimize(&problem, frame.encode(&start), opts);
    Ok(package(&frame, &problem, report))
}

fn package(frame: &Frame, problem: &ReflectionProblem, report: LmReport) -> FitResult<ReflectionModelParams> {
    let params = frame.decode(&report.x);
    let cov = covariance(&report, problem.num_residuals());
    let t = frame.transform(&params);
    let cov7 = SMatrix::<f64, 7, 7>::from_fn(|r, c| cov[(r, c)]);
    let phys = t * cov7 * t.transpose();
    let sd = |k: usize| {
        let v = phys[(k, k)];
        if v.is_finite() {
            v.max(0.0).sqrt()
        } else {
            f64::INFINITY
        }
    };
    FitResult {
        params,
        residual_norm: report.residual_norm,
        iterations: report.iterations,
        converged: report.converged,
        param_uncertainties: ReflectionModelParams {
            amplitude: sd(0),
            tau: sd(1),
            phi: sd(2),
            omega_c: sd(3),
            kappa_in: sd(4),
            kappa_ex: sd(5),
            delta: sd(6),
        },
        rank_deficient: report.rank_deficient,
        message: report.message,
    }
}

/// Sum of squared residuals of `p` against `trace`, evaluated in the same
/// offset arithmetic the fit uses.
pub fn reflection_cost(trace: &ComplexTrace, p: &ReflectionModelParams) -> f64 {
    let frame = Frame::around(p);
    let problem = ReflectionProblem {
        x: frame.offsets(&trace.f_hz),
        y: trace.values(),
        scale: frame.scale,
    };
    let mut r = DVector::zeros(problem.num_residuals());
    problem.residuals(&frame.encode(p), &mut r);
    r.norm_squared()
}
