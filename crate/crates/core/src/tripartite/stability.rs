use nalgebra::{Matrix6, Schur};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::matrices::{drift_matrix, DriftMatrix};
use super::TripartiteParams;
use crate::error::{Error, Result};

/// Marginal band, relative to the cavity linewidth, that counts as unstable.
const MARGINAL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stability {
    pub stable: bool,
    /// Largest real part among the six eigenvalues, rad/s.
    pub max_re_eigenvalue: f64,
}

/// All six eigenvalues of the drift matrix.
///
/// Computed from the real quadrature form of `A`, so the spectrum comes out
/// in exact conjugate pairs.
pub fn eigenvalues(a: &DriftMatrix) -> Result<[Complex64; 6]> {
    let q = a.quadrature_form();
    let scale = q.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let imag = q.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    if imag > 1e-12 * scale {
        return Err(Error::Computation(
            "drift matrix lacks annihilation/creation conjugation symmetry".into(),
        ));
    }
    let real: Matrix6<f64> = q.map(|z| z.re);
    let schur = Schur::try_new(real, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Computation("eigenvalue iteration did not converge".into()))?;
    let ev = schur.complex_eigenvalues();
    Ok(std::array::from_fn(|k| ev[k]))
}

/// Stable iff every eigenvalue has a strictly negative real part; values
/// within `1e-12 kappa_a` of zero count as unstable.
pub fn is_stable(a: &DriftMatrix) -> Result<Stability> {
    let ev = eigenvalues(a)?;
    let max_re = ev.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    let kappa_a = -2.0 * a.0[(0, 0)].re;
    let scale = if kappa_a > 0.0 {
        kappa_a
    } else {
        a.0.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE)
    };
    Ok(Stability {
        stable: max_re < -MARGINAL * scale,
        max_re_eigenvalue: max_re,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingAxis {
    GB,
    GC,
}

impl CouplingAxis {
    fn set(self, p: &TripartiteParams, value: f64) -> TripartiteParams {
        let mut q = *p;
        match self {
            CouplingAxis::GB => q.g_b = value,
            CouplingAxis::GC => q.g_c = value,
        }
        q
    }
}

/// Locates the coupling at which the stability verdict flips, by bisection
/// to `1e-6` relative width.
pub fn critical_coupling(p: &TripartiteParams, axis: CouplingAxis, bracket: (f64, f64)) -> Result<f64> {
    critical_coupling_tol(p, axis, bracket, 1e-6)
}

pub fn critical_coupling_tol(
    p: &TripartiteParams,
    axis: CouplingAxis,
    bracket: (f64, f64),
    rel_tol: f64,
) -> Result<f64> {
    p.validate()?;
    let (mut lo, mut hi) = bracket;
    let verdict = |g: f64| is_stable(&drift_matrix(&axis.set(p, g))).map(|s| s.stable);
    let lo_stable = verdict(lo)?;
    if lo_stable == verdict(hi)? {
        return Err(Error::Bracket { lo, hi });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (hi - lo).abs() <= rel_tol * mid.abs().max(f64::MIN_POSITIVE) {
            break;
        }
        if verdict(mid)? == lo_stable {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
