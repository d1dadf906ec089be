//! Frequency-domain input-output map and the resulting output covariance.

use nalgebra::{Matrix4, Matrix6, SMatrix, SVD};

use super::gaussian::{negativity_from_zeta, symplectic_eigenvalue_min, LogBase};
use super::matrices::{drift_matrix, feedthrough_matrix, input_matrix, output_matrix, rotation, C64};
use super::stability::is_stable;
use super::{CovarianceMatrix, EntanglementResult, TripartiteParams};
use crate::error::{Error, Result};

/// Largest acceptable condition number of `-i omega I - A`.
pub const MAX_CONDITION: f64 = 1e12;

pub type QuadratureScattering = SMatrix<C64, 4, 10>;
pub type NoiseMatrix = SMatrix<f64, 10, 10>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatteringMatrix {
    /// Analysis frequency, rad/s.
    pub omega: f64,
    pub entries: SMatrix<C64, 4, 10>,
}

fn resolvent_operator(omega: f64, p: &TripartiteParams) -> Matrix6<C64> {
    Matrix6::<C64>::identity() * C64::new(0.0, -omega) - drift_matrix(p).0
}

fn condition_number(m: &Matrix6<C64>) -> f64 {
    let sv = SVD::new(*m, false, false).singular_values;
    let (max, min) = (sv.max(), sv.min());
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// `S = C (-i omega I - A)^{-1} B - D`, solved column by column with LU.
pub fn scattering(omega: f64, p: &TripartiteParams) -> Result<ScatteringMatrix> {
    p.validate()?;
    if !omega.is_finite() {
        return Err(Error::domain(format!("omega must be finite, got {omega}")));
    }
    let m = resolvent_operator(omega, p);
    let condition = condition_number(&m);
    if !(condition <= MAX_CONDITION) {
        return Err(Error::NearPole { omega, condition });
    }
    let b = input_matrix(p).map(|x| C64::new(x, 0.0));
    let x = m.lu().solve(&b).ok_or(Error::NearPole { omega, condition })?;
    let c = output_matrix(p).map(|v| C64::new(v, 0.0));
    let d = feedthrough_matrix().map(|v| C64::new(v, 0.0));
    let entries = c * x - d;
    if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NearPole { omega, condition });
    }
    Ok(ScatteringMatrix { omega, entries })
}

/// `R_2 S R_5^{-1}`: the same map acting on quadratures.
pub fn quadrature_scattering(s: &ScatteringMatrix) -> QuadratureScattering {
    rotation::<4>() * s.entries * rotation::<10>().adjoint()
}

/// Diagonal `(n + 1/2)` per bath, duplicated over both quadratures.
pub fn noise_matrix(p: &TripartiteParams) -> NoiseMatrix {
    let n = p.occupations.as_array();
    NoiseMatrix::from_diagonal(&nalgebra::SVector::<f64, 10>::from_fn(|k, _| n[k / 2] + 0.5))
}

/// Symmetrized `Re[S_q N S_q^†]`.
pub fn output_covariance(omega: f64, p: &TripartiteParams) -> Result<CovarianceMatrix> {
    let sq = quadrature_scattering(&scattering(omega, p)?);
    let n = noise_matrix(p).map(|v| C64::new(v, 0.0));
    let v: Matrix4<f64> = (sq * n * sq.adjoint()).map(|z| z.re);
    CovarianceMatrix::new(v)
}

/// `S_q N S_q^T` exactly as written, complex at generic `omega`.
pub fn output_covariance_literal(omega: f64, p: &TripartiteParams) -> Result<Matrix4<C64>> {
    let sq = quadrature_scattering(&scattering(omega, p)?);
    let n = noise_matrix(p).map(|v| C64::new(v, 0.0));
    Ok(sq * n * sq.transpose())
}

/// Stability verdict plus output entanglement at `omega`.
///
/// For an unstable drift matrix the covariance is formal; it is still
/// computed and a warning is logged.
pub fn entanglement(omega: f64, p: &TripartiteParams) -> Result<EntanglementResult> {
    entanglement_with(omega, p, LogBase::Natural)
}

pub fn entanglement_with(omega: f64, p: &TripartiteParams, base: LogBase) -> Result<EntanglementResult> {
    let stability = is_stable(&drift_matrix(p))?;
    if !stability.stable {
        log::warn!(
            "drift matrix unstable (max Re eigenvalue {:.3e} rad/s); covariance is formal",
            stability.max_re_eigenvalue
        );
    }
    let v = output_covariance(omega, p)?;
    let zeta = symplectic_eigenvalue_min(&v)?;
    Ok(EntanglementResult {
        zeta_minus: zeta,
        log_negativity: negativity_from_zeta(zeta, base),
        stable: stability.stable,
        max_re_eigenvalue: stability.max_re_eigenvalue,
    })
}
