//! Two-mode Gaussian entanglement from a 4×4 quadrature covariance.

use nalgebra::{Matrix2, Matrix4, SymmetricEigen, Vector4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const SYMMETRY_TOL: f64 = 1e-10;
const PSD_TOL: f64 = 1e-10;
const CLAMP_TOL: f64 = 1e-12;
const INCONSISTENT_TOL: f64 = 1e-9;
/// Relative discriminant below which the closed form loses half its digits.
const NEAR_DEGENERATE: f64 = 1e-6;
const NEGATIVITY_FLOOR: f64 = 1e-12;

/// Covariance of `(X_a, Y_a, X_c, Y_c)` with vacuum variance 1/2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovarianceMatrix(Matrix4<f64>);

impl CovarianceMatrix {
    /// Checks symmetry (1e-10 relative) and positive semidefiniteness
    /// (smallest eigenvalue above -1e-10 relative).
    pub fn new(m: Matrix4<f64>) -> Result<Self> {
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::Inconsistent("covariance has non-finite entries".into()));
        }
        let scale = m.abs().max().max(f64::MIN_POSITIVE);
        let asym = (m - m.transpose()).abs().max();
        if asym > SYMMETRY_TOL * scale {
            return Err(Error::Inconsistent(format!(
                "covariance not symmetric (max deviation {asym:.3e})"
            )));
        }
        let sym = 0.5 * (m + m.transpose());
        let min_ev = SymmetricEigen::new(sym).eigenvalues.min();
        if min_ev < -PSD_TOL * scale {
            return Err(Error::Inconsistent(format!(
                "covariance not positive semidefinite (eigenvalue {min_ev:.3e})"
            )));
        }
        Ok(Self(sym))
    }

    /// Wraps a matrix without validation; symmetry is still enforced.
    pub fn new_unchecked(m: Matrix4<f64>) -> Self {
        Self(0.5 * (m + m.transpose()))
    }

    pub fn vacuum() -> Self {
        Self(Matrix4::identity() * 0.5)
    }

    pub fn matrix(&self) -> &Matrix4<f64> {
        &self.0
    }

    pub fn v_a(&self) -> Matrix2<f64> {
        self.0.fixed_view::<2, 2>(0, 0).into_owned()
    }

    pub fn v_c(&self) -> Matrix2<f64> {
        self.0.fixed_view::<2, 2>(2, 2).into_owned()
    }

    pub fn v_ac(&self) -> Matrix2<f64> {
        self.0.fixed_view::<2, 2>(0, 2).into_owned()
    }
}

/// Smallest symplectic eigenvalue of the partially transposed covariance.
///
/// Uses the two-mode invariants `Sigma = |V_a| + |V_c| - 2 |V_ac|` and
/// `|V|`; `zeta^2 = (Sigma - sqrt(Sigma^2 - 4|V|)) / 2`, evaluated in the
/// cancellation-free form `2|V| / (Sigma + sqrt(...))`. When the two
/// eigenvalues nearly coincide the discriminant carries only its rounding
/// error, so that case goes through [`partial_transpose_spectrum`] instead.
pub fn symplectic_eigenvalue_min(v: &CovarianceMatrix) -> Result<f64> {
    let sigma = v.v_a().determinant() + v.v_c().determinant() - 2.0 * v.v_ac().determinant();
    let det = v.0.determinant();
    let mut disc = sigma * sigma - 4.0 * det;
    let s2 = sigma * sigma;
    if disc < 0.0 {
        if disc < -INCONSISTENT_TOL * s2 {
            return Err(Error::Inconsistent(format!(
                "Sigma^2 - 4|V| = {disc:.3e} is negative (Sigma = {sigma:.3e})"
            )));
        }
        if disc < -CLAMP_TOL * s2 {
            log::debug!("clamping Sigma^2 - 4|V| = {disc:.3e} to zero");
        }
        disc = 0.0;
    }
    let root = disc.sqrt();
    if !(sigma > 0.0) || !(det > 0.0) {
        return Err(Error::Inconsistent(format!(
            "invariants out of range (Sigma = {sigma:.3e}, |V| = {det:.3e})"
        )));
    }
    if disc < NEAR_DEGENERATE * s2 {
        return Ok(partial_transpose_spectrum(v)[0]);
    }
    Ok((2.0 * det / (sigma + root)).sqrt())
}

/// Both symplectic eigenvalues of the partial transpose, ascending, from the
/// spectrum `+-nu` of the Hermitian matrix `W^1/2 (i Omega) W^1/2` with
/// `W = P V P`. Accurate to rounding even at degeneracy.
pub fn partial_transpose_spectrum(v: &CovarianceMatrix) -> [f64; 2] {
    let flip = Matrix4::from_diagonal(&Vector4::new(1.0, 1.0, 1.0, -1.0));
    let w = SymmetricEigen::new(flip * v.0 * flip);
    let root =
        w.eigenvectors * Matrix4::from_diagonal(&w.eigenvalues.map(|x| x.max(0.0).sqrt())) * w.eigenvectors.transpose();
    let root = root.map(Complex64::from);
    let i = Complex64::i();
    let z = Complex64::from(0.0);
    #[rustfmt::skip]
    let form = Matrix4::new(
        z, i, z, z,
        -i, z, z, z,
        z, z, z, i,
        z, z, -i, z,
    );
    let h = root * form * root;
    let h = (h + h.adjoint()) * Complex64::from(0.5);
    let mut nu: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().map(|x| x.abs()).collect();
    nu.sort_by(f64::total_cmp);
    // Eigenvalues come in +-nu pairs.
    [0.5 * (nu[0] + nu[1]), 0.5 * (nu[2] + nu[3])]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LogBase {
    /// Nats.
    #[default]
    Natural,
    /// Ebits.
    Two,
}

/// `max(0, -ln(2 zeta))` with `zeta` the smallest symplectic eigenvalue;
/// values below `1e-12` are reported as exactly zero.
pub fn log_negativity(v: &CovarianceMatrix) -> Result<f64> {
    log_negativity_with(v, LogBase::Natural)
}

pub fn log_negativity_with(v: &CovarianceMatrix, base: LogBase) -> Result<f64> {
    let zeta = symplectic_eigenvalue_min(v)?;
    Ok(negativity_from_zeta(zeta, base))
}

pub(crate) fn negativity_from_zeta(zeta: f64, base: LogBase) -> f64 {
    let nats = -(2.0 * zeta).ln();
    // Rounding-level values around the separable bound read as zero.
    let nats = if nats > NEGATIVITY_FLOOR { nats } else { 0.0 };
    match base {
        LogBase::Natural => nats,
        LogBase::Two => nats / std::f64::consts::LN_2,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntanglementResult {
    pub zeta_minus: f64,
    pub log_negativity: f64,
    pub stable: bool,
    pub max_re_eigenvalue: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tmsv(r: f64) -> CovarianceMatrix {
        let (c, s) = (0.5 * (2.0 * r).cosh(), 0.5 * (2.0 * r).sinh());
        #[rustfmt::skip]
        let m = Matrix4::new(
            c, 0.0, s, 0.0,
            0.0, c, 0.0, -s,
            s, 0.0, c, 0.0,
            0.0, -s, 0.0, c,
        );
        CovarianceMatrix::new(m).unwrap()
    }

    #[test]
    fn vacuum_sits_on_the_bound() {
        let v = CovarianceMatrix::vacuum();
        assert!((symplectic_eigenvalue_min(&v).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(log_negativity(&v).unwrap(), 0.0);
    }

    #[test]
    fn two_mode_squeezed_vacuum() {
        for r in [0.01, 0.3, 1.0, 2.5] {
            let v = tmsv(r);
            let z = symplectic_eigenvalue_min(&v).unwrap();
            let want = 0.5 * (-2.0 * r).exp();
            assert!((z - want).abs() <= 1e-9 * want, "r = {r}: {z} vs {want}");
            let en = log_negativity(&v).unwrap();
            assert!((en - 2.0 * r).abs() < 1e-9 * (2.0 * r));
            let bits = log_negativity_with(&v, LogBase::Two).unwrap();
            assert!((bits - 2.0 * r / std::f64::consts::LN_2).abs() < 1e-9);
        }
    }

    #[test]
    fn closed_form_agrees_with_spectrum() {
        for v in [tmsv(0.4), tmsv(1.5)] {
            let z = symplectic_eigenvalue_min(&v).unwrap();
            let [lo, _] = partial_transpose_spectrum(&v);
            assert!((z - lo).abs() < 1e-12 * z);
        }
        let nearly_vacuum =
            CovarianceMatrix::new(Matrix4::identity() * 0.5 + Matrix4::from_fn(|r, c| 1e-16 * (r + c) as f64)).unwrap();
        assert!((symplectic_eigenvalue_min(&nearly_vacuum).unwrap() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn classical_zeta_clamps_to_zero_negativity() {
        assert_eq!(negativity_from_zeta(0.6, LogBase::Natural), 0.0);
        assert_eq!(negativity_from_zeta(0.5, LogBase::Natural), 0.0);
        assert_eq!(negativity_from_zeta(0.5 * (1.0 - 1e-15), LogBase::Natural), 0.0);
        assert!(negativity_from_zeta(0.5 * (1.0 - 1e-9), LogBase::Natural) > 0.0);
    }

    #[test]
    fn rejects_unphysical_input() {
        let mut m = Matrix4::identity() * 0.5;
        m[(0, 1)] = 0.3;
        assert!(CovarianceMatrix::new(m).is_err());
        let neg = Matrix4::from_diagonal(&nalgebra::Vector4::new(0.5, -0.5, 0.5, 0.5));
        assert!(CovarianceMatrix::new(neg).is_err());
    }
}
