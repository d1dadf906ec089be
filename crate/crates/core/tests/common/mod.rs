//! Independent Gaussian-state oracles shared by the integration tests.

#![allow(dead_code)]

use nalgebra::{Matrix4, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;

/// Symplectic form for quadratures ordered `(x_a, p_a, x_c, p_c)`.
pub fn omega() -> Matrix4<f64> {
    #[rustfmt::skip]
    let m = Matrix4::new(
        0.0, 1.0, 0.0, 0.0,
        -1.0, 0.0, 0.0, 0.0,
        0.0, 0.0, 0.0, 1.0,
        0.0, 0.0, -1.0, 0.0,
    );
    m
}

/// Smallest symplectic eigenvalue of the partial transpose, from the spectrum
/// of the Hermitian matrix `V~^1/2 (i Omega) V~^1/2` whose eigenvalues are
/// `+-nu_k`.
pub fn partial_transpose_zeta(v: &Matrix4<f64>) -> f64 {
    let p = Matrix4::from_diagonal(&nalgebra::Vector4::new(1.0, 1.0, 1.0, -1.0));
    let vt = p * v * p;
    let eig = SymmetricEigen::new(vt);
    let root =
        eig.eigenvectors * Matrix4::from_diagonal(&eig.eigenvalues.map(f64::sqrt)) * eig.eigenvectors.transpose();
    let rc = root.map(Complex64::from);
    let h = rc * omega().map(|x| Complex64::new(0.0, x)) * rc;
    let h = (h + h.adjoint()) * Complex64::from(0.5);
    SymmetricEigen::new(h)
        .eigenvalues
        .iter()
        .map(|x| x.abs())
        .fold(f64::INFINITY, f64::min)
}

/// Two-mode squeezed vacuum with squeezing `r`; `zeta = e^{-2r} / 2`.
pub fn tmsv(r: f64) -> Matrix4<f64> {
    let (c, s) = (0.5 * (2.0 * r).cosh(), 0.5 * (2.0 * r).sinh());
    #[rustfmt::skip]
    let m = Matrix4::new(
        c, 0.0, s, 0.0,
        0.0, c, 0.0, -s,
        s, 0.0, c, 0.0,
        0.0, -s, 0.0, c,
    );
    m
}

fn rotation(theta_a: f64, theta_c: f64) -> Matrix4<f64> {
    let mut m = Matrix4::zeros();
    for (k, t) in [(0, theta_a), (2, theta_c)] {
        let (s, c) = t.sin_cos();
        m[(k, k)] = c;
        m[(k, k + 1)] = s;
        m[(k + 1, k)] = -s;
        m[(k + 1, k + 1)] = c;
    }
    m
}

fn local_squeeze(r_a: f64, r_c: f64) -> Matrix4<f64> {
    Matrix4::from_diagonal(&nalgebra::Vector4::new(
        (-r_a).exp(),
        r_a.exp(),
        (-r_c).exp(),
        r_c.exp(),
    ))
}

fn beam_splitter(theta: f64) -> Matrix4<f64> {
    let (s, c) = theta.sin_cos();
    #[rustfmt::skip]
    let m = Matrix4::new(
        c, 0.0, s, 0.0,
        0.0, c, 0.0, s,
        -s, 0.0, c, 0.0,
        0.0, -s, 0.0, c,
    );
    m
}

fn two_mode_squeeze(r: f64) -> Matrix4<f64> {
    let (c, s) = (r.cosh(), r.sinh());
    #[rustfmt::skip]
    let m = Matrix4::new(
        c, 0.0, s, 0.0,
        0.0, c, 0.0, -s,
        s, 0.0, c, 0.0,
        0.0, -s, 0.0, c,
    );
    m
}

/// `S diag(nu_a, nu_a, nu_c, nu_c) S^T` for a random symplectic `S` built
/// from rotations, local and two-mode squeezers and a beam splitter.
pub fn random_physical_covariance<R: Rng>(rng: &mut R) -> Matrix4<f64> {
    let tau = std::f64::consts::TAU;
    let mut s = Matrix4::identity();
    for _ in 0..2 {
        s = rotation(rng.random_range(0.0..tau), rng.random_range(0.0..tau)) * s;
        s = local_squeeze(rng.random_range(-0.8..0.8), rng.random_range(-0.8..0.8)) * s;
        s = two_mode_squeeze(rng.random_range(-0.8..0.8)) * s;
        s = beam_splitter(rng.random_range(0.0..tau)) * s;
    }
    let (na, nc) = (0.5 + rng.random_range(0.0..3.0), 0.5 + rng.random_range(0.0..3.0));
    let d = Matrix4::from_diagonal(&nalgebra::Vector4::new(na, na, nc, nc));
    let v = s * d * s.transpose();
    0.5 * (v + v.transpose())
}

/// Checks `S^T Omega S = Omega` for the generator's building blocks.
pub fn is_symplectic(s: &Matrix4<f64>) -> bool {
    (s.transpose() * omega() * s - omega()).abs().max() < 1e-12
}

pub fn building_blocks_are_symplectic() -> bool {
    [
        rotation(0.3, 1.1),
        local_squeeze(0.4, -0.2),
        beam_splitter(0.7),
        two_mode_squeeze(0.5),
    ]
    .iter()
    .all(is_symplectic)
}
