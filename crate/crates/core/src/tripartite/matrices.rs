//! Linear-system matrices of the electro-magno-mechanical model.
//!
//! Mode basis `(a, a†, b, b†, c, c†)`, input basis `(a_in, a_in†, a_ex,
//! a_ex†, b_in, b_in†, c_in, c_in†, c_ex, c_ex†)`, output basis `(a_out,
//! a_out†, c_out, c_out†)`.

use nalgebra::{Matrix2, Matrix6, SMatrix};
use num_complex::Complex64;

use super::TripartiteParams;

pub type C64 = Complex64;
pub type InputMatrix = SMatrix<f64, 6, 10>;
pub type OutputMatrix = SMatrix<f64, 4, 6>;
pub type FeedthroughMatrix = SMatrix<f64, 4, 10>;

/// Generator of the noise-free mean dynamics `d eta / dt = A eta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftMatrix(pub Matrix6<C64>);

impl DriftMatrix {
    pub fn entries(&self) -> &Matrix6<C64> {
        &self.0
    }

    /// Swaps each annihilation/creation row and column pair and conjugates;
    /// a physical drift matrix is a fixed point of this map.
    pub fn pair_conjugate(&self) -> DriftMatrix {
        let partner = |k: usize| k ^ 1;
        DriftMatrix(Matrix6::from_fn(|r, c| self.0[(partner(r), partner(c))].conj()))
    }

    /// The same generator expressed on quadratures `(X_a, Y_a, X_b, Y_b,
    /// X_c, Y_c)`. Real whenever the pair-conjugation symmetry holds.
    pub fn quadrature_form(&self) -> Matrix6<C64> {
        let r = rotation::<6>();
        r * self.0 * r.adjoint()
    }
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Drift matrix of the linearized Langevin equations.
pub fn drift_matrix(p: &TripartiteParams) -> DriftMatrix {
    let ka = p.kappa_a();
    let kc = p.kappa_c();
    let (gb, gc) = (p.g_b, p.g_c);
    let mut a = Matrix6::<C64>::zeros();

    a[(0, 0)] = c(-0.5 * ka, -p.delta_a);
    a[(1, 1)] = c(-0.5 * ka, p.delta_a);
    a[(2, 2)] = c(-0.5 * p.gamma, -p.omega_m);
    a[(3, 3)] = c(-0.5 * p.gamma, p.omega_m);
    a[(4, 4)] = c(-0.5 * kc, -p.delta_c);
    a[(5, 5)] = c(-0.5 * kc, p.delta_c);

    // Radiation-pressure coupling -i g_b (b + b†) on a, -i g_b (a + a†) on b.
    for col in [2, 3] {
        a[(0, col)] = c(0.0, -gb);
        a[(1, col)] = c(0.0, gb);
    }
    for col in [0, 1] {
        a[(2, col)] = c(0.0, -gb);
        a[(3, col)] = c(0.0, gb);
    }

    // Beam-splitter exchange between photons and magnons.
    a[(0, 4)] = c(0.0, -gc);
    a[(1, 5)] = c(0.0, gc);
    a[(4, 0)] = c(0.0, -gc);
    a[(5, 1)] = c(0.0, gc);

    DriftMatrix(a)
}

/// Couples each bath to its mode with amplitude `sqrt(rate)`.
pub fn input_matrix(p: &TripartiteParams) -> InputMatrix {
    let mut b = InputMatrix::zeros();
    let (ai, ae) = (p.kappa_a_in.sqrt(), p.kappa_a_ex.sqrt());
    let g = p.gamma.sqrt();
    let (ci, ce) = (p.kappa_c_in.sqrt(), p.kappa_c_ex.sqrt());
    for k in 0..2 {
        b[(k, k)] = ai;
        b[(k, 2 + k)] = ae;
        b[(2 + k, 4 + k)] = g;
        b[(4 + k, 6 + k)] = ci;
        b[(4 + k, 8 + k)] = ce;
    }
    b
}

/// Input-output relation for the two measured ports.
pub fn output_matrix(p: &TripartiteParams) -> OutputMatrix {
    let mut m = OutputMatrix::zeros();
    let (ae, ce) = (p.kappa_a_ex.sqrt(), p.kappa_c_ex.sqrt());
    m[(0, 0)] = ae;
    m[(1, 1)] = ae;
    m[(2, 4)] = ce;
    m[(3, 5)] = ce;
    m
}

/// Selects the drive fields `a_ex`, `c_ex` that are promptly reflected.
pub fn feedthrough_matrix() -> FeedthroughMatrix {
    let mut d = FeedthroughMatrix::zeros();
    d[(0, 2)] = 1.0;
    d[(1, 3)] = 1.0;
    d[(2, 8)] = 1.0;
    d[(3, 9)] = 1.0;
    d
}

/// Single-mode map from `(a, a†)` to `(X, Y)`: `(1/sqrt 2) [[1, 1], [-i, i]]`.
pub fn quadrature_unitary() -> Matrix2<C64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Matrix2::new(c(s, 0.0), c(s, 0.0), c(0.0, -s), c(0.0, s))
}

/// Block-diagonal `I_{N/2} ⊗ U` for an `N`-dimensional ladder basis.
pub fn rotation<const N: usize>() -> SMatrix<C64, N, N> {
    let u = quadrature_unitary();
    let mut r = SMatrix::<C64, N, N>::zeros();
    for k in 0..N / 2 {
        r.fixed_view_mut::<2, 2>(2 * k, 2 * k).copy_from(&u);
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::physics::hz_to_rad;
    use crate::tripartite::test_params::{random_params, reference};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn decoupled_drift_is_diagonal() {
        let mut p = reference();
        p.g_b = 0.0;
        p.g_c = 0.0;
        let a = drift_matrix(&p).0;
        for r in 0..6 {
            for col in 0..6 {
                if r != col {
                    assert_eq!(a[(r, col)], C64::new(0.0, 0.0));
                }
            }
        }
        assert_eq!(a[(0, 0)], c(-0.5 * p.kappa_a(), -p.delta_a));
        assert_eq!(a[(3, 3)], c(-0.5 * p.gamma, p.omega_m));
    }

    #[test]
    fn drift_trace_is_minus_total_damping() {
        let p = reference();
        let tr = drift_matrix(&p).0.trace();
        let expected = -(p.kappa_a() + p.gamma + p.kappa_c());
        assert!((tr.re - expected).abs() <= 1e-12 * expected.abs());
        assert!(tr.im.abs() <= 1e-6);
        assert!((expected + hz_to_rad(2.0e6 + 100.0 + 2.0e6)).abs() < 1e-6 * expected.abs());
    }

    #[test]
    fn drift_pair_conjugation_symmetry() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let p = random_params(&mut rng);
            let a = drift_matrix(&p);
            assert_eq!(a, a.pair_conjugate());
            let q = a.quadrature_form();
            assert!(q.iter().all(|z| z.im.abs() <= 1e-12 * (1.0 + z.re.abs()) * 1e3));
        }
    }

    #[test]
    fn input_output_matrix_structure() {
        let p = reference();
        let b = input_matrix(&p);
        let bbt = b * b.transpose();
        let diag = [p.kappa_a(), p.kappa_a(), p.gamma, p.gamma, p.kappa_c(), p.kappa_c()];
        for r in 0..6 {
            for col in 0..6 {
                let want = if r == col { diag[r] } else { 0.0 };
                assert!((bbt[(r, col)] - want).abs() <= 1e-9 * diag[r]);
            }
        }
        let d = feedthrough_matrix();
        assert_eq!(d * d.transpose(), nalgebra::Matrix4::identity());

        let mut zero = p;
        zero.kappa_a_in = 0.0;
        zero.kappa_a_ex = 0.0;
        zero.kappa_c_in = 0.0;
        zero.kappa_c_ex = 0.0;
        zero.gamma = 0.0;
        assert_eq!(input_matrix(&zero), InputMatrix::zeros());
        assert_eq!(output_matrix(&zero), OutputMatrix::zeros());
    }

    #[test]
    fn quadrature_unitary_is_unitary() {
        let u = quadrature_unitary();
        let e = u * u.adjoint() - Matrix2::identity();
        assert!(e.norm() < 1e-15);
        let r = rotation::<10>();
        assert!((r * r.adjoint() - SMatrix::<C64, 10, 10>::identity()).norm() < 1e-14);
    }
}
