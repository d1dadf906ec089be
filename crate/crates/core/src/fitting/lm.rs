//! Damped Gauss-Newton (Levenberg-Marquardt) on a real residual vector.

use nalgebra::{DMatrix, DVector};

/// A least-squares problem in `n` unconstrained parameters.
pub trait LeastSquares {
    fn num_params(&self) -> usize;
    fn num_residuals(&self) -> usize;
    fn residuals(&self, x: &DVector<f64>, out: &mut DVector<f64>);

    /// Defaults to central differences with step `1e-6 (1 + |x_j|)`.
    fn jacobian(&self, x: &DVector<f64>, out: &mut DMatrix<f64>) {
        let m = self.num_residuals();
        let mut xp = x.clone();
        let mut rp = DVector::zeros(m);
        let mut rm = DVector::zeros(m);
        for j in 0..x.len() {
            let h = 1e-6 * (1.0 + x[j].abs());
            xp[j] = x[j] + h;
            self.residuals(&xp, &mut rp);
            xp[j] = x[j] - h;
            self.residuals(&xp, &mut rm);
            xp[j] = x[j];
            out.set_column(j, &((&rp - &rm) / (2.0 * h)));
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmOptions {
    pub initial_lambda: f64,
    pub max_iterations: usize,
    pub step_tol: f64,
    pub gradient_tol: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self {
            initial_lambda: 1e-3,
            max_iterations: 500,
            step_tol: 1e-10,
            gradient_tol: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LmReport {
    pub x: DVector<f64>,
    /// Euclidean norm of the residual vector at `x`.
    pub residual_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    pub message: String,
    /// `J^T J` at `x`, for the local quadratic error model.
    pub jtj: DMatrix<f64>,
    pub rank_deficient: bool,
}

/// Minimizes `|r(x)|^2` from `x0`.
///
/// Damping is Marquardt-scaled: `(J^T J + lambda diag(J^T J)) dx = -J^T r`,
/// with `lambda` divided by 10 on an accepted step and multiplied by 10 on
/// a rejected one. Stops when the step is below `step_tol` relative to `x`
/// or the gradient is below `gradient_tol` times the residual norm.
pub fn minimize<P: LeastSquares + ?Sized>(problem: &P, x0: DVector<f64>, opts: &LmOptions) -> LmReport {
    let (n, m) = (problem.num_params(), problem.num_residuals());
    let mut x = x0;
    let mut r = DVector::zeros(m);
    let mut trial_r = DVector::zeros(m);
    let mut jac = DMatrix::zeros(m, n);
    problem.residuals(&x, &mut r);
    let mut cost = r.norm_squared();
    let mut lambda = opts.initial_lambda;
    let mut converged = false;
    let mut message = String::from("iteration limit reached");
    let mut iterations = 0;

    if !cost.is_finite() {
        return finish(problem, x, &r, 0, false, "non-finite residual at start".into());
    }

    'outer: while iterations < opts.max_iterations {
        iterations += 1;
        problem.jacobian(&x, &mut jac);
        let jtj = jac.transpose() * &jac;
        let grad = jac.transpose() * &r;
        if grad.amax() <= opts.gradient_tol * cost.sqrt() {
            converged = true;
            message = "gradient below tolerance".into();
            break;
        }
        loop {
            let mut a = jtj.clone();
            for k in 0..n {
                a[(k, k)] += lambda * jtj[(k, k)].max(1e-300);
            }
            let Some(chol) = a.cholesky() else {
                lambda *= 10.0;
                if lambda > 1e30 {
                    message = "damped normal equations singular".into();
                    break 'outer;
                }
                continue;
            };
            let step = chol.solve(&(-&grad));
            let small = step.norm() <= opts.step_tol * (x.norm() + opts.step_tol);
            let trial = &x + &step;
            problem.residuals(&trial, &mut trial_r);
            let trial_cost = trial_r.norm_squared();
            if trial_cost.is_finite() && trial_cost <= cost {
                x = trial;
                std::mem::swap(&mut r, &mut trial_r);
                cost = trial_cost;
                lambda = (lambda / 10.0).max(1e-15);
                if small {
                    converged = true;
                    message = "relative step below tolerance".into();
                    break 'outer;
                }
                break;
            }
            if small {
                converged = true;
                message = "relative step below tolerance".into();
                break 'outer;
            }
            lambda *= 10.0;
            if lambda > 1e30 {
                message = "no descent direction found".into();
                break 'outer;
            }
        }
    }
    finish(problem, x, &r, iterations, converged, message)
}

fn finish<P: LeastSquares + ?Sized>(
    problem: &P,
    x: DVector<f64>,
    r: &DVector<f64>,
    iterations: usize,
    converged: bool,
    message: String,
) -> LmReport {
    let mut jac = DMatrix::zeros(problem.num_residuals(), problem.num_params());
    problem.jacobian(&x, &mut jac);
    let jtj = jac.transpose() * &jac;
    let sv = jac.clone().svd(false, false).singular_values;
    let rank_deficient = sv.min() <= 1e-12 * sv.max();
    LmReport {
        x,
        residual_norm: r.norm(),
        iterations,
        converged,
        message,
        jtj,
        rank_deficient,
    }
}

/// Parameter covariance `s^2 (J^T J)^+` with `s^2 = |r|^2 / (m - n)`.
/// Directions with no curvature get infinite variance.
pub fn covariance(report: &LmReport, num_residuals: usize) -> DMatrix<f64> {
    let n = report.x.len();
    let dof = num_residuals.saturating_sub(n).max(1) as f64;
    let s2 = report.residual_norm.powi(2) / dof;
    let svd = report.jtj.clone().svd(true, true);
    let (u, v_t) = (svd.u.unwrap(), svd.v_t.unwrap());
    let smax = svd.singular_values.max();
    let mut cov = DMatrix::zeros(n, n);
    for k in 0..n {
        let s = svd.singular_values[k];
        if s > 1e-14 * smax {
            cov += (v_t.row(k).transpose() * u.column(k).transpose()) * (s2 / s);
        }
    }
    for k in 0..n {
        let sk = svd.singular_values[k];
        if !(sk > 1e-14 * smax) {
            for j in 0..n {
                if v_t[(k, j)].abs() > 1e-8 {
                    cov[(j, j)] = f64::INFINITY;
                }
            }
        }
    }
    cov
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Rosenbrock as residuals `(10 (y - x^2), 1 - x)`.
    struct Rosenbrock;

    impl LeastSquares for Rosenbrock {
        fn num_params(&self) -> usize {
            2
        }
        fn num_residuals(&self) -> usize {
            2
        }
        fn residuals(&self, x: &DVector<f64>, out: &mut DVector<f64>) {
            out[0] = 10.0 * (x[1] - x[0] * x[0]);
            out[1] = 1.0 - x[0];
        }
    }

    struct Line {
        t: Vec<f64>,
        y: Vec<f64>,
    }

    impl LeastSquares for Line {
        fn num_params(&self) -> usize {
            2
        }
        fn num_residuals(&self) -> usize {
            self.t.len()
        }
        fn residuals(&self, x: &DVector<f64>, out: &mut DVector<f64>) {
            for (k, (t, y)) in self.t.iter().zip(&self.y).enumerate() {
                out[k] = x[0] + x[1] * t - y;
            }
        }
    }

    #[test]
    fn solves_rosenbrock() {
        let rep = minimize(&Rosenbrock, DVector::from_vec(vec![-1.2, 1.0]), &LmOptions::default());
        assert!(rep.converged, "{}", rep.message);
        assert!((rep.x[0] - 1.0).abs() < 1e-8 && (rep.x[1] - 1.0).abs() < 1e-8);
    }

    #[test]
    fn linear_fit_covariance_matches_closed_form() {
        let t: Vec<f64> = (0..20).map(f64::from).collect();
        let y: Vec<f64> = t
            .iter()
            .enumerate()
            .map(|(k, t)| 1.0 + 2.0 * t + if k % 2 == 0 { 0.1 } else { -0.1 })
            .collect();
        let p = Line { t: t.clone(), y };
        let rep = minimize(&p, DVector::from_vec(vec![0.0, 0.0]), &LmOptions::default());
        assert!(rep.converged);
        let cov = covariance(&rep, t.len());
        let n = t.len() as f64;
        let (st, stt) = (t.iter().sum::<f64>(), t.iter().map(|v| v * v).sum::<f64>());
        let s2 = rep.residual_norm.powi(2) / (n - 2.0);
        let det = n * stt - st * st;
        assert!((cov[(1, 1)] - s2 * n / det).abs() < 1e-8 * cov[(1, 1)]);
        assert!((cov[(0, 0)] - s2 * stt / det).abs() < 1e-8 * cov[(0, 0)]);
    }
}
