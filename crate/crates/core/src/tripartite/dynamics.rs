//! Direct time integration of the noise-free mean dynamics. Serves as an
//! eigenvalue-free cross-check of [`super::is_stable`].

use nalgebra::{Matrix6, Vector6};
use num_complex::Complex64;

use super::matrices::DriftMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayOptions {
    pub rtol: f64,
    pub atol_rel: f64,
    /// Decay factor that counts as "decayed".
    pub threshold: f64,
    pub max_steps: usize,
}

impl Default for DecayOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-8,
            atol_rel: 1e-12,
            threshold: 1e-3,
            max_steps: 20_000_000,
        }
    }
}

type State = Vector6<Complex64>;

// Dormand-Prince 5(4) tableau. The system is autonomous, so the nodes are unused.
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrates `d eta/dt = A eta` from `initial` over `horizon` seconds and
/// reports whether the state norm fell below `threshold` times its start.
pub fn mean_dynamics_decay_oracle(
    a: &DriftMatrix,
    initial: &[Complex64; 6],
    horizon: f64,
    opts: &DecayOptions,
) -> Result<bool> {
    let m: Matrix6<Complex64> = a.0;
    let y0 = State::from_column_slice(initial);
    let n0 = y0.norm();
    if n0 == 0.0 {
        return Err(Error::domain("initial state must be non-zero"));
    }
    let atol = opts.atol_rel * n0;
    let rate = m.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);

    let mut y = y0;
    let mut t = 0.0;
    let mut h = (0.01 / rate).min(horizon);
    let mut k: [State; 7] = [State::zeros(); 7];
    k[0] = m * y;
    let mut steps = 0usize;

    while t < horizon {
        if steps >= opts.max_steps {
            return Err(Error::Computation(format!("step budget exhausted at t = {t:e} s")));
        }
        steps += 1;
        h = h.min(horizon - t);
        if h <= 1e-14 * horizon.max(t) {
            return Err(Error::Computation(format!("step size underflow at t = {t:e} s")));
        }
        for s in 1..7 {
            let mut ys = y;
            for (j, coeff) in A[s].iter().enumerate().take(s) {
                if *coeff != 0.0 {
                    ys += k[j] * Complex64::from(h * coeff);
                }
            }
            k[s] = m * ys;
        }
        let mut y5 = y;
        let mut y4 = y;
        for s in 0..7 {
            y5 += k[s] * Complex64::from(h * B5[s]);
            y4 += k[s] * Complex64::from(h * B4[s]);
        }
        let err = ((0..6)
            .map(|i| {
                let sc = atol + opts.rtol * y[i].norm().max(y5[i].norm());
                ((y5[i] - y4[i]).norm() / sc).powi(2)
            })
            .sum::<f64>()
            / 6.0)
            .sqrt();
        if err <= 1.0 {
            t += h;
            y = y5;
            // First-same-as-last: stage 7 is the derivative at the new point.
            k[0] = k[6];
            if !y.norm().is_finite() {
                return Ok(false);
            }
        }
        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        h *= factor;
    }
    Ok(y.norm() < opts.threshold * n0)
}
