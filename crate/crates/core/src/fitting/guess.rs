//! Starting point for the reflection fit, read off the trace shape.

use num_complex::Complex64;

use super::model::ReflectionModelParams;
use super::trace::ComplexTrace;
use crate::error::{Error, Result};
use crate::physics::{hz_to_rad, TWO_PI};

/// Relative dip contrast below which the trace counts as flat.
const MIN_CONTRAST: f64 = 1e-3;

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Least-squares line `y = a + b x`.
fn line_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let b = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (my - b * mx, b)
}

fn unwrap(phase: &mut [f64]) {
    for k in 1..phase.len() {
        let d = phase[k] - phase[k - 1];
        phase[k] -= TWO_PI * (d / TWO_PI).round();
    }
}

/// Where `|R|` crosses `level` walking outward from `center`, by linear
/// interpolation in Hz. `None` if it never does.
fn crossing(f: &[f64], mag: &[f64], center: usize, level: f64, step: isize) -> Option<f64> {
    let mut k = center as isize;
    loop {
        let next = k + step;
        if next < 0 || next as usize >= f.len() {
            return None;
        }
        let (a, b) = (mag[k as usize], mag[next as usize]);
        if b >= level {
            let t = if b > a { (level - a) / (b - a) } else { 1.0 };
            let (fa, fb) = (f[k as usize], f[next as usize]);
            return Some(fa + t * (fb - fa));
        }
        k = next;
    }
}

/// Heuristic estimate of all seven reflection parameters.
///
/// The dip minimum locates the resonance. With normalized depth `d =
/// |R|_min / A`, the Lorentzian `|R|^2 = (x^2 + d^2 kappa^2/4) / (x^2 +
/// kappa^2/4)` crosses level `L` at `x^2 = (kappa^2/4) (L^2 - d^2) / (1 -
/// L^2)`, so the measured width at `L = sqrt(d)` gives `kappa`. The line
/// delay comes from the phase slope on the outer tails, and the sign of the
/// delay-corrected response at resonance picks the coupling branch.
pub fn initial_guess(trace: &ComplexTrace) -> Result<ReflectionModelParams> {
    trace.validate()?;
    let n = trace.len();
    let z = trace.values();
    let mag: Vec<f64> = z.iter().map(|v| v.norm()).collect();
    if trace.im.iter().all(|v| *v == 0.0) && trace.re.iter().all(|v| *v >= 0.0) {
        return Err(Error::Guess(
            "trace looks magnitude-only; the coupling branch needs complex data".into(),
        ));
    }

    let i_min = (0..n).min_by(|&a, &b| mag[a].total_cmp(&mag[b])).unwrap();
    let edge = (n / 50).max(1);
    let tail = (n / 10).max(2);
    let mut outer: Vec<f64> = mag[..tail].to_vec();
    outer.extend_from_slice(&mag[n - tail..]);
    let amplitude = median(outer);
    if !(amplitude > 0.0) {
        return Err(Error::Guess("baseline magnitude is zero".into()));
    }
    let depth = mag[i_min] / amplitude;
    if 1.0 - depth < MIN_CONTRAST {
        return Err(Error::Guess("no resonance dip found (trace is flat)".into()));
    }
    if i_min < edge || i_min >= n - edge {
        return Err(Error::Guess("resonance minimum lies at the grid edge".into()));
    }

    // Normalized crossing level; sqrt(d) unless the dip is nearly critical.
    let level = depth.sqrt().max(0.3);
    let lo = crossing(&trace.f_hz, &mag, i_min, level * amplitude, -1);
    let hi = crossing(&trace.f_hz, &mag, i_min, level * amplitude, 1);
    let (Some(lo), Some(hi)) = (lo, hi) else {
        return Err(Error::Guess("resonance is not fully inside the grid".into()));
    };
    let f_c = 0.5 * (lo + hi);
    let half_width = hz_to_rad(0.5 * (hi - lo));
    let l2 = level * level;
    let kappa = 2.0 * half_width * ((1.0 - l2) / (l2 - depth * depth)).sqrt();
    if !(kappa > 0.0) || !kappa.is_finite() {
        return Err(Error::Guess("could not estimate the linewidth".into()));
    }
    let omega_c = hz_to_rad(f_c);

    // Delay from the tails: far from resonance R ~ -A e^{-i(omega tau + phi)}.
    let x: Vec<f64> = trace.f_hz.iter().map(|f| TWO_PI * (f - f_c)).collect();
    let far = 8.0 * kappa;
    let mut left: Vec<usize> = (0..n).filter(|&k| x[k] < -far).collect();
    let mut right: Vec<usize> = (0..n).filter(|&k| x[k] > far).collect();
    if left.len() < 2 || right.len() < 2 {
        left = (0..tail).collect();
        right = (n - tail..n).collect();
    }
    let phase_of = |idx: &[usize]| {
        let mut p: Vec<f64> = idx.iter().map(|&k| z[k].arg()).collect();
        unwrap(&mut p);
        p
    };
    let (pl, pr) = (phase_of(&left), phase_of(&right));
    let xl: Vec<f64> = left.iter().map(|&k| x[k]).collect();
    let xr: Vec<f64> = right.iter().map(|&k| x[k]).collect();
    let (al, bl) = line_fit(&xl, &pl);
    let (_, br) = line_fit(&xr, &pr);
    let slope0 = 0.5 * (bl + br);
    // Bring the right tail onto the branch of the left-tail line.
    let shift = TWO_PI * ((al + slope0 * xr[0] - pr[0]) / TWO_PI).round();
    let mut xs = xl.clone();
    xs.extend_from_slice(&xr);
    let mut ps = pl.clone();
    ps.extend(pr.iter().map(|p| p + shift));
    let (intercept, slope) = line_fit(&xs, &ps);
    let tau = -slope;
    // Tail phase = -(tau x + phase0) + pi.
    let phase0 = std::f64::consts::PI - intercept;

    // Delay-corrected response at resonance: (kappa_in - kappa_ex) / kappa.
    let rotate = |k: usize| -z[k] * Complex64::from_polar(1.0 / amplitude, tau * x[k] + phase0);
    let center = rotate(i_min).re;
    let (big, small) = (
        0.5 * kappa * (1.0 + depth),
        (0.5 * kappa * (1.0 - depth)).max(1e-3 * kappa),
    );
    let (kappa_in, kappa_ex) = if center < 0.0 { (small, big) } else { (big, small) };

    let phi = wrap_phase(phase0 - tau * omega_c);
    Ok(ReflectionModelParams {
        amplitude,
        tau,
        phi,
        omega_c,
        kappa_in,
        kappa_ex,
        delta: 0.0,
    })
}

/// Maps an angle into `(-pi, pi]`.
pub fn wrap_phase(phi: f64) -> f64 {
    let w = phi - TWO_PI * (phi / TWO_PI).round();
    if w <= -std::f64::consts::PI {
        w + TWO_PI
    } else {
        w
    }
}
