//! Acceptance suite. Runs without the libtest harness so every criterion
//! prints exactly one PASS/FAIL line with its tolerance and runtime.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::time::Instant;

use emcavity::config::load_config;
use emcavity::device::toy::ParallelPlate;
use emcavity::device::*;
use emcavity::fitting::*;
use emcavity::physics::*;
use emcavity::response::{omit_reflection, optomechanical_damping};
use emcavity::tripartite::*;
use nalgebra::Vector3;
use num_complex::Complex64;
use proptest::prelude::*;
use proptest::test_runner::{Config as PropConfig, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Verdict = (bool, String);
type Criterion = (&'static str, f64, fn() -> Verdict);

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn thermal_cells() -> Verdict {
    let cells = [
        (300e3, 7e-3, 4.9e2),
        (4e6, 7e-3, 3.6e1),
        (10e9, 4.0, 7.9),
        (10e9, 300.0, 6.3e2),
    ];
    let worst = cells
        .iter()
        .map(|&(f, t, want)| rel(thermal_occupation(hz_to_rad(f), t).unwrap(), want))
        .fold(0.0, f64::max);
    let cold = thermal_occupation(hz_to_rad(10e9), 7e-3).unwrap();
    (
        worst < 0.03 && cold < 1e-20,
        format!("max rel err {worst:.2e} (tol 3e-2); n(10 GHz, 7 mK) = {cold:.1e} (< 1e-20)"),
    )
}

fn design_tables() -> Verdict {
    let errs = [
        rel(zero_point_fluctuation(2.06e-15, hz_to_rad(3.85e6)).unwrap(), 32.49e-15),
        rel(participation_ratio(1.78e-15, 10.97e-15).unwrap(), 0.140),
        rel(zero_point_fluctuation(2.64e-15, hz_to_rad(8.28e6)).unwrap(), 19.58e-15),
        rel(participation_ratio(1.51e-15, 10.97e-15).unwrap(), 0.121),
    ];
    let worst = errs.iter().cloned().fold(0.0, f64::max);
    (
        worst < 0.005,
        format!("max rel err {worst:.2e} over x_zpf and eta (tol 5e-3)"),
    )
}

fn fit_round_trip() -> Verdict {
    let f_c = 10.29184e9;
    let p = ReflectionModelParams {
        amplitude: 0.168,
        tau: 63.51e-9,
        phi: 1.20,
        omega_c: hz_to_rad(f_c),
        kappa_in: hz_to_rad(0.41e6),
        kappa_ex: hz_to_rad(1.45e6),
        delta: hz_to_rad(-20.36e-3),
    };
    let span = 10.0 * rad_to_hz(p.kappa());
    let grid = linear_grid(f_c - span, f_c + span, 2001);
    let synth = |snr, seed| synthesize_trace(&grid, |f| reflection_model_hz(f, &p), snr, seed).unwrap();

    let q = fit_reflection(&synth(None, 0), None).unwrap().params;
    let clean = [
        rel(q.amplitude, p.amplitude),
        rel(q.tau, p.tau),
        rel(q.phi, p.phi),
        rel(q.omega_c, p.omega_c),
        rel(q.kappa_in, p.kappa_in),
        rel(q.kappa_ex, p.kappa_ex),
        rel(q.delta, p.delta),
    ]
    .iter()
    .cloned()
    .fold(0.0, f64::max);

    let mut wc = 0.0f64;
    let (mut kin, mut kex) = (Vec::new(), Vec::new());
    for seed in 0..50 {
        let fit = fit_reflection(&synth(Some(40.0), seed), None).unwrap();
        wc = wc.max(rel(fit.params.omega_c, p.omega_c));
        kin.push(rel(fit.params.kappa_in, p.kappa_in));
        kex.push(rel(fit.params.kappa_ex, p.kappa_ex));
    }
    let median = |v: &mut Vec<f64>| {
        v.sort_by(f64::total_cmp);
        0.5 * (v[v.len() / 2 - 1] + v[v.len() / 2])
    };
    let (mi, me) = (median(&mut kin), median(&mut kex));
    (
        clean < 1e-6 && wc < 1e-6 && mi < 0.02 && me < 0.02,
        format!(
            "noiseless max rel err {clean:.1e} (tol 1e-6); 40 dB x 50 seeds: worst omega_c {wc:.1e} (tol 1e-6), \
             median kappa_in {mi:.2e}, kappa_ex {me:.2e} (tol 2e-2)"
        ),
    )
}

/// `|R|` at the centre and its neighbours `+-delta` on either side.
fn centre_is_minimum(cavity: &CavityParams, mech: &MechParams, g: f64) -> bool {
    let width = mech.gamma + 4.0 * g * g / cavity.kappa();
    let r = |w: f64| omit_reflection(w, cavity, mech, g, mech.omega_m).norm();
    let d = 1e-2 * width;
    let c = r(mech.omega_m);
    c < r(mech.omega_m + d) && c < r(mech.omega_m - d)
}

fn omit_evolution() -> Verdict {
    let unit = hz_to_rad(1e6);
    let strategy = (0.1f64..1.0, 1.2f64..10.0, 5.0f64..50.0, -5.0f64..-3.0);
    let mut runner = TestRunner::new(PropConfig {
        cases: 64,
        failure_persistence: None,
        ..PropConfig::default()
    });
    let decades = std::cell::Cell::new(f64::INFINITY);
    let result = runner.run(&strategy, |(k_in, ratio, om, log_gamma)| {
        let cavity = CavityParams::new(hz_to_rad(1e10), k_in * unit, ratio * k_in * unit).unwrap();
        let kappa = cavity.kappa();
        let mech = MechParams::new(om * kappa, 10f64.powf(log_gamma) * kappa, 1e-15).unwrap();
        let g0 = hz_to_rad(10.0);
        // Sweep starts where the centre reflection passes through zero:
        // 2 g^2 / gamma = (kappa_ex - kappa_in) / 2.
        let x0 = 0.5 * (cavity.kappa_ex - cavity.kappa_in);
        let n0 = x0 * mech.gamma / (2.0 * g0 * g0);
        let n: Vec<f64> = (0..81).map(|k| n0 * 10f64.powf(5.0 * k as f64 / 80.0)).collect();
        let at = |nc: f64| omit_reflection(mech.omega_m, &cavity, &mech, g0 * nc.sqrt(), mech.omega_m).norm();
        let mags: Vec<f64> = n.iter().map(|&nc| at(nc)).collect();
        for w in mags.windows(2) {
            prop_assert!(w[1] >= w[0] - 1e-12, "|R(Omega)| fell from {} to {}", w[0], w[1]);
        }
        let minima: Vec<bool> = n
            .iter()
            .map(|&nc| centre_is_minimum(&cavity, &mech, g0 * nc.sqrt()))
            .collect();
        prop_assert!(minima[0] && !minima[minima.len() - 1]);
        let flips = minima.windows(2).filter(|w| w[0] != w[1]).count();
        prop_assert_eq!(flips, 1);
        decades.set(decades.get().min((n[n.len() - 1] / n[0]).log10()));
        Ok(())
    });
    let decades = decades.get();
    match result {
        Ok(()) => (
            decades >= 4.0,
            format!("64 cases, {decades:.0} decades of n_c: |R(Omega)| non-decreasing, one dip-to-peak flip"),
        ),
        Err(e) => (false, format!("{e}")),
    }
}

fn random_params<R: Rng>(rng: &mut R) -> TripartiteParams {
    TripartiteParams {
        delta_a: rng.random_range(-6.0..6.0),
        delta_c: rng.random_range(-6.0..6.0),
        omega_m: rng.random_range(0.5..5.0),
        g_b: rng.random_range(0.0..1.5),
        g_c: rng.random_range(0.0..3.0),
        kappa_a_in: rng.random_range(0.05..2.0),
        kappa_a_ex: rng.random_range(0.05..2.0),
        kappa_c_in: rng.random_range(0.05..2.0),
        kappa_c_ex: rng.random_range(0.05..2.0),
        gamma: rng.random_range(0.001..0.2),
        occupations: Occupations {
            a_in: rng.random_range(0.0..3.0),
            a_ex: rng.random_range(0.0..3.0),
            b_in: rng.random_range(0.0..50.0),
            c_in: rng.random_range(0.0..3.0),
            c_ex: rng.random_range(0.0..3.0),
        },
    }
}

fn entanglement_null() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(63);
    let mut worst = f64::INFINITY;
    let mut en_max = 0.0f64;
    for k in 0..100 {
        let mut p = random_params(&mut rng);
        p.g_b = 0.0;
        // Vacuum baths put zeta_minus exactly on the 1/2 bound.
        if k % 2 == 0 {
            p.occupations = Occupations::default();
        }
        let omega = rng.random_range(-4.0..4.0);
        match entanglement(omega, &p) {
            Ok(e) => {
                worst = worst.min(e.zeta_minus);
                en_max = en_max.max(e.log_negativity);
            }
            Err(e) => return (false, format!("evaluation failed: {e}")),
        }
    }
    (
        worst >= 0.5 - 1e-9 && en_max == 0.0,
        format!("100 points: min zeta_minus {worst:.12} (>= 0.5 - 1e-9), max E_N {en_max:e} (== 0)"),
    )
}

fn symplectic_oracle() -> Verdict {
    if !common::building_blocks_are_symplectic() {
        return (false, "generator blocks are not symplectic".into());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0f64;
    for k in 0..1000 {
        let (m, exact) = if k < 100 {
            let r = rng.random_range(0.0..2.0);
            (common::tmsv(r), Some(0.5 * (-2.0 * r).exp()))
        } else {
            (common::random_physical_covariance(&mut rng), None)
        };
        let v = match CovarianceMatrix::new(m) {
            Ok(v) => v,
            Err(e) => return (false, format!("draw {k} rejected: {e}")),
        };
        let zeta = match symplectic_eigenvalue_min(&v) {
            Ok(z) => z,
            Err(e) => return (false, format!("draw {k}: {e}")),
        };
        worst = worst.max(rel(zeta, common::partial_transpose_zeta(&m)));
        if let Some(z) = exact {
            worst = worst.max(rel(zeta, z));
        }
    }
    (
        worst < 1e-9,
        format!("1000 covariances (100 two-mode squeezed): max rel err {worst:.2e} (tol 1e-9)"),
    )
}

fn stability_dual_check() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut stable, mut unstable, mut rejected, mut disagree) = (0, 0, 0, 0);
    let opts = DecayOptions::default();
    while stable + unstable < 100 {
        let p = random_params(&mut rng);
        let a = drift_matrix(&p);
        let s = is_stable(&a).unwrap();
        // The ODE verdict is only sharp away from the boundary.
        let margin = s.max_re_eigenvalue.abs();
        if margin < 1e-2 {
            rejected += 1;
            continue;
        }
        let bucket = if s.stable { &mut stable } else { &mut unstable };
        if *bucket >= 50 {
            continue;
        }
        *bucket += 1;
        let initial: [Complex64; 6] =
            std::array::from_fn(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let decayed = match mean_dynamics_decay_oracle(&a, &initial, 25.0 / margin, &opts) {
            Ok(d) => d,
            Err(e) => return (false, format!("oracle failed: {e}")),
        };
        if decayed != s.stable {
            disagree += 1;
        }
    }
    (
        disagree == 0,
        format!("{stable} stable + {unstable} unstable draws, {disagree} disagreements (tol 0); {rejected} within 1e-2 of the boundary skipped"),
    )
}

fn reference_sweep_shape() -> Verdict {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs/tripartite_reference.json");
    let p = match load_config(&path).and_then(|s| s.require_tripartite()) {
        Ok(p) => p,
        Err(e) => return (false, format!("{}: {e}", path.display())),
    };
    let setup = rel(p.delta_a, -p.omega_m) < 1e-12
        && rel(p.delta_c, -p.omega_m) < 1e-12
        && rel(rad_to_hz(p.g_c), 6.43e6) < 1e-12;
    let grid = SweepGrid {
        base: p,
        axes: vec![SweepAxis::linspace(SweepParam::GB, 0.0, hz_to_rad(3.2e6), 161).unwrap()],
    };
    let rows = sweep(&grid, 0.0);
    let hz = |r: &SweepRow| rad_to_hz(r.coordinates[0]);
    let null_at_zero = rows[0].log_negativity() == Some(0.0);
    let positive: Vec<&SweepRow> = rows
        .iter()
        .filter(|r| r.log_negativity().is_some_and(|e| e > 0.0))
        .collect();
    let first_unstable = rows.iter().position(|r| r.stable() == Some(false));
    let errors = rows.iter().filter(|r| r.stable().is_none()).count();
    let ordered = match (positive.last(), first_unstable) {
        (Some(last), Some(k)) => hz(last) < hz(&rows[k]) && rows[k..].iter().all(|r| r.stable() == Some(false)),
        _ => false,
    };
    let peak = positive.iter().filter_map(|r| r.log_negativity()).fold(0.0, f64::max);
    let detail = match (positive.first(), positive.last(), first_unstable) {
        (Some(a), Some(b), Some(k)) => format!(
            "E_N(0) = 0: {null_at_zero}; E_N > 0 on g_b/2pi in [{:.3}, {:.3}] MHz (peak {peak:.3}); unstable from {:.3} MHz; {errors} errors",
            hz(a) * 1e-6,
            hz(b) * 1e-6,
            hz(&rows[k]) * 1e-6
        ),
        _ => format!("E_N(0) = 0: {null_at_zero}; {} entangled rows; unstable row: {first_unstable:?}", positive.len()),
    };
    (
        setup && null_at_zero && !positive.is_empty() && ordered && errors == 0,
        detail,
    )
}

fn string_mode(n: usize, length: f64, rho: f64, section: f64) -> VolumeSampleSet {
    let dx = length / n as f64;
    let samples = (0..n)
        .map(|k| {
            let x = (k as f64 + 0.5) * dx;
            VolumeSample {
                position: Vector3::new(x, 0.0, 0.0),
                weight: dx * section,
                eps_rel: 1.0,
                e: Vector3::zeros(),
                rho,
                q: Vector3::new(0.0, 1e-12 * (std::f64::consts::PI * x / length).sin(), 0.0),
            }
        })
        .collect();
    VolumeSampleSet::new(samples).unwrap()
}

fn device_oracles() -> Verdict {
    let plate = ParallelPlate::default();
    let v = plate.volume().unwrap();
    let rigid = rel(effective_mass(&v).unwrap(), plate.plate_mass());

    let (length, rho, section) = (50e-6, 3100.0, 100e-9 * 250e-9);
    let string = rel(
        effective_mass(&string_mode(10_000, length, rho, section)).unwrap(),
        0.5 * rho * length * section,
    );

    let cap = rel(
        capacitance_from_energy(&v, plate.voltage).unwrap(),
        EPSILON_0 * plate.area() / plate.gap,
    );

    let s = plate.surfaces().unwrap();
    let boundary = relative_capacitance_derivative(&s, &v).unwrap();
    let c = capacitance_from_energy(&v, plate.voltage).unwrap();
    let fd = plate.finite_difference_dc_da(1e-4).unwrap() / c;
    let (to_fd, to_gap) = (rel(boundary, fd), rel(boundary, 1.0 / plate.gap));
    (
        rigid < 1e-12 && string < 1e-6 && cap < 1e-10 && to_fd < 0.01 && to_gap < 0.01,
        format!(
            "rigid m_eff {rigid:.1e} (tol 1e-12); string M/2 {string:.1e} (tol 1e-6); C {cap:.1e} (tol 1e-10); \
             (1/C)dC/dalpha vs finite difference {to_fd:.1e}, vs 1/d {to_gap:.1e} (tol 1e-2)"
        ),
    )
}

fn damping_identities() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut odd = 0.0f64;
    for _ in 0..1000 {
        let (kappa, om, g) = (
            rng.random_range(0.1..10.0),
            rng.random_range(0.1..10.0),
            rng.random_range(0.01..1.0),
        );
        let d = rng.random_range(-20.0..20.0);
        let (plus, minus) = (
            optomechanical_damping(d, g, kappa, om).unwrap(),
            optomechanical_damping(-d, g, kappa, om).unwrap(),
        );
        odd = odd.max((plus + minus).abs() / plus.abs().max(f64::MIN_POSITIVE));
    }
    let (om, g) = (hz_to_rad(4e6), hz_to_rad(1e4));
    let kappa = 4.0 * om / 40.0;
    let limit = 2.0 * g * g / kappa;
    let dev = rel(optomechanical_damping(om, g, kappa, om).unwrap(), limit);
    let order = (kappa / (4.0 * om)).powi(2);
    (
        odd < 1e-12 && dev <= order,
        format!("odd-symmetry rel err {odd:.1e} (tol 1e-12); resolved-sideband rel dev {dev:.3e} (tol (kappa/4 Omega)^2 = {order:.3e})"),
    )
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("thermal occupation cells", 1.0, thermal_cells),
        ("design-table x_zpf and eta", 1.0, design_tables),
        ("reflection fit round trip", 10.0, fit_round_trip),
        ("OMIT dip-to-peak evolution", 5.0, omit_evolution),
        ("entanglement null at g_b = 0", 10.0, entanglement_null),
        ("symplectic eigenvalue oracle", 10.0, symplectic_oracle),
        ("stability vs mean-dynamics decay", 30.0, stability_dual_check),
        ("reference g_b sweep shape", 30.0, reference_sweep_shape),
        ("device integral oracles", 5.0, device_oracles),
        ("optomechanical damping identities", 1.0, damping_identities),
    ];
    let mut failures = 0;
    for (k, (name, budget, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (ok, detail) = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            (false, format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = start.elapsed().as_secs_f64();
        let pass = ok && secs < *budget;
        failures += usize::from(!pass);
        println!(
            "{} {:>2} {name}: {detail}; {secs:.2} s (budget {budget} s)",
            if pass { "PASS" } else { "FAIL" },
            k + 1
        );
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failures,
        criteria.len()
    );
    if failures > 0 {
        std::process::exit(1);
    }
}
